//! Determinant-space FCI / CASCI solver (Slater-Condon rules, Davidson).
//!
//! Determinants are interleaved occupation bitstrings, so a CI vector is the
//! Jordan-Wigner statevector restricted to its particle sector.

mod davidson;
mod slater;

pub use davidson::{davidson, DavidsonOptions};
pub use slater::SpinIntegrals;

use crate::bits;
use crate::error::{domain, Error, Result};
use crate::integrals::{embed_active_space, ActiveSpace, EmbeddedHamiltonian, IntegralSet};
use crate::linalg::sorted_symmetric_eigen;
use crate::operators::Mapping;
use crate::rdm::ReducedDensityMatrices;
use crate::statevector::{SparseOperator, Statevector, Support};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

pub const MAX_DIMENSION: usize = 1_000_000;
const DENSE_LIMIT: usize = 2000;

/// Determinants with fixed alpha and beta electron counts, ordered by alpha
/// string then beta string (both ascending as bitmasks).
#[derive(Clone, Debug)]
pub struct DeterminantSpace {
    pub n_orb: usize,
    pub n_alpha: usize,
    pub n_beta: usize,
    alpha: Vec<u64>,
    beta: Vec<u64>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

impl DeterminantSpace {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_alpha > n_orb || n_beta > n_orb {
            return domain(format!("{n_alpha}a/{n_beta}b electrons do not fit in {n_orb} orbitals"));
        }
        if 2 * n_orb > 64 {
            return Err(Error::Size(format!("{n_orb} orbitals exceed the 32-orbital determinant encoding")));
        }
        let dim = binomial(n_orb, n_alpha) * binomial(n_orb, n_beta);
        if dim > MAX_DIMENSION as u128 {
            return Err(Error::Size(format!(
                "determinant space of {dim} exceeds the {MAX_DIMENSION} limit (about {:.1} GiB per vector)",
                dim as f64 * 8.0 / (1u64 << 30) as f64
            )));
        }
        Ok(Self {
            n_orb,
            n_alpha,
            n_beta,
            alpha: bits::combinations(n_orb, n_alpha),
            beta: bits::combinations(n_orb, n_beta),
        })
    }

    pub fn dimension(&self) -> usize {
        self.alpha.len() * self.beta.len()
    }

    pub fn determinant(&self, index: usize) -> u64 {
        let nb = self.beta.len();
        bits::interleave(self.alpha[index / nb], self.beta[index % nb], self.n_orb)
    }

    pub fn index_of(&self, det: u64) -> Option<usize> {
        let (a, b) = bits::deinterleave(det, self.n_orb);
        let ia = self.alpha.binary_search(&a).ok()?;
        let ib = self.beta.binary_search(&b).ok()?;
        Some(ia * self.beta.len() + ib)
    }

    pub fn determinants(&self) -> Vec<u64> {
        (0..self.dimension()).map(|i| self.determinant(i)).collect()
    }
}

/// Eigenpairs from [`fci_solve`]; `vectors` holds one CI vector per column.
#[derive(Clone, Debug)]
pub struct FciSolution {
    pub space: DeterminantSpace,
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl FciSolution {
    /// Root `k` as a statevector over `2 n_orb` qubits.
    pub fn statevector(&self, k: usize, mapping: Mapping) -> Result<Statevector> {
        let n_q = 2 * self.space.n_orb;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_q];
        for i in 0..self.space.dimension() {
            amps[mapping.encode(self.space.determinant(i), n_q) as usize] = Complex64::new(self.vectors[(i, k)], 0.0);
        }
        Statevector::from_amplitudes(amps)
    }
}

struct CsrReal {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

fn build_rows(ints: &SpinIntegrals, space: &DeterminantSpace) -> CsrReal {
    let rows: Vec<Vec<(u32, f64)>> = (0..space.dimension())
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::new();
            ints.for_each_connection(space.determinant(i), |t, v| {
                if let Some(j) = space.index_of(t) {
                    row.push((j as u32, v));
                }
            });
            row
        })
        .collect();
    let mut row_ptr = vec![0];
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    for r in rows {
        for (c, v) in r {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    CsrReal { row_ptr, cols, vals }
}

impl CsrReal {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.row_ptr.len() - 1;
        let out: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.cols[k] as usize]).sum())
            .collect();
        DVector::from_vec(out)
    }

    fn diagonal(&self) -> DVector<f64> {
        let n = self.row_ptr.len() - 1;
        DVector::from_fn(n, |i, _| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).filter(|&k| self.cols[k] as usize == i).map(|k| self.vals[k]).sum()
        })
    }
}

/// Solver selection for [`fci_solve_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FciAlgorithm {
    Auto,
    Dense,
    Davidson,
}

/// Lowest `n_roots` eigenpairs in the `(n_alpha, n_beta)` sector.
pub fn fci_solve(emb: &EmbeddedHamiltonian, n_alpha: usize, n_beta: usize, n_roots: usize) -> Result<FciSolution> {
    fci_solve_with(emb, n_alpha, n_beta, n_roots, FciAlgorithm::Auto)
}

pub fn fci_solve_with(
    emb: &EmbeddedHamiltonian,
    n_alpha: usize,
    n_beta: usize,
    n_roots: usize,
    algorithm: FciAlgorithm,
) -> Result<FciSolution> {
    let space = DeterminantSpace::new(emb.n_act, n_alpha, n_beta)?;
    let dim = space.dimension();
    if n_roots == 0 || n_roots > dim {
        return domain(format!("requested {n_roots} roots from a space of dimension {dim}"));
    }
    let ints = SpinIntegrals::new(emb);
    let h = build_rows(&ints, &space);
    let dense = match algorithm {
        FciAlgorithm::Auto => dim <= DENSE_LIMIT,
        FciAlgorithm::Dense => true,
        FciAlgorithm::Davidson => false,
    };
    if dense {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for k in h.row_ptr[i]..h.row_ptr[i + 1] {
                m[(i, h.cols[k] as usize)] += h.vals[k];
            }
        }
        let (vals, vecs) = sorted_symmetric_eigen(&m);
        return Ok(FciSolution {
            space,
            energies: vals.iter().take(n_roots).copied().collect(),
            vectors: vecs.columns(0, n_roots).into_owned(),
        });
    }
    let diag = h.diagonal();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    // Lowest-diagonal determinants, each with a small deterministic admixture
    // of every determinant so that no spatial symmetry sector is excluded.
    let guesses: Vec<DVector<f64>> = order[..n_roots]
        .iter()
        .map(|&i| {
            let mut g = DVector::from_fn(dim, |j, _| 1e-4 * ((j as f64 + 1.0) * 0.754_877_666).sin());
            g[i] = 1.0;
            g
        })
        .collect();
    let (energies, vecs) = davidson(|x| h.apply(x), &diag, guesses, n_roots, &DavidsonOptions::default())?;
    let mut vectors = DMatrix::zeros(dim, n_roots);
    for (k, mut v) in vecs.into_iter().enumerate() {
        crate::linalg::fix_sign(&mut v);
        vectors.set_column(k, &v);
    }
    Ok(FciSolution { space, energies, vectors })
}

/// Lowest CASCI energy (core plus active-space FCI) for the given partition.
pub fn casci_energy(ints: &IntegralSet, cas: &ActiveSpace) -> Result<f64> {
    Ok(casci_solve(ints, cas, 1)?.0.energies[0])
}

/// Embedded Hamiltonian and its lowest roots.
pub fn casci_solve(
    ints: &IntegralSet,
    cas: &ActiveSpace,
    n_roots: usize,
) -> Result<(FciSolution, EmbeddedHamiltonian)> {
    let emb = embed_active_space(ints, cas)?;
    let sol = fci_solve(&emb, emb.n_alpha, emb.n_beta, n_roots)?;
    Ok((sol, emb))
}

pub fn fci_energy(ints: &IntegralSet) -> Result<f64> {
    casci_energy(ints, &ActiveSpace::full(ints))
}

/// Exact 1-/2-RDMs of one CI root.
pub fn rdms_from_civector(sol: &FciSolution, root: usize) -> Result<ReducedDensityMatrices> {
    if root >= sol.energies.len() {
        return domain(format!("root {root} not computed"));
    }
    let amps: Vec<(u64, Complex64)> = (0..sol.space.dimension())
        .filter(|&i| sol.vectors[(i, root)] != 0.0)
        .map(|i| (sol.space.determinant(i), Complex64::new(sol.vectors[(i, root)], 0.0)))
        .collect();
    Ok(ReducedDensityMatrices::from_occupation_amplitudes(&amps, sol.space.n_orb))
}

/// The active-space Hamiltonian as a sparse operator on `support`, whose
/// states are qubit basis states under `mapping`.
pub fn hamiltonian_on_support(emb: &EmbeddedHamiltonian, support: Support, mapping: Mapping) -> SparseOperator {
    let ints = SpinIntegrals::new(emb);
    let n_q = 2 * emb.n_act;
    let rows: Vec<Vec<(u32, Complex64)>> = support
        .states()
        .par_iter()
        .map(|&s| {
            let mut row = Vec::new();
            ints.for_each_connection(mapping.decode(s, n_q), |t, v| {
                if let Some(j) = support.position(mapping.encode(t, n_q)) {
                    row.push((j as u32, Complex64::new(v, 0.0)));
                }
            });
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    SparseOperator::from_rows(support, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::PackedEri;

    fn one_orbital() -> EmbeddedHamiltonian {
        let mut v = PackedEri::zeros(1);
        v.set(0, 0, 0, 0, 0.5);
        EmbeddedHamiltonian {
            n_act: 1,
            n_alpha: 1,
            n_beta: 1,
            e_core: 0.3,
            h_eff: DMatrix::from_element(1, 1, -1.0),
            v_act: v,
        }
    }

    #[test]
    fn single_orbital_pair() {
        let sol = fci_solve(&one_orbital(), 1, 1, 1).unwrap();
        assert!((sol.energies[0] - (-1.2)).abs() < 1e-14);
    }

    #[test]
    fn dimension_guard() {
        match DeterminantSpace::new(30, 10, 10) {
            Err(Error::Size(msg)) => assert!(msg.contains("exceeds")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn index_round_trip() {
        let s = DeterminantSpace::new(5, 2, 3).unwrap();
        assert_eq!(s.dimension(), 100);
        for i in 0..s.dimension() {
            assert_eq!(s.index_of(s.determinant(i)), Some(i));
        }
    }
}
