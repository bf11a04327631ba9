use super::Statevector;
use crate::bits;
use crate::error::{Error, Result};
use crate::operators::{Mapping, PauliSum};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// Anything that can act on a statevector as a Hermitian operator.
pub trait Observable: Sync {
    fn n_qubits(&self) -> usize;
    fn apply(&self, psi: &Statevector) -> Statevector;

    fn expectation(&self, psi: &Statevector) -> f64 {
        psi.inner(&self.apply(psi)).re
    }
}

impl Observable for PauliSum {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, psi: &Statevector) -> Statevector {
        PauliSum::apply(self, psi)
    }
}

/// Sorted set of basis states a computation is confined to.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub n_qubits: usize,
    states: Vec<u64>,
}

impl Support {
    pub fn from_states(n_qubits: usize, mut states: Vec<u64>) -> Self {
        states.sort_unstable();
        states.dedup();
        Self { n_qubits, states }
    }

    pub fn full(n_qubits: usize) -> Self {
        Self { n_qubits, states: (0..1u64 << n_qubits).collect() }
    }

    /// Determinants with `n_alpha` / `n_beta` electrons over `n_spatial`
    /// orbitals, encoded in the qubit basis of `mapping`.
    pub fn sector(n_spatial: usize, n_alpha: usize, n_beta: usize, mapping: Mapping) -> Self {
        let n_qubits = 2 * n_spatial;
        let alphas = bits::combinations(n_spatial, n_alpha);
        let betas = bits::combinations(n_spatial, n_beta);
        let mut states = Vec::with_capacity(alphas.len() * betas.len());
        for &a in &alphas {
            for &b in &betas {
                states.push(mapping.encode(bits::interleave(a, b, n_spatial), n_qubits));
            }
        }
        Self::from_states(n_qubits, states)
    }

    /// `reference XOR span(masks)`: every state reachable by products of Pauli
    /// strings with the given X masks.
    pub fn closure(reference: u64, masks: &[u64], n_qubits: usize) -> Result<Self> {
        let mut basis: Vec<u64> = Vec::new();
        for &m in masks {
            let mut v = m;
            for &b in &basis {
                v = v.min(v ^ b);
            }
            if v != 0 {
                basis.push(v);
                basis.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        if basis.len() > super::MAX_QUBITS {
            return Err(Error::Size(format!("closure spans 2^{} states", basis.len())));
        }
        let mut states = vec![reference];
        for &b in &basis {
            let extra: Vec<u64> = states.iter().map(|s| s ^ b).collect();
            states.extend(extra);
        }
        Ok(Self::from_states(n_qubits, states))
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn position(&self, b: u64) -> Option<usize> {
        self.states.binary_search(&b).ok()
    }

    pub fn contains(&self, b: u64) -> bool {
        self.position(b).is_some()
    }
}

/// Operator restricted to a [`Support`], stored row-compressed.
///
/// Exact for expectation values and gradients of states confined to the
/// support; rows and columns outside it are dropped.
#[derive(Clone, Debug)]
pub struct SparseOperator {
    support: Support,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
}

impl SparseOperator {
    /// Rows given as `(column position, value)` lists in support order.
    pub fn from_rows(support: Support, rows: Vec<Vec<(u32, Complex64)>>) -> Self {
        assert_eq!(rows.len(), support.len());
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let total: usize = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(total);
        let mut vals = Vec::with_capacity(total);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { support, row_ptr, cols, vals }
    }

    pub fn from_pauli_sum(h: &PauliSum, support: Support) -> Self {
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (p, c) in h.terms() {
            let phase = crate::operators::PauliString { x: p.x, z: p.z }.apply(0).1;
            groups.entry(p.x).or_default().push((p.z, c * phase));
        }
        let groups: Vec<(u64, Vec<(u64, Complex64)>)> = groups.into_iter().collect();
        let rows: Vec<Vec<(u32, Complex64)>> = support
            .states()
            .par_iter()
            .map(|&r| {
                let mut row = Vec::new();
                for (x, terms) in &groups {
                    let c = r ^ x;
                    if let Some(pos) = support.position(c) {
                        let mut v = Complex64::new(0.0, 0.0);
                        for (z, coeff) in terms {
                            if (z & c).count_ones() % 2 == 0 {
                                v += coeff;
                            } else {
                                v -= coeff;
                            }
                        }
                        if v.norm() > 1e-14 {
                            row.push((pos as u32, v));
                        }
                    }
                }
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        Self::from_rows(support, rows)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Matrix over the support, dense (for small checks).
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let n = self.support.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }
}

impl Observable for SparseOperator {
    fn n_qubits(&self) -> usize {
        self.support.n_qubits
    }

    fn apply(&self, psi: &Statevector) -> Statevector {
        let states = self.support.states();
        let amps = psi.amplitudes();
        let local: Vec<Complex64> = states.iter().map(|&s| amps[s as usize]).collect();
        let vals: Vec<Complex64> = (0..states.len())
            .into_par_iter()
            .map(|i| {
                let mut v = Complex64::new(0.0, 0.0);
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    v += self.vals[k] * local[self.cols[k] as usize];
                }
                v
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (&s, v) in states.iter().zip(vals) {
            out[s as usize] = v;
        }
        Statevector::from_amplitudes(out).expect("same register size")
    }

    fn expectation(&self, psi: &Statevector) -> f64 {
        let states = self.support.states();
        let amps = psi.amplitudes();
        let local: Vec<Complex64> = states.iter().map(|&s| amps[s as usize]).collect();
        let mut total = 0.0;
        for (i, a) in local.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let mut v = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                v += self.vals[k] * local[self.cols[k] as usize];
            }
            total += (a.conj() * v).re;
        }
        total
    }
}
