//! Adiabatic-connection corrections from active-space RDMs: the linearized
//! integrand (AC0) and the full coupling-constant integral (AC), both built on
//! extended RPA with the reference RDMs held fixed along the path.
//!
//! The zeroth-order Hamiltonian keeps the exact interaction inside each of the
//! inactive, active and virtual groups and couples the groups only through a
//! mean field. Excitation pairs are `(p, q)` with `n_q > n_p` in the natural
//! orbital basis, so every metric entry `n_q - n_p` is positive.

use crate::commutators::{Contracted, RdmView};
use crate::error::{Error, Result};
use crate::integrals::{ActiveSpace, IntegralSet, OrbitalClass};
use crate::linalg::{sorted_symmetric_eigen, Tensor4};
use crate::orbital_opt::{rotation_pairs, RotationClasses};
use crate::rdm::{BasisTag, FullSpaceRdms, ReducedDensityMatrices};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Pairs whose occupation difference is below this are dropped.
pub const METRIC_THRESHOLD: f64 = 1e-6;

/// Active orbitals rotated to natural orbitals of the spin-summed 1-RDM.
#[derive(Clone, Debug)]
pub struct NaturalOrbitals {
    /// Full-space rotation, identity outside the active block.
    pub rotation: DMatrix<f64>,
    /// Active occupations, descending.
    pub occupations: Vec<f64>,
    pub ints: IntegralSet,
    pub rdms: ReducedDensityMatrices,
}

pub fn natural_orbital_basis(
    ints: &IntegralSet,
    cas: &ActiveSpace,
    rdms: &ReducedDensityMatrices,
) -> Result<NaturalOrbitals> {
    let n_act = cas.active.len();
    if rdms.n_act != n_act {
        return Err(Error::Dimension { expected: n_act, found: rdms.n_act });
    }
    let d = &rdms.d1;
    let off_diag = (0..n_act)
        .flat_map(|i| (0..n_act).filter(move |&j| j != i).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max(d[(i, j)].abs()));
    let mut u = DMatrix::zeros(n_act, n_act);
    let mut occupations = Vec::with_capacity(n_act);
    if off_diag < 1e-10 {
        // already natural: only reorder, so degenerate occupations keep their orbitals
        let mut order: Vec<usize> = (0..n_act).collect();
        order.sort_by(|&i, &j| d[(j, j)].total_cmp(&d[(i, i)]));
        for (k, &src) in order.iter().enumerate() {
            u[(src, k)] = 1.0;
            occupations.push(d[(src, src)]);
        }
    } else {
        let (vals, vecs) = sorted_symmetric_eigen(d);
        for k in 0..n_act {
            let src = n_act - 1 - k;
            u.set_column(k, &vecs.column(src));
            occupations.push(vals[src]);
        }
    }
    let mut rotation = DMatrix::identity(ints.n_orb, ints.n_orb);
    for (i, &t) in cas.active.iter().enumerate() {
        for (j, &s) in cas.active.iter().enumerate() {
            rotation[(t, s)] = u[(i, j)];
        }
    }
    let no_ints = ints.transform(&rotation);
    let tag = BasisTag { active: cas.active.clone(), stamp: no_ints.basis_stamp };
    let no_rdms = rdms.rotated(&u).with_tag(tag);
    Ok(NaturalOrbitals { rotation, occupations, ints: no_ints, rdms: no_rdms })
}

/// `H^alpha = H0 + alpha (H - H0)` as dense integrals.
#[derive(Clone, Debug)]
pub struct AlphaHamiltonian {
    pub h: DMatrix<f64>,
    pub g: Tensor4,
    pub h0: DMatrix<f64>,
    pub g0: Tensor4,
}

impl AlphaHamiltonian {
    /// `d1` is the full-space spin-summed 1-RDM; it must not couple groups.
    pub fn new(ints: &IntegralSet, cas: &ActiveSpace, d1: &DMatrix<f64>) -> Self {
        let n = ints.n_orb;
        let cls = cas.classes();
        let g = ints.eri_dense();
        let mut h0 = DMatrix::zeros(n, n);
        for p in 0..n {
            for q in 0..n {
                if cls[p] != cls[q] {
                    continue;
                }
                let mut x = ints.h[(p, q)];
                for r in 0..n {
                    if cls[r] == cls[p] {
                        continue;
                    }
                    for s in 0..n {
                        let d = d1[(r, s)];
                        if d != 0.0 {
                            x += d * (g.get(p, q, r, s) - 0.5 * g.get(p, s, r, q));
                        }
                    }
                }
                h0[(p, q)] = x;
            }
        }
        let mut g0 = g.clone();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let c = cls[p];
                        if cls[q] != c || cls[r] != c || cls[s] != c {
                            g0.set(p, q, r, s, 0.0);
                        }
                    }
                }
            }
        }
        Self { h: ints.h.clone(), g, h0, g0 }
    }

    pub fn at(&self, alpha: f64) -> (DMatrix<f64>, Tensor4) {
        let h = &self.h0 + (&self.h - &self.h0) * alpha;
        let mut g = self.g0.clone();
        for (x, (&a, &b)) in g.as_mut_slice().iter_mut().zip(self.g0.as_slice().iter().zip(self.g.as_slice())) {
            *x = a + alpha * (b - a);
        }
        (h, g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Block {
    ActiveActive,
    ActiveInactive,
    VirtualActive,
    VirtualInactive,
}

impl Block {
    pub const ALL: [Block; 4] =
        [Block::ActiveActive, Block::ActiveInactive, Block::VirtualActive, Block::VirtualInactive];

    fn of(a: OrbitalClass, b: OrbitalClass) -> Option<Block> {
        use OrbitalClass::*;
        match (a, b) {
            (Active, Active) => Some(Block::ActiveActive),
            (Active, Inactive) | (Inactive, Active) => Some(Block::ActiveInactive),
            (Virtual, Active) | (Active, Virtual) => Some(Block::VirtualActive),
            (Virtual, Inactive) | (Inactive, Virtual) => Some(Block::VirtualInactive),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Block::ActiveActive => "active-active",
            Block::ActiveInactive => "active-inactive",
            Block::VirtualActive => "virtual-active",
            Block::VirtualInactive => "virtual-inactive",
        }
    }
}

/// Excitation `E_pq` from the more occupied `q` into the less occupied `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pair {
    pub p: usize,
    pub q: usize,
    pub block: Block,
    /// `n_q - n_p > 0`.
    pub metric: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscardedPair {
    pub p: usize,
    pub q: usize,
    pub n_p: f64,
    pub n_q: f64,
}

/// Excitation pairs of the four blocks and the near-degenerate pairs dropped.
pub fn excitation_pairs(cas: &ActiveSpace, occ: &[f64]) -> (Vec<Pair>, Vec<DiscardedPair>) {
    let cls = cas.classes();
    let mut pairs = Vec::new();
    let mut dropped = Vec::new();
    for block in Block::ALL {
        for a in 0..cls.len() {
            for b in 0..a {
                if Block::of(cls[a], cls[b]) != Some(block) {
                    continue;
                }
                let (p, q) = if occ[a] <= occ[b] { (a, b) } else { (b, a) };
                let metric = occ[q] - occ[p];
                if metric < METRIC_THRESHOLD {
                    dropped.push(DiscardedPair { p, q, n_p: occ[p], n_q: occ[q] });
                } else {
                    pairs.push(Pair { p, q, block, metric });
                }
            }
        }
    }
    (pairs, dropped)
}

/// ERPA matrices over a pair list:
/// `A_PR = <[E_qp,[H,E_rs]]>`, `B_PR = <[E_qp,[H,E_sr]]>`, both symmetrized
/// as `1/2 (<[X,[H,Y]]> + <[[X,H],Y]>)`; metric `N_PP = n_q - n_p`.
#[derive(Clone, Debug)]
pub struct ErpaProblem {
    pub block: Option<Block>,
    pub pairs: Vec<Pair>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub metric: DVector<f64>,
}

impl ErpaProblem {
    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn label(&self) -> &'static str {
        self.block.map_or("full", Block::label)
    }

    /// Restriction to the pairs of one block.
    pub fn restrict(&self, block: Block) -> ErpaProblem {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| self.pairs[i].block == block).collect();
        let m = idx.len();
        let a = DMatrix::from_fn(m, m, |i, j| self.a[(idx[i], idx[j])]);
        let b = DMatrix::from_fn(m, m, |i, j| self.b[(idx[i], idx[j])]);
        ErpaProblem {
            block: Some(block),
            pairs: idx.iter().map(|&i| self.pairs[i]).collect(),
            a,
            b,
            metric: DVector::from_iterator(m, idx.iter().map(|&i| self.metric[i])),
        }
    }

    /// Linear interpolation `(1 - t) self + t other` of the main matrices.
    fn lerp(&self, other: &ErpaProblem, t: f64) -> ErpaProblem {
        ErpaProblem {
            block: self.block,
            pairs: self.pairs.clone(),
            a: &self.a * (1.0 - t) + &other.a * t,
            b: &self.b * (1.0 - t) + &other.b * t,
            metric: self.metric.clone(),
        }
    }
}

/// Assembles the ERPA matrices of `op` over `pairs`.
pub fn erpa_matrices(op: &Contracted, pairs: &[Pair], block: Option<Block>) -> ErpaProblem {
    let m = pairs.len();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .par_iter()
        .map(|pp| {
            let (p, q) = (pp.p, pp.q);
            let mut ra = Vec::with_capacity(m);
            let mut rb = Vec::with_capacity(m);
            for rr in pairs {
                let (r, s) = (rr.p, rr.q);
                // <[E_qp,[H,E_rs]]> = -<[[H,E_rs],E_qp]>, <[[E_qp,H],E_rs]> = -<[[H,E_qp],E_rs]>
                let a = -0.5 * (op.double_commutator((r, s), (q, p)) + op.double_commutator((q, p), (r, s)));
                let b = -0.5 * (op.double_commutator((s, r), (q, p)) + op.double_commutator((q, p), (s, r)));
                ra.push(a);
                rb.push(b);
            }
            (ra, rb)
        })
        .collect();
    let a = DMatrix::from_fn(m, m, |i, j| rows[i].0[j]);
    let b = DMatrix::from_fn(m, m, |i, j| rows[i].1[j]);
    let metric = DVector::from_iterator(m, pairs.iter().map(|p| p.metric));
    ErpaProblem { block, pairs: pairs.to_vec(), a, b, metric }
}

/// Positive-frequency ERPA solutions.
#[derive(Clone, Debug, Serialize)]
pub struct TransitionDensitySet {
    pub label: String,
    /// Excitation energies, ascending (Hartree).
    pub omega: Vec<f64>,
    /// `gamma[nu][P] = <0|E_pq + E_qp|nu> = (n_q - n_p)(X - Y)_P`.
    pub gamma: Vec<Vec<f64>>,
}

/// Eigenvalues of `A - B` (metric-scaled) below this are treated as exact
/// zero modes, e.g. rotations among degenerate orbitals.
const NULL_TOL: f64 = 1e-8;

/// Symmetric reduction of one ERPA problem, restricted to the subspace where
/// `K = A - B` is positive.
struct Spectrum {
    /// Retained excitation energies.
    omega: DVector<f64>,
    /// `m x r`: eigenvectors of `M = K^1/2 L K^1/2`, embedded in pair space.
    t: DMatrix<f64>,
    k_half: DMatrix<f64>,
    /// Pseudo-inverse square root.
    k_inv_half: DMatrix<f64>,
}

fn reduce(problem: &ErpaProblem) -> Result<Spectrum> {
    let m = problem.dim();
    let s = problem.metric.map(|x| 1.0 / x.sqrt());
    let scale = |x: &DMatrix<f64>| DMatrix::from_fn(m, m, |i, j| s[i] * x[(i, j)] * s[j]);
    let at = scale(&problem.a);
    let bt = scale(&problem.b);
    let k = &at - &bt;
    let l = &at + &bt;
    let (kv, ku) = sorted_symmetric_eigen(&k);
    if m > 0 && kv[0] < -NULL_TOL {
        return Err(Error::Instability {
            block: problem.label().to_string(),
            message: format!("A - B is not positive semidefinite (lowest eigenvalue {:.3e})", kv[0]),
        });
    }
    let keep: Vec<usize> = (0..m).filter(|&i| kv[i] > NULL_TOL).collect();
    let r = keep.len();
    let ur = DMatrix::from_fn(m, r, |i, j| ku[(i, keep[j])]);
    let sq = DVector::from_iterator(r, keep.iter().map(|&i| kv[i].sqrt()));
    let k_half = &ur * DMatrix::from_diagonal(&sq) * ur.transpose();
    let k_inv_half = &ur * DMatrix::from_diagonal(&sq.map(|x| 1.0 / x)) * ur.transpose();
    let mr = {
        let d = DMatrix::from_diagonal(&sq);
        &d * ur.transpose() * &l * &ur * &d
    };
    let (w2, tr) = sorted_symmetric_eigen(&mr);
    if r > 0 && w2[0] < -1e-16 {
        return Err(Error::Instability {
            block: problem.label().to_string(),
            message: format!("complex excitation energy (imaginary part {:.3e})", (-w2[0]).sqrt()),
        });
    }
    let modes: Vec<usize> = (0..r).filter(|&i| w2[i] > 1e-16).collect();
    let t = &ur * DMatrix::from_fn(r, modes.len(), |i, j| tr[(i, modes[j])]);
    let omega = DVector::from_iterator(modes.len(), modes.iter().map(|&i| w2[i].sqrt()));
    Ok(Spectrum { omega, t, k_half, k_inv_half })
}

impl Spectrum {
    /// `G = K^-1/2 M^1/2 K^-1/2`, so that `sum_nu gamma gamma^T = N^1/2 G N^1/2`.
    fn g(&self) -> DMatrix<f64> {
        &self.k_inv_half * &self.t * DMatrix::from_diagonal(&self.omega) * self.t.transpose() * &self.k_inv_half
    }
}

pub fn solve_erpa(problem: &ErpaProblem) -> Result<TransitionDensitySet> {
    let label = problem.label().to_string();
    if problem.dim() == 0 {
        return Ok(TransitionDensitySet { label, omega: Vec::new(), gamma: Vec::new() });
    }
    let sp = reduce(problem)?;
    let mut gamma = Vec::with_capacity(problem.dim());
    for nu in 0..sp.omega.len() {
        // x - y = sqrt(omega) K^-1/2 T_nu; gamma = N^1/2 (x - y)
        let xmy = &sp.k_inv_half * sp.t.column(nu) * sp.omega[nu].sqrt();
        gamma.push(xmy.iter().zip(problem.metric.iter()).map(|(v, n)| v * n.sqrt()).collect());
    }
    Ok(TransitionDensitySet { label, omega: sp.omega.iter().copied().collect(), gamma })
}

/// Everything the corrections need, in the natural-orbital basis.
pub struct AcSetup {
    pub no: NaturalOrbitals,
    pub cas: ActiveSpace,
    pub occupations: Vec<f64>,
    pub pairs: Vec<Pair>,
    pub discarded: Vec<DiscardedPair>,
    pub alpha_h: AlphaHamiltonian,
    pub view: RdmView,
    pub reference_energy: f64,
    pub warnings: Vec<String>,
}

impl AcSetup {
    pub fn new(ints: &IntegralSet, cas: &ActiveSpace, rdms: &ReducedDensityMatrices) -> Result<Self> {
        let no = natural_orbital_basis(ints, cas, rdms)?;
        let full = FullSpaceRdms::new(&no.rdms, cas)?;
        full.check_basis(&no.ints)?;
        let view = RdmView::new(&full);
        let occupations: Vec<f64> = (0..ints.n_orb).map(|p| view.d1[(p, p)]).collect();
        let (pairs, discarded) = excitation_pairs(cas, &occupations);
        let alpha_h = AlphaHamiltonian::new(&no.ints, cas, &view.d1);
        let reference_energy = view.energy(no.ints.core_energy, &alpha_h.h, &alpha_h.g);
        let mut warnings = Vec::new();
        let grad = {
            let c = Contracted::new(&alpha_h.h, &alpha_h.g, &view);
            let f = c.fock();
            rotation_pairs(cas, RotationClasses::new(false))
                .iter()
                .fold(0.0f64, |m, &(p, q)| m.max((2.0 * (f[(p, q)] - f[(q, p)])).abs()))
        };
        if grad > 1e-4 {
            warnings.push(format!(
                "orbital gradient {grad:.2e} at the reference: corrections assume orbital-optimized RDMs"
            ));
        }
        for d in &discarded {
            warnings.push(format!("dropped pair ({}, {}): occupations {:.8} and {:.8}", d.p, d.q, d.n_p, d.n_q));
        }
        Ok(Self { occupations, pairs, discarded, alpha_h, view, reference_energy, warnings, no, cas: cas.clone() })
    }

    /// Full-space ERPA problem of `H^alpha`.
    pub fn full_problem(&self, alpha: f64) -> ErpaProblem {
        let (p0, p1) = self.endpoints();
        p0.lerp(&p1, alpha)
    }

    /// ERPA problems of `H0` and `H` over all pairs.
    pub fn endpoints(&self) -> (ErpaProblem, ErpaProblem) {
        let a = &self.alpha_h;
        let c0 = Contracted::new(&a.h0, &a.g0, &self.view);
        let c1 = Contracted::new(&a.h, &a.g, &self.view);
        (erpa_matrices(&c0, &self.pairs, None), erpa_matrices(&c1, &self.pairs, None))
    }

    /// Block problem of `H0` at `alpha = 0`.
    pub fn block_problem(&self, block: Block) -> ErpaProblem {
        let a = &self.alpha_h;
        let pairs: Vec<Pair> = self.pairs.iter().copied().filter(|p| p.block == block).collect();
        erpa_matrices(&Contracted::new(&a.h0, &a.g0, &self.view), &pairs, Some(block))
    }

    /// `(P|Q)` over pairs with every-index-active terms removed.
    fn pair_integrals(&self, pairs: &[Pair]) -> DMatrix<f64> {
        let cls = self.cas.classes();
        let act = |p: usize| cls[p] == OrbitalClass::Active;
        let g = &self.alpha_h.g;
        DMatrix::from_fn(pairs.len(), pairs.len(), |i, j| {
            let (a, b) = (pairs[i], pairs[j]);
            if act(a.p) && act(a.q) && act(b.p) && act(b.q) {
                0.0
            } else {
                g.get(a.p, a.q, b.p, b.q)
            }
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockContribution {
    pub block: Block,
    pub pairs: usize,
    pub energy: f64,
    /// Instability message when the block was skipped.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    pub kind: &'static str,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcResult {
    pub method: &'static str,
    pub grid: Option<Grid>,
    pub reference_energy: f64,
    pub e_corr: f64,
    pub total_energy: f64,
    pub blocks: Vec<BlockContribution>,
    pub discarded: Vec<DiscardedPair>,
    pub warnings: Vec<String>,
}

/// Splits `1/2 sum_PQ g_PQ w_PQ` by the block of the row pair.
fn block_sums(pairs: &[Pair], g: &DMatrix<f64>, w: &DMatrix<f64>, factor: f64) -> Vec<(Block, usize, f64)> {
    Block::ALL
        .iter()
        .map(|&b| {
            let mut e = 0.0;
            let mut count = 0;
            for (i, p) in pairs.iter().enumerate() {
                if p.block != b {
                    continue;
                }
                count += 1;
                e += (0..pairs.len()).map(|j| g[(i, j)] * w[(i, j)]).sum::<f64>();
            }
            (b, count, factor * e)
        })
        .collect()
}

fn finish(
    setup: &AcSetup,
    method: &'static str,
    grid: Option<Grid>,
    sums: Vec<(Block, usize, f64)>,
    skipped: &[(Block, String)],
) -> AcResult {
    let mut blocks: Vec<BlockContribution> = sums
        .into_iter()
        .map(|(block, pairs, energy)| BlockContribution { block, pairs, energy, skipped: None })
        .collect();
    let mut warnings = setup.warnings.clone();
    for (b, msg) in skipped {
        blocks.push(BlockContribution { block: *b, pairs: 0, energy: 0.0, skipped: Some(msg.clone()) });
        warnings.push(format!("{} block skipped: {msg}", b.label()));
    }
    blocks.sort_by_key(|b| b.block);
    let e_corr: f64 = blocks.iter().map(|b| b.energy).sum();
    AcResult {
        method,
        grid,
        reference_energy: setup.reference_energy,
        e_corr,
        total_energy: setup.reference_energy + e_corr,
        blocks,
        discarded: setup.discarded.clone(),
        warnings,
    }
}

/// Linearized-integrand correction `E = 1/2 dW/dalpha` at `alpha = 0`, from
/// the block-diagonal ERPA of `H0` and first-order response to `H - H0`.
pub fn ac0_correction(ints: &IntegralSet, cas: &ActiveSpace, rdms: &ReducedDensityMatrices) -> Result<AcResult> {
    let setup = AcSetup::new(ints, cas, rdms)?;
    ac0_from_setup(&setup)
}

pub fn ac0_from_setup(setup: &AcSetup) -> Result<AcResult> {
    // block solutions; unstable blocks are removed from the pair set
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    let mut spectra = Vec::new();
    for block in Block::ALL {
        let prob = setup.block_problem(block);
        if prob.dim() == 0 {
            continue;
        }
        match reduce(&prob) {
            Ok(sp) => {
                kept.extend(prob.pairs.iter().copied());
                spectra.push(sp);
            }
            Err(Error::Instability { message, .. }) => skipped.push((block, message)),
            Err(e) => return Err(e),
        }
    }
    let m = kept.len();
    if m == 0 {
        return Ok(finish(setup, "AC0", None, Block::ALL.iter().map(|&b| (b, 0, 0.0)).collect(), &skipped));
    }
    // block-diagonal assembly; blocks may retain fewer modes than pairs
    let nmodes: usize = spectra.iter().map(|sp| sp.omega.len()).sum();
    let mut t = DMatrix::zeros(m, nmodes);
    let mut k_half = DMatrix::zeros(m, m);
    let mut k_inv_half = DMatrix::zeros(m, m);
    let mut omega = DVector::zeros(nmodes);
    let (mut off, mut offm) = (0, 0);
    for sp in &spectra {
        let (d, r) = (sp.k_half.nrows(), sp.omega.len());
        t.view_mut((off, offm), (d, r)).copy_from(&sp.t);
        k_half.view_mut((off, off), (d, d)).copy_from(&sp.k_half);
        k_inv_half.view_mut((off, off), (d, d)).copy_from(&sp.k_inv_half);
        omega.rows_mut(offm, r).copy_from(&sp.omega);
        off += d;
        offm += r;
    }
    let g0 = &k_inv_half * &t * DMatrix::from_diagonal(&omega) * t.transpose() * &k_inv_half;
    // perturbation H - H0 over the kept pairs, in metric-scaled form
    let a = &setup.alpha_h;
    let c0 = Contracted::new(&a.h0, &a.g0, &setup.view);
    let c1 = Contracted::new(&a.h, &a.g, &setup.view);
    let p0 = erpa_matrices(&c0, &kept, None);
    let p1 = erpa_matrices(&c1, &kept, None);
    let s = p0.metric.map(|x| 1.0 / x.sqrt());
    let scale = |x: DMatrix<f64>| DMatrix::from_fn(m, m, |i, j| s[i] * x[(i, j)] * s[j]);
    let da = scale(&p1.a - &p0.a);
    let db = scale(&p1.b - &p0.b);
    let dk = &da - &db;
    let dl = &da + &db;
    // G K G = L  =>  dG (KG) + (GK) dG = dL - G dK G
    let r = &dl - &g0 * dk * &g0;
    let v = &k_half * &t;
    let mut z = v.transpose() * r * &v;
    for i in 0..nmodes {
        for j in 0..nmodes {
            z[(i, j)] /= omega[i] + omega[j];
        }
    }
    let dg = &k_inv_half * &t * z * t.transpose() * &k_inv_half;
    let nh = p0.metric.map(f64::sqrt);
    let dc = DMatrix::from_fn(m, m, |i, j| nh[i] * dg[(i, j)] * nh[j]);
    let gpq = setup.pair_integrals(&kept);
    // E = 1/2 W'(0), W = 1/2 sum g dC
    Ok(finish(setup, "AC0", None, block_sums(&kept, &gpq, &dc, 0.25), &skipped))
}

/// Gauss-Legendre nodes and weights on `[0, 1]` (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = DMatrix::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let (x, v) = sorted_symmetric_eigen(&jac);
    let nodes = x.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let weights = (0..n).map(|k| v[(0, k)] * v[(0, k)]).collect();
    (nodes, weights)
}

/// Coupling-constant integral of `W(alpha)` with full-space ERPA at each node.
pub fn ac_correction(
    ints: &IntegralSet,
    cas: &ActiveSpace,
    rdms: &ReducedDensityMatrices,
    n_nodes: usize,
) -> Result<AcResult> {
    let setup = AcSetup::new(ints, cas, rdms)?;
    ac_from_setup(&setup, n_nodes)
}

pub fn ac_from_setup(setup: &AcSetup, n_nodes: usize) -> Result<AcResult> {
    let (nodes, weights) = gauss_legendre(n_nodes);
    let grid = Grid { kind: "gauss-legendre", nodes: nodes.clone(), weights: weights.clone() };
    let pairs = &setup.pairs;
    if pairs.is_empty() {
        return Ok(finish(setup, "AC", Some(grid), Block::ALL.iter().map(|&b| (b, 0, 0.0)).collect(), &[]));
    }
    let (p0, p1) = setup.endpoints();
    let nh = p0.metric.map(f64::sqrt);
    let m = pairs.len();
    let c_of = |alpha: f64| -> Result<DMatrix<f64>> {
        let g = reduce(&p0.lerp(&p1, alpha))?.g();
        Ok(DMatrix::from_fn(m, m, |i, j| nh[i] * g[(i, j)] * nh[j]))
    };
    let c0 = c_of(0.0)?;
    let cs: Vec<Result<DMatrix<f64>>> = nodes.par_iter().map(|&a| c_of(a)).collect();
    let mut integrand = DMatrix::zeros(m, m);
    for (c, w) in cs.into_iter().zip(&weights) {
        integrand += (c? - &c0) * *w;
    }
    let gpq = setup.pair_integrals(pairs);
    Ok(finish(setup, "AC", Some(grid), block_sums(pairs, &gpq, &integrand, 0.5), &[]))
}
