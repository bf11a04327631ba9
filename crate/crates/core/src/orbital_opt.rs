//! Two-step orbital optimization: an inner active-space solve at fixed
//! orbitals alternates with orbital rotations at fixed RDMs.

use crate::ansatz::{AnsatzCircuit, CompiledCircuit, OperatorPool};
use crate::commutators::{Contracted, RdmView};
use crate::error::{Error, Result};
use crate::exactsolver::{casci_solve, rdms_from_civector};
use crate::integrals::{embed_active_space, rotate_orbitals, ActiveSpace, IntegralSet, OrbitalClass};
use crate::operators::Mapping;
use crate::rdm::{measure_rdms, BasisTag, FullSpaceRdms, ReducedDensityMatrices};
use crate::vqe::{adapt_loop, minimize, problem_hamiltonian, AdaptOptions, AdaptTrace, VqeOptions};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Which orbital-rotation blocks are optimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RotationClasses {
    pub inactive_active: bool,
    pub inactive_virtual: bool,
    pub active_virtual: bool,
    pub active_active: bool,
}

impl RotationClasses {
    pub fn new(active_active: bool) -> Self {
        Self { inactive_active: true, inactive_virtual: true, active_virtual: true, active_active }
    }

    fn allows(&self, a: OrbitalClass, b: OrbitalClass) -> bool {
        use OrbitalClass::*;
        match (a, b) {
            (Inactive, Active) | (Active, Inactive) => self.inactive_active,
            (Inactive, Virtual) | (Virtual, Inactive) => self.inactive_virtual,
            (Active, Virtual) | (Virtual, Active) => self.active_virtual,
            (Active, Active) => self.active_active,
            _ => false,
        }
    }
}

/// Non-redundant rotation pairs `(p, q)` with `p > q`.
pub fn rotation_pairs(cas: &ActiveSpace, classes: RotationClasses) -> Vec<(usize, usize)> {
    let cls = cas.classes();
    let mut out = Vec::new();
    for p in 0..cls.len() {
        for q in 0..p {
            if classes.allows(cls[p], cls[q]) {
                out.push((p, q));
            }
        }
    }
    out
}

fn view_for(ints: &IntegralSet, full: &FullSpaceRdms) -> Result<RdmView> {
    full.check_basis(ints)?;
    Ok(RdmView::new(full))
}

/// Antisymmetric orbital gradient `G_pq = dE/dkappa_pq = 2 (F_pq - F_qp)`
/// for rotations `U = exp(kappa)`.
pub fn orbital_gradient(ints: &IntegralSet, full: &FullSpaceRdms) -> Result<DMatrix<f64>> {
    let view = view_for(ints, full)?;
    let g = ints.eri_dense();
    Ok(gradient_matrix(&Contracted::new(&ints.h, &g, &view)))
}

fn gradient_matrix(c: &Contracted) -> DMatrix<f64> {
    let f = c.fock();
    (&f - f.transpose()) * 2.0
}

/// Second derivatives `d2E/dkappa_pq^2` for the given pairs.
pub fn hessian_diagonal(ints: &IntegralSet, full: &FullSpaceRdms, pairs: &[(usize, usize)]) -> Result<Vec<f64>> {
    let view = view_for(ints, full)?;
    let g = ints.eri_dense();
    let c = Contracted::new(&ints.h, &g, &view);
    Ok(pairs.iter().map(|&pq| diag_element(&c, pq)).collect())
}

fn diag_element(c: &Contracted, (p, q): (usize, usize)) -> f64 {
    c.double_commutator((p, q), (p, q)) - c.double_commutator((p, q), (q, p)) - c.double_commutator((q, p), (p, q))
        + c.double_commutator((q, p), (q, p))
}

/// Shifts the whole diagonal up so that its smallest entry is at least `floor`.
pub fn level_shift(diag: &[f64], floor: f64) -> Vec<f64> {
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = if min < floor { floor - min } else { 0.0 };
    diag.iter().map(|d| d + shift).collect()
}

fn kappa_from(n: usize, pairs: &[(usize, usize)], x: &DVector<f64>) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(n, n);
    for (&(p, q), &v) in pairs.iter().zip(x.iter()) {
        k[(p, q)] = v;
        k[(q, p)] = -v;
    }
    k
}

fn gather(g: &DMatrix<f64>, pairs: &[(usize, usize)]) -> DVector<f64> {
    DVector::from_iterator(pairs.len(), pairs.iter().map(|&(p, q)| g[(p, q)]))
}

/// Active-space solver used at fixed orbitals.
#[derive(Clone, Debug)]
pub enum InnerSolver {
    /// Exact CASCI.
    Casci,
    /// Fixed-ansatz VQE, warm-started from the previous parameters.
    Vqe { circuit: AnsatzCircuit, opts: VqeOptions },
    /// ADAPT growth continued from the previous circuit each macro-iteration.
    Adapt { pool: OperatorPool, start: AnsatzCircuit, opts: AdaptOptions },
}

impl InnerSolver {
    /// Active-active rotations are redundant for an exact inner solver.
    pub fn default_classes(&self) -> RotationClasses {
        RotationClasses::new(!matches!(self, InnerSolver::Casci))
    }
}

#[derive(Clone, Debug)]
pub struct OoOptions {
    pub max_macro: usize,
    /// Convergence on `max |G_pq|` at the start of a macro-iteration.
    pub grad_tol: f64,
    pub energy_tol: f64,
    /// Quasi-Newton orbital steps per macro-iteration.
    pub max_orbital_steps: usize,
    pub max_halvings: usize,
    pub max_step: f64,
    pub shift_floor: f64,
    /// Overrides [`InnerSolver::default_classes`].
    pub classes: Option<RotationClasses>,
    pub mapping: Mapping,
}

impl Default for OoOptions {
    fn default() -> Self {
        Self {
            max_macro: 100,
            grad_tol: 1e-5,
            energy_tol: 1e-8,
            max_orbital_steps: 30,
            max_halvings: 10,
            max_step: 0.5,
            shift_floor: 0.1,
            classes: None,
            mapping: Mapping::JordanWigner,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MacroIteration {
    pub iteration: usize,
    /// Energy after the inner solve.
    pub energy: f64,
    /// `max |G_pq|` before the orbital step.
    pub grad_norm: f64,
    /// Energy after the orbital step at fixed RDMs.
    pub orbital_energy: f64,
    pub orbital_steps: usize,
    /// Sum of the accepted rotation generator norms (Frobenius).
    pub kappa_norm: f64,
    /// Energy evaluations spent by the inner solver.
    pub inner_evaluations: usize,
    pub rdm_violations: usize,
    pub n_params: usize,
    pub active_active: bool,
}

#[derive(Clone, Debug)]
pub struct OoResult {
    pub energy: f64,
    /// Integrals in the optimized orbital basis.
    pub ints: IntegralSet,
    /// Accumulated rotation: new orbitals are `old * rotation`.
    pub rotation: DMatrix<f64>,
    pub rdms: ReducedDensityMatrices,
    pub circuit: Option<AnsatzCircuit>,
    pub theta: Vec<f64>,
    pub trace: Vec<MacroIteration>,
    pub adapt_traces: Vec<AdaptTrace>,
    pub converged: bool,
    pub classes: RotationClasses,
}

impl OoResult {
    /// Macro-iteration trace as CSV with a header row.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from(
            "iteration,energy,grad,orbital_energy,orbital_steps,kappa_norm,inner_evaluations,rdm_violations,n_params,active_active\n",
        );
        for m in &self.trace {
            s.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e},{},{:.12e},{},{},{},{}\n",
                m.iteration,
                m.energy,
                m.grad_norm,
                m.orbital_energy,
                m.orbital_steps,
                m.kappa_norm,
                m.inner_evaluations,
                m.rdm_violations,
                m.n_params,
                m.active_active
            ));
        }
        s
    }

    /// Whitespace-separated rotation matrix, one row per line.
    pub fn rotation_dump(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rotation.nrows() {
            let row: Vec<String> = self.rotation.row(i).iter().map(|x| format!("{x:.12e}")).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

struct InnerState {
    circuit: Option<AnsatzCircuit>,
    theta: Vec<f64>,
}

/// Solves the active-space problem at fixed orbitals; returns the energy and
/// tagged RDMs.
fn inner_solve(
    solver: &InnerSolver,
    state: &mut InnerState,
    ints: &IntegralSet,
    cas: &ActiveSpace,
    mapping: Mapping,
    adapt_traces: &mut Vec<AdaptTrace>,
) -> Result<(f64, ReducedDensityMatrices, usize)> {
    let tag = BasisTag { active: cas.active.clone(), stamp: ints.basis_stamp };
    let (energy, rdms, evals) = match solver {
        InnerSolver::Casci => {
            let (sol, _) = casci_solve(ints, cas, 1)?;
            (sol.energies[0], rdms_from_civector(&sol, 0)?, 1)
        }
        InnerSolver::Vqe { opts, .. } => {
            let circuit = state.circuit.as_ref().expect("VQE state carries its circuit");
            let emb = embed_active_space(ints, cas)?;
            let h = problem_hamiltonian(&emb, mapping, None)?;
            let r = minimize(circuit, &h, &state.theta, opts)?;
            let psi = CompiledCircuit::new(circuit)?.state(&r.theta);
            state.theta = r.theta;
            (r.energy, measure_rdms(&psi, mapping)?, r.evaluations)
        }
        InnerSolver::Adapt { pool, opts, .. } => {
            let circuit = state.circuit.take().expect("ADAPT state carries its circuit");
            let emb = embed_active_space(ints, cas)?;
            let h = problem_hamiltonian(&emb, mapping, Some(pool))?;
            let mut o = opts.clone();
            o.max_iter = opts.max_iter.saturating_sub(circuit.entries.len());
            let (circuit, r, trace) = adapt_loop(pool, circuit, &state.theta, &h, &o)?;
            let psi = CompiledCircuit::new(&circuit)?.state(&r.theta);
            state.theta = r.theta;
            state.circuit = Some(circuit);
            adapt_traces.push(trace);
            (r.energy, measure_rdms(&psi, mapping)?, r.evaluations)
        }
    };
    Ok((energy, rdms.with_tag(tag), evals))
}

/// Outcome of minimizing the energy over orbitals with the RDMs held fixed.
struct OrbitalStep {
    ints: IntegralSet,
    rotation: DMatrix<f64>,
    energy: f64,
    steps: usize,
    kappa_norm: f64,
}

/// Preconditioned BFGS over orbital rotations at fixed RDMs, in local
/// coordinates: each accepted step is composed into the orbitals and the
/// generator reset to zero.
fn orbital_step(
    ints: &IntegralSet,
    view: &RdmView,
    pairs: &[(usize, usize)],
    diag: &[f64],
    e0: f64,
    tol: f64,
    opts: &OoOptions,
) -> Result<OrbitalStep> {
    let n = ints.n_orb;
    let precond = DMatrix::from_diagonal(&DVector::from_iterator(diag.len(), diag.iter().map(|d| 1.0 / d)));
    let mut hinv = precond.clone();
    let mut cur = ints.clone();
    let mut rotation = DMatrix::identity(n, n);
    let mut e = e0;
    let mut g = {
        let eri = cur.eri_dense();
        gather(&gradient_matrix(&Contracted::new(&cur.h, &eri, view)), pairs)
    };
    let mut steps = 0;
    let mut kappa_norm = 0.0;
    while steps < opts.max_orbital_steps && g.amax() >= tol {
        let mut d = -(&hinv * &g);
        if d.dot(&g) >= 0.0 {
            hinv = precond.clone();
            d = -(&hinv * &g);
        }
        let dmax = d.amax();
        if dmax > opts.max_step {
            d *= opts.max_step / dmax;
        }
        let slope = d.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let kappa = kappa_from(n, pairs, &(&d * alpha));
            let trial = rotate_orbitals(&cur, &kappa)?;
            let eri = trial.eri_dense();
            let et = view.energy(trial.core_energy, &trial.h, &eri);
            if !et.is_finite() {
                return Err(Error::Numerical("non-finite energy during orbital line search".into()));
            }
            if et <= e + 1e-4 * alpha * slope {
                let gt = gather(&gradient_matrix(&Contracted::new(&trial.h, &eri, view)), pairs);
                accepted = Some((trial, kappa, et, gt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, kappa, et, gt)) = accepted else {
            if steps == 0 && g.amax() > 10.0 * tol {
                return Err(Error::Numerical(format!(
                    "orbital line search found no decrease after {} halvings (|G| = {:.3e})",
                    opts.max_halvings,
                    g.amax()
                )));
            }
            break;
        };
        kappa_norm += kappa.norm();
        rotation = rotation * crate::linalg::expm(&kappa);
        let s = &d * alpha;
        let y = &gt - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv +=
                (&s * s.transpose()) * (rho * (1.0 + rho * yhy)) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        cur = trial;
        e = et;
        g = gt;
        steps += 1;
    }
    Ok(OrbitalStep { ints: cur, rotation, energy: e, steps, kappa_norm })
}

/// Two-step orbital optimization around an active-space solver.
pub fn optimize_orbitals(
    ints: &IntegralSet,
    cas: &ActiveSpace,
    solver: &InnerSolver,
    opts: &OoOptions,
) -> Result<OoResult> {
    let classes = opts.classes.unwrap_or_else(|| solver.default_classes());
    let pairs = rotation_pairs(cas, classes);
    let mut state = match solver {
        InnerSolver::Casci => InnerState { circuit: None, theta: Vec::new() },
        InnerSolver::Vqe { circuit, .. } => {
            InnerState { circuit: Some(circuit.clone()), theta: vec![0.0; circuit.n_params] }
        }
        InnerSolver::Adapt { start, .. } => {
            InnerState { circuit: Some(start.clone()), theta: vec![0.0; start.n_params] }
        }
    };
    let mut cur = ints.clone();
    let mut rotation = DMatrix::identity(ints.n_orb, ints.n_orb);
    let mut trace = Vec::new();
    let mut adapt_traces = Vec::new();
    let mut prev: Option<f64> = None;
    let mut converged = false;
    let mut last = None;
    for it in 0..opts.max_macro {
        let (energy, rdms, evals) = inner_solve(solver, &mut state, &cur, cas, opts.mapping, &mut adapt_traces)?;
        let violations = rdms.check_invariants(1e-9).err().map_or(0, |v| v.len());
        let full = FullSpaceRdms::new(&rdms, cas)?;
        let view = view_for(&cur, &full)?;
        let eri = cur.eri_dense();
        let c = Contracted::new(&cur.h, &eri, &view);
        let g = gather(&gradient_matrix(&c), &pairs);
        let gnorm = if pairs.is_empty() { 0.0 } else { g.amax() };
        let n_params = state.theta.len();
        if gnorm < opts.grad_tol && prev.is_some_and(|p| (p - energy).abs() < opts.energy_tol) {
            trace.push(MacroIteration {
                iteration: it,
                energy,
                grad_norm: gnorm,
                orbital_energy: energy,
                orbital_steps: 0,
                kappa_norm: 0.0,
                inner_evaluations: evals,
                rdm_violations: violations,
                n_params,
                active_active: classes.active_active,
            });
            converged = true;
            last = Some((energy, rdms));
            break;
        }
        let diag: Vec<f64> = pairs.iter().map(|&pq| diag_element(&c, pq)).collect();
        let diag = level_shift(&diag, opts.shift_floor);
        let step = orbital_step(&cur, &view, &pairs, &diag, energy, 0.1 * opts.grad_tol, opts)?;
        trace.push(MacroIteration {
            iteration: it,
            energy,
            grad_norm: gnorm,
            orbital_energy: step.energy,
            orbital_steps: step.steps,
            kappa_norm: step.kappa_norm,
            inner_evaluations: evals,
            rdm_violations: violations,
            n_params,
            active_active: classes.active_active,
        });
        rotation = rotation * step.rotation;
        cur = step.ints;
        prev = Some(energy);
        last = Some((energy, rdms));
    }
    let (energy, rdms) = match (converged, last) {
        (true, Some(l)) => l,
        // re-solve so that the returned RDMs match the returned orbitals
        _ => {
            let (e, r, _) = inner_solve(solver, &mut state, &cur, cas, opts.mapping, &mut adapt_traces)?;
            (e, r)
        }
    };
    Ok(OoResult {
        energy,
        ints: cur,
        rotation,
        rdms,
        circuit: state.circuit,
        theta: state.theta,
        trace,
        adapt_traces,
        converged,
        classes,
    })
}

/// CASSCF by quasi-Newton descent on the CASCI energy itself: the CI problem
/// is re-solved at every trial rotation.
pub fn casscf_direct(ints: &IntegralSet, cas: &ActiveSpace, gtol: f64, max_iter: usize) -> Result<(f64, IntegralSet)> {
    let pairs = rotation_pairs(cas, RotationClasses::new(false));
    let n = ints.n_orb;
    let eval = |cur: &IntegralSet| -> Result<(f64, DVector<f64>, Vec<f64>)> {
        let (sol, _) = casci_solve(cur, cas, 1)?;
        let rdms =
            rdms_from_civector(&sol, 0)?.with_tag(BasisTag { active: cas.active.clone(), stamp: cur.basis_stamp });
        let full = FullSpaceRdms::new(&rdms, cas)?;
        let view = RdmView::new(&full);
        let eri = cur.eri_dense();
        let c = Contracted::new(&cur.h, &eri, &view);
        let g = gather(&gradient_matrix(&c), &pairs);
        let diag = pairs.iter().map(|&pq| diag_element(&c, pq)).collect::<Vec<_>>();
        Ok((sol.energies[0], g, level_shift(&diag, 0.1)))
    };
    let mut cur = ints.clone();
    let (mut e, mut g, diag) = eval(&cur)?;
    let precond = DMatrix::from_diagonal(&DVector::from_iterator(diag.len(), diag.iter().map(|d| 1.0 / d)));
    let mut hinv = precond.clone();
    for _ in 0..max_iter {
        if pairs.is_empty() || g.amax() < gtol {
            return Ok((e, cur));
        }
        let mut d = -(&hinv * &g);
        if d.dot(&g) >= 0.0 {
            hinv = precond.clone();
            d = -(&hinv * &g);
        }
        let dmax = d.amax();
        if dmax > 0.5 {
            d *= 0.5 / dmax;
        }
        let slope = d.dot(&g);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=20 {
            let trial = rotate_orbitals(&cur, &kappa_from(n, &pairs, &(&d * alpha)))?;
            let (et, gt, _) = eval(&trial)?;
            if et <= e + 1e-4 * alpha * slope {
                accepted = Some((trial, et, gt));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, et, gt)) = accepted else {
            return Ok((e, cur));
        };
        let s = &d * alpha;
        let y = &gt - &g;
        let sy = s.dot(&y);
        if sy > 1e-14 {
            let rho = 1.0 / sy;
            let hy = &hinv * &y;
            let yhy = y.dot(&hy);
            hinv +=
                (&s * s.transpose()) * (rho * (1.0 + rho * yhy)) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        cur = trial;
        e = et;
        g = gt;
    }
    Ok((e, cur))
}
