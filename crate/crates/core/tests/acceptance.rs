//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. The cc-pVDZ active-active check only runs with
//! `--ignored` or `--include-ignored`; positional arguments filter by name.

mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use vqeac::ac::{ac0_correction, erpa_matrices, excitation_pairs, AcSetup, AlphaHamiltonian, Block};
use vqeac::ansatz::{
    build_fermionic_pool, build_qubit_pool, build_uccd, build_uccsd, AnsatzCircuit, CompiledCircuit, OperatorPool,
    Shape,
};
use vqeac::commutators::{Contracted, RdmView};
use vqeac::exactsolver::{casci_energy, casci_solve, fci_energy, rdms_from_civector};
use vqeac::integrals::{embed_active_space, rotate_orbitals, ActiveSpace, EmbeddedHamiltonian, IntegralSet, PackedEri};
use vqeac::operators::{hamiltonian_to_fermion, jordan_wigner, FermionOperator, Mapping};
use vqeac::orbital_opt::{
    optimize_orbitals, orbital_gradient, rotation_pairs, InnerSolver, OoOptions, OoResult, RotationClasses,
};
use vqeac::rdm::{energy_from_rdms, measure_rdms, BasisTag, FullSpaceRdms, ReducedDensityMatrices};
use vqeac::statevector::{Statevector, Support};
use vqeac::vqe::{adapt_loop, energy_of, minimize, problem_hamiltonian, AdaptOptions, AdaptTrace, VqeOptions};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {:.1} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()))
}

/// Active space used for each fixture wherever a single CAS is needed.
fn default_cas(ints: &IntegralSet) -> ActiveSpace {
    let (ne, no) = match ints.n_orb {
        n if n <= 6 => (ints.n_elec, n),
        7 => (4, 6),
        _ => (6, 6),
    };
    ActiveSpace::from_counts(ints, ne, no).unwrap()
}

fn shape_of(cas: &ActiveSpace) -> Shape {
    Shape::new(cas.active.len(), cas.n_act_elec / 2, cas.n_act_elec / 2)
}

fn casci_rdms(ints: &IntegralSet, cas: &ActiveSpace) -> ReducedDensityMatrices {
    let (sol, _) = casci_solve(ints, cas, 1).unwrap();
    rdms_from_civector(&sol, 0).unwrap().with_tag(BasisTag { active: cas.active.clone(), stamp: ints.basis_stamp })
}

struct VqeRun {
    name: String,
    cas: ActiveSpace,
    ints: IntegralSet,
    circuit: AnsatzCircuit,
    theta: Vec<f64>,
    energy: f64,
}

/// UCCSD-VQE in the default CAS of every fixture, computed once.
fn vqe_runs() -> &'static [VqeRun] {
    static RUNS: OnceLock<Vec<VqeRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        common::all_fixtures()
            .into_iter()
            .map(|name| {
                let ints = common::ints(&name);
                let cas = default_cas(&ints);
                let emb = embed_active_space(&ints, &cas).unwrap();
                let circuit = build_uccsd(shape_of(&cas), Mapping::JordanWigner);
                let h = problem_hamiltonian(&emb, Mapping::JordanWigner, None).unwrap();
                let r = minimize(&circuit, &h, &vec![0.0; circuit.n_params], &VqeOptions::default()).unwrap();
                VqeRun { name, cas, ints, circuit, theta: r.theta, energy: r.energy }
            })
            .collect()
    })
}

fn h2_uccsd_equals_fci() -> Outcome {
    let start = Instant::now();
    let ints = common::ints("h2_sto3g_0.735");
    let cas = ActiveSpace::full(&ints);
    let emb = embed_active_space(&ints, &cas).unwrap();
    let c = build_uccsd(shape_of(&cas), Mapping::JordanWigner);
    let h = problem_hamiltonian(&emb, Mapping::JordanWigner, None).unwrap();
    let e = minimize(&c, &h, &vec![0.0; c.n_params], &VqeOptions::default()).unwrap().energy;
    let fci = fci_energy(&ints).unwrap();
    let err = (e - fci).abs();
    ensure(err < 1e-8, || format!("|E_VQE - E_FCI| = {err:.2e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("|E_VQE - E_FCI| = {err:.2e}"))
}

fn variational_hierarchy() -> Outcome {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut skipped = Vec::new();
    for run in vqe_runs() {
        let hf = run.ints.hf_energy();
        let casci = casci_energy(&run.ints, &run.cas).unwrap();
        let mut gaps = vec![hf - run.energy, run.energy - casci];
        // the determinant count decides whether FCI is tractable
        let dets = binomial(run.ints.n_orb, run.ints.n_alpha()) * binomial(run.ints.n_orb, run.ints.n_beta());
        if dets <= 4_000_000 {
            gaps.push(casci - fci_energy(&run.ints).unwrap());
        } else {
            skipped.push(run.name.clone());
        }
        for g in gaps {
            worst = worst.min(g);
            ensure(g >= -1e-9, || format!("{}: gap {g:.3e}", run.name))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    let note = if skipped.is_empty() { String::new() } else { format!("; FCI leg skipped for {}", skipped.join(",")) };
    Ok(format!("{} fixtures, smallest gap {worst:.2e}{note}", vqe_runs().len()))
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

fn rdm_identities() -> Outcome {
    let mut macros = 0;
    for run in vqe_runs() {
        let psi = CompiledCircuit::new(&run.circuit).unwrap().state(&run.theta);
        let rdms = measure_rdms(&psi, Mapping::JordanWigner).unwrap();
        rdms.check_invariants(1e-9).map_err(|v| format!("{} after VQE: {v:?}", run.name))?;
        let cas = ActiveSpace::from_counts(&run.ints, 2, 2).unwrap();
        let solver = InnerSolver::Vqe {
            circuit: build_uccd(shape_of(&cas), Mapping::JordanWigner),
            opts: VqeOptions::default(),
        };
        let oo = optimize_orbitals(&run.ints, &cas, &solver, &OoOptions::default()).unwrap();
        for m in &oo.trace {
            ensure(m.rdm_violations == 0, || {
                format!("{} macro {}: {} violations", run.name, m.iteration, m.rdm_violations)
            })?;
        }
        oo.rdms.check_invariants(1e-9).map_err(|v| format!("{} after OO: {v:?}", run.name))?;
        macros += oo.trace.len();
    }
    Ok(format!("{} VQE states and {macros} OO macro-iterations clean", vqe_runs().len()))
}

fn energy_reconstruction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let names = ["h2_631g_1.0", "lih_sto3g_1.6", "h4_square_sto3g_0.9", "n2_sto3g_2.0"];
    let mut worst = 0.0f64;
    for k in 0..20 {
        let name = names[k % names.len()];
        let mapping = if (k / names.len()) % 2 == 0 { Mapping::JordanWigner } else { Mapping::Parity };
        let ints = common::ints(name);
        let cas = default_cas(&ints);
        let emb = embed_active_space(&ints, &cas).unwrap();
        let c = build_uccsd(shape_of(&cas), mapping);
        let theta: Vec<f64> = (0..c.n_params).map(|_| rng.random_range(-0.6..0.6)).collect();
        let psi = CompiledCircuit::new(&c).unwrap().state(&theta);
        let nq = 2 * emb.n_act;
        let direct = psi.expectation(&mapping.map(&hamiltonian_to_fermion(&emb), nq).unwrap()).unwrap();
        let from_rdms = energy_from_rdms(&measure_rdms(&psi, mapping).unwrap(), &emb);
        let err = (direct - from_rdms).abs();
        worst = worst.max(err);
        ensure(err < 1e-9, || format!("{name} point {k}: {err:.2e}"))?;
    }
    Ok(format!("20 points, max error {worst:.2e}"))
}

fn orbital_gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cases = [("h2_631g_1.0", 2, 2), ("lih_sto3g_1.6", 2, 2), ("h4_square_sto3g_0.9", 2, 2), ("n2_sto3g_2.0", 6, 6)];
    let mut worst = 0.0f64;
    for (name, ne, no) in cases {
        let base = common::ints(name);
        let cas = ActiveSpace::from_counts(&base, ne, no).unwrap();
        let pairs = rotation_pairs(&cas, RotationClasses::new(true));
        let circuit = build_uccsd(shape_of(&cas), Mapping::JordanWigner);
        for _ in 0..3 {
            let n = base.n_orb;
            let mut kappa = DMatrix::zeros(n, n);
            for p in 0..n {
                for q in 0..p {
                    let t = rng.random_range(-0.1..0.1);
                    kappa[(p, q)] = t;
                    kappa[(q, p)] = -t;
                }
            }
            let ints = rotate_orbitals(&base, &kappa).unwrap();
            let emb = embed_active_space(&ints, &cas).unwrap();
            let h = problem_hamiltonian(&emb, Mapping::JordanWigner, None).unwrap();
            let r = minimize(&circuit, &h, &vec![0.0; circuit.n_params], &VqeOptions::default()).unwrap();
            let psi = CompiledCircuit::new(&circuit).unwrap().state(&r.theta);
            let rdms = measure_rdms(&psi, Mapping::JordanWigner)
                .unwrap()
                .with_tag(BasisTag { active: cas.active.clone(), stamp: ints.basis_stamp });
            let full = FullSpaceRdms::new(&rdms, &cas).unwrap();
            let g = orbital_gradient(&ints, &full).unwrap();
            let step = 1e-4;
            for &(p, q) in &pairs {
                let shifted = |t: f64| {
                    let mut k = DMatrix::zeros(n, n);
                    k[(p, q)] = t;
                    k[(q, p)] = -t;
                    full.energy(&rotate_orbitals(&ints, &k).unwrap())
                };
                let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
                let err = (fd - g[(p, q)]).abs();
                worst = worst.max(err);
                ensure(err < 1e-6, || format!("{name} ({p},{q}): fd {fd:.8} analytic {:.8}", g[(p, q)]))?;
            }
        }
    }
    Ok(format!("12 rotation points, max error {worst:.2e}"))
}

/// Spectrum of a mapped Hamiltonian over every particle-number and spin sector.
fn mapped_spectrum(emb: &EmbeddedHamiltonian, mapping: Mapping) -> Vec<f64> {
    let n = emb.n_act;
    let h = mapping.map(&hamiltonian_to_fermion(emb), 2 * n).unwrap();
    let mut all = Vec::new();
    for na in 0..=n {
        for nb in 0..=n {
            let support = Support::sector(n, na, nb, mapping);
            let dim = support.len();
            let mut m = DMatrix::<f64>::zeros(dim, dim);
            for (j, &b) in support.states().iter().enumerate() {
                let mut column = BTreeMap::new();
                for (t, c) in h.apply_to_basis(b) {
                    *column.entry(t).or_insert(Complex64::new(0.0, 0.0)) += c;
                }
                for (t, c) in column.into_iter().filter(|(_, c)| c.norm() > 1e-12) {
                    m[(support.position(t).expect("sector is closed"), j)] += c.re;
                }
            }
            all.extend(m.symmetric_eigen().eigenvalues.iter().copied());
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

fn mapping_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for name in common::all_fixtures() {
        let ints = common::ints(&name);
        if 2 * ints.n_orb > 12 {
            continue;
        }
        let emb = EmbeddedHamiltonian::from_full(&ints);
        let jw = mapped_spectrum(&emb, Mapping::JordanWigner);
        let parity = mapped_spectrum(&emb, Mapping::Parity);
        ensure(jw.len() == 1 << (2 * ints.n_orb), || format!("{name}: incomplete spectrum"))?;
        let err = jw.iter().zip(&parity).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err);
        ensure(err < 1e-10, || format!("{name}: spectra differ by {err:.2e}"))?;
        count += 1;
    }
    Ok(format!("{count} fixtures, full Fock-space spectra, max difference {worst:.2e}"))
}

fn run_adapt(
    ints: &IntegralSet,
    cas: &ActiveSpace,
    pool: &OperatorPool,
    opts: &AdaptOptions,
) -> (AnsatzCircuit, Vec<f64>, AdaptTrace) {
    let emb = embed_active_space(ints, cas).unwrap();
    let h = problem_hamiltonian(&emb, Mapping::JordanWigner, Some(pool)).unwrap();
    let (c, r, t) =
        adapt_loop(pool, AnsatzCircuit::empty(shape_of(cas), Mapping::JordanWigner), &[], &h, opts).unwrap();
    (c, r.theta, t)
}

fn adapt_behavior() -> Outcome {
    let ints = common::ints("h4_chain_sto3g_1.0");
    let cas = ActiveSpace::full(&ints);
    let shape = shape_of(&cas);
    let emb = embed_active_space(&ints, &cas).unwrap();
    let pool = build_fermionic_pool(shape).unwrap();
    let opts = AdaptOptions { max_iter: 6, eps_grad: 1e-6, ..Default::default() };
    let (_, _, trace) = run_adapt(&ints, &cas, &pool, &opts);
    let mut prev = trace.reference_energy;
    for it in &trace.iterations {
        ensure(it.energy <= prev + 1e-9, || format!("energy rose at iteration {}", it.iteration))?;
        prev = it.energy;
    }
    // exhaustive pool scan by central differences of the appended angle
    let h = problem_hamiltonian(&emb, Mapping::JordanWigner, None).unwrap();
    for (k, it) in trace.iterations.iter().enumerate() {
        let (circuit, theta, _) = run_adapt(&ints, &cas, &pool, &AdaptOptions { max_iter: k, ..opts.clone() });
        let step = 1e-5;
        let grads: Vec<f64> = pool
            .elements
            .iter()
            .map(|g| {
                let mut c = circuit.clone();
                c.push(g.clone());
                let at = |t: f64| {
                    let mut th = theta.clone();
                    th.push(t);
                    energy_of(&th, &c, &h).unwrap()
                };
                ((at(step) - at(-step)) / (2.0 * step)).abs()
            })
            .collect();
        let best = grads.iter().cloned().fold(0.0, f64::max);
        ensure(grads[it.selected] >= best - 1e-6, || {
            format!("iteration {}: selected |g| {:.6} but pool max {best:.6}", it.iteration, grads[it.selected])
        })?;
    }

    let n2 = common::ints("n2_sto3g_2.0");
    let cas66 = ActiveSpace::from_counts(&n2, 6, 6).unwrap();
    let iters = 5;
    let fixed = AdaptOptions { max_iter: iters, eps_grad: 0.0, ..Default::default() };
    let (_, _, ft) = run_adapt(&n2, &cas66, &build_fermionic_pool(shape_of(&cas66)).unwrap(), &fixed);
    let (_, _, qt) =
        run_adapt(&n2, &cas66, &build_qubit_pool(shape_of(&cas66), Mapping::JordanWigner).unwrap(), &fixed);
    for t in [&ft, &qt] {
        let mut prev = t.reference_energy;
        for it in &t.iterations {
            ensure(it.energy <= prev + 1e-9, || format!("CAS(6,6) energy rose at iteration {}", it.iteration))?;
            prev = it.energy;
        }
    }
    let n = ft.iterations.len().min(qt.iterations.len());
    ensure(n > 0, || "no ADAPT iterations on CAS(6,6)".into())?;
    let (fc, qc) = (ft.iterations[n - 1].cnots, qt.iterations[n - 1].cnots);
    ensure(5 * qc <= fc, || format!("after {n} iterations: qubit {qc} CNOTs vs fermionic {fc}"))?;
    Ok(format!(
        "H4 {} selections verified; CAS(6,6) after {n} iterations: {qc} vs {fc} CNOTs (ratio {:.3})",
        trace.iterations.len(),
        qc as f64 / fc as f64
    ))
}

/// Places an active-space state into the full orbital space with the
/// inactive orbitals doubly occupied (interleaved spin orbitals).
fn embed_state(act: &Statevector, cas: &ActiveSpace, n_orb: usize) -> Statevector {
    let inactive: u64 = cas.inactive.iter().map(|&p| 0b11u64 << (2 * p)).sum();
    let mut full = vec![Complex64::new(0.0, 0.0); 1 << (2 * n_orb)];
    for (b, &amp) in act.amplitudes().iter().enumerate() {
        let mut bits = inactive;
        for (k, &p) in cas.active.iter().enumerate() {
            for s in 0..2 {
                if b >> (2 * k + s) & 1 == 1 {
                    bits |= 1 << (2 * p + s);
                }
            }
        }
        full[bits as usize] = amp;
    }
    Statevector::from_amplitudes(full).unwrap()
}

fn excitation(r: usize, s: usize) -> FermionOperator {
    FermionOperator::hopping(2 * r, 2 * s) + FermionOperator::hopping(2 * r + 1, 2 * s + 1)
}

fn erpa_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (name, ne, no) in [("h2_631g_1.0", 2, 2), ("h4_chain_sto3g_1.0", 2, 2)] {
        let ints = common::ints(name);
        let cas = ActiveSpace::from_counts(&ints, ne, no).unwrap();
        let (sol, _) = casci_solve(&ints, &cas, 1).unwrap();
        let full_psi = embed_state(&sol.statevector(0, Mapping::JordanWigner).unwrap(), &cas, ints.n_orb);
        let rdms = casci_rdms(&ints, &cas);
        let view = RdmView::new(&FullSpaceRdms::new(&rdms, &cas).unwrap());
        let occ: Vec<f64> = (0..ints.n_orb).map(|p| view.d1[(p, p)]).collect();
        let (pairs, _) = excitation_pairs(&cas, &occ);
        let alpha_h = AlphaHamiltonian::new(&ints, &cas, &view.d1);
        for alpha in [0.0, 0.5, 1.0] {
            let (h, g) = alpha_h.at(alpha);
            let problem = erpa_matrices(&Contracted::new(&h, &g, &view), &pairs, None);
            let (v, _) = PackedEri::from_dense_symmetrized(&g);
            let n = ints.n_orb;
            let emb = EmbeddedHamiltonian { n_act: n, n_alpha: 0, n_beta: 0, e_core: 0.0, h_eff: h, v_act: v };
            let ham = hamiltonian_to_fermion(&emb);
            let expect = |op: &FermionOperator| jordan_wigner(op, 2 * n).unwrap().expectation_complex(&full_psi).re;
            for (i, pp) in pairs.iter().enumerate() {
                let eqp = excitation(pp.q, pp.p);
                for (j, rr) in pairs.iter().enumerate() {
                    for (mat, (r, s)) in [(&problem.a, (rr.p, rr.q)), (&problem.b, (rr.q, rr.p))] {
                        let ers = excitation(r, s);
                        let lhs = eqp.commutator(&ham.commutator(&ers));
                        let rhs = eqp.commutator(&ham).commutator(&ers);
                        let want = 0.5 * (expect(&lhs) + expect(&rhs));
                        let err = (want - mat[(i, j)]).abs();
                        worst = worst.max(err);
                        ensure(err < 1e-10, || format!("{name} alpha {alpha} ({i},{j}): {want} vs {}", mat[(i, j)]))?;
                    }
                }
            }
        }
    }
    // block problems against the full problem restricted at alpha = 0
    let mut block_worst = 0.0f64;
    for (name, ne, no) in [("lih_sto3g_1.6", 2, 2), ("n2_sto3g_2.5", 6, 6)] {
        let ints = common::ints(name);
        let cas = ActiveSpace::from_counts(&ints, ne, no).unwrap();
        let setup = AcSetup::new(&ints, &cas, &casci_rdms(&ints, &cas)).unwrap();
        let full = setup.full_problem(0.0);
        for i in 0..full.dim() {
            for j in 0..full.dim() {
                if full.pairs[i].block != full.pairs[j].block {
                    block_worst = block_worst.max(full.a[(i, j)].abs()).max(full.b[(i, j)].abs());
                }
            }
        }
        for block in Block::ALL {
            let b = setup.block_problem(block);
            let r = full.restrict(block);
            ensure(b.pairs == r.pairs, || format!("{name} {block:?}: pair lists differ"))?;
            if b.dim() > 0 {
                block_worst = block_worst.max((&b.a - &r.a).abs().max()).max((&b.b - &r.b).abs().max());
            }
        }
        ensure(block_worst < 1e-10, || format!("{name}: block mismatch {block_worst:.2e}"))?;
    }
    Ok(format!("dense commutator error {worst:.2e}, block error {block_worst:.2e}"))
}

fn ac0_fci_limit() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for name in ["h2_sto3g_0.735", "lih_sto3g_1.6", "h4_square_sto3g_0.9"] {
        let ints = common::ints(name);
        let cas = ActiveSpace::full(&ints);
        let e = ac0_correction(&ints, &cas, &casci_rdms(&ints, &cas)).unwrap().e_corr;
        worst = worst.max(e.abs());
        ensure(e.abs() < 1e-10, || format!("{name}: E_corr = {e:.2e}"))?;
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("3 fixtures, max |E_corr| {worst:.2e}"))
}

fn oo_uccd(ints: &IntegralSet, cas: &ActiveSpace, classes: Option<RotationClasses>) -> OoResult {
    let solver =
        InnerSolver::Vqe { circuit: build_uccd(shape_of(cas), Mapping::JordanWigner), opts: VqeOptions::default() };
    optimize_orbitals(ints, cas, &solver, &OoOptions { classes, ..Default::default() }).unwrap()
}

fn ac0_improvement() -> Outcome {
    let mut lines = Vec::new();
    for name in common::all_fixtures().into_iter().filter(|n| n.starts_with("h2_631g") || n.starts_with("lih_sto3g")) {
        let ints = common::ints(&name);
        let cas = ActiveSpace::from_counts(&ints, 2, 2).unwrap();
        let oo = oo_uccd(&ints, &cas, None);
        let ac0 = ac0_correction(&oo.ints, &cas, &oo.rdms).unwrap();
        let fci = fci_energy(&ints).unwrap();
        let (before, after) = ((oo.energy - fci).abs(), (ac0.total_energy - fci).abs());
        ensure(after < before, || format!("{name}: error {after:.3e} with AC0 vs {before:.3e} without"))?;
        lines.push(format!("{name} {:.1}x", before / after));
    }
    Ok(format!("error reduction {}", lines.join(", ")))
}

fn n2_recovery() -> Outcome {
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for r in ["1.1", "1.5", "2.0", "2.5"] {
        let name = format!("n2_sto3g_{r}");
        let ints = common::ints(&name);
        let cas = ActiveSpace::from_counts(&ints, 10, 8).unwrap();
        let oo = oo_uccd(&ints, &cas, None);
        let ac0 = ac0_correction(&oo.ints, &cas, &oo.rdms).unwrap();
        let (hf, fci) = (ints.hf_energy(), fci_energy(&ints).unwrap());
        let recovered = (ac0.total_energy - hf) / (fci - hf);
        lines.push(format!("{r} A {:.1}%{}", 100.0 * recovered, if oo.converged { "" } else { " (OO not converged)" }));
        if recovered < 0.9 {
            failed.push(r);
        }
    }
    ensure(failed.is_empty(), || format!("below 90% at {}: {}", failed.join(","), lines.join(", ")))?;
    Ok(lines.join(", "))
}

fn active_active_lowering() -> Outcome {
    let ints = common::ints("n2_ccpvdz_2.5");
    let cas = ActiveSpace::from_counts(&ints, 10, 8).unwrap();
    let off = oo_uccd(&ints, &cas, Some(RotationClasses::new(false)));
    let on = oo_uccd(&ints, &cas, Some(RotationClasses::new(true)));
    let lowering = 1e3 * (off.energy - on.energy);
    let detail = format!("lowering {lowering:.3} mHa (converged off={} on={})", off.converged, on.converged);
    ensure((lowering - 2.4).abs() <= 0.8, || detail.clone())?;
    Ok(detail)
}

fn determinism() -> Outcome {
    let once = || {
        let ints = common::ints("lih_sto3g_1.6");
        let cas = ActiveSpace::from_counts(&ints, 2, 2).unwrap();
        let oo = oo_uccd(&ints, &cas, None);
        let ac0 = ac0_correction(&oo.ints, &cas, &oo.rdms).unwrap();
        let h4 = common::ints("h4_chain_sto3g_1.0");
        let full = ActiveSpace::full(&h4);
        let pool = build_qubit_pool(shape_of(&full), Mapping::JordanWigner).unwrap();
        let (_, _, trace) = run_adapt(&h4, &full, &pool, &AdaptOptions { max_iter: 4, ..Default::default() });
        format!("{}{}{}{}", oo.trace_csv(), oo.rdms.dump(), serde_json::to_string(&ac0).unwrap(), trace.to_csv())
    };
    let (a, b) = (once(), once());
    ensure(a == b, || "outputs differ between identical runs".into())?;
    Ok(format!("{} bytes identical across two runs", a.len()))
}

struct Criterion {
    name: &'static str,
    run: fn() -> Outcome,
    ignored: bool,
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let include_ignored = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let filters: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let criteria = [
        Criterion { name: "oracle equivalence: H2/STO-3G UCCSD = FCI", run: h2_uccsd_equals_fci, ignored: false },
        Criterion { name: "variational hierarchy on every fixture", run: variational_hierarchy, ignored: false },
        Criterion { name: "RDM identities after VQE and each OO macro-iteration", run: rdm_identities, ignored: false },
        Criterion { name: "energy reconstruction from RDMs", run: energy_reconstruction, ignored: false },
        Criterion { name: "orbital gradient vs finite differences", run: orbital_gradient_check, ignored: false },
        Criterion { name: "JW and parity spectra agree", run: mapping_equivalence, ignored: false },
        Criterion { name: "ADAPT behavior", run: adapt_behavior, ignored: false },
        Criterion { name: "ERPA dense oracle and block consistency", run: erpa_oracle, ignored: false },
        Criterion { name: "AC0 vanishes for a full active space", run: ac0_fci_limit, ignored: false },
        Criterion { name: "AC0 improves OO-UCCD on H2/6-31G and LiH CAS(2,2)", run: ac0_improvement, ignored: false },
        Criterion { name: "N2/STO-3G CAS(10,8) OO-UCCD-AC0 recovers >= 90%", run: n2_recovery, ignored: false },
        Criterion {
            name: "N2/cc-pVDZ active-active lowering 2.4 +- 0.8 mHa",
            run: active_active_lowering,
            ignored: true,
        },
        Criterion { name: "determinism", run: determinism, ignored: false },
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for c in &criteria {
        if !filters.is_empty() && !filters.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        if c.ignored && !include_ignored {
            println!("[SKIP] {} (run with --include-ignored)", c.name);
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {} ({secs:.1} s): {detail}", c.name),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {} ({secs:.1} s): {detail}", c.name);
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
