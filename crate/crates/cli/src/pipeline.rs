//! Single-point pipeline: fixture -> reference method -> optional AC correction.

use serde::{Deserialize, Serialize};
use std::path::Path;
use vqeac::ac::{ac0_correction, ac_correction, AcResult};
use vqeac::ansatz::{
    build_fermionic_pool, build_qubit_pool, build_uccd, build_uccsd, count_cnots, AnsatzCircuit, CompiledCircuit, Shape,
};
use vqeac::exactsolver::{casci_solve, fci_energy, rdms_from_civector};
use vqeac::integrals::{embed_active_space, load_fixture, ActiveSpace, FixtureMeta, IntegralSet};
use vqeac::orbital_opt::{optimize_orbitals, InnerSolver, MacroIteration, OoOptions, OoResult};
use vqeac::rdm::{measure_rdms, ReducedDensityMatrices};
use vqeac::vqe::{adapt_loop, minimize, problem_hamiltonian, AdaptTrace, VqeResult};

use crate::config::{Correction, Method, RunConfig};
use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Versions {
    pub vqeac: String,
    pub vqeac_cli: String,
}

impl Default for Versions {
    fn default() -> Self {
        Self { vqeac: vqeac::VERSION.into(), vqeac_cli: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Traces {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vqe: Option<VqeResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orbital_optimization: Vec<MacroIteration>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub adapt: Vec<AdaptTrace>,
}

/// Result record of one run. Wall-clock timings are reported on stderr only,
/// so records are reproducible byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub system: String,
    pub fixture: String,
    pub parameter: Option<f64>,
    pub method: Method,
    pub correction: Correction,
    pub label: String,
    pub ms2: i32,
    pub cas: [usize; 2],
    pub n_orbitals: usize,
    pub mapping: String,
    pub e_hf: f64,
    pub e_ref: f64,
    pub e_corr: f64,
    pub e_total: f64,
    pub converged: bool,
    pub cnots: Option<usize>,
    pub n_params: Option<usize>,
    pub active_active: Option<bool>,
    pub traces: Traces,
    pub ac: Option<AcResult>,
    pub versions: Versions,
}

/// Display label such as `OO-UCCD-AC0` or `QUBIT-ADAPT-SCF`.
pub fn method_label(method: Method, correction: Correction, adapt_oo: bool) -> String {
    let mut s = method_name(method).to_uppercase();
    if adapt_oo && matches!(method, Method::Adapt | Method::QubitAdapt) {
        s.push_str("-SCF");
    }
    if correction != Correction::None {
        s.push('-');
        s.push_str(&correction_name(correction).to_uppercase());
    }
    s
}

pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::Hf => "hf",
        Method::Fci => "fci",
        Method::Casci => "casci",
        Method::Casscf => "casscf",
        Method::Uccsd => "uccsd",
        Method::OoUccd => "oo-uccd",
        Method::Adapt => "adapt",
        Method::QubitAdapt => "qubit-adapt",
    }
}

pub fn correction_name(c: Correction) -> &'static str {
    match c {
        Correction::None => "none",
        Correction::Ac0 => "ac0",
        Correction::Ac => "ac",
    }
}

pub struct Fixture {
    pub ints: IntegralSet,
    pub meta: Option<FixtureMeta>,
    pub name: String,
}

impl Fixture {
    pub fn load(path: &Path, ms2: Option<i32>) -> Result<Self, CliError> {
        let (mut ints, meta) = load_fixture(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(m) = ms2 {
            let n = ints.n_elec as i32;
            if (n + m) % 2 != 0 || m.abs() > n || (n + m.abs()) / 2 > ints.n_orb as i32 {
                return Err(CliError::Config(format!("ms2 = {m} is incompatible with {n} electrons")));
            }
            ints.ms2 = m;
        }
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Self { ints, meta, name })
    }

    pub fn system(&self) -> String {
        match &self.meta {
            Some(m) => m.label.clone(),
            None => self.name.trim_end_matches(".fcidump").to_string(),
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        self.meta.as_ref().and_then(|m| m.bond_parameter_angstrom)
    }
}

/// Reference outcome before any correction.
struct Reference {
    energy: f64,
    ints: IntegralSet,
    rdms: Option<ReducedDensityMatrices>,
    converged: bool,
    circuit: Option<AnsatzCircuit>,
    traces: Traces,
    active_active: Option<bool>,
}

impl Reference {
    fn plain(energy: f64, ints: &IntegralSet) -> Self {
        Self {
            energy,
            ints: ints.clone(),
            rdms: None,
            converged: true,
            circuit: None,
            traces: Traces::default(),
            active_active: None,
        }
    }

    fn from_oo(r: OoResult) -> Self {
        Self {
            energy: r.energy,
            converged: r.converged,
            traces: Traces { vqe: None, orbital_optimization: r.trace, adapt: r.adapt_traces },
            active_active: Some(r.classes.active_active),
            ints: r.ints,
            rdms: Some(r.rdms),
            circuit: r.circuit,
        }
    }
}

fn oo_options(cfg: &RunConfig, solver: &InnerSolver) -> OoOptions {
    let mut o = cfg.oo.clone();
    o.mapping = cfg.mapping;
    let mut classes = solver.default_classes();
    if let Some(aa) = cfg.active_active {
        classes.active_active = aa;
    }
    o.classes = Some(classes);
    o
}

fn reference(cfg: &RunConfig, ints: &IntegralSet, cas: &ActiveSpace) -> vqeac::Result<Reference> {
    let shape = Shape::new(cas.active.len(), cas.n_act_alpha(ints.ms2), cas.n_act_beta(ints.ms2));
    match cfg.method {
        Method::Hf => Ok(Reference::plain(ints.hf_energy(), ints)),
        Method::Fci => Ok(Reference::plain(fci_energy(ints)?, ints)),
        Method::Casci => {
            let (sol, _) = casci_solve(ints, cas, 1)?;
            let mut r = Reference::plain(sol.energies[0], ints);
            r.rdms = Some(rdms_from_civector(&sol, 0)?);
            Ok(r)
        }
        Method::Casscf => {
            let solver = InnerSolver::Casci;
            optimize_orbitals(ints, cas, &solver, &oo_options(cfg, &solver)).map(Reference::from_oo)
        }
        Method::Uccsd => {
            let emb = embed_active_space(ints, cas)?;
            let h = problem_hamiltonian(&emb, cfg.mapping, None)?;
            let circuit = build_uccsd(shape, cfg.mapping);
            let res = minimize(&circuit, &h, &vec![0.0; circuit.n_params], &cfg.vqe)?;
            let psi = CompiledCircuit::new(&circuit)?.state(&res.theta);
            let mut r = Reference::plain(res.energy, ints);
            r.rdms = Some(measure_rdms(&psi, cfg.mapping)?);
            r.converged = res.converged;
            r.circuit = Some(circuit);
            r.traces.vqe = Some(res);
            Ok(r)
        }
        Method::OoUccd => {
            let solver = InnerSolver::Vqe { circuit: build_uccd(shape, cfg.mapping), opts: cfg.vqe.clone() };
            optimize_orbitals(ints, cas, &solver, &oo_options(cfg, &solver)).map(Reference::from_oo)
        }
        Method::Adapt | Method::QubitAdapt => {
            let pool = if cfg.method == Method::Adapt {
                build_fermionic_pool(shape)?
            } else {
                build_qubit_pool(shape, cfg.mapping)?
            };
            let start = AnsatzCircuit::empty(shape, cfg.mapping);
            if cfg.adapt_oo {
                let solver = InnerSolver::Adapt { pool, start, opts: cfg.adapt.clone() };
                return optimize_orbitals(ints, cas, &solver, &oo_options(cfg, &solver)).map(Reference::from_oo);
            }
            let emb = embed_active_space(ints, cas)?;
            let h = problem_hamiltonian(&emb, cfg.mapping, Some(&pool))?;
            let (circuit, res, trace) = adapt_loop(&pool, start, &[], &h, &cfg.adapt)?;
            let psi = CompiledCircuit::new(&circuit)?.state(&res.theta);
            let mut r = Reference::plain(res.energy, ints);
            r.rdms = Some(measure_rdms(&psi, cfg.mapping)?);
            r.converged = trace.converged;
            r.circuit = Some(circuit);
            r.traces.vqe = Some(res);
            r.traces.adapt.push(trace);
            Ok(r)
        }
    }
}

/// Executes the configured pipeline on an already loaded fixture.
pub fn run_fixture(cfg: &RunConfig, fx: &Fixture) -> Result<RunRecord, CliError> {
    cfg.validate()?;
    let ints = &fx.ints;
    let cas = match (cfg.method, cfg.cas) {
        (Method::Hf | Method::Fci, _) | (_, None) => ActiveSpace::full(ints),
        (_, Some([ne, no])) => ActiveSpace::from_counts(ints, ne, no).map_err(|e| CliError::Config(e.to_string()))?,
    };
    let r = reference(cfg, ints, &cas)?;
    let ac = match cfg.correction {
        Correction::None => None,
        c => {
            let rdms = r.rdms.as_ref().expect("validated methods produce RDMs");
            Some(match c {
                Correction::Ac0 => ac0_correction(&r.ints, &cas, rdms)?,
                _ => ac_correction(&r.ints, &cas, rdms, cfg.ac_nodes)?,
            })
        }
    };
    let e_corr = ac.as_ref().map_or(0.0, |a| a.e_corr);
    Ok(RunRecord {
        system: fx.system(),
        fixture: fx.name.clone(),
        parameter: fx.parameter(),
        method: cfg.method,
        correction: cfg.correction,
        label: method_label(cfg.method, cfg.correction, cfg.adapt_oo),
        ms2: ints.ms2,
        cas: [cas.n_act_elec, cas.active.len()],
        n_orbitals: ints.n_orb,
        mapping: format!("{:?}", cfg.mapping),
        e_hf: ints.hf_energy(),
        e_ref: r.energy,
        e_corr,
        e_total: r.energy + e_corr,
        converged: r.converged,
        cnots: r.circuit.as_ref().map(count_cnots),
        n_params: r.circuit.as_ref().map(|c| c.n_params),
        active_active: r.active_active,
        traces: r.traces,
        ac,
        versions: Versions::default(),
    })
}

pub fn run_single(cfg: &RunConfig) -> Result<RunRecord, CliError> {
    let fx = Fixture::load(&cfg.fcidump, cfg.ms2)?;
    run_fixture(cfg, &fx)
}
