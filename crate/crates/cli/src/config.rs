//! Run configuration: JSON file plus command-line overrides, validated into a
//! [`RunConfig`] per (fixture, method) pair.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use vqeac::operators::Mapping;
use vqeac::orbital_opt::OoOptions;
use vqeac::vqe::{AdaptOptions, VqeOptions};

use crate::pipeline::{correction_name, method_name};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hf,
    Fci,
    Casci,
    Casscf,
    Uccsd,
    OoUccd,
    Adapt,
    QubitAdapt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    #[default]
    None,
    Ac0,
    Ac,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MappingName {
    #[default]
    Jw,
    Parity,
}

impl From<MappingName> for Mapping {
    fn from(m: MappingName) -> Self {
        match m {
            MappingName::Jw => Mapping::JordanWigner,
            MappingName::Parity => Mapping::Parity,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeSection {
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for VqeSection {
    fn default() -> Self {
        let d = VqeOptions::default();
        Self { gtol: d.gtol, max_iter: d.max_iter }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptSection {
    pub max_iter: usize,
    pub eps_grad: f64,
    /// Wrap ADAPT in the two-step orbital optimization.
    pub orbital_optimization: bool,
}

impl Default for AdaptSection {
    fn default() -> Self {
        let d = AdaptOptions::default();
        Self { max_iter: d.max_iter, eps_grad: d.eps_grad, orbital_optimization: false }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OoSection {
    pub max_macro: usize,
    pub grad_tol: f64,
    pub energy_tol: f64,
    /// `None` keeps the solver default (on for VQE/ADAPT, off for CASSCF).
    pub active_active: Option<bool>,
}

impl Default for OoSection {
    fn default() -> Self {
        let d = OoOptions::default();
        Self { max_macro: d.max_macro, grad_tol: d.grad_tol, energy_tol: d.energy_tol, active_active: None }
    }
}

/// On-disk configuration. `run` uses `fcidump`, `scan` uses `fixtures` and
/// `methods` (entries like `"oo-uccd+ac0"`).
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub fcidump: Option<PathBuf>,
    pub fixtures: Vec<PathBuf>,
    pub method: Option<Method>,
    pub correction: Option<Correction>,
    pub methods: Vec<String>,
    pub cas: Option<[usize; 2]>,
    pub ms2: Option<i32>,
    pub mapping: MappingName,
    pub force: bool,
    pub ac_nodes: Option<usize>,
    pub vqe: VqeSection,
    pub adapt: AdaptSection,
    pub oo: OoSection,
}

impl ConfigFile {
    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ConfigFile =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.fcidump.as_mut() {
            resolve(p);
        }
        cfg.fixtures.iter_mut().for_each(resolve);
        Ok(cfg)
    }
}

/// Parses `"method"` or `"method+correction"`.
pub fn parse_method_spec(s: &str) -> Result<(Method, Correction), CliError> {
    let (m, c) = match s.split_once('+') {
        Some((m, c)) => (m, Some(c)),
        None => (s, None),
    };
    let method = Method::from_str(m.trim(), true).map_err(|_| CliError::Config(format!("unknown method '{m}'")))?;
    let correction = match c {
        Some(c) => {
            Correction::from_str(c.trim(), true).map_err(|_| CliError::Config(format!("unknown correction '{c}'")))?
        }
        None => Correction::None,
    };
    Ok((method, correction))
}

/// Parses `--cas n_elec,n_orb`.
pub fn parse_cas(s: &str) -> Result<[usize; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [e, o] => Ok([
            e.parse().map_err(|_| format!("bad electron count '{e}'"))?,
            o.parse().map_err(|_| format!("bad orbital count '{o}'"))?,
        ]),
        _ => Err(format!("expected n_elec,n_orb, got '{s}'")),
    }
}

/// Fully resolved settings for one pipeline execution.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub fcidump: PathBuf,
    pub method: Method,
    pub correction: Correction,
    pub cas: Option<[usize; 2]>,
    pub ms2: Option<i32>,
    pub mapping: Mapping,
    pub force: bool,
    pub ac_nodes: usize,
    pub vqe: VqeOptions,
    pub adapt: AdaptOptions,
    pub adapt_oo: bool,
    pub oo: OoOptions,
    pub active_active: Option<bool>,
}

impl RunConfig {
    pub fn new(file: &ConfigFile, fcidump: PathBuf, method: Method, correction: Correction) -> Result<Self, CliError> {
        let vqe = VqeOptions { gtol: file.vqe.gtol, max_iter: file.vqe.max_iter };
        let cfg = RunConfig {
            fcidump,
            method,
            correction,
            cas: file.cas,
            ms2: file.ms2,
            mapping: file.mapping.into(),
            force: file.force,
            ac_nodes: file.ac_nodes.unwrap_or(5),
            adapt: AdaptOptions { max_iter: file.adapt.max_iter, eps_grad: file.adapt.eps_grad, vqe: vqe.clone() },
            vqe,
            adapt_oo: file.adapt.orbital_optimization,
            oo: OoOptions {
                max_macro: file.oo.max_macro,
                grad_tol: file.oo.grad_tol,
                energy_tol: file.oo.energy_tol,
                ..Default::default()
            },
            active_active: file.oo.active_active,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Whether the reference comes out of an orbital optimization.
    pub fn orbital_optimized(&self) -> bool {
        match self.method {
            Method::Casscf | Method::OoUccd => true,
            Method::Adapt | Method::QubitAdapt => self.adapt_oo,
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.ac_nodes == 0 {
            return bad("ac_nodes must be positive".into());
        }
        if self.correction == Correction::None {
            return Ok(());
        }
        if matches!(self.method, Method::Hf | Method::Fci) {
            return bad(format!(
                "correction {} needs an active-space reference, not {}",
                correction_name(self.correction),
                method_name(self.method)
            ));
        }
        if self.ms2.is_some_and(|m| m != 0) {
            return bad("AC corrections are implemented for singlet (ms2 = 0) references only".into());
        }
        let exact_cas = self.method == Method::Casci;
        if !(exact_cas || self.orbital_optimized() || self.force) {
            return bad(format!(
                "correction {} requires an orbital-optimized or exact-CAS reference; {} is neither (use --force)",
                correction_name(self.correction),
                method_name(self.method)
            ));
        }
        Ok(())
    }
}
