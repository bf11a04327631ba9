mod config;
mod pipeline;
mod report;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use config::{parse_cas, parse_method_spec, ConfigFile, Correction, Method, RunConfig};
use pipeline::{method_label, run_fixture, run_single, Fixture, RunRecord};
use report::{comparison_table, gnuplot_stub, scan_csv, ScanRow, TableEntry};
use vqeac::exactsolver::fci_energy;

/// Largest determinant space for which scans compute an FCI oracle.
const FCI_ORACLE_LIMIT: f64 = 4.0e6;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Module(#[from] vqeac::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use vqeac::Error as E;
        match self {
            CliError::Module(E::Numerical(_) | E::Instability { .. } | E::Dimension { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "vqeac", version, about = "Active-space VQE with orbital optimization and AC corrections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Overrides {
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_enum)]
    correction: Option<Correction>,
    /// Active space as n_elec,n_orb
    #[arg(long, value_parser = parse_cas)]
    cas: Option<[usize; 2]>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow AC corrections on references that are not orbital optimized
    #[arg(long)]
    force: bool,
}

impl Overrides {
    fn file(&self) -> Result<ConfigFile, CliError> {
        let mut f = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if self.cas.is_some() {
            f.cas = self.cas;
        }
        f.force |= self.force;
        Ok(f)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-point calculation; prints a JSON record
    Run {
        #[command(flatten)]
        opts: Overrides,
        fcidump: Option<PathBuf>,
    },
    /// Method comparison over fixtures ordered by bond parameter; prints CSV
    Scan {
        #[command(flatten)]
        opts: Overrides,
        fixtures: Vec<PathBuf>,
    },
    /// Aligned comparison table from JSON run records
    Table {
        #[arg(long)]
        out: Option<PathBuf>,
        records: Vec<PathBuf>,
    },
    /// Full configuration interaction energy of a fixture
    Fci {
        #[arg(long)]
        out: Option<PathBuf>,
        fcidump: PathBuf,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn record_json(rec: &RunRecord) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(rec).map_err(vqeac::Error::from)?;
    s.push('\n');
    Ok(s)
}

fn report_run(rec: &RunRecord, started: Instant) {
    eprintln!(
        "{} {}: E_total = {:.10} Ha (E_ref {:.10}, E_corr {:.3e}) in {:.2} s",
        rec.system,
        rec.label,
        rec.e_total,
        rec.e_ref,
        rec.e_corr,
        started.elapsed().as_secs_f64()
    );
    if !rec.converged {
        eprintln!("warning: {} {} did not converge", rec.system, rec.label);
    }
    for w in rec.ac.iter().flat_map(|a| &a.warnings) {
        eprintln!("warning: {w}");
    }
}

fn run(opts: &Overrides, fcidump: Option<PathBuf>) -> Result<(), CliError> {
    let file = opts.file()?;
    let path = fcidump
        .or_else(|| file.fcidump.clone())
        .ok_or_else(|| CliError::Config("no FCIDUMP given (argument or config 'fcidump')".into()))?;
    let method = opts
        .method
        .or(file.method)
        .ok_or_else(|| CliError::Config("no method given (--method or config 'method')".into()))?;
    let correction = opts.correction.or(file.correction).unwrap_or_default();
    let cfg = RunConfig::new(&file, path, method, correction)?;
    let started = Instant::now();
    let rec = run_single(&cfg)?;
    report_run(&rec, started);
    emit(opts.out.as_deref(), &record_json(&rec)?)
}

fn determinant_count(ints: &vqeac::integrals::IntegralSet) -> f64 {
    let binom = |n: usize, k: usize| (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    binom(ints.n_orb, ints.n_alpha()) * binom(ints.n_orb, ints.n_beta())
}

fn scan(opts: &Overrides, fixtures: Vec<PathBuf>) -> Result<(), CliError> {
    let file = opts.file()?;
    let paths = if fixtures.is_empty() { file.fixtures.clone() } else { fixtures };
    if paths.is_empty() {
        return Err(CliError::Config("no fixtures given (arguments or config 'fixtures')".into()));
    }
    let methods: Vec<(Method, Correction)> = match opts.method.or(file.method) {
        Some(m) => vec![(m, opts.correction.or(file.correction).unwrap_or_default())],
        None => file.methods.iter().map(|s| parse_method_spec(s)).collect::<Result<_, _>>()?,
    };
    if methods.is_empty() {
        return Err(CliError::Config("no methods given (--method or config 'methods')".into()));
    }
    let configs: Vec<RunConfig> =
        methods.iter().map(|&(m, c)| RunConfig::new(&file, PathBuf::new(), m, c)).collect::<Result<_, _>>()?;

    let mut loaded: Vec<(f64, Fixture)> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let fx = Fixture::load(p, file.ms2)?;
            Ok((fx.parameter().unwrap_or(i as f64), fx))
        })
        .collect::<Result<_, CliError>>()?;
    loaded.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));

    let started = Instant::now();
    let oracles: Vec<Option<f64>> =
        loaded
            .par_iter()
            .map(|(_, fx)| {
                if determinant_count(&fx.ints) <= FCI_ORACLE_LIMIT {
                    fci_energy(&fx.ints).map(Some)
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<_, _>>()?;
    let jobs: Vec<(usize, usize)> = (0..loaded.len()).flat_map(|f| (0..configs.len()).map(move |m| (f, m))).collect();
    let records: Vec<RunRecord> =
        jobs.par_iter().map(|&(f, m)| run_fixture(&configs[m], &loaded[f].1)).collect::<Result<_, _>>()?;

    let rows: Vec<ScanRow> = jobs
        .iter()
        .zip(&records)
        .map(|(&(f, _), rec)| {
            let pct = oracles[f].and_then(|fci| {
                let den = fci - rec.e_hf;
                (den.abs() > 1e-12).then(|| 100.0 * (rec.e_total - rec.e_hf) / den)
            });
            ScanRow {
                parameter: loaded[f].0,
                system: rec.system.clone(),
                label: rec.label.clone(),
                e_total: rec.e_total,
                e_corr: rec.e_corr,
                pct_corr: pct,
            }
        })
        .collect();
    for rec in &records {
        if !rec.converged {
            eprintln!("warning: {} {} did not converge", rec.system, rec.label);
        }
    }
    eprintln!("scan: {} rows in {:.2} s", rows.len(), started.elapsed().as_secs_f64());
    emit(opts.out.as_deref(), &scan_csv(&rows))?;
    if let Some(out) = &opts.out {
        let labels: Vec<String> = configs.iter().map(|c| method_label(c.method, c.correction, c.adapt_oo)).collect();
        let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        emit(Some(&out.with_extension("gp")), &gnuplot_stub(&name, &labels))?;
    }
    Ok(())
}

fn table(out: Option<&Path>, records: &[PathBuf]) -> Result<(), CliError> {
    let mut entries = Vec::new();
    for p in records {
        let text =
            std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let items = match value {
            serde_json::Value::Array(v) => v,
            v => vec![v],
        };
        for v in items {
            entries.push(
                serde_json::from_value::<TableEntry>(v)
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            );
        }
    }
    emit(out, &comparison_table(&entries))
}

fn fci(out: Option<&Path>, fcidump: PathBuf) -> Result<(), CliError> {
    let cfg = RunConfig::new(&ConfigFile::default(), fcidump, Method::Fci, Correction::None)?;
    let started = Instant::now();
    let rec = run_single(&cfg)?;
    report_run(&rec, started);
    emit(out, &record_json(&rec)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { opts, fcidump } => run(&opts, fcidump),
        Command::Scan { opts, fixtures } => scan(&opts, fixtures),
        Command::Table { out, records } => table(out.as_deref(), &records),
        Command::Fci { out, fcidump } => fci(out.as_deref(), fcidump),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
