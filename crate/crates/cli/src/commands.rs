use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mrb::analysis::{analyze as analyze_records, FitOptions, Report};
use mrb::campaign::{
    bootstrap_seed, campaign_epsilon, run_campaign, run_sweep, simulation_seed, CampaignConfig, Fig2Preset,
    SweepOptions,
};
use mrb::circuit::MirrorCircuit;
use mrb::design::{circuit_id, MrbDesign};
use mrb::noise::OmegaEstimate;
use mrb::oracle::run_validation;
use mrb::sim::{simulate_shots_seeded, Executor, ResultsFile};

use crate::config::ConfigArgs;
use crate::CliError;

pub const EPSILON_SCHEMA: &str = "mrb-epsilon/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonFile {
    pub schema: String,
    pub include_pauli_layer: bool,
    #[serde(flatten)]
    pub estimate: OmegaEstimate,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(mrb::Error::Io { path: path.to_path_buf(), source: e })
}

fn json_line(s: String) -> String {
    s + "\n"
}

fn write_design(dir: &Path, cfg: &CampaignConfig, design: &MrbDesign) -> Result<usize, CliError> {
    write(&dir.join("config.json"), &json_line(cfg.to_json()?))?;
    write(&dir.join("design.json"), &json_line(design.to_json()?))?;
    let circuits = design.circuits()?;
    for c in &circuits {
        write(&dir.join("circuits").join(format!("{}.txt", c.id)), &c.circuit.to_text())?;
    }
    Ok(circuits.len())
}

fn epsilon_file(cfg: &CampaignConfig, estimate: OmegaEstimate) -> EpsilonFile {
    EpsilonFile { schema: EPSILON_SCHEMA.into(), include_pauli_layer: cfg.include_pauli_layer, estimate }
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

pub fn design(a: DesignArgs) -> Result<(), CliError> {
    let cfg = a.cfg.resolve(None)?;
    let design = cfg.design()?;
    let count = write_design(&a.out, &cfg, &design)?;
    eprintln!("wrote {count} circuits to {}", a.out.join("circuits").display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Design directory written by `mrb design`
    #[arg(long)]
    pub design: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Results file [default: <design>/results.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn base_config(dir: &Path) -> Option<PathBuf> {
    let p = dir.join("config.json");
    p.exists().then_some(p)
}

/// Loads every circuit file named by the design, in design order.
fn load_circuits(dir: &Path, design: &MrbDesign) -> Result<Vec<(String, MirrorCircuit)>, CliError> {
    let mut out = Vec::new();
    for &d in &design.depths {
        for k in 0..design.circuits_per_depth {
            let id = circuit_id(d, k);
            let path = dir.join("circuits").join(format!("{id}.txt"));
            let text = std::fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let c = MirrorCircuit::from_text(&text)
                .map_err(|e| CliError::Runtime(mrb::Error::InvalidArgument(format!("{}: {e}", path.display()))))?;
            if c.depth() != d || c.num_qubits() != design.n {
                return Err(CliError::Runtime(mrb::Error::InvalidArgument(format!(
                    "{}: circuit has n = {}, d = {}; design expects n = {}, d = {d}",
                    path.display(),
                    c.num_qubits(),
                    c.depth(),
                    design.n
                ))));
            }
            out.push((id, c));
        }
    }
    Ok(out)
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let cfg = a.cfg.resolve(base_config(&a.design).as_deref())?;
    let design = MrbDesign::load(&a.design.join("design.json"))?;
    let circuits = load_circuits(&a.design, &design)?;
    let model = cfg.model.build(&design.connectivity, cfg.seed)?;
    let sim_seed = simulation_seed(cfg.seed);
    let records = circuits
        .par_iter()
        .map(|(id, c)| simulate_shots_seeded(id, c, &model, cfg.shots, sim_seed, Executor::Frame))
        .collect::<mrb::Result<Vec<_>>>()?;
    let out = a.out.unwrap_or_else(|| a.design.join("results.json"));
    write(&out, &json_line(ResultsFile::new(records).to_json()?))?;
    write(&out.with_file_name("model.json"), &json_line(model.to_json()?))?;
    eprintln!("simulated {} circuits x {} shots -> {}", circuits.len(), cfg.shots, out.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Results file: mrb-results JSON, or counts CSV (id,d,target,outcome,count)
    #[arg(long)]
    pub results: PathBuf,
    /// Known average layer infidelity, for the relative error
    #[arg(long, conflicts_with = "epsilon")]
    pub epsilon_omega: Option<f64>,
    /// Epsilon file written by `mrb epsilon`
    #[arg(long)]
    pub epsilon: Option<PathBuf>,
    /// Bootstrap replicates
    #[arg(long, default_value_t = 200)]
    pub bootstrap: usize,
    /// Seed for the bootstrap
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Inverse-variance weighted fit
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub weighted: bool,
    /// Output directory for report.json and decay.csv [default: next to the results]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn write_report(dir: &Path, report: &Report) -> Result<(), CliError> {
    write(&dir.join("report.json"), &json_line(report.to_json()?))?;
    write(&dir.join("decay.csv"), &report.decay_csv())
}

fn summary(report: &Report) -> String {
    let f = &report.fit;
    let mut s = format!("n = {}: A = {:.4}, p = {:.6}, r = {:.4e}", report.n, f.a, f.p, f.r);
    if let Some(b) = f.bootstrap {
        s += &format!(" ± {:.1e}", b.sigma_r);
    }
    if let (Some(e), Some(d)) = (report.epsilon_omega, report.delta_rel) {
        s += &format!(", epsilon = {e:.4e}, delta_rel = {d:+.3}");
    }
    s
}

pub fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let results = ResultsFile::load(&a.results)?;
    let eps = match (&a.epsilon_omega, &a.epsilon) {
        (Some(e), _) => Some(*e),
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            let f: EpsilonFile = serde_json::from_str(&text).map_err(mrb::Error::from)?;
            if f.schema != EPSILON_SCHEMA {
                return Err(CliError::Usage(format!("{}: unsupported schema {:?}", p.display(), f.schema)));
            }
            Some(f.estimate.epsilon)
        }
        (None, None) => None,
    };
    let opts = FitOptions { asymptote: 0.0, weighted: a.weighted };
    let report = analyze_records(&results.records, &opts, a.bootstrap, bootstrap_seed(a.seed), eps)?;
    let dir = a.out.unwrap_or_else(|| a.results.parent().map(Path::to_path_buf).unwrap_or_default());
    write_report(&dir, &report)?;
    println!("{}", summary(&report));
    Ok(())
}

#[derive(Debug, Args)]
pub struct EpsilonArgs {
    /// Design directory or design.json
    #[arg(long)]
    pub design: PathBuf,
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output file [default: <design dir>/epsilon.json]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn epsilon(a: EpsilonArgs) -> Result<(), CliError> {
    let (dir, file) = if a.design.is_dir() {
        (a.design.clone(), a.design.join("design.json"))
    } else {
        (a.design.parent().map(Path::to_path_buf).unwrap_or_default(), a.design.clone())
    };
    let cfg = a.cfg.resolve(base_config(&dir).as_deref())?;
    let design = MrbDesign::load(&file)?;
    let model = cfg.model.build(&design.connectivity, cfg.seed)?;
    let est = campaign_epsilon(&cfg, &design, &model)?;
    let text = json_line(serde_json::to_string_pretty(&epsilon_file(&cfg, est)).map_err(mrb::Error::from)?);
    write(&a.out.unwrap_or_else(|| dir.join("epsilon.json")), &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: RunArgs) -> Result<(), CliError> {
    let cfg = a.cfg.resolve(None)?;
    let out = run_campaign(&cfg)?;
    write_design(&a.out, &cfg, &out.design)?;
    write(&a.out.join("model.json"), &json_line(out.model.to_json()?))?;
    write(&a.out.join("results.json"), &json_line(out.results.to_json()?))?;
    let eps = serde_json::to_string_pretty(&epsilon_file(&cfg, out.epsilon)).map_err(mrb::Error::from)?;
    write(&a.out.join("epsilon.json"), &json_line(eps))?;
    write_report(&a.out, &out.report)?;
    println!("{}", summary(&out.report));
    Ok(())
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shots per executor comparison
    #[arg(long, default_value_t = 100_000)]
    pub shots: usize,
    /// Also write the JSON report here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn validate(a: ValidateArgs) -> Result<(), CliError> {
    let report = run_validation(a.seed, a.shots)?;
    let text = json_line(serde_json::to_string_pretty(&report).map_err(mrb::Error::from)?);
    if let Some(p) = &a.out {
        write(p, &text)?;
    }
    print!("{text}");
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Validation(format!("failed checks: {}", failed.join(", "))))
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// fig2a (random models) or fig2b (crosstalk models)
    #[arg(long)]
    pub preset: Fig2Preset,
    /// Comma-separated qubit counts [default: 1,2,4,8,16]
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Random models per qubit count [default: 10 for fig2a]
    #[arg(long)]
    pub models_per_n: Option<usize>,
    /// Template for every campaign; n, model and seed are set per campaign
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Output directory for sweep.json and sweep.csv
    #[arg(long)]
    pub out: PathBuf,
}

pub fn sweep(a: SweepArgs) -> Result<(), CliError> {
    let base = a.cfg.resolve(None)?;
    let mut opts = SweepOptions::preset(a.preset, base.seed);
    opts.base = base;
    if let Some(ns) = a.ns {
        opts.ns = ns;
    }
    if let Some(m) = a.models_per_n {
        opts.models_per_n = m;
    }
    let table = run_sweep(a.preset, &opts)?;
    write(&a.out.join("sweep.json"), &json_line(table.to_json()?))?;
    let csv = table.to_csv();
    write(&a.out.join("sweep.csv"), &csv)?;
    print!("{csv}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_file_round_trip() {
        let f = EpsilonFile {
            schema: EPSILON_SCHEMA.into(),
            include_pauli_layer: true,
            estimate: OmegaEstimate { epsilon: 0.01, stderr: 1e-4, cov: 1e-6, layer_samples: 10, per_layer_samples: 100 },
        };
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"epsilon\":0.01"));
        assert_eq!(serde_json::from_str::<EpsilonFile>(&s).unwrap(), f);
    }

    #[test]
    fn model_source_errors_are_runtime() {
        let e: CliError = mrb::Error::ModelCoverage("x".into()).into();
        assert!(matches!(e, CliError::Runtime(_)));
        let e: CliError = mrb::Error::InvalidDesign("odd".into()).into();
        assert!(matches!(e, CliError::Usage(_)));
    }
}
