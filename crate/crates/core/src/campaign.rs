//! End-to-end campaigns: design, model, simulation, analysis and `ε_Ω`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, FitOptions, Report};
use crate::design::MrbDesign;
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::noise::{
    build_model1, build_model2, epsilon_omega, sample_random_model, CrosstalkSpec, ErrorModel, OmegaEstimate,
    RandomModelSpec,
};
use crate::sampling::SamplerSpec;
use crate::seed::{derive_rng, derive_seed, domain};
use crate::sim::{simulate_shots_seeded, Executor, ResultsFile};

/// Where a campaign's error model comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSource {
    Noiseless,
    Random {
        #[serde(flatten)]
        spec: RandomModelSpec,
    },
    Model1 {
        #[serde(flatten)]
        spec: CrosstalkSpec,
    },
    Model2 {
        #[serde(flatten)]
        spec: CrosstalkSpec,
    },
    File {
        path: PathBuf,
    },
}

impl ModelSource {
    /// Builds the model. Random models draw from `derive(seed, [MODEL])`.
    pub fn build(&self, graph: &ConnectivityGraph, seed: u64) -> Result<ErrorModel> {
        let m = match self {
            ModelSource::Noiseless => ErrorModel::noiseless(graph),
            ModelSource::Random { spec } => {
                sample_random_model(graph, spec, &mut derive_rng(seed, &[domain::MODEL]))?
            }
            ModelSource::Model1 { spec } => build_model1(graph, spec)?,
            ModelSource::Model2 { spec } => build_model2(graph, spec)?,
            ModelSource::File { path } => ErrorModel::load(path)?,
        };
        m.check_graph(graph)?;
        Ok(m)
    }

    /// Resolves a relative file path against `base`.
    pub fn resolve(&mut self, base: &Path) {
        if let ModelSource::File { path } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

/// Everything needed to regenerate a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default = "defaults::rows")]
    pub rows: usize,
    #[serde(default = "defaults::cols")]
    pub cols: usize,
    #[serde(default = "defaults::n")]
    pub n: usize,
    /// Device qubits to benchmark; a compact block of the lattice when absent.
    #[serde(default)]
    pub qubits: Option<Vec<usize>>,
    #[serde(default = "defaults::sampler")]
    pub sampler: SamplerSpec,
    #[serde(default = "defaults::depths")]
    pub depths: Vec<usize>,
    #[serde(default = "defaults::circuits_per_depth")]
    pub circuits_per_depth: usize,
    #[serde(default = "defaults::shots")]
    pub shots: usize,
    #[serde(default = "defaults::model")]
    pub model: ModelSource,
    pub seed: u64,
    #[serde(default = "defaults::epsilon_layers")]
    pub epsilon_layers: usize,
    #[serde(default = "defaults::epsilon_samples")]
    pub epsilon_samples: usize,
    #[serde(default = "defaults::yes")]
    pub include_pauli_layer: bool,
    #[serde(default = "defaults::bootstrap")]
    pub bootstrap: usize,
    #[serde(default = "defaults::yes")]
    pub weighted: bool,
}

pub mod defaults {
    use super::*;

    pub fn rows() -> usize {
        4
    }
    pub fn cols() -> usize {
        4
    }
    pub fn n() -> usize {
        4
    }
    pub fn sampler() -> SamplerSpec {
        SamplerSpec::edge_grab(0.125)
    }
    pub fn depths() -> Vec<usize> {
        vec![0, 2, 4, 8, 16, 32, 64]
    }
    pub fn circuits_per_depth() -> usize {
        30
    }
    pub fn shots() -> usize {
        100
    }
    pub fn model() -> ModelSource {
        ModelSource::Model1 { spec: CrosstalkSpec::default() }
    }
    pub fn epsilon_layers() -> usize {
        1000
    }
    pub fn epsilon_samples() -> usize {
        1000
    }
    pub fn bootstrap() -> usize {
        200
    }
    pub(super) fn yes() -> bool {
        true
    }
}

impl CampaignConfig {
    pub fn new(seed: u64) -> Self {
        CampaignConfig {
            rows: defaults::rows(),
            cols: defaults::cols(),
            n: defaults::n(),
            qubits: None,
            sampler: defaults::sampler(),
            depths: defaults::depths(),
            circuits_per_depth: defaults::circuits_per_depth(),
            shots: defaults::shots(),
            model: defaults::model(),
            seed,
            epsilon_layers: defaults::epsilon_layers(),
            epsilon_samples: defaults::epsilon_samples(),
            include_pauli_layer: true,
            bootstrap: defaults::bootstrap(),
            weighted: true,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions { asymptote: 0.0, weighted: self.weighted }
    }

    pub fn design(&self) -> Result<MrbDesign> {
        match &self.qubits {
            None => MrbDesign::on_lattice(
                self.rows,
                self.cols,
                self.n,
                self.sampler,
                self.depths.clone(),
                self.circuits_per_depth,
                self.shots,
                self.seed,
            ),
            Some(q) => {
                if q.len() != self.n {
                    return Err(Error::InvalidDesign(format!("n = {} but {} qubits listed", self.n, q.len())));
                }
                let g = ConnectivityGraph::grid(self.rows, self.cols).subgraph(q)?;
                MrbDesign::new(
                    g,
                    q.clone(),
                    self.sampler,
                    self.depths.clone(),
                    self.circuits_per_depth,
                    self.shots,
                    self.seed,
                )
            }
        }
    }

    pub fn model(&self, design: &MrbDesign) -> Result<ErrorModel> {
        self.model.build(&design.connectivity, self.seed)
    }
}

/// Simulates every circuit of `design` with `design.shots` shots each.
/// Shots use `derive(sim_seed, …)`; see [`simulate_shots_seeded`].
pub fn simulate_design(design: &MrbDesign, model: &ErrorModel, sim_seed: u64) -> Result<ResultsFile> {
    let circuits = design.circuits()?;
    let records = circuits
        .par_iter()
        .map(|c| simulate_shots_seeded(&c.id, &c.circuit, model, design.shots, sim_seed, Executor::Frame))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultsFile::new(records))
}

/// Seed used for shot simulation in a campaign with master seed `seed`.
pub fn simulation_seed(seed: u64) -> u64 {
    derive_seed(seed, &[domain::SHOT])
}

pub fn bootstrap_seed(seed: u64) -> u64 {
    derive_seed(seed, &[domain::BOOTSTRAP])
}

/// `ε_Ω` for a campaign, from the stream `derive(seed, [EPSILON])`.
pub fn campaign_epsilon(cfg: &CampaignConfig, design: &MrbDesign, model: &ErrorModel) -> Result<OmegaEstimate> {
    epsilon_omega(
        design,
        model,
        cfg.epsilon_layers,
        cfg.epsilon_samples,
        cfg.include_pauli_layer,
        &mut derive_rng(cfg.seed, &[domain::EPSILON]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutput {
    pub design: MrbDesign,
    pub model: ErrorModel,
    pub results: ResultsFile,
    pub epsilon: OmegaEstimate,
    pub report: Report,
}

pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    let design = cfg.design()?;
    let model = cfg.model(&design)?;
    let results = simulate_design(&design, &model, simulation_seed(cfg.seed))?;
    let epsilon = campaign_epsilon(cfg, &design, &model)?;
    let report = analyze(
        &results.records,
        &cfg.fit_options(),
        cfg.bootstrap,
        bootstrap_seed(cfg.seed),
        Some(epsilon.epsilon),
    )?;
    Ok(CampaignOutput { design, model, results, epsilon, report })
}

/// The two scaled-down simulation studies on a 4×4 lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig2Preset {
    /// Random models, several per qubit count.
    RandomModels,
    /// The crosstalk-free and long-range-crosstalk lattice models.
    Crosstalk,
}

impl std::str::FromStr for Fig2Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2a" | "random_models" => Ok(Fig2Preset::RandomModels),
            "fig2b" | "crosstalk" => Ok(Fig2Preset::Crosstalk),
            _ => Err(Error::InvalidArgument(format!("unknown preset {s:?} (expected fig2a or fig2b)"))),
        }
    }
}

pub const SWEEP_SCHEMA: &str = "mrb-sweep/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub ns: Vec<usize>,
    pub models_per_n: usize,
    /// Template for every campaign; `n`, `model` and `seed` are overwritten.
    pub base: CampaignConfig,
}

impl SweepOptions {
    pub fn preset(preset: Fig2Preset, seed: u64) -> Self {
        SweepOptions {
            ns: vec![1, 2, 4, 8, 16],
            models_per_n: match preset {
                Fig2Preset::RandomModels => 10,
                Fig2Preset::Crosstalk => 1,
            },
            base: CampaignConfig::new(seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub model: String,
    pub seed: u64,
    pub a: f64,
    pub p: f64,
    pub r: f64,
    pub sigma_r: f64,
    pub epsilon: f64,
    pub epsilon_stderr: f64,
    pub delta_rel: f64,
    pub normalized_residual_rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema: String,
    pub preset: Fig2Preset,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,model,seed,a,p,r,sigma_r,epsilon,epsilon_stderr,delta_rel\n");
        for r in &self.rows {
            out += &format!(
                "{},{},{:016x},{},{},{},{},{},{},{}\n",
                r.n, r.model, r.seed, r.a, r.p, r.r, r.sigma_r, r.epsilon, r.epsilon_stderr, r.delta_rel
            );
        }
        out
    }
}

/// The campaign configurations a sweep runs, in table order.
///
/// Campaign `(n, m)` of a random-model sweep has seed `derive(seed, [SWEEP, n, m])`.
/// A single qubit has no edges, so edge-grab density is set to 0 there.
pub fn sweep_configs(preset: Fig2Preset, opts: &SweepOptions) -> Vec<(String, CampaignConfig)> {
    let mut out = Vec::new();
    for &n in &opts.ns {
        let mut base = opts.base.clone();
        base.n = n;
        if n == 1 {
            if let SamplerSpec::EdgeGrab { .. } = base.sampler {
                base.sampler = SamplerSpec::edge_grab(0.0);
            }
        }
        match preset {
            Fig2Preset::RandomModels => {
                for m in 0..opts.models_per_n {
                    let mut c = base.clone();
                    c.seed = derive_seed(opts.base.seed, &[domain::SWEEP, n as u64, m as u64]);
                    c.model = ModelSource::Random { spec: RandomModelSpec::default() };
                    out.push((format!("random{m}"), c));
                }
            }
            Fig2Preset::Crosstalk => {
                for (k, (name, model)) in [
                    ("model1", ModelSource::Model1 { spec: CrosstalkSpec::default() }),
                    ("model2", ModelSource::Model2 { spec: CrosstalkSpec::default() }),
                ]
                .into_iter()
                .enumerate()
                {
                    let mut c = base.clone();
                    c.seed = derive_seed(opts.base.seed, &[domain::SWEEP, n as u64, k as u64]);
                    c.model = model;
                    out.push((name.to_string(), c));
                }
            }
        }
    }
    out
}

pub fn run_sweep(preset: Fig2Preset, opts: &SweepOptions) -> Result<SweepTable> {
    let rows = sweep_configs(preset, opts)
        .into_iter()
        .map(|(name, cfg)| {
            let out = run_campaign(&cfg)?;
            log::info!("sweep n={} {name}: r = {:.3e}, eps = {:.3e}", cfg.n, out.report.fit.r, out.epsilon.epsilon);
            Ok(sweep_row(name, &cfg, &out))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { schema: SWEEP_SCHEMA.into(), preset, seed: opts.base.seed, rows })
}

fn sweep_row(model: String, cfg: &CampaignConfig, out: &CampaignOutput) -> SweepRow {
    let f = &out.report.fit;
    SweepRow {
        n: cfg.n,
        model,
        seed: cfg.seed,
        a: f.a,
        p: f.p,
        r: f.r,
        sigma_r: f.bootstrap.map_or(f64::NAN, |b| b.sigma_r),
        epsilon: out.epsilon.epsilon,
        epsilon_stderr: out.epsilon.stderr,
        delta_rel: out.report.delta_rel.unwrap_or(f64::NAN),
        normalized_residual_rms: f.normalized_residual_rms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> CampaignConfig {
        let mut c = CampaignConfig::new(seed);
        c.depths = vec![0, 2, 4, 8];
        c.circuits_per_depth = 5;
        c.shots = 50;
        c.epsilon_layers = 50;
        c.epsilon_samples = 200;
        c.bootstrap = 100;
        c
    }

    #[test]
    fn config_defaults_fill_in() {
        let c = CampaignConfig::from_json(r#"{"seed": 7}"#).unwrap();
        assert_eq!(c, CampaignConfig::new(7));
        assert!(CampaignConfig::from_json(r#"{"n": 2}"#).is_err());
        assert!(CampaignConfig::from_json(r#"{"seed": 1, "typo": 2}"#).is_err());
        let c = CampaignConfig::from_json(r#"{"seed": 1, "model": {"kind": "random", "kappa": [0.9, 1.0]}}"#).unwrap();
        match c.model {
            ModelSource::Random { spec } => {
                assert_eq!(spec.kappa, (0.9, 1.0));
                assert_eq!(spec.gamma_2q, RandomModelSpec::default().gamma_2q);
            }
            other => panic!("{other:?}"),
        }
        let back = CampaignConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn explicit_qubits() {
        let mut c = small(0);
        c.qubits = Some(vec![5, 6]);
        c.n = 2;
        let d = c.design().unwrap();
        assert_eq!(d.connectivity.edges(), &[(0, 1)]);
        c.n = 3;
        assert!(c.design().is_err());
    }

    #[test]
    fn campaign_is_reproducible() {
        let a = run_campaign(&small(3)).unwrap();
        let b = run_campaign(&small(3)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.report.fit.p < 1.0 && a.report.fit.p > 0.8);
        let c = run_campaign(&small(4)).unwrap();
        assert_ne!(a.results, c.results);
    }

    #[test]
    fn noiseless_campaign_is_flat() {
        let mut c = small(1);
        c.model = ModelSource::Noiseless;
        let d = c.design().unwrap();
        let m = c.model(&d).unwrap();
        let res = simulate_design(&d, &m, 9).unwrap();
        for r in &res.records {
            assert_eq!(r.counts.len(), 1);
            assert_eq!(r.counts[&r.target], 50);
        }
    }

    #[test]
    fn sweep_layout() {
        let mut o = SweepOptions::preset(Fig2Preset::RandomModels, 5);
        assert_eq!(sweep_configs(Fig2Preset::RandomModels, &o).len(), 50);
        assert_eq!(sweep_configs(Fig2Preset::Crosstalk, &o).len(), 10);
        let cfgs = sweep_configs(Fig2Preset::RandomModels, &o);
        assert_eq!(cfgs[0].1.sampler, SamplerSpec::edge_grab(0.0));
        assert_eq!(cfgs[10].1.sampler, SamplerSpec::edge_grab(0.125));
        o.ns = vec![2];
        o.models_per_n = 1;
        o.base = small(5);
        let t = run_sweep(Fig2Preset::Crosstalk, &o).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.to_csv().lines().count(), 3);
    }
}
