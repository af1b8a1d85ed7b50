//! Weak simulation of mirror circuits under stochastic Pauli noise.
//!
//! The production path tracks a Pauli frame: the product of all sampled gate
//! errors so far, carried forward through the ideal gates. Because the ideal
//! circuit maps `|0…0⟩` to its target bit string, the noisy output is the
//! target with the frame's X bits flipped. [`tableau_shot`] runs the same
//! sampled Clifford sequence on a stabilizer tableau instead and consumes the
//! random stream in the same order, so both return identical bits per seed.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::circuit::MirrorCircuit;
use crate::error::{check_dims, Error, Result};
use crate::noise::epsilon::apply_noise;
use crate::noise::ErrorModel;
use crate::pauli::PauliString;
use crate::seed::{derive_rng, domain};
use crate::tableau::Tableau;

pub const RESULTS_SCHEMA: &str = "mrb-results/1";

/// Counts of output bit strings for one circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotResult {
    pub id: String,
    pub n: usize,
    pub d: usize,
    pub target: BitString,
    pub counts: BTreeMap<BitString, u64>,
    pub shots: u64,
}

impl ShotResult {
    pub fn from_outcomes(id: String, d: usize, target: BitString, outcomes: impl IntoIterator<Item = BitString>) -> Self {
        let mut counts = BTreeMap::new();
        let mut shots = 0;
        for b in outcomes {
            *counts.entry(b).or_insert(0) += 1;
            shots += 1;
        }
        ShotResult { id, n: target.len(), d, target, counts, shots }
    }

    pub fn validate(&self) -> Result<()> {
        if self.target.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: self.target.len() });
        }
        if let Some(b) = self.counts.keys().find(|b| b.len() != self.n) {
            return Err(Error::DimensionMismatch { expected: self.n, found: b.len() });
        }
        let total: u64 = self.counts.values().sum();
        if total != self.shots || self.shots == 0 {
            return Err(Error::InvalidArgument(format!(
                "record {}: counts sum to {total} but shots = {}",
                self.id, self.shots
            )));
        }
        Ok(())
    }
}

/// One frame-propagation shot. Draws one uniform per channel component per
/// gate in layer order, then one per qubit for readout.
pub fn frame_shot<R: Rng + ?Sized>(circuit: &MirrorCircuit, model: &ErrorModel, rng: &mut R) -> Result<BitString> {
    let n = circuit.num_qubits();
    let mut frame = PauliString::identity(n);
    let mut dirty = false;
    for layer in circuit.layers() {
        if dirty {
            layer.conjugate_in_place(&mut frame);
        }
        for op in layer.ops() {
            dirty |= apply_noise(model.noise(op)?, &mut frame, rng);
        }
    }
    let mut out = circuit.target().clone();
    out.xor_words(frame.x_words());
    apply_readout(&mut out, model.readout(), rng);
    Ok(out)
}

/// One shot of the reference unraveller: the ideal layers interleaved with the
/// sampled error Paulis, executed on a stabilizer tableau.
pub fn tableau_shot<R: Rng + ?Sized>(circuit: &MirrorCircuit, model: &ErrorModel, rng: &mut R) -> Result<BitString> {
    let n = circuit.num_qubits();
    let mut t = Tableau::new(n);
    let mut err = PauliString::identity(n);
    for layer in circuit.layers() {
        t.apply_layer(layer)?;
        for op in layer.ops() {
            for ch in &model.noise(op)?.components {
                if let Some(e) = ch.select(rng.random::<f64>()) {
                    err.clear();
                    err.compose_assign(e)?;
                    t.apply_pauli(&err)?;
                }
            }
        }
    }
    let mut out = t.measure_all()?;
    apply_readout(&mut out, model.readout(), rng);
    Ok(out)
}

fn apply_readout<R: Rng + ?Sized>(bits: &mut BitString, readout: &[f64], rng: &mut R) {
    for (q, &p) in readout.iter().enumerate() {
        if rng.random::<f64>() < p {
            bits.flip(q);
        }
    }
}

/// Which executor produces the shots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Executor {
    Frame,
    Tableau,
}

/// Shot `s` of `circuit` uses the stream `derive(sim_seed, [SHOT, circuit seed, s])`.
pub fn simulate_shots_seeded(
    id: &str,
    circuit: &MirrorCircuit,
    model: &ErrorModel,
    shots: usize,
    sim_seed: u64,
    executor: Executor,
) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    check_dims(model.num_qubits(), circuit.num_qubits())?;
    model.check_layers(circuit.layers())?;
    let outcomes = (0..shots)
        .into_par_iter()
        .map(|s| {
            let mut rng = derive_rng(sim_seed, &[domain::SHOT, circuit.seed(), s as u64]);
            match executor {
                Executor::Frame => frame_shot(circuit, model, &mut rng),
                Executor::Tableau => tableau_shot(circuit, model, &mut rng),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShotResult::from_outcomes(id.to_string(), circuit.depth(), circuit.target().clone(), outcomes))
}

/// Runs `shots` frame-propagation shots, seeding them from one draw of `rng`.
pub fn simulate_shots<R: Rng + ?Sized>(
    circuit: &MirrorCircuit,
    model: &ErrorModel,
    shots: usize,
    rng: &mut R,
) -> Result<ShotResult> {
    let id = format!("{:016x}", circuit.seed());
    simulate_shots_seeded(&id, circuit, model, shots, rng.random(), Executor::Frame)
}

/// Distribution of Hamming distances from the target, `h_0 … h_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingHistogram {
    pub n: usize,
    pub h: Vec<f64>,
}

impl HammingHistogram {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.iter().any(|&x| !(x >= 0.0)) || (h.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("not a probability vector: {h:?}")));
        }
        Ok(HammingHistogram { n: h.len() - 1, h })
    }
}

pub fn hamming_histogram(result: &ShotResult, target: &BitString) -> Result<HammingHistogram> {
    check_dims(result.n, target.len())?;
    let mut counts = vec![0u64; result.n + 1];
    let mut total = 0;
    for (b, &c) in &result.counts {
        counts[b.hamming_distance(target)?] += c;
        total += c;
    }
    if total == 0 {
        return Err(Error::InvalidArgument(format!("record {} has no shots", result.id)));
    }
    Ok(HammingHistogram { n: result.n, h: counts.into_iter().map(|c| c as f64 / total as f64).collect() })
}

/// A results file: one record per circuit. Hardware counts in this format
/// can be analyzed directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema: String,
    pub records: Vec<ShotResult>,
}

impl ResultsFile {
    pub fn new(records: Vec<ShotResult>) -> Self {
        ResultsFile { schema: RESULTS_SCHEMA.into(), records }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: ResultsFile = serde_json::from_str(s)?;
        if f.schema != RESULTS_SCHEMA {
            return Err(Error::InvalidArgument(format!("unsupported results schema {:?}", f.schema)));
        }
        for r in &f.records {
            r.validate()?;
        }
        Ok(f)
    }

    /// Counts as CSV rows `id,d,target,outcome,count` under a header line.
    /// Rows of one circuit must agree on `d` and `target`; record order follows
    /// first appearance.
    pub fn from_counts_csv(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            d: usize,
            target: BitString,
            outcome: BitString,
            count: u64,
        }
        let mut order: Vec<String> = Vec::new();
        let mut by_id: BTreeMap<String, ShotResult> = BTreeMap::new();
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(s.as_bytes());
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse {
                line: e.position().map_or(0, |p| p.line() as usize),
                msg: e.to_string(),
            })?;
            let rec = by_id.entry(row.id.clone()).or_insert_with(|| {
                order.push(row.id.clone());
                ShotResult {
                    id: row.id.clone(),
                    n: row.target.len(),
                    d: row.d,
                    target: row.target.clone(),
                    counts: BTreeMap::new(),
                    shots: 0,
                }
            });
            if rec.d != row.d || rec.target != row.target {
                return Err(Error::InvalidArgument(format!("circuit {} changes depth or target", row.id)));
            }
            *rec.counts.entry(row.outcome).or_insert(0) += row.count;
            rec.shots += row.count;
        }
        let records: Vec<ShotResult> = order.iter().map(|id| by_id.remove(id).expect("present")).collect();
        for r in &records {
            r.validate()?;
        }
        Ok(ResultsFile::new(records))
    }

    /// Loads JSON, or counts CSV when the extension is `.csv`.
    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "csv") {
            Self::from_counts_csv(&s)
        } else {
            Self::from_json(&s)
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::Clifford1Q;
    use crate::graph::ConnectivityGraph;
    use crate::layer::Layer;
    use crate::noise::{build_model1, CrosstalkSpec, GateNoise, StochasticPauliChannel};
    use crate::sampling::SamplerSpec;
    use crate::seed::rng_from_seed;

    fn circuit(rows: usize, cols: usize, d: usize, seed: u64) -> (ConnectivityGraph, MirrorCircuit) {
        let g = ConnectivityGraph::grid(rows, cols);
        let c = MirrorCircuit::sample(&g, &SamplerSpec::edge_grab(0.5_f64.min(g.max_density())), d, seed).unwrap();
        (g, c)
    }

    #[test]
    fn noiseless_hits_target() {
        let (g, c) = circuit(2, 2, 8, 1);
        let r = simulate_shots(&c, &ErrorModel::noiseless(&g), 500, &mut rng_from_seed(0)).unwrap();
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts[c.target()], 500);
        let h = hamming_histogram(&r, c.target()).unwrap();
        assert_eq!(h.h, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn forced_flip_on_last_gate() {
        // F0 = S on qubit 0, so F0⁻¹ = S† is the only place S† appears.
        let g = ConnectivityGraph::grid(1, 3);
        let f0 = Layer::from_gates([Clifford1Q::S, Clifford1Q::I, Clifford1Q::I]);
        let id = Layer::from_gates([Clifford1Q::I; 3]);
        let c = MirrorCircuit::assemble(f0, vec![id], vec![], 0).unwrap();
        assert_eq!(c.target().to_string(), "000");
        let mut m = ErrorModel::noiseless(&g);
        let x0 = StochasticPauliChannel::new(3, [("XII".parse().unwrap(), 1.0)]).unwrap();
        m.set_single(0, Clifford1Q::S_DAG, GateNoise::single(x0.clone())).unwrap();
        let r = simulate_shots(&c, &m, 100, &mut rng_from_seed(1)).unwrap();
        assert_eq!(r.counts.iter().map(|(b, &k)| (b.to_string(), k)).collect::<Vec<_>>(), vec![("100".into(), 100)]);

        // The same error on F0 is pushed through S† and becomes Y: still a flip.
        let mut m = ErrorModel::noiseless(&g);
        m.set_single(0, Clifford1Q::S, GateNoise::single(x0)).unwrap();
        let r = simulate_shots(&c, &m, 10, &mut rng_from_seed(1)).unwrap();
        assert_eq!(r.counts.keys().map(|b| b.to_string()).collect::<Vec<_>>(), vec!["100"]);
    }

    #[test]
    fn frame_matches_tableau_per_shot() {
        let mut rng = rng_from_seed(2);
        for case in 0..10 {
            let (g, c) = circuit(1 + case % 2, 2, 2 * rng.random_range(0..5), case as u64);
            let spec = CrosstalkSpec { base_infidelity_1q: 0.05, base_infidelity_2q: 0.2, readout: 0.05, ..Default::default() };
            let m = crate::noise::build_model2(&g, &spec).unwrap();
            let a = simulate_shots_seeded("a", &c, &m, 2000, case as u64, Executor::Frame).unwrap();
            let b = simulate_shots_seeded("a", &c, &m, 2000, case as u64, Executor::Tableau).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let (g, c) = circuit(2, 2, 4, 3);
        let m = build_model1(&g, &CrosstalkSpec::default()).unwrap();
        let a = simulate_shots_seeded("x", &c, &m, 1000, 9, Executor::Frame).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_shots_seeded("x", &c, &m, 1000, 9, Executor::Frame).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn readout_only_h1() {
        let n = 4;
        let g = ConnectivityGraph::grid(1, n);
        let mut m = ErrorModel::noiseless(&g);
        let q = 0.05;
        for i in 0..n {
            m.set_readout(i, q).unwrap();
        }
        let id = Layer::from_gates([Clifford1Q::I; 4]);
        let c = MirrorCircuit::assemble(id.clone(), vec![id], vec![], 0).unwrap();
        let shots = 100_000;
        let r = simulate_shots(&c, &m, shots, &mut rng_from_seed(4)).unwrap();
        let h1 = hamming_histogram(&r, c.target()).unwrap().h[1];
        let want = n as f64 * q * (1.0 - q).powi(n as i32 - 1);
        let sigma = (want * (1.0 - want) / shots as f64).sqrt();
        assert!((h1 - want).abs() < 3.0 * sigma, "{h1} vs {want}");
    }

    #[test]
    fn coverage_gap_is_an_error() {
        let (g, c) = circuit(2, 2, 4, 5);
        let m = ErrorModel::empty(g.num_qubits());
        assert!(matches!(simulate_shots(&c, &m, 1, &mut rng_from_seed(0)), Err(Error::ModelCoverage(_))));
    }

    #[test]
    fn histograms() {
        let t: BitString = "00".parse().unwrap();
        let r = ShotResult::from_outcomes("x".into(), 0, t.clone(), ["11".parse().unwrap()]);
        assert_eq!(hamming_histogram(&r, &t).unwrap().h, vec![0.0, 0.0, 1.0]);
        let all = (0..8).map(|i| BitString::from_index(3, i));
        let r = ShotResult::from_outcomes("u".into(), 0, BitString::zeros(3), all);
        assert_eq!(hamming_histogram(&r, &BitString::zeros(3)).unwrap().h, vec![0.125, 0.375, 0.375, 0.125]);
        assert!(hamming_histogram(&r, &t).is_err());
    }

    #[test]
    fn results_round_trip() {
        let (g, c) = circuit(2, 2, 4, 6);
        let m = build_model1(&g, &CrosstalkSpec::default()).unwrap();
        let r = simulate_shots_seeded("d004_k000", &c, &m, 300, 1, Executor::Frame).unwrap();
        let f = ResultsFile::new(vec![r]);
        let text = f.to_json().unwrap();
        let back = ResultsFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json().unwrap(), text);
        let broken = text.replace("\"shots\": 300", "\"shots\": 301");
        assert!(ResultsFile::from_json(&broken).is_err());
    }

    #[test]
    fn counts_csv() {
        let csv = "id,d,target,outcome,count\nd000_k000,0,01,01,90\nd000_k000,0,01,11,10\nd002_k000,2,10,10,5\n";
        let f = ResultsFile::from_counts_csv(csv).unwrap();
        assert_eq!(f.records.len(), 2);
        assert_eq!(f.records[0].shots, 100);
        assert_eq!(f.records[1].id, "d002_k000");
        assert!(ResultsFile::from_counts_csv("id,d,target,outcome,count\na,0,01,1,3\n").is_err());
        assert!(ResultsFile::from_counts_csv("id,d,target,outcome,count\na,0,01,01,3\na,2,01,01,3\n").is_err());
        let bad = "id,d,target,outcome,count\na,0,01,01,3\na,0,01\n";
        assert!(matches!(ResultsFile::from_counts_csv(bad), Err(Error::Parse { line: 3, .. })));
    }
}
