//! Error models: a noise table over every gate placement plus readout flips.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::channel::{depolarizing_on, nontrivial_paulis_on, ChannelRepr, GateNoise, StochasticPauliChannel};
use crate::clifford::Clifford1Q;
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::layer::{Layer, Op};
use crate::pauli::{Pauli, PauliString};

pub const MODEL_SCHEMA: &str = "mrb-error-model/1";

/// Gate noise for every single-qubit Clifford on every qubit and every
/// directed CNOT, plus a bit-flip probability per qubit at readout.
///
/// Errors act after their gate. A missing entry is a coverage gap, not an
/// ideal gate; ideal gates carry an empty [`GateNoise`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelRepr", try_from = "ModelRepr")]
pub struct ErrorModel {
    n: usize,
    single: Vec<Vec<Option<GateNoise>>>,
    cnot: BTreeMap<(usize, usize), GateNoise>,
    readout: Vec<f64>,
}

impl ErrorModel {
    /// A model with no gate entries and perfect readout; fill it with the setters.
    pub fn empty(n: usize) -> Self {
        ErrorModel { n, single: vec![vec![None; Clifford1Q::COUNT]; n], cnot: BTreeMap::new(), readout: vec![0.0; n] }
    }

    /// Ideal gates everywhere on `graph`, perfect readout.
    pub fn noiseless(graph: &ConnectivityGraph) -> Self {
        let mut m = Self::empty(graph.num_qubits());
        for q in 0..m.n {
            for g in Clifford1Q::all() {
                m.single[q][g.id() as usize] = Some(GateNoise::none());
            }
        }
        for (c, t) in directed_edges(graph) {
            m.cnot.insert((c, t), GateNoise::none());
        }
        m
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn readout(&self) -> &[f64] {
        &self.readout
    }

    pub fn set_readout(&mut self, q: usize, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidChannel(format!("readout flip probability {p} outside [0, 1]")));
        }
        self.readout[q] = p;
        Ok(())
    }

    pub fn set_single(&mut self, q: usize, gate: Clifford1Q, noise: GateNoise) -> Result<()> {
        self.check_noise(&noise)?;
        self.single[q][gate.id() as usize] = Some(noise);
        Ok(())
    }

    pub fn set_cnot(&mut self, control: usize, target: usize, noise: GateNoise) -> Result<()> {
        if control >= self.n || target >= self.n || control == target {
            return Err(Error::InvalidArgument(format!("bad CNOT {control}->{target}")));
        }
        self.check_noise(&noise)?;
        self.cnot.insert((control, target), noise);
        Ok(())
    }

    fn check_noise(&self, noise: &GateNoise) -> Result<()> {
        match noise.components.iter().find(|c| c.num_qubits() != self.n) {
            Some(c) => Err(Error::DimensionMismatch { expected: self.n, found: c.num_qubits() }),
            None => Ok(()),
        }
    }

    pub fn single(&self, q: usize, gate: Clifford1Q) -> Result<&GateNoise> {
        self.single
            .get(q)
            .and_then(|row| row[gate.id() as usize].as_ref())
            .ok_or_else(|| Error::ModelCoverage(format!("gate {gate} on qubit {q}")))
    }

    pub fn cnot(&self, control: usize, target: usize) -> Result<&GateNoise> {
        self.cnot.get(&(control, target)).ok_or_else(|| Error::ModelCoverage(format!("CNOT {control}->{target}")))
    }

    pub fn noise(&self, op: &Op) -> Result<&GateNoise> {
        match *op {
            Op::Single { qubit, gate } => self.single(qubit, gate),
            Op::Cnot { control, target } => self.cnot(control, target),
        }
    }

    /// Fails unless every gate of every layer has an entry.
    pub fn check_layers<'a>(&self, layers: impl IntoIterator<Item = &'a Layer>) -> Result<()> {
        for l in layers {
            if l.num_qubits() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: l.num_qubits() });
            }
            for op in l.ops() {
                self.noise(op)?;
            }
        }
        Ok(())
    }

    /// Fails unless every Clifford on every qubit and both directions of every edge are covered.
    pub fn check_graph(&self, graph: &ConnectivityGraph) -> Result<()> {
        if graph.num_qubits() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: graph.num_qubits() });
        }
        for q in 0..self.n {
            for g in Clifford1Q::all() {
                self.single(q, g)?;
            }
        }
        for (c, t) in directed_edges(graph) {
            self.cnot(c, t)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelRepr::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<ModelRepr>(s)?.try_into()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

fn directed_edges(graph: &ConnectivityGraph) -> impl Iterator<Item = (usize, usize)> + '_ {
    graph.edges().iter().flat_map(|&(a, b)| [(a, b), (b, a)])
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    schema: String,
    n: usize,
    readout: Vec<f64>,
    gates: Vec<GateRepr>,
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    /// `C<id>` or `CX`.
    gate: String,
    qubits: Vec<usize>,
    channels: Vec<ChannelRepr>,
}

impl From<&ErrorModel> for ModelRepr {
    fn from(m: &ErrorModel) -> Self {
        let noise = |g: &GateNoise| g.components.iter().map(ChannelRepr::from).collect();
        let mut gates = Vec::new();
        for (q, row) in m.single.iter().enumerate() {
            for (id, entry) in row.iter().enumerate() {
                if let Some(g) = entry {
                    gates.push(GateRepr { gate: format!("C{id}"), qubits: vec![q], channels: noise(g) });
                }
            }
        }
        for (&(c, t), g) in &m.cnot {
            gates.push(GateRepr { gate: "CX".into(), qubits: vec![c, t], channels: noise(g) });
        }
        ModelRepr { schema: MODEL_SCHEMA.into(), n: m.n, readout: m.readout.clone(), gates }
    }
}

impl From<ErrorModel> for ModelRepr {
    fn from(m: ErrorModel) -> Self {
        ModelRepr::from(&m)
    }
}

impl TryFrom<ModelRepr> for ErrorModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        if r.schema != MODEL_SCHEMA {
            return Err(Error::InvalidChannel(format!("unsupported error-model schema {:?}", r.schema)));
        }
        if r.readout.len() != r.n {
            return Err(Error::DimensionMismatch { expected: r.n, found: r.readout.len() });
        }
        let mut m = ErrorModel::empty(r.n);
        for (q, p) in r.readout.into_iter().enumerate() {
            m.set_readout(q, p)?;
        }
        for g in r.gates {
            let components = g
                .channels
                .into_iter()
                .map(|c| c.into_channel(r.n))
                .collect::<Result<Vec<_>>>()?;
            let noise = GateNoise { components };
            match (g.gate.as_str(), g.qubits.as_slice()) {
                ("CX", &[c, t]) => m.set_cnot(c, t, noise)?,
                (name, &[q]) if q < r.n => {
                    let gate = name
                        .strip_prefix('C')
                        .and_then(|s| s.parse::<u8>().ok())
                        .and_then(Clifford1Q::new)
                        .ok_or_else(|| Error::InvalidChannel(format!("unknown gate {name:?}")))?;
                    m.set_single(q, gate, noise)?;
                }
                (name, qs) => return Err(Error::InvalidChannel(format!("bad gate entry {name:?} on {qs:?}"))),
            }
        }
        Ok(m)
    }
}

/// Sampling ranges for randomly generated models. Each pair is a closed
/// interval sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomModelSpec {
    pub gamma_1q: (f64, f64),
    pub gamma_2q: (f64, f64),
    pub kappa: (f64, f64),
    pub readout: (f64, f64),
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        RandomModelSpec { gamma_1q: (0.0, 0.002), gamma_2q: (0.0, 0.02), kappa: (0.5, 1.0), readout: (0.0, 0.01) }
    }
}

impl RandomModelSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in
            [("gamma_1q", self.gamma_1q), ("gamma_2q", self.gamma_2q), ("kappa", self.kappa), ("readout", self.readout)]
        {
            if !(0.0 <= lo && lo <= hi && hi <= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} interval [{lo}, {hi}] not inside [0, 1]")));
            }
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// One gate's randomly drawn channel: total `κγ` spread over `local` with
/// random weights, and `(1 − κ)γ` spread over the weight-one Paulis on
/// `neighbors` (dropped when `neighbors` is empty).
fn random_gate_channel<R: Rng + ?Sized>(
    n: usize,
    local: Vec<PauliString>,
    neighbors: &[usize],
    gamma: f64,
    kappa: f64,
    rng: &mut R,
) -> Result<StochasticPauliChannel> {
    let lw: Vec<f64> = local.iter().map(|_| rng.random::<f64>()).collect();
    let lsum: f64 = lw.iter().sum();
    let mut entries: Vec<(PauliString, f64)> =
        local.into_iter().zip(lw).map(|(p, w)| (p, gamma * kappa * w / lsum)).collect();
    let nb_paulis: Vec<PauliString> = neighbors
        .iter()
        .flat_map(|&q| Pauli::NON_IDENTITY.map(|p| PauliString::single(n, q, p)))
        .collect();
    let cw: Vec<f64> = nb_paulis.iter().map(|_| rng.random::<f64>()).collect();
    let csum: f64 = cw.iter().sum();
    if csum > 0.0 {
        entries.extend(nb_paulis.into_iter().zip(cw).map(|(p, w)| (p, gamma * (1.0 - kappa) * w / csum)));
    }
    StochasticPauliChannel::new(n, entries)
}

/// Samples a random biased, correlated Pauli model on `graph`.
///
/// Draw order: readout per qubit; then for each qubit and each of the 24
/// Cliffords in id order `γ, κ`, three target weights and `3k` neighbour
/// weights (none for the z rotations `{I, Z, S, S†}`); then for each edge in
/// sorted order and each direction `γ, κ`, 15 pair weights and `3k`
/// neighbour weights. `k` counts graph neighbours, for a CNOT those of either
/// endpoint other than the endpoints themselves.
pub fn sample_random_model<R: Rng + ?Sized>(
    graph: &ConnectivityGraph,
    spec: &RandomModelSpec,
    rng: &mut R,
) -> Result<ErrorModel> {
    spec.validate()?;
    let n = graph.num_qubits();
    let mut m = ErrorModel::empty(n);
    for q in 0..n {
        let p = uniform(rng, spec.readout);
        m.set_readout(q, p)?;
    }
    for q in 0..n {
        for g in Clifford1Q::all() {
            let gamma = uniform(rng, spec.gamma_1q);
            let kappa = uniform(rng, spec.kappa);
            let local = Pauli::NON_IDENTITY.map(|p| PauliString::single(n, q, p)).to_vec();
            let nbs: &[usize] = if g.is_z_rotation() { &[] } else { graph.neighbors(q) };
            let ch = random_gate_channel(n, local, nbs, gamma, kappa, rng)?;
            m.set_single(q, g, GateNoise::single(ch))?;
        }
    }
    for (c, t) in directed_edges(graph) {
        let gamma = uniform(rng, spec.gamma_2q);
        let kappa = uniform(rng, spec.kappa);
        let local = nontrivial_paulis_on(n, &[c, t]);
        let mut nbs: Vec<usize> =
            graph.neighbors(c).iter().chain(graph.neighbors(t)).copied().filter(|&q| q != c && q != t).collect();
        nbs.sort_unstable();
        nbs.dedup();
        let ch = random_gate_channel(n, local, &nbs, gamma, kappa, rng)?;
        m.set_cnot(c, t, GateNoise::single(ch))?;
    }
    Ok(m)
}

/// Parameters of the two fixed lattice models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrosstalkSpec {
    pub base_infidelity_1q: f64,
    pub base_infidelity_2q: f64,
    pub readout: f64,
    pub crosstalk_amplitude: f64,
    pub crosstalk_decay: f64,
}

impl Default for CrosstalkSpec {
    fn default() -> Self {
        CrosstalkSpec {
            base_infidelity_1q: 0.001,
            base_infidelity_2q: 0.01,
            readout: 0.005,
            crosstalk_amplitude: 0.0035,
            crosstalk_decay: 0.999,
        }
    }
}

impl CrosstalkSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.base_infidelity_1q,
            self.base_infidelity_2q,
            self.readout,
            self.crosstalk_amplitude,
            self.crosstalk_decay,
        ];
        if all.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(format!("crosstalk parameters must lie in [0, 1]: {self:?}")));
        }
        Ok(())
    }

    /// Crosstalk infidelity at lattice distance `d` from the nearer CNOT endpoint.
    pub fn delta(&self, d: usize) -> f64 {
        self.crosstalk_amplitude * self.crosstalk_decay.powi(d as i32)
    }
}

/// Crosstalk-free model: depolarizing gate noise and uniform readout flips.
pub fn build_model1(graph: &ConnectivityGraph, spec: &CrosstalkSpec) -> Result<ErrorModel> {
    spec.validate()?;
    let n = graph.num_qubits();
    let mut m = ErrorModel::empty(n);
    for q in 0..n {
        m.set_readout(q, spec.readout)?;
        let ch = depolarizing_on(n, &[q], spec.base_infidelity_1q)?;
        for g in Clifford1Q::all() {
            m.set_single(q, g, GateNoise::single(ch.clone()))?;
        }
    }
    for (c, t) in directed_edges(graph) {
        m.set_cnot(c, t, GateNoise::single(depolarizing_on(n, &[c, t], spec.base_infidelity_2q)?))?;
    }
    Ok(m)
}

/// Model 1 plus long-range crosstalk: every CNOT also depolarizes each other
/// qubit `q` independently with infidelity `δ(q)`, decaying with the lattice
/// distance from `q` to the nearer endpoint.
pub fn build_model2(graph: &ConnectivityGraph, spec: &CrosstalkSpec) -> Result<ErrorModel> {
    let mut m = build_model1(graph, spec)?;
    let n = graph.num_qubits();
    for (c, t) in directed_edges(graph) {
        let mut noise = m.cnot(c, t)?.clone();
        for q in (0..n).filter(|&q| q != c && q != t) {
            let d = match (graph.distance(q, c), graph.distance(q, t)) {
                (Some(a), Some(b)) => a.min(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => {
                    return Err(Error::InvalidGraph(format!("no distance from qubit {q} to CNOT {c}->{t}")));
                }
            };
            noise.components.push(depolarizing_on(n, &[q], spec.delta(d))?);
        }
        m.set_cnot(c, t, noise)?;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn model1_entries() {
        let g = ConnectivityGraph::grid(2, 2);
        let m = build_model1(&g, &CrosstalkSpec::default()).unwrap();
        m.check_graph(&g).unwrap();
        assert_eq!(m.readout(), &[0.005; 4]);
        let cx = &m.cnot(0, 1).unwrap().components;
        assert_eq!(cx.len(), 1);
        assert_eq!(cx[0].entries().len(), 15);
        assert!(cx[0].entries().iter().all(|(p, q)| (q - 0.01 / 15.0).abs() < 1e-18 && p.support().all(|s| s < 2)));
        let h = &m.single(3, Clifford1Q::H).unwrap().components[0];
        for l in ["IIIX", "IIIY", "IIIZ"] {
            assert!((h.probability(&ps(l)) - 0.001 / 3.0).abs() < 1e-18);
        }
        assert!(m.cnot(0, 3).is_err());
    }

    #[test]
    fn model2_crosstalk_values() {
        let g = ConnectivityGraph::grid(1, 4);
        let spec = CrosstalkSpec::default();
        let m = build_model2(&g, &spec).unwrap();
        let comps = &m.cnot(0, 1).unwrap().components;
        // pair channel, then qubits 2 and 3
        assert_eq!(comps.len(), 3);
        assert!((comps[1].infidelity() - 0.0035 * 0.999).abs() < 1e-15);
        assert!((comps[1].infidelity() - 0.0034965).abs() < 1e-15);
        assert!((comps[2].infidelity() - 0.0035 * 0.999 * 0.999).abs() < 1e-15);
        assert!(comps[1].entries().iter().all(|(p, _)| p.support().eq([2])));
        // endpoints get only the pair channel
        assert!(comps[1..].iter().all(|c| c.entries().iter().all(|(p, _)| !p.x_bit(0) && !p.z_bit(0))));
    }

    #[test]
    fn random_model_mass_conservation() {
        let g = ConnectivityGraph::grid(3, 3);
        let mut rng = rng_from_seed(1);
        let m = sample_random_model(&g, &RandomModelSpec::default(), &mut rng).unwrap();
        m.check_graph(&g).unwrap();
        // replay the draws to recover γ and κ per gate
        let mut rng = rng_from_seed(1);
        for _ in 0..9 {
            let _: f64 = rng.random();
        }
        for q in 0..9 {
            for gate in Clifford1Q::all() {
                let gamma = 0.002 * rng.random::<f64>();
                let kappa = 0.5 + 0.5 * rng.random::<f64>();
                let k = if gate.is_z_rotation() { 0 } else { g.neighbors(q).len() };
                for _ in 0..3 + 3 * k {
                    let _: f64 = rng.random();
                }
                let ch = &m.single(q, gate).unwrap().components[0];
                let target: f64 = ch.entries().iter().filter(|(p, _)| p.support().eq([q])).map(|e| e.1).sum();
                let total = ch.infidelity();
                assert!((target - kappa * gamma).abs() < 1e-12);
                let want = if gate.is_z_rotation() { kappa * gamma } else { gamma };
                assert!((total - want).abs() < 1e-12, "{q} {gate}: {total} vs {want}");
                assert!(ch.entries().iter().all(|(p, _)| p.weight() == 1));
            }
        }
    }

    #[test]
    fn kappa_one_has_no_neighbor_errors() {
        let g = ConnectivityGraph::grid(2, 3);
        let spec = RandomModelSpec { kappa: (1.0, 1.0), ..Default::default() };
        let m = sample_random_model(&g, &spec, &mut rng_from_seed(2)).unwrap();
        for q in 0..6 {
            for gate in Clifford1Q::all() {
                for c in &m.single(q, gate).unwrap().components {
                    assert!(c.entries().iter().all(|(p, _)| p.support().eq([q])));
                }
            }
        }
        for &(a, b) in g.edges() {
            for c in &m.cnot(a, b).unwrap().components {
                assert!(c.entries().len() <= 15);
                assert!(c.entries().iter().all(|(p, _)| p.support().all(|s| s == a || s == b)));
            }
        }
    }

    #[test]
    fn random_model_mean_infidelity() {
        let g = ConnectivityGraph::grid(2, 2);
        let mut eps = Vec::new();
        let mut eps2 = Vec::new();
        for s in 0..200 {
            let m = sample_random_model(&g, &RandomModelSpec::default(), &mut rng_from_seed(s)).unwrap();
            for q in 0..4 {
                for gate in Clifford1Q::all().filter(|g| !g.is_z_rotation()) {
                    eps.push(m.single(q, gate).unwrap().components[0].infidelity());
                }
            }
            for &(a, b) in g.edges() {
                eps2.push(m.cnot(a, b).unwrap().components[0].infidelity());
            }
        }
        for (v, want) in [(&eps, 0.001), (&eps2, 0.01)] {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt();
            assert!((mean - want).abs() < 3.0 * sd / (v.len() as f64).sqrt(), "{mean} vs {want}");
        }
    }

    #[test]
    fn json_round_trip() {
        let g = ConnectivityGraph::grid(2, 2);
        for m in [
            sample_random_model(&g, &RandomModelSpec::default(), &mut rng_from_seed(3)).unwrap(),
            build_model2(&g, &CrosstalkSpec::default()).unwrap(),
            ErrorModel::noiseless(&g),
        ] {
            let text = m.to_json().unwrap();
            let back = ErrorModel::from_json(&text).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_json().unwrap(), text);
        }
        assert!(ErrorModel::from_json(r#"{"schema":"x","n":1,"readout":[0],"gates":[]}"#).is_err());
    }
}
