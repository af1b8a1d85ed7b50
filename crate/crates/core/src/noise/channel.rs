//! Sparse stochastic Pauli channels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Tolerance on `Σ p ≤ 1` for channels built from floating point arithmetic.
const MASS_SLACK: f64 = 1e-12;

/// A probabilistic mixture of Pauli errors. The identity is implicit and
/// carries the remaining mass.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPauliChannel {
    n: usize,
    entries: Vec<(PauliString, f64)>,
    cumulative: Vec<f64>,
}

impl StochasticPauliChannel {
    /// Builds a channel from `(error, probability)` pairs. Zero-probability
    /// entries are dropped; repeated or identity keys are rejected.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (PauliString, f64)>) -> Result<Self> {
        let mut list: Vec<(PauliString, f64)> = Vec::new();
        for (p, prob) in entries {
            if p.num_qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.num_qubits() });
            }
            if !(0.0..=1.0).contains(&prob) {
                return Err(Error::InvalidChannel(format!("probability {prob} for {p} outside [0, 1]")));
            }
            if p.is_identity() {
                return Err(Error::InvalidChannel("identity must not be listed".into()));
            }
            if prob > 0.0 {
                list.push((p, prob));
            }
        }
        list.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidChannel(format!("{} listed twice", w[0].0)));
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = list
            .iter()
            .map(|(_, p)| {
                acc += p;
                acc
            })
            .collect();
        if acc > 1.0 + MASS_SLACK {
            return Err(Error::InvalidChannel(format!("total error probability {acc} exceeds 1")));
        }
        Ok(StochasticPauliChannel { n, entries: list, cumulative })
    }

    pub fn identity(n: usize) -> Self {
        StochasticPauliChannel { n, entries: Vec::new(), cumulative: Vec::new() }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Non-identity errors with their probabilities, sorted by Pauli.
    pub fn entries(&self) -> &[(PauliString, f64)] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn probability(&self, p: &PauliString) -> f64 {
        if p.is_identity() {
            return 1.0 - self.infidelity();
        }
        self.entries.binary_search_by(|e| e.0.cmp(p)).map_or(0.0, |i| self.entries[i].1)
    }

    /// Entanglement infidelity: the total probability of a non-identity error.
    pub fn infidelity(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn polarization(&self) -> f64 {
        polarization(self.n, self.infidelity())
    }

    /// The error selected by a uniform draw `u ∈ [0, 1)`, or `None` for the identity.
    #[inline]
    pub fn select(&self, u: f64) -> Option<&PauliString> {
        if u >= self.infidelity() {
            return None;
        }
        let i = self.cumulative.partition_point(|&c| c <= u);
        self.entries.get(i).map(|e| &e.0)
    }
}

/// `γ = 1 − 4^n ε / (4^n − 1)`.
pub fn polarization(n: usize, epsilon: f64) -> f64 {
    let d2 = 4f64.powi(n as i32);
    1.0 - d2 * epsilon / (d2 - 1.0)
}

/// Every non-identity Pauli on `qubits` (embedded in `n` qubits), in dense-index order.
pub fn nontrivial_paulis_on(n: usize, qubits: &[usize]) -> Vec<PauliString> {
    let k = qubits.len();
    (1..1usize << (2 * k))
        .map(|idx| {
            let local = PauliString::from_dense_index(k, idx);
            let mut p = PauliString::identity(n);
            for (i, &q) in qubits.iter().enumerate() {
                p.set_bits(q, local.x_bit(i), local.z_bit(i));
            }
            p
        })
        .collect()
}

/// Depolarizing channel on `qubits` of an `n`-qubit register with entanglement
/// infidelity `epsilon`, spread evenly over the `4^k − 1` non-identity Paulis.
pub fn depolarizing_on(n: usize, qubits: &[usize], epsilon: f64) -> Result<StochasticPauliChannel> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidChannel(format!("infidelity {epsilon} outside [0, 1]")));
    }
    if qubits.len() > 8 {
        return Err(Error::InvalidChannel(format!("depolarizing on {} qubits is too large to list", qubits.len())));
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidChannel(format!("qubit {q} out of range for {n} qubits")));
    }
    let paulis = nontrivial_paulis_on(n, qubits);
    let each = epsilon / paulis.len() as f64;
    StochasticPauliChannel::new(n, paulis.into_iter().map(|p| (p, each)))
}

/// The `n`-qubit depolarizing channel with entanglement infidelity `epsilon`.
pub fn depolarizing_channel(n: usize, epsilon: f64) -> Result<StochasticPauliChannel> {
    depolarizing_on(n, &(0..n).collect::<Vec<_>>(), epsilon)
}

pub fn channel_infidelity(ch: &StochasticPauliChannel) -> f64 {
    ch.infidelity()
}

pub fn channel_polarization(ch: &StochasticPauliChannel) -> f64 {
    ch.polarization()
}

/// The noise following one gate: independent channels applied one after another.
///
/// Crosstalk models attach many small channels to a single gate; keeping them
/// as separate factors avoids expanding their product.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GateNoise {
    pub components: Vec<StochasticPauliChannel>,
}

impl GateNoise {
    pub fn none() -> Self {
        GateNoise::default()
    }

    pub fn single(ch: StochasticPauliChannel) -> Self {
        GateNoise { components: if ch.is_identity() { vec![] } else { vec![ch] } }
    }

    pub fn is_noiseless(&self) -> bool {
        self.components.iter().all(|c| c.is_identity())
    }

    /// Probability that at least one component fires.
    pub fn any_error_probability(&self) -> f64 {
        1.0 - self.components.iter().map(|c| 1.0 - c.infidelity()).product::<f64>()
    }
}

/// Serialized form: a list of `(label, probability)` pairs.
#[derive(Serialize, Deserialize)]
pub(crate) struct ChannelRepr(pub Vec<(String, f64)>);

impl From<&StochasticPauliChannel> for ChannelRepr {
    fn from(ch: &StochasticPauliChannel) -> Self {
        ChannelRepr(ch.entries.iter().map(|(p, q)| (p.to_string(), *q)).collect())
    }
}

impl ChannelRepr {
    pub(crate) fn into_channel(self, n: usize) -> Result<StochasticPauliChannel> {
        let entries = self
            .0
            .into_iter()
            .map(|(label, p)| Ok((label.parse::<PauliString>()?, p)))
            .collect::<Result<Vec<_>>>()?;
        StochasticPauliChannel::new(n, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn depolarizing_examples() {
        assert!(depolarizing_channel(1, 0.0).unwrap().is_identity());
        let full = depolarizing_channel(1, 0.75).unwrap();
        assert_eq!(full.entries().len(), 3);
        for p in ["X", "Y", "Z"] {
            assert!((full.probability(&ps(p)) - 0.25).abs() < 1e-15);
        }
        assert!(full.polarization().abs() < 1e-12);
        let two = depolarizing_channel(2, 0.01).unwrap();
        assert_eq!(two.entries().len(), 15);
        assert!(two.entries().iter().all(|(_, p)| (p - 1.0 / 1500.0).abs() < 1e-18));
        assert!(depolarizing_channel(1, 1.5).is_err());
    }

    #[test]
    fn polarization_of_depolarizing() {
        for n in 1..=3 {
            for &eps in &[0.0, 0.001, 0.03, 0.5, 1.0] {
                let ch = depolarizing_channel(n, eps).unwrap();
                let d2 = 4f64.powi(n as i32);
                assert!((channel_polarization(&ch) - (1.0 - d2 * eps / (d2 - 1.0))).abs() < 1e-12);
            }
        }
        let ch = StochasticPauliChannel::new(1, [(ps("X"), 0.01), (ps("Z"), 0.02)]).unwrap();
        assert!((channel_infidelity(&ch) - 0.03).abs() < 1e-15);
        assert!((channel_polarization(&ch) - 0.96).abs() < 1e-12);
        let id = StochasticPauliChannel::identity(2);
        assert_eq!((id.infidelity(), id.polarization()), (0.0, 1.0));
    }

    #[test]
    fn validation() {
        assert!(StochasticPauliChannel::new(1, [(ps("I"), 0.1)]).is_err());
        assert!(StochasticPauliChannel::new(1, [(ps("X"), -0.1)]).is_err());
        assert!(StochasticPauliChannel::new(1, [(ps("X"), 0.6), (ps("Y"), 0.6)]).is_err());
        assert!(StochasticPauliChannel::new(1, [(ps("X"), 0.1), (ps("X"), 0.1)]).is_err());
        assert!(StochasticPauliChannel::new(2, [(ps("X"), 0.1)]).is_err());
    }

    #[test]
    fn select_partitions_unit_interval() {
        let ch = StochasticPauliChannel::new(1, [(ps("Z"), 0.25), (ps("X"), 0.25)]).unwrap();
        // Entries are kept in PauliString order, where Z sorts before X.
        assert_eq!(ch.select(0.0), Some(&ps("Z")));
        assert_eq!(ch.select(0.2499), Some(&ps("Z")));
        assert_eq!(ch.select(0.25), Some(&ps("X")));
        assert_eq!(ch.select(0.4999), Some(&ps("X")));
        assert_eq!(ch.select(0.5), None);
        assert_eq!(ch.select(0.99), None);
    }

    #[test]
    fn embedded_paulis() {
        let ps = nontrivial_paulis_on(3, &[0, 2]);
        assert_eq!(ps.len(), 15);
        assert!(ps.iter().all(|p| p.get(1) == Pauli::I && !p.is_identity()));
    }
}
