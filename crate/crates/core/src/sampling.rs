//! Layer samplers (the distribution Ω over layers).
//!
//! Both samplers first choose a set of disjoint CNOTs on graph edges and then
//! put an independent uniformly random single-qubit Clifford on every other
//! qubit. The CNOT pattern of `L` and `L⁻¹` is the same and the uniform
//! distribution over the 24 Cliffords is closed under inversion, so every
//! layer is exactly as likely as its inverse.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::Clifford1Q;
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::layer::{Layer, Placement};
use crate::pauli::Pauli;

/// How CNOTs are placed in a sampled layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    /// Random maximal matching, thinned to expected two-qubit gate density `xi`,
    /// where density is `2 * E[#CNOT] / n`.
    EdgeGrab { xi: f64 },
    /// One uniformly chosen edge, carrying a CNOT with probability `cnot_probability`.
    SingleCnot {
        #[serde(default = "half")]
        cnot_probability: f64,
    },
}

fn half() -> f64 {
    0.5
}

impl SamplerSpec {
    pub fn edge_grab(xi: f64) -> Self {
        SamplerSpec::EdgeGrab { xi }
    }

    pub fn single_cnot() -> Self {
        SamplerSpec::SingleCnot { cnot_probability: 0.5 }
    }

    pub fn validate(&self, graph: &ConnectivityGraph) -> Result<()> {
        match *self {
            SamplerSpec::EdgeGrab { xi } => {
                if !(0.0..=1.0).contains(&xi) {
                    return Err(Error::InvalidSampler(format!("xi = {xi} outside [0, 1]")));
                }
                let max = graph.max_density();
                if xi > max {
                    return Err(Error::InvalidSampler(format!(
                        "xi = {xi} exceeds the maximum density {max} reachable on this {}-qubit graph",
                        graph.num_qubits()
                    )));
                }
            }
            SamplerSpec::SingleCnot { cnot_probability } => {
                if !(0.0..=1.0).contains(&cnot_probability) {
                    return Err(Error::InvalidSampler(format!("cnot probability {cnot_probability} outside [0, 1]")));
                }
                if graph.edges().is_empty() && cnot_probability > 0.0 {
                    return Err(Error::InvalidSampler("single-CNOT sampler needs at least one edge".into()));
                }
            }
        }
        Ok(())
    }

    /// Expected two-qubit gate density `2 * E[#CNOT] / n` this spec aims for.
    pub fn nominal_density(&self, graph: &ConnectivityGraph) -> f64 {
        match *self {
            SamplerSpec::EdgeGrab { xi } => xi,
            SamplerSpec::SingleCnot { cnot_probability } => 2.0 * cnot_probability / graph.num_qubits() as f64,
        }
    }
}

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// Uniformly random element of the 24-element Clifford group.
pub fn random_clifford<R: Rng + ?Sized>(rng: &mut R) -> Clifford1Q {
    Clifford1Q::new(rng.random_range(0..Clifford1Q::COUNT as u8)).expect("in range")
}

/// Samples one layer from Ω.
pub fn sample_layer<R: Rng + ?Sized>(graph: &ConnectivityGraph, spec: &SamplerSpec, rng: &mut R) -> Result<Layer> {
    spec.validate(graph)?;
    let n = graph.num_qubits();
    let mut placements = vec![Placement::Idle; n];
    let place_cnot = |rng: &mut R, a: usize, b: usize, placements: &mut Vec<Placement>| {
        let (control, target) = if rng.random::<bool>() { (a, b) } else { (b, a) };
        placements[control] = Placement::Control { target };
        placements[target] = Placement::Target { control };
    };

    match *spec {
        SamplerSpec::EdgeGrab { xi } => {
            if xi > 0.0 {
                let mut order: Vec<usize> = (0..graph.edges().len()).collect();
                order.shuffle(rng);
                let mut used = vec![false; n];
                let mut matching = Vec::new();
                for e in order {
                    let (a, b) = graph.edges()[e];
                    if !used[a] && !used[b] {
                        used[a] = true;
                        used[b] = true;
                        matching.push((a, b));
                    }
                }
                let want = xi * n as f64 / (2.0 * matching.len() as f64);
                if want > 1.0 && !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
                    log::warn!(
                        "edge-grab inclusion probability {want:.3} clamped to 1: realised density falls below xi = {xi}"
                    );
                }
                let keep = want.min(1.0);
                for (a, b) in matching {
                    if rng.random::<f64>() < keep {
                        place_cnot(rng, a, b, &mut placements);
                    }
                }
            }
        }
        SamplerSpec::SingleCnot { cnot_probability } => {
            if !graph.edges().is_empty() {
                let (a, b) = graph.edges()[rng.random_range(0..graph.edges().len())];
                if rng.random::<f64>() < cnot_probability {
                    place_cnot(rng, a, b, &mut placements);
                }
            }
        }
    }

    for p in placements.iter_mut() {
        if *p == Placement::Idle {
            *p = Placement::Gate(random_clifford(rng));
        }
    }
    Layer::new(placements)
}

/// A layer of independent, uniformly random Pauli gates.
pub fn sample_pauli_layer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Layer {
    Layer::from_gates((0..n).map(|_| Clifford1Q::from_pauli(Pauli::ALL[rng.random_range(0..4)])))
}

/// A layer of independent, uniformly random single-qubit Cliffords.
pub fn sample_clifford_layer<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Layer {
    Layer::from_gates((0..n).map(|_| random_clifford(rng)))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::layer::Op;
    use crate::seed::rng_from_seed;

    #[test]
    fn single_cnot_frequency_is_half() {
        let g = ConnectivityGraph::new(2, [(0, 1)]).unwrap();
        let mut rng = rng_from_seed(11);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| sample_layer(&g, &SamplerSpec::single_cnot(), &mut rng).unwrap().cnot_count() == 1)
            .count();
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - 0.5).abs() < 3.0 * sigma, "{hits}");
    }

    #[test]
    fn zero_density_has_no_cnots() {
        let g = ConnectivityGraph::grid(3, 3);
        let mut rng = rng_from_seed(1);
        for _ in 0..1000 {
            let l = sample_layer(&g, &SamplerSpec::edge_grab(0.0), &mut rng).unwrap();
            assert_eq!(l.cnot_count(), 0);
            assert!(l.placements().iter().all(|p| matches!(p, Placement::Gate(_))));
        }
    }

    #[test]
    fn edge_grab_density_on_4x4() {
        let g = ConnectivityGraph::grid(4, 4);
        let mut rng = rng_from_seed(2);
        let samples = 10_000;
        let densities: Vec<f64> = (0..samples)
            .map(|_| {
                let l = sample_layer(&g, &SamplerSpec::edge_grab(0.125), &mut rng).unwrap();
                l.check_connectivity(&g).unwrap();
                2.0 * l.cnot_count() as f64 / 16.0
            })
            .collect();
        let mean = densities.iter().sum::<f64>() / samples as f64;
        let var = densities.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
        let se = (var / samples as f64).sqrt();
        assert!((mean - 0.125).abs() < 3.0 * se, "mean density {mean} (se {se})");
    }

    #[test]
    fn edge_grab_cnots_are_disjoint() {
        let g = ConnectivityGraph::grid(4, 4);
        let mut rng = rng_from_seed(3);
        for _ in 0..100_000 {
            // Layer::new rejects a qubit used twice; check graph edges too.
            let l = sample_layer(&g, &SamplerSpec::edge_grab(0.5), &mut rng).unwrap();
            l.check_connectivity(&g).unwrap();
        }
    }

    #[test]
    fn unachievable_density_rejected() {
        let lonely = ConnectivityGraph::new(1, []).unwrap();
        let mut rng = rng_from_seed(4);
        assert!(matches!(
            sample_layer(&lonely, &SamplerSpec::edge_grab(0.125), &mut rng),
            Err(Error::InvalidSampler(_))
        ));
        assert!(sample_layer(&lonely, &SamplerSpec::edge_grab(0.0), &mut rng).is_ok());
        assert!(sample_layer(&lonely, &SamplerSpec::single_cnot(), &mut rng).is_err());
        let three = ConnectivityGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(sample_layer(&three, &SamplerSpec::edge_grab(0.7), &mut rng).is_err());
    }

    #[test]
    fn pauli_layer_single_qubit_uniform() {
        let mut rng = rng_from_seed(5);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            let l = sample_pauli_layer(1, &mut rng);
            match l.placement(0) {
                Placement::Gate(g) => counts[g.as_pauli().unwrap() as usize] += 1,
                other => panic!("{other:?}"),
            }
        }
        let sigma = (0.25 * 0.75 / trials as f64).sqrt();
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.25).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn pauli_layer_two_qubit_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut rng = rng_from_seed(6);
        let trials = 100_000usize;
        let mut counts: HashMap<Vec<Placement>, usize> = HashMap::new();
        for _ in 0..trials {
            *counts.entry(sample_pauli_layer(2, &mut rng).placements().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 16);
        let expected = trials as f64 / 16.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = ChiSquared::new(15.0).unwrap().sf(chi2);
        assert!(p > 1e-3, "chi2 = {chi2}, p = {p}");
    }

    #[test]
    fn layer_and_inverse_equally_likely() {
        // 1 qubit: Ω is uniform on 24 gates; check the frequency of g vs g⁻¹.
        let g = ConnectivityGraph::new(1, []).unwrap();
        let mut rng = rng_from_seed(7);
        let mut counts = [0usize; 24];
        let trials = 240_000;
        for _ in 0..trials {
            match sample_layer(&g, &SamplerSpec::edge_grab(0.0), &mut rng).unwrap().ops()[0] {
                Op::Single { gate, .. } => counts[gate.id() as usize] += 1,
                _ => unreachable!(),
            }
        }
        let sigma = (trials as f64 / 24.0).sqrt();
        for c in Clifford1Q::all() {
            let diff = counts[c.id() as usize] as f64 - counts[c.inverse().id() as usize] as f64;
            assert!(diff.abs() < 5.0 * sigma * 2f64.sqrt());
        }
    }
}
