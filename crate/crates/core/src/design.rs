//! Experiment designs: which circuits to run and how often.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::MirrorCircuit;
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::sampling::SamplerSpec;
use crate::seed::{derive_seed, domain};

pub const DESIGN_SCHEMA: &str = "mrb-design/1";

/// An MRB experiment design.
///
/// `connectivity` is the graph on the benchmarked qubits, relabelled
/// `0..n`; `qubits` records which device qubits those are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MrbDesign {
    pub schema: String,
    pub n: usize,
    pub qubits: Vec<usize>,
    pub connectivity: ConnectivityGraph,
    pub sampler: SamplerSpec,
    pub depths: Vec<usize>,
    pub circuits_per_depth: usize,
    pub shots: usize,
    pub seed: u64,
}

impl MrbDesign {
    pub fn new(
        connectivity: ConnectivityGraph,
        qubits: Vec<usize>,
        sampler: SamplerSpec,
        depths: Vec<usize>,
        circuits_per_depth: usize,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        let d = MrbDesign {
            schema: DESIGN_SCHEMA.into(),
            n: connectivity.num_qubits(),
            qubits,
            connectivity,
            sampler,
            depths,
            circuits_per_depth,
            shots,
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    /// A design on an `n`-qubit block of a `rows x cols` lattice.
    #[allow(clippy::too_many_arguments)]
    pub fn on_lattice(
        rows: usize,
        cols: usize,
        n: usize,
        sampler: SamplerSpec,
        depths: Vec<usize>,
        circuits_per_depth: usize,
        shots: usize,
        seed: u64,
    ) -> Result<Self> {
        let qubits = ConnectivityGraph::lattice_block(rows, cols, n)?;
        let graph = ConnectivityGraph::grid(rows, cols).subgraph(&qubits)?;
        Self::new(graph, qubits, sampler, depths, circuits_per_depth, shots, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != DESIGN_SCHEMA {
            return Err(Error::InvalidDesign(format!("unsupported schema {:?}", self.schema)));
        }
        if self.n == 0 || self.n != self.connectivity.num_qubits() || self.qubits.len() != self.n {
            return Err(Error::InvalidDesign(format!(
                "n = {} but the graph has {} qubits and {} device qubits are listed",
                self.n,
                self.connectivity.num_qubits(),
                self.qubits.len()
            )));
        }
        if self.depths.is_empty() {
            return Err(Error::InvalidDesign("no benchmark depths".into()));
        }
        if let Some(d) = self.depths.iter().find(|&&d| d % 2 != 0) {
            return Err(Error::InvalidDesign(format!(
                "benchmark depth {d} is odd; mirror circuits need an even benchmark depth"
            )));
        }
        let mut sorted = self.depths.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.depths.len() {
            return Err(Error::InvalidDesign("benchmark depths repeat".into()));
        }
        if self.circuits_per_depth == 0 {
            return Err(Error::InvalidDesign("need at least one circuit per depth".into()));
        }
        if self.shots == 0 {
            return Err(Error::InvalidDesign("need at least one shot per circuit".into()));
        }
        self.sampler.validate(&self.connectivity)
    }

    /// Seed of circuit `k` at the depth with index `depth_index`.
    pub fn circuit_seed(&self, depth_index: usize, k: usize) -> u64 {
        derive_seed(self.seed, &[domain::CIRCUIT, depth_index as u64, k as u64])
    }

    pub fn circuit(&self, depth_index: usize, k: usize) -> Result<MirrorCircuit> {
        MirrorCircuit::sample(
            &self.connectivity,
            &self.sampler,
            self.depths[depth_index],
            self.circuit_seed(depth_index, k),
        )
    }

    /// Every circuit of the design in (depth, k) order, sampled in parallel.
    pub fn circuits(&self) -> Result<Vec<DesignCircuit>> {
        let jobs: Vec<(usize, usize)> = (0..self.depths.len())
            .flat_map(|i| (0..self.circuits_per_depth).map(move |k| (i, k)))
            .collect();
        jobs.into_par_iter()
            .map(|(i, k)| {
                Ok(DesignCircuit { id: circuit_id(self.depths[i], k), depth: self.depths[i], circuit: self.circuit(i, k)? })
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: MrbDesign = serde_json::from_str(s)?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
pub struct DesignCircuit {
    pub id: String,
    pub depth: usize,
    pub circuit: MirrorCircuit,
}

/// Identifier of circuit `k` at benchmark depth `d`, also its file stem.
pub fn circuit_id(depth: usize, k: usize) -> String {
    format!("d{depth:03}_k{k:03}")
}

/// `0, 2, 4, 8, 16, …` up to and including `max_depth`, stopping after the
/// first depth where the predicted mean polarization `a * p^d` drops below 0.05.
pub fn default_depths(a: f64, p: f64, max_depth: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut d = 2;
    while d <= max_depth {
        out.push(d);
        if a * p.powi(d as i32) < 0.05 {
            break;
        }
        d *= 2;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> MrbDesign {
        MrbDesign::on_lattice(4, 4, 4, SamplerSpec::edge_grab(0.125), vec![0, 2, 4], 3, 10, 42).unwrap()
    }

    #[test]
    fn lattice_design_shape() {
        let d = small();
        assert_eq!(d.qubits, vec![0, 1, 4, 5]);
        assert_eq!(d.connectivity.edges().len(), 4);
        let cs = d.circuits().unwrap();
        assert_eq!(cs.len(), 9);
        assert_eq!(cs[4].id, "d002_k001");
        assert_eq!(cs[4].circuit.depth(), 2);
    }

    #[test]
    fn rejects_bad_designs() {
        let g = ConnectivityGraph::grid(2, 2);
        let q = vec![0, 1, 2, 3];
        let s = SamplerSpec::edge_grab(0.125);
        let e = MrbDesign::new(g.clone(), q.clone(), s, vec![0, 3], 1, 1, 0).unwrap_err();
        assert!(e.to_string().contains("even"), "{e}");
        assert!(MrbDesign::new(g.clone(), q.clone(), s, vec![0, 2], 0, 1, 0).is_err());
        assert!(MrbDesign::new(g.clone(), q.clone(), s, vec![0, 2], 1, 0, 0).is_err());
        assert!(MrbDesign::new(g.clone(), q.clone(), s, vec![], 1, 1, 0).is_err());
        assert!(MrbDesign::new(g, vec![0], s, vec![0], 1, 1, 0).is_err());
    }

    #[test]
    fn json_round_trip_and_reproducible() {
        let d = small();
        let back = MrbDesign::from_json(&d.to_json().unwrap()).unwrap();
        assert_eq!(back, d);
        let a: Vec<String> = d.circuits().unwrap().iter().map(|c| c.circuit.to_text()).collect();
        let b: Vec<String> = back.circuits().unwrap().iter().map(|c| c.circuit.to_text()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn depth_ladder() {
        assert_eq!(default_depths(1.0, 1.0, 64), vec![0, 2, 4, 8, 16, 32, 64]);
        // 0.9^16 = 0.185, 0.9^32 = 0.034
        assert_eq!(default_depths(1.0, 0.9, 1024), vec![0, 2, 4, 8, 16, 32]);
    }
}
