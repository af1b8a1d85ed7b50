//! Randomized mirror circuits and their text format.
//!
//! A circuit of benchmark depth `d` is the layer sequence
//!
//! ```text
//! F0, P0, L1, P1, …, L(d/2), P(d/2), L(d/2)⁻¹, P(d/2+1), …, L1⁻¹, Pd, F0⁻¹
//! ```
//!
//! where `F0` is a layer of random single-qubit Cliffords, the `Pi` are
//! uniformly random Pauli layers and the `Li` are drawn from Ω. Its ideal
//! action on `|0…0⟩` is a Pauli conjugated by local Cliffords, so the ideal
//! output is a single bit string: the circuit's target.
//!
//! # File format
//!
//! One circuit per file, line based:
//!
//! ```text
//! #MRB n=3 d=2 target=101 seed=00000000000000ff
//! L 0: q0=C5 q1=C17 q2=C9
//! L 1: q0q1=CX q2=C3
//! ```
//!
//! Placements are listed in ascending order of their lowest qubit. `qAqB=CX`
//! is a CNOT with control `A` and target `B`. Idle qubits are omitted.

use std::fmt::Write as _;

use rand::Rng;

use crate::bits::BitString;
use crate::clifford::Clifford1Q;
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::layer::{Layer, Op};
use crate::sampling::{sample_clifford_layer, sample_layer, sample_pauli_layer, SamplerSpec};
use crate::design::MrbDesign;
use crate::seed::derive_rng;
use crate::tableau::{tableau_run, Step};

/// What a layer of a mirror circuit is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRole {
    /// `F0`, the random local Clifford cap.
    Prep,
    /// `Pi`, a random Pauli layer.
    Pauli(usize),
    /// `Li`, an Ω-sampled layer.
    Forward(usize),
    /// `Li⁻¹`.
    Inverse(usize),
    /// `F0⁻¹`.
    Unprep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirrorCircuit {
    n: usize,
    depth: usize,
    layers: Vec<Layer>,
    target: BitString,
    seed: u64,
}

impl MirrorCircuit {
    /// Assembles a circuit from its independently sampled parts and computes the target.
    ///
    /// `paulis` must hold `d + 1` layers and `forward` `d / 2` layers.
    pub fn assemble(prep: Layer, paulis: Vec<Layer>, forward: Vec<Layer>, seed: u64) -> Result<Self> {
        let n = prep.num_qubits();
        let half = forward.len();
        let depth = 2 * half;
        if paulis.len() != depth + 1 {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} needs {} Pauli layers, got {}",
                depth + 1,
                paulis.len()
            )));
        }
        if let Some(bad) = paulis.iter().chain(&forward).find(|l| l.num_qubits() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.num_qubits() });
        }
        let mut layers = Vec::with_capacity(2 * depth + 3);
        let unprep = prep.inverse();
        layers.push(prep);
        let mut paulis = paulis.into_iter();
        layers.push(paulis.next().expect("d + 1 >= 1"));
        for l in &forward {
            layers.push(l.clone());
            layers.push(paulis.next().expect("counted"));
        }
        for l in forward.iter().rev() {
            layers.push(l.inverse());
            layers.push(paulis.next().expect("counted"));
        }
        layers.push(unprep);
        let target = compute_target(n, &layers)?;
        Ok(MirrorCircuit { n, depth, layers, target, seed })
    }

    /// Samples a circuit of benchmark depth `depth`. The three components
    /// (`F0`, the Pauli layers, the Ω layers) come from independent streams
    /// derived from `seed`.
    pub fn sample(graph: &ConnectivityGraph, sampler: &SamplerSpec, depth: usize, seed: u64) -> Result<Self> {
        if depth % 2 != 0 {
            return Err(Error::InvalidDesign(format!("benchmark depth must be even, got {depth}")));
        }
        let n = graph.num_qubits();
        let mut prep_rng = derive_rng(seed, &[0]);
        let mut pauli_rng = derive_rng(seed, &[1]);
        let mut layer_rng = derive_rng(seed, &[2]);
        let prep = sample_clifford_layer(n, &mut prep_rng);
        let paulis = (0..=depth).map(|_| sample_pauli_layer(n, &mut pauli_rng)).collect();
        let forward = (0..depth / 2)
            .map(|_| sample_layer(graph, sampler, &mut layer_rng))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(prep, paulis, forward, seed)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn target(&self) -> &BitString {
        &self.target
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Role of the layer at `index` in the sequence.
    pub fn role(&self, index: usize) -> LayerRole {
        let half = self.depth / 2;
        let last = self.layers.len() - 1;
        match index {
            0 => LayerRole::Prep,
            i if i == last => LayerRole::Unprep,
            i if i % 2 == 1 => LayerRole::Pauli((i - 1) / 2),
            i => {
                let k = i / 2;
                if k <= half {
                    LayerRole::Forward(k)
                } else {
                    LayerRole::Inverse(self.depth + 1 - k)
                }
            }
        }
    }

    /// Serializes to the line-based circuit format.
    pub fn to_text(&self) -> String {
        let mut out = format!("#MRB n={} d={} target={} seed={:016x}\n", self.n, self.depth, self.target, self.seed);
        for (i, layer) in self.layers.iter().enumerate() {
            write!(out, "L {i}:").unwrap();
            for op in layer.ops() {
                match *op {
                    Op::Single { qubit, gate } => write!(out, " q{qubit}={gate}").unwrap(),
                    Op::Cnot { control, target } => write!(out, " q{control}q{target}=CX").unwrap(),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the circuit format. The target is recomputed and must match the header.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty circuit file".into() })?;
        let perr = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
        let rest = header.strip_prefix("#MRB ").ok_or_else(|| perr(0, "missing #MRB header".into()))?;
        let (mut n, mut depth, mut target, mut seed) = (None, None, None, None);
        for tok in rest.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| perr(0, format!("bad header token {tok:?}")))?;
            match k {
                "n" => n = Some(v.parse::<usize>().map_err(|e| perr(0, e.to_string()))?),
                "d" => depth = Some(v.parse::<usize>().map_err(|e| perr(0, e.to_string()))?),
                "target" => target = Some(v.parse::<BitString>()?),
                "seed" => seed = Some(u64::from_str_radix(v, 16).map_err(|e| perr(0, e.to_string()))?),
                _ => return Err(perr(0, format!("unknown header key {k:?}"))),
            }
        }
        let (n, depth, target, seed) = match (n, depth, target, seed) {
            (Some(n), Some(d), Some(t), Some(s)) => (n, d, t, s),
            _ => return Err(perr(0, "header needs n, d, target and seed".into())),
        };
        if target.len() != n {
            return Err(perr(0, format!("target has {} bits for n = {n}", target.len())));
        }
        if depth % 2 != 0 {
            return Err(perr(0, format!("benchmark depth must be even, got {depth}")));
        }

        let mut layers = Vec::new();
        for (lineno, line) in lines {
            let (label, body) = line.split_once(':').ok_or_else(|| perr(lineno, "expected `L <i>:`".into()))?;
            let idx = label
                .trim()
                .strip_prefix("L ")
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| perr(lineno, format!("bad layer label {label:?}")))?;
            if idx != layers.len() {
                return Err(perr(lineno, format!("expected layer {}, found {idx}", layers.len())));
            }
            let mut ops = Vec::new();
            for tok in body.split_whitespace() {
                ops.push(parse_op(tok).map_err(|m| perr(lineno, m))?);
            }
            layers.push(Layer::from_ops(n, ops).map_err(|e| perr(lineno, e.to_string()))?);
        }
        if layers.len() != 2 * depth + 3 {
            return Err(perr(0, format!("depth {depth} needs {} layers, found {}", 2 * depth + 3, layers.len())));
        }
        let computed = compute_target(n, &layers)?;
        if computed != target {
            return Err(perr(0, format!("header target {target} but circuit computes {computed}")));
        }
        Ok(MirrorCircuit { n, depth, layers, target, seed })
    }
}

fn parse_op(tok: &str) -> std::result::Result<Op, String> {
    let (qs, gate) = tok.split_once('=').ok_or_else(|| format!("bad placement {tok:?}"))?;
    let qubits: Vec<usize> = qs
        .split('q')
        .skip(1)
        .map(|s| s.parse::<usize>().map_err(|_| format!("bad qubit in {tok:?}")))
        .collect::<std::result::Result<_, _>>()?;
    if !qs.starts_with('q') {
        return Err(format!("bad placement {tok:?}"));
    }
    match (qubits.as_slice(), gate) {
        (&[control, target], "CX") => Ok(Op::Cnot { control, target }),
        (&[qubit], g) => {
            let id = g
                .strip_prefix('C')
                .and_then(|s| s.parse::<u8>().ok())
                .and_then(Clifford1Q::new)
                .ok_or_else(|| format!("bad gate {g:?}"))?;
            Ok(Op::Single { qubit, gate: id })
        }
        _ => Err(format!("bad placement {tok:?}")),
    }
}

/// Ideal output bit string of a Clifford layer sequence started in `|0…0⟩`.
pub fn compute_target(n: usize, layers: &[Layer]) -> Result<BitString> {
    tableau_run(n, layers.iter().map(Step::Layer))
}

/// Samples a depth-`depth` circuit for `design`, drawing the circuit seed
/// from `rng`. Campaigns use [`MrbDesign::circuit`] instead, which derives
/// the seed from the design's master seed.
pub fn sample_mirror_circuit<R: Rng + ?Sized>(design: &MrbDesign, depth: usize, rng: &mut R) -> Result<MirrorCircuit> {
    MirrorCircuit::sample(&design.connectivity, &design.sampler, depth, rng.random())
}
