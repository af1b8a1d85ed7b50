//! Clock-cycle layers of single-qubit Cliffords and CNOTs.

use crate::clifford::Clifford1Q;
use crate::error::{check_dims, Error, Result};
use crate::graph::ConnectivityGraph;
use crate::pauli::PauliString;

/// What a single qubit does during one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    /// No gate, and no gate error.
    Idle,
    Gate(Clifford1Q),
    /// Control end of a CNOT whose target is the given qubit.
    Control { target: usize },
    /// Target end of a CNOT whose control is the given qubit.
    Target { control: usize },
}

/// A gate of a layer, listed once per gate rather than once per qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Single { qubit: usize, gate: Clifford1Q },
    Cnot { control: usize, target: usize },
}

impl Op {
    /// Smallest qubit the gate touches.
    pub fn lead(&self) -> usize {
        match *self {
            Op::Single { qubit, .. } => qubit,
            Op::Cnot { control, target } => control.min(target),
        }
    }
}

/// One clock cycle: every qubit carries exactly one placement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Layer {
    placements: Vec<Placement>,
    ops: Vec<Op>,
}

impl Layer {
    pub fn new(placements: Vec<Placement>) -> Result<Self> {
        let n = placements.len();
        let mut ops = Vec::with_capacity(n);
        for (q, p) in placements.iter().enumerate() {
            match *p {
                Placement::Idle => {}
                Placement::Gate(gate) => ops.push(Op::Single { qubit: q, gate }),
                Placement::Control { target } => {
                    if target >= n || target == q {
                        return Err(Error::MalformedLayer(format!("qubit {q}: bad CNOT target {target}")));
                    }
                    if placements[target] != (Placement::Target { control: q }) {
                        return Err(Error::MalformedLayer(format!(
                            "qubit {q} controls {target} but {target} is {:?}",
                            placements[target]
                        )));
                    }
                    if q < target {
                        ops.push(Op::Cnot { control: q, target });
                    }
                }
                Placement::Target { control } => {
                    if control >= n || control == q {
                        return Err(Error::MalformedLayer(format!("qubit {q}: bad CNOT control {control}")));
                    }
                    if placements[control] != (Placement::Control { target: q }) {
                        return Err(Error::MalformedLayer(format!(
                            "qubit {q} targeted by {control} but {control} is {:?}",
                            placements[control]
                        )));
                    }
                    if q < control {
                        ops.push(Op::Cnot { control, target: q });
                    }
                }
            }
        }
        Ok(Layer { placements, ops })
    }

    pub fn idle(n: usize) -> Self {
        Layer { placements: vec![Placement::Idle; n], ops: Vec::new() }
    }

    /// A layer with one single-qubit gate per qubit.
    pub fn from_gates(gates: impl IntoIterator<Item = Clifford1Q>) -> Self {
        let placements: Vec<_> = gates.into_iter().map(Placement::Gate).collect();
        let ops = placements
            .iter()
            .enumerate()
            .map(|(qubit, p)| match p {
                Placement::Gate(gate) => Op::Single { qubit, gate: *gate },
                _ => unreachable!(),
            })
            .collect();
        Layer { placements, ops }
    }

    /// Builds a layer from a list of gates; qubits not mentioned are idle.
    pub fn from_ops(n: usize, ops: impl IntoIterator<Item = Op>) -> Result<Self> {
        let mut placements = vec![None; n];
        let mut put = |q: usize, p: Placement| -> Result<()> {
            let slot = placements
                .get_mut(q)
                .ok_or_else(|| Error::MalformedLayer(format!("qubit {q} out of range for {n} qubits")))?;
            if slot.is_some() {
                return Err(Error::MalformedLayer(format!("qubit {q} used twice")));
            }
            *slot = Some(p);
            Ok(())
        };
        for op in ops {
            match op {
                Op::Single { qubit, gate } => put(qubit, Placement::Gate(gate))?,
                Op::Cnot { control, target } => {
                    put(control, Placement::Control { target })?;
                    put(target, Placement::Target { control })?;
                }
            }
        }
        Layer::new(placements.into_iter().map(|p| p.unwrap_or(Placement::Idle)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.placements.len()
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn placement(&self, q: usize) -> Placement {
        self.placements[q]
    }

    /// Gates in ascending order of their lowest qubit.
    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn cnot_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, Op::Cnot { .. })).count()
    }

    /// Checks that every CNOT sits on an edge of `graph`.
    pub fn check_connectivity(&self, graph: &ConnectivityGraph) -> Result<()> {
        check_dims(graph.num_qubits(), self.num_qubits())?;
        for op in &self.ops {
            if let Op::Cnot { control, target } = *op {
                if !graph.has_edge(control, target) {
                    return Err(Error::MalformedLayer(format!("CNOT {control}->{target} is not a graph edge")));
                }
            }
        }
        Ok(())
    }

    /// Phase-free `U P U†`, in place.
    #[inline]
    pub fn conjugate_in_place(&self, p: &mut PauliString) {
        debug_assert_eq!(p.num_qubits(), self.num_qubits());
        for op in &self.ops {
            match *op {
                Op::Single { qubit, gate } => {
                    let image = gate.conjugate(p.get(qubit));
                    p.set(qubit, image);
                }
                Op::Cnot { control, target } => {
                    let (xc, zc) = (p.x_bit(control), p.z_bit(control));
                    let (xt, zt) = (p.x_bit(target), p.z_bit(target));
                    p.set_bits(target, xt ^ xc, zt);
                    p.set_bits(control, xc, zc ^ zt);
                }
            }
        }
    }

    /// The layer implementing `U(L)†`.
    pub fn inverse(&self) -> Layer {
        let placements = self
            .placements
            .iter()
            .map(|p| match *p {
                Placement::Gate(g) => Placement::Gate(g.inverse()),
                other => other,
            })
            .collect();
        let ops = self
            .ops
            .iter()
            .map(|op| match *op {
                Op::Single { qubit, gate } => Op::Single { qubit, gate: gate.inverse() },
                cnot => cnot,
            })
            .collect();
        Layer { placements, ops }
    }
}

/// Phase-free conjugation `U(L) P U(L)†`.
pub fn conjugate_by_layer(p: &PauliString, layer: &Layer) -> Result<PauliString> {
    check_dims(layer.num_qubits(), p.num_qubits())?;
    let mut out = p.clone();
    layer.conjugate_in_place(&mut out);
    Ok(out)
}

pub fn invert_layer(layer: &Layer) -> Layer {
    layer.inverse()
}
