//! Stabilizer tableau in the Aaronson–Gottesman layout.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Each row is a
//! [`PauliString`] plus a sign bit; `Y` factors are Hermitian. This is the
//! reference executor: it is exact but costs O(n) per gate per row, so the
//! shot simulator uses Pauli frames instead and is checked against this.

use crate::bits::BitString;
use crate::clifford::{product_phase, Clifford1Q, SignedPauli};
use crate::error::{check_dims, Error, Result};
use crate::layer::{Layer, Op};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliString>,
    signs: Vec<bool>,
}

impl Tableau {
    /// The all-zeros computational basis state.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::X));
        }
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::Z));
        }
        Tableau { n, rows, signs: vec![false; 2 * n] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = (bool, &PauliString)> {
        self.signs[self.n..].iter().copied().zip(&self.rows[self.n..])
    }

    pub fn apply_clifford(&mut self, q: usize, gate: Clifford1Q) {
        for (row, sign) in self.rows.iter_mut().zip(self.signs.iter_mut()) {
            let p = row.get(q);
            if p == Pauli::I {
                continue;
            }
            let image = gate.conjugate_signed(SignedPauli::plus(p));
            row.set(q, image.pauli);
            *sign ^= image.negative;
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        for (row, sign) in self.rows.iter_mut().zip(self.signs.iter_mut()) {
            let (xa, za) = (row.x_bit(control), row.z_bit(control));
            let (xb, zb) = (row.x_bit(target), row.z_bit(target));
            *sign ^= xa && zb && (xb == za);
            row.set_bits(target, xb ^ xa, zb);
            row.set_bits(control, xa, za ^ zb);
        }
    }

    pub fn apply_layer(&mut self, layer: &Layer) -> Result<()> {
        check_dims(self.n, layer.num_qubits())?;
        for op in layer.ops() {
            match *op {
                Op::Single { qubit, gate } => self.apply_clifford(qubit, gate),
                Op::Cnot { control, target } => self.apply_cnot(control, target),
            }
        }
        Ok(())
    }

    /// Applies a Pauli operator to the state (the phase is global and dropped).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_dims(self.n, p.num_qubits())?;
        for (row, sign) in self.rows.iter().zip(self.signs.iter_mut()) {
            if !row.commutes_with(p)? {
                *sign ^= true;
            }
        }
        Ok(())
    }

    /// Outcome of measuring qubit `q` in the Z basis, if it is deterministic.
    pub fn deterministic_outcome(&self, q: usize) -> Option<bool> {
        let n = self.n;
        if self.rows[n..].iter().any(|row| row.x_bit(q)) {
            return None;
        }
        // Multiply together the stabilizers paired with destabilizers that anticommute with Z_q.
        let mut scratch = PauliString::identity(n);
        let mut phase = 0u8;
        for i in 0..n {
            if !self.rows[i].x_bit(q) {
                continue;
            }
            let row = &self.rows[n + i];
            phase += 2 * self.signs[n + i] as u8;
            for j in 0..n {
                phase += product_phase(row.x_bit(j), row.z_bit(j), scratch.x_bit(j), scratch.z_bit(j));
            }
            scratch.compose_assign_unchecked(row);
        }
        debug_assert!(phase % 2 == 0);
        Some(phase % 4 == 2)
    }

    /// Measures every qubit, failing if any outcome is random.
    pub fn measure_all(&self) -> Result<BitString> {
        let mut out = BitString::zeros(self.n);
        for q in 0..self.n {
            let b = self.deterministic_outcome(q).ok_or(Error::NonDeterministicOutput { qubit: q })?;
            out.set(q, b);
        }
        Ok(out)
    }
}

/// One element of a Clifford sequence: an ideal layer or an applied Pauli.
#[derive(Debug, Clone, Copy)]
pub enum Step<'a> {
    Layer(&'a Layer),
    Pauli(&'a PauliString),
}

/// Runs a Clifford sequence on `|0…0⟩` and returns the deterministic Z-basis outcome.
pub fn tableau_run<'a>(n: usize, steps: impl IntoIterator<Item = Step<'a>>) -> Result<BitString> {
    let mut t = Tableau::new(n);
    for step in steps {
        match step {
            Step::Layer(l) => t.apply_layer(l)?,
            Step::Pauli(p) => t.apply_pauli(p)?,
        }
    }
    t.measure_all()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sequence_gives_zeros() {
        assert_eq!(tableau_run(3, []).unwrap().to_string(), "000");
    }

    #[test]
    fn x_on_qubit_one() {
        let l = Layer::from_gates([Clifford1Q::I, Clifford1Q::X, Clifford1Q::I]);
        assert_eq!(tableau_run(3, [Step::Layer(&l)]).unwrap().to_string(), "010");
        let p: PauliString = "IYI".parse().unwrap();
        assert_eq!(tableau_run(3, [Step::Pauli(&p)]).unwrap().to_string(), "010");
    }

    #[test]
    fn bell_pair_is_random() {
        let h = Layer::from_gates([Clifford1Q::H, Clifford1Q::I]);
        let cx = Layer::from_ops(2, [Op::Cnot { control: 0, target: 1 }]).unwrap();
        let err = tableau_run(2, [Step::Layer(&h), Step::Layer(&cx)]).unwrap_err();
        assert!(matches!(err, Error::NonDeterministicOutput { qubit: 0 }));
    }

    #[test]
    fn cnot_copies_and_uncomputes() {
        let x0 = Layer::from_gates([Clifford1Q::X, Clifford1Q::I]);
        let cx = Layer::from_ops(2, [Op::Cnot { control: 0, target: 1 }]).unwrap();
        assert_eq!(tableau_run(2, [Step::Layer(&x0), Step::Layer(&cx)]).unwrap().to_string(), "11");
        let h = Layer::from_gates([Clifford1Q::H, Clifford1Q::I]);
        let z = Layer::from_gates([Clifford1Q::Z, Clifford1Q::I]);
        // H Z H = X, entangle and disentangle
        let seq = [Step::Layer(&h), Step::Layer(&cx), Step::Layer(&z), Step::Layer(&cx), Step::Layer(&h)];
        assert_eq!(tableau_run(2, seq).unwrap().to_string(), "10");
    }

    #[test]
    fn every_gate_then_inverse_is_identity() {
        for g in Clifford1Q::all() {
            let a = Layer::from_gates([g]);
            let b = a.inverse();
            assert_eq!(tableau_run(1, [Step::Layer(&a), Step::Layer(&b)]).unwrap().to_string(), "0");
        }
    }
}
