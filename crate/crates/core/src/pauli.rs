//! Phase-free n-qubit Pauli operators.
//!
//! A [`PauliString`] stores the X and Z components as packed bit words. Qubit
//! `q` has `Pauli::X` when only its x bit is set, `Pauli::Z` when only its z
//! bit is set and `Pauli::Y` when both are. Composition is XOR of the
//! components; the global phase is never tracked because it cannot influence
//! a computational-basis measurement.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// A single-qubit Pauli, without phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `(x, z)` components.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_label(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

const WORD: usize = 64;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// An n-qubit Pauli operator with the phase discarded.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString { n, x: vec![0; w], z: vec![0; w] }
    }

    /// A weight-one (or identity) Pauli acting on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(q, p);
        out
    }

    /// Builds a Pauli from `(qubit, Pauli)` pairs. Later entries overwrite earlier ones.
    pub fn from_sparse(n: usize, terms: impl IntoIterator<Item = (usize, Pauli)>) -> Self {
        let mut out = Self::identity(n);
        for (q, p) in terms {
            out.set(q, p);
        }
        out
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        (self.x[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        debug_assert!(q < self.n);
        (self.z[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    #[inline]
    pub fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / WORD, q % WORD);
        let mask = 1u64 << b;
        self.x[w] = (self.x[w] & !mask) | ((x as u64) << b);
        self.z[w] = (self.z[w] & !mask) | ((z as u64) << b);
    }

    #[inline]
    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.set_bits(q, x, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of qubits carrying a non-identity factor.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&q| self.x_bit(q) || self.z_bit(q))
    }

    /// Packed X words; bit `q % 64` of word `q / 64` is qubit `q`.
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// In-place product `self <- self * other`, phase dropped.
    pub fn compose_assign(&mut self, other: &PauliString) -> Result<()> {
        check_dims(self.n, other.n)?;
        self.compose_assign_unchecked(other);
        Ok(())
    }

    #[inline]
    pub(crate) fn compose_assign_unchecked(&mut self, other: &PauliString) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
    }

    pub fn clear(&mut self) {
        self.x.fill(0);
        self.z.fill(0);
    }

    /// True when the two operators commute.
    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        check_dims(self.n, other.n)?;
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        Ok(parity == 0)
    }

    /// Dense index in `0..4^n`: x bits in the low `n` bits, z bits above. Only for n <= 31.
    pub fn dense_index(&self) -> usize {
        assert!(self.n <= 31, "dense index needs n <= 31");
        let x = self.x.first().copied().unwrap_or(0) as usize;
        let z = self.z.first().copied().unwrap_or(0) as usize;
        x | (z << self.n)
    }

    pub fn from_dense_index(n: usize, index: usize) -> Self {
        assert!(n <= 31, "dense index needs n <= 31");
        let mut out = Self::identity(n);
        if n > 0 {
            let mask = (1usize << n) - 1;
            out.x[0] = (index & mask) as u64;
            out.z[0] = ((index >> n) & mask) as u64;
        }
        out
    }
}

/// Product of two Pauli strings, phase dropped.
pub fn compose_pauli(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    let mut out = p.clone();
    out.compose_assign(q)?;
    Ok(out)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.get(q).label())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses a label such as `"XIZY"`, qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        let mut out = PauliString::identity(chars.len());
        for (q, c) in chars.into_iter().enumerate() {
            let p = Pauli::from_label(c).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("bad Pauli label {c:?} in {s:?}"),
            })?;
            out.set(q, p);
        }
        Ok(out)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn self_inverse() {
        assert!(compose_pauli(&ps("XI"), &ps("XI")).unwrap().is_identity());
    }

    #[test]
    fn x_times_z_is_y() {
        let out = compose_pauli(&ps("XI"), &ps("ZI")).unwrap();
        assert_eq!(out, ps("YI"));
        assert!(out.x_bit(0) && out.z_bit(0));
    }

    #[test]
    fn weight_of_product() {
        // XYI * IYZ = X I Z
        let out = compose_pauli(&ps("XYI"), &ps("IYZ")).unwrap();
        assert_eq!(out.weight(), 2);
        assert_eq!(out, ps("XIZ"));
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            compose_pauli(&ps("X"), &ps("XI")),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn multiword() {
        let mut p = PauliString::identity(130);
        p.set(0, Pauli::X);
        p.set(64, Pauli::Y);
        p.set(129, Pauli::Z);
        assert_eq!(p.weight(), 3);
        assert_eq!(p.support().collect::<Vec<_>>(), vec![0, 64, 129]);
        let back: PauliString = p.to_string().parse().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn commutation() {
        assert!(!ps("XI").commutes_with(&ps("ZI")).unwrap());
        assert!(ps("XX").commutes_with(&ps("ZZ")).unwrap());
        assert!(ps("XI").commutes_with(&ps("IZ")).unwrap());
    }

    fn arb_pauli(n: usize) -> impl Strategy<Value = PauliString> {
        prop::collection::vec(0usize..4, n)
            .prop_map(move |v| PauliString::from_sparse(n, v.into_iter().enumerate().map(|(q, i)| (q, Pauli::ALL[i]))))
    }

    proptest! {
        #[test]
        fn compose_is_commutative_and_involutive(a in arb_pauli(70), b in arb_pauli(70)) {
            let ab = compose_pauli(&a, &b).unwrap();
            prop_assert_eq!(&ab, &compose_pauli(&b, &a).unwrap());
            prop_assert_eq!(compose_pauli(&ab, &b).unwrap(), a.clone());
            prop_assert!(a.weight() <= 70);
            prop_assert_eq!(a.is_identity(), a.weight() == 0);
        }

        #[test]
        fn label_and_dense_index_round_trip(a in arb_pauli(5)) {
            prop_assert_eq!(a.to_string().parse::<PauliString>().unwrap(), a.clone());
            prop_assert_eq!(PauliString::from_dense_index(5, a.dense_index()), a);
        }
    }
}
