//! The 24-element single-qubit Clifford group.
//!
//! Each element is stored by its signed images `U X U†` and `U Z U†`. The
//! signs are what distinguish, for instance, the identity from a Pauli gate:
//! the phase-free (symplectic) action alone only separates 6 classes.
//!
//! # Canonical ordering
//!
//! Element `id = 4 * class + pauli` is the gate sequence of symplectic class
//! representative `class` followed by the Pauli gate `pauli`, with
//!
//! | class | representative (time order) |
//! |-------|-----------------------------|
//! | 0     | identity                    |
//! | 1     | H                           |
//! | 2     | S                           |
//! | 3     | H, then S                   |
//! | 4     | S, then H                   |
//! | 5     | H, then S, then H           |
//!
//! and `pauli` in the order I, X, Y, Z. Ids 0..4 are therefore the Pauli
//! gates I, X, Y, Z, id 4 is H and id 8 is S. This ordering is part of the
//! circuit file format and must not change.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::pauli::Pauli;

/// A Hermitian single-qubit Pauli with a sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedPauli {
    pub pauli: Pauli,
    pub negative: bool,
}

impl SignedPauli {
    pub const fn plus(pauli: Pauli) -> Self {
        SignedPauli { pauli, negative: false }
    }

    pub const fn minus(pauli: Pauli) -> Self {
        SignedPauli { pauli, negative: true }
    }

    fn key(self) -> usize {
        (self.pauli as usize) * 2 + self.negative as usize
    }
}

/// Phase exponent `e` (a power of `i`) in `P1 P2 = i^e P3` for Hermitian Paulis.
pub(crate) fn product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> u8 {
    let (x1, z1, x2, z2) = (x1 as i32, z1 as i32, x2 as i32, z2 as i32);
    let x3 = x1 ^ x2;
    let z3 = z1 ^ z2;
    (x1 * z1 + x2 * z2 + 2 * z1 * x2 - x3 * z3).rem_euclid(4) as u8
}

/// Conjugates a signed Pauli through a Clifford given by its signed images.
fn conjugate_with(images: &[SignedPauli; 2], p: SignedPauli) -> SignedPauli {
    let (x, z) = p.pauli.bits();
    // P(x, z) = i^{xz} X^x Z^z, so U P U† = i^{xz} (U X U†)^x (U Z U†)^z.
    let mut phase = (x && z) as u8 + 2 * p.negative as u8;
    let (mut ax, mut az) = (false, false);
    for (present, img) in [(x, images[0]), (z, images[1])] {
        if !present {
            continue;
        }
        let (bx, bz) = img.pauli.bits();
        phase += 2 * img.negative as u8 + product_phase(ax, az, bx, bz);
        ax ^= bx;
        az ^= bz;
    }
    let phase = phase % 4;
    debug_assert!(phase % 2 == 0, "conjugate of a Hermitian Pauli must be Hermitian");
    SignedPauli { pauli: Pauli::from_bits(ax, az), negative: phase == 2 }
}

/// Generators used to build class representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    H,
    S,
}

impl Generator {
    fn images(self) -> [SignedPauli; 2] {
        match self {
            Generator::H => [SignedPauli::plus(Pauli::Z), SignedPauli::plus(Pauli::X)],
            Generator::S => [SignedPauli::plus(Pauli::Y), SignedPauli::plus(Pauli::Z)],
        }
    }
}

const CLASS_REPS: [&[Generator]; 6] = [
    &[],
    &[Generator::H],
    &[Generator::S],
    &[Generator::H, Generator::S],
    &[Generator::S, Generator::H],
    &[Generator::H, Generator::S, Generator::H],
];

fn pauli_gate_images(p: Pauli) -> [SignedPauli; 2] {
    // A Pauli gate flips the sign of every Pauli it anticommutes with.
    let (px, pz) = p.bits();
    [
        SignedPauli { pauli: Pauli::X, negative: pz },
        SignedPauli { pauli: Pauli::Z, negative: px },
    ]
}

struct Table {
    images: [[SignedPauli; 2]; 24],
    // phase-free action on Pauli index (I, X, Y, Z)
    action: [[Pauli; 4]; 24],
    by_key: [u8; 64],
    compose: [[u8; 24]; 24],
    inverse: [u8; 24],
}

fn table() -> &'static Table {
    static TABLE: OnceLock<Table> = OnceLock::new();
    TABLE.get_or_init(build_table)
}

fn build_table() -> Table {
    let mut images = [[SignedPauli::plus(Pauli::I); 2]; 24];
    for (class, rep) in CLASS_REPS.iter().enumerate() {
        for (pi, &p) in Pauli::ALL.iter().enumerate() {
            let mut img = [SignedPauli::plus(Pauli::X), SignedPauli::plus(Pauli::Z)];
            for g in rep.iter() {
                let gi = g.images();
                img = [conjugate_with(&gi, img[0]), conjugate_with(&gi, img[1])];
            }
            let pg = pauli_gate_images(p);
            img = [conjugate_with(&pg, img[0]), conjugate_with(&pg, img[1])];
            images[4 * class + pi] = img;
        }
    }

    let mut by_key = [u8::MAX; 64];
    for (id, img) in images.iter().enumerate() {
        let key = img[0].key() * 8 + img[1].key();
        assert_eq!(by_key[key], u8::MAX, "duplicate Clifford in table");
        by_key[key] = id as u8;
    }

    let mut action = [[Pauli::I; 4]; 24];
    for (id, img) in images.iter().enumerate() {
        for p in Pauli::ALL {
            action[id][p as usize] = conjugate_with(img, SignedPauli::plus(p)).pauli;
        }
    }

    let mut compose = [[0u8; 24]; 24];
    for first in 0..24 {
        for then in 0..24 {
            let img = [
                conjugate_with(&images[then], images[first][0]),
                conjugate_with(&images[then], images[first][1]),
            ];
            compose[first][then] = by_key[img[0].key() * 8 + img[1].key()];
            assert_ne!(compose[first][then], u8::MAX, "table not closed");
        }
    }

    let mut inverse = [0u8; 24];
    for (g, inv) in inverse.iter_mut().enumerate() {
        *inv = (0..24).find(|&h| compose[g][h] == 0).expect("inverse exists") as u8;
    }

    Table { images, action, by_key, compose, inverse }
}

/// One of the 24 single-qubit Clifford gates, by canonical id.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Clifford1Q(u8);

impl Clifford1Q {
    pub const COUNT: usize = 24;
    pub const I: Clifford1Q = Clifford1Q(0);
    pub const X: Clifford1Q = Clifford1Q(1);
    pub const Y: Clifford1Q = Clifford1Q(2);
    pub const Z: Clifford1Q = Clifford1Q(3);
    pub const H: Clifford1Q = Clifford1Q(4);
    pub const S: Clifford1Q = Clifford1Q(8);
    pub const S_DAG: Clifford1Q = Clifford1Q(11);

    pub fn new(id: u8) -> Option<Self> {
        ((id as usize) < Self::COUNT).then_some(Clifford1Q(id))
    }

    pub fn all() -> impl Iterator<Item = Clifford1Q> {
        (0..Self::COUNT as u8).map(Clifford1Q)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// The Pauli gate with the same label.
    pub fn from_pauli(p: Pauli) -> Self {
        Clifford1Q(p as u8)
    }

    /// `Some(p)` when this gate is the Pauli gate `p`.
    pub fn as_pauli(self) -> Option<Pauli> {
        (self.0 < 4).then(|| Pauli::ALL[self.0 as usize])
    }

    /// Signed images `[U X U†, U Z U†]`.
    pub fn images(self) -> [SignedPauli; 2] {
        table().images[self.0 as usize]
    }

    /// Looks a gate up by its signed images.
    pub fn from_images(x_image: SignedPauli, z_image: SignedPauli) -> Option<Self> {
        let id = table().by_key[x_image.key() * 8 + z_image.key()];
        (id != u8::MAX).then_some(Clifford1Q(id))
    }

    /// Phase-free conjugation `U P U†`.
    #[inline]
    pub fn conjugate(self, p: Pauli) -> Pauli {
        table().action[self.0 as usize][p as usize]
    }

    /// Signed conjugation `U P U†`.
    pub fn conjugate_signed(self, p: SignedPauli) -> SignedPauli {
        conjugate_with(&table().images[self.0 as usize], p)
    }

    /// The gate that applies `self` and then `then`.
    pub fn then(self, then: Clifford1Q) -> Clifford1Q {
        Clifford1Q(table().compose[self.0 as usize][then.0 as usize])
    }

    pub fn inverse(self) -> Clifford1Q {
        Clifford1Q(table().inverse[self.0 as usize])
    }

    /// Rotations about the Z axis: `{I, Z, S, S†}`, the gates that map Z to +Z.
    pub fn is_z_rotation(self) -> bool {
        self.images()[1] == SignedPauli::plus(Pauli::Z)
    }

    /// Gate sequence (time order) of H and S generators followed by a Pauli gate.
    pub fn decomposition(self) -> (&'static [Generator], Pauli) {
        let class = self.0 as usize / 4;
        (CLASS_REPS[class], Pauli::ALL[self.0 as usize % 4])
    }
}

impl TryFrom<u8> for Clifford1Q {
    type Error = String;

    fn try_from(id: u8) -> Result<Self, String> {
        Clifford1Q::new(id).ok_or_else(|| format!("Clifford id {id} out of range"))
    }
}

impl From<Clifford1Q> for u8 {
    fn from(c: Clifford1Q) -> u8 {
        c.0
    }
}

impl fmt::Debug for Clifford1Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

impl fmt::Display for Clifford1Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}
