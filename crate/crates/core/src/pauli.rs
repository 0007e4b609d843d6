//! Generalized Pauli strings in symplectic bit-mask form.
//!
//! A string on `n` qubits is stored as two masks: bit `j` of `x` is set when
//! qubit `j` carries σx or σy, bit `j` of `z` when it carries σz or σy.
//! Products, commutation and commutators reduce to bitwise operations, and
//! phases are tracked exactly as powers of `i`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest qubit count a [`PauliString`] can hold.
pub const MAX_QUBITS: usize = 32;

/// Largest qubit count accepted by [`enumerate_paulis`] (4^10 ≈ 10^6 strings).
pub const MAX_ENUM_QUBITS: usize = 10;

/// A fourth root of unity, stored as the exponent `k` in `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: i64) -> Self {
        Phase(k.rem_euclid(4) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        use num_complex::Complex64 as C;
        match self.0 {
            0 => C::new(1.0, 0.0),
            1 => C::new(0.0, 1.0),
            2 => C::new(-1.0, 0.0),
            _ => C::new(0.0, -1.0),
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+1",
            1 => "+i",
            2 => "-1",
            _ => "-i",
        })
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    /// Next letter in the cycle X → Y → Z → X; `I` maps to itself.
    pub fn cycle_next(self) -> Self {
        match self {
            Letter::I => Letter::I,
            Letter::X => Letter::Y,
            Letter::Y => Letter::Z,
            Letter::Z => Letter::X,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// A generalized Pauli σ_I on `n_qubits` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n_qubits: u8,
    x: u64,
    z: u64,
}

/// A Pauli string times a fourth root of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    pub phase: Phase,
    pub pauli: PauliString,
}

/// `[a, b] = 2 · phase · pauli`; `phase` is always ±i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commutator {
    pub phase: Phase,
    pub pauli: PauliString,
}

impl Commutator {
    /// The coefficient `2·phase`, which is purely imaginary.
    pub fn coefficient(&self) -> num_complex::Complex64 {
        self.phase.to_complex() * 2.0
    }

    /// Imaginary part of the coefficient: `[a, b] = i · imag · pauli`, `imag = ±2`.
    pub fn imag(&self) -> f64 {
        if self.phase == Phase::I {
            2.0
        } else {
            -2.0
        }
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x: u64, z: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCap {
                what: "PauliString",
                n: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        let m = low_mask(n_qubits);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::InvalidPauli(format!(
                "masks x={x:#b} z={z:#b} exceed {n_qubits} qubits"
            )));
        }
        Ok(PauliString {
            n_qubits: n_qubits as u8,
            x,
            z,
        })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, 0, 0)
    }

    /// A string with a single non-identity letter on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Result<Self> {
        let mut letters = vec![Letter::I; n_qubits];
        if qubit >= n_qubits {
            return Err(Error::InvalidPauli(format!(
                "qubit {qubit} out of range for {n_qubits} qubits"
            )));
        }
        letters[qubit] = letter;
        Self::from_letters(&letters)
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        let (mut x, mut z) = (0u64, 0u64);
        for (j, l) in letters.iter().enumerate().take(64) {
            let (bx, bz) = l.bits();
            x |= (bx as u64) << j;
            z |= (bz as u64) << j;
        }
        Self::new(letters.len(), x, z)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits as usize
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support_mask(&self) -> u64 {
        self.x | self.z
    }

    /// Number of qubits acted on nontrivially.
    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn letter(&self, qubit: usize) -> Letter {
        Letter::from_bits((self.x >> qubit) & 1 == 1, (self.z >> qubit) & 1 == 1)
    }

    /// Qubits in the support, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits())
            .filter(|&j| (self.support_mask() >> j) & 1 == 1)
            .collect()
    }

    /// Number of σy factors; the dense matrix carries a factor `i^{ny}`.
    pub(crate) fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    fn check_same(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits(),
                found: other.n_qubits(),
            });
        }
        Ok(())
    }

    /// `self · other = phase · pauli`.
    pub fn multiply(&self, other: &PauliString) -> Result<PhasedPauli> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PhasedPauli {
        // σ = i^{|x∧z|} X^x Z^z; moving Z^{z1} past X^{x2} costs (−1)^{|z1∧x2|}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let k = self.y_count() as i64 + other.y_count() as i64 + 2 * (self.z & other.x).count_ones() as i64
            - (x & z).count_ones() as i64;
        PhasedPauli {
            phase: Phase::from_exponent(k),
            pauli: PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        }
    }

    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// `[self, other]`, or `None` when the two commute.
    pub fn commutator(&self, other: &PauliString) -> Result<Option<Commutator>> {
        self.check_same(other)?;
        Ok(self.commutator_unchecked(other))
    }

    pub(crate) fn commutator_unchecked(&self, other: &PauliString) -> Option<Commutator> {
        if self.commutes_unchecked(other) {
            return None;
        }
        let p = self.mul_unchecked(other);
        Some(Commutator {
            phase: p.phase,
            pauli: p.pauli,
        })
    }

    /// Dense index `x | z << n`, used for coefficient arrays of length 4^n.
    pub fn index(&self) -> usize {
        (self.x as usize) | ((self.z as usize) << self.n_qubits)
    }

    pub fn from_index(n_qubits: usize, index: usize) -> Result<Self> {
        let m = low_mask(n_qubits) as usize;
        Self::new(n_qubits, (index & m) as u64, ((index >> n_qubits) & m) as u64)
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n_qubits, self.z, self.x).cmp(&(other.n_qubits, other.z, other.x))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n_qubits() {
            write!(f, "{}", self.letter(j).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(Error::InvalidPauli(format!("unexpected character {other:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidPauli("empty string".into()));
        }
        PauliString::from_letters(&letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}", self.phase, self.pauli)
    }
}

/// Number of weight-`k` strings on `n` qubits, C(n,k)·3^k.
pub fn count_weight(n_qubits: usize, k: usize) -> u128 {
    if k > n_qubits {
        return 0;
    }
    binomial(n_qubits, k) * 3u128.pow(k as u32)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All Pauli strings on `n_qubits` qubits, optionally only those with weight ≤ `max_weight`.
///
/// Strings are yielded in dense-index order. Capped at [`MAX_ENUM_QUBITS`].
pub fn enumerate_paulis(n_qubits: usize, max_weight: Option<usize>) -> Result<impl Iterator<Item = PauliString>> {
    if n_qubits == 0 || n_qubits > MAX_ENUM_QUBITS {
        return Err(Error::QubitCap {
            what: "enumerate_paulis",
            n: n_qubits,
            cap: MAX_ENUM_QUBITS,
        });
    }
    let total = 1usize << (2 * n_qubits);
    let m = low_mask(n_qubits);
    Ok((0..total)
        .map(move |idx| PauliString {
            n_qubits: n_qubits as u8,
            x: idx as u64 & m,
            z: (idx as u64 >> n_qubits) & m,
        })
        .filter(move |p| max_weight.is_none_or(|k| p.weight() <= k)))
}
