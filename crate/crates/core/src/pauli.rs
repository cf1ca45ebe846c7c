//! Signed Pauli strings in symplectic form.
//!
//! An operator is stored as `i^e · σ_1 ⊗ … ⊗ σ_n` where each `σ_j` is the
//! Hermitian letter I, X, Y or Z given by `(x_j, z_j)`. Site 1 is bit 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_len, Error, Result};
use crate::gf2::{self, BitVec};

/// Single-site Pauli letter, encoded I=0, X=1, Y=2, Z=3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(c: usize) -> Letter {
        Letter::ALL[c & 3]
    }

    /// Applies the cyclic map X→Y→Z→X `power` times; I is fixed.
    pub fn rotate(self, power: u8) -> Letter {
        let mut l = self;
        for _ in 0..power % 3 {
            l = match l {
                Letter::I => Letter::I,
                Letter::X => Letter::Y,
                Letter::Y => Letter::Z,
                Letter::Z => Letter::X,
            };
        }
        l
    }

    pub fn to_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// Binary symplectic vector `(x | z)` of length `2n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symplectic {
    pub x: BitVec,
    pub z: BitVec,
}

impl Symplectic {
    pub fn zeros(n: usize) -> Self {
        Symplectic {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn weight_y(&self) -> usize {
        self.x.and_count(&self.z)
    }

    pub fn add(&self, other: &Symplectic) -> Symplectic {
        Symplectic {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        }
    }

    /// Concatenation `x ‖ z` as one bit vector of length `2n`.
    pub fn to_bitvec(&self) -> BitVec {
        let n = self.n();
        let mut v = BitVec::zeros(2 * n);
        for i in self.x.iter_ones() {
            v.set(i, true);
        }
        for i in self.z.iter_ones() {
            v.set(n + i, true);
        }
        v
    }

    /// Symplectic form `x·z' + z·x'` mod 2.
    pub fn symplectic_product(&self, other: &Symplectic) -> bool {
        (self.x.and_count(&other.z) + self.z.and_count(&other.x)) % 2 == 1
    }
}

/// Returns `e` with `σ_{v1+v2} = i^e σ_{v1} σ_{v2}`.
pub fn product_phase(v1: &Symplectic, v2: &Symplectic) -> Result<u8> {
    check_len(v1.n(), v2.n())?;
    let sum = v1.add(v2);
    let wy = v1.weight_y() as i64 + v2.weight_y() as i64 - sum.weight_y() as i64;
    let cross = 2 * v1.x.and_count(&v2.z) as i64;
    Ok((wy + cross).rem_euclid(4) as u8)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    v: Symplectic,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator {
            v: Symplectic::zeros(n),
            phase: 0,
        }
    }

    pub fn new(x: BitVec, z: BitVec, i_exponent: u8) -> Result<Self> {
        check_len(x.len(), z.len())?;
        Ok(PauliOperator {
            v: Symplectic { x, z },
            phase: i_exponent % 4,
        })
    }

    pub fn from_symplectic(v: Symplectic, i_exponent: u8) -> Self {
        PauliOperator {
            v,
            phase: i_exponent % 4,
        }
    }

    pub fn from_letters(letters: &[Letter], i_exponent: u8) -> Self {
        let n = letters.len();
        let mut v = Symplectic::zeros(n);
        for (j, l) in letters.iter().enumerate() {
            let (x, z) = l.bits();
            v.x.set(j, x);
            v.z.set(j, z);
        }
        PauliOperator {
            v,
            phase: i_exponent % 4,
        }
    }

    /// Letter `letter` on `site`, identity elsewhere, sign +.
    pub fn single(n: usize, site: usize, letter: Letter) -> Self {
        let mut letters = vec![Letter::I; n];
        letters[site] = letter;
        Self::from_letters(&letters, 0)
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn x_bits(&self) -> &BitVec {
        &self.v.x
    }

    pub fn z_bits(&self) -> &BitVec {
        &self.v.z
    }

    pub fn symplectic(&self) -> &Symplectic {
        &self.v
    }

    pub fn i_exponent(&self) -> u8 {
        self.phase
    }

    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.v.x.get(site), self.v.z.get(site))
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.n()).map(|j| self.letter(j)).collect()
    }

    pub fn weight_y(&self) -> usize {
        self.v.weight_y()
    }

    pub fn is_identity_string(&self) -> bool {
        self.v.x.is_zero() && self.v.z.is_zero()
    }

    /// True when the overall factor is ±1.
    pub fn has_real_sign(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Sign bit: 1 iff the operator is `−σ`.
    pub fn sign_bit(&self) -> bool {
        self.phase == 2
    }

    pub fn negated(&self) -> Self {
        PauliOperator {
            v: self.v.clone(),
            phase: (self.phase + 2) % 4,
        }
    }

    /// Exact operator product `self · other`.
    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator> {
        let e = product_phase(&self.v, &other.v)?;
        Ok(PauliOperator {
            v: self.v.add(&other.v),
            phase: (self.phase + other.phase + 4 - e) % 4,
        })
    }

    pub fn commutes(&self, other: &PauliOperator) -> Result<bool> {
        check_len(self.n(), other.n())?;
        Ok(!self.v.symplectic_product(&other.v))
    }

    /// Applies a per-site letter rotation; phases are unchanged because the
    /// cyclic map is conjugation by a single-qubit Clifford.
    pub fn rotated(&self, powers: &[u8]) -> PauliOperator {
        let letters: Vec<Letter> = self
            .letters()
            .into_iter()
            .zip(powers)
            .map(|(l, &p)| l.rotate(p))
            .collect();
        Self::from_letters(&letters, self.phase)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        f.write_str(prefix)?;
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('\u{2212}') {
            (2, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("empty Pauli string {s:?}")));
        }
        let letters = body
            .chars()
            .map(|c| {
                Letter::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_letters(&letters, phase))
    }
}

/// Rank over F2 of the symplectic vectors of `ops`.
pub fn independence_check(ops: &[PauliOperator]) -> usize {
    let rows: Vec<BitVec> = ops.iter().map(|p| p.v.to_bitvec()).collect();
    gf2::rank(&rows)
}

/// A validated list of independent, pairwise commuting generators with
/// real signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerGenerators {
    n: usize,
    generators: Vec<PauliOperator>,
}

impl StabilizerGenerators {
    pub fn new(generators: Vec<PauliOperator>) -> Result<Self> {
        let n = match generators.first() {
            Some(g) => g.n(),
            None => return Err(Error::InvalidInput("no generators".into())),
        };
        Self::with_n(n, generators)
    }

    /// Like [`StabilizerGenerators::new`] but accepts an empty list.
    pub fn with_n(n: usize, generators: Vec<PauliOperator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            check_len(n, g.n())?;
            if !g.has_real_sign() {
                return Err(Error::ImaginaryPhase(i));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes(&generators[j])? {
                    return Err(Error::NonCommuting(i, j));
                }
            }
        }
        let rank = independence_check(&generators);
        if rank != generators.len() {
            return Err(Error::Dependent {
                rank,
                count: generators.len(),
            });
        }
        Ok(StabilizerGenerators { n, generators })
    }

    /// Parses one generator per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let gens = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::parse)
            .collect::<Result<Vec<PauliOperator>>>()?;
        Self::new(gens)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn signs(&self) -> Vec<bool> {
        self.generators.iter().map(|g| g.sign_bit()).collect()
    }

    /// `g_1^{x_1} ⋯ g_r^{x_r}` and its parity bit.
    pub fn group_element(&self, x: &BitVec) -> Result<(PauliOperator, bool)> {
        check_len(self.r(), x.len())?;
        let mut m = PauliOperator::identity(self.n);
        for i in x.iter_ones() {
            m = m.multiply(&self.generators[i])?;
        }
        if !m.has_real_sign() {
            return Err(Error::OddPhase);
        }
        let c = m.sign_bit();
        Ok((m, c))
    }

    /// Group element for the query index `x` (bit `i` is `x_{i+1}`).
    pub fn group_element_index(&self, x: u64) -> Result<(PauliOperator, bool)> {
        let r = self.r();
        let bits = BitVec::from_indices(r, (0..r.min(64)).filter(|&i| x >> i & 1 == 1));
        self.group_element(&bits)
    }

    /// All `2^r` elements indexed by little-endian `x`, built by a Gray-code
    /// walk (one multiplication per element).
    pub fn elements(&self) -> Result<Vec<PauliOperator>> {
        let r = self.r();
        if r >= 32 {
            return Err(Error::CapExceeded {
                what: "group enumeration generators",
                value: r,
                cap: 31,
            });
        }
        let size = 1usize << r;
        let mut out = vec![PauliOperator::identity(self.n); size];
        let mut cur = PauliOperator::identity(self.n);
        for i in 1..size as u64 {
            let k = i.trailing_zeros() as usize;
            cur = cur.multiply(&self.generators[k])?;
            if !cur.has_real_sign() {
                return Err(Error::OddPhase);
            }
            out[gf2::gray(i) as usize] = cur.clone();
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod dense {
    //! Dense Kronecker-product matrices with Gaussian-integer entries.
    use super::*;
    use num_complex::Complex;

    pub type C = Complex<i64>;
    pub type Mat = Vec<Vec<C>>;

    fn letter_matrix(l: Letter) -> Mat {
        let o = C::new(0, 0);
        let one = C::new(1, 0);
        let i = C::new(0, 1);
        match l {
            Letter::I => vec![vec![one, o], vec![o, one]],
            Letter::X => vec![vec![o, one], vec![one, o]],
            Letter::Y => vec![vec![o, -i], vec![i, o]],
            Letter::Z => vec![vec![one, o], vec![o, -one]],
        }
    }

    fn kron(a: &Mat, b: &Mat) -> Mat {
        let (ra, rb) = (a.len(), b.len());
        let mut out = vec![vec![C::new(0, 0); ra * rb]; ra * rb];
        for i in 0..ra {
            for j in 0..ra {
                for k in 0..rb {
                    for l in 0..rb {
                        out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn mul(a: &Mat, b: &Mat) -> Mat {
        let d = a.len();
        let mut out = vec![vec![C::new(0, 0); d]; d];
        for i in 0..d {
            for k in 0..d {
                if a[i][k] == C::new(0, 0) {
                    continue;
                }
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
        out
    }

    pub fn scale(a: &Mat, s: C) -> Mat {
        a.iter()
            .map(|row| row.iter().map(|&x| x * s).collect())
            .collect()
    }

    pub fn i_pow(e: u8) -> C {
        [C::new(1, 0), C::new(0, 1), C::new(-1, 0), C::new(0, -1)][(e % 4) as usize]
    }

    /// Dense matrix of a Pauli operator (qubit 1 is the leftmost factor).
    pub fn matrix(p: &PauliOperator) -> Mat {
        let mut m: Mat = vec![vec![C::new(1, 0)]];
        for l in p.letters() {
            m = kron(&m, &letter_matrix(l));
        }
        scale(&m, i_pow(p.i_exponent()))
    }
}
