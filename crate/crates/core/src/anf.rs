//! Boolean polynomials over F2, truth tables and nonlinearity.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::gf2::{self, BitVec};

/// Default cap on truth-table size (number of variables).
pub const TRUTH_TABLE_CAP: usize = 24;
/// Cap for exact second-order nonlinearity by enumeration of RM(2, r).
pub const NL2_CAP: usize = 7;

/// A monomial is a sorted list of 0-based variable indices; the empty list
/// is the constant 1.
pub type Monomial = Vec<usize>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanPolynomial {
    n_vars: usize,
    monomials: BTreeSet<Monomial>,
}

impl BooleanPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        BooleanPolynomial {
            n_vars,
            monomials: BTreeSet::new(),
        }
    }

    pub fn one(n_vars: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.monomials.insert(Vec::new());
        p
    }

    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.monomials.insert(vec![i]);
        p
    }

    /// Sum of the given monomials mod 2 (repeats cancel).
    pub fn from_monomials(
        n_vars: usize,
        monomials: impl IntoIterator<Item = Monomial>,
    ) -> Result<Self> {
        let mut p = Self::zero(n_vars);
        for mut m in monomials {
            m.sort_unstable();
            m.dedup();
            if let Some(&last) = m.last() {
                if last >= n_vars {
                    return Err(Error::InvalidInput(format!(
                        "variable index {} out of range for {n_vars} variables",
                        last + 1
                    )));
                }
            }
            p.toggle(m);
        }
        Ok(p)
    }

    /// Reduces integer coefficients mod 2.
    pub fn from_integer_coefficients(n_vars: usize, coeffs: &BTreeMap<Monomial, i64>) -> Self {
        let mut p = Self::zero(n_vars);
        for (m, &c) in coeffs {
            if c.rem_euclid(2) == 1 {
                p.monomials.insert(m.clone());
            }
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn monomials(&self) -> &BTreeSet<Monomial> {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.monomials.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Monomials of exactly degree `d`.
    pub fn homogeneous_part(&self, d: usize) -> impl Iterator<Item = &Monomial> {
        self.monomials.iter().filter(move |m| m.len() == d)
    }

    pub fn toggle(&mut self, m: Monomial) {
        if !self.monomials.remove(&m) {
            self.monomials.insert(m);
        }
    }

    pub fn add(&self, other: &BooleanPolynomial) -> BooleanPolynomial {
        let mut out = self.clone();
        for m in &other.monomials {
            out.toggle(m.clone());
        }
        out
    }

    pub fn mul(&self, other: &BooleanPolynomial) -> BooleanPolynomial {
        let mut out = Self::zero(self.n_vars.max(other.n_vars));
        for a in &self.monomials {
            for b in &other.monomials {
                let mut m: Monomial = a.iter().chain(b).copied().collect();
                m.sort_unstable();
                m.dedup();
                out.toggle(m);
            }
        }
        out
    }

    pub fn evaluate(&self, x: &BitVec) -> Result<bool> {
        check_len(self.n_vars, x.len())?;
        Ok(self
            .monomials
            .iter()
            .filter(|m| m.iter().all(|&i| x.get(i)))
            .count()
            % 2
            == 1)
    }

    /// Evaluation at the little-endian index `x` (`n_vars <= 64`).
    pub fn evaluate_index(&self, x: u64) -> bool {
        self.monomials
            .iter()
            .filter(|m| m.iter().all(|&i| x >> i & 1 == 1))
            .count()
            % 2
            == 1
    }

    /// Truth table via the binary Möbius transform.
    pub fn truth_table(&self) -> Result<TruthTable> {
        self.truth_table_capped(TRUTH_TABLE_CAP)
    }

    pub fn truth_table_capped(&self, cap: usize) -> Result<TruthTable> {
        if self.n_vars > cap {
            return Err(Error::CapExceeded {
                what: "truth-table variables",
                value: self.n_vars,
                cap,
            });
        }
        let len = 1usize << self.n_vars;
        let mut bits = BitVec::zeros(len);
        for m in &self.monomials {
            let idx: usize = m.iter().map(|&i| 1usize << i).sum();
            bits.flip(idx);
        }
        let mut words = bits.words().to_vec();
        mobius_in_place(&mut words, self.n_vars);
        Ok(TruthTable {
            n_vars: self.n_vars,
            bits: BitVec::from_words(len, words),
        })
    }

    /// `D_a p(x) = p(x) + p(x + a)`, computed on monomials: each monomial
    /// `S` contributes every proper subset `T` with `S \ T ⊆ supp(a)`.
    pub fn derivative(&self, a: &BitVec) -> Result<BooleanPolynomial> {
        check_len(self.n_vars, a.len())?;
        let mut out = Self::zero(self.n_vars);
        for m in &self.monomials {
            let hit: Vec<usize> = m.iter().copied().filter(|&i| a.get(i)).collect();
            let k = hit.len();
            for mask in 1u64..(1u64 << k) {
                let removed: Vec<usize> = (0..k)
                    .filter(|&b| mask >> b & 1 == 1)
                    .map(|b| hit[b])
                    .collect();
                let t: Monomial = m.iter().copied().filter(|i| !removed.contains(i)).collect();
                out.toggle(t);
            }
        }
        Ok(out)
    }

    /// Substitutes constants for the variables in `fixed` and renumbers the
    /// remaining variables in increasing order.
    pub fn restrict(&self, fixed: &BTreeMap<usize, bool>) -> BooleanPolynomial {
        let free: Vec<usize> = (0..self.n_vars)
            .filter(|i| !fixed.contains_key(i))
            .collect();
        let mut renumber = vec![usize::MAX; self.n_vars];
        for (new, &old) in free.iter().enumerate() {
            renumber[old] = new;
        }
        let mut out = Self::zero(free.len());
        for m in &self.monomials {
            if m.iter().any(|i| fixed.get(i) == Some(&false)) {
                continue;
            }
            let t: Monomial = m
                .iter()
                .filter(|i| !fixed.contains_key(i))
                .map(|&i| renumber[i])
                .collect();
            out.toggle(t);
        }
        out
    }

    /// Substitutes `images[i]` for `x_i`; the result lives in `n_vars`
    /// variables.
    pub fn compose(
        &self,
        images: &[BooleanPolynomial],
        n_vars: usize,
    ) -> Result<BooleanPolynomial> {
        check_len(self.n_vars, images.len())?;
        let mut out = Self::zero(n_vars);
        for m in &self.monomials {
            let mut term = Self::one(n_vars);
            for &i in m {
                term = term.mul(&images[i]);
            }
            out = out.add(&term);
        }
        out.n_vars = n_vars;
        Ok(out)
    }

    /// Number of points where the polynomial is 1 (`n_vars <= 24`).
    pub fn weight(&self) -> Result<usize> {
        Ok(self.truth_table()?.weight())
    }
}

/// In-place Möbius transform (ANF ↔ truth table) on a packed table of
/// `2^n` bits.
fn mobius_in_place(words: &mut [u64], n: usize) {
    const MASKS: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    for (i, &mask) in MASKS.iter().enumerate().take(n.min(6)) {
        let s = 1 << i;
        for w in words.iter_mut() {
            *w ^= (*w & mask) << s;
        }
    }
    for i in 6..n {
        let step = 1usize << (i - 6);
        for block in words.chunks_mut(2 * step) {
            let (lo, hi) = block.split_at_mut(step);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h ^= *l;
            }
        }
    }
}

impl fmt::Display for BooleanPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return f.write_str("0");
        }
        // higher degree first, then lexicographic
        let mut ms: Vec<&Monomial> = self.monomials.iter().collect();
        ms.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let terms: Vec<String> = ms
            .iter()
            .map(|m| {
                if m.is_empty() {
                    "1".to_string()
                } else {
                    m.iter()
                        .map(|i| format!("x{}", i + 1))
                        .collect::<Vec<_>>()
                        .join("*")
                }
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl fmt::Debug for BooleanPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BooleanPolynomial[{}]({})", self.n_vars, self)
    }
}

impl BooleanPolynomial {
    /// Parses the text format `x1*x2 + x3 + 1` in `n_vars` variables.
    pub fn parse(text: &str, n_vars: usize) -> Result<Self> {
        let text = text.trim();
        if text == "0" {
            return Ok(Self::zero(n_vars));
        }
        let mut monomials = Vec::new();
        for term in text.split('+') {
            let term = term.trim();
            if term == "1" {
                monomials.push(Vec::new());
                continue;
            }
            let mut m = Vec::new();
            for factor in term.split('*') {
                let factor = factor.trim();
                let idx: usize = factor
                    .strip_prefix('x')
                    .and_then(|d| d.parse().ok())
                    .filter(|&i: &usize| i >= 1)
                    .ok_or_else(|| Error::Parse(format!("invalid factor {factor:?}")))?;
                m.push(idx - 1);
            }
            monomials.push(m);
        }
        Self::from_monomials(n_vars, monomials)
    }
}

impl FromStr for BooleanPolynomial {
    type Err = Error;

    /// Infers the variable count from the largest index used.
    fn from_str(s: &str) -> Result<Self> {
        let max = s
            .split(|c: char| !c.is_ascii_alphanumeric())
            .filter_map(|t| t.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()))
            .max()
            .unwrap_or(0);
        Self::parse(s, max)
    }
}

/// Values `f(x)` for all `x ∈ F2^r`, index `i` holding `f` at the
/// little-endian bits of `i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TruthTable {
    n_vars: usize,
    bits: BitVec,
}

impl TruthTable {
    pub fn new(n_vars: usize, bits: BitVec) -> Result<Self> {
        check_len(1usize << n_vars, bits.len())?;
        Ok(TruthTable { n_vars, bits })
    }

    pub fn from_fn(n_vars: usize, f: impl Fn(u64) -> bool) -> Self {
        let len = 1usize << n_vars;
        let bits = BitVec::from_indices(len, (0..len).filter(|&i| f(i as u64)));
        TruthTable { n_vars, bits }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn bits(&self) -> &BitVec {
        &self.bits
    }

    pub fn get(&self, x: usize) -> bool {
        self.bits.get(x)
    }

    pub fn weight(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn to_hex(&self) -> String {
        self.bits.to_hex()
    }

    pub fn from_hex(s: &str, n_vars: usize) -> Result<Self> {
        let bits = BitVec::from_hex(s, 1usize << n_vars)
            .ok_or_else(|| Error::Parse(format!("invalid truth-table hex {s:?}")))?;
        Ok(TruthTable { n_vars, bits })
    }

    /// Inverse Möbius transform back to ANF.
    pub fn to_polynomial(&self) -> BooleanPolynomial {
        let mut words = self.bits.words().to_vec();
        mobius_in_place(&mut words, self.n_vars);
        let len = 1usize << self.n_vars;
        let monomials = (0..len)
            .filter(|&i| words[i / 64] >> (i % 64) & 1 == 1)
            .map(|i| (0..self.n_vars).filter(|&b| i >> b & 1 == 1).collect())
            .collect();
        BooleanPolynomial {
            n_vars: self.n_vars,
            monomials,
        }
    }
}

/// Walsh–Hadamard transform `W_f(u) = Σ_x (−1)^{f(x) + u·x}`.
pub fn walsh_transform(t: &TruthTable) -> Vec<i64> {
    let len = 1usize << t.n_vars;
    let mut w: Vec<i64> = (0..len).map(|i| if t.get(i) { -1 } else { 1 }).collect();
    let mut h = 1;
    while h < len {
        for block in w.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
    w
}

/// First-order nonlinearity `2^{r−1} − ½ max|W_f|`.
pub fn nl1(t: &TruthTable) -> u64 {
    let max = walsh_transform(t)
        .iter()
        .map(|w| w.unsigned_abs())
        .max()
        .unwrap_or(0);
    (1u64 << t.n_vars) / 2 - max / 2
}

/// Nearest affine function as `(u, constant)`, lowest `u` then lowest
/// constant among ties.
pub fn nearest_affine(t: &TruthTable) -> (u64, bool) {
    let w = walsh_transform(t);
    let max = w.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
    let u = w.iter().position(|v| v.unsigned_abs() == max).unwrap_or(0);
    // W < 0 means f agrees with 1 + u·x more often than not
    (u as u64, w[u] < 0)
}

/// Exact second-order nonlinearity: minimum distance to RM(2, r), found by a
/// Gray-code walk over the quadratic part with an inner walk over the
/// affine part. Requires `r <= 7`.
pub fn nl2_exact(t: &TruthTable) -> Result<u64> {
    let r = t.n_vars;
    if r > NL2_CAP {
        return Err(Error::CapExceeded {
            what: "nl2 variables",
            value: r,
            cap: NL2_CAP,
        });
    }
    let len = 1u32 << r;
    let table = |f: &dyn Fn(u32) -> bool| -> u128 {
        (0..len)
            .filter(|&x| f(x))
            .fold(0u128, |acc, x| acc | 1u128 << x)
    };
    let f = table(&|x| t.get(x as usize));
    let linear: Vec<u128> = (0..r).map(|i| table(&|x| x >> i & 1 == 1)).collect();
    let mut quad = Vec::new();
    for i in 0..r {
        for j in i + 1..r {
            quad.push(table(&|x| x >> i & 1 == 1 && x >> j & 1 == 1));
        }
    }
    let q = quad.len();
    // split the quadratic walk into independent blocks
    let block_bits = q.min(10);
    let outer = 1u64 << (q - block_bits);
    let best = (0..outer)
        .into_par_iter()
        .map(|hi| {
            let mut cur = f;
            for (k, qv) in quad.iter().enumerate().skip(block_bits) {
                if hi >> (k - block_bits) & 1 == 1 {
                    cur ^= qv;
                }
            }
            let mut best = u32::MAX;
            for i in 0..(1u64 << block_bits) {
                if i > 0 {
                    cur ^= quad[i.trailing_zeros() as usize];
                }
                best = best.min(affine_distance(cur, &linear, len));
            }
            best
        })
        .min()
        .unwrap_or(0);
    Ok(best as u64)
}

fn affine_distance(f: u128, linear: &[u128], len: u32) -> u32 {
    let mut cur = f;
    let mut best = u32::MAX;
    for i in 0..(1u64 << linear.len()) {
        if i > 0 {
            cur ^= linear[i.trailing_zeros() as usize];
        }
        let w = cur.count_ones();
        best = best.min(w.min(len - w));
    }
    best
}

/// A polynomial of degree at most 2, split into coupling, linear and
/// constant parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticForm {
    n_vars: usize,
    /// Row `i` holds the coefficients of `x_i x_j` for `j > i`.
    coupling: Vec<BitVec>,
    linear: BitVec,
    constant: bool,
}

impl QuadraticForm {
    pub fn from_polynomial(p: &BooleanPolynomial) -> Result<Self> {
        if p.degree() > 2 {
            return Err(Error::Precondition(format!(
                "polynomial of degree {} is not quadratic",
                p.degree()
            )));
        }
        let n = p.n_vars();
        let mut coupling = vec![BitVec::zeros(n); n];
        let mut linear = BitVec::zeros(n);
        let mut constant = false;
        for m in p.monomials() {
            match m.as_slice() {
                [] => constant = true,
                [i] => linear.set(*i, true),
                [i, j] => coupling[*i].set(*j, true),
                _ => unreachable!(),
            }
        }
        Ok(QuadraticForm {
            n_vars: n,
            coupling,
            linear,
            constant,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn linear(&self) -> &BitVec {
        &self.linear
    }

    pub fn constant(&self) -> bool {
        self.constant
    }

    pub fn coupling(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a != b && self.coupling[a].get(b)
    }

    /// Coupling plus its transpose.
    pub fn alternating_matrix(&self) -> Vec<BitVec> {
        let n = self.n_vars;
        let mut m = vec![BitVec::zeros(n); n];
        for i in 0..n {
            for j in self.coupling[i].iter_ones() {
                m[i].set(j, true);
                m[j].set(i, true);
            }
        }
        m
    }

    pub fn to_polynomial(&self) -> BooleanPolynomial {
        let mut ms = Vec::new();
        for i in 0..self.n_vars {
            for j in self.coupling[i].iter_ones() {
                ms.push(vec![i, j]);
            }
        }
        ms.extend(self.linear.iter_ones().map(|i| vec![i]));
        if self.constant {
            ms.push(Vec::new());
        }
        BooleanPolynomial::from_monomials(self.n_vars, ms).expect("indices in range")
    }
}

/// Rank of the alternating matrix of `q`; always even.
pub fn quadratic_rank(q: &QuadraticForm) -> usize {
    let m = q.alternating_matrix();
    if q.n_vars <= 64 {
        let mut rows: Vec<u64> = m.iter().map(BitVec::low_u64).collect();
        gf2::rank_u64(&mut rows)
    } else {
        gf2::rank(&m)
    }
}

/// Convenience: rank of the quadratic part of a degree ≤ 2 polynomial.
pub fn polynomial_rank(p: &BooleanPolynomial) -> Result<usize> {
    Ok(quadratic_rank(&QuadraticForm::from_polynomial(p)?))
}
