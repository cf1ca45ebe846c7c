//! Cyclic cluster states: transfer-matrix payoffs, exact values by
//! exhaustive search, closed-form and spectral bounds, and the invariant
//! polytope.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::ClassicalStrategy;
use crate::gf2::BitVec;
use crate::num::{
    dyadic, fmt_decimal, fmt_over, pow2, ratio, round_up_dyadic, sqrt_lower, sqrt_upper, SLACK_BITS,
};

pub const DEFAULT_CLUSTER_CAP: usize = 14;
/// Entries of length-`n` products stay below `3·1.85^n`, far inside `i64`.
pub const MAX_TRANSFER_N: usize = 64;
/// Precision of the intermediate irrational brackets.
const WORK_BITS: u32 = 256;

/// A 3×3 integer matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransferMatrix3(pub [[i64; 3]; 3]);

impl TransferMatrix3 {
    pub fn identity() -> Self {
        TransferMatrix3([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    }

    pub fn mul(&self, o: &Self) -> Self {
        TransferMatrix3(mul3(&self.0, &o.0))
    }

    pub fn trace(&self) -> i64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn transpose(&self) -> Self {
        let a = &self.0;
        TransferMatrix3(std::array::from_fn(|i| std::array::from_fn(|j| a[j][i])))
    }
}

#[inline]
fn mul3(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> [[i64; 3]; 3] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j])
    })
}

/// `tr(a · b)` without forming the product.
#[inline]
fn trace_of_product(a: &[[i64; 3]; 3], b: &[[i64; 3]; 3]) -> i64 {
    let mut t = 0;
    for i in 0..3 {
        for k in 0..3 {
            t += a[i][k] * b[k][i];
        }
    }
    t
}

#[inline]
fn sign(bit: u8) -> i64 {
    if bit & 1 == 0 {
        1
    } else {
        -1
    }
}

pub fn reduced_transfer(u: bool, v: bool) -> TransferMatrix3 {
    let (u, v) = (u8::from(u), u8::from(v));
    TransferMatrix3([
        [1, sign(u), sign(u + v)],
        [1, 0, 0],
        [0, sign(u + v), sign(u + 1)],
    ])
}

/// Two-bond transfer matrix; row `2x_{j−1} + x_j`, column `2x_j' + x_{j+1}`.
pub fn full_transfer(u: bool, v: bool) -> [[i64; 4]; 4] {
    let (u, v) = (u8::from(u), u8::from(v));
    std::array::from_fn(|row| {
        std::array::from_fn(|col| {
            let (xl, xj) = ((row >> 1) as u8, (row & 1) as u8);
            let (xj2, xr) = ((col >> 1) as u8, (col & 1) as u8);
            if xj != xj2 {
                0
            } else {
                sign(xl * xj * xr + u * xj + v * xj * (xl + xr))
            }
        })
    })
}

/// Factors `T = Q R` with `Q` 4×3 and `R` 3×4 such that `R Q = T̃`.
pub fn transfer_factors(u: bool, v: bool) -> ([[i64; 3]; 4], [[i64; 4]; 3]) {
    let (u8u, u8v) = (u8::from(u), u8::from(v));
    let q = [
        [1, 0, 0],
        [0, sign(u8u), sign(u8u + u8v)],
        [1, 0, 0],
        [0, sign(u8u + u8v), sign(u8u + 1)],
    ];
    let r = [[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]];
    (q, r)
}

/// Per-site `(u_j, v_j)` of a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyUV {
    pub u: BitVec,
    pub v: BitVec,
}

impl StrategyUV {
    pub fn zeros(n: usize) -> Self {
        StrategyUV {
            u: BitVec::zeros(n),
            v: BitVec::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// A strategy answering 0 to the identity and Z questions that realises
    /// `(u, v)` on the cycle game.
    pub fn to_strategy(&self) -> ClassicalStrategy {
        let n = self.n();
        let mut s = ClassicalStrategy::zeros(n);
        for j in 0..n {
            let (u, v) = (self.u.get(j), self.v.get(j));
            s.b.set(4 * j + 1, u);
            s.b.set(4 * j + 2, u ^ v);
        }
        s
    }

    /// `(u, v)` induced by an arbitrary strategy, together with the
    /// constant term `Σ_j b^I_j` of `A·b`.
    pub fn from_strategy(s: &ClassicalStrategy) -> (StrategyUV, bool) {
        let n = s.b.len() / 4;
        let b = |j: usize, k: usize| s.b.get(4 * (j % n) + k);
        let mut out = StrategyUV::zeros(n);
        let mut constant = false;
        for j in 0..n {
            let (l, r) = ((j + n - 1) % n, (j + 1) % n);
            let u = b(l, 0) ^ b(j, 0) ^ b(r, 0) ^ b(l, 3) ^ b(j, 1) ^ b(r, 3);
            let v = b(j, 0) ^ b(j, 1) ^ b(j, 2) ^ b(j, 3);
            out.u.set(j, u);
            out.v.set(j, v);
            constant ^= b(j, 0);
        }
        (out, constant)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cyclic cluster needs n >= 3, got {n}"
        )));
    }
    if n > MAX_TRANSFER_N {
        return Err(Error::CapExceeded {
            what: "transfer product length",
            value: n,
            cap: MAX_TRANSFER_N,
        });
    }
    Ok(())
}

/// `f_n = tr Π T̃(u_j, v_j)`.
pub fn payoff(s: &StrategyUV) -> Result<i64> {
    check_n(s.n())?;
    let mut p = TransferMatrix3::identity();
    for j in 0..s.n() {
        p = p.mul(&reduced_transfer(s.u.get(j), s.v.get(j)));
    }
    Ok(p.trace())
}

/// `f_n` from the 4×4 two-bond matrices.
pub fn payoff_full(s: &StrategyUV) -> Result<i64> {
    check_n(s.n())?;
    let mut p = [[0i64; 4]; 4];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = 1;
    }
    for j in 0..s.n() {
        let t = full_transfer(s.u.get(j), s.v.get(j));
        p = std::array::from_fn(|i| {
            std::array::from_fn(|k| (0..4).map(|m| p[i][m] * t[m][k]).sum())
        });
    }
    Ok((0..4).map(|i| p[i][i]).sum())
}

/// `f_n` as the signed sum over all `x ∈ F2^n`.
pub fn payoff_brute_force(s: &StrategyUV) -> Result<i64> {
    let n = s.n();
    check_n(n)?;
    if n > 24 {
        return Err(Error::CapExceeded {
            what: "brute-force payoff length",
            value: n,
            cap: 24,
        });
    }
    let mut total = 0i64;
    for x in 0..1u64 << n {
        let bit = |j: usize| (x >> (j % n) & 1) as u8;
        let mut e = 0u8;
        for j in 0..n {
            let (l, m, r) = (bit(j + n - 1), bit(j), bit(j + 1));
            e ^= l & m & r;
            e ^= u8::from(s.u.get(j)) & m;
            e ^= u8::from(s.v.get(j)) & m & (l ^ r);
        }
        total += sign(e);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterValue {
    pub n: usize,
    pub value: BigRational,
    pub max_trace: i64,
    pub min_trace: i64,
    /// Lexicographically smallest `(u, v)` attaining the optimum (`u`
    /// first, site 1 most significant).
    pub witness: StrategyUV,
    /// Set when `−min_trace` beats `max_trace`; the optimum then flips
    /// every answer of one player.
    pub negated: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Extremes {
    max: i64,
    max_key: u64,
    min: i64,
    min_key: u64,
}

impl Extremes {
    fn new() -> Self {
        Extremes {
            max: i64::MIN,
            max_key: u64::MAX,
            min: i64::MAX,
            min_key: u64::MAX,
        }
    }

    #[inline]
    fn update(&mut self, t: i64, key: impl Fn() -> u64) {
        if t >= self.max {
            let k = key();
            if t > self.max || k < self.max_key {
                self.max = t;
                self.max_key = k;
            }
        }
        if t <= self.min {
            let k = key();
            if t < self.min || k < self.min_key {
                self.min = t;
                self.min_key = k;
            }
        }
    }

    fn merge(mut self, o: Extremes) -> Extremes {
        self.update_pair(o.max, o.max_key, true);
        self.update_pair(o.min, o.min_key, false);
        self
    }

    fn update_pair(&mut self, t: i64, k: u64, is_max: bool) {
        if is_max {
            if t > self.max || (t == self.max && k < self.max_key) {
                self.max = t;
                self.max_key = k;
            }
        } else if t < self.min || (t == self.min && k < self.min_key) {
            self.min = t;
            self.min_key = k;
        }
    }
}

struct Search {
    n: usize,
    mats: [[[i64; 3]; 3]; 4],
    pairs: [[[i64; 3]; 3]; 16],
}

impl Search {
    /// `s = 2u + v` at site `j` contributes to the `(u, v)` key.
    #[inline]
    fn key_bits(&self, j: usize, s: usize) -> u64 {
        let n = self.n;
        let pos = n - 1 - j;
        (((s >> 1) as u64) << (n + pos)) | (((s & 1) as u64) << pos)
    }

    fn dfs(&self, j: usize, prefix: &[[i64; 3]; 3], key: u64, acc: &mut Extremes) {
        let n = self.n;
        if j == n - 2 {
            for (p, m) in self.pairs.iter().enumerate() {
                let t = trace_of_product(prefix, m);
                acc.update(t, || {
                    key | self.key_bits(n - 2, p >> 2) | self.key_bits(n - 1, p & 3)
                });
            }
            return;
        }
        for s in 0..4 {
            let next = mul3(prefix, &self.mats[s]);
            self.dfs(j + 1, &next, key | self.key_bits(j, s), acc);
        }
    }
}

pub fn classical_value_cluster(n: usize) -> Result<ClusterValue> {
    classical_value_cluster_capped(n, DEFAULT_CLUSTER_CAP)
}

/// Exhaustive maximum of `tr Π T̃` over all `4^n` choices of `(u, v)`.
pub fn classical_value_cluster_capped(n: usize, cap: usize) -> Result<ClusterValue> {
    check_n(n)?;
    if n > cap || n > 31 {
        return Err(Error::CapExceeded {
            what: "cluster size",
            value: n,
            cap: cap.min(31),
        });
    }
    let mats: [[[i64; 3]; 3]; 4] =
        std::array::from_fn(|s| reduced_transfer(s >> 1 == 1, s & 1 == 1).0);
    let pairs = std::array::from_fn(|p| mul3(&mats[p >> 2], &mats[p & 3]));
    let search = Search { n, mats, pairs };
    // fixed split over the first sites so the result does not depend on
    // the worker count
    let split = (n - 2).min(3);
    let tasks: Vec<(usize, [[i64; 3]; 3], u64)> = (0..1usize << (2 * split))
        .map(|t| {
            let mut p = TransferMatrix3::identity().0;
            let mut key = 0;
            for j in 0..split {
                let s = (t >> (2 * (split - 1 - j))) & 3;
                p = mul3(&p, &mats[s]);
                key |= search.key_bits(j, s);
            }
            (split, p, key)
        })
        .collect();
    let ext = tasks
        .par_iter()
        .map(|(j, p, key)| {
            let mut acc = Extremes::new();
            search.dfs(*j, p, *key, &mut acc);
            acc
        })
        .reduce(Extremes::new, Extremes::merge);
    let negated = -ext.min > ext.max;
    let (best, key) = if negated {
        (-ext.min, ext.min_key)
    } else {
        (ext.max, ext.max_key)
    };
    let mut witness = StrategyUV::zeros(n);
    for j in 0..n {
        let pos = n - 1 - j;
        witness.u.set(j, key >> (n + pos) & 1 == 1);
        witness.v.set(j, key >> pos & 1 == 1);
    }
    Ok(ClusterValue {
        n,
        value: value_from_trace(n, &BigInt::from(best)),
        max_trace: ext.max,
        min_trace: ext.min,
        witness,
        negated,
    })
}

/// `½ + t / 2^{n+1}`.
fn value_from_trace(n: usize, t: &BigInt) -> BigRational {
    ratio(1, 2) + dyadic(t.clone(), n as u32 + 1)
}

/// Power sums `λ0^k + λ+^k + λ−^k` of the roots of `λ³ − 2λ − 2`.
pub fn power_sum(n: usize) -> BigInt {
    let mut p: Vec<BigInt> = vec![3.into(), 0.into(), 4.into()];
    for k in 3..=n {
        let next = 2 * &p[k - 2] + 2 * &p[k - 3];
        p.push(next);
    }
    p.swap_remove(n)
}

pub fn lower_bound_closed_form(n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cyclic cluster needs n >= 3, got {n}"
        )));
    }
    Ok(value_from_trace(n, &power_sum(n)))
}

/// `(a, b)` with `(2 + √2)^m = a + b√2`.
fn pow_two_plus_sqrt2(m: usize) -> (BigInt, BigInt) {
    let (mut a, mut b) = (BigInt::one(), BigInt::zero());
    for _ in 0..m {
        // (a + b√2)(2 + √2) = (2a + 2b) + (a + 2b)√2
        let na = 2 * &a + 2 * &b;
        let nb = &a + 2 * &b;
        a = na;
        b = nb;
    }
    (a, b)
}

/// `s1^n + s2^n + s3^n` with `s_i²` the eigenvalues `2 ± √2, 2` of
/// `T̃ T̃ᵀ`, as an upper bound (exact for even `n`).
pub fn singular_value_sum_upper(n: usize) -> BigRational {
    let m = n / 2;
    let (a, b) = pow_two_plus_sqrt2(m);
    let a_r = BigRational::from_integer(a.clone());
    let b_r = BigRational::from_integer(b);
    if n.is_multiple_of(2) {
        return BigRational::from_integer(2 * a + pow2(m as u32));
    }
    let two = ratio(2, 1);
    let s2_lo = sqrt_lower(&two, WORK_BITS);
    let s2_hi = sqrt_upper(&two, WORK_BITS);
    let s1_hi = sqrt_upper(&(&two + &s2_hi), WORK_BITS);
    let s3_hi = sqrt_upper(&(&two - &s2_lo), WORK_BITS);
    let big = (&a_r + &b_r * &s2_hi) * s1_hi;
    let mid = BigRational::from_integer(pow2(m as u32)) * &s2_hi;
    let small = (&a_r - &b_r * &s2_lo) * s3_hi;
    big + mid + small
}

/// `½ + (s1^n + s2^n + s3^n)/2^{n+1}`, rounded up onto the `2^−64` grid for
/// odd `n`.
pub fn singular_value_bound(n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cyclic cluster needs n >= 3, got {n}"
        )));
    }
    let v = ratio(1, 2) + singular_value_sum_upper(n) * dyadic(BigInt::one(), n as u32 + 1);
    Ok(if n.is_multiple_of(2) {
        v
    } else {
        round_up_dyadic(&v, SLACK_BITS)
    })
}

/// An element `a + bλ + cλ²` of `Q[λ]/(λ³ − 2λ − 2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicFieldElement {
    pub coeffs: [BigRational; 3],
}

impl CubicFieldElement {
    pub fn new(a: BigRational, b: BigRational, c: BigRational) -> Self {
        CubicFieldElement { coeffs: [a, b, c] }
    }

    pub fn from_integer(a: i64) -> Self {
        Self::new(ratio(a, 1), ratio(0, 1), ratio(0, 1))
    }

    pub fn lambda() -> Self {
        Self::new(ratio(0, 1), ratio(1, 1), ratio(0, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        CubicFieldElement {
            coeffs: std::array::from_fn(|i| &self.coeffs[i] + &o.coeffs[i]),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CubicFieldElement {
            coeffs: std::array::from_fn(|i| &self.coeffs[i] - &o.coeffs[i]),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut prod: [BigRational; 5] = std::array::from_fn(|_| BigRational::zero());
        for i in 0..3 {
            for j in 0..3 {
                prod[i + j] += &self.coeffs[i] * &o.coeffs[j];
            }
        }
        // λ⁴ = 2λ² + 2λ, λ³ = 2λ + 2
        let [c0, c1, c2, c3, c4] = prod;
        let two = ratio(2, 1);
        CubicFieldElement {
            coeffs: [
                c0 + &two * &c3,
                c1 + &two * &c3 + &two * &c4,
                c2 + &two * &c4,
            ],
        }
    }

    pub fn pow(&self, mut e: usize) -> Self {
        let mut base = self.clone();
        let mut out = Self::from_integer(1);
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        out
    }

    /// Bounds on the value at `λ0` given `lo <= λ0 <= hi` with `lo > 0`.
    pub fn eval_interval(&self, lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
        let mut low = BigRational::zero();
        let mut high = BigRational::zero();
        let powers_lo = [BigRational::one(), lo.clone(), lo * lo];
        let powers_hi = [BigRational::one(), hi.clone(), hi * hi];
        for k in 0..3 {
            let c = &self.coeffs[k];
            if c.is_negative() {
                low += c * &powers_hi[k];
                high += c * &powers_lo[k];
            } else {
                low += c * &powers_lo[k];
                high += c * &powers_hi[k];
            }
        }
        (low, high)
    }

    /// Sign of the value at the real root `λ0`.
    pub fn sign(&self) -> Ordering {
        if self.is_zero() {
            return Ordering::Equal;
        }
        let mut bits = 64;
        loop {
            let (lo, hi) = lambda0_bracket(bits);
            let (a, b) = self.eval_interval(&lo, &hi);
            if a.is_positive() {
                return Ordering::Greater;
            }
            if b.is_negative() {
                return Ordering::Less;
            }
            // λ³ − 2λ − 2 is irreducible, so a nonzero element cannot
            // vanish at λ0 and refinement terminates
            bits *= 2;
        }
    }
}

fn cubic(x: &BigRational) -> BigRational {
    x * x * x - ratio(2, 1) * x - ratio(2, 1)
}

/// Dyadic bracket `[lo, hi]` around `λ0` with `hi − lo <= 2^−bits`.
pub fn lambda0_bracket(bits: u32) -> (BigRational, BigRational) {
    static CACHE: OnceLock<(BigRational, BigRational)> = OnceLock::new();
    if bits <= WORK_BITS {
        let (lo, hi) = CACHE.get_or_init(|| bisect(WORK_BITS));
        return (lo.clone(), hi.clone());
    }
    bisect(bits)
}

fn bisect(bits: u32) -> (BigRational, BigRational) {
    let mut lo = ratio(17, 10);
    let mut hi = ratio(18, 10);
    debug_assert!(cubic(&lo).is_negative() && cubic(&hi).is_positive());
    let width = dyadic(BigInt::one(), bits);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / ratio(2, 1);
        if cubic(&mid).is_positive() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

pub fn lambda0_f64() -> f64 {
    crate::num::to_f64(&lambda0_bracket(64).0)
}

/// `λ0^n` as an upper-rounded rational.
fn lambda0_pow_upper(n: usize) -> BigRational {
    let p = CubicFieldElement::lambda().pow(n);
    let (lo, hi) = lambda0_bracket(WORK_BITS);
    p.eval_interval(&lo, &hi).1
}

/// `min(1, ½ + 3λ0^n/2^{n+1})`, rounded up onto the `2^−64` grid.
pub fn jsr_upper_bound(n: usize) -> Result<BigRational> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cyclic cluster needs n >= 3, got {n}"
        )));
    }
    let v = ratio(1, 2) + ratio(3, 1) * lambda0_pow_upper(n) * dyadic(BigInt::one(), n as u32 + 1);
    Ok(round_up_dyadic(&v, SLACK_BITS).min(ratio(1, 1)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FidelityThreshold {
    /// `3(λ0/2)^n`, rounded up.
    pub rigorous: BigRational,
    /// `2 p*_cl − 1` when the exact value was computed.
    pub exact: Option<BigRational>,
}

pub fn fidelity_threshold(n: usize, cap: usize) -> Result<FidelityThreshold> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "cyclic cluster needs n >= 3, got {n}"
        )));
    }
    let rigorous = round_up_dyadic(
        &(ratio(3, 1) * lambda0_pow_upper(n) * dyadic(BigInt::one(), n as u32)),
        SLACK_BITS,
    );
    let exact = if n <= cap {
        Some(fidelity_from_value(
            &classical_value_cluster_capped(n, cap)?.value,
        ))
    } else {
        None
    };
    Ok(FidelityThreshold { rigorous, exact })
}

pub fn fidelity_from_value(p: &BigRational) -> BigRational {
    ratio(2, 1) * p - ratio(1, 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterRow {
    pub n: usize,
    pub lower: BigRational,
    pub exact: BigRational,
}

impl ClusterRow {
    pub fn f_c(&self) -> BigRational {
        fidelity_from_value(&self.exact)
    }

    pub fn csv(&self) -> String {
        let den = pow2(self.n as u32);
        format!(
            "{},{},{},{}",
            self.n,
            fmt_over(&self.lower, &den),
            fmt_over(&self.exact, &den),
            fmt_decimal(&self.f_c(), 4)
        )
    }
}

pub const CLUSTER_TABLE_HEADER: &str = "n,lower_bound,exact,F_c";

/// Rows `3..=n_max` of the exact-value table.
pub fn cluster_table(n_max: usize, cap: usize) -> Result<Vec<ClusterRow>> {
    if n_max > cap {
        return Err(Error::CapExceeded {
            what: "cluster size",
            value: n_max,
            cap,
        });
    }
    (3..=n_max)
        .map(|n| {
            Ok(ClusterRow {
                n,
                lower: lower_bound_closed_form(n)?,
                exact: classical_value_cluster_capped(n, cap)?.value,
            })
        })
        .collect()
}

pub fn cluster_table_csv(rows: &[ClusterRow]) -> String {
    let mut s = String::from(CLUSTER_TABLE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv());
        s.push('\n');
    }
    s
}

type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Supporting planes `n·x <= d` (unit `n`) of the convex hull, found by
/// testing every triple of points.
fn hull_facets(points: &[Vec3]) -> Vec<(Vec3, f64)> {
    let scale = points
        .iter()
        .map(|p| dot(p, p).sqrt())
        .fold(0.0, f64::max)
        .max(1.0);
    let eps = 1e-12 * scale;
    let mut facets: Vec<(Vec3, f64)> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                let nrm = cross(&sub(&points[j], &points[i]), &sub(&points[k], &points[i]));
                let len = dot(&nrm, &nrm).sqrt();
                if len < 1e-9 * scale * scale {
                    continue;
                }
                let nrm = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                let d = dot(&nrm, &points[i]);
                let (mut above, mut below) = (false, false);
                for p in points {
                    let s = dot(&nrm, p) - d;
                    above |= s > eps;
                    below |= s < -eps;
                    if above && below {
                        break;
                    }
                }
                let facet = match (above, below) {
                    (false, _) => (nrm, d),
                    (true, false) => ([-nrm[0], -nrm[1], -nrm[2]], -d),
                    (true, true) => continue,
                };
                let dup = facets.iter().any(|(m, e)| {
                    (dot(m, &facet.0) - 1.0).abs() < 1e-12 && (e - facet.1).abs() < eps
                });
                if !dup {
                    facets.push(facet);
                }
            }
        }
    }
    facets
}

/// Points lying on at least three distinct facets, without repeats.
fn hull_vertices(points: &[Vec3], facets: &[(Vec3, f64)]) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for p in points {
        let tight = facets
            .iter()
            .filter(|(n, d)| (dot(n, p) - d).abs() < 1e-9)
            .count();
        if tight >= 3
            && !out
                .iter()
                .any(|w| (0..3).all(|k| (w[k] - p[k]).abs() < 1e-12))
        {
            out.push(*p);
        }
    }
    out
}

/// The points `P1, P2, P3` for a given `λ` and all their sign reflections.
pub fn polytope_vertices(lambda: f64) -> Vec<Vec3> {
    let l = lambda;
    let s = (4.0 * l * l + 8.0 * l + 6.0).sqrt();
    let base = [
        [l * (l + 1.0), l + 1.0, 1.0],
        [l + 2.0, l + 1.0, (l + 2.0) / l],
        [2.0 * (l * l + l - 1.0) / (l * l), (l + 2.0) / l, l + 1.0],
    ];
    let mut out = Vec::with_capacity(24);
    for p in base {
        for signs in 0..8 {
            out.push(std::array::from_fn(|k| {
                let v = p[k] / s;
                if signs >> k & 1 == 1 {
                    -v
                } else {
                    v
                }
            }));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeReport {
    pub lambda: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub vertices: usize,
    /// Largest excess of an image `T̃ p` over the facets of `ratio·P`.
    pub max_violation_images: f64,
    /// Largest excess of a vertex of `ratio·P` over the facets of the hull
    /// of the images.
    pub max_violation_vertices: f64,
    /// Same, against the images closed under the three mirror reflections.
    pub max_violation_vertices_symmetric: f64,
    pub pass: bool,
}

/// Checks `ratio·P = conv(Σ P)` for the polytope built at `λ0`.
pub fn verify_invariant_polytope(tolerance: f64) -> Result<PolytopeReport> {
    let l = lambda0_f64();
    verify_polytope_with(l, l, tolerance)
}

/// Builds the polytope at `lambda` and tests it against the ratio `ratio`.
pub fn verify_polytope_with(lambda: f64, ratio: f64, tolerance: f64) -> Result<PolytopeReport> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let verts = polytope_vertices(lambda);
    let mats: Vec<[[f64; 3]; 3]> = (0..4)
        .map(|s| {
            let t = reduced_transfer(s >> 1 == 1, s & 1 == 1).0;
            std::array::from_fn(|i| std::array::from_fn(|j| t[i][j] as f64))
        })
        .collect();
    let images: Vec<Vec3> = mats
        .iter()
        .flat_map(|m| {
            verts
                .iter()
                .map(move |p| std::array::from_fn(|i| dot(&m[i], p)))
        })
        .collect();
    let p_facets = hull_facets(&verts);
    let img_facets = hull_facets(&images);
    let excess = |x: &Vec3, facets: &[(Vec3, f64)], scale: f64| {
        facets
            .iter()
            .map(|(nrm, d)| dot(nrm, x) - scale * d)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let max_violation_images = images
        .iter()
        .map(|y| excess(y, &p_facets, ratio))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let scaled: Vec<Vec3> = verts
        .iter()
        .map(|v| [ratio * v[0], ratio * v[1], ratio * v[2]])
        .collect();
    let worst = |facets: &[(Vec3, f64)]| {
        scaled
            .iter()
            .map(|x| excess(x, facets, 1.0))
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
    };
    let max_violation_vertices = worst(&img_facets);
    let mut mirrored: Vec<Vec3> = Vec::new();
    for y in hull_vertices(&images, &img_facets) {
        for signs in 0..8 {
            let m: Vec3 = std::array::from_fn(|k| if signs >> k & 1 == 1 { -y[k] } else { y[k] });
            if !mirrored
                .iter()
                .any(|w| (0..3).all(|k| (w[k] - m[k]).abs() < 1e-12))
            {
                mirrored.push(m);
            }
        }
    }
    let max_violation_vertices_symmetric = worst(&hull_facets(&mirrored));
    Ok(PolytopeReport {
        lambda,
        ratio,
        tolerance,
        vertices: verts.len(),
        max_violation_images,
        max_violation_vertices,
        max_violation_vertices_symmetric,
        pass: max_violation_images <= tolerance && max_violation_vertices <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_game, strategy_win_probability, QuerySet};
    use crate::num::to_f64;
    use crate::states::{graph_generators, GraphSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_uv(rng: &mut impl Rng, n: usize) -> StrategyUV {
        StrategyUV {
            u: BitVec::from_bools(&(0..n).map(|_| rng.random()).collect::<Vec<bool>>()),
            v: BitVec::from_bools(&(0..n).map(|_| rng.random()).collect::<Vec<bool>>()),
        }
    }

    #[test]
    fn reduced_transfer_literal() {
        assert_eq!(
            reduced_transfer(false, false).0,
            [[1, 1, 1], [1, 0, 0], [0, 1, -1]]
        );
        assert_eq!(reduced_transfer(false, false).trace(), 0);
        // det(λI − T̃(0,0)) = λ³ − 2λ − 2
        let t = reduced_transfer(false, false).0;
        for lam in -3i64..=3 {
            let m: [[i64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { lam - t[i][j] } else { -t[i][j] })
            });
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            assert_eq!(det, lam.pow(3) - 2 * lam - 2);
        }
    }

    #[test]
    fn singular_values_are_uniform() {
        let gram = [[3, 1, 0], [1, 1, 0], [0, 0, 2]];
        for s in 0..4 {
            let t = reduced_transfer(s >> 1 == 1, s & 1 == 1);
            assert_eq!(t.mul(&t.transpose()).0, gram);
        }
        // eigenvalues 2 + √2, 2, 2 − √2
        let g: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| gram[i][j] as f64));
        for ev in [2.0 + 2f64.sqrt(), 2.0, 2.0 - 2f64.sqrt()] {
            let m: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| if i == j { g[i][j] - ev } else { g[i][j] })
            });
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            assert!(det.abs() < 1e-12);
        }
    }

    #[test]
    fn factorization_identity() {
        for s in 0..4 {
            let (u, v) = (s >> 1 == 1, s & 1 == 1);
            let (q, r) = transfer_factors(u, v);
            let t = full_transfer(u, v);
            for i in 0..4 {
                for k in 0..4 {
                    assert_eq!((0..3).map(|m| q[i][m] * r[m][k]).sum::<i64>(), t[i][k]);
                }
            }
            let rq: [[i64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|k| (0..4).map(|m| r[i][m] * q[m][k]).sum())
            });
            assert_eq!(rq, reduced_transfer(u, v).0);
        }
        assert_eq!(
            full_transfer(false, false),
            [[1, 1, 0, 0], [0, 0, 1, 1], [1, 1, 0, 0], [0, 0, 1, -1]]
        );
    }

    #[test]
    fn payoff_examples() {
        assert_eq!(payoff(&StrategyUV::zeros(3)).unwrap(), 6);
        assert_eq!(payoff(&StrategyUV::zeros(6)).unwrap(), 28);
        assert!(payoff(&StrategyUV::zeros(2)).is_err());
    }

    #[test]
    fn three_payoff_formulas_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=10 {
            for _ in 0..200 {
                let s = random_uv(&mut rng, n);
                let a = payoff(&s).unwrap();
                assert_eq!(a, payoff_full(&s).unwrap());
                assert_eq!(a, payoff_brute_force(&s).unwrap());
            }
        }
    }

    #[test]
    fn payoff_matches_game_strategies() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 3..=7 {
            let g = build_game(
                &graph_generators(&GraphSpec::cycle(n).unwrap()).unwrap(),
                &QuerySet::Full,
            )
            .unwrap();
            for _ in 0..40 {
                let b = ClassicalStrategy {
                    b: BitVec::from_bools(&(0..4 * n).map(|_| rng.random()).collect::<Vec<bool>>()),
                };
                let (uv, constant) = StrategyUV::from_strategy(&b);
                let f = payoff(&uv).unwrap() * if constant { -1 } else { 1 };
                let p = strategy_win_probability(&g, &b).unwrap();
                assert_eq!(p, value_from_trace(n, &BigInt::from(f)));
                let back = uv.to_strategy();
                assert_eq!(StrategyUV::from_strategy(&back), (uv.clone(), false));
            }
        }
    }

    #[test]
    fn exact_values_small() {
        let v = classical_value_cluster(3).unwrap();
        assert_eq!(v.value, ratio(7, 8));
        assert!(!v.negated);
        let g = build_game(
            &graph_generators(&GraphSpec::cycle(6).unwrap()).unwrap(),
            &QuerySet::Full,
        )
        .unwrap();
        let v6 = classical_value_cluster(6).unwrap();
        assert_eq!(
            strategy_win_probability(&g, &v6.witness.to_strategy()).unwrap(),
            v6.value
        );
        assert_eq!(v6.value, crate::game::classical_value(&g).unwrap().value);
        assert!(classical_value_cluster(2).is_err());
        assert!(matches!(
            classical_value_cluster_capped(9, 8),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn exact_matches_brute_force_search() {
        for n in 3..=6 {
            let v = classical_value_cluster(n).unwrap();
            let mut best: Option<(i64, (Vec<bool>, Vec<bool>))> = None;
            let mut min = i64::MAX;
            for k in 0..1u64 << (2 * n) {
                let s = StrategyUV {
                    u: BitVec::from_u64(k & ((1 << n) - 1), n),
                    v: BitVec::from_u64(k >> n, n),
                };
                let t = payoff(&s).unwrap();
                min = min.min(t);
                let key = (s.u.to_bools(), s.v.to_bools());
                let better = match &best {
                    None => true,
                    Some((bt, bk)) => t > *bt || (t == *bt && key < *bk),
                };
                if better {
                    best = Some((t, key));
                }
            }
            let (bt, (bu, bv)) = best.unwrap();
            assert_eq!(v.max_trace, bt);
            assert_eq!(v.min_trace, min);
            assert_eq!((v.witness.u.to_bools(), v.witness.v.to_bools()), (bu, bv));
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(power_sum(3), BigInt::from(6));
        assert_eq!(power_sum(6), BigInt::from(28));
        assert_eq!(lower_bound_closed_form(3).unwrap(), ratio(7, 8));
        assert_eq!(lower_bound_closed_form(6).unwrap(), ratio(46, 64));
        assert_eq!(lower_bound_closed_form(16).unwrap(), ratio(37376, 65536));
        for n in 3..=12 {
            assert_eq!(
                BigInt::from(payoff(&StrategyUV::zeros(n)).unwrap()),
                power_sum(n)
            );
        }
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(singular_value_sum_upper(6), ratio(48, 1));
        assert_eq!(singular_value_bound(6).unwrap(), ratio(7, 8));
        assert_eq!(singular_value_sum_upper(4), ratio(16, 1));
        assert_eq!(singular_value_bound(4).unwrap(), ratio(1, 1));
        for n in 3..=30 {
            let s1 = (2.0 + 2f64.sqrt()).sqrt();
            let s3 = (2.0 - 2f64.sqrt()).sqrt();
            let float = s1.powi(n as i32) + 2f64.sqrt().powi(n as i32) + s3.powi(n as i32);
            let exact = to_f64(&singular_value_sum_upper(n));
            assert!((exact - float).abs() <= 1e-9 * float, "n={n}");
            let b = singular_value_bound(n).unwrap();
            assert!(to_f64(&b) >= 0.5 + float / 2f64.powi(n as i32 + 1) - 1e-15);
        }
        // the dominant term shrinks by s1/2 per step
        let gap = |n| to_f64(&singular_value_bound(n).unwrap()) - 0.5;
        assert!(gap(41) / gap(40) <= 0.9239 + 1e-3);
    }

    #[test]
    fn cubic_field_arithmetic() {
        let l = CubicFieldElement::lambda();
        let cube = l.pow(3);
        assert_eq!(
            cube,
            CubicFieldElement::new(ratio(2, 1), ratio(2, 1), ratio(0, 1))
        );
        let p = l.pow(7);
        let q = l.pow(3).mul(&l.pow(4));
        assert_eq!(p, q);
        let (lo, hi) = lambda0_bracket(128);
        assert!(&hi - &lo <= dyadic(BigInt::one(), 128));
        assert!((to_f64(&lo) - 1.7693).abs() < 1e-4);
        assert_eq!(
            l.sub(&CubicFieldElement::from_integer(2)).sign(),
            Ordering::Less
        );
        // λ0 − 1.769 > 0 and λ0 − 1.7693 < 0
        let c =
            |num: i64, den: i64| CubicFieldElement::new(ratio(num, den), ratio(0, 1), ratio(0, 1));
        assert_eq!(l.sub(&c(1769, 1000)).sign(), Ordering::Greater);
        assert_eq!(l.sub(&c(17693, 10000)).sign(), Ordering::Less);
        for n in 1..40 {
            let [a, b, cc] = &l.pow(n).coeffs;
            assert!(!a.is_negative() && !b.is_negative() && !cc.is_negative());
            let (lo, hi) = l.pow(n).eval_interval(&lo, &hi);
            let f = lambda0_f64().powi(n as i32);
            assert!(to_f64(&lo) <= f * (1.0 + 1e-12) && to_f64(&hi) >= f * (1.0 - 1e-12));
        }
        assert_eq!(l.add(&l).sub(&l), l);
    }

    #[test]
    fn jsr_examples() {
        assert_eq!(jsr_upper_bound(3).unwrap(), ratio(1, 1));
        let unclamped = 0.5 + 3.0 * (2.0 * lambda0_f64() + 2.0) / 16.0;
        assert!((unclamped - 1.538).abs() < 1e-3);
        assert!(jsr_upper_bound(30).unwrap() < ratio(7, 8));
        let b = to_f64(&jsr_upper_bound(30).unwrap());
        assert!(b >= 0.5 + 3.0 * lambda0_f64().powi(30) / 2f64.powi(31));
    }

    #[test]
    fn transfer_products_stay_below_jsr() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l0 = lambda0_f64();
        let mats: Vec<TransferMatrix3> = (0..4)
            .map(|s| reduced_transfer(s >> 1 == 1, s & 1 == 1))
            .collect();
        for n in 3..=20 {
            let limit = 3.0 * l0.powi(n) * (1.0 + 1e-12);
            for _ in 0..100_000 {
                let mut p = TransferMatrix3::identity();
                for _ in 0..n {
                    p = p.mul(&mats[rng.random_range(0..4)]);
                }
                assert!((p.trace().abs() as f64) <= limit);
            }
        }
    }

    #[test]
    fn polytope_checks() {
        let r = verify_invariant_polytope(1e-9).unwrap();
        assert_eq!(r.vertices, 24);
        // invariant: every image stays inside λ0·P
        assert!(r.max_violation_images <= 1e-9, "{r:?}");
        // λ0·P is the hull of the images only after mirroring them; half of
        // its vertices are not images of any vertex
        assert!(r.max_violation_vertices_symmetric <= 1e-9, "{r:?}");
        assert!(r.max_violation_vertices > 0.5, "{r:?}");
        assert!(!r.pass);
        let l = lambda0_f64();
        let scaled = verify_polytope_with(l, 1.01 * l, 1e-9).unwrap();
        assert!(!scaled.pass);
        assert!(scaled.max_violation_vertices_symmetric > 1e-9);
        assert!(scaled.max_violation_images <= 1e-9);
        let off = verify_polytope_with(1.8, 1.8, 1e-9).unwrap();
        assert!(!off.pass);
        assert!(off.max_violation_images > 1e-9 || off.max_violation_vertices_symmetric > 1e-9);
        assert!(verify_invariant_polytope(0.0).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let f = fidelity_threshold(3, DEFAULT_CLUSTER_CAP).unwrap();
        assert_eq!(fmt_decimal(f.exact.as_ref().unwrap(), 4), "0.7500");
        let f6 = fidelity_threshold(6, DEFAULT_CLUSTER_CAP).unwrap();
        assert_eq!(fmt_decimal(f6.exact.as_ref().unwrap(), 4), "0.4375");
        assert_eq!(
            fmt_decimal(&fidelity_from_value(&ratio(37376, 65536)), 4),
            "0.1406"
        );
        assert!(f6.rigorous >= f6.exact.unwrap());
        assert!(fidelity_threshold(20, DEFAULT_CLUSTER_CAP)
            .unwrap()
            .exact
            .is_none());
    }

    #[test]
    fn table_rows() {
        let rows = cluster_table(4, DEFAULT_CLUSTER_CAP).unwrap();
        assert_eq!(
            cluster_table_csv(&rows),
            "n,lower_bound,exact,F_c\n3,7/8,7/8,0.7500\n4,12/16,14/16,0.7500\n"
        );
        assert!(cluster_table(15, 14).is_err());
    }
}
