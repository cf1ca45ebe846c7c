//! Stabilizer-testing games: incidence rows, parities, exact classical
//! values, refutations and coset restrictions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::anf::BooleanPolynomial;
use crate::error::{check_len, Error, Result};
use crate::gf2::{self, BitVec};
use crate::parityfn::group_polynomials;
use crate::pauli::{Letter, PauliOperator, StabilizerGenerators};

pub const DEFAULT_DIM_CAP: usize = 26;
pub const DEFAULT_QUERY_CAP: usize = 1 << 20;

/// Which group elements are asked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuerySet {
    Full,
    /// Fixed generator exponents (0-based variable index to value).
    Coset(BTreeMap<usize, bool>),
}

impl QuerySet {
    pub fn fixed(&self) -> BTreeMap<usize, bool> {
        match self {
            QuerySet::Full => BTreeMap::new(),
            QuerySet::Coset(a) => a.clone(),
        }
    }
}

impl FromStr for QuerySet {
    type Err = Error;

    /// `full` or `coset:x1=1,x3=0` (1-based variables).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(QuerySet::Full);
        }
        let Some(body) = s.strip_prefix("coset:") else {
            return Err(Error::Parse(format!("unknown query set '{s}'")));
        };
        let mut fixed = BTreeMap::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let bad = || Error::Parse(format!("bad coset assignment '{part}'"));
            let (var, val) = part.split_once('=').ok_or_else(bad)?;
            let idx: usize = var
                .trim()
                .strip_prefix('x')
                .ok_or_else(bad)?
                .parse()
                .map_err(|_| bad())?;
            let val = match val.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            if idx == 0 || fixed.insert(idx - 1, val).is_some() {
                return Err(bad());
            }
        }
        Ok(QuerySet::Coset(fixed))
    }
}

impl fmt::Display for QuerySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuerySet::Full => f.write_str("full"),
            QuerySet::Coset(a) => {
                let parts: Vec<String> = a
                    .iter()
                    .map(|(i, v)| format!("x{}={}", i + 1, u8::from(*v)))
                    .collect();
                write!(f, "coset:{}", parts.join(","))
            }
        }
    }
}

/// A game instance: one query per group element in the query set.
#[derive(Clone, Debug)]
pub struct GameInstance {
    n: usize,
    r: usize,
    queries: QuerySet,
    free: Vec<usize>,
    /// Letter codes, `n` per query.
    letters: Vec<u8>,
    parity: BitVec,
    /// Column `4j + code` of the incidence matrix, as a vector over queries.
    columns: Vec<BitVec>,
}

pub fn build_game(gens: &StabilizerGenerators, queries: &QuerySet) -> Result<GameInstance> {
    build_game_capped(gens, queries, DEFAULT_QUERY_CAP)
}

pub fn build_game_capped(
    gens: &StabilizerGenerators,
    queries: &QuerySet,
    query_cap: usize,
) -> Result<GameInstance> {
    let (n, r) = (gens.n(), gens.r());
    let fixed = queries.fixed();
    if let Some((&i, _)) = fixed.iter().find(|(&i, _)| i >= r) {
        return Err(Error::InvalidInput(format!(
            "coset fixes x{} but there are only {r} generators",
            i + 1
        )));
    }
    let free: Vec<usize> = (0..r).filter(|i| !fixed.contains_key(i)).collect();
    if free.len() >= usize::BITS as usize - 1 || (1usize << free.len()) > query_cap {
        return Err(Error::CapExceeded {
            what: "query count",
            value: 1usize.checked_shl(free.len() as u32).unwrap_or(usize::MAX),
            cap: query_cap,
        });
    }
    let count = 1usize << free.len();
    let g = gens.generators();
    let mut cur = PauliOperator::identity(n);
    for (&i, &v) in &fixed {
        if v {
            cur = cur.multiply(&g[i])?;
        }
    }
    let mut letters = vec![0u8; count * n];
    let mut parity = BitVec::zeros(count);
    let mut columns = vec![BitVec::zeros(count); 4 * n];
    for step in 0..count as u64 {
        if step > 0 {
            cur = cur.multiply(&g[free[step.trailing_zeros() as usize]])?;
        }
        if !cur.has_real_sign() {
            return Err(Error::OddPhase);
        }
        let q = gf2::gray(step) as usize;
        parity.set(q, cur.sign_bit());
        for j in 0..n {
            let code = cur.letter(j).code();
            letters[q * n + j] = code as u8;
            columns[4 * j + code].set(q, true);
        }
    }
    Ok(GameInstance {
        n,
        r,
        queries: queries.clone(),
        free,
        letters,
        parity,
        columns,
    })
}

impl GameInstance {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn query_set(&self) -> &QuerySet {
        &self.queries
    }

    pub fn query_count(&self) -> usize {
        self.parity.len()
    }

    pub fn parity(&self) -> &BitVec {
        &self.parity
    }

    pub fn columns(&self) -> &[BitVec] {
        &self.columns
    }

    /// Generator exponents of query `q`.
    pub fn query_point(&self, q: usize) -> BitVec {
        let mut x = BitVec::zeros(self.r);
        if let QuerySet::Coset(a) = &self.queries {
            for (&i, &v) in a {
                x.set(i, v);
            }
        }
        for (k, &i) in self.free.iter().enumerate() {
            if q >> k & 1 == 1 {
                x.set(i, true);
            }
        }
        x
    }

    pub fn query_letters(&self, q: usize) -> Vec<Letter> {
        self.letters[q * self.n..(q + 1) * self.n]
            .iter()
            .map(|&c| Letter::from_code(c as usize))
            .collect()
    }

    /// One-hot incidence row of query `q`, length `4n`.
    pub fn row(&self, q: usize) -> BitVec {
        BitVec::from_indices(
            4 * self.n,
            self.letters[q * self.n..(q + 1) * self.n]
                .iter()
                .enumerate()
                .map(|(j, &c)| 4 * j + c as usize),
        )
    }

    /// `(letters, parity)` pairs in query order, e.g. `("033", false)`.
    pub fn question_answer_pairs(&self) -> Vec<(String, bool)> {
        (0..self.query_count())
            .map(|q| {
                let s = self.letters[q * self.n..(q + 1) * self.n]
                    .iter()
                    .map(|c| char::from(b'0' + c))
                    .collect();
                (s, self.parity.get(q))
            })
            .collect()
    }

    fn ratio_of_wins(&self, distance: usize) -> BigRational {
        let q = self.query_count();
        BigRational::new(BigInt::from(q - distance), BigInt::from(q))
    }
}

/// Answers of every player to every letter: bit `4j + code`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassicalStrategy {
    pub b: BitVec,
}

impl ClassicalStrategy {
    pub fn zeros(n: usize) -> Self {
        ClassicalStrategy {
            b: BitVec::zeros(4 * n),
        }
    }

    pub fn answer(&self, site: usize, letter: Letter) -> bool {
        self.b.get(4 * site + letter.code())
    }

    pub fn to_hex(&self) -> String {
        self.b.to_hex()
    }
}

/// `A·b` as a vector over queries.
pub fn strategy_answers(g: &GameInstance, s: &ClassicalStrategy) -> Result<BitVec> {
    check_len(4 * g.n, s.b.len())?;
    let mut out = BitVec::zeros(g.query_count());
    for col in s.b.iter_ones() {
        out.xor_assign(&g.columns[col]);
    }
    Ok(out)
}

pub fn strategy_win_probability(g: &GameInstance, s: &ClassicalStrategy) -> Result<BigRational> {
    let ab = strategy_answers(g, s)?;
    Ok(g.ratio_of_wins(ab.distance(&g.parity)))
}

#[derive(Clone, Copy, Debug)]
pub struct ValueOptions {
    /// Force every answer to the identity question to 0.
    pub lhv: bool,
    pub dim_cap: usize,
}

impl Default for ValueOptions {
    fn default() -> Self {
        ValueOptions {
            lhv: false,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassicalValue {
    pub value: BigRational,
    /// Number of lost queries under the witness.
    pub distance: usize,
    pub witness: ClassicalStrategy,
    /// Dimension of the enumerated code.
    pub dim: usize,
}

pub fn classical_value(g: &GameInstance) -> Result<ClassicalValue> {
    classical_value_with(g, ValueOptions::default())
}

/// Exact optimum by enumerating the column span of `A` with a Gray code.
pub fn classical_value_with(g: &GameInstance, opts: ValueOptions) -> Result<ClassicalValue> {
    let allowed: Vec<usize> = (0..4 * g.n).filter(|c| !(opts.lhv && c % 4 == 0)).collect();
    let candidates: Vec<BitVec> = allowed.iter().map(|&c| g.columns[c].clone()).collect();
    let pivots: Vec<usize> = gf2::greedy_independent(&candidates)
        .into_iter()
        .map(|k| allowed[k])
        .collect();
    let d = pivots.len();
    if d > opts.dim_cap || d >= 63 {
        return Err(Error::CapExceeded {
            what: "image dimension",
            value: d,
            cap: opts.dim_cap,
        });
    }
    let basis: Vec<Vec<(usize, u64)>> = pivots
        .iter()
        .map(|&c| {
            g.columns[c]
                .words()
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, w)| w != 0)
                .collect()
        })
        .collect();
    let total = 1u64 << d;
    let block_bits = d.saturating_sub(8) as u32;
    let blocks = total >> block_bits;
    // key orders coefficient vectors so that smaller keys give
    // lexicographically smaller strategies
    let key = |coef: u64| -> u64 {
        if d == 0 {
            0
        } else {
            coef.reverse_bits() >> (64 - d)
        }
    };
    let best = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let start = blk << block_bits;
            let end = start + (1u64 << block_bits);
            let mut coef = gf2::gray(start);
            let mut y: Vec<u64> = g.parity.words().to_vec();
            for (k, col) in basis.iter().enumerate() {
                if coef >> k & 1 == 1 {
                    for &(w, bits) in col {
                        y[w] ^= bits;
                    }
                }
            }
            let mut dist: usize = y.iter().map(|w| w.count_ones() as usize).sum();
            let mut best = (dist, key(coef));
            for i in start + 1..end {
                let k = i.trailing_zeros() as usize;
                coef ^= 1 << k;
                for &(w, bits) in &basis[k] {
                    let old = y[w].count_ones() as usize;
                    y[w] ^= bits;
                    dist = dist + y[w].count_ones() as usize - old;
                }
                let cand = (dist, key(coef));
                if cand < best {
                    best = cand;
                }
            }
            best
        })
        .min()
        .unwrap_or((g.parity.count_ones(), 0));
    let (distance, k) = best;
    let coef = if d == 0 {
        0
    } else {
        k.reverse_bits() >> (64 - d)
    };
    let mut witness = ClassicalStrategy::zeros(g.n);
    for (i, &c) in pivots.iter().enumerate() {
        if coef >> i & 1 == 1 {
            witness.b.set(c, true);
        }
    }
    Ok(ClassicalValue {
        value: g.ratio_of_wins(distance),
        distance,
        witness,
        dim: d,
    })
}

/// Queries whose incidence rows sum to zero while their parities sum to one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    pub support: Vec<usize>,
}

impl Refutation {
    pub fn verify(&self, g: &GameInstance) -> bool {
        let mut sum = BitVec::zeros(4 * g.n);
        let mut parity = false;
        for &q in &self.support {
            if q >= g.query_count() {
                return false;
            }
            sum.xor_assign(&g.row(q));
            parity ^= g.parity.get(q);
        }
        sum.is_zero() && parity
    }
}

pub fn find_refutation(g: &GameInstance) -> Result<Option<Refutation>> {
    find_refutation_capped(g, DEFAULT_QUERY_CAP)
}

/// Row-reduces `[A | c]` in query order and returns the first combination
/// that reduces to `[0 | 1]`.
pub fn find_refutation_capped(g: &GameInstance, query_cap: usize) -> Result<Option<Refutation>> {
    let count = g.query_count();
    if count > query_cap {
        return Err(Error::CapExceeded {
            what: "query count",
            value: count,
            cap: query_cap,
        });
    }
    let width = 4 * g.n + 1;
    let max_basis = width;
    // (pivot, reduced row, mask over basis indices, originating query)
    let mut basis: Vec<(usize, BitVec, BitVec, usize)> = Vec::new();
    for q in 0..count {
        let mut row = BitVec::from_indices(
            width,
            g.letters[q * g.n..(q + 1) * g.n]
                .iter()
                .enumerate()
                .map(|(j, &c)| 4 * j + c as usize),
        );
        row.set(4 * g.n, g.parity.get(q));
        let mut mask = BitVec::zeros(max_basis);
        for (p, b, m, _) in &basis {
            if row.get(*p) {
                row.xor_assign(b);
                mask.xor_assign(m);
            }
        }
        match row.first_one() {
            None => {}
            Some(p) if p == 4 * g.n => {
                let mut support: Vec<usize> = mask.iter_ones().map(|i| basis[i].3).collect();
                support.push(q);
                support.sort_unstable();
                return Ok(Some(Refutation { support }));
            }
            Some(p) => {
                mask.set(basis.len(), true);
                basis.push((p, row, mask, q));
            }
        }
    }
    Ok(None)
}

/// Value of the better constant strategy.
pub fn bias_lower_bound(g: &GameInstance) -> BigRational {
    let q = g.query_count();
    let w = g.parity.count_ones();
    g.ratio_of_wins(w.min(q - w))
}

/// Polynomials of a coset in the free variables, renumbered in increasing
/// order.
#[derive(Clone, Debug)]
pub struct CosetPolynomials {
    pub free: Vec<usize>,
    pub parity: BooleanPolynomial,
    pub incidence: BTreeMap<(usize, Letter), BooleanPolynomial>,
    pub incidence_linear: bool,
    pub parity_quadratic: bool,
}

pub fn restrict_to_coset(
    gens: &StabilizerGenerators,
    assignment: &BTreeMap<usize, bool>,
) -> Result<CosetPolynomials> {
    let r = gens.r();
    if let Some(&i) = assignment.keys().find(|&&i| i >= r) {
        return Err(Error::InvalidInput(format!(
            "coset fixes x{} but there are only {r} generators",
            i + 1
        )));
    }
    let polys = group_polynomials(gens)?;
    let parity = polys.parity.restrict(assignment);
    let incidence: BTreeMap<_, _> = polys
        .incidence
        .iter()
        .map(|(&k, p)| (k, p.restrict(assignment)))
        .collect();
    let incidence_linear = incidence.values().all(|p| p.degree() <= 1);
    let parity_quadratic = parity.degree() <= 2;
    Ok(CosetPolynomials {
        free: (0..r).filter(|i| !assignment.contains_key(i)).collect(),
        parity,
        incidence,
        incidence_linear,
        parity_quadratic,
    })
}

/// Whether the parity function is cubic.
pub fn quantum_advantage_predicate(gens: &StabilizerGenerators) -> Result<bool> {
    Ok(group_polynomials(gens)?.parity.degree() == 3)
}
