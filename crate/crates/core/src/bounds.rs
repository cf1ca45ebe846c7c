//! Upper and lower bounds on classical values.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::anf::{self, BooleanPolynomial, QuadraticForm, NL2_CAP, TRUTH_TABLE_CAP};
use crate::error::{Error, Result};
use crate::game::{
    bias_lower_bound, classical_value_with, find_refutation, restrict_to_coset, CosetPolynomials,
    GameInstance, QuerySet, ValueOptions,
};
use crate::gf2::{self, BitVec};
use crate::num::{dyadic, fmt_ratio, ratio, sqrt_upper, SLACK_BITS};
use crate::parityfn::group_polynomials;
use crate::pauli::StabilizerGenerators;
use crate::states::{toric_parity_polynomial, ToricLattice};

/// Largest `r` for which the full derivative average is computed.
pub const DERIV_AVERAGE_CAP: usize = 24;

/// Names of the bound columns, in report order.
pub const BOUND_NAMES: [&str; 6] = ["RM78", "NL1", "NL2", "DERIV1", "DERIV2", "TORIC"];

fn pow2_inv(e: usize) -> BigRational {
    dyadic(BigInt::one(), e as u32)
}

pub fn rm78_bound(has_advantage: bool) -> BigRational {
    if has_advantage {
        ratio(7, 8)
    } else {
        ratio(1, 1)
    }
}

/// `1 − 2^{−r} nl2(c)` for a full-query game.
pub fn nl2_bound(c: &BooleanPolynomial) -> Result<BigRational> {
    let r = c.n_vars();
    if r > NL2_CAP {
        return Err(Error::CapExceeded {
            what: "nl2 variables",
            value: r,
            cap: NL2_CAP,
        });
    }
    let nl2 = anf::nl2_exact(&c.truth_table()?)?;
    Ok(ratio(1, 1) - BigRational::from_integer(nl2.into()) * pow2_inv(r))
}

/// `1 − 2^{−(r−t)} nl1(c')` for a coset whose incidence polynomials are
/// affine and whose parity is quadratic.
pub fn nl1_coset_bound(coset: &CosetPolynomials) -> Result<BigRational> {
    check_coset(coset)?;
    let free = coset.parity.n_vars();
    let nl1 = anf::nl1(&coset.parity.truth_table()?);
    Ok(ratio(1, 1) - BigRational::from_integer(nl1.into()) * pow2_inv(free))
}

fn check_coset(coset: &CosetPolynomials) -> Result<()> {
    if !coset.incidence_linear {
        return Err(Error::Precondition(
            "restricted incidence polynomials are not affine".into(),
        ));
    }
    if !coset.parity_quadratic {
        return Err(Error::Precondition(
            "restricted parity is not quadratic".into(),
        ));
    }
    Ok(())
}

/// `½ + 2^{−rank/2 − 1}` for a quadratic parity of nonzero rank.
pub fn coset_value_by_rank(c: &QuadraticForm) -> Result<BigRational> {
    let rank = anf::quadratic_rank(c);
    if rank == 0 {
        return Err(Error::Precondition(
            "restricted parity has no quadratic part".into(),
        ));
    }
    Ok(ratio(1, 2) + pow2_inv(rank / 2 + 1))
}

/// Rank formula applied to a restricted coset, after checking its
/// hypotheses.
pub fn coset_value(coset: &CosetPolynomials) -> Result<BigRational> {
    check_coset(coset)?;
    coset_value_by_rank(&QuadraticForm::from_polynomial(&coset.parity)?)
}

/// Directions along which derivatives are taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directions {
    /// Unit vectors plus `e_i + e_j` for every pair inside a cubic monomial.
    Default,
    /// Every nonzero `a`.
    All,
    Explicit(Vec<BitVec>),
}

/// Coupling matrices `M_k` with `rank(D_a c) = rank(Σ a_k M_k)`.
fn derivative_couplings(c: &BooleanPolynomial) -> Vec<Vec<BitVec>> {
    let r = c.n_vars();
    let mut m = vec![vec![BitVec::zeros(r); r]; r];
    for mono in c.homogeneous_part(3) {
        let [i, j, k] = [mono[0], mono[1], mono[2]];
        for (a, p, q) in [(i, j, k), (j, i, k), (k, i, j)] {
            m[a][p].flip(q);
            m[a][q].flip(p);
        }
    }
    m
}

fn coupled_rank(couplings: &[Vec<BitVec>], a: &BitVec) -> usize {
    let r = couplings.len();
    let mut rows = vec![BitVec::zeros(r); r];
    for k in a.iter_ones() {
        for (row, mk) in rows.iter_mut().zip(&couplings[k]) {
            row.xor_assign(mk);
        }
    }
    if r <= 64 {
        let mut packed: Vec<u64> = rows.iter().map(BitVec::low_u64).collect();
        gf2::rank_u64(&mut packed)
    } else {
        gf2::rank(&rows)
    }
}

/// Rank of the quadratic part of `D_a c`.
pub fn derivative_rank(c: &BooleanPolynomial, a: &BitVec) -> Result<usize> {
    anf::polynomial_rank(&c.derivative(a)?)
}

pub fn default_directions(c: &BooleanPolynomial) -> Vec<BitVec> {
    let r = c.n_vars();
    let mut out: Vec<BitVec> = (0..r).map(|i| BitVec::from_indices(r, [i])).collect();
    let mut pairs = std::collections::BTreeSet::new();
    for m in c.homogeneous_part(3) {
        pairs.extend([(m[0], m[1]), (m[0], m[2]), (m[1], m[2])]);
    }
    out.extend(
        pairs
            .into_iter()
            .map(|(i, j)| BitVec::from_indices(r, [i, j])),
    );
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeBounds {
    pub max_rank: usize,
    /// A direction attaining `max_rank`.
    pub direction: BitVec,
    pub bound1: BigRational,
    /// Only present when the full average was computed.
    pub bound2: Option<BigRational>,
}

/// `¾ + 2^{−max rank/2 − 2}` over the given directions and, when
/// `average` is set, `½ + ½·sqrt(2^{−r} Σ_a 2^{−rank(D_a c)/2})`.
pub fn derivative_bounds(
    c: &BooleanPolynomial,
    directions: &Directions,
    average: bool,
) -> Result<DerivativeBounds> {
    let r = c.n_vars();
    if c.degree() > 3 {
        return Err(Error::Precondition(format!(
            "parity of degree {} is not cubic",
            c.degree()
        )));
    }
    if average && r > DERIV_AVERAGE_CAP {
        return Err(Error::CapExceeded {
            what: "derivative average variables",
            value: r,
            cap: DERIV_AVERAGE_CAP,
        });
    }
    if matches!(directions, Directions::All) && r > DERIV_AVERAGE_CAP {
        return Err(Error::CapExceeded {
            what: "direction sweep variables",
            value: r,
            cap: DERIV_AVERAGE_CAP,
        });
    }
    let couplings = derivative_couplings(c);
    let mut max_rank = 0;
    let mut direction = BitVec::zeros(r);
    let mut counts: Option<Vec<u64>> = None;
    if average || matches!(directions, Directions::All) {
        let hist = rank_histogram(&couplings);
        if let Some((rank, a)) = hist.best {
            max_rank = rank;
            direction = BitVec::from_u64(a, r);
        }
        counts = Some(hist.counts);
    }
    let list = match directions {
        Directions::Default => default_directions(c),
        Directions::All => Vec::new(),
        Directions::Explicit(v) => v.clone(),
    };
    for a in &list {
        crate::error::check_len(r, a.len())?;
        let rank = coupled_rank(&couplings, a);
        if rank > max_rank {
            max_rank = rank;
            direction = a.clone();
        }
    }
    if !average && !matches!(directions, Directions::All) {
        // keep the histogram only for the explicit full average
        counts = None;
    }
    let bound1 = ratio(3, 4) + pow2_inv(max_rank / 2 + 2);
    let bound2 = counts.filter(|_| average).map(|counts| {
        // Σ_a 2^{−rank/2} / 2^r with every rank even
        let mut sum = BigRational::zero();
        for (rank, &cnt) in counts.iter().enumerate() {
            if cnt > 0 {
                sum += BigRational::from_integer(cnt.into()) * pow2_inv(rank / 2);
            }
        }
        let avg = sum * pow2_inv(r);
        ratio(1, 2) + sqrt_upper(&avg, SLACK_BITS) * ratio(1, 2)
    });
    Ok(DerivativeBounds {
        max_rank,
        direction,
        bound1,
        bound2,
    })
}

struct RankHistogram {
    counts: Vec<u64>,
    best: Option<(usize, u64)>,
}

/// Ranks of `Σ a_k M_k` for every `a`, walked in Gray order in parallel
/// blocks. `best` is the first `a` (by integer value) of maximal rank.
fn rank_histogram(couplings: &[Vec<BitVec>]) -> RankHistogram {
    let r = couplings.len();
    let packed: Vec<Vec<u64>> = couplings
        .iter()
        .map(|m| m.iter().map(BitVec::low_u64).collect())
        .collect();
    let block_bits = r.saturating_sub(8);
    let blocks = 1u64 << (r - block_bits);
    let partial: Vec<(Vec<u64>, Option<(usize, u64)>)> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let start = blk << block_bits;
            let mut counts = vec![0u64; r + 1];
            let mut best: Option<(usize, u64)> = None;
            let mut a = gf2::gray(start);
            let mut cur = vec![0u64; r];
            for (k, mk) in packed.iter().enumerate() {
                if a >> k & 1 == 1 {
                    for (c, m) in cur.iter_mut().zip(mk) {
                        *c ^= m;
                    }
                }
            }
            for i in start..start + (1u64 << block_bits) {
                if i > start {
                    let k = i.trailing_zeros() as usize;
                    a ^= 1 << k;
                    for (c, m) in cur.iter_mut().zip(&packed[k]) {
                        *c ^= m;
                    }
                }
                let mut rows = cur.clone();
                let rank = gf2::rank_u64(&mut rows);
                counts[rank] += 1;
                let better = match best {
                    None => true,
                    Some((br, ba)) => rank > br || (rank == br && a < ba),
                };
                if better {
                    best = Some((rank, a));
                }
            }
            (counts, best)
        })
        .collect();
    let mut counts = vec![0u64; r + 1];
    let mut best: Option<(usize, u64)> = None;
    for (c, b) in partial {
        for (t, x) in counts.iter_mut().zip(c) {
            *t += x;
        }
        if let Some((br, ba)) = b {
            let better = match best {
                None => true,
                Some((r0, a0)) => br > r0 || (br == r0 && ba < a0),
            };
            if better {
                best = Some((br, ba));
            }
        }
    }
    RankHistogram { counts, best }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricBound {
    pub bound: BigRational,
    pub direction: BitVec,
    pub certified_rank: usize,
}

/// Stars at odd rows and odd columns below `2⌊L/2⌋`.
pub fn toric_direction(lat: &ToricLattice) -> BitVec {
    let l = lat.size();
    let r = 2 * l * l - 2;
    let m = l / 2;
    let mut a = BitVec::zeros(r);
    for i in 0..m {
        for j in 0..m {
            if let Some(v) = lat.star_variable(2 * i + 1, 2 * j + 1) {
                a.set(v, true);
            }
        }
    }
    a
}

/// `¾ + 2^{−⌊L/2⌋² − 2}`, certified by the rank of one derivative.
pub fn toric_bound(l: usize) -> Result<ToricBound> {
    let lat = ToricLattice::new(l)?;
    let c = toric_parity_polynomial(&lat)?;
    let direction = toric_direction(&lat);
    let certified_rank = derivative_rank(&c, &direction)?;
    let m = l / 2;
    let needed = 2 * m * m;
    if certified_rank < needed {
        return Err(Error::Verification(format!(
            "derivative rank {certified_rank} below {needed} at L={l}"
        )));
    }
    Ok(ToricBound {
        bound: ratio(3, 4) + pow2_inv(m * m + 2),
        direction,
        certified_rank,
    })
}

/// Lower bound, every applicable upper bound and (within caps) the exact
/// value of one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub instance: String,
    pub lower: BigRational,
    pub upper: BTreeMap<String, BigRational>,
    pub best_upper: BigRational,
    pub exact: Option<BigRational>,
}

#[derive(Clone, Debug)]
pub struct ReportOptions {
    pub value: ValueOptions,
    pub directions: Directions,
    /// Compute DERIV2 when `r` allows.
    pub average: bool,
    /// Lattice size when the instance is a toric code.
    pub toric: Option<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            value: ValueOptions::default(),
            directions: Directions::Default,
            average: true,
            toric: None,
        }
    }
}

impl BoundReport {
    pub fn csv_header() -> String {
        let mut cols = vec!["instance", "lower"];
        cols.extend(BOUND_NAMES);
        cols.extend(["best_upper", "exact"]);
        cols.join(",")
    }

    pub fn csv_row(&self) -> String {
        let mut cols = vec![self.instance.clone(), fmt_ratio(&self.lower)];
        for name in BOUND_NAMES {
            cols.push(self.upper.get(name).map(fmt_ratio).unwrap_or_default());
        }
        cols.push(fmt_ratio(&self.best_upper));
        cols.push(self.exact.as_ref().map(fmt_ratio).unwrap_or_default());
        cols.join(",")
    }

    pub fn is_consistent(&self) -> bool {
        match &self.exact {
            Some(e) => &self.lower <= e && e <= &self.best_upper,
            None => self.lower <= self.best_upper,
        }
    }
}

/// Collects all bounds for `game`, skipping those whose hypotheses fail
/// or whose caps are exceeded.
pub fn bound_report(
    instance: &str,
    gens: &StabilizerGenerators,
    game: &GameInstance,
    opts: &ReportOptions,
) -> Result<BoundReport> {
    let mut upper = BTreeMap::new();
    match game.query_set() {
        QuerySet::Full => {
            let polys = group_polynomials(gens)?;
            let c = polys.parity;
            let advantage = if game.query_count() <= crate::game::DEFAULT_QUERY_CAP {
                find_refutation(game)?.is_some()
            } else {
                c.degree() == 3
            };
            upper.insert("RM78".to_string(), rm78_bound(advantage));
            if c.n_vars() <= NL2_CAP {
                upper.insert("NL2".to_string(), nl2_bound(&c)?);
            }
            if c.degree() == 3 {
                let average = opts.average && c.n_vars() <= DERIV_AVERAGE_CAP;
                let d = derivative_bounds(&c, &opts.directions, average)?;
                upper.insert("DERIV1".to_string(), d.bound1);
                if let Some(b2) = d.bound2 {
                    upper.insert("DERIV2".to_string(), b2);
                }
            }
            if let Some(l) = opts.toric {
                upper.insert("TORIC".to_string(), toric_bound(l)?.bound);
            }
        }
        QuerySet::Coset(assignment) => {
            let coset = restrict_to_coset(gens, assignment)?;
            if coset.incidence_linear
                && coset.parity_quadratic
                && coset.parity.n_vars() <= TRUTH_TABLE_CAP
            {
                upper.insert("NL1".to_string(), nl1_coset_bound(&coset)?);
            }
        }
    }
    let exact = match classical_value_with(game, opts.value) {
        Ok(v) => Some(v.value),
        Err(Error::CapExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let best_upper = upper.values().min().cloned().unwrap_or_else(|| ratio(1, 1));
    Ok(BoundReport {
        instance: instance.to_string(),
        lower: bias_lower_bound(game),
        upper,
        best_upper,
        exact,
    })
}
