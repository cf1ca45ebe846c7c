//! Canonical generating sets, local letter rotations, and the parity and
//! incidence polynomials of a stabilizer group.

use std::collections::{BTreeMap, BTreeSet};

use crate::anf::{BooleanPolynomial, Monomial};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::pauli::{Letter, PauliOperator, StabilizerGenerators};

/// Distinct nontrivial letters per site among `ops`.
pub fn site_letter_sets(n: usize, ops: &[PauliOperator]) -> Vec<BTreeSet<Letter>> {
    let mut sets = vec![BTreeSet::new(); n];
    for op in ops {
        for (j, set) in sets.iter_mut().enumerate() {
            let l = op.letter(j);
            if l != Letter::I {
                set.insert(l);
            }
        }
    }
    sets
}

/// True when every site carries at most two distinct nontrivial letters.
pub fn has_two_letter_sites(gens: &StabilizerGenerators) -> bool {
    site_letter_sets(gens.n(), gens.generators())
        .iter()
        .all(|s| s.len() <= 2)
}

fn proj(op: &PauliOperator, site: usize) -> usize {
    op.letter(site).code()
}

/// Letter code of the sum of two projections.
fn add_letters(a: usize, b: usize) -> usize {
    let (ax, az) = Letter::from_code(a).bits();
    let (bx, bz) = Letter::from_code(b).bits();
    Letter::from_bits(ax ^ bx, az ^ bz).code()
}

fn mul_into(target: &mut PauliOperator, by: &PauliOperator) {
    *target = target.multiply(by).expect("equal lengths");
}

/// Rewrites the generators into a basis of the same group in which every
/// site carries at most two distinct nontrivial letters.
///
/// Round I is a block echelon sweep over sites `1..n`; Round II walks back
/// from site `n`, cleaning earlier pivots with the pivots of the current
/// site. Round II's case without a local pivot can reintroduce a third
/// letter on a later site; any site left with three letters is repaired by
/// [`repair_sites`].
pub fn canonicalize(gens: &StabilizerGenerators) -> Result<StabilizerGenerators> {
    let n = gens.n();
    let (mut blocks, _) = round_one(n, gens.generators().to_vec());
    round_two(n, &mut blocks);
    let mut basis: Vec<PauliOperator> = blocks.into_iter().flatten().collect();
    if !site_letter_sets(n, &basis).iter().all(|s| s.len() <= 2) {
        basis = repair_sites(n, basis)?;
    }
    StabilizerGenerators::with_n(n, basis)
}

/// Paper-order rounds only, without the repair pass (exposed for testing).
pub fn canonicalize_rounds(gens: &StabilizerGenerators) -> Vec<PauliOperator> {
    let n = gens.n();
    let (mut blocks, _) = round_one(n, gens.generators().to_vec());
    round_two(n, &mut blocks);
    blocks.into_iter().flatten().collect()
}

/// Returns the pivot block of every site and the per-site dimensions `d_i`.
fn round_one(n: usize, mut rest: Vec<PauliOperator>) -> (Vec<Vec<PauliOperator>>, Vec<usize>) {
    let mut blocks = Vec::with_capacity(n);
    let mut dims = Vec::with_capacity(n);
    for i in 0..n {
        let mut pivots: Vec<PauliOperator> = Vec::new();
        let mut k = 0;
        while k < rest.len() {
            let p = proj(&rest[k], i);
            if p == 0 {
                k += 1;
                continue;
            }
            let reduced = reduce_by(&rest[k], i, &pivots);
            match reduced {
                Some(r) => rest[k] = r,
                None => {
                    pivots.push(rest.remove(k));
                    continue;
                }
            }
            k += 1;
        }
        dims.push(pivots.len());
        blocks.push(pivots);
    }
    debug_assert!(rest.iter().all(|r| r.is_identity_string()));
    (blocks, dims)
}

/// Multiplies `op` by pivots so that its projection on `site` vanishes;
/// `None` when that is impossible (the projection is new).
fn reduce_by(op: &PauliOperator, site: usize, pivots: &[PauliOperator]) -> Option<PauliOperator> {
    let target = proj(op, site);
    let codes: Vec<usize> = pivots.iter().map(|p| proj(p, site)).collect();
    for mask in 0u32..(1 << pivots.len()) {
        let sum = (0..pivots.len())
            .filter(|&b| mask >> b & 1 == 1)
            .fold(0, |acc, b| add_letters(acc, codes[b]));
        if sum == target {
            let mut out = op.clone();
            for (b, p) in pivots.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    mul_into(&mut out, p);
                }
            }
            return Some(out);
        }
    }
    None
}

fn round_two(n: usize, blocks: &mut [Vec<PauliOperator>]) {
    for i in (0..n).rev() {
        let k_i = {
            let all: Vec<usize> = blocks.iter().flatten().map(|op| proj(op, i)).collect();
            span_dim(&all)
        };
        if k_i < 2 {
            continue;
        }
        let (earlier, later) = blocks.split_at_mut(i);
        let pivots = &later[0];
        match pivots.len() {
            2 => {
                for s in earlier.iter_mut().flatten() {
                    if let Some(r) = reduce_by(s, i, pivots) {
                        *s = r;
                    }
                }
            }
            1 => {
                let v = proj(&pivots[0], i);
                let w = earlier
                    .iter()
                    .flatten()
                    .map(|s| proj(s, i))
                    .find(|&p| p != 0 && p != v);
                for s in earlier.iter_mut().flatten() {
                    let p = proj(s, i);
                    if p == v || Some(add_letters(p, v)) == w {
                        mul_into(s, &pivots[0]);
                    }
                }
            }
            _ => {
                let flat: Vec<(usize, usize)> = earlier
                    .iter()
                    .enumerate()
                    .flat_map(|(b, blk)| (0..blk.len()).map(move |k| (b, k)))
                    .collect();
                let first = flat
                    .iter()
                    .copied()
                    .find(|&(b, k)| proj(&earlier[b][k], i) != 0);
                let Some(first) = first else { continue };
                let a = proj(&earlier[first.0][first.1], i);
                let second = flat.iter().copied().find(|&(b, k)| {
                    let p = proj(&earlier[b][k], i);
                    p != 0 && p != a
                });
                let Some(second) = second else { continue };
                let s1 = earlier[first.0][first.1].clone();
                let s2 = earlier[second.0][second.1].clone();
                let chosen = [s1, s2];
                for &(b, k) in &flat {
                    if (b, k) == first || (b, k) == second {
                        continue;
                    }
                    if let Some(r) = reduce_by(&earlier[b][k], i, &chosen) {
                        earlier[b][k] = r;
                    }
                }
            }
        }
    }
}

fn span_dim(codes: &[usize]) -> usize {
    let nonzero: BTreeSet<usize> = codes.iter().copied().filter(|&c| c != 0).collect();
    match nonzero.len() {
        0 => 0,
        1 => 1,
        _ => 2,
    }
}

/// Fallback for bases that still carry three letters on some site: fixes a
/// forbidden letter on every site where the group shows all three, then
/// looks for a basis among the group elements avoiding them.
pub fn repair_sites(n: usize, basis: Vec<PauliOperator>) -> Result<Vec<PauliOperator>> {
    let k = basis.len();
    let elements = StabilizerGenerators::with_n(n, basis)?.elements()?;
    let sets = site_letter_sets(n, &elements);
    let full: Vec<usize> = (0..n).filter(|&j| sets[j].len() == 3).collect();
    let vectors: Vec<BitVec> = elements
        .iter()
        .map(|e| e.symplectic().to_bitvec())
        .collect();
    let mut forbidden = vec![0usize; n];
    search_forbidden(&elements, &vectors, &full, 0, &mut forbidden, k)
        .ok_or_else(|| Error::Verification("no two-letter basis found for this group".into()))
}

fn search_forbidden(
    elements: &[PauliOperator],
    vectors: &[BitVec],
    full: &[usize],
    depth: usize,
    forbidden: &mut [usize],
    k: usize,
) -> Option<Vec<PauliOperator>> {
    if depth == full.len() {
        let allowed: Vec<usize> = (0..elements.len())
            .filter(|&i| full.iter().all(|&j| proj(&elements[i], j) != forbidden[j]))
            .collect();
        let cand: Vec<BitVec> = allowed.iter().map(|&i| vectors[i].clone()).collect();
        let picked = crate::gf2::greedy_independent(&cand);
        return (picked.len() == k).then(|| {
            picked
                .into_iter()
                .map(|p| elements[allowed[p]].clone())
                .collect()
        });
    }
    let j = full[depth];
    for f in 1..4 {
        forbidden[j] = f;
        if let Some(b) = search_forbidden(elements, vectors, full, depth + 1, forbidden, k) {
            return Some(b);
        }
    }
    None
}

/// Generators with at most two letters per site, plus the per-site
/// rotation that maps those letters into {X, Z}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalGenerators {
    base: StabilizerGenerators,
    site_letters: Vec<BTreeSet<Letter>>,
    rotation: Vec<u8>,
    rotated: StabilizerGenerators,
}

impl CanonicalGenerators {
    /// Canonicalizes only when some site carries three letters, so inputs
    /// that already qualify keep their basis.
    pub fn from_generators(gens: &StabilizerGenerators) -> Result<Self> {
        if has_two_letter_sites(gens) {
            rotate_to_xz(gens)
        } else {
            rotate_to_xz(&canonicalize(gens)?)
        }
    }

    pub fn base(&self) -> &StabilizerGenerators {
        &self.base
    }

    pub fn site_letters(&self) -> &[BTreeSet<Letter>] {
        &self.site_letters
    }

    pub fn rotation(&self) -> &[u8] {
        &self.rotation
    }

    /// The base generators after applying the rotation.
    pub fn rotated(&self) -> &StabilizerGenerators {
        &self.rotated
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn r(&self) -> usize {
        self.base.r()
    }
}

/// Rotation power in {0,1,2} mapping `letters` into {X, Z}.
pub fn rotation_power(letters: &BTreeSet<Letter>) -> Option<u8> {
    let xz = |l: &Letter| matches!(l, Letter::X | Letter::Z);
    (0..3u8).find(|&p| letters.iter().all(|l| xz(&l.rotate(p))))
}

pub fn rotate_to_xz(gens: &StabilizerGenerators) -> Result<CanonicalGenerators> {
    let site_letters = site_letter_sets(gens.n(), gens.generators());
    let rotation = site_letters
        .iter()
        .enumerate()
        .map(|(j, s)| {
            rotation_power(s).ok_or_else(|| {
                Error::Precondition(format!("site {} carries three distinct letters", j + 1))
            })
        })
        .collect::<Result<Vec<u8>>>()?;
    let rotated = StabilizerGenerators::with_n(
        gens.n(),
        gens.generators()
            .iter()
            .map(|g| g.rotated(&rotation))
            .collect(),
    )?;
    Ok(CanonicalGenerators {
        base: gens.clone(),
        site_letters,
        rotation,
        rotated,
    })
}

/// Per site: indices of generators carrying X and Z in the rotated frame.
fn xz_supports(cg: &CanonicalGenerators) -> Vec<(Vec<usize>, Vec<usize>)> {
    let g = cg.rotated.generators();
    (0..cg.n())
        .map(|j| {
            let xs = (0..g.len())
                .filter(|&i| g[i].letter(j) == Letter::X)
                .collect();
            let zs = (0..g.len())
                .filter(|&i| g[i].letter(j) == Letter::Z)
                .collect();
            (xs, zs)
        })
        .collect()
}

/// Parity function `c(x)` of the group in algebraic normal form.
///
/// Integer coefficients are accumulated first: cubic terms from pairs in one
/// support and a third index in the other, pair terms `b_kl + (b_kl+b_lk)/2`
/// where `b_kl` counts sites with `k ∈ X_j, l ∈ Z_j`, and the generator
/// signs as linear terms. Reduction mod 2 happens last.
pub fn parity_polynomial(cg: &CanonicalGenerators) -> Result<BooleanPolynomial> {
    let r = cg.r();
    let mut coeffs: BTreeMap<Monomial, i64> = BTreeMap::new();
    let mut b = vec![vec![0i64; r]; r];
    for (xs, zs) in xz_supports(cg) {
        for (pair_side, other) in [(&xs, &zs), (&zs, &xs)] {
            for (a, &k) in pair_side.iter().enumerate() {
                for &l in &pair_side[a + 1..] {
                    for &m in other {
                        let mut mono = vec![k, l, m];
                        mono.sort_unstable();
                        *coeffs.entry(mono).or_default() += 1;
                    }
                }
            }
        }
        for &k in &xs {
            for &l in &zs {
                b[k][l] += 1;
            }
        }
    }
    for k in 0..r {
        for l in k + 1..r {
            let combined = b[k][l] + b[l][k];
            if combined % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "generators {} and {} overlap anticommutingly",
                    k + 1,
                    l + 1
                )));
            }
            let c = b[k][l] + combined / 2;
            if c != 0 {
                *coeffs.entry(vec![k, l]).or_default() += c;
            }
        }
    }
    for (i, s) in cg.base.signs().into_iter().enumerate() {
        if s {
            *coeffs.entry(vec![i]).or_default() += 1;
        }
    }
    Ok(BooleanPolynomial::from_integer_coefficients(r, &coeffs))
}

/// Indicator polynomials `a_{(j, σ)}(x)`: 1 iff the group element for `x`
/// carries letter `σ` (in the original frame) at site `j`.
pub fn incidence_polynomials(
    cg: &CanonicalGenerators,
) -> BTreeMap<(usize, Letter), BooleanPolynomial> {
    let r = cg.r();
    let one = BooleanPolynomial::one(r);
    let sum = |idx: &[usize]| {
        BooleanPolynomial::from_monomials(r, idx.iter().map(|&i| vec![i])).expect("in range")
    };
    let mut out = BTreeMap::new();
    for (j, (xs, zs)) in xz_supports(cg).into_iter().enumerate() {
        let p = sum(&xs);
        let q = sum(&zs);
        let np = p.add(&one);
        let nq = q.add(&one);
        let back = (3 - cg.rotation[j]) % 3;
        for (rotated_letter, poly) in [
            (Letter::I, np.mul(&nq)),
            (Letter::X, p.mul(&nq)),
            (Letter::Y, p.mul(&q)),
            (Letter::Z, np.mul(&q)),
        ] {
            out.insert((j, rotated_letter.rotate(back)), poly);
        }
    }
    out
}

/// Parity and incidence polynomials in the variables of `gens` itself,
/// even when canonicalization had to change the basis.
#[derive(Clone, Debug)]
pub struct GroupPolynomials {
    pub parity: BooleanPolynomial,
    pub incidence: BTreeMap<(usize, Letter), BooleanPolynomial>,
}

pub fn group_polynomials(gens: &StabilizerGenerators) -> Result<GroupPolynomials> {
    let cg = CanonicalGenerators::from_generators(gens)?;
    let parity = parity_polynomial(&cg)?;
    let incidence = incidence_polynomials(&cg);
    if cg.base() == gens {
        return Ok(GroupPolynomials { parity, incidence });
    }
    let images = canonical_coordinates(gens, cg.base())?;
    let r = gens.r();
    Ok(GroupPolynomials {
        parity: parity.compose(&images, r)?,
        incidence: incidence
            .into_iter()
            .map(|(k, p)| Ok((k, p.compose(&images, r)?)))
            .collect::<Result<_>>()?,
    })
}

/// Linear forms `y_k(x)` expressing canonical coordinates in terms of the
/// original ones, so that `Π g_i^{x_i} = Π h_k^{y_k(x)}`.
fn canonical_coordinates(
    gens: &StabilizerGenerators,
    canon: &StabilizerGenerators,
) -> Result<Vec<BooleanPolynomial>> {
    let r = gens.r();
    // t[k]: coordinates of h_k in the g basis, found by solving over F2 with
    // an augmented identity block
    let rows: Vec<(BitVec, BitVec)> = gens
        .generators()
        .iter()
        .enumerate()
        .map(|(i, g)| (g.symplectic().to_bitvec(), BitVec::from_indices(r, [i])))
        .collect();
    let mut basis: Vec<(usize, BitVec, BitVec)> = Vec::new();
    for (v, tag) in rows {
        let (mut v, mut tag) = (v, tag);
        for (p, bv, bt) in &basis {
            if v.get(*p) {
                v.xor_assign(bv);
                tag.xor_assign(bt);
            }
        }
        let p = v.first_one().expect("independent generators");
        basis.push((p, v, tag));
    }
    let mut t = Vec::with_capacity(r);
    for h in canon.generators() {
        let mut v = h.symplectic().to_bitvec();
        let mut tag = BitVec::zeros(r);
        for (p, bv, bt) in &basis {
            if v.get(*p) {
                v.xor_assign(bv);
                tag.xor_assign(bt);
            }
        }
        if !v.is_zero() {
            return Err(Error::Verification("canonical basis left the group".into()));
        }
        t.push(tag);
    }
    // x = Σ_k y_k t_k, so y = x · T^{-1}; invert T by elimination
    let inv =
        invert(&t).ok_or_else(|| Error::Verification("canonical basis is singular".into()))?;
    Ok((0..r)
        .map(|k| {
            BooleanPolynomial::from_monomials(r, (0..r).filter(|&i| inv[i].get(k)).map(|i| vec![i]))
                .expect("in range")
        })
        .collect())
}

/// Inverse of a square F2 matrix given by rows.
fn invert(m: &[BitVec]) -> Option<Vec<BitVec>> {
    let r = m.len();
    let mut a: Vec<BitVec> = m.to_vec();
    let mut inv: Vec<BitVec> = (0..r).map(|i| BitVec::from_indices(r, [i])).collect();
    for col in 0..r {
        let piv = (col..r).find(|&i| a[i].get(col))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        for i in 0..r {
            if i != col && a[i].get(col) {
                let (ac, ic) = (a[col].clone(), inv[col].clone());
                a[i].xor_assign(&ac);
                inv[i].xor_assign(&ic);
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gens(s: &str) -> StabilizerGenerators {
        StabilizerGenerators::parse(s).unwrap()
    }

    fn group_set(g: &StabilizerGenerators) -> BTreeSet<String> {
        g.elements()
            .unwrap()
            .iter()
            .map(|e| e.to_string())
            .collect()
    }

    /// Random commuting independent generators: start from a random
    /// symplectic-isotropic subspace built by rejection.
    pub(crate) fn random_group(rng: &mut impl Rng, n: usize, r: usize) -> StabilizerGenerators {
        loop {
            let mut ops: Vec<PauliOperator> = Vec::new();
            let mut tries = 0;
            while ops.len() < r && tries < 2000 {
                tries += 1;
                let letters: Vec<Letter> = (0..n)
                    .map(|_| Letter::from_code(rng.random_range(0..4)))
                    .collect();
                let cand = PauliOperator::from_letters(&letters, 2 * rng.random_range(0..2u8));
                if cand.is_identity_string() {
                    continue;
                }
                if ops.iter().all(|o| o.commutes(&cand).unwrap()) {
                    let mut t = ops.clone();
                    t.push(cand.clone());
                    if crate::pauli::independence_check(&t) == t.len() {
                        ops.push(cand);
                    }
                }
            }
            if ops.len() == r {
                return StabilizerGenerators::new(ops).unwrap();
            }
        }
    }

    #[test]
    fn group_polynomials_use_original_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let mut changed = 0;
        for _ in 0..150 {
            let n = rng.random_range(2..=6);
            let r = rng.random_range(1..=n);
            let g = random_group(&mut rng, n, r);
            if !has_two_letter_sites(&g) {
                changed += 1;
            }
            let gp = group_polynomials(&g).unwrap();
            for (x, e) in g.elements().unwrap().iter().enumerate() {
                assert_eq!(gp.parity.evaluate_index(x as u64), e.sign_bit());
                for j in 0..n {
                    assert!(gp.incidence[&(j, e.letter(j))].evaluate_index(x as u64));
                }
            }
        }
        assert!(changed > 0);
    }

    #[test]
    fn ghz_is_left_alone() {
        let g = gens("XXX\nZZI\nIZZ");
        let cg = CanonicalGenerators::from_generators(&g).unwrap();
        assert_eq!(cg.base(), &g);
        assert_eq!(cg.rotation(), &[0, 0, 0]);
    }

    #[test]
    fn canonicalize_keeps_group_and_predicate() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n = rng.random_range(2..=6);
            let r = rng.random_range(1..=n);
            let g = random_group(&mut rng, n, r);
            let c = canonicalize(&g).unwrap();
            assert!(has_two_letter_sites(&c), "{g:?} -> {c:?}");
            assert_eq!(group_set(&g), group_set(&c));
        }
    }

    #[test]
    fn y_heavy_input() {
        let g = gens("YYI\nIYY\nZZZ");
        let c = canonicalize(&g).unwrap();
        assert!(has_two_letter_sites(&c));
        assert_eq!(group_set(&g), group_set(&c));
    }

    #[test]
    fn rotation_powers() {
        let set = |ls: &[Letter]| ls.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(rotation_power(&set(&[Letter::X, Letter::Z])), Some(0));
        assert_eq!(rotation_power(&set(&[Letter::X, Letter::Y])), Some(2));
        assert_eq!(rotation_power(&set(&[Letter::Y, Letter::Z])), Some(1));
        assert_eq!(rotation_power(&set(&[Letter::Y])), Some(1));
        assert_eq!(rotation_power(&set(&[])), Some(0));
        assert_eq!(
            rotation_power(&set(&[Letter::X, Letter::Y, Letter::Z])),
            None
        );
        let xy = set(&[Letter::X, Letter::Y]);
        let mapped: BTreeSet<Letter> = xy.iter().map(|l| l.rotate(2)).collect();
        assert_eq!(mapped, set(&[Letter::X, Letter::Z]));
    }

    #[test]
    fn rotation_preserves_parities() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let mut cases = vec![gens("XZZ\nZXZ\nZZX"), gens("YYI\nIYY\nZZZ")];
        for _ in 0..30 {
            cases.push(random_group(&mut rng, 4, 3));
        }
        for g in cases {
            let cg = CanonicalGenerators::from_generators(&g).unwrap();
            let before = cg.base().elements().unwrap();
            let after = cg.rotated().elements().unwrap();
            for (a, b) in before.iter().zip(&after) {
                assert_eq!(a.sign_bit(), b.sign_bit());
            }
        }
    }

    fn check_parity(g: &StabilizerGenerators) {
        let cg = CanonicalGenerators::from_generators(g).unwrap();
        let c = parity_polynomial(&cg).unwrap();
        assert!(c.degree() <= 3);
        let els = cg.base().elements().unwrap();
        for (x, e) in els.iter().enumerate() {
            assert_eq!(c.evaluate_index(x as u64), e.sign_bit(), "{g:?} at {x}");
        }
    }

    #[test]
    fn parity_polynomial_matches_group_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = rng.random_range(1..=7);
            let r = rng.random_range(1..=n);
            let g = random_group(&mut rng, n, r);
            let cg = CanonicalGenerators::from_generators(&g).unwrap();
            check_parity(cg.base());
        }
    }

    #[test]
    fn parity_polynomial_examples() {
        let cg = CanonicalGenerators::from_generators(&gens("XZIIZ\nZXZII\nIZXZI\nIIZXZ\nZIIZX"))
            .unwrap();
        let c = parity_polynomial(&cg).unwrap();
        let r3 =
            BooleanPolynomial::from_monomials(5, (0..5).map(|j| vec![(j + 4) % 5, j, (j + 1) % 5]))
                .unwrap();
        assert_eq!(c, r3);

        for n in 3..=6 {
            let mut lines = vec!["X".repeat(n)];
            for j in 0..n - 1 {
                let mut s = vec!['I'; n];
                s[j] = 'Z';
                s[j + 1] = 'Z';
                lines.push(s.into_iter().collect());
            }
            let g = gens(&lines.join("\n"));
            let c = parity_polynomial(&CanonicalGenerators::from_generators(&g).unwrap()).unwrap();
            // x1 is the XX..X generator, x_{j} (j >= 2) is Z_{j-1}Z_j
            let mut ms: Vec<Monomial> = (1..n - 1).map(|j| vec![0, j, j + 1]).collect();
            ms.extend((1..n).map(|j| vec![0, j]));
            assert_eq!(c, BooleanPolynomial::from_monomials(n, ms).unwrap());
        }

        let cg = CanonicalGenerators::from_generators(&gens("X")).unwrap();
        assert!(parity_polynomial(&cg).unwrap().is_zero());
    }

    #[test]
    fn incidence_polynomials_one_hot_and_correct() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..60 {
            let n = rng.random_range(1..=5);
            let r = rng.random_range(1..=n);
            let g = random_group(&mut rng, n, r);
            let cg = CanonicalGenerators::from_generators(&g).unwrap();
            let inc = incidence_polynomials(&cg);
            let els = cg.base().elements().unwrap();
            for (x, e) in els.iter().enumerate() {
                for j in 0..n {
                    let hot: Vec<Letter> = Letter::ALL
                        .into_iter()
                        .filter(|&l| inc[&(j, l)].evaluate_index(x as u64))
                        .collect();
                    assert_eq!(hot, vec![e.letter(j)]);
                }
            }
            for p in inc.values() {
                assert!(p.degree() <= 2);
            }
        }
    }

    #[test]
    fn ghz_incidence() {
        let g = gens("XXXX\nZZII\nIZZI\nIIZZ");
        let inc = incidence_polynomials(&CanonicalGenerators::from_generators(&g).unwrap());
        let p = |s: &str| BooleanPolynomial::parse(s, 4).unwrap();
        assert_eq!(inc[&(0, Letter::Y)], p("x1*x2"));
        assert_eq!(inc[&(3, Letter::Y)], p("x1*x4"));
        assert_eq!(inc[&(1, Letter::Y)], p("x1*x2 + x1*x3"));
    }

    #[test]
    fn cluster_incidence() {
        let n = 5;
        let lines: Vec<String> = (0..n)
            .map(|j| {
                let mut s = vec!['I'; n];
                s[j] = 'X';
                s[(j + 1) % n] = 'Z';
                s[(j + n - 1) % n] = 'Z';
                s.into_iter().collect()
            })
            .collect();
        let g = gens(&lines.join("\n"));
        let inc = incidence_polynomials(&CanonicalGenerators::from_generators(&g).unwrap());
        for j in 0..n {
            let expect = BooleanPolynomial::from_monomials(
                n,
                vec![vec![j, (j + n - 1) % n], vec![j, (j + 1) % n]],
            )
            .unwrap();
            assert_eq!(inc[&(j, Letter::Y)], expect);
        }
    }

    #[test]
    fn rounds_fail_only_through_pivotless_sites() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let mut failures = 0;
        for _ in 0..500 {
            let n = rng.random_range(2..=6);
            let r = rng.random_range(1..=n);
            let g = random_group(&mut rng, n, r);
            let (mut blocks, dims) = round_one(n, g.generators().to_vec());
            let full = site_letter_sets(n, &g.elements().unwrap());
            let pivotless = (0..n).any(|j| dims[j] == 0 && full[j].len() == 3);
            round_two(n, &mut blocks);
            let basis: Vec<PauliOperator> = blocks.into_iter().flatten().collect();
            let ok = site_letter_sets(n, &basis).iter().all(|s| s.len() <= 2);
            if !ok {
                failures += 1;
                assert!(pivotless, "{g:?}");
            }
        }
        assert!(failures > 0);
    }
}
