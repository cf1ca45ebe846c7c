//! Packed bit vectors and small dense linear algebra over F2.
//!
//! Everything here works on 64-bit words; XOR is addition, AND is the
//! coordinate-wise product and `count_ones` gives Hamming weights.

use std::fmt;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over F2, packed little-endian into `u64` words
/// (bit `i` lives in word `i / 64` at position `i % 64`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec {
            len,
            words: vec![!0; words_for(len)],
        };
        v.clear_tail();
        v
    }

    /// Builds a vector from the low `len` bits of `value` (`len <= 64`).
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.clear_tail();
        }
        v
    }

    /// Wraps packed words; bits past `len` are cleared.
    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVec { len, words };
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        debug_assert_eq!(self.len, other.len);
        BitVec {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn not(&self) -> BitVec {
        let mut out = BitVec {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        out.clear_tail();
        out
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Weight of `self AND other` without allocating.
    #[inline]
    pub fn and_count(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Hamming distance.
    #[inline]
    pub fn distance(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Inner product over F2.
    #[inline]
    pub fn dot(&self, other: &BitVec) -> bool {
        self.and_count(other) % 2 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * WORD + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// Low 64 bits as an integer.
    pub fn low_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    /// Hex string with nibble `k` holding bits `4k..4k+3`, bit `4k` in the
    /// nibble's least significant position.
    pub fn to_hex(&self) -> String {
        let nibbles = self.len.div_ceil(4).max(1);
        let mut s = String::with_capacity(nibbles);
        for k in 0..nibbles {
            let mut d = 0u32;
            for b in 0..4 {
                let i = 4 * k + b;
                if i < self.len && self.get(i) {
                    d |= 1 << b;
                }
            }
            s.push(char::from_digit(d, 16).unwrap());
        }
        s
    }

    /// Inverse of [`BitVec::to_hex`]. Bits beyond `len` must be zero.
    pub fn from_hex(s: &str, len: usize) -> Option<BitVec> {
        let s = s.trim();
        if s.len() != len.div_ceil(4).max(1) {
            return None;
        }
        let mut v = BitVec::zeros(len);
        for (k, c) in s.chars().enumerate() {
            let d = c.to_digit(16)?;
            for b in 0..4 {
                if d >> b & 1 == 1 {
                    let i = 4 * k + b;
                    if i >= len {
                        return None;
                    }
                    v.set(i, true);
                }
            }
        }
        Some(v)
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// F2 rank of a list of row vectors.
pub fn rank(rows: &[BitVec]) -> usize {
    echelon_basis(rows).len()
}

/// Reduces `rows` to a set of independent vectors with distinct leading
/// positions (not fully reduced). Returns the basis rows.
pub fn echelon_basis(rows: &[BitVec]) -> Vec<BitVec> {
    let mut basis: Vec<(usize, BitVec)> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        for (p, b) in &basis {
            if r.get(*p) {
                r.xor_assign(b);
            }
        }
        if let Some(p) = r.first_one() {
            // keep earlier rows reduced at this pivot so later reductions
            // never reintroduce it
            for (_, b) in basis.iter_mut() {
                if b.get(p) {
                    b.xor_assign(&r);
                }
            }
            basis.push((p, r));
        }
    }
    basis.into_iter().map(|(_, b)| b).collect()
}

/// Greedy left-to-right choice of independent vectors: returns the indices
/// of `vectors` that are not in the span of the earlier ones.
pub fn greedy_independent(vectors: &[BitVec]) -> Vec<usize> {
    let mut reduced: Vec<(usize, BitVec)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for (p, b) in &reduced {
            if r.get(*p) {
                r.xor_assign(b);
            }
        }
        if let Some(p) = r.first_one() {
            for (_, b) in reduced.iter_mut() {
                if b.get(p) {
                    b.xor_assign(&r);
                }
            }
            reduced.push((p, r));
            chosen.push(idx);
        }
    }
    chosen
}

/// Rank of a square (or rectangular) matrix given as `u64`-packed rows of
/// width at most 64. Used in hot loops on small quadratic forms.
pub fn rank_u64(rows: &mut [u64]) -> usize {
    let mut rank = 0;
    for col in 0..64 {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Reflected binary Gray code.
#[inline]
pub fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_and_weights() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.iter_ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(BitVec::ones(130).count_ones(), 130);
        assert_eq!(v.not().count_ones(), 127);
    }

    #[test]
    fn hex_round_trip() {
        let v = BitVec::from_bools(&[true, false, false, true, true]);
        assert_eq!(v.to_hex(), "91");
        assert_eq!(BitVec::from_hex("91", 5), Some(v));
        assert_eq!(BitVec::from_hex("92", 5), None);
        assert_eq!(BitVec::zeros(2).to_hex(), "0");
    }

    #[test]
    fn rank_of_dependent_rows() {
        let a = BitVec::from_u64(0b0011, 4);
        let b = BitVec::from_u64(0b0110, 4);
        let c = BitVec::from_u64(0b0101, 4);
        assert_eq!(rank(&[a.clone(), b.clone(), c]), 2);
        assert_eq!(greedy_independent(&[a.clone(), a.clone(), b]), vec![0, 2]);
        let mut m = [0b011u64, 0b110, 0b101];
        assert_eq!(rank_u64(&mut m), 2);
    }

    #[test]
    fn gray_steps_flip_one_bit() {
        for i in 1..1000u64 {
            assert_eq!((gray(i) ^ gray(i - 1)).count_ones(), 1);
        }
    }
}
