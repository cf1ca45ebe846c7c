//! Generator sets for GHZ, graph and toric-code states.

use std::collections::BTreeSet;

use crate::anf::BooleanPolynomial;
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::parityfn::{parity_polynomial, CanonicalGenerators};
use crate::pauli::{independence_check, Letter, PauliOperator, StabilizerGenerators};

/// `X…X, Z_1Z_2, …, Z_{n−1}Z_n`.
pub fn ghz_generators(n: usize) -> Result<StabilizerGenerators> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("GHZ needs n >= 2, got {n}")));
    }
    let mut gens = vec![PauliOperator::from_letters(&vec![Letter::X; n], 0)];
    for j in 0..n - 1 {
        let mut l = vec![Letter::I; n];
        l[j] = Letter::Z;
        l[j + 1] = Letter::Z;
        gens.push(PauliOperator::from_letters(&l, 0));
    }
    StabilizerGenerators::new(gens)
}

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl GraphSpec {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) outside {n} vertices",
                    a + 1,
                    b + 1
                )));
            }
            if a == b {
                return Err(Error::InvalidInput(format!(
                    "self-loop at vertex {}",
                    a + 1
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(GraphSpec { n, edges: set })
    }

    /// Parses `n` on the first line followed by one 1-based `i j` edge per
    /// line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be the vertex count".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .ok()
                    .filter(|&v| v >= 1)
                    .map(|v| v - 1)
                    .ok_or_else(|| Error::Parse(format!("bad vertex {s:?}")))
            };
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "edge line {line:?} needs two vertices"
                )));
            }
            edges.push((idx(parts[0])?, idx(parts[1])?));
        }
        Self::new(n, edges)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("cycle needs n >= 3, got {n}")));
        }
        Self::new(n, (0..n).map(|j| (j, (j + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInput("path needs n >= 1".into()));
        }
        Self::new(n, (1..n).map(|j| (j - 1, j)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(u, v)).collect()
    }

    pub fn adjacency(&self) -> Vec<BitVec> {
        (0..self.n)
            .map(|v| BitVec::from_indices(self.n, self.neighbors(v)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// `X_i Π_{j∈N(i)} Z_j` for every vertex.
pub fn graph_generators(g: &GraphSpec) -> Result<StabilizerGenerators> {
    let n = g.n();
    let gens = (0..n)
        .map(|i| {
            let mut l = vec![Letter::I; n];
            l[i] = Letter::X;
            for j in g.neighbors(i) {
                l[j] = Letter::Z;
            }
            PauliOperator::from_letters(&l, 0)
        })
        .collect();
    StabilizerGenerators::with_n(n, gens)
}

/// `Σ_i Σ_{j<k ∈ N(i)} x_i x_j x_k` mod 2.
pub fn graph_parity_by_triples(g: &GraphSpec) -> BooleanPolynomial {
    let n = g.n();
    let mut ms = Vec::new();
    for i in 0..n {
        let nb = g.neighbors(i);
        for (a, &j) in nb.iter().enumerate() {
            for &k in &nb[a + 1..] {
                ms.push(vec![i, j, k]);
            }
        }
    }
    BooleanPolynomial::from_monomials(n, ms).expect("indices in range")
}

/// Qubits on the edges of an `L × L` torus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ToricLattice {
    l: usize,
}

impl ToricLattice {
    pub fn new(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidInput(format!(
                "toric lattice needs L >= 2, got {l}"
            )));
        }
        Ok(ToricLattice { l })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.l * self.l
    }

    /// Horizontal edge from `(r, c)` to `(r, c+1)`.
    pub fn h(&self, r: usize, c: usize) -> usize {
        let l = self.l;
        (r % l) * l + c % l
    }

    /// Vertical edge from `(r, c)` to `(r+1, c)`.
    pub fn v(&self, r: usize, c: usize) -> usize {
        let l = self.l;
        l * l + (r % l) * l + c % l
    }

    /// Edges meeting at vertex `(r, c)`.
    pub fn star(&self, r: usize, c: usize) -> [usize; 4] {
        let l = self.l;
        [
            self.h(r, c),
            self.h(r, c + l - 1),
            self.v(r, c),
            self.v(r + l - 1, c),
        ]
    }

    /// Edges around the face with top-left corner `(r, c)`.
    pub fn plaquette(&self, r: usize, c: usize) -> [usize; 4] {
        [
            self.h(r, c),
            self.h(r + 1, c),
            self.v(r, c),
            self.v(r, c + 1),
        ]
    }

    fn op(&self, edges: &[usize], letter: Letter) -> PauliOperator {
        let mut l = vec![Letter::I; self.n_qubits()];
        for &e in edges {
            l[e] = letter;
        }
        PauliOperator::from_letters(&l, 0)
    }

    pub fn all_stars(&self) -> Vec<PauliOperator> {
        let l = self.l;
        (0..l * l)
            .map(|s| self.op(&self.star(s / l, s % l), Letter::X))
            .collect()
    }

    pub fn all_plaquettes(&self) -> Vec<PauliOperator> {
        let l = self.l;
        (0..l * l)
            .map(|p| self.op(&self.plaquette(p / l, p % l), Letter::Z))
            .collect()
    }

    /// Non-contractible Z loops along row 0 and column 0.
    pub fn logical_z(&self) -> [PauliOperator; 2] {
        let l = self.l;
        let row: Vec<usize> = (0..l).map(|c| self.h(0, c)).collect();
        let col: Vec<usize> = (0..l).map(|r| self.v(r, 0)).collect();
        [self.op(&row, Letter::Z), self.op(&col, Letter::Z)]
    }

    /// Generator variable for star `(r, c)`; star 0 is dropped.
    pub fn star_variable(&self, r: usize, c: usize) -> Option<usize> {
        let s = (r % self.l) * self.l + c % self.l;
        (s != 0).then(|| s - 1)
    }

    /// Generator variable for plaquette `(r, c)`; plaquette 0 is dropped.
    pub fn plaquette_variable(&self, r: usize, c: usize) -> Option<usize> {
        let l = self.l;
        let p = (r % l) * l + c % l;
        (p != 0).then(|| l * l - 1 + p - 1)
    }
}

/// Stars `1..L²` then plaquettes `1..L²`, optionally followed by the two
/// logical Z loops.
pub fn toric_generators(lat: &ToricLattice, with_logical_z: bool) -> Result<StabilizerGenerators> {
    let mut gens: Vec<PauliOperator> = lat.all_stars().into_iter().skip(1).collect();
    gens.extend(lat.all_plaquettes().into_iter().skip(1));
    if with_logical_z {
        gens.extend(lat.logical_z());
    }
    let rank = independence_check(&gens);
    if rank != gens.len() {
        return Err(Error::Dependent {
            rank,
            count: gens.len(),
        });
    }
    StabilizerGenerators::with_n(lat.n_qubits(), gens)
}

/// Parity polynomial of the toric code in the `2L² − 2` generator variables.
pub fn toric_parity_polynomial(lat: &ToricLattice) -> Result<BooleanPolynomial> {
    let gens = toric_generators(lat, false)?;
    parity_polynomial(&CanonicalGenerators::from_generators(&gens)?)
}
