#![allow(dead_code)]

use rand::Rng;
use stabgame::pauli::{independence_check, Letter, PauliOperator, StabilizerGenerators};
use stabgame::states::GraphSpec;

pub fn random_group(rng: &mut impl Rng, n: usize, r: usize) -> StabilizerGenerators {
    loop {
        let mut ops: Vec<PauliOperator> = Vec::new();
        let mut tries = 0;
        while ops.len() < r && tries < 2000 {
            tries += 1;
            let letters: Vec<Letter> = (0..n)
                .map(|_| Letter::from_code(rng.random_range(0..4)))
                .collect();
            let cand = PauliOperator::from_letters(&letters, 2 * rng.random_range(0..2u8));
            if cand.is_identity_string() || !ops.iter().all(|o| o.commutes(&cand).unwrap()) {
                continue;
            }
            let mut t = ops.clone();
            t.push(cand.clone());
            if independence_check(&t) == t.len() {
                ops.push(cand);
            }
        }
        if ops.len() == r {
            return StabilizerGenerators::new(ops).unwrap();
        }
    }
}

pub fn random_connected_graph(rng: &mut impl Rng, n: usize) -> GraphSpec {
    loop {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.random_bool(0.5))
            .collect();
        let g = GraphSpec::new(n, edges).unwrap();
        if g.is_connected() {
            return g;
        }
    }
}

/// `k ∈ ker Aᵀ` and `kᵀc = 1`, checked directly on the game's columns.
pub fn refutation_holds(g: &stabgame::game::GameInstance, support: &[usize]) -> bool {
    let even = g
        .columns()
        .iter()
        .all(|col| support.iter().filter(|&&q| col.get(q)).count() % 2 == 0);
    let odd = support.iter().filter(|&&q| g.parity().get(q)).count() % 2 == 1;
    even && odd
}
