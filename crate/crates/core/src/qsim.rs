//! Dense statevector oracle for small stabilizer instances.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::game::GameInstance;
use crate::pauli::{PauliOperator, StabilizerGenerators};

pub const MAX_QUBITS: usize = 14;

const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::CapExceeded {
            what: "statevector qubit",
            value: n,
            cap: MAX_QUBITS,
        });
    }
    Ok(())
}

fn i_pow(e: u8) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_n(n)?;
        if index >= 1 << n {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_n(n)?;
        let mut s = StateVector { n, amps };
        if !s.normalize() {
            return Err(Error::InvalidInput("zero vector".into()));
        }
        Ok(s)
    }

    /// Haar-random state from normalized complex Gaussians.
    pub fn random(n: usize, rng: &mut impl Rng) -> Result<Self> {
        check_n(n)?;
        let amps = (0..1usize << n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn normalize(&mut self) -> bool {
        let norm = self.norm_sqr();
        if norm < NORM_TOL {
            return false;
        }
        let s = 1.0 / norm.sqrt();
        for a in &mut self.amps {
            *a *= s;
        }
        true
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_len(self.n, other.n)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `P|ψ⟩` using `P|k⟩ = i^(e + #Y) (−1)^|k∧z| |k ⊕ x⟩`.
    pub fn apply(&self, p: &PauliOperator) -> Result<StateVector> {
        check_len(self.n, p.n())?;
        let x = p.x_bits().low_u64() as usize;
        let z = p.z_bits().low_u64() as usize;
        let phase = i_pow(((p.i_exponent() as usize + p.weight_y()) % 4) as u8);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (k, a) in self.amps.iter().enumerate() {
            let sign = if (k & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            out[k ^ x] = phase * a * sign;
        }
        Ok(StateVector {
            n: self.n,
            amps: out,
        })
    }
}

/// Projects a seed onto the joint +1 eigenspace of the generators. Seeds are
/// the computational basis states in index order.
pub fn stabilizer_state(gens: &StabilizerGenerators) -> Result<StateVector> {
    let n = gens.n();
    check_n(n)?;
    for seed in 0..1usize << n {
        let mut s = StateVector::basis(n, seed)?;
        for g in gens.generators() {
            let gs = s.apply(g)?;
            for (a, b) in s.amps.iter_mut().zip(gs.amps) {
                *a = (*a + b) * 0.5;
            }
        }
        if s.normalize() {
            return Ok(s);
        }
    }
    Err(Error::Verification(
        "projector annihilates every seed; inconsistent signs".into(),
    ))
}

pub fn expectation(p: &PauliOperator, s: &StateVector) -> Result<f64> {
    let v = s.inner(&s.apply(p)?)?;
    if p.has_real_sign() && v.im.abs() >= NORM_TOL {
        return Err(Error::Verification(format!(
            "Hermitian expectation has imaginary part {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// `½ + (1/2|Q|) Σ_q ⟨ψ|M_q|ψ⟩` with `M_q` the signed query stabilizer.
pub fn quantum_win_probability(g: &GameInstance, s: &StateVector) -> Result<f64> {
    check_len(g.n(), s.n)?;
    let parity = g.parity();
    let mut total = 0.0;
    for q in 0..g.query_count() {
        let sign = if parity.get(q) { 2 } else { 0 };
        let m = PauliOperator::from_letters(&g.query_letters(q), sign);
        total += expectation(&m, s)?;
    }
    Ok(0.5 + total / (2.0 * g.query_count() as f64))
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{build_game, QuerySet};
    use crate::states::{
        ghz_generators, graph_generators, toric_generators, GraphSpec, ToricLattice,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ghz(n: usize, minus: bool) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[(1 << n) - 1] = Complex64::new(if minus { -1.0 } else { 1.0 }, 0.0);
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    #[test]
    fn ghz3_amplitudes() {
        let s = stabilizer_state(&ghz_generators(3).unwrap()).unwrap();
        for (k, a) in s.amplitudes().iter().enumerate() {
            let want = if k == 0 || k == 7 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!(close(a.re, want, 1e-12) && a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_graph_state_phases() {
        for n in 3..=6 {
            let g = GraphSpec::cycle(n).unwrap();
            let s = stabilizer_state(&graph_generators(&g).unwrap()).unwrap();
            let scale = (0.5f64).powf(n as f64 / 2.0);
            for (k, a) in s.amplitudes().iter().enumerate() {
                let edges = g
                    .edges()
                    .iter()
                    .filter(|&&(u, v)| (k >> u) & 1 == 1 && (k >> v) & 1 == 1)
                    .count();
                let want = if edges % 2 == 1 { -scale } else { scale };
                assert!(
                    close(a.re, want, 1e-12) && a.im.abs() < 1e-12,
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn single_x_gives_plus() {
        let gens = StabilizerGenerators::parse("X").unwrap();
        let s = stabilizer_state(&gens).unwrap();
        assert!(close(s.amplitudes()[0].re, FRAC_1_SQRT_2, 1e-12));
        assert!(close(s.amplitudes()[1].re, FRAC_1_SQRT_2, 1e-12));
    }

    #[test]
    fn signed_expectation() {
        let p: PauliOperator = "+Z".parse().unwrap();
        let s = StateVector::basis(1, 0).unwrap();
        assert!(close(expectation(&p, &s).unwrap(), 1.0, 1e-12));
        assert!(close(expectation(&p.negated(), &s).unwrap(), -1.0, 1e-12));
    }

    #[test]
    fn expectation_examples() {
        let x: PauliOperator = "X".parse().unwrap();
        assert!(close(
            expectation(&x, &StateVector::basis(1, 0).unwrap()).unwrap(),
            0.0,
            1e-12
        ));
        let s = stabilizer_state(&ghz_generators(4).unwrap()).unwrap();
        let zi: PauliOperator = "ZIII".parse().unwrap();
        assert!(close(expectation(&zi, &s).unwrap(), 0.0, 1e-12));
        let yyxx: PauliOperator = "-YYXX".parse().unwrap();
        assert!(close(expectation(&yyxx, &s).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn every_group_element_stabilizes() {
        let mut instances = vec![ghz_generators(5).unwrap()];
        for n in 3..=6 {
            instances.push(graph_generators(&GraphSpec::cycle(n).unwrap()).unwrap());
        }
        instances.push(toric_generators(&ToricLattice::new(2).unwrap(), false).unwrap());
        for gens in instances {
            let s = stabilizer_state(&gens).unwrap();
            assert!(close(s.norm_sqr(), 1.0, 1e-12));
            for m in gens.elements().unwrap() {
                assert!(close(expectation(&m, &s).unwrap(), 1.0, 1e-10), "{m}");
            }
        }
    }

    #[test]
    fn win_probability_examples() {
        let gens = ghz_generators(3).unwrap();
        let g = build_game(&gens, &QuerySet::Full).unwrap();
        let s = stabilizer_state(&gens).unwrap();
        assert!(close(quantum_win_probability(&g, &s).unwrap(), 1.0, 1e-12));
        let b = StateVector::basis(3, 2).unwrap();
        assert!(close(quantum_win_probability(&g, &b).unwrap(), 0.5, 1e-12));
        let coset = build_game(&gens, &"coset:x1=1".parse().unwrap()).unwrap();
        assert!(close(
            quantum_win_probability(&coset, &ghz(3, true)).unwrap(),
            0.0,
            1e-12
        ));
        assert!(close(
            quantum_win_probability(&coset, &ghz(3, false)).unwrap(),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn fidelity_formulas_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 3..=5 {
            let gens = ghz_generators(n).unwrap();
            let full = build_game(&gens, &QuerySet::Full).unwrap();
            let coset = build_game(&gens, &"coset:x1=1".parse().unwrap()).unwrap();
            let (plus, minus) = (ghz(n, false), ghz(n, true));
            for _ in 0..20 {
                let psi = StateVector::random(n, &mut rng).unwrap();
                let fp = fidelity(&psi, &plus).unwrap();
                let fm = fidelity(&psi, &minus).unwrap();
                let p = quantum_win_probability(&full, &psi).unwrap();
                assert!(close(p, 0.5 * (1.0 + fp), 1e-10));
                let p = quantum_win_probability(&coset, &psi).unwrap();
                assert!(close(p, 0.5 * (1.0 + fp - fm), 1e-10));
            }
        }
    }

    #[test]
    fn fidelity_basics() {
        let a = StateVector::basis(2, 1).unwrap();
        let b = StateVector::basis(2, 2).unwrap();
        assert!(close(fidelity(&a, &a).unwrap(), 1.0, 1e-15));
        assert!(close(fidelity(&a, &b).unwrap(), 0.0, 1e-15));
        assert!(fidelity(&a, &StateVector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            StateVector::basis(15, 0),
            Err(Error::CapExceeded { .. })
        ));
    }
}
