//! Seeded random inputs for verification suites and tests.
//!
//! Every generator takes a ChaCha8 stream derived from `(seed, trial)`, so any
//! trial can be replayed on its own.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{dense_hamiltonian, expm_hermitian, DenseMatrix, StateVector, C64};
use crate::path::{Path, Segment};
use crate::pauli::PauliString;
use crate::schedule::PenaltySchedule;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Independent normal coefficients on all `4^N` strings (identity included),
/// scaled to `||H||_F̄ = 1`.
pub fn random_full_hamiltonian(n_qubits: usize, rng: &mut ChaCha8Rng) -> Result<Hamiltonian> {
    let total = 1usize << (2 * n_qubits);
    let coeffs: Vec<f64> = (0..total).map(|_| normal(rng)).collect();
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    Hamiltonian::from_terms(
        n_qubits,
        coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (PauliString::from_index(n_qubits, i).unwrap(), c / norm)),
    )
}

/// `exp(iHt)` with `H` from [`random_full_hamiltonian`] and `t` uniform in `[0, π]`.
pub fn random_unitary(n_qubits: usize, rng: &mut ChaCha8Rng) -> Result<DenseMatrix> {
    let h = random_full_hamiltonian(n_qubits, rng)?;
    let t = rng.random_range(0.0..=std::f64::consts::PI);
    expm_hermitian(&dense_hamiltonian(&h)?, t)
}

pub fn random_state(n_qubits: usize, rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let dim = 1usize << n_qubits;
    let amps = (0..dim).map(|_| C64::new(normal(rng), normal(rng))).collect();
    StateVector::normalized(amps)
}

/// `terms` distinct non-identity strings with normal coefficients, not normalized.
pub fn random_sparse_hamiltonian(n_qubits: usize, terms: usize, rng: &mut ChaCha8Rng) -> Result<Hamiltonian> {
    let total = (1usize << (2 * n_qubits)) - 1;
    let mut picks = sample(rng, total, terms.min(total)).into_vec();
    picks.sort_unstable();
    let mut h = Hamiltonian::zero(n_qubits);
    for i in picks {
        h.add_term(PauliString::from_index(n_qubits, i + 1)?, normal(rng))?;
    }
    Ok(h)
}

/// A unit-norm Hamiltonian on every non-identity string with coefficient
/// `g/sqrt(ℐ)`, `g` standard normal, so expensive directions are small.
pub fn random_penalized_hamiltonian(s: &PenaltySchedule, rng: &mut ChaCha8Rng) -> Result<Hamiltonian> {
    let n = s.n_qubits();
    let total = 1usize << (2 * n);
    let mut terms = Vec::with_capacity(total - 1);
    for i in 1..total {
        let p = PauliString::from_index(n, i)?;
        terms.push((p, normal(rng) / s.penalty(&p)?.sqrt()));
    }
    let norm = terms.iter().map(|(_, c)| c * c).sum::<f64>().sqrt();
    Hamiltonian::from_terms(n, terms.into_iter().map(|(p, c)| (p, c / norm)))
}

/// A normalized path of `segments` pieces from [`random_penalized_hamiltonian`],
/// durations rescaled so the complexity length is `length`.
pub fn random_path(s: &PenaltySchedule, segments: usize, length: f64, rng: &mut ChaCha8Rng) -> Result<Path> {
    let mut segs = Vec::with_capacity(segments);
    for _ in 0..segments {
        let h = random_penalized_hamiltonian(s, rng)?;
        let d = rng.random_range(0.2..1.0);
        segs.push(Segment { duration: d, h });
    }
    let path = Path::new(s.n_qubits(), segs)?;
    let l = path.complexity_length(s)?;
    let scaled = path
        .segments()
        .iter()
        .map(|seg| Segment {
            duration: seg.duration * length / l,
            h: seg.h.clone(),
        })
        .collect();
    Path::new(s.n_qubits(), scaled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = random_full_hamiltonian(2, &mut trial_rng(7, 3)).unwrap();
        let b = random_full_hamiltonian(2, &mut trial_rng(7, 3)).unwrap();
        let c = random_full_hamiltonian(2, &mut trial_rng(7, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((a.fbar_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_path_hits_length() {
        let s = PenaltySchedule::cliff(3, 1e4).unwrap();
        let p = random_path(&s, 3, 2.5, &mut trial_rng(1, 0)).unwrap();
        assert!(p.is_normalized());
        assert!((p.complexity_length(&s).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn sparse_hamiltonian_has_requested_terms() {
        let h = random_sparse_hamiltonian(4, 50, &mut trial_rng(2, 0)).unwrap();
        assert_eq!(h.len(), 50);
        assert_eq!(h.identity_coeff(), 0.0);
    }
}
