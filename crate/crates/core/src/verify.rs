//! Randomized inequality suite behind `cgeom verify`.
//!
//! Each check draws its inputs from `trial_rng(seed, trial)`, evaluates both
//! sides, and records the worst slack `rhs − lhs`. A failing instance keeps
//! enough information to be replayed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::bounds::op_vs_complexity_sandwich;
use crate::compile::prune_path;
use crate::error::Result;
use crate::linalg::{
    dense_pauli, expm_hermitian, fbar_distance, killing_distance, norm_fbar, norm_op, op_distance, state_error,
    DenseMatrix,
};
use crate::random::{random_path, random_state, random_unitary, trial_rng};
use crate::schedule::PenaltySchedule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub n_qubits: usize,
    pub trials: usize,
    pub seed: u64,
    /// Test hook: multiplies every measured F̄ distance, to exercise the failure path.
    pub corrupt_norm: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_qubits: 3,
            trials: 200,
            seed: 0,
            corrupt_norm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub trial: usize,
    pub seed: u64,
    pub n_qubits: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub passed: usize,
    pub failed: usize,
    /// `min (rhs − lhs)` over all instances.
    pub worst_slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcChordRow {
    pub t: f64,
    pub killing: f64,
    pub fbar: f64,
    pub chord: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n_qubits: usize,
    pub trials: usize,
    pub seed: u64,
    pub checks: BTreeMap<String, CheckResult>,
    pub arc_chord: Vec<ArcChordRow>,
    pub failures: Vec<Failure>,
    pub all_passed: bool,
}

struct Recorder {
    cfg: VerifyConfig,
    checks: BTreeMap<String, CheckResult>,
    failures: Vec<Failure>,
}

impl Recorder {
    /// Records `lhs ≤ rhs + slack`.
    fn check(&mut self, name: &str, trial: usize, lhs: f64, rhs: f64, slack: f64) {
        let entry = self.checks.entry(name.to_string()).or_insert(CheckResult {
            passed: 0,
            failed: 0,
            worst_slack: f64::INFINITY,
        });
        let margin = rhs - lhs;
        entry.worst_slack = entry.worst_slack.min(margin);
        if lhs <= rhs + slack {
            entry.passed += 1;
        } else {
            entry.failed += 1;
            self.failures.push(Failure {
                check: name.to_string(),
                trial,
                seed: self.cfg.seed,
                n_qubits: self.cfg.n_qubits,
                lhs,
                rhs,
            });
        }
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let n = cfg.n_qubits;
    let corrupt = cfg.corrupt_norm.unwrap_or(1.0);
    let mut rec = Recorder {
        cfg: *cfg,
        checks: BTreeMap::new(),
        failures: Vec::new(),
    };
    let root = 2f64.powf(n as f64 / 2.0);
    let cliff = PenaltySchedule::cliff(n, 100.0)?;
    let sandwich = op_vs_complexity_sandwich(&cliff);

    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial as u64);
        let u1 = random_unitary(n, &mut rng)?;
        let u2 = random_unitary(n, &mut rng)?;
        let ul = random_unitary(n, &mut rng)?;
        let ur = random_unitary(n, &mut rng)?;

        let s = killing_distance(&u1, &u2)?;
        let f = fbar_distance(&u1, &u2)? * corrupt;
        let o = op_distance(&u1, &u2)?;
        rec.check("fbar_le_killing", trial, f, s, 1e-9);
        rec.check("killing_le_half_pi_fbar", trial, s, PI / 2.0 * f, 1e-9);

        let diff = u1.sub(&u2)?;
        let nf = norm_fbar(&diff) * corrupt;
        let no = norm_op(&diff);
        rec.check("fbar_le_op", trial, nf, no, 1e-9);
        rec.check("op_le_root_dim_fbar", trial, no, root * nf, 1e-9);

        let psi = random_state(n, &mut rng)?;
        rec.check("state_error_le_op", trial, state_error(&u1, &u2, &psi)?, o, 1e-9);

        let wrap = |u: &DenseMatrix| -> Result<DenseMatrix> { ul.mul(u)?.mul(&ur) };
        let s2 = killing_distance(&wrap(&u1)?, &wrap(&u2)?)?;
        rec.check("killing_bi_invariant", trial, (s2 - s).abs(), 0.0, 1e-8);

        let u3 = random_unitary(n, &mut rng)?;
        let u4 = random_unitary(n, &mut rng)?;
        let lhs = op_distance(&u1.mul(&u2)?, &u3.mul(&u4)?)?;
        rec.check(
            "op_composition",
            trial,
            lhs,
            op_distance(&u1, &u3)? + op_distance(&u2, &u4)?,
            1e-9,
        );

        let path = random_path(&cliff, 3, 1.0 + 3.0 * trial as f64 / cfg.trials.max(1) as f64, &mut rng)?;
        let l = path.complexity_length(&cliff)?;
        let target = path.evolve()?;
        let id = DenseMatrix::identity(n)?;
        rec.check(
            "op_le_harmonic_root_times_l",
            trial,
            op_distance(&target, &id)?,
            sandwich.upper_coeff * l,
            1e-8,
        );
        rec.check("killing_le_l", trial, killing_distance(&target, &id)?, l, 1e-8);

        let threshold = 10.0;
        let pruned = prune_path(&path, &cliff, threshold)?.evolve()?;
        rec.check(
            "prune_killing_le_l_over_root_threshold",
            trial,
            killing_distance(&target, &pruned)?,
            l / threshold.sqrt(),
            1e-8,
        );
    }

    let sz = dense_pauli(&"Z".parse()?)?;
    let one = DenseMatrix::identity(1)?;
    let mut arc_chord = Vec::with_capacity(100);
    for k in 1..=100 {
        // U(1) phase e^{it}: use the qubit rotation e^{iσz t}, whose two
        // eigenphases ±t give the same Killing distance and chord.
        let t = PI * k as f64 / 100.0;
        let u = expm_hermitian(&sz, t)?;
        let killing = killing_distance(&one, &u)?;
        let fbar = fbar_distance(&one, &u)? * corrupt;
        let chord = 2.0 * (t / 2.0).sin();
        rec.check("arc_chord", k, (fbar - chord).abs(), 0.0, 1e-12);
        rec.check("arc_length", k, (killing - t).abs(), 0.0, 1e-12);
        arc_chord.push(ArcChordRow {
            t,
            killing,
            fbar,
            chord,
        });
    }

    let all_passed = rec.failures.is_empty();
    Ok(VerifyReport {
        n_qubits: n,
        trials: cfg.trials,
        seed: cfg.seed,
        checks: rec.checks,
        arc_chord,
        failures: rec.failures,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let r = run_verify(&VerifyConfig {
            n_qubits: 2,
            trials: 10,
            seed: 5,
            corrupt_norm: None,
        })
        .unwrap();
        assert!(r.all_passed, "{:?}", r.failures);
        assert_eq!(r.arc_chord.len(), 100);
    }

    #[test]
    fn corrupted_norm_fails() {
        let r = run_verify(&VerifyConfig {
            n_qubits: 2,
            trials: 5,
            seed: 5,
            corrupt_norm: Some(3.0),
        })
        .unwrap();
        assert!(!r.all_passed);
        assert!(!r.failures.is_empty());
    }
}
