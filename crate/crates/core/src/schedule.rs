//! Penalty schedules `ℐ(σ_I)` that are diagonal in the Pauli basis.
//!
//! Weight-dependent kinds (cliff, binomial, exponential, delayed cliff and
//! weight tables) are evaluated per weight class, so cheap-direction counts
//! and harmonic tails are closed-form sums over `k ∈ 0..=N` with
//! `𝒩_k = C(N,k)·3^k` strings per class. Explicit maps list individual
//! strings and give every unlisted string a default penalty.
//!
//! Conventions: every penalty is ≥ 1, the identity string always costs 1,
//! "cheap" means `ℐ ≤ threshold` and "pruned" means `ℐ > threshold`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{count_weight, PauliString, MAX_QUBITS};

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleKind {
    /// `ℐ_k = 1` for `k ≤ 2`, `penalty` for `k ≥ 3`.
    Cliff { penalty: f64 },
    /// `ℐ_k = 𝒩_k^α`.
    Binomial { alpha: f64 },
    /// `ℐ_k = x^{2k}`.
    Exponential { x: f64 },
    /// `ℐ_k = 1` for `k < k0`, `penalty` for `k ≥ k0` (weight 0 stays 1).
    DelayedCliff { k0: usize, penalty: f64 },
    /// `ℐ_k = penalties[k]`.
    Table { penalties: Vec<f64> },
    /// Listed strings get their own penalty, all others `default`.
    Explicit {
        penalties: BTreeMap<PauliString, f64>,
        default: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySchedule {
    n_qubits: usize,
    kind: ScheduleKind,
}

fn check_penalty(what: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 1.0 {
        return Err(Error::InvalidSchedule(format!(
            "{what} penalty {v} must be finite and >= 1"
        )));
    }
    Ok(())
}

impl PenaltySchedule {
    pub fn new(n_qubits: usize, kind: ScheduleKind) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCap {
                what: "PenaltySchedule",
                n: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        match &kind {
            ScheduleKind::Cliff { penalty } => check_penalty("cliff", *penalty)?,
            ScheduleKind::Binomial { alpha } => {
                if !alpha.is_finite() || *alpha < 0.0 {
                    return Err(Error::InvalidSchedule(format!(
                        "binomial alpha {alpha} must be finite and >= 0"
                    )));
                }
            }
            ScheduleKind::Exponential { x } => {
                if !x.is_finite() || *x < 1.0 {
                    return Err(Error::InvalidSchedule(format!(
                        "exponential base {x} must be finite and >= 1"
                    )));
                }
            }
            ScheduleKind::DelayedCliff { k0, penalty } => {
                check_penalty("delayed cliff", *penalty)?;
                if *k0 == 0 {
                    return Err(Error::InvalidSchedule("delayed cliff k0 must be >= 1".into()));
                }
            }
            ScheduleKind::Table { penalties } => {
                if penalties.len() != n_qubits + 1 {
                    return Err(Error::InvalidSchedule(format!(
                        "table needs {} weight entries (0..={n_qubits}), got {}",
                        n_qubits + 1,
                        penalties.len()
                    )));
                }
                for (k, &v) in penalties.iter().enumerate() {
                    check_penalty(&format!("table weight {k}"), v)?;
                }
                if penalties[0] != 1.0 {
                    return Err(Error::InvalidSchedule(
                        "table weight-0 penalty must be 1 (identity direction)".into(),
                    ));
                }
            }
            ScheduleKind::Explicit { penalties, default } => {
                check_penalty("explicit default", *default)?;
                for (p, &v) in penalties {
                    if p.n_qubits() != n_qubits {
                        return Err(Error::SizeMismatch {
                            expected: n_qubits,
                            found: p.n_qubits(),
                        });
                    }
                    check_penalty(&format!("explicit {p}"), v)?;
                    if p.is_identity() && v != 1.0 {
                        return Err(Error::InvalidSchedule("identity-string penalty must be 1".into()));
                    }
                }
            }
        }
        Ok(PenaltySchedule { n_qubits, kind })
    }

    pub fn cliff(n_qubits: usize, penalty: f64) -> Result<Self> {
        Self::new(n_qubits, ScheduleKind::Cliff { penalty })
    }

    pub fn binomial(n_qubits: usize, alpha: f64) -> Result<Self> {
        Self::new(n_qubits, ScheduleKind::Binomial { alpha })
    }

    pub fn exponential(n_qubits: usize, x: f64) -> Result<Self> {
        Self::new(n_qubits, ScheduleKind::Exponential { x })
    }

    pub fn delayed_cliff(n_qubits: usize, k0: usize, penalty: f64) -> Result<Self> {
        Self::new(n_qubits, ScheduleKind::DelayedCliff { k0, penalty })
    }

    /// The bi-invariant (Killing) schedule: every penalty 1.
    pub fn killing(n_qubits: usize) -> Result<Self> {
        Self::new(
            n_qubits,
            ScheduleKind::Table {
                penalties: vec![1.0; n_qubits + 1],
            },
        )
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kind(&self) -> &ScheduleKind {
        &self.kind
    }

    pub fn is_weight_dependent(&self) -> bool {
        !matches!(self.kind, ScheduleKind::Explicit { .. })
    }

    /// Penalty of every weight-`k` string, for weight-dependent kinds.
    pub fn weight_penalty(&self, k: usize) -> Option<f64> {
        if k > self.n_qubits {
            return None;
        }
        let v = match &self.kind {
            ScheduleKind::Cliff { penalty } => {
                if k <= 2 {
                    1.0
                } else {
                    *penalty
                }
            }
            ScheduleKind::Binomial { alpha } => (count_weight(self.n_qubits, k) as f64).powf(*alpha),
            ScheduleKind::Exponential { x } => x.powi(2 * k as i32),
            ScheduleKind::DelayedCliff { k0, penalty } => {
                if k == 0 || k < *k0 {
                    1.0
                } else {
                    *penalty
                }
            }
            ScheduleKind::Table { penalties } => penalties[k],
            ScheduleKind::Explicit { .. } => return None,
        };
        Some(if k == 0 { 1.0 } else { v })
    }

    /// `ℐ(σ_p)`.
    pub fn penalty(&self, p: &PauliString) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        Ok(self.penalty_unchecked(p))
    }

    pub(crate) fn penalty_unchecked(&self, p: &PauliString) -> f64 {
        match &self.kind {
            ScheduleKind::Explicit { penalties, default } => {
                if p.is_identity() {
                    1.0
                } else {
                    penalties.get(p).copied().unwrap_or(*default)
                }
            }
            _ => self.weight_penalty(p.weight()).expect("weight within range"),
        }
    }

    /// `(penalty, multiplicity)` classes covering all `4^N` strings.
    fn classes(&self) -> Vec<(f64, u128)> {
        match &self.kind {
            ScheduleKind::Explicit { penalties, default } => {
                let total = 1u128 << (2 * self.n_qubits);
                let mut listed: u128 = 0;
                let mut out = vec![(1.0, 1u128)];
                for (p, &v) in penalties {
                    if !p.is_identity() {
                        out.push((v, 1));
                        listed += 1;
                    }
                }
                out.push((*default, total - 1 - listed));
                out
            }
            _ => (0..=self.n_qubits)
                .map(|k| (self.weight_penalty(k).unwrap(), count_weight(self.n_qubits, k)))
                .collect(),
        }
    }

    /// `𝒩_ℐ̄ = #{σ_I : ℐ(σ_I) ≤ threshold}`.
    pub fn count_cheap(&self, threshold: f64) -> u128 {
        self.classes()
            .into_iter()
            .filter(|&(v, _)| v <= threshold)
            .map(|(_, m)| m)
            .sum()
    }

    /// `Σ_{ℐ(σ_I) > threshold} 1/ℐ(σ_I)`.
    pub fn harmonic_tail(&self, threshold: f64) -> f64 {
        self.classes()
            .into_iter()
            .filter(|&(v, _)| v > threshold)
            .map(|(v, m)| m as f64 / v)
            .sum()
    }

    /// `Σ_I 1/ℐ(σ_I)` over all `4^N` directions, identity included.
    pub fn harmonic_sum(&self) -> f64 {
        self.classes().into_iter().map(|(v, m)| m as f64 / v).sum()
    }

    pub fn max_penalty(&self) -> f64 {
        self.classes()
            .into_iter()
            .filter(|&(_, m)| m > 0)
            .map(|(v, _)| v)
            .fold(1.0, f64::max)
    }

    pub fn min_penalty(&self) -> f64 {
        self.classes()
            .into_iter()
            .filter(|&(_, m)| m > 0)
            .map(|(v, _)| v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Distinct penalty values that occur, ascending.
    pub fn distinct_penalties(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .classes()
            .into_iter()
            .filter(|&(_, m)| m > 0)
            .map(|(v, _)| v)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    /// Total number of directions, `4^N`.
    pub fn total_directions(&self) -> u128 {
        1u128 << (2 * self.n_qubits)
    }

    /// Short human label, e.g. `cliff(1e6)`.
    pub fn label(&self) -> String {
        match &self.kind {
            ScheduleKind::Cliff { penalty } => format!("cliff({penalty})"),
            ScheduleKind::Binomial { alpha } => format!("binomial({alpha})"),
            ScheduleKind::Exponential { x } => format!("exponential({x})"),
            ScheduleKind::DelayedCliff { k0, penalty } => format!("delayed_cliff({k0},{penalty})"),
            ScheduleKind::Table { .. } => "table".into(),
            ScheduleKind::Explicit { .. } => "explicit".into(),
        }
    }
}

/// JSON descriptor, e.g. `{"kind": "cliff", "penalty": 1e6}`.
///
/// `n_qubits` is optional; when absent the qubit count comes from context
/// (the path being compiled, or `--n` on the command line).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleDescriptor {
    Cliff {
        penalty: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    Binomial {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    Exponential {
        x: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    DelayedCliff {
        k0: usize,
        penalty: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    /// Weight strings `"0"`..`"N"` to penalties; a missing `"0"` means 1.
    Table {
        penalties: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
    Explicit {
        penalties: BTreeMap<String, f64>,
        #[serde(default = "one")]
        default: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_qubits: Option<usize>,
    },
}

fn one() -> f64 {
    1.0
}

impl ScheduleDescriptor {
    pub fn n_qubits(&self) -> Option<usize> {
        match self {
            ScheduleDescriptor::Cliff { n_qubits, .. }
            | ScheduleDescriptor::Binomial { n_qubits, .. }
            | ScheduleDescriptor::Exponential { n_qubits, .. }
            | ScheduleDescriptor::DelayedCliff { n_qubits, .. }
            | ScheduleDescriptor::Table { n_qubits, .. }
            | ScheduleDescriptor::Explicit { n_qubits, .. } => *n_qubits,
        }
    }

    /// Builds the schedule for `n_qubits`, which must agree with any embedded count.
    pub fn build(&self, n_qubits: usize) -> Result<PenaltySchedule> {
        if let Some(n) = self.n_qubits() {
            if n != n_qubits {
                return Err(Error::SizeMismatch {
                    expected: n_qubits,
                    found: n,
                });
            }
        }
        let kind = match self {
            ScheduleDescriptor::Cliff { penalty, .. } => ScheduleKind::Cliff { penalty: *penalty },
            ScheduleDescriptor::Binomial { alpha, .. } => ScheduleKind::Binomial { alpha: *alpha },
            ScheduleDescriptor::Exponential { x, .. } => ScheduleKind::Exponential { x: *x },
            ScheduleDescriptor::DelayedCliff { k0, penalty, .. } => ScheduleKind::DelayedCliff {
                k0: *k0,
                penalty: *penalty,
            },
            ScheduleDescriptor::Table { penalties, .. } => {
                let mut table = vec![None; n_qubits + 1];
                table[0] = Some(1.0);
                for (key, &v) in penalties {
                    let k: usize = key
                        .parse()
                        .map_err(|_| Error::InvalidSchedule(format!("table key {key:?} is not a weight")))?;
                    if k > n_qubits {
                        return Err(Error::InvalidSchedule(format!(
                            "table weight {k} exceeds {n_qubits} qubits"
                        )));
                    }
                    table[k] = Some(v);
                }
                let penalties = table
                    .into_iter()
                    .enumerate()
                    .map(|(k, v)| v.ok_or_else(|| Error::InvalidSchedule(format!("table is missing weight {k}"))))
                    .collect::<Result<Vec<_>>>()?;
                ScheduleKind::Table { penalties }
            }
            ScheduleDescriptor::Explicit { penalties, default, .. } => {
                let map = penalties
                    .iter()
                    .map(|(k, &v)| Ok((k.parse::<PauliString>()?, v)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                ScheduleKind::Explicit {
                    penalties: map,
                    default: *default,
                }
            }
        };
        PenaltySchedule::new(n_qubits, kind)
    }

    /// Parses either inline JSON or a path to a JSON file.
    pub fn parse_arg(arg: &str) -> Result<Self> {
        let trimmed = arg.trim_start();
        let text = if trimmed.starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg)?
        };
        Ok(serde_json::from_str(&text)?)
    }
}

impl PenaltySchedule {
    pub fn descriptor(&self) -> ScheduleDescriptor {
        let n_qubits = Some(self.n_qubits);
        match &self.kind {
            ScheduleKind::Cliff { penalty } => ScheduleDescriptor::Cliff {
                penalty: *penalty,
                n_qubits,
            },
            ScheduleKind::Binomial { alpha } => ScheduleDescriptor::Binomial {
                alpha: *alpha,
                n_qubits,
            },
            ScheduleKind::Exponential { x } => ScheduleDescriptor::Exponential { x: *x, n_qubits },
            ScheduleKind::DelayedCliff { k0, penalty } => ScheduleDescriptor::DelayedCliff {
                k0: *k0,
                penalty: *penalty,
                n_qubits,
            },
            ScheduleKind::Table { penalties } => ScheduleDescriptor::Table {
                penalties: penalties.iter().enumerate().map(|(k, &v)| (k.to_string(), v)).collect(),
                n_qubits,
            },
            ScheduleKind::Explicit { penalties, default } => ScheduleDescriptor::Explicit {
                penalties: penalties.iter().map(|(p, &v)| (p.to_string(), v)).collect(),
                default: *default,
                n_qubits,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::enumerate_paulis;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn brute_count(s: &PenaltySchedule, thr: f64) -> u128 {
        enumerate_paulis(s.n_qubits(), None)
            .unwrap()
            .filter(|q| s.penalty(q).unwrap() <= thr)
            .count() as u128
    }

    fn brute_tail(s: &PenaltySchedule, thr: f64) -> f64 {
        enumerate_paulis(s.n_qubits(), None)
            .unwrap()
            .map(|q| s.penalty(&q).unwrap())
            .filter(|&v| v > thr)
            .map(|v| 1.0 / v)
            .sum()
    }

    #[test]
    fn penalty_examples() {
        let n = 4;
        let cliff = PenaltySchedule::cliff(n, 4f64.powi(n as i32)).unwrap();
        assert_eq!(cliff.penalty(&p("XZII")).unwrap(), 1.0);
        assert_eq!(cliff.penalty(&p("XZYI")).unwrap(), 256.0);

        let binom = PenaltySchedule::binomial(3, 1.0).unwrap();
        assert_eq!(binom.penalty(&p("XZI")).unwrap(), 27.0);

        let expo = PenaltySchedule::exponential(3, 2.0).unwrap();
        assert_eq!(expo.penalty(&p("XYZ")).unwrap(), 64.0);
        assert_eq!(expo.penalty(&p("III")).unwrap(), 1.0);

        assert!(cliff.penalty(&p("XX")).is_err());
    }

    #[test]
    fn count_cheap_examples() {
        let cliff = PenaltySchedule::cliff(2, 1e6).unwrap();
        assert_eq!(cliff.count_cheap(1.0), 16);
        let n = 2.0f64;
        assert_eq!((9.0 * n * n - 3.0 * n + 2.0) / 2.0, 16.0);

        let cliff4 = PenaltySchedule::cliff(4, 1e6).unwrap();
        assert_eq!(cliff4.count_cheap(1.0), 67);
        assert_eq!(brute_count(&cliff4, 1.0), 67);

        let binom = PenaltySchedule::binomial(3, 1.5).unwrap();
        assert_eq!(binom.count_cheap(binom.max_penalty()), 64);
    }

    #[test]
    fn harmonic_tail_examples() {
        let binom = PenaltySchedule::binomial(2, 1.0).unwrap();
        // 6 weight-1 strings at 1/6, 9 weight-2 strings at 1/9
        assert!((binom.harmonic_tail(1.0) - 2.0).abs() < 1e-15);
        assert!((brute_tail(&binom, 1.0) - 2.0).abs() < 1e-14);
        let cliff = PenaltySchedule::cliff(2, 123.0).unwrap();
        assert_eq!(cliff.harmonic_tail(1.0), 0.0);
        assert_eq!(binom.harmonic_tail(binom.max_penalty()), 0.0);
    }

    #[test]
    fn extrema_examples() {
        let expo = PenaltySchedule::exponential(3, 2.0).unwrap();
        assert_eq!(expo.max_penalty(), 64.0);
        assert_eq!(expo.min_penalty(), 1.0);
        assert_eq!(PenaltySchedule::cliff(4, 100.0).unwrap().max_penalty(), 100.0);
    }

    #[test]
    fn explicit_matches_enumeration() {
        let mut map = BTreeMap::new();
        map.insert(p("XX"), 7.0);
        map.insert(p("ZY"), 3.5);
        map.insert(p("IZ"), 12.0);
        let s = PenaltySchedule::new(
            2,
            ScheduleKind::Explicit {
                penalties: map,
                default: 2.0,
            },
        )
        .unwrap();
        let brute_max = enumerate_paulis(2, None)
            .unwrap()
            .map(|q| s.penalty(&q).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(s.max_penalty(), brute_max);
        for thr in [1.0, 2.0, 3.5, 5.0, 7.0, 12.0, 100.0] {
            assert_eq!(s.count_cheap(thr), brute_count(&s, thr));
            assert!((s.harmonic_tail(thr) - brute_tail(&s, thr)).abs() < 1e-14);
        }
    }

    #[test]
    fn sub_unit_penalties_rejected() {
        assert!(PenaltySchedule::cliff(3, 0.5).is_err());
        assert!(PenaltySchedule::exponential(3, 0.9).is_err());
        assert!(PenaltySchedule::binomial(3, -1.0).is_err());
        let mut map = BTreeMap::new();
        map.insert(p("XX"), 0.5);
        assert!(PenaltySchedule::new(
            2,
            ScheduleKind::Explicit {
                penalties: map,
                default: 1.0
            }
        )
        .is_err());
        assert!(PenaltySchedule::new(
            2,
            ScheduleKind::Table {
                penalties: vec![2.0, 1.0, 1.0]
            }
        )
        .is_err());
    }

    #[test]
    fn delayed_cliff_penalties() {
        let s = PenaltySchedule::delayed_cliff(8, 2, 4f64.powi(8)).unwrap();
        assert_eq!(s.penalty(&p("XIIIIIII")).unwrap(), 1.0);
        assert_eq!(s.penalty(&p("XXIIIIII")).unwrap(), 65536.0);
        assert_eq!(s.penalty(&p("IIIIIIII")).unwrap(), 1.0);
    }

    #[test]
    fn descriptor_round_trip() {
        let json = r#"{"kind":"table","penalties":{"1":1,"2":5,"3":9}}"#;
        let d: ScheduleDescriptor = serde_json::from_str(json).unwrap();
        let s = d.build(3).unwrap();
        assert_eq!(s.weight_penalty(2), Some(5.0));
        assert_eq!(s.descriptor().build(3).unwrap(), s);

        let d: ScheduleDescriptor = serde_json::from_str(r#"{"kind":"cliff","penalty":1e6}"#).unwrap();
        assert_eq!(d.build(4).unwrap().max_penalty(), 1e6);
        assert!(serde_json::from_str::<ScheduleDescriptor>(r#"{"kind":"nope"}"#).is_err());

        let d: ScheduleDescriptor =
            serde_json::from_str(r#"{"kind":"explicit","penalties":{"XZ":4},"default":2}"#).unwrap();
        assert_eq!(d.build(2).unwrap().penalty(&p("XZ")).unwrap(), 4.0);
        assert!(d.build(3).is_err());
    }
}
