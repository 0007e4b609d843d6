//! Closed-form gate-count and diameter bounds over schedule summaries.
//!
//! Everything here is arithmetic on `count_cheap`, `harmonic_tail` and the
//! distinct penalty values of a schedule; nothing touches dense matrices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::compile::ErrorKind;
use crate::error::{Error, Result};
use crate::schedule::{PenaltySchedule, ScheduleKind};

#[derive(Debug, Clone)]
pub struct BoundQuery<'a> {
    pub schedule: &'a PenaltySchedule,
    /// Complexity length `L`.
    pub length: f64,
    pub error: f64,
    pub error_kind: ErrorKind,
}

impl<'a> BoundQuery<'a> {
    pub fn new(schedule: &'a PenaltySchedule, length: f64, error: f64, error_kind: ErrorKind) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidArgument(format!("L = {length} must be positive")));
        }
        if !(error > 0.0 && error.is_finite()) {
            return Err(Error::InvalidArgument(format!("error = {error} must be positive")));
        }
        Ok(BoundQuery {
            schedule,
            length,
            error,
            error_kind,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.schedule.n_qubits()
    }

    fn require(&self, kind: ErrorKind) -> Result<()> {
        if self.error_kind != kind {
            return Err(Error::InvalidArgument(format!(
                "bound needs error kind {kind:?}, query has {:?}",
                self.error_kind
            )));
        }
        Ok(())
    }
}

/// `N²·4^N`, the gate count that suffices for any unitary up to constants.
pub fn trivial_cap(n_qubits: usize) -> f64 {
    (n_qubits * n_qubits) as f64 * 4f64.powi(n_qubits as i32)
}

/// `ℐ̄ = 4L²/s²`, floored at the minimum penalty 1.
pub fn killing_threshold(length: f64, s_err: f64) -> f64 {
    (4.0 * length * length / (s_err * s_err)).max(1.0)
}

/// `6π·N·𝒩^{3/2}·L²/s`.
pub fn killing_gate_formula(n_qubits: usize, n_cheap: u128, length: f64, s_err: f64) -> f64 {
    6.0 * PI * n_qubits as f64 * (n_cheap as f64).powf(1.5) * length * length / s_err
}

/// `12·N·𝒩²·L²/ε`.
pub fn op_gate_formula(n_qubits: usize, n_cheap: u128, length: f64, eps: f64) -> f64 {
    12.0 * n_qubits as f64 * (n_cheap as f64).powi(2) * length * length / eps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpVariant {
    /// Threshold from the harmonic-tail condition.
    #[serde(rename = "tail")]
    Tail,
    /// Threshold `2^N·4L²/ε²`.
    #[serde(rename = "2N")]
    TwoN,
}

impl std::fmt::Display for OpVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OpVariant::Tail => "tail",
            OpVariant::TwoN => "2N",
        })
    }
}

/// Smallest distinct penalty `ℐ̄` with `harmonic_tail(ℐ̄) ≤ ε²/4L²`.
///
/// The tail is constant between consecutive distinct penalties, so this is
/// the exact minimizer over all real thresholds. It always exists because
/// the tail vanishes at the maximum penalty.
pub fn tail_threshold(s: &PenaltySchedule, length: f64, eps: f64) -> f64 {
    let target = eps * eps / (4.0 * length * length);
    s.distinct_penalties()
        .into_iter()
        .find(|&p| s.harmonic_tail(p) <= target)
        .unwrap_or_else(|| s.max_penalty())
}

/// `2^N·4L²/ε²`, floored at 1.
pub fn two_n_threshold(n_qubits: usize, length: f64, eps: f64) -> f64 {
    (2f64.powi(n_qubits as i32) * 4.0 * length * length / (eps * eps)).max(1.0)
}

/// Threshold for an op-norm budget: whichever variant keeps fewer directions.
/// Ties go to the `2^N` variant.
pub fn op_threshold(s: &PenaltySchedule, length: f64, eps: f64) -> (f64, OpVariant) {
    let a = tail_threshold(s, length, eps);
    let b = two_n_threshold(s.n_qubits(), length, eps);
    if s.count_cheap(a) < s.count_cheap(b) {
        (a, OpVariant::Tail)
    } else {
        (b, OpVariant::TwoN)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KillingBound {
    pub threshold: f64,
    pub n_cheap: u128,
    /// The boxed formula at `ℐ̄`.
    pub bound: f64,
    pub trivial_cap: f64,
    /// `min(bound, trivial_cap)`, or 0 when the target is already within `s`.
    pub reported: f64,
    pub already_close: bool,
}

/// Gate bound for approaching within Killing distance `s`.
///
/// If `s ≥ L` the identity is already within `s` (the Killing distance
/// never exceeds the complexity length) and 0 is reported.
pub fn gate_bound_killing(q: &BoundQuery) -> Result<KillingBound> {
    q.require(ErrorKind::Killing)?;
    let n = q.n_qubits();
    let threshold = killing_threshold(q.length, q.error);
    let n_cheap = q.schedule.count_cheap(threshold);
    let bound = killing_gate_formula(n, n_cheap, q.length, q.error);
    let cap = trivial_cap(n);
    let already_close = q.error >= q.length;
    Ok(KillingBound {
        threshold,
        n_cheap,
        bound,
        trivial_cap: cap,
        reported: if already_close { 0.0 } else { bound.min(cap) },
        already_close,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpVariantBound {
    pub threshold: f64,
    pub n_cheap: u128,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpBound {
    pub variant: OpVariant,
    pub threshold: f64,
    pub n_cheap: u128,
    pub bound: f64,
    pub tail: OpVariantBound,
    pub two_n: OpVariantBound,
    pub trivial_cap: f64,
    pub reported: f64,
    pub already_close: bool,
}

/// Gate bound for approaching within operator-norm distance `ε`.
///
/// Both threshold variants are evaluated and the smaller bound wins (ties to
/// the `2^N` variant). `||U − 𝟙||_op ≤ min(2, sqrt(Σ 1/ℐ)·L)`, so when `ε`
/// reaches that value no gates are needed and 0 is reported.
pub fn gate_bound_op(q: &BoundQuery) -> Result<OpBound> {
    q.require(ErrorKind::Op)?;
    Ok(op_bound(q.schedule, q.length, q.error))
}

fn op_bound(s: &PenaltySchedule, length: f64, eps: f64) -> OpBound {
    let n = s.n_qubits();
    let eval = |threshold: f64| {
        let n_cheap = s.count_cheap(threshold);
        OpVariantBound {
            threshold,
            n_cheap,
            bound: op_gate_formula(n, n_cheap, length, eps),
        }
    };
    let tail = eval(tail_threshold(s, length, eps));
    let two_n = eval(two_n_threshold(n, length, eps));
    let (variant, best) = if tail.bound < two_n.bound {
        (OpVariant::Tail, tail)
    } else {
        (OpVariant::TwoN, two_n)
    };
    let cap = trivial_cap(n);
    let already_close = eps >= 2f64.min(s.harmonic_sum().sqrt() * length);
    OpBound {
        variant,
        threshold: best.threshold,
        n_cheap: best.n_cheap,
        bound: best.bound,
        tail,
        two_n,
        trivial_cap: cap,
        reported: if already_close { 0.0 } else { best.bound.min(cap) },
        already_close,
    }
}

/// Gate bound for reaching inner-product error `ε` from a fixed state.
///
/// The state error never exceeds the operator-norm error, so the op-norm
/// evaluator applies with `ε` in its place.
pub fn state_gate_bound(q: &BoundQuery) -> Result<OpBound> {
    q.require(ErrorKind::Op)?;
    Ok(op_bound(q.schedule, q.length, q.error))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    /// `(2/π)/sqrt(ℐ_max)`.
    pub lower_coeff: f64,
    /// `sqrt(Σ_I 1/ℐ(σ_I))` over all `4^N` directions.
    pub upper_coeff: f64,
}

pub fn op_vs_complexity_sandwich(s: &PenaltySchedule) -> Sandwich {
    Sandwich {
        lower_coeff: 2.0 / PI / s.max_penalty().sqrt(),
        upper_coeff: s.harmonic_sum().sqrt(),
    }
}

/// A diameter lower bound. Both numbers are order-of-magnitude estimates:
/// sub-exponential factors are dropped in the underlying counting argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiameterBound {
    /// The max–min expression evaluated on the exact schedule summaries.
    pub raw: f64,
    /// The expression with leading-order counts substituted, where a model exists.
    pub simplified: Option<f64>,
    pub label: &'static str,
}

const ORDER_OF_MAGNITUDE: &str = "order-of-magnitude";

/// Piece of a count model: on `[lo, hi)` the cheap count is `count(ℐ̄)` and
/// the harmonic tail is `tail(ℐ̄)`.
struct Piece {
    lo: f64,
    hi: f64,
    count: Box<dyn Fn(f64) -> f64>,
    tail: Box<dyn Fn(f64) -> f64>,
}

/// `sup_{x∈[lo,hi)} min(dec(x), inc(x))` for `dec` non-increasing and `inc`
/// non-decreasing, found by bisection on `log x`.
fn sup_min(dec: &dyn Fn(f64) -> f64, inc: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let hi_eval = if hi.is_finite() { hi * (1.0 - 1e-15) } else { 1e300 };
    if dec(hi_eval) >= inc(hi_eval) {
        return inc(hi_eval);
    }
    if dec(lo) <= inc(lo) {
        return dec(lo);
    }
    let (mut a, mut b) = (lo.ln(), hi_eval.ln());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if dec(m.exp()) >= inc(m.exp()) {
            a = m;
        } else {
            b = m;
        }
    }
    dec(b.exp()).min(inc(b.exp())).max(dec(a.exp()).min(inc(a.exp())))
}

/// Intervals `[p_i, p_{i+1})` between distinct penalties, with the exact
/// cheap count and tail on each (both are constant there).
fn exact_intervals(s: &PenaltySchedule) -> Vec<(f64, f64, f64, f64)> {
    let ps = s.distinct_penalties();
    ps.iter()
        .enumerate()
        .map(|(i, &p)| {
            let hi = ps.get(i + 1).copied().unwrap_or(f64::INFINITY);
            (p, hi, s.count_cheap(p) as f64, s.harmonic_tail(p))
        })
        .collect()
}

fn unitary_value(pieces: &[Piece], n: usize) -> f64 {
    let four_n = 4f64.powi(n as i32);
    pieces
        .iter()
        .map(|pc| {
            let dec = |x: f64| four_n * (pc.count)(x).powf(-1.5);
            let inc = |x: f64| x;
            sup_min(&dec, &inc, pc.lo, pc.hi).sqrt()
        })
        .fold(0.0, f64::max)
}

fn state_value(pieces: &[Piece], n: usize) -> f64 {
    let root = 2f64.powf(n as f64 / 2.0);
    let two_n = 2f64.powi(n as i32);
    pieces
        .iter()
        .map(|pc| {
            let dec = |x: f64| root / (pc.count)(x);
            let inc1 = |x: f64| {
                let t = (pc.tail)(x);
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    t.powf(-0.5)
                }
            };
            let inc2 = |x: f64| (x / two_n).sqrt();
            sup_min(&dec, &inc1, pc.lo, pc.hi).max(sup_min(&dec, &inc2, pc.lo, pc.hi))
        })
        .fold(0.0, f64::max)
}

fn exact_pieces(s: &PenaltySchedule) -> Vec<Piece> {
    exact_intervals(s)
        .into_iter()
        .map(|(lo, hi, c, t)| Piece {
            lo,
            hi,
            count: Box::new(move |_| c),
            tail: Box::new(move |_| t),
        })
        .collect()
}

/// Leading-order count models for the schedules with a simplified form.
///
/// Cliff: one cheap direction below the cliff (polynomial counts dropped),
/// `4^N/ℐ_cliff` tail. Binomial: the cheap set is dominated by the weight
/// class at the threshold, `𝒩 ≈ ℐ̄^{1/α}`, and the tail by the next class,
/// `Σ 1/ℐ ≈ ℐ̄^{(1−α)/α}`.
fn model_pieces(s: &PenaltySchedule) -> Option<Vec<Piece>> {
    let n = s.n_qubits();
    let four_n = 4f64.powi(n as i32);
    match s.kind() {
        ScheduleKind::Cliff { penalty } if *penalty > 1.0 => {
            let c = *penalty;
            Some(vec![
                Piece {
                    lo: 1.0,
                    hi: c,
                    count: Box::new(|_| 1.0),
                    tail: Box::new(move |_| four_n / c),
                },
                Piece {
                    lo: c,
                    hi: f64::INFINITY,
                    count: Box::new(move |_| four_n),
                    tail: Box::new(|_| 0.0),
                },
            ])
        }
        ScheduleKind::Binomial { alpha } if *alpha > 0.0 => {
            let a = *alpha;
            Some(vec![Piece {
                lo: 1.0,
                hi: four_n.powf(a),
                count: Box::new(move |x| x.powf(1.0 / a)),
                tail: Box::new(move |x| x.powf((1.0 - a) / a)),
            }])
        }
        _ => None,
    }
}

/// Lower bound on the typical distance (hence the diameter) in the unitary group:
/// `max_ℐ̄ sqrt(min(4^N 𝒩_ℐ̄^{−3/2}, ℐ̄))`.
pub fn diameter_lowerbound_unitary(s: &PenaltySchedule) -> DiameterBound {
    let n = s.n_qubits();
    DiameterBound {
        raw: unitary_value(&exact_pieces(s), n),
        simplified: match s.kind() {
            ScheduleKind::Exponential { x } if *x > 1.0 => Some(exponential_unitary(n, *x)),
            _ => model_pieces(s).map(|p| unitary_value(&p, n)),
        },
        label: ORDER_OF_MAGNITUDE,
    }
}

/// Lower bound on the state-space diameter: the larger of
/// `max_ℐ̄ min(2^{N/2}/𝒩_ℐ̄, (Σ_{ℐ>ℐ̄} 1/ℐ)^{−1/2})` and
/// `max_ℐ̄ min(2^{N/2}/𝒩_ℐ̄, sqrt(ℐ̄/2^N))`.
pub fn diameter_lowerbound_state(s: &PenaltySchedule) -> DiameterBound {
    let n = s.n_qubits();
    let simplified = match s.kind() {
        ScheduleKind::Binomial { alpha } if *alpha < 1.0 => None,
        ScheduleKind::Exponential { x } if *x > 1.0 => Some(exponential_state(n, *x)),
        _ => model_pieces(s).map(|p| state_value(&p, n)),
    };
    DiameterBound {
        raw: state_value(&exact_pieces(s), n),
        simplified,
        label: ORDER_OF_MAGNITUDE,
    }
}

/// `x^{k̄}` with `k̄` the smallest weight where `𝒩_k̄^{3/2} x^{2k̄} ≥ 4^N`.
fn exponential_unitary(n: usize, x: f64) -> f64 {
    let four_n = 4f64.powi(n as i32);
    let k = (0..=n)
        .find(|&k| (crate::pauli::count_weight(n, k) as f64).powf(1.5) * x.powi(2 * k as i32) >= four_n)
        .unwrap_or(n);
    x.powi(k as i32)
}

/// `2^{−N/2} x^{2k̄}` with `k̄` the smallest weight where `𝒩_k̄ x^{2k̄} ≥ 2^N`.
fn exponential_state(n: usize, x: f64) -> f64 {
    let two_n = 2f64.powi(n as i32);
    let k = (0..=n)
        .find(|&k| crate::pauli::count_weight(n, k) as f64 * x.powi(2 * k as i32) >= two_n)
        .unwrap_or(n);
    2f64.powf(-(n as f64) / 2.0) * x.powi(2 * k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    #[test]
    fn killing_bound_regression() {
        let s = PenaltySchedule::cliff(4, 1e6).unwrap();
        let q = BoundQuery::new(&s, 10.0, 0.1, ErrorKind::Killing).unwrap();
        let b = gate_bound_killing(&q).unwrap();
        assert!(close(b.threshold, 40000.0, 1e-12));
        assert_eq!(b.n_cheap, 67);
        assert!(close(b.bound, 6.0 * PI * 4.0 * 67f64.powf(1.5) * 1000.0, 1e-14));
        assert_eq!(b.trivial_cap, 16.0 * 256.0);
        assert_eq!(b.reported, b.bound.min(b.trivial_cap));
        assert_eq!(trivial_cap(3), 576.0);
    }

    #[test]
    fn killing_threshold_beyond_max_counts_everything() {
        let s = PenaltySchedule::cliff(3, 10.0).unwrap();
        let q = BoundQuery::new(&s, 10.0, 0.1, ErrorKind::Killing).unwrap();
        assert_eq!(gate_bound_killing(&q).unwrap().n_cheap, 64);
        let q = BoundQuery::new(&s, 1.0, 0.1, ErrorKind::Op).unwrap();
        assert!(gate_bound_killing(&q).is_err());
    }

    #[test]
    fn op_bound_variants() {
        // binomial(2) at N=4: class penalties 144, 2916, 11664, 6561; the tail
        // first drops below ε²/4L² = 1/64 at 6561 (tail 1/108), keeping 148
        // directions, while 2^N·4L²/ε² = 1024 keeps only 13.
        let s = PenaltySchedule::binomial(4, 2.0).unwrap();
        let q = BoundQuery::new(&s, 2.0, 0.5, ErrorKind::Op).unwrap();
        let b = gate_bound_op(&q).unwrap();
        assert_eq!(b.tail.threshold, 6561.0);
        assert_eq!(b.tail.n_cheap, 148);
        assert_eq!(b.two_n.threshold, 1024.0);
        assert_eq!(b.two_n.n_cheap, 13);
        assert_eq!(b.variant, OpVariant::TwoN);
        assert!(b.bound.is_finite() && b.bound <= b.tail.bound);

        // exponential(10): tail above 1 is 0.1255 ≤ ε²/4L² = 0.140625, while
        // 2^N·4L²/ε² ≈ 113.8 admits the 12 weight-one strings.
        let x = PenaltySchedule::exponential(4, 10.0).unwrap();
        let q = BoundQuery::new(&x, 2.0, 1.5, ErrorKind::Op).unwrap();
        let b = gate_bound_op(&q).unwrap();
        assert_eq!(b.variant, OpVariant::Tail);
        assert_eq!(b.n_cheap, 1);
        assert_eq!(b.two_n.n_cheap, 13);
        assert!(!b.already_close);
        assert!(b.bound <= b.two_n.bound);

        let s = PenaltySchedule::cliff(3, 16f64.powi(3)).unwrap();
        let q = BoundQuery::new(&s, 1.0, 0.5, ErrorKind::Op).unwrap();
        let b = gate_bound_op(&q).unwrap();
        // tail above 1 is 27/4096 < 1/16, so both variants keep the 37
        // strings of weight ≤ 2 and the tie goes to 2^N.
        assert_eq!(b.two_n.threshold, 8.0 * 4.0 / 0.25);
        assert_eq!(b.tail.threshold, 1.0);
        assert_eq!(b.tail.n_cheap, 37);
        assert_eq!(b.two_n.n_cheap, 37);
        assert_eq!(b.variant, OpVariant::TwoN);

        let q = BoundQuery::new(&s, 1.0, 2.5, ErrorKind::Op).unwrap();
        let b = gate_bound_op(&q).unwrap();
        assert!(b.already_close);
        assert_eq!(b.reported, 0.0);
    }

    #[test]
    fn sandwich_examples() {
        let s = PenaltySchedule::killing(2).unwrap();
        assert_eq!(op_vs_complexity_sandwich(&s).upper_coeff, 4.0);
        let s = PenaltySchedule::binomial(2, 1.0).unwrap();
        assert!(close(op_vs_complexity_sandwich(&s).upper_coeff, 3f64.sqrt(), 1e-15));
        let s = PenaltySchedule::cliff(3, 1e300).unwrap();
        let c = op_vs_complexity_sandwich(&s);
        assert!(close(c.upper_coeff, 37f64.sqrt(), 1e-12));
        assert!(close(c.lower_coeff, 2.0 / PI * 1e-150, 1e-12));
    }

    #[test]
    fn cliff_raw_diameter_at_n4() {
        let s = PenaltySchedule::cliff(4, 1e6).unwrap();
        let d = diameter_lowerbound_unitary(&s);
        // interval [1, 1e6): count 67, min(256·67^{-3/2}, ℐ̄) → 256·67^{-3/2}
        assert!(close(d.raw, (256.0 * 67f64.powf(-1.5)).sqrt(), 1e-12));
        assert!(close(d.simplified.unwrap(), 16.0, 1e-12));
    }

    #[test]
    fn simplified_diameters() {
        for n in [4usize, 8] {
            for c in [100.0, 4f64.powi(n as i32) * 7.0] {
                let s = PenaltySchedule::cliff(n, c).unwrap();
                let u = diameter_lowerbound_unitary(&s).simplified.unwrap();
                assert!(close(u, 2f64.powi(n as i32).min(c.sqrt()), 1e-9));
                let st = diameter_lowerbound_state(&s).simplified.unwrap();
                let expected = 2f64.powf(n as f64 / 2.0).min(2f64.powf(-(n as f64) / 2.0) * c.sqrt());
                assert!(close(st, expected, 1e-9), "{n} {c}: {st} vs {expected}");
            }
            for a in [0.5, 1.0, 2.0] {
                let s = PenaltySchedule::binomial(n, a).unwrap();
                let u = diameter_lowerbound_unitary(&s).simplified.unwrap();
                assert!(close(u, 2f64.powi(n as i32).powf(2.0 * a / (3.0 + 2.0 * a)), 1e-9));
            }
            for a in [1.5, 2.0, 3.0] {
                let s = PenaltySchedule::binomial(n, a).unwrap();
                let st = diameter_lowerbound_state(&s).simplified.unwrap();
                let expected = 2f64.powf(n as f64 / 2.0).powf((a - 1.0) / (a + 1.0));
                assert!(close(st, expected, 1e-9), "{n} {a}: {st} vs {expected}");
            }
        }
    }

    #[test]
    fn killing_metric_diameter_is_order_one() {
        let s = PenaltySchedule::killing(4).unwrap();
        let d = diameter_lowerbound_unitary(&s);
        assert!(d.raw <= 1.0);
        assert_eq!(d.label, "order-of-magnitude");
    }
}
