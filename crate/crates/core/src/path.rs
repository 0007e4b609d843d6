//! Piecewise-constant curves through U(2^N).
//!
//! Segment 0 acts first, so `evolve` returns `… U_1 · U_0` with
//! `U_k = exp(i H_k d_k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{terms_from_json, terms_to_json, Hamiltonian, TermJson};
use crate::linalg::{dense_hamiltonian, expm_hermitian, DenseMatrix, MAX_DENSE_QUBITS};
use crate::pauli::{PauliString, MAX_QUBITS};
use crate::schedule::PenaltySchedule;

/// Tolerance on `||H||_F̄ = 1` for operations that require normalized input.
pub const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub h: Hamiltonian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    n_qubits: usize,
    segments: Vec<Segment>,
    /// Accumulated `Σ d·h_0` removed from identity terms by [`Path::normalize`].
    phase: f64,
}

/// `Γ = sqrt(Σ ℐ h²)` of a unit-norm Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Difficulty {
    pub gamma: f64,
}

impl Path {
    pub fn new(n_qubits: usize, segments: Vec<Segment>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCap {
                what: "Path",
                n: n_qubits,
                cap: MAX_QUBITS,
            });
        }
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::InvalidPath(format!(
                    "segment {i} has duration {}, must be positive and finite",
                    s.duration
                )));
            }
            if s.h.n_qubits() != n_qubits {
                return Err(Error::SizeMismatch {
                    expected: n_qubits,
                    found: s.h.n_qubits(),
                });
            }
        }
        Ok(Path {
            n_qubits,
            segments,
            phase: 0.0,
        })
    }

    pub fn constant(h: Hamiltonian, duration: f64) -> Result<Self> {
        Path::new(h.n_qubits(), vec![Segment { duration, h }])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Global phase angle dropped by normalization.
    pub fn dropped_phase(&self) -> f64 {
        self.phase
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Rescales every segment to `||H||_F̄ = 1`, preserving the generated unitary.
    ///
    /// Identity-string terms only contribute a global phase; they are removed
    /// and their angle is kept in [`Path::dropped_phase`].
    pub fn normalize(&self) -> Result<Path> {
        let mut phase = self.phase;
        let mut out = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            phase += s.duration * s.h.identity_coeff();
            let h = s.h.without_identity();
            let norm = h.fbar_norm();
            if norm == 0.0 {
                return Err(Error::ZeroHamiltonian(i));
            }
            out.push(Segment {
                duration: s.duration * norm,
                h: if norm == 1.0 { h } else { h.scaled(1.0 / norm) },
            });
        }
        Ok(Path {
            n_qubits: self.n_qubits,
            segments: out,
            phase,
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.segments
            .iter()
            .all(|s| (s.h.fbar_norm() - 1.0).abs() <= NORMALIZED_TOL && s.h.identity_coeff() == 0.0)
    }

    /// `s = Σ d·||H||_F̄`.
    pub fn killing_length(&self) -> f64 {
        self.segments.iter().map(|s| s.duration * s.h.fbar_norm()).sum()
    }

    /// `L = Σ d·sqrt(Σ ℐ h²)`.
    pub fn complexity_length(&self, s: &PenaltySchedule) -> Result<f64> {
        self.check_schedule(s)?;
        Ok(self
            .segments
            .iter()
            .map(|seg| seg.duration * penalized_norm(&seg.h, s))
            .sum())
    }

    pub(crate) fn check_schedule(&self, s: &PenaltySchedule) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: s.n_qubits(),
            });
        }
        Ok(())
    }

    /// The path-ordered exponential, including any dropped identity phase.
    pub fn evolve(&self) -> Result<DenseMatrix> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::QubitCap {
                what: "evolve",
                n: self.n_qubits,
                cap: MAX_DENSE_QUBITS,
            });
        }
        let mut u = DenseMatrix::identity(self.n_qubits)?;
        for s in &self.segments {
            let step = expm_hermitian(&dense_hamiltonian(&s.h)?, s.duration)?;
            u = step.mul(&u)?;
        }
        if self.phase != 0.0 {
            u = u.scale(num_complex::Complex64::from_polar(1.0, self.phase));
        }
        Ok(u)
    }

    pub fn to_json(&self) -> PathJson {
        PathJson {
            n_qubits: self.n_qubits,
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson {
                    duration: s.duration,
                    terms: terms_to_json(&s.h),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PathJson) -> Result<Path> {
        let segments = j
            .segments
            .iter()
            .map(|s| {
                Ok(Segment {
                    duration: s.duration,
                    h: terms_from_json(j.n_qubits, &s.terms)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Path::new(j.n_qubits, segments)
    }
}

pub(crate) fn penalized_norm(h: &Hamiltonian, s: &PenaltySchedule) -> f64 {
    h.iter()
        .map(|(p, c)| s.penalty_unchecked(p) * c * c)
        .sum::<f64>()
        .sqrt()
}

pub fn difficulty(h: &Hamiltonian, s: &PenaltySchedule) -> Result<Difficulty> {
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: s.n_qubits(),
            found: h.n_qubits(),
        });
    }
    let norm = h.fbar_norm();
    if (norm - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::HamiltonianNotNormalized(norm));
    }
    Ok(Difficulty {
        gamma: penalized_norm(h, s),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub duration: f64,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathJson {
    pub n_qubits: usize,
    pub segments: Vec<SegmentJson>,
}

/// Drift statistics from [`integrate_geodesic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicStats {
    pub steps: usize,
    pub gamma_initial: f64,
    /// `max_t |Γ(t) − Γ(0)| / Γ(0)`.
    pub gamma_rel_drift: f64,
    pub fbar_min: f64,
    pub fbar_max: f64,
    /// `max_t ||H(t) − H(0)||_F̄`.
    pub h_drift: f64,
}

/// Euler–Arnold right-hand side in a dense coefficient array indexed by
/// [`PauliString::index`].
///
/// For `U̇ = iHU` and a right-invariant metric the momentum `U†ℐ(H)U` is
/// conserved, so `ℐ(Ḣ) = i[H, ℐ(H)]`. In components,
/// `ℐ_K ḣ_K = Σ_J ℐ_M h_M h_J c_JK` where `σ_J σ_K = φ σ_M` and
/// `c_JK = −2iφ` for anticommuting pairs.
/// Equivalently, iterating over pairs `(J, M)` with `K = J·M` up to phase.
struct ArnoldRhs {
    n_qubits: usize,
    penalties: Vec<f64>,
    support: Vec<usize>,
}

impl ArnoldRhs {
    fn new(s: &PenaltySchedule) -> Self {
        let n = s.n_qubits();
        let total = 1usize << (2 * n);
        let penalties = (0..total)
            .map(|i| s.penalty_unchecked(&PauliString::from_index(n, i).unwrap()))
            .collect();
        ArnoldRhs {
            n_qubits: n,
            penalties,
            support: Vec::new(),
        }
    }

    fn eval(&mut self, h: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.support.clear();
        self.support
            .extend(h.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, _)| i));
        let n = self.n_qubits;
        for &j in &self.support {
            let pj = PauliString::from_index(n, j).unwrap();
            for &m in &self.support {
                let pm = PauliString::from_index(n, m).unwrap();
                if pj.commutes_unchecked(&pm) {
                    continue;
                }
                // σ_J σ_M = ψ σ_K gives σ_J σ_K = −ψ σ_M, so φ = −ψ.
                let k = pj.mul_unchecked(&pm).pauli;
                let phi = pj.mul_unchecked(&k).phase;
                let c = if phi == crate::pauli::Phase::I { 2.0 } else { -2.0 };
                let ki = k.index();
                out[ki] += self.penalties[m] * h[m] * h[j] * c;
            }
        }
        for (k, v) in out.iter_mut().enumerate() {
            if *v != 0.0 {
                *v /= self.penalties[k];
            }
        }
    }

    fn gamma(&self, h: &[f64]) -> f64 {
        h.iter()
            .zip(&self.penalties)
            .map(|(c, p)| p * c * c)
            .sum::<f64>()
            .sqrt()
    }
}

fn dense_to_hamiltonian(n: usize, h: &[f64]) -> Hamiltonian {
    Hamiltonian::from_terms(
        n,
        h.iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| (PauliString::from_index(n, i).unwrap(), c)),
    )
    .expect("finite coefficients")
}

/// Integrates the Euler–Arnold geodesic equation from `h0` with fixed-step RK4.
///
/// Returns the piecewise-constant path sampled at the left end of each step
/// (the last step is shortened to land on `total_time`) and drift statistics.
/// The flow conserves Γ but not `||H||_F̄`; no renormalization is applied.
pub fn integrate_geodesic(
    h0: &Hamiltonian,
    s: &PenaltySchedule,
    total_time: f64,
    dt: f64,
) -> Result<(Path, GeodesicStats)> {
    let n = h0.n_qubits();
    if s.n_qubits() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: s.n_qubits(),
        });
    }
    if n > crate::pauli::MAX_ENUM_QUBITS {
        return Err(Error::QubitCap {
            what: "integrate_geodesic",
            n,
            cap: crate::pauli::MAX_ENUM_QUBITS,
        });
    }
    let norm = h0.fbar_norm();
    if (norm - 1.0).abs() > NORMALIZED_TOL {
        return Err(Error::HamiltonianNotNormalized(norm));
    }
    if !(total_time.is_finite() && dt.is_finite() && dt > 0.0 && dt <= total_time) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt <= total_time, got dt={dt}, total_time={total_time}"
        )));
    }

    let total = 1usize << (2 * n);
    let mut rhs = ArnoldRhs::new(s);
    let mut h = vec![0.0; total];
    for (p, c) in h0.iter() {
        h[p.index()] = c;
    }
    let h_start = h.clone();
    let gamma0 = rhs.gamma(&h);

    let mut k1 = vec![0.0; total];
    let mut k2 = vec![0.0; total];
    let mut k3 = vec![0.0; total];
    let mut k4 = vec![0.0; total];
    let mut tmp = vec![0.0; total];

    let steps = (total_time / dt - 1e-9).ceil().max(1.0) as usize;
    let mut segments = Vec::with_capacity(steps);
    let mut stats = GeodesicStats {
        steps,
        gamma_initial: gamma0,
        gamma_rel_drift: 0.0,
        fbar_min: norm,
        fbar_max: norm,
        h_drift: 0.0,
    };
    let mut t = 0.0;
    for step in 0..steps {
        let dt_k = if step + 1 == steps { total_time - t } else { dt };
        segments.push(Segment {
            duration: dt_k,
            h: dense_to_hamiltonian(n, &h),
        });

        rhs.eval(&h, &mut k1);
        axpy(&h, 0.5 * dt_k, &k1, &mut tmp);
        rhs.eval(&tmp, &mut k2);
        axpy(&h, 0.5 * dt_k, &k2, &mut tmp);
        rhs.eval(&tmp, &mut k3);
        axpy(&h, dt_k, &k3, &mut tmp);
        rhs.eval(&tmp, &mut k4);
        for i in 0..total {
            h[i] += dt_k / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("geodesic step {step}")));
        }
        t += dt_k;

        let g = rhs.gamma(&h);
        stats.gamma_rel_drift = stats.gamma_rel_drift.max((g - gamma0).abs() / gamma0);
        let f = h.iter().map(|c| c * c).sum::<f64>().sqrt();
        stats.fbar_min = stats.fbar_min.min(f);
        stats.fbar_max = stats.fbar_max.max(f);
        let d = h
            .iter()
            .zip(&h_start)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        stats.h_drift = stats.h_drift.max(d);
    }
    Ok((Path::new(n, segments)?, stats))
}

fn axpy(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_distance;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn h(n: usize, terms: &[(&str, f64)]) -> Hamiltonian {
        Hamiltonian::from_terms(n, terms.iter().map(|(s, c)| (p(s), *c))).unwrap()
    }

    #[test]
    fn normalize_rescales_duration() {
        let path = Path::constant(h(1, &[("X", 2.0)]), 1.0).unwrap();
        let n = path.normalize().unwrap();
        assert_eq!(n.segments()[0].h, h(1, &[("X", 1.0)]));
        assert_eq!(n.segments()[0].duration, 2.0);
        assert_eq!(n.normalize().unwrap(), n);
        assert!((n.killing_length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_keeps_identity_phase() {
        let path = Path::constant(h(2, &[("II", 0.3), ("XZ", 0.5), ("YI", -1.0)]), 0.7).unwrap();
        let n = path.normalize().unwrap();
        assert!(n.is_normalized());
        let d = op_distance(&path.evolve().unwrap(), &n.evolve().unwrap()).unwrap();
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn zero_segment_rejected() {
        let path = Path::constant(h(1, &[("I", 1.0)]), 1.0).unwrap();
        assert!(matches!(path.normalize(), Err(Error::ZeroHamiltonian(0))));
    }

    #[test]
    fn length_examples() {
        let cliff = PenaltySchedule::cliff(3, 100.0).unwrap();
        let path = Path::constant(h(3, &[("XII", 1.0)]), 0.8).unwrap();
        assert!((path.killing_length() - 0.8).abs() < 1e-15);
        assert!((path.complexity_length(&cliff).unwrap() - 0.8).abs() < 1e-15);

        let path = Path::constant(h(3, &[("XYZ", 1.0)]), 0.8).unwrap();
        assert!((path.complexity_length(&cliff).unwrap() - 8.0).abs() < 1e-14);

        let path = Path::constant(h(3, &[("XII", 0.6), ("XYZ", 0.8)]), 1.0).unwrap();
        let l = path.complexity_length(&cliff).unwrap();
        assert!((l - (0.36f64 + 64.0).sqrt()).abs() < 1e-14);
        assert!(path
            .complexity_length(&PenaltySchedule::cliff(2, 1.0).unwrap())
            .is_err());
    }

    #[test]
    fn difficulty_examples() {
        let cliff = PenaltySchedule::cliff(3, 49.0).unwrap();
        assert_eq!(
            difficulty(&h(3, &[("XZI", 0.6), ("IIY", 0.8)]), &cliff).unwrap().gamma,
            1.0
        );
        assert_eq!(difficulty(&h(3, &[("XYZ", 1.0)]), &cliff).unwrap().gamma, 7.0);
        assert!(matches!(
            difficulty(&h(3, &[("XYZ", 2.0)]), &cliff),
            Err(Error::HamiltonianNotNormalized(_))
        ));
    }

    #[test]
    fn evolve_ordering() {
        use crate::linalg::dense_pauli;
        let half = std::f64::consts::FRAC_PI_2;
        let path = Path::new(
            1,
            vec![
                Segment {
                    duration: half,
                    h: h(1, &[("X", 1.0)]),
                },
                Segment {
                    duration: half,
                    h: h(1, &[("Y", 1.0)]),
                },
            ],
        )
        .unwrap();
        let ex = expm_hermitian(&dense_pauli(&p("X")).unwrap(), half).unwrap();
        let ey = expm_hermitian(&dense_pauli(&p("Y")).unwrap(), half).unwrap();
        let expected = ey.mul(&ex).unwrap();
        assert!(op_distance(&path.evolve().unwrap(), &expected).unwrap() < 1e-12);

        let flip = Path::constant(h(1, &[("X", 1.0)]), std::f64::consts::PI).unwrap();
        let minus = DenseMatrix::identity(1).unwrap().scale((-1.0).into());
        assert!(op_distance(&flip.evolve().unwrap(), &minus).unwrap() < 1e-12);
    }

    #[test]
    fn killing_geodesic_is_constant() {
        let s = PenaltySchedule::killing(2).unwrap();
        let h0 = h(2, &[("XZ", 0.6), ("YI", 0.8)]);
        let (path, stats) = integrate_geodesic(&h0, &s, 0.5, 0.01).unwrap();
        assert_eq!(path.len(), 50);
        assert!(stats.h_drift < 1e-12);
        assert!((path.total_duration() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn geodesic_conserves_gamma() {
        let s = PenaltySchedule::cliff(3, 100.0).unwrap();
        let h0 = h(3, &[("XZI", 0.5), ("YYX", 0.5), ("ZIZ", 0.5), ("XXY", 0.5)]);
        let (_, stats) = integrate_geodesic(&h0, &s, 1.0, 1e-3).unwrap();
        assert!(stats.gamma_rel_drift < 1e-6, "{stats:?}");
        assert!(stats.fbar_max - stats.fbar_min > 1e-6, "{stats:?}");
    }

    #[test]
    fn json_round_trip() {
        let path = Path::constant(h(2, &[("XZ", 0.6), ("YI", 0.8)]), 0.3).unwrap();
        let text = serde_json::to_string(&path.to_json()).unwrap();
        let back = Path::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, path);
    }
}
