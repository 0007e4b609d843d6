//! Lowering a path to a two-local circuit.
//!
//! Stages: prune expensive terms, average the pruned Hamiltonian over `S`
//! equal windows, Trotterize each window into monomial exponentials, and
//! synthesize every monomial exactly from two-local gates.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::bounds::{self, OpVariant};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::{
    dense_hamiltonian, expm_hermitian, fbar_distance, killing_distance, op_distance, DenseMatrix, MatrixJson, C64,
    MAX_DENSE_QUBITS,
};
use crate::path::{difficulty, Path, Segment};
use crate::pauli::{Letter, PauliString};
use crate::schedule::PenaltySchedule;

/// A 4×4 unitary acting on an ordered qubit pair.
///
/// Block rows and columns are indexed by `2·bit(a) + bit(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLocalGate {
    qubits: (usize, usize),
    block: Matrix4<C64>,
}

impl TwoLocalGate {
    pub fn new(a: usize, b: usize, block: Matrix4<C64>) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidArgument(format!("gate on repeated qubit {a}")));
        }
        let dev = (block.adjoint() * block - Matrix4::identity())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(TwoLocalGate { qubits: (a, b), block })
    }

    pub fn qubits(&self) -> (usize, usize) {
        self.qubits
    }

    pub fn block(&self) -> &Matrix4<C64> {
        &self.block
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<TwoLocalGate>,
    global_phase: C64,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            global_phase: C64::new(1.0, 0.0),
        }
    }

    pub fn push(&mut self, gate: TwoLocalGate) -> Result<()> {
        let (a, b) = gate.qubits;
        if a >= self.n_qubits || b >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "gate on ({a}, {b}) outside {} qubits",
                self.n_qubits
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Appends `other`, which acts after the gates already present.
    pub fn extend(&mut self, other: Circuit) {
        debug_assert_eq!(self.n_qubits, other.n_qubits);
        self.gates.extend(other.gates);
        self.global_phase *= other.global_phase;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[TwoLocalGate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn global_phase(&self) -> C64 {
        self.global_phase
    }

    pub fn multiply_phase(&mut self, phase: C64) {
        self.global_phase *= phase;
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson {
            n_qubits: self.n_qubits,
            global_phase: [self.global_phase.re, self.global_phase.im],
            gates: self
                .gates
                .iter()
                .map(|g| GateJson {
                    qubits: [g.qubits.0, g.qubits.1],
                    block: MatrixJson::from_matrix(&DMatrix::from_iterator(4, 4, g.block.iter().copied())),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &CircuitJson) -> Result<Circuit> {
        let mut c = Circuit::new(j.n_qubits);
        c.global_phase = C64::new(j.global_phase[0], j.global_phase[1]);
        for g in &j.gates {
            let m = g.block.to_matrix(4)?;
            let block = Matrix4::from_iterator(m.iter().copied());
            c.push(TwoLocalGate::new(g.qubits[0], g.qubits[1], block)?)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateJson {
    pub qubits: [usize; 2],
    pub block: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub n_qubits: usize,
    pub global_phase: [f64; 2],
    pub gates: Vec<GateJson>,
}

/// Left-multiplies the columns of `m` by the gate embedded on `n_qubits`.
fn apply_gate(m: &mut DMatrix<C64>, n_qubits: usize, gate: &TwoLocalGate) {
    let (a, b) = gate.qubits;
    let ma = 1usize << (n_qubits - 1 - a);
    let mb = 1usize << (n_qubits - 1 - b);
    let dim = 1usize << n_qubits;
    let blk = &gate.block;
    for mut col in m.column_iter_mut() {
        for i in 0..dim {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let v = [col[idx[0]], col[idx[1]], col[idx[2]], col[idx[3]]];
            for r in 0..4 {
                col[idx[r]] = blk[(r, 0)] * v[0] + blk[(r, 1)] * v[1] + blk[(r, 2)] * v[2] + blk[(r, 3)] * v[3];
            }
        }
    }
}

/// Dense unitary of a circuit: `phase · G_{n−1} ⋯ G_1 G_0`.
pub fn circuit_to_dense(c: &Circuit) -> Result<DenseMatrix> {
    if c.n_qubits > MAX_DENSE_QUBITS {
        return Err(Error::QubitCap {
            what: "circuit_to_dense",
            n: c.n_qubits,
            cap: MAX_DENSE_QUBITS,
        });
    }
    let mut m = DenseMatrix::identity(c.n_qubits)?.into_matrix();
    for g in &c.gates {
        apply_gate(&mut m, c.n_qubits, g);
    }
    m *= c.global_phase;
    DenseMatrix::from_matrix(c.n_qubits, m)
}

/// Keeps the terms with `ℐ ≤ threshold`.
pub fn prune(h: &Hamiltonian, s: &PenaltySchedule, threshold: f64) -> Result<Hamiltonian> {
    if h.n_qubits() != s.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: s.n_qubits(),
            found: h.n_qubits(),
        });
    }
    Ok(h.filtered(|p, _| s.penalty_unchecked(p) <= threshold))
}

pub fn prune_path(p: &Path, s: &PenaltySchedule, threshold: f64) -> Result<Path> {
    let segments = p
        .segments()
        .iter()
        .map(|seg| {
            Ok(Segment {
                duration: seg.duration,
                h: prune(&seg.h, s, threshold)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Path::new(p.n_qubits(), segments)
}

/// Duration-weighted averages over `S = ceil(T/delta)` windows of the time axis.
///
/// For a normalized path the time axis is the Killing length. The last
/// window is shorter when `delta` does not divide `T`; a relative slack of
/// 1e−9 keeps `T/delta` that is integral up to rounding from gaining an
/// extra sliver window.
pub fn segment_average(p: &Path, delta: f64) -> Result<Vec<Segment>> {
    let total = p.total_duration();
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta {delta} must be positive")));
    }
    if delta > total * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "delta {delta} exceeds path duration {total}"
        )));
    }
    let count = ((total / delta) - 1e-9).ceil().max(1.0) as usize;
    let edges: Vec<f64> = (0..=count)
        .map(|w| {
            if w == count {
                total
            } else {
                (w as f64 * delta).min(total)
            }
        })
        .collect();
    average_windows(p, &edges)
}

/// Averages over `count` equal windows.
pub fn segment_average_count(p: &Path, count: usize) -> Result<Vec<Segment>> {
    if count == 0 {
        return Err(Error::InvalidArgument("window count must be positive".into()));
    }
    let total = p.total_duration();
    let edges: Vec<f64> = (0..=count)
        .map(|w| {
            if w == count {
                total
            } else {
                total * w as f64 / count as f64
            }
        })
        .collect();
    average_windows(p, &edges)
}

fn average_windows(p: &Path, edges: &[f64]) -> Result<Vec<Segment>> {
    let n = p.n_qubits();
    let segs = p.segments();
    let mut starts = Vec::with_capacity(segs.len());
    let mut t = 0.0;
    for s in segs {
        starts.push(t);
        t += s.duration;
    }
    let mut out = Vec::with_capacity(edges.len() - 1);
    let mut first = 0;
    for w in edges.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let width = hi - lo;
        let mut acc: HashMap<PauliString, f64> = HashMap::new();
        let mut i = first;
        while i < segs.len() {
            let s_lo = starts[i];
            let s_hi = if i + 1 == segs.len() { t } else { starts[i + 1] };
            if s_lo >= hi {
                break;
            }
            let overlap = s_hi.min(hi) - s_lo.max(lo);
            if overlap > 0.0 {
                for (q, c) in segs[i].h.iter() {
                    *acc.entry(*q).or_insert(0.0) += overlap * c;
                }
            }
            if s_hi <= hi {
                first = i + 1;
            }
            i += 1;
        }
        let mut terms: Vec<_> = acc.into_iter().collect();
        terms.sort_by_key(|t| t.0);
        let h = Hamiltonian::from_terms(n, terms.into_iter().map(|(q, c)| (q, c / width)))?;
        out.push(Segment { duration: width, h });
    }
    Ok(out)
}

/// Which Trotter ordering to use inside each window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrotterOrder {
    #[default]
    Greedy,
    Naive,
}

/// Terms in Pauli enumeration order.
pub fn trotter_order_naive(h: &Hamiltonian) -> Vec<(PauliString, f64)> {
    h.iter().map(|(p, c)| (*p, c)).collect()
}

/// Greedy front/back deque ordering.
///
/// The returned list is the product `F_1 F_2 ⋯ F_n` read left to right,
/// `F_i = exp(i h_i σ_i δ)`. The leading error operator of such a product is
/// `½ Σ_{i<j} h_i h_j [σ_i, σ_j]`; it is anti-Hermitian, so it is tracked as
/// real `r_M` with `E = i Σ r_M σ_M`. Terms are consumed by descending
/// `|h|` (ties by Pauli order); each goes to the back or the front, whichever
/// leaves `Σ r_M²` smaller, with ties going to the back.
pub fn trotter_order_greedy(h: &Hamiltonian) -> Vec<(PauliString, f64)> {
    let mut terms = trotter_order_naive(h);
    terms.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then(a.0.cmp(&b.0)));

    let mut placed: Vec<(PauliString, f64)> = Vec::with_capacity(terms.len());
    let mut front: Vec<(PauliString, f64)> = Vec::new();
    let mut back: Vec<(PauliString, f64)> = Vec::new();
    let mut err: HashMap<PauliString, f64> = HashMap::new();
    let mut delta: Vec<(PauliString, f64)> = Vec::new();
    for (pc, hc) in terms {
        // D = ½[A, h_c σ_c] with A the sum of placed terms.
        delta.clear();
        for (pj, hj) in &placed {
            if let Some(c) = pj.commutator_unchecked(&pc) {
                delta.push((c.pauli, 0.5 * c.imag() * hj * hc));
            }
        }
        let dot: f64 = delta.iter().map(|(m, d)| err.get(m).copied().unwrap_or(0.0) * d).sum();
        let sign = if dot <= 0.0 {
            back.push((pc, hc));
            1.0
        } else {
            front.push((pc, hc));
            -1.0
        };
        for (m, d) in &delta {
            *err.entry(*m).or_insert(0.0) += sign * d;
        }
        placed.push((pc, hc));
    }
    front.reverse();
    front.extend(back);
    front
}

/// `||½ Σ_{i<j} h_i h_j [σ_i, σ_j]||²_F̄` for a product read left to right.
pub fn leading_error_sq(order: &[(PauliString, f64)]) -> f64 {
    let mut err: HashMap<PauliString, f64> = HashMap::new();
    for (i, (pi, hi)) in order.iter().enumerate() {
        for (pj, hj) in &order[i + 1..] {
            if let Some(c) = pi.commutator_unchecked(pj) {
                *err.entry(c.pauli).or_insert(0.0) += 0.5 * c.imag() * hi * hj;
            }
        }
    }
    let mut v: Vec<_> = err.into_iter().collect();
    v.sort_by_key(|t| t.0);
    v.iter().map(|(_, r)| r * r).sum()
}

fn letter_matrix(l: Letter) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match l {
        Letter::I => Matrix2::new(one, o, o, one),
        Letter::X => Matrix2::new(o, one, one, o),
        Letter::Y => Matrix2::new(o, -i, i, o),
        Letter::Z => Matrix2::new(one, o, o, -one),
    }
}

fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `exp(iθ A⊗B) = cos θ·𝟙 + i sin θ·A⊗B` for Pauli letters `A`, `B`.
fn pauli_pair_gate(a: usize, la: Letter, b: usize, lb: Letter, theta: f64) -> TwoLocalGate {
    let ab = kron2(&letter_matrix(la), &letter_matrix(lb));
    let block = Matrix4::identity() * C64::new(theta.cos(), 0.0) + ab * C64::new(0.0, theta.sin());
    TwoLocalGate { qubits: (a, b), block }
}

/// Number of gates [`synthesize_monomial`] emits for a weight-`k` string.
pub fn monomial_gate_count(k: usize) -> usize {
    match k {
        0 => 0,
        1 | 2 => 1,
        _ => 2 * k - 3,
    }
}

/// Exact two-local circuit for `exp(i σ_p · angle)`.
///
/// Weight ≤ 2 strings need one gate. For weight `k ≥ 3`, with first two
/// support qubits `q1`, `q2` carrying letters `P1`, `P2`, let `R` follow
/// `P2` in the X→Y→Z cycle and `Q` follow `R`, so `RQ = iP2`. With
/// `G = P1⊗Q` on `(q1, q2)` and `V` equal to `p` with `P1` removed and `P2`
/// replaced by `R`, `G` anticommutes with `V` and
/// `e^{iGπ/4} e^{iVz} e^{−iGπ/4} = e^{iσ_p z}`. Recursing on `V` gives
/// `2k − 3` gates.
pub fn synthesize_monomial(p: &PauliString, angle: f64) -> Result<Circuit> {
    let n = p.n_qubits();
    if !angle.is_finite() {
        return Err(Error::NonFinite(format!("monomial angle {angle}")));
    }
    let mut c = Circuit::new(n);
    if p.is_identity() {
        c.global_phase = C64::from_polar(1.0, angle);
        return Ok(c);
    }
    if n < 2 {
        return Err(Error::InvalidArgument(
            "two-local synthesis needs at least 2 qubits".into(),
        ));
    }
    let letters: Vec<Letter> = (0..n).map(|q| p.letter(q)).collect();
    let support = p.support();
    emit_monomial(&mut c.gates, &letters, &support, angle);
    Ok(c)
}

fn emit_monomial(out: &mut Vec<TwoLocalGate>, letters: &[Letter], support: &[usize], angle: f64) {
    match support.len() {
        1 => {
            let q = support[0];
            let other = if q == 0 { 1 } else { 0 };
            out.push(pauli_pair_gate(q, letters[q], other, Letter::I, angle));
        }
        2 => {
            let (a, b) = (support[0], support[1]);
            out.push(pauli_pair_gate(a, letters[a], b, letters[b], angle));
        }
        _ => {
            let (q1, q2) = (support[0], support[1]);
            let r = letters[q2].cycle_next();
            let q = r.cycle_next();
            let quarter = std::f64::consts::FRAC_PI_4;
            out.push(pauli_pair_gate(q1, letters[q1], q2, q, -quarter));
            let mut inner = letters.to_vec();
            inner[q1] = Letter::I;
            inner[q2] = r;
            emit_monomial(out, &inner, &support[1..], angle);
            out.push(pauli_pair_gate(q1, letters[q1], q2, q, quarter));
        }
    }
}

/// Circuit for `F_1 F_2 ⋯ F_n` with `F_i = exp(i h_i σ_i · duration)`.
pub fn trotter_circuit(n_qubits: usize, order: &[(PauliString, f64)], duration: f64) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits);
    for (p, h) in order.iter().rev() {
        c.extend(synthesize_monomial(p, h * duration)?);
    }
    Ok(c)
}

/// Dense `F_1 F_2 ⋯ F_n`, used to measure Trotter error independently of synthesis.
pub fn trotter_product_dense(n_qubits: usize, order: &[(PauliString, f64)], duration: f64) -> Result<DenseMatrix> {
    let mut u = DenseMatrix::identity(n_qubits)?;
    for (p, h) in order {
        let one = Hamiltonian::from_terms(n_qubits, [(*p, *h)])?;
        u = u.mul(&expm_hermitian(&dense_hamiltonian(&one)?, duration)?)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Killing,
    Op,
}

impl std::str::FromStr for ErrorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "killing" => Ok(ErrorKind::Killing),
            "op" => Ok(ErrorKind::Op),
            other => Err(Error::InvalidArgument(format!(
                "error kind must be killing or op, got {other:?}"
            ))),
        }
    }
}

/// Default cap on the number of gates a compile may emit.
pub const DEFAULT_MAX_GATES: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub target_error: f64,
    pub error_norm: ErrorKind,
    pub trotter: TrotterOrder,
    pub max_gates: u64,
    /// Compare the circuit against the exact evolution (needs `N ≤ 8`).
    pub measure: bool,
}

impl Budget {
    pub fn new(target_error: f64, error_norm: ErrorKind) -> Self {
        Budget {
            target_error,
            error_norm,
            trotter: TrotterOrder::Greedy,
            max_gates: DEFAULT_MAX_GATES,
            measure: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub killing: f64,
    pub fbar: f64,
    pub op: f64,
}

impl Distances {
    pub fn between(a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        Ok(Distances {
            killing: killing_distance(a, b)?,
            fbar: fbar_distance(a, b)?,
            op: op_distance(a, b)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageErrors {
    pub prune: Distances,
    pub average: Distances,
    pub trotter: Distances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictedErrors {
    /// `L/√ℐ̄ + (3π/2)·√𝒩·T·δ`.
    pub killing: f64,
    /// `L·min(√tail, 2^{N/2}/√ℐ̄) + 3𝒩·T·δ`.
    pub op: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub n_qubits: usize,
    pub schedule: String,
    pub error_kind: ErrorKind,
    pub target_error: f64,
    pub trotter_order: TrotterOrder,
    pub complexity_length: f64,
    pub killing_length: f64,
    pub gamma_min: f64,
    pub threshold: f64,
    pub op_variant: Option<OpVariant>,
    /// `𝒩_ℐ̄`, all directions with `ℐ ≤ ℐ̄` (identity included).
    pub n_cheap: u128,
    /// Distinct non-identity strings surviving pruning anywhere on the path.
    pub n_kept: usize,
    pub segment_count: usize,
    pub delta: f64,
    pub delta_max: f64,
    pub gate_count: usize,
    /// `2·N·S·𝒩_kept`.
    pub gate_count_cap: f64,
    pub predicted_gate_bound: f64,
    pub trivial_cap: f64,
    pub predicted_error: PredictedErrors,
    pub measured: Option<Distances>,
    pub stages: Option<StageErrors>,
}

/// Compiles a normalized path into a circuit within the error budget.
pub fn compile(p: &Path, s: &PenaltySchedule, budget: &Budget) -> Result<(Circuit, CompileReport)> {
    p.check_schedule(s)?;
    let n = p.n_qubits();
    let eps = budget.target_error;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("target error {eps} must be positive")));
    }
    if p.is_empty() {
        return Err(Error::InvalidPath("path has no segments".into()));
    }
    if !p.is_normalized() {
        return Err(Error::InvalidPath(
            "compile needs a normalized path (unit F̄-norm segments, no identity term)".into(),
        ));
    }
    let l = p.complexity_length(s)?;
    let t = p.killing_length();
    let gamma_min = p
        .segments()
        .iter()
        .map(|seg| difficulty(&seg.h, s).map(|d| d.gamma))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let (threshold, op_variant) = match budget.error_norm {
        ErrorKind::Killing => (bounds::killing_threshold(l, eps), None),
        ErrorKind::Op => {
            let (thr, v) = bounds::op_threshold(s, l, eps);
            (thr, Some(v))
        }
    };
    let n_cheap = s.count_cheap(threshold);

    let pruned = prune_path(p, s, threshold)?;
    let kept: BTreeSet<PauliString> = pruned
        .segments()
        .iter()
        .flat_map(|seg| seg.h.paulis().copied())
        .collect();
    let n_kept = kept.len();

    let nk = n_kept.max(1) as f64;
    let budget_delta = match budget.error_norm {
        ErrorKind::Killing => gamma_min * eps / (3.0 * std::f64::consts::PI * nk.sqrt() * l),
        ErrorKind::Op => gamma_min * eps / (6.0 * nk * l),
    };
    let delta_max = budget_delta.min(1.0 / nk.sqrt());
    // floor + 1 keeps δ strictly below δ_max.
    let seg_count = ((t / delta_max).floor() as usize + 1).max(1);
    let delta = t / seg_count as f64;

    let tail = s.harmonic_tail(threshold);
    let predicted_error = PredictedErrors {
        killing: l / threshold.sqrt() + 1.5 * std::f64::consts::PI * (n_kept as f64).sqrt() * t * delta,
        op: l * tail.sqrt().min(2f64.powf(n as f64 / 2.0) / threshold.sqrt()) + 3.0 * n_kept as f64 * t * delta,
    };

    let windows = segment_average_count(&pruned, seg_count)?;
    let orders: Vec<Vec<(PauliString, f64)>> = windows
        .iter()
        .map(|w| match budget.trotter {
            TrotterOrder::Greedy => trotter_order_greedy(&w.h),
            TrotterOrder::Naive => trotter_order_naive(&w.h),
        })
        .collect();
    let planned: u64 = orders
        .iter()
        .flat_map(|o| o.iter().map(|(q, _)| monomial_gate_count(q.weight()) as u64))
        .sum();
    if planned > budget.max_gates {
        let why = match (budget.error_norm, op_variant) {
            (ErrorKind::Op, _) if bounds::tail_threshold(s, l, eps) >= s.max_penalty() => format!(
                "harmonic tail condition Σ_{{ℐ>ℐ̄}} 1/ℐ ≤ ε²/4L² = {:.6e} is only met at ℐ̄ = max penalty {} and the 2^N threshold is {threshold:.6e}, so too little can be pruned",
                eps * eps / (4.0 * l * l),
                s.max_penalty()
            ),
            (ErrorKind::Op, _) => format!("op budget ε = {eps} with L = {l:.6e} needs threshold ℐ̄ = {threshold:.6e}"),
            (ErrorKind::Killing, _) => format!(
                "Killing budget s = {eps} with L = {l:.6e} needs threshold ℐ̄ = 4L²/s² = {threshold:.6e}"
            ),
        };
        return Err(Error::Infeasible(format!(
            "{why}; planned {planned} gates over {seg_count} segments exceeds max_gates = {}",
            budget.max_gates
        )));
    }

    let mut circuit = Circuit::new(n);
    for (w, order) in windows.iter().zip(&orders) {
        circuit.extend(trotter_circuit(n, order, w.duration)?);
    }
    if p.dropped_phase() != 0.0 {
        circuit.multiply_phase(C64::from_polar(1.0, p.dropped_phase()));
    }

    let (measured, stages) = if budget.measure && n <= MAX_DENSE_QUBITS {
        let target = p.evolve()?;
        let u_pruned = pruned.evolve()?;
        let averaged = Path::new(n, windows.clone())?;
        let mut u_avg = averaged.evolve()?;
        let mut u_pruned = u_pruned;
        if p.dropped_phase() != 0.0 {
            let ph = C64::from_polar(1.0, p.dropped_phase());
            u_pruned = u_pruned.scale(ph);
            u_avg = u_avg.scale(ph);
        }
        let u_circ = circuit_to_dense(&circuit)?;
        (
            Some(Distances::between(&target, &u_circ)?),
            Some(StageErrors {
                prune: Distances::between(&target, &u_pruned)?,
                average: Distances::between(&u_pruned, &u_avg)?,
                trotter: Distances::between(&u_avg, &u_circ)?,
            }),
        )
    } else {
        (None, None)
    };

    let (predicted_gate_bound, trivial_cap) = match budget.error_norm {
        ErrorKind::Killing => {
            let b = bounds::killing_gate_formula(n, n_cheap, l, eps);
            (b, bounds::trivial_cap(n))
        }
        ErrorKind::Op => (bounds::op_gate_formula(n, n_cheap, l, eps), bounds::trivial_cap(n)),
    };

    let report = CompileReport {
        n_qubits: n,
        schedule: s.label(),
        error_kind: budget.error_norm,
        target_error: eps,
        trotter_order: budget.trotter,
        complexity_length: l,
        killing_length: t,
        gamma_min,
        threshold,
        op_variant,
        n_cheap,
        n_kept,
        segment_count: seg_count,
        delta,
        delta_max,
        gate_count: circuit.gate_count(),
        gate_count_cap: 2.0 * n as f64 * seg_count as f64 * n_kept as f64,
        predicted_gate_bound,
        trivial_cap,
        predicted_error,
        measured,
        stages,
    };
    Ok((circuit, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense_pauli;
    use crate::pauli::enumerate_paulis;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn monomial_oracle(q: &PauliString, angle: f64) -> DenseMatrix {
        expm_hermitian(&dense_pauli(q).unwrap(), angle).unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(3);
        let d = circuit_to_dense(&c).unwrap();
        assert_eq!(d, DenseMatrix::identity(3).unwrap());
    }

    #[test]
    fn single_gate_embeds_as_block() {
        let g = pauli_pair_gate(0, Letter::X, 1, Letter::Z, 0.3);
        let mut c = Circuit::new(2);
        c.push(g.clone()).unwrap();
        let d = circuit_to_dense(&c).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert_eq!(d.get(r, col), g.block[(r, col)]);
            }
        }
    }

    #[test]
    fn gate_qubit_order_matches_dense_pauli() {
        let g = pauli_pair_gate(2, Letter::Y, 0, Letter::X, 0.7);
        let mut c = Circuit::new(3);
        c.push(g).unwrap();
        let d = circuit_to_dense(&c).unwrap();
        let oracle = monomial_oracle(&p("XIY"), 0.7);
        assert!(op_distance(&d, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn monomials_are_exact_at_n4() {
        for q in enumerate_paulis(4, None).unwrap().filter(|q| !q.is_identity()) {
            let c = synthesize_monomial(&q, 0.37).unwrap();
            assert_eq!(c.gate_count(), monomial_gate_count(q.weight()), "{q}");
            let err = op_distance(&circuit_to_dense(&c).unwrap(), &monomial_oracle(&q, 0.37)).unwrap();
            assert!(err < 1e-12, "{q}: {err}");
        }
    }

    #[test]
    fn weight_five_needs_seven_gates() {
        let c = synthesize_monomial(&p("XYZZX"), 1.1).unwrap();
        assert_eq!(c.gate_count(), 7);
    }

    #[test]
    fn identity_monomial_is_a_phase() {
        let c = synthesize_monomial(&p("III"), 0.5).unwrap();
        assert_eq!(c.gate_count(), 0);
        assert!((c.global_phase() - C64::from_polar(1.0, 0.5)).norm() < 1e-15);
        assert!(synthesize_monomial(&p("X"), 0.5).is_err());
    }

    #[test]
    fn prune_examples() {
        let s = PenaltySchedule::cliff(3, 100.0).unwrap();
        let h = Hamiltonian::from_terms(3, [(p("XZI"), 0.6), (p("XYZ"), 0.8)]).unwrap();
        let kept = prune(&h, &s, 10.0).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.coeff(&p("XZI")), 0.6);
        assert_eq!(prune(&h, &s, 100.0).unwrap(), h);
    }

    #[test]
    fn averaging_examples() {
        let h1 = Hamiltonian::from_terms(2, [(p("XI"), 1.0)]).unwrap();
        let h2 = Hamiltonian::from_terms(2, [(p("IZ"), 1.0)]).unwrap();
        let path = Path::new(
            2,
            vec![
                Segment {
                    duration: 0.5,
                    h: h1.clone(),
                },
                Segment {
                    duration: 0.5,
                    h: h2.clone(),
                },
            ],
        )
        .unwrap();
        let avg = segment_average(&path, 1.0).unwrap();
        assert_eq!(avg.len(), 1);
        assert!((avg[0].h.coeff(&p("XI")) - 0.5).abs() < 1e-15);
        assert!((avg[0].h.coeff(&p("IZ")) - 0.5).abs() < 1e-15);

        let constant = Path::constant(h1.clone(), 1.0).unwrap();
        let avg = segment_average(&constant, 0.3).unwrap();
        assert_eq!(avg.len(), 4);
        assert!((avg[3].duration - 0.1).abs() < 1e-12);
        for w in &avg {
            assert!((w.h.coeff(&p("XI")) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_examples() {
        let commuting = Hamiltonian::from_terms(2, [(p("ZI"), 0.3), (p("IZ"), 0.5), (p("ZZ"), 0.1)]).unwrap();
        assert_eq!(leading_error_sq(&trotter_order_greedy(&commuting)), 0.0);

        let two = Hamiltonian::from_terms(1, [(p("X"), 0.3), (p("Y"), 0.5)]).unwrap();
        let a = leading_error_sq(&trotter_order_greedy(&two));
        let b = leading_error_sq(&trotter_order_naive(&two));
        assert!((a - b).abs() < 1e-15);
        assert!((a - 0.0225).abs() < 1e-15);
    }

    #[test]
    fn trotter_circuit_matches_dense_product() {
        let h = Hamiltonian::from_terms(3, [(p("XZI"), 0.3), (p("IYY"), -0.5), (p("ZXZ"), 0.2)]).unwrap();
        let order = trotter_order_greedy(&h);
        let c = trotter_circuit(3, &order, 0.4).unwrap();
        let d = trotter_product_dense(3, &order, 0.4).unwrap();
        assert!(op_distance(&circuit_to_dense(&c).unwrap(), &d).unwrap() < 1e-12);
    }

    #[test]
    fn two_local_constant_path_needs_no_pruning() {
        let s = PenaltySchedule::cliff(3, 1e6).unwrap();
        let h = Hamiltonian::from_terms(3, [(p("XZI"), 0.6), (p("IYX"), 0.8)]).unwrap();
        let path = Path::constant(h, 1.0).unwrap();
        let (c, r) = compile(&path, &s, &Budget::new(0.1, ErrorKind::Killing)).unwrap();
        assert_eq!(r.n_kept, 2);
        let m = r.measured.unwrap();
        assert!(m.killing <= 0.1, "{m:?}");
        assert!(r.stages.unwrap().prune.killing < 1e-12);
        assert_eq!(c.gate_count(), r.gate_count);
        assert!(r.gate_count as f64 <= r.gate_count_cap);
    }

    #[test]
    fn gate_json_round_trip() {
        let c = synthesize_monomial(&p("XYZ"), 0.2).unwrap();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        let back = Circuit::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
