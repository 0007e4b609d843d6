//! Dense complex matrices on 2^N dimensions: Pauli embedding, Hermitian
//! exponentials, the normalized Frobenius and operator norms, and the
//! Killing distance between unitaries.
//!
//! Everything here is full-dense. Eigendecompositions go through nalgebra's
//! Hermitian eigensolver and complex Schur form; at the 8-qubit cap the
//! matrices are 256×256.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;

pub type C64 = Complex64;

/// Largest qubit count for dense matrices.
pub const MAX_DENSE_QUBITS: usize = 8;

/// Unitarity tolerance applied to inputs.
pub const INPUT_UNITARY_TOL: f64 = 1e-8;
/// Hermiticity tolerance applied to inputs of [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Normalization tolerance for state vectors.
pub const STATE_NORM_TOL: f64 = 1e-9;

fn check_cap(what: &'static str, n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::QubitCap {
            what,
            n,
            cap: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// A `2^N × 2^N` complex matrix. Qubit 0 is the most significant bit of the
/// basis index, matching the left-to-right tensor order of Pauli strings.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_qubits: usize,
    data: DMatrix<C64>,
}

impl DenseMatrix {
    pub fn from_matrix(n_qubits: usize, data: DMatrix<C64>) -> Result<Self> {
        check_cap("DenseMatrix", n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::DimMismatch(dim, data.nrows().max(data.ncols())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(DenseMatrix { n_qubits, data })
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        check_cap("DenseMatrix", n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(DenseMatrix {
            n_qubits,
            data: DMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        check_cap("DenseMatrix", n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(DenseMatrix {
            n_qubits,
            data: DMatrix::zeros(dim, dim),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn as_matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[(r, c)]
    }

    fn same_dim(&self, other: &DenseMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> DenseMatrix {
        DenseMatrix {
            n_qubits: self.n_qubits,
            data: self.data.adjoint(),
        }
    }

    /// `self · other`.
    pub fn mul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_dim(other)?;
        Ok(DenseMatrix {
            n_qubits: self.n_qubits,
            data: &self.data * &other.data,
        })
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_dim(other)?;
        Ok(DenseMatrix {
            n_qubits: self.n_qubits,
            data: &self.data - &other.data,
        })
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.same_dim(other)?;
        Ok(DenseMatrix {
            n_qubits: self.n_qubits,
            data: &self.data + &other.data,
        })
    }

    pub fn scale(&self, factor: C64) -> DenseMatrix {
        DenseMatrix {
            n_qubits: self.n_qubits,
            data: &self.data * factor,
        }
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|A − A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise `|U†U − 𝟙|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.data.adjoint() * &self.data;
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                worst = worst.max((p[(r, c)] - target).norm());
            }
        }
        worst
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > tol || !dev.is_finite() {
            return Err(Error::NotUnitary(dev));
        }
        Ok(())
    }

    /// Normalized trace `Tr[A]/2^N`.
    pub fn trace_bar(&self) -> C64 {
        self.data.trace() / self.dim() as f64
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::DimMismatch(self.dim(), psi.dim()));
        }
        Ok(StateVector {
            amplitudes: &self.data * &psi.amplitudes,
        })
    }
}

/// Reverses the low `n` bits: qubit mask → basis-index mask.
pub(crate) fn basis_mask(qubit_mask: u64, n: usize) -> usize {
    let mut out = 0usize;
    for j in 0..n {
        if (qubit_mask >> j) & 1 == 1 {
            out |= 1 << (n - 1 - j);
        }
    }
    out
}

/// Dense matrix of a single Pauli string: one nonzero in {±1, ±i} per row.
pub fn dense_pauli(p: &PauliString) -> Result<DenseMatrix> {
    let n = p.n_qubits();
    check_cap("dense", n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (col, row, v) in pauli_entries(p) {
        m[(row, col)] = v;
    }
    Ok(DenseMatrix { n_qubits: n, data: m })
}

/// `(col, row, value)` for every nonzero of σ_p: `σ|c⟩ = i^{ny} (−1)^{|z∧c|} |c ⊕ x⟩`.
pub(crate) fn pauli_entries(p: &PauliString) -> impl Iterator<Item = (usize, usize, C64)> {
    let n = p.n_qubits();
    let xb = basis_mask(p.x_mask(), n);
    let zb = basis_mask(p.z_mask(), n);
    let base = crate::pauli::Phase::from_exponent(p.y_count() as i64).to_complex();
    (0..1usize << n).map(move |c| {
        let sign = if (zb & c).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (c, c ^ xb, base * sign)
    })
}

/// Dense matrix of `Σ h_I σ_I`.
pub fn dense_hamiltonian(h: &Hamiltonian) -> Result<DenseMatrix> {
    let n = h.n_qubits();
    check_cap("dense", n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (p, c) in h.iter() {
        for (col, row, v) in pauli_entries(p) {
            m[(row, col)] += v * c;
        }
    }
    Ok(DenseMatrix { n_qubits: n, data: m })
}

/// `e^{i h t}` for Hermitian `h`, via full eigendecomposition.
pub fn expm_hermitian(h: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    let dev = h.hermitian_deviation();
    if dev > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite time {t}")));
    }
    let eig = h.data.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(h.dim(), eig.eigenvalues.iter().map(|&l| C64::from_polar(1.0, l * t)));
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(DenseMatrix {
        n_qubits: h.n_qubits,
        data: scaled * v.adjoint(),
    })
}

/// Normalized Frobenius norm `sqrt(Tr̄[A†A])`.
pub fn norm_fbar(a: &DenseMatrix) -> f64 {
    let s: f64 = a.data.iter().map(|z| z.norm_sqr()).sum();
    (s / a.dim() as f64).sqrt()
}

/// Operator norm: square root of the largest eigenvalue of `A†A`.
pub fn norm_op(a: &DenseMatrix) -> f64 {
    let gram = a.data.adjoint() * &a.data;
    gram.symmetric_eigenvalues().iter().cloned().fold(0.0, f64::max).sqrt()
}

/// Eigenphases of a unitary in the principal branch `(−π, π]`.
pub fn eigenphases(u: &DenseMatrix) -> Result<Vec<f64>> {
    // Near-identity inputs with clustered eigenvalues can stall the QR sweep
    // at the tightest tolerance; loosen step by step before giving up.
    let schur = [1e-15, 1e-14, 1e-13, 1e-12]
        .iter()
        .find_map(|&eps| nalgebra::Schur::try_new(u.data.clone(), eps, 10_000))
        .ok_or(Error::NoConvergence)?;
    let (_, t) = schur.unpack();
    Ok((0..u.dim())
        .map(|i| {
            let l = t[(i, i)].arg();
            if l <= -PI {
                PI
            } else {
                l
            }
        })
        .collect())
}

/// Killing distance `s(U1, U2) = 2^{−N/2} sqrt(Σ λ_i²)` over the principal
/// eigenphases of `U2†U1`. Lies in `[0, π]`.
pub fn killing_distance(u1: &DenseMatrix, u2: &DenseMatrix) -> Result<f64> {
    u1.same_dim(u2)?;
    u1.check_unitary(INPUT_UNITARY_TOL)?;
    u2.check_unitary(INPUT_UNITARY_TOL)?;
    let w = u2.adjoint().mul(u1)?;
    let phases = eigenphases(&w)?;
    let s: f64 = phases.iter().map(|l| l * l).sum();
    Ok((s / u1.dim() as f64).sqrt())
}

/// `||U1 − U2||_F̄`.
pub fn fbar_distance(u1: &DenseMatrix, u2: &DenseMatrix) -> Result<f64> {
    Ok(norm_fbar(&u1.sub(u2)?))
}

/// `||U1 − U2||_op`.
pub fn op_distance(u1: &DenseMatrix, u2: &DenseMatrix) -> Result<f64> {
    Ok(norm_op(&u1.sub(u2)?))
}

/// A normalized state vector of dimension `2^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        let v = DVector::from_vec(amplitudes);
        let n2 = v.norm_squared();
        if (n2 - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized(n2));
        }
        Ok(StateVector { amplitudes: v })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero state".into()));
        }
        Self::new((v / C64::new(n, 0.0)).iter().cloned().collect())
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

/// Inner-product error `ε = sqrt(2 − 2 Re⟨ψ_a|ψ_b⟩)` with `ψ_x = U_x ψ`.
pub fn state_error(u_a: &DenseMatrix, u_b: &DenseMatrix, psi: &StateVector) -> Result<f64> {
    u_a.same_dim(u_b)?;
    let n2 = psi.amplitudes.norm_squared();
    if (n2 - 1.0).abs() > STATE_NORM_TOL {
        return Err(Error::NotNormalized(n2));
    }
    // For unit vectors 2 − 2Re⟨a|b⟩ = ||a − b||²; the difference form avoids
    // cancellation near ε = 0.
    let a = u_a.apply(psi)?;
    let b = u_b.apply(psi)?;
    Ok((&a.amplitudes - &b.amplitudes).norm())
}

/// JSON form: row-major array of `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<[f64; 2]>);

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<C64>) -> Self {
        let mut out = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                // + 0.0 folds −0.0 into 0.0 so equal matrices print identically
                out.push([z.re + 0.0, z.im + 0.0]);
            }
        }
        MatrixJson(out)
    }

    pub fn to_matrix(&self, dim: usize) -> Result<DMatrix<C64>> {
        if self.0.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} matrix entries, found {}",
                dim * dim,
                self.0.len()
            )));
        }
        Ok(DMatrix::from_fn(dim, dim, |r, c| {
            let [re, im] = self.0[r * dim + c];
            C64::new(re, im)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::enumerate_paulis;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn sigma_z_is_diag() {
        let z = dense_pauli(&p("Z")).unwrap();
        assert_eq!(z.get(0, 0), c(1.0, 0.0));
        assert_eq!(z.get(1, 1), c(-1.0, 0.0));
        assert_eq!(z.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn sigma_y_entries() {
        let y = dense_pauli(&p("Y")).unwrap();
        assert_eq!(y.get(0, 1), c(0.0, -1.0));
        assert_eq!(y.get(1, 0), c(0.0, 1.0));
    }

    #[test]
    fn qubit_zero_is_leftmost_factor() {
        // Z ⊗ I = diag(1, 1, −1, −1)
        let m = dense_pauli(&p("ZI")).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| m.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn identity_string_is_identity() {
        let m = dense_pauli(&p("III")).unwrap();
        assert_eq!(m, DenseMatrix::identity(3).unwrap());
    }

    #[test]
    fn pauli_matrices_have_one_entry_per_row() {
        for q in enumerate_paulis(2, None).unwrap() {
            let m = dense_pauli(&q).unwrap();
            for r in 0..4 {
                let nz: Vec<C64> = (0..4).map(|cc| m.get(r, cc)).filter(|z| z.norm() > 0.0).collect();
                assert_eq!(nz.len(), 1);
                let v = nz[0];
                assert!(v == c(1.0, 0.0) || v == c(-1.0, 0.0) || v == c(0.0, 1.0) || v == c(0.0, -1.0));
            }
            assert_eq!(m.hermitian_deviation(), 0.0);
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let big = PauliString::identity(MAX_DENSE_QUBITS + 1).unwrap();
        assert!(matches!(dense_pauli(&big), Err(Error::QubitCap { .. })));
    }

    #[test]
    fn expm_examples() {
        let x = dense_pauli(&p("X")).unwrap();
        let u = expm_hermitian(&x, PI).unwrap();
        let minus = DenseMatrix::identity(1).unwrap().scale(c(-1.0, 0.0));
        assert!(op_distance(&u, &minus).unwrap() < 1e-12);
        let u = expm_hermitian(&x, PI / 2.0).unwrap();
        let ix = x.scale(c(0.0, 1.0));
        assert!(op_distance(&u, &ix).unwrap() < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let mut m = DenseMatrix::zeros(1).unwrap();
        m.as_matrix_mut()[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn norm_examples() {
        assert!((norm_fbar(&DenseMatrix::identity(3).unwrap()) - 1.0).abs() < 1e-15);
        let zero = DenseMatrix::zeros(2).unwrap();
        assert_eq!(norm_op(&zero), 0.0);
        assert_eq!(norm_fbar(&zero), 0.0);
    }

    #[test]
    fn table_rows_for_diag_hamiltonians() {
        for n in 1..=4usize {
            // diag[1,−1,1,−1,…] is σz on the last qubit
            let mut letters = "I".repeat(n - 1);
            letters.push('Z');
            let h = dense_pauli(&p(&letters)).unwrap();
            assert!((norm_fbar(&h) - 1.0).abs() < 1e-14);
            assert!((norm_op(&h) - 1.0).abs() < 1e-10);

            // h_I = 2^{−N/2} on every {I,Z} string gives diag[2^{N/2}, 0, …, 0]
            let coeff = 2f64.powf(-(n as f64) / 2.0);
            let terms = enumerate_paulis(n, None)
                .unwrap()
                .filter(|q| q.x_mask() == 0)
                .map(|q| (q, coeff));
            let h = Hamiltonian::from_terms(n, terms).unwrap();
            let m = dense_hamiltonian(&h).unwrap();
            assert!((norm_fbar(&m) - 1.0).abs() < 1e-12);
            let expected = 2f64.powf(n as f64 / 2.0);
            assert!((norm_op(&m) - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn killing_of_antipodal_is_pi() {
        for n in 1..=3 {
            let id = DenseMatrix::identity(n).unwrap();
            let minus = id.scale(c(-1.0, 0.0));
            assert!((killing_distance(&id, &minus).unwrap() - PI).abs() < 1e-12);
        }
    }

    #[test]
    fn killing_of_z_rotation() {
        let z = dense_pauli(&p("Z")).unwrap();
        let u = expm_hermitian(&z, 0.4).unwrap();
        let id = DenseMatrix::identity(1).unwrap();
        assert!((killing_distance(&id, &u).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn killing_rejects_non_unitary() {
        let id = DenseMatrix::identity(1).unwrap();
        let bad = id.scale(c(2.0, 0.0));
        assert!(matches!(killing_distance(&id, &bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn chord_of_u1_arc() {
        // 1×1 unitaries are not representable (N ≥ 1), so embed e^{it} as e^{it}·𝟙 on one qubit.
        let t = PI / 3.0;
        let id = DenseMatrix::identity(1).unwrap();
        let u = id.scale(C64::from_polar(1.0, t));
        assert!((fbar_distance(&id, &u).unwrap() - 1.0).abs() < 1e-14);
        assert!((killing_distance(&id, &u).unwrap() - t).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let id = DenseMatrix::identity(2).unwrap();
        assert_eq!(op_distance(&id, &id).unwrap(), 0.0);
        let minus = id.scale(c(-1.0, 0.0));
        assert!((op_distance(&id, &minus).unwrap() - 2.0).abs() < 1e-12);
        let other = DenseMatrix::identity(1).unwrap();
        assert!(matches!(op_distance(&id, &other), Err(Error::DimMismatch(4, 2))));
    }

    #[test]
    fn state_error_examples() {
        let x = dense_pauli(&p("XY")).unwrap();
        let u = expm_hermitian(&x, 0.7).unwrap();
        let psi = StateVector::normalized(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.5), c(-1.0, 0.2)]).unwrap();
        assert_eq!(state_error(&u, &u, &psi).unwrap(), 0.0);
        let minus = u.scale(c(-1.0, 0.0));
        assert!((state_error(&u, &minus, &psi).unwrap() - 2.0).abs() < 1e-12);
        let raw = StateVector {
            amplitudes: DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        };
        assert!(matches!(state_error(&u, &u, &raw), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn matrix_json_round_trip() {
        let y = dense_pauli(&p("Y")).unwrap();
        let j = MatrixJson::from_matrix(y.as_matrix());
        assert_eq!(
            serde_json::to_string(&j).unwrap(),
            "[[0.0,0.0],[0.0,-1.0],[0.0,1.0],[0.0,0.0]]"
        );
        assert_eq!(&j.to_matrix(2).unwrap(), y.as_matrix());
    }
}
