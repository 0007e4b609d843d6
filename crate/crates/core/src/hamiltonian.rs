use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// A real-coefficient Hamiltonian `H = Σ_I h_I σ_I`, stored sparsely.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: BTreeMap<PauliString, f64>,
}

impl Hamiltonian {
    pub fn zero(n_qubits: usize) -> Self {
        Hamiltonian {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a Hamiltonian from `(pauli, coefficient)` pairs; repeated strings are summed.
    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        let mut h = Hamiltonian::zero(n_qubits);
        for (p, c) in terms {
            h.add_term(p, c)?;
        }
        Ok(h)
    }

    pub fn add_term(&mut self, p: PauliString, coeff: f64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        if !coeff.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {coeff} on {p}")));
        }
        let entry = self.terms.entry(p).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(&p);
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, p: &PauliString) -> f64 {
        self.terms.get(p).copied().unwrap_or(0.0)
    }

    /// Terms in Pauli order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, f64)> + '_ {
        self.terms.iter().map(|(p, &c)| (p, c))
    }

    pub fn paulis(&self) -> impl Iterator<Item = &PauliString> + '_ {
        self.terms.keys()
    }

    /// `||H||_F̄ = sqrt(Σ h_I²)`.
    pub fn fbar_norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `Σ |h_I|`, an upper bound on the operator norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> Hamiltonian {
        let mut out = Hamiltonian::zero(self.n_qubits);
        for (p, c) in self.iter() {
            let v = c * factor;
            if v != 0.0 {
                out.terms.insert(*p, v);
            }
        }
        out
    }

    /// Keeps only the terms for which `keep` returns true.
    pub fn filtered<F: FnMut(&PauliString, f64) -> bool>(&self, mut keep: F) -> Hamiltonian {
        Hamiltonian {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(p, c)| keep(p, **c))
                .map(|(p, c)| (*p, *c))
                .collect(),
        }
    }

    /// `self + factor · other`.
    pub fn add_scaled(&mut self, other: &Hamiltonian, factor: f64) -> Result<()> {
        for (p, c) in other.iter() {
            self.add_term(*p, c * factor)?;
        }
        Ok(())
    }

    /// The coefficient on the identity string, if any.
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|(p, _)| p.is_identity())
            .map(|(_, c)| *c)
            .unwrap_or(0.0)
    }

    pub fn without_identity(&self) -> Hamiltonian {
        self.filtered(|p, _| !p.is_identity())
    }
}

/// `{"pauli": "XZIY", "coeff": h}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub pauli: PauliString,
    pub coeff: serde_json::Value,
}

impl TermJson {
    pub(crate) fn real_coeff(&self) -> Result<f64> {
        match &self.coeff {
            serde_json::Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::InvalidPath(format!("coefficient on {} is not a finite number", self.pauli))),
            serde_json::Value::Array(_) | serde_json::Value::Object(_) => Err(Error::InvalidPath(format!(
                "complex coefficient on {}: Hamiltonian coefficients must be real",
                self.pauli
            ))),
            other => Err(Error::InvalidPath(format!(
                "coefficient on {} must be a real number, got {other}",
                self.pauli
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianJson {
    pub n_qubits: usize,
    pub terms: Vec<TermJson>,
}

pub(crate) fn terms_to_json(h: &Hamiltonian) -> Vec<TermJson> {
    h.iter()
        .map(|(p, c)| TermJson {
            pauli: *p,
            coeff: serde_json::json!(c),
        })
        .collect()
}

pub(crate) fn terms_from_json(n_qubits: usize, terms: &[TermJson]) -> Result<Hamiltonian> {
    let mut h = Hamiltonian::zero(n_qubits);
    for t in terms {
        if t.pauli.n_qubits() != n_qubits {
            return Err(Error::InvalidPath(format!(
                "term {} has {} qubits, expected {n_qubits}",
                t.pauli,
                t.pauli.n_qubits()
            )));
        }
        h.add_term(t.pauli, t.real_coeff()?)?;
    }
    Ok(h)
}

impl Hamiltonian {
    pub fn to_json(&self) -> HamiltonianJson {
        HamiltonianJson {
            n_qubits: self.n_qubits,
            terms: terms_to_json(self),
        }
    }

    pub fn from_json(j: &HamiltonianJson) -> Result<Self> {
        terms_from_json(j.n_qubits, &j.terms)
    }
}
