//! Spin-Hamiltonian builders from Pauli words.
//!
//! Hamiltonians are Hermitian, using `σ_x, σ_y, σ_z` with eigenvalues `±1`.
//! Sites are numbered `1..=n`, site 1 being the leftmost Kronecker factor.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{embed_site_matrix, pauli_hermitian, PauliAxis};
use crate::matcore::CMatrix;

/// Largest supported qubit count.
pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    ZZ,
    XX,
    YY,
    /// `XX + YY + ZZ`.
    XXX,
}

impl Coupling {
    fn axes(self) -> &'static [PauliAxis] {
        match self {
            Self::ZZ => &[PauliAxis::Z],
            Self::XX => &[PauliAxis::X],
            Self::YY => &[PauliAxis::Y],
            Self::XXX => &PauliAxis::ALL,
        }
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ZZ" => Ok(Self::ZZ),
            "XX" => Ok(Self::XX),
            "YY" => Ok(Self::YY),
            "XXX" => Ok(Self::XXX),
            _ => Err(Error::InvalidArgument(format!("unknown coupling {s:?}"))),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `weight · Σ_axes σ_{k,a} σ_{l,a}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coupling: Coupling,
    pub sites: (usize, usize),
    pub weight: f64,
}

/// `weight · σ_{site,axis}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub axis: PauliAxis,
    pub site: usize,
    pub weight: f64,
}

/// JSON form: `{"n":2,"terms":[{"coupling":"ZZ","sites":[1,2],"weight":1.0}],
/// "fields":[{"axis":"Z","site":1,"weight":0.5}]}` (`fields` optional).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub terms: Vec<Term>,
    #[serde(default)]
    pub fields: Vec<Field>,
}

impl HamiltonianSpec {
    /// Nearest-neighbour chain `1–2–…–n` with uniform weight.
    pub fn chain(n: usize, coupling: Coupling, weight: f64) -> Self {
        let terms = (1..n)
            .map(|k| Term { coupling, sites: (k, k + 1), weight })
            .collect();
        Self { n, terms, fields: Vec::new() }
    }

    /// The chain closed into a ring (`n ≥ 3`).
    pub fn cycle(n: usize, coupling: Coupling, weight: f64) -> Self {
        let mut spec = Self::chain(n, coupling, weight);
        if n >= 3 {
            spec.terms.push(Term { coupling, sites: (n, 1), weight });
        }
        spec
    }

    pub fn with_field(mut self, axis: PauliAxis, site: usize, weight: f64) -> Self {
        self.fields.push(Field { axis, site, weight });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {}",
                self.n
            )));
        }
        let in_range = |k: usize| (1..=self.n).contains(&k);
        for t in &self.terms {
            let (k, l) = t.sites;
            if !in_range(k) || !in_range(l) || k == l {
                return Err(Error::InvalidArgument(format!(
                    "coupling sites ({k}, {l}) must be distinct and within 1..={}",
                    self.n
                )));
            }
        }
        for f in &self.fields {
            if !in_range(f.site) {
                return Err(Error::InvalidArgument(format!(
                    "field site {} outside 1..={}",
                    f.site, self.n
                )));
            }
        }
        if self.terms.iter().map(|t| t.weight).chain(self.fields.iter().map(|f| f.weight)).any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite".into()));
        }
        Ok(())
    }
}

/// The Hermitian `2ⁿ × 2ⁿ` matrix of `spec`.
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<CMatrix> {
    spec.validate()?;
    let n = spec.n;
    let dim = 1 << n;
    let mut h = CMatrix::zeros(dim, dim);
    for t in &spec.terms {
        for &axis in t.coupling.axes() {
            let p = pauli_hermitian(axis);
            let word = embed_site_matrix(t.sites.0, n, &p)? * embed_site_matrix(t.sites.1, n, &p)?;
            h += word.scale(t.weight);
        }
    }
    for f in &spec.fields {
        h += embed_site_matrix(f.site, n, &pauli_hermitian(f.axis))?.scale(f.weight);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::fro_norm;

    #[test]
    fn zz_pair_is_diagonal() {
        let h = build_hamiltonian(&HamiltonianSpec::chain(2, Coupling::ZZ, 2.0)).unwrap();
        let d: Vec<f64> = (0..4).map(|i| h[(i, i)].re).collect();
        assert_eq!(d, vec![2.0, -2.0, -2.0, 2.0]);
        assert_eq!(fro_norm(&(&h - CMatrix::from_diagonal(&h.diagonal()))), 0.0);
    }

    #[test]
    fn xxx_pair_spectrum() {
        let h = build_hamiltonian(&HamiltonianSpec::chain(2, Coupling::XXX, 1.0)).unwrap();
        assert_eq!(h, h.adjoint());
        let eig = crate::matcore::hermitian_eigenvalues_desc(&h).unwrap();
        for (e, want) in eig.iter().zip([1.0, 1.0, 1.0, -3.0]) {
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_and_fields() {
        let spec = HamiltonianSpec::cycle(4, Coupling::ZZ, 1.0).with_field(PauliAxis::X, 2, 0.5);
        assert_eq!(spec.terms.len(), 4);
        let h = build_hamiltonian(&spec).unwrap();
        assert_eq!(h, h.adjoint());
        assert_eq!(HamiltonianSpec::cycle(2, Coupling::ZZ, 1.0).terms.len(), 1);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = HamiltonianSpec::chain(3, Coupling::ZZ, 1.0);
        spec.terms[0].sites = (2, 2);
        assert!(build_hamiltonian(&spec).is_err());
        spec.terms[0].sites = (0, 1);
        assert!(build_hamiltonian(&spec).is_err());
        let spec = HamiltonianSpec::chain(3, Coupling::ZZ, 1.0).with_field(PauliAxis::Z, 4, 1.0);
        assert!(build_hamiltonian(&spec).is_err());
        assert!(build_hamiltonian(&HamiltonianSpec::chain(13, Coupling::ZZ, 1.0)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n":2,"terms":[{"coupling":"ZZ","sites":[1,2],"weight":1.0}],
                       "fields":[{"axis":"Z","site":1,"weight":0.5}]}"#;
        let spec: HamiltonianSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec, HamiltonianSpec::chain(2, Coupling::ZZ, 1.0).with_field(PauliAxis::Z, 1, 0.5));
        let back: HamiltonianSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
