//! Lie subalgebras of `𝔲(N)` and their orthogonal projectors.
//!
//! A subalgebra `𝔨` is stored as a real-orthonormal basis `h₁,…,h_m` with
//! respect to `Re tr(h_i†h_j)`. Its projector is
//!
//! ```text
//! P(g) = Σ_j Re tr(h_j† g) · h_j
//! ```
//!
//! which serves every subalgebra in the crate. For the local algebra
//! `𝔰𝔲(2)⊗1⊗… ⊕ … ⊕ …⊗1⊗𝔰𝔲(2)` the basis is the single-site Pauli set
//! `X_k, Y_k, Z_k` divided by `√(2ⁿ)`, so the formula above is the usual
//! `2⁻ⁿ Σ_k Re tr(X_k†g) X_k + …` written with normalized elements.
//!
//! Pauli matrices follow the skew-Hermitian convention
//! `σ_x = [[0,i],[i,0]]`, `σ_y = [[0,−1],[1,0]]`, `σ_z = [[i,0],[0,−i]]`,
//! for which `[σ_x, σ_y] = 2σ_z`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    commutator, expm_skew, fro_norm, haar_unitary, kron, re_inner, skew_part, AlgebraElement,
    CMatrix, UnitaryMatrix, I, ONE, ZERO,
};

/// Relative rank cutoff for Gram–Schmidt and kernel computations.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
}

impl FromStr for PauliAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(PauliAxis::X),
            "y" => Ok(PauliAxis::Y),
            "z" => Ok(PauliAxis::Z),
            other => Err(Error::InvalidArgument(format!("unknown pauli axis '{other}'"))),
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        })
    }
}

/// Skew-Hermitian Pauli matrix.
pub fn pauli_skew(axis: PauliAxis) -> AlgebraElement {
    let m = match axis {
        PauliAxis::X => CMatrix::from_row_slice(2, 2, &[ZERO, I, I, ZERO]),
        PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]),
        PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[I, ZERO, ZERO, -I]),
    };
    AlgebraElement::from_raw(m)
}

/// Hermitian Pauli matrix (`X`, `Y`, `Z` of the physics literature).
pub fn pauli_hermitian(axis: PauliAxis) -> CMatrix {
    match axis {
        PauliAxis::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        PauliAxis::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        PauliAxis::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// `1 ⊗ … ⊗ m ⊗ … ⊗ 1` with `m` in slot `k` (1-based, slot 1 leftmost) of
/// an `n`-fold tensor product of `ℂ²`.
pub fn embed_site_matrix(k: usize, n: usize, m: &CMatrix) -> Result<CMatrix> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "site index {k} outside 1..={n}"
        )));
    }
    if m.shape() != (2, 2) {
        return Err(dim_err("single-site operator must be 2x2"));
    }
    let left = CMatrix::identity(1 << (k - 1), 1 << (k - 1));
    let right = CMatrix::identity(1 << (n - k), 1 << (n - k));
    Ok(kron(&kron(&left, m), &right))
}

/// Single-site embedding of an algebra element, `σ_{k,·}` for Pauli input.
pub fn embed_single_site(k: usize, n: usize, g: &AlgebraElement) -> Result<AlgebraElement> {
    Ok(AlgebraElement::from_raw(embed_site_matrix(k, n, g.matrix())?))
}

/// How a basis was constructed. Used to draw random subgroup elements
/// without going through the exponential map when a product form exists.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisOrigin {
    /// `𝔰𝔲(N)`.
    Full,
    /// `⊕_j 1⊗…⊗𝔰𝔲(N_j)⊗…⊗1`.
    Partition(Vec<usize>),
    Generic,
}

/// Real-orthonormal basis of a Lie subalgebra of `𝔲(N)`.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    dim: usize,
    elements: Vec<AlgebraElement>,
    label: String,
    origin: BasisOrigin,
}

impl SubalgebraBasis {
    /// Orthonormalizes `elements` (dropping dependent ones) and wraps them.
    pub fn from_spanning_set(
        dim: usize,
        elements: impl IntoIterator<Item = AlgebraElement>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut gs = GramSchmidt::new(dim);
        for e in elements {
            if e.dim() != dim {
                return Err(dim_err(format!(
                    "element of size {} in a basis of size {dim}",
                    e.dim()
                )));
            }
            let scale = e.norm();
            gs.insert(e.matrix(), scale);
        }
        Ok(Self {
            dim,
            elements: gs.into_elements(),
            label: label.into(),
            origin: BasisOrigin::Generic,
        })
    }

    fn from_orthonormal(
        dim: usize,
        elements: Vec<AlgebraElement>,
        label: String,
        origin: BasisOrigin,
    ) -> Self {
        Self {
            dim,
            elements,
            label,
            origin,
        }
    }

    /// Matrix size `N`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension `m` of the subalgebra.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[AlgebraElement] {
        &self.elements
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn origin(&self) -> &BasisOrigin {
        &self.origin
    }

    pub fn projector(self) -> Projector {
        Projector {
            basis: Arc::new(self),
        }
    }

    /// `max_ij |Re tr(h_i†h_j) − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).abs());
            }
        }
        worst
    }

    /// `‖g − P(g)‖_F` for `g` in `𝔲(N)`.
    pub fn span_residual(&self, g: &CMatrix) -> f64 {
        let mut r = g.clone();
        for h in &self.elements {
            let c = re_inner(h.matrix(), &r);
            r -= h.matrix().scale(c);
        }
        fro_norm(&r)
    }

    /// Largest span residual of `[h_i, h_j]` over all basis pairs.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.elements.iter().enumerate() {
            for b in &self.elements[i + 1..] {
                let c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
                worst = worst.max(self.span_residual(&c));
            }
        }
        worst
    }

    /// A random element of the connected subgroup `exp(𝔨)`.
    ///
    /// Full and partition algebras give Haar samples of `SU(N)`-type factors
    /// (up to a global phase); generic algebras use `exp(Σ g_j h_j)` with
    /// Gaussian coefficients of scale `π`.
    pub fn random_group_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<UnitaryMatrix> {
        match &self.origin {
            BasisOrigin::Full => haar_unitary(self.dim, rng),
            BasisOrigin::Partition(dims) => {
                let mut u = UnitaryMatrix::identity(1);
                for &d in dims {
                    u = u.kron(&haar_unitary(d, rng)?);
                }
                Ok(u)
            }
            BasisOrigin::Generic => {
                let mut m = CMatrix::zeros(self.dim, self.dim);
                for h in &self.elements {
                    let g: f64 = rng.sample(StandardNormal);
                    m += h.matrix().scale(std::f64::consts::PI * g);
                }
                Ok(expm_skew(&AlgebraElement::from_raw(m)))
            }
        }
    }
}

/// Orthogonal projector `P: gl(N, ℂ) → 𝔨`.
#[derive(Clone, Debug)]
pub struct Projector {
    basis: Arc<SubalgebraBasis>,
}

impl Projector {
    pub fn basis(&self) -> &SubalgebraBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim
    }

    /// Coordinates `Re tr(h_j† g)`.
    pub fn coefficients(&self, g: &CMatrix) -> Result<Vec<f64>> {
        self.check(g)?;
        Ok(self
            .basis
            .elements
            .iter()
            .map(|h| re_inner(h.matrix(), g))
            .collect())
    }

    /// `Σ_j c_j h_j`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<AlgebraElement> {
        if coeffs.len() != self.basis.len() {
            return Err(dim_err(format!(
                "{} coefficients for a basis of {}",
                coeffs.len(),
                self.basis.len()
            )));
        }
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        for (c, h) in coeffs.iter().zip(&self.basis.elements) {
            m += h.matrix().scale(*c);
        }
        Ok(AlgebraElement::from_raw(m))
    }

    /// `P(g) = Σ_j Re tr(h_j† g) h_j`.
    pub fn project(&self, g: &CMatrix) -> Result<AlgebraElement> {
        self.check(g)?;
        if self.basis.origin == BasisOrigin::Full {
            // Same map, without the O(N⁴) loop over the Gell-Mann basis.
            let s = skew_part(g)?;
            let n = self.dim();
            let shift = Complex64::new(0.0, s.trace().im / n as f64);
            let mut m = s.into_matrix();
            for i in 0..n {
                m[(i, i)] -= shift;
            }
            return Ok(AlgebraElement::from_raw(m));
        }
        let coeffs = self.coefficients(g)?;
        self.combine(&coeffs)
    }

    fn check(&self, g: &CMatrix) -> Result<()> {
        if g.shape() != (self.dim(), self.dim()) {
            return Err(dim_err(format!(
                "projector acts on {0}x{0}, got {1:?}",
                self.dim(),
                g.shape()
            )));
        }
        Ok(())
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass, over the real
/// inner product `Re tr(A†B)`.
struct GramSchmidt {
    dim: usize,
    elements: Vec<AlgebraElement>,
}

impl GramSchmidt {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            elements: Vec::new(),
        }
    }

    /// Adds the component of `m` orthogonal to the current span if its norm
    /// exceeds `RANK_TOL·scale`. Returns the index of the new element.
    fn insert(&mut self, m: &CMatrix, scale: f64) -> Option<usize> {
        if scale == 0.0 || self.elements.len() >= self.dim * self.dim {
            return None;
        }
        let mut r = m.clone();
        for _ in 0..2 {
            for h in &self.elements {
                let c = re_inner(h.matrix(), &r);
                r -= h.matrix().scale(c);
            }
        }
        let norm = fro_norm(&r);
        if norm <= RANK_TOL * scale {
            return None;
        }
        let r = r.unscale(norm);
        // Restore exact skew-Hermiticity lost to rounding.
        self.elements.push(skew_part(&r).ok()?);
        Some(self.elements.len() - 1)
    }

    fn into_elements(self) -> Vec<AlgebraElement> {
        self.elements
    }
}

/// Orthonormal generalized Gell-Mann basis of `𝔰𝔲(n)`.
fn gell_mann(n: usize) -> Vec<AlgebraElement> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut a = CMatrix::zeros(n, n);
            a[(j, k)] = Complex64::new(r, 0.0);
            a[(k, j)] = Complex64::new(-r, 0.0);
            out.push(AlgebraElement::from_raw(a));
            let mut s = CMatrix::zeros(n, n);
            s[(j, k)] = Complex64::new(0.0, r);
            s[(k, j)] = Complex64::new(0.0, r);
            out.push(AlgebraElement::from_raw(s));
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(n, n);
        for i in 0..l {
            d[(i, i)] = Complex64::new(0.0, 1.0 / norm);
        }
        d[(l, l)] = Complex64::new(0.0, -(l as f64) / norm);
        out.push(AlgebraElement::from_raw(d));
    }
    out
}

/// Orthonormal basis of `𝔰𝔲(n)`.
pub fn full_subalgebra_basis(n: usize) -> Result<SubalgebraBasis> {
    if n < 2 {
        return Err(Error::InvalidArgument("su(N) needs N ≥ 2".into()));
    }
    Ok(SubalgebraBasis::from_orthonormal(
        n,
        gell_mann(n),
        format!("su({n})"),
        BasisOrigin::Full,
    ))
}

/// Orthonormal basis of `𝔲(n)`: `𝔰𝔲(n)` plus `i·1/√n`.
pub fn unitary_algebra_basis(n: usize) -> Vec<AlgebraElement> {
    let mut out = if n >= 2 { gell_mann(n) } else { Vec::new() };
    let c = Complex64::new(0.0, 1.0 / (n as f64).sqrt());
    out.push(AlgebraElement::from_raw(CMatrix::from_diagonal_element(n, n, c)));
    out
}

/// The local algebra `𝔰𝔲_loc(2ⁿ)` spanned by `X_k, Y_k, Z_k`, each divided
/// by `√(2ⁿ)`. Ordered site by site, `x, y, z` within a site.
pub fn local_subalgebra_basis(n: usize) -> Result<SubalgebraBasis> {
    if n == 0 {
        return Err(Error::InvalidArgument("qubit count must be positive".into()));
    }
    if n > 12 {
        return Err(Error::InvalidArgument(format!("{n} qubits is beyond dense range")));
    }
    let scale = 1.0 / ((1usize << n) as f64).sqrt();
    let mut elements = Vec::with_capacity(3 * n);
    for k in 1..=n {
        for axis in PauliAxis::ALL {
            let e = embed_single_site(k, n, &pauli_skew(axis))?;
            elements.push(e.scaled(scale));
        }
    }
    Ok(SubalgebraBasis::from_orthonormal(
        1 << n,
        elements,
        format!("su_loc(2^{n})"),
        BasisOrigin::Partition(vec![2; n]),
    ))
}

/// Basis of the partition algebra `⊕_j 1⊗…⊗𝔰𝔲(N_j)⊗…⊗1`, factor 1 leftmost.
pub fn partition_subalgebra_basis(dims: &[usize]) -> Result<SubalgebraBasis> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("empty partition".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "partition factor {d} is smaller than 2"
        )));
    }
    let total = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&t| t <= 4096)
        .ok_or_else(|| Error::InvalidArgument("partition is beyond dense range".into()))?;
    let mut elements = Vec::new();
    for (j, &d) in dims.iter().enumerate() {
        let before: usize = dims[..j].iter().product();
        let after: usize = dims[j + 1..].iter().product();
        let scale = 1.0 / ((before * after) as f64).sqrt();
        let left = CMatrix::identity(before, before);
        let right = CMatrix::identity(after, after);
        for g in gell_mann(d) {
            let m = kron(&kron(&left, g.matrix()), &right).scale(scale);
            elements.push(AlgebraElement::from_raw(m));
        }
    }
    let label = dims
        .iter()
        .map(|d| format!("su({d})"))
        .collect::<Vec<_>>()
        .join("+");
    let origin = if dims.len() == 1 {
        BasisOrigin::Full
    } else {
        BasisOrigin::Partition(dims.to_vec())
    };
    Ok(SubalgebraBasis::from_orthonormal(total, elements, label, origin))
}

/// `𝔨_E = {k ∈ 𝔲(N) : [k, E] = 0}`.
///
/// Solves `(1⊗E − Eᵀ⊗1)·vec(k) = 0` over the real span of an orthonormal
/// basis of `𝔲(N)`: each basis element contributes one column of a real
/// `2N² × N²` system whose numerical kernel (singular values below
/// `1e-10·σ_max`) gives the coordinates of `𝔨_E`.
pub fn stabilizer_subalgebra(e: &CMatrix) -> Result<SubalgebraBasis> {
    let n = e.nrows();
    if e.ncols() != n || n == 0 {
        return Err(dim_err("stabilizer input must be a nonempty square matrix"));
    }
    let id = CMatrix::identity(n, n);
    let op = kron(&id, e) - kron(&e.transpose(), &id);
    let basis = unitary_algebra_basis(n);
    let m = basis.len();
    let mut sys = nalgebra::DMatrix::<f64>::zeros(2 * n * n, m);
    for (col, b) in basis.iter().enumerate() {
        let img = &op * crate::matcore::vec(b.matrix());
        for (row, z) in img.iter().enumerate() {
            sys[(2 * row, col)] = z.re;
            sys[(2 * row + 1, col)] = z.im;
        }
    }
    let svd = nalgebra::linalg::SVD::try_new(sys, false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD of stabilizer system did not converge".into()))?;
    let v_t = svd.v_t.as_ref().expect("requested V");
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax;
    let mut kernel = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if smax == 0.0 || s <= cutoff {
            let mut k = CMatrix::zeros(n, n);
            for (c, b) in v_t.row(i).iter().zip(&basis) {
                k += b.matrix().scale(*c);
            }
            kernel.push(AlgebraElement::from_raw(k));
        }
    }
    SubalgebraBasis::from_spanning_set(n, kernel, "stabilizer")
}

/// Result of [`lie_closure`].
#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub basis: SubalgebraBasis,
    pub dimension: usize,
    /// The traceless part of the closure is all of `𝔰𝔲(N)`.
    pub controllable: bool,
}

/// Smallest commutator-closed real span containing `generators`.
///
/// Breadth-first: each newly admitted element is bracketed with the whole
/// current basis, and the sweep stops when a pass admits nothing new (or
/// after `N²` passes).
pub fn lie_closure(generators: &[AlgebraElement]) -> Result<ClosureReport> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty generator list".into()))?;
    let n = first.dim();
    if generators.iter().any(|g| g.dim() != n) {
        return Err(dim_err("generators differ in size"));
    }
    let mut gs = GramSchmidt::new(n);
    let mut frontier: Vec<usize> = generators
        .iter()
        .filter_map(|g| gs.insert(g.matrix(), g.norm()))
        .collect();
    let mut sweeps = 0;
    while !frontier.is_empty() && sweeps < n * n {
        let mut next = Vec::new();
        for &a in &frontier {
            let mut b = 0;
            while b < gs.elements.len() {
                let c = commutator(gs.elements[a].matrix(), gs.elements[b].matrix())?;
                // Basis elements are unit vectors, so an absolute floor of 1
                // keeps vanishing brackets from being promoted by rounding.
                if let Some(idx) = gs.insert(&c, fro_norm(&c).max(1.0)) {
                    next.push(idx);
                }
                b += 1;
            }
        }
        frontier = next;
        sweeps += 1;
    }
    let elements = gs.into_elements();
    let traceless_rank = {
        let mut t = GramSchmidt::new(n);
        for h in &elements {
            let shift = h.trace() / n as f64;
            let mut m = h.matrix().clone();
            for i in 0..n {
                m[(i, i)] -= shift;
            }
            t.insert(&m, 1.0);
        }
        t.elements.len()
    };
    let dimension = elements.len();
    Ok(ClosureReport {
        basis: SubalgebraBasis::from_orthonormal(n, elements, "closure".into(), BasisOrigin::Generic),
        dimension,
        controllable: n >= 2 && traceless_rank == n * n - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{random_complex, random_skew, rng_from_seed};
    use proptest::prelude::*;

    fn diag(vals: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            vals.len(),
            vals.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    #[test]
    fn pauli_matrices_match_convention() {
        let x = pauli_skew(PauliAxis::X);
        assert_eq!(x.matrix()[(0, 1)], I);
        assert_eq!(x.matrix()[(1, 0)], I);
        for a in PauliAxis::ALL {
            let s = pauli_skew(a);
            assert!(AlgebraElement::new(s.matrix().clone()).is_ok());
            assert!(s.is_traceless());
            for b in PauliAxis::ALL {
                let expect = if a == b { 2.0 } else { 0.0 };
                assert!((s.inner(&pauli_skew(b)) - expect).abs() < 1e-15);
            }
        }
        assert!("w".parse::<PauliAxis>().is_err());
        assert_eq!("Y".parse::<PauliAxis>().unwrap(), PauliAxis::Y);
    }

    #[test]
    fn skew_pauli_is_i_times_hermitian_up_to_sign() {
        // σ_x = iX, σ_y = −iY, σ_z = iZ.
        let sx = pauli_hermitian(PauliAxis::X).map(|z| z * I);
        let sy = pauli_hermitian(PauliAxis::Y).map(|z| -z * I);
        let sz = pauli_hermitian(PauliAxis::Z).map(|z| z * I);
        assert_eq!(&sx, pauli_skew(PauliAxis::X).matrix());
        assert_eq!(&sy, pauli_skew(PauliAxis::Y).matrix());
        assert_eq!(&sz, pauli_skew(PauliAxis::Z).matrix());
    }

    #[test]
    fn single_site_embedding() {
        let z = pauli_skew(PauliAxis::Z);
        assert_eq!(embed_single_site(1, 1, &z).unwrap(), z);
        let e2 = embed_single_site(2, 2, &z).unwrap();
        assert_eq!(e2.matrix(), &kron(&CMatrix::identity(2, 2), z.matrix()));
        let e1 = embed_single_site(1, 2, &z).unwrap();
        assert!(fro_norm(&commutator(e1.matrix(), e2.matrix()).unwrap()) == 0.0);
        assert!(embed_single_site(0, 2, &z).is_err());
        assert!(embed_single_site(3, 2, &z).is_err());
    }

    #[test]
    fn local_basis_sizes_and_orthonormality() {
        assert_eq!(local_subalgebra_basis(1).unwrap().len(), 3);
        let b = local_subalgebra_basis(3).unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.dim(), 8);
        assert!(b.orthonormality_defect() < 1e-12);
        assert!(b.closure_residual() < 1e-12);
        assert!(local_subalgebra_basis(0).is_err());
    }

    #[test]
    fn two_site_terms_project_to_zero() {
        let p = local_subalgebra_basis(2).unwrap().projector();
        let zz = kron(pauli_skew(PauliAxis::Z).matrix(), &pauli_hermitian(PauliAxis::Z));
        assert!(p.project(&zz).unwrap().norm() < 1e-15);
    }

    #[test]
    fn local_projector_matches_unnormalized_formula() {
        // P(g) = 2⁻ⁿ Σ_k Σ_a Re tr(σ_{k,a}† g) σ_{k,a}
        let n = 3;
        let p = local_subalgebra_basis(n).unwrap().projector();
        let g = random_complex(8, 8, &mut rng_from_seed(11));
        let mut expect = CMatrix::zeros(8, 8);
        for k in 1..=n {
            for a in PauliAxis::ALL {
                let s = embed_single_site(k, n, &pauli_skew(a)).unwrap();
                expect += s.matrix().scale(re_inner(s.matrix(), &g) / 8.0);
            }
        }
        assert!(fro_norm(&(p.project(&g).unwrap().matrix() - expect)) < 1e-13);
    }

    #[test]
    fn partition_bases() {
        let p222 = partition_subalgebra_basis(&[2, 2, 2]).unwrap();
        let loc = local_subalgebra_basis(3).unwrap();
        assert_eq!(p222.len(), 9);
        for h in loc.elements() {
            assert!(p222.span_residual(h.matrix()) < 1e-12);
        }
        assert_eq!(partition_subalgebra_basis(&[4]).unwrap().len(), 15);
        let p23 = partition_subalgebra_basis(&[2, 3]).unwrap();
        assert_eq!(p23.len(), 11);
        assert_eq!(p23.dim(), 6);
        assert!(p23.orthonormality_defect() < 1e-12);
        assert!(p23.closure_residual() < 1e-12);
        assert!(partition_subalgebra_basis(&[]).is_err());
        assert!(partition_subalgebra_basis(&[2, 1]).is_err());
    }

    #[test]
    fn projection_fixed_points_and_residual() {
        let p = partition_subalgebra_basis(&[2, 3]).unwrap().projector();
        let mut rng = rng_from_seed(12);
        let inside = p.combine(&[0.3, -1.0, 2.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]).unwrap();
        assert!(fro_norm(&(p.project(inside.matrix()).unwrap().matrix() - inside.matrix())) < 1e-13);
        let hermitian = random_complex(6, 6, &mut rng);
        let hermitian = &hermitian + hermitian.adjoint();
        assert!(p.project(&hermitian).unwrap().norm() < 1e-13);
        let g = random_complex(6, 6, &mut rng);
        let pg = p.project(&g).unwrap();
        let r = &g - pg.matrix();
        for h in p.basis().elements() {
            assert!(re_inner(h.matrix(), &r).abs() < 1e-11);
        }
        assert!(p.project(&CMatrix::zeros(4, 4)).is_err());
    }

    #[test]
    fn full_projector_shortcut_matches_basis_sum() {
        let p = full_subalgebra_basis(5).unwrap().projector();
        let g = random_complex(5, 5, &mut rng_from_seed(13));
        let fast = p.project(&g).unwrap();
        let slow = p.combine(&p.coefficients(&g).unwrap()).unwrap();
        assert!(fro_norm(&(fast.matrix() - slow.matrix())) < 1e-13);
    }

    #[test]
    fn stabilizer_examples() {
        assert_eq!(stabilizer_subalgebra(&CMatrix::identity(3, 3)).unwrap().len(), 9);
        let z = pauli_hermitian(PauliAxis::Z);
        let s = stabilizer_subalgebra(&z).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.span_residual(&CMatrix::identity(2, 2).map(|c| c * I)) < 1e-10);
        assert!(s.span_residual(pauli_skew(PauliAxis::Z).matrix()) < 1e-10);
        let d = stabilizer_subalgebra(&diag(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(d.len(), 3);
        for h in d.elements() {
            let m = h.matrix();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        assert!(m[(i, j)].norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn stabilizer_of_projector_generates_symmetries() {
        let e = diag(&[1.0, 1.0, 0.0, 0.0]);
        let s = stabilizer_subalgebra(&e).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.orthonormality_defect() < 1e-10);
        assert!(s.closure_residual() < 1e-8);
        for h in s.elements() {
            let u = expm_skew(h);
            let moved = u.conjugate(&e).unwrap();
            assert!(fro_norm(&(moved - &e)) < 1e-9);
        }
        let mut rng = rng_from_seed(14);
        let u = s.random_group_element(&mut rng).unwrap();
        assert!(fro_norm(&(u.conjugate(&e).unwrap() - &e)) < 1e-9);
    }

    #[test]
    fn closure_small_cases() {
        let z = pauli_skew(PauliAxis::Z);
        let r = lie_closure(&[z.clone()]).unwrap();
        assert_eq!(r.dimension, 1);
        assert!(!r.controllable);
        let r = lie_closure(&[pauli_skew(PauliAxis::X), pauli_skew(PauliAxis::Y)]).unwrap();
        assert_eq!(r.dimension, 3);
        assert!(r.controllable);
        assert!(lie_closure(&[]).is_err());
    }

    #[test]
    fn closure_two_qubit_ising() {
        let zz = kron(pauli_skew(PauliAxis::Z).matrix(), &pauli_hermitian(PauliAxis::Z));
        let mut gens = vec![AlgebraElement::new(zz).unwrap()];
        for k in 1..=2 {
            for a in [PauliAxis::X, PauliAxis::Y] {
                gens.push(embed_single_site(k, 2, &pauli_skew(a)).unwrap());
            }
        }
        let r = lie_closure(&gens).unwrap();
        assert_eq!(r.dimension, 15);
        assert!(r.controllable);
        // Idempotent.
        let again = lie_closure(r.basis.elements()).unwrap();
        assert_eq!(again.dimension, 15);
        // Without the coupling only the local algebra is reachable.
        assert_eq!(lie_closure(&gens[1..]).unwrap().dimension, 6);
    }

    #[test]
    fn random_local_group_element_is_product() {
        let b = local_subalgebra_basis(2).unwrap();
        let u = b.random_group_element(&mut rng_from_seed(15)).unwrap();
        assert!(u.defect() < 1e-12);
        // For a product W⊗V the reshuffled matrix has rank one.
        let m = u.matrix();
        let mut r = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        r[(2 * i + j, 2 * k + l)] = m[(2 * i + k, 2 * j + l)];
                    }
                }
            }
        }
        let sv = r.singular_values();
        let mut s: Vec<f64> = sv.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        assert!(s[1] < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projector_is_idempotent_and_self_adjoint(seed in any::<u64>(), which in 0usize..3) {
            let basis = match which {
                0 => local_subalgebra_basis(2).unwrap(),
                1 => partition_subalgebra_basis(&[2, 3]).unwrap(),
                _ => stabilizer_subalgebra(&diag(&[1.0, 1.0, 0.0, 0.0])).unwrap(),
            };
            let p = basis.projector();
            let n = p.dim();
            let mut rng = rng_from_seed(seed);
            let a = random_complex(n, n, &mut rng);
            let b = random_complex(n, n, &mut rng);
            let pb = p.project(&b).unwrap();
            let ppb = p.project(pb.matrix()).unwrap();
            let scale = fro_norm(&a) * fro_norm(&b);
            prop_assert!(fro_norm(&(ppb.matrix() - pb.matrix())) <= 1e-11 * fro_norm(&b));
            let lhs = re_inner(&a, pb.matrix());
            let rhs = re_inner(p.project(&a).unwrap().matrix(), &b);
            prop_assert!((lhs - rhs).abs() <= 1e-11 * scale);
        }

        #[test]
        fn closure_is_monotone(seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let g1 = random_skew(3, &mut rng);
            let z = AlgebraElement::new(diag(&[1.0, -1.0, 0.0]).map(|c| c * I)).unwrap();
            let d1 = lie_closure(&[z.clone()]).unwrap().dimension;
            let d2 = lie_closure(&[z, g1]).unwrap().dimension;
            prop_assert!(d2 >= d1);
        }
    }
}
