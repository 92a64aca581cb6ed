//! Hessian of `f(U) = Re tr(C†UAU†)` on a subgroup and the classification of
//! its critical points.
//!
//! With `X = UAU†` the Hessian operator on `𝔨` is
//!
//! ```text
//! S(U)Ω = ½ P([C†, [Ω, X]] + [X, [Ω, C†]])
//! ```
//!
//! and `Re tr(Ω† S Ω) = d²/dt² f(e^{tΩ}U)|₀`. In an orthonormal basis of `𝔨`
//! it is the real symmetric matrix `H_ij = Re tr(h_i† S h_j)`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::{QualityFunction, QualityKind};
use crate::error::{dim_err, Error, Result};
use crate::liealg::{full_subalgebra_basis, Projector};
use crate::matcore::{re_inner, AlgebraElement, CMatrix, UnitaryMatrix};

#[derive(Clone, Debug)]
pub struct HessianMatrix {
    pub matrix: DMatrix<f64>,
    basis: Projector,
}

impl HessianMatrix {
    pub fn basis(&self) -> &Projector {
        &self.basis
    }

    /// `max_ij |H_ij − H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// Eigenvalues of the symmetrized matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }

    /// `Re tr(Ω† S Ω)` for `Ω` in the basis span.
    pub fn quadratic_form(&self, omega: &AlgebraElement) -> Result<f64> {
        let c = nalgebra::DVector::from_vec(self.basis.coefficients(omega.matrix())?);
        Ok((c.transpose() * &self.matrix * &c)[(0, 0)])
    }
}

/// The Hessian matrix of `Re tr(C†UAU†)` in the orthonormal basis of `p`.
pub fn hessian_local(
    u: &UnitaryMatrix,
    a: &CMatrix,
    c: &CMatrix,
    p: &Projector,
) -> Result<HessianMatrix> {
    if p.dim() != u.dim() || c.shape() != a.shape() {
        return Err(dim_err("Hessian operands differ in size"));
    }
    let x = u.conjugate(a)?;
    let c_adj = c.adjoint();
    let hs = p.basis().elements();
    let m = hs.len();
    let br = |a: &CMatrix, b: &CMatrix| a * b - b * a;
    // S h_j before projection; Re tr(h_i† P g) = Re tr(h_i† g) for h_i ∈ 𝔨.
    let images: Vec<CMatrix> = hs
        .iter()
        .map(|h| {
            let h = h.matrix();
            (br(&c_adj, &br(h, &x)) + br(&x, &br(h, &c_adj))).scale(0.5)
        })
        .collect();
    let matrix = DMatrix::from_fn(m, m, |i, j| re_inner(hs[i].matrix(), &images[j]));
    Ok(HessianMatrix {
        matrix,
        basis: p.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalKind {
    Max,
    Min,
    Saddle,
    /// Every Hessian eigenvalue vanishes.
    Degenerate,
}

/// Classifies a critical point of a U1/U1K function from the sign pattern of
/// its Hessian spectrum, treating `|μ| ≤ 1e-7·max|μ|` as zero.
pub fn classify_critical(qf: &QualityFunction, u: &UnitaryMatrix, grad_tol: f64) -> Result<CriticalKind> {
    if qf.kind() != QualityKind::U1 {
        return Err(Error::InvalidArgument(format!(
            "critical points are classified for U1/U1K only, not {}",
            qf.kind()
        )));
    }
    let point = super::FlowPoint::single(u.clone());
    let g = qf.gradient_direction(&point)?.norm();
    if g > grad_tol {
        return Err(Error::InvalidArgument(format!(
            "not a critical point: gradient norm {g:.3e} exceeds {grad_tol:.3e}"
        )));
    }
    let p = match qf.restriction() {
        Some(p) => p.clone(),
        None => full_subalgebra_basis(qf.dim())?.projector(),
    };
    let eig = hessian_local(u, qf.a(), qf.c(), &p)?.eigenvalues();
    let scale = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-7 * scale;
    let pos = eig.iter().any(|&v| v > zero);
    let neg = eig.iter().any(|&v| v < -zero);
    Ok(match (pos, neg) {
        (false, true) => CriticalKind::Max,
        (true, false) => CriticalKind::Min,
        (true, true) => CriticalKind::Saddle,
        (false, false) => CriticalKind::Degenerate,
    })
}
