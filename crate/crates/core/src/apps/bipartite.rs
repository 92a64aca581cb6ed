//! Closed-form maximum of the local transfer between two bipartite states.
//!
//! For states `x = vec(X)`, `y = vec(Y)` with `X, Y ∈ ℂ^{N₁×N₂}`,
//!
//! ```text
//! max_{U₁,U₂} |⟨y, (U₁⊗U₂) x⟩|² = (Σᵢ σᵢ(X) σᵢ(Y))²
//! ```
//!
//! with both singular value lists sorted in descending order. Since
//! `(U₁⊗U₂) x = vec(U₁ X U₂ᵀ)`, the maximizer aligns the singular vectors:
//! `U₁ = W_Y W_X†`, `U₂ = V̄_Y V_Xᵀ` for full SVDs `X = W_X Σ_X V_X†`.

use nalgebra::DVector;

use super::tensor::Tensor;
use crate::error::{dim_err, Error, Result};
use crate::flows::{QualityFunction, QualityKind};
use crate::liealg::partition_subalgebra_basis;
use crate::matcore::{kron, CMatrix, CVector, UnitaryMatrix};

#[derive(Clone, Debug)]
pub struct BipartiteOptimum {
    pub value: f64,
    pub u1: UnitaryMatrix,
    pub u2: UnitaryMatrix,
    /// `U₁ ⊗ U₂`.
    pub u_star: UnitaryMatrix,
}

/// Full SVD `M = W Σ V†` with square unitary `W`, `V` and singular values
/// sorted in descending order.
pub fn full_svd(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix)> {
    crate::matcore::ensure_finite(m)?;
    let svd = m.clone().svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("SVD did not return singular vectors".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let w_thin: Vec<CVector> = order.iter().map(|&i| u.column(i).into_owned()).collect();
    let v_thin: Vec<CVector> = order.iter().map(|&i| v_t.row(i).adjoint()).collect();
    Ok((complete_unitary(w_thin, m.nrows()), sigma, complete_unitary(v_thin, m.ncols())))
}

/// Extends orthonormal columns to an `n × n` unitary with standard basis
/// vectors orthogonalized against them.
fn complete_unitary(mut cols: Vec<CVector>, n: usize) -> CMatrix {
    let mut e = 0;
    while cols.len() < n {
        let mut v = CVector::zeros(n);
        v[e].re = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            cols.push(v.unscale(norm));
        }
    }
    CMatrix::from_columns(&cols)
}

/// `|⟨y, U x⟩|²` for `x = vec(X)`, `y = vec(Y)` (first index slowest).
pub fn bipartite_transfer(x: &CMatrix, y: &CMatrix, u: &UnitaryMatrix) -> Result<f64> {
    let (xv, yv) = (flatten(x, y)?, flatten(y, x)?);
    if u.dim() != xv.len() {
        return Err(dim_err("unitary does not act on the product space"));
    }
    Ok(yv.dotc(&(u.matrix() * xv)).norm_sqr())
}

/// The U1K function `Re tr(C†UAU†)` with `A = xx†`, `C = yy†`, restricted to
/// `SU(N₁) ⊗ SU(N₂)`, whose maximum is [`bipartite_optimal`]'s value.
pub fn bipartite_quality(x: &CMatrix, y: &CMatrix) -> Result<QualityFunction> {
    let (xv, yv) = (flatten(x, y)?, flatten(y, x)?);
    let p = partition_subalgebra_basis(&[x.nrows(), x.ncols()])?.projector();
    QualityFunction::new(QualityKind::U1, &xv * xv.adjoint(), &yv * yv.adjoint())?.with_restriction(p)
}

pub fn bipartite_optimal(x: &CMatrix, y: &CMatrix) -> Result<BipartiteOptimum> {
    flatten(x, y)?;
    let (wx, sx, vx) = full_svd(x)?;
    let (wy, sy, vy) = full_svd(y)?;
    let overlap: f64 = sx.iter().zip(&sy).map(|(a, b)| a * b).sum();
    let u1 = UnitaryMatrix::new(&wy * wx.adjoint())?;
    let u2 = UnitaryMatrix::new(vy.conjugate() * vx.transpose())?;
    let u_star = UnitaryMatrix::new(kron(u1.matrix(), u2.matrix()))?;
    Ok(BipartiteOptimum { value: overlap * overlap, u1, u2, u_star })
}

fn flatten(x: &CMatrix, other: &CMatrix) -> Result<CVector> {
    if x.shape() != other.shape() || x.is_empty() {
        return Err(dim_err(format!(
            "bipartite states must have equal nonempty shapes, got {:?} and {:?}",
            x.shape(),
            other.shape()
        )));
    }
    let t = Tensor::new(vec![x.nrows(), x.ncols()], x.transpose().iter().copied().collect())?;
    Ok(DVector::from_column_slice(t.entries()))
}
