//! Best rank-1 approximation as a local-unitary optimization.
//!
//! For `x = vec(X)` and `y = e₁ ⊗ … ⊗ e₁`,
//!
//! ```text
//! min_{C,xᵏ} ‖X − C·x¹⊗…⊗xʳ‖²  ⇔  max_{U ∈ U(N₁)⊗…⊗U(N_r)} |⟨x, U y⟩|²
//! ```
//!
//! and the right side is the U1K function with `A = yy†`, `C = xx†` on the
//! partition subgroup. The factors are `xᵏ = U_k e₁`, the coefficient is
//! `⟨x¹⊗…⊗xʳ, X⟩`, and `‖X − C·x¹⊗…‖² = ‖X‖² − |C|²`.

use num_complex::Complex64;

use super::tensor::{kron_all, tensor_vec, Tensor};
use crate::error::{Error, Result};
use crate::flows::{run_restarts, FlowOptions, QualityFunction, QualityKind};
use crate::liealg::partition_subalgebra_basis;
use crate::matcore::{CMatrix, CVector, ONE};

#[derive(Clone, Debug)]
pub struct Rank1Options {
    pub flow: FlowOptions,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for Rank1Options {
    fn default() -> Self {
        Self {
            flow: FlowOptions {
                record_trace: false,
                ..FlowOptions::default()
            },
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Rank1Result {
    pub coefficient: Complex64,
    /// Unit vectors `x¹ … xʳ`.
    pub factors: Vec<CVector>,
    /// `|⟨x¹⊗…⊗xʳ, X⟩|²`.
    pub overlap: f64,
    /// `‖X − C·x¹⊗…⊗xʳ‖²`, computed directly.
    pub residual_sq: f64,
    /// Whether the best restart reached the gradient tolerance.
    pub converged: bool,
    pub restarts_used: usize,
    /// Final overlap of every restart, in restart order.
    pub restart_overlaps: Vec<f64>,
}

/// Closest product tensor to `x` via restarted local-unitary flows.
pub fn best_rank1(x: &Tensor, opts: &Rank1Options) -> Result<Rank1Result> {
    if x.dims().iter().any(|&d| d < 2) {
        return Err(Error::InvalidArgument(format!(
            "every tensor dimension must be at least 2, got {:?}",
            x.dims()
        )));
    }
    let n: usize = x.dims().iter().product();
    let xv = tensor_vec(x);
    let mut a = CMatrix::zeros(n, n);
    a[(0, 0)] = ONE;
    let c = &xv * xv.adjoint();
    let p = partition_subalgebra_basis(x.dims())?.projector();
    let qf = QualityFunction::new(QualityKind::U1, a, c)?.with_restriction(p)?;
    let summary = run_restarts(&qf, &opts.flow, opts.restarts, opts.seed)?;
    let best = summary.best();
    let product = best.point.u.matrix().column(0).into_owned();
    let factors = split_product(x.dims(), &product)?;
    let mut result = rank1_from_factors(x, factors)?;
    result.converged = best.converged;
    result.restarts_used = opts.restarts;
    result.restart_overlaps = summary.values();
    Ok(result)
}

/// Coefficient, overlap and residual for given unit factors.
pub fn rank1_from_factors(x: &Tensor, factors: Vec<CVector>) -> Result<Rank1Result> {
    let z = kron_all(&factors)?;
    let xv = tensor_vec(x);
    if z.len() != xv.len() {
        return Err(crate::error::dim_err("factor sizes do not match the tensor"));
    }
    let coefficient = z.dotc(&xv);
    let residual_sq = (&xv - &z * coefficient).norm_squared();
    Ok(Rank1Result {
        coefficient,
        overlap: coefficient.norm_sqr(),
        residual_sq,
        factors,
        converged: true,
        restarts_used: 1,
        restart_overlaps: Vec::new(),
    })
}

/// Splits a (numerically) product vector into unit factors, each the
/// dominant left singular vector of the corresponding unfolding.
fn split_product(dims: &[usize], v: &CVector) -> Result<Vec<CVector>> {
    let t = Tensor::from_vector(dims.to_vec(), v)?;
    (0..dims.len())
        .map(|k| {
            let svd = t.unfold(k)?.svd(true, false);
            let u = svd
                .u
                .ok_or_else(|| Error::Numerical("SVD did not return singular vectors".into()))?;
            let top = svd.singular_values.imax();
            Ok(u.column(top).into_owned())
        })
        .collect()
}
