//! Double-bracket flows on the adjoint orbit `𝒪(A) = {UAU† : U ∈ U(N)}`.
//!
//! The gradient of `X ↦ Re tr(C†X)` on the orbit gives the recursion
//!
//! ```text
//! X_{k+1} = exp(−α_k [X_k, C†]_S) · X_k · exp(α_k [X_k, C†]_S)
//! ```
//!
//! which is isospectral by construction. Replacing `[X, C†]_S` with
//! `P_𝔨[X, C†]` restricts the flow to the orbit of the subgroup `exp(𝔨)`.
//! Since `X_k = U_k A U_k†` along the group flow of the same objective, the
//! two iterations produce the same values step for step; [`OrbitPoint`]
//! keeps the accumulated `U_k` so this can be checked.
//!
//! [`euler_db_step`] is the first-order update `X + α[X, [X, C†]_S]`, which
//! leaves the orbit.

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::flows::{drive, AscentProblem, FlowOptions, FlowResult, StepSizeRule};
use crate::liealg::Projector;
use crate::matcore::{
    commutator, eigenvalues, expm_skew, fro_norm, haar_unitary, rng_from_seed, skew_part,
    AlgebraElement, CMatrix, SeededRng, UnitaryMatrix,
};

/// Spectrum drift beyond which an orbit iterate is rejected.
pub const DRIFT_LIMIT: f64 = 1e-6;

/// Largest matrix size for which the spectrum is checked on every step;
/// above it, every 100th step.
pub const DRIFT_EVERY_STEP_MAX_N: usize = 16;

/// A point `X = UAU†` of the orbit, with the spectrum of `A` it must keep.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    x: CMatrix,
    reference: Vec<Complex64>,
    u: UnitaryMatrix,
}

impl OrbitPoint {
    /// The point `A` itself.
    pub fn new(a: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || n == 0 {
            return Err(dim_err("orbit base point must be a nonempty square matrix"));
        }
        crate::matcore::ensure_finite(&a)?;
        let mut reference = eigenvalues(&a)?;
        reference.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        Ok(Self {
            x: a,
            reference,
            u: UnitaryMatrix::identity(n),
        })
    }

    /// The point `UAU†`.
    pub fn from_group(a: CMatrix, u: &UnitaryMatrix) -> Result<Self> {
        let base = Self::new(a)?;
        base.conjugated(u)
    }

    fn conjugated(&self, k: &UnitaryMatrix) -> Result<Self> {
        Ok(Self {
            x: k.conjugate(&self.x)?,
            reference: self.reference.clone(),
            u: k.compose(&self.u)?,
        })
    }

    pub fn x(&self) -> &CMatrix {
        &self.x
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// Eigenvalues of the base point, sorted by real then imaginary part.
    pub fn reference_spectrum(&self) -> &[Complex64] {
        &self.reference
    }

    /// Product of all conjugations applied so far.
    pub fn accumulated(&self) -> &UnitaryMatrix {
        &self.u
    }

    /// Largest distance between an eigenvalue of `X` and its matched
    /// reference eigenvalue (greedy nearest unused match).
    pub fn spectrum_drift(&self) -> Result<f64> {
        let current = eigenvalues(&self.x)?;
        let mut used = vec![false; current.len()];
        let mut worst = 0.0f64;
        for r in &self.reference {
            let (idx, dist) = current
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, z)| (i, (z - r).norm()))
                .fold((usize::MAX, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
            used[idx] = true;
            worst = worst.max(dist);
        }
        Ok(worst)
    }

    fn checked(self) -> Result<Self> {
        let drift = self.spectrum_drift()?;
        if drift > DRIFT_LIMIT {
            return Err(Error::Integrity(format!(
                "orbit spectrum drifted by {drift:.3e}"
            )));
        }
        Ok(self)
    }
}

/// `P[X, C†]` (or `[X, C†]_S`).
fn bracket_direction(x: &CMatrix, c: &CMatrix, p: Option<&Projector>) -> Result<AlgebraElement> {
    if c.shape() != x.shape() {
        return Err(dim_err("C differs in size from the orbit"));
    }
    let m = commutator(x, &c.adjoint())?;
    match p {
        Some(p) => p.project(&m),
        None => skew_part(&m),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be ≥ 0, got {alpha}")));
    }
    Ok(())
}

/// One isospectral double-bracket step.
pub fn db_step(x: &OrbitPoint, c: &CMatrix, alpha: f64) -> Result<OrbitPoint> {
    check_alpha(alpha)?;
    let om = bracket_direction(x.x(), c, None)?;
    x.conjugated(&expm_skew(&om.scaled(-alpha)))?.checked()
}

/// One double-bracket step restricted to the orbit of `exp(𝔨)`.
pub fn db_step_restricted(x: &OrbitPoint, c: &CMatrix, alpha: f64, p: &Projector) -> Result<OrbitPoint> {
    check_alpha(alpha)?;
    if p.dim() != x.dim() {
        return Err(dim_err("projector differs in size from the orbit"));
    }
    let om = bracket_direction(x.x(), c, Some(p))?;
    x.conjugated(&expm_skew(&om.scaled(-alpha)))?.checked()
}

/// `X + α[X, [X, C†]_S]`, which is not isospectral.
pub fn euler_db_step(x: &CMatrix, c: &CMatrix, alpha: f64) -> Result<CMatrix> {
    let om = bracket_direction(x, c, None)?;
    Ok(x + commutator(x, om.matrix())?.scale(alpha))
}

struct OrbitProblem<'a> {
    c: &'a CMatrix,
    c_adj: CMatrix,
    restriction: Option<&'a Projector>,
    scale: f64,
}

impl AscentProblem for OrbitProblem<'_> {
    type Point = OrbitPoint;
    type Dir = AlgebraElement;

    fn value(&self, p: &OrbitPoint) -> Result<f64> {
        Ok(crate::flows::trace_product(&self.c_adj, p.x()).re)
    }
    fn direction(&self, p: &OrbitPoint) -> Result<AlgebraElement> {
        // Group ascent direction −P[X, C†].
        Ok(bracket_direction(p.x(), self.c, self.restriction)?.scaled(-1.0))
    }
    fn dir_norm(&self, d: &AlgebraElement) -> f64 {
        d.norm()
    }
    fn dir_inner(&self, a: &AlgebraElement, b: &AlgebraElement) -> f64 {
        a.inner(b)
    }
    fn retract(&self, p: &OrbitPoint, d: &AlgebraElement, alpha: f64) -> Result<OrbitPoint> {
        p.conjugated(&expm_skew(&d.scaled(alpha)))
    }
    fn defect(&self, p: &OrbitPoint) -> f64 {
        p.u.defect()
    }
    fn dim(&self) -> usize {
        self.c.nrows()
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn analytic_alpha(&self, p: &OrbitPoint) -> Result<f64> {
        let om = bracket_direction(p.x(), self.c, self.restriction)?;
        let num = om.norm().powi(2);
        if num == 0.0 {
            return Err(Error::ZeroGradient);
        }
        let den = fro_norm(&commutator(&self.c_adj, om.matrix())?)
            * fro_norm(&commutator(om.matrix(), p.x())?);
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Numerical("analytic step denominator vanishes".into()));
        }
        Ok(num / den)
    }
    fn check_invariant(&mut self, p: &OrbitPoint, k: usize) -> Result<Option<f64>> {
        if p.dim() > DRIFT_EVERY_STEP_MAX_N && k % 100 != 0 {
            return Ok(None);
        }
        let drift = p.spectrum_drift()?;
        if drift > DRIFT_LIMIT {
            return Err(Error::Integrity(format!(
                "orbit spectrum drifted by {drift:.3e} at iteration {k}"
            )));
        }
        Ok(Some(drift))
    }
}

/// Runs the (restricted) double-bracket flow for `Re tr(C†X)` from
/// `X₀ = U₀AU₀†`.
pub fn run_double_bracket(
    a: &CMatrix,
    c: &CMatrix,
    opts: &FlowOptions,
    restriction: Option<&Projector>,
    init: &UnitaryMatrix,
) -> Result<FlowResult<OrbitPoint>> {
    if a.shape() != c.shape() || init.dim() != a.nrows() {
        return Err(dim_err("A, C and the initial unitary differ in size"));
    }
    if let Some(p) = restriction {
        if p.dim() != a.nrows() {
            return Err(dim_err("restriction differs in size from A"));
        }
    }
    if matches!(opts.rule, StepSizeRule::Fixed { alpha } if alpha < 0.0) {
        return Err(Error::InvalidArgument("step size must be ≥ 0".into()));
    }
    let start = OrbitPoint::from_group(a.clone(), init)?;
    let mut problem = OrbitProblem {
        c,
        c_adj: c.adjoint(),
        restriction,
        scale: fro_norm(a) * fro_norm(c),
    };
    drive(&mut problem, start, opts)
}

/// Restart batch of [`run_double_bracket`]. Restart `i` starts from a
/// random group element drawn with seed `seed ⊕ i`, exactly like
/// [`crate::flows::run_restarts`] does for U1/U1K.
pub fn run_double_bracket_restarts(
    a: &CMatrix,
    c: &CMatrix,
    opts: &FlowOptions,
    restriction: Option<&Projector>,
    restarts: usize,
    seed: u64,
) -> Result<Vec<FlowResult<OrbitPoint>>> {
    run_double_bracket_restarts_with(a, c, opts, restriction, restarts, seed, |_, rng| {
        match restriction {
            Some(p) => p.basis().random_group_element(rng),
            None => haar_unitary(a.nrows(), rng),
        }
    })
}

/// [`run_double_bracket_restarts`] with caller-chosen starting unitaries;
/// `init(i, rng)` receives the generator seeded with `seed ⊕ i`.
pub fn run_double_bracket_restarts_with<F>(
    a: &CMatrix,
    c: &CMatrix,
    opts: &FlowOptions,
    restriction: Option<&Projector>,
    restarts: usize,
    seed: u64,
    init: F,
) -> Result<Vec<FlowResult<OrbitPoint>>>
where
    F: Fn(usize, &mut SeededRng) -> Result<UnitaryMatrix> + Sync,
{
    use rayon::prelude::*;
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed ^ i as u64);
            let u = init(i, &mut rng)?;
            run_double_bracket(a, c, opts, restriction, &u)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
