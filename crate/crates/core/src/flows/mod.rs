//! Quality functions on `U(N)` and their Riemannian gradients.
//!
//! Throughout, `X = UAU†`, `f_C = tr(C†X)` and `M = [X, C†]`. With the metric
//! `Re tr(Ω†Ξ)` on right-translated tangent vectors, a function `f` has
//! gradient `grad f(U) = Ω·U` for a skew-Hermitian `Ω`, and the iteration is
//!
//! ```text
//! U_{k+1} = exp(α_k Ω(U_k)) · U_k
//! ```
//!
//! | kind | objective | ascent direction `Ω` |
//! |------|-----------|----------------------|
//! | U1   | `Re f_C` | `−M_S` |
//! | U2   | `|f_C|²` | `−(2 f_C* M)_S` |
//! | U3   | `Re tr(C†UAV)` | `−(UAVC†)_S`, `−(VC†UA)_S` |
//! | U1C  | `Re f_C − λ (Im f_C)²` | `−(M_S + 2iλ Im f_C · M_H)` |
//! | U2C  | `|f_C|² − λ(‖E‖² − Re tr(E†UEU†))` | `−(2 f_C* M)_S − λ[UEU†, E†]_S` |
//! | U3C  | `|f_C|² − λ|f_D|²` | `−(2 f_C* M)_S + λ(2 f_D* [X, D†])_S` |
//!
//! A restriction to a subalgebra `𝔨` replaces `Ω` by `P_𝔨(Ω)`, which turns
//! U1/U2/U3 into their subgroup versions U1K/U2K/U3K.

mod driver;
mod hessian;
mod run;

pub use driver::{
    FlowOptions, FlowResult, FlowTrace, PenaltySchedule, StepSizeRule, StopReason, TraceRecord,
    ARMIJO_SIGMA,
};
pub(crate) use driver::{drive, AscentProblem};
pub use hessian::{classify_critical, hessian_local, CriticalKind, HessianMatrix};
pub use run::{random_start, run_flow, run_restarts, run_restarts_with, RestartSummary};
pub(crate) use run::best_of;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};
use crate::liealg::Projector;
use crate::matcore::{
    commutator, expm_skew, fro_norm, herm_part, skew_part, AlgebraElement, CMatrix,
    UnitaryMatrix, I,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QualityKind {
    U1,
    U2,
    U3,
    U1C,
    U2C,
    U3C,
}

impl QualityKind {
    pub fn is_two_sided(self) -> bool {
        self == QualityKind::U3
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, QualityKind::U1C | QualityKind::U2C | QualityKind::U3C)
    }
}

impl FromStr for QualityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "U1" => QualityKind::U1,
            "U2" => QualityKind::U2,
            "U3" => QualityKind::U3,
            "U1C" => QualityKind::U1C,
            "U2C" => QualityKind::U2C,
            "U3C" => QualityKind::U3C,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown quality function kind '{other}'"
                )))
            }
        })
    }
}

impl fmt::Display for QualityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A point of the flow: `U`, plus `V` for the two-sided kind.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPoint {
    pub u: UnitaryMatrix,
    pub v: Option<UnitaryMatrix>,
}

impl FlowPoint {
    pub fn single(u: UnitaryMatrix) -> Self {
        Self { u, v: None }
    }

    pub fn pair(u: UnitaryMatrix, v: UnitaryMatrix) -> Self {
        Self { u, v: Some(v) }
    }

    /// Largest unitarity defect of the factors.
    pub fn defect(&self) -> f64 {
        let du = self.u.defect();
        self.v.as_ref().map_or(du, |v| du.max(v.defect()))
    }
}

/// Ascent direction; `v` is set for the two-sided kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub u: AlgebraElement,
    pub v: Option<AlgebraElement>,
}

impl Direction {
    /// `sqrt(‖Ω_U‖² + ‖Ω_V‖²)`.
    pub fn norm(&self) -> f64 {
        let nu = self.u.norm();
        let nv = self.v.as_ref().map_or(0.0, |v| v.norm());
        nu.hypot(nv)
    }

    /// `Re tr(Ω'†Ω)` summed over both factors.
    pub fn inner(&self, other: &Direction) -> f64 {
        let mut s = self.u.inner(&other.u);
        if let (Some(a), Some(b)) = (&self.v, &other.v) {
            s += a.inner(b);
        }
        s
    }
}

/// `exp(αΩ_U)·U` (and `exp(αΩ_V)·V`).
pub fn step(p: &FlowPoint, dir: &Direction, alpha: f64) -> Result<FlowPoint> {
    let u = expm_skew(&dir.u.scaled(alpha)).compose(&p.u)?;
    let v = match (&p.v, &dir.v) {
        (Some(v), Some(dv)) => Some(expm_skew(&dv.scaled(alpha)).compose(v)?),
        (None, None) => None,
        _ => return Err(dim_err("point and direction disagree on the second factor")),
    };
    Ok(FlowPoint { u, v })
}

/// The data `(A, C, D, E, λ, P)` selecting one row of the table above.
#[derive(Clone, Debug)]
pub struct QualityFunction {
    kind: QualityKind,
    a: CMatrix,
    c: CMatrix,
    c_adj: CMatrix,
    d: Option<CMatrix>,
    e: Option<CMatrix>,
    lambda: f64,
    restriction: Option<Projector>,
}

impl QualityFunction {
    /// A quality function without the optional matrices. `D` (U3C) and `E`
    /// (U2C) must be supplied with [`with_d`](Self::with_d) and
    /// [`with_e`](Self::with_e) before evaluation.
    pub fn new(kind: QualityKind, a: CMatrix, c: CMatrix) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || c.shape() != a.shape() || n == 0 {
            return Err(dim_err(format!(
                "A and C must be square of equal size, got {:?} and {:?}",
                a.shape(),
                c.shape()
            )));
        }
        crate::matcore::ensure_finite(&a)?;
        crate::matcore::ensure_finite(&c)?;
        let c_adj = c.adjoint();
        Ok(Self {
            kind,
            a,
            c,
            c_adj,
            d: None,
            e: None,
            lambda: if kind.is_constrained() { 1.0 } else { 0.0 },
            restriction: None,
        })
    }

    pub fn with_d(mut self, d: CMatrix) -> Result<Self> {
        self.check_shape(&d, "D")?;
        self.d = Some(d);
        Ok(self)
    }

    pub fn with_e(mut self, e: CMatrix) -> Result<Self> {
        self.check_shape(&e, "E")?;
        self.e = Some(e);
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be ≥ 0, got {lambda}")));
        }
        self.lambda = lambda;
        Ok(self)
    }

    pub fn with_restriction(mut self, p: Projector) -> Result<Self> {
        if p.dim() != self.dim() {
            return Err(dim_err(format!(
                "restriction acts on {0}x{0}, problem is {1}x{1}",
                p.dim(),
                self.dim()
            )));
        }
        self.restriction = Some(p);
        Ok(self)
    }

    fn check_shape(&self, m: &CMatrix, name: &str) -> Result<()> {
        if m.shape() != self.a.shape() {
            return Err(dim_err(format!("{name} has shape {:?}, expected {:?}", m.shape(), self.a.shape())));
        }
        crate::matcore::ensure_finite(m)
    }

    pub fn kind(&self) -> QualityKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d(&self) -> Option<&CMatrix> {
        self.d.as_ref()
    }

    pub fn e(&self) -> Option<&CMatrix> {
        self.e.as_ref()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub(crate) fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn restriction(&self) -> Option<&Projector> {
        self.restriction.as_ref()
    }

    /// `‖A‖_F·‖C‖_F`, the natural scale of values and gradients.
    pub fn scale(&self) -> f64 {
        fro_norm(&self.a) * fro_norm(&self.c)
    }

    /// Checks that the kind's extra matrices are present.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            QualityKind::U2C if self.e.is_none() => {
                Err(Error::InvalidArgument("U2C needs the constraint matrix E".into()))
            }
            QualityKind::U3C if self.d.is_none() => {
                Err(Error::InvalidArgument("U3C needs the penalty matrix D".into()))
            }
            _ => Ok(()),
        }
    }

    fn check_point(&self, p: &FlowPoint) -> Result<()> {
        self.validate()?;
        if p.u.dim() != self.dim() {
            return Err(dim_err("U differs in size from the problem"));
        }
        match (&p.v, self.kind.is_two_sided()) {
            (Some(v), true) if v.dim() == self.dim() => Ok(()),
            (Some(_), true) => Err(dim_err("V differs in size from the problem")),
            (None, true) => Err(Error::InvalidArgument("U3 needs a second factor V".into())),
            (Some(_), false) => Err(Error::InvalidArgument(format!(
                "{} is one-sided but a second factor was given",
                self.kind
            ))),
            (None, false) => Ok(()),
        }
    }

    fn restrict(&self, g: &CMatrix) -> Result<AlgebraElement> {
        match &self.restriction {
            Some(p) => p.project(g),
            None => skew_part(g),
        }
    }

    /// `tr(C†X)` for `X = UAU†`.
    fn overlap(&self, x: &CMatrix) -> Complex64 {
        trace_product(&self.c_adj, x)
    }

    /// Objective value at `p`; penalty kinds use the current `λ`.
    pub fn value(&self, p: &FlowPoint) -> Result<f64> {
        self.check_point(p)?;
        let u = p.u.matrix();
        if self.kind == QualityKind::U3 {
            let v = p.v.as_ref().expect("checked").matrix();
            let uav = u * &self.a * v;
            return Ok(trace_product(&self.c_adj, &uav).re);
        }
        let x = p.u.conjugate(&self.a)?;
        let fc = self.overlap(&x);
        Ok(match self.kind {
            QualityKind::U1 => fc.re,
            QualityKind::U2 => fc.norm_sqr(),
            QualityKind::U1C => fc.re - self.lambda * fc.im * fc.im,
            QualityKind::U2C => {
                let e = self.e.as_ref().expect("validated");
                fc.norm_sqr() - self.lambda * (fro_norm(e).powi(2) - self.stab_overlap(u, e).re)
            }
            QualityKind::U3C => {
                let d = self.d.as_ref().expect("validated");
                fc.norm_sqr() - self.lambda * trace_product(&d.adjoint(), &x).norm_sqr()
            }
            QualityKind::U3 => unreachable!(),
        })
    }

    /// `tr(E†UEU†)`.
    fn stab_overlap(&self, u: &CMatrix, e: &CMatrix) -> Complex64 {
        let ek = u * e * u.adjoint();
        trace_product(&e.adjoint(), &ek)
    }

    /// Constraint residual for penalty kinds:
    /// `|Im f_C|` (U1C), `|Re tr(E†UEU†) − ‖E‖²|` (U2C), `|f_D|²` (U3C).
    pub fn constraint_residual(&self, p: &FlowPoint) -> Result<Option<f64>> {
        self.check_point(p)?;
        let u = p.u.matrix();
        Ok(match self.kind {
            QualityKind::U1C => {
                let x = p.u.conjugate(&self.a)?;
                Some(self.overlap(&x).im.abs())
            }
            QualityKind::U2C => {
                let e = self.e.as_ref().expect("validated");
                Some((self.stab_overlap(u, e).re - fro_norm(e).powi(2)).abs())
            }
            QualityKind::U3C => {
                let d = self.d.as_ref().expect("validated");
                let x = p.u.conjugate(&self.a)?;
                Some(trace_product(&d.adjoint(), &x).norm_sqr())
            }
            _ => None,
        })
    }

    /// Ascent direction `Ω` with `grad f(U) = ΩU`, projected onto the
    /// restriction if one is set.
    pub fn gradient_direction(&self, p: &FlowPoint) -> Result<Direction> {
        self.check_point(p)?;
        let u = p.u.matrix();
        if self.kind == QualityKind::U3 {
            let v = p.v.as_ref().expect("checked").matrix();
            let ua = u * &self.a;
            let uavc = &ua * v * &self.c_adj;
            let vcua = v * &self.c_adj * &ua;
            return Ok(Direction {
                u: self.restrict(&-uavc)?,
                v: Some(self.restrict(&-vcua)?),
            });
        }
        let x = p.u.conjugate(&self.a)?;
        let m = commutator(&x, &self.c_adj)?;
        let fc = self.overlap(&x);
        let g = match self.kind {
            QualityKind::U1 => -m,
            QualityKind::U2 => m * (-2.0 * fc.conj()),
            QualityKind::U1C => {
                let h = herm_part(&m)?;
                -(m + h * (I * 2.0 * self.lambda * fc.im))
            }
            QualityKind::U2C => {
                let e = self.e.as_ref().expect("validated");
                let ek = u * e * u.adjoint();
                let pen = commutator(&ek, &e.adjoint())?;
                m * (-2.0 * fc.conj()) - pen * Complex64::from(self.lambda)
            }
            QualityKind::U3C => {
                let d = self.d.as_ref().expect("validated");
                let d_adj = d.adjoint();
                let fd = trace_product(&d_adj, &x);
                let md = commutator(&x, &d_adj)?;
                m * (-2.0 * fc.conj()) + md * (2.0 * self.lambda * fd.conj())
            }
            QualityKind::U3 => unreachable!(),
        };
        Ok(Direction {
            u: self.restrict(&g)?,
            v: None,
        })
    }

    /// Step size of the analytic rule for U1 and U1K, see
    /// [`analytic_step_u1k`].
    pub fn analytic_step(&self, u: &UnitaryMatrix) -> Result<f64> {
        if self.kind != QualityKind::U1 {
            return Err(Error::InvalidArgument(format!(
                "the analytic step size is only defined for U1/U1K, not {}",
                self.kind
            )));
        }
        analytic_step_u1k(u, &self.a, &self.c, self.restriction.as_ref())
    }
}

/// `Σ_ij a_ij b_ji = tr(AB)`, without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Analytic step size for the restricted `Re tr(C†UAU†)` flow:
///
/// ```text
/// α = ‖Ω‖² / (‖[C†, Ω]‖ · ‖[Ω, X]‖),   Ω = P([C†, X]),  X = UAU†.
/// ```
///
/// With `P = None` the full skew projection is used. The step guarantees
/// `f(exp(αΩ)U) ≥ f(U)`.
pub fn analytic_step_u1k(
    u: &UnitaryMatrix,
    a: &CMatrix,
    c: &CMatrix,
    p: Option<&Projector>,
) -> Result<f64> {
    let x = u.conjugate(a)?;
    let c_adj = c.adjoint();
    let g = commutator(&c_adj, &x)?;
    let omega = match p {
        Some(p) => p.project(&g)?,
        None => skew_part(&g)?,
    };
    let num = omega.norm().powi(2);
    if num == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let den = fro_norm(&commutator(&c_adj, omega.matrix())?)
        * fro_norm(&commutator(omega.matrix(), &x)?);
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Numerical("analytic step denominator vanishes".into()));
    }
    Ok(num / den)
}
