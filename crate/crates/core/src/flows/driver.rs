//! Step-size rules, penalty schedule and the generic ascent loop shared by
//! the group flows and the orbit flows.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sufficient-increase constant of the Armijo test
/// `f(new) − f ≥ σ·α·‖Ω‖²`.
pub const ARMIJO_SIGMA: f64 = 1e-4;

/// Unitarity defect allowed per matrix dimension on accepted iterates.
pub const DEFECT_PER_DIM: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSizeRule {
    /// Constant `α`, every step accepted.
    Fixed { alpha: f64 },
    /// Backtracking by factor `shrink` until the Armijo condition holds.
    /// The first trial is `α₀/‖Ω‖`; later trials start from the
    /// Barzilai–Borwein estimate `⟨s,y⟩/⟨y,y⟩` of the previous step
    /// (`s = αΩ_k`, `y = Ω_k − Ω_{k+1}`), kept within a factor 20 of the
    /// previous step and at most `1/‖Ω‖`.
    Armijo {
        alpha0: f64,
        shrink: f64,
        max_halvings: u32,
    },
    /// The closed-form step of the `Re tr(C†UAU†)` flow (U1/U1K only).
    AnalyticLocal,
}

impl StepSizeRule {
    pub fn armijo(alpha0: f64, max_halvings: u32) -> Self {
        StepSizeRule::Armijo {
            alpha0,
            shrink: 0.5,
            max_halvings,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepSizeRule::Fixed { alpha } if !(alpha.is_finite() && alpha >= 0.0) => Err(
                Error::InvalidArgument(format!("fixed step size must be ≥ 0, got {alpha}")),
            ),
            StepSizeRule::Armijo { alpha0, shrink, .. } => {
                if !(alpha0.is_finite() && alpha0 > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "alpha0 must be positive, got {alpha0}"
                    )));
                }
                if !(shrink > 0.0 && shrink < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "shrink factor must lie in (0,1), got {shrink}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl Default for StepSizeRule {
    fn default() -> Self {
        StepSizeRule::armijo(0.1, 40)
    }
}

/// `λ_k = min(λ₀·2^{⌊k/period⌋ + bumps}, cap)`.
///
/// `bumps` counts early doublings: when the gradient has converged (or the
/// line search stalls) while the constraint residual is still above
/// `residual_tol`, the next doubling is taken immediately.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltySchedule {
    pub period: usize,
    pub cap: f64,
    pub residual_tol: f64,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self {
            period: 200,
            cap: 1e6,
            residual_tol: 1e-6,
        }
    }
}

impl PenaltySchedule {
    pub fn lambda(&self, lambda0: f64, level: u32) -> f64 {
        (lambda0 * 2f64.powi(level.min(1023) as i32)).min(self.cap)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowOptions {
    pub rule: StepSizeRule,
    /// Stop once the direction norm falls to this value. `None` means
    /// `1e-9·‖A‖·‖C‖`.
    pub grad_tol: Option<f64>,
    pub max_iter: usize,
    pub penalty: PenaltySchedule,
    pub record_trace: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            rule: StepSizeRule::default(),
            grad_tol: None,
            max_iter: 100_000,
            penalty: PenaltySchedule::default(),
            record_trace: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub f: f64,
    pub grad_norm: f64,
    pub alpha: f64,
    pub unitarity_defect: f64,
    pub lambda: f64,
    pub spectrum_drift: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowTrace {
    pub records: Vec<TraceRecord>,
}

impl FlowTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_defect(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.unitarity_defect)
            .fold(0.0, f64::max)
    }

    /// Largest drop `f_k − f_{k+1}` between consecutive records with the
    /// same `λ`. Nonpositive for a monotone run.
    pub fn max_decrease(&self) -> f64 {
        self.records
            .windows(2)
            .filter(|w| w[0].lambda == w[1].lambda)
            .map(|w| w[0].f - w[1].f)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `k,f,grad_norm,alpha,unitarity_defect` and, when
    /// `with_drift` is set, a trailing `spectrum_drift` column.
    pub fn to_csv(&self, with_drift: bool) -> String {
        let mut out = String::from("k,f,grad_norm,alpha,unitarity_defect");
        if with_drift {
            out.push_str(",spectrum_drift");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.k, r.f, r.grad_norm, r.alpha, r.unitarity_defect
            );
            if with_drift {
                let _ = write!(out, ",{:.16e}", r.spectrum_drift.unwrap_or(0.0));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// No trial step of the Armijo search was acceptable.
    LineSearchFailed,
}

/// Outcome of a flow run.
#[derive(Clone, Debug)]
pub struct FlowResult<P = super::FlowPoint> {
    pub point: P,
    pub value: f64,
    pub grad_norm: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub lambda: f64,
    pub constraint_residual: Option<f64>,
    pub trace: FlowTrace,
}

/// What the ascent loop needs from a concrete problem.
pub(crate) trait AscentProblem {
    type Point: Clone;
    type Dir;

    fn value(&self, p: &Self::Point) -> Result<f64>;
    fn direction(&self, p: &Self::Point) -> Result<Self::Dir>;
    fn dir_norm(&self, d: &Self::Dir) -> f64;
    fn dir_inner(&self, a: &Self::Dir, b: &Self::Dir) -> f64;
    fn retract(&self, p: &Self::Point, d: &Self::Dir, alpha: f64) -> Result<Self::Point>;
    fn defect(&self, p: &Self::Point) -> f64;
    fn dim(&self) -> usize;
    /// Magnitude used for the default gradient tolerance and the roundoff
    /// floor of the line search.
    fn scale(&self) -> f64;

    fn analytic_alpha(&self, _p: &Self::Point) -> Result<f64> {
        Err(Error::InvalidArgument(
            "the analytic step size is not available for this problem".into(),
        ))
    }

    fn is_constrained(&self) -> bool {
        false
    }
    fn lambda(&self) -> f64 {
        0.0
    }
    fn set_lambda(&mut self, _lambda: f64) {}
    fn constraint_residual(&self, _p: &Self::Point) -> Result<Option<f64>> {
        Ok(None)
    }

    /// Per-step invariant check on an accepted iterate; the returned value is
    /// stored as `spectrum_drift`.
    fn check_invariant(&mut self, _p: &Self::Point, _k: usize) -> Result<Option<f64>> {
        Ok(None)
    }
}

struct Accepted<Pt, D> {
    point: Pt,
    value: f64,
    dir: Option<D>,
    alpha: f64,
}

/// The iteration `p_{k+1} = retract(p_k, Ω_k, α_k)`.
pub(crate) fn drive<P: AscentProblem>(
    problem: &mut P,
    init: P::Point,
    opts: &FlowOptions,
) -> Result<FlowResult<P::Point>> {
    opts.rule.validate()?;
    let tol = opts.grad_tol.unwrap_or(1e-9 * problem.scale());
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("grad_tol must be ≥ 0, got {tol}")));
    }
    let dim_limit = DEFECT_PER_DIM * problem.dim() as f64;
    let lambda0 = problem.lambda();
    let mut bumps = 0u32;
    let mut level = 0u32;

    let mut point = init;
    let mut f = problem.value(&point)?;
    let mut dir = problem.direction(&point)?;
    let mut g = problem.dir_norm(&dir);
    let mut trace = FlowTrace::default();
    let drift0 = problem.check_invariant(&point, 0)?;
    if opts.record_trace {
        trace.records.push(TraceRecord {
            k: 0,
            f,
            grad_norm: g,
            alpha: 0.0,
            unitarity_defect: problem.defect(&point),
            lambda: problem.lambda(),
            spectrum_drift: drift0,
        });
    }

    let mut k = 0usize;
    let mut next_trial: Option<f64> = None;
    let stop_reason;

    // Advances λ ahead of schedule if the constraint is still violated.
    // Returns true if λ changed.
    let try_bump = |problem: &mut P, point: &P::Point, level: u32, bumps: &mut u32| -> Result<bool> {
        if !problem.is_constrained() || problem.lambda() >= opts.penalty.cap || lambda0 == 0.0 {
            return Ok(false);
        }
        let residual = problem.constraint_residual(point)?.unwrap_or(0.0);
        if residual <= opts.penalty.residual_tol {
            return Ok(false);
        }
        *bumps += 1;
        problem.set_lambda(opts.penalty.lambda(lambda0, level + *bumps));
        Ok(true)
    };

    loop {
        if g <= tol {
            if try_bump(problem, &point, level, &mut bumps)? {
                f = problem.value(&point)?;
                dir = problem.direction(&point)?;
                g = problem.dir_norm(&dir);
                continue;
            }
            stop_reason = StopReason::Converged;
            break;
        }
        if k >= opts.max_iter {
            stop_reason = StopReason::MaxIterations;
            break;
        }

        let accepted = match opts.rule {
            StepSizeRule::Fixed { alpha } => {
                let p = problem.retract(&point, &dir, alpha)?;
                let v = problem.value(&p)?;
                Some(Accepted { point: p, value: v, dir: None, alpha })
            }
            StepSizeRule::AnalyticLocal => match problem.analytic_alpha(&point) {
                Ok(alpha) => {
                    let p = problem.retract(&point, &dir, alpha)?;
                    let v = problem.value(&p)?;
                    Some(Accepted { point: p, value: v, dir: None, alpha })
                }
                Err(Error::ZeroGradient) => {
                    stop_reason = StopReason::Converged;
                    break;
                }
                Err(e) => return Err(e),
            },
            StepSizeRule::Armijo {
                alpha0,
                shrink,
                max_halvings,
            } => {
                let cap = 1.0 / g;
                let mut alpha = next_trial.map_or(alpha0 / g, |a| a.min(cap));
                let noise = 8.0 * f64::EPSILON * (f.abs() + problem.scale());
                let mut found = None;
                for _ in 0..=max_halvings {
                    let p = problem.retract(&point, &dir, alpha)?;
                    let v = problem.value(&p)?;
                    let required = ARMIJO_SIGMA * alpha * g * g;
                    if v - f >= required {
                        found = Some(Accepted { point: p, value: v, dir: None, alpha });
                        break;
                    }
                    // Below the roundoff floor of f an increase cannot be
                    // certified; accept if f held and the gradient shrank.
                    if required < noise && v >= f - noise {
                        let d = problem.direction(&p)?;
                        if problem.dir_norm(&d) < g {
                            found = Some(Accepted { point: p, value: v, dir: Some(d), alpha });
                            break;
                        }
                    }
                    alpha *= shrink;
                }
                found
            }
        };

        let Some(acc) = accepted else {
            if try_bump(problem, &point, level, &mut bumps)? {
                f = problem.value(&point)?;
                dir = problem.direction(&point)?;
                g = problem.dir_norm(&dir);
                next_trial = None;
                continue;
            }
            stop_reason = StopReason::LineSearchFailed;
            break;
        };

        k += 1;
        point = acc.point;
        f = acc.value;
        let new_dir = match acc.dir {
            Some(d) => d,
            None => problem.direction(&point)?,
        };
        let g_new = problem.dir_norm(&new_dir);
        if matches!(opts.rule, StepSizeRule::Armijo { .. }) {
            let c = problem.dir_inner(&dir, &new_dir);
            let sy = acc.alpha * (g * g - c);
            let yy = g * g - 2.0 * c + g_new * g_new;
            let bb = if sy > 0.0 && yy > 0.0 { sy / yy } else { 2.0 * acc.alpha };
            next_trial = Some(bb.clamp(acc.alpha / 20.0, acc.alpha * 20.0));
        }
        dir = new_dir;
        g = g_new;

        let defect = problem.defect(&point);
        if !(defect <= dim_limit) {
            return Err(Error::Integrity(format!(
                "unitarity defect {defect:.3e} exceeds {dim_limit:.1e} at iteration {k}"
            )));
        }
        let drift = problem.check_invariant(&point, k)?;

        if problem.is_constrained() {
            let new_level = (k / opts.penalty.period.max(1)) as u32;
            if new_level != level {
                level = new_level;
                problem.set_lambda(opts.penalty.lambda(lambda0, level + bumps));
                f = problem.value(&point)?;
                dir = problem.direction(&point)?;
                g = problem.dir_norm(&dir);
                next_trial = None;
            }
        }

        if opts.record_trace {
            trace.records.push(TraceRecord {
                k,
                f,
                grad_norm: g,
                alpha: acc.alpha,
                unitarity_defect: defect,
                lambda: problem.lambda(),
                spectrum_drift: drift,
            });
        }
    }

    let constraint_residual = problem.constraint_residual(&point)?;
    Ok(FlowResult {
        value: f,
        grad_norm: g,
        converged: stop_reason == StopReason::Converged,
        stop_reason,
        iterations: k,
        lambda: problem.lambda(),
        constraint_residual,
        trace,
        point,
    })
}
