//! Running group flows, singly and as seeded restart batches.

use rayon::prelude::*;

use super::driver::{drive, AscentProblem, FlowOptions, FlowResult, StepSizeRule};
use super::{step, Direction, FlowPoint, QualityFunction, QualityKind};
use crate::error::{Error, Result};
use crate::matcore::{haar_unitary, rng_from_seed, SeededRng, UnitaryMatrix};

struct GroupProblem {
    qf: QualityFunction,
}

impl AscentProblem for GroupProblem {
    type Point = FlowPoint;
    type Dir = Direction;

    fn value(&self, p: &FlowPoint) -> Result<f64> {
        self.qf.value(p)
    }
    fn direction(&self, p: &FlowPoint) -> Result<Direction> {
        self.qf.gradient_direction(p)
    }
    fn dir_norm(&self, d: &Direction) -> f64 {
        d.norm()
    }
    fn dir_inner(&self, a: &Direction, b: &Direction) -> f64 {
        a.inner(b)
    }
    fn retract(&self, p: &FlowPoint, d: &Direction, alpha: f64) -> Result<FlowPoint> {
        step(p, d, alpha)
    }
    fn defect(&self, p: &FlowPoint) -> f64 {
        p.defect()
    }
    fn dim(&self) -> usize {
        self.qf.dim()
    }
    fn scale(&self) -> f64 {
        self.qf.scale()
    }
    fn analytic_alpha(&self, p: &FlowPoint) -> Result<f64> {
        self.qf.analytic_step(&p.u)
    }
    fn is_constrained(&self) -> bool {
        self.qf.kind().is_constrained()
    }
    fn lambda(&self) -> f64 {
        self.qf.lambda()
    }
    fn set_lambda(&mut self, lambda: f64) {
        self.qf.set_lambda(lambda);
    }
    fn constraint_residual(&self, p: &FlowPoint) -> Result<Option<f64>> {
        self.qf.constraint_residual(p)
    }
}

/// Runs `U_{k+1} = exp(α_k Ω(U_k)) U_k` from `init`.
///
/// Penalty kinds start at the function's `λ` and follow `opts.penalty`.
/// A failed Armijo search ends the run with the current (best) point and
/// `converged = false`.
pub fn run_flow(qf: &QualityFunction, opts: &FlowOptions, init: FlowPoint) -> Result<FlowResult> {
    if opts.rule == StepSizeRule::AnalyticLocal && qf.kind() != QualityKind::U1 {
        return Err(Error::InvalidArgument(format!(
            "the analytic step size applies to U1/U1K only, not {}",
            qf.kind()
        )));
    }
    qf.value(&init)?;
    let mut problem = GroupProblem { qf: qf.clone() };
    drive(&mut problem, init, opts)
}

/// All runs of a restart batch, in restart order.
#[derive(Clone, Debug)]
pub struct RestartSummary {
    pub runs: Vec<FlowResult>,
    /// Index of the run with the largest final value (lowest index on ties).
    pub best_index: usize,
}

impl RestartSummary {
    pub fn best(&self) -> &FlowResult {
        &self.runs[self.best_index]
    }

    pub fn values(&self) -> Vec<f64> {
        self.runs.iter().map(|r| r.value).collect()
    }
}

/// Draws a random starting point inside the (restricted) group.
pub fn random_start(qf: &QualityFunction, rng: &mut SeededRng) -> Result<FlowPoint> {
    let draw = |rng: &mut SeededRng| -> Result<UnitaryMatrix> {
        match qf.restriction() {
            Some(p) => p.basis().random_group_element(rng),
            None => haar_unitary(qf.dim(), rng),
        }
    };
    let u = draw(rng)?;
    if qf.kind().is_two_sided() {
        Ok(FlowPoint::pair(u, draw(rng)?))
    } else {
        Ok(FlowPoint::single(u))
    }
}

/// [`run_restarts_with`] using random starts in the (restricted) group.
pub fn run_restarts(
    qf: &QualityFunction,
    opts: &FlowOptions,
    restarts: usize,
    seed: u64,
) -> Result<RestartSummary> {
    run_restarts_with(qf, opts, restarts, seed, |_, rng| random_start(qf, rng))
}

/// Runs `restarts` flows; restart `i` draws its start from a generator seeded
/// with `seed ⊕ i`. Runs execute on the rayon pool, and the reduction is
/// independent of scheduling.
pub fn run_restarts_with<F>(
    qf: &QualityFunction,
    opts: &FlowOptions,
    restarts: usize,
    seed: u64,
    init: F,
) -> Result<RestartSummary>
where
    F: Fn(usize, &mut SeededRng) -> Result<FlowPoint> + Sync,
{
    if restarts == 0 {
        return Err(Error::InvalidArgument("at least one restart is required".into()));
    }
    let runs = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(seed ^ i as u64);
            let start = init(i, &mut rng)?;
            run_flow(qf, opts, start)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let best_index = best_of(runs.iter().map(|r| r.value));
    Ok(RestartSummary { runs, best_index })
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn best_of(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}
