//! File formats: the JSON matrix format, subalgebra and flow configs,
//! generator lists, and helpers for JSON output.
//!
//! Matrices are stored row-major as `{"rows":N,"cols":M,"re":[[…]],"im":[[…]]}`.
//! Wherever a config expects a matrix it accepts either such an object
//! inline or a path string, resolved relative to the config file.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{config_err, Error, Result};
use crate::flows::{
    best_of, random_start, run_restarts_with, FlowOptions, FlowPoint, QualityFunction,
    QualityKind, StepSizeRule, StopReason,
};
use crate::liealg::{
    full_subalgebra_basis, local_subalgebra_basis, partition_subalgebra_basis,
    stabilizer_subalgebra, Projector, SubalgebraBasis,
};
use crate::matcore::{haar_unitary, AlgebraElement, CMatrix, UnitaryMatrix};
use crate::orbits::run_double_bracket_restarts_with;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let shape_ok = |parts: &[Vec<f64>]| {
            parts.len() == self.rows && parts.iter().all(|r| r.len() == self.cols)
        };
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(Error::Dimension(format!(
                "matrix file declares {}x{} but re/im rows do not match",
                self.rows, self.cols
            )));
        }
        let m = CMatrix::from_fn(self.rows, self.cols, |i, j| {
            Complex64::new(self.re[i][j], self.im[i][j])
        });
        crate::matcore::ensure_finite(&m)?;
        Ok(m)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<CMatrix> {
    read_json::<MatrixFile>(path)?.to_matrix()
}

pub fn write_matrix(path: &Path, m: &CMatrix) -> Result<()> {
    write_json(path, &MatrixFile::from_matrix(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Path(PathBuf),
    Inline(MatrixFile),
}

impl MatrixRef {
    pub fn load(&self, base: &Path) -> Result<CMatrix> {
        match self {
            MatrixRef::Inline(m) => m.to_matrix(),
            MatrixRef::Path(p) => read_matrix(&base.join(p)),
        }
    }

    fn load_field(&self, base: &Path, field: &str) -> Result<CMatrix> {
        self.load(base).map_err(|e| config_err(field, e.to_string()))
    }
}

/// `{"kind":"local","n":3}`, `{"kind":"partition","dims":[2,4]}`,
/// `{"kind":"stabilizer","E":…}` or `{"kind":"full"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SubalgebraSpec {
    Local { n: usize },
    Partition { dims: Vec<usize> },
    Stabilizer {
        #[serde(rename = "E")]
        e: MatrixRef,
    },
    Full,
}

impl SubalgebraSpec {
    /// The basis, checked to act on `dim × dim` matrices.
    pub fn build(&self, dim: usize, base: &Path) -> Result<SubalgebraBasis> {
        let basis = match self {
            SubalgebraSpec::Local { n } => local_subalgebra_basis(*n)?,
            SubalgebraSpec::Partition { dims } => partition_subalgebra_basis(dims)?,
            SubalgebraSpec::Stabilizer { e } => stabilizer_subalgebra(&e.load(base)?)?,
            SubalgebraSpec::Full => full_subalgebra_basis(dim)?,
        };
        if basis.dim() != dim {
            return Err(Error::Dimension(format!(
                "subalgebra acts on {0}x{0}, problem is {1}x{1}",
                basis.dim(),
                dim
            )));
        }
        Ok(basis)
    }
}

/// `{"armijo":{"alpha0":0.1}}`, `{"fixed":{"alpha":0.01}}` or `"analytic"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum RuleSpec {
    Armijo {
        #[serde(default = "default_alpha0")]
        alpha0: f64,
        #[serde(default = "default_halvings")]
        max_halvings: u32,
    },
    Fixed { alpha: f64 },
    Analytic,
}

fn default_alpha0() -> f64 {
    0.1
}

fn default_halvings() -> u32 {
    40
}

impl From<&RuleSpec> for StepSizeRule {
    fn from(r: &RuleSpec) -> Self {
        match *r {
            RuleSpec::Armijo { alpha0, max_halvings } => StepSizeRule::armijo(alpha0, max_halvings),
            RuleSpec::Fixed { alpha } => StepSizeRule::Fixed { alpha },
            RuleSpec::Analytic => StepSizeRule::AnalyticLocal,
        }
    }
}

fn default_restarts() -> usize {
    1
}

/// A flow run as read from JSON.
///
/// `kind` is one of `U1 U2 U3 U1C U2C U3C` (full group), `U1K U2K U3K`
/// (restricted, `restriction` required), `U1P` or `U1KP` (double-bracket
/// flow on the orbit of `A`). `init`/`init_v` fix the start of restart 0;
/// two-sided kinds need both or neither.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub kind: String,
    #[serde(rename = "A")]
    pub a: MatrixRef,
    #[serde(rename = "C")]
    pub c: MatrixRef,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<MatrixRef>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restriction: Option<SubalgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<MatrixRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_v: Option<MatrixRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ParsedKind {
    Group { kind: QualityKind, restricted: bool },
    Orbit { restricted: bool },
}

fn parse_kind(s: &str) -> Result<ParsedKind> {
    let kind = |k: &str| k.parse::<QualityKind>();
    Ok(match s {
        "U1P" => ParsedKind::Orbit { restricted: false },
        "U1KP" => ParsedKind::Orbit { restricted: true },
        "U1K" | "U2K" | "U3K" => ParsedKind::Group {
            kind: kind(&s.replace('K', ""))?,
            restricted: true,
        },
        _ => ParsedKind::Group {
            kind: kind(s).map_err(|_| {
                config_err(
                    "kind",
                    format!("unknown kind {s:?}; expected U1, U2, U3, U1C, U2C, U3C, U1K, U2K, U3K, U1P or U1KP"),
                )
            })?,
            restricted: false,
        },
    })
}

#[derive(Clone, Debug)]
pub enum FlowTarget {
    Group {
        qf: QualityFunction,
        init: Option<FlowPoint>,
    },
    Orbit {
        a: CMatrix,
        c: CMatrix,
        restriction: Option<Projector>,
        init: Option<UnitaryMatrix>,
    },
}

/// A validated, runnable flow config.
#[derive(Clone, Debug)]
pub struct FlowJob {
    pub target: FlowTarget,
    pub opts: FlowOptions,
    pub restarts: usize,
    pub seed: u64,
}

/// Outcome of the best restart of a [`FlowJob`].
#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub final_f: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub best_restart: usize,
    /// `seed ⊕ best_restart`.
    pub best_restart_seed: u64,
    pub lambda: f64,
    pub constraint_residual: Option<f64>,
    pub final_u: UnitaryMatrix,
    pub final_v: Option<UnitaryMatrix>,
    /// Final orbit point for double-bracket kinds.
    pub final_x: Option<CMatrix>,
    pub trace_csv: String,
}

/// The result JSON written by the `flow` and `dbflow` commands.
#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub final_f: f64,
    pub converged: bool,
    pub stop_reason: String,
    pub iterations: usize,
    pub best_restart_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_residual: Option<f64>,
    #[serde(rename = "U")]
    pub u: MatrixFile,
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<MatrixFile>,
    #[serde(rename = "X", skip_serializing_if = "Option::is_none")]
    pub x: Option<MatrixFile>,
}

impl FlowOutcome {
    pub fn report(&self, constrained: bool) -> FlowReport {
        FlowReport {
            final_f: self.final_f,
            converged: self.converged,
            stop_reason: format!("{:?}", self.stop_reason),
            iterations: self.iterations,
            best_restart_seed: self.best_restart_seed,
            lambda: constrained.then_some(self.lambda),
            constraint_residual: self.constraint_residual,
            u: MatrixFile::from_matrix(self.final_u.matrix()),
            v: self.final_v.as_ref().map(|v| MatrixFile::from_matrix(v.matrix())),
            x: self.final_x.as_ref().map(MatrixFile::from_matrix),
        }
    }
}

impl FlowConfig {
    /// Reads a config; relative matrix paths resolve against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let cfg = read_json(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    pub fn is_orbit(&self) -> bool {
        matches!(parse_kind(&self.kind), Ok(ParsedKind::Orbit { .. }))
    }

    pub fn resolve(&self, base: &Path) -> Result<FlowJob> {
        let parsed = parse_kind(&self.kind)?;
        let a = self.a.load_field(base, "A")?;
        let c = self.c.load_field(base, "C")?;
        if !a.is_square() || a.shape() != c.shape() {
            return Err(config_err("C", format!("shape {:?} does not match A {:?}", c.shape(), a.shape())));
        }
        let n = a.nrows();

        let restricted = match parsed {
            ParsedKind::Group { restricted, .. } | ParsedKind::Orbit { restricted } => restricted,
        };
        let restriction = match (&self.restriction, restricted) {
            (Some(spec), true) => Some(
                spec.build(n, base)
                    .map_err(|e| config_err("restriction", e.to_string()))?
                    .projector(),
            ),
            (None, true) => return Err(config_err("restriction", format!("required for kind {}", self.kind))),
            (Some(_), false) => {
                return Err(config_err(
                    "restriction",
                    format!("not allowed for kind {}; use the K variant", self.kind),
                ))
            }
            (None, false) => None,
        };

        let rule = self.rule.as_ref().map(StepSizeRule::from).unwrap_or_default();
        rule.validate().map_err(|e| config_err("rule", e.to_string()))?;
        if rule == StepSizeRule::AnalyticLocal
            && !matches!(parsed, ParsedKind::Group { kind: QualityKind::U1, .. } | ParsedKind::Orbit { .. })
        {
            return Err(config_err("rule", format!("the analytic step is not available for kind {}", self.kind)));
        }
        if let Some(t) = self.grad_tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(config_err("grad_tol", format!("must be a finite number ≥ 0, got {t}")));
            }
        }
        if self.restarts == 0 {
            return Err(config_err("restarts", "must be at least 1"));
        }
        let opts = FlowOptions {
            rule,
            grad_tol: self.grad_tol,
            max_iter: self.max_iter.unwrap_or(FlowOptions::default().max_iter),
            ..FlowOptions::default()
        };

        let load_unitary = |r: &MatrixRef, field: &str| -> Result<UnitaryMatrix> {
            let m = r.load_field(base, field)?;
            if m.shape() != (n, n) {
                return Err(config_err(field, format!("expected {n}x{n}, got {:?}", m.shape())));
            }
            UnitaryMatrix::new(m).map_err(|e| config_err(field, e.to_string()))
        };

        let target = match parsed {
            ParsedKind::Orbit { .. } => {
                for (field, present) in [
                    ("D", self.d.is_some()),
                    ("E", self.e.is_some()),
                    ("lambda", self.lambda.is_some()),
                    ("init_v", self.init_v.is_some()),
                ] {
                    if present {
                        return Err(config_err(field, format!("not used by kind {}", self.kind)));
                    }
                }
                let init = self.init.as_ref().map(|r| load_unitary(r, "init")).transpose()?;
                FlowTarget::Orbit { a, c, restriction, init }
            }
            ParsedKind::Group { kind, .. } => {
                let mut qf = QualityFunction::new(kind, a, c)?;
                match (&self.d, kind) {
                    (Some(d), QualityKind::U3C) => qf = qf.with_d(d.load_field(base, "D")?)?,
                    (None, QualityKind::U3C) => return Err(config_err("D", "required for kind U3C")),
                    (Some(_), _) => return Err(config_err("D", format!("not used by kind {}", self.kind))),
                    (None, _) => {}
                }
                match (&self.e, kind) {
                    (Some(e), QualityKind::U2C) => qf = qf.with_e(e.load_field(base, "E")?)?,
                    (None, QualityKind::U2C) => return Err(config_err("E", "required for kind U2C")),
                    (Some(_), _) => return Err(config_err("E", format!("not used by kind {}", self.kind))),
                    (None, _) => {}
                }
                if let Some(l) = self.lambda {
                    if !kind.is_constrained() {
                        return Err(config_err("lambda", format!("not used by kind {}", self.kind)));
                    }
                    qf = qf.with_lambda(l).map_err(|e| config_err("lambda", e.to_string()))?;
                }
                if let Some(p) = restriction {
                    qf = qf.with_restriction(p)?;
                }
                let init = match (&self.init, &self.init_v, kind.is_two_sided()) {
                    (None, None, _) => None,
                    (Some(u), None, false) => Some(FlowPoint::single(load_unitary(u, "init")?)),
                    (Some(u), Some(v), true) => Some(FlowPoint::pair(
                        load_unitary(u, "init")?,
                        load_unitary(v, "init_v")?,
                    )),
                    (Some(_), None, true) => {
                        return Err(config_err("init_v", format!("kind {} is two-sided and needs a second initial unitary", self.kind)))
                    }
                    (None, Some(_), true) => {
                        return Err(config_err("init", "init_v is given without init"))
                    }
                    (_, Some(_), false) => {
                        return Err(config_err("init_v", format!("not used by one-sided kind {}", self.kind)))
                    }
                };
                FlowTarget::Group { qf, init }
            }
        };
        Ok(FlowJob { target, opts, restarts: self.restarts, seed: self.seed })
    }
}

impl FlowJob {
    pub fn is_constrained(&self) -> bool {
        matches!(&self.target, FlowTarget::Group { qf, .. } if qf.kind().is_constrained())
    }

    /// Runs all restarts; restart 0 uses the configured initial point if any.
    pub fn run(&self) -> Result<FlowOutcome> {
        match &self.target {
            FlowTarget::Group { qf, init } => {
                let summary = run_restarts_with(qf, &self.opts, self.restarts, self.seed, |i, rng| {
                    match (i, init) {
                        (0, Some(p)) => Ok(p.clone()),
                        _ => random_start(qf, rng),
                    }
                })?;
                let best = summary.best();
                Ok(FlowOutcome {
                    final_f: best.value,
                    converged: best.converged,
                    stop_reason: best.stop_reason,
                    iterations: best.iterations,
                    best_restart: summary.best_index,
                    best_restart_seed: self.seed ^ summary.best_index as u64,
                    lambda: best.lambda,
                    constraint_residual: best.constraint_residual,
                    final_u: best.point.u.clone(),
                    final_v: best.point.v.clone(),
                    final_x: None,
                    trace_csv: best.trace.to_csv(false),
                })
            }
            FlowTarget::Orbit { a, c, restriction, init } => {
                let runs = run_double_bracket_restarts_with(
                    a,
                    c,
                    &self.opts,
                    restriction.as_ref(),
                    self.restarts,
                    self.seed,
                    |i, rng| match (i, init, restriction) {
                        (0, Some(u), _) => Ok(u.clone()),
                        (_, _, Some(p)) => p.basis().random_group_element(rng),
                        (_, _, None) => haar_unitary(a.nrows(), rng),
                    },
                )?;
                let best_index = best_of(runs.iter().map(|r| r.value));
                let best = &runs[best_index];
                Ok(FlowOutcome {
                    final_f: best.value,
                    converged: best.converged,
                    stop_reason: best.stop_reason,
                    iterations: best.iterations,
                    best_restart: best_index,
                    best_restart_seed: self.seed ^ best_index as u64,
                    lambda: best.lambda,
                    constraint_residual: None,
                    final_u: best.point.accumulated().clone(),
                    final_v: None,
                    final_x: Some(best.point.x().clone()),
                    trace_csv: best.trace.to_csv(true),
                })
            }
        }
    }
}

/// Generators for a Lie closure: a JSON array of matrices (or paths), or
/// `{"generators":[…]}`. Hermitian entries `H` are taken as `iH`;
/// skew-Hermitian entries as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorFile {
    List(Vec<MatrixRef>),
    Object { generators: Vec<MatrixRef> },
}

impl GeneratorFile {
    pub fn load(path: &Path) -> Result<Vec<AlgebraElement>> {
        let file: GeneratorFile = read_json(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let refs = match file {
            GeneratorFile::List(v) | GeneratorFile::Object { generators: v } => v,
        };
        if refs.is_empty() {
            return Err(config_err("generators", "the generator list is empty"));
        }
        refs.iter()
            .enumerate()
            .map(|(i, r)| {
                let field = format!("generators[{i}]");
                let m = r.load_field(&base, &field)?;
                as_algebra_element(m).map_err(|e| config_err(&field, e.to_string()))
            })
            .collect()
    }
}

/// `M` if skew-Hermitian, `iM` if Hermitian.
pub fn as_algebra_element(m: CMatrix) -> Result<AlgebraElement> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("generator must be square, got {:?}", m.shape())));
    }
    let scale = m.norm().max(1.0);
    if (&m + m.adjoint()).norm() <= 1e-12 * scale {
        AlgebraElement::new(m)
    } else if (&m - m.adjoint()).norm() <= 1e-12 * scale {
        AlgebraElement::from_hermitian(&m)
    } else {
        Err(Error::Contract("generator is neither Hermitian nor skew-Hermitian".into()))
    }
}
