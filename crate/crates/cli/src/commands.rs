use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use uflow::apps::{
    best_rank1, build_hamiltonian, entanglement_sweep, joint_reversibility,
    pointwise_reversibility, s_grid, sweep_csv, Family, HamiltonianSpec, Rank1Options,
    Rank1Result, ReversibilityOptions, Tensor, TensorFile,
};
use uflow::io::{read_json, write_json, FlowConfig, GeneratorFile, MatrixFile};
use uflow::liealg::lie_closure;
use uflow::matcore::CVector;
use uflow::{Error, Result};
use uflow_oracles::{hopm, HopmInit};

use crate::{Command, FlowArgs, Mode, Status};

/// Iterations of each power-method run behind `rank1 --oracle`.
const HOPM_ITERS: usize = 500;

pub(crate) fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Integrity(_) | Error::Numerical(_) => 3,
        _ => 1,
    }
}

pub(crate) fn dispatch(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Flow(args) => flow(&args, false),
        Command::Dbflow(args) => flow(&args, true),
        Command::Sweep { family, s_min, s_max, steps, restarts, seed, out } => {
            let family: Family = family.parse()?;
            let grid = s_grid(s_min, s_max, steps)?;
            let opts = Rank1Options { restarts, seed, ..Rank1Options::default() };
            let rows = entanglement_sweep(family, &grid, &opts)?;
            emit_text(out.as_deref(), &sweep_csv(&rows))?;
            Ok(status(rows.iter().all(|r| r.converged)))
        }
        Command::Reversibility { spec, mode, tau, restarts, seed, out } => {
            reversibility(&spec, mode, tau, restarts, seed, out.as_deref())
        }
        Command::Rank1 { tensor, restarts, seed, oracle, out } => {
            rank1(&tensor, restarts, seed, oracle, out.as_deref())
        }
        Command::Controllability { generators, out } => {
            let gens = GeneratorFile::load(&generators)?;
            let report = lie_closure(&gens)?;
            let n = gens[0].dim();
            emit_json(
                out.as_deref(),
                &ControllabilityJson {
                    dimension: report.dimension,
                    full: report.controllable,
                    target_dimension: n * n - 1,
                },
            )?;
            Ok(Status::Ok)
        }
    }
}

fn status(converged: bool) -> Status {
    if converged {
        Status::Ok
    } else {
        Status::NotConverged
    }
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => write_json(p, value),
        None => {
            let mut text = serde_json::to_string_pretty(value)?;
            text.push('\n');
            emit_text(None, &text)
        }
    }
}

fn flow(args: &FlowArgs, orbit: bool) -> Result<Status> {
    let (cfg, base) = FlowConfig::load(&args.config)?;
    if cfg.is_orbit() != orbit {
        let want = if orbit { "U1P or U1KP" } else { "a group kind (not U1P/U1KP)" };
        return Err(Error::Config {
            field: "kind".into(),
            message: format!("this command expects {want}, got {}", cfg.kind),
        });
    }
    let job = cfg.resolve(&base)?;
    let outcome = job.run()?;
    if let Some(p) = &args.trace {
        fs::write(p, &outcome.trace_csv)?;
    }
    emit_json(args.out.as_deref(), &outcome.report(job.is_constrained()))?;
    Ok(status(outcome.converged))
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct VectorJson {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<&CVector> for VectorJson {
    fn from(v: &CVector) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Serialize)]
struct Rank1Json {
    coefficient: ComplexJson,
    factors: Vec<VectorJson>,
    overlap: f64,
    residual_sq: f64,
    converged: bool,
    restarts_used: usize,
}

impl From<&Rank1Result> for Rank1Json {
    fn from(r: &Rank1Result) -> Self {
        Self {
            coefficient: ComplexJson { re: r.coefficient.re, im: r.coefficient.im },
            factors: r.factors.iter().map(VectorJson::from).collect(),
            overlap: r.overlap,
            residual_sq: r.residual_sq,
            converged: r.converged,
            restarts_used: r.restarts_used,
        }
    }
}

#[derive(Serialize)]
struct HopmJson {
    coefficient: ComplexJson,
    factors: Vec<VectorJson>,
    overlap: f64,
    residual_sq: f64,
    runs: usize,
}

#[derive(Serialize)]
struct Rank1WithOracle {
    flow: Rank1Json,
    hopm: HopmJson,
    /// `|overlap_flow − overlap_hopm|`.
    difference: f64,
}

fn rank1(path: &Path, restarts: usize, seed: u64, oracle: bool, out: Option<&Path>) -> Result<Status> {
    let file: TensorFile = read_json(path)?;
    let t = Tensor::from_file(&file)?;
    let r = best_rank1(&t, &Rank1Options { restarts, seed, ..Rank1Options::default() })?;
    let flow = Rank1Json::from(&r);
    if !oracle {
        emit_json(out, &flow)?;
        return Ok(status(r.converged));
    }
    // SVD start plus `restarts − 1` random starts; keep the best.
    let inits = std::iter::once(HopmInit::Svd)
        .chain((1..restarts.max(1)).map(|i| HopmInit::Random(seed ^ i as u64)));
    let mut best: Option<uflow_oracles::Rank1> = None;
    let mut runs = 0;
    for init in inits {
        let h = hopm(t.dims(), t.entries(), HOPM_ITERS, init)
            .map_err(|e| Error::InvalidArgument(format!("hopm: {e}")))?;
        runs += 1;
        if best.as_ref().is_none_or(|b| h.overlap > b.overlap) {
            best = Some(h);
        }
    }
    let h = best.expect("at least one power-method run");
    let report = Rank1WithOracle {
        difference: (r.overlap - h.overlap).abs(),
        hopm: HopmJson {
            coefficient: ComplexJson { re: h.coefficient.re, im: h.coefficient.im },
            factors: h.factors.iter().map(VectorJson::from).collect(),
            overlap: h.overlap,
            residual_sq: h.residual_sq,
            runs,
        },
        flow,
    };
    emit_json(out, &report)?;
    Ok(status(r.converged))
}

#[derive(Serialize)]
struct ControllabilityJson {
    dimension: usize,
    full: bool,
    /// `N² − 1`.
    target_dimension: usize,
}

#[derive(Serialize)]
struct JointJson {
    mode: &'static str,
    min_value: f64,
    reversible: bool,
    converged: bool,
    #[serde(rename = "K")]
    k: MatrixFile,
}

#[derive(Serialize)]
struct PointwiseJson {
    mode: &'static str,
    tau: f64,
    min_value: f64,
    reversible: bool,
    converged: bool,
    #[serde(rename = "K1")]
    k1: MatrixFile,
    #[serde(rename = "K2")]
    k2: MatrixFile,
}

fn reversibility(
    path: &Path,
    mode: Mode,
    tau: Option<f64>,
    restarts: usize,
    seed: u64,
    out: Option<&Path>,
) -> Result<Status> {
    let spec: HamiltonianSpec = read_json(path)?;
    let h = build_hamiltonian(&spec)?;
    let opts = ReversibilityOptions { restarts, seed, ..ReversibilityOptions::default() };
    match mode {
        Mode::Joint => {
            if tau.is_some() {
                return Err(Error::InvalidArgument("--tau applies to the pointwise mode only".into()));
            }
            let r = joint_reversibility(&h, &opts)?;
            emit_json(
                out,
                &JointJson {
                    mode: "joint",
                    min_value: r.min_value,
                    reversible: r.reversible,
                    converged: r.converged,
                    k: MatrixFile::from_matrix(r.k.matrix()),
                },
            )?;
            Ok(status(r.converged))
        }
        Mode::Pointwise => {
            let tau = tau.ok_or_else(|| Error::InvalidArgument("the pointwise mode needs --tau".into()))?;
            let r = pointwise_reversibility(&h, tau, &opts)?;
            emit_json(
                out,
                &PointwiseJson {
                    mode: "pointwise",
                    tau,
                    min_value: r.min_value,
                    reversible: r.reversible,
                    converged: r.converged,
                    k1: MatrixFile::from_matrix(r.k1.matrix()),
                    k2: MatrixFile::from_matrix(r.k2.matrix()),
                },
            )?;
            Ok(status(r.converged))
        }
    }
}
