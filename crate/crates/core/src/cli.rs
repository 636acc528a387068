//! Command-line front end: `phantom`, `solve`, `analyze`, `sweep`, `compare`.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::certificate::{verify_fixed_point, CertificateReport};
use crate::analysis::observed::noise_floor;
use crate::analysis::rate::{rate_report, RateReport};
use crate::analysis::trajectory::distance_trajectory;
use crate::error::{Error, Result};
use crate::grid::GridShape;
use crate::problems::bundle::{default_data_dir, sha256_hex, ProblemBundle, SolutionBundle};
use crate::problems::mask::sample_mask;
use crate::problems::phantom::{shepp_logan, staircase};
use crate::prox::{ConstraintSet, ProxParams};
use crate::real::{Precision, Real};
use crate::solvers::{
    initial_state, run_with, translate_state, LogWriter, Method, SolverConfig, SolverState, StopReason, DEFAULT_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tvcs", version, about = "TV compressed sensing from partial Fourier data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a phantom, sample a mask and save the problem bundle.
    Phantom(PhantomArgs),
    /// Run a solver on a problem bundle.
    Solve(SolveArgs),
    /// Rate and fixed-point certificate reports for a converged solution.
    Analyze(AnalyzeArgs),
    /// Batch runs over a grid of step sizes, relaxations, regularizations
    /// and precisions.
    Sweep(SweepArgs),
    /// Run all three methods from equivalent states and compare them.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Grid such as 64x64 or 32x32x32; one axis gives a 1D staircase.
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value_t = 0.3)]
    pub fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sample frequencies without enforcing Omega = -Omega.
    #[arg(long)]
    pub asymmetric: bool,
    /// Jumps of the 1D staircase.
    #[arg(long, default_value_t = 6)]
    pub jumps: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value = "problem")]
    pub name: String,
}

#[derive(Debug, Clone, Args)]
pub struct StepArgs {
    /// ADMM/PDHG step; tau = 1 / gamma.
    #[arg(long, conflicts_with = "tau")]
    pub gamma: Option<f64>,
    /// DRS step size.
    #[arg(long)]
    pub tau: Option<f64>,
}

impl StepArgs {
    fn tau(&self) -> Result<f64> {
        match (self.gamma, self.tau) {
            (Some(g), None) if g > 0.0 && g.is_finite() => Ok(1.0 / g),
            (Some(g), None) => Err(Error::InvalidParameter(format!("gamma = {g} must be positive"))),
            (None, Some(t)) => Ok(t),
            (None, None) => Err(Error::InvalidParameter("give --gamma or --tau".into())),
            (Some(_), Some(_)) => Err(Error::InvalidParameter("--gamma and --tau are exclusive".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, required_unless_present = "replay")]
    pub problem: Option<PathBuf>,
    #[arg(long, default_value = "drs")]
    pub method: Method,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value = "f64")]
    pub precision: Precision,
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub log_every: usize,
    /// Start from a saved solution, translated to `--method`.
    #[arg(long)]
    pub init_from: Option<PathBuf>,
    /// Re-run the solve recorded in a manifest and check its artifacts.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible runs.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Overrides the step recorded in the solution.
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Iterations of the rerun that measures the observed rate; 0 skips it.
    #[arg(long, default_value_t = 3000)]
    pub trajectory_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub cert_tol: f64,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, default_value = "drs")]
    pub method: Method,
    /// Comma-separated step sizes tau.
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Comma-separated gammas (tau = 1 / gamma), added to `--taus`.
    #[arg(long, value_delimiter = ',')]
    pub gammas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub lambdas: Vec<f64>,
    /// Regularization values; `none` for the plain problem.
    #[arg(long, value_delimiter = ',', default_value = "none")]
    pub alphas: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "f64")]
    pub precisions: Vec<Precision>,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Iteration cap of the f64 reference run per point.
    #[arg(long, default_value_t = 20_000)]
    pub reference_iters: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[command(flatten)]
    pub step: StepArgs,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Everything needed to repeat a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub seconds: f64,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
}

impl Artifact {
    fn of(role: &str, path: &Path) -> Result<Self> {
        Ok(Self {
            role: role.into(),
            path: path.to_path_buf(),
            sha256: file_hash(role, path)?,
        })
    }
}

/// Hash of an artifact. Logs are hashed without their wall-time column,
/// which is the only part of a run that legitimately varies.
fn file_hash(role: &str, path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    if role == "log" {
        let text = String::from_utf8_lossy(&bytes);
        let stripped: String = text
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(sha256_hex(stripped.as_bytes()));
    }
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

fn out_dir(given: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = given.clone().unwrap_or_else(default_data_dir);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

/// Maps an error onto the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

/// Parses `std::env::args` and runs the command.
pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Phantom(a) => cmd_phantom(&a).map(|_| ()),
        Command::Solve(a) => cmd_solve(&a).map(|_| ()),
        Command::Analyze(a) => cmd_analyze(&a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(&a).map(|_| ()),
        Command::Compare(a) => cmd_compare(&a).map(|_| ()),
    }
}

/// Writes `<name>.problem.tvcs` and returns its path.
pub fn cmd_phantom(a: &PhantomArgs) -> Result<PathBuf> {
    let start = Instant::now();
    let shape = GridShape::parse(&a.shape)?;
    let phantom = match shape.ndim() {
        1 => staircase(shape.len(), a.jumps, a.seed)?,
        _ => shepp_logan(&shape)?,
    };
    let mask = sample_mask(&shape, a.fraction, a.seed, !a.asymmetric)?.measure(&phantom.image)?;
    let support = crate::analysis::support::detect_support(&crate::spectral::gradient(&phantom.image), 1e-8)?;
    log::info!(
        "m = {}, |S| log N = {:.1}",
        mask.len(),
        support.support_count() as f64 * (shape.len() as f64).ln()
    );
    let dir = out_dir(&a.out_dir)?;
    let path = dir.join(format!("{}.problem.tvcs", a.name));
    ProblemBundle::new(mask, Some(phantom))?.save(&path)?;
    let manifest = RunManifest {
        command: "phantom".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: serde_json::json!({
            "shape": shape, "fraction": a.fraction, "symmetric": !a.asymmetric, "jumps": a.jumps,
        }),
        seeds: vec![a.seed],
        inputs: vec![],
        outputs: vec![Artifact::of("problem", &path)?],
        seconds: start.elapsed().as_secs_f64(),
        threads: 1,
    };
    manifest.write(&dir.join(format!("{}.phantom.manifest.json", a.name)))?;
    println!("{}", path.display());
    Ok(path)
}

/// Paths written by a solve.
#[derive(Debug, Clone)]
pub struct SolveOutputs {
    pub solution: PathBuf,
    pub log: PathBuf,
    pub manifest: PathBuf,
}

fn solve_config(a: &SolveArgs) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::new(a.method, a.step.tau()?, a.iters)?;
    cfg.params = ProxParams::new(cfg.tau(), a.lambda, a.alpha)?;
    cfg.tol = a.tol;
    cfg.precision = a.precision;
    cfg.log_every = a.log_every;
    cfg.validate()?;
    Ok(cfg)
}

fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn cmd_solve(a: &SolveArgs) -> Result<SolveOutputs> {
    if let Some(manifest) = &a.replay {
        return replay(manifest, a.out_dir.as_deref());
    }
    let problem_path = a.problem.clone().ok_or_else(|| Error::InvalidParameter("--problem is required".into()))?;
    let cfg = solve_config(a)?;
    let dir = out_dir(&a.out_dir)?;
    with_threads(a.threads, || solve_into(&problem_path, a.init_from.as_deref(), &cfg, &dir, a.threads))?
}

fn solve_into(
    problem_path: &Path,
    init_from: Option<&Path>,
    cfg: &SolverConfig,
    dir: &Path,
    threads: usize,
) -> Result<SolveOutputs> {
    match cfg.precision {
        Precision::F64 => solve_typed::<f64>(problem_path, init_from, cfg, dir, threads),
        Precision::F32 => solve_typed::<f32>(problem_path, init_from, cfg, dir, threads),
    }
}

fn solve_typed<T: Real>(
    problem_path: &Path,
    init_from: Option<&Path>,
    cfg: &SolverConfig,
    dir: &Path,
    threads: usize,
) -> Result<SolveOutputs> {
    let start = Instant::now();
    let problem = ProblemBundle::load(problem_path)?;
    let set = ConstraintSet::<T>::new(&problem.mask);
    let mut inputs = vec![Artifact::of("problem", problem_path)?];
    let init = match init_from {
        Some(p) => {
            let (sol, narrowing) = SolutionBundle::<T>::load(p)?;
            if narrowing.max_error > 0.0 {
                log::info!("initial state narrowed with max error {:e}", narrowing.max_error);
            }
            inputs.push(Artifact::of("init", p)?);
            translate_state(&sol.state, cfg.method, cfg.tau(), &set)?
        }
        None => initial_state(cfg.method, &set.zero_filled()?),
    };
    let reference = problem.phantom.as_ref().map(|p| &p.image);
    let stem = format!("{}-{}", cfg.method, cfg.precision);
    let log_path = dir.join(format!("{stem}.log.csv"));
    let mut writer = LogWriter::create(&log_path)?;
    let out = run_with(&set, init, reference, cfg, |_, _| Ok(()), Some(&mut writer))?;
    let solution_path = dir.join(format!("{stem}.solution.tvcs"));
    SolutionBundle {
        config: cfg.clone(),
        state: out.state,
        stop: out.stop,
        problem_sha256: Some(inputs[0].sha256.clone()),
    }
    .save(&solution_path)?;
    if let Some(last) = out.log.last() {
        println!(
            "{} {} iterations ({:?}), rel_err {}, residual {:e}",
            cfg.method,
            last.iter,
            out.stop,
            last.rel_err.map_or("n/a".into(), |e| format!("{e:e}")),
            last.residual
        );
    }
    let manifest = RunManifest {
        command: "solve".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: serde_json::to_value(cfg)?,
        seeds: vec![problem.mask.seed()],
        inputs,
        outputs: vec![Artifact::of("log", &log_path)?, Artifact::of("solution", &solution_path)?],
        seconds: start.elapsed().as_secs_f64(),
        threads,
    };
    let manifest_path = dir.join(format!("{stem}.manifest.json"));
    manifest.write(&manifest_path)?;
    Ok(SolveOutputs {
        solution: solution_path,
        log: log_path,
        manifest: manifest_path,
    })
}

/// Re-runs a recorded solve into `out` (a fresh directory next to the
/// manifest by default) and checks that every output hash matches.
fn replay(manifest_path: &Path, out: Option<&Path>) -> Result<SolveOutputs> {
    let m = RunManifest::read(manifest_path)?;
    if m.command != "solve" {
        return Err(Error::InvalidParameter(format!("cannot replay a `{}` manifest", m.command)));
    }
    let cfg: SolverConfig = serde_json::from_value(m.config.clone())?;
    let find = |role: &str| m.inputs.iter().find(|a| a.role == role);
    let problem = find("problem").ok_or_else(|| Error::Format("manifest lists no problem".into()))?;
    for input in &m.inputs {
        if file_hash(&input.role, &input.path)? != input.sha256 {
            return Err(Error::Checksum(format!("input {} changed since the run", input.path.display())));
        }
    }
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => manifest_path.parent().unwrap_or(Path::new(".")).join("replay"),
    };
    std::fs::create_dir_all(&dir)?;
    let outputs = with_threads(m.threads, || {
        solve_into(&problem.path, find("init").map(|a| a.path.as_path()), &cfg, &dir, m.threads)
    })??;
    let fresh = RunManifest::read(&outputs.manifest)?;
    for (old, new) in m.outputs.iter().zip(&fresh.outputs) {
        if old.sha256 != new.sha256 {
            return Err(Error::Checksum(format!(
                "replayed {} differs from the recorded one ({} vs {})",
                old.role, new.sha256, old.sha256
            )));
        }
    }
    println!("replay reproduced {} artifacts", fresh.outputs.len());
    Ok(outputs)
}

/// Reports written by `analyze`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyzeOutputs {
    pub rate: RateReport,
    pub certificate: CertificateReport,
}

pub fn cmd_analyze(a: &AnalyzeArgs) -> Result<AnalyzeOutputs> {
    let problem = ProblemBundle::load(&a.problem)?;
    let (sol, _) = SolutionBundle::<f64>::load(&a.solution)?;
    let tau = match (a.step.gamma, a.step.tau) {
        (None, None) => sol.config.tau(),
        _ => a.step.tau()?,
    };
    if sol.stop != StopReason::Converged {
        log::warn!("solution stopped at the iteration cap; the reports assume a fixed point");
    }
    let set = ConstraintSet::<f64>::new(&problem.mask);
    // Map to the DRS state at the analysis step size.
    let q = sol.state.q_equivalent(sol.config.tau());
    let v = sol.state.split_field(sol.config.tau());
    let certificate = verify_fixed_point(&q, &v, tau, &set, a.cert_tol)?;
    let distances = if a.trajectory_iters > 0 {
        let mut cfg = SolverConfig::new(Method::Drs, tau, a.trajectory_iters)?;
        cfg.params.lambda = a.lambda;
        cfg.validate()?;
        Some(distance_trajectory::<f64>(&problem.mask, &cfg, &q)?.0)
    } else {
        None
    };
    let floor = noise_floor(q.norm(), 1.0);
    let rate = rate_report(&problem.mask, &v, tau, a.lambda, distances.as_deref().map(|d| (d, floor)))?;
    let dir = out_dir(&a.out_dir)?;
    write_json(&dir.join("rate_report.json"), &rate)?;
    write_json(&dir.join("certificate.json"), &certificate)?;
    println!(
        "cos theta_1 {:.6}, bound {:.6}, observed {}, onset {}, {:?} fixed point",
        rate.cos_theta1,
        rate.bound,
        rate.observed_rate.map_or("n/a".into(), |r| format!("{r:.6}")),
        rate.onset_k.map_or("n/a".into(), |k| k.to_string()),
        certificate.kind
    );
    for w in &rate.warnings {
        eprintln!("warning: {w}");
    }
    Ok(AnalyzeOutputs { rate, certificate })
}

/// One row of the sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub precision: Precision,
    pub status: String,
    pub observed_rate: Option<f64>,
    pub onset_k: Option<usize>,
    pub final_distance: Option<f64>,
    pub rel_err: Option<f64>,
    pub seconds: f64,
}

pub const SWEEP_HEADER: &str = "tau,lambda,alpha,precision,status,observed_rate,onset_k,final_distance,rel_err,seconds";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:e}"));
        format!(
            "{:e},{},{},{},{},{},{},{},{},{:.3}",
            self.tau,
            self.lambda,
            opt(self.alpha),
            self.precision,
            self.status.replace(',', ";"),
            opt(self.observed_rate),
            self.onset_k.map_or(String::new(), |k| k.to_string()),
            opt(self.final_distance),
            opt(self.rel_err),
            self.seconds
        )
    }
}

fn parse_alpha(s: &str) -> Result<Option<f64>> {
    match s.trim() {
        "none" | "" => Ok(None),
        t => t
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("bad alpha `{t}`"))),
    }
}

/// Observed rate of one parameter point: an f64 reference run to
/// convergence, then a fixed-length run in the requested precision.
pub fn sweep_point(
    problem: &ProblemBundle,
    cfg: &SolverConfig,
    reference_iters: usize,
    log_path: &Path,
) -> Result<SweepRow> {
    let start = Instant::now();
    let mut ref_cfg = cfg.clone();
    ref_cfg.max_iters = reference_iters;
    ref_cfg.tol = 1e-15;
    ref_cfg.precision = Precision::F64;
    let reference = crate::analysis::trajectory::reference_solution(&problem.mask, &ref_cfg)?;
    let (distances, final_state_err, scale) = match cfg.precision {
        Precision::F64 => {
            let (d, s) = distance_trajectory::<f64>(&problem.mask, cfg, &reference.q)?;
            (d, rel_err(problem, &s), f64::TOLERANCE_SCALE)
        }
        Precision::F32 => {
            let (d, s) = distance_trajectory::<f32>(&problem.mask, cfg, &reference.q)?;
            (d, rel_err(problem, &s), f32::TOLERANCE_SCALE)
        }
    };
    let mut csv = String::from("iter,q_dist\n");
    for (k, d) in distances.iter().enumerate() {
        csv.push_str(&format!("{k},{d:e}\n"));
    }
    std::fs::write(log_path, csv)?;
    let fit = crate::analysis::observed::observed_rate(&distances, noise_floor(reference.q.norm(), scale));
    let (status, rate, onset) = match fit {
        Ok(f) => ("ok".to_string(), Some(f.rate), Some(f.onset)),
        Err(e) => (format!("no-rate: {e}"), None, None),
    };
    Ok(SweepRow {
        tau: cfg.tau(),
        lambda: cfg.params.lambda,
        alpha: cfg.params.alpha,
        precision: cfg.precision,
        status,
        observed_rate: rate,
        onset_k: onset,
        final_distance: distances.last().copied(),
        rel_err: final_state_err,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn rel_err<T: Real>(problem: &ProblemBundle, s: &SolverState<T>) -> Option<f64> {
    problem
        .phantom
        .as_ref()
        .map(|p| s.primal().cast::<f64>().relative_error(&p.image))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Vec<SweepRow>> {
    let mut taus = a.taus.clone();
    for &g in &a.gammas {
        if !(g > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {g} must be positive")));
        }
        taus.push(1.0 / g);
    }
    let alphas = a.alphas.iter().map(|s| parse_alpha(s)).collect::<Result<Vec<_>>>()?;
    let mut grid = Vec::new();
    for &tau in &taus {
        for &lambda in &a.lambdas {
            for &alpha in &alphas {
                for &precision in &a.precisions {
                    let mut cfg = SolverConfig::new(a.method, tau, a.iters)?;
                    cfg.params = ProxParams::new(tau, lambda, alpha)?;
                    cfg.precision = precision;
                    cfg.validate()?;
                    grid.push(cfg);
                }
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("the sweep grid is empty (give --taus or --gammas)".into()));
    }
    let problem = ProblemBundle::load(&a.problem)?;
    let dir = out_dir(&a.out_dir)?;
    let rows: Vec<SweepRow> = grid
        .par_iter()
        .enumerate()
        .map(|(i, cfg)| {
            let log_path = dir.join(format!("point-{i:03}.log.csv"));
            sweep_point(&problem, cfg, a.reference_iters, &log_path).unwrap_or_else(|e| SweepRow {
                tau: cfg.tau(),
                lambda: cfg.params.lambda,
                alpha: cfg.params.alpha,
                precision: cfg.precision,
                status: format!("failed: {e}"),
                observed_rate: None,
                onset_k: None,
                final_distance: None,
                rel_err: None,
                seconds: 0.0,
            })
        })
        .collect();
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    std::fs::write(dir.join("sweep.csv"), &csv)?;
    print!("{csv}");
    let failed = rows.iter().filter(|r| r.status.starts_with("failed")).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} sweep points failed", rows.len());
    }
    Ok(rows)
}

/// Largest relative mismatch of the three variable relations between
/// methods, per iteration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareReport {
    pub iterations: usize,
    pub tau: f64,
    pub max_q_mismatch: f64,
    pub max_primal_mismatch: f64,
    pub max_split_mismatch: f64,
    pub final_rel_err: Vec<(Method, Option<f64>)>,
}

/// Relative to `scale`, or absolute when `scale < 1`; large steps shrink
/// `v` to nearly zero.
fn rel(a: f64, scale: f64) -> f64 {
    a / scale.max(1.0)
}

/// Runs ADMM, DRS and PDHG from equivalent initial states and tracks the
/// largest disagreement in `q`, `K u` and `v` along the way.
pub fn compare_methods(problem: &ProblemBundle, tau: f64, iters: usize) -> Result<CompareReport> {
    let set = ConstraintSet::<f64>::new(&problem.mask);
    let base = initial_state(Method::Drs, &set.zero_filled()?);
    let params = ProxParams::with_tau(tau)?;
    let mut states: Vec<SolverState<f64>> = Method::ALL
        .iter()
        .map(|&m| translate_state(&base, m, tau, &set))
        .collect::<Result<_>>()?;
    let (mut mq, mut mp, mut mv) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..iters {
        for s in states.iter_mut() {
            *s = s.step(&set, &params)?;
        }
        let qs: Vec<_> = states.iter().map(|s| s.q_equivalent(tau)).collect();
        let vs: Vec<_> = states.iter().map(|s| s.split_field(tau)).collect();
        let us: Vec<_> = states.iter().map(|s| crate::spectral::gradient(s.primal())).collect();
        for i in 1..3 {
            mq = mq.max(rel(qs[i].distance(&qs[0]), qs[0].norm()));
            mv = mv.max(rel(vs[i].distance(&vs[0]), vs[0].norm()));
            mp = mp.max(rel(us[i].distance(&us[0]), us[0].norm()));
        }
    }
    Ok(CompareReport {
        iterations: iters,
        tau,
        max_q_mismatch: mq,
        max_primal_mismatch: mp,
        max_split_mismatch: mv,
        final_rel_err: states
            .iter()
            .map(|s| (s.method(), problem.phantom.as_ref().map(|p| s.primal().relative_error(&p.image))))
            .collect(),
    })
}

pub fn cmd_compare(a: &CompareArgs) -> Result<CompareReport> {
    let problem = ProblemBundle::load(&a.problem)?;
    let report = compare_methods(&problem, a.step.tau()?, a.iters)?;
    let dir = out_dir(&a.out_dir)?;
    write_json(&dir.join("compare.json"), &report)?;
    println!(
        "max relative mismatch over {} iterations: q {:e}, K u {:e}, v {:e}",
        report.iterations, report.max_q_mismatch, report.max_primal_mismatch, report.max_split_mismatch
    );
    Ok(report)
}
