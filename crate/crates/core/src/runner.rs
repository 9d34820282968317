//! Running configured problems and the builtin suite, and writing traces and
//! summaries.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use thiserror::Error;

use crate::config::RunConfig;
use crate::diagnostics::{estimate_rate, KktReport, RateEstimate};
use crate::methods::{extract_kkt, Method, MethodError, MovingBalls, MovingBallsConfig, PenaltyConfig, PenaltyKind, PenaltyMethod};
use crate::mmp::{run_mmp, GradientProjection, MmpError, ModelOracle, RunResult, RunStatus, TraceRecord};
use crate::problem::NlpProblem;
use crate::problems::builtins;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "MMP_NLP_OUT";
pub const DEFAULT_OUT_DIR: &str = "mmp-nlp-out";

pub const TRACE_HEADER: &str = "k,merit,f,F,step_norm,beta,max_constraint_violation,subproblem_iters,kkt_stationarity";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Method(#[from] MethodError),
    #[error(transparent)]
    Mmp(#[from] MmpError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub fn exit_code(status: RunStatus) -> i32 {
    match status {
        RunStatus::Converged => 0,
        RunStatus::Diverged => 2,
        RunStatus::MaxIters => 3,
        RunStatus::SubproblemFailure => 4,
    }
}

/// Builds the method's oracle, checking parameter compatibility.
pub fn build_oracle(cfg: &RunConfig, problem: &NlpProblem) -> Result<Box<dyn ModelOracle>, RunError> {
    let problem = problem.clone();
    let oracle: Box<dyn ModelOracle> = match cfg.method {
        Method::MovingBalls => {
            let mut mc = MovingBallsConfig::new(problem)?;
            if let Some(l) = cfg.lambda {
                if !(l >= mc.l) {
                    return Err(MethodError::Config(format!("lambda = {l} is below L = {}", mc.l)).into());
                }
                mc.l = l;
            }
            mc.inner = cfg.inner.clone();
            mc.stop = cfg.stop.clone();
            if let Some(t) = cfg.feas_tol {
                mc.feas_tol = t;
            }
            Box::new(MovingBalls::new(mc))
        }
        Method::Esqm | Method::Sl1qp => {
            let kind = if cfg.method == Method::Esqm { PenaltyKind::Esqm } else { PenaltyKind::Sl1qp };
            let mut pc = PenaltyConfig::new(problem, kind);
            pc.beta0 = cfg.beta0;
            pc.delta = cfg.delta;
            if let Some(l) = cfg.lambda {
                pc.set_lambda(l)?;
            }
            if let Some(l) = cfg.lambda_prime {
                pc.set_lambda_prime(l)?;
            }
            pc.inner = cfg.inner.clone();
            pc.stop = cfg.stop.clone();
            if let Some(t) = cfg.feas_tol {
                pc.feas_tol = t;
            }
            Box::new(PenaltyMethod::new(pc)?)
        }
        Method::GradProj => {
            let gp = match cfg.lambda {
                Some(l) => GradientProjection::with_lipschitz(l, problem),
                None => GradientProjection::new(problem),
            };
            Box::new(gp.map_err(|e| MethodError::Config(e.to_string()))?)
        }
    };
    Ok(oracle)
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub result: RunResult,
    pub kkt: KktReport,
    pub rate: Option<RateEstimate>,
    /// Penalty value at the end of the run (zero without a penalty).
    pub final_beta: f64,
    /// Objective at the final point.
    pub f_final: f64,
}

/// Runs `cfg` on `problem` without touching the file system.
pub fn execute(cfg: &RunConfig, problem: &NlpProblem) -> Result<RunOutcome, RunError> {
    let mut oracle = build_oracle(cfg, problem)?;
    let result = run_mmp(oracle.as_mut(), &cfg.x0, &cfg.stop, &mut [])?;
    let x = &result.final_state.x;
    let kkt = match &result.last_solution {
        Some(sol) => extract_kkt(problem, x, sol, cfg.method),
        None => crate::diagnostics::kkt_residual(problem, x, &vec![0.0; problem.num_constraints()]),
    };
    let rate = match result.status {
        RunStatus::Converged => estimate_rate(&result.iterates, x).ok(),
        _ => None,
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        final_beta: oracle.penalty(),
        f_final: problem.objective.value(x),
        result,
        kkt,
        rate,
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn vec_text(v: &[f64]) -> String {
    v.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

/// CSV text of the trace rows, header included.
pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut s = String::with_capacity(64 * (trace.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in trace {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            num(r.merit),
            num(r.f),
            num(r.value),
            num(r.step_norm),
            num(r.beta),
            num(r.max_constraint_violation),
            r.subproblem_iters,
            num(r.kkt_stationarity)
        );
    }
    s
}

/// Human-readable `key = value` summary of a run.
pub fn summary_text(outcome: &RunOutcome) -> String {
    let r = &outcome.result;
    let c = &outcome.config;
    let mut s = String::new();
    let _ = writeln!(s, "name = {}", c.name);
    let _ = writeln!(s, "method = {}", c.method);
    let _ = writeln!(s, "status = {:?}", r.status);
    let _ = writeln!(s, "exit_code = {}", exit_code(r.status));
    let _ = writeln!(s, "iterations = {}", r.trace.len());
    let _ = writeln!(s, "x = {}", vec_text(&r.final_state.x));
    let _ = writeln!(s, "f = {}", num(outcome.f_final));
    if matches!(c.method, Method::Esqm | Method::Sl1qp) {
        let _ = writeln!(s, "beta0 = {}", num(c.beta0));
        let _ = writeln!(s, "delta = {}", num(c.delta));
        let _ = writeln!(s, "beta = {}", num(outcome.final_beta));
    }
    let _ = writeln!(s, "multipliers = {}", vec_text(&outcome.kkt.multipliers));
    let _ = writeln!(s, "kkt_stationarity = {}", num(outcome.kkt.stationarity));
    let _ = writeln!(s, "kkt_feasibility = {}", num(outcome.kkt.feasibility));
    let _ = writeln!(s, "kkt_complementarity = {}", num(outcome.kkt.complementarity));
    let rate = match &outcome.rate {
        Some(e) => format!("{:?} (fit {:.6})", e.regime, e.fit_quality),
        None => "n/a".to_string(),
    };
    let _ = writeln!(s, "rate = {rate}");
    let _ = writeln!(s, "seed = {}", c.seed);
    if let Some(m) = &r.message {
        let _ = writeln!(s, "message = {m}");
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Output directory: `$MMP_NLP_OUT`, else the configured one, else the default.
pub fn output_dir(cfg_dir: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => cfg_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    }
}

fn file_stem(cfg: &RunConfig) -> String {
    format!("{}-{}", cfg.name, cfg.method)
}

/// Writes `<name>-<method>.trace.csv` and `<name>-<method>.summary.txt` into `dir`.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> Result<(PathBuf, PathBuf), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let stem = file_stem(&outcome.config);
    let trace = dir.join(format!("{stem}.trace.csv"));
    let summary = dir.join(format!("{stem}.summary.txt"));
    write_file(&trace, &trace_csv(&outcome.result.trace))?;
    write_file(&summary, &summary_text(outcome))?;
    Ok((trace, summary))
}

/// Runs a configuration, writes its outputs and returns the process exit code.
pub fn run_command(cfg: &RunConfig, problem: &NlpProblem) -> i32 {
    let outcome = match execute(cfg, problem) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let dir = output_dir(cfg.output_dir.as_deref());
    match write_outputs(&outcome, &dir) {
        Ok((trace, summary)) => {
            print!("{}", summary_text(&outcome));
            println!("trace = {}", trace.display());
            println!("summary = {}", summary.display());
            exit_code(outcome.result.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// One row of the suite table.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRow {
    pub problem: String,
    pub method: Method,
    pub status: Result<RunStatus, String>,
    pub expected: RunStatus,
    pub iterations: usize,
    pub final_x: Vec<f64>,
    pub kkt_max: f64,
    pub beta: f64,
}

impl SuiteRow {
    pub fn as_expected(&self) -> bool {
        self.status.as_ref().is_ok_and(|s| *s == self.expected)
    }
}

/// All `(builtin, method)` pairs of the suite, in order.
pub fn suite_jobs() -> Vec<(RunConfig, NlpProblem, RunStatus)> {
    builtins()
        .into_iter()
        .flat_map(|b| {
            b.methods
                .iter()
                .map(|m| {
                    let (cfg, p) = RunConfig::for_builtin(b.name, *m).expect("registered builtin");
                    (cfg, p, b.expected)
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Runs every builtin with every applicable method on `workers` threads.
/// When `dir` is given, each run writes its own trace and summary there.
/// Rows come back in job order regardless of scheduling.
pub fn run_suite(dir: Option<&Path>, workers: usize) -> Result<Vec<SuiteRow>, RunError> {
    let jobs = suite_jobs();
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SuiteRow, RunError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((cfg, problem, expected)) = jobs.get(i) else {
                    break;
                };
                let row = suite_row(cfg, problem, *expected, dir);
                slots.lock().expect("suite results")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("suite results")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

fn suite_row(cfg: &RunConfig, problem: &NlpProblem, expected: RunStatus, dir: Option<&Path>) -> Result<SuiteRow, RunError> {
    let base = SuiteRow {
        problem: cfg.name.clone(),
        method: cfg.method,
        status: Err(String::new()),
        expected,
        iterations: 0,
        final_x: vec![],
        kkt_max: f64::NAN,
        beta: f64::NAN,
    };
    match execute(cfg, problem) {
        Ok(o) => {
            if let Some(d) = dir {
                write_outputs(&o, d)?;
            }
            Ok(SuiteRow {
                status: Ok(o.result.status),
                iterations: o.result.trace.len(),
                kkt_max: o.kkt.max_residual(),
                beta: o.final_beta,
                final_x: o.result.final_state.x,
                ..base
            })
        }
        Err(e) => Ok(SuiteRow {
            status: Err(e.to_string()),
            ..base
        }),
    }
}

/// Fixed-width table of suite rows.
pub fn suite_table(rows: &[SuiteRow]) -> String {
    let mut s = format!(
        "{:<22} {:<9} {:<18} {:<18} {:>7} {:>10} {:>12}\n",
        "problem", "method", "status", "expected", "iters", "beta", "kkt_max"
    );
    for r in rows {
        let status = match &r.status {
            Ok(st) => format!("{st:?}"),
            Err(_) => "Error".to_string(),
        };
        let _ = writeln!(
            s,
            "{:<22} {:<9} {:<18} {:<18} {:>7} {:>10.3} {:>12.3e}",
            r.problem,
            r.method.name(),
            status,
            format!("{:?}", r.expected),
            r.iterations,
            r.beta,
            r.kkt_max
        );
    }
    s
}
