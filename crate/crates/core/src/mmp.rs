//! The abstract majorization-minimization loop.
//!
//! A method supplies a [`ModelOracle`]: at a point `x` it minimizes a
//! strongly convex upper model `h(x, .)` of its merit function over an inner
//! approximation `D(x)` of the feasible set, returning `p(x)` and the model
//! optimum `F(x) = h(x, p(x))`. [`run_mmp`] iterates `x_{k+1} = p(x_k)` and
//! records everything the descent monitors need.

use thiserror::Error;

use crate::diagnostics::kkt_residual;
use crate::linalg::{dist, norm};
use crate::problem::NlpProblem;
use crate::subproblem::{Slack, SubproblemSolution, SubproblemStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmpError {
    #[error("starting point is not admissible: {0}")]
    InadmissibleStart(String),
    #[error("inner problem failed ({status:?}): {message}")]
    Subproblem { status: SubproblemStatus, message: String },
}

/// Result of one model minimization at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub y: Vec<f64>,
    /// `h(x, y)`
    pub model_value: f64,
    /// `h(x, x)`, the merit function at `x` for the current parameters.
    pub merit: f64,
    /// Strong convexity modulus of `h(x, .)`.
    pub mu: f64,
    pub solution: SubproblemSolution,
    /// The method wants to change its parameters after this step
    /// (a failed feasibility test for the penalty methods).
    pub update_pending: bool,
}

pub trait ModelOracle {
    fn problem(&self) -> &NlpProblem;

    /// Checks that `x0` may start a run.
    fn check_start(&self, x0: &[f64]) -> Result<(), MmpError>;

    /// `h(x, x)`.
    fn merit(&self, x: &[f64]) -> f64;

    /// Minimizes the model at `x`. Must not change the oracle.
    fn propose(&self, x: &[f64]) -> Result<OracleStep, MmpError>;

    /// Hook run once a step from `x` is accepted.
    fn accept(&mut self, _x: &[f64], _step: &OracleStep) {}

    /// Penalty parameter, zero for methods without one.
    fn penalty(&self) -> f64 {
        0.0
    }

    /// Multipliers of the original program implied by an inner solution.
    fn nlp_multipliers(&self, step: &OracleStep) -> Vec<f64> {
        step.solution.multipliers.clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopCriteria {
    pub tol_step: f64,
    pub max_iters: usize,
    pub divergence_radius: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            tol_step: 1e-9,
            max_iters: 100_000,
            divergence_radius: 1e6,
        }
    }
}

/// One row per accepted outer iteration, describing the iterate `x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub merit: f64,
    pub f: f64,
    /// Value function `F(x_k) = h(x_k, x_{k+1})`.
    pub value: f64,
    pub step_norm: f64,
    pub beta: f64,
    pub max_constraint_violation: f64,
    pub subproblem_iters: usize,
    pub kkt_stationarity: f64,
    /// Model modulus used at this iteration. Not part of the CSV trace.
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    Diverged,
    MaxIters,
    SubproblemFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmpState {
    pub x: Vec<f64>,
    pub k: usize,
    pub last_step_norm: f64,
    pub value: f64,
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    pub final_state: MmpState,
    pub trace: Vec<TraceRecord>,
    /// `x_0, x_1, ...` followed by the final point.
    pub iterates: Vec<Vec<f64>>,
    /// Record of the stopping test at the last iterate (converged runs).
    pub final_record: Option<TraceRecord>,
    /// Inner solution of the last model minimization performed.
    pub last_solution: Option<SubproblemSolution>,
    /// Multipliers of the original program at the final point.
    pub multipliers: Vec<f64>,
    pub message: Option<String>,
}

impl RunResult {
    /// Trace rows followed by the final stopping-test record, if any.
    pub fn monitored_trace(&self) -> Vec<TraceRecord> {
        let mut rows = self.trace.clone();
        rows.extend(self.final_record.clone());
        rows
    }
}

/// Observer invoked after every accepted iteration.
pub trait Monitor {
    fn observe(&mut self, record: &TraceRecord, x: &[f64], next: &[f64]);
}

fn make_record(oracle: &dyn ModelOracle, k: usize, x: &[f64], step: &OracleStep) -> TraceRecord {
    let problem = oracle.problem();
    let lambda = oracle.nlp_multipliers(step);
    TraceRecord {
        k,
        merit: step.merit,
        f: problem.objective.value(x),
        value: step.model_value,
        step_norm: dist(&step.y, x),
        beta: oracle.penalty(),
        max_constraint_violation: problem.max_violation(x),
        subproblem_iters: step.solution.iterations,
        kkt_stationarity: kkt_residual(problem, x, &lambda).stationarity,
        mu: step.mu,
    }
}

/// Iterates `x_{k+1} = p(x_k)` from `x0`.
///
/// Stops with `Converged` once a proposed step has norm `<= tol_step` and the
/// oracle requests no parameter change (the final point is that proposal),
/// with `Diverged` once `|x_k| > divergence_radius`, with `MaxIters` after
/// `max_iters` accepted steps, and with `SubproblemFailure` if an inner solve
/// fails.
pub fn run_mmp(
    oracle: &mut dyn ModelOracle,
    x0: &[f64],
    stop: &StopCriteria,
    monitors: &mut [&mut dyn Monitor],
) -> Result<RunResult, MmpError> {
    oracle.check_start(x0)?;
    let mut x = x0.to_vec();
    let mut trace = Vec::new();
    let mut iterates = vec![x.clone()];
    let mut last_step: Option<OracleStep> = None;
    let mut last_step_norm = f64::NAN;

    let (status, final_record, message) = loop {
        let k = trace.len();
        if !(norm(&x) <= stop.divergence_radius) {
            break (RunStatus::Diverged, None, Some(format!("|x_{k}| exceeds {:e}", stop.divergence_radius)));
        }
        if k >= stop.max_iters {
            break (RunStatus::MaxIters, None, None);
        }
        let step = match oracle.propose(&x) {
            Ok(s) => s,
            Err(MmpError::Subproblem { status, message }) => {
                break (RunStatus::SubproblemFailure, None, Some(format!("{status:?}: {message}")));
            }
            Err(e) => return Err(e),
        };
        let record = make_record(oracle, k, &x, &step);
        last_step_norm = record.step_norm;
        if record.step_norm <= stop.tol_step && !step.update_pending {
            x = step.y.clone();
            iterates.push(x.clone());
            last_step = Some(step);
            break (RunStatus::Converged, Some(record), None);
        }
        for m in monitors.iter_mut() {
            m.observe(&record, &x, &step.y);
        }
        trace.push(record);
        oracle.accept(&x, &step);
        x = step.y.clone();
        iterates.push(x.clone());
        last_step = Some(step);
    };

    let (value, merit) = match (&final_record, status) {
        (Some(r), _) => (r.value, oracle.merit(&x)),
        _ => (f64::NAN, oracle.merit(&x)),
    };
    let multipliers = last_step.as_ref().map(|s| oracle.nlp_multipliers(s)).unwrap_or_default();
    Ok(RunResult {
        status,
        final_state: MmpState {
            x,
            k: trace.len(),
            last_step_norm,
            value,
            merit,
        },
        trace,
        iterates,
        final_record,
        last_solution: last_step.map(|s| s.solution),
        multipliers,
        message,
    })
}

/// `F(x) = h(x, p(x))` by one oracle call.
pub fn value_function(oracle: &dyn ModelOracle, x: &[f64]) -> Result<f64, MmpError> {
    Ok(oracle.propose(x)?.model_value)
}

/// Indices `k` violating `F(x_k) + (mu/2)|x_{k+1} - x_k|^2 <= merit(x_k)` or,
/// for `k >= 1` with an unchanged penalty, `merit(x_k) <= F(x_{k-1})`, both up
/// to `tol`.
pub fn sandwich_check(trace: &[TraceRecord], tol: f64) -> Vec<usize> {
    let mut bad = Vec::new();
    for (i, r) in trace.iter().enumerate() {
        let upper_ok = r.value + 0.5 * r.mu * r.step_norm * r.step_norm <= r.merit + tol;
        let lower_ok = match i.checked_sub(1).map(|j| &trace[j]) {
            Some(prev) if prev.beta == r.beta => r.merit <= prev.value + tol,
            _ => true,
        };
        if !(upper_ok && lower_ok) {
            bad.push(r.k);
        }
    }
    bad
}

/// Indices `k` violating `merit(x_k) >= merit(x_{k+1}) + (mu/2)|x_{k+1} - x_k|^2 - tol`
/// where the penalty did not change between the two rows.
pub fn descent_check(trace: &[TraceRecord], tol: f64) -> Vec<usize> {
    trace
        .windows(2)
        .filter(|w| w[0].beta == w[1].beta)
        .filter(|w| !(w[0].merit >= w[1].merit + 0.5 * w[0].mu * w[0].step_norm * w[0].step_norm - tol))
        .map(|w| w[0].k)
        .collect()
}

/// Collects sandwich violations online.
#[derive(Debug, Default)]
pub struct SandwichMonitor {
    pub tol: f64,
    pub violations: Vec<usize>,
    prev: Option<TraceRecord>,
}

impl SandwichMonitor {
    pub fn new(tol: f64) -> Self {
        SandwichMonitor {
            tol,
            ..Default::default()
        }
    }
}

impl Monitor for SandwichMonitor {
    fn observe(&mut self, record: &TraceRecord, _x: &[f64], _next: &[f64]) {
        let pair: Vec<TraceRecord> = self.prev.iter().cloned().chain([record.clone()]).collect();
        if sandwich_check(&pair, self.tol).contains(&record.k) {
            self.violations.push(record.k);
        }
        self.prev = Some(record.clone());
    }
}

/// Gradient projection as a majorization-minimization method:
/// `h(x, y) = f(x) + <grad f(x), y - x> + (L/2)|y - x|^2 + i_Q(y)`, so that
/// `p(x) = P_Q(x - grad f(x)/L)`. Constraints other than `Q` are not allowed.
#[derive(Debug, Clone)]
pub struct GradientProjection {
    problem: NlpProblem,
    lipschitz: f64,
}

impl GradientProjection {
    pub fn new(problem: NlpProblem) -> Result<Self, MmpError> {
        Self::with_lipschitz(problem.objective.lipschitz_grad(), problem)
    }

    pub fn with_lipschitz(lipschitz: f64, problem: NlpProblem) -> Result<Self, MmpError> {
        if problem.num_constraints() != 0 {
            return Err(MmpError::InadmissibleStart(
                "gradient projection handles only the simple set; problem has functional constraints".into(),
            ));
        }
        if !(lipschitz >= problem.objective.lipschitz_grad()) {
            return Err(MmpError::InadmissibleStart(format!(
                "step constant {lipschitz} is below the objective's Lipschitz constant"
            )));
        }
        Ok(GradientProjection { problem, lipschitz })
    }
}

impl ModelOracle for GradientProjection {
    fn problem(&self) -> &NlpProblem {
        &self.problem
    }

    fn check_start(&self, x0: &[f64]) -> Result<(), MmpError> {
        if x0.len() != self.problem.dimension() {
            return Err(MmpError::InadmissibleStart(format!(
                "x0 has {} entries, problem dimension is {}",
                x0.len(),
                self.problem.dimension()
            )));
        }
        if !self.problem.simple_set.contains(x0, crate::sets::MEMBERSHIP_TOL) {
            return Err(MmpError::InadmissibleStart("x0 is not in Q".into()));
        }
        Ok(())
    }

    fn merit(&self, x: &[f64]) -> f64 {
        self.problem.objective.value(x)
    }

    fn propose(&self, x: &[f64]) -> Result<OracleStep, MmpError> {
        let fx = self.problem.objective.value(x);
        let g = self.problem.objective.gradient(x);
        let l = self.lipschitz;
        let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi / l).collect();
        self.problem.simple_set.project_in_place(&mut y);
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let model_value = fx + crate::linalg::dot(&g, &d) + 0.5 * l * crate::linalg::dot(&d, &d);
        let v: Vec<f64> = g.iter().zip(&d).map(|(gi, di)| gi + l * di).collect();
        let pd_residual = self.problem.simple_set.stationarity_residual_unchecked(&y, &v);
        Ok(OracleStep {
            y: y.clone(),
            model_value,
            merit: fx,
            mu: l,
            solution: SubproblemSolution {
                y,
                multipliers: Vec::new(),
                slack: Slack::None,
                pd_residual,
                status: SubproblemStatus::Solved,
                iterations: 0,
                message: None,
            },
            update_pending: false,
        })
    }
}
