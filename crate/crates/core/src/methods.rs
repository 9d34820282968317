//! The three SQP methods as majorization-minimization oracles.
//!
//! * Moving balls: feasible method over `Q = R^n`; the model is the
//!   descent-lemma upper bound of `f` minimized over the inner balls of the
//!   constraints.
//! * ESQM: `l-infinity` exact penalty with model modulus
//!   `mu = lambda + beta * lambda'`, `lambda >= L`, `lambda' >= max_i L_i`.
//! * Sl1QP: `l1` exact penalty, same modulus with `lambda' >= sum_i L_i`.
//!
//! For the penalty methods, after each step the linearized feasibility tests
//! `f_i(x_k) + <grad f_i(x_k), x_{k+1} - x_k>` are checked; if any is positive
//! the penalty grows by `delta`.

use std::fmt;

use thiserror::Error;

use crate::diagnostics::{kkt_residual, KktReport};
use crate::linalg::{dot, sub};
use crate::mmp::{MmpError, ModelOracle, OracleStep, StopCriteria};
use crate::poly::LIPSCHITZ_FLOOR;
use crate::problem::NlpProblem;
use crate::sets::{SimpleSet, MEMBERSHIP_TOL};
use crate::subproblem::{self, InnerSettings, LinearizedConstraint, SubproblemInput, SubproblemSolution, SubproblemStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MethodError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("point is not admissible: {0}")]
    Inadmissible(String),
    #[error("inner problem failed ({status:?}): {message}")]
    Subproblem { status: SubproblemStatus, message: String },
}

impl From<MethodError> for MmpError {
    fn from(e: MethodError) -> Self {
        match e {
            MethodError::Subproblem { status, message } => MmpError::Subproblem { status, message },
            other => MmpError::InadmissibleStart(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MovingBalls,
    Esqm,
    Sl1qp,
    GradProj,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::MovingBalls, Method::Esqm, Method::Sl1qp, Method::GradProj];

    pub fn name(self) -> &'static str {
        match self {
            Method::MovingBalls => "mb",
            Method::Esqm => "esqm",
            Method::Sl1qp => "sl1qp",
            Method::GradProj => "gradproj",
        }
    }

    pub fn from_name(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Feasibility tolerance of the moving-balls iterates.
pub const MB_FEAS_TOL: f64 = 1e-8;

/// Default tolerance of the penalty update tests; see [`PenaltyConfig::feas_tol`].
pub const DEFAULT_TEST_TOL: f64 = 1e-8;

fn linearize(problem: &NlpProblem, x: &[f64]) -> Vec<LinearizedConstraint> {
    problem
        .constraints
        .iter()
        .map(|c| LinearizedConstraint::new(c.value(x), c.gradient(x)))
        .collect()
}

fn inner_failure(sol: &SubproblemSolution, hint: &str) -> MethodError {
    let base = sol.message.clone().unwrap_or_else(|| format!("residual {:e}", sol.pd_residual));
    let message = if base.contains("MFQC") { base } else { format!("{base}{hint}") };
    MethodError::Subproblem {
        status: sol.status,
        message,
    }
}

#[derive(Debug, Clone)]
pub struct MovingBallsConfig {
    pub problem: NlpProblem,
    pub l: f64,
    pub l_i: Vec<f64>,
    pub inner: InnerSettings,
    pub stop: StopCriteria,
    /// Tolerance on `f_i(x0) <= 0` at the start.
    pub feas_tol: f64,
}

impl MovingBallsConfig {
    /// Takes `L` and `L_i` from the problem's functions. Rejects any `Q`
    /// other than the whole space.
    pub fn new(problem: NlpProblem) -> Result<Self, MethodError> {
        if !matches!(problem.simple_set, SimpleSet::WholeSpace) {
            return Err(MethodError::Config(format!(
                "moving balls requires Q = whole space, got {}",
                problem.simple_set.variant_name()
            )));
        }
        Ok(MovingBallsConfig {
            l: problem.objective.lipschitz_grad(),
            l_i: problem.constraints.iter().map(|c| c.lipschitz_grad()).collect(),
            problem,
            inner: InnerSettings::default(),
            stop: StopCriteria::default(),
            feas_tol: MB_FEAS_TOL,
        })
    }
}

/// One moving-balls step from a feasible `x`.
pub fn mb_step(config: &MovingBallsConfig, x: &[f64]) -> Result<(Vec<f64>, SubproblemSolution), MethodError> {
    let p = &config.problem;
    let viol = p.max_violation(x);
    if viol > config.feas_tol {
        return Err(MethodError::Inadmissible(format!("x violates the constraints by {viol:e}")));
    }
    let g0 = p.objective.gradient(x);
    let cons = linearize(p, x);
    let sol = subproblem::mb_subproblem(x, &g0, config.l, &cons, &config.l_i, &config.inner)
        .map_err(|e| MethodError::Config(e.to_string()))?;
    if sol.status != SubproblemStatus::Solved {
        return Err(inner_failure(&sol, "; suspected violation of MFQC (Mangasarian-Fromovitz qualification)"));
    }
    Ok((sol.y.clone(), sol))
}

#[derive(Debug, Clone)]
pub struct MovingBalls {
    pub config: MovingBallsConfig,
}

impl MovingBalls {
    pub fn new(config: MovingBallsConfig) -> Self {
        MovingBalls { config }
    }
}

impl ModelOracle for MovingBalls {
    fn problem(&self) -> &NlpProblem {
        &self.config.problem
    }

    fn check_start(&self, x0: &[f64]) -> Result<(), MmpError> {
        let p = &self.config.problem;
        if x0.len() != p.dimension() {
            return Err(MmpError::InadmissibleStart(format!("x0 has {} entries, expected {}", x0.len(), p.dimension())));
        }
        let viol = p.max_violation(x0);
        if viol > self.config.feas_tol {
            return Err(MmpError::InadmissibleStart(format!(
                "moving balls needs a feasible x0; constraints violated by {viol:e}"
            )));
        }
        Ok(())
    }

    fn merit(&self, x: &[f64]) -> f64 {
        self.config.problem.objective.value(x)
    }

    fn propose(&self, x: &[f64]) -> Result<OracleStep, MmpError> {
        let (y, sol) = mb_step(&self.config, x)?;
        let fx = self.config.problem.objective.value(x);
        let g0 = self.config.problem.objective.gradient(x);
        let d = sub(&y, x);
        Ok(OracleStep {
            model_value: fx + dot(&g0, &d) + 0.5 * self.config.l * dot(&d, &d),
            merit: fx,
            mu: self.config.l,
            y,
            solution: sol,
            update_pending: false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// l-infinity penalty (ESQM)
    Esqm,
    /// l1 penalty (Sl1QP)
    Sl1qp,
}

impl PenaltyKind {
    pub fn method(self) -> Method {
        match self {
            PenaltyKind::Esqm => Method::Esqm,
            PenaltyKind::Sl1qp => Method::Sl1qp,
        }
    }

    /// Smallest admissible `lambda'` for the constraint constants `l_i`.
    pub fn lambda_prime_bound(self, l_i: &[f64]) -> f64 {
        let b = match self {
            PenaltyKind::Esqm => l_i.iter().fold(0.0_f64, |m, v| m.max(*v)),
            PenaltyKind::Sl1qp => l_i.iter().sum(),
        };
        if b > 0.0 {
            b
        } else {
            LIPSCHITZ_FLOOR
        }
    }
}

#[derive(Debug, Clone)]
pub struct PenaltyConfig {
    pub problem: NlpProblem,
    pub kind: PenaltyKind,
    pub beta0: f64,
    pub delta: f64,
    lambda: f64,
    lambda_prime: f64,
    pub inner: InnerSettings,
    pub stop: StopCriteria,
    /// A test `f_i(x) + <grad f_i(x), y - x>` counts as passed when it is
    /// at most this value.
    pub feas_tol: f64,
}

impl PenaltyConfig {
    /// Defaults: `beta0 = delta = 1`, `lambda = L`, `lambda'` at its bound.
    pub fn new(problem: NlpProblem, kind: PenaltyKind) -> Self {
        let l_i: Vec<f64> = problem.constraints.iter().map(|c| c.lipschitz_grad()).collect();
        PenaltyConfig {
            lambda: problem.objective.lipschitz_grad(),
            lambda_prime: kind.lambda_prime_bound(&l_i),
            problem,
            kind,
            beta0: 1.0,
            delta: 1.0,
            inner: InnerSettings::default(),
            stop: StopCriteria::default(),
            feas_tol: DEFAULT_TEST_TOL,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lambda_prime(&self) -> f64 {
        self.lambda_prime
    }

    /// Raises `lambda`; values below `L` are rejected.
    pub fn set_lambda(&mut self, lambda: f64) -> Result<(), MethodError> {
        let l = self.problem.objective.lipschitz_grad();
        if !(lambda >= l) || !lambda.is_finite() {
            return Err(MethodError::Config(format!("lambda = {lambda} is below L = {l}")));
        }
        self.lambda = lambda;
        Ok(())
    }

    /// Raises `lambda'`; values below the method's bound are rejected.
    pub fn set_lambda_prime(&mut self, lambda_prime: f64) -> Result<(), MethodError> {
        let l_i: Vec<f64> = self.problem.constraints.iter().map(|c| c.lipschitz_grad()).collect();
        let bound = self.kind.lambda_prime_bound(&l_i);
        if !(lambda_prime >= bound) || !lambda_prime.is_finite() {
            return Err(MethodError::Config(format!("lambda' = {lambda_prime} is below the bound {bound}")));
        }
        self.lambda_prime = lambda_prime;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), MethodError> {
        if !(self.beta0 > 0.0) || !(self.delta > 0.0) {
            return Err(MethodError::Config("beta0 and delta must be positive".into()));
        }
        if !(self.feas_tol >= 0.0) {
            return Err(MethodError::Config("feas_tol must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn mu(&self, beta: f64) -> f64 {
        self.lambda + beta * self.lambda_prime
    }

    pub fn initial_state(&self) -> PenaltyState {
        PenaltyState {
            beta0: self.beta0,
            delta: self.delta,
            beta: self.beta0,
            update_count: 0,
            last_update: None,
            stabilized_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyState {
    pub beta0: f64,
    pub delta: f64,
    pub beta: f64,
    pub update_count: usize,
    /// Iteration of the most recent increase.
    pub last_update: Option<usize>,
    /// First iteration of the final constant-penalty stretch, once that
    /// stretch is long enough (see [`PenaltyState::mark_stability`]).
    pub stabilized_at: Option<usize>,
}

impl PenaltyState {
    fn increased(&self, k: usize) -> PenaltyState {
        let update_count = self.update_count + 1;
        PenaltyState {
            beta: self.beta0 + self.delta * update_count as f64,
            update_count,
            last_update: Some(k),
            stabilized_at: None,
            ..self.clone()
        }
    }

    /// Sets `stabilized_at` if the penalty has not moved during the last
    /// `window` of `iterations` iterations.
    pub fn mark_stability(&mut self, iterations: usize, window: usize) {
        let since = self.last_update.map_or(0, |k| k + 1);
        self.stabilized_at = (iterations >= since + window).then_some(since);
    }
}

/// `f(x) + beta * max(0, f_1(x), ..., f_m(x))`
pub fn merit_linf(problem: &NlpProblem, beta: f64, x: &[f64]) -> f64 {
    problem.objective.value(x) + beta * problem.max_violation(x)
}

/// `f(x) + beta * sum_i max(0, f_i(x))`
pub fn merit_l1(problem: &NlpProblem, beta: f64, x: &[f64]) -> f64 {
    problem.objective.value(x) + beta * problem.constraints.iter().map(|c| c.value(x).max(0.0)).sum::<f64>()
}

/// Result of one penalty-method step.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyStep {
    pub y: Vec<f64>,
    pub state: PenaltyState,
    pub solution: SubproblemSolution,
    /// `f_i(x) + <grad f_i(x), y - x>` for every constraint.
    pub tests: Vec<f64>,
    pub model_value: f64,
    pub mu: f64,
}

fn penalty_step(config: &PenaltyConfig, state: &PenaltyState, x: &[f64], k: usize) -> Result<PenaltyStep, MethodError> {
    let p = &config.problem;
    if !p.simple_set.contains(x, MEMBERSHIP_TOL) {
        return Err(MethodError::Inadmissible("x is not in Q".into()));
    }
    let g0 = p.objective.gradient(x);
    let cons = linearize(p, x);
    let mu = config.mu(state.beta);
    let input = match config.kind {
        PenaltyKind::Esqm => SubproblemInput::Esqm {
            x: x.to_vec(),
            g0,
            beta: state.beta,
            mu,
            constraints: cons,
            q: p.simple_set.clone(),
        },
        PenaltyKind::Sl1qp => SubproblemInput::Sl1qp {
            x: x.to_vec(),
            g0,
            beta: state.beta,
            mu,
            constraints: cons,
            q: p.simple_set.clone(),
        },
    };
    let sol = subproblem::solve(&input, &config.inner).map_err(|e| MethodError::Config(e.to_string()))?;
    if sol.status != SubproblemStatus::Solved {
        return Err(inner_failure(&sol, ""));
    }
    let d = sub(&sol.y, x);
    let tests: Vec<f64> = input.constraints().iter().map(|c| c.test(&d)).collect();
    let next_state = if tests.iter().all(|t| *t <= config.feas_tol) {
        state.clone()
    } else {
        state.increased(k)
    };
    Ok(PenaltyStep {
        y: sol.y.clone(),
        model_value: p.objective.value(x) + input.model_objective(&sol.y),
        state: next_state,
        solution: sol,
        tests,
        mu,
    })
}

/// One ESQM step from `x in Q` at iteration `k`.
pub fn esqm_step(config: &PenaltyConfig, state: &PenaltyState, x: &[f64], k: usize) -> Result<PenaltyStep, MethodError> {
    if config.kind != PenaltyKind::Esqm {
        return Err(MethodError::Config("esqm_step needs an ESQM configuration".into()));
    }
    penalty_step(config, state, x, k)
}

/// One Sl1QP step from `x in Q` at iteration `k`.
pub fn sl1qp_step(config: &PenaltyConfig, state: &PenaltyState, x: &[f64], k: usize) -> Result<PenaltyStep, MethodError> {
    if config.kind != PenaltyKind::Sl1qp {
        return Err(MethodError::Config("sl1qp_step needs an Sl1QP configuration".into()));
    }
    penalty_step(config, state, x, k)
}

/// ESQM or Sl1QP as a model oracle; the penalty is updated in `accept`.
#[derive(Debug, Clone)]
pub struct PenaltyMethod {
    pub config: PenaltyConfig,
    pub state: PenaltyState,
    iteration: usize,
}

impl PenaltyMethod {
    pub fn new(config: PenaltyConfig) -> Result<Self, MethodError> {
        config.validate()?;
        Ok(PenaltyMethod {
            state: config.initial_state(),
            config,
            iteration: 0,
        })
    }

    pub fn merit_at(&self, beta: f64, x: &[f64]) -> f64 {
        match self.config.kind {
            PenaltyKind::Esqm => merit_linf(&self.config.problem, beta, x),
            PenaltyKind::Sl1qp => merit_l1(&self.config.problem, beta, x),
        }
    }
}

impl ModelOracle for PenaltyMethod {
    fn problem(&self) -> &NlpProblem {
        &self.config.problem
    }

    fn check_start(&self, x0: &[f64]) -> Result<(), MmpError> {
        let p = &self.config.problem;
        if x0.len() != p.dimension() {
            return Err(MmpError::InadmissibleStart(format!("x0 has {} entries, expected {}", x0.len(), p.dimension())));
        }
        if !p.simple_set.contains(x0, MEMBERSHIP_TOL) {
            return Err(MmpError::InadmissibleStart("x0 is not in Q".into()));
        }
        Ok(())
    }

    fn merit(&self, x: &[f64]) -> f64 {
        self.merit_at(self.state.beta, x)
    }

    fn propose(&self, x: &[f64]) -> Result<OracleStep, MmpError> {
        let step = penalty_step(&self.config, &self.state, x, self.iteration)?;
        Ok(OracleStep {
            update_pending: step.state.beta != self.state.beta,
            merit: self.merit(x),
            model_value: step.model_value,
            mu: step.mu,
            y: step.y,
            solution: step.solution,
        })
    }

    fn accept(&mut self, _x: &[f64], step: &OracleStep) {
        if step.update_pending {
            self.state = self.state.increased(self.iteration);
        }
        self.iteration += 1;
    }

    fn penalty(&self) -> f64 {
        self.state.beta
    }
}

/// KKT report at `x` from the duals of the last inner problem.
///
/// The inner duals are already on the scale of the original program: for
/// the penalty methods they lie in `{u >= 0, sum u <= beta}` (or `[0, beta]`)
/// and multiply the unnormalized gradients, so `lambda = u` for every method.
pub fn extract_kkt(problem: &NlpProblem, x: &[f64], solution: &SubproblemSolution, _method: Method) -> KktReport {
    kkt_residual(problem, x, &solution.multipliers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mmp::{run_mmp, RunStatus};
    use crate::poly::{parse_polynomial, AxisBox};
    use crate::problem::SmoothFunction;

    fn func(text: &str, n: usize, l: Option<f64>) -> SmoothFunction {
        let p = parse_polynomial(text, n).unwrap();
        match l {
            Some(l) => SmoothFunction::from_polynomial_with_lipschitz(p, l).unwrap(),
            None => SmoothFunction::from_polynomial(p, &AxisBox::symmetric(n, 4.0)).unwrap(),
        }
    }

    fn halfline() -> NlpProblem {
        NlpProblem::new(
            "linear-over-halfline",
            func("x1", 1, Some(1.0)),
            vec![func("-x1", 1, Some(1.0))],
            SimpleSet::WholeSpace,
        )
        .unwrap()
    }

    #[test]
    fn mb_unconstrained_quadratic_step() {
        let p = NlpProblem::new("q", func("0.5*x1^2 + 0.5*x2^2", 2, None), vec![], SimpleSet::WholeSpace).unwrap();
        let cfg = MovingBallsConfig::new(p).unwrap();
        assert_eq!(cfg.l, 1.0);
        let (y, _) = mb_step(&cfg, &[2.0, 0.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn mb_halfline_step_and_fixed_point() {
        let cfg = MovingBallsConfig::new(halfline()).unwrap();
        let (y, _) = mb_step(&cfg, &[1.0]).unwrap();
        assert!((y[0] - (2.0 - 3f64.sqrt())).abs() < 1e-9);
        let (y, sol) = mb_step(&cfg, &[0.0]).unwrap();
        assert!(y[0].abs() < 1e-9);
        assert!((sol.multipliers[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mb_rejects_other_sets_and_infeasible_points() {
        let q = SimpleSet::new_box(vec![0.0], vec![1.0]).unwrap();
        let p = NlpProblem::new("b", func("x1^2", 1, None), vec![], q).unwrap();
        assert!(matches!(MovingBallsConfig::new(p), Err(MethodError::Config(_))));
        let cfg = MovingBallsConfig::new(halfline()).unwrap();
        assert!(matches!(mb_step(&cfg, &[-1.0]), Err(MethodError::Inadmissible(_))));
    }

    #[test]
    fn penalty_update_rule() {
        let cfg = PenaltyConfig::new(halfline(), PenaltyKind::Esqm);
        let st = cfg.initial_state();
        // feasible start, tests pass: beta unchanged
        let step = esqm_step(&cfg, &st, &[1.0], 0).unwrap();
        assert!(step.tests.iter().all(|t| *t <= 0.0));
        assert_eq!(step.state.beta, st.beta);
        // far infeasible start with a small penalty: a test fails, beta + delta
        let mut cfg = PenaltyConfig::new(halfline(), PenaltyKind::Esqm);
        cfg.beta0 = 0.5;
        cfg.delta = 0.25;
        let st = cfg.initial_state();
        let step = esqm_step(&cfg, &st, &[-3.0], 0).unwrap();
        assert!(step.tests.iter().any(|t| *t > 0.0));
        assert_eq!(step.state.beta, 0.75);
        assert_eq!(step.state.update_count, 1);
        assert_eq!(step.state.last_update, Some(0));
        // the branch depends only on the signs of the recomputed tests
        let d = step.y[0] - (-3.0);
        assert_eq!(step.tests[0], 3.0 + (-1.0) * d);
    }

    #[test]
    fn sl1qp_update_rule_mirrors_esqm() {
        let mut cfg = PenaltyConfig::new(halfline(), PenaltyKind::Sl1qp);
        cfg.beta0 = 0.5;
        let st = cfg.initial_state();
        let step = sl1qp_step(&cfg, &st, &[-3.0], 0).unwrap();
        assert_eq!(step.state.beta, 1.5);
        let step = sl1qp_step(&cfg, &cfg.initial_state(), &[2.0], 0).unwrap();
        assert_eq!(step.state.beta, 0.5);
        assert!(esqm_step(&cfg, &st, &[2.0], 0).is_err());
    }

    #[test]
    fn zero_step_test_equals_constraint_value() {
        let p = halfline();
        let x = [0.7];
        let cons = linearize(&p, &x);
        assert_eq!(cons[0].test(&[0.0]), p.constraints[0].value(&x));
    }

    #[test]
    fn merit_examples() {
        let p = NlpProblem::new("m", func("0", 1, Some(1.0)), vec![func("2", 1, Some(1.0))], SimpleSet::WholeSpace).unwrap();
        assert_eq!(merit_linf(&p, 3.0, &[0.0]), 6.0);
        let h = halfline();
        assert_eq!(merit_linf(&h, 10.0, &[0.5]), 0.5);
        assert_eq!(merit_l1(&h, 10.0, &[0.5]), 0.5);
        let two = NlpProblem::new(
            "two",
            func("x1", 1, Some(1.0)),
            vec![func("x1 - 1", 1, Some(1.0)), func("x1 - 2", 1, Some(1.0))],
            SimpleSet::WholeSpace,
        )
        .unwrap();
        assert_eq!(merit_l1(&two, 2.0, &[3.0]), 3.0 + 2.0 * (2.0 + 1.0));
        assert_eq!(merit_linf(&two, 2.0, &[3.0]), 3.0 + 2.0 * 2.0);
    }

    #[test]
    fn lambda_overrides_upward_only() {
        let mut cfg = PenaltyConfig::new(halfline(), PenaltyKind::Sl1qp);
        assert!(cfg.set_lambda(0.5).is_err());
        assert!(cfg.set_lambda(2.0).is_ok());
        assert!(cfg.set_lambda_prime(0.9).is_err());
        assert!(cfg.set_lambda_prime(1.0).is_ok());
        assert_eq!(cfg.mu(3.0), 5.0);
    }

    #[test]
    fn halfline_kkt_by_mb_and_esqm() {
        let mut mb = MovingBalls::new(MovingBallsConfig::new(halfline()).unwrap());
        let res = run_mmp(&mut mb, &[1.0], &StopCriteria::default(), &mut []).unwrap();
        assert_eq!(res.status, RunStatus::Converged);
        let sol = res.last_solution.clone().unwrap();
        let rep = extract_kkt(&halfline(), &res.final_state.x, &sol, Method::MovingBalls);
        assert!(res.final_state.x[0].abs() < 1e-6);
        assert!((rep.multipliers[0] - 1.0).abs() < 1e-6);
        assert!(rep.max_residual() <= 1e-6);

        let mut esqm = PenaltyMethod::new(PenaltyConfig::new(halfline(), PenaltyKind::Esqm)).unwrap();
        let res2 = run_mmp(&mut esqm, &[1.0], &StopCriteria::default(), &mut []).unwrap();
        assert_eq!(res2.status, RunStatus::Converged);
        let rep2 = extract_kkt(&halfline(), &res2.final_state.x, res2.last_solution.as_ref().unwrap(), Method::Esqm);
        assert!((res2.final_state.x[0] - res.final_state.x[0]).abs() < 1e-5);
        assert!((rep2.multipliers[0] - rep.multipliers[0]).abs() < 1e-5);
    }

    #[test]
    fn stability_window() {
        let mut st = PenaltyConfig::new(halfline(), PenaltyKind::Esqm).initial_state();
        st = st.increased(4);
        st.mark_stability(100, 200);
        assert_eq!(st.stabilized_at, None);
        st.mark_stability(205, 200);
        assert_eq!(st.stabilized_at, Some(5));
        assert_eq!(st.beta, st.beta0 + st.delta * st.update_count as f64);
    }
}
