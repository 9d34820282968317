//! Strongly convex inner problems of the three SQP methods.
//!
//! Each inner problem has a closed-form primal minimizer for fixed
//! multipliers, so all three are solved by projected gradient ascent on the
//! concave dual:
//!
//! * moving balls: minimize `<g0, d> + (L/2)|d|^2` subject to
//!   `c_i + <g_i, d> + (L_i/2)|d|^2 <= 0`, with `d = y - x`. This is the
//!   projection of `z_0 = x - g0/L` onto the intersection of the balls
//!   `B(z_i, r_i)`, and `y(u) = x - (g0 + sum u_i g_i) / (L + sum u_i L_i)`.
//!   Multipliers live in the nonnegative orthant.
//! * ESQM: minimize `<g0, d> + beta*s + (mu/2)|d|^2` over `y in Q`, `s >= 0`,
//!   `s >= c_i + <g_i, d>`. Multipliers live in `{u >= 0, sum u <= beta}`.
//! * Sl1QP: as ESQM with one slack per constraint and penalty
//!   `beta * sum s_i`. Multipliers live in the box `[0, beta]^m`.
//!
//! For the penalty methods `y(u) = P_Q(x - (g0 + sum u_i g_i)/mu)`.
//!
//! The ascent uses momentum with function-value restarts and a backtracking
//! estimate of the dual gradient Lipschitz constant, seeded at
//! `sum |g_i|^2 / mu`. A solution is accepted once the primal-dual residual
//! of the inner problem and the `min`-form complementarity are both below the
//! tolerance.

use thiserror::Error;

use crate::linalg::{dot, norm_inf};
use crate::sets::{SimpleSet, MEMBERSHIP_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubproblemError {
    #[error("invalid subproblem input: {0}")]
    InvalidInput(String),
}

/// `c_i + <g_i, y - x>`, the linearization of a constraint at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedConstraint {
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl LinearizedConstraint {
    pub fn new(value: f64, gradient: Vec<f64>) -> Self {
        LinearizedConstraint { value, gradient }
    }

    /// Test function `c + <g, d>` at displacement `d = y - x`.
    pub fn test(&self, d: &[f64]) -> f64 {
        self.value + dot(&self.gradient, d)
    }
}

/// Ball form `|y - z_i|^2 <= r_i^2` of a moving-balls constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct BallData {
    pub center: Vec<f64>,
    /// Negative when the ball is empty.
    pub squared_radius: f64,
    pub weight: f64,
}

impl BallData {
    pub fn from_linearization(x: &[f64], lc: &LinearizedConstraint, weight: f64) -> Self {
        let center = x.iter().zip(&lc.gradient).map(|(xi, gi)| xi - gi / weight).collect();
        let g2 = dot(&lc.gradient, &lc.gradient);
        BallData {
            center,
            squared_radius: g2 / (weight * weight) - 2.0 * lc.value / weight,
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Slack {
    None,
    Scalar(f64),
    PerConstraint(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubproblemStatus {
    Solved,
    /// An empty ball, or multipliers beyond the configured cap.
    Infeasible,
    MaxInnerIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub y: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub slack: Slack,
    pub pd_residual: f64,
    pub status: SubproblemStatus,
    pub iterations: usize,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSettings {
    pub eps_sub: f64,
    pub max_iters: usize,
    /// Moving balls only: multipliers above this report infeasibility.
    pub multiplier_cap: f64,
    /// Initial multipliers; zero when absent.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for InnerSettings {
    fn default() -> Self {
        InnerSettings {
            eps_sub: 1e-10,
            max_iters: 100_000,
            multiplier_cap: 1e8,
            warm_start: None,
        }
    }
}

/// Empty-ball threshold on `r_i^2`.
pub const EMPTY_BALL_TOL: f64 = 1e-10;

/// Complete description of one inner problem.
#[derive(Debug, Clone, PartialEq)]
pub enum SubproblemInput {
    MovingBalls {
        x: Vec<f64>,
        g0: Vec<f64>,
        l: f64,
        constraints: Vec<LinearizedConstraint>,
        weights: Vec<f64>,
    },
    Esqm {
        x: Vec<f64>,
        g0: Vec<f64>,
        beta: f64,
        mu: f64,
        constraints: Vec<LinearizedConstraint>,
        q: SimpleSet,
    },
    Sl1qp {
        x: Vec<f64>,
        g0: Vec<f64>,
        beta: f64,
        mu: f64,
        constraints: Vec<LinearizedConstraint>,
        q: SimpleSet,
    },
}

impl SubproblemInput {
    pub fn x(&self) -> &[f64] {
        match self {
            SubproblemInput::MovingBalls { x, .. } | SubproblemInput::Esqm { x, .. } | SubproblemInput::Sl1qp { x, .. } => x,
        }
    }

    pub fn constraints(&self) -> &[LinearizedConstraint] {
        match self {
            SubproblemInput::MovingBalls { constraints, .. }
            | SubproblemInput::Esqm { constraints, .. }
            | SubproblemInput::Sl1qp { constraints, .. } => constraints,
        }
    }

    /// Strong convexity modulus of the model in `y`.
    pub fn modulus(&self) -> f64 {
        match self {
            SubproblemInput::MovingBalls { l, .. } => *l,
            SubproblemInput::Esqm { mu, .. } | SubproblemInput::Sl1qp { mu, .. } => *mu,
        }
    }

    fn validate(&self) -> Result<(), SubproblemError> {
        let bad = |s: String| Err(SubproblemError::InvalidInput(s));
        let x = self.x();
        let n = x.len();
        let (g0, cons) = match self {
            SubproblemInput::MovingBalls {
                g0, l, constraints, weights, ..
            } => {
                if !(*l > 0.0) {
                    return bad(format!("L must be positive, got {l}"));
                }
                if weights.len() != constraints.len() {
                    return bad("one weight per constraint required".into());
                }
                if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
                    return bad(format!("constraint weights must be positive, got {w}"));
                }
                (g0, constraints)
            }
            SubproblemInput::Esqm {
                g0, beta, mu, constraints, q, ..
            }
            | SubproblemInput::Sl1qp {
                g0, beta, mu, constraints, q, ..
            } => {
                if !(*beta > 0.0) || !(*mu > 0.0) {
                    return bad(format!("beta and mu must be positive, got {beta}, {mu}"));
                }
                if q.check_dimension(n).is_err() {
                    return bad("simple set dimension does not match x".into());
                }
                (g0, constraints)
            }
        };
        if g0.len() != n || cons.iter().any(|c| c.gradient.len() != n) {
            return bad("gradient dimensions do not match x".into());
        }
        Ok(())
    }

    /// Model objective at `y`, without the constant `f(x)` and without
    /// checking feasibility of `y`.
    pub fn model_objective(&self, y: &[f64]) -> f64 {
        let x = self.x();
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let d2 = dot(&d, &d);
        match self {
            SubproblemInput::MovingBalls { g0, l, .. } => dot(g0, &d) + 0.5 * l * d2,
            SubproblemInput::Esqm {
                g0, beta, mu, constraints, ..
            } => {
                let s = constraints.iter().fold(0.0_f64, |m, c| m.max(c.test(&d)));
                dot(g0, &d) + beta * s + 0.5 * mu * d2
            }
            SubproblemInput::Sl1qp {
                g0, beta, mu, constraints, ..
            } => {
                let s: f64 = constraints.iter().map(|c| c.test(&d).max(0.0)).sum();
                dot(g0, &d) + beta * s + 0.5 * mu * d2
            }
        }
    }

    /// Whether `y` is feasible for the inner problem (ball constraints
    /// exactly, membership in `Q` up to `MEMBERSHIP_TOL`).
    pub fn is_feasible(&self, y: &[f64]) -> bool {
        let x = self.x();
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        match self {
            SubproblemInput::MovingBalls { constraints, weights, .. } => {
                let d2 = dot(&d, &d);
                constraints.iter().zip(weights).all(|(c, w)| c.test(&d) + 0.5 * w * d2 <= 0.0)
            }
            SubproblemInput::Esqm { q, .. } | SubproblemInput::Sl1qp { q, .. } => q.contains(y, MEMBERSHIP_TOL),
        }
    }

    /// Model value at `y`, without the constant `f(x)`; infinite when `y` is
    /// infeasible for the inner problem.
    pub fn model_value(&self, y: &[f64]) -> f64 {
        if self.is_feasible(y) {
            self.model_objective(y)
        } else {
            f64::INFINITY
        }
    }

    /// Primal point for fixed multipliers.
    pub fn primal_from_dual(&self, u: &[f64]) -> Vec<f64> {
        match self {
            SubproblemInput::MovingBalls {
                x, g0, l, constraints, weights,
            } => {
                let mut v = g0.clone();
                let mut denom = *l;
                for ((c, w), ui) in constraints.iter().zip(weights).zip(u) {
                    crate::linalg::axpy(*ui, &c.gradient, &mut v);
                    denom += ui * w;
                }
                x.iter().zip(&v).map(|(xi, vi)| xi - vi / denom).collect()
            }
            SubproblemInput::Esqm {
                x, g0, mu, constraints, q, ..
            }
            | SubproblemInput::Sl1qp {
                x, g0, mu, constraints, q, ..
            } => {
                let mut v = g0.clone();
                for (c, ui) in constraints.iter().zip(u) {
                    crate::linalg::axpy(*ui, &c.gradient, &mut v);
                }
                let mut y: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi - vi / mu).collect();
                q.project_in_place(&mut y);
                y
            }
        }
    }

    fn project_dual(&self, u: &mut [f64]) {
        match self {
            SubproblemInput::MovingBalls { .. } => u.iter_mut().for_each(|v| *v = v.max(0.0)),
            SubproblemInput::Esqm { beta, .. } => SimpleSet::SimplexCap { scale: *beta }.project_in_place(u),
            SubproblemInput::Sl1qp { beta, .. } => u.iter_mut().for_each(|v| *v = v.clamp(0.0, *beta)),
        }
    }

    /// Dual value and gradient at `u`, given `y = y(u)`.
    fn dual_eval(&self, u: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let x = self.x();
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let d2 = dot(&d, &d);
        match self {
            SubproblemInput::MovingBalls {
                g0, l, constraints, weights, ..
            } => {
                let grad: Vec<f64> = constraints
                    .iter()
                    .zip(weights)
                    .map(|(c, w)| c.test(&d) + 0.5 * w * d2)
                    .collect();
                (dot(g0, &d) + 0.5 * l * d2 + dot(u, &grad), grad)
            }
            SubproblemInput::Esqm { g0, mu, constraints, .. } | SubproblemInput::Sl1qp { g0, mu, constraints, .. } => {
                let grad: Vec<f64> = constraints.iter().map(|c| c.test(&d)).collect();
                (dot(g0, &d) + 0.5 * mu * d2 + dot(u, &grad), grad)
            }
        }
    }

    /// Slack variables recovered from `y`.
    pub fn slack_at(&self, y: &[f64]) -> Slack {
        let d: Vec<f64> = y.iter().zip(self.x()).map(|(a, b)| a - b).collect();
        match self {
            SubproblemInput::MovingBalls { .. } => Slack::None,
            SubproblemInput::Esqm { constraints, .. } => {
                Slack::Scalar(constraints.iter().fold(0.0_f64, |m, c| m.max(c.test(&d))))
            }
            SubproblemInput::Sl1qp { constraints, .. } => {
                Slack::PerConstraint(constraints.iter().map(|c| c.test(&d).max(0.0)).collect())
            }
        }
    }

    /// Primal-dual residual of `(y, u)` for this inner problem: the maximum of
    /// the projected stationarity residual of the Lagrangian, the constraint
    /// violation, and the complementarity products. Slacks are recovered
    /// from `y`.
    pub fn kkt_residual(&self, y: &[f64], u: &[f64]) -> f64 {
        let x = self.x();
        let d: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        match self {
            SubproblemInput::MovingBalls {
                g0, l, constraints, weights, ..
            } => {
                let d2 = dot(&d, &d);
                let mut v: Vec<f64> = g0.iter().zip(&d).map(|(g, di)| g + l * di).collect();
                let mut viol = 0.0_f64;
                let mut comp = 0.0_f64;
                for ((c, w), ui) in constraints.iter().zip(weights).zip(u) {
                    for (vj, (gj, dj)) in v.iter_mut().zip(c.gradient.iter().zip(&d)) {
                        *vj += ui * (gj + w * dj);
                    }
                    let q = c.test(&d) + 0.5 * w * d2;
                    viol = viol.max(q);
                    comp = comp.max((ui * q).abs());
                }
                let stat = SimpleSet::WholeSpace.stationarity_residual_unchecked(y, &v);
                stat.max(viol).max(comp)
            }
            SubproblemInput::Esqm {
                g0, beta, mu, constraints, q, ..
            } => {
                let stat = penalty_stationarity(q, y, g0, *mu, &d, constraints, u);
                let tests: Vec<f64> = constraints.iter().map(|c| c.test(&d)).collect();
                let s = tests.iter().fold(0.0_f64, |m, t| m.max(*t));
                let mut comp = ((beta - u.iter().sum::<f64>()) * s).abs();
                for (t, ui) in tests.iter().zip(u) {
                    comp = comp.max((ui * (s - t)).abs());
                }
                stat.max(comp)
            }
            SubproblemInput::Sl1qp {
                g0, beta, mu, constraints, q, ..
            } => {
                let stat = penalty_stationarity(q, y, g0, *mu, &d, constraints, u);
                let mut comp = 0.0_f64;
                for (c, ui) in constraints.iter().zip(u) {
                    let t = c.test(&d);
                    let s = t.max(0.0);
                    comp = comp.max((ui * (s - t)).abs()).max(((beta - ui) * s).abs());
                }
                stat.max(comp)
            }
        }
    }
}

fn penalty_stationarity(
    q: &SimpleSet,
    y: &[f64],
    g0: &[f64],
    mu: f64,
    d: &[f64],
    constraints: &[LinearizedConstraint],
    u: &[f64],
) -> f64 {
    let mut v: Vec<f64> = g0.iter().zip(d).map(|(g, di)| g + mu * di).collect();
    for (c, ui) in constraints.iter().zip(u) {
        crate::linalg::axpy(*ui, &c.gradient, &mut v);
    }
    q.stationarity_residual_unchecked(y, &v)
}

impl SubproblemInput {
    /// Complementarity in `min` form: `max_i |min(u_i, slack_i)|` over every
    /// multiplier and the slack of its constraint. Unlike the products in
    /// [`SubproblemInput::kkt_residual`] it does not fade when a multiplier is
    /// tiny, so it bounds the distance to the unique minimizer linearly.
    fn natural_complementarity(&self, y: &[f64], u: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(self.x()).map(|(a, b)| a - b).collect();
        let gap = |a: f64, b: f64| a.min(b.max(0.0)).abs();
        match self {
            SubproblemInput::MovingBalls { constraints, weights, .. } => {
                let d2 = dot(&d, &d);
                constraints
                    .iter()
                    .zip(weights)
                    .zip(u)
                    .map(|((c, w), ui)| gap(*ui, -(c.test(&d) + 0.5 * w * d2)))
                    .fold(0.0, f64::max)
            }
            SubproblemInput::Esqm { beta, constraints, .. } => {
                let tests: Vec<f64> = constraints.iter().map(|c| c.test(&d)).collect();
                let s = tests.iter().fold(0.0_f64, |m, t| m.max(*t));
                let spare = beta - u.iter().sum::<f64>();
                tests.iter().zip(u).map(|(t, ui)| gap(*ui, s - t)).fold(gap(spare, s), f64::max)
            }
            SubproblemInput::Sl1qp { beta, constraints, .. } => constraints
                .iter()
                .zip(u)
                .map(|(c, ui)| {
                    let t = c.test(&d);
                    let s = t.max(0.0);
                    gap(*ui, s - t).max(gap(beta - ui, s))
                })
                .fold(0.0, f64::max),
        }
    }
}

/// Recomputes the inner primal-dual residual of a solution from scratch.
pub fn subproblem_kkt_residual(solution: &SubproblemSolution, input: &SubproblemInput) -> f64 {
    input.kkt_residual(&solution.y, &solution.multipliers)
}

/// Solves the moving-balls inner problem at `x`.
pub fn mb_subproblem(
    x: &[f64],
    g0: &[f64],
    l: f64,
    constraints: &[LinearizedConstraint],
    weights: &[f64],
    settings: &InnerSettings,
) -> Result<SubproblemSolution, SubproblemError> {
    let input = SubproblemInput::MovingBalls {
        x: x.to_vec(),
        g0: g0.to_vec(),
        l,
        constraints: constraints.to_vec(),
        weights: weights.to_vec(),
    };
    solve(&input, settings)
}

/// Solves the l-infinity penalized ESQM inner problem at `x`.
pub fn esqm_subproblem(
    x: &[f64],
    g0: &[f64],
    beta: f64,
    mu: f64,
    constraints: &[LinearizedConstraint],
    q: &SimpleSet,
    settings: &InnerSettings,
) -> Result<SubproblemSolution, SubproblemError> {
    let input = SubproblemInput::Esqm {
        x: x.to_vec(),
        g0: g0.to_vec(),
        beta,
        mu,
        constraints: constraints.to_vec(),
        q: q.clone(),
    };
    solve(&input, settings)
}

/// Solves the l1 penalized Sl1QP inner problem at `x`.
pub fn sl1qp_subproblem(
    x: &[f64],
    g0: &[f64],
    beta: f64,
    mu: f64,
    constraints: &[LinearizedConstraint],
    q: &SimpleSet,
    settings: &InnerSettings,
) -> Result<SubproblemSolution, SubproblemError> {
    let input = SubproblemInput::Sl1qp {
        x: x.to_vec(),
        g0: g0.to_vec(),
        beta,
        mu,
        constraints: constraints.to_vec(),
        q: q.clone(),
    };
    solve(&input, settings)
}

struct DualPoint {
    u: Vec<f64>,
    y: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
}

impl DualPoint {
    fn at(input: &SubproblemInput, u: Vec<f64>) -> Self {
        let y = input.primal_from_dual(&u);
        let (value, grad) = input.dual_eval(&u, &y);
        DualPoint { u, y, value, grad }
    }
}

/// Runs the dual ascent for any of the three inner problems.
pub fn solve(input: &SubproblemInput, settings: &InnerSettings) -> Result<SubproblemSolution, SubproblemError> {
    input.validate()?;
    let m = input.constraints().len();
    let is_mb = matches!(input, SubproblemInput::MovingBalls { .. });

    let finish = |pt: &DualPoint, residual: f64, status, iterations, message: Option<String>| SubproblemSolution {
        y: pt.y.clone(),
        multipliers: pt.u.clone(),
        slack: input.slack_at(&pt.y),
        pd_residual: residual,
        status,
        iterations,
        message,
    };

    if let SubproblemInput::MovingBalls {
        x, constraints, weights, ..
    } = input
    {
        for (i, (c, w)) in constraints.iter().zip(weights).enumerate() {
            let ball = BallData::from_linearization(x, c, *w);
            if ball.squared_radius < -EMPTY_BALL_TOL {
                let pt = DualPoint::at(input, vec![0.0; m]);
                let msg = format!("ball {} is empty (r^2 = {:e})", i + 1, ball.squared_radius);
                return Ok(finish(&pt, f64::INFINITY, SubproblemStatus::Infeasible, 0, Some(msg)));
            }
        }
    }

    let mut u0 = match &settings.warm_start {
        Some(w) if w.len() == m => w.clone(),
        _ => vec![0.0; m],
    };
    input.project_dual(&mut u0);
    let mut cur = DualPoint::at(input, u0);
    // Solved needs the reported residual and the min-form complementarity
    // below the tolerance.
    let certified = |pt: &DualPoint, residual: f64| {
        residual <= settings.eps_sub && input.natural_complementarity(&pt.y, &pt.u) <= settings.eps_sub
    };
    let mut residual = input.kkt_residual(&cur.y, &cur.u);
    if certified(&cur, residual) || m == 0 {
        let status = if residual <= settings.eps_sub {
            SubproblemStatus::Solved
        } else {
            SubproblemStatus::MaxInnerIters
        };
        return Ok(finish(&cur, residual, status, 0, None));
    }

    let gsum: f64 = input.constraints().iter().map(|c| dot(&c.gradient, &c.gradient)).sum();
    let mut lip = gsum / input.modulus();
    if !(lip > 0.0) || !lip.is_finite() {
        lip = 1.0;
    }

    let mut t = 1.0_f64;
    let mut prev_u = cur.u.clone();
    let mut w = DualPoint::at(input, cur.u.clone());
    for it in 1..=settings.max_iters {
        let mut next;
        loop {
            let mut u: Vec<f64> = w.u.iter().zip(&w.grad).map(|(ui, gi)| ui + gi / lip).collect();
            input.project_dual(&mut u);
            next = DualPoint::at(input, u);
            let step: Vec<f64> = next.u.iter().zip(&w.u).map(|(a, b)| a - b).collect();
            let step2 = dot(&step, &step);
            let model = w.value + dot(&w.grad, &step) - 0.5 * lip * step2;
            let scale = 1.0 + w.value.abs().max(next.value.abs());
            // Near the optimum the value change drowns in roundoff; the
            // curvature along the step is then measured from gradients.
            let accept = if (next.value - w.value).abs() <= 1e-10 * scale {
                let curvature: f64 = w.grad.iter().zip(&next.grad).zip(&step).map(|((a, b), s)| (a - b) * s).sum();
                curvature <= lip * step2
            } else {
                next.value >= model - 1e-15 * scale
            };
            if accept || step2 == 0.0 {
                break;
            }
            lip *= 2.0;
            if !lip.is_finite() {
                break;
            }
        }

        if w.u != cur.u && next.value < cur.value - 1e-15 * (1.0 + cur.value.abs()) {
            // momentum overshoot: restart from the last accepted point
            t = 1.0;
            w = DualPoint::at(input, cur.u.clone());
            continue;
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta_mom = (t - 1.0) / t_next;
        prev_u.clone_from(&cur.u);
        cur = next;
        t = t_next;
        lip *= 0.95;

        residual = input.kkt_residual(&cur.y, &cur.u);
        if certified(&cur, residual) {
            return Ok(finish(&cur, residual, SubproblemStatus::Solved, it, None));
        }
        if is_mb && norm_inf(&cur.u) > settings.multiplier_cap {
            let msg = format!(
                "multipliers exceed cap {:e}; constraint qualification (MFQC) suspected to fail",
                settings.multiplier_cap
            );
            return Ok(finish(&cur, residual, SubproblemStatus::Infeasible, it, Some(msg)));
        }

        let mut wu: Vec<f64> = cur.u.iter().zip(&prev_u).map(|(a, b)| a + beta_mom * (a - b)).collect();
        input.project_dual(&mut wu);
        w = DualPoint::at(input, wu);
    }
    Ok(finish(
        &cur,
        residual,
        SubproblemStatus::MaxInnerIters,
        settings.max_iters,
        Some(format!("inner residual {residual:e} after {} iterations", settings.max_iters)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc(value: f64, gradient: &[f64]) -> LinearizedConstraint {
        LinearizedConstraint::new(value, gradient.to_vec())
    }

    #[test]
    fn mb_unconstrained_step() {
        let s = mb_subproblem(&[2.0, 0.0], &[2.0, 0.0], 1.0, &[], &[], &InnerSettings::default()).unwrap();
        assert_eq!(s.y, vec![0.0, 0.0]);
        assert!(s.multipliers.is_empty());
        assert_eq!(s.status, SubproblemStatus::Solved);
    }

    #[test]
    fn mb_one_ball_matches_grid_oracle() {
        // oracle: minimize (y-1) + (y-1)^2/2 over the feasible grid points
        // of -1 - (y-1) + (y-1)^2/2 <= 0, then u from stationarity
        let mut best = (f64::INFINITY, 0.0);
        let n = 2_000_000;
        for k in 0..=n {
            let y = -1.0 + 3.0 * k as f64 / n as f64;
            let d = y - 1.0;
            if -1.0 - d + 0.5 * d * d <= 0.0 {
                let v = d + 0.5 * d * d;
                if v < best.0 {
                    best = (v, y);
                }
            }
        }
        let y_star = best.1;
        // 1 + (y - 1) + u (-1 + (y - 1)) = 0
        let u_star = y_star / (2.0 - y_star);

        let s = mb_subproblem(&[1.0], &[1.0], 1.0, &[lc(-1.0, &[-1.0])], &[1.0], &InnerSettings::default()).unwrap();
        assert_eq!(s.status, SubproblemStatus::Solved);
        assert!((s.y[0] - y_star).abs() < 2e-6);
        assert!((s.multipliers[0] - u_star).abs() < 2e-6);
        assert!((s.y[0] - (2.0 - 3f64.sqrt())).abs() < 1e-9);
        assert!((s.multipliers[0] - (2.0 - 3f64.sqrt()) / 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn mb_interior_fixed_point() {
        let s = mb_subproblem(
            &[0.2, 0.1],
            &[0.0, 0.0],
            3.0,
            &[lc(-0.5, &[1.0, 0.0]), lc(-1.0, &[0.0, 2.0])],
            &[1.0, 2.0],
            &InnerSettings::default(),
        )
        .unwrap();
        assert_eq!(s.y, vec![0.2, 0.1]);
        assert_eq!(s.multipliers, vec![0.0, 0.0]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn mb_empty_ball_is_infeasible() {
        // c = 1 > |g|^2/(2L) = 0.5
        let s = mb_subproblem(&[0.0], &[1.0], 1.0, &[lc(1.0, &[1.0])], &[1.0], &InnerSettings::default()).unwrap();
        assert_eq!(s.status, SubproblemStatus::Infeasible);
    }

    #[test]
    fn mb_tangent_balls_hit_multiplier_cap_or_stall() {
        // balls (x1 -/+ 1)^2 + x2^2 <= 1 touch only at the origin
        let settings = InnerSettings {
            max_iters: 20_000,
            ..InnerSettings::default()
        };
        let s = mb_subproblem(
            &[0.0, 0.0],
            &[0.0, -1.0],
            1.0,
            &[lc(0.0, &[-2.0, 0.0]), lc(0.0, &[2.0, 0.0])],
            &[2.0, 2.0],
            &settings,
        )
        .unwrap();
        assert_ne!(s.status, SubproblemStatus::Solved);
    }

    #[test]
    fn esqm_inactive_penalty() {
        let s = esqm_subproblem(&[0.0], &[1.0], 5.0, 1.0, &[lc(-10.0, &[1.0])], &SimpleSet::WholeSpace, &InnerSettings::default()).unwrap();
        assert_eq!(s.y, vec![-1.0]);
        assert_eq!(s.slack, Slack::Scalar(0.0));
        assert_eq!(s.multipliers, vec![0.0]);
    }

    #[test]
    fn esqm_fixed_point() {
        let q = SimpleSet::new_box(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let s = esqm_subproblem(&[0.5, 0.5], &[0.0, 0.0], 1.0, 2.0, &[lc(-1.0, &[1.0, 1.0])], &q, &InnerSettings::default()).unwrap();
        assert_eq!(s.y, vec![0.5, 0.5]);
        assert_eq!(s.slack, Slack::Scalar(0.0));
        assert_eq!(s.multipliers, vec![0.0]);
    }

    #[test]
    fn esqm_interior_dual_matches_grid_oracle() {
        // oracle: max-form objective 2*max(0, 1 + y) + y^2/2 on a grid
        let mut best = (f64::INFINITY, 0.0);
        let n = 400_000;
        for k in 0..=n {
            let y = -3.0 + 4.0 * k as f64 / n as f64;
            let v = 2.0 * (1.0 + y).max(0.0) + 0.5 * y * y;
            if v < best.0 {
                best = (v, y);
            }
        }
        assert!((best.1 + 1.0).abs() < 1e-5);
        let s = esqm_subproblem(&[0.0], &[0.0], 2.0, 1.0, &[lc(1.0, &[1.0])], &SimpleSet::WholeSpace, &InnerSettings::default()).unwrap();
        assert_eq!(s.status, SubproblemStatus::Solved);
        assert!((s.y[0] - best.1).abs() < 1e-5);
        assert!((s.multipliers[0] - 1.0).abs() < 1e-9);
        match s.slack {
            Slack::Scalar(v) => assert!(v.abs() < 1e-9),
            _ => unreachable!(),
        }
    }

    #[test]
    fn sl1qp_inactive_penalty_coincides_with_esqm() {
        let s = sl1qp_subproblem(&[0.0], &[1.0], 5.0, 1.0, &[lc(-10.0, &[1.0])], &SimpleSet::WholeSpace, &InnerSettings::default()).unwrap();
        assert_eq!(s.y, vec![-1.0]);
        assert_eq!(s.slack, Slack::PerConstraint(vec![0.0]));
        assert_eq!(s.multipliers, vec![0.0]);
    }

    #[test]
    fn sl1qp_two_violated_constraints_match_grid_oracle() {
        // constraints 1 + y1 <= s1 and 2 - y2 <= s2 at x = 0, beta = 10;
        // the linearized equalities give y = (-1, 2)
        let cons = [lc(1.0, &[1.0, 0.0]), lc(2.0, &[0.0, -1.0])];
        let (beta, mu) = (10.0, 1.0);
        let obj = |y: &[f64]| beta * ((1.0 + y[0]).max(0.0) + (2.0 - y[1]).max(0.0)) + 0.5 * mu * (y[0] * y[0] + y[1] * y[1]);
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        let n = 800;
        for i in 0..=n {
            for j in 0..=n {
                let y = [-2.0 + 2.0 * i as f64 / n as f64, 1.0 + 2.0 * j as f64 / n as f64];
                let v = obj(&y);
                if v < best.0 {
                    best = (v, y);
                }
            }
        }
        let s = sl1qp_subproblem(&[0.0, 0.0], &[0.0, 0.0], beta, mu, &cons, &SimpleSet::WholeSpace, &InnerSettings::default()).unwrap();
        assert_eq!(s.status, SubproblemStatus::Solved);
        assert!((s.y[0] - best.1[0]).abs() < 5e-3 && (s.y[1] - best.1[1]).abs() < 5e-3);
        assert!((s.y[0] + 1.0).abs() < 1e-9 && (s.y[1] - 2.0).abs() < 1e-9);
        assert!(s.multipliers.iter().all(|u| *u > 0.0 && *u < beta));
    }

    #[test]
    fn sl1qp_fixed_point() {
        let s = sl1qp_subproblem(&[0.3], &[0.0], 1.0, 1.0, &[lc(-0.3, &[1.0])], &SimpleSet::WholeSpace, &InnerSettings::default()).unwrap();
        assert_eq!(s.y, vec![0.3]);
        assert_eq!(s.slack, Slack::PerConstraint(vec![0.0]));
    }

    #[test]
    fn residual_recomputation_is_consistent() {
        let input = SubproblemInput::MovingBalls {
            x: vec![1.0],
            g0: vec![1.0],
            l: 1.0,
            constraints: vec![lc(-1.0, &[-1.0])],
            weights: vec![1.0],
        };
        let s = solve(&input, &InnerSettings::default()).unwrap();
        let r = subproblem_kkt_residual(&s, &input);
        assert!((r - s.pd_residual).abs() <= 1e-12);
        assert!(r <= 1e-10);

        let mut moved = s.clone();
        moved.y[0] += 1e-3;
        assert!(subproblem_kkt_residual(&moved, &input) > 1e-10);
    }

    #[test]
    fn ball_data_matches_linearization() {
        let b = BallData::from_linearization(&[1.0, 0.0], &lc(-1.0, &[2.0, 0.0]), 2.0);
        assert_eq!(b.center, vec![0.0, 0.0]);
        assert_eq!(b.squared_radius, 2.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(mb_subproblem(&[0.0], &[1.0], 0.0, &[], &[], &InnerSettings::default()).is_err());
        assert!(esqm_subproblem(&[0.0], &[1.0], 0.0, 1.0, &[], &SimpleSet::WholeSpace, &InnerSettings::default()).is_err());
        assert!(sl1qp_subproblem(&[0.0], &[1.0, 2.0], 1.0, 1.0, &[], &SimpleSet::WholeSpace, &InnerSettings::default()).is_err());
    }
}
