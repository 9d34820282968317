//! Independent checks: KKT residuals of the original program, the
//! Mangasarian-Fromovitz qualification condition, convergence-rate
//! classification from iterate traces, and a brute-force grid solver for
//! small instances.

use thiserror::Error;

use crate::linalg::{dist, dot, norm};
use crate::poly::AxisBox;
use crate::problem::NlpProblem;
use crate::sets::SimpleSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("point violates the constraints by {0:e}")]
    Infeasible(f64),
    #[error("trace has {got} points, at least {need} are required")]
    TraceTooShort { got: usize, need: usize },
    #[error("grid oracle supports dimension <= 3, got {0}")]
    DimensionTooLarge(usize),
    #[error("no feasible grid point found")]
    NoFeasiblePoint,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `|x - P_Q(x - (grad f + sum lambda_i grad f_i))|`
    pub stationarity: f64,
    /// `max_i max(f_i(x), 0)`
    pub feasibility: f64,
    /// `max_i |lambda_i f_i(x)|`
    pub complementarity: f64,
    pub multipliers: Vec<f64>,
}

impl KktReport {
    pub fn max_residual(&self) -> f64 {
        self.stationarity.max(self.feasibility).max(self.complementarity)
    }
}

/// KKT residuals of `(x, lambda)` for the original program.
pub fn kkt_residual(problem: &NlpProblem, x: &[f64], lambda: &[f64]) -> KktReport {
    let mut v = problem.objective.gradient(x);
    let mut feasibility = 0.0_f64;
    let mut complementarity = 0.0_f64;
    for (c, &l) in problem.constraints.iter().zip(lambda) {
        let fi = c.value(x);
        crate::linalg::axpy(l, &c.gradient(x), &mut v);
        feasibility = feasibility.max(fi);
        complementarity = complementarity.max((l * fi).abs());
    }
    // constraints without a multiplier still count for feasibility
    for c in problem.constraints.iter().skip(lambda.len()) {
        feasibility = feasibility.max(c.value(x));
    }
    KktReport {
        stationarity: problem.simple_set.stationarity_residual_unchecked(x, &v),
        feasibility,
        complementarity,
        multipliers: lambda.to_vec(),
    }
}

/// Hull distances at or below this value mean MFQC fails.
pub const MFQC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MfqcReport {
    /// Zero-based indices of the active constraints.
    pub active_set: Vec<usize>,
    /// Distance from the origin to the convex hull of the active gradients;
    /// `f64::MAX` when nothing is active.
    pub hull_distance: f64,
    pub satisfied: bool,
    /// Set when `Q` is not the whole space: only the gradient hull was
    /// examined, not the normal cone of `Q`.
    pub partial: bool,
}

/// Checks the Mangasarian-Fromovitz condition at a feasible `x`.
pub fn check_mfqc(problem: &NlpProblem, x: &[f64], active_tol: f64) -> Result<MfqcReport, DiagnosticsError> {
    let viol = problem.max_violation(x);
    if viol > active_tol {
        return Err(DiagnosticsError::Infeasible(viol));
    }
    let active_set: Vec<usize> = problem
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.value(x).abs() <= active_tol)
        .map(|(i, _)| i)
        .collect();
    let partial = !matches!(problem.simple_set, SimpleSet::WholeSpace);
    if active_set.is_empty() {
        return Ok(MfqcReport {
            active_set,
            hull_distance: f64::MAX,
            satisfied: true,
            partial,
        });
    }
    let grads: Vec<Vec<f64>> = active_set.iter().map(|&i| problem.constraints[i].gradient(x)).collect();
    let hull_distance = min_norm_in_hull(&grads);
    Ok(MfqcReport {
        active_set,
        hull_distance,
        satisfied: hull_distance > MFQC_TOL,
        partial,
    })
}

/// Largest number of faces tried by exact enumeration.
const HULL_FACE_LIMIT: usize = 200_000;

/// `min_{u in unit simplex} |sum u_i g_i|`.
///
/// The minimizer is a convex combination of at most `n + 1` gradients, so
/// every face of that size is tried: the minimizer over the affine hull of
/// the face solves a bordered Gram system, its weights are clipped back onto
/// the simplex, and the smallest resulting norm wins. Every candidate is a
/// point of the hull and the face holding the true minimizer reproduces it,
/// so the result is exact up to roundoff. When there are more than
/// [`HULL_FACE_LIMIT`] faces, Wolfe's minimum-norm-point algorithm is used.
pub fn min_norm_in_hull(grads: &[Vec<f64>]) -> f64 {
    let m = grads.len();
    if m == 0 {
        return f64::MAX;
    }
    let n = grads[0].len();
    let combo = |u: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (g, ui) in grads.iter().zip(u) {
            crate::linalg::axpy(*ui, g, &mut v);
        }
        v
    };
    let largest = m.min(n + 1);
    let mut faces = 0_usize;
    let mut binom = 1_usize;
    for k in 1..=largest {
        binom = binom.saturating_mul(m + 1 - k) / k;
        faces = faces.saturating_add(binom);
    }
    if faces > HULL_FACE_LIMIT {
        return norm(&combo(&hull_weights_wolfe(grads)));
    }
    let mut best = f64::INFINITY;
    for_each_subset(m, largest, &mut |face: &[usize]| {
        let k = face.len();
        // [G^T G  1; 1^T 0] [w; nu] = [0; 1]
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        for (r, &i) in face.iter().enumerate() {
            for (c, &j) in face.iter().enumerate() {
                a[r][c] = dot(&grads[i], &grads[j]);
            }
            a[r][k] = 1.0;
            a[k][r] = 1.0;
        }
        let mut rhs = vec![0.0; k + 1];
        rhs[k] = 1.0;
        let Some(sol) = crate::linalg::solve_dense(a, rhs) else {
            return;
        };
        let mut u = vec![0.0; m];
        for (&i, w) in face.iter().zip(&sol) {
            u[i] = w.max(0.0);
        }
        let total: f64 = u.iter().sum();
        if total > 0.0 {
            u.iter_mut().for_each(|v| *v /= total);
            best = best.min(norm(&combo(&u)));
        }
    });
    best
}

/// Calls `visit` on every nonempty subset of `0..m` with at most `largest`
/// elements, in increasing lexicographic order.
fn for_each_subset(m: usize, largest: usize, visit: &mut dyn FnMut(&[usize])) {
    fn extend(start: usize, m: usize, largest: usize, current: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        for i in start..m {
            current.push(i);
            visit(current);
            if current.len() < largest {
                extend(i + 1, m, largest, current, visit);
            }
            current.pop();
        }
    }
    extend(0, m, largest, &mut Vec::new(), visit);
}

/// Wolfe's minimum-norm-point algorithm; returns the weights.
fn hull_weights_wolfe(grads: &[Vec<f64>]) -> Vec<f64> {
    let m = grads.len();
    let n = grads[0].len();
    let combo = |lam: &[(usize, f64)]| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (i, w) in lam {
            crate::linalg::axpy(*w, &grads[*i], &mut v);
        }
        v
    };
    let scale = grads.iter().map(|g| dot(g, g)).fold(0.0_f64, f64::max);
    let tol = 1e-14 * scale.max(f64::MIN_POSITIVE);
    let start = (0..m).min_by(|&i, &j| dot(&grads[i], &grads[i]).total_cmp(&dot(&grads[j], &grads[j]))).unwrap_or(0);
    let mut lam: Vec<(usize, f64)> = vec![(start, 1.0)];
    let mut x = combo(&lam);
    'major: for _ in 0..(10 * m + 100) {
        let (j, xj) = (0..m)
            .map(|i| (i, dot(&x, &grads[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap_or((start, 0.0));
        if dot(&x, &x) - xj <= tol || lam.iter().any(|(i, _)| *i == j) {
            break;
        }
        lam.push((j, 0.0));
        loop {
            // minimizer over the affine hull of the current face
            let k = lam.len();
            let mut a = vec![vec![0.0; k + 1]; k + 1];
            for r in 0..k {
                for c in 0..k {
                    a[r][c] = dot(&grads[lam[r].0], &grads[lam[c].0]);
                }
                a[r][k] = 1.0;
                a[k][r] = 1.0;
            }
            let mut rhs = vec![0.0; k + 1];
            rhs[k] = 1.0;
            let Some(alpha) = crate::linalg::solve_dense(a, rhs) else {
                lam.pop();
                break 'major;
            };
            if alpha[..k].iter().all(|v| *v > 0.0) {
                for (l, w) in lam.iter_mut().zip(&alpha) {
                    l.1 = *w;
                }
                x = combo(&lam);
                break;
            }
            // move toward the affine minimizer until a weight hits zero
            let theta = lam
                .iter()
                .zip(&alpha)
                .filter(|(_, a)| **a <= 0.0)
                .map(|((_, l), a)| l / (l - a))
                .fold(1.0_f64, f64::min);
            for (l, w) in lam.iter_mut().zip(&alpha) {
                l.1 = (1.0 - theta) * l.1 + theta * w;
            }
            let before = lam.len();
            lam.retain(|(_, w)| *w > 1e-15);
            if lam.len() == before {
                // numerically stuck: drop the smallest weight
                let (pos, _) = lam.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).unwrap();
                lam.remove(pos);
            }
            let total: f64 = lam.iter().map(|(_, w)| w).sum();
            lam.iter_mut().for_each(|l| l.1 /= total);
        }
    }
    let mut u = vec![0.0; m];
    for (i, w) in lam {
        u[i] = w;
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateRegime {
    FiniteSteps,
    /// `|x_k - x_inf| = O(q^k)`
    Geometric { q: f64 },
    /// `|x_k - x_inf| = O(k^-gamma)`
    Power { gamma: f64 },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub regime: RateRegime,
    /// Coefficient of determination of the selected fit.
    pub fit_quality: f64,
    /// First trace index used by the fit (or the first zero distance).
    pub tail_start: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConfig {
    pub min_fit_quality: f64,
    /// Trailing points dropped before fitting; near the reference point
    /// the distances are dominated by its own error.
    pub exclude_last: usize,
    pub min_len: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig {
            min_fit_quality: 0.9,
            exclude_last: 3,
            min_len: 10,
        }
    }
}

/// Classifies the convergence of `points` towards `x_ref` (usually the
/// final iterate) with the default configuration.
pub fn estimate_rate(points: &[Vec<f64>], x_ref: &[f64]) -> Result<RateEstimate, DiagnosticsError> {
    estimate_rate_with(points, x_ref, &RateConfig::default())
}

pub fn estimate_rate_with(points: &[Vec<f64>], x_ref: &[f64], cfg: &RateConfig) -> Result<RateEstimate, DiagnosticsError> {
    if let Some(p) = points.iter().find(|p| p.len() != x_ref.len()) {
        return Err(DiagnosticsError::DimensionMismatch {
            expected: x_ref.len(),
            got: p.len(),
        });
    }
    let d: Vec<f64> = points.iter().map(|p| dist(p, x_ref)).collect();
    let zero = 4.0 * f64::EPSILON * norm(x_ref).max(1.0);
    rate_from_distances(&d, zero, cfg)
}

/// Classification from the distances `d_k` directly. Distances at or below
/// `zero` count as exact hits.
///
/// A trace whose last two (or more) distances are zero converged in finitely
/// many steps; this is decided for any length. Otherwise `log d_k` is fitted
/// against `k` (geometric) and against `log(k + 1)` (power) over the last
/// half of the trace, and the fit with the larger coefficient of
/// determination wins.
pub fn rate_from_distances(d: &[f64], zero: f64, cfg: &RateConfig) -> Result<RateEstimate, DiagnosticsError> {
    let trailing_zeros = d.iter().rev().take_while(|v| **v <= zero).count();
    if trailing_zeros >= 2 {
        return Ok(RateEstimate {
            regime: RateRegime::FiniteSteps,
            fit_quality: 1.0,
            tail_start: d.len() - trailing_zeros,
        });
    }
    if d.len() < cfg.min_len {
        return Err(DiagnosticsError::TraceTooShort {
            got: d.len(),
            need: cfg.min_len,
        });
    }
    let end = d.len().saturating_sub(cfg.exclude_last).max(4);
    let start = (d.len() / 2).min(end.saturating_sub(4));
    let tail: Vec<(f64, f64)> = (start..end).filter(|&k| d[k] > zero).map(|k| (k as f64, d[k].ln())).collect();
    if tail.len() < 3 {
        return Ok(RateEstimate {
            regime: RateRegime::Inconclusive,
            fit_quality: 0.0,
            tail_start: start,
        });
    }
    let (geo_slope, geo_r2) = linear_fit(tail.iter().map(|&(k, l)| (k, l)));
    let (pow_slope, pow_r2) = linear_fit(tail.iter().map(|&(k, l)| ((k + 1.0).ln(), l)));
    let geo = (geo_slope < 0.0).then_some(geo_r2);
    let pow = (pow_slope < 0.0).then_some(pow_r2);
    let (regime, quality) = match (geo, pow) {
        (Some(g), Some(p)) if g >= p => (RateRegime::Geometric { q: geo_slope.exp() }, g),
        (_, Some(p)) => (RateRegime::Power { gamma: -pow_slope }, p),
        (Some(g), None) => (RateRegime::Geometric { q: geo_slope.exp() }, g),
        (None, None) => (RateRegime::Inconclusive, 0.0),
    };
    let regime = if quality < cfg.min_fit_quality {
        RateRegime::Inconclusive
    } else {
        regime
    };
    Ok(RateEstimate {
        regime,
        fit_quality: quality,
        tail_start: start,
    })
}

/// Least-squares slope and coefficient of determination.
fn linear_fit(points: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return (0.0, 0.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, r2.clamp(0.0, 1.0))
}

/// Dense-grid minimizer of `f` over `{x in Q : f_i(x) <= 0}` within
/// `search_box`, followed by one finer pass around the best point. Each grid
/// point is projected onto `Q` before evaluation. The accuracy is about
/// `width / resolution`.
pub fn oracle_solve(problem: &NlpProblem, search_box: &AxisBox, resolution: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let n = problem.dimension();
    if n > 3 {
        return Err(DiagnosticsError::DimensionTooLarge(n));
    }
    if search_box.dimension() != n {
        return Err(DiagnosticsError::DimensionMismatch {
            expected: n,
            got: search_box.dimension(),
        });
    }
    let res = resolution.max(2);
    let coarse = grid_pass(problem, &search_box.lower, &search_box.upper, res).ok_or(DiagnosticsError::NoFeasiblePoint)?;
    let h: Vec<f64> = (0..n)
        .map(|i| (search_box.upper[i] - search_box.lower[i]) / (res - 1) as f64)
        .collect();
    let lo: Vec<f64> = (0..n).map(|i| coarse.1[i] - h[i]).collect();
    let hi: Vec<f64> = (0..n).map(|i| coarse.1[i] + h[i]).collect();
    let fine = grid_pass(problem, &lo, &hi, res);
    Ok(match fine {
        Some(f) if f.0 < coarse.0 => f.1,
        _ => coarse.1,
    })
}

fn grid_pass(problem: &NlpProblem, lo: &[f64], hi: &[f64], res: usize) -> Option<(f64, Vec<f64>)> {
    let n = lo.len();
    let total = res.pow(n as u32);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut z = vec![0.0; n];
    for idx in 0..total {
        let mut r = idx;
        for i in 0..n {
            let j = r % res;
            r /= res;
            z[i] = lo[i] + (hi[i] - lo[i]) * j as f64 / (res - 1) as f64;
        }
        let mut p = z.clone();
        problem.simple_set.project_in_place(&mut p);
        if problem.constraints.iter().any(|c| c.value(&p) > 0.0) {
            continue;
        }
        let v = problem.objective.value(&p);
        if best.as_ref().map_or(true, |b| v < b.0) {
            best = Some((v, p));
        }
    }
    best
}
