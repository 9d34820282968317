//! Shared helpers for the integration tests: random inner problems and an
//! independent grid oracle for them.
//!
//! The oracle does not call the library's solvers or model code. It searches
//! the Lagrangian dual of the inner problem on a zooming integer lattice whose
//! points lie exactly on the faces of the dual feasible set, recovers the
//! primal point in closed form, and certifies it by the duality gap computed
//! from its own primal formula.

#![allow(dead_code)]

use mmp_nlp::sets::SimpleSet;
use mmp_nlp::subproblem::{
    esqm_subproblem, mb_subproblem, sl1qp_subproblem, InnerSettings, LinearizedConstraint, SubproblemSolution,
};
use rand::rngs::StdRng;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    MovingBalls,
    Esqm,
    Sl1qp,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: Kind,
    pub x: Vec<f64>,
    pub g0: Vec<f64>,
    pub c: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    /// `L` for moving balls, `mu` for the penalty problems.
    pub modulus: f64,
    /// Ball weights `L_i` (moving balls only).
    pub weights: Vec<f64>,
    pub beta: f64,
    pub q: SimpleSet,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nrm2(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn uniform_vec(rng: &mut StdRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn random_set(rng: &mut StdRng, n: usize) -> SimpleSet {
    match rng.gen_range(0..6) {
        0 => SimpleSet::WholeSpace,
        1 => {
            let lo = uniform_vec(rng, n, -1.5, -0.1);
            let hi = lo.iter().map(|l| l + rng.gen_range(0.2..2.0)).collect();
            SimpleSet::new_box(lo, hi).unwrap()
        }
        2 => SimpleSet::new_ball(uniform_vec(rng, n, -0.5, 0.5), rng.gen_range(0.3..1.5)).unwrap(),
        3 => SimpleSet::new_simplex(rng.gen_range(0.5..2.0)).unwrap(),
        4 => SimpleSet::new_simplex_cap(rng.gen_range(0.5..2.0)).unwrap(),
        _ => SimpleSet::NonnegOrthant,
    }
}

impl Instance {
    pub fn random(kind: Kind, rng: &mut StdRng) -> Instance {
        let n = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let g0 = uniform_vec(rng, n, -2.0, 2.0);
        let g = (0..m).map(|_| uniform_vec(rng, n, -2.0, 2.0)).collect();
        match kind {
            Kind::MovingBalls => Instance {
                kind,
                x: uniform_vec(rng, n, -1.0, 1.0),
                g0,
                // strictly feasible at d = 0, which bounds the multipliers
                c: uniform_vec(rng, m, -1.0, -0.05),
                g,
                modulus: rng.gen_range(0.5..3.0),
                weights: uniform_vec(rng, m, 0.5, 3.0),
                beta: 0.0,
                q: SimpleSet::WholeSpace,
            },
            Kind::Esqm | Kind::Sl1qp => {
                let q = random_set(rng, n);
                let x = q.project(&uniform_vec(rng, n, -1.5, 1.5)).unwrap();
                Instance {
                    kind,
                    x,
                    g0,
                    c: uniform_vec(rng, m, -1.0, 1.0),
                    g,
                    modulus: rng.gen_range(0.5..4.0),
                    weights: vec![],
                    beta: rng.gen_range(0.5..3.0),
                    q,
                }
            }
        }
    }

    pub fn linearized(&self) -> Vec<LinearizedConstraint> {
        self.c.iter().zip(&self.g).map(|(c, g)| LinearizedConstraint::new(*c, g.clone())).collect()
    }

    pub fn solve(&self, settings: &InnerSettings) -> SubproblemSolution {
        let cons = self.linearized();
        let r = match self.kind {
            Kind::MovingBalls => mb_subproblem(&self.x, &self.g0, self.modulus, &cons, &self.weights, settings),
            Kind::Esqm => esqm_subproblem(&self.x, &self.g0, self.beta, self.modulus, &cons, &self.q, settings),
            Kind::Sl1qp => sl1qp_subproblem(&self.x, &self.g0, self.beta, self.modulus, &cons, &self.q, settings),
        };
        r.expect("valid inner problem")
    }

    fn lin(&self, i: usize, d: &[f64]) -> f64 {
        self.c[i] + dot(&self.g[i], d)
    }

    /// Largest constraint violation of `y` (ball constraints for moving
    /// balls, distance to `Q` otherwise).
    pub fn violation(&self, y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(&self.x).map(|(a, b)| a - b).collect();
        match self.kind {
            Kind::MovingBalls => (0..self.c.len())
                .map(|i| self.lin(i, &d) + 0.5 * self.weights[i] * nrm2(&d))
                .fold(0.0, f64::max),
            _ => distance(y, &self.q.project(y).unwrap()),
        }
    }

    /// Primal objective in the shifted variable `d = y - x`.
    pub fn primal(&self, y: &[f64]) -> f64 {
        let d: Vec<f64> = y.iter().zip(&self.x).map(|(a, b)| a - b).collect();
        let smooth = dot(&self.g0, &d) + 0.5 * self.modulus * nrm2(&d);
        let m = self.c.len();
        smooth
            + match self.kind {
                Kind::MovingBalls => 0.0,
                Kind::Esqm => self.beta * (0..m).map(|i| self.lin(i, &d)).fold(0.0, f64::max),
                Kind::Sl1qp => self.beta * (0..m).map(|i| self.lin(i, &d).max(0.0)).sum::<f64>(),
            }
    }

    /// Dual function at `u` and the Lagrangian minimizer.
    pub fn dual(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let n = self.x.len();
        let mut v = self.g0.clone();
        for (ui, gi) in u.iter().zip(&self.g) {
            for j in 0..n {
                v[j] += ui * gi[j];
            }
        }
        let uc = dot(u, &self.c);
        match self.kind {
            Kind::MovingBalls => {
                let w = self.modulus + dot(u, &self.weights);
                let y = self.x.iter().zip(&v).map(|(x, vj)| x - vj / w).collect();
                (uc - nrm2(&v) / (2.0 * w), y)
            }
            _ => {
                let mu = self.modulus;
                let target: Vec<f64> = self.x.iter().zip(&v).map(|(x, vj)| x - vj / mu).collect();
                let y = self.q.project(&target).unwrap();
                let d: Vec<f64> = y.iter().zip(&self.x).map(|(a, b)| a - b).collect();
                (uc + dot(&v, &d) + 0.5 * mu * nrm2(&d), y)
            }
        }
    }

    /// Side length of the dual search box.
    fn dual_bound(&self) -> f64 {
        match self.kind {
            Kind::MovingBalls => {
                // Slater at d = 0: sum u <= (P(0) - D(0)) / min_i |c_i|
                let sigma = self.c.iter().fold(f64::INFINITY, |a, c| a.min(-c));
                nrm2(&self.g0) / (2.0 * self.modulus * sigma)
            }
            _ => self.beta,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub dual_value: f64,
    pub primal_value: f64,
}

fn lattice(m: usize, lo: &[i64], hi: &[i64], mut visit: impl FnMut(&[i64])) {
    let mut z = lo.to_vec();
    if (0..m).any(|i| lo[i] > hi[i]) {
        return;
    }
    loop {
        visit(&z);
        let mut i = 0;
        loop {
            if i == m {
                return;
            }
            if z[i] < hi[i] {
                z[i] += 1;
                break;
            }
            z[i] = lo[i];
            i += 1;
        }
    }
}

/// Maximizes the dual on a zooming lattice: `N` cells per side at the first
/// level, then a `(2K+1)^m` window refined by 4 around the incumbent.
pub fn dual_grid_oracle(inst: &Instance) -> OracleSolution {
    const N: i64 = 12;
    const K: i64 = 6;
    const LEVELS: u32 = 19;
    let m = inst.c.len();
    let bound = inst.dual_bound();
    let simplex_face = inst.kind == Kind::Esqm;
    let admissible = |z: &[i64], cap: i64| z.iter().all(|v| *v >= 0 && *v <= cap) && (!simplex_face || z.iter().sum::<i64>() <= cap);

    let mut best_z = vec![0_i64; m];
    let mut best = f64::NEG_INFINITY;
    let mut h = bound / N as f64;
    let mut cap = N;
    let eval = |z: &[i64], h: f64| -> f64 {
        let u: Vec<f64> = z.iter().map(|v| *v as f64 * h).collect();
        inst.dual(&u).0
    };
    lattice(m, &vec![0; m], &vec![N; m], |z| {
        if admissible(z, cap) {
            let v = eval(z, h);
            if v > best {
                best = v;
                best_z = z.to_vec();
            }
        }
    });
    for _ in 0..LEVELS {
        h /= 4.0;
        cap *= 4;
        best_z = best_z.iter().map(|v| v * 4).collect();
        // Walk at this resolution until the incumbent is interior to its
        // window, then refine.
        for _ in 0..1000 {
            let center = best_z.clone();
            let lo: Vec<i64> = center.iter().map(|c| c - K).collect();
            let hi: Vec<i64> = center.iter().map(|c| c + K).collect();
            lattice(m, &lo, &hi, |z| {
                if admissible(z, cap) {
                    let v = eval(z, h);
                    if v > best {
                        best = v;
                        best_z = z.to_vec();
                    }
                }
            });
            if best_z.iter().zip(&center).all(|(b, c)| (b - c).abs() < K) {
                break;
            }
        }
    }
    let u: Vec<f64> = best_z.iter().map(|v| *v as f64 * h).collect();
    let (dual_value, y) = inst.dual(&u);
    OracleSolution {
        primal_value: inst.primal(&y),
        y,
        u,
        dual_value,
    }
}
