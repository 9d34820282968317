//! The generic majorization-minimization loop with gradient projection on a
//! user-supplied (non-polynomial) objective over a ball.

use std::sync::Arc;

use mmp_nlp::mmp::{descent_check, run_mmp, sandwich_check, GradientProjection, StopCriteria};
use mmp_nlp::problem::{NlpProblem, ScalarField, SmoothFunction};
use mmp_nlp::sets::SimpleSet;

/// `log(1 + |x - a|^2)`, whose gradient is 2-Lipschitz.
#[derive(Debug)]
struct LogDistance {
    a: Vec<f64>,
}

impl ScalarField for LogDistance {
    fn dimension(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.a).map(|(x, a)| (x - a).powi(2)).sum();
        r2.ln_1p()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r2: f64 = x.iter().zip(&self.a).map(|(x, a)| (x - a).powi(2)).sum();
        x.iter().zip(&self.a).map(|(x, a)| 2.0 * (x - a) / (1.0 + r2)).collect()
    }
}

fn main() {
    let f = SmoothFunction::custom(Arc::new(LogDistance { a: vec![3.0, 4.0] }), 2.0).unwrap();
    let q = SimpleSet::new_ball(vec![0.0, 0.0], 1.0).unwrap();
    let problem = NlpProblem::new("log-distance", f, vec![], q).unwrap();
    let mut oracle = GradientProjection::new(problem).unwrap();
    let res = run_mmp(&mut oracle, &[-1.0, 0.0], &StopCriteria::default(), &mut []).unwrap();
    let x = &res.final_state.x;
    println!("{:?} after {} steps at ({:.8}, {:.8}); expected (0.6, 0.8)", res.status, res.trace.len(), x[0], x[1]);
    let rows = res.monitored_trace();
    println!(
        "sandwich violations: {}, descent violations: {}",
        sandwich_check(&rows, 1e-9).len(),
        descent_check(&rows, 1e-9).len()
    );
}
