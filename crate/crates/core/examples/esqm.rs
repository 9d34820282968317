//! ESQM from an infeasible start: the penalty grows until the linearized
//! constraints can be met, then stays fixed.

use mmp_nlp::methods::{esqm_step, merit_linf, PenaltyConfig, PenaltyKind};
use mmp_nlp::problems::builtin;

fn main() {
    let b = builtin("box-qp").unwrap();
    let config = PenaltyConfig::new(b.problem.clone(), PenaltyKind::Esqm);
    println!("lambda = {}, lambda' = {}", config.lambda(), config.lambda_prime());
    let mut state = config.initial_state();
    let mut x = b.x0.clone();
    for k in 0..50 {
        let step = esqm_step(&config, &state, &x, k).unwrap();
        let moved: f64 = step.y.iter().zip(&x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        println!(
            "k={k:<2} x=({:.6}, {:.6}) beta={} merit={:.10} tests={:+.3e}",
            x[0],
            x[1],
            state.beta,
            merit_linf(&b.problem, state.beta, &x),
            step.tests[0]
        );
        let same_beta = step.state.beta == state.beta;
        x = step.y;
        state = step.state;
        if moved <= 1e-9 && same_beta {
            break;
        }
    }
    println!("final x = ({:.8}, {:.8}), beta = {} after {} updates", x[0], x[1], state.beta, state.update_count);
}
