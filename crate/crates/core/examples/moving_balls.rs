//! Moving balls on a nonconvex objective over a disk. Every iterate stays
//! feasible and the objective decreases monotonically.

use mmp_nlp::methods::{extract_kkt, Method, MovingBalls, MovingBallsConfig};
use mmp_nlp::mmp::{run_mmp, SandwichMonitor, StopCriteria};
use mmp_nlp::problems::builtin;

fn main() {
    let b = builtin("saddle-in-disk").unwrap();
    let config = MovingBallsConfig::new(b.problem.clone()).unwrap();
    println!("L = {}, L_i = {:?}", config.l, config.l_i);
    let mut oracle = MovingBalls::new(config);
    let mut monitor = SandwichMonitor::new(1e-9);
    let res = run_mmp(&mut oracle, &b.x0, &StopCriteria::default(), &mut [&mut monitor]).unwrap();

    for (r, x) in res.trace.iter().zip(&res.iterates) {
        println!(
            "k={:<2} x=({:+.6}, {:+.6}) f={:+.10} max f_i={:+.2e} step={:.2e}",
            r.k, x[0], x[1], r.f, r.max_constraint_violation, r.step_norm
        );
    }
    let x = &res.final_state.x;
    let kkt = extract_kkt(&b.problem, x, res.last_solution.as_ref().unwrap(), Method::MovingBalls);
    println!("{:?} at ({:.8}, {:.8}), multiplier {:.6}", res.status, x[0], x[1], kkt.multipliers[0]);
    println!("KKT residual {:.2e}, sandwich violations {}", kkt.max_residual(), monitor.violations.len());
}
