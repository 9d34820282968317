//! Sl1QP on the lens problem, compared with ESQM and moving balls.

use mmp_nlp::config::RunConfig;
use mmp_nlp::methods::Method;
use mmp_nlp::runner::execute;

fn main() {
    for method in [Method::Sl1qp, Method::Esqm, Method::MovingBalls] {
        let (cfg, problem) = RunConfig::for_builtin("lens", method).unwrap();
        let out = execute(&cfg, &problem).unwrap();
        let x = &out.result.final_state.x;
        println!(
            "{:<6} {:?} in {:>2} steps: x=({:.8}, {:.8}) lambda=({:.6}, {:.6}) beta={} kkt={:.1e}",
            method.name(),
            out.result.status,
            out.result.trace.len(),
            x[0],
            x[1],
            out.kkt.multipliers[0],
            out.kkt.multipliers[1],
            out.final_beta,
            out.kkt.max_residual()
        );
    }
}
