//! KKT residuals at a reference solution, and the qualification check on a
//! problem where it fails.

use mmp_nlp::diagnostics::{check_mfqc, kkt_residual};
use mmp_nlp::problems::builtin;

fn main() {
    let lens = builtin("lens").unwrap();
    let x = lens.optimum.clone().unwrap();
    let good = kkt_residual(&lens.problem, &x, &[2.0, 1.0]);
    let bad = kkt_residual(&lens.problem, &x, &[1.0, 1.0]);
    println!("lens at (1,1), lambda = (2,1): {good:?}");
    println!("lens at (1,1), lambda = (1,1): stationarity {:.3}", bad.stationarity);
    let m = check_mfqc(&lens.problem, &x, 1e-9).unwrap();
    println!("lens MFQC: active {:?}, hull distance {:.4}, satisfied {}", m.active_set, m.hull_distance, m.satisfied);

    let touch = builtin("mfqc-violating").unwrap();
    let m = check_mfqc(&touch.problem, &touch.x0, 1e-9).unwrap();
    println!("touching disks MFQC: active {:?}, hull distance {:.1e}, satisfied {}", m.active_set, m.hull_distance, m.satisfied);
}
