//! Classifies convergence rates of synthetic sequences and of a run.

use mmp_nlp::config::RunConfig;
use mmp_nlp::diagnostics::estimate_rate;
use mmp_nlp::methods::Method;
use mmp_nlp::runner::execute;

fn main() {
    let geometric: Vec<Vec<f64>> = (0..40).map(|k| vec![0.7f64.powi(k)]).collect();
    let power: Vec<Vec<f64>> = (1..=500).map(|k| vec![(k as f64).powf(-1.5)]).collect();
    let finite = vec![vec![1.0], vec![0.25], vec![0.0], vec![0.0]];
    for (name, pts) in [("0.7^k", geometric), ("k^-1.5", power), ("finite", finite)] {
        let r = estimate_rate(&pts, &[0.0]).unwrap();
        println!("{name:<8} {:?} (R^2 = {:.6})", r.regime, r.fit_quality);
    }

    let (cfg, problem) = RunConfig::for_builtin("rosenbrock-box", Method::GradProj).unwrap();
    let out = execute(&cfg, &problem).unwrap();
    println!(
        "rosenbrock-box, gradient projection: {} steps, {:?}",
        out.result.trace.len(),
        out.rate.map(|r| r.regime)
    );
}
