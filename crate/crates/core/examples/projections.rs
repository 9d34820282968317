//! Euclidean projections onto the simple sets and their stationarity
//! residuals.

use mmp_nlp::linalg::dist;
use mmp_nlp::sets::SimpleSet;

fn main() {
    let z = [1.5, -0.5, 0.8];
    let sets = [
        SimpleSet::WholeSpace,
        SimpleSet::new_box(vec![0.0; 3], vec![1.0; 3]).unwrap(),
        SimpleSet::new_ball(vec![0.0; 3], 1.0).unwrap(),
        SimpleSet::new_simplex(1.0).unwrap(),
        SimpleSet::new_simplex_cap(1.0).unwrap(),
        SimpleSet::NonnegOrthant,
    ];
    println!("z = {z:?}");
    for q in &sets {
        let p = q.project(&z).unwrap();
        let again = q.project(&p).unwrap();
        let v: Vec<f64> = z.iter().zip(&p).map(|(a, b)| b - a).collect();
        // v = P(z) - z lies in -N_Q(P(z)), so the residual of P(z) with v is zero
        let r = q.stationarity_residual(&p, &v).unwrap();
        println!(
            "{:<12} P(z) = [{:>8.5}, {:>8.5}, {:>8.5}]  |P(P(z)) - P(z)| = {:.1e}  residual: {r:.1e}",
            q.variant_name(),
            p[0],
            p[1],
            p[2],
            dist(&again, &p)
        );
    }
}
