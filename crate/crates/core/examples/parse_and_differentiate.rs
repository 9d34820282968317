//! Parses a polynomial, differentiates it exactly and bounds the Lipschitz
//! constant of its gradient on a box.

use mmp_nlp::poly::{parse_polynomial, AxisBox};
use mmp_nlp::problem::{finite_diff_check, SmoothFunction};

fn main() {
    let p = parse_polynomial("(x1 + x2)^2 - 3*x1*x2^2 + 0.5", 2).expect("valid polynomial");
    println!("p          = {p}");
    for (i, g) in p.gradient().iter().enumerate() {
        println!("dp/dx{}     = {g}", i + 1);
    }
    println!("p(1, 2)    = {}", p.eval(&[1.0, 2.0]).unwrap());

    let trust = AxisBox::symmetric(2, 1.0);
    let l = p.lipschitz_grad_bound(&trust).unwrap();
    println!("L on [-1,1]^2 <= {l}");

    let f = SmoothFunction::from_polynomial(p, &trust).unwrap();
    let err = finite_diff_check(&f, &[0.3, -0.7], 1e-5);
    println!("finite-difference relative error at (0.3, -0.7): {err:.2e}");

    match parse_polynomial("x1^-1", 1) {
        Ok(_) => unreachable!(),
        Err(e) => println!("x1^-1 is rejected: {e}"),
    }
}
