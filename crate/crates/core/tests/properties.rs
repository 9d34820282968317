use mmp_nlp::diagnostics::{min_norm_in_hull, rate_from_distances, RateConfig, RateRegime};
use mmp_nlp::poly::{parse_polynomial, AxisBox, Polynomial};
use mmp_nlp::sets::SimpleSet;
use proptest::prelude::*;

/// Polynomial text with dyadic coefficients so that all arithmetic on the
/// coefficients below is exact.
fn poly_text(n: usize) -> impl Strategy<Value = String> {
    let term = (prop::sample::select((1..=24).chain(-24..=-1).collect::<Vec<i32>>()), prop::collection::vec(0u32..=3, n));
    prop::collection::vec(term, 1..6).prop_map(|terms| {
        terms
            .iter()
            .enumerate()
            .map(|(j, (k, exps))| {
                let c = *k as f64 / 4.0;
                let mut s = if j == 0 { format!("{c}") } else if c < 0.0 { format!(" - {}", -c) } else { format!(" + {c}") };
                for (v, e) in exps.iter().enumerate().filter(|(_, e)| **e > 0) {
                    s.push_str(&format!("*x{}^{e}", v + 1));
                }
                s
            })
            .collect()
    })
}

fn dim_and_poly() -> impl Strategy<Value = (usize, String)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), poly_text(n)))
}

fn dim_and_two_polys() -> impl Strategy<Value = (usize, String, String)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), poly_text(n), poly_text(n)))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn grad_at(grad: &[Polynomial], x: &[f64]) -> Vec<f64> {
    grad.iter().map(|g| g.eval(x).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_then_parse_round_trips((n, text) in dim_and_poly()) {
        let p = parse_polynomial(&text, n).unwrap();
        let q = parse_polynomial(&p.to_string(), n).unwrap();
        prop_assert_eq!(&p, &q);
        let r = parse_polynomial(&q.to_string(), n).unwrap();
        prop_assert_eq!(q, r);
    }

    #[test]
    fn gradient_is_linear((n, a, b) in dim_and_two_polys(), k in -12i32..=12) {
        let p = parse_polynomial(&a, n).unwrap();
        let q = parse_polynomial(&b, n).unwrap();
        let c = k as f64 / 4.0;
        let sum: Vec<Polynomial> = p.gradient().iter().zip(q.gradient()).map(|(x, y)| x.add(&y)).collect();
        prop_assert_eq!(p.add(&q).gradient(), sum);
        let scaled: Vec<Polynomial> = p.gradient().iter().map(|x| x.scale(c)).collect();
        prop_assert_eq!(p.scale(c).gradient(), scaled);
    }

    #[test]
    fn evaluation_is_bit_deterministic((n, text) in dim_and_poly(), x in prop::collection::vec(-3.0f64..3.0, 3)) {
        let p = parse_polynomial(&text, n).unwrap();
        let a = p.eval(&x[..n]).unwrap();
        let b = parse_polynomial(&text, n).unwrap().eval(&x[..n]).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn grid_gradient_ratios_respect_the_bound(
        (n, text) in dim_and_poly(),
        lo in prop::collection::vec(-3.0f64..0.0, 3),
        width in prop::collection::vec(0.5f64..3.0, 3),
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let p = parse_polynomial(&text, n).unwrap();
        let bx = AxisBox::new(lo[..n].to_vec(), (0..n).map(|i| lo[i] + width[i]).collect()).unwrap();
        let bound = p.lipschitz_grad_bound(&bx).unwrap();
        let grad = p.gradient();
        let nodes = 40;
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut node = || -> Vec<f64> {
            (0..n).map(|i| bx.lower[i] + width[i] * rng.gen_range(0..nodes) as f64 / (nodes - 1) as f64).collect()
        };
        for _ in 0..10_000 {
            let (a, b) = (node(), node());
            let step = norm(&diff(&a, &b));
            if step == 0.0 {
                continue;
            }
            let ratio = norm(&diff(&grad_at(&grad, &a), &grad_at(&grad, &b))) / step;
            prop_assert!(ratio <= bound * (1.0 + 1e-12), "ratio {} exceeds bound {} for {}", ratio, bound, p);
        }
    }
}

fn any_set(n: usize) -> impl Strategy<Value = SimpleSet> {
    let lo = prop::collection::vec(-2.0f64..1.0, n);
    let width = prop::collection::vec(0.0f64..2.0, n);
    let center = prop::collection::vec(-1.0f64..1.0, n);
    (0usize..6, lo, width, center, 0.1f64..3.0).prop_map(|(variant, lo, width, center, r)| match variant {
        0 => SimpleSet::WholeSpace,
        1 => SimpleSet::new_box(lo.clone(), lo.iter().zip(&width).map(|(l, w)| l + w).collect()).unwrap(),
        2 => SimpleSet::new_ball(center, r).unwrap(),
        3 => SimpleSet::new_simplex(r).unwrap(),
        4 => SimpleSet::new_simplex_cap(r).unwrap(),
        _ => SimpleSet::NonnegOrthant,
    })
}

fn set_and_points() -> impl Strategy<Value = (SimpleSet, Vec<f64>, Vec<f64>)> {
    (1usize..=5).prop_flat_map(|n| {
        (any_set(n), prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(-10.0f64..10.0, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn projection_properties((q, z, w) in set_and_points()) {
        let pz = q.project(&z).unwrap();
        let pw = q.project(&w).unwrap();
        prop_assert!(norm(&diff(&q.project(&pz).unwrap(), &pz)) <= 1e-12);
        let d = norm(&diff(&z, &w));
        prop_assert!(norm(&diff(&pz, &pw)) <= d + 1e-12 * (1.0 + d));
        let vi: f64 = diff(&z, &pz).iter().zip(diff(&pw, &pz)).map(|(a, b)| a * b).sum();
        prop_assert!(vi <= 1e-10, "variational inequality {}", vi);
        prop_assert_eq!(q.stationarity_residual(&pz, &vec![0.0; z.len()]).unwrap(), 0.0);
    }
}

proptest! {
    #[test]
    fn rate_is_scale_invariant(q in 0.2f64..0.97, gamma in 0.3f64..3.0, c in 1e-3f64..1e3, geometric in any::<bool>()) {
        let cfg = RateConfig::default();
        let d: Vec<f64> = (0..120)
            .map(|k| if geometric { q.powi(k) } else { ((k + 1) as f64).powf(-gamma) })
            .collect();
        let scaled: Vec<f64> = d.iter().map(|v| c * v).collect();
        let a = rate_from_distances(&d, 0.0, &cfg).unwrap().regime;
        let b = rate_from_distances(&scaled, 0.0, &cfg).unwrap().regime;
        match (a, b) {
            (RateRegime::Geometric { q: x }, RateRegime::Geometric { q: y }) => prop_assert!((x - y).abs() <= 1e-9 * x),
            (RateRegime::Power { gamma: x }, RateRegime::Power { gamma: y }) => prop_assert!((x - y).abs() <= 1e-9 * x),
            (x, y) => prop_assert!(false, "regimes differ: {:?} vs {:?}", x, y),
        }
    }
}

/// `min |sum u_i g_i|` over the unit simplex on a zooming lattice whose
/// points all lie on the simplex.
fn hull_distance_grid(grads: &[Vec<f64>]) -> f64 {
    let m = grads.len();
    let n = grads[0].len();
    let value = |z: &[i64], scale: i64| -> f64 {
        let s: Vec<f64> = (0..n)
            .map(|j| (0..m).map(|i| z[i] as f64 / scale as f64 * grads[i][j]).sum())
            .collect();
        norm(&s)
    };
    let mut scale = 24_i64;
    let mut best_z = vec![0_i64; m];
    let mut best = f64::INFINITY;
    let visit = |z: &[i64], scale: i64, best: &mut f64, best_z: &mut Vec<i64>| {
        if z.iter().all(|v| *v >= 0) {
            let v = value(z, scale);
            if v < *best {
                *best = v;
                *best_z = z.to_vec();
            }
        }
    };
    // the last coordinate is fixed by the sum
    let free = m - 1;
    let cells = |lo: &[i64], hi: &[i64], scale: i64, f: &mut dyn FnMut(&[i64])| {
        let mut z = lo.to_vec();
        loop {
            let last = scale - z.iter().sum::<i64>();
            let mut full = z.clone();
            full.push(last);
            f(&full);
            let mut i = 0;
            loop {
                if i == free {
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
    };
    cells(&vec![0; free], &vec![scale; free], scale, &mut |z| visit(z, scale, &mut best, &mut best_z));
    const K: i64 = 6;
    for _ in 0..22 {
        scale *= 4;
        best_z = best_z.iter().map(|v| v * 4).collect();
        for _ in 0..1000 {
            let center: Vec<i64> = best_z[..free].to_vec();
            let lo: Vec<i64> = center.iter().map(|c| c - K).collect();
            let hi: Vec<i64> = center.iter().map(|c| c + K).collect();
            cells(&lo, &hi, scale, &mut |z| visit(z, scale, &mut best, &mut best_z));
            if best_z[..free].iter().zip(&center).all(|(b, c)| (b - c).abs() < K) {
                break;
            }
        }
    }
    best
}

fn gradient_sets() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(m, n)| prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hull_distance_matches_simplex_grid(grads in gradient_sets()) {
        let got = min_norm_in_hull(&grads);
        let oracle = hull_distance_grid(&grads);
        prop_assert!((got - oracle).abs() <= 1e-6, "solver {} oracle {} for {:?}", got, oracle, grads);
    }
}

#[test]
fn hull_distance_on_a_flat_hull() {
    // one short gradient makes the hull nearly flat; the minimizer lies on
    // the edge between the long gradients
    let grads = vec![
        vec![-1.1773063232367378, 0.695052061057805],
        vec![0.011862723763096255, 0.0037599025797054003],
        vec![1.0131784964270443, 0.15705791339464406],
    ];
    let oracle = hull_distance_grid(&grads);
    assert!(oracle <= 0.009212462495930522 + 1e-15);
    assert!((min_norm_in_hull(&grads) - oracle).abs() <= 1e-9);
}
