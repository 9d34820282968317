//! Registry of builtin test problems.

use crate::methods::Method;
use crate::mmp::RunStatus;
use crate::poly::{parse_polynomial, AxisBox};
use crate::problem::{NlpProblem, SmoothFunction};
use crate::sets::SimpleSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    /// Convex data, feasible starting point.
    ConvexFeasible,
    /// Nonconvex polynomial data.
    Nonconvex,
    /// Starting point violates the functional constraints.
    InfeasibleStart,
    /// Built to exit without a KKT point (divergence or broken qualification).
    Pathological,
}

#[derive(Debug, Clone)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub category: Category,
    pub problem: NlpProblem,
    pub x0: Vec<f64>,
    /// Box on which the gradient Lipschitz constants were computed.
    pub trust_box: AxisBox,
    pub methods: Vec<Method>,
    pub expected: RunStatus,
    /// A known minimizer, if any.
    pub optimum: Option<Vec<f64>>,
    /// Known multipliers at `optimum`.
    pub multipliers: Option<Vec<f64>>,
    pub strongly_convex: bool,
    /// The constraints satisfy MFQC on the relevant region.
    pub qualified: bool,
}

impl Builtin {
    pub fn optimal_value(&self) -> Option<f64> {
        self.optimum.as_ref().map(|x| self.problem.objective.value(x))
    }
}

fn poly(text: &str, n: usize, trust: &AxisBox) -> SmoothFunction {
    SmoothFunction::from_polynomial(parse_polynomial(text, n).expect("builtin polynomial"), trust)
        .expect("builtin Lipschitz bound")
}

fn poly_l(text: &str, n: usize, l: f64) -> SmoothFunction {
    SmoothFunction::from_polynomial_with_lipschitz(parse_polynomial(text, n).expect("builtin polynomial"), l)
        .expect("builtin Lipschitz constant")
}

fn nlp(name: &str, f: SmoothFunction, cons: Vec<SmoothFunction>, q: SimpleSet) -> NlpProblem {
    NlpProblem::new(name, f, cons, q).expect("builtin problem")
}

const PENALTY: [Method; 2] = [Method::Esqm, Method::Sl1qp];
const SQP: [Method; 3] = [Method::MovingBalls, Method::Esqm, Method::Sl1qp];

/// All builtins in a fixed order.
pub fn builtins() -> Vec<Builtin> {
    let mut out = Vec::new();

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "quadratic",
        description: "0.5|x|^2 without constraints",
        category: Category::ConvexFeasible,
        problem: nlp("quadratic", poly("0.5*x1^2 + 0.5*x2^2", 2, &b), vec![], SimpleSet::WholeSpace),
        x0: vec![1.0, 1.0],
        trust_box: b,
        methods: Method::ALL.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.0, 0.0]),
        multipliers: Some(vec![]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "ill-conditioned",
        description: "0.5*x1^2 + 0.05*x2^2 without constraints; condition number 10",
        category: Category::ConvexFeasible,
        problem: nlp("ill-conditioned", poly("0.5*x1^2 + 0.05*x2^2", 2, &b), vec![], SimpleSet::WholeSpace),
        x0: vec![1.0, 1.0],
        trust_box: b,
        methods: Method::ALL.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.0, 0.0]),
        multipliers: Some(vec![]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(1, 1.0);
    out.push(Builtin {
        name: "linear-unbounded",
        description: "-x1 without constraints; unbounded below",
        category: Category::Pathological,
        problem: nlp("linear-unbounded", poly("-x1", 1, &b), vec![], SimpleSet::WholeSpace),
        x0: vec![0.0],
        trust_box: b,
        methods: Method::ALL.to_vec(),
        expected: RunStatus::Diverged,
        optimum: None,
        multipliers: None,
        strongly_convex: false,
        qualified: true,
    });

    let b = AxisBox::symmetric(1, 2.0);
    out.push(Builtin {
        name: "linear-over-halfline",
        description: "x1 subject to -x1 <= 0",
        category: Category::ConvexFeasible,
        problem: nlp(
            "linear-over-halfline",
            poly_l("x1", 1, 1.0),
            vec![poly_l("-x1", 1, 1.0)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![1.0],
        trust_box: b,
        methods: SQP.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.0]),
        multipliers: Some(vec![1.0]),
        strongly_convex: false,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 3.0);
    let s5 = 5f64.sqrt();
    out.push(Builtin {
        name: "proj-disk",
        description: "distance to (2, 1) over the unit disk",
        category: Category::ConvexFeasible,
        problem: nlp(
            "proj-disk",
            poly("(x1 - 2)^2 + (x2 - 1)^2", 2, &b),
            vec![poly("x1^2 + x2^2 - 1", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.0, 0.0],
        trust_box: b,
        methods: SQP.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![2.0 / s5, 1.0 / s5]),
        multipliers: Some(vec![s5 - 1.0]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "saddle-in-disk",
        description: "-x1*x2 over the disk of radius sqrt(2)",
        category: Category::Nonconvex,
        problem: nlp(
            "saddle-in-disk",
            poly("-x1*x2", 2, &b),
            vec![poly("x1^2 + x2^2 - 2", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.5, 0.0],
        trust_box: b,
        methods: SQP.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![1.0, 1.0]),
        multipliers: Some(vec![0.5]),
        strongly_convex: false,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "infeasible-start",
        description: "|x|^2 subject to x1 + x2 >= 1, started at the origin",
        category: Category::InfeasibleStart,
        problem: nlp(
            "infeasible-start",
            poly("x1^2 + x2^2", 2, &b),
            vec![poly("1 - x1 - x2", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.0, 0.0],
        trust_box: b,
        methods: PENALTY.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.5, 0.5]),
        multipliers: Some(vec![1.0]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 3.0);
    out.push(Builtin {
        name: "ellipse-target",
        description: "anisotropic distance to (2, 2) over the unit disk",
        category: Category::ConvexFeasible,
        problem: nlp(
            "ellipse-target",
            poly("(x1 - 2)^2 + 0.1*(x2 - 2)^2", 2, &b),
            vec![poly("x1^2 + x2^2 - 1", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.0, 0.0],
        trust_box: b,
        methods: SQP.to_vec(),
        expected: RunStatus::Converged,
        optimum: None,
        multipliers: None,
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 3.0);
    out.push(Builtin {
        name: "lens",
        description: "distance to (2, 3) over the intersection of two unit disks",
        category: Category::ConvexFeasible,
        problem: nlp(
            "lens",
            poly("(x1 - 2)^2 + (x2 - 3)^2", 2, &b),
            vec![poly("(x1 - 1)^2 + x2^2 - 1", 2, &b), poly("x1^2 + (x2 - 1)^2 - 1", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.5, 0.5],
        trust_box: b,
        methods: SQP.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![1.0, 1.0]),
        multipliers: Some(vec![2.0, 1.0]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "box-qp",
        description: "convex quadratic over [0,1]^2 with x1 + x2 <= 0.5, started at (1, 1)",
        category: Category::InfeasibleStart,
        problem: nlp(
            "box-qp",
            poly("(x1 - 2)^2 + (x2 + 1)^2 + x1*x2", 2, &b),
            vec![poly("x1 + x2 - 0.5", 2, &b)],
            SimpleSet::new_box(vec![0.0, 0.0], vec![1.0, 1.0]).expect("box"),
        ),
        x0: vec![1.0, 1.0],
        trust_box: b,
        methods: PENALTY.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.5, 0.0]),
        multipliers: Some(vec![3.0]),
        strongly_convex: true,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "rosenbrock-box",
        description: "(1 - x1)^2 + (x2 - x1^2)^2 over [-2,2]^2",
        category: Category::Nonconvex,
        problem: nlp(
            "rosenbrock-box",
            poly("(1 - x1)^2 + (x2 - x1^2)^2", 2, &b),
            vec![],
            SimpleSet::new_box(vec![-2.0, -2.0], vec![2.0, 2.0]).expect("box"),
        ),
        x0: vec![-1.0, 1.5],
        trust_box: b,
        methods: vec![Method::Esqm, Method::Sl1qp, Method::GradProj],
        expected: RunStatus::Converged,
        optimum: Some(vec![1.0, 1.0]),
        multipliers: Some(vec![]),
        strongly_convex: false,
        qualified: true,
    });

    let b = AxisBox::symmetric(3, 1.0);
    out.push(Builtin {
        name: "simplex-bilinear",
        description: "-x1*x2 + 0.5*x3^2 over the unit simplex with x1 <= 0.4",
        category: Category::Nonconvex,
        problem: nlp(
            "simplex-bilinear",
            poly("-x1*x2 + 0.5*x3^2", 3, &b),
            vec![poly("x1 - 0.4", 3, &b)],
            SimpleSet::new_simplex(1.0).expect("simplex"),
        ),
        x0: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        trust_box: b,
        methods: PENALTY.to_vec(),
        expected: RunStatus::Converged,
        optimum: Some(vec![0.4, 0.6, 0.0]),
        multipliers: None,
        strongly_convex: false,
        qualified: true,
    });

    let b = AxisBox::symmetric(2, 2.0);
    out.push(Builtin {
        name: "mfqc-violating",
        description: "two unit disks touching at the origin; no interior direction",
        category: Category::Pathological,
        problem: nlp(
            "mfqc-violating",
            poly("0.5*x1^2 + 0.5*(x2 - 1)^2", 2, &b),
            vec![poly("(x1 - 1)^2 + x2^2 - 1", 2, &b), poly("(x1 + 1)^2 + x2^2 - 1", 2, &b)],
            SimpleSet::WholeSpace,
        ),
        x0: vec![0.0, 0.0],
        trust_box: b,
        methods: vec![Method::MovingBalls],
        expected: RunStatus::SubproblemFailure,
        optimum: Some(vec![0.0, 0.0]),
        multipliers: None,
        strongly_convex: true,
        qualified: false,
    });

    out
}

pub fn builtin(name: &str) -> Option<Builtin> {
    builtins().into_iter().find(|b| b.name == name)
}

/// One line per builtin: name, n, m, Q variant, reference optimum.
pub fn list_problems() -> String {
    let mut s = String::new();
    for b in builtins() {
        let opt = match &b.optimum {
            Some(x) => format!(
                "x* = ({}), f* = {}",
                x.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "),
                format_args!("{:.6}", b.optimal_value().unwrap_or(f64::NAN))
            ),
            None => "no reference optimum".to_string(),
        };
        s.push_str(&format!(
            "{:<22} n={} m={} Q={:<11} {}\n",
            b.name,
            b.problem.dimension(),
            b.problem.num_constraints(),
            b.problem.simple_set.variant_name(),
            opt
        ));
    }
    s
}
