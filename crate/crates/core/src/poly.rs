//! Sparse multivariate polynomials with real coefficients.
//!
//! Polynomials are kept in a canonical form: terms sorted by graded
//! lexicographic order on their exponent maps, like terms merged, and no
//! term with a zero coefficient. Two polynomials are equal iff they are
//! structurally equal.
//!
//! The accepted text grammar is
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' integer)?
//! primary := number | 'x' index | '(' expr ')'
//! ```
//!
//! with variables `x1 .. xn` (one-based), decimal literals and
//! whitespace ignored everywhere.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} at byte {offset} is out of range for dimension {dimension}")]
    VariableOutOfRange {
        index: usize,
        dimension: usize,
        offset: usize,
    },
    #[error("invalid exponent at byte {offset}: {message}")]
    BadExponent { offset: usize, message: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("box coordinate {0} is unbounded")]
    UnboundedBox(usize),
    #[error("invalid box: {0}")]
    InvalidBox(String),
}

/// Floor returned by [`Polynomial::lipschitz_grad_bound`] for affine polynomials.
pub const LIPSCHITZ_FLOOR: f64 = 1e-8;

/// Exponent map of a monomial: zero-based variable index to positive degree.
pub type Exponents = BTreeMap<usize, u32>;

fn total_degree(e: &Exponents) -> u32 {
    e.values().sum()
}

/// Graded lexicographic order: total degree first, then the first variable
/// (lowest index) whose degrees differ decides, larger degree being greater.
pub fn grlex_cmp(a: &Exponents, b: &Exponents) -> Ordering {
    match total_degree(a).cmp(&total_degree(b)) {
        Ordering::Equal => {}
        ord => return ord,
    }
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            // the side that still has a variable carries a positive degree
            // at an index where the other has zero
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(va, ea)), Some(&(vb, eb))) => {
                if va != vb {
                    return if va < vb {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    };
                }
                if ea != eb {
                    return ea.cmp(eb);
                }
                ia.next();
                ib.next();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Key(Exponents);

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        grlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Exponents,
}

impl Monomial {
    pub fn degree(&self) -> u32 {
        total_degree(&self.exponents)
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coefficient;
        for (&var, &e) in &self.exponents {
            v *= x[var].powi(e as i32);
        }
        v
    }

    fn derivative(&self, var: usize) -> Option<Monomial> {
        let e = *self.exponents.get(&var)?;
        let mut exponents = self.exponents.clone();
        if e == 1 {
            exponents.remove(&var);
        } else {
            exponents.insert(var, e - 1);
        }
        Some(Monomial {
            coefficient: self.coefficient * e as f64,
            exponents,
        })
    }
}

/// A polynomial in `dimension` variables, in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dimension: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    /// Builds the canonical polynomial from arbitrary (possibly repeated or
    /// zero) terms. Zero exponents are stripped.
    ///
    /// Panics if a term references a variable index `>= dimension`.
    pub fn from_terms(dimension: usize, terms: impl IntoIterator<Item = Monomial>) -> Self {
        let mut acc: BTreeMap<Key, f64> = BTreeMap::new();
        for mut t in terms {
            t.exponents.retain(|_, e| *e != 0);
            if let Some((&v, _)) = t.exponents.iter().next_back() {
                assert!(v < dimension, "variable index {v} out of range");
            }
            *acc.entry(Key(t.exponents)).or_insert(0.0) += t.coefficient;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(k, c)| Monomial {
                coefficient: c,
                exponents: k.0,
            })
            .collect();
        Polynomial { dimension, terms }
    }

    pub fn zero(dimension: usize) -> Self {
        Polynomial {
            dimension,
            terms: Vec::new(),
        }
    }

    pub fn constant(dimension: usize, c: f64) -> Self {
        Self::from_terms(
            dimension,
            [Monomial {
                coefficient: c,
                exponents: Exponents::new(),
            }],
        )
    }

    /// The polynomial `x_{var+1}` (zero-based `var`).
    pub fn variable(dimension: usize, var: usize) -> Self {
        Self::from_terms(
            dimension,
            [Monomial {
                coefficient: 1.0,
                exponents: Exponents::from([(var, 1)]),
            }],
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.last().map_or(0, Monomial::degree)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let dim = self.dimension.max(other.dimension);
        Self::from_terms(dim, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Self::from_terms(
            self.dimension,
            self.terms.iter().map(|t| Monomial {
                coefficient: t.coefficient * c,
                exponents: t.exponents.clone(),
            }),
        )
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let dim = self.dimension.max(other.dimension);
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut exponents = a.exponents.clone();
                for (&v, &e) in &b.exponents {
                    *exponents.entry(v).or_insert(0) += e;
                }
                out.push(Monomial {
                    coefficient: a.coefficient * b.coefficient,
                    exponents,
                });
            }
        }
        Self::from_terms(dim, out)
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Self::constant(self.dimension, 1.0);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Evaluates the polynomial, accumulating terms in canonical order.
    pub fn eval(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.dimension {
            return Err(PolyError::DimensionMismatch {
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(0.0, |acc, t| acc + t.eval(x))
    }

    /// Exact formal partial derivative with respect to zero-based `var`.
    pub fn partial(&self, var: usize) -> Polynomial {
        Self::from_terms(
            self.dimension,
            self.terms.iter().filter_map(|t| t.derivative(var)),
        )
    }

    /// Exact gradient, one polynomial per coordinate.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dimension).map(|i| self.partial(i)).collect()
    }

    /// Upper bound on the Hessian spectral norm over `bx`.
    ///
    /// Each Hessian entry is bounded by `sum |c| * max_box |monomial|`; the
    /// bound is the largest Gershgorin row sum of those entry bounds. Affine
    /// polynomials get [`LIPSCHITZ_FLOOR`].
    pub fn lipschitz_grad_bound(&self, bx: &AxisBox) -> Result<f64, PolyError> {
        if bx.dimension() != self.dimension {
            return Err(PolyError::DimensionMismatch {
                expected: self.dimension,
                got: bx.dimension(),
            });
        }
        if let Some(i) = (0..bx.dimension()).find(|&i| !bx.lower[i].is_finite() || !bx.upper[i].is_finite()) {
            return Err(PolyError::UnboundedBox(i));
        }
        let magnitude: Vec<f64> = (0..self.dimension)
            .map(|i| bx.lower[i].abs().max(bx.upper[i].abs()))
            .collect();
        let entry_bound = |p: &Polynomial| -> f64 {
            p.terms
                .iter()
                .map(|t| {
                    t.exponents
                        .iter()
                        .fold(t.coefficient.abs(), |acc, (&v, &e)| acc * magnitude[v].powi(e as i32))
                })
                .sum()
        };
        let grad = self.gradient();
        let mut best = 0.0_f64;
        for gi in &grad {
            let row: f64 = (0..self.dimension).map(|j| entry_bound(&gi.partial(j))).sum();
            best = best.max(row);
        }
        Ok(if best > 0.0 { best } else { LIPSCHITZ_FLOOR })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().rev().enumerate() {
            let c = t.coefficient;
            let mag = c.abs();
            match (n, c < 0.0) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut first = true;
            if mag != 1.0 || t.exponents.is_empty() {
                write!(f, "{mag}")?;
                first = false;
            }
            for (&v, &e) in &t.exponents {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "x{}", v + 1)?;
                if e != 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Axis-aligned box `[lower, upper]`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, PolyError> {
        if lower.len() != upper.len() {
            return Err(PolyError::InvalidBox(format!(
                "{} lower bounds but {} upper bounds",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u {
                return Err(PolyError::InvalidBox(format!("coordinate {i}: [{l}, {u}]")));
            }
        }
        Ok(AxisBox { lower, upper })
    }

    /// The cube `[-a, a]^n`.
    pub fn symmetric(n: usize, a: f64) -> Self {
        AxisBox {
            lower: vec![-a; n],
            upper: vec![a; n],
        }
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dimension()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }
}

/// Parses `text` into a canonical polynomial in `dimension` variables.
pub fn parse_polynomial(text: &str, dimension: usize) -> Result<Polynomial, PolyError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dimension,
    };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dimension: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> PolyError {
        PolyError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == b'+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = acc.mul(&rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.scale(-1.0))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(b'-') => {
                return Err(PolyError::BadExponent {
                    offset: start,
                    message: "negative exponents are not polynomial".into(),
                })
            }
            Some(c) if c.is_ascii_digit() => {}
            _ => {
                return Err(PolyError::BadExponent {
                    offset: start,
                    message: "expected a nonnegative integer literal".into(),
                })
            }
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            return Err(PolyError::BadExponent {
                offset: start,
                message: "fractional exponents are not polynomial".into(),
            });
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let e: u32 = digits.parse().map_err(|_| PolyError::BadExponent {
            offset: start,
            message: format!("exponent {digits} is too large"),
        })?;
        Ok(base.pow(e))
    }

    fn primary(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let digits_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if digits_start == self.pos {
                    return Err(PolyError::Syntax {
                        offset: digits_start,
                        message: "expected a variable index after 'x'".into(),
                    });
                }
                let digits = std::str::from_utf8(&self.src[digits_start..self.pos]).expect("ascii digits");
                let index: usize = digits.parse().unwrap_or(usize::MAX);
                if index == 0 || index > self.dimension {
                    return Err(PolyError::VariableOutOfRange {
                        index,
                        dimension: self.dimension,
                        offset: start,
                    });
                }
                Ok(Polynomial::variable(self.dimension, index - 1))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                let mut seen_digit = false;
                let mut seen_dot = false;
                while let Some(&c) = self.src.get(self.pos) {
                    if c.is_ascii_digit() {
                        seen_digit = true;
                    } else if c == b'.' && !seen_dot {
                        seen_dot = true;
                    } else {
                        break;
                    }
                    self.pos += 1;
                }
                if !seen_digit {
                    return Err(PolyError::Syntax {
                        offset: start,
                        message: "malformed number".into(),
                    });
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
                let v: f64 = text.parse().map_err(|_| PolyError::Syntax {
                    offset: start,
                    message: format!("malformed number '{text}'"),
                })?;
                Ok(Polynomial::constant(self.dimension, v))
            }
            Some(_) => Err(self.syntax("unexpected character")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }
}
