//! Run configuration files.
//!
//! One `key = value` per line; `#` starts a comment. Lists are comma
//! separated. A file either names a builtin (`builtin = proj-disk`) or
//! declares a problem with `dimension`, `objective`, `constraint.1`, ...

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::methods::Method;
use crate::mmp::StopCriteria;
use crate::poly::{parse_polynomial, AxisBox};
use crate::problem::{NlpProblem, ProblemError, SmoothFunction};
use crate::problems::builtin;
use crate::sets::SimpleSet;
use crate::subproblem::InnerSettings;

/// Half-width of the default trust box.
pub const DEFAULT_TRUST_RADIUS: f64 = 10.0;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: key `{key}`: {message}")]
    Value { line: usize, key: String, message: String },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    /// Registry entry the problem came from, if any.
    pub builtin: Option<String>,
    pub method: Method,
    pub x0: Vec<f64>,
    pub trust_box: AxisBox,
    pub beta0: f64,
    pub delta: f64,
    /// `None` uses the method's tightest admissible value.
    pub lambda: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub stop: StopCriteria,
    pub inner: InnerSettings,
    /// `None` uses the method's default.
    pub feas_tol: Option<f64>,
    /// Seeds randomized test-point generation; the solvers are deterministic.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for running `method` from `x0`.
    pub fn new(name: impl Into<String>, method: Method, x0: Vec<f64>, trust_box: AxisBox) -> Self {
        RunConfig {
            name: name.into(),
            builtin: None,
            method,
            x0,
            trust_box,
            beta0: 1.0,
            delta: 1.0,
            lambda: None,
            lambda_prime: None,
            stop: StopCriteria::default(),
            inner: InnerSettings::default(),
            feas_tol: None,
            seed: 0,
            output_dir: None,
        }
    }

    /// Run of a registry problem with default parameters.
    pub fn for_builtin(name: &str, method: Method) -> Option<(RunConfig, NlpProblem)> {
        let b = builtin(name)?;
        let mut cfg = RunConfig::new(b.name, method, b.x0, b.trust_box);
        cfg.builtin = Some(b.name.to_string());
        Some((cfg, b.problem))
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.0.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<Entry, ConfigError> {
        self.take(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }
}

fn value_err(e: &Entry, key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        line: e.line,
        key: key.to_string(),
        message: message.into(),
    }
}

fn parse_f64(e: &Entry, key: &str) -> Result<f64, ConfigError> {
    e.value.trim().parse::<f64>().map_err(|_| value_err(e, key, format!("`{}` is not a number", e.value)))
}

fn parse_list(e: &Entry, key: &str) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| value_err(e, key, format!("`{}` is not a number", s.trim()))))
        .collect()
}

fn parse_usize(e: &Entry, key: &str) -> Result<usize, ConfigError> {
    e.value.trim().parse::<usize>().map_err(|_| value_err(e, key, format!("`{}` is not a nonnegative integer", e.value)))
}

fn split_lines(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                message: "empty key".into(),
            });
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = map.insert(key.to_string(), entry) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("key `{key}` already set on line {}", prev.line),
            });
        }
    }
    Ok(Entries(map))
}

const PROBLEM_KEYS: [&str; 5] = ["dimension", "objective", "q_set", "q_params", "trust_box"];

fn parse_set(entries: &mut Entries, n: usize) -> Result<SimpleSet, ConfigError> {
    let Some(kind) = entries.take("q_set") else {
        if let Some(p) = entries.take("q_params") {
            return Err(value_err(&p, "q_params", "given without q_set"));
        }
        return Ok(SimpleSet::WholeSpace);
    };
    let params = match entries.take("q_params") {
        Some(p) => Some((parse_list(&p, "q_params")?, p)),
        None => None,
    };
    let need = |count: usize| -> Result<Vec<f64>, ConfigError> {
        match &params {
            Some((v, e)) if v.len() == count => Ok(v.clone()),
            Some((v, e)) => Err(value_err(e, "q_params", format!("expected {count} values, got {}", v.len()))),
            None => Err(ConfigError::Missing("q_params".into())),
        }
    };
    let set = match kind.value.as_str() {
        "whole" | "nonneg" => {
            if let Some((_, e)) = &params {
                return Err(value_err(e, "q_params", format!("`{}` takes no parameters", kind.value)));
            }
            if kind.value == "whole" {
                SimpleSet::WholeSpace
            } else {
                SimpleSet::NonnegOrthant
            }
        }
        "box" => {
            let v = need(2 * n)?;
            SimpleSet::new_box(v[..n].to_vec(), v[n..].to_vec())
                .map_err(|e| value_err(&kind, "q_params", e.to_string()))?
        }
        "ball" => {
            let v = need(n + 1)?;
            SimpleSet::new_ball(v[..n].to_vec(), v[n]).map_err(|e| value_err(&kind, "q_params", e.to_string()))?
        }
        "simplex" => SimpleSet::new_simplex(need(1)?[0]).map_err(|e| value_err(&kind, "q_params", e.to_string()))?,
        "simplex_cap" => {
            SimpleSet::new_simplex_cap(need(1)?[0]).map_err(|e| value_err(&kind, "q_params", e.to_string()))?
        }
        other => return Err(value_err(&kind, "q_set", format!("unknown set `{other}`"))),
    };
    Ok(set)
}

fn parse_trust_box(entries: &mut Entries, n: usize) -> Result<AxisBox, ConfigError> {
    let Some(e) = entries.take("trust_box") else {
        return Ok(AxisBox::symmetric(n, DEFAULT_TRUST_RADIUS));
    };
    let v = parse_list(&e, "trust_box")?;
    let b = match v.len() {
        1 => AxisBox::new(vec![-v[0]; n], vec![v[0]; n]),
        k if k == 2 * n => AxisBox::new(v[..n].to_vec(), v[n..].to_vec()),
        k => return Err(value_err(&e, "trust_box", format!("expected 1 or {} values, got {k}", 2 * n))),
    };
    b.map_err(|err| value_err(&e, "trust_box", err.to_string()))
}

fn parse_function(
    entries: &mut Entries,
    key: &str,
    n: usize,
    trust: &AxisBox,
) -> Result<Option<SmoothFunction>, ConfigError> {
    let Some(e) = entries.take(key) else {
        return Ok(None);
    };
    let poly = parse_polynomial(&e.value, n).map_err(|err| value_err(&e, key, err.to_string()))?;
    let override_key = format!("lipschitz.{key}");
    let f = match entries.take(&override_key) {
        Some(l) => {
            let v = parse_f64(&l, &override_key)?;
            SmoothFunction::from_polynomial_with_lipschitz(poly, v).map_err(|err| value_err(&l, &override_key, err.to_string()))?
        }
        None => SmoothFunction::from_polynomial(poly, trust).map_err(|err| value_err(&e, key, err.to_string()))?,
    };
    Ok(Some(f))
}

fn parse_problem(entries: &mut Entries, name: &str) -> Result<(NlpProblem, AxisBox), ConfigError> {
    let dim = entries.required("dimension")?;
    let n = parse_usize(&dim, "dimension")?;
    if n == 0 {
        return Err(value_err(&dim, "dimension", "must be positive"));
    }
    let q = parse_set(entries, n)?;
    let trust = parse_trust_box(entries, n)?;
    let objective = parse_function(entries, "objective", n, &trust)?.ok_or_else(|| ConfigError::Missing("objective".into()))?;
    let mut constraints = Vec::new();
    loop {
        let key = format!("constraint.{}", constraints.len() + 1);
        match parse_function(entries, &key, n, &trust)? {
            Some(c) => constraints.push(c),
            None => break,
        }
    }
    Ok((NlpProblem::new(name, objective, constraints, q)?, trust))
}

/// Parses configuration text.
pub fn parse_config(text: &str) -> Result<(RunConfig, NlpProblem), ConfigError> {
    let mut entries = split_lines(text)?;
    let name_entry = entries.take("name");

    let (mut cfg_name, builtin_name, problem, trust, default_x0) = match entries.take("builtin") {
        Some(e) => {
            if let Some(k) = PROBLEM_KEYS.iter().find(|k| entries.0.contains_key(**k)) {
                let line = entries.0[*k].line;
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("`{k}` cannot be combined with `builtin`"),
                });
            }
            let b = builtin(&e.value).ok_or_else(|| value_err(&e, "builtin", format!("unknown builtin `{}`", e.value)))?;
            (b.name.to_string(), Some(b.name.to_string()), b.problem, b.trust_box, Some(b.x0))
        }
        None => {
            let name = name_entry.as_ref().map(|e| e.value.clone()).unwrap_or_else(|| "problem".into());
            let (p, t) = parse_problem(&mut entries, &name)?;
            (name, None, p, t, None)
        }
    };
    if let Some(e) = &name_entry {
        cfg_name = e.value.clone();
    }
    let n = problem.dimension();

    let m = entries.required("method")?;
    let method = Method::from_name(&m.value)
        .ok_or_else(|| value_err(&m, "method", format!("unknown method `{}` (mb, esqm, sl1qp, gradproj)", m.value)))?;

    let x0 = match (entries.take("x0"), default_x0) {
        (Some(e), _) => {
            let v = parse_list(&e, "x0")?;
            if v.len() != n {
                return Err(value_err(&e, "x0", format!("expected {n} values, got {}", v.len())));
            }
            v
        }
        (None, Some(v)) => v,
        (None, None) => return Err(ConfigError::Missing("x0".into())),
    };

    let mut cfg = RunConfig::new(cfg_name, method, x0, trust);
    cfg.builtin = builtin_name;
    if let Some(e) = entries.take("beta0") {
        cfg.beta0 = parse_f64(&e, "beta0")?;
    }
    if let Some(e) = entries.take("delta") {
        cfg.delta = parse_f64(&e, "delta")?;
    }
    if let Some(e) = entries.take("lambda") {
        cfg.lambda = Some(parse_f64(&e, "lambda")?);
    }
    if let Some(e) = entries.take("lambda_prime") {
        cfg.lambda_prime = Some(parse_f64(&e, "lambda_prime")?);
    }
    if let Some(e) = entries.take("tol_step") {
        cfg.stop.tol_step = parse_f64(&e, "tol_step")?;
    }
    if let Some(e) = entries.take("max_iters") {
        cfg.stop.max_iters = parse_usize(&e, "max_iters")?;
    }
    if let Some(e) = entries.take("divergence_radius") {
        cfg.stop.divergence_radius = parse_f64(&e, "divergence_radius")?;
    }
    if let Some(e) = entries.take("eps_sub") {
        cfg.inner.eps_sub = parse_f64(&e, "eps_sub")?;
    }
    if let Some(e) = entries.take("feas_tol") {
        cfg.feas_tol = Some(parse_f64(&e, "feas_tol")?);
    }
    if let Some(e) = entries.take("seed") {
        cfg.seed = e.value.parse().map_err(|_| value_err(&e, "seed", "not an unsigned integer"))?;
    }
    if let Some(e) = entries.take("output_dir") {
        cfg.output_dir = Some(PathBuf::from(&e.value));
    }

    if let Some((key, e)) = entries.0.iter().min_by_key(|(_, e)| e.line) {
        return Err(ConfigError::Syntax {
            line: e.line,
            message: format!("unknown or misplaced key `{key}`"),
        });
    }
    Ok((cfg, problem))
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<(RunConfig, NlpProblem), ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
