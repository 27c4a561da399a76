//! Experiment configuration documents (TOML) with strict schema validation.
//!
//! ```toml
//! seed = 42
//! x0 = [10.0]
//!
//! [problem]
//! name = "quartic1d"
//!
//! [solver]
//! regime = "trppm_fixed_t"
//! t = 0.5
//! lambda_rule = "bisection"
//! max_iters = 1000
//!
//! [outputs]
//! csv = "trace.csv"
//! report = "report.json"
//!
//! [[verification]]
//! name = "envelope"
//! tolerance = 1e-7
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use toml::{Table, Value};

use crate::linalg::Vector;
use crate::problem::{make_problem, CatalogEntry, CatalogError, Param, Problem};
use crate::solver::{FitBasis, LambdaRule, RateQuantity, Regime, SolverConfig};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),
}

impl ConfigError {
    /// Offending dotted keys and messages, empty for parse errors.
    pub fn issues(&self) -> &[String] {
        match self {
            ConfigError::Parse(_) => &[],
            ConfigError::Schema(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    /// `f_gap <= envelope` at every record.
    Envelope,
    /// Tight constraint and `step_len = t_k` while outside the neighborhood.
    ActiveStep,
    /// `f_gap` non-increasing.
    Descent,
    /// `dist` non-increasing.
    Fejer,
    /// `step_len` non-increasing.
    StepMonotone,
    /// Fitted log-rate inside `range`.
    Slope,
    /// `f_gap_{k+1} / f_gap_k` below the regime's per-step factor.
    Contraction,
    /// `f_gap_{k+1} <= q_k f_gap_k`.
    QDescent,
    /// `phi(lambda_k, x_k) >= t_k`.
    AdmissibleLambda,
}

impl CheckKind {
    pub const NAMES: [&'static str; 9] = [
        "envelope",
        "active_step",
        "descent",
        "fejer",
        "step_monotone",
        "slope",
        "contraction",
        "q_descent",
        "admissible_lambda",
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckKind::Envelope => "envelope",
            CheckKind::ActiveStep => "active_step",
            CheckKind::Descent => "descent",
            CheckKind::Fejer => "fejer",
            CheckKind::StepMonotone => "step_monotone",
            CheckKind::Slope => "slope",
            CheckKind::Contraction => "contraction",
            CheckKind::QDescent => "q_descent",
            CheckKind::AdmissibleLambda => "admissible_lambda",
        }
    }

    pub fn default_tolerance(&self) -> f64 {
        match self {
            CheckKind::Envelope => 1e-7,
            CheckKind::ActiveStep | CheckKind::AdmissibleLambda => 1e-6,
            CheckKind::Slope => 1e-12,
            _ => 1e-9,
        }
    }
}

impl FromStr for CheckKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "envelope" => CheckKind::Envelope,
            "active_step" => CheckKind::ActiveStep,
            "descent" => CheckKind::Descent,
            "fejer" => CheckKind::Fejer,
            "step_monotone" => CheckKind::StepMonotone,
            "slope" => CheckKind::Slope,
            "contraction" => CheckKind::Contraction,
            "q_descent" => CheckKind::QDescent,
            "admissible_lambda" => CheckKind::AdmissibleLambda,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub tolerance: f64,
    /// Inclusive record range for slope fits; defaults to the whole trace.
    pub window: Option<(usize, usize)>,
    /// Accepted slope interval.
    pub range: Option<(f64, f64)>,
    pub quantity: RateQuantity,
    pub basis: FitBasis,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub x0: Vector,
    pub problem_entry: CatalogEntry,
    pub problem: Problem,
    pub solver: SolverConfig,
    pub outputs: Outputs,
    pub verification: Vec<CheckSpec>,
    source: Table,
}

impl ExperimentConfig {
    /// The parsed document, used to derive sweep variants.
    pub fn source(&self) -> &Table {
        &self.source
    }

    /// A copy with the numeric key `axis` (dotted path) set to `value`.
    pub fn with_value(&self, axis: &str, value: f64) -> Result<ExperimentConfig, ConfigError> {
        let parts: Vec<&str> = axis.split('.').collect();
        if !is_numeric_axis(axis) {
            return Err(ConfigError::Schema(vec![format!(
                "`{axis}` is not a numeric configuration key"
            )]));
        }
        let integral = matches!(parts.as_slice(), ["seed"] | ["solver", "max_iters"]);
        let v = if integral {
            if value.fract() != 0.0 || value < 0.0 || value > i64::MAX as f64 {
                return Err(ConfigError::Schema(vec![format!(
                    "{axis}: must be a nonnegative integer, got {value}"
                )]));
            }
            Value::Integer(value as i64)
        } else {
            Value::Float(value)
        };
        let mut table = self.source.clone();
        let mut cursor = &mut table;
        for p in &parts[..parts.len() - 1] {
            let entry = cursor
                .entry(p.to_string())
                .or_insert_with(|| Value::Table(Table::new()));
            cursor = entry
                .as_table_mut()
                .ok_or_else(|| ConfigError::Schema(vec![format!("`{p}` is not a section")]))?;
        }
        cursor.insert(parts[parts.len() - 1].to_string(), v);
        from_table(table)
    }
}

/// Keys that [`ExperimentConfig::with_value`] and sweeps accept.
pub fn is_numeric_axis(axis: &str) -> bool {
    let parts: Vec<&str> = axis.split('.').collect();
    match parts.as_slice() {
        ["seed"] => true,
        ["solver", k] => ["t", "lambda", "theta", "epsilon", "max_iters", "stop_dist"].contains(k),
        ["problem", k] => !k.is_empty() && *k != "name",
        _ => false,
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string().trim_end().to_string()))?;
    from_table(table)
}

struct Issues(Vec<String>);

impl Issues {
    fn push(&mut self, key: &str, msg: impl std::fmt::Display) {
        self.0.push(format!("{key}: {msg}"));
    }

    fn unknown(&mut self, table: &Table, prefix: &str, allowed: &[&str]) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                self.0.push(format!("{}: unknown key", join(prefix, k)));
            }
        }
    }

    fn number(&mut self, v: &Value, key: &str) -> Option<f64> {
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            Value::String(s)
                if matches!(s.to_ascii_lowercase().as_str(), "inf" | "+inf" | "infinity") =>
            {
                Some(f64::INFINITY)
            }
            _ => {
                self.push(key, "must be a number");
                None
            }
        }
    }

    fn integer(&mut self, v: &Value, key: &str) -> Option<u64> {
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            _ => {
                self.push(key, "must be a nonnegative integer");
                None
            }
        }
    }

    fn string<'v>(&mut self, v: &'v Value, key: &str) -> Option<&'v str> {
        match v {
            Value::String(s) => Some(s),
            _ => {
                self.push(key, "must be a string");
                None
            }
        }
    }

    fn list(&mut self, v: &Value, key: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.push(key, "must be a list of numbers");
            return None;
        };
        let before = self.0.len();
        let out: Vec<f64> = items
            .iter()
            .enumerate()
            .filter_map(|(i, x)| self.number(x, &format!("{key}[{i}]")))
            .collect();
        (self.0.len() == before).then_some(out)
    }
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn section<'t>(root: &'t Table, name: &str, issues: &mut Issues) -> Option<&'t Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            issues.push(name, "must be a section");
            None
        }
        None => None,
    }
}

fn to_param(v: &Value, key: &str, issues: &mut Issues) -> Option<Param> {
    match v {
        Value::Array(rows) if rows.iter().any(|r| matches!(r, Value::Array(_))) => {
            let before = issues.0.len();
            let m: Vec<Vec<f64>> = rows
                .iter()
                .enumerate()
                .filter_map(|(i, r)| issues.list(r, &format!("{key}[{i}]")))
                .collect();
            (issues.0.len() == before).then_some(Param::Matrix(m))
        }
        Value::Array(_) => issues.list(v, key).map(Param::List),
        _ => issues.number(v, key).map(Param::Number),
    }
}

fn from_table(root: Table) -> Result<ExperimentConfig, ConfigError> {
    let mut issues = Issues(Vec::new());
    issues.unknown(
        &root,
        "",
        &["seed", "x0", "problem", "solver", "outputs", "verification"],
    );

    let seed = match root.get("seed") {
        Some(v) => issues.integer(v, "seed").unwrap_or(DEFAULT_SEED),
        None => DEFAULT_SEED,
    };

    let problem = parse_problem(&root, &mut issues);
    let solver = parse_solver(&root, &mut issues);
    let outputs = parse_outputs(&root, &mut issues);
    let verification = parse_verification(&root, &mut issues);

    let x0 = match root.get("x0") {
        Some(v) => issues.list(v, "x0"),
        None => {
            issues.push("x0", "missing");
            None
        }
    };
    let x0 = x0.and_then(|c| match Vector::new(c) {
        Ok(v) => Some(v),
        Err(e) => {
            issues.push("x0", e);
            None
        }
    });
    if let (Some(x0), Some((_, p))) = (&x0, &problem) {
        if x0.dim() != p.dim() {
            issues.push(
                "x0",
                format!("expected dimension {}, got {}", p.dim(), x0.dim()),
            );
        } else if !p.value(x0).map(f64::is_finite).unwrap_or(false) {
            issues.push("x0", "lies outside the domain of the objective");
        }
    }

    if !issues.0.is_empty() {
        return Err(ConfigError::Schema(issues.0));
    }
    let (problem_entry, problem) = problem.expect("no issues");
    Ok(ExperimentConfig {
        seed,
        x0: x0.expect("no issues"),
        problem_entry,
        problem,
        solver: solver.expect("no issues"),
        outputs,
        verification,
        source: root,
    })
}

fn parse_problem(root: &Table, issues: &mut Issues) -> Option<(CatalogEntry, Problem)> {
    let Some(table) = section(root, "problem", issues) else {
        if !root.contains_key("problem") {
            issues.push("problem", "missing section");
        }
        return None;
    };
    let name = match table.get("name") {
        Some(v) => issues.string(v, "problem.name")?,
        None => {
            issues.push("problem.name", "missing");
            return None;
        }
    };
    let mut params = BTreeMap::new();
    let before = issues.0.len();
    for (k, v) in table.iter().filter(|(k, _)| k.as_str() != "name") {
        if let Some(p) = to_param(v, &format!("problem.{k}"), issues) {
            params.insert(k.clone(), p);
        }
    }
    if issues.0.len() != before {
        return None;
    }
    let entry = match CatalogEntry::from_params(name, &params) {
        Ok(e) => e,
        Err(CatalogError::UnknownKeys(keys)) => {
            for k in keys {
                issues.push(
                    &format!("problem.{k}"),
                    format!("unknown key for problem `{name}`"),
                );
            }
            return None;
        }
        Err(CatalogError::UnknownName(_)) => {
            issues.push("problem.name", CatalogError::UnknownName(name.to_string()));
            return None;
        }
        Err(CatalogError::Missing(k)) => {
            issues.push(&format!("problem.{k}"), "missing");
            return None;
        }
        Err(CatalogError::WrongType { key, expected }) => {
            issues.push(&format!("problem.{key}"), format!("must be {expected}"));
            return None;
        }
    };
    match make_problem(&entry) {
        Ok(p) => Some((entry, p)),
        Err(e) => {
            issues.push("problem", e);
            None
        }
    }
}

fn parse_solver(root: &Table, issues: &mut Issues) -> Option<SolverConfig> {
    let Some(table) = section(root, "solver", issues) else {
        if !root.contains_key("solver") {
            issues.push("solver", "missing section");
        }
        return None;
    };
    issues.unknown(
        table,
        "solver",
        &[
            "regime",
            "t",
            "lambda",
            "theta",
            "epsilon",
            "lambda_rule",
            "max_iters",
            "stop_dist",
        ],
    );
    let before = issues.0.len();

    let regime = match table.get("regime") {
        Some(v) => issues
            .string(v, "solver.regime")
            .and_then(|s| match s.parse::<Regime>() {
                Ok(r) => Some(r),
                Err(e) => {
                    issues.push("solver.regime", e);
                    None
                }
            }),
        None => {
            issues.push("solver.regime", "missing");
            None
        }
    };
    let mut get = |key: &str, check: fn(f64) -> bool, requirement: &str| -> Option<f64> {
        let path = format!("solver.{key}");
        let v = issues.number(table.get(key)?, &path)?;
        if check(v) {
            Some(v)
        } else {
            issues.push(&path, format!("{requirement}, got {v}"));
            None
        }
    };
    let t = get("t", |v| v > 0.0, "must be positive");
    let lambda = get(
        "lambda",
        |v| v >= 0.0 && v.is_finite(),
        "must be finite and nonnegative",
    );
    let theta = get("theta", |v| v > 0.0 && v <= 1.0, "must lie in (0, 1]");
    let epsilon = get(
        "epsilon",
        |v| v > 0.0 && v.is_finite(),
        "must be positive and finite",
    );
    let stop_dist = get("stop_dist", |v| v >= 0.0, "must be nonnegative");
    let max_iters = match table.get("max_iters") {
        Some(v) => match issues.integer(v, "solver.max_iters") {
            Some(0) => {
                issues.push("solver.max_iters", "must be positive");
                None
            }
            other => other.map(|n| n as usize),
        },
        None => Some(DEFAULT_MAX_ITERS),
    };
    let lambda_rule = match table.get("lambda_rule") {
        Some(v) => {
            issues
                .string(v, "solver.lambda_rule")
                .and_then(|s| match s.parse::<LambdaRule>() {
                    Ok(r) => Some(r),
                    Err(e) => {
                        issues.push("solver.lambda_rule", e);
                        None
                    }
                })
        }
        None => None,
    };
    if issues.0.len() != before {
        return None;
    }
    let regime = regime?;

    let needs = |issues: &mut Issues, key: &str, v: Option<f64>| {
        if v.is_none() {
            issues.push(
                &format!("solver.{key}"),
                format!("required for regime `{regime}`"),
            );
        }
    };
    match regime {
        Regime::Ppm | Regime::TrppmUnconstrained => needs(issues, "lambda", lambda),
        Regime::Bpm => needs(issues, "t", t),
        Regime::TrppmFixedT => {
            needs(issues, "t", t);
            if lambda_rule == Some(LambdaRule::Constant) {
                needs(issues, "lambda", lambda);
            }
        }
        Regime::TrppmFixedLambda => {
            needs(issues, "lambda", lambda);
            needs(issues, "epsilon", epsilon);
        }
    }
    if issues.0.len() != before {
        return None;
    }
    let config = SolverConfig {
        regime,
        t: t.unwrap_or(f64::INFINITY),
        lambda: lambda.unwrap_or(0.0),
        theta: theta.unwrap_or(1.0),
        epsilon: epsilon.unwrap_or(0.0),
        lambda_rule: lambda_rule.unwrap_or(match regime {
            Regime::TrppmFixedT => LambdaRule::Bisection,
            _ => LambdaRule::Constant,
        }),
        max_iters: max_iters?,
        stop_dist,
    };
    match config.validate() {
        Ok(()) => Some(config),
        Err(e) => {
            issues.push("solver", e);
            None
        }
    }
}

fn parse_outputs(root: &Table, issues: &mut Issues) -> Outputs {
    let mut out = Outputs::default();
    let Some(table) = section(root, "outputs", issues) else {
        return out;
    };
    issues.unknown(table, "outputs", &["csv", "report"]);
    if let Some(v) = table.get("csv") {
        out.csv = issues.string(v, "outputs.csv").map(PathBuf::from);
    }
    if let Some(v) = table.get("report") {
        out.report = issues.string(v, "outputs.report").map(PathBuf::from);
    }
    out
}

fn parse_verification(root: &Table, issues: &mut Issues) -> Vec<CheckSpec> {
    let Some(v) = root.get("verification") else {
        return Vec::new();
    };
    let Value::Array(items) = v else {
        issues.push(
            "verification",
            "must be an array of tables ([[verification]])",
        );
        return Vec::new();
    };
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let prefix = format!("verification[{i}]");
        let Value::Table(t) = item else {
            issues.push(&prefix, "must be a table");
            continue;
        };
        issues.unknown(
            t,
            &prefix,
            &["name", "tolerance", "window", "range", "quantity", "basis"],
        );
        let key = |k: &str| format!("{prefix}.{k}");

        let kind = match t.get("name") {
            Some(v) => issues
                .string(v, &key("name"))
                .and_then(|s| match s.parse::<CheckKind>() {
                    Ok(k) => Some(k),
                    Err(()) => {
                        issues.push(
                            &key("name"),
                            format!(
                                "unknown check `{s}` (expected one of: {})",
                                CheckKind::NAMES.join(", ")
                            ),
                        );
                        None
                    }
                }),
            None => {
                issues.push(&key("name"), "missing");
                None
            }
        };
        let tolerance = match t.get("tolerance") {
            Some(v) => match issues.number(v, &key("tolerance")) {
                Some(x) if x > 0.0 && x.is_finite() => Some(x),
                Some(x) => {
                    issues.push(&key("tolerance"), format!("must be positive, got {x}"));
                    None
                }
                None => None,
            },
            None => None,
        };
        let window = t.get("window").and_then(|v| {
            let Value::Array(a) = v else {
                issues.push(&key("window"), "must be [k_lo, k_hi]");
                return None;
            };
            let ks: Vec<u64> = a
                .iter()
                .filter_map(|x| issues.integer(x, &key("window")))
                .collect();
            match ks.as_slice() {
                [lo, hi] if lo <= hi => Some((*lo as usize, *hi as usize)),
                _ => {
                    issues.push(&key("window"), "must be [k_lo, k_hi] with k_lo <= k_hi");
                    None
                }
            }
        });
        let range = t
            .get("range")
            .and_then(|v| match issues.list(v, &key("range")).as_deref() {
                Some([lo, hi]) if lo <= hi => Some((*lo, *hi)),
                Some(_) => {
                    issues.push(&key("range"), "must be [lo, hi] with lo <= hi");
                    None
                }
                None => None,
            });
        let quantity = match t
            .get("quantity")
            .map(|v| issues.string(v, &key("quantity")))
        {
            None => RateQuantity::FGap,
            Some(Some("f_gap")) => RateQuantity::FGap,
            Some(Some("dist")) => RateQuantity::Dist,
            Some(Some(other)) => {
                issues.push(
                    &key("quantity"),
                    format!("must be `f_gap` or `dist`, got `{other}`"),
                );
                RateQuantity::FGap
            }
            Some(None) => RateQuantity::FGap,
        };
        let basis = match t.get("basis").map(|v| issues.string(v, &key("basis"))) {
            None => FitBasis::Linear,
            Some(Some("linear")) => FitBasis::Linear,
            Some(Some("loglog")) => FitBasis::LogLog,
            Some(Some(other)) => {
                issues.push(
                    &key("basis"),
                    format!("must be `linear` or `loglog`, got `{other}`"),
                );
                FitBasis::Linear
            }
            Some(None) => FitBasis::Linear,
        };
        let Some(kind) = kind else { continue };
        if kind == CheckKind::Slope && range.is_none() && !t.contains_key("range") {
            issues.push(&key("range"), "required for slope checks");
        }
        out.push(CheckSpec {
            kind,
            tolerance: tolerance.unwrap_or(kind.default_tolerance()),
            window,
            range,
            quantity,
            basis,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
x0 = [10.0]

[problem]
name = "quartic1d"

[solver]
regime = "ppm"
lambda = 1.0
max_iters = 100
"#;

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.solver.regime, Regime::Ppm);
        assert_eq!(c.solver.t, f64::INFINITY);
        assert_eq!(c.solver.max_iters, 100);
        assert_eq!(c.x0.as_slice(), &[10.0]);
        assert!(c.verification.is_empty());
    }

    #[test]
    fn negative_t_names_key() {
        let text = MINIMAL.replace("regime = \"ppm\"", "regime = \"trppm_fixed_t\"\nt = -1.0");
        let e = parse_config(&text).unwrap_err();
        assert!(e.issues().iter().any(|i| i.starts_with("solver.t")), "{e}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("lambda = 1.0", "lambda = 1.0\nmomentum = 0.9");
        let e = parse_config(&text).unwrap_err();
        assert!(
            e.issues().iter().any(|i| i.starts_with("solver.momentum")),
            "{e}"
        );
    }

    #[test]
    fn parse_error_has_location() {
        let e = parse_config("x0 = [1.0\n[problem]").unwrap_err();
        let ConfigError::Parse(msg) = e else { panic!() };
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn problem_params_and_matrix() {
        let text = r#"
x0 = [6.0, 8.0]
[problem]
name = "quadratic"
q = [[2.0, 0.0], [0.0, 1]]
[solver]
regime = "trppm_fixed_t"
t = 0.5
"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.problem.dim(), 2);
        assert_eq!(c.solver.lambda_rule, LambdaRule::Bisection);
    }

    #[test]
    fn infinite_radius_spellings() {
        for t in ["inf", "\"inf\""] {
            let text = MINIMAL.replace("lambda = 1.0", &format!("lambda = 1.0\nt = {t}"));
            assert_eq!(parse_config(&text).unwrap().solver.t, f64::INFINITY);
        }
    }

    #[test]
    fn collects_several_issues() {
        let text = r#"
x0 = [1.0, 2.0]
color = "red"
[problem]
name = "quartic1d"
[solver]
regime = "bpm"
[[verification]]
name = "slope"
"#;
        let e = parse_config(text).unwrap_err();
        let issues = e.issues().join("\n");
        assert!(issues.contains("color: unknown key"));
        assert!(issues.contains("solver.t: required"));
        assert!(issues.contains("verification[0].range"));
    }

    #[test]
    fn dimension_mismatch_reported() {
        let text = MINIMAL.replace("x0 = [10.0]", "x0 = [1.0, 2.0]");
        let e = parse_config(&text).unwrap_err();
        assert!(e.issues().iter().any(|i| i.starts_with("x0")));
    }

    #[test]
    fn with_value_revalidates() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(
            c.with_value("solver.lambda", 3.0).unwrap().solver.lambda,
            3.0
        );
        assert!(c.with_value("solver.lambda", -3.0).is_err());
        assert!(c.with_value("solver.regime", 1.0).is_err());
        assert_eq!(
            c.with_value("solver.max_iters", 7.0)
                .unwrap()
                .solver
                .max_iters,
            7
        );
    }
}
