//! Plain-text experiment configuration.
//!
//! A file holds one `[section]` per experiment, each a list of `key = value`
//! lines. Keys that appear before the first section are defaults for every
//! section. `#` starts a comment.
//!
//! ```text
//! [geometric-scaling]
//! kind = lemma22
//! phi = gamma(1, 1)
//! j = 0
//! k = 1
//! schedule = 1e-1, 1e-2, 1e-3, 1e-4
//! grid = linspace(0, 10, 101)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::convergence_stats::{grid2, linspace, logspace, mc_tolerance};
use crate::error::{Error, Result};
use crate::sum_limits::{BaseCf, Exponent, SummandFamily};
use crate::transforms::{ExponentMeasureSpec, LtSpec, Point2, PsiSpec};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Lemma22,
    NasSum,
    SumLimit,
    SumAttraction,
    NasMax,
    MaxLimit,
    MaxAttraction,
    Subordination,
    MidCheck,
    Semigroup,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 10] = [
        ExperimentKind::Lemma22,
        ExperimentKind::NasSum,
        ExperimentKind::SumLimit,
        ExperimentKind::SumAttraction,
        ExperimentKind::NasMax,
        ExperimentKind::MaxLimit,
        ExperimentKind::MaxAttraction,
        ExperimentKind::Subordination,
        ExperimentKind::MidCheck,
        ExperimentKind::Semigroup,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Lemma22 => "lemma22",
            ExperimentKind::NasSum => "nas-sum",
            ExperimentKind::SumLimit => "sum-limit",
            ExperimentKind::SumAttraction => "sum-attraction",
            ExperimentKind::NasMax => "nas-max",
            ExperimentKind::MaxLimit => "max-limit",
            ExperimentKind::MaxAttraction => "max-attraction",
            ExperimentKind::Subordination => "subordination",
            ExperimentKind::MidCheck => "mid-check",
            ExperimentKind::Semigroup => "semigroup",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            ExperimentKind::Lemma22 => "Laplace transform of θN_θ against φ(kv) along a θ schedule",
            ExperimentKind::NasSum => "residual sup|(1 - h_θ)/θ - ψ| of a summand family along a θ schedule",
            ExperimentKind::SumLimit => "simulated random sums against φ(kψ) along a θ schedule",
            ExperimentKind::SumAttraction => "analytic P_n(h(t/a_n)) against φ(kψ) along an n schedule",
            ExperimentKind::NasMax => "residual sup|(1 - H_θ)/θ - T| of G^θ along a θ schedule",
            ExperimentKind::MaxLimit => "simulated random maxima against φ(kT) along a θ schedule",
            ExperimentKind::MaxAttraction => "analytic P_n(H(a_n y)) against φ(kT) along an n schedule",
            ExperimentKind::Subordination => "Monte Carlo E[exp(-Z T(y))] against φ(T(y)), standardized error",
            ExperimentKind::MidCheck => "exponent-measure (log-supermodularity) check on a lattice",
            ExperimentKind::Semigroup => "N-sum stability residual sup|P_θ(z) - φ(φ^-1(z)/θ)|",
        }
    }

    /// Whether the schedule lists sample sizes `n` rather than `θ` values.
    pub fn uses_n_schedule(&self) -> bool {
        matches!(self, ExperimentKind::SumAttraction | ExperimentKind::MaxAttraction)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }
}

/// Raw `key = value` sections in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: Vec<(String, BTreeMap<String, String>)>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut defaults = BTreeMap::new();
        let mut sections: Vec<(String, BTreeMap<String, String>)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| Error::Config(format!("line {}: malformed section header `{line}`", lineno + 1)))?;
                if sections.iter().any(|(n, _)| n == name) {
                    return Err(Error::Config(format!("line {}: duplicate section `{name}`", lineno + 1)));
                }
                sections.push((name.to_string(), defaults.clone()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1)))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            match sections.last_mut() {
                Some((_, map)) => map.insert(key, value),
                None => defaults.insert(key, value),
            };
        }
        if sections.is_empty() {
            return Err(Error::Config("configuration has no [section]".into()));
        }
        Ok(Self { sections })
    }

    /// Applies a `key=value` override to every section, or
    /// `section.key=value` to one.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some((section, key)) = key.split_once('.') {
            let (_, map) = self
                .sections
                .iter_mut()
                .find(|(n, _)| n == section)
                .ok_or_else(|| Error::Config(format!("override names unknown section `{section}`")))?;
            map.insert(key.to_string(), value.to_string());
        } else {
            for (_, map) in &mut self.sections {
                map.insert(key.to_string(), value.to_string());
            }
        }
        Ok(())
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    pub phi: Option<LtSpec>,
    pub exponent: Option<Exponent>,
    pub summand: Option<SummandFamily>,
    pub mu: Option<ExponentMeasureSpec>,
    pub base_cf: Option<BaseCf>,
    pub base_measure: Option<ExponentMeasureSpec>,
    pub norming: [f64; 2],
    pub subsequence: bool,
    pub j: u32,
    pub k: u32,
    /// `θ` values (decreasing) or `n` values (increasing).
    pub schedule: Vec<f64>,
    /// One-dimensional grid: `t`, `s`, `v` or `z` depending on the kind.
    pub grid: Vec<f64>,
    pub y_grid: Vec<Point2>,
    pub lattice: Vec<f64>,
    pub reps: usize,
    pub chunk_size: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub corrupt: bool,
    /// Semigroup check at the matched parameter `θ/(1 + θ)`.
    pub matched: bool,
}

const KNOWN_KEYS: [&str; 21] = [
    "kind", "phi", "psi", "summand", "mu", "base", "norming", "subsequence", "j", "k", "schedule", "grid", "y_grid",
    "y", "lattice", "reps", "chunk_size", "seed", "tolerance", "corrupt", "matched",
];

impl ExperimentConfig {
    pub fn from_section(id: &str, map: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(unknown) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("[{id}]: unknown key `{unknown}`")));
        }
        let ctx = |e: Error| match e {
            Error::Config(m) | Error::Domain(m) => Error::Config(format!("[{id}]: {m}")),
            other => other,
        };
        Self::build(id, map).map_err(ctx)
    }

    fn build(id: &str, map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| map.get(key).map(String::as_str);
        let require = |key: &str| get(key).ok_or_else(|| Error::Config(format!("missing key `{key}`")));
        let kind: ExperimentKind = require("kind")?.parse()?;

        let phi = get("phi").map(parse_lt).transpose()?;
        let exponent = get("psi").map(parse_exponent).transpose()?;
        let summand = get("summand").map(parse_summand).transpose()?;
        let mu = get("mu").map(parse_measure).transpose()?;
        let j = get("j").map(|v| parse_num::<u32>("j", v)).transpose()?.unwrap_or(0);
        let k = get("k").map(|v| parse_num::<u32>("k", v)).transpose()?.unwrap_or(1);
        let reps = get("reps").map(|v| parse_count("reps", v)).transpose()?.unwrap_or(100_000);
        let chunk_size = get("chunk_size").map(|v| parse_count("chunk_size", v)).transpose()?.unwrap_or(crate::convergence_stats::DEFAULT_CHUNK_SIZE);
        let seed = get("seed").map(|v| parse_num::<u64>("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED);
        let subsequence = get("subsequence").map(|v| parse_bool("subsequence", v)).transpose()?.unwrap_or(false);
        let corrupt = get("corrupt").map(|v| parse_bool("corrupt", v)).transpose()?.unwrap_or(false);
        let matched = get("matched").map(|v| parse_bool("matched", v)).transpose()?.unwrap_or(false);
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if reps == 0 || chunk_size == 0 {
            return Err(Error::Config("reps and chunk_size must be >= 1".into()));
        }

        let laplace = summand.is_some_and(|s| s.uses_laplace()) || exponent.is_some_and(|e| e.uses_laplace());
        let (default_schedule, default_grid): (Vec<f64>, Vec<f64>) = match kind {
            ExperimentKind::Lemma22 => (vec![1e-1, 1e-2, 1e-3, 1e-4], linspace(0.0, 10.0, 101)),
            ExperimentKind::Semigroup => (vec![1e-1], (1..100).map(|i| i as f64 / 100.0).collect()),
            ExperimentKind::SumAttraction | ExperimentKind::MaxAttraction => (vec![1e2, 1e3, 1e4], linspace(-5.0, 5.0, 101)),
            ExperimentKind::MaxLimit => (vec![1e-1, 1e-2], Vec::new()),
            ExperimentKind::Subordination => (vec![reps as f64], Vec::new()),
            ExperimentKind::MidCheck => (vec![1.0], Vec::new()),
            _ if laplace => (vec![1e-1, 1e-2, 1e-3], linspace(0.0, 10.0, 101)),
            _ => (vec![1e-1, 1e-2, 1e-3], linspace(-5.0, 5.0, 101)),
        };
        let schedule = get("schedule").map(|v| parse_grid("schedule", v)).transpose()?.unwrap_or(default_schedule);
        let grid = get("grid").map(|v| parse_grid("grid", v)).transpose()?.unwrap_or(default_grid);
        let y_grid = match (get("y"), get("y_grid")) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `y` or `y_grid`, not both".into())),
            (Some(p), None) => vec![parse_point(p)?],
            (None, Some(axis)) => {
                let axis = parse_grid("y_grid", axis)?;
                grid2(&axis, &axis)
            }
            (None, None) if kind == ExperimentKind::Subordination => vec![[1.0, 1.0]],
            (None, None) => {
                let axis = logspace(0.25, 4.0, 7);
                grid2(&axis, &axis)
            }
        };
        let lattice = get("lattice").map(|v| parse_grid("lattice", v)).transpose()?.unwrap_or_else(|| logspace(0.1, 10.0, 20));

        let (base_cf, base_measure) = match (kind, get("base")) {
            (ExperimentKind::SumAttraction, Some(b)) => (Some(parse_base_cf(b)?), None),
            (ExperimentKind::MaxAttraction, Some(b)) => (None, Some(parse_measure(b)?)),
            _ => (None, None),
        };
        let norming = match get("norming") {
            None => [1.0, 1.0],
            Some(v) => match parse_grid("norming", v)?.as_slice() {
                [p] => [*p, *p],
                [p1, p2] => [*p1, *p2],
                _ => return Err(Error::Config("norming takes one or two powers".into())),
            },
        };

        let default_tolerance = match kind {
            ExperimentKind::Lemma22 | ExperimentKind::SumAttraction | ExperimentKind::MaxAttraction => 1e-3,
            ExperimentKind::NasSum | ExperimentKind::NasMax => 0.05,
            ExperimentKind::SumLimit | ExperimentKind::MaxLimit => mc_tolerance(reps, 1.0),
            ExperimentKind::Subordination => 3.0,
            ExperimentKind::MidCheck => crate::max_limits::SUPERMODULARITY_SLACK,
            ExperimentKind::Semigroup => 1e-12,
        };
        let tolerance = get("tolerance").map(|v| parse_num::<f64>("tolerance", v)).transpose()?.unwrap_or(default_tolerance);

        let config = Self {
            id: id.to_string(),
            kind,
            phi,
            exponent,
            summand,
            mu,
            base_cf,
            base_measure,
            norming,
            subsequence,
            j,
            k,
            schedule,
            grid,
            y_grid,
            lattice,
            reps,
            chunk_size,
            seed,
            tolerance,
            corrupt,
            matched,
        };
        config.check_required()?;
        Ok(config)
    }

    fn check_required(&self) -> Result<()> {
        let need = |present: bool, key: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("kind `{}` requires key `{key}`", self.kind)))
            }
        };
        use ExperimentKind::*;
        match self.kind {
            Lemma22 | Semigroup => need(self.phi.is_some(), "phi")?,
            NasSum => {
                need(self.summand.is_some(), "summand")?;
                need(self.exponent.is_some(), "psi")?;
            }
            SumLimit => {
                need(self.summand.is_some(), "summand")?;
                need(self.exponent.is_some(), "psi")?;
                need(self.phi.is_some(), "phi")?;
            }
            SumAttraction => {
                need(self.phi.is_some(), "phi")?;
                need(self.base_cf.is_some(), "base")?;
                need(matches!(self.exponent, Some(Exponent::Characteristic(_))), "psi")?;
            }
            NasMax => need(self.mu.is_some(), "mu")?,
            MaxLimit | Subordination => {
                need(self.mu.is_some(), "mu")?;
                need(self.phi.is_some(), "phi")?;
            }
            MaxAttraction => {
                need(self.mu.is_some(), "mu")?;
                need(self.phi.is_some(), "phi")?;
                need(self.base_measure.is_some(), "base")?;
            }
            MidCheck => need(self.mu.is_some(), "mu")?,
        }
        if self.schedule.is_empty() {
            return Err(Error::Config("schedule must be nonempty".into()));
        }
        if self.kind.uses_n_schedule() && !self.schedule.iter().all(|&n| n >= 1.0 && n.fract() == 0.0 && n <= 1e15) {
            return Err(Error::Config("n schedule entries must be positive integers".into()));
        }
        Ok(())
    }
}

/// Parses every section of a file.
pub fn load_experiments(file: &ConfigFile) -> Result<Vec<ExperimentConfig>> {
    file.sections.iter().map(|(id, map)| ExperimentConfig::from_section(id, map)).collect()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

/// Integer counts accept float notation such as `1e5`.
fn parse_count(key: &str, value: &str) -> Result<usize> {
    let x: f64 = parse_num(key, value)?;
    if x < 0.0 || x.fract() != 0.0 || x > 1e12 {
        return Err(Error::Config(format!("`{key}` must be a nonnegative integer (got `{value}`)")));
    }
    Ok(x as usize)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` must be true or false (got `{value}`)"))),
    }
}

/// Splits `name(a, b)` into `("name", [a, b])`; a bare `name` has no arguments.
fn parse_call(value: &str) -> Result<(String, Vec<f64>)> {
    let value = value.trim();
    match value.split_once('(') {
        None => Ok((value.to_string(), Vec::new())),
        Some((name, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unbalanced parentheses in `{value}`")))?;
            let args = inner
                .split(',')
                .map(|a| parse_num::<f64>(name, a))
                .collect::<Result<Vec<_>>>()?;
            Ok((name.trim().to_string(), args))
        }
    }
}

fn arity(name: &str, args: &[f64], n: usize) -> Result<()> {
    if args.len() == n {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` takes {n} argument(s), got {}", args.len())))
    }
}

pub fn parse_lt(value: &str) -> Result<LtSpec> {
    let (name, args) = parse_call(value)?;
    let spec = match name.as_str() {
        "gamma" => {
            arity(&name, &args, 2)?;
            LtSpec::Gamma { shape: args[0], rate: args[1] }
        }
        "positive-stable" => {
            arity(&name, &args, 1)?;
            LtSpec::PositiveStable { index: args[0] }
        }
        _ => return Err(Error::Config(format!("unknown Laplace transform family `{name}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

pub fn parse_exponent(value: &str) -> Result<Exponent> {
    let (name, args) = parse_call(value)?;
    let exponent = match name.as_str() {
        "drift" => {
            arity(&name, &args, 1)?;
            Exponent::Characteristic(PsiSpec::Drift { b: args[0] })
        }
        "symmetric-stable" => {
            arity(&name, &args, 1)?;
            Exponent::Characteristic(PsiSpec::SymmetricStable { index: args[0] })
        }
        "exp-exponent" => {
            arity(&name, &args, 1)?;
            Exponent::Characteristic(PsiSpec::ExpExponent { rate: args[0] })
        }
        "laplace-stable" => {
            arity(&name, &args, 1)?;
            if !(args[0] > 0.0 && args[0] < 1.0) {
                return Err(Error::Config("laplace-stable index must lie in (0,1)".into()));
            }
            Exponent::Laplace { index: args[0] }
        }
        _ => return Err(Error::Config(format!("unknown exponent family `{name}`"))),
    };
    if let Exponent::Characteristic(psi) = exponent {
        psi.validate()?;
    }
    Ok(exponent)
}

pub fn parse_summand(value: &str) -> Result<SummandFamily> {
    let (name, args) = parse_call(value)?;
    let family = match name.as_str() {
        "exponential" => SummandFamily::ExponentialScaled,
        "cauchy" => SummandFamily::CauchyScaled,
        "exponential-sqrt" => SummandFamily::ExponentialSqrtScaled,
        "positive-stable" => {
            arity(&name, &args, 1)?;
            SummandFamily::PositiveStableScaled { index: args[0] }
        }
        _ => return Err(Error::Config(format!("unknown summand family `{name}`"))),
    };
    if !matches!(family, SummandFamily::PositiveStableScaled { .. }) {
        arity(&name, &args, 0)?;
    }
    family.validate()?;
    Ok(family)
}

pub fn parse_measure(value: &str) -> Result<ExponentMeasureSpec> {
    let (name, args) = parse_call(value)?;
    let mu = match name.as_str() {
        "indep-frechet" => {
            arity(&name, &args, 2)?;
            ExponentMeasureSpec::IndepFrechet { a1: args[0], a2: args[1] }
        }
        "logistic" => {
            arity(&name, &args, 2)?;
            ExponentMeasureSpec::Logistic { alpha: args[0], r: args[1] }
        }
        _ => return Err(Error::Config(format!("unknown exponent measure `{name}`"))),
    };
    mu.validate()?;
    Ok(mu)
}

fn parse_base_cf(value: &str) -> Result<BaseCf> {
    let (name, args) = parse_call(value)?;
    match name.as_str() {
        "cauchy" => {
            arity(&name, &args, 0)?;
            Ok(BaseCf::SymmetricStable { index: 1.0 })
        }
        "symmetric-stable" => {
            arity(&name, &args, 1)?;
            if !(args[0] > 0.0 && args[0] <= 2.0) {
                return Err(Error::Config("symmetric-stable index must lie in (0,2]".into()));
            }
            Ok(BaseCf::SymmetricStable { index: args[0] })
        }
        "exponential" => {
            arity(&name, &args, 0)?;
            Ok(BaseCf::Exponential)
        }
        _ => Err(Error::Config(format!("unknown base characteristic function `{name}`"))),
    }
}

/// `linspace(a, b, n)`, `logspace(a, b, n)` or a comma-separated list.
pub fn parse_grid(key: &str, value: &str) -> Result<Vec<f64>> {
    let value = value.trim();
    for (prefix, make) in [("linspace", linspace as fn(f64, f64, usize) -> Vec<f64>), ("logspace", logspace)] {
        if value.starts_with(prefix) {
            let (_, args) = parse_call(value)?;
            arity(prefix, &args, 3)?;
            if args[2] < 1.0 || args[2].fract() != 0.0 {
                return Err(Error::Config(format!("`{key}`: point count must be a positive integer")));
            }
            if prefix == "logspace" && !(args[0] > 0.0 && args[1] > 0.0) {
                return Err(Error::Config(format!("`{key}`: logspace bounds must be positive")));
            }
            return Ok(make(args[0], args[1], args[2] as usize));
        }
    }
    let values = value.split(',').map(|v| parse_num::<f64>(key, v)).collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::Config(format!("`{key}` contains NaN")));
    }
    Ok(values)
}

fn parse_point(value: &str) -> Result<Point2> {
    match parse_grid("y", value)?.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Config(format!("`y` must be two numbers (got `{value}`)"))),
    }
}
