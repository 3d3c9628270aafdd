//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use morley::{BoundaryCondition, Domain};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Plain,
    Extrapolation,
    Recovery,
    Adaptive,
    Diagnostics,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Plain => "plain",
            Method::Extrapolation => "extrapolation",
            Method::Recovery => "recovery",
            Method::Adaptive => "adaptive",
            Method::Diagnostics => "diagnostics",
        }
    }
}

impl FromStr for Method {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        [
            Method::Plain,
            Method::Extrapolation,
            Method::Recovery,
            Method::Adaptive,
            Method::Diagnostics,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| CliError::config(format!("unknown method '{s}'")))
    }
}

/// Where reference eigenvalues come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceSource {
    /// Closed form of the simply supported unit square, or explicit values
    /// (one per requested eigenpair).
    Analytic(Option<Vec<f64>>),
    /// `lambda_R` on the finest level of the run.
    FinestLambdaR,
    /// Whitespace-separated values, one per requested eigenpair.
    File(PathBuf),
}

impl fmt::Display for ReferenceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceSource::Analytic(None) => f.write_str("analytic"),
            ReferenceSource::Analytic(Some(v)) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "analytic:{}", parts.join(","))
            }
            ReferenceSource::FinestLambdaR => f.write_str("finest_lambda_R"),
            ReferenceSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl FromStr for ReferenceSource {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        if s == "analytic" {
            return Ok(ReferenceSource::Analytic(None));
        }
        if s == "finest_lambda_R" {
            return Ok(ReferenceSource::FinestLambdaR);
        }
        if let Some(v) = s.strip_prefix("analytic:") {
            let values = v
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::config(format!("bad analytic reference '{v}': {e}")))?;
            return Ok(ReferenceSource::Analytic(Some(values)));
        }
        if let Some(p) = s.strip_prefix("file:") {
            return Ok(ReferenceSource::File(PathBuf::from(p)));
        }
        Err(CliError::config(format!("unknown reference '{s}'")))
    }
}

/// Inclusive level range written `a..b`.
pub fn parse_levels(s: &str) -> Result<(usize, usize), CliError> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| CliError::config(format!("levels must look like 'a..b', got '{s}'")))?;
    let parse = |x: &str| {
        x.trim_start_matches('=')
            .trim()
            .parse::<usize>()
            .map_err(|e| CliError::config(format!("bad level '{x}': {e}")))
    };
    Ok((parse(a)?, parse(b)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub bc: BoundaryCondition,
    pub levels: (usize, usize),
    /// One-based eigenpair indices.
    pub eigen: Vec<usize>,
    pub methods: Vec<Method>,
    pub alpha: Option<f64>,
    pub reference: Option<ReferenceSource>,
    pub seed: u64,
    pub tol: f64,
    pub out: PathBuf,
    pub theta: f64,
    pub adaptive_start_level: usize,
    pub adaptive_max_iterations: usize,
    pub adaptive_max_dofs: usize,
    pub write_meshes: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::Square,
            bc: BoundaryCondition::SimplySupported,
            levels: (2, 5),
            eigen: vec![1],
            methods: vec![Method::Plain, Method::Extrapolation, Method::Recovery],
            alpha: None,
            reference: None,
            seed: 0x5eed,
            tol: 1e-10,
            out: PathBuf::from("out"),
            theta: 0.3,
            adaptive_start_level: 3,
            adaptive_max_iterations: 40,
            adaptive_max_dofs: 500_000,
            write_meshes: true,
        }
    }
}

fn parse_value<V: FromStr>(key: &str, v: &str) -> Result<V, CliError>
where
    V::Err: fmt::Display,
{
    v.parse::<V>()
        .map_err(|e| CliError::config(format!("bad value for '{key}': '{v}' ({e})")))
}

fn parse_list<V: FromStr>(key: &str, v: &str) -> Result<Vec<V>, CliError>
where
    V::Err: fmt::Display,
{
    v.split(',').map(|x| parse_value(key, x.trim())).collect()
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "domain" => self.domain = parse_value(key, value)?,
            "bc" => self.bc = parse_value(key, value)?,
            "levels" => self.levels = parse_levels(value)?,
            "eigen" => self.eigen = parse_list(key, value)?,
            "methods" => {
                let mut m: Vec<Method> = parse_list(key, value)?;
                m.sort();
                m.dedup();
                self.methods = m;
            }
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "reference" => self.reference = Some(value.parse()?),
            "seed" => self.seed = parse_value(key, value)?,
            "tol" => self.tol = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "theta" => self.theta = parse_value(key, value)?,
            "adaptive_start_level" => self.adaptive_start_level = parse_value(key, value)?,
            "adaptive_max_iterations" => self.adaptive_max_iterations = parse_value(key, value)?,
            "adaptive_max_dofs" => self.adaptive_max_dofs = parse_value(key, value)?,
            "write_meshes" => self.write_meshes = parse_value(key, value)?,
            _ => return Err(CliError::config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parses the flat format: one `key = value` per line, `#` comments.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected 'key = value'", n + 1)))?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| CliError::config(format!("line {}: {}", n + 1, e.message)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn has(&self, m: Method) -> bool {
        self.methods.contains(&m)
    }

    /// Extrapolation exponent: the override, else 2 on the convex domains
    /// and 1 on the slit domains.
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(match self.domain {
            Domain::Square | Domain::Pentagon => 2.0,
            Domain::CrackedSquare | Domain::Dumbbell => 1.0,
        })
    }

    /// The reference policy: analytic on the simply supported square, the
    /// finest `lambda_R` elsewhere.
    pub fn reference(&self) -> ReferenceSource {
        self.reference.clone().unwrap_or(if self.has_closed_form() {
            ReferenceSource::Analytic(None)
        } else {
            ReferenceSource::FinestLambdaR
        })
    }

    pub fn has_closed_form(&self) -> bool {
        self.domain == Domain::Square && self.bc == BoundaryCondition::SimplySupported
    }

    pub fn max_eigen(&self) -> usize {
        self.eigen.iter().copied().max().unwrap_or(1)
    }

    /// Rejects inconsistent settings before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let (a, b) = self.levels;
        if a == 0 || a > b {
            return Err(CliError::config(format!("level range {a}..{b} is empty or starts below 1")));
        }
        if b > 12 {
            return Err(CliError::config(format!("level {b} is beyond the supported range (12)")));
        }
        if self.eigen.is_empty() || self.eigen.contains(&0) {
            return Err(CliError::config("eigen indices are one-based and must be non-empty"));
        }
        if self.methods.is_empty() {
            return Err(CliError::config("no methods requested"));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::config("tol must be positive"));
        }
        if let Some(al) = self.alpha {
            if !(al > 0.0) {
                return Err(CliError::config("alpha must be positive"));
            }
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(CliError::config("theta must lie in (0, 1)"));
        }
        if self.adaptive_start_level == 0 {
            return Err(CliError::config("adaptive_start_level starts at 1"));
        }
        match self.reference() {
            ReferenceSource::Analytic(None) if !self.has_closed_form() => {
                return Err(CliError::config(
                    "a closed-form reference exists only for the simply supported square; give analytic:<values>",
                ))
            }
            ReferenceSource::Analytic(Some(v)) if v.len() != self.eigen.len() => {
                return Err(CliError::config(format!(
                    "{} analytic reference values for {} eigenpairs",
                    v.len(),
                    self.eigen.len()
                )))
            }
            _ => {}
        }
        if self.has(Method::Diagnostics) && !(self.has_closed_form() && self.eigen.contains(&1)) {
            return Err(CliError::config(
                "diagnostics need the closed-form first eigenfunction (simply supported square, eigen 1)",
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let cfg = ExperimentConfig::parse(
            "# example\ndomain = pentagon\nbc = clamped\nlevels = 3..7\neigen = 1,2\nmethods = recovery, plain\nalpha = 2\nreference = finest_lambda_R\n",
        )
        .unwrap();
        assert_eq!(cfg.domain, Domain::Pentagon);
        assert_eq!(cfg.bc, BoundaryCondition::Clamped);
        assert_eq!(cfg.levels, (3, 7));
        assert_eq!(cfg.eigen, vec![1, 2]);
        assert_eq!(cfg.methods, vec![Method::Plain, Method::Recovery]);
        assert_eq!(cfg.reference(), ReferenceSource::FinestLambdaR);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_settings() {
        assert!(ExperimentConfig::parse("colour = red").is_err());
        assert!(ExperimentConfig::parse("levels = 5").is_err());
        assert!(ExperimentConfig::parse("levels = 5..3").unwrap().validate().is_err());
        assert!(ExperimentConfig::parse("domain = pentagon\nbc = clamped\nreference = analytic")
            .unwrap()
            .validate()
            .is_err());
        assert!(ExperimentConfig::parse("domain = pentagon\nbc = clamped\nmethods = diagnostics")
            .unwrap()
            .validate()
            .is_err());
        assert!(ExperimentConfig::parse("eigen = 0").unwrap().validate().is_err());
    }

    #[test]
    fn defaults_follow_the_domain() {
        let sq = ExperimentConfig::default();
        assert_eq!(sq.reference(), ReferenceSource::Analytic(None));
        assert_eq!(sq.alpha(), 2.0);
        let crack = ExperimentConfig::parse("domain = cracked_square\nbc = clamped").unwrap();
        assert_eq!(crack.reference(), ReferenceSource::FinestLambdaR);
        assert_eq!(crack.alpha(), 1.0);
        assert_eq!("analytic:1.5,2".parse::<ReferenceSource>().unwrap().to_string(), "analytic:1.5,2");
    }
}
