//! Sweep configuration: plain `key = value` text, one setting per line.
//!
//! Unknown keys are errors rather than silent defaults, since a typo in a
//! long-running sweep is expensive to discover afterwards. `#` starts a
//! comment and blank lines are skipped.

use crate::error::{Error, Result};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Ambient dimension (2 or 3).
    pub dim: usize,
    /// Horizontal points per axis (whole-space grids use this in every
    /// direction).
    pub n: usize,
    /// Vertical nodes for slab domains.
    pub n_vertical: usize,
    /// Slab height.
    pub height: f64,
    /// Box period per axis.
    pub period: f64,
    /// Sector angle θ: parameters stay inside |arg λ| ≤ frac · (π − θ).
    pub theta: f64,
    pub lambda_abs_min: f64,
    pub lambda_abs_max: f64,
    /// Number of logarithmically spaced moduli.
    pub n_lambda: usize,
    /// Angular positions as fractions of the half-opening.
    pub fracs: Vec<f64>,
    /// Lebesgue exponents.
    pub qs: Vec<f64>,
    /// Any of "whole", "half", "graph".
    pub domains: Vec<String>,
    /// Boundary steepness for graph rows (amplitude of the cosine profile).
    pub lip: f64,
    pub seed: u64,
    /// Worker threads for the row loop; 0 picks the rayon default.
    pub threads: usize,
    pub with_force: bool,
    pub with_stress: bool,
    pub with_div: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dim: 2,
            n: 64,
            n_vertical: 65,
            height: 8.0,
            period: std::f64::consts::TAU,
            theta: std::f64::consts::FRAC_PI_4,
            lambda_abs_min: 1e-3,
            lambda_abs_max: 1e3,
            n_lambda: 25,
            fracs: vec![0.0, 0.5, 0.9],
            qs: vec![1.5, 2.0, 4.0],
            domains: vec!["whole".into(), "half".into()],
            lip: 0.05,
            seed: 1,
            threads: 0,
            with_force: true,
            with_stress: true,
            with_div: true,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, key: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::Config(format!("bad entry {s:?} in list for key {key}")))
        })
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::Config(format!("bad value {value:?} for key {key}")))
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "dim" => cfg.dim = parse_one(value, key)?,
                "n" => cfg.n = parse_one(value, key)?,
                "n_vertical" => cfg.n_vertical = parse_one(value, key)?,
                "height" => cfg.height = parse_one(value, key)?,
                "period" => cfg.period = parse_one(value, key)?,
                "theta" => cfg.theta = parse_one(value, key)?,
                "lambda_abs_min" => cfg.lambda_abs_min = parse_one(value, key)?,
                "lambda_abs_max" => cfg.lambda_abs_max = parse_one(value, key)?,
                "n_lambda" => cfg.n_lambda = parse_one(value, key)?,
                "fracs" => cfg.fracs = parse_list(value, key)?,
                "qs" => cfg.qs = parse_list(value, key)?,
                "domains" => {
                    cfg.domains = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_owned)
                        .collect()
                }
                "lip" => cfg.lip = parse_one(value, key)?,
                "seed" => cfg.seed = parse_one(value, key)?,
                "threads" => cfg.threads = parse_one(value, key)?,
                "with_force" => cfg.with_force = parse_one(value, key)?,
                "with_stress" => cfg.with_stress = parse_one(value, key)?,
                "with_div" => cfg.with_div = parse_one(value, key)?,
                other => {
                    return Err(Error::Config(format!("line {}: unknown key {other:?}", lineno + 1)))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::Config(format!("dim must be 2 or 3, got {}", self.dim)));
        }
        if self.n_lambda == 0 {
            return Err(Error::Config("n_lambda must be positive".into()));
        }
        if !(self.lambda_abs_min > 0.0 && self.lambda_abs_max >= self.lambda_abs_min) {
            return Err(Error::Config(format!(
                "need 0 < lambda_abs_min <= lambda_abs_max, got [{}, {}]",
                self.lambda_abs_min, self.lambda_abs_max
            )));
        }
        if !(self.theta > 0.0 && self.theta < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config(format!("theta must lie in (0, pi/2), got {}", self.theta)));
        }
        for f in &self.fracs {
            if !(0.0..1.0).contains(f) {
                return Err(Error::Config(format!("fracs must lie in [0, 1), got {f}")));
            }
        }
        for q in &self.qs {
            if !(*q > 1.0) {
                return Err(Error::Config(format!("q must exceed 1, got {q}")));
            }
        }
        for domain in &self.domains {
            if !matches!(domain.as_str(), "whole" | "half" | "graph") {
                return Err(Error::Config(format!(
                    "unknown domain {domain:?} (expected whole, half or graph)"
                )));
            }
        }
        if !self.with_force && !self.with_stress && !self.with_div {
            return Err(Error::Config("at least one data slot must be enabled".into()));
        }
        Ok(())
    }

    /// Logarithmically spaced |λ| values, inclusive at both ends.
    pub fn lambda_moduli(&self) -> Vec<f64> {
        if self.n_lambda == 1 {
            return vec![self.lambda_abs_min];
        }
        let lo = self.lambda_abs_min.ln();
        let hi = self.lambda_abs_max.ln();
        (0..self.n_lambda)
            .map(|i| (lo + (hi - lo) * i as f64 / (self.n_lambda - 1) as f64).exp())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_pass_validation() {
        SweepConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_overrides_and_comments() {
        let cfg = SweepConfig::parse(
            "# sweep setup\n\
             dim = 2\n\
             n = 32            # smaller grid\n\
             qs = 2, 4\n\
             domains = whole\n\
             fracs = 0, 0.9\n\
             seed = 11\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.qs, vec![2.0, 4.0]);
        assert_eq!(cfg.domains, vec!["whole".to_string()]);
        assert_eq!(cfg.fracs, vec![0.0, 0.9]);
        assert_eq!(cfg.seed, 11);
        // Untouched keys keep their defaults.
        assert_eq!(cfg.n_lambda, 25);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_errors() {
        assert!(SweepConfig::parse("bogus = 1").is_err());
        assert!(SweepConfig::parse("n = many").is_err());
        assert!(SweepConfig::parse("domains = moon").is_err());
    }

    #[test]
    fn lambda_grid_hits_both_ends_and_the_middle() {
        let cfg = SweepConfig::default();
        let moduli = cfg.lambda_moduli();
        assert_eq!(moduli.len(), 25);
        assert!((moduli[0] - 1e-3).abs() < 1e-15);
        assert!((moduli[24] - 1e3).abs() < 1e-9);
        assert!((moduli[12] - 1.0).abs() < 1e-12);
    }
}
