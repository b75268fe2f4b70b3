//! Experiment configuration: built-in defaults, overlaid by the `CZGRID_SEED`
//! environment variable (seed only), then a flat `key = value` file, then
//! command-line flags.  Every failure here is a usage error (exit 1).

use std::fmt::Debug;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("invalid value for {key}: `{value}` ({reason})")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// One shared knob set for all subcommands; each command reads the fields it
/// needs and ignores the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub j_lo: i64,
    pub j_hi: i64,
    pub seed: u64,
    pub trials: u32,
    pub p_list: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub j_list: Vec<i64>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> ExperimentConfig {
        ExperimentConfig {
            n: 1,
            j_lo: -8,
            j_hi: 12,
            seed: 0,
            trials: 1000,
            p_list: vec![1.5, 2.0, 3.0],
            alpha_grid: vec![0.05, 0.1, 0.2, 0.4],
            j_list: vec![-5, -10, -20],
            out: None,
        }
    }
}

fn scalar<T>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn list<T>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    value.split(',').map(|v| scalar(key, v.trim())).collect()
}

impl ExperimentConfig {
    /// Overlays `key = value` lines onto self.  `#` starts a comment; blank
    /// lines are ignored; unknown keys are rejected.
    pub fn apply_file(&mut self, path: &PathBuf) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, text: raw.trim().into() })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => self.n = scalar(key, value)?,
                "j_lo" => self.j_lo = scalar(key, value)?,
                "j_hi" => self.j_hi = scalar(key, value)?,
                "seed" => self.seed = scalar(key, value)?,
                "trials" => self.trials = scalar(key, value)?,
                "p_list" => self.p_list = list(key, value)?,
                "alpha_grid" => self.alpha_grid = list(key, value)?,
                "j_list" => self.j_list = list(key, value)?,
                "out" => self.out = Some(PathBuf::from(value)),
                _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
            }
        }
        Ok(())
    }

    /// Reads `CZGRID_SEED` if set; an unparseable value is a usage error, not
    /// something to ignore silently.
    pub fn apply_env_seed(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var("CZGRID_SEED") {
            self.seed = scalar("CZGRID_SEED", v.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: String| Err(ConfigError::Invalid(m));
        if !(1..=3).contains(&self.n) {
            return fail(format!("n = {} out of the supported range 1..=3", self.n));
        }
        if self.j_lo > self.j_hi {
            return fail(format!("empty level range: j_lo = {} > j_hi = {}", self.j_lo, self.j_hi));
        }
        if self.j_lo < -64 || self.j_hi > 64 {
            return fail(format!(
                "level range [{}, {}] outside the supported [-64, 64]",
                self.j_lo, self.j_hi
            ));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return fail(format!("alpha_grid must be non-empty and positive, got {:?}", self.alpha_grid));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return fail(format!("p_list must be non-empty with p >= 1, got {:?}", self.p_list));
        }
        if self.j_list.is_empty() || self.j_list.iter().any(|l| *l >= 5) {
            return fail(format!(
                "j_list must be non-empty with every level below the wall level 5, got {:?}",
                self.j_list
            ));
        }
        Ok(())
    }
}
