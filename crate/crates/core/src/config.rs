//! Run configuration and its flat `key=value` file format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fuzzy::FuzzyNumber;

/// Every recognised key, in the order they are written.
pub const CONFIG_KEYS: [&str; 17] = [
    "K",
    "L",
    "M",
    "rho.d",
    "rho.e",
    "rho.f",
    "rho.g",
    "delta.d",
    "delta.e",
    "delta.f",
    "delta.g",
    "alpha",
    "F",
    "seed",
    "reps",
    "time_limit_s",
    "gap_tol",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Number of regression groups.
    pub k: usize,
    /// Number of clusters handed to the assignment problem.
    pub l: usize,
    /// Big-M constant deactivating error rows of unassigned groups.
    pub big_m: f64,
    /// Fraction of training points that may be discarded as outliers.
    pub rho: FuzzyNumber,
    /// Tolerance on per-point absolute error; only used for diagnostics.
    pub delta_tol: FuzzyNumber,
    /// α-cut level used to turn fuzzy quantities into crisp bounds.
    pub alpha: f64,
    /// Neighbour count for the nearest-neighbour fallback in prediction.
    pub neighbors: usize,
    pub seed: u64,
    pub reps: usize,
    /// Wall-clock budget for one branch-and-bound solve, in seconds.
    pub time_limit_s: f64,
    /// Relative optimality gap at which branch-and-bound may stop early.
    pub gap_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            k: 2,
            l: 10,
            big_m: 10_000.0,
            rho: FuzzyNumber::crisp(0.01),
            delta_tol: FuzzyNumber {
                d: 0.0,
                e: 0.0,
                f: 0.0,
                g: 1.0,
            },
            alpha: 1.0,
            neighbors: 5,
            seed: 0,
            reps: 10,
            time_limit_s: 300.0,
            gap_tol: 0.0,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::config("K must be at least 1"));
        }
        if self.l < self.k {
            return Err(Error::config(format!(
                "L ({}) must be at least K ({})",
                self.l, self.k
            )));
        }
        if !(self.big_m > 0.0) {
            return Err(Error::config(format!("M must be positive, got {}", self.big_m)));
        }
        self.rho
            .validate()
            .map_err(|e| Error::config(format!("rho: {e}")))?;
        self.delta_tol
            .validate()
            .map_err(|e| Error::config(format!("delta: {e}")))?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.neighbors < 1 {
            return Err(Error::config("F must be at least 1"));
        }
        if self.reps < 1 {
            return Err(Error::config("reps must be at least 1"));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(Error::config("time_limit_s must be positive"));
        }
        if !(self.gap_tol >= 0.0) {
            return Err(Error::config("gap_tol must be non-negative"));
        }
        Ok(())
    }

    /// Outlier budget as a crisp fraction: the upper end of the α-cut of
    /// `rho`, clamped to `[0, 1]`.
    pub fn crisp_rho(&self) -> Result<f64> {
        let (_, hi) = self.rho.alpha_cut(self.alpha)?;
        Ok(hi.clamp(0.0, 1.0))
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(format!("bad value {value:?} for key {key}")))
        }
        match key {
            "K" => self.k = num(key, value)?,
            "L" => self.l = num(key, value)?,
            "M" => self.big_m = num(key, value)?,
            "rho.d" => self.rho.d = num(key, value)?,
            "rho.e" => self.rho.e = num(key, value)?,
            "rho.f" => self.rho.f = num(key, value)?,
            "rho.g" => self.rho.g = num(key, value)?,
            "delta.d" => self.delta_tol.d = num(key, value)?,
            "delta.e" => self.delta_tol.e = num(key, value)?,
            "delta.f" => self.delta_tol.f = num(key, value)?,
            "delta.g" => self.delta_tol.g = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "F" => self.neighbors = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "reps" => self.reps = num(key, value)?,
            "time_limit_s" => self.time_limit_s = num(key, value)?,
            "gap_tol" => self.gap_tol = num(key, value)?,
            _ => return Err(Error::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "K" => self.k.to_string(),
            "L" => self.l.to_string(),
            "M" => fmt_f64(self.big_m),
            "rho.d" => fmt_f64(self.rho.d),
            "rho.e" => fmt_f64(self.rho.e),
            "rho.f" => fmt_f64(self.rho.f),
            "rho.g" => fmt_f64(self.rho.g),
            "delta.d" => fmt_f64(self.delta_tol.d),
            "delta.e" => fmt_f64(self.delta_tol.e),
            "delta.f" => fmt_f64(self.delta_tol.f),
            "delta.g" => fmt_f64(self.delta_tol.g),
            "alpha" => fmt_f64(self.alpha),
            "F" => self.neighbors.to_string(),
            "seed" => self.seed.to_string(),
            "reps" => self.reps.to_string(),
            "time_limit_s" => fmt_f64(self.time_limit_s),
            "gap_tol" => fmt_f64(self.gap_tol),
            _ => return None,
        };
        Some(v)
    }

    /// Parses `key=value` lines. Blank lines and `#` comments are ignored;
    /// keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, format!("expected key=value, got {line:?}")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(out, "{key}={}", self.get(key).expect("known key"));
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}
