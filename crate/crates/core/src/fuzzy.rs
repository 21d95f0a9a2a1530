//! Fuzzy quantities with hyperbolic shoulders.
//!
//! A [`FuzzyNumber`] is described by a core interval `[e, f]` of full
//! membership and two spreads `d`, `g` that control how fast membership decays
//! outside the core:
//!
//! ```text
//!          d / (e + d - w)    w < e
//! mu(w) =  1                  e <= w <= f
//!          g / (w - f + g)    w > f
//! ```
//!
//! The decay is hyperbolic, not linear, so membership never reaches zero
//! unless the matching spread is zero. A zero spread makes that side crisp.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzyNumber {
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
}

impl FuzzyNumber {
    pub fn new(d: f64, e: f64, f: f64, g: f64) -> Result<Self> {
        let fz = FuzzyNumber { d, e, f, g };
        fz.validate()?;
        Ok(fz)
    }

    /// A crisp scalar: core `[v, v]`, zero spreads.
    pub fn crisp(v: f64) -> Self {
        FuzzyNumber {
            d: 0.0,
            e: v,
            f: v,
            g: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.d, self.e, self.f, self.g].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("fuzzy number parameters must be finite"));
        }
        if self.d < 0.0 || self.g < 0.0 {
            return Err(Error::invalid(format!(
                "fuzzy spreads must be non-negative (d={}, g={})",
                self.d, self.g
            )));
        }
        if self.e > self.f {
            return Err(Error::invalid(format!(
                "fuzzy core is empty (e={} > f={})",
                self.e, self.f
            )));
        }
        Ok(())
    }

    /// Degree of membership of `w`, in `[0, 1]`.
    pub fn membership(&self, w: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::invalid(format!("membership of non-finite value {w}")));
        }
        let mu = if w < self.e {
            if self.d == 0.0 {
                0.0
            } else {
                self.d / (self.e + self.d - w)
            }
        } else if w <= self.f {
            1.0
        } else if self.g == 0.0 {
            0.0
        } else {
            self.g / (w - self.f + self.g)
        };
        Ok(mu)
    }

    /// The α-cut `{w : mu(w) >= alpha}` as a closed interval.
    pub fn alpha_cut(&self, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let widen = (1.0 - alpha) / alpha;
        Ok((self.e - self.d * widen, self.f + self.g * widen))
    }
}
