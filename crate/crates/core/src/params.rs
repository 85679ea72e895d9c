//! Global sieve parameters (σ, ϖ, ε) and the admissibility constraint
//! `19σ + 90ϖ + 71ε < 1`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The three sieve knobs.
///
/// `epsilon` only takes part in the admissibility check; no region predicate
/// ever reads it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SieveParams {
    pub sigma: f64,
    pub varpi: f64,
    pub epsilon: f64,
}

/// Which admissibility inequality failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Constraint {
    /// `0 < σ < 1/2`
    SigmaRange,
    /// `0 < ϖ < 1/8`
    VarpiRange,
    /// `ε > 0`
    EpsilonPositive,
    /// `19σ + 90ϖ + 71ε < 1`
    Admissibility,
    /// `σ − 2ϖ > 0`
    PositiveFloor,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::SigmaRange => "0 < sigma < 1/2",
            Constraint::VarpiRange => "0 < varpi < 1/8",
            Constraint::EpsilonPositive => "epsilon > 0",
            Constraint::Admissibility => "19*sigma + 90*varpi + 71*epsilon < 1",
            Constraint::PositiveFloor => "sigma - 2*varpi > 0",
        };
        f.write_str(s)
    }
}

impl Default for SieveParams {
    fn default() -> Self {
        Self {
            sigma: 1.0 / 20.31,
            varpi: 1.0 / 1400.0,
            epsilon: 1e-9,
        }
    }
}

/// σ = 1/20.31, ϖ = 1/1400, ε = 10⁻⁹.
pub fn default_params() -> SieveParams {
    SieveParams::default()
}

impl SieveParams {
    pub fn new(sigma: f64, varpi: f64, epsilon: f64) -> Self {
        Self {
            sigma,
            varpi,
            epsilon,
        }
    }

    /// Smallest exponent a sieving prime may carry, `σ − 2ϖ`.
    pub fn lo(&self) -> f64 {
        self.sigma - 2.0 * self.varpi
    }

    /// Lower Type-II window `[1/2 − σ, 1/2 − 2ϖ]`.
    pub fn lower_window(&self) -> (f64, f64) {
        (0.5 - self.sigma, 0.5 - 2.0 * self.varpi)
    }

    /// Upper Type-II window `[1/2 + 2ϖ, 1/2 + σ]`.
    pub fn upper_window(&self) -> (f64, f64) {
        (0.5 + 2.0 * self.varpi, 0.5 + self.sigma)
    }

    /// Type-I single-variable limit `1/2 + 2ϖ`.
    pub fn type_one_sum_limit(&self) -> f64 {
        0.5 + 2.0 * self.varpi
    }

    /// Bound on the short variable of the bilinear Type-I range,
    /// `1/8 + σ/2 − 5ϖ/2`.
    pub fn type_one_short_limit(&self) -> f64 {
        0.125 + self.sigma / 2.0 - 2.5 * self.varpi
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |which| Err(Error::ConstraintViolated { which });
        if !self.sigma.is_finite() || self.sigma <= 0.0 || self.sigma >= 0.5 {
            return fail(Constraint::SigmaRange);
        }
        if !self.varpi.is_finite() || self.varpi <= 0.0 || self.varpi >= 0.125 {
            return fail(Constraint::VarpiRange);
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return fail(Constraint::EpsilonPositive);
        }
        if 19.0 * self.sigma + 90.0 * self.varpi + 71.0 * self.epsilon >= 1.0 {
            return fail(Constraint::Admissibility);
        }
        if self.lo() <= 0.0 {
            return fail(Constraint::PositiveFloor);
        }
        Ok(())
    }
}

pub fn validate(p: &SieveParams) -> Result<()> {
    p.validate()
}

/// A real number given either as a decimal literal or as a `p/q` rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl FromStr for Real {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a real or p/q literal: {s:?}"));
        let v = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                if den == 0.0 {
                    return Err(bad());
                }
                num / den
            }
            None => s.parse().map_err(|_| bad())?,
        };
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(Real(v))
    }
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.parse::<Real>().map(|r| r.0)
}
