//! Reconstruction error between target and replay fields.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{total_power, ComplexField};

/// A mean-squared error value (dimensionless squared amplitude).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ErrorValue(pub f64);

impl ErrorValue {
    pub fn mse(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ErrorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which error the search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Mean squared difference of moduli.
    #[default]
    Eq2,
    /// As `Eq2` after rescaling the replay to the target's total power.
    PowerMatched,
}

impl Metric {
    pub fn evaluate(self, target: &ComplexField, replay: &ComplexField) -> Result<ErrorValue> {
        match self {
            Metric::Eq2 => mse_phase_insensitive(target, replay),
            Metric::PowerMatched => mse_power_matched(target, replay),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Eq2 => "eq2",
            Metric::PowerMatched => "power",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eq2" | "mse" => Ok(Metric::Eq2),
            "power" | "power-matched" => Ok(Metric::PowerMatched),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `(1 / N) sum (|T| - |R|)^2`.
pub fn mse_phase_insensitive(target: &ComplexField, replay: &ComplexField) -> Result<ErrorValue> {
    target.same_shape(replay)?;
    let sum: f64 = target
        .values()
        .iter()
        .zip(replay.values())
        .map(|(t, r)| {
            let d = t.norm() - r.norm();
            d * d
        })
        .sum();
    Ok(ErrorValue(sum / target.len() as f64))
}

pub fn mse_power_matched(target: &ComplexField, replay: &ComplexField) -> Result<ErrorValue> {
    target.same_shape(replay)?;
    let replay_power = total_power(replay);
    if replay_power == 0.0 {
        return Err(Error::Degenerate("replay field is identically zero".into()));
    }
    let scale = (total_power(target) / replay_power).sqrt();
    let sum: f64 = target
        .values()
        .iter()
        .zip(replay.values())
        .map(|(t, r)| {
            let d = t.norm() - scale * r.norm();
            d * d
        })
        .sum();
    Ok(ErrorValue(sum / target.len() as f64))
}

/// `100 * final / initial`.
pub fn relative_error_pct(e_final: ErrorValue, e_initial: ErrorValue) -> Result<f64> {
    if e_initial.0 == 0.0 {
        return Err(Error::Degenerate(
            "initial error is zero; relative error undefined".into(),
        ));
    }
    Ok(100.0 * e_final.0 / e_initial.0)
}
