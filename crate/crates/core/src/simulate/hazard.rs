//! Hazard shapes with closed-form cumulative hazards.

use core::fmt;

use super::SimulateError;
use crate::math;

/// A nonnegative hazard function λ(t) on t > 0 whose integral has a closed
/// form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HazardSpec {
    /// λ(t) = c
    Constant(f64),
    /// λ(t) = a·t
    Linear(f64),
    /// λ(t) = a·t²
    Quadratic(f64),
    /// λ(t) = a/(t + c)
    Reciprocal { scale: f64, shift: f64 },
    /// λ(t) = a·t^b (b > −1 for an integrable hazard)
    Power { scale: f64, exponent: f64 },
}

impl HazardSpec {
    /// λ(t).
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            HazardSpec::Constant(c) => c,
            HazardSpec::Linear(a) => a * t,
            HazardSpec::Quadratic(a) => a * t * t,
            HazardSpec::Reciprocal { scale, shift } => scale / (t + shift),
            HazardSpec::Power { scale, exponent } => scale * math::powf(t, exponent),
        }
    }

    /// Λ(t) = ∫₀ᵗ λ(u) du in closed form.
    pub fn cumulative(&self, t: f64) -> Result<f64, SimulateError> {
        Ok(match *self {
            HazardSpec::Constant(c) => c * t,
            HazardSpec::Linear(a) => a * t * t / 2.0,
            HazardSpec::Quadratic(a) => a * t * t * t / 3.0,
            HazardSpec::Reciprocal { scale, shift } => scale * math::ln((t + shift) / shift),
            HazardSpec::Power { scale, exponent } => {
                if exponent <= -1.0 {
                    return Err(SimulateError::UnintegrableForm { exponent });
                }
                scale * math::powf(t, exponent + 1.0) / (exponent + 1.0)
            }
        })
    }

    /// The constant rate, when this hazard is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match *self {
            HazardSpec::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimulateError> {
        let nonneg = |a: f64| a.is_finite() && a >= 0.0;
        let ok = match *self {
            HazardSpec::Constant(a) | HazardSpec::Linear(a) | HazardSpec::Quadratic(a) => {
                nonneg(a)
            }
            HazardSpec::Reciprocal { scale, shift } => {
                nonneg(scale) && shift.is_finite() && shift > 0.0
            }
            HazardSpec::Power { scale, exponent } => {
                if exponent <= -1.0 {
                    return Err(SimulateError::UnintegrableForm { exponent });
                }
                nonneg(scale) && exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SimulateError::InvalidScenario("hazard parameters must keep the hazard nonnegative"))
        }
    }
}

impl fmt::Display for HazardSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HazardSpec::Constant(c) => write!(f, "constant {c}"),
            HazardSpec::Linear(a) => write!(f, "linear {a}"),
            HazardSpec::Quadratic(a) => write!(f, "quadratic {a}"),
            HazardSpec::Reciprocal { scale, shift } => write!(f, "reciprocal {scale} {shift}"),
            HazardSpec::Power { scale, exponent } => write!(f, "power {scale} {exponent}"),
        }
    }
}
