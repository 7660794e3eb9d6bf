//! Closed-form solution of the lossless (`γ₁ = γ₂ = β = 0`) system with
//! vacuum fluctuations, used as a reference for the numerical pipeline.
//!
//! Every formula is written in terms of `S = sin(ξt)/ξ` and `cos(ξt)`, which
//! stay well conditioned as `ξ = sqrt(ε² − κ²)` approaches zero.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::OracleError;
use crate::model::AmplitudePair;
use crate::quantifiers::{Extremes, GaussianCoefficients, LogBase, QuantifierSample};

/// Relative gap `(ε − κ)/ε` at or below which parameters count as the EP.
pub const EP_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LosslessParams {
    pub epsilon: f64,
    pub kappa: f64,
}

impl LosslessParams {
    /// Requires `ε > 0` and `0 ≤ κ ≤ ε`.
    pub fn new(epsilon: f64, kappa: f64) -> Result<Self, OracleError> {
        if !(epsilon.is_finite() && kappa.is_finite()) {
            return Err(OracleError::InvalidParams("rates must be finite".into()));
        }
        if !(epsilon > 0.0) {
            return Err(OracleError::InvalidParams(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(kappa >= 0.0 && kappa <= epsilon) {
            return Err(OracleError::InvalidParams(format!(
                "kappa must lie in [0, epsilon], got {kappa}"
            )));
        }
        Ok(Self { epsilon, kappa })
    }

    pub fn xi(&self) -> f64 {
        ((self.epsilon - self.kappa) * (self.epsilon + self.kappa)).sqrt()
    }

    pub fn is_ep(&self) -> bool {
        self.epsilon - self.kappa <= EP_GAP * self.epsilon
    }

    fn require_oscillatory(&self) -> Result<(), OracleError> {
        if self.is_ep() {
            Err(OracleError::ExceptionalPointParams)
        } else {
            Ok(())
        }
    }
}

/// `(sin(ξt)/ξ, cos(ξt))`, by series for `ξt < 1e-6`.
fn sinc_cos(xi: f64, t: f64) -> (f64, f64) {
    let x = xi * t;
    if x.abs() < 1e-6 {
        (t * (1.0 - x * x / 6.0), 1.0 - 0.5 * x * x)
    } else {
        (x.sin() / xi, x.cos())
    }
}

/// Fluctuation moments at time `t` for vacuum input (identical for both modes).
pub fn coefficients(p: &LosslessParams, t: f64) -> Result<GaussianCoefficients, OracleError> {
    p.require_oscillatory()?;
    let (e, k) = (p.epsilon, p.kappa);
    let (s, c) = sinc_cos(p.xi(), t);
    let b = k * k * s * s;
    let cc = Complex64::new(-e * k * s * s, 0.0);
    Ok(GaussianCoefficients {
        b1: b,
        b2: b,
        c1: cc,
        c2: cc,
        d: Complex64::new(0.0, -k * s * c),
        d_bar: Complex64::new(0.0, 0.0),
        alpha: AmplitudePair::ZERO,
    })
}

/// `E_N = −½ log(1 + 2h² − 2|h|·sqrt(1 + h²))` with `h = κ sin(2ξt)/ξ`.
fn log_negativity_from_h(h: f64, base: LogBase) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    let h = h.abs();
    // 1 + 2h² − 2h·sqrt(1+h²) = (sqrt(1+h²) − h)², computed without cancellation
    let root = 1.0 / ((1.0 + h * h).sqrt() + h);
    (-base.log(root)).max(0.0)
}

/// Closed-form quantifiers for vacuum input at time `t`.
pub fn quantifier_formulas(p: &LosslessParams, t: f64, base: LogBase) -> Result<QuantifierSample, OracleError> {
    p.require_oscillatory()?;
    let (e, k) = (p.epsilon, p.kappa);
    let (s, c) = sinc_cos(p.xi(), t);
    let lambda1 = 1.0 - 2.0 * k * (e - k) * s * s;
    Ok(QuantifierSample {
        t,
        e_n: log_negativity_from_h(2.0 * k * s * c, base),
        r: 2.0 * e * e * s * s,
        lambda1,
        lambda2: lambda1,
        lambda: 2.0 * (1.0 + 2.0 * k * k * s * s - 2.0 * k * s.abs() * (1.0 + k * k * s * s).sqrt()),
    })
}

/// Quantifiers at the exceptional point `ε = κ`.
pub fn ep_limits(epsilon: f64, t: f64, base: LogBase) -> QuantifierSample {
    let x = epsilon * t;
    QuantifierSample {
        t,
        e_n: log_negativity_from_h(2.0 * x, base),
        r: 2.0 * x * x,
        lambda1: 1.0,
        lambda2: 1.0,
        lambda: 2.0 * (1.0 + 2.0 * x * x - 2.0 * x.abs() * (1.0 + x * x).sqrt()),
    }
}

/// Extremal values over all times.
pub fn extremes(epsilon: f64, kappa: f64, base: LogBase) -> Result<Extremes, OracleError> {
    let p = LosslessParams::new(epsilon, kappa)?;
    p.require_oscillatory()?;
    let ratio = (epsilon - kappa) / (epsilon + kappa);
    Ok(Extremes {
        e_n_max: (-0.5 * base.log(ratio)).max(0.0),
        r_min: 0.0,
        lambda1_min: ratio,
        lambda2_min: ratio,
        lambda_min: 2.0 * ratio,
    })
}
