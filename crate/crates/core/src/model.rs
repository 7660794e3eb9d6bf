//! Domain types shared by every other module: rates, amplitudes and the
//! initial-state parametrization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::ModelError;

/// Relative tolerance used to decide whether two rates are "equal" when
/// testing the PT condition.
pub const PT_TOLERANCE: f64 = 1e-12;

/// `|μ²| ≤ EP_TOLERANCE·ε²` is classified as an exceptional point.
pub const EP_TOLERANCE: f64 = 1e-9;

/// Coupling, damping and Kerr rates of the two-mode Hamiltonian.
///
/// Mode 1 is damped at `gamma1 ≥ 0`, mode 2 is amplified at `-gamma2 ≥ 0`.
/// Rates are in units of a caller-chosen frequency scale (the scenario files
/// use `epsilon = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Linear exchange coupling.
    pub epsilon: f64,
    /// Down-conversion coupling.
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Cross-Kerr rate.
    #[serde(default)]
    pub beta_c: f64,
}

impl SystemParams {
    /// Linear (Kerr-free) system with the given rates.
    pub fn linear(epsilon: f64, kappa: f64, gamma1: f64, gamma2: f64) -> Self {
        Self {
            epsilon,
            kappa,
            gamma1,
            gamma2,
            beta1: 0.0,
            beta2: 0.0,
            beta_c: 0.0,
        }
    }

    /// PT-symmetric parameters: `gamma2 = -gamma`, `beta2 = beta1 = beta`.
    pub fn pt_symmetric(epsilon: f64, kappa: f64, gamma: f64, beta: f64, beta_c: f64) -> Self {
        Self {
            epsilon,
            kappa,
            gamma1: gamma,
            gamma2: -gamma,
            beta1: beta,
            beta2: beta,
            beta_c,
        }
    }

    pub fn with_kerr(mut self, beta1: f64, beta2: f64, beta_c: f64) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self.beta_c = beta_c;
        self
    }

    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("epsilon", self.epsilon),
            ("kappa", self.kappa),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta_c", self.beta_c),
        ]
    }

    /// Checks finiteness and the sign conventions of the damping/gain rates.
    pub fn check(&self) -> Result<(), ModelError> {
        for (name, value) in self.fields() {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        if self.epsilon <= 0.0 {
            return Err(ModelError::NonPositiveEpsilon(self.epsilon));
        }
        if self.gamma1 < 0.0 {
            return Err(ModelError::NegativeDamping(self.gamma1));
        }
        if self.gamma2 > 0.0 {
            return Err(ModelError::PositiveGain(self.gamma2));
        }
        Ok(())
    }

    /// Preconditions of the steady-state solver: positive self-Kerr rates and
    /// `beta_c > -2 sqrt(beta1 beta2)`.
    pub fn check_kerr(&self) -> Result<(), ModelError> {
        if !(self.beta1 > 0.0 && self.beta2 > 0.0) {
            return Err(ModelError::InvalidBeta(format!(
                "beta1 and beta2 must be positive (got {}, {})",
                self.beta1, self.beta2
            )));
        }
        let bound = -2.0 * (self.beta1 * self.beta2).sqrt();
        if self.beta_c <= bound {
            return Err(ModelError::InvalidBeta(format!(
                "beta_c = {} must exceed {}",
                self.beta_c, bound
            )));
        }
        Ok(())
    }

    fn scale(&self) -> f64 {
        self.fields().iter().map(|(_, v)| v.abs()).fold(1.0, f64::max)
    }

    /// `gamma2 = -gamma1` and `beta2 = beta1` within [`PT_TOLERANCE`].
    pub fn is_pt_symmetric(&self) -> bool {
        let tol = PT_TOLERANCE * self.scale();
        (self.gamma1 + self.gamma2).abs() <= tol && (self.beta1 - self.beta2).abs() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// μ² > 0: real eigenfrequencies.
    Oscillatory,
    ExceptionalPoint,
    /// μ² < 0: PT symmetry broken, complex eigenfrequencies.
    Broken,
}

/// PT classification of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtClass {
    pub is_pt: bool,
    /// Common damping/gain rate, present only when PT-symmetric.
    pub gamma: Option<f64>,
    /// `ε² − κ² − γ²`, present only when PT-symmetric.
    pub mu_squared: Option<f64>,
    pub regime: Option<Regime>,
}

/// Classifies `params` with respect to PT symmetry and, when symmetric, the
/// sign of `μ² = ε² − κ² − γ²`.
pub fn validate(params: &SystemParams) -> Result<PtClass, ModelError> {
    params.check()?;
    if !params.is_pt_symmetric() {
        return Ok(PtClass {
            is_pt: false,
            gamma: None,
            mu_squared: None,
            regime: None,
        });
    }
    let gamma = params.gamma1;
    let eps2 = params.epsilon * params.epsilon;
    let mu_squared = eps2 - params.kappa * params.kappa - gamma * gamma;
    let regime = if mu_squared.abs() <= EP_TOLERANCE * eps2 {
        Regime::ExceptionalPoint
    } else if mu_squared > 0.0 {
        Regime::Oscillatory
    } else {
        Regime::Broken
    };
    Ok(PtClass {
        is_pt: true,
        gamma: Some(gamma),
        mu_squared: Some(mu_squared),
        regime: Some(regime),
    })
}

/// Classical complex field amplitudes of the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AmplitudePair {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl AmplitudePair {
    pub const ZERO: Self = Self {
        alpha1: Complex64::new(0.0, 0.0),
        alpha2: Complex64::new(0.0, 0.0),
    };

    pub fn new(alpha1: Complex64, alpha2: Complex64) -> Self {
        Self { alpha1, alpha2 }
    }

    pub fn is_finite(&self) -> bool {
        self.alpha1.is_finite() && self.alpha2.is_finite()
    }

    /// `|α₁|² + |α₂|²`.
    pub fn intensity(&self) -> f64 {
        self.alpha1.norm_sqr() + self.alpha2.norm_sqr()
    }

    /// Packs as `[Re α₁, Im α₁, Re α₂, Im α₂]`.
    pub fn to_array(&self) -> [f64; 4] {
        [self.alpha1.re, self.alpha1.im, self.alpha2.re, self.alpha2.im]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        Self {
            alpha1: Complex64::new(y[0], y[1]),
            alpha2: Complex64::new(y[2], y[3]),
        }
    }

    /// Extracts intensity, unbalance angle and the two phase combinations.
    /// Angles are principal values; `theta ∈ [0, π/2]`.
    pub fn to_state_spec(&self) -> InitialStateSpec {
        let r1 = self.alpha1.norm();
        let r2 = self.alpha2.norm();
        let phi1 = self.alpha1.arg();
        let phi2 = self.alpha2.arg();
        InitialStateSpec {
            total_intensity: r1 * r1 + r2 * r2,
            theta: r2.atan2(r1),
            phi: wrap_angle(phi2 - phi1),
            psi: wrap_angle(phi2 + phi1),
        }
    }
}

/// Initial coherent amplitudes given by overall intensity, unbalance angle
/// `theta` (`|α₁|² = cos²θ·I`) and the phase difference/sum `phi`, `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    pub total_intensity: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

impl InitialStateSpec {
    /// Individual phases are `φ₁ = (ψ − φ)/2`, `φ₂ = (ψ + φ)/2`.
    pub fn to_amplitudes(&self) -> Result<AmplitudePair, ModelError> {
        for (name, value) in [
            ("total_intensity", self.total_intensity),
            ("theta", self.theta),
            ("phi", self.phi),
            ("psi", self.psi),
        ] {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name, value });
            }
        }
        if self.total_intensity < 0.0 {
            return Err(ModelError::NegativeIntensity(self.total_intensity));
        }
        let amplitude = self.total_intensity.sqrt();
        let phi1 = 0.5 * (self.psi - self.phi);
        let phi2 = 0.5 * (self.psi + self.phi);
        Ok(AmplitudePair {
            alpha1: Complex64::from_polar(amplitude * self.theta.cos(), phi1),
            alpha2: Complex64::from_polar(amplitude * self.theta.sin(), phi2),
        })
    }
}

/// Maps an angle onto `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}
