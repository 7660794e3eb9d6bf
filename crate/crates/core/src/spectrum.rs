//! Kerr-free dynamics: the constant dynamical matrix acting on
//! `(a₁, a₁†, a₂, a₂†)`, its doubly degenerate eigenfrequencies, closed-form
//! eigenvectors in the PT-symmetric case, and the exceptional-point locus.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::SpectrumError;
use crate::linalg::{c, CMatrix4, CVector4, I};
use crate::model::{validate, SystemParams, EP_TOLERANCE};

/// Below this relative size `ε² − κ²` is treated as zero by [`eigenvectors`].
pub const XI_TOLERANCE: f64 = 1e-12;

/// Generator `G = −i·M₄` of `d/dt (a₁, a₁†, a₂, a₂†)ᵀ = G·(…)` for the
/// linear (β = 0) system.
pub fn dynamical_matrix(params: &SystemParams) -> CMatrix4 {
    let SystemParams {
        epsilon: e,
        kappa: k,
        gamma1: g1,
        gamma2: g2,
        ..
    } = *params;
    #[rustfmt::skip]
    let m4 = CMatrix4::new(
        c(0.0, -g1), c(0.0, 0.0), c(e, 0.0),   c(k, 0.0),
        c(0.0, 0.0), c(0.0, -g1), c(-k, 0.0),  c(-e, 0.0),
        c(e, 0.0),   c(k, 0.0),   c(0.0, -g2), c(0.0, 0.0),
        c(-k, 0.0),  c(-e, 0.0),  c(0.0, 0.0), c(0.0, -g2),
    );
    m4 * (-I)
}

/// `ν̄₁,₂ = −i(γ₁+γ₂)/2 ± sqrt(ε² − κ² − (γ₁−γ₂)²/4)` (principal root).
pub fn eigenfrequencies(params: &SystemParams) -> (Complex64, Complex64) {
    let center = c(0.0, -0.5 * (params.gamma1 + params.gamma2));
    let dg = params.gamma1 - params.gamma2;
    let disc = params.epsilon * params.epsilon - params.kappa * params.kappa - 0.25 * dg * dg;
    let root = c(disc, 0.0).sqrt();
    (center + root, center - root)
}

/// Closed-form eigenvectors of the PT-symmetric dynamical matrix, two per
/// doubly degenerate eigenfrequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenvectors {
    /// `Ȳ⁺` and `Ȳ⁻` belonging to `ν̄₁ = +μ`.
    pub nu1: [CVector4; 2],
    /// `Ȳ⁺` and `Ȳ⁻` belonging to `ν̄₂ = −μ`.
    pub nu2: [CVector4; 2],
    /// `ε/|μ|`; grows without bound as the exceptional point is approached,
    /// where the two families coalesce and the matrix becomes defective.
    pub condition: f64,
}

pub fn eigenvectors(params: &SystemParams) -> Result<Eigenvectors, SpectrumError> {
    let class = validate(params)?;
    if !class.is_pt {
        return Err(SpectrumError::NonPtParameters);
    }
    let e = params.epsilon;
    let gamma = params.gamma1;
    let xi2 = e * e - params.kappa * params.kappa;
    if xi2 <= XI_TOLERANCE * e * e {
        return Err(SpectrumError::DegenerateXi(xi2));
    }
    let xi = xi2.sqrt();
    let mu2 = xi2 - gamma * gamma;
    let mu = if mu2.abs() <= EP_TOLERANCE * e * e {
        c(0.0, 0.0)
    } else {
        c(mu2, 0.0).sqrt()
    };
    let zeta_p = c((e + xi).sqrt(), 0.0);
    let zeta_m = c((e - xi).sqrt(), 0.0);
    let norm = c(1.0 / (2.0 * e.sqrt()), 0.0);
    let up = (mu + c(0.0, gamma)) / xi;
    let down = (mu - c(0.0, gamma)) / xi;

    let family = |sign: f64, ratio: Complex64, z_same: Complex64, z_other: Complex64| {
        CVector4::new(z_same, -z_other, z_same * ratio * sign, -z_other * ratio * sign) * norm
    };
    let nu1 = [family(1.0, up, zeta_p, zeta_m), family(-1.0, up, zeta_m, zeta_p)];
    let nu2 = [family(-1.0, down, zeta_p, zeta_m), family(1.0, down, zeta_m, zeta_p)];
    let condition = if mu.norm() == 0.0 { f64::INFINITY } else { e / mu.norm() };
    Ok(Eigenvectors { nu1, nu2, condition })
}

/// Down-conversion strength placing a PT system with rate `gamma` at its
/// exceptional point: `κ = sqrt(ε² − γ²)`.
pub fn ep_kappa(epsilon: f64, gamma: f64) -> Result<f64, SpectrumError> {
    if !epsilon.is_finite() || !gamma.is_finite() || epsilon <= 0.0 {
        return Err(SpectrumError::InvalidArgument(format!(
            "need finite epsilon > 0 and gamma (got {epsilon}, {gamma})"
        )));
    }
    if gamma < 0.0 {
        return Err(SpectrumError::InvalidArgument(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if gamma > epsilon {
        return Err(SpectrumError::GammaExceedsEpsilon { epsilon, gamma });
    }
    Ok((epsilon * epsilon - gamma * gamma).sqrt())
}

/// Summary of the linear spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearSpectrum {
    pub nu1: Complex64,
    pub nu2: Complex64,
    /// `sqrt(ε² − κ²)` (principal root, may be imaginary).
    pub xi: Complex64,
    /// `sqrt(ξ² − γ²)`, present for PT-symmetric parameters.
    pub mu: Option<Complex64>,
    pub zeta_plus: Complex64,
    pub zeta_minus: Complex64,
    /// Present for PT-symmetric parameters away from `ε = κ`.
    pub eigvecs: Option<Eigenvectors>,
}

pub fn linear_spectrum(params: &SystemParams) -> Result<LinearSpectrum, SpectrumError> {
    let class = validate(params)?;
    let (nu1, nu2) = eigenfrequencies(params);
    let e = params.epsilon;
    let xi = c(e * e - params.kappa * params.kappa, 0.0).sqrt();
    let mu = class.gamma.map(|g| (xi * xi - c(g * g, 0.0)).sqrt());
    let eigvecs = match eigenvectors(params) {
        Ok(v) => Some(v),
        Err(SpectrumError::NonPtParameters | SpectrumError::DegenerateXi(_)) => None,
        Err(other) => return Err(other),
    };
    Ok(LinearSpectrum {
        nu1,
        nu2,
        xi,
        mu,
        zeta_plus: (c(e, 0.0) + xi).sqrt(),
        zeta_minus: (c(e, 0.0) - xi).sqrt(),
        eigvecs,
    })
}
