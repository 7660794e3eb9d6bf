//! Classical amplitude dynamics: equations of motion in Cartesian and polar
//! form, the two nontrivial steady-state families and their linear stability.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{SteadyStateError, StepFailure};
use crate::linalg::{eigenvalues4, sort_spectrum, to_complex, I};
use crate::model::{AmplitudePair, SystemParams};
use crate::ode::{self, Settings, Trajectory};

/// `Im ν̃` above `STABILITY_TOLERANCE·ε` counts as growth.
pub const STABILITY_TOLERANCE: f64 = 1e-8;

/// Time derivative of the classical amplitudes.
pub fn rhs_cartesian(alpha: &AmplitudePair, params: &SystemParams) -> AmplitudePair {
    let AmplitudePair { alpha1: a1, alpha2: a2 } = *alpha;
    let n1 = a1.norm_sqr();
    let n2 = a2.norm_sqr();
    let d1 = -params.gamma1 * a1
        - I * params.epsilon * a2
        - I * params.kappa * a2.conj()
        - I * (params.beta_c * n2 + 2.0 * params.beta1 * n1) * a1;
    let d2 = -params.gamma2 * a2
        - I * params.epsilon * a1
        - I * params.kappa * a1.conj()
        - I * (params.beta_c * n1 + 2.0 * params.beta2 * n2) * a2;
    AmplitudePair::new(d1, d2)
}

/// Real-valued form of [`rhs_cartesian`] on `[Re α₁, Im α₁, Re α₂, Im α₂]`.
pub(crate) fn rhs_slice(params: &SystemParams, y: &[f64], dy: &mut [f64]) {
    let d = rhs_cartesian(&AmplitudePair::from_slice(y), params);
    dy[0] = d.alpha1.re;
    dy[1] = d.alpha1.im;
    dy[2] = d.alpha2.re;
    dy[3] = d.alpha2.im;
}

/// Integrates the classical equations over `grid` with the adaptive stepper.
pub fn integrate(
    alpha0: &AmplitudePair,
    params: &SystemParams,
    grid: &[f64],
    tol: f64,
) -> Trajectory<(f64, AmplitudePair)> {
    let mut samples = Vec::with_capacity(grid.len());
    let result = ode::integrate(
        |_, y, dy| rhs_slice(params, y, dy),
        &alpha0.to_array(),
        grid,
        Settings::with_tol(tol),
        |t, y| samples.push((t, AmplitudePair::from_slice(y))),
    );
    Trajectory {
        samples,
        failure: result.err(),
    }
}

/// Amplitudes in polar form `αⱼ = ϱⱼ·exp(iφⱼ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarState {
    pub rho1: f64,
    pub rho2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

impl PolarState {
    pub fn from_amplitudes(alpha: &AmplitudePair) -> Self {
        Self {
            rho1: alpha.alpha1.norm(),
            rho2: alpha.alpha2.norm(),
            phi1: alpha.alpha1.arg(),
            phi2: alpha.alpha2.arg(),
        }
    }

    pub fn to_amplitudes(&self) -> AmplitudePair {
        AmplitudePair::new(
            Complex64::from_polar(self.rho1, self.phi1),
            Complex64::from_polar(self.rho2, self.phi2),
        )
    }

    /// Phase difference `φ₂ − φ₁`.
    pub fn phi(&self) -> f64 {
        self.phi2 - self.phi1
    }

    /// Phase sum `φ₂ + φ₁`.
    pub fn psi(&self) -> f64 {
        self.phi2 + self.phi1
    }
}

/// `(dϱ₁, dϱ₂, dφ₁, dφ₂)/dt`; singular where either modulus vanishes.
pub fn rhs_polar(s: &PolarState, params: &SystemParams) -> [f64; 4] {
    let (phi, psi) = (s.phi(), s.psi());
    let SystemParams {
        epsilon: e,
        kappa: k,
        gamma1,
        gamma2,
        beta1,
        beta2,
        beta_c,
    } = *params;
    let cos_sum = e * phi.cos() + k * psi.cos();
    [
        -gamma1 * s.rho1 + (e * phi.sin() - k * psi.sin()) * s.rho2,
        -gamma2 * s.rho2 - (e * phi.sin() + k * psi.sin()) * s.rho1,
        -cos_sum * s.rho2 / s.rho1 - beta_c * s.rho2 * s.rho2 - 2.0 * beta1 * s.rho1 * s.rho1,
        -cos_sum * s.rho1 / s.rho2 - beta_c * s.rho1 * s.rho1 - 2.0 * beta2 * s.rho2 * s.rho2,
    ]
}

/// Integrates the polar equations; only meaningful while both moduli stay
/// away from zero.
pub fn integrate_polar(
    start: &PolarState,
    params: &SystemParams,
    grid: &[f64],
    tol: f64,
) -> Trajectory<(f64, PolarState)> {
    let mut samples = Vec::with_capacity(grid.len());
    let to_state = |y: &[f64]| PolarState {
        rho1: y[0],
        rho2: y[1],
        phi1: y[2],
        phi2: y[3],
    };
    let result = ode::integrate(
        |_, y, dy| dy.copy_from_slice(&rhs_polar(&to_state(y), params)),
        &[start.rho1, start.rho2, start.phi1, start.phi2],
        grid,
        Settings::with_tol(tol),
        |t, y| samples.push((t, to_state(y))),
    );
    Trajectory {
        samples,
        failure: result.err(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteadyStateKind {
    /// Equal-sign cosine terms.
    First,
    /// Opposite-sign cosine terms.
    Second,
}

/// A nontrivial fixed point of the classical equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    pub kind: SteadyStateKind,
    pub rho1_st: f64,
    pub rho2_st: f64,
    /// Steady phase difference, on the branch selected by `c_epsilon`
    /// (`cos φ = c_ε/ε`).
    pub phi_st: f64,
    /// Steady phase sum, on the branch selected by `c_kappa`.
    pub psi_st: f64,
    /// `ε·cos φ`, signed.
    pub c_epsilon: f64,
    /// `κ·cos ψ`, signed.
    pub c_kappa: f64,
    /// `(β₁/β₂)^{1/4}`.
    pub beta12: f64,
    /// `sin φ` from the amplitude balance.
    pub sin_phi: f64,
    /// `sin ψ` from the amplitude balance.
    pub sin_psi: f64,
}

impl SteadyState {
    pub fn polar(&self) -> PolarState {
        PolarState {
            rho1: self.rho1_st,
            rho2: self.rho2_st,
            phi1: 0.5 * (self.psi_st - self.phi_st),
            phi2: 0.5 * (self.psi_st + self.phi_st),
        }
    }

    pub fn amplitudes(&self) -> AmplitudePair {
        self.polar().to_amplitudes()
    }

    /// Whether the amplitudes vanish, i.e. the state coincides with the
    /// trivial fixed point.
    pub fn is_trivial(&self) -> bool {
        self.rho1_st == 0.0
    }
}

/// Result of the steady-state search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyStates {
    /// At most one state of each kind, First before Second.
    pub states: Vec<SteadyState>,
    /// `α = 0` is always a fixed point; this flags that one of `states`
    /// coincides with it (vanishing amplitudes).
    pub coincides_with_trivial: bool,
}

impl SteadyStates {
    pub fn get(&self, kind: SteadyStateKind) -> Option<&SteadyState> {
        self.states.iter().find(|s| s.kind == kind)
    }

    pub fn first(&self) -> Option<&SteadyState> {
        self.get(SteadyStateKind::First)
    }

    pub fn second(&self) -> Option<&SteadyState> {
        self.get(SteadyStateKind::Second)
    }
}

/// Residual norm of the Cartesian equations at `alpha`.
pub fn residual(alpha: &AmplitudePair, params: &SystemParams) -> f64 {
    let d = rhs_cartesian(alpha, params);
    (d.alpha1.norm_sqr() + d.alpha2.norm_sqr()).sqrt()
}

/// Finds the First- and Second-kind steady states.
///
/// The amplitude ratio is fixed by the Kerr rates, the sines of the steady
/// phases by the damping/gain balance, and the signs of the cosine terms
/// select the family. Sign combinations giving a negative squared modulus,
/// and candidates that fail the residual check, are discarded.
pub fn steady_states(params: &SystemParams) -> Result<SteadyStates, SteadyStateError> {
    params.check()?;
    params.check_kerr()?;
    let SystemParams {
        epsilon: e,
        kappa: k,
        gamma1,
        gamma2,
        beta1,
        beta2,
        beta_c,
    } = *params;
    if k == 0.0 {
        return Err(SteadyStateError::NoSteadyState(
            "kappa = 0 leaves the phase sum undetermined".into(),
        ));
    }
    let beta12 = (beta1 / beta2).powf(0.25);
    let sin_psi = (-gamma2 * beta12 - gamma1 / beta12) / (2.0 * k);
    let sin_phi = (-gamma2 * beta12 + gamma1 / beta12) / (2.0 * e);
    if sin_psi.abs() > 1.0 {
        return Err(SteadyStateError::NoSteadyState(format!(
            "arcsin argument for the phase sum is {sin_psi}"
        )));
    }
    if sin_phi.abs() > 1.0 {
        return Err(SteadyStateError::NoSteadyState(format!(
            "arcsin argument for the phase difference is {sin_phi}"
        )));
    }
    let cos_phi = (1.0 - sin_phi * sin_phi).sqrt();
    let cos_psi = (1.0 - sin_psi * sin_psi).sqrt();
    let kerr = beta_c * beta12 + 2.0 * beta1 / beta12;

    let build = |kind, se: f64, sk: f64| -> Option<SteadyState> {
        let c_epsilon = se * e * cos_phi;
        let c_kappa = sk * k * cos_psi;
        let numerator = -c_epsilon - c_kappa;
        if numerator < -1e-14 * (e + k.abs()) {
            return None;
        }
        let rho1 = (numerator.max(0.0) / kerr).sqrt();
        let state = SteadyState {
            kind,
            rho1_st: rho1,
            rho2_st: beta12 * rho1,
            phi_st: sin_phi.atan2(se * cos_phi),
            psi_st: sin_psi.atan2(sk * cos_psi),
            c_epsilon,
            c_kappa,
            beta12,
            sin_phi,
            sin_psi,
        };
        let scale = e * rho1.max(1.0).powi(3);
        (residual(&state.amplitudes(), params) <= 1e-10 * scale).then_some(state)
    };

    let mut states = Vec::with_capacity(2);
    if let Some(s) = build(SteadyStateKind::First, -1.0, -1.0).or_else(|| build(SteadyStateKind::First, 1.0, 1.0)) {
        states.push(s);
    }
    if let Some(s) = build(SteadyStateKind::Second, -1.0, 1.0).or_else(|| build(SteadyStateKind::Second, 1.0, -1.0)) {
        states.push(s);
    }
    let coincides_with_trivial = states.iter().any(SteadyState::is_trivial);
    Ok(SteadyStates {
        states,
        coincides_with_trivial,
    })
}

/// Jacobian of the polar equations at a steady state, in the variables
/// `(δϱ₁, δϱ₂, δφ, δψ)`.
///
/// The `(c_ε + c_κ)/ϱ` factors are rewritten with the steady-state relation
/// `c_ε + c_κ = −ϱ₁²(β_c β₁₂ + 2β₁/β₁₂)`, so the matrix stays finite when the
/// state collapses onto the trivial one.
pub fn stability_matrix(state: &SteadyState, params: &SystemParams) -> Matrix4<f64> {
    let b = state.beta12;
    let (r1, r2) = (state.rho1_st, state.rho2_st);
    let (ce, ck) = (state.c_epsilon, state.c_kappa);
    let se = params.epsilon * state.sin_phi;
    let sk = params.kappa * state.sin_psi;
    let SystemParams {
        gamma1,
        gamma2,
        beta1,
        beta2,
        beta_c,
        ..
    } = *params;
    let kerr = beta_c * b + 2.0 * beta1 / b;
    // (c_ε + c_κ)/ϱ₂ and (c_ε + c_κ)/ϱ₁
    let sum_over_r2 = -kerr * r1 / b;
    let sum_over_r1 = -kerr * r1;

    let g_plus = -sum_over_r2 * (1.0 + b * b) + 2.0 * (2.0 * beta1 - beta_c) * r1;
    let g_minus = -sum_over_r2 * (1.0 - b * b) + 2.0 * (-2.0 * beta1 - beta_c) * r1;
    let h_plus = sum_over_r1 * (1.0 / (b * b) + 1.0) - 2.0 * (2.0 * beta2 - beta_c) * r2;
    let h_minus = sum_over_r1 * (1.0 / (b * b) - 1.0) - 2.0 * (2.0 * beta2 + beta_c) * r2;
    let i_plus = 1.0 / b - b;
    let i_minus = 1.0 / b + b;

    #[rustfmt::skip]
    let m = Matrix4::new(
        -gamma1,   se - sk,  ce * r2,       -ck * r2,
        -se - sk,  -gamma2,  -ce * r1,      -ck * r1,
        g_plus,    h_plus,   i_plus * se,   i_plus * sk,
        g_minus,   h_minus,  i_minus * se,  i_minus * sk,
    );
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    /// Every mode decays or is marginal, at least one decays.
    Stable,
    /// All frequencies real within tolerance.
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `ν̃ = iλ` for the eigenvalues `λ` of the deviation matrix, so deviations
    /// evolve as `exp(−iν̃t)`. Sorted by real part.
    pub frequencies: [Complex64; 4],
    pub classification: Stability,
    pub max_imag: f64,
    /// Closed-form frequencies, PT-symmetric parameters only.
    pub analytic: Option<[Complex64; 4]>,
}

/// Closed-form stability frequencies for PT-symmetric parameters:
/// `±2i·sqrt(−c_κ(c_ε+c_κ))` and `±2i·sqrt(−2βc_ε(c_ε+c_κ)/(β+β_c/2))`.
pub fn analytic_frequencies(state: &SteadyState, params: &SystemParams) -> Option<[Complex64; 4]> {
    if !params.is_pt_symmetric() {
        return None;
    }
    let beta = params.beta1;
    let sum = state.c_epsilon + state.c_kappa;
    let a = Complex64::new(-state.c_kappa * sum, 0.0).sqrt() * 2.0 * I;
    let b = Complex64::new(-2.0 * beta * state.c_epsilon * sum / (beta + 0.5 * params.beta_c), 0.0).sqrt() * 2.0 * I;
    let mut out = [a, -a, b, -b];
    sort_spectrum(&mut out);
    Some(out)
}

pub fn classify(frequencies: &[Complex64], epsilon: f64) -> Stability {
    let tol = STABILITY_TOLERANCE * epsilon;
    let max_imag = frequencies.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    if max_imag > tol {
        Stability::Unstable
    } else if frequencies.iter().all(|z| z.im.abs() <= tol) {
        Stability::Marginal
    } else {
        Stability::Stable
    }
}

pub fn stability_frequencies(state: &SteadyState, params: &SystemParams) -> Result<StabilityReport, SteadyStateError> {
    params.check()?;
    let m = to_complex(&stability_matrix(state, params));
    let eig = eigenvalues4(&m).map_err(|e| SteadyStateError::NoSteadyState(e.to_string()))?;
    let mut frequencies = eig.map(|l| I * l);
    sort_spectrum(&mut frequencies);
    let max_imag = frequencies.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        frequencies,
        classification: classify(&frequencies, params.epsilon),
        max_imag,
        analytic: analytic_frequencies(state, params),
    })
}

/// Convenience: integrate from a steady state and report the largest
/// deviation seen over the grid.
pub fn max_drift_from(state: &SteadyState, params: &SystemParams, grid: &[f64], tol: f64) -> Result<f64, StepFailure> {
    let start = state.amplitudes();
    let traj = integrate(&start, params, grid, tol).into_result()?;
    Ok(traj
        .iter()
        .map(|(_, a)| ((a.alpha1 - start.alpha1).norm_sqr() + (a.alpha2 - start.alpha2).norm_sqr()).sqrt())
        .fold(0.0, f64::max))
}
