//! Linearized quantum fluctuations around a classical trajectory.
//!
//! Operator corrections are ordered `(δa₁, δa₁†, δa₂, δa₂†)`. Second moments
//! `N[i][j] = ⟨δÂᵢ δÂⱼ⟩` obey `dN/dt = M N + N Mᵀ + Q`, where `M` is the drift
//! matrix of the linearized Heisenberg–Langevin equations and `Q` the
//! diffusion matrix of the Langevin forces.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::Serialize;

use crate::classical::{residual, rhs_slice};
use crate::error::FluctuationError;
use crate::linalg::{c, eig4, CMatrix4, I};
use crate::model::{AmplitudePair, SystemParams};
use crate::ode::{self, Settings, Trajectory};

/// Eigenvector condition number above which the closed form is refused.
pub const DEFECTIVE_CONDITION: f64 = 1e12;

/// Rounding splits an exactly defective eigenvalue into a pair separated by
/// about `sqrt(machine epsilon)`, with a condition number far below
/// [`DEFECTIVE_CONDITION`]. Such a pair (closer than `COALESCENCE·ε`) is
/// treated as defective once the condition number exceeds
/// [`COALESCED_CONDITION`].
pub const COALESCENCE: f64 = 1e-6;
pub const COALESCED_CONDITION: f64 = 1e6;

fn is_defective(values: &[Complex64; 4], condition: f64, epsilon: f64) -> bool {
    if !(condition <= DEFECTIVE_CONDITION) {
        return true;
    }
    let coalesced = (0..4).any(|i| (i + 1..4).any(|j| (values[i] - values[j]).norm() < COALESCENCE * epsilon));
    coalesced && condition > COALESCED_CONDITION
}

/// `|ν̃_l + ν̃_l'| < SINGULAR_SUM_TOLERANCE·ε` switches to the linear-in-t limit.
pub const SINGULAR_SUM_TOLERANCE: f64 = 1e-6;

/// Drift matrix `M(α)` of the linearized operator equations.
pub fn drift_matrix(alpha: &AmplitudePair, params: &SystemParams) -> CMatrix4 {
    let AmplitudePair { alpha1: a1, alpha2: a2 } = *alpha;
    let SystemParams {
        epsilon: e,
        kappa: k,
        gamma1,
        gamma2,
        beta1,
        beta2,
        beta_c,
    } = *params;
    let n1 = a1.norm_sqr();
    let n2 = a2.norm_sqr();

    let row0 = [
        -(gamma1 + I * (4.0 * beta1 * n1 + beta_c * n2)),
        -2.0 * I * beta1 * a1 * a1,
        -I * (e + beta_c * a1 * a2.conj()),
        -I * (k + beta_c * a1 * a2),
    ];
    let row2 = [
        -I * (e + beta_c * a1.conj() * a2),
        -I * (k + beta_c * a1 * a2),
        -(gamma2 + I * (4.0 * beta2 * n2 + beta_c * n1)),
        -2.0 * I * beta2 * a2 * a2,
    ];
    let swap = [1, 0, 3, 2];
    let mut m = CMatrix4::zeros();
    for j in 0..4 {
        m[(0, j)] = row0[j];
        m[(2, j)] = row2[j];
        m[(1, swap[j])] = row0[j].conj();
        m[(3, swap[j])] = row2[j].conj();
    }
    m
}

/// Diffusion matrix of the Langevin forces; only `Q[0][1] = 2γ₁` and
/// `Q[3][2] = −2γ₂` are nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix {
    pub q: Matrix4<f64>,
}

impl DiffusionMatrix {
    pub fn new(params: &SystemParams, noise: bool) -> Self {
        let mut q = Matrix4::zeros();
        if noise {
            q[(0, 1)] = 2.0 * params.gamma1;
            q[(3, 2)] = -2.0 * params.gamma2;
        }
        Self { q }
    }

    pub fn complex(&self) -> CMatrix4 {
        self.q.map(|x| c(x, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMatrix {
    pub n: CMatrix4,
    pub time: f64,
}

impl MomentMatrix {
    /// `⟨[δa₁, δa₁†]⟩`, equal to 1 when the canonical commutator is preserved.
    pub fn commutator1(&self) -> Complex64 {
        self.n[(0, 1)] - self.n[(1, 0)]
    }

    pub fn commutator2(&self) -> Complex64 {
        self.n[(2, 3)] - self.n[(3, 2)]
    }

    /// Largest violation of the adjoint-pair structure
    /// `N₁₁ = N₀₀*`, `N₃₃ = N₂₂*`, `N₁₃ = N₀₂*`, `N₀₃ = N₁₂*`.
    pub fn conjugation_defect(&self) -> f64 {
        let n = &self.n;
        [
            n[(1, 1)] - n[(0, 0)].conj(),
            n[(3, 3)] - n[(2, 2)].conj(),
            n[(1, 3)] - n[(0, 2)].conj(),
            n[(0, 3)] - n[(1, 2)].conj(),
        ]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InitialFluctuations {
    /// Fluctuations of coherent input states.
    VacuumFluctuations,
}

pub fn initial_moments(input: InitialFluctuations) -> MomentMatrix {
    match input {
        InitialFluctuations::VacuumFluctuations => {
            let mut n = CMatrix4::zeros();
            n[(0, 1)] = c(1.0, 0.0);
            n[(2, 3)] = c(1.0, 0.0);
            MomentMatrix { n, time: 0.0 }
        }
    }
}

/// Propagator `P(t, t')` of the homogeneous operator equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationMatrix {
    pub p: CMatrix4,
}

impl PropagationMatrix {
    pub fn identity() -> Self {
        Self {
            p: CMatrix4::identity(),
        }
    }

    /// Coefficients of the annihilation operators: `U_jk = P[2j][2k]`.
    pub fn u(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|j, k| self.p[(2 * j, 2 * k)])
    }

    /// Coefficients of the creation operators: `V_jk = P[2j][2k+1]`.
    pub fn v(&self) -> Matrix2<Complex64> {
        Matrix2::from_fn(|j, k| self.p[(2 * j, 2 * k + 1)])
    }

    /// `P N₀ Pᵀ`.
    pub fn transport(&self, n0: &CMatrix4) -> CMatrix4 {
        self.p * n0 * self.p.transpose()
    }
}

/// Classical amplitudes and fluctuation moments at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSample {
    pub t: f64,
    pub alpha: AmplitudePair,
    pub moments: MomentMatrix,
}

const STATE_LEN: usize = 4 + 32;

fn pack(alpha: &AmplitudePair, m: &CMatrix4, y: &mut [f64]) {
    y[..4].copy_from_slice(&alpha.to_array());
    for (k, z) in m.iter().enumerate() {
        y[4 + k] = z.re;
        y[20 + k] = z.im;
    }
}

fn unpack_matrix(y: &[f64]) -> CMatrix4 {
    CMatrix4::from_iterator((0..16).map(|k| c(y[4 + k], y[20 + k])))
}

fn check_tol(tol: f64) -> Result<(), FluctuationError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(FluctuationError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )))
    }
}

/// Propagates the classical amplitudes and the moment matrix together on
/// `grid`, starting from `alpha0` and vacuum fluctuations.
///
/// With `noise = false` the result is the homogeneous part `P N(0) Pᵀ` only,
/// which does not conserve the commutators when damping or gain are present.
pub fn propagate_moments(
    alpha0: &AmplitudePair,
    params: &SystemParams,
    noise: bool,
    grid: &[f64],
    tol: f64,
) -> Result<Trajectory<FluctuationSample>, FluctuationError> {
    check_tol(tol)?;
    let q = DiffusionMatrix::new(params, noise).complex();
    let n0 = initial_moments(InitialFluctuations::VacuumFluctuations).n;
    let mut y0 = [0.0; STATE_LEN];
    pack(alpha0, &n0, &mut y0);

    let mut samples = Vec::with_capacity(grid.len());
    let result = ode::integrate(
        |_, y, dy| {
            rhs_slice(params, &y[..4], &mut dy[..4]);
            let alpha = AmplitudePair::from_slice(y);
            let m = drift_matrix(&alpha, params);
            let n = unpack_matrix(y);
            let dn = m * n + n * m.transpose() + q;
            for (k, z) in dn.iter().enumerate() {
                dy[4 + k] = z.re;
                dy[20 + k] = z.im;
            }
        },
        &y0,
        grid,
        Settings::with_tol(tol),
        |t, y| {
            samples.push(FluctuationSample {
                t,
                alpha: AmplitudePair::from_slice(y),
                moments: MomentMatrix {
                    n: unpack_matrix(y),
                    time: t,
                },
            })
        },
    );
    Ok(Trajectory {
        samples,
        failure: result.err(),
    })
}

/// Propagator and accumulated Langevin noise at time `t`, computed the long
/// way: `P(s, 0)` is integrated on `intervals` (rounded up to even) uniform
/// sub-intervals, `P(t, s) = P(t, 0)·P(s, 0)⁻¹`, and
/// `∫₀ᵗ P(t,s) Q P(t,s)ᵀ ds` is evaluated with composite Simpson.
pub fn propagation_and_noise_quadrature(
    alpha0: &AmplitudePair,
    params: &SystemParams,
    t: f64,
    intervals: usize,
    tol: f64,
) -> Result<(PropagationMatrix, CMatrix4), FluctuationError> {
    check_tol(tol)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FluctuationError::InvalidArgument(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok((PropagationMatrix::identity(), CMatrix4::zeros()));
    }
    let n = (intervals.max(2) + 1) & !1;
    let h = t / n as f64;
    let grid: Vec<f64> = (0..=n).map(|k| if k == n { t } else { k as f64 * h }).collect();

    let mut y0 = [0.0; STATE_LEN];
    pack(alpha0, &CMatrix4::identity(), &mut y0);
    let mut forward = Vec::with_capacity(n + 1);
    ode::integrate(
        |_, y, dy| {
            rhs_slice(params, &y[..4], &mut dy[..4]);
            let m = drift_matrix(&AmplitudePair::from_slice(y), params);
            let dp = m * unpack_matrix(y);
            for (k, z) in dp.iter().enumerate() {
                dy[4 + k] = z.re;
                dy[20 + k] = z.im;
            }
        },
        &y0,
        &grid,
        Settings::with_tol(tol),
        |_, y| forward.push(unpack_matrix(y)),
    )?;

    let p_t = forward[n];
    let q = DiffusionMatrix::new(params, true).complex();
    let mut noise = CMatrix4::zeros();
    if q.iter().any(|z| z.re != 0.0) {
        for (k, p_s) in forward.iter().enumerate() {
            let inv = p_s.try_inverse().ok_or(crate::error::LinalgError::Singular)?;
            let p_ts = p_t * inv;
            let weight = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            noise += p_ts * q * p_ts.transpose() * c(weight * h / 3.0, 0.0);
        }
    }
    Ok((PropagationMatrix { p: p_t }, noise))
}

/// Closed-form propagation for a time-independent classical solution, built
/// from the eigen-decomposition `M = Y·diag(−iν̃)·Y⁻¹`.
#[derive(Debug, Clone)]
pub struct ConstantCoefficientSolution {
    /// `ν̃_l`, the eigenfrequencies of the fluctuation dynamics.
    pub frequencies: [Complex64; 4],
    y: CMatrix4,
    y_inv: CMatrix4,
    epsilon: f64,
    /// `(Y⁻¹ Q Y⁻ᵀ)_{ll'}`.
    source: CMatrix4,
}

impl ConstantCoefficientSolution {
    /// `alpha` must be a fixed point of the classical equations (a steady
    /// state or the trivial state `α = 0`).
    pub fn new(alpha: &AmplitudePair, params: &SystemParams) -> Result<Self, FluctuationError> {
        let scale = params.epsilon * alpha.intensity().sqrt().max(1.0).powi(3);
        let res = residual(alpha, params);
        if !(res <= 1e-8 * scale) {
            return Err(FluctuationError::InvalidArgument(format!(
                "amplitudes are not stationary (residual {res:.3e})"
            )));
        }
        let m = drift_matrix(alpha, params);
        let eig = eig4(&m)?;
        let y_inv = match eig.inverse {
            Some(inv) if !is_defective(&eig.values, eig.condition, params.epsilon) => inv,
            _ => {
                return Err(FluctuationError::DefectiveMatrix {
                    condition: eig.condition,
                })
            }
        };
        let q = DiffusionMatrix::new(params, true).complex();
        Ok(Self {
            frequencies: eig.values.map(|l| I * l),
            y: eig.vectors,
            y_inv,
            epsilon: params.epsilon,
            source: y_inv * q * y_inv.transpose(),
        })
    }

    pub fn propagation(&self, t: f64) -> PropagationMatrix {
        let phase = CMatrix4::from_diagonal(&nalgebra::Vector4::from_iterator(
            self.frequencies.iter().map(|nu| (-I * nu * t).exp()),
        ));
        PropagationMatrix {
            p: self.y * phase * self.y_inv,
        }
    }

    /// Accumulated Langevin contribution to `N(t)`:
    /// `Σ Y_kl Y_k'l' · 2i(e^{−i(ν̃_l+ν̃_l')t} − 1)/(ν̃_l+ν̃_l') · [γ₁y_l0 y_l'1 − γ₂y_l3 y_l'2]`,
    /// with the factor replaced by `2t` for (near) vanishing frequency sums.
    pub fn noise(&self, t: f64) -> CMatrix4 {
        let mut kernel = CMatrix4::zeros();
        for l in 0..4 {
            for lp in 0..4 {
                let sum = self.frequencies[l] + self.frequencies[lp];
                // source already carries the factor 2 of Q
                let factor = if sum.norm() < SINGULAR_SUM_TOLERANCE * self.epsilon {
                    c(t, 0.0)
                } else {
                    I * ((-I * sum * t).exp() - 1.0) / sum
                };
                kernel[(l, lp)] = factor * self.source[(l, lp)];
            }
        }
        self.y * kernel * self.y.transpose()
    }

    /// `N(t) = P N₀ Pᵀ` plus the noise term when `noise` is set.
    pub fn moments(&self, n0: &CMatrix4, t: f64, noise: bool) -> MomentMatrix {
        let mut n = self.propagation(t).transport(n0);
        if noise {
            n += self.noise(t);
        }
        MomentMatrix { n, time: t }
    }
}

/// `(U, V, noise moments)` at time `t` for a time-independent classical
/// solution.
pub fn constant_coefficient_solution(
    alpha: &AmplitudePair,
    params: &SystemParams,
    t: f64,
) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>, CMatrix4), FluctuationError> {
    let sol = ConstantCoefficientSolution::new(alpha, params)?;
    let p = sol.propagation(t);
    Ok((p.u(), p.v(), sol.noise(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::steady_states;
    use crate::linalg::max_abs_diff;
    use crate::ode::uniform_grid;
    use crate::spectrum::{dynamical_matrix, ep_kappa};
    use approx::assert_abs_diff_eq;

    fn strong_gain() -> SystemParams {
        SystemParams::pt_symmetric(1.0, 0.9, 0.1, 0.05, 0.0)
    }

    #[test]
    fn drift_examples() {
        let p = SystemParams::linear(1.0, 0.7, 0.3, -0.2).with_kerr(0.1, 0.2, 0.05);
        assert!(max_abs_diff(&drift_matrix(&AmplitudePair::ZERO, &p), &dynamical_matrix(&p)) < 1e-15);

        let mut p = SystemParams::linear(0.0, 0.0, 0.0, 0.0);
        p.beta1 = 0.05;
        let a = AmplitudePair::new(c(1.0, 0.0), c(0.0, 0.0));
        let m = drift_matrix(&a, &p);
        assert_abs_diff_eq!(m[(0, 0)].im, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 1)].im, -0.1, epsilon = 1e-15);

        let p = SystemParams::linear(0.0, 0.0, 0.0, 0.0).with_kerr(0.0, 0.0, 0.1);
        let a = AmplitudePair::new(c(1.0, 0.0), c(1.0, 0.0));
        assert_abs_diff_eq!(drift_matrix(&a, &p)[(0, 2)].im, -0.1, epsilon = 1e-15);
    }

    #[test]
    fn drift_rows_are_conjugate_pairs() {
        let p = SystemParams::linear(1.0, 0.4, 0.2, -0.1).with_kerr(0.05, 0.03, 0.02);
        let a = AmplitudePair::new(c(0.3, -1.2), c(0.8, 0.5));
        let m = drift_matrix(&a, &p);
        let swap = [1, 0, 3, 2];
        for (r, rc) in [(0, 1), (2, 3)] {
            for j in 0..4 {
                assert_eq!(m[(rc, swap[j])], m[(r, j)].conj());
            }
        }
    }

    /// The drift matrix is the Jacobian of the classical equations with
    /// respect to `(α₁, α₁*, α₂, α₂*)`, taken by central differences.
    #[test]
    fn drift_matches_wirtinger_jacobian() {
        let p = SystemParams::linear(1.0, 0.6, 0.1, -0.05).with_kerr(0.07, 0.03, 0.04);
        let a = AmplitudePair::new(c(0.7, -0.4), c(-1.1, 0.9));
        let m = drift_matrix(&a, &p);
        let h = 1e-6;
        let partial = |k: usize| {
            let (mut xp, mut xm) = (a.to_array(), a.to_array());
            xp[k] += h;
            xm[k] -= h;
            let fp = crate::classical::rhs_cartesian(&AmplitudePair::from_slice(&xp), &p);
            let fm = crate::classical::rhs_cartesian(&AmplitudePair::from_slice(&xm), &p);
            [(fp.alpha1 - fm.alpha1) / (2.0 * h), (fp.alpha2 - fm.alpha2) / (2.0 * h)]
        };
        for mode in 0..2 {
            let (dx, dy) = (partial(2 * mode), partial(2 * mode + 1));
            for (row, out) in [(0usize, 0usize), (2, 1)] {
                let d_alpha = (dx[out] - I * dy[out]) * 0.5;
                let d_conj = (dx[out] + I * dy[out]) * 0.5;
                assert!((m[(row, 2 * mode)] - d_alpha).norm() < 1e-7);
                assert!((m[(row, 2 * mode + 1)] - d_conj).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn vacuum_moments() {
        let n = initial_moments(InitialFluctuations::VacuumFluctuations);
        assert_eq!(n.commutator1(), c(1.0, 0.0));
        assert_eq!(n.commutator2(), c(1.0, 0.0));
        assert_eq!(n.conjugation_defect(), 0.0);
    }

    #[test]
    fn diffusion_entries() {
        let p = SystemParams::linear(1.0, 0.5, 0.1, -0.3);
        let q = DiffusionMatrix::new(&p, true).q;
        assert_eq!(q[(0, 1)], 0.2);
        assert_eq!(q[(3, 2)], 0.6);
        assert_eq!(q[(1, 0)], 0.0);
        assert_eq!(q[(2, 3)], 0.0);
        assert_eq!(q.iter().filter(|x| **x != 0.0).count(), 2);
        assert_eq!(DiffusionMatrix::new(&p, false).q, Matrix4::zeros());
    }

    #[test]
    fn lossless_b1_at_quarter_period() {
        let p = SystemParams::linear(1.0, 0.5, 0.0, 0.0);
        let xi = 0.75f64.sqrt();
        let t = std::f64::consts::FRAC_PI_2 / xi;
        let traj = propagate_moments(&AmplitudePair::ZERO, &p, true, &[0.0, t], 1e-12)
            .unwrap()
            .into_result()
            .unwrap();
        let n = traj[1].moments.n;
        assert_abs_diff_eq!(n[(1, 0)].re, 1.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(n[(0, 0)].re, -2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn damped_mode_loses_commutator_without_noise() {
        let p0 = SystemParams::linear(0.0, 0.0, 0.1, 0.0);
        let grid = uniform_grid(10.0, 0.5);
        for (noise, expected) in [
            (false, &(|t: f64| (-0.2 * t).exp()) as &dyn Fn(f64) -> f64),
            (true, &|_| 1.0),
        ] {
            let traj = propagate_moments(&AmplitudePair::ZERO, &p0, noise, &grid, 1e-12)
                .unwrap()
                .into_result()
                .unwrap();
            for s in traj {
                assert_abs_diff_eq!(s.moments.n[(0, 1)].re, expected(s.t), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn amplified_mode_commutator_without_noise() {
        let p = SystemParams::linear(0.0, 0.0, 0.0, -0.1);
        let traj = propagate_moments(&AmplitudePair::ZERO, &p, false, &uniform_grid(10.0, 1.0), 1e-12)
            .unwrap()
            .into_result()
            .unwrap();
        for s in traj {
            assert!((s.moments.commutator2().re - (0.2 * s.t).exp()).abs() < 1e-8 * (0.2 * s.t).exp());
        }
    }

    #[test]
    fn commutators_conserved_with_noise_and_kerr() {
        let p = strong_gain();
        let s = *steady_states(&p).unwrap().first().unwrap();
        let traj = propagate_moments(&s.amplitudes(), &p, true, &uniform_grid(10.0, 0.1), 1e-10)
            .unwrap()
            .into_result()
            .unwrap();
        for f in traj {
            assert!((f.moments.commutator1() - 1.0).norm() < 1e-8);
            assert!((f.moments.commutator2() - 1.0).norm() < 1e-8);
            assert!(f.moments.conjugation_defect() < 1e-10);
        }
    }

    #[test]
    fn quadrature_trivial_cases() {
        let p = strong_gain();
        let (prop, noise) = propagation_and_noise_quadrature(&AmplitudePair::ZERO, &p, 0.0, 10, 1e-10).unwrap();
        assert_eq!(prop.p, CMatrix4::identity());
        assert_eq!(noise, CMatrix4::zeros());
        let lossless = SystemParams::linear(1.0, 0.5, 0.0, 0.0);
        let (_, noise) = propagation_and_noise_quadrature(&AmplitudePair::ZERO, &lossless, 3.0, 10, 1e-10).unwrap();
        assert_eq!(noise, CMatrix4::zeros());
    }

    #[test]
    fn quadrature_matches_moment_ode() {
        let p = strong_gain();
        let start = AmplitudePair::new(c(1.0, 0.5), c(-0.3, 0.8));
        let t = 5.0;
        let (prop, noise) = propagation_and_noise_quadrature(&start, &p, t, 2000, 1e-11).unwrap();
        let n0 = initial_moments(InitialFluctuations::VacuumFluctuations).n;
        let quad = prop.transport(&n0) + noise;
        let ode = propagate_moments(&start, &p, true, &[0.0, t], 1e-11)
            .unwrap()
            .into_result()
            .unwrap()[1]
            .moments
            .n;
        assert!(max_abs_diff(&quad, &ode) < 1e-6, "{}", max_abs_diff(&quad, &ode));
    }

    #[test]
    fn closed_form_at_zero_time() {
        let p = strong_gain();
        let (u, v, noise) = constant_coefficient_solution(&AmplitudePair::ZERO, &p, 0.0).unwrap();
        assert!((u - Matrix2::identity()).norm() < 1e-12);
        assert!(v.norm() < 1e-12);
        assert!(noise.norm() < 1e-12);
    }

    #[test]
    fn closed_form_lossless_propagator() {
        let p = SystemParams::linear(1.0, 0.5, 0.0, 0.0);
        let xi = 0.75f64.sqrt();
        for t in [0.3, 1.7, 4.0] {
            let (u, v, _) = constant_coefficient_solution(&AmplitudePair::ZERO, &p, t).unwrap();
            let (s, co) = (xi * t).sin_cos();
            assert!((u[(0, 0)] - c(co, 0.0)).norm() < 1e-12);
            assert!((u[(0, 1)] - c(0.0, -s / xi)).norm() < 1e-12);
            assert!((v[(0, 1)] - c(0.0, -0.5 * s / xi)).norm() < 1e-12);
            assert!(v[(0, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_moment_ode_at_steady_state() {
        let p = strong_gain();
        let s = *steady_states(&p).unwrap().first().unwrap();
        let alpha = s.amplitudes();
        let sol = ConstantCoefficientSolution::new(&alpha, &p).unwrap();
        let n0 = initial_moments(InitialFluctuations::VacuumFluctuations).n;
        let traj = propagate_moments(&alpha, &p, true, &uniform_grid(5.0, 0.25), 1e-12)
            .unwrap()
            .into_result()
            .unwrap();
        for f in traj {
            let closed = sol.moments(&n0, f.t, true).n;
            assert!(
                max_abs_diff(&closed, &f.moments.n) < 1e-8,
                "t={} diff={}",
                f.t,
                max_abs_diff(&closed, &f.moments.n)
            );
        }
    }

    #[test]
    fn singular_limit_matches_quadrature() {
        // trivial state of a PT system: ν̃ = ±μ come in opposite pairs
        let p = SystemParams::linear(1.0, 0.5, 0.1, -0.1);
        let t = 3.0;
        let sol = ConstantCoefficientSolution::new(&AmplitudePair::ZERO, &p).unwrap();
        let (_, quad) = propagation_and_noise_quadrature(&AmplitudePair::ZERO, &p, t, 2000, 1e-12).unwrap();
        assert!(max_abs_diff(&sol.noise(t), &quad) < 1e-8);
    }

    #[test]
    fn exceptional_point_is_defective() {
        let k = ep_kappa(1.0, 0.1).unwrap();
        for p in [
            SystemParams::linear(1.0, k, 0.1, -0.1),
            SystemParams::linear(1.0, 1.0, 0.0, 0.0),
        ] {
            assert!(matches!(
                ConstantCoefficientSolution::new(&AmplitudePair::ZERO, &p),
                Err(FluctuationError::DefectiveMatrix { .. })
            ));
        }
        // degenerate but diagonalizable, and close to (not at) the EP
        for p in [
            SystemParams::linear(1.0, 0.5, 0.0, 0.0),
            SystemParams::linear(1.0, k + 1e-6, 0.1, -0.1),
        ] {
            assert!(ConstantCoefficientSolution::new(&AmplitudePair::ZERO, &p).is_ok());
        }
    }

    #[test]
    fn non_stationary_amplitudes_rejected() {
        let p = strong_gain();
        let a = AmplitudePair::new(c(1.0, 0.0), c(0.0, 0.0));
        assert!(matches!(
            ConstantCoefficientSolution::new(&a, &p),
            Err(FluctuationError::InvalidArgument(_))
        ));
    }
}
