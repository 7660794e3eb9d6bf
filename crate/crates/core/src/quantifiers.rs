//! Gaussian-state quantifiers: covariance matrix, logarithmic negativity,
//! sub-shot-noise parameter and principal squeezing variances.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::QuantifierError;
use crate::fluctuations::MomentMatrix;
use crate::model::AmplitudePair;

/// Smallest symplectic eigenvalue accepted as physical is `1 − PHYSICALITY_TOLERANCE`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-6;

/// Below this total photon number `R` is reported as 0.
pub const VACUUM_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LogBase {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "10")]
    Ten,
    #[serde(rename = "e")]
    Natural,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Ten => x.log10(),
            LogBase::Natural => x.ln(),
        }
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "two" => Ok(LogBase::Two),
            "10" | "ten" => Ok(LogBase::Ten),
            "e" | "natural" | "ln" => Ok(LogBase::Natural),
            other => Err(format!("unknown log base '{other}' (expected 2, 10 or e)")),
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Two => "2",
            LogBase::Ten => "10",
            LogBase::Natural => "e",
        })
    }
}

/// Fluctuation moments `Bⱼ = ⟨δaⱼ†δaⱼ⟩`, `Cⱼ = ⟨δaⱼ²⟩`, `D = ⟨δa₁δa₂⟩`,
/// `D̄ = −⟨δa₁†δa₂⟩` together with the classical amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianCoefficients {
    pub b1: f64,
    pub b2: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub d: Complex64,
    pub d_bar: Complex64,
    pub alpha: AmplitudePair,
}

impl GaussianCoefficients {
    pub fn vacuum(alpha: AmplitudePair) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            b1: 0.0,
            b2: 0.0,
            c1: zero,
            c2: zero,
            d: zero,
            d_bar: zero,
            alpha,
        }
    }
}

pub fn extract_coefficients(n: &MomentMatrix, alpha: &AmplitudePair) -> GaussianCoefficients {
    let n = &n.n;
    GaussianCoefficients {
        b1: n[(1, 0)].re,
        b2: n[(3, 2)].re,
        c1: n[(0, 0)],
        c2: n[(2, 2)],
        d: n[(0, 2)],
        d_bar: -n[(1, 2)],
        alpha: *alpha,
    }
}

/// Symmetric covariance matrix in `(x₁, p₁, x₂, p₂)` ordering with
/// `x = a + a†`, `p = −i(a − a†)`, so the vacuum maps to the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    pub cs: Matrix4<f64>,
}

impl CovarianceMatrix {
    pub fn block_a(&self) -> Matrix2<f64> {
        self.cs.fixed_view::<2, 2>(0, 0).into_owned()
    }

    pub fn block_b(&self) -> Matrix2<f64> {
        self.cs.fixed_view::<2, 2>(2, 2).into_owned()
    }

    pub fn block_k(&self) -> Matrix2<f64> {
        self.cs.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// Global invariant `det A + det B + 2 det K`.
    pub fn seralian(&self) -> f64 {
        self.block_a().determinant() + self.block_b().determinant() + 2.0 * self.block_k().determinant()
    }

    /// Same invariant for the partially transposed state.
    pub fn ppt_seralian(&self) -> f64 {
        self.block_a().determinant() + self.block_b().determinant() - 2.0 * self.block_k().determinant()
    }

    /// Smaller symplectic eigenvalue of the state itself.
    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        smaller_root(self.seralian(), self.cs.determinant()).sqrt()
    }

    /// Smaller symplectic eigenvalue of the partial transpose.
    pub fn min_ppt_symplectic_eigenvalue(&self) -> f64 {
        smaller_root(self.ppt_seralian(), self.cs.determinant()).sqrt()
    }
}

/// Smaller root of `x² − s·x + det = 0`.
fn smaller_root(s: f64, det: f64) -> f64 {
    let disc = (s * s - 4.0 * det).max(0.0);
    0.5 * (s - disc.sqrt())
}

pub fn covariance(k: &GaussianCoefficients) -> CovarianceMatrix {
    let block = |b: f64, c: Complex64| {
        Matrix2::new(
            1.0 + 2.0 * b + 2.0 * c.re,
            2.0 * c.im,
            2.0 * c.im,
            1.0 + 2.0 * b - 2.0 * c.re,
        )
    };
    let (d, db) = (k.d, k.d_bar);
    let cross = Matrix2::new(
        2.0 * (d - db).re,
        2.0 * (d.im - db.im),
        2.0 * (d.im + db.im),
        -2.0 * (d + db).re,
    );
    let mut cs = Matrix4::zeros();
    cs.fixed_view_mut::<2, 2>(0, 0).copy_from(&block(k.b1, k.c1));
    cs.fixed_view_mut::<2, 2>(2, 2).copy_from(&block(k.b2, k.c2));
    cs.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
    cs.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross.transpose());
    CovarianceMatrix { cs }
}

/// Logarithmic negativity of a physical covariance matrix.
pub fn log_negativity(cov: &CovarianceMatrix, base: LogBase) -> Result<f64, QuantifierError> {
    let nu = cov.min_symplectic_eigenvalue();
    if !(nu >= 1.0 - PHYSICALITY_TOLERANCE) {
        return Err(QuantifierError::NonPhysicalCovariance(nu));
    }
    Ok(log_negativity_unchecked(cov, base))
}

/// Logarithmic negativity without the uncertainty-principle check, for
/// moment matrices propagated without Langevin noise.
pub fn log_negativity_unchecked(cov: &CovarianceMatrix, base: LogBase) -> f64 {
    let sigma_sq = smaller_root(cov.ppt_seralian(), cov.cs.determinant());
    if !(sigma_sq > 0.0) {
        return if sigma_sq == 0.0 { f64::INFINITY } else { f64::NAN };
    }
    (-0.5 * base.log(sigma_sq)).max(0.0)
}

/// Sub-shot-noise parameter `R` (`R < 1` signals nonclassical photon-number
/// statistics of the summed field).
pub fn sub_shot_noise(k: &GaussianCoefficients) -> f64 {
    let AmplitudePair { alpha1: a1, alpha2: a2 } = k.alpha;
    let b1 = a1.norm_sqr() + k.b1;
    let b2 = a2.norm_sqr() + k.b2;
    if b1 + b2 < VACUUM_GUARD {
        return 0.0;
    }
    let c1 = a1 * a1 + k.c1;
    let c2 = a2 * a2 + k.c2;
    let d = a1 * a2 + k.d;
    let d_bar = a1.conj() * a2 - k.d_bar;
    let imbalance = a1.norm_sqr() - a2.norm_sqr();
    let excess = b1 * b1 + b2 * b2 + c1.norm_sqr() + c2.norm_sqr()
        - 2.0 * d.norm_sqr()
        - 2.0 * d_bar.norm_sqr()
        - 2.0 * imbalance * imbalance;
    1.0 + excess / (b1 + b2)
}

/// `(λ₁, λ₂, λ)`: single-mode and two-mode principal squeezing variances.
pub fn squeezing(k: &GaussianCoefficients) -> (f64, f64, f64) {
    let l1 = 1.0 + 2.0 * (k.b1 - k.c1.norm());
    let l2 = 1.0 + 2.0 * (k.b2 - k.c2.norm());
    let l = 2.0 + 2.0 * (k.b1 + k.b2 - 2.0 * k.d_bar.re - (k.c1 + k.c2 + 2.0 * k.d).norm());
    (l1, l2, l)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantifierSample {
    pub t: f64,
    pub e_n: f64,
    pub r: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda: f64,
}

/// All quantifiers for one set of coefficients. With `checked` the
/// covariance matrix must satisfy the uncertainty principle.
pub fn evaluate(
    t: f64,
    k: &GaussianCoefficients,
    base: LogBase,
    checked: bool,
) -> Result<QuantifierSample, QuantifierError> {
    let cov = covariance(k);
    let e_n = if checked {
        log_negativity(&cov, base)?
    } else {
        log_negativity_unchecked(&cov, base)
    };
    let (lambda1, lambda2, lambda) = squeezing(k);
    Ok(QuantifierSample {
        t,
        e_n,
        r: sub_shot_noise(k),
        lambda1,
        lambda2,
        lambda,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremes {
    pub e_n_max: f64,
    pub r_min: f64,
    pub lambda1_min: f64,
    pub lambda2_min: f64,
    pub lambda_min: f64,
}

/// Extremum of `values` (sampled at `times`), refined by a parabola through
/// the discrete extremum and its two neighbors when both exist.
fn refined_extremum(times: &[f64], values: &[f64], maximize: bool) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let (mut best, mut best_val) = (0, f64::NEG_INFINITY);
    for (i, v) in values.iter().enumerate() {
        if sign * v > best_val {
            best = i;
            best_val = sign * v;
        }
    }
    let raw = values[best];
    if best == 0 || best + 1 >= values.len() {
        return raw;
    }
    let (t0, t1, t2) = (times[best - 1], times[best], times[best + 1]);
    let (f0, f1, f2) = (values[best - 1], raw, values[best + 1]);
    // Newton divided differences; vertex of the interpolating parabola
    let d01 = (f1 - f0) / (t1 - t0);
    let d12 = (f2 - f1) / (t2 - t1);
    let a = (d12 - d01) / (t2 - t0);
    if !(sign * a < 0.0) {
        return raw;
    }
    let b = d01 - a * (t0 + t1);
    let tv = -b / (2.0 * a);
    if !(tv >= t0 && tv <= t2) {
        return raw;
    }
    let refined = f1 + (tv - t1) * (d01 + a * (tv - t0));
    if sign * refined >= sign * raw {
        refined
    } else {
        raw
    }
}

/// Extrema of each quantifier over samples with `window.0 ≤ t ≤ window.1`.
pub fn extremal_scan(samples: &[QuantifierSample], window: (f64, f64)) -> Result<Extremes, QuantifierError> {
    let inside: Vec<&QuantifierSample> = samples.iter().filter(|s| s.t >= window.0 && s.t <= window.1).collect();
    if inside.is_empty() {
        return Err(QuantifierError::EmptyWindow);
    }
    let times: Vec<f64> = inside.iter().map(|s| s.t).collect();
    let column = |f: fn(&QuantifierSample) -> f64| inside.iter().map(|s| f(s)).collect::<Vec<_>>();
    Ok(Extremes {
        e_n_max: refined_extremum(&times, &column(|s| s.e_n), true),
        r_min: refined_extremum(&times, &column(|s| s.r), false),
        lambda1_min: refined_extremum(&times, &column(|s| s.lambda1), false),
        lambda2_min: refined_extremum(&times, &column(|s| s.lambda2), false),
        lambda_min: refined_extremum(&times, &column(|s| s.lambda), false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::{initial_moments, InitialFluctuations};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64 as C;
    use proptest::prelude::*;

    fn lossless(eps: f64, kap: f64, t: f64) -> GaussianCoefficients {
        let xi = (eps * eps - kap * kap).sqrt();
        let s2 = (xi * t).sin().powi(2);
        let b = (kap / xi).powi(2) * s2;
        let c = C::new(-eps * kap / (xi * xi) * s2, 0.0);
        GaussianCoefficients {
            b1: b,
            b2: b,
            c1: c,
            c2: c,
            d: C::new(0.0, -(kap / xi) * (2.0 * xi * t).sin() / 2.0),
            d_bar: C::new(0.0, 0.0),
            alpha: AmplitudePair::ZERO,
        }
    }

    #[test]
    fn vacuum_extraction_and_covariance() {
        let n = initial_moments(InitialFluctuations::VacuumFluctuations);
        let k = extract_coefficients(&n, &AmplitudePair::ZERO);
        assert_eq!(k, GaussianCoefficients::vacuum(AmplitudePair::ZERO));
        let cov = covariance(&k);
        assert_eq!(cov.cs, Matrix4::identity());
        assert_eq!(log_negativity(&cov, LogBase::Two).unwrap(), 0.0);
        assert_eq!(sub_shot_noise(&k), 0.0);
        assert_eq!(squeezing(&k), (1.0, 1.0, 2.0));
    }

    #[test]
    fn lossless_covariance_matches_printed_entries() {
        let (e, kap) = (1.0, 0.5);
        let xi = 0.75f64.sqrt();
        for t in [0.2, 0.9, 1.6, 3.3] {
            let cov = covariance(&lossless(e, kap, t)).cs;
            let s2 = (xi * t).sin().powi(2);
            let d1 = -2.0 * kap / (e + kap) * s2;
            let d2 = 2.0 * kap / (e - kap) * s2;
            let d3 = -(kap / xi) * (2.0 * xi * t).sin();
            assert_abs_diff_eq!(cov[(0, 0)], 1.0 + d1, epsilon = 1e-14);
            assert_abs_diff_eq!(cov[(1, 1)], 1.0 + d2, epsilon = 1e-14);
            assert_abs_diff_eq!(cov[(2, 2)], 1.0 + d1, epsilon = 1e-14);
            assert_abs_diff_eq!(cov[(3, 3)], 1.0 + d2, epsilon = 1e-14);
            assert_abs_diff_eq!(cov[(0, 3)].abs(), d3.abs(), epsilon = 1e-14);
            assert_abs_diff_eq!(cov[(1, 2)].abs(), d3.abs(), epsilon = 1e-14);
            assert_eq!(cov[(0, 2)], 0.0);
            assert_abs_diff_eq!(cov[(1, 3)], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(cov.determinant(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lossless_examples() {
        let xi = 0.75f64.sqrt();
        let q = lossless(1.0, 0.5, std::f64::consts::FRAC_PI_2 / xi);
        assert_abs_diff_eq!(q.b1, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.c1.re, -2.0 / 3.0, epsilon = 1e-14);
        let (l1, l2, l) = squeezing(&q);
        assert_abs_diff_eq!(l1, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l2, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l, 2.0 / 3.0, epsilon = 1e-14);

        let q = lossless(1.0, 0.5, std::f64::consts::FRAC_PI_4 / xi);
        assert_abs_diff_eq!(q.d.im, -0.2886751, epsilon = 1e-7);
        let e_n = log_negativity(&covariance(&q), LogBase::Two).unwrap();
        assert_abs_diff_eq!(e_n, 0.7924813, epsilon = 1e-7);
        assert_abs_diff_eq!(sub_shot_noise(&q), 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn ep_example_log_negativity() {
        // ε = κ = 1, εt = 0.5: B = t², C = −t², D = −it
        let t: f64 = 0.5;
        let k = GaussianCoefficients {
            b1: t * t,
            b2: t * t,
            c1: C::new(-t * t, 0.0),
            c2: C::new(-t * t, 0.0),
            d: C::new(0.0, -t),
            d_bar: C::new(0.0, 0.0),
            alpha: AmplitudePair::ZERO,
        };
        assert_abs_diff_eq!(
            log_negativity(&covariance(&k), LogBase::Two).unwrap(),
            1.2715533,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(sub_shot_noise(&k), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn non_physical_state_rejected() {
        let mut k = GaussianCoefficients::vacuum(AmplitudePair::ZERO);
        k.b1 = -0.2;
        let cov = covariance(&k);
        assert!(matches!(
            log_negativity(&cov, LogBase::Two),
            Err(QuantifierError::NonPhysicalCovariance(_))
        ));
        assert!(log_negativity_unchecked(&cov, LogBase::Two).is_finite());
    }

    #[test]
    fn log_base_parsing() {
        assert_eq!("2".parse::<LogBase>().unwrap(), LogBase::Two);
        assert_eq!("10".parse::<LogBase>().unwrap(), LogBase::Ten);
        assert_eq!("e".parse::<LogBase>().unwrap(), LogBase::Natural);
        assert!("3".parse::<LogBase>().is_err());
        assert_eq!(LogBase::default(), LogBase::Two);
    }

    #[test]
    fn extremal_scan_edge_cases() {
        let flat: Vec<QuantifierSample> = (0..10)
            .map(|i| QuantifierSample {
                t: i as f64,
                e_n: 0.3,
                r: 0.7,
                lambda1: 0.9,
                lambda2: 0.8,
                lambda: 1.5,
            })
            .collect();
        let ex = extremal_scan(&flat, (0.0, 9.0)).unwrap();
        assert_eq!(ex.e_n_max, 0.3);
        assert_eq!(ex.r_min, 0.7);
        assert_eq!(ex.lambda_min, 1.5);
        assert!(matches!(
            extremal_scan(&flat, (20.0, 30.0)),
            Err(QuantifierError::EmptyWindow)
        ));

        let vac = [evaluate(
            0.0,
            &GaussianCoefficients::vacuum(AmplitudePair::ZERO),
            LogBase::Two,
            true,
        )
        .unwrap()];
        assert_eq!(extremal_scan(&vac, (0.0, 0.0)).unwrap().e_n_max, 0.0);
    }

    #[test]
    fn parabolic_refinement_recovers_vertex() {
        let samples: Vec<QuantifierSample> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                let f = 1.0 - (t - 2.345).powi(2);
                QuantifierSample {
                    t,
                    e_n: f,
                    r: -f,
                    lambda1: -f,
                    lambda2: -f,
                    lambda: -f,
                }
            })
            .collect();
        let ex = extremal_scan(&samples, (0.0, 5.0)).unwrap();
        assert_abs_diff_eq!(ex.e_n_max, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ex.lambda_min, -1.0, epsilon = 1e-12);
    }

    /// `⟨Â_{i₁}…Â_{iₘ}⟩` (m ≤ 4) for a displaced Gaussian state, by expanding
    /// `Â = mean + δÂ` and applying the ordered Isserlis theorem to `δÂ`.
    fn ordered_moment(ops: &[usize], mean: &[C; 4], n: &nalgebra::Matrix4<C>) -> C {
        let m = ops.len();
        let mut total = C::new(0.0, 0.0);
        for mask in 0u32..(1 << m) {
            let fl: Vec<usize> = (0..m).filter(|p| mask & (1 << p) != 0).map(|p| ops[p]).collect();
            let mut term: C = (0..m).filter(|p| mask & (1 << p) == 0).map(|p| mean[ops[p]]).product();
            term *= match fl.len() {
                0 => C::new(1.0, 0.0),
                2 => n[(fl[0], fl[1])],
                4 => {
                    n[(fl[0], fl[1])] * n[(fl[2], fl[3])]
                        + n[(fl[0], fl[2])] * n[(fl[1], fl[3])]
                        + n[(fl[0], fl[3])] * n[(fl[1], fl[2])]
                }
                _ => C::new(0.0, 0.0),
            };
            total += term;
        }
        total
    }

    #[test]
    fn sub_shot_noise_matches_photon_number_variance() {
        use crate::fluctuations::propagate_moments;
        let p = crate::model::SystemParams::linear(1.0, 0.8, 0.15, -0.1).with_kerr(0.02, 0.03, 0.01);
        for (start, t) in [
            (AmplitudePair::new(C::new(0.8, -0.3), C::new(0.2, 1.1)), 2.5),
            (AmplitudePair::new(C::new(0.0, 0.0), C::new(0.0, 0.0)), 1.3),
            (AmplitudePair::new(C::new(2.0, 0.0), C::new(0.0, 0.0)), 0.7),
        ] {
            let s = propagate_moments(&start, &p, true, &[0.0, t], 1e-12)
                .unwrap()
                .into_result()
                .unwrap()[1];
            let a = s.alpha;
            let mean = [a.alpha1, a.alpha1.conj(), a.alpha2, a.alpha2.conj()];
            let n = s.moments.n;
            let ev = |ops: &[usize]| ordered_moment(ops, &mean, &n);
            let diff = ev(&[1, 0]) - ev(&[3, 2]);
            let second = ev(&[1, 0, 1, 0]) - ev(&[1, 0, 3, 2]) - ev(&[3, 2, 1, 0]) + ev(&[3, 2, 3, 2]);
            let expected = ((second - diff * diff) / (ev(&[1, 0]) + ev(&[3, 2]))).re;
            let r = sub_shot_noise(&extract_coefficients(&s.moments, &a));
            assert!(
                (r - expected).abs() < 1e-9 * expected.abs().max(1.0),
                "R = {r}, oracle {expected}"
            );
        }
    }

    fn coefficients_strategy() -> impl Strategy<Value = GaussianCoefficients> {
        // lossless family over a range of times and couplings: always physical
        (0.05f64..0.95, 0.0f64..20.0).prop_map(|(kap, t)| lossless(1.0, kap, t))
    }

    proptest! {
        #[test]
        fn log_bases_are_proportional(k in coefficients_strategy()) {
            let cov = covariance(&k);
            let two = log_negativity(&cov, LogBase::Two).unwrap();
            let ten = log_negativity(&cov, LogBase::Ten).unwrap();
            let nat = log_negativity(&cov, LogBase::Natural).unwrap();
            prop_assert!((two * std::f64::consts::LN_2 - nat).abs() <= 1e-12 * (1.0 + nat));
            prop_assert!((ten * std::f64::consts::LN_10 - nat).abs() <= 1e-12 * (1.0 + nat));
        }

        #[test]
        fn covariance_is_symmetric_and_physical(k in coefficients_strategy()) {
            let cov = covariance(&k);
            prop_assert!((cov.cs - cov.cs.transpose()).abs().max() <= 1e-12);
            prop_assert!(cov.min_symplectic_eigenvalue() >= 1.0 - 1e-6);
        }

        #[test]
        fn entangled_iff_ppt_eigenvalue_below_one(k in coefficients_strategy()) {
            let cov = covariance(&k);
            let sigma = cov.min_ppt_symplectic_eigenvalue();
            let e_n = log_negativity(&cov, LogBase::Natural).unwrap();
            if sigma < 1.0 - 1e-10 {
                prop_assert!(e_n > 0.0);
            } else if sigma > 1.0 + 1e-10 {
                prop_assert_eq!(e_n, 0.0);
            }
        }

        #[test]
        fn displacement_does_not_change_covariance(
            k in coefficients_strategy(),
            re1 in -3.0f64..3.0, im1 in -3.0f64..3.0, re2 in -3.0f64..3.0, im2 in -3.0f64..3.0,
        ) {
            let mut shifted = k;
            shifted.alpha = AmplitudePair::new(C::new(re1, im1), C::new(re2, im2));
            prop_assert_eq!(covariance(&k).cs, covariance(&shifted).cs);
            prop_assert_eq!(
                log_negativity(&covariance(&k), LogBase::Two).unwrap(),
                log_negativity(&covariance(&shifted), LogBase::Two).unwrap()
            );
        }

        #[test]
        fn squeezing_is_smallest_quadrature_variance(k in coefficients_strategy(), ph in 0.0f64..6.3) {
            // rotate mode 2 so D̄ and the cross block are generic
            let mut k = k;
            let rot = C::from_polar(1.0, ph);
            k.c2 *= rot * rot;
            k.d *= rot;
            k.d_bar = C::new(0.05, -0.02) * rot;
            let cov = covariance(&k);
            let min_eig = |m: Matrix2<f64>| m.symmetric_eigenvalues().min();
            let (l1, l2, l) = squeezing(&k);
            prop_assert!((l1 - min_eig(cov.block_a())).abs() <= 1e-12 * (1.0 + l1.abs()));
            prop_assert!((l2 - min_eig(cov.block_b())).abs() <= 1e-12 * (1.0 + l2.abs()));
            let k_block = cov.block_k();
            let sum = cov.block_a() + cov.block_b() + k_block + k_block.transpose();
            prop_assert!((l - min_eig(sum)).abs() <= 1e-11 * (1.0 + l.abs()));
        }

        #[test]
        fn lossless_modes_squeeze_equally(k in coefficients_strategy()) {
            let (l1, l2, _) = squeezing(&k);
            prop_assert!((l1 - l2).abs() <= 1e-14);
            prop_assert!(l1 > 0.0);
        }
    }
}
