//! Explicit adaptive Runge–Kutta integration (Dormand–Prince 5(4)) with a
//! PI step-size controller.
//!
//! Steps are shortened to land exactly on every requested output time, so the
//! caller sees the state at its grid points without interpolation.

use crate::error::StepFailure;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth minus embedded fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrator settings. `tol` is used as both absolute and relative
/// tolerance of the per-step error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub max_steps: usize,
    /// Upper bound on any single step.
    pub h_max: f64,
}

impl Settings {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 50_000_000,
            h_max: f64::INFINITY,
        }
    }
}

struct Workspace {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; n]),
            ytmp: vec![0.0; n],
            ynew: vec![0.0; n],
        }
    }
}

fn rms_norm(v: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let n = v.len().max(1) as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = tol + tol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

/// Integrates `dy/dt = rhs(t, y)` from `grid[0]` through every point of the
/// increasing `grid`, calling `observe(t, y)` at each grid point (including
/// the first).
///
/// On failure the observations made so far stand and the error reports the
/// last time reached.
pub fn integrate<F, O>(
    mut rhs: F,
    y0: &[f64],
    grid: &[f64],
    settings: Settings,
    mut observe: O,
) -> Result<(), StepFailure>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
{
    let Some(&t0) = grid.first() else {
        return Ok(());
    };
    if !(settings.tol > 0.0) {
        return Err(StepFailure {
            t_reached: t0,
            reason: format!("tolerance must be positive, got {}", settings.tol),
        });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StepFailure {
            t_reached: t0,
            reason: "output grid must be strictly increasing".into(),
        });
    }
    let n = y0.len();
    let tol = settings.tol;
    let mut y = y0.to_vec();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(StepFailure {
            t_reached: t0,
            reason: "non-finite initial state".into(),
        });
    }
    observe(t0, &y);
    if grid.len() == 1 {
        return Ok(());
    }

    let mut w = Workspace::new(n);
    let mut t = t0;
    rhs(t, &y, &mut w.k[0]);
    let t_final = *grid.last().unwrap();
    let mut h = initial_step(&mut rhs, t, &y, &w.k[0].clone(), tol, &mut w)
        .min(settings.h_max)
        .min(t_final - t0);
    let mut fac_old = 1e-4_f64;
    let mut steps = 0usize;
    let mut reject_streak = false;

    const BETA: f64 = 0.04;
    const EXPO1: f64 = 0.2 - BETA * 0.75;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    const SAFE: f64 = 0.9;

    for &t_next in &grid[1..] {
        while t < t_next {
            steps += 1;
            if steps > settings.max_steps {
                return Err(StepFailure {
                    t_reached: t,
                    reason: format!("exceeded {} steps", settings.max_steps),
                });
            }
            let remaining = t_next - t;
            let landing = 1.01 * h >= remaining;
            let h_step = if landing { remaining } else { h };
            if h_step < 1e-14 * t.abs().max(1.0) && !landing {
                return Err(StepFailure {
                    t_reached: t,
                    reason: format!("step size underflow (h = {h_step:.3e})"),
                });
            }

            let err = dopri_step(&mut rhs, t, &y, h_step, &mut w, tol);

            if !err.is_finite() || w.ynew.iter().any(|v| !v.is_finite()) {
                h = 0.1 * h_step;
                reject_streak = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(StepFailure {
                        t_reached: t,
                        reason: "state became non-finite".into(),
                    });
                }
                continue;
            }

            let fac11 = err.powf(EXPO1);
            if err <= 1.0 {
                let fac = (fac11 / fac_old.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h_step / fac;
                if reject_streak {
                    h_new = h_new.min(h_step);
                }
                fac_old = err.max(1e-4);
                t = if landing { t_next } else { t + h_step };
                std::mem::swap(&mut y, &mut w.ynew);
                // FSAL: stage 7 is the derivative at the new point
                let (first, rest) = w.k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                // a step shortened to land on the grid does not invalidate the proposal
                h = if landing { h.max(h_new) } else { h_new };
                h = h.min(settings.h_max);
                reject_streak = false;
            } else {
                h = h_step / (fac11 / SAFE).min(1.0 / FAC_MIN);
                reject_streak = true;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(StepFailure {
                        t_reached: t,
                        reason: format!("step size underflow (h = {h:.3e})"),
                    });
                }
            }
        }
        observe(t, &y);
    }
    Ok(())
}

/// One Dormand–Prince step from `(t, y)` with `k[0] = f(t, y)` already
/// filled. Leaves the candidate in `w.ynew`, the new derivative in `w.k[6]`,
/// and returns the scaled error norm.
fn dopri_step<F>(rhs: &mut F, t: f64, y: &[f64], h: f64, w: &mut Workspace, tol: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let Workspace { k, ytmp, ynew } = w;
    for i in 0..n {
        ytmp[i] = y[i] + h * A21 * k[0][i];
    }
    rhs(t + C2 * h, ytmp, &mut k[1]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A31 * k[0][i] + A32 * k[1][i]);
    }
    rhs(t + C3 * h, ytmp, &mut k[2]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
    }
    rhs(t + C4 * h, ytmp, &mut k[3]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
    }
    rhs(t + C5 * h, ytmp, &mut k[4]);
    for i in 0..n {
        ytmp[i] = y[i] + h * (A61 * k[0][i] + A62 * k[1][i] + A63 * k[2][i] + A64 * k[3][i] + A65 * k[4][i]);
    }
    rhs(t + h, ytmp, &mut k[5]);
    for i in 0..n {
        ynew[i] = y[i] + h * (A71 * k[0][i] + A73 * k[2][i] + A74 * k[3][i] + A75 * k[4][i] + A76 * k[5][i]);
    }
    rhs(t + h, ynew, &mut k[6]);
    for i in 0..n {
        ytmp[i] = h * (E1 * k[0][i] + E3 * k[2][i] + E4 * k[3][i] + E5 * k[4][i] + E6 * k[5][i] + E7 * k[6][i]);
    }
    rms_norm(ytmp, y, ynew, tol)
}

fn initial_step<F>(rhs: &mut F, t: f64, y: &[f64], f0: &[f64], tol: f64, w: &mut Workspace) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let scale = |i: usize| tol + tol * y[i].abs();
    let nf = n.max(1) as f64;
    let d0 = ((0..n).map(|i| (y[i] / scale(i)).powi(2)).sum::<f64>() / nf).sqrt();
    let d1 = ((0..n).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>() / nf).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for i in 0..n {
        w.ytmp[i] = y[i] + h0 * f0[i];
    }
    let mut f1 = vec![0.0; n];
    rhs(t + h0, &w.ytmp, &mut f1);
    let d2 = ((0..n).map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2)).sum::<f64>() / nf).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Samples produced on an output grid, together with the reason the
/// integration stopped early, if it did.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub samples: Vec<T>,
    pub failure: Option<StepFailure>,
}

impl<T> Trajectory<T> {
    /// All samples, or the failure if the run did not reach the end.
    pub fn into_result(self) -> Result<Vec<T>, StepFailure> {
        match self.failure {
            None => Ok(self.samples),
            Some(f) => Err(f),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// `0, dt, 2dt, …` up to `t_end` (inclusive when `t_end` is a multiple of
/// `dt` up to round-off; otherwise `t_end` is appended).
pub fn uniform_grid(t_end: f64, dt: f64) -> Vec<f64> {
    if t_end <= 0.0 {
        return vec![0.0];
    }
    let n = (t_end / dt + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let last = *grid.last().unwrap();
    if t_end - last > 1e-9 * dt {
        grid.push(t_end);
    } else {
        *grid.last_mut().unwrap() = last.max(t_end.min(last + 1e-9 * dt));
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exponential_decay() {
        let grid = uniform_grid(5.0, 0.5);
        let mut out = Vec::new();
        integrate(
            |_, y, dy| dy[0] = -y[0],
            &[1.0],
            &grid,
            Settings::with_tol(1e-12),
            |t, y| out.push((t, y[0])),
        )
        .unwrap();
        assert_eq!(out.len(), grid.len());
        for (t, v) in out {
            assert_abs_diff_eq!(v, (-t).exp(), epsilon = 1e-11);
        }
    }

    #[test]
    fn harmonic_oscillator_long_run() {
        let grid = uniform_grid(100.0, 1.0);
        let mut last = (0.0, [0.0, 0.0]);
        integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            &[1.0, 0.0],
            &grid,
            Settings::with_tol(1e-12),
            |t, y| last = (t, [y[0], y[1]]),
        )
        .unwrap();
        assert_abs_diff_eq!(last.0, 100.0);
        assert_abs_diff_eq!(last.1[0], 100f64.cos(), epsilon = 1e-9);
        assert_abs_diff_eq!(last.1[1], -100f64.sin(), epsilon = 1e-9);
    }

    #[test]
    fn blow_up_reports_reached_time() {
        // y' = y², y(0) = 1 explodes at t = 1
        let grid = uniform_grid(2.0, 0.25);
        let mut seen = Vec::new();
        let err = integrate(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[1.0],
            &grid,
            Settings::with_tol(1e-10),
            |t, _| seen.push(t),
        )
        .unwrap_err();
        assert!(err.t_reached < 1.0 && err.t_reached > 0.99, "{err}");
        assert_eq!(seen.len(), 4);
    }

    #[test]
    fn zero_state_stays_zero() {
        let grid = uniform_grid(3.0, 0.1);
        integrate(
            |_, y, dy| {
                dy[0] = -y[1];
                dy[1] = y[0];
            },
            &[0.0, 0.0],
            &grid,
            Settings::default(),
            |_, y| assert_eq!(y, &[0.0, 0.0]),
        )
        .unwrap();
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0.0, 0.1), vec![0.0]);
        let g = uniform_grid(1.0, 0.1);
        assert_eq!(g.len(), 11);
        assert_abs_diff_eq!(*g.last().unwrap(), 1.0, epsilon = 1e-12);
        let g = uniform_grid(1.05, 0.1);
        assert_eq!(*g.last().unwrap(), 1.05);
    }

    #[test]
    fn rejects_bad_settings() {
        let r = integrate(|_, _, _| {}, &[1.0], &[0.0, 1.0], Settings::with_tol(0.0), |_, _| {});
        assert!(r.is_err());
        let r = integrate(|_, _, _| {}, &[1.0], &[0.0, 0.0], Settings::default(), |_, _| {});
        assert!(r.is_err());
    }
}
