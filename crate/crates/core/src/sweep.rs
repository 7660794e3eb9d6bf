//! Parameter sweeps over a scenario template, evaluated in parallel with
//! rows emitted in grid order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{stability_frequencies, steady_states, SteadyStateKind};
use crate::error::ScenarioError;
use crate::ode::uniform_grid;
use crate::quantifiers::{extremal_scan, Extremes};
use crate::scenario::{initial_amplitudes, InitialConfig, Scenario, ScenarioConfig, SteadyChoice, TIME_SERIES_COLUMNS};
use crate::spectrum::ep_kappa;
use crate::table::{Cell, Table};

/// Default sampling step of the extremal scan.
pub const DEFAULT_SCAN_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Epsilon,
    Kappa,
    /// Sets `gamma1 = gamma`, `gamma2 = −gamma`.
    Gamma,
    Gamma1,
    Gamma2,
    /// Sets `gamma2 = −value`.
    NegGamma2,
    /// Sets `beta1 = beta2 = beta`.
    Beta,
    Beta1,
    Beta2,
    BetaC,
    Intensity,
    Theta,
    Phi,
    Psi,
}

impl AxisName {
    pub fn label(self) -> &'static str {
        match self {
            AxisName::Epsilon => "epsilon",
            AxisName::Kappa => "kappa",
            AxisName::Gamma => "gamma",
            AxisName::Gamma1 => "gamma1",
            AxisName::Gamma2 => "gamma2",
            AxisName::NegGamma2 => "neg_gamma2",
            AxisName::Beta => "beta",
            AxisName::Beta1 => "beta1",
            AxisName::Beta2 => "beta2",
            AxisName::BetaC => "beta_c",
            AxisName::Intensity => "intensity",
            AxisName::Theta => "theta",
            AxisName::Phi => "phi",
            AxisName::Psi => "psi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    return self.max;
                }
                let f = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + f * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Full time series for every grid point, prefixed by the axis values.
    TimeSeries,
    /// Quantifier extrema over the scan window.
    Extremes,
    /// Steady-state stability classification.
    StabilityMap,
    /// Extrema along the exceptional-point line `κ = sqrt(ε² − γ²)`.
    EpLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub reduction: Reduction,
    pub axis: Vec<AxisSpec>,
    /// `[t_start, t_end]` of the extremal scan; defaults to `[0, run.t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// Sampling step of the extremal scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_dt: Option<f64>,
    /// Steady-state family examined by the stability map (default first).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyChoice>,
}

impl SweepSpec {
    pub fn check(&self) -> Result<(), ScenarioError> {
        let err = |m: String| Err(ScenarioError::Config(m));
        if self.axis.is_empty() {
            return err("sweep needs at least one [[sweep.axis]]".into());
        }
        for (i, a) in self.axis.iter().enumerate() {
            let label = a.name.label();
            if a.count < 2 {
                return err(format!("sweep axis {label}: count must be >= 2, got {}", a.count));
            }
            if !(a.min.is_finite() && a.max.is_finite()) {
                return err(format!("sweep axis {label}: bounds must be finite"));
            }
            if a.spacing == Spacing::Log && !(a.min > 0.0 && a.max > 0.0) {
                return err(format!("sweep axis {label}: log spacing needs positive bounds"));
            }
            if self.axis[..i].iter().any(|b| b.name == a.name) {
                return err(format!("sweep axis {label} appears twice"));
            }
        }
        if self.reduction == Reduction::EpLine {
            if !self.axis.iter().any(|a| a.name == AxisName::Gamma) {
                return err("ep-line sweeps need a gamma axis".into());
            }
            if let Some(a) = self.axis.iter().find(|a| {
                matches!(
                    a.name,
                    AxisName::Kappa | AxisName::Gamma1 | AxisName::Gamma2 | AxisName::NegGamma2
                )
            }) {
                return err(format!(
                    "ep-line sweeps set kappa and gamma1/gamma2 themselves; remove axis {}",
                    a.name.label()
                ));
            }
        }
        if let Some(dt) = self.scan_dt {
            if !(dt > 0.0) {
                return err(format!("sweep.scan_dt must be > 0, got {dt}"));
            }
        }
        if let Some([a, b]) = self.window {
            if !(a >= 0.0 && b >= a) {
                return err(format!("sweep.window must satisfy 0 <= start <= end, got [{a}, {b}]"));
            }
        }
        if self.steady == Some(SteadyChoice::Trivial) {
            return err("sweep.steady must be first or second".into());
        }
        Ok(())
    }

    /// Grid points in row-major order (last axis varies fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axis {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Copy of `config` with the axis values of one grid point applied.
fn apply_point(config: &ScenarioConfig, axes: &[AxisSpec], point: &[f64]) -> Result<ScenarioConfig, ScenarioError> {
    let mut c = config.clone();
    let p = &mut c.params;
    let mut initial_overrides = Vec::new();
    for (axis, &v) in axes.iter().zip(point) {
        match axis.name {
            AxisName::Epsilon => p.epsilon = v,
            AxisName::Kappa => p.kappa = v,
            AxisName::Gamma => {
                p.gamma = Some(v);
                p.gamma1 = None;
                p.gamma2 = None;
            }
            AxisName::Gamma1 | AxisName::Gamma2 | AxisName::NegGamma2 => {
                if let Some(g) = p.gamma.take() {
                    p.gamma1 = Some(g);
                    p.gamma2 = Some(-g);
                }
                match axis.name {
                    AxisName::Gamma1 => p.gamma1 = Some(v),
                    AxisName::Gamma2 => p.gamma2 = Some(v),
                    _ => p.gamma2 = Some(-v),
                }
            }
            AxisName::Beta => {
                p.beta = Some(v);
                p.beta1 = None;
                p.beta2 = None;
            }
            AxisName::Beta1 | AxisName::Beta2 => {
                if let Some(b) = p.beta.take() {
                    p.beta1 = Some(b);
                    p.beta2 = Some(b);
                }
                if axis.name == AxisName::Beta1 {
                    p.beta1 = Some(v);
                } else {
                    p.beta2 = Some(v);
                }
            }
            AxisName::BetaC => p.beta_c = v,
            name => initial_overrides.push((name, v)),
        }
    }
    if !initial_overrides.is_empty() {
        let spec = match c.initial {
            InitialConfig::Intensity {
                total_intensity,
                theta,
                phi,
                psi,
            } => (total_intensity, theta, phi, psi),
            InitialConfig::Vacuum | InitialConfig::Amplitudes { .. } => {
                let s = initial_amplitudes(&c.initial, &c.params.resolve()?)?.to_state_spec();
                (s.total_intensity, s.theta, s.phi, s.psi)
            }
            InitialConfig::Steady { .. } => {
                return Err(ScenarioError::Config(
                    "intensity/theta/phi/psi axes need an amplitudes or intensity initial state".into(),
                ))
            }
        };
        let (mut total_intensity, mut theta, mut phi, mut psi) = spec;
        for (name, v) in initial_overrides {
            match name {
                AxisName::Intensity => total_intensity = v,
                AxisName::Theta => theta = v,
                AxisName::Phi => phi = v,
                _ => psi = v,
            }
        }
        c.initial = InitialConfig::Intensity {
            total_intensity,
            theta,
            phi,
            psi,
        };
    }
    Ok(c)
}

fn nan_cells(n: usize) -> Vec<Cell> {
    vec![Cell::Num(f64::NAN); n]
}

fn extremes_cells(e: &Extremes) -> Vec<Cell> {
    [e.e_n_max, e.r_min, e.lambda1_min, e.lambda2_min, e.lambda_min]
        .into_iter()
        .map(Cell::Num)
        .collect()
}

const EXTREME_COLUMNS: [&str; 5] = ["E_N_max", "R_min", "lambda1_min", "lambda2_min", "lambda_min"];

/// Extrema over the scan window. A run that stops early is reduced over
/// the samples it produced, and the failure is reported alongside.
fn scan(scenario: &Scenario, spec: &SweepSpec) -> (Option<Extremes>, Option<String>) {
    let [start, end] = spec.window.unwrap_or([0.0, scenario.run.t_end]);
    let grid = uniform_grid(end, spec.scan_dt.unwrap_or(DEFAULT_SCAN_DT));
    let run = scenario.run_on(&grid);
    let failure = run.failure.as_ref().map(|e| e.to_string());
    match extremal_scan(&run.quantifiers(), (start, end)) {
        Ok(e) => (Some(e), failure),
        Err(e) => (None, Some(failure.unwrap_or_else(|| e.to_string()))),
    }
}

/// Result rows for one grid point (several for time series).
fn evaluate_point(config: &ScenarioConfig, spec: &SweepSpec, point: &[f64]) -> Vec<Vec<Cell>> {
    let prefix: Vec<Cell> = point.iter().map(|v| Cell::Num(*v)).collect();
    let with = |mut values: Vec<Cell>, error: Option<String>| {
        let mut row = prefix.clone();
        row.append(&mut values);
        row.push(Cell::Text(error.unwrap_or_default()));
        row
    };
    let width = value_columns(spec.reduction).len();
    let fail = |e: ScenarioError| vec![with(nan_cells(width), Some(e.to_string()))];

    let mut config = match apply_point(config, &spec.axis, point) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if spec.reduction == Reduction::EpLine {
        let gamma = config.params.gamma.unwrap_or(0.0);
        match ep_kappa(config.params.epsilon, gamma) {
            Ok(k) => config.params.kappa = k,
            Err(e) => return fail(e.into()),
        }
    }

    match spec.reduction {
        Reduction::TimeSeries => {
            let scenario = match config.resolve() {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let table = scenario.run().to_table();
            let mut rows: Vec<Vec<Cell>> = table.rows.into_iter().map(|r| with(r, None)).collect();
            if let Some(f) = table.failure {
                rows.push(with(nan_cells(width), Some(f)));
            }
            rows
        }
        Reduction::Extremes => match config.resolve() {
            Ok(s) => {
                let (ex, error) = scan(&s, spec);
                vec![with(
                    ex.as_ref().map(extremes_cells).unwrap_or_else(|| nan_cells(width)),
                    error,
                )]
            }
            Err(e) => fail(e),
        },
        Reduction::EpLine => match config.resolve() {
            Ok(s) => {
                let (ex, error) = scan(&s, spec);
                let mut values = vec![Cell::Num(s.params.kappa)];
                values.extend(ex.as_ref().map(extremes_cells).unwrap_or_else(|| nan_cells(width - 1)));
                vec![with(values, error)]
            }
            Err(e) => fail(e),
        },
        Reduction::StabilityMap => {
            let result = (|| {
                let params = config.params.resolve()?;
                let kind = match spec.steady.unwrap_or(SteadyChoice::First) {
                    SteadyChoice::Second => SteadyStateKind::Second,
                    _ => SteadyStateKind::First,
                };
                let set = steady_states(&params)?;
                let state = *set.get(kind).ok_or_else(|| {
                    ScenarioError::SteadyState(crate::error::SteadyStateError::NoSteadyState(format!(
                        "no {kind:?}-kind steady state"
                    )))
                })?;
                let report = stability_frequencies(&state, &params)?;
                Ok::<_, ScenarioError>((state, report))
            })();
            match result {
                Ok((state, report)) => {
                    let max_re = report.frequencies.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
                    let max_im = report.max_imag;
                    let omega = (1.0 + max_re).log10();
                    let gamma = max_im.signum() * (1.0 + max_im.abs()).log10();
                    vec![with(
                        vec![
                            state.rho1_st.into(),
                            max_re.into(),
                            max_im.into(),
                            omega.into(),
                            gamma.into(),
                            format!("{:?}", report.classification).to_lowercase().into(),
                        ],
                        None,
                    )]
                }
                Err(e) => {
                    let mut values = nan_cells(width - 1);
                    values.push(Cell::Text(String::new()));
                    vec![with(values, Some(e.to_string()))]
                }
            }
        }
    }
}

fn value_columns(reduction: Reduction) -> Vec<&'static str> {
    match reduction {
        Reduction::TimeSeries => TIME_SERIES_COLUMNS.to_vec(),
        Reduction::Extremes => EXTREME_COLUMNS.to_vec(),
        Reduction::EpLine => {
            let mut c = vec!["kappa"];
            c.extend(EXTREME_COLUMNS);
            c
        }
        Reduction::StabilityMap => vec!["rho1", "max_abs_re_nu", "max_im_nu", "Omega", "Gamma", "classification"],
    }
}

/// Evaluates the sweep described by `config.sweep`. At most `threads`
/// workers are used (all available cores when `None`). Per-point failures
/// land in the `error` column; the sweep itself only fails on configuration
/// problems.
pub fn sweep(config: &ScenarioConfig, threads: Option<usize>) -> Result<Table, ScenarioError> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| ScenarioError::Config("config has no [sweep] section".into()))?;
    spec.check()?;
    config.run.check()?;

    let mut columns: Vec<String> = spec.axis.iter().map(|a| format!("axis_{}", a.name.label())).collect();
    columns.extend(value_columns(spec.reduction).into_iter().map(String::from));
    columns.push("error".into());
    let mut table = Table::new(columns);

    let points = spec.points();
    let work = || -> Vec<Vec<Vec<Cell>>> { points.par_iter().map(|p| evaluate_point(config, spec, p)).collect() };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| ScenarioError::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    };
    for rows in results {
        for row in rows {
            table.push(row);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml(text).unwrap()
    }

    #[test]
    fn axis_values() {
        let a = AxisSpec {
            name: AxisName::Gamma,
            min: 0.1,
            max: 10.0,
            count: 3,
            spacing: Spacing::Log,
        };
        let v = a.values();
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert_eq!(v[2], 10.0);
        let lin = AxisSpec {
            spacing: Spacing::Linear,
            count: 5,
            min: 0.0,
            max: 1.0,
            ..a
        };
        assert_eq!(lin.values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn degenerate_grid_gives_four_rows() {
        let c = config(
            r#"
[params]
kappa = 0.5
beta = 0.05
[sweep]
reduction = "stability-map"
[[sweep.axis]]
name = "gamma1"
min = 0.1
max = 0.1
count = 2
[[sweep.axis]]
name = "neg_gamma2"
min = 0.2
max = 0.2
count = 2
"#,
        );
        let t = sweep(&c, Some(2)).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.columns[0], "axis_gamma1");
        assert_eq!(t.columns.last().unwrap(), "error");
        assert!(t.column("max_im_nu").unwrap().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn stability_map_rows_in_grid_order_and_thread_independent() {
        let text = r#"
[params]
kappa = 0.5
beta = 0.05
[sweep]
reduction = "stability-map"
[[sweep.axis]]
name = "gamma1"
min = 0.05
max = 0.3
count = 5
[[sweep.axis]]
name = "neg_gamma2"
min = 0.05
max = 0.3
count = 5
"#;
        let c = config(text);
        let one = sweep(&c, Some(1)).unwrap();
        let many = sweep(&c, Some(4)).unwrap();
        assert_eq!(one.to_csv(""), many.to_csv(""));
        let g1 = one.column("axis_gamma1").unwrap();
        let g2 = one.column("axis_neg_gamma2").unwrap();
        let gamma = one.column("Gamma").unwrap();
        assert_eq!(g1[1], 0.05);
        assert_eq!(g2[1], 0.1125);
        for i in 0..25 {
            assert_eq!(gamma[i] <= 1e-8, g1[i] >= g2[i], "row {i}");
        }
    }

    #[test]
    fn per_point_failures_are_recorded() {
        let c = config(
            r#"
[params]
kappa = 0.5
beta = 0.05
[sweep]
reduction = "stability-map"
[[sweep.axis]]
name = "kappa"
min = 0.0
max = 0.5
count = 2
"#,
        );
        let t = sweep(&c, None).unwrap();
        let err = t.column_index("error").unwrap();
        assert!(matches!(&t.rows[0][err], Cell::Text(s) if !s.is_empty()));
        assert!(matches!(&t.rows[1][err], Cell::Text(s) if s.is_empty()));
    }

    #[test]
    fn ep_line_sets_kappa() {
        let c = config(
            r#"
[params]
kappa = 0.0
beta = 0.05
[initial]
kind = "amplitudes"
alpha1 = [1e-8, 0.0]
alpha2 = [1e-8, 0.0]
[run]
t_end = 5.0
[sweep]
reduction = "ep-line"
scan_dt = 0.01
[[sweep.axis]]
name = "gamma"
min = 0.1
max = 0.2
count = 2
"#,
        );
        let t = sweep(&c, None).unwrap();
        let kappa = t.column("kappa").unwrap();
        assert!((kappa[0] - (1.0f64 - 0.01).sqrt()).abs() < 1e-15);
        assert!(t.column("E_N_max").unwrap().iter().all(|x| *x > 0.0));
    }

    #[test]
    fn initial_state_axes() {
        let c = config(
            r#"
[params]
kappa = 0.5
[initial]
kind = "intensity"
total_intensity = 1.0
[run]
t_end = 1.0
[sweep]
reduction = "extremes"
scan_dt = 0.05
[[sweep.axis]]
name = "theta"
min = 0.0
max = 1.5707963267948966
count = 3
"#,
        );
        let t = sweep(&c, Some(2)).unwrap();
        assert_eq!(t.rows.len(), 3);
        // R depends on the initial amplitudes, E_N does not (linear system)
        let r = t.column("R_min").unwrap();
        let e = t.column("E_N_max").unwrap();
        assert!((e[0] - e[2]).abs() < 1e-9);
        assert!(r.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn spec_errors() {
        for bad in [
            "[params]\nkappa = 0.5\n[sweep]\nreduction = \"extremes\"\naxis = []\n",
            "[params]\nkappa = 0.5\n[sweep]\nreduction = \"extremes\"\n[[sweep.axis]]\nname = \"gamma\"\nmin = 0\nmax = 1\ncount = 1\n",
            "[params]\nkappa = 0.5\n[sweep]\nreduction = \"ep-line\"\n[[sweep.axis]]\nname = \"beta\"\nmin = 0\nmax = 1\ncount = 2\n",
            "[params]\nkappa = 0.5\n[sweep]\nreduction = \"extremes\"\n[[sweep.axis]]\nname = \"gamma\"\nmin = 0\nmax = 1\ncount = 2\nspacing = \"log\"\n",
            "[params]\nkappa = 0.5\n[sweep]\nreduction = \"extremes\"\n[[sweep.axis]]\nname = \"zeta\"\nmin = 0\nmax = 1\ncount = 2\n",
        ] {
            assert!(ScenarioConfig::from_toml(bad).unwrap_err().is_config(), "{bad}");
        }
        let no_sweep = config("[params]\nkappa = 0.5\n");
        assert!(sweep(&no_sweep, None).unwrap_err().is_config());
    }
}
