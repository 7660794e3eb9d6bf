//! Scenario configuration and the single-run pipeline: classical amplitudes,
//! fluctuation moments and quantifiers on an output grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{stability_frequencies, steady_states, StabilityReport, SteadyState, SteadyStateKind};
use crate::error::{ScenarioError, SteadyStateError};
use crate::fluctuations::{propagate_moments, FluctuationSample};
use crate::model::{validate, AmplitudePair, InitialStateSpec, PtClass, Regime, SystemParams};
use crate::ode::uniform_grid;
use crate::quantifiers::{evaluate, extract_coefficients, GaussianCoefficients, LogBase, QuantifierSample};
use crate::spectrum::{linear_spectrum, LinearSpectrum};
use crate::sweep::SweepSpec;
use crate::table::{Cell, Table};

fn default_epsilon() -> f64 {
    1.0
}

/// Rates as written in a scenario file. `gamma` and `beta` are shorthands for
/// the PT-symmetric choices `gamma1 = −gamma2 = gamma` and
/// `beta1 = beta2 = beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default)]
    pub beta_c: f64,
}

impl ParamsConfig {
    pub fn from_params(p: &SystemParams) -> Self {
        Self {
            epsilon: p.epsilon,
            kappa: p.kappa,
            gamma: None,
            gamma1: Some(p.gamma1),
            gamma2: Some(p.gamma2),
            beta: None,
            beta1: Some(p.beta1),
            beta2: Some(p.beta2),
            beta_c: p.beta_c,
        }
    }

    pub fn resolve(&self) -> Result<SystemParams, ScenarioError> {
        let pick =
            |short: Option<f64>, long: Option<f64>, sign: f64, short_name: &str, long_name: &str| match (short, long) {
                (Some(_), Some(_)) => Err(ScenarioError::Config(format!(
                    "params: give either {short_name} or {long_name}, not both"
                ))),
                (Some(v), None) => Ok(sign * v),
                (None, Some(v)) => Ok(v),
                (None, None) => Ok(0.0),
            };
        let params = SystemParams {
            epsilon: self.epsilon,
            kappa: self.kappa,
            gamma1: pick(self.gamma, self.gamma1, 1.0, "gamma", "gamma1")?,
            gamma2: pick(self.gamma, self.gamma2, -1.0, "gamma", "gamma2")?,
            beta1: pick(self.beta, self.beta1, 1.0, "beta", "beta1")?,
            beta2: pick(self.beta, self.beta2, 1.0, "beta", "beta2")?,
            beta_c: self.beta_c,
        };
        params.check()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SteadyChoice {
    First,
    Second,
    Trivial,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Vacuum,
    Amplitudes {
        /// `[Re, Im]`
        alpha1: [f64; 2],
        alpha2: [f64; 2],
    },
    Intensity {
        total_intensity: f64,
        #[serde(default)]
        theta: f64,
        #[serde(default)]
        phi: f64,
        #[serde(default)]
        psi: f64,
    },
    Steady {
        steady: SteadyChoice,
    },
}

fn default_t_end() -> f64 {
    10.0
}
fn default_output_dt() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}
fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_output_dt")]
    pub output_dt: f64,
    #[serde(default = "default_true")]
    pub noise: bool,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_end: default_t_end(),
            output_dt: default_output_dt(),
            noise: true,
            log_base: LogBase::Two,
            tol: default_tol(),
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), ScenarioError> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "run.t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        if !(self.output_dt > 0.0 && self.output_dt.is_finite()) {
            return Err(ScenarioError::Config(format!(
                "run.output_dt must be > 0, got {}",
                self.output_dt
            )));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(ScenarioError::Config(format!(
                "run.tol must lie in (0, 1), got {}",
                self.tol
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_end, self.output_dt)
    }
}

/// Contents of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let config: Self = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        config.run.check()?;
        if let Some(sweep) = &config.sweep {
            sweep.check()?;
        }
        Ok(config)
    }

    /// Normalized TOML form, used as the provenance echo in outputs.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// Resolves rates and the initial amplitudes.
    pub fn resolve(&self) -> Result<Scenario, ScenarioError> {
        self.run.check()?;
        let params = self.params.resolve()?;
        let alpha0 = initial_amplitudes(&self.initial, &params)?;
        Ok(Scenario {
            params,
            alpha0,
            run: self.run,
        })
    }
}

pub fn initial_amplitudes(initial: &InitialConfig, params: &SystemParams) -> Result<AmplitudePair, ScenarioError> {
    match *initial {
        InitialConfig::Vacuum => Ok(AmplitudePair::ZERO),
        InitialConfig::Amplitudes { alpha1, alpha2 } => {
            let a = AmplitudePair::new(
                Complex64::new(alpha1[0], alpha1[1]),
                Complex64::new(alpha2[0], alpha2[1]),
            );
            if a.is_finite() {
                Ok(a)
            } else {
                Err(ScenarioError::Config("initial amplitudes must be finite".into()))
            }
        }
        InitialConfig::Intensity {
            total_intensity,
            theta,
            phi,
            psi,
        } => Ok(InitialStateSpec {
            total_intensity,
            theta,
            phi,
            psi,
        }
        .to_amplitudes()?),
        InitialConfig::Steady { steady } => {
            if steady == SteadyChoice::Trivial {
                return Ok(AmplitudePair::ZERO);
            }
            let kind = match steady {
                SteadyChoice::First => SteadyStateKind::First,
                _ => SteadyStateKind::Second,
            };
            let set = steady_states(params)?;
            set.get(kind).map(SteadyState::amplitudes).ok_or_else(|| {
                SteadyStateError::NoSteadyState(format!("no {kind:?}-kind steady state for these parameters")).into()
            })
        }
    }
}

/// A fully resolved single run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: SystemParams,
    pub alpha0: AmplitudePair,
    pub run: RunConfig,
}

/// One output row of a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationRow {
    pub sample: FluctuationSample,
    pub coefficients: GaussianCoefficients,
    pub quantifiers: QuantifierSample,
}

/// Rows up to the first failure, and the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub rows: Vec<SimulationRow>,
    pub failure: Option<ScenarioError>,
}

impl Scenario {
    /// Runs the pipeline on `grid`. Without Langevin noise the moments may be
    /// unphysical, so the negativity is then computed without the
    /// uncertainty-principle check.
    pub fn run_on(&self, grid: &[f64]) -> SimulationRun {
        let traj = match propagate_moments(&self.alpha0, &self.params, self.run.noise, grid, self.run.tol) {
            Ok(t) => t,
            Err(e) => {
                return SimulationRun {
                    rows: Vec::new(),
                    failure: Some(e.into()),
                }
            }
        };
        let mut rows = Vec::with_capacity(traj.samples.len());
        let mut failure = traj.failure.map(ScenarioError::from);
        for sample in traj.samples {
            let coefficients = extract_coefficients(&sample.moments, &sample.alpha);
            match evaluate(sample.t, &coefficients, self.run.log_base, self.run.noise) {
                Ok(quantifiers) => rows.push(SimulationRow {
                    sample,
                    coefficients,
                    quantifiers,
                }),
                Err(e) => {
                    failure = Some(e.into());
                    break;
                }
            }
        }
        SimulationRun { rows, failure }
    }

    pub fn run(&self) -> SimulationRun {
        self.run_on(&self.run.grid())
    }
}

pub const TIME_SERIES_COLUMNS: [&str; 22] = [
    "t",
    "re_alpha1",
    "im_alpha1",
    "re_alpha2",
    "im_alpha2",
    "B1",
    "B2",
    "re_C1",
    "im_C1",
    "re_C2",
    "im_C2",
    "re_D",
    "im_D",
    "re_Dbar",
    "im_Dbar",
    "E_N",
    "R",
    "lambda1",
    "lambda2",
    "lambda",
    "comm1",
    "comm2",
];

fn time_series_cells(row: &SimulationRow) -> Vec<Cell> {
    let a = &row.sample.alpha;
    let k = &row.coefficients;
    let q = &row.quantifiers;
    let m = &row.sample.moments;
    [
        row.sample.t,
        a.alpha1.re,
        a.alpha1.im,
        a.alpha2.re,
        a.alpha2.im,
        k.b1,
        k.b2,
        k.c1.re,
        k.c1.im,
        k.c2.re,
        k.c2.im,
        k.d.re,
        k.d.im,
        k.d_bar.re,
        k.d_bar.im,
        q.e_n,
        q.r,
        q.lambda1,
        q.lambda2,
        q.lambda,
        m.commutator1().re,
        m.commutator2().re,
    ]
    .into_iter()
    .map(Cell::Num)
    .collect()
}

impl SimulationRun {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(TIME_SERIES_COLUMNS);
        for row in &self.rows {
            table.push(time_series_cells(row));
        }
        table.failure = self.failure.as_ref().map(ToString::to_string);
        table
    }

    pub fn quantifiers(&self) -> Vec<QuantifierSample> {
        self.rows.iter().map(|r| r.quantifiers).collect()
    }
}

/// Time series for a scenario file. Configuration problems are returned as
/// errors; numerical failures yield the partial table with `failure` set.
pub fn simulate(config: &ScenarioConfig) -> Result<Table, ScenarioError> {
    Ok(config.resolve()?.run().to_table())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyEntry {
    pub state: SteadyState,
    pub alpha: AmplitudePair,
    pub stability: StabilityReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyReport {
    pub params: SystemParams,
    /// `α = 0` is always a fixed point; set when a reported state collapses
    /// onto it.
    pub coincides_with_trivial: bool,
    pub states: Vec<SteadyEntry>,
}

pub fn report_steady(params: &SystemParams) -> Result<SteadyReport, ScenarioError> {
    let set = steady_states(params)?;
    let states = set
        .states
        .iter()
        .map(|s| {
            Ok(SteadyEntry {
                state: *s,
                alpha: s.amplitudes(),
                stability: stability_frequencies(s, params)?,
            })
        })
        .collect::<Result<Vec<_>, SteadyStateError>>()?;
    Ok(SteadyReport {
        params: *params,
        coincides_with_trivial: set.coincides_with_trivial,
        states,
    })
}

impl SteadyReport {
    pub fn to_table(&self) -> Table {
        let mut columns = vec![
            "kind",
            "rho1",
            "rho2",
            "phi",
            "psi",
            "c_epsilon",
            "c_kappa",
            "classification",
            "max_imag",
        ]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
        for j in 1..=4 {
            columns.push(format!("re_nu{j}"));
            columns.push(format!("im_nu{j}"));
        }
        columns.push("coincides_with_trivial".into());
        let mut table = Table::new(columns);
        for e in &self.states {
            let s = &e.state;
            let mut row: Vec<Cell> = vec![
                format!("{:?}", s.kind).to_lowercase().into(),
                s.rho1_st.into(),
                s.rho2_st.into(),
                s.phi_st.into(),
                s.psi_st.into(),
                s.c_epsilon.into(),
                s.c_kappa.into(),
                format!("{:?}", e.stability.classification).to_lowercase().into(),
                e.stability.max_imag.into(),
            ];
            for nu in e.stability.frequencies {
                row.push(nu.re.into());
                row.push(nu.im.into());
            }
            row.push(Cell::Text(self.coincides_with_trivial.to_string()));
            table.push(row);
        }
        table
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub params: SystemParams,
    pub class: PtClass,
    pub spectrum: LinearSpectrum,
}

pub fn report_spectrum(params: &SystemParams) -> Result<SpectrumReport, ScenarioError> {
    Ok(SpectrumReport {
        params: *params,
        class: validate(params)?,
        spectrum: linear_spectrum(params)?,
    })
}

impl SpectrumReport {
    pub fn to_table(&self) -> Table {
        let s = &self.spectrum;
        let mut table = Table::new([
            "re_nu1", "im_nu1", "re_nu2", "im_nu2", "re_xi", "im_xi", "re_mu", "im_mu", "regime",
        ]);
        let mu = s.mu.unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let regime: &str = match self.class.regime {
            Some(Regime::Oscillatory) => "oscillatory",
            Some(Regime::ExceptionalPoint) => "exceptional_point",
            Some(Regime::Broken) => "broken",
            None => "non_pt",
        };
        table.push(vec![
            s.nu1.re.into(),
            s.nu1.im.into(),
            s.nu2.re.into(),
            s.nu2.im.into(),
            s.xi.re.into(),
            s.xi.im.into(),
            mu.re.into(),
            mu.im.into(),
            regime.into(),
        ]);
        table
    }
}
