use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} is not finite ({value})")]
    NonFinite { name: &'static str, value: f64 },
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("gamma1 must be >= 0 (mode 1 is damped), got {0}")]
    NegativeDamping(f64),
    #[error("gamma2 must be <= 0 (mode 2 is amplified), got {0}")]
    PositiveGain(f64),
    #[error("total intensity must be >= 0, got {0}")]
    NegativeIntensity(f64),
    #[error("invalid Kerr rates: {0}")]
    InvalidBeta(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("parameters are not PT-symmetric")]
    NonPtParameters,
    #[error("epsilon^2 - kappa^2 = {0} is too close to zero for the eigenvector formulas")]
    DegenerateXi(f64),
    #[error("gamma = {gamma} exceeds epsilon = {epsilon}; no exceptional point exists")]
    GammaExceedsEpsilon { epsilon: f64, gamma: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// The adaptive integrator could not continue.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("integration failed at t = {t_reached}: {reason}")]
pub struct StepFailure {
    pub t_reached: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteadyStateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no steady state: {0}")]
    NoSteadyState(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("eigen-decomposition did not converge")]
    NoConvergence,
    #[error("eigenvector matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluctuationError {
    #[error(transparent)]
    Step(#[from] StepFailure),
    #[error("drift matrix is defective (eigenvector condition number {condition:.3e}); use the quadrature path")]
    DefectiveMatrix { condition: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantifierError {
    #[error("covariance matrix violates the uncertainty principle (smallest symplectic eigenvalue {0})")]
    NonPhysicalCovariance(f64),
    #[error("no samples inside the requested window")]
    EmptyWindow,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("epsilon = kappa is an exceptional point; use the EP limit formulas")]
    ExceptionalPointParams,
    #[error("invalid lossless parameters: {0}")]
    InvalidParams(String),
}

/// Errors from scenario configuration and orchestration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Fluctuation(#[from] FluctuationError),
    #[error(transparent)]
    Quantifier(#[from] QuantifierError),
    #[error(transparent)]
    Step(#[from] StepFailure),
}

impl ScenarioError {
    /// Configuration problems as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            ScenarioError::Config(_) | ScenarioError::Model(_) | ScenarioError::SteadyState(_)
        )
    }
}
