use thiserror::Error;

/// A gain inequality that a controller or stability check refused.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainViolation {
    #[error("gain {name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("attitude gain condition eta > k_R/k_omega^2 violated: eta = {eta}, k_R/k_omega^2 = {bound}")]
    EtaBound { eta: f64, bound: f64 },
    #[error("W3 condition lambda_min(W3) > ||Pi2||^2/(4 eta lambda_min(Pi1)) violated: {lhs} <= {rhs}")]
    W3Condition { lhs: f64, rhs: f64 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not antisymmetric (relative residual {residual:e})")]
    Asymmetry { residual: f64 },
    #[error("matrix is singular or improper (det = {det:e})")]
    Singular { det: f64 },
    #[error("rotations are antipodal; 1 + tr(Rd^T R) = {margin:e}")]
    Antipodal { margin: f64 },
    #[error("desired thrust vector degenerate (norm {norm:e} N)")]
    DegenerateThrust { norm: f64 },
    #[error("desired heading is parallel to the thrust axis (|e3x x e1d| = {cross:e})")]
    ParallelHeading { cross: f64 },
    #[error(transparent)]
    Gain(#[from] GainViolation),
    #[error("theta = {theta} is not below theta_max = {theta_max}")]
    ThetaTooLarge { theta: f64, theta_max: f64 },
    #[error("matrix is not positive definite (lambda_min = {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },
    #[error("polynomial fit is ill-conditioned (residual {residual:e})")]
    IllConditioned { residual: f64 },
    #[error("time {t} outside telemetry range [{start}, {end}]")]
    Range { t: f64, start: f64, end: f64 },
    #[error("telemetry grids do not match: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
