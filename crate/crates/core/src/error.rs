//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("evaluation point must be non-negative, got {0}")]
    NegativeEvaluationPoint(f64),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("law coefficients must be non-negative, finite and not all zero")]
    InvalidCoefficients,

    #[error("law decreases near t = {t}: {value} < {previous}")]
    NonMonotoneLaw { t: f64, value: f64, previous: f64 },

    #[error("law takes a negative or non-finite value {value} at t = {t}")]
    BadLawValue { t: f64, value: f64 },

    #[error("scale factor integral diverges: {0}")]
    DivergentScaleFactor(String),

    #[error("law variant `{found}` is not supported by {operation}")]
    UnsupportedLawVariant {
        operation: &'static str,
        found: &'static str,
    },

    #[error("lower step approximation is identically zero on the sampled range")]
    ZeroApproximation,

    #[error("invalid interval: need lower < upper, got [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("invalid piecewise affine function: {0}")]
    InvalidPiecewiseAffine(String),

    #[error("window [{lower}, {upper}] does not meet the domain in positive measure")]
    EmptyWindow { lower: f64, upper: f64 },

    #[error("mollification radius {epsilon} must be below half the minimal piece length {min_piece}")]
    MollifierTooWide { epsilon: f64, min_piece: f64 },

    #[error("image not bounded: |u({x})| = {value}")]
    UnboundedImage { x: f64, value: f64 },

    #[error("function must vanish outside its support; boundary value {boundary_value}")]
    NotCompactlySupported { boundary_value: f64 },

    #[error("hostility weights must be non-increasing")]
    WeightsNotMonotone,

    #[error("hostility weights too short: need at least {needed}, got {got}")]
    WeightsTooShort { needed: usize, got: usize },

    #[error(
        "state space too large for exhaustive verification: {arrangements} arrangements \
         (guard: n <= {max_n}, species range <= {max_range})"
    )]
    StateSpaceTooLarge {
        arrangements: u128,
        max_n: usize,
        max_range: u32,
    },

    #[error("step function must take integer values, found {0}")]
    NonIntegerLevels(f64),

    #[error("tabulated kernel rejected: {0}")]
    InvalidKernel(String),

    #[error("exponent p = {p} needs a law vanishing near zero (first growth point is {first_growth})")]
    UnsupportedExponent { p: f64, first_growth: f64 },

    #[error(
        "quadrature hit the subdivision cap {max_intervals}; partial value {partial} \
         with error estimate {error_estimate}"
    )]
    SubdivisionCap {
        partial: f64,
        error_estimate: f64,
        max_intervals: usize,
    },

    #[error(
        "window-to-simplex energy ratio is not constant: min {min}, max {max} over {trials} trials"
    )]
    RatioNotConstant { min: f64, max: f64, trials: usize },

    #[error("need more steps than coefficients: n = {n}, m = {m}")]
    TooFewSteps { n: usize, m: usize },

    #[error("minimization did not converge: best value {value}, residual {residual}")]
    NoConvergence { value: f64, residual: f64 },

    #[error("extrapolation needs at least {needed} strictly increasing n values")]
    InsufficientData { needed: usize },

    #[error("extrapolation fit ill-conditioned: {0}")]
    IllConditionedFit(String),

    #[error("coefficients are not equal within dyadic packages")]
    NotDyadicPackaged,

    #[error("law specification could not be parsed: {0}")]
    LawParse(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}
