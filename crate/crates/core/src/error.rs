use thiserror::Error;

/// Every failure mode surfaced by the toolkit.
///
/// Numeric payloads are stored as `f64` regardless of the working scalar so
/// the error type stays independent of it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("{name} must lie in {bound}, got {value}")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        bound: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "lambda lies {margin:.3e} rad from the wedge boundary |arg λ| = πα; \
         the kernel denominator vanishes on or next to the integration path"
    )]
    NearPole { margin: f64 },

    #[error("singular limit at t = 0: t^(β-1) is unbounded for β = {beta} < 1")]
    SingularLimit { beta: f64 },

    #[error("the integral over the spectral density diverges for β = α at t = 0")]
    Divergent,

    #[error("|z| = {z_abs} exceeds the series limit {z_max}; use the integral representation")]
    AccuracyRegime { z_abs: f64, z_max: f64 },

    #[error(
        "series cancellation: rounding bound {bound:.3e} exceeds the requested accuracy \
         {requested:.3e}; use the multiprecision series or the integral representation"
    )]
    Cancellation { bound: f64, requested: f64 },

    #[error(
        "quadrature did not converge within {evaluations} evaluations \
         (partial value {partial_re} + {partial_im}i, error estimate {error_estimate:.3e})"
    )]
    QuadratureFailure {
        partial_re: f64,
        partial_im: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("pole of 1/sin(sπ/α) at s = {s}")]
    Pole { s: f64 },

    #[error("result is not representable in the working precision")]
    Overflow,

    #[error("unknown check '{name}'; valid checks: {valid}")]
    UnknownCheck { name: String, valid: String },

    #[error("uniform bound estimate keeps growing at the end of the grid (last weighted defect {last:.6e})")]
    BoundViolation { last: f64 },
}

pub type Result<T, E = MlError> = std::result::Result<T, E>;
