//! Mittag-Leffler functions `t^{β−1}E_{α,β}(λt^α)` for `0 < α < 1`, evaluated
//! through a real-axis integral plus a residue term, with the power series,
//! a large-`t` expansion and a multiprecision series as companions.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32` and `f64`); the
//! multiprecision oracle and the verification harness work in `f64`.

pub mod asymptotics;
pub mod closedforms;
pub mod crosscheck;
pub mod error;
pub mod kernel;
pub mod mp;
pub mod numerics;
pub mod quadrature;
pub mod representation;
pub mod scalar;
pub mod series;

pub use error::{MlError, Result};
pub use numerics::{MLParams, RegionClass};
pub use representation::{evaluate, EvalOutcome, Method, MethodChoice};
pub use scalar::{ComplexScalar, Real};

pub type Complex64 = ComplexScalar<f64>;
pub type Complex32 = ComplexScalar<f32>;
pub type Params64 = MLParams<f64>;
pub type Params32 = MLParams<f32>;
pub type Outcome64 = EvalOutcome<f64>;
pub type Outcome32 = EvalOutcome<f32>;
