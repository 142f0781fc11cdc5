//! Power-series evaluation of `E_{α,β}(z) = Σ z^k / Γ(kα+β)`.

use num_complex::Complex;

use crate::error::{MlError, Result};
use crate::numerics::{ln_gamma, principal_ln, principal_power, real_gamma, MLParams};
use crate::scalar::{from_usize, lit, to_f64, CompensatedSum, ComplexScalar, Real};

/// Largest `|z|` accepted by [`ml_series`].
pub const Z_MAX: f64 = 30.0;

const K_MIN: usize = 8;
const MAX_TERMS: usize = 5_000_000;

/// Result of a series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOutcome<T> {
    pub value: ComplexScalar<T>,
    pub terms_used: usize,
    /// Bound on the modulus of the dropped tail.
    pub truncation_bound: T,
}

/// Sums the series for `E_{α,β}(z)`.
///
/// Stops once `k ≥ 8`, the current term is below `tol·max(1, |partial|)` and
/// the ratio bound on the remaining tail is below the same level. The ratio
/// `|z|·Γ(x)/Γ(x+α)` decreases in `x`, so the geometric tail bound built from
/// the current ratio is rigorous.
///
/// Besides the `|z| > 30` refusal, the sum is refused when its own rounding
/// error exceeds `max(tol, 4096ε)·max(1, |value|)`; that happens for
/// large negative `z` long before `|z|` reaches 30.
pub fn ml_series<T: Real>(z: ComplexScalar<T>, alpha: T, beta: T, tol: T) -> Result<SeriesOutcome<T>> {
    let zero = T::zero();
    if !(alpha > zero) {
        return Err(MlError::ParameterDomain {
            name: "alpha",
            value: to_f64(alpha),
            bound: "(0, ∞)".into(),
        });
    }
    if !(beta > zero) {
        return Err(MlError::ParameterDomain {
            name: "beta",
            value: to_f64(beta),
            bound: "(0, ∞)".into(),
        });
    }
    if !(tol > zero) {
        return Err(MlError::ParameterDomain {
            name: "tol",
            value: to_f64(tol),
            bound: "(0, ∞)".into(),
        });
    }
    let z_abs = z.norm();
    if !(z_abs <= lit(Z_MAX)) {
        return Err(MlError::AccuracyRegime {
            z_abs: to_f64(z_abs),
            z_max: Z_MAX,
        });
    }
    let first = Complex::new(real_gamma(beta)?.recip(), zero);
    if z_abs == zero {
        return Ok(SeriesOutcome {
            value: first,
            terms_used: 1,
            truncation_bound: zero,
        });
    }

    let one = T::one();
    let ln_z = principal_ln(z);
    let mut sum = CompensatedSum::new();
    sum.add(first);
    // term k carries about k+4 ulps (running power plus gamma)
    let mut abs_sum = first.norm() * lit(4.0);
    let mut zpow = Complex::new(one, zero);
    let mut log_space = false;
    let mut k = 0usize;
    let mut term = first;
    loop {
        k += 1;
        if k > MAX_TERMS {
            return Err(MlError::Domain(format!(
                "series did not settle within {MAX_TERMS} terms"
            )));
        }
        let x = from_usize::<T>(k) * alpha + beta;
        if !log_space {
            zpow = zpow * z;
            match real_gamma(x) {
                Ok(g) if zpow.norm().is_finite() && zpow.norm() > T::min_positive_value() => {
                    term = zpow / g;
                }
                _ => log_space = true,
            }
        }
        if log_space {
            let exponent = ln_z * from_usize::<T>(k) - Complex::new(ln_gamma(x)?, zero);
            term = exponent.exp();
        }
        sum.add(term);
        abs_sum += term.norm() * (from_usize::<T>(k) + lit(4.0));

        if k < K_MIN {
            continue;
        }
        let partial = sum.value();
        let level = tol * one.max(partial.norm());
        let t_abs = term.norm();
        if t_abs >= level {
            continue;
        }
        let ratio = z_abs * (ln_gamma(x)? - ln_gamma(x + alpha)?).exp();
        if ratio >= one {
            continue;
        }
        let tail = t_abs * ratio / (one - ratio);
        if tail < level {
            let value = partial;
            let rounding = T::epsilon() * abs_sum;
            let allowed = tol.max(lit::<T>(4096.0) * T::epsilon()) * one.max(value.norm());
            if rounding > allowed {
                return Err(MlError::Cancellation {
                    bound: to_f64(rounding),
                    requested: to_f64(allowed),
                });
            }
            return Ok(SeriesOutcome {
                value,
                terms_used: k + 1,
                truncation_bound: tail,
            });
        }
    }
}

/// `t^{β−1}·E_{α,β}(λt^α)` by the series.
///
/// At `t = 0` the limit is `1` for `β = 1` and `0` for `β > 1`.
pub fn scaled_series<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<SeriesOutcome<T>> {
    let zero = T::zero();
    let one = T::one();
    if !(t >= zero) || !t.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t",
            value: to_f64(t),
            bound: "[0, ∞)".into(),
        });
    }
    if t == zero {
        let beta = p.beta();
        let value = if beta < one {
            return Err(MlError::SingularLimit { beta: to_f64(beta) });
        } else if beta == one {
            one
        } else {
            zero
        };
        return Ok(SeriesOutcome {
            value: Complex::new(value, zero),
            terms_used: 1,
            truncation_bound: zero,
        });
    }
    let z = scaled_argument(t, p);
    let out = ml_series(z, p.alpha(), p.beta(), tol)?;
    let scale = t.powf(p.beta() - one);
    let mut value = out.value * scale;
    if p.is_lambda_real() {
        value.im = zero;
    }
    Ok(SeriesOutcome {
        value,
        terms_used: out.terms_used,
        truncation_bound: out.truncation_bound * scale,
    })
}

/// `z = λ·t^α`.
pub fn scaled_argument<T: Real>(t: T, p: &MLParams<T>) -> ComplexScalar<T> {
    p.lambda() * t.powf(p.alpha())
}

/// `λ^{1/α}` on the principal branch.
pub(crate) fn pole_location<T: Real>(p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    principal_power(p.lambda(), T::one() / p.alpha())
}
