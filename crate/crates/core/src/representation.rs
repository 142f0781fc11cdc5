//! `t^{β−1}E_{α,β}(λt^α)` as the residue term plus a damped integral of the
//! spectral density, together with the `t = 0` limit, the auxiliary integral
//! `J_λ(t)` and the Laplace-pair check.

use num_complex::Complex;
use serde::Serialize;

use crate::asymptotics::eval_asymptotic;
use crate::error::{MlError, Result};
use crate::kernel::{check_pole_margin, density, diagnostics, residue_term};
use crate::numerics::{principal_power, MLParams, RegionClass};
use crate::quadrature::{integrate_finite, integrate_semi_infinite, split_point, DecayHint, QuadOutcome};
use crate::scalar::{lit, to_f64, unit_pi, ComplexScalar, Real};
use crate::series::{scaled_argument, scaled_series, Z_MAX};

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Series,
    IntegralRepr,
    Asymptotic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::IntegralRepr => "repr",
            Method::Asymptotic => "asympt",
        }
    }
}

/// Method requested by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MethodChoice {
    /// Series for `|λt^α| ≤ 30` when it is not refused, integral otherwise.
    #[default]
    Auto,
    Series,
    Repr,
    Asympt,
}

/// A value of `t^{β−1}E_{α,β}(λt^α)` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOutcome<T> {
    pub value: ComplexScalar<T>,
    pub method: Method,
    pub region: RegionClass,
    pub error_estimate: T,
}

fn positive_t<T: Real>(t: T) -> Result<()> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t",
            value: to_f64(t),
            bound: "(0, ∞)".into(),
        });
    }
    Ok(())
}

fn in_scope<T: Real>(p: &MLParams<T>) -> Result<RegionClass> {
    let region = p.region();
    if region == RegionClass::OutOfScope {
        return Err(MlError::Domain(
            "lambda = 0 has no integral representation; use the series".into(),
        ));
    }
    check_pole_margin(p)?;
    Ok(region)
}

fn realify<T: Real>(p: &MLParams<T>, mut z: ComplexScalar<T>) -> ComplexScalar<T> {
    if p.is_lambda_real() {
        z.im = T::zero();
    }
    z
}

/// `∫₀^∞ e^{−vt} f_{α,β}(v) dv`, the part of the value left after the residue.
pub fn integral_part<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<QuadOutcome<T>> {
    positive_t(t)?;
    in_scope(p)?;
    let d = diagnostics(p);
    let hint = DecayHint::exponential(t, d.origin_exponent).with_split(split_point(p));
    let mut q = integrate_semi_infinite(|v| Ok(density(v, p)? * (-v * t).exp()), hint, tol)?;
    q.value = realify(p, q.value);
    Ok(q)
}

/// Residue plus damped density integral, for `t > 0`.
pub fn eval_repr<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<EvalOutcome<T>> {
    positive_t(t)?;
    let region = in_scope(p)?;
    let residue = residue_term(t, p)?;
    let q = integral_part(t, p, tol)?;
    let value = residue + q.value;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(MlError::Overflow);
    }
    Ok(EvalOutcome {
        value,
        method: Method::IntegralRepr,
        region,
        error_estimate: q.abs_error_estimate + T::epsilon() * residue.norm(),
    })
}

fn require_beta<T: Real>(p: &MLParams<T>, beta: T, what: &str) -> Result<()> {
    if p.beta() != beta {
        return Err(MlError::ParameterDomain {
            name: "beta",
            value: to_f64(p.beta()),
            bound: format!("{{{what}}}"),
        });
    }
    Ok(())
}

/// `E_α(λt^α)`; `t = 0` gives the limit `1` through [`eval_at_zero`].
pub fn eval_e_alpha<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<EvalOutcome<T>> {
    require_beta(p, T::one(), "1")?;
    if t == T::zero() {
        return eval_at_zero(p, tol);
    }
    eval_repr(t, p, tol)
}

/// `t^{α−1}E_{α,α}(λt^α)`, for `t > 0` only.
pub fn eval_e_alpha_alpha<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<EvalOutcome<T>> {
    require_beta(p, p.alpha(), "alpha")?;
    if t == T::zero() {
        return Err(MlError::Divergent);
    }
    eval_repr(t, p, tol)
}

/// Exact value of the `t → 0⁺` limit: `1` for `β = 1`, `0` for `β ∈ (1, 1+α)`.
pub fn zero_limit<T: Real>(p: &MLParams<T>) -> Result<T> {
    let beta = p.beta();
    if beta == p.alpha() {
        return Err(MlError::Divergent);
    }
    if beta < T::one() {
        return Err(MlError::SingularLimit { beta: to_f64(beta) });
    }
    Ok(if beta == T::one() { T::one() } else { T::zero() })
}

/// `∫₀^∞ f_{α,β}(v) dv` without damping, for `β ∈ [1, 1+α)`.
pub fn density_integral<T: Real>(p: &MLParams<T>, tol: T) -> Result<QuadOutcome<T>> {
    zero_limit(p)?;
    in_scope(p)?;
    let d = diagnostics(p);
    let hint = DecayHint::algebraic(d.tail_exponent, d.origin_exponent).with_split(split_point(p));
    let mut q = integrate_semi_infinite(|v| density(v, p), hint, tol)?;
    q.value = realify(p, q.value);
    Ok(q)
}

/// The representation at `t = 0`: residue at zero plus the undamped integral.
///
/// The returned value is the quadrature sum; `error_estimate` adds its
/// distance from the exact limit.
pub fn eval_at_zero<T: Real>(p: &MLParams<T>, tol: T) -> Result<EvalOutcome<T>> {
    let limit = zero_limit(p)?;
    let region = in_scope(p)?;
    if region == RegionClass::ResidueAbsentExtended {
        return Err(MlError::Domain(
            "the t = 0 representation needs |arg lambda| < pi*alpha or lambda < 0".into(),
        ));
    }
    let q = density_integral(p, tol)?;
    let value = residue_term(T::zero(), p)? + q.value;
    Ok(EvalOutcome {
        value,
        method: Method::IntegralRepr,
        region,
        error_estimate: q.abs_error_estimate + (value - Complex::new(limit, T::zero())).norm(),
    })
}

/// `J_λ(t) = ∫₀^∞ e^{−ut}u^{α−1}/(u^{2α} − 2λu^α cos πα + λ²) du` for `t ≥ 0`.
pub fn eval_j<T: Real>(t: T, p: &MLParams<T>, tol: T) -> Result<QuadOutcome<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t",
            value: to_f64(t),
            bound: "[0, ∞)".into(),
        });
    }
    in_scope(p)?;
    let alpha = p.alpha();
    let rot = unit_pi(alpha);
    let lambda = p.lambda();
    let integrand = |u: T| {
        let w = Complex::new(u.powf(alpha), T::zero());
        let k = Complex::new(u.powf(alpha - T::one()) * (-u * t).exp(), T::zero());
        Ok(realify(p, k / (w - lambda * rot) / (w - lambda * rot.conj())))
    };
    let origin = alpha - T::one();
    let hint = if t == T::zero() {
        DecayHint::algebraic(-alpha - T::one(), origin)
    } else {
        DecayHint::exponential(t, origin)
    };
    integrate_semi_infinite(integrand, hint.with_split(split_point(p)), tol)
}

/// Evaluates with the requested method.
///
/// `Auto` takes the series while `|λt^α| ≤ 30` unless the series refuses
/// because of cancellation, and the integral representation otherwise. At
/// `t = 0` every method except the asymptotic one returns the exact limit.
pub fn evaluate<T: Real>(t: T, p: &MLParams<T>, method: MethodChoice, tol: T) -> Result<EvalOutcome<T>> {
    let region = p.region();
    let from_series = |t: T| {
        scaled_series(t, p, tol).map(|s| EvalOutcome {
            value: s.value,
            method: Method::Series,
            region,
            error_estimate: s.truncation_bound,
        })
    };
    match method {
        MethodChoice::Series => from_series(t),
        MethodChoice::Asympt => eval_asymptotic(t, p, tol),
        MethodChoice::Repr if t == T::zero() => {
            let limit = zero_limit(p)?;
            let mut out = eval_at_zero(p, tol)?;
            out.value = Complex::new(limit, T::zero());
            Ok(out)
        }
        MethodChoice::Repr => eval_repr(t, p, tol),
        MethodChoice::Auto => {
            if t == T::zero() || scaled_argument(t, p).norm() <= lit(Z_MAX) {
                match from_series(t) {
                    Err(MlError::Cancellation { .. }) if t > T::zero() => {}
                    other => return other,
                }
            }
            eval_repr(t, p, tol)
        }
    }
}

/// `T = (ln(1/tol) + 5)/(s − |λ|^{1/α})`, the default horizon for
/// [`laplace_identity_gap`].
pub fn laplace_horizon<T: Real>(s: T, p: &MLParams<T>, tol: T) -> T {
    (-tol.ln() + lit(5.0)) / (s - p.pole_modulus())
}

/// `(∫₀^T e^{−st}·t^{β−1}E_{α,β}(λt^α) dt, s^{α−β}/(s^α − λ))` for real
/// `s > |λ|^{1/α}`.
pub fn laplace_pair_values<T: Real>(
    s: T,
    p: &MLParams<T>,
    horizon: T,
    tol: T,
) -> Result<(ComplexScalar<T>, ComplexScalar<T>)> {
    if !(s > p.pole_modulus()) || !s.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "s",
            value: to_f64(s),
            bound: format!("({}, ∞)", to_f64(p.pole_modulus())),
        });
    }
    let inner_tol = tol * lit(1e-2);
    let integrand = |t: T| {
        let v = evaluate(t, p, MethodChoice::Auto, inner_tol)?;
        Ok(v.value * (-s * t).exp())
    };
    let q = integrate_finite(integrand, horizon, p.beta() - T::one(), inner_tol)?;
    let s_c = Complex::new(s, T::zero());
    let closed = principal_power(s_c, p.alpha() - p.beta())?
        / (principal_power(s_c, p.alpha())? - p.lambda());
    Ok((q.value, closed))
}

/// `|∫₀^T e^{−st}·t^{β−1}E_{α,β}(λt^α) dt − s^{α−β}/(s^α − λ)|`.
pub fn laplace_identity_gap<T: Real>(s: T, p: &MLParams<T>, horizon: T, tol: T) -> Result<T> {
    let (numeric, closed) = laplace_pair_values(s, p, horizon, tol)?;
    Ok((numeric - closed).norm())
}
