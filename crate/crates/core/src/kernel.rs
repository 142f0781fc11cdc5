//! Spectral density on the positive real axis, its denominator, the residue
//! contribution and the endpoint behaviour of the density.

use num_complex::Complex;

use crate::error::{MlError, Result};
use crate::numerics::{principal_power, MLParams, RegionClass};
use crate::scalar::{lit, sin_pi, to_f64, unit_pi, ComplexScalar, Real};
use crate::series::pole_location;

/// Smallest `|πα − |arg λ||` accepted by the integral evaluators.
pub const POLE_MARGIN_MIN: f64 = 1e-3;

/// Endpoint behaviour of the density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDiagnostics<T> {
    /// Power of `v` as `v → 0`.
    pub origin_exponent: T,
    /// Power of `v` as `v → ∞`.
    pub tail_exponent: T,
    /// `πα − |arg λ|`.
    pub pole_margin: T,
}

/// Endpoint exponents and pole margin for `p`.
///
/// The tail decays like `v^{−β}` unless `sin(βπ) = 0`, in which case the
/// leading term drops out and the decay is `v^{−α−1}`.
pub fn diagnostics<T: Real>(p: &MLParams<T>) -> KernelDiagnostics<T> {
    let (alpha, beta) = (p.alpha(), p.beta());
    let tail_exponent = if sin_pi(beta) == T::zero() {
        -(alpha + T::one())
    } else {
        -beta
    };
    KernelDiagnostics {
        origin_exponent: alpha - beta,
        tail_exponent,
        pole_margin: p.pole_margin(),
    }
}

/// Refuses λ whose distance to the wedge boundary is below [`POLE_MARGIN_MIN`].
pub fn check_pole_margin<T: Real>(p: &MLParams<T>) -> Result<()> {
    if p.region() == RegionClass::ResidueAbsentNegativeReal {
        return Ok(());
    }
    let margin = p.pole_margin();
    if margin.abs() < lit(POLE_MARGIN_MIN) {
        return Err(MlError::NearPole {
            margin: to_f64(margin),
        });
    }
    Ok(())
}

/// The two factors `v^α − λe^{±iπα}` of the denominator.
fn factors<T: Real>(v: T, p: &MLParams<T>) -> (ComplexScalar<T>, ComplexScalar<T>) {
    let w = Complex::new(v.powf(p.alpha()), T::zero());
    let rot = unit_pi(p.alpha());
    let lambda = p.lambda();
    (w - lambda * rot, w - lambda * rot.conj())
}

fn check_v<T: Real>(v: T) -> Result<()> {
    if !(v > T::zero()) || !v.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "v",
            value: to_f64(v),
            bound: "(0, ∞)".into(),
        });
    }
    Ok(())
}

fn near_pole_floor<T: Real>() -> T {
    lit::<T>(1e-300).max(T::min_positive_value())
}

/// `v^{2α} − 2λv^α cos(απ) + λ²`, evaluated in factored form.
pub fn denominator<T: Real>(v: T, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    check_v(v)?;
    let (a, b) = factors(v, p);
    let d = a * b;
    if !(d.norm() >= near_pole_floor::<T>()) {
        return Err(MlError::NearPole {
            margin: to_f64(p.pole_margin()),
        });
    }
    Ok(d)
}

/// `f_{α,β}(v) = v^{α−β}(v^α sin βπ + λ sin(α−β)π) / (π·denominator)`.
///
/// The quotient is divided through one factor at a time so that large `v`
/// does not overflow `v^{2α}`.
pub fn density<T: Real>(v: T, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    check_v(v)?;
    let (alpha, beta) = (p.alpha(), p.beta());
    let (a, b) = factors(v, p);
    if !(a.norm() * b.norm() >= near_pole_floor::<T>()) {
        return Err(MlError::NearPole {
            margin: to_f64(p.pole_margin()),
        });
    }
    let w = v.powf(alpha);
    let num = Complex::new(w * sin_pi(beta), T::zero()) + p.lambda() * sin_pi(alpha - beta);
    let mut f = num / a / b * (v.powf(alpha - beta) / T::PI());
    if p.is_lambda_real() {
        f.im = T::zero();
    }
    Ok(f)
}

/// `(1/α)·e^{λ^{1/α}t}·λ^{(1−β)/α}` inside the wedge, zero elsewhere.
pub fn residue_term<T: Real>(t: T, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    let zero = T::zero();
    if !(t >= zero) || !t.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t",
            value: to_f64(t),
            bound: "[0, ∞)".into(),
        });
    }
    if !p.region().has_residue() {
        return Ok(Complex::new(zero, zero));
    }
    let alpha = p.alpha();
    let pole = pole_location(p)?;
    let scale = principal_power(p.lambda(), (T::one() - p.beta()) / alpha)?;
    let mut r = (pole * t).exp() * scale / alpha;
    if !(r.re.is_finite() && r.im.is_finite()) {
        return Err(MlError::Overflow);
    }
    if p.is_lambda_real() {
        r.im = zero;
    }
    Ok(r)
}

/// `|f_{α,α}(v) + v·f_{α,1}(v)/λ|` for the α and λ of `p` (its β is ignored).
pub fn density_relation_check<T: Real>(v: T, p: &MLParams<T>) -> Result<T> {
    let alpha = p.alpha();
    let f_aa = density(v, &p.with_beta(alpha)?)?;
    let f_a1 = density(v, &p.with_beta(T::one())?)?;
    Ok((f_aa + f_a1 * v / p.lambda()).norm())
}
