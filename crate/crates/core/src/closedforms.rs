//! Closed forms for the moments
//! `M₁ = ∫₀^∞ v^{2α−β}/D(v) dv` and `M₂ = ∫₀^∞ v^{α−β}/D(v) dv`,
//! `D(v) = v^{2α} − 2λv^α cos πα + λ²`, by the contour route and by the
//! Mellin function `F(s)`, and the identities that tie them to the value of
//! the undamped density integral.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{MlError, Result};
use crate::kernel::check_pole_margin;
use crate::numerics::{principal_power, real_gamma, MLParams, RegionClass};
use crate::quadrature::{integrate_semi_infinite, split_point, DecayHint, QuadOutcome};
use crate::scalar::{lit, sin_pi, to_f64, unit_pi, ComplexScalar, Real};

/// Which derivation a moment value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Route {
    Contour,
    Mellin,
}

/// `M₁` and `M₂` from one route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPair<T> {
    pub m1: ComplexScalar<T>,
    pub m2: ComplexScalar<T>,
    pub route: Route,
}

impl<T: Real> MomentPair<T> {
    pub fn new(p: &MLParams<T>, route: Route) -> Result<Self> {
        Ok(Self {
            m1: m1_closed(p, route)?,
            m2: m2_closed(p, route)?,
            route,
        })
    }
}

fn require_wedge<T: Real>(p: &MLParams<T>) -> Result<()> {
    if p.region() != RegionClass::ResiduePresent {
        return Err(MlError::Domain(format!(
            "closed-form moments need |arg lambda| < pi*alpha (region {})",
            p.region()
        )));
    }
    Ok(())
}

fn beta_interior<T: Real>(p: &MLParams<T>) -> Result<()> {
    let beta = p.beta();
    if !(beta > T::one() && beta < T::one() + p.alpha()) {
        return Err(MlError::ParameterDomain {
            name: "beta",
            value: to_f64(beta),
            bound: format!("(1, 1+alpha) = (1, {})", to_f64(T::one() + p.alpha())),
        });
    }
    Ok(())
}

/// `M₁ = πλ^{(1−β)/α} sin(π(β−α+(1−β)/α)) / (α sin πα · sin(π(β−1)/α))`,
/// `β ∈ (1, 1+α)`.
pub fn m1_closed<T: Real>(p: &MLParams<T>, route: Route) -> Result<ComplexScalar<T>> {
    beta_interior(p)?;
    require_wedge(p)?;
    let (alpha, beta) = (p.alpha(), p.beta());
    match route {
        Route::Contour => {
            let one = T::one();
            let g = (one - beta) / alpha;
            let lp = principal_power(p.lambda(), g)?;
            let num = T::PI() * sin_pi(beta - alpha + g);
            let den = alpha * p.sin_pi_alpha() * sin_pi((beta - one) / alpha);
            Ok(lp * (num / den))
        }
        Route::Mellin => Ok(mellin_f(alpha - beta + T::one(), p)? / p.sin_pi_alpha()),
    }
}

/// `M₂` for `β ∈ (1, 1+α)`, and `π(1−α)/(αλ sin πα)` for `β = 1`.
pub fn m2_closed<T: Real>(p: &MLParams<T>, route: Route) -> Result<ComplexScalar<T>> {
    let (alpha, beta) = (p.alpha(), p.beta());
    let one = T::one();
    if beta != one {
        beta_interior(p)?;
    }
    require_wedge(p)?;
    match route {
        Route::Contour if beta == one => {
            let c = T::PI() * (one - alpha) / (alpha * p.sin_pi_alpha());
            Ok(p.lambda().inv() * c)
        }
        Route::Contour => {
            let g = (one - beta) / alpha;
            let lp = principal_power(p.lambda(), g - one)?;
            let num = T::PI() * sin_pi(beta + g);
            let den = alpha * p.sin_pi_alpha() * sin_pi((beta - one) / alpha);
            Ok(lp * (num / den))
        }
        Route::Mellin => Ok(mellin_f(one - beta, p)? / p.sin_pi_alpha()),
    }
}

/// `F(s) = πλ^{s/α−1} sin(π(1−α)s/α) / (α sin(sπ/α))`.
///
/// `s = 0` is removable and gives `π(1−α)/(αλ)`.
pub fn mellin_f<T: Real>(s: T, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    let alpha = p.alpha();
    let one = T::one();
    let r = s / alpha;
    let lp = principal_power(p.lambda(), r - one)?;
    if s == T::zero() {
        return Ok(lp * (T::PI() * (one - alpha) / alpha));
    }
    let den = alpha * sin_pi(r);
    if den == T::zero() {
        return Err(MlError::Pole { s: to_f64(s) });
    }
    Ok(lp * (T::PI() * sin_pi((one - alpha) * r) / den))
}

/// Absolute defect of
/// `sin(π(β−α+(1−β)/α))·sin βπ − sin(π(β−α))·sin(π(β+(1−β)/α)) = sin(π(1−β)/α)·sin πα`.
pub fn trig_identity_defect<T: Real>(alpha: T, beta: T) -> T {
    let g = (T::one() - beta) / alpha;
    let lhs = sin_pi(beta - alpha + g) * sin_pi(beta) - sin_pi(beta - alpha) * sin_pi(beta + g);
    let rhs = sin_pi(g) * sin_pi(alpha);
    (lhs - rhs).abs()
}

/// `(∫₀^∞ x^{s−1}e^{−x cos φ} sin(x sin φ) dx, Γ(s) sin(φs))` for real
/// `s > 0` and `|φ| < π/2`, the integral by quadrature.
pub fn mellin_sine_values<T: Real>(s: T, phi: T, tol: T) -> Result<(T, T)> {
    if !(s > T::zero()) || !s.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "s",
            value: to_f64(s),
            bound: "(0, ∞)".into(),
        });
    }
    if !(phi.abs() < T::FRAC_PI_2()) {
        return Err(MlError::ParameterDomain {
            name: "phi",
            value: to_f64(phi),
            bound: "(-pi/2, pi/2)".into(),
        });
    }
    let exact = real_gamma(s)? * (phi * s).sin();
    if phi == T::zero() {
        return Ok((T::zero(), exact));
    }
    let (c, sn) = (phi.cos(), phi.sin());
    let integrand = |x: T| Ok(Complex::new(x.powf(s - T::one()) * (-x * c).exp() * (x * sn).sin(), T::zero()));
    // sin(x sin φ) ~ x sin φ at the origin
    let hint = DecayHint::exponential(c, s).with_split(T::one() / c);
    let q = integrate_semi_infinite(integrand, hint, tol)?;
    Ok((q.value.re, exact))
}

/// Absolute difference of the two sides in [`mellin_sine_values`].
pub fn mellin_sine_defect<T: Real>(s: T, phi: T, tol: T) -> Result<T> {
    let (integral, exact) = mellin_sine_values(s, phi, tol)?;
    Ok((integral - exact).abs())
}

/// The undamped density integral assembled from the moments,
/// `(sin βπ/π)M₁ + (λ sin π(α−β)/π)M₂`; for `β = 1` only `M₂` enters.
pub fn assembled_density_integral<T: Real>(p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    let (alpha, beta) = (p.alpha(), p.beta());
    if beta == alpha {
        return Err(MlError::Divergent);
    }
    let pi = T::PI();
    let m2 = m2_closed(p, Route::Contour)?;
    let second = p.lambda() * m2 * (sin_pi(alpha - beta) / pi);
    if beta == T::one() {
        return Ok(second);
    }
    let m1 = m1_closed(p, Route::Contour)?;
    Ok(m1 * (sin_pi(beta) / pi) + second)
}

/// The value the assembled integral must collapse to: `−λ^{(1−β)/α}/α` for
/// `β ∈ (1, 1+α)` and `1 − 1/α` for `β = 1`.
pub fn density_integral_closed<T: Real>(p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    let (alpha, beta) = (p.alpha(), p.beta());
    if beta == alpha {
        return Err(MlError::Divergent);
    }
    let one = T::one();
    if beta == one {
        return Ok(Complex::new(one - one / alpha, T::zero()));
    }
    beta_interior(p)?;
    require_wedge(p)?;
    Ok(-principal_power(p.lambda(), (one - beta) / alpha)? / alpha)
}

/// `|(sin βπ/π)M₁ + (λ sin π(α−β)/π)M₂ + λ^{(1−β)/α}/α|` for `β ∈ (1, 1+α)`.
pub fn collapse_defect<T: Real>(p: &MLParams<T>) -> Result<T> {
    beta_interior(p)?;
    Ok((assembled_density_integral(p)? - density_integral_closed(p)?).norm())
}

fn moment_quadrature<T: Real>(p: &MLParams<T>, power: T, tol: T) -> Result<QuadOutcome<T>> {
    check_pole_margin(p)?;
    let alpha = p.alpha();
    let rot = unit_pi(alpha);
    let lambda = p.lambda();
    let integrand = |v: T| {
        let w = Complex::new(v.powf(alpha), T::zero());
        Ok(Complex::new(v.powf(power), T::zero()) / (w - lambda * rot) / (w - lambda * rot.conj()))
    };
    let tail = power - lit::<T>(2.0) * alpha;
    let hint = DecayHint::algebraic(tail, power).with_split(split_point(p));
    let mut q = integrate_semi_infinite(integrand, hint, tol)?;
    if p.is_lambda_real() {
        q.value.im = T::zero();
    }
    Ok(q)
}

/// `M₁` by direct quadrature; needs `β ∈ (1, 1+α)` for convergence.
pub fn m1_quadrature<T: Real>(p: &MLParams<T>, tol: T) -> Result<QuadOutcome<T>> {
    beta_interior(p)?;
    moment_quadrature(p, lit::<T>(2.0) * p.alpha() - p.beta(), tol)
}

/// `M₂` by direct quadrature; converges for `β ∈ (1−α, 1+α)`.
pub fn m2_quadrature<T: Real>(p: &MLParams<T>, tol: T) -> Result<QuadOutcome<T>> {
    let (alpha, beta) = (p.alpha(), p.beta());
    if !(beta > T::one() - alpha) {
        return Err(MlError::ParameterDomain {
            name: "beta",
            value: to_f64(beta),
            bound: format!("(1-alpha, 1+alpha) = ({}, {})", to_f64(T::one() - alpha), to_f64(T::one() + alpha)),
        });
    }
    moment_quadrature(p, alpha - beta, tol)
}
