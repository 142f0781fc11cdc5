//! Large-`t` expansions of `E_α(λt^α)` and `t^{α−1}E_{α,α}(λt^α)` and
//! empirical constants for the uniform bounds on what is left after the
//! residue term.
//!
//! Near the origin `f_{α,1}(v) = Σ_{k≥1} a_k v^{kα−1}` with
//! `a_k = −sin(kπα)/(πλ^k)`, and `f_{α,α}(v) = Σ b_k v^{kα}` with
//! `b_k = −a_k/λ`. Term-by-term Laplace transformation gives
//! `Σ a_kΓ(kα)t^{−kα}` and `Σ b_kΓ(kα+1)t^{−kα−1}`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{MlError, Result};
use crate::kernel::{density, residue_term};
use crate::numerics::{real_gamma, MLParams};
use crate::quadrature::{integrate_semi_infinite, split_point, DecayHint, QuadOutcome};
use crate::representation::{integral_part, EvalOutcome, Method};
use crate::scalar::{from_usize, lit, sin_pi, to_f64, ComplexScalar, Real};

/// Default and maximal truncation order.
pub const MAX_ORDER: usize = 20;

/// Which of the two expansions applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Expansion {
    /// `β = 1`, coefficients `a_k`, terms `Γ(kα)t^{−kα}`.
    BetaOne,
    /// `β = α`, coefficients `b_k`, terms `Γ(kα+1)t^{−kα−1}`.
    BetaAlpha,
}

impl Expansion {
    /// The expansion matching the β of `p`, if any.
    pub fn for_params<T: Real>(p: &MLParams<T>) -> Result<Self> {
        if p.beta() == T::one() {
            Ok(Expansion::BetaOne)
        } else if p.beta() == p.alpha() {
            Ok(Expansion::BetaAlpha)
        } else {
            Err(MlError::ParameterDomain {
                name: "beta",
                value: to_f64(p.beta()),
                bound: "{1, alpha} for the large-t expansion".into(),
            })
        }
    }

    /// Power of `t` that makes the leading term constant.
    fn weight<T: Real>(self, alpha: T) -> T {
        match self {
            Expansion::BetaOne => alpha,
            Expansion::BetaAlpha => alpha + T::one(),
        }
    }
}

fn check_order(k: usize) -> Result<()> {
    if k < 1 {
        return Err(MlError::ParameterDomain {
            name: "k",
            value: k as f64,
            bound: "{1, 2, ...}".into(),
        });
    }
    Ok(())
}

/// `a_k = −sin(kπα)/(πλ^k)`.
pub fn watson_coeff_a<T: Real>(k: usize, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    check_order(k)?;
    let s = sin_pi(from_usize::<T>(k) * p.alpha());
    let mut a = -p.lambda().powi(k as i32).inv() * (s / T::PI());
    if p.is_lambda_real() {
        a.im = T::zero();
    }
    Ok(a)
}

/// `b_k = −a_k/λ`.
pub fn watson_coeff_b<T: Real>(k: usize, p: &MLParams<T>) -> Result<ComplexScalar<T>> {
    Ok(-watson_coeff_a(k, p)? / p.lambda())
}

/// Coefficients `a_1..a_K` and `b_1..b_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticModel<T> {
    pub coeffs_a: Vec<ComplexScalar<T>>,
    pub coeffs_b: Vec<ComplexScalar<T>>,
    pub order: usize,
}

impl<T: Real> AsymptoticModel<T> {
    pub fn new(p: &MLParams<T>, order: usize) -> Result<Self> {
        check_order(order)?;
        let coeffs_a = (1..=order)
            .map(|k| watson_coeff_a(k, p))
            .collect::<Result<Vec<_>>>()?;
        let coeffs_b = coeffs_a.iter().map(|a| -*a / p.lambda()).collect();
        Ok(Self {
            coeffs_a,
            coeffs_b,
            order,
        })
    }

    /// The `k`-th term (1-based) of the expansion at `t`.
    fn term(&self, k: usize, t: T, alpha: T, which: Expansion) -> Result<ComplexScalar<T>> {
        let ka = from_usize::<T>(k) * alpha;
        Ok(match which {
            Expansion::BetaOne => self.coeffs_a[k - 1] * (real_gamma(ka)? * t.powf(-ka)),
            Expansion::BetaAlpha => {
                self.coeffs_b[k - 1] * (real_gamma(ka + T::one())? * t.powf(-ka - T::one()))
            }
        })
    }
}

/// Partial sum of the expansion through order `K`, without the residue.
pub fn expand_tail<T: Real>(t: T, p: &MLParams<T>, order: usize) -> Result<ComplexScalar<T>> {
    let which = Expansion::for_params(p)?;
    let model = AsymptoticModel::new(p, order)?;
    let mut sum = Complex::new(T::zero(), T::zero());
    for k in 1..=order {
        sum += model.term(k, t, p.alpha(), which)?;
    }
    Ok(sum)
}

/// `∫₀^∞ e^{−vt}(f(v) − Σ_{k≤K} c_k v^{kα+e}) dv`, which equals the exact
/// value minus residue minus [`expand_tail`].
///
/// Computed as one integral, so the difference of two nearly equal numbers
/// never appears at large `t`.
pub fn tail_remainder<T: Real>(t: T, p: &MLParams<T>, order: usize, tol: T) -> Result<QuadOutcome<T>> {
    let which = Expansion::for_params(p)?;
    let model = AsymptoticModel::new(p, order)?;
    let alpha = p.alpha();
    let (coeffs, shift) = match which {
        Expansion::BetaOne => (&model.coeffs_a, -T::one()),
        Expansion::BetaAlpha => (&model.coeffs_b, T::zero()),
    };
    let integrand = |v: T| {
        let mut f = density(v, p)?;
        for (k, c) in coeffs.iter().enumerate() {
            f -= *c * v.powf(from_usize::<T>(k + 1) * alpha + shift);
        }
        Ok(f * (-v * t).exp())
    };
    let origin = from_usize::<T>(order + 1) * alpha + shift;
    let hint = DecayHint::exponential(t, origin).with_split(split_point(p).min(T::one() / t));
    let mut q = integrate_semi_infinite(integrand, hint, tol)?;
    if p.is_lambda_real() {
        q.value.im = T::zero();
    }
    Ok(q)
}

/// Residue plus the expansion truncated before its smallest term.
pub fn eval_asymptotic<T: Real>(t: T, p: &MLParams<T>, _tol: T) -> Result<EvalOutcome<T>> {
    if !(t > T::zero()) || !t.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "t",
            value: to_f64(t),
            bound: "(0, ∞)".into(),
        });
    }
    let which = Expansion::for_params(p)?;
    let model = AsymptoticModel::new(p, MAX_ORDER + 1)?;
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut magnitude = T::zero();
    let mut smallest = T::infinity();
    let mut omitted = T::zero();
    for k in 1..=MAX_ORDER + 1 {
        let term = model.term(k, t, p.alpha(), which)?;
        let size = term.norm();
        // the terms start to grow again: stop before the smallest one
        if k > MAX_ORDER || size > smallest {
            omitted = size;
            break;
        }
        sum += term;
        magnitude += size;
        if size != T::zero() {
            smallest = size;
        }
    }
    let error = omitted + lit::<T>(4.0) * T::epsilon() * magnitude;
    let value = residue_term(t, p)? + sum;
    Ok(EvalOutcome {
        value,
        method: Method::Asymptotic,
        region: p.region(),
        error_estimate: error,
    })
}

/// Empirical constant of a uniform bound `|value − residue| ≤ C/t^w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEstimate<T> {
    /// `max(grid_sup, tail_limit)`.
    pub constant: T,
    /// First grid point after which the weighted defect never increases.
    pub t_star: T,
    pub grid_size: usize,
    /// Largest weighted defect on the grid (from `t_star` on for `BetaAlpha`).
    pub grid_sup: T,
    /// `lim_{t→∞}` of the weighted defect: `|a_1Γ(α)|` or `|b_1Γ(α+1)|`.
    pub tail_limit: T,
}

/// `n` points spaced evenly in `log t` from `lo` to `hi`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let steps = from_usize::<T>(n.max(2) - 1);
    let mut grid: Vec<T> = (0..n)
        .map(|i| (a + (b - a) * from_usize::<T>(i) / steps).exp())
        .collect();
    // pin the ends against rounding in exp(ln x)
    if let Some(first) = grid.first_mut() {
        *first = lo;
    }
    if n > 1 {
        grid[n - 1] = hi;
    }
    grid
}

/// Weighted defect `t^w·|∫₀^∞ e^{−vt}f(v) dv|` on every grid point.
pub fn weighted_defects<T: Real>(p: &MLParams<T>, grid: &[T], tol: T) -> Result<Vec<T>> {
    let which = Expansion::for_params(p)?;
    let w = which.weight(p.alpha());
    grid.iter()
        .map(|&t| Ok(integral_part(t, p, tol)?.value.norm() * t.powf(w)))
        .collect()
}

/// Estimates the bound constant over `grid` (ascending).
///
/// Since the weighted defect tends to the leading coefficient as `t → ∞`,
/// the supremum over `(0, ∞)` is at least that limit, which is folded into
/// `constant`. A weighted defect still rising above the limit at the end of
/// the grid is reported as a bound violation.
pub fn estimate_bound<T: Real>(p: &MLParams<T>, grid: &[T], tol: T) -> Result<BoundEstimate<T>> {
    let which = Expansion::for_params(p)?;
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[0] < w[1])) || !(grid[0] > T::zero()) {
        return Err(MlError::Domain("bound grid must be positive and strictly increasing".into()));
    }
    let alpha = p.alpha();
    let tail_limit = match which {
        Expansion::BetaOne => (watson_coeff_a(1, p)? * real_gamma(alpha)?).norm(),
        Expansion::BetaAlpha => (watson_coeff_b(1, p)? * real_gamma(alpha + T::one())?).norm(),
    };
    let w = weighted_defects(p, grid, tol)?;
    let n = w.len();
    // values closer than the quadrature accuracy count as level
    let slack = T::one() + lit::<T>(1e3) * tol;
    let mut start = n - 1;
    while start > 0 && w[start] <= w[start - 1] * slack {
        start -= 1;
    }
    let from = match which {
        Expansion::BetaOne => 0,
        Expansion::BetaAlpha => start,
    };
    let grid_sup = w[from..].iter().fold(T::zero(), |m, &x| m.max(x));
    let rising = w[n - 1] > w[n - 2] * slack;
    if rising && w[n - 1] > tail_limit * lit(1.01) {
        return Err(MlError::BoundViolation { last: to_f64(w[n - 1]) });
    }
    Ok(BoundEstimate {
        constant: grid_sup.max(tail_limit),
        t_star: grid[start],
        grid_size: n,
        grid_sup,
        tail_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(alpha: f64, beta: f64, re: f64, im: f64) -> MLParams<f64> {
        MLParams::new(alpha, beta, Complex::new(re, im)).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        let a = watson_coeff_a(1, &params(0.5, 1.0, -1.0, 0.0)).unwrap();
        assert!((a.re - 1.0 / PI).abs() < 1e-16);
        let a = watson_coeff_a(2, &params(0.5, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(a.re, 0.0);
        assert!(watson_coeff_a(0, &params(0.5, 1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn coefficients_match_reflection_formula() {
        let p = params(0.37, 1.0, 0.8, 0.3);
        for k in 1..=12 {
            let ka = k as f64 * 0.37;
            let a = watson_coeff_a(k, &p).unwrap();
            // 1/Γ(1−x) = Γ(x)·sin(πx)/π, valid also for 1−x < 0
            let inv_gamma_reflect = real_gamma(ka).unwrap() * (PI * ka).sin() / PI;
            let other = -p.lambda().powi(k as i32).inv() * inv_gamma_reflect;
            assert!((a * real_gamma(ka).unwrap() - other).norm() < 1e-13 * other.norm().max(1.0));
        }
    }

    #[test]
    fn coefficients_match_small_v_density() {
        // f_{α,1}(v) − Σ_{k≤3} a_k v^{kα−1} = O(v^{4α−1})
        let p = params(0.6, 1.0, 1.3, -0.2);
        let model = AsymptoticModel::new(&p, 3).unwrap();
        for v in [1e-4, 1e-5, 1e-6] {
            let mut r = density(v, &p).unwrap();
            for (k, a) in model.coeffs_a.iter().enumerate() {
                r -= a * v.powf((k + 1) as f64 * 0.6 - 1.0);
            }
            let scale = v.powf(4.0 * 0.6 - 1.0);
            assert!(r.norm() < 2.0 * scale, "v={v}");
        }
    }

    #[test]
    fn b_is_minus_a_over_lambda() {
        let p = params(0.45, 1.0, -0.7, 0.9);
        let m = AsymptoticModel::new(&p, 6).unwrap();
        for k in 0..6 {
            assert!((m.coeffs_b[k] + m.coeffs_a[k] / p.lambda()).norm() < 1e-15);
        }
        let real = AsymptoticModel::new(&params(0.45, 1.0, 2.0, 0.0), 6).unwrap();
        assert!(real.coeffs_a.iter().all(|a| a.im == 0.0));
    }

    #[test]
    fn tail_examples() {
        let p = params(0.5, 1.0, -1.0, 0.0);
        let one = expand_tail(100.0, &p, 1).unwrap();
        assert!((one.re - PI.sqrt() / PI / 10.0).abs() < 1e-15);
        assert!((one.re - 0.056_418_958_4).abs() < 1e-10);
        // e^{100}·erfc(10)
        let truth = 0.056_140_992_743_822_59;
        let three = expand_tail(100.0, &p, 3).unwrap();
        assert!((three.re - truth).abs() < 1e-4);
        assert!((three.re - truth).abs() < (one.re - truth).abs());
    }

    #[test]
    fn remainder_is_exact_minus_partial_sum() {
        let p = params(0.7, 1.0, 1.0, 0.0);
        for t in [3.0, 10.0] {
            let full = integral_part(t, &p, 1e-13).unwrap().value;
            let partial = expand_tail(t, &p, 3).unwrap();
            let rem = tail_remainder(t, &p, 3, 1e-13).unwrap().value;
            assert!((full - partial - rem).norm() < 1e-11, "t={t}");
        }
        let p = params(0.7, 0.7, -1.0, 0.0);
        let full = integral_part(4.0, &p, 1e-13).unwrap().value;
        let rem = tail_remainder(4.0, &p, 2, 1e-13).unwrap().value;
        assert!((full - expand_tail(4.0, &p, 2).unwrap() - rem).norm() < 1e-11);
    }

    #[test]
    fn remainder_has_the_next_order() {
        for (alpha, lambda) in [(0.5, -1.0), (0.7, 1.0)] {
            let p = params(alpha, 1.0, lambda, 0.0);
            let mut ratios = Vec::new();
            for t in [10.0, 20.0, 40.0, 80.0, 160.0, 320.0, 640.0] {
                let r = tail_remainder(t, &p, 3, 1e-14).unwrap().value.norm();
                ratios.push(r * f64::powf(t, 4.0 * alpha));
            }
            for w in ratios.windows(2) {
                let f = w[1] / w[0];
                assert!(f < 3.0 && f > 1.0 / 3.0, "{alpha} {lambda}: {ratios:?}");
            }
        }
    }

    #[test]
    fn asymptotic_evaluation() {
        let p = params(0.5, 1.0, -1.0, 0.0);
        let v = eval_asymptotic(400.0, &p, 1e-10).unwrap();
        assert_eq!(v.method, Method::Asymptotic);
        // e^{400}erfc(20)
        let truth = 0.028_174_348_741_051_32;
        assert!((v.value.re - truth).abs() < 1e-8);
        assert!((v.value.re - truth).abs() <= 10.0 * v.error_estimate);
    }

    #[test]
    fn bound_examples() {
        let grid = log_grid(1e-2, 1e3, 100);
        let b = estimate_bound(&params(0.5, 1.0, -1.0, 0.0), &grid, 1e-11).unwrap();
        assert!(b.constant.is_finite());
        assert!(b.constant >= 1.0 / PI.sqrt() - 1e-15);
        let b2 = estimate_bound(&params(0.5, 1.0, -1.0, 0.0), &log_grid(1e-2, 2e3, 107), 1e-11).unwrap();
        assert!((b2.constant / b.constant - 1.0).abs() < 0.01);

        let b = estimate_bound(&params(0.5, 1.0, 1.0, 0.0), &grid, 1e-11).unwrap();
        assert!(b.constant.is_finite() && b.constant > 0.0);

        let b = estimate_bound(&params(0.7, 0.7, 2.0, 0.0), &grid, 1e-11).unwrap();
        assert!(b.constant.is_finite() && b.t_star > 0.0);
    }

    #[test]
    fn small_t_weighted_defect_vanishes() {
        let p = params(0.6, 1.0, 1.5, 0.0);
        let w = weighted_defects(&p, &[1e-8, 1e-6, 1e-4], 1e-12).unwrap();
        assert!(w[0] < w[1] && w[1] < w[2]);
        // defect → |1 − 1/α| at t = 0
        assert!((w[0] / 1e-8f64.powf(0.6) - (1.0 / 0.6 - 1.0)).abs() < 1e-3);
    }

    #[test]
    fn other_beta_is_rejected() {
        assert!(expand_tail(10.0, &params(0.5, 0.8, 1.0, 0.0), 3).is_err());
    }
}
