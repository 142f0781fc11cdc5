//! Shared scalar numerics: gamma, principal-branch powers, and the parameter
//! triple `(α, β, λ)` with its region classification.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{MlError, Result};
use crate::scalar::{cos_pi, lit, sin_pi, to_f64, ComplexScalar, Real};

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Real>(xm1: T) -> T {
    let mut acc = lit::<T>(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += lit::<T>(c) / (xm1 + lit(i as f64));
    }
    acc
}

/// Γ(x) for real `x > 0`.
///
/// Arguments are reduced into `[1, 2)` by exact shifts (`x - k` is exact for
/// integer `k < x`) and the Lanczos sum is applied there, which keeps the
/// relative error near a few ulps up to the overflow threshold.
pub fn real_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "gamma argument",
            value: to_f64(x),
            bound: "(0, ∞)".into(),
        });
    }
    let one = T::one();
    let two = one + one;
    if x.fract() == T::zero() && x <= lit(171.0) {
        // (n−1)! by exact products while they stay exact
        let mut acc = one;
        let mut k = two;
        while k < x {
            acc *= k;
            k += one;
        }
        return Ok(acc);
    }
    let mut x = x;
    let mut scale = one;
    let mut divisor = one;
    while x < one {
        divisor *= x;
        x += one;
    }
    while x >= two {
        x -= one;
        scale *= x;
        if !scale.is_finite() {
            return Err(MlError::Overflow);
        }
    }
    let xm1 = x - one;
    let t = xm1 + lit(LANCZOS_G + 0.5);
    let core = (T::TAU()).sqrt() * t.powf(xm1 + lit(0.5)) * (-t).exp() * lanczos_sum(xm1);
    Ok(scale * core / divisor)
}

/// ln Γ(x) for real `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(MlError::ParameterDomain {
            name: "log-gamma argument",
            value: to_f64(x),
            bound: "(0, ∞)".into(),
        });
    }
    let one = T::one();
    if x < one {
        return Ok(ln_gamma(x + one)? - x.ln());
    }
    let xm1 = x - one;
    let t = xm1 + lit(LANCZOS_G + 0.5);
    let half = lit::<T>(0.5);
    Ok(half * T::TAU().ln() + (xm1 + half) * t.ln() - t + lanczos_sum(xm1).ln())
}

/// Argument of `z` on the principal branch `(-π, π]`.
///
/// A negative real number always gets `+π`, including `-1 - 0i`.
pub fn principal_arg<T: Real>(z: ComplexScalar<T>) -> T {
    if z.im == T::zero() {
        if z.re < T::zero() {
            T::PI()
        } else {
            T::zero()
        }
    } else {
        z.im.atan2(z.re)
    }
}

/// `arg(z)/π`, exact on the coordinate axes.
fn arg_over_pi<T: Real>(z: ComplexScalar<T>) -> T {
    let zero = T::zero();
    if z.im == zero {
        if z.re < zero {
            T::one()
        } else {
            zero
        }
    } else if z.re == zero {
        lit(if z.im > zero { 0.5 } else { -0.5 })
    } else {
        z.im.atan2(z.re) / T::PI()
    }
}

/// `base^exponent` on the principal branch: `exp(exponent·(ln|base| + i·arg base))`.
pub fn principal_power<T: Real>(base: ComplexScalar<T>, exponent: T) -> Result<ComplexScalar<T>> {
    let zero = T::zero();
    if base.re == zero && base.im == zero {
        return if exponent > zero {
            Ok(Complex::new(zero, zero))
        } else {
            Err(MlError::Domain(format!(
                "0 raised to the non-positive power {}",
                to_f64(exponent)
            )))
        };
    }
    if base.im == zero && base.re > zero {
        return Ok(Complex::new(base.re.powf(exponent), zero));
    }
    let modulus = base.norm().powf(exponent);
    let phase = exponent * arg_over_pi(base);
    Ok(Complex::new(modulus * cos_pi(phase), modulus * sin_pi(phase)))
}

/// Principal logarithm `ln|z| + i·arg z`.
pub fn principal_ln<T: Real>(z: ComplexScalar<T>) -> ComplexScalar<T> {
    Complex::new(z.norm().ln(), principal_arg(z))
}

/// Position of λ relative to the wedge `|arg λ| < πα`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionClass {
    /// `|arg λ| < πα`: the pole `λ^{1/α}` lies on the principal sheet.
    ResiduePresent,
    /// Real negative λ: no pole, zero residue.
    ResidueAbsentNegativeReal,
    /// `πα ≤ |arg λ| < π` off the real axis. The zero-residue form is used
    /// here as a numerically validated extension.
    ResidueAbsentExtended,
    /// λ = 0: the pole merges with the branch point.
    OutOfScope,
}

impl RegionClass {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionClass::ResiduePresent => "ResiduePresent",
            RegionClass::ResidueAbsentNegativeReal => "ResidueAbsentNegativeReal",
            RegionClass::ResidueAbsentExtended => "ResidueAbsentExtended",
            RegionClass::OutOfScope => "OutOfScope",
        }
    }

    pub fn has_residue(self) -> bool {
        self == RegionClass::ResiduePresent
    }
}

impl std::fmt::Display for RegionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Validated parameter triple `(α, β, λ)` with `α ∈ (0,1)` and `β ∈ (0, 1+α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams<T> {
    alpha: T,
    beta: T,
    lambda: ComplexScalar<T>,
}

impl<T: Real> MLParams<T> {
    pub fn new(alpha: T, beta: T, lambda: ComplexScalar<T>) -> Result<Self> {
        let zero = T::zero();
        let one = T::one();
        if !(alpha > zero && alpha < one) {
            return Err(MlError::ParameterDomain {
                name: "alpha",
                value: to_f64(alpha),
                bound: "(0,1)".into(),
            });
        }
        if !(beta > zero && beta < one + alpha) {
            return Err(MlError::ParameterDomain {
                name: "beta",
                value: to_f64(beta),
                bound: format!("(0, 1+alpha) = (0, {})", to_f64(one + alpha)),
            });
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(MlError::ParameterDomain {
                name: "lambda",
                value: to_f64(lambda.norm()),
                bound: "the finite complex plane".into(),
            });
        }
        Ok(Self { alpha, beta, lambda })
    }

    /// Shorthand for a real λ.
    pub fn real(alpha: T, beta: T, lambda: T) -> Result<Self> {
        Self::new(alpha, beta, Complex::new(lambda, T::zero()))
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn lambda(&self) -> ComplexScalar<T> {
        self.lambda
    }

    /// Same α and λ with a different β.
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        Self::new(self.alpha, beta, self.lambda)
    }

    pub fn is_lambda_real(&self) -> bool {
        self.lambda.im == T::zero()
    }

    /// `πα − |arg λ|`: positive inside the wedge, zero on its boundary.
    pub fn pole_margin(&self) -> T {
        T::PI() * self.alpha - principal_arg(self.lambda).abs()
    }

    /// Region of λ for this α.
    pub fn region(&self) -> RegionClass {
        classify_region(self)
    }

    /// `|λ|^{1/α}`, the modulus of the pole location.
    pub fn pole_modulus(&self) -> T {
        self.lambda.norm().powf(T::one() / self.alpha)
    }

    /// `sin(πα)`.
    pub(crate) fn sin_pi_alpha(&self) -> T {
        sin_pi(self.alpha)
    }
}

/// Classifies λ against the wedge `|arg λ| < πα`.
pub fn classify_region<T: Real>(p: &MLParams<T>) -> RegionClass {
    let lambda = p.lambda();
    let zero = T::zero();
    if lambda.re == zero && lambda.im == zero {
        return RegionClass::OutOfScope;
    }
    if lambda.im == zero && lambda.re < zero {
        return RegionClass::ResidueAbsentNegativeReal;
    }
    if principal_arg(lambda).abs() < T::PI() * p.alpha() {
        RegionClass::ResiduePresent
    } else {
        RegionClass::ResidueAbsentExtended
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn region_examples() {
        let p = MLParams::real(0.5, 1.0, 1.0).unwrap();
        assert_eq!(classify_region(&p), RegionClass::ResiduePresent);
        let p = MLParams::real(0.5, 1.0, -1.0).unwrap();
        assert_eq!(classify_region(&p), RegionClass::ResidueAbsentNegativeReal);
        let p = MLParams::new(0.5, 1.0, c(0.0, 1.0)).unwrap();
        assert_eq!(classify_region(&p), RegionClass::ResidueAbsentExtended);
        let p = MLParams::real(0.5, 1.0, 0.0).unwrap();
        assert_eq!(classify_region(&p), RegionClass::OutOfScope);
        // negative zero imaginary part is still the negative real axis
        let p = MLParams::new(0.5, 1.0, c(-2.0, -0.0)).unwrap();
        assert_eq!(classify_region(&p), RegionClass::ResidueAbsentNegativeReal);
    }

    #[test]
    fn parameter_validation_names_the_bound() {
        let err = MLParams::real(1.2, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("alpha must lie in (0,1)"));
        let err = MLParams::real(0.5, 1.5, 1.0).unwrap_err();
        assert!(err.to_string().starts_with("beta must lie in"));
        assert!(MLParams::real(0.0, 0.5, 1.0).is_err());
        assert!(MLParams::real(0.5, 0.0, 1.0).is_err());
        assert!(MLParams::new(0.5, 1.0, c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn principal_power_examples() {
        let r = principal_power(c(4.0, 0.0), 2.0).unwrap();
        assert_eq!(r, c(16.0, 0.0));
        let r = principal_power(c(0.0, 1.0), 2.0).unwrap();
        assert_eq!(r, c(-1.0, 0.0));
        let r = principal_power(c(-1.0, 0.0), 2.0).unwrap();
        assert_eq!(r, c(1.0, 0.0));
        // −1 carries arg +π, so its square root is +i
        let r = principal_power(c(-1.0, -0.0), 0.5).unwrap();
        assert!((r - c(0.0, 1.0)).norm() < 1e-16);
    }

    #[test]
    fn principal_power_at_zero() {
        assert_eq!(principal_power(c(0.0, 0.0), 0.5).unwrap(), c(0.0, 0.0));
        assert!(principal_power(c(0.0, 0.0), 0.0).is_err());
        assert!(principal_power(c(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(real_gamma(1.0_f64).unwrap(), 1.0);
        let half = real_gamma(0.5_f64).unwrap();
        assert!((half - 1.772_453_850_905_516).abs() < 4e-15, "{half}");
        assert!((real_gamma(5.0_f64).unwrap() - 24.0).abs() < 24.0 * 1e-15);
        assert!(real_gamma(0.0_f64).is_err());
        assert!(real_gamma(-1.5_f64).is_err());
        assert!(matches!(real_gamma(172.0_f64), Err(MlError::Overflow)));
    }

    #[test]
    fn gamma_matches_factorials() {
        let mut fact = 1.0_f64;
        for n in 1..170 {
            let g = real_gamma((n + 1) as f64).unwrap();
            fact *= n as f64;
            assert!((g / fact - 1.0).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gamma_reference_values() {
        // high-precision reference values
        let cases: [(f64, f64); 7] = [
            (1e-3, 999.423_772_484_595_5),
            (0.1, 9.513_507_698_668_732),
            (0.3, 2.991_568_987_687_591),
            (1.3, 0.897_470_696_306_277_2),
            (2.5, 1.329_340_388_179_137),
            (10.1, 454_760.751_441_585_6),
            (150.25, 1.332_150_776_195_163_5e261),
        ];
        for (x, want) in cases {
            let got = real_gamma(x).unwrap();
            assert!((got / want - 1.0).abs() < 1e-13, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_runs_in_single_precision() {
        let g = real_gamma(4.5_f32).unwrap();
        assert!((g - 11.631_728).abs() < 1e-4);
        let p = principal_power(Complex::new(0.0_f32, 1.0), 2.0).unwrap();
        assert_eq!(p, Complex::new(-1.0, 0.0));
    }

    #[test]
    fn ln_gamma_consistent_with_gamma() {
        for i in 0..400 {
            let x = 1e-3 + i as f64 * 0.42;
            let direct = real_gamma(x).unwrap();
            let via_log = ln_gamma(x).unwrap().exp();
            assert!((via_log / direct - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    proptest! {
        #[test]
        fn power_one_is_identity(re in -50.0..50.0_f64, im in -50.0..50.0_f64) {
            prop_assume!(re != 0.0 || im != 0.0);
            let b = c(re, im);
            let r = principal_power(b, 1.0).unwrap();
            prop_assert!((r - b).norm() <= 4.0 * f64::EPSILON * b.norm());
        }

        #[test]
        fn power_exponents_add_inside_the_cut(
            modulus in 0.1..10.0_f64,
            theta in -3.0..3.0_f64,
            m in -1.5..1.5_f64,
            n in -1.5..1.5_f64,
        ) {
            prop_assume!((m * theta).abs() < 3.1 && (n * theta).abs() < 3.1);
            prop_assume!(((m + n) * theta).abs() < 3.1);
            let b = Complex::from_polar(modulus, theta);
            let lhs = principal_power(b, m).unwrap() * principal_power(b, n).unwrap();
            let rhs = principal_power(b, m + n).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0));
        }

        #[test]
        fn gamma_recurrence(x in 0.1..80.0_f64) {
            let lhs = real_gamma(x + 1.0).unwrap();
            let rhs = x * real_gamma(x).unwrap();
            prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        }

        #[test]
        fn classification_partitions_the_plane(
            alpha in 0.01..0.99_f64,
            modulus in 1e-3..1e3_f64,
            theta in -3.14159..3.14159_f64,
        ) {
            let p = MLParams::new(alpha, 1.0, Complex::from_polar(modulus, theta)).unwrap();
            let region = classify_region(&p);
            let in_wedge = principal_arg(p.lambda()).abs() < std::f64::consts::PI * alpha;
            let negative_real = p.lambda().im == 0.0 && p.lambda().re < 0.0;
            match region {
                RegionClass::ResiduePresent => prop_assert!(in_wedge),
                RegionClass::ResidueAbsentNegativeReal => prop_assert!(negative_real),
                RegionClass::ResidueAbsentExtended => prop_assert!(!in_wedge && !negative_real),
                RegionClass::OutOfScope => prop_assert!(false),
            }
        }
    }
}
