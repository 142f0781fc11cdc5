//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex value with principal-branch semantics for powers and logarithms.
pub type ComplexScalar<T> = Complex<T>;

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub(crate) fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let one = T::one();
    let two = one + one;
    let half = lit::<T>(0.5);
    // fmod is exact, so r carries no rounding from the reduction.
    let mut r = x % two;
    if r > one {
        r = r - two;
    } else if r < -one {
        r = r + two;
    }
    if r == T::zero() || r.abs() == one {
        return T::zero();
    }
    if r > half {
        r = one - r;
    } else if r < -half {
        r = -one - r;
    }
    (r * T::PI()).sin()
}

/// `cos(πx)` with exact zeros at the half-integers.
pub fn cos_pi<T: Real>(x: T) -> T {
    let one = T::one();
    let two = one + one;
    let mut r = x.abs() % two;
    if r > one {
        r = two - r;
    }
    if r < lit(0.25) {
        (r * T::PI()).cos()
    } else {
        sin_pi(lit::<T>(0.5) - r)
    }
}

/// `e^{iπx}` built from [`sin_pi`] and [`cos_pi`].
pub fn unit_pi<T: Real>(x: T) -> Complex<T> {
    Complex::new(cos_pi(x), sin_pi(x))
}

/// Neumaier-compensated accumulator for complex sums.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum<T> {
    sum: Complex<T>,
    comp: Complex<T>,
}

impl<T: Real> CompensatedSum<T> {
    pub(crate) fn new() -> Self {
        Self {
            sum: Complex::new(T::zero(), T::zero()),
            comp: Complex::new(T::zero(), T::zero()),
        }
    }

    pub(crate) fn add(&mut self, x: Complex<T>) {
        let (re, cre) = two_sum(self.sum.re, x.re);
        let (im, cim) = two_sum(self.sum.im, x.im);
        self.sum = Complex::new(re, im);
        self.comp = Complex::new(self.comp.re + cre, self.comp.im + cim);
    }

    pub(crate) fn value(&self) -> Complex<T> {
        self.sum + self.comp
    }
}

#[inline]
fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let c = if a.abs() >= b.abs() {
        (a - s) + b
    } else {
        (b - s) + a
    };
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_exact_zeros() {
        for k in -6..=6 {
            assert_eq!(sin_pi(k as f64), 0.0);
            assert_eq!(cos_pi(k as f64 + 0.5), 0.0);
        }
        assert_eq!(sin_pi(0.5_f64), 1.0);
        assert_eq!(sin_pi(-0.5_f64), -1.0);
        assert_eq!(cos_pi(1.0_f64), -1.0);
    }

    #[test]
    fn sin_pi_matches_libm_away_from_zeros() {
        for i in 0..400 {
            let x = -7.3 + 0.0371 * i as f64;
            assert!((sin_pi(x) - (std::f64::consts::PI * x).sin()).abs() < 1e-14);
            assert!((cos_pi(x) - (std::f64::consts::PI * x).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(Complex::new(1e16, 0.0));
        for _ in 0..10 {
            acc.add(Complex::new(1.0, 0.0));
        }
        acc.add(Complex::new(-1e16, 0.0));
        assert_eq!(acc.value().re, 10.0);
    }
}
