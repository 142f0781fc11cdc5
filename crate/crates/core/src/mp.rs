//! Multiprecision series for `E_{α,β}(z)` in double-precision parameters.
//!
//! For `z` far out on the negative axis (or anywhere outside the wedge) the
//! terms of the power series grow to `e^{|z|^{1/α}}` before they cancel down
//! to a result of size `1/|z|`, so the double-precision sum is useless there.
//! This module repeats the sum with enough bits to absorb the cancellation.
//!
//! When `α` is a rational `p/q` with a small denominator (within a few ulps),
//! `1/Γ(kα+β)` follows from `1/Γ((k−q)α+β)` by `p` divisions by short exact
//! numbers, and only `q` gamma values have to be computed in full precision.
//! Other `α` fall back to one multiprecision gamma per term.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex;

use crate::error::{MlError, Result};
use crate::numerics::{ln_gamma, real_gamma, MLParams};
use crate::series::{scaled_argument, scaled_series};

const RM: RoundingMode = RoundingMode::ToEven;
/// Precision used for short exact quantities such as `qβ + rp + jq`.
const SHORT: usize = 192;
/// Bits kept beyond the estimated cancellation.
const GUARD: usize = 96;
const MAX_Q: u64 = 64;
const MAX_BITS: usize = 1 << 16;
const MAX_TERMS: usize = 2_000_000;

/// Value of a multiprecision series summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpOutcome {
    pub value: Complex<f64>,
    pub terms_used: usize,
    pub precision_bits: usize,
}

/// `t^{β−1}E_{α,β}(λt^α)`: the double-precision series when its rounding
/// bound allows, the multiprecision series otherwise.
pub fn robust_scaled_series(t: f64, p: &MLParams<f64>, tol: f64) -> Result<Complex<f64>> {
    match scaled_series(t, p, tol) {
        Err(MlError::Cancellation { .. }) => {}
        other => return other.map(|o| o.value),
    }
    let z = scaled_argument(t, p);
    let out = mp_ml_series(z, p.alpha(), p.beta())?;
    let mut value = out.value * t.powf(p.beta() - 1.0);
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(MlError::Overflow);
    }
    if p.is_lambda_real() {
        value.im = 0.0;
    }
    Ok(value)
}

/// `E_{α,β}(z)` summed in multiprecision and rounded to double.
///
/// `z`, `α` and `β` are taken as the exact binary values they hold, except
/// that `α` within four ulps of a fraction `p/q` with `q ≤ 64` is replaced by
/// that fraction.
pub fn mp_ml_series(z: Complex<f64>, alpha: f64, beta: f64) -> Result<MpOutcome> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(MlError::ParameterDomain {
            name: "alpha",
            value: alpha,
            bound: "(0, ∞)".into(),
        });
    }
    if !(beta > 2f64.powi(-100) && beta < 1e6) {
        return Err(MlError::ParameterDomain {
            name: "beta",
            value: beta,
            bound: "[2^-100, 1e6)".into(),
        });
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlError::Overflow);
    }
    let z_abs = z.norm();
    if z_abs == 0.0 {
        return Ok(MpOutcome {
            value: Complex::new(real_gamma(beta)?.recip(), 0.0),
            terms_used: 1,
            precision_bits: 53,
        });
    }

    let profile = TermProfile::scan(z_abs, alpha, beta)?;
    let peak_bits = (profile.peak_ln / std::f64::consts::LN_2).max(0.0).ceil() as usize;
    let mut bits = round_bits(peak_bits + GUARD);
    let mut cc = Consts::new().map_err(|_| MlError::Domain("multiprecision setup failed".into()))?;
    for _ in 0..4 {
        let (sum, terms) = match snap_rational(alpha) {
            Some((p, q)) => sum_rational(z, p, q, beta, bits, &profile, &mut cc)?,
            None => sum_general(z, alpha, beta, bits, &profile, &mut cc)?,
        };
        let value = Complex::new(to_f64(&sum.re), to_f64(&sum.im));
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(MlError::Overflow);
        }
        let magnitude = value.norm();
        // bits of the result that survived the cancellation
        let lost = if magnitude > 0.0 {
            (profile.peak_ln - magnitude.ln()) / std::f64::consts::LN_2
        } else {
            f64::INFINITY
        };
        if (bits as f64) - lost >= 64.0 {
            return Ok(MpOutcome {
                value,
                terms_used: terms,
                precision_bits: bits,
            });
        }
        let next = if lost.is_finite() { lost.ceil() as usize + GUARD } else { 2 * bits };
        let next = round_bits(next.max(bits + 128));
        if next > MAX_BITS {
            break;
        }
        bits = next;
    }
    Err(MlError::Cancellation {
        bound: f64::INFINITY,
        requested: 2f64.powi(-53),
    })
}

fn round_bits(b: usize) -> usize {
    b.div_ceil(128) * 128
}

/// Double-precision picture of the term magnitudes `|z|^k/Γ(kα+β)`.
struct TermProfile {
    ln_z: f64,
    alpha: f64,
    beta: f64,
    peak_ln: f64,
    peak_k: usize,
}

impl TermProfile {
    fn scan(z_abs: f64, alpha: f64, beta: f64) -> Result<Self> {
        let ln_z = z_abs.ln();
        let mut peak_ln = -ln_gamma(beta)?;
        let mut peak_k = 0;
        let mut k = 0usize;
        loop {
            k += 1;
            let l = k as f64 * ln_z - ln_gamma(k as f64 * alpha + beta)?;
            if l > peak_ln {
                peak_ln = l;
                peak_k = k;
            }
            if k > peak_k + 8 && l < peak_ln - 50.0 {
                break;
            }
            if k > MAX_TERMS {
                return Err(MlError::Domain("series too long for the multiprecision oracle".into()));
            }
        }
        Ok(Self {
            ln_z,
            alpha,
            beta,
            peak_ln,
            peak_k,
        })
    }

    fn ln_term(&self, k: usize) -> f64 {
        k as f64 * self.ln_z - ln_gamma(k as f64 * self.alpha + self.beta).unwrap_or(f64::INFINITY)
    }

    /// The sum has settled once the terms are past the peak and small against
    /// both the running sum and the working precision.
    fn settled(&self, k: usize, sum: &CBig, bits: usize) -> bool {
        if k <= self.peak_k + 2 {
            return false;
        }
        let l = self.ln_term(k);
        let ratio = (self.ln_term(k + 1) - l).exp();
        if ratio >= 1.0 {
            return false;
        }
        // the term ratio decreases in k, so the tail is geometric-bounded
        let l = l + (ratio / (1.0 - ratio)).ln().max(0.0);
        let s = ln_abs(&sum.re).max(ln_abs(&sum.im));
        let floor = self.peak_ln - (bits as f64 - 8.0) * std::f64::consts::LN_2;
        let wanted = if s.is_finite() { s - 70.0 * std::f64::consts::LN_2 } else { floor };
        l < wanted.max(floor)
    }
}

/// `p/q` with `q ≤ 64` when `α` lies within four ulps of it.
fn snap_rational(alpha: f64) -> Option<(u64, u64)> {
    for q in 1..=MAX_Q {
        let p = (alpha * q as f64).round();
        if p < 1.0 {
            continue;
        }
        if (alpha - p / q as f64).abs() <= 4.0 * f64::EPSILON * alpha {
            return Some((p as u64, q));
        }
    }
    None
}

#[derive(Clone)]
struct CBig {
    re: BigFloat,
    im: BigFloat,
}

impl CBig {
    fn zero(bits: usize) -> Self {
        Self {
            re: BigFloat::from_f64(0.0, bits),
            im: BigFloat::from_f64(0.0, bits),
        }
    }

    fn from_c64(z: Complex<f64>, bits: usize) -> Self {
        Self {
            re: BigFloat::from_f64(z.re, bits),
            im: BigFloat::from_f64(z.im, bits),
        }
    }

    fn add(&self, o: &CBig, bits: usize) -> CBig {
        CBig {
            re: self.re.add(&o.re, bits, RM),
            im: self.im.add(&o.im, bits, RM),
        }
    }

    fn mul(&self, o: &CBig, bits: usize) -> CBig {
        let rr = self.re.mul(&o.re, bits, RM);
        let ii = self.im.mul(&o.im, bits, RM);
        let ri = self.re.mul(&o.im, bits, RM);
        let ir = self.im.mul(&o.re, bits, RM);
        CBig {
            re: rr.sub(&ii, bits, RM),
            im: ri.add(&ir, bits, RM),
        }
    }

    fn scale(&self, s: &BigFloat, bits: usize) -> CBig {
        CBig {
            re: self.re.mul(s, bits, RM),
            im: self.im.mul(s, bits, RM),
        }
    }

    fn div_real(&self, s: &BigFloat, bits: usize) -> CBig {
        CBig {
            re: self.re.div(s, bits, RM),
            im: self.im.div(s, bits, RM),
        }
    }

    fn is_nan(&self) -> bool {
        self.re.is_nan() || self.im.is_nan()
    }
}

/// Rounds a multiprecision number to the nearest double (up to one ulp).
fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, sign, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let n = words.len();
    let top = words[n - 1] as f64;
    let next = if n > 1 { words[n - 2] as f64 } else { 0.0 };
    // mantissa in [0.5, 1) times 2^exponent
    let frac = (top + next * 2f64.powi(-64)) * 2f64.powi(-64);
    let mut value = frac;
    let mut e = exponent as i64;
    while e > 0 {
        let step = e.min(1000);
        value *= 2f64.powi(step as i32);
        e -= step;
        if value.is_infinite() {
            break;
        }
    }
    while e < 0 {
        let step = (-e).min(1000);
        value *= 2f64.powi(-(step as i32));
        e += step;
        if value == 0.0 {
            break;
        }
    }
    match sign {
        Sign::Pos => value,
        Sign::Neg => -value,
    }
}

/// `ln|x|` without leaving the exponent range of the multiprecision type.
fn ln_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _, _, exponent, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = words[words.len() - 1] as f64 * 2f64.powi(-64);
    top.ln() + exponent as f64 * std::f64::consts::LN_2
}

fn short_int(n: u64) -> BigFloat {
    BigFloat::from_u64(n, 64)
}

/// `Γ(B/q)` for an exactly representable short numerator `B > 0`.
///
/// Uses `Γ(x) = T^x e^{−T} Σ_{n≥0} T^n / (x(x+1)…(x+n)) + Γ(x, T)` with an
/// integer `T` large enough that the upper incomplete gamma is below the
/// working precision. Every step of the sum multiplies or divides by a short
/// number, which keeps it cheap at thousands of bits.
fn mp_gamma(b: &BigFloat, q: u64, x_f64: f64, bits: usize, cc: &mut Consts) -> BigFloat {
    let work = bits + 32;
    let ln2 = std::f64::consts::LN_2;
    let target = (work as f64 + 16.0) * ln2;
    let t = (target + (x_f64 - 1.0).max(0.0) * (2.0 * target + x_f64).ln() + 8.0).ceil() as u64;
    let tq = short_int(t * q);
    let qb = short_int(q);
    let step = short_int(q);

    let mut denom = b.clone();
    let mut term = qb.div(&denom, work, RM);
    let mut sum = term.clone();
    let mut n = 0u64;
    loop {
        n += 1;
        denom = denom.add(&step, SHORT, RM);
        term = term.mul(&tq, work, RM).div(&denom, work, RM);
        sum = sum.add(&term, work, RM);
        if n > t {
            let (Some(et), Some(es)) = (term.exponent(), sum.exponent()) else {
                break;
            };
            if (es as i64 - et as i64) > work as i64 + 8 {
                break;
            }
        }
    }
    // T^x e^{−T} = exp(x ln T − T)
    let ln_t = BigFloat::from_u64(t, 64).ln(work, RM, cc);
    let x_ln_t = ln_t.mul(b, work, RM).div(&qb, work, RM);
    let expo = x_ln_t.sub(&BigFloat::from_u64(t, 64), work, RM);
    let pre = expo.exp(work, RM, cc);
    pre.mul(&sum, work, RM)
}

type GammaKey = (u64, u64, u64, usize);

fn base_cache() -> &'static Mutex<HashMap<GammaKey, Vec<BigFloat>>> {
    static CACHE: OnceLock<Mutex<HashMap<GammaKey, Vec<BigFloat>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Numerators `B_r = qβ + rp` and the values `1/Γ(B_r/q)` for `r < q`.
fn base_values(p: u64, q: u64, beta: f64, bits: usize, cc: &mut Consts) -> (Vec<BigFloat>, Vec<BigFloat>) {
    let qb = BigFloat::from_f64(beta, SHORT).mul(&short_int(q), SHORT, RM);
    let numerators: Vec<BigFloat> = (0..q)
        .map(|r| qb.add(&short_int(r * p), SHORT, RM))
        .collect();
    let key = (p, q, beta.to_bits(), bits);
    if let Some(found) = base_cache().lock().ok().and_then(|m| m.get(&key).cloned()) {
        return (numerators, found);
    }
    let inv: Vec<BigFloat> = numerators
        .iter()
        .enumerate()
        .map(|(r, b)| {
            let x = beta + r as f64 * p as f64 / q as f64;
            let g = mp_gamma(b, q, x, bits, cc);
            BigFloat::from_u64(1, 64).div(&g, bits + 32, RM)
        })
        .collect();
    if let Ok(mut m) = base_cache().lock() {
        m.insert(key, inv.clone());
    }
    (numerators, inv)
}

fn sum_rational(
    z: Complex<f64>,
    p: u64,
    q: u64,
    beta: f64,
    bits: usize,
    profile: &TermProfile,
    cc: &mut Consts,
) -> Result<(CBig, usize)> {
    let work = bits + 32;
    let (numerators, inv_gamma) = base_values(p, q, beta, bits, cc);
    let zc = CBig::from_c64(z, 64);
    // exact z^q: 53-bit components, so 64q + 64 bits always suffice
    let exact = 64 * q as usize + 64;
    let mut zq = CBig::from_c64(Complex::new(1.0, 0.0), 64);
    for _ in 0..q {
        zq = zq.mul(&zc, exact);
    }
    let qf = short_int(q);
    let step = short_int(q);

    // current term per residue class, with the running numerator of x + j
    let mut terms: Vec<CBig> = Vec::with_capacity(q as usize);
    let mut powk = CBig::from_c64(Complex::new(1.0, 0.0), 64);
    for g in inv_gamma.iter() {
        terms.push(powk.scale(g, work));
        powk = powk.mul(&zc, work);
    }
    let mut next_num: Vec<BigFloat> = numerators.clone();

    let mut sum = CBig::zero(work);
    let mut k = 0usize;
    loop {
        let r = k % q as usize;
        sum = sum.add(&terms[r], work);
        if profile.settled(k, &sum, bits) {
            break;
        }
        if k > MAX_TERMS {
            return Err(MlError::Domain("series too long for the multiprecision oracle".into()));
        }
        // advance class r by q steps: multiply by z^q / ((x)(x+1)…(x+p−1))
        let mut t = terms[r].mul(&zq, work);
        for _ in 0..p {
            t = t.scale(&qf, work).div_real(&next_num[r], work);
            next_num[r] = next_num[r].add(&step, SHORT, RM);
        }
        terms[r] = t;
        k += 1;
    }
    if sum.is_nan() {
        return Err(MlError::Overflow);
    }
    Ok((sum, k + 1))
}

fn sum_general(
    z: Complex<f64>,
    alpha: f64,
    beta: f64,
    bits: usize,
    profile: &TermProfile,
    cc: &mut Consts,
) -> Result<(CBig, usize)> {
    let work = bits + 32;
    let zc = CBig::from_c64(z, 64);
    let a = BigFloat::from_f64(alpha, SHORT);
    let b = BigFloat::from_f64(beta, SHORT);
    let mut powk = CBig::from_c64(Complex::new(1.0, 0.0), 64);
    let mut sum = CBig::zero(work);
    let mut k = 0usize;
    loop {
        let x = a.mul(&short_int(k as u64), SHORT, RM).add(&b, SHORT, RM);
        let g = mp_gamma(&x, 1, k as f64 * alpha + beta, bits, cc);
        sum = sum.add(&powk.div_real(&g, work), work);
        if profile.settled(k, &sum, bits) {
            break;
        }
        if k > 20_000 {
            return Err(MlError::Domain(
                "irrational order needs too many multiprecision gamma values".into(),
            ));
        }
        powk = powk.mul(&zc, work);
        k += 1;
    }
    if sum.is_nan() {
        return Err(MlError::Overflow);
    }
    Ok((sum, k + 1))
}
