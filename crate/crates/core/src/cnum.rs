//! Complex special functions and log-space complex arithmetic.
//!
//! Every logarithm and power here uses the principal branch, `arg ∈ (−π, π]`.
//! Winding across sheets is tracked by callers (see [`crate::tracer`]).

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexVal = Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// A complex number stored as `exp(log_mod + i·phase)`.
///
/// `log_mod` may sit far outside the range of `f64::exp`; the phase is kept
/// unreduced so that accumulated winding survives until [`LogComplex::to_complex`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mod: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mod: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mod: 0.0,
        phase: 0.0,
    };

    pub fn new(log_mod: f64, phase: f64) -> Self {
        Self { log_mod, phase }
    }

    /// Wraps a complex logarithm `z`, i.e. represents `exp(z)`.
    pub fn from_log(z: ComplexVal) -> Self {
        Self {
            log_mod: z.re,
            phase: z.im,
        }
    }

    pub fn from_complex(z: ComplexVal) -> Self {
        if z == ComplexVal::new(0.0, 0.0) {
            return Self::ZERO;
        }
        Self {
            log_mod: z.norm().ln(),
            phase: z.arg(),
        }
    }

    /// The logarithm `log_mod + i·phase` (not reduced to the principal sheet).
    pub fn ln(self) -> ComplexVal {
        ComplexVal::new(self.log_mod, self.phase)
    }

    pub fn is_zero(self) -> bool {
        self.log_mod == f64::NEG_INFINITY
    }

    pub fn modulus(self) -> f64 {
        self.log_mod.exp()
    }

    pub fn to_complex(self) -> ComplexVal {
        if self.is_zero() {
            return ComplexVal::new(0.0, 0.0);
        }
        let phase = self.phase.rem_euclid(2.0 * PI);
        ComplexVal::from_polar(self.log_mod.exp(), phase)
    }

    pub fn mul(self, other: LogComplex) -> Self {
        Self {
            log_mod: self.log_mod + other.log_mod,
            phase: self.phase + other.phase,
        }
    }

    pub fn div(self, other: LogComplex) -> Self {
        Self {
            log_mod: self.log_mod - other.log_mod,
            phase: self.phase - other.phase,
        }
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

/// `exp(z) − 1` without cancellation for small `|z|`.
pub fn expm1(z: ComplexVal) -> ComplexVal {
    if z.norm() < 1e-2 {
        // Taylor series to z^7; the truncation error is below 1e-19 here.
        let mut term = z;
        let mut acc = z;
        for k in 2..=7 {
            term = term * z / k as f64;
            acc += term;
        }
        acc
    } else {
        // Re part via expm1/cos so that the real-axis limit stays accurate.
        let em = z.re.exp_m1();
        let (s, c) = z.im.sin_cos();
        let cm1 = -2.0 * (0.5 * z.im).sin().powi(2);
        ComplexVal::new(em * c + cm1, (em + 1.0) * s)
    }
}

/// Principal `log(1 + z)`, accurate for small `|z|`.
pub fn ln_1p(z: ComplexVal) -> ComplexVal {
    let x = z.re;
    let y = z.im;
    if z.norm() < 0.5 {
        ComplexVal::new(0.5 * (2.0 * x + x * x + y * y).ln_1p(), y.atan2(1.0 + x))
    } else {
        (ComplexVal::new(1.0, 0.0) + z).ln()
    }
}

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn log_gamma_right(z: ComplexVal) -> ComplexVal {
    let zm = z - 1.0;
    let mut series = ComplexVal::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        series += *c / (zm + i as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    // (z − ½)·log t − t; for large |Im z| the products y·log|t| dominate, so
    // log|t| is carried to about twice f64 precision
    let (ln_hi, ln_lo) = ln_modulus_dd(t);
    let th = t.arg();
    let h = zm.re + 0.5;
    let y = zm.im;
    let re = h.mul_add(ln_hi, h.mul_add(ln_lo, -y * th)) - t.re;
    let im = y.mul_add(ln_hi - 1.0, y.mul_add(ln_lo, h * th));
    ComplexVal::new(re + LN_SQRT_2PI, im) + series.ln()
}

/// `log|t|` as an unevaluated sum `hi + lo`.
fn ln_modulus_dd(t: ComplexVal) -> (f64, f64) {
    // |t|² = r2 + r2_lo exactly (up to the final rounding of r2_lo)
    let (a2, b2) = (t.re * t.re, t.im * t.im);
    let a2_lo = t.re.mul_add(t.re, -a2);
    let b2_lo = t.im.mul_add(t.im, -b2);
    let r2 = a2 + b2;
    let bv = r2 - a2;
    let r2_lo = ((a2 - (r2 - bv)) + (b2 - bv)) + a2_lo + b2_lo;
    let hi = 0.5 * r2.ln();
    // one Newton step on exp(2·l) = |t|²
    let e = (2.0 * hi).exp();
    let lo = 0.5 * ((r2 - e) + r2_lo) / e;
    (hi, lo)
}

/// `log sin(πz)`, correct modulo `2πi`, stable for large `|Im z|`.
fn ln_sin_pi(z: ComplexVal) -> ComplexVal {
    let i = ComplexVal::i();
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        // sin(πz) = e^{−iπz}(1 − e^{2πiz}) · i/2
        let q = (2.0 * PI * i * z).exp();
        -i * PI * z + ln_1p(-q) - LN_2 + i * (PI / 2.0)
    } else {
        ln_sin_pi(z.conj()).conj()
    }
}

/// Principal branch of `log Γ(z)`.
///
/// For `Re z ≥ ½` the value is the analytic continuation from the positive
/// real axis; below that the reflection formula is used and the imaginary part
/// is determined modulo `2π`.
pub fn log_gamma(z: ComplexVal) -> Result<ComplexVal> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::GammaPole(z.re));
    }
    if z.re >= 0.5 {
        Ok(log_gamma_right(z))
    } else {
        let one = ComplexVal::new(1.0, 0.0);
        Ok(LN_PI - ln_sin_pi(z) - log_gamma_right(one - z))
    }
}

/// `w^e = exp(e · Log w)` in log-space, principal `Log`.
pub fn pow_principal(w: ComplexVal, e: ComplexVal) -> Result<LogComplex> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::ZeroBase);
    }
    Ok(LogComplex::from_log(e * w.ln()))
}

/// Exact sum of log-space terms, computed relative to the largest modulus.
pub fn scaled_sum(terms: &[LogComplex]) -> Result<LogComplex> {
    if terms.is_empty() {
        return Err(Error::EmptySum);
    }
    let peak = terms.iter().map(|t| t.log_mod).fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(LogComplex::ZERO);
    }
    let mut acc = crate::direct::ComplexSum::default();
    for t in terms {
        if t.is_zero() {
            continue;
        }
        acc.add(ComplexVal::from_polar(
            (t.log_mod - peak).exp(),
            t.phase.rem_euclid(2.0 * PI),
        ));
    }
    let rel = acc.total();
    if rel.norm() == 0.0 {
        return Ok(LogComplex::ZERO);
    }
    Ok(LogComplex::new(peak + rel.norm().ln(), rel.arg()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexVal {
        ComplexVal::new(re, im)
    }

    #[test]
    fn log_gamma_half_and_five() {
        let v = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((v.re - PI.sqrt().ln()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        let v = log_gamma(c(5.0, 0.0)).unwrap();
        assert!((v.re - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_poles() {
        assert_eq!(log_gamma(c(0.0, 0.0)), Err(Error::GammaPole(0.0)));
        assert_eq!(log_gamma(c(-3.0, 0.0)), Err(Error::GammaPole(-3.0)));
        assert!(log_gamma(c(-2.5, 0.0)).is_ok());
    }

    #[test]
    fn log_gamma_critical_line_modulus() {
        // |Γ(½ + it)| against √(2π)·e^{−πt/2}
        let t = 157.08;
        let v = log_gamma(c(0.5, t)).unwrap();
        let asym = LN_SQRT_2PI - PI * t / 2.0;
        assert!(((v.re - asym).exp() - 1.0).abs() < 5e-3);
        // exact identity |Γ(½+it)|² = π / cosh(πt)
        let exact = 0.5 * (PI.ln() - (PI * t - LN_2 + (-2.0 * PI * t).exp().ln_1p()));
        assert!((v.re - exact).abs() < 1e-11);
    }

    #[test]
    fn reflection_matches_right_half() {
        // Γ(z)Γ(1−z) = π / sin(πz) at a point where both sides are moderate.
        let z = c(0.25, 3.0);
        let lhs = log_gamma(z).unwrap() + log_gamma(c(1.0, 0.0) - z).unwrap();
        let rhs = LN_PI - (z * PI).sin().ln();
        let d = lhs - rhs;
        assert!(d.re.abs() < 1e-12);
        assert!(wrap_angle(d.im).abs() < 1e-12);
        let left = log_gamma(c(-0.3, 40.0)).unwrap();
        let via_rec = log_gamma(c(0.7, 40.0)).unwrap() - c(-0.3, 40.0).ln();
        assert!((left.re - via_rec.re).abs() < 1e-11);
        assert!(wrap_angle(left.im - via_rec.im).abs() < 1e-10);
    }

    #[test]
    fn pow_principal_basics() {
        let r = pow_principal(c(1.0, 0.0), c(-0.5, 20.0)).unwrap();
        assert_eq!((r.log_mod, r.phase), (0.0, 0.0));
        let r = pow_principal(c(0.0, 1.0), c(2.0, 0.0)).unwrap().to_complex();
        assert!((r - c(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(pow_principal(c(0.0, 0.0), c(1.0, 0.0)), Err(Error::ZeroBase));
        // value computed with mpmath at 40 digits: (2+3i)^(-1/2+20i)
        let r = pow_principal(c(2.0, 3.0), c(-0.5, 20.0)).unwrap().to_complex();
        let expect = c(1.530_864_407_199_789_1e-9, 3.882_412_877_635_244_5e-11);
        assert!((r - expect).norm() / expect.norm() < 1e-12, "{r}");
    }

    #[test]
    fn scaled_sum_cases() {
        assert_eq!(scaled_sum(&[]), Err(Error::EmptySum));
        let x = LogComplex::new(-3.0, 1.0);
        let s = scaled_sum(&[x]).unwrap();
        assert!((s.log_mod - x.log_mod).abs() < 1e-15 && (s.phase - x.phase).abs() < 1e-15);
        let s = scaled_sum(&[LogComplex::new(0.0, 0.0), LogComplex::new(0.0, PI)]).unwrap();
        assert!(s.modulus() < 1e-15);
        // far below exp's range
        let s = scaled_sum(&[LogComplex::new(-1e6, 0.0), LogComplex::new(-1e6, 0.0)]).unwrap();
        assert!((s.log_mod - (-1e6 + LN_2)).abs() < 1e-9);
    }

    #[test]
    fn expm1_and_ln1p_small() {
        let z = c(1e-5, -2e-5);
        let e = expm1(z);
        // mpmath reference
        let reference = c(9.999_849_998_166_665e-6, -2.000_019_999_966_665_8e-5);
        assert!((e - reference).norm() < 1e-20);
        let l = ln_1p(expm1(z));
        assert!((l - z).norm() < 1e-20);
    }
}
