//! Reference evaluation of the series terms `A(n, s)`.
//!
//! Two independent routes: the finite alternating binomial sum (the primary
//! oracle, optionally in configurable precision) and quadrature of the
//! Laplace-type integral. [`zeta_series`] sums the terms.

use std::f64::consts::{FRAC_PI_2, LN_2};

use astro_float::{BigFloat, Consts, RoundingMode};
use serde::{Deserialize, Serialize};

use crate::cnum::{expm1, log_gamma, ComplexVal};
use crate::error::{Error, Result};

/// Largest `n` for which the binomial weights stay inside `f64` range.
pub const MAX_DIRECT_N: u32 = 1000;

/// Cancellation ratio above which the `f64` binomial sum is redone in multiprecision.
const MAX_F64_CONDITION: f64 = 1e3;

const PREFACTOR_EPS: f64 = 1e-12;

/// Evaluation parameters `(n, a, σ)` with `s = σ + i·a·n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: u32,
    pub a: f64,
    pub sigma: f64,
}

impl SeriesPoint {
    pub fn new(n: u32, a: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidParameter("sigma must be finite".into()));
        }
        let p = Self { n, a, sigma };
        check_prefactor(p.s())?;
        Ok(p)
    }

    pub fn t(&self) -> f64 {
        self.a * self.n as f64
    }

    pub fn s(&self) -> ComplexVal {
        ComplexVal::new(self.sigma, self.t())
    }
}

/// `1 − 2^{1−s}`, rejecting values within `1e−12` of zero (this covers `s = 1`).
pub fn check_prefactor(s: ComplexVal) -> Result<ComplexVal> {
    let one = ComplexVal::new(1.0, 0.0);
    let d = one - ((one - s) * LN_2).exp();
    if d.norm() < PREFACTOR_EPS {
        return Err(Error::PrefactorSingular(d.norm()));
    }
    Ok(d)
}

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    sum: ComplexVal,
    comp: ComplexVal,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl ComplexSum {
    pub fn add(&mut self, z: ComplexVal) {
        neumaier(&mut self.sum.re, &mut self.comp.re, z.re);
        neumaier(&mut self.sum.im, &mut self.comp.im, z.im);
    }

    pub fn total(&self) -> ComplexVal {
        self.sum + self.comp
    }
}

/// `A(n, s)` at the point `p`; see [`a_direct_at`].
pub fn a_direct(p: &SeriesPoint, precision_digits: Option<u32>) -> Result<ComplexVal> {
    a_direct_at(p.n, p.s(), precision_digits)
}

/// `A(n, s) = 2^{−n−1}/(1 − 2^{1−s}) · Σ_k C(n,k) (−1)^k (k+1)^{−s}` for arbitrary `s`.
///
/// With `precision_digits = None` the sum runs in `f64` with compensated
/// summation, and is redone in multiprecision when the alternating sum
/// cancels so badly that `f64` terms cannot deliver about 13 digits (small
/// `|A|`, e.g. `a ≲ 0.5` at `n ≳ 40`). Otherwise every operation runs with
/// at least `precision_digits` decimal digits. The result is rounded to `f64`.
pub fn a_direct_at(n: u32, s: ComplexVal, precision_digits: Option<u32>) -> Result<ComplexVal> {
    let denom = check_prefactor(s)?;
    match precision_digits {
        None => {
            if n > MAX_DIRECT_N {
                return Err(Error::OutOfRange(format!(
                    "n = {n} exceeds {MAX_DIRECT_N} for machine-precision binomial weights"
                )));
            }
            let (sum, cond) = binomial_sum_f64(n, s);
            if cond > MAX_F64_CONDITION {
                // two guard digits past f64 on top of the digits lost to cancellation
                let digits = 19 + cond.log10().ceil() as u32;
                return binomial_sum_mp(n, s, digits);
            }
            Ok(sum / denom)
        }
        Some(d) if d < 16 => Err(Error::InvalidParameter(format!(
            "precision must be at least 16 digits, got {d}"
        ))),
        Some(d) => binomial_sum_mp(n, s, d),
    }
}

/// `2^{−n−1} Σ_k C(n,k)(−1)^k (k+1)^{−s}` without the `1 − 2^{1−s}` factor,
/// with the condition number `Σ|term| / |Σ term|`.
fn binomial_sum_f64(n: u32, s: ComplexVal) -> (ComplexVal, f64) {
    let scale = 2f64.powi(-(n as i32) - 1);
    let mut binom = 1.0_f64;
    let mut acc = ComplexSum::default();
    let mut abs = 0.0;
    for k in 0..=n {
        let lk = ((k + 1) as f64).ln();
        let term = (-s * lk).exp() * (binom * scale);
        acc.add(if k % 2 == 0 { term } else { -term });
        abs += term.norm();
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    let total = acc.total();
    (total, abs / total.norm())
}

struct Mp {
    prec: usize,
    rm: RoundingMode,
    cc: Consts,
}

impl Mp {
    fn f(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.prec)
    }
    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.prec, self.rm)
    }
    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.prec, self.rm)
    }
    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.prec, self.rm)
    }
    fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.prec, self.rm)
    }
    /// `x^{−s}` for real `x > 0`, returned as (re, im).
    fn real_pow_neg(&mut self, x: &BigFloat, s: ComplexVal) -> (BigFloat, BigFloat) {
        let lx = x.ln(self.prec, self.rm, &mut self.cc);
        let mag = self.mul(&lx, &self.f(-s.re)).exp(self.prec, self.rm, &mut self.cc);
        let ang = self.mul(&lx, &self.f(s.im));
        let c = ang.cos(self.prec, self.rm, &mut self.cc);
        let sn = ang.sin(self.prec, self.rm, &mut self.cc);
        (self.mul(&mag, &c), self.mul(&mag, &sn).neg())
    }
}

fn big_to_f64(x: &BigFloat) -> f64 {
    // Decimal round-trip; 25 significant digits are more than f64 needs.
    let text = format!("{x}");
    text.parse::<f64>()
        .unwrap_or_else(|_| if x.is_zero() { 0.0 } else { f64::NAN })
}

fn binomial_sum_mp(n: u32, s: ComplexVal, digits: u32) -> Result<ComplexVal> {
    // decimal digits to bits, plus guard bits for the cancellation in the sum
    let prec = ((digits as f64) * std::f64::consts::LOG2_10).ceil() as usize + n as usize + 64;
    let cc = Consts::new().map_err(|e| Error::NoConvergence(format!("multiprecision setup: {e:?}")))?;
    let mut mp = Mp {
        prec,
        rm: RoundingMode::ToEven,
        cc,
    };

    let mut binom = BigFloat::from_u64(1, prec);
    let mut re = BigFloat::from_u64(0, prec);
    let mut im = BigFloat::from_u64(0, prec);
    for k in 0..=n as u64 {
        let base = BigFloat::from_u64(k + 1, prec);
        let (pr, pi) = mp.real_pow_neg(&base, s);
        let (tr, ti) = (mp.mul(&binom, &pr), mp.mul(&binom, &pi));
        if k % 2 == 0 {
            re = mp.add(&re, &tr);
            im = mp.add(&im, &ti);
        } else {
            re = mp.sub(&re, &tr);
            im = mp.sub(&im, &ti);
        }
        let num = BigFloat::from_u64(n as u64 - k, prec);
        let den = BigFloat::from_u64(k + 1, prec);
        binom = mp.div(&mp.mul(&binom, &num), &den);
    }
    // 2^{1−s} = 2 · 2^{−s}
    let two = BigFloat::from_u64(2, prec);
    let (qr, qi) = mp.real_pow_neg(&two, s);
    let dr = mp.sub(&BigFloat::from_u64(1, prec), &mp.mul(&two, &qr));
    let di = mp.mul(&two, &qi).neg();
    // (re + i im) / (dr + i di)
    let norm = mp.add(&mp.mul(&dr, &dr), &mp.mul(&di, &di));
    let qre = mp.div(&mp.add(&mp.mul(&re, &dr), &mp.mul(&im, &di)), &norm);
    let qim = mp.div(&mp.sub(&mp.mul(&im, &dr), &mp.mul(&re, &di)), &norm);
    let scale = BigFloat::from_u64(1, prec).div(&two.powi(n as usize + 1, prec, mp.rm), prec, mp.rm);
    let out = ComplexVal::new(big_to_f64(&mp.mul(&qre, &scale)), big_to_f64(&mp.mul(&qim, &scale)));
    if !out.re.is_finite() || !out.im.is_finite() {
        return Err(Error::NoConvergence("multiprecision result not representable".into()));
    }
    Ok(out)
}

/// Upper bound `2^{−n−1} Σ C(n,k)(k+1)^{−σ} / |1 − 2^{1−s}|` on `|A(n, s)|`.
pub fn modulus_bound(p: &SeriesPoint) -> Result<f64> {
    let denom = check_prefactor(p.s())?;
    let scale = 2f64.powi(-(p.n as i32) - 1);
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=p.n {
        acc += binom * ((k + 1) as f64).powf(-p.sigma);
        binom = binom * (p.n - k) as f64 / (k + 1) as f64;
    }
    Ok(acc * scale / denom.norm())
}

// ---------------------------------------------------------------------------
// Quadrature

/// Largest `t = a·n` accepted by [`a_quadrature`].
pub const QUADRATURE_MAX_T: f64 = 60.0;

const QUAD_REL_TOL: f64 = 1e-12;
const QUAD_MAX_SPLITS: usize = 200_000;

// Gauss–Kronrod 7/15 nodes and weights on [−1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> ComplexVal>(f: &F, lo: f64, hi: f64) -> (ComplexVal, f64) {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// The integrand `e^{−w}(1 − e^{−w})^n w^s` on the ray `w = e^{u + iφ}` (with `dw = w du`).
fn ray_integrand(n: u32, s: ComplexVal, phi: f64) -> impl Fn(f64) -> ComplexVal {
    move |u: f64| {
        let logw = ComplexVal::new(u, phi);
        let w = logw.exp();
        let one_minus = -expm1(-w);
        let log_val = -w + one_minus.ln() * n as f64 + s * logw;
        log_val.exp()
    }
}

/// `A(n, s)` from the integral representation, by adaptive Gauss–Kronrod quadrature.
///
/// The integrand `e^{−w}(1 − e^{−w})^n w^{s−1}` is entire apart from the branch
/// point at the origin, so the path `[0, ∞)` is rotated onto the ray
/// `arg w = π/2 − 1/t`. On the real axis the integral is `O(e^{−πt/2})`
/// times the integrand scale and the cancellation exhausts `f64` well before
/// `t = 60`; on the rotated ray the loss is about `e·t` in relative terms.
/// The integration variable is `u = log |w|`, where the `w^{it}` oscillation
/// has constant frequency `t`.
pub fn a_quadrature(p: &SeriesPoint) -> Result<ComplexVal> {
    let t = p.t();
    if !(p.sigma > 0.0) {
        return Err(Error::OutOfRange(format!(
            "quadrature requires sigma > 0, got {}",
            p.sigma
        )));
    }
    if t > QUADRATURE_MAX_T {
        return Err(Error::OutOfRange(format!(
            "quadrature requires t <= {QUADRATURE_MAX_T}, got {t}"
        )));
    }
    let s = p.s();
    let denom = check_prefactor(s)?;
    let phi = if t > 0.0 { (FRAC_PI_2 - 1.0 / t).max(0.0) } else { 0.0 };
    let decay = phi.cos();

    // upper cut: e^{−r cos φ} r^{σ} below e^{−80} (relative to the O(1) scale)
    let mut r_max: f64 = 50.0;
    for _ in 0..20 {
        r_max = (80.0 + (p.sigma.max(0.0) + 1.0) * r_max.ln().max(0.0)) / decay;
    }
    let u_max = r_max.ln();
    // lower cut: |integrand| ~ r^{n+σ} below e^{−80}
    let u_min = (-80.0 / (p.n as f64 + p.sigma)).max(-600.0);

    let f = ray_integrand(p.n, s, phi);
    // initial panels resolve the oscillation of w^{it} and of e^{−w}
    let mut panels = Vec::new();
    let mut u = u_min;
    while u < u_max {
        let r = u.exp();
        let width = 1.0 / (1.0 + t + (p.n as f64 + 1.0) * r * phi.sin());
        let next = (u + width.min(0.5)).min(u_max);
        panels.push((u, next));
        u = next;
    }

    let mut work: Vec<(f64, f64, ComplexVal, f64)> = panels
        .into_iter()
        .map(|(a, b)| {
            let (v, e) = gk15(&f, a, b);
            (a, b, v, e)
        })
        .collect();
    let mut splits = 0;
    loop {
        let mut total = ComplexSum::default();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, seg) in work.iter().enumerate() {
            total.add(seg.2);
            err += seg.3;
            if seg.3 > work[worst].3 {
                worst = i;
            }
        }
        let value = total.total();
        if err <= QUAD_REL_TOL * value.norm() || err < 1e-300 {
            let log_pref = -((p.n + 1) as f64) * LN_2 - log_gamma(s)?;
            return Ok(value * log_pref.exp() / denom);
        }
        if splits >= QUAD_MAX_SPLITS {
            return Err(Error::NoConvergence(format!(
                "quadrature budget exhausted (error estimate {err:e}, value {:e})",
                value.norm()
            )));
        }
        // bisect the worst few panels per sweep
        work.sort_by(|x, y| y.3.total_cmp(&x.3));
        let batch = (work.len() / 8).max(1);
        let mut fresh = Vec::with_capacity(2 * batch);
        for (a, b, _, _) in work.drain(..batch) {
            let mid = 0.5 * (a + b);
            let (v1, e1) = gk15(&f, a, mid);
            let (v2, e2) = gk15(&f, mid, b);
            fresh.push((a, mid, v1, e1));
            fresh.push((mid, b, v2, e2));
        }
        work.extend(fresh);
        splits += batch;
    }
}

/// Partial sum `Σ_{n=0}^{n_max} A(n, s)` of the globally convergent series.
///
/// For fixed `s` the terms decay like `2^{−n}` up to slowly varying factors,
/// so the truncation error is roughly `2^{−n_max}`.
pub fn zeta_series(s: ComplexVal, n_max: u32) -> Result<ComplexVal> {
    let denom = check_prefactor(s)?;
    if n_max > MAX_DIRECT_N {
        return Err(Error::OutOfRange(format!("n_max = {n_max} exceeds {MAX_DIRECT_N}")));
    }
    let mut acc = ComplexSum::default();
    for n in 0..=n_max {
        acc.add(binomial_sum_f64(n, s).0);
    }
    Ok(acc.total() / denom)
}
