//! The string of saddles `w_k ≈ log((2k−1)π/a) + i(2k−1)π` of `ψ` in the
//! upper half-plane, and the range `[k*, m]` of saddles that contribute.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cnum::ComplexVal;
use crate::direct::SeriesPoint;
use crate::error::{Error, Result};
use crate::phase::{g, psi, psi_prime, singularity_distance};

/// Default Newton tolerance on `|ψ'(w)|`.
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 60;

/// Half-width of the accepted band around `Im w = (2k−1)π`: saddle `k` lies
/// in the strip between the singularities `2π(k−1)i` and `2πki`.
pub const BAND_HALF_WIDTH: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Saddle {
    pub k: usize,
    pub w: ComplexVal,
    /// `|ψ'(w)|` at the returned point.
    pub residual: f64,
    pub psi_at: ComplexVal,
    pub psi_dd: ComplexVal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeMethod {
    Heuristic,
    Traced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContributoryRange {
    pub k_star: usize,
    pub m: usize,
    pub method: RangeMethod,
}

impl ContributoryRange {
    pub fn new(k_star: usize, m: usize, method: RangeMethod) -> Result<Self> {
        if k_star < 1 || k_star > m {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k* <= m, got k* = {k_star}, m = {m}"
            )));
        }
        Ok(Self { k_star, m, method })
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.k_star..=self.m
    }
}

/// Low-lying approximation `log((2k−1)π/a) + i(2k−1)π`.
pub fn initial_guess(k: usize, a: f64) -> ComplexVal {
    let y = (2 * k - 1) as f64 * PI;
    ComplexVal::new((y / a).ln(), y)
}

fn psi_second(w: ComplexVal, p: &SeriesPoint) -> ComplexVal {
    let gw = g(w);
    -(gw + gw * gw) - ComplexVal::new(0.0, p.a) / (w * w)
}

fn in_band(k: usize, w: ComplexVal) -> bool {
    (w.im - (2 * k - 1) as f64 * PI).abs() <= BAND_HALF_WIDTH
}

/// Newton from `start`; `Ok(w)` once `|ψ'| ≤ tol`.
fn newton<F, D>(f: F, df: D, start: ComplexVal, tol: f64, max_iter: usize) -> Option<ComplexVal>
where
    F: Fn(ComplexVal) -> ComplexVal,
    D: Fn(ComplexVal) -> ComplexVal,
{
    let mut w = start;
    let mut r = f(w).norm();
    for _ in 0..max_iter {
        if r <= tol {
            return Some(w);
        }
        let step = f(w) / df(w);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        // full step, halved up to 10 times while the residual grows
        let mut lambda = 1.0;
        let mut next = w - step;
        let mut rn = f(next).norm();
        for _ in 0..10 {
            if rn.is_finite() && rn < r && singularity_distance(next) > 1e-10 {
                break;
            }
            lambda *= 0.5;
            next = w - step * lambda;
            rn = f(next).norm();
        }
        if !rn.is_finite() {
            return None;
        }
        w = next;
        r = rn;
    }
    (r <= tol).then_some(w)
}

fn finish(k: usize, w: ComplexVal, p: &SeriesPoint) -> Result<Saddle> {
    Ok(Saddle {
        k,
        w,
        residual: psi_prime(w, p).norm(),
        psi_at: psi(w, p)?,
        psi_dd: psi_second(w, p),
    })
}

fn require_n(p: &SeriesPoint) -> Result<()> {
    if p.n == 0 {
        return Err(Error::InvalidParameter("saddle analysis needs n >= 1".into()));
    }
    Ok(())
}

/// Solves `ψ'(w) = 0` for the `k`-th saddle by Newton's method.
///
/// The first attempt starts at [`initial_guess`]. Past the turn of the string
/// (`Im w ≳ t`) that guess overshoots in `Re w`, so a short list of alternative
/// starting abscissae on the same horizontal line is tried before giving up.
/// Roots outside the index band of `k` are rejected.
pub fn refine_saddle(k: usize, p: &SeriesPoint, tol: f64, max_iter: usize) -> Result<Saddle> {
    require_n(p)?;
    if k == 0 {
        return Err(Error::InvalidParameter("saddle index starts at 1".into()));
    }
    if !(tol >= 1e-14) || max_iter < 8 {
        return Err(Error::InvalidParameter(format!(
            "need tol >= 1e-14 and max_iter >= 8 (got {tol:e}, {max_iter})"
        )));
    }
    let guess = initial_guess(k, p.a);
    let f = |w: ComplexVal| psi_prime(w, p);
    let df = |w: ComplexVal| psi_second(w, p);

    let mut band_miss = None;
    let x_offsets = [0.0, -1.0, 1.0, -2.0, -3.0, 2.0, -4.0, -5.0, 3.0, -6.0];
    let y_offsets = [0.0, 0.5 * PI, -0.5 * PI];
    let starts = y_offsets.iter().flat_map(|&dy| {
        x_offsets
            .iter()
            .map(move |&dx| ComplexVal::new(guess.re + dx, guess.im + dy))
    });
    for start in starts {
        if let Some(w) = newton(f, df, start, tol, max_iter) {
            if in_band(k, w) && w.im > 0.0 {
                return finish(k, w, p);
            }
            band_miss.get_or_insert(w);
        }
    }
    match band_miss {
        Some(w) => Err(Error::IndexBand { k, im: w.im }),
        None => Err(Error::NoConvergence(format!(
            "saddle k = {k} at n = {}, a = {}",
            p.n, p.a
        ))),
    }
}

/// Saddles `k = 1..=k_max`, in order.
pub fn saddle_string(p: &SeriesPoint, k_max: usize) -> Result<Vec<Saddle>> {
    (1..=k_max)
        .map(|k| refine_saddle(k, p, DEFAULT_TOL, DEFAULT_MAX_ITER))
        .collect()
}

/// Saddle of the limiting phase `Log(1 − e^{−w}) + i·a·Log w` (the `n → ∞` form
/// without the `−w/n` term), refined from `start`.
pub fn limit_saddle(k: usize, a: f64, start: ComplexVal) -> Result<ComplexVal> {
    let f = |w: ComplexVal| g(w) + ComplexVal::new(0.0, a) / w;
    let df = |w: ComplexVal| {
        let gw = g(w);
        -(gw + gw * gw) - ComplexVal::new(0.0, a) / (w * w)
    };
    match newton(f, df, start, DEFAULT_TOL, DEFAULT_MAX_ITER) {
        Some(w) if in_band(k, w) => Ok(w),
        Some(w) => Err(Error::IndexBand { k, im: w.im }),
        None => Err(Error::NoConvergence(format!("limit saddle k = {k}, a = {a}"))),
    }
}

/// `round(t/2π + ½)` with ties rounded up.
pub fn heuristic_m(p: &SeriesPoint) -> usize {
    let x = p.t() / (2.0 * PI) + 0.5;
    // ties sit exactly on half-integers for a = πN; absorb rounding noise
    ((x + 0.5 + 1e-9).floor() as usize).max(1)
}

/// `max(1, ⌊(a/π + 1)/2⌋)`.
pub fn heuristic_k_star(p: &SeriesPoint) -> usize {
    (((p.a / PI + 1.0) / 2.0 + 1e-9).floor() as usize).max(1)
}

/// The contributory index range, either from the closed-form estimates or
/// from descent-path classification (authoritative).
pub fn contributory_range(p: &SeriesPoint, mode: RangeMethod) -> Result<ContributoryRange> {
    require_n(p)?;
    match mode {
        RangeMethod::Heuristic => {
            let m = heuristic_m(p);
            ContributoryRange::new(heuristic_k_star(p).min(m), m, RangeMethod::Heuristic)
        }
        RangeMethod::Traced => {
            let k_max = heuristic_m(p) + 4;
            Ok(crate::tracer::classify(p, k_max)?.range)
        }
    }
}
