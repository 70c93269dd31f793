//! Steepest-descent paths through the saddles.
//!
//! A path follows `dw/dτ = −conj(ψ')/|ψ'|` (unit speed, `Im ψ` fixed, `Re ψ`
//! falling at rate `|ψ'|`). After each Runge–Kutta step the point is projected
//! back onto the level set of the continued `Im ψ`. Both arguments inside `ψ`
//! (of `1 − e^{−w}` and of `w`) are unwrapped step by step, so paths can cross
//! the branch cuts `(−∞ + 2πki, 2πki]` and spiral around the origin.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cnum::{wrap_angle, ComplexVal};
use crate::direct::SeriesPoint;
use crate::error::{Error, Result};
use crate::phase::{log_one_minus_exp_neg, psi, psi_prime, singularity_distance};
use crate::saddles::{
    heuristic_m, refine_saddle, ContributoryRange, RangeMethod, Saddle, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

pub const CAPTURE_RADIUS: f64 = 0.05;
pub const SADDLE_HIT_RADIUS: f64 = 0.02;
pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_BUDGET: usize = 20_000;

const PROJECTION_TOL: f64 = 1e-10;
const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum Endpoint {
    /// Captured by the logarithmic singularity `2πk'i`.
    Singularity(i64),
    /// Left through `Re w → +∞`.
    Escape,
    /// Ran into another saddle (Stokes indicator).
    SaddleHit(usize),
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub tau: f64,
    pub w: ComplexVal,
    pub re_psi: f64,
    /// `Im ψ` continued from the saddle along the path.
    pub im_psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentPath {
    pub k: usize,
    /// Tangent angle at the saddle.
    pub direction: f64,
    pub points: Vec<PathPoint>,
    pub endpoint: Endpoint,
    /// Whole turns of `arg w` about the origin accumulated along the path.
    pub winding: i64,
    /// Sheet of `log w` on which the path ends, relative to the principal
    /// branch at the saddle. Zero for paths absorbed at the origin.
    pub sheet: i64,
}

impl DescentPath {
    /// Largest deviation of the continued `Im ψ` from its value at the saddle.
    pub fn im_psi_drift(&self) -> f64 {
        let base = self.points[0].im_psi;
        self.points.iter().map(|q| (q.im_psi - base).abs()).fold(0.0, f64::max)
    }
}

/// The two tangent angles at the saddle along which `Re ψ` decreases fastest.
pub fn descent_directions(s: &Saddle) -> Result<(f64, f64)> {
    if s.psi_dd.norm() == 0.0 {
        return Err(Error::DegenerateSaddle(None));
    }
    let theta = (PI - s.psi_dd.arg()) / 2.0;
    Ok((theta, theta + PI))
}

/// Geometry shared by all traces at one parameter point.
#[derive(Debug, Clone)]
pub struct TraceContext {
    pub saddles: Vec<Saddle>,
    pub escape_re: f64,
}

impl TraceContext {
    pub fn new(saddles: Vec<Saddle>) -> Self {
        let x_max = saddles.iter().map(|s| s.w.re).fold(f64::NEG_INFINITY, f64::max);
        Self {
            escape_re: (x_max + 10.0).max(20.0),
            saddles,
        }
    }
}

/// Continuous bookkeeping of the two arguments appearing in `ψ`.
#[derive(Debug, Clone, Copy)]
struct Branch {
    arg_factor: f64,
    arg_w: f64,
}

impl Branch {
    fn at(w: ComplexVal) -> Self {
        Self {
            arg_factor: log_one_minus_exp_neg(w).im,
            arg_w: w.arg(),
        }
    }

    fn advance(self, w: ComplexVal) -> Self {
        Self {
            arg_factor: self.arg_factor + wrap_angle(log_one_minus_exp_neg(w).im - self.arg_factor),
            arg_w: self.arg_w + wrap_angle(w.arg() - self.arg_w),
        }
    }

    /// `ψ(w)` on the sheet selected by this branch.
    fn psi(self, w: ComplexVal, p: &SeriesPoint) -> ComplexVal {
        let lf = log_one_minus_exp_neg(w).re;
        let n = p.n as f64;
        let re = lf - p.a * self.arg_w - w.re / n;
        let im = self.arg_factor + p.a * w.norm().ln() - w.im / n;
        ComplexVal::new(re, im)
    }
}

fn flow(w: ComplexVal, p: &SeriesPoint) -> ComplexVal {
    let d = psi_prime(w, p);
    -d.conj() / d.norm()
}

fn nearest_singularity(w: ComplexVal) -> i64 {
    (w.im / (2.0 * PI)).round() as i64
}

/// Traces one descent path from saddle `s`, leaving along `direction`.
pub fn trace(
    s: &Saddle,
    p: &SeriesPoint,
    direction: f64,
    step: f64,
    budget: usize,
    ctx: &TraceContext,
) -> Result<DescentPath> {
    if !(1e-4..=0.1).contains(&step) {
        return Err(Error::InvalidParameter(format!(
            "step must lie in [1e-4, 0.1], got {step}"
        )));
    }
    if budget < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "budget must be at least 1e4, got {budget}"
        )));
    }
    let k = s.k;
    let start_branch = Branch::at(s.w);
    let target = start_branch.psi(s.w, p).im;
    let mut points = vec![PathPoint {
        tau: 0.0,
        w: s.w,
        re_psi: start_branch.psi(s.w, p).re,
        im_psi: target,
    }];

    let mut w = s.w + ComplexVal::from_polar(step, direction);
    let mut branch = start_branch.advance(w);
    let mut tau = step;
    let (w2, b2) = project(w, branch, target, p, k)?;
    w = w2;
    branch = b2;
    let val = branch.psi(w, p);
    points.push(PathPoint {
        tau,
        w,
        re_psi: val.re,
        im_psi: val.im,
    });

    let others: Vec<&Saddle> = ctx.saddles.iter().filter(|o| o.k != k).collect();
    let mut endpoint = Endpoint::BudgetExhausted;
    for _ in 0..budget {
        let dist_sing = singularity_distance(w);
        if dist_sing < CAPTURE_RADIUS {
            endpoint = Endpoint::Singularity(nearest_singularity(w));
            break;
        }
        if w.re > ctx.escape_re {
            endpoint = Endpoint::Escape;
            break;
        }
        let mut dist_saddle = f64::INFINITY;
        let mut hit = None;
        for o in &others {
            let d = (o.w - w).norm();
            if d < dist_saddle {
                dist_saddle = d;
                hit = Some(o.k);
            }
        }
        if dist_saddle < SADDLE_HIT_RADIUS {
            endpoint = Endpoint::SaddleHit(hit.unwrap_or(0));
            break;
        }
        let h = step.min(0.25 * dist_sing).min(0.5 * dist_saddle).max(1e-4 * step);
        // classical RK4 on the unit-speed flow
        let k1 = flow(w, p);
        let k2 = flow(w + k1 * (0.5 * h), p);
        let k3 = flow(w + k2 * (0.5 * h), p);
        let k4 = flow(w + k3 * h, p);
        let next = w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !next.re.is_finite() || !next.im.is_finite() {
            return Err(Error::StepFailure {
                k,
                reason: "non-finite step".into(),
            });
        }
        let (pw, pb) = project(next, branch.advance(next), target, p, k)?;
        let val = pb.psi(pw, p);
        if val.re > points.last().map_or(f64::INFINITY, |q| q.re_psi) + 1e-9 {
            return Err(Error::StepFailure {
                k,
                reason: format!("Re psi increased at w = {pw}"),
            });
        }
        tau += h;
        w = pw;
        branch = pb;
        points.push(PathPoint {
            tau,
            w,
            re_psi: val.re,
            im_psi: val.im,
        });
    }
    let winding = ((branch.arg_w - start_branch.arg_w) / (2.0 * PI)).trunc() as i64;
    let sheet = end_sheet(endpoint, branch.arg_w);
    Ok(DescentPath {
        k,
        direction,
        points,
        endpoint,
        winding,
        sheet,
    })
}

fn end_sheet(endpoint: Endpoint, arg_w: f64) -> i64 {
    let principal = match endpoint {
        Endpoint::Singularity(0) | Endpoint::BudgetExhausted | Endpoint::SaddleHit(_) => return 0,
        Endpoint::Singularity(j) => j.signum() as f64 * PI / 2.0,
        Endpoint::Escape => 0.0,
    };
    ((arg_w - principal) / (2.0 * PI)).round() as i64
}

/// Newton correction of `w` onto `Im ψ = target` along the normal of the level set.
fn project(
    mut w: ComplexVal,
    mut branch: Branch,
    target: f64,
    p: &SeriesPoint,
    k: usize,
) -> Result<(ComplexVal, Branch)> {
    for _ in 0..8 {
        let delta = branch.psi(w, p).im - target;
        if delta.abs() < PROJECTION_TOL {
            return Ok((w, branch));
        }
        let d = psi_prime(w, p);
        w -= ComplexVal::i() * delta / d;
        branch = branch.advance(w);
    }
    let delta = branch.psi(w, p).im - target;
    if delta.abs() < DRIFT_LIMIT {
        Ok((w, branch))
    } else {
        Err(Error::StepFailure {
            k,
            reason: format!("projection left Im psi off by {delta:e}"),
        })
    }
}

/// Both descent paths of every traced saddle, with the derived contributory range.
#[derive(Debug, Clone)]
pub struct Classification {
    pub range: ContributoryRange,
    /// Per saddle: the two paths, in the order of [`descent_directions`].
    pub paths: HashMap<usize, [DescentPath; 2]>,
    /// Integration direction (tangent angle) at each contributory saddle.
    pub directions: HashMap<usize, f64>,
    /// Saddles met along the contour from `m` down to the origin.
    pub chain: Vec<ChainLink>,
    pub saddles: Vec<Saddle>,
    pub warnings: Vec<String>,
}

/// One saddle of the deformed contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    pub k: usize,
    /// Sheet of `log w` on which the contour meets the saddle; only sheet 0
    /// carries the principal value of `w^{s−1}`.
    pub sheet: i64,
    /// Tangent angle of integration at the saddle.
    pub direction: f64,
}

/// Saddles up to `k_max` that can be resolved.
///
/// For large `a` the lowest indices may have no root in their band; those are
/// skipped. After the first resolved saddle the string is taken to end at the
/// first index that fails.
pub fn resolvable_saddles(p: &SeriesPoint, k_max: usize) -> Result<Vec<Saddle>> {
    let mut out: Vec<Saddle> = Vec::with_capacity(k_max);
    let mut first_err = None;
    for k in 1..=k_max {
        match refine_saddle(k, p, DEFAULT_TOL, DEFAULT_MAX_ITER) {
            Ok(s) => out.push(s),
            Err(e) if out.is_empty() => {
                first_err.get_or_insert(e);
            }
            Err(_) => break,
        }
    }
    match (out.is_empty(), first_err) {
        (true, Some(e)) => Err(e),
        _ => Ok(out),
    }
}

fn other_end(paths: &[DescentPath; 2], via: Endpoint) -> Option<(usize, Endpoint)> {
    if paths[0].endpoint == via {
        Some((1, paths[1].endpoint))
    } else if paths[1].endpoint == via {
        Some((0, paths[0].endpoint))
    } else {
        None
    }
}

/// Traces saddles `1..=k_max` and reads off `m` (the escaping saddle) and `k*`
/// (the saddle whose path reaches the origin through the chain of shared
/// singular endpoints that starts at `m`).
pub fn classify(p: &SeriesPoint, k_max: usize) -> Result<Classification> {
    let saddles = resolvable_saddles(p, k_max)?;
    let ctx = TraceContext::new(saddles.clone());
    let mut paths = HashMap::new();
    for s in &saddles {
        let (d0, d1) = descent_directions(s)?;
        let a = trace(s, p, d0, DEFAULT_STEP, DEFAULT_BUDGET, &ctx)?;
        let b = trace(s, p, d1, DEFAULT_STEP, DEFAULT_BUDGET, &ctx)?;
        paths.insert(s.k, [a, b]);
    }
    let mut warnings = Vec::new();
    let escaping: Vec<usize> = saddles
        .iter()
        .map(|s| s.k)
        .filter(|k| paths[k].iter().any(|q| q.endpoint == Endpoint::Escape))
        .collect();
    let m = *escaping.first().ok_or(Error::NoEscape(saddles.len()))?;
    let contiguous_tail =
        escaping.windows(2).all(|w| w[1] == w[0] + 1) && escaping.last() == saddles.last().map(|s| &s.k);
    if !contiguous_tail {
        warnings.push(format!("multiple escaping saddles {escaping:?}; using k = {m}"));
    }

    // walk down the chain from m to the origin, tracking the sheet of log w
    let escape_idx = paths[&m]
        .iter()
        .position(|q| q.endpoint == Endpoint::Escape)
        .unwrap_or(0);
    let offset = -paths[&m][escape_idx].sheet;
    let mut chain = vec![ChainLink {
        k: m,
        sheet: offset,
        direction: paths[&m][escape_idx].direction,
    }];
    if !descend(&saddles, &paths, m, Endpoint::Escape, offset, &mut chain) {
        return Err(Error::Tracer(format!(
            "no chain of descent paths joins saddle {m} to the origin"
        )));
    }
    let principal: Vec<usize> = chain.iter().filter(|c| c.sheet == 0).map(|c| c.k).collect();
    let k_star = *principal
        .iter()
        .min()
        .ok_or_else(|| Error::Tracer("chain has no principal-sheet saddle".into()))?;
    if principal.len() != m - k_star + 1 {
        warnings.push(format!(
            "principal-sheet saddles {principal:?} are not the contiguous range {k_star}..={m}"
        ));
    }
    for c in chain.iter().filter(|c| c.sheet != 0) {
        warnings.push(format!(
            "saddle {} joins the contour on sheet {} of log w",
            c.k, c.sheet
        ));
    }
    let directions = chain
        .iter()
        .filter(|c| c.sheet == 0)
        .map(|c| (c.k, c.direction))
        .collect();
    Ok(Classification {
        range: ContributoryRange::new(k_star, m, RangeMethod::Traced)?,
        paths,
        directions,
        chain,
        saddles,
        warnings,
    })
}

/// Depth-first continuation of the chain from saddle `cur`, entered through `via`.
fn descend(
    saddles: &[Saddle],
    paths: &HashMap<usize, [DescentPath; 2]>,
    cur: usize,
    via: Endpoint,
    offset: i64,
    chain: &mut Vec<ChainLink>,
) -> bool {
    let Some((out_idx, lower)) = other_end(&paths[&cur], via) else {
        return false;
    };
    let j = match lower {
        Endpoint::Singularity(0) => return true,
        Endpoint::Singularity(j) => j,
        _ => return false,
    };
    let arrival = offset + paths[&cur][out_idx].sheet;
    for s in saddles {
        if chain.iter().any(|c| c.k == s.k) {
            continue;
        }
        let Some(idx) = paths[&s.k].iter().position(|q| q.endpoint == lower) else {
            continue;
        };
        let next_offset = arrival - paths[&s.k][idx].sheet;
        // integration runs up through the endpoint shared with `cur`
        chain.push(ChainLink {
            k: s.k,
            sheet: next_offset,
            direction: paths[&s.k][idx].direction,
        });
        if descend(saddles, paths, s.k, Endpoint::Singularity(j), next_offset, chain) {
            return true;
        }
        chain.pop();
    }
    false
}

/// `Im ψ(w_{j}) − Im ψ(w_{j+1})` reduced to `(−π, π]`, and the matching `Re ψ` difference.
fn phase_gap(p: &SeriesPoint, j: usize) -> Result<(f64, f64)> {
    let lo = refine_saddle(j, p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let hi = refine_saddle(j + 1, p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let d = psi(lo.w, p)? - psi(hi.w, p)?;
    Ok((wrap_angle(d.im), d.re))
}

/// Locates the Stokes value `a*` in `[a_lo, a_hi]` at which the descent path
/// of `w_{m−1}` runs into `w_m` (equal continued `Im ψ`), to within `1e−3`.
pub fn detect_stokes(p_base: &SeriesPoint, a_lo: f64, a_hi: f64) -> Result<Option<f64>> {
    if !(a_lo < a_hi) || a_lo <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < a_lo < a_hi, got [{a_lo}, {a_hi}]"
        )));
    }
    let at = |a: f64| SeriesPoint::new(p_base.n, a, p_base.sigma);
    let m_of = |a: f64| -> Result<usize> {
        let q = at(a)?;
        Ok(classify(&q, heuristic_m(&q) + 4)?.range.m)
    };
    let (m_lo, m_hi) = (m_of(a_lo)?, m_of(a_hi)?);
    if m_lo.abs_diff(m_hi) > 1 {
        return Err(Error::StokesRange {
            from: m_lo,
            to: m_hi,
            at: 0.5 * (a_lo + a_hi),
        });
    }
    let m = m_lo.max(m_hi);
    if m < 2 {
        return Ok(None);
    }
    let gap = |a: f64| -> Result<(f64, f64)> { phase_gap(&at(a)?, m - 1) };

    const SCAN: usize = 64;
    let mut prev_a = a_lo;
    let mut prev = gap(a_lo)?;
    for i in 1..=SCAN {
        let a = a_lo + (a_hi - a_lo) * i as f64 / SCAN as f64;
        let cur = gap(a)?;
        // a genuine crossing, not a wrap of the reduced phase, with w_{m−1} above w_m
        let crossing = prev.0.signum() != cur.0.signum() && prev.0.abs() < 1.0 && cur.0.abs() < 1.0;
        if crossing && prev.1 > 0.0 {
            let (mut lo, mut hi, mut f_lo) = (prev_a, a, prev.0);
            while hi - lo > 1e-7 {
                let mid = 0.5 * (lo + hi);
                let fm = gap(mid)?.0;
                if fm.signum() == f_lo.signum() {
                    lo = mid;
                    f_lo = fm;
                } else {
                    hi = mid;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_a = a;
        prev = cur;
    }
    Ok(None)
}
