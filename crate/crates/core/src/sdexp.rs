//! Steepest-descent expansion of `A(n, s)`.
//!
//! Each saddle `w_k` contributes
//! `I_k ≈ i√(2π/n) · e^{−w_k}(1 − e^{−w_k})^n w_k^{s−1} / √ψ''(w_k) · Σ_j c_j n^{−j} Γ(j+½)/Γ(½)`,
//! and `A(n, s) = 2^{−n−1} / ((1 − 2^{1−s}) Γ(s)) · Σ_{k*≤k≤m} I_k`.
//! Every factor is kept in log form until the final sum; at large `t` the
//! prefactor alone underflows `f64`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::cnum::{log_gamma, scaled_sum, wrap_angle, ComplexVal, LogComplex};
use crate::direct::{a_direct, check_prefactor, SeriesPoint, MAX_DIRECT_N};
use crate::error::{Error, Result};
use crate::phase::{capital_psi, f_ratio, log_one_minus_exp_neg, psi, psi_derivatives, PhaseDerivatives};
use crate::saddles::{
    limit_saddle, refine_saddle, ContributoryRange, RangeMethod, Saddle, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::tracer::Classification;

/// `Γ(j + ½)/Γ(½)` for `j = 0, 1, 2`.
pub const GAMMA_RATIOS: [f64; 3] = [1.0, 0.5, 0.75];

/// Highest expansion order supported.
pub const MAX_J: usize = 2;

/// Below this `|Im Δψ|` between `w_{m−1}` and `w_m` the report carries a Stokes flag.
pub const STOKES_FLAG_GAP: f64 = 1e-3;

pub const STOKES_WARNING: &str = "stokes_warning";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub c0: ComplexVal,
    pub c1: ComplexVal,
    pub c2: ComplexVal,
    pub j_max: usize,
}

impl ExpansionCoefficients {
    /// `Σ_{j ≤ j_max} c_j n^{−j} Γ(j+½)/Γ(½)`.
    pub fn series(&self, n: f64) -> ComplexVal {
        let c = [self.c0, self.c1, self.c2];
        (0..=self.j_max)
            .map(|j| c[j] * GAMMA_RATIOS[j] / n.powi(j as i32))
            .sum()
    }
}

/// One saddle's share of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogContribution {
    pub k: usize,
    /// `I_k` without the outer prefactor.
    pub log_value: LogComplex,
    /// Leading-order modulus of the saddle's share of `A(n, s)`.
    pub i_hat: f64,
    pub omega: f64,
}

/// The root of `ψ''` that orients `i/√ψ''` along the direction of integration.
pub fn sqrt_branch(psi_dd: ComplexVal, descent_angle: f64) -> Result<ComplexVal> {
    if psi_dd.norm() == 0.0 || !psi_dd.norm().is_finite() {
        return Err(Error::DegenerateSaddle(None));
    }
    let r = psi_dd.sqrt();
    let i = ComplexVal::i();
    let miss = |root: ComplexVal| wrap_angle((i / root).arg() - descent_angle).abs();
    Ok(if miss(r) <= miss(-r) { r } else { -r })
}

/// Descent direction at a saddle pointing towards increasing `Im w`.
pub fn canonical_direction(psi_dd: ComplexVal) -> f64 {
    let theta = (PI - psi_dd.arg()) / 2.0;
    if theta.sin() < 0.0 {
        theta + PI
    } else {
        theta
    }
}

/// `c_0`, `c_1`, `c_2` at the point where `d` was taken; orders above `j_max` are zero.
pub fn coefficients(d: &PhaseDerivatives, sigma: f64, j_max: usize) -> Result<ExpansionCoefficients> {
    if j_max > MAX_J {
        return Err(Error::InvalidParameter(format!(
            "expansion order must be at most {MAX_J}, got {j_max}"
        )));
    }
    if d.order < 2 + 2 * j_max {
        return Err(Error::InvalidParameter(format!(
            "order {j_max} needs derivatives through {}, have {}",
            2 + 2 * j_max,
            d.order
        )));
    }
    let zero = ComplexVal::new(0.0, 0.0);
    let mut out = ExpansionCoefficients {
        c0: ComplexVal::new(1.0, 0.0),
        c1: zero,
        c2: zero,
        j_max,
    };
    if j_max == 0 {
        return Ok(out);
    }
    let w = d.at_point;
    let two_dd = d.get(2) * 2.0;
    let f1 = f_ratio(1, sigma, w)?;
    let f2 = f_ratio(2, sigma, w)?;
    let p3 = capital_psi(3, d)?;
    let p4 = capital_psi(4, d)?;
    out.c1 = -(f2 * 2.0 - p3 * f1 * 2.0 + p3 * p3 * (5.0 / 6.0) - p4 * 0.5) / two_dd;
    if j_max == 1 {
        return Ok(out);
    }
    let f3 = f_ratio(3, sigma, w)?;
    let f4 = f_ratio(4, sigma, w)?;
    let p5 = capital_psi(5, d)?;
    let p6 = capital_psi(6, d)?;
    let p3_2 = p3 * p3;
    let tail = p3_2 * p3_2 * (11.0 / 24.0) - (p3_2 - p4 / 6.0) * p4 * 0.75 + p3 * p5 / 5.0 - p6 / 35.0;
    let brace = f4 * (2.0 / 3.0) - p3 * f3 * (20.0 / 9.0) + (p3_2 * (7.0 / 3.0) - p4) * f2 * (5.0 / 3.0)
        - (p3_2 * p3 - p3 * p4 + p5 * (6.0 / 35.0)) * f1 * (35.0 / 9.0)
        + tail * (35.0 / 9.0);
    out.c2 = brace / (two_dd * two_dd);
    Ok(out)
}

/// `log[2^{−n−1} / ((1 − 2^{1−s}) Γ(s))]`.
pub fn log_prefactor(p: &SeriesPoint) -> Result<ComplexVal> {
    let s = p.s();
    let d = check_prefactor(s)?;
    Ok(ComplexVal::new(-(p.n as f64 + 1.0) * LN_2, 0.0) - d.ln() - log_gamma(s)?)
}

fn log_leading(s: &Saddle, p: &SeriesPoint, branch: ComplexVal) -> ComplexVal {
    let n = p.n as f64;
    let one = ComplexVal::new(1.0, 0.0);
    ComplexVal::new(0.5 * (2.0 * PI / n).ln(), PI / 2.0) - s.w + log_one_minus_exp_neg(s.w) * n - branch.ln()
        + (p.s() - one) * s.w.ln()
}

/// `I_k` in log form, with `Î_k` and `ω_k`.
pub fn contribution(
    s: &Saddle,
    p: &SeriesPoint,
    coeffs: &ExpansionCoefficients,
    branch: ComplexVal,
) -> Result<LogContribution> {
    if p.n == 0 {
        return Err(Error::InvalidParameter("the expansion needs n >= 1".into()));
    }
    let lead = log_leading(s, p, branch);
    let series = coeffs.series(p.n as f64);
    if series.norm() == 0.0 {
        return Err(Error::DegenerateSaddle(Some((s.k, s.k))));
    }
    let log_value = LogComplex::from_log(lead + series.ln());
    let i_hat = (lead + log_prefactor(p)?).re.exp();
    Ok(LogContribution {
        k: s.k,
        log_value,
        i_hat,
        omega: omega(s, p, true)?,
    })
}

/// Decay exponent `ω_k = arg w − π/2 − (1/a) log|(1 − e^{−w})/2| + Re w / t`.
///
/// With `include_t_term = false` the last term is dropped and `w` is the
/// saddle of the `n → ∞` phase.
pub fn omega(s: &Saddle, p: &SeriesPoint, include_t_term: bool) -> Result<f64> {
    let t = p.t();
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("omega needs t = a*n > 0, got {t}")));
    }
    let w = if include_t_term {
        s.w
    } else {
        limit_saddle(s.k, p.a, s.w)?
    };
    let base = w.arg() - PI / 2.0 - (log_one_minus_exp_neg(w).re - LN_2) / p.a;
    Ok(if include_t_term { base + w.re / t } else { base })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub n: u32,
    pub a: f64,
    pub sigma: f64,
    pub j_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleRow {
    pub k: usize,
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleTerm {
    pub k: usize,
    pub i_hat: f64,
    pub omega: f64,
}

/// Asymptotic evaluation of `A(n, s)` with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub inputs: Inputs,
    pub k_star: usize,
    pub m: usize,
    pub method: RangeMethod,
    pub saddles: Vec<SaddleRow>,
    pub direct: Option<ComplexVal>,
    pub asymptotic: ComplexVal,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub per_saddle: Vec<SaddleTerm>,
    pub flags: Vec<String>,
}

impl EvaluationReport {
    /// Drops the direct comparison.
    pub fn without_direct(mut self) -> Self {
        self.direct = None;
        self.abs_err = None;
        self.rel_err = None;
        self
    }
}

/// Sums the saddles in `range`, orienting each `√ψ''` canonically.
pub fn assemble(p: &SeriesPoint, range: &ContributoryRange, j_max: usize) -> Result<EvaluationReport> {
    assemble_with(p, range, j_max, None)
}

/// Assembles from a traced classification, using the traced directions.
pub fn assemble_traced(p: &SeriesPoint, c: &Classification, j_max: usize) -> Result<EvaluationReport> {
    let mut report = assemble_with(p, &c.range, j_max, Some(&c.directions))?;
    report.flags.extend(c.warnings.iter().map(|w| format!("tracer: {w}")));
    Ok(report)
}

fn assemble_with(
    p: &SeriesPoint,
    range: &ContributoryRange,
    j_max: usize,
    directions: Option<&HashMap<usize, f64>>,
) -> Result<EvaluationReport> {
    if p.n == 0 {
        return Err(Error::InvalidParameter("the expansion needs n >= 1".into()));
    }
    if j_max > MAX_J {
        return Err(Error::InvalidParameter(format!(
            "expansion order must be at most {MAX_J}, got {j_max}"
        )));
    }
    let pre = log_prefactor(p)?;
    let saddles: Vec<Saddle> = range
        .indices()
        .map(|k| refine_saddle(k, p, DEFAULT_TOL, DEFAULT_MAX_ITER))
        .collect::<Result<_>>()?;
    let mut flags = Vec::new();
    let mut terms = Vec::with_capacity(saddles.len());
    let mut per_saddle = Vec::with_capacity(saddles.len());
    for s in &saddles {
        let d = psi_derivatives(s.w, p, 2 + 2 * j_max)?;
        let coeffs = coefficients(&d, p.sigma, j_max).map_err(|e| pair_degenerate(e, s, &saddles))?;
        let canonical = sqrt_branch(s.psi_dd, canonical_direction(s.psi_dd))?;
        let branch = match directions.and_then(|m| m.get(&s.k)) {
            Some(&angle) => {
                let traced = sqrt_branch(s.psi_dd, angle)?;
                if (traced - canonical).norm() > 1e-12 * canonical.norm() {
                    flags.push(format!("branch_disagreement: k = {}", s.k));
                }
                traced
            }
            None => canonical,
        };
        let c = contribution(s, p, &coeffs, branch)?;
        terms.push(c.log_value);
        per_saddle.push(SaddleTerm {
            k: c.k,
            i_hat: c.i_hat,
            omega: c.omega,
        });
    }
    let sum = scaled_sum(&terms)?;
    let asymptotic = LogComplex::from_log(pre + sum.ln()).to_complex();

    if range.m >= 2 {
        let lo = refine_saddle(range.m - 1, p, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        let hi = saddles.last().map(|s| s.w).unwrap_or(lo.w);
        let gap = wrap_angle((psi(lo.w, p)? - psi(hi, p)?).im);
        if gap.abs() < STOKES_FLAG_GAP {
            flags.push(STOKES_WARNING.into());
        }
    }

    let direct = if p.n <= MAX_DIRECT_N {
        Some(a_direct(p, None)?)
    } else {
        None
    };
    let abs_err = direct.map(|d| (asymptotic - d).norm());
    let rel_err = direct.zip(abs_err).map(|(d, e)| e / d.norm());
    Ok(EvaluationReport {
        inputs: Inputs {
            n: p.n,
            a: p.a,
            sigma: p.sigma,
            j_max,
        },
        k_star: range.k_star,
        m: range.m,
        method: range.method,
        saddles: saddles
            .iter()
            .map(|s| SaddleRow {
                k: s.k,
                re: s.w.re,
                im: s.w.im,
                residual: s.residual,
            })
            .collect(),
        direct,
        asymptotic,
        abs_err,
        rel_err,
        per_saddle,
        flags,
    })
}

/// Attaches the nearest neighbouring saddle to a degenerate-saddle error.
fn pair_degenerate(e: Error, s: &Saddle, all: &[Saddle]) -> Error {
    match e {
        Error::DegenerateSaddle(None) => {
            let other = all
                .iter()
                .filter(|o| o.k != s.k)
                .min_by(|x, y| (x.w - s.w).norm().total_cmp(&(y.w - s.w).norm()))
                .map_or(s.k, |o| o.k);
            Error::DegenerateSaddle(Some((s.k.min(other), s.k.max(other))))
        }
        other => other,
    }
}
