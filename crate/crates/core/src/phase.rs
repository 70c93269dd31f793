//! The phase function `ψ(w) = Log(1 − e^{−w}) + i·a·Log w − w/n` and its derivatives.
//!
//! Derivatives of `g(w) = 1/(e^w − 1) = ψ'(w) − i·a/w + 1/n` are polynomials
//! in `g`, generated from `g' = −g − g²`.

use serde::{Deserialize, Serialize};

use crate::cnum::{expm1, ln_1p, ComplexVal};
use crate::direct::SeriesPoint;
use crate::error::{Error, Result};

/// Highest derivative order carried by [`PhaseDerivatives`].
pub const MAX_ORDER: usize = 6;

const DERIV_SINGULAR_EPS: f64 = 1e-8;
const PSI_SINGULAR_EPS: f64 = 1e-300;

/// `ψ^{(j)}(w)` for `j = 0..=order`; entries above `order` are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDerivatives {
    pub values: [ComplexVal; MAX_ORDER + 1],
    pub order: usize,
    pub at_point: ComplexVal,
}

impl PhaseDerivatives {
    pub fn get(&self, j: usize) -> ComplexVal {
        self.values[j]
    }
}

/// Coefficients of `g^{(m)}` as a polynomial in `g`, lowest degree first.
pub fn g_polynomials() -> [[f64; MAX_ORDER + 1]; MAX_ORDER] {
    let mut polys = [[0.0; MAX_ORDER + 1]; MAX_ORDER];
    polys[0][1] = 1.0;
    for m in 1..MAX_ORDER {
        let prev = polys[m - 1];
        // d/dw P(g) = P'(g) · (−g − g²)
        for (i, &c) in prev.iter().enumerate().skip(1) {
            let dc = c * i as f64;
            polys[m][i] -= dc;
            if i < MAX_ORDER {
                polys[m][i + 1] -= dc;
            }
        }
    }
    polys
}

/// Distance from `w` to the nearest logarithmic singularity `2πik` (including 0).
pub fn singularity_distance(w: ComplexVal) -> f64 {
    let period = 2.0 * std::f64::consts::PI;
    let k = (w.im / period).round();
    ComplexVal::new(w.re, w.im - k * period).norm()
}

fn check_regular(w: ComplexVal, eps: f64) -> Result<()> {
    if singularity_distance(w) <= eps {
        Err(Error::Singularity { re: w.re, im: w.im })
    } else {
        Ok(())
    }
}

/// `g(w) = 1/(e^w − 1)`, evaluated without overflow for large `|Re w|`.
pub fn g(w: ComplexVal) -> ComplexVal {
    if w.re > 0.0 {
        // e^{−w}/(1 − e^{−w})
        let em = (-w).exp();
        em / -expm1(-w)
    } else {
        ComplexVal::new(1.0, 0.0) / expm1(w)
    }
}

/// Principal `Log(1 − e^{−w})`.
pub fn log_one_minus_exp_neg(w: ComplexVal) -> ComplexVal {
    if w.re > 1.0 {
        ln_1p(-(-w).exp())
    } else if w.re > -600.0 {
        (-expm1(-w)).ln()
    } else {
        // 1 − e^{−w} = −e^{−w}(1 − e^{w}); reduce the imaginary part afterwards
        let z = -w + ln_1p(-w.exp()) + ComplexVal::new(0.0, std::f64::consts::PI);
        ComplexVal::new(z.re, crate::cnum::wrap_angle(z.im))
    }
}

/// Principal value of `ψ(w)` at the point `p` (uses `p.a` and `p.n`).
pub fn psi(w: ComplexVal, p: &SeriesPoint) -> Result<ComplexVal> {
    check_regular(w, PSI_SINGULAR_EPS)?;
    let n = p.n as f64;
    Ok(log_one_minus_exp_neg(w) + ComplexVal::i() * p.a * w.ln() - w / n)
}

/// `ψ'(w)` only; the saddle equation.
pub fn psi_prime(w: ComplexVal, p: &SeriesPoint) -> ComplexVal {
    g(w) + ComplexVal::i() * p.a / w - 1.0 / p.n as f64
}

/// `ψ^{(j)}(w)` for `j = 0..=j_max`, `j_max ≤ 6`.
pub fn psi_derivatives(w: ComplexVal, p: &SeriesPoint, j_max: usize) -> Result<PhaseDerivatives> {
    if j_max > MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "derivative order {j_max} exceeds {MAX_ORDER}"
        )));
    }
    check_regular(w, DERIV_SINGULAR_EPS)?;
    let n = p.n as f64;
    let ia = ComplexVal::new(0.0, p.a);
    let gw = g(w);
    let polys = g_polynomials();

    let mut values = [ComplexVal::new(0.0, 0.0); MAX_ORDER + 1];
    values[0] = psi(w, p)?;
    if j_max >= 1 {
        values[1] = gw + ia / w - 1.0 / n;
    }
    let inv_w = w.inv();
    let mut inv_w_pow = inv_w;
    let mut factorial = 1.0;
    for j in 2..=j_max {
        // (j−1)! and w^{−j}
        factorial *= (j - 1) as f64;
        inv_w_pow *= inv_w;
        let poly = &polys[j - 1];
        let mut gm = ComplexVal::new(0.0, 0.0);
        for &c in poly.iter().rev() {
            gm = gm * gw + c;
        }
        let sign = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
        values[j] = gm + ia * (sign * factorial) * inv_w_pow;
    }
    Ok(PhaseDerivatives {
        values,
        order: j_max,
        at_point: w,
    })
}

/// `F_j = f^{(j)}/f` for `f(w) = w^{σ−1}`: `(σ−1)(σ−2)···(σ−j)/w^j`.
pub fn f_ratio(j: usize, sigma: f64, w: ComplexVal) -> Result<ComplexVal> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::ZeroBase);
    }
    if !(1..=4).contains(&j) {
        return Err(Error::InvalidParameter(format!("F_j defined for j in 1..=4, got {j}")));
    }
    let mut acc = ComplexVal::new(1.0, 0.0);
    for i in 1..=j {
        acc = acc * (sigma - i as f64) / w;
    }
    Ok(acc)
}

/// `Ψ_j = ψ^{(j)}/ψ''` for `j = 3..=6`.
pub fn capital_psi(j: usize, d: &PhaseDerivatives) -> Result<ComplexVal> {
    if !(3..=MAX_ORDER).contains(&j) || j > d.order {
        return Err(Error::InvalidParameter(format!(
            "Psi_j needs 3 <= j <= {}, got {j}",
            d.order
        )));
    }
    let num = d.values[j];
    let den = d.values[2];
    if den.norm() < 1e-13 * num.norm() || den.norm() == 0.0 {
        return Err(Error::DegenerateSaddle(None));
    }
    Ok(num / den)
}
