//! Scalar (single-population) SI, SIS and SIR models.
//!
//! Closed forms are written so that no exponential with a positive exponent
//! is ever evaluated; large `t` therefore cannot overflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::ModelKind;

/// Absolute tolerance of the bisection used by [`sir_rinf`].
pub const RINF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarParams {
    pub beta: f64,
    /// Ignored by the SI model.
    pub gamma: f64,
}

impl ScalarParams {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        check_rate("beta", beta)?;
        check_rate("gamma", gamma)?;
        Ok(Self { beta, gamma })
    }

    pub fn reproduction_number(&self) -> f64 {
        self.beta / self.gamma
    }
}

/// Scalar compartment fractions; `r` is zero for SI and SIS.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScalarState {
    pub s: f64,
    pub x: f64,
    pub r: f64,
}

impl ScalarState {
    pub fn infected(x: f64) -> Self {
        Self { s: 1.0 - x, x, r: 0.0 }
    }
}

pub(crate) fn check_rate(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("time must be nonnegative, got {t}")))
    }
}

/// Logistic solution `x0 e^{bt} / (1 - x0 + x0 e^{bt})` of `x' = b(1 - x)x`.
pub fn si_closed_form(x0: f64, beta: f64, t: f64) -> Result<f64> {
    check_fraction("x0", x0)?;
    check_rate("beta", beta)?;
    check_time(t)?;
    if x0 == 0.0 {
        return Ok(0.0);
    }
    Ok(x0 / ((1.0 - x0) * (-beta * t).exp() + x0))
}

/// Solution of `x' = (b - g - b x) x` from `x(0) = x0`. For `b = g` this is
/// the limit `x0 / (1 + b x0 t)`.
pub fn sis_closed_form(x0: f64, beta: f64, gamma: f64, t: f64) -> Result<f64> {
    check_fraction("x0", x0)?;
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    check_time(t)?;
    if x0 == 0.0 || t == 0.0 {
        return Ok(x0);
    }
    let k = beta - gamma;
    if k == 0.0 {
        return Ok(x0 / (1.0 + beta * x0 * t));
    }
    let c = gamma - beta * (1.0 - x0);
    if k > 0.0 {
        Ok(k * x0 / (beta * x0 - (-k * t).exp() * c))
    } else {
        // Multiply through by e^{kt} (k < 0) so the exponential decays.
        let e = (k * t).exp();
        Ok(k * x0 * e / (beta * x0 * e - c))
    }
}

/// Final recovered fraction of the scalar SIR model: the root in `[r0, 1]`
/// of `1 - r = s0 exp(-(b/g)(r - r0))`, found by bisection.
pub fn sir_rinf(s0: f64, r0: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    if !(s0 > 0.0 && s0 <= 1.0) {
        return Err(Error::invalid(format!("s0 must lie in (0, 1], got {s0}")));
    }
    check_fraction("r0", r0)?;
    if s0 + r0 > 1.0 + 1e-15 {
        return Err(Error::invalid(format!("s0 + r0 = {} exceeds 1", s0 + r0)));
    }
    let x0 = 1.0 - s0 - r0;
    if x0 <= 4.0 * f64::EPSILON {
        return Ok(r0);
    }
    let ratio = beta / gamma;
    let g = |r: f64| 1.0 - r - s0 * (-ratio * (r - r0)).exp();
    // g(r0) = x0 > 0, g(1) < 0 and g is concave: exactly one root.
    let (mut lo, mut hi) = (r0, 1.0);
    while hi - lo > RINF_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Peak infected fraction of the scalar SIR model,
/// `x0 + s0 - (g/b)(ln s0 + 1 - ln(g/b))`. Requires `b s0 / g >= 1`; at
/// equality the peak is `x0` itself.
pub fn sir_xmax(s0: f64, x0: f64, beta: f64, gamma: f64) -> Result<f64> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    if !(s0 > 0.0 && x0 > 0.0 && s0 + x0 <= 1.0 + 1e-15) {
        return Err(Error::invalid(format!(
            "need s0 > 0, x0 > 0 and s0 + x0 <= 1, got s0 = {s0}, x0 = {x0}"
        )));
    }
    let effective = beta * s0 / gamma;
    if effective < 1.0 - 1e-12 {
        return Err(Error::BelowThreshold { r0: effective });
    }
    let q = gamma / beta;
    Ok(x0 + s0 - q * (s0.ln() + 1.0 - q.ln()))
}

/// Right-hand side of the scalar model. For SI and SIS the returned `s`
/// component is `-x'`; `r'` is zero.
pub fn scalar_rhs(kind: ModelKind, state: ScalarState, params: ScalarParams) -> ScalarState {
    let ScalarParams { beta, gamma } = params;
    let ScalarState { s, x, .. } = state;
    match kind {
        ModelKind::Si => {
            let dx = beta * s * x;
            ScalarState { s: -dx, x: dx, r: 0.0 }
        }
        ModelKind::Sis => {
            let dx = beta * s * x - gamma * x;
            ScalarState { s: -dx, x: dx, r: 0.0 }
        }
        ModelKind::Sir => {
            let infection = beta * s * x;
            ScalarState {
                s: -infection,
                x: infection - gamma * x,
                r: gamma * x,
            }
        }
    }
}
