//! Covariance of k-fold integrated Brownian motion.

use crate::error::{Error, Result};
use crate::quad;

pub const MAX_IBM_ORDER: u32 = 4;

/// `E[(I^k B)_s (I^k B)_t] = ∫_0^{s∧t} (s−u)^k (t−u)^k du / (k!)²`.
///
/// Closed form for `k ∈ {0, 1}`, adaptive Gauss–Kronrod (absolute tolerance
/// 1e-12) for `2 ≤ k ≤ 4`.
pub fn ibm_covariance(k: u32, s: f64, t: f64) -> Result<f64> {
    if s < 0.0 || t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "integrated Brownian motion is indexed by t >= 0, got ({s}, {t})"
        )));
    }
    if k > MAX_IBM_ORDER {
        return Err(Error::InvalidParameter(format!(
            "integration order {k} outside supported range 0..={MAX_IBM_ORDER}"
        )));
    }
    Ok(match k {
        0 => s.min(t),
        1 => ibm1_closed(s, t),
        _ => ibm_quadrature(k, s, t)?,
    })
}

fn ibm1_closed(s: f64, t: f64) -> f64 {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    lo * lo * hi / 2.0 - lo * lo * lo / 6.0
}

pub(crate) fn ibm_quadrature(k: u32, s: f64, t: f64) -> Result<f64> {
    let m = s.min(t);
    if m == 0.0 {
        return Ok(0.0);
    }
    let fact: f64 = (1..=k).map(f64::from).product();
    let ki = k as i32;
    let v = quad::adaptive(
        |u| (s - u).powi(ki) * (t - u).powi(ki),
        0.0,
        m,
        1e-12,
        0.0,
    )?;
    Ok(v / (fact * fact))
}
