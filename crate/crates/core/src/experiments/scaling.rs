//! Scaling rules for the rescaling constant and the rate-balance
//! inequalities behind them.

use crate::error::{Error, Result};
use crate::processes::{GaussianPrior, SpectralFamily};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    SquaredExponential,
    LaplaceSpectral,
    ModifiedIbm,
}

impl PriorFamily {
    pub fn name(self) -> &'static str {
        match self {
            PriorFamily::SquaredExponential => "squared_exponential",
            PriorFamily::LaplaceSpectral => "laplace_spectral",
            PriorFamily::ModifiedIbm => "modified_ibm",
        }
    }

    pub fn is_stationary(self) -> bool {
        self != PriorFamily::ModifiedIbm
    }

    /// Prior of this family with scaling constant `c` (and `k`, `a` for the
    /// integrated family).
    pub fn prior(self, c: f64, k: u32, a: f64) -> Result<GaussianPrior> {
        match self {
            PriorFamily::SquaredExponential => GaussianPrior::stationary(SpectralFamily::Gaussian, c),
            PriorFamily::LaplaceSpectral => GaussianPrior::stationary(SpectralFamily::Laplace, c),
            PriorFamily::ModifiedIbm => GaussianPrior::modified_ibm(k, c, a),
        }
    }
}

/// `(c_n, a_n)`: `c_n = (log²n / n)^{1/(2α+1)}` and `a_n = 1` for stationary
/// priors; `c_n = n^{(α−(k+½))/((k+½)(1+2α))}` and
/// `a_n = n^{(1+2α−2k)/(1+2α)}` for the integrated family, which requires
/// `α ≤ k + 1`. Logarithms are natural.
pub fn scaling_rule(family: PriorFamily, alpha: f64, n: u64, k: u32) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let nf = n as f64;
    if family.is_stationary() {
        let l = nf.ln();
        return Ok(((l * l / nf).powf(1.0 / (2.0 * alpha + 1.0)), 1.0));
    }
    let kf = k as f64;
    if alpha > kf + 1.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} exceeds k + 1 = {} for the integrated family",
            kf + 1.0
        )));
    }
    let h = kf + 0.5;
    let c = nf.powf((alpha - h) / (h * (1.0 + 2.0 * alpha)));
    let a = nf.powf((1.0 + 2.0 * alpha - 2.0 * kf) / (1.0 + 2.0 * alpha));
    Ok((c, a))
}

/// `ε_n = (n / log²n)^{−α/(1+2α)}` for stationary priors and
/// `n^{−α/(1+2α)}` for the integrated family.
pub fn contraction_rate(family: PriorFamily, alpha: f64, n: u64) -> f64 {
    let nf = n as f64;
    let e = -alpha / (1.0 + 2.0 * alpha);
    if family.is_stationary() {
        (nf / nf.ln().powi(2)).powf(e)
    } else {
        nf.powf(e)
    }
}

/// Ratios of left- to right-hand sides of the inequalities that make `c_n`
/// and `ε_n` balance, at a single `n`.
///
/// Stationary: `(1/c)(log(1/(cε²)))² / (nε²)`, `c^α / ε` and `(1/c) / (nε²)`.
/// Integrated: `[(c^{k+½}ε)^{−1/(k+½)} + k log(1/(√a ε))] / (nε²)` and
/// `[c^{2k+1} ε^{−(2k+2−2α)/α} + a ε^{−(2k−2α)/α}] / (nε²)`.
pub fn rate_balance_ratios(family: PriorFamily, alpha: f64, k: u32, n: u64) -> Result<Vec<f64>> {
    let (c, a) = scaling_rule(family, alpha, n, k)?;
    let eps = contraction_rate(family, alpha, n);
    let rhs = n as f64 * eps * eps;
    if family.is_stationary() {
        return Ok(vec![
            (1.0 / (c * eps * eps)).ln().powi(2) / c / rhs,
            c.powf(alpha) / eps,
            1.0 / c / rhs,
        ]);
    }
    let kf = k as f64;
    let h = kf + 0.5;
    let first = (1.0 / (c.powf(h) * eps)).powf(1.0 / h) + kf * (1.0 / (a.sqrt() * eps)).ln();
    let second = c.powf(2.0 * kf + 1.0) * (1.0 / eps).powf((2.0 * kf + 2.0 - 2.0 * alpha) / alpha)
        + a * (1.0 / eps).powf((2.0 * kf - 2.0 * alpha) / alpha);
    Ok(vec![first / rhs, second / rhs])
}

#[derive(Clone, Debug, PartialEq)]
pub struct BalanceCheck {
    pub n_values: Vec<u64>,
    /// `ratios[i][j]`: inequality `i` at `n_values[j]`.
    pub ratios: Vec<Vec<f64>>,
}

impl BalanceCheck {
    /// `max / min` of each inequality's ratio over the range.
    pub fn variation(&self) -> Vec<f64> {
        self.ratios
            .iter()
            .map(|r| {
                let max = r.iter().cloned().fold(0.0, f64::max);
                let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
                max / min
            })
            .collect()
    }

    /// Largest ratio of each inequality, the smallest constant for which it
    /// holds on the whole range.
    pub fn constants(&self) -> Vec<f64> {
        self.ratios.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect()
    }
}

/// Ratios on `points` log-spaced values of `n` between `n_min` and `n_max`.
pub fn rate_balance(
    family: PriorFamily,
    alpha: f64,
    k: u32,
    n_min: u64,
    n_max: u64,
    points: usize,
) -> Result<BalanceCheck> {
    if points < 2 || n_min < 2 || n_max <= n_min {
        return Err(Error::InvalidParameter("need at least two increasing values of n".into()));
    }
    let (lo, hi) = ((n_min as f64).ln(), (n_max as f64).ln());
    let n_values: Vec<u64> = (0..points)
        .map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp().round() as u64)
        .collect();
    let per_n = n_values
        .iter()
        .map(|&n| rate_balance_ratios(family, alpha, k, n))
        .collect::<Result<Vec<_>>>()?;
    let ratios = (0..per_n[0].len()).map(|i| per_n.iter().map(|r| r[i]).collect()).collect();
    Ok(BalanceCheck { n_values, ratios })
}
