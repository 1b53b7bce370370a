//! Posteriors for density estimation, fixed-design regression and binary
//! classification, and the distances in which contraction is measured.

pub mod mcmc;
pub mod regression;

pub use mcmc::{
    classification_posterior, classification_posterior_on, density_posterior, density_posterior_on,
    logistic, run_pcn, ChainOutput,
};
pub use regression::{
    regression_posterior, regression_posterior_on, regression_posterior_sigma,
    regression_posterior_sigma_on, RegressionPosterior, SigmaPrior,
};

use crate::error::{Error, Result};
use crate::experiments::truth::Setting;
use crate::quad;
use crate::rkhs::GridFunction;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// `p = e^w / ∫₀¹ e^w` on a grid, the integral by the trapezoid rule.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityModel {
    pub w: GridFunction,
    pub p: GridFunction,
}

impl DensityModel {
    pub fn from_log_density(grid: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let w = GridFunction::new(grid, w)?;
        let shift = w.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = w.values.iter().map(|v| (v - shift).exp()).collect();
        let z = quad::trapezoid(&w.grid, &e);
        let p = GridFunction::new(w.grid.clone(), e.iter().map(|v| v / z).collect())?;
        Ok(DensityModel { w, p })
    }

    /// Log normaliser `log ∫₀¹ e^w`.
    pub fn log_normaliser(&self) -> f64 {
        let shift = self.w.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = self.w.values.iter().map(|v| (v - shift).exp()).collect();
        shift + quad::trapezoid(&self.w.grid, &e).ln()
    }
}

/// `sqrt(½ ∫ (√p − √q)²)` by the trapezoid rule.
pub fn hellinger(p: &DensityModel, q: &DensityModel) -> Result<f64> {
    if p.p.grid != q.p.grid {
        return Err(Error::InvalidGrid("densities live on different grids".into()));
    }
    Ok(hellinger_values(&p.p.grid, &p.p.values, &q.p.values))
}

pub(crate) fn hellinger_values(grid: &[f64], p: &[f64], q: &[f64]) -> f64 {
    let sq: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).collect();
    (0.5 * quad::trapezoid(grid, &sq)).sqrt().min(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    pub design: Vec<f64>,
    pub responses: Vec<f64>,
    pub sigma0: f64,
}

impl RegressionData {
    pub fn new(design: Vec<f64>, responses: Vec<f64>, sigma0: f64) -> Result<Self> {
        if design.len() != responses.len() {
            return Err(Error::LengthMismatch(design.len(), responses.len()));
        }
        check_unit_interval(&design)?;
        if !(sigma0 > 0.0) {
            return Err(Error::InvalidParameter(format!("sigma0 must be positive, got {sigma0}")));
        }
        Ok(RegressionData {
            design,
            responses,
            sigma0,
        })
    }

    pub fn len(&self) -> usize {
        self.design.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationData {
    pub covariates: Vec<f64>,
    pub labels: Vec<bool>,
}

impl ClassificationData {
    pub fn new(covariates: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if covariates.len() != labels.len() {
            return Err(Error::LengthMismatch(covariates.len(), labels.len()));
        }
        check_unit_interval(&covariates)?;
        Ok(ClassificationData { covariates, labels })
    }

    pub fn len(&self) -> usize {
        self.covariates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.covariates.is_empty()
    }
}

fn check_unit_interval(points: &[f64]) -> Result<()> {
    match points.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        Some(t) => Err(Error::InvalidParameter(format!("point {t} outside [0, 1]"))),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub chain_length: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub beta_init: f64,
    pub target_acceptance: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chain_length: 20_000,
            burn_in: 5_000,
            thin: 30,
            beta_init: 0.2,
            target_acceptance: 0.25,
            seed: 0,
        }
    }
}

pub const MIN_CHAIN_LENGTH: usize = 10_000;
pub const MIN_DRAWS: usize = 200;

impl McmcConfig {
    pub fn retained(&self) -> usize {
        if self.thin == 0 || self.chain_length <= self.burn_in {
            0
        } else {
            (self.chain_length - self.burn_in).div_ceil(self.thin)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_length < MIN_CHAIN_LENGTH {
            return Err(Error::InvalidParameter(format!(
                "chain_length must be at least {MIN_CHAIN_LENGTH}, got {}",
                self.chain_length
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thin must be positive".into()));
        }
        if self.retained() < MIN_DRAWS {
            return Err(Error::InvalidParameter(format!(
                "chain keeps {} draws, need at least {MIN_DRAWS}",
                self.retained()
            )));
        }
        if !(self.beta_init > 0.0 && self.beta_init <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta_init must lie in (0, 1], got {}", self.beta_init)));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "target_acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub acceptance_rate: f64,
    pub effective_sample_proxy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub setting: Setting,
    pub draws: Vec<GridFunction>,
    /// Noise level of each draw when it is sampled jointly with `w`.
    pub sigma_draws: Vec<f64>,
    pub distances_to_truth: Vec<f64>,
    pub contraction_radius: f64,
    pub diagnostics: Diagnostics,
}

impl PosteriorSummary {
    pub(crate) fn new(
        setting: Setting,
        draws: Vec<GridFunction>,
        sigma_draws: Vec<f64>,
        distances_to_truth: Vec<f64>,
        diagnostics: Diagnostics,
    ) -> Self {
        let contraction_radius = quantile(&distances_to_truth, 0.9);
        PosteriorSummary {
            setting,
            draws,
            sigma_draws,
            distances_to_truth,
            contraction_radius,
            diagnostics,
        }
    }

    pub fn distance_quantile(&self, q: f64) -> f64 {
        quantile(&self.distances_to_truth, q)
    }

    /// Pointwise posterior mean of the draws.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.draws.len() as f64;
        let len = self.draws[0].values.len();
        (0..len)
            .map(|i| self.draws.iter().map(|d| d.values[i]).sum::<f64>() / n)
            .collect()
    }
}

/// Empirical quantile with linear interpolation between order statistics
/// (`(n − 1) q` is the fractional rank).
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty sample");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

/// Effective sample size of a chain from its autocorrelations, summed until
/// the first non-positive pair.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0: f64 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| {
        series[..n - lag]
            .iter()
            .zip(&series[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / (n as f64 * c0)
    };
    let mut tau = 1.0;
    let mut lag = 1;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    (n as f64 / tau).min(n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub setting: Setting,
    pub n: usize,
    pub replication: usize,
    pub median: f64,
    pub q90: f64,
    pub acceptance_rate: f64,
    pub seed: u64,
}

impl SummaryRow {
    pub fn from_summary(s: &PosteriorSummary, n: usize, replication: usize, seed: u64) -> Self {
        SummaryRow {
            setting: s.setting,
            n,
            replication,
            median: s.distance_quantile(0.5),
            q90: s.contraction_radius,
            acceptance_rate: s.diagnostics.acceptance_rate,
            seed,
        }
    }
}

/// CSV with columns
/// `setting,n,replication,distance_quantile_0.5,distance_quantile_0.9,acceptance_rate,seed`.
pub fn write_summaries_csv<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "setting",
        "n",
        "replication",
        "distance_quantile_0.5",
        "distance_quantile_0.9",
        "acceptance_rate",
        "seed",
    ])?;
    for r in rows {
        w.write_record([
            r.setting.name().to_string(),
            r.n.to_string(),
            r.replication.to_string(),
            r.median.to_string(),
            r.q90.to_string(),
            r.acceptance_rate.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
