//! Contraction-rate experiments: simulate data, compute posteriors over a
//! ladder of sample sizes and fit the decay of the contraction radius.

use super::scaling::{contraction_rate, scaling_rule, PriorFamily};
use super::truth::{make_truth, Setting, SmoothTruth};
use crate::error::{Error, Result};
use crate::inference::{
    classification_posterior_on, density_posterior_on, logistic, regression_posterior_on, ClassificationData,
    McmcConfig, PosteriorSummary, RegressionData, SummaryRow,
};
use crate::processes::{GaussianPrior, Grid};
use crate::quad;
use crate::rng::{derive_seed, stream};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::io::Write;

/// Noise level of the simulated regression data.
pub const REGRESSION_SIGMA: f64 = 0.5;
/// Exact posterior draws per regression fit.
pub const REGRESSION_DRAWS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub struct RateFit {
    pub n_values: Vec<u64>,
    pub radii: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub target_slope: f64,
}

impl RateFit {
    /// Two-sided `level` confidence interval for the slope from the
    /// Student-t distribution with `m − 2` degrees of freedom.
    pub fn slope_ci(&self, level: f64) -> (f64, f64) {
        let df = (self.n_values.len() - 2) as f64;
        let t = StudentsT::new(0.0, 1.0, df)
            .expect("at least one degree of freedom")
            .inverse_cdf(0.5 + level / 2.0);
        (self.slope - t * self.slope_se, self.slope + t * self.slope_se)
    }
}

/// Least-squares line through `(log n, log radius)` with target slope
/// `−α/(1+2α)`.
pub fn rate_fit(n_values: &[u64], radii: &[f64], alpha: f64) -> Result<RateFit> {
    if n_values.len() != radii.len() {
        return Err(Error::LengthMismatch(n_values.len(), radii.len()));
    }
    if n_values.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "rate fit needs at least 3 points, got {}",
            n_values.len()
        )));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::InvalidParameter(format!("radii must be positive, got {r}")));
    }
    let x: Vec<f64> = n_values.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let m = x.len() as f64;
    let xm = x.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = (ss_res / (m - 2.0) / sxx).sqrt();
    Ok(RateFit {
        n_values: n_values.to_vec(),
        radii: radii.to_vec(),
        slope,
        intercept,
        slope_se,
        target_slope: -alpha / (1.0 + 2.0 * alpha),
    })
}

/// Slope of the exact rate expression over `n_values`, which includes the
/// logarithmic factors for stationary priors.
pub fn log_corrected_slope(family: PriorFamily, alpha: f64, n_values: &[u64]) -> Result<f64> {
    let radii: Vec<f64> = n_values.iter().map(|&n| contraction_rate(family, alpha, n)).collect();
    Ok(rate_fit(n_values, &radii, alpha)?.slope)
}

fn default_grid_size() -> usize {
    crate::processes::DEFAULT_GRID_SIZE
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub prior_family: PriorFamily,
    pub alpha: f64,
    #[serde(default)]
    pub k: u32,
    pub n_values: Vec<u64>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub override_c: Option<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.len() < 4 {
            return Err(Error::InvalidParameter("need at least 4 sample sizes".into()));
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) || self.n_values[0] < 2 {
            return Err(Error::InvalidParameter("sample sizes must increase from at least 2".into()));
        }
        if self.replications < 10 {
            return Err(Error::InvalidParameter(format!(
                "need at least 10 replications, got {}",
                self.replications
            )));
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter("grid needs at least 2 points".into()));
        }
        if let Some(c) = self.override_c {
            if !(c > 0.0) {
                return Err(Error::InvalidParameter(format!("override_c must be positive, got {c}")));
            }
        }
        if self.setting != Setting::Regression {
            self.mcmc.validate()?;
        }
        scaling_rule(self.prior_family, self.alpha, self.n_values[0], self.k)?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replication {
    pub n: u64,
    pub replication: usize,
    pub seed: u64,
    pub c: f64,
    pub median: f64,
    pub radius: f64,
    pub acceptance_rate: f64,
}

impl Replication {
    pub fn row(&self, setting: Setting) -> SummaryRow {
        SummaryRow {
            setting,
            n: self.n as usize,
            replication: self.replication,
            median: self.median,
            q90: self.radius,
            acceptance_rate: self.acceptance_rate,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Sorted by `(n, replication)`.
    pub replications: Vec<Replication>,
    /// Fit of the mean radius per `n`.
    pub fit: RateFit,
    /// Fit of the median radius per `n`.
    pub median_fit: RateFit,
    pub log_corrected_slope: f64,
}

/// Draws from the density `∝ e^{w₀}` by inverting its piecewise-linear CDF
/// on the grid.
pub fn sample_density<R: Rng>(truth: &SmoothTruth, grid: &Grid, n: usize, rng: &mut R) -> Vec<f64> {
    let pts = grid.points();
    let e: Vec<f64> = pts.iter().map(|&t| truth.value(t).exp()).collect();
    let cdf = quad::cumulative_trapezoid(pts, &e);
    let total = *cdf.last().expect("grid is non-empty");
    (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let i = cdf.partition_point(|&v| v < u).clamp(1, pts.len() - 1);
            let (c0, c1) = (cdf[i - 1], cdf[i]);
            let f = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
            pts[i - 1] + f * (pts[i] - pts[i - 1])
        })
        .collect()
}

/// Simulate `n` observations from `truth` in `setting` with the stream
/// `derive_seed(seed, [0])` and summarise the posterior under `prior`, whose
/// own randomness uses `derive_seed(seed, [1])`. Regression uses the exact
/// posterior with known noise level, the other settings run pCN with `mcmc`.
pub fn fit_replication(
    setting: Setting,
    prior: &GaussianPrior,
    truth: &SmoothTruth,
    n: usize,
    seed: u64,
    grid: &Grid,
    mcmc: &McmcConfig,
) -> Result<PosteriorSummary> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let mut rng = stream(derive_seed(seed, &[0]));
    let post_seed = derive_seed(seed, &[1]);
    let w0 = |t: f64| truth.value(t);
    let mcmc = McmcConfig {
        seed: post_seed,
        ..*mcmc
    };
    match setting {
        Setting::Regression => {
            let design: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            let y: Vec<f64> = design
                .iter()
                .map(|&t| w0(t) + REGRESSION_SIGMA * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let data = RegressionData::new(design, y, REGRESSION_SIGMA)?;
            Ok(regression_posterior_on(prior, &data, REGRESSION_SIGMA, grid)?.summary(w0, REGRESSION_DRAWS, post_seed))
        }
        Setting::Density => {
            let xs = sample_density(truth, grid, n, &mut rng);
            density_posterior_on(prior, &xs, w0, &mcmc, grid)
        }
        Setting::Classification => {
            let xs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let ys: Vec<bool> = xs.iter().map(|&x| rng.random::<f64>() < logistic(w0(x))).collect();
            classification_posterior_on(prior, &ClassificationData::new(xs, ys)?, w0, &mcmc, grid)
        }
    }
}

fn run_cell(cfg: &ExperimentConfig, truth: &SmoothTruth, grid: &Grid, n: u64, rep: usize) -> Result<Replication> {
    let seed = derive_seed(cfg.seed, &[n, rep as u64]);
    let (c_rule, a) = scaling_rule(cfg.prior_family, cfg.alpha, n, cfg.k)?;
    let c = cfg.override_c.unwrap_or(c_rule);
    let prior = cfg.prior_family.prior(c, cfg.k, a)?;
    let summary = fit_replication(cfg.setting, &prior, truth, n as usize, seed, grid, &cfg.mcmc)?;
    Ok(Replication {
        n,
        replication: rep,
        seed,
        c,
        median: summary.distance_quantile(0.5),
        radius: summary.contraction_radius,
        acceptance_rate: summary.diagnostics.acceptance_rate,
    })
}

/// Run every `(n, replication)` cell, each with its own seed derived from
/// `(seed, n, replication)`, and fit the mean and median contraction radius
/// against `n`.
pub fn contraction_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let truth = make_truth(cfg.setting, cfg.alpha);
    let grid = Grid::uniform(cfg.grid_size);
    let cells: Vec<(u64, usize)> = cfg
        .n_values
        .iter()
        .flat_map(|&n| (0..cfg.replications).map(move |r| (n, r)))
        .collect();
    let mut replications = cells
        .par_iter()
        .map(|&(n, r)| run_cell(cfg, &truth, &grid, n, r))
        .collect::<Result<Vec<_>>>()?;
    replications.sort_by_key(|a| (a.n, a.replication));
    let per_n = |f: &dyn Fn(&Replication) -> f64| -> Vec<f64> {
        cfg.n_values
            .iter()
            .map(|&n| {
                let v: Vec<f64> = replications.iter().filter(|r| r.n == n).map(f).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect()
    };
    let fit = rate_fit(&cfg.n_values, &per_n(&|r| r.radius), cfg.alpha)?;
    let median_fit = rate_fit(&cfg.n_values, &per_n(&|r| r.median), cfg.alpha)?;
    Ok(ExperimentResult {
        config: cfg.clone(),
        fit,
        median_fit,
        log_corrected_slope: log_corrected_slope(cfg.prior_family, cfg.alpha, &cfg.n_values)?,
        replications,
    })
}

/// CSV with columns
/// `alpha,family,slope,slope_se,target_slope,n_min,n_max,log_corrected_slope`.
pub fn write_rate_fit_csv<W: Write>(out: W, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "alpha",
        "family",
        "slope",
        "slope_se",
        "target_slope",
        "n_min",
        "n_max",
        "log_corrected_slope",
    ])?;
    for r in results {
        w.write_record([
            r.config.alpha.to_string(),
            r.config.prior_family.name().to_string(),
            r.fit.slope.to_string(),
            r.fit.slope_se.to_string(),
            r.fit.target_slope.to_string(),
            r.fit.n_values[0].to_string(),
            r.fit.n_values[r.fit.n_values.len() - 1].to_string(),
            r.log_corrected_slope.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
