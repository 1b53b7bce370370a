//! Prior-reversible autoregressive Metropolis–Hastings on a grid.

use super::{
    effective_sample_size, hellinger_values, ClassificationData, DensityModel, Diagnostics, McmcConfig,
    PosteriorSummary,
};
use crate::error::{Error, Result};
use crate::experiments::truth::Setting;
use crate::processes::{GaussianPrior, Grid, PriorSampler};
use crate::quad;
use crate::rkhs::GridFunction;
use crate::rng::stream;
use rand::Rng;

/// Iterations between step-size updates during burn-in.
const ADAPT_WINDOW: usize = 100;
const BETA_MIN: f64 = 0.01;
const BETA_MAX: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOutput {
    /// Retained states, every `thin`-th after burn-in.
    pub draws: Vec<Vec<f64>>,
    /// Log-likelihood of each retained state.
    pub loglik: Vec<f64>,
    /// Acceptance rate after burn-in.
    pub acceptance_rate: f64,
    /// Frozen step size.
    pub beta: f64,
}

/// Run the chain `w' = sqrt(1 − β²) w + β ξ`, `ξ` a fresh prior draw,
/// accepting with probability `min(1, exp(ℓ(w') − ℓ(w)))`. The chain starts
/// from a prior draw; `β` is tuned towards the target acceptance during
/// burn-in and frozen afterwards.
pub fn run_pcn<F: Fn(&[f64]) -> f64>(sampler: &PriorSampler, loglik: F, cfg: &McmcConfig) -> Result<ChainOutput> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed);
    let mut w = sampler.draw(&mut rng);
    let mut ll = loglik(&w);
    let mut beta = cfg.beta_init;
    let mut window_accepts = 0usize;
    let mut accepts = 0usize;
    let mut draws = Vec::with_capacity(cfg.retained());
    let mut lls = Vec::with_capacity(cfg.retained());
    let mut prop = vec![0.0; w.len()];
    for iter in 0..cfg.chain_length {
        let xi = sampler.draw(&mut rng);
        let keep = (1.0 - beta * beta).sqrt();
        for ((p, a), b) in prop.iter_mut().zip(&w).zip(&xi) {
            *p = keep * a + beta * b;
        }
        let ll_prop = loglik(&prop);
        let u: f64 = rng.random();
        let accepted = !ll_prop.is_nan() && u < (ll_prop - ll).exp();
        if accepted {
            std::mem::swap(&mut w, &mut prop);
            ll = ll_prop;
        }
        if iter < cfg.burn_in {
            window_accepts += accepted as usize;
            if (iter + 1) % ADAPT_WINDOW == 0 {
                let rate = window_accepts as f64 / ADAPT_WINDOW as f64;
                beta = (beta * (2.0 * (rate - cfg.target_acceptance)).exp()).clamp(BETA_MIN, BETA_MAX);
                window_accepts = 0;
            }
        } else {
            accepts += accepted as usize;
            if (iter - cfg.burn_in).is_multiple_of(cfg.thin) {
                draws.push(w.clone());
                lls.push(ll);
            }
        }
    }
    if accepts == 0 {
        return Err(Error::ZeroAcceptance(beta));
    }
    Ok(ChainOutput {
        draws,
        loglik: lls,
        acceptance_rate: accepts as f64 / (cfg.chain_length - cfg.burn_in) as f64,
        beta,
    })
}

/// Grid cell and linear weight of `t`.
fn locate(grid: &[f64], t: f64) -> (usize, f64) {
    let n = grid.len();
    if n == 1 {
        return (0, 0.0);
    }
    let i = grid.partition_point(|&g| g <= t).clamp(1, n - 1) - 1;
    let frac = ((t - grid[i]) / (grid[i + 1] - grid[i])).clamp(0.0, 1.0);
    (i, frac)
}

fn log_normaliser(grid: &[f64], w: &[f64]) -> f64 {
    let shift = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = w.iter().map(|v| (v - shift).exp()).collect();
    shift + quad::trapezoid(grid, &e).ln()
}

/// `log Ψ(x)` for the logistic `Ψ`, without overflow.
fn log_logistic(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn summarise(
    setting: Setting,
    grid: &[f64],
    chain: ChainOutput,
    distance: impl Fn(&[f64]) -> f64,
) -> Result<PosteriorSummary> {
    let distances: Vec<f64> = chain.draws.iter().map(|d| distance(d)).collect();
    let ess = effective_sample_size(&chain.loglik);
    let draws = chain
        .draws
        .into_iter()
        .map(|d| GridFunction::new(grid.to_vec(), d))
        .collect::<Result<Vec<_>>>()?;
    Ok(PosteriorSummary::new(
        setting,
        draws,
        Vec::new(),
        distances,
        Diagnostics {
            acceptance_rate: chain.acceptance_rate,
            effective_sample_proxy: ess,
        },
    ))
}

/// Posterior for `p_w = e^w / ∫ e^w` from i.i.d. samples on [0, 1], with
/// distances `h(p_w, p₀)` to `p₀ ∝ e^{w₀}`.
pub fn density_posterior<F: Fn(f64) -> f64>(
    prior: &GaussianPrior,
    samples: &[f64],
    w0: F,
    mcmc: &McmcConfig,
) -> Result<PosteriorSummary> {
    density_posterior_on(prior, samples, w0, mcmc, &Grid::default())
}

pub fn density_posterior_on<F: Fn(f64) -> f64>(
    prior: &GaussianPrior,
    samples: &[f64],
    w0: F,
    mcmc: &McmcConfig,
    grid: &Grid,
) -> Result<PosteriorSummary> {
    let pts = grid.points();
    if let Some(t) = samples.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::InvalidParameter(format!("sample {t} outside [0, 1]")));
    }
    // Σ_i w(X_i) = v · w with v collecting the interpolation weights
    let mut v = vec![0.0; pts.len()];
    for &x in samples {
        let (i, f) = locate(pts, x);
        v[i] += 1.0 - f;
        if f > 0.0 {
            v[i + 1] += f;
        }
    }
    let n = samples.len() as f64;
    let loglik = |w: &[f64]| {
        if n == 0.0 {
            return 0.0;
        }
        v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - n * log_normaliser(pts, w)
    };
    let truth = DensityModel::from_log_density(pts.to_vec(), pts.iter().map(|&t| w0(t)).collect())?;
    let sampler = PriorSampler::new(prior, grid)?;
    let chain = run_pcn(&sampler, loglik, mcmc)?;
    summarise(Setting::Density, pts, chain, |w| {
        let z = log_normaliser(pts, w);
        let p: Vec<f64> = w.iter().map(|x| (x - z).exp()).collect();
        hellinger_values(pts, &p, &truth.p.values)
    })
}

/// Posterior for `Pr(Y = 1 | X = t) = Ψ(w(t))` with `Ψ` logistic, with
/// distances `‖Ψ(w) − Ψ(w₀)‖_{L₂[0,1]}`.
pub fn classification_posterior<F: Fn(f64) -> f64>(
    prior: &GaussianPrior,
    data: &ClassificationData,
    w0: F,
    mcmc: &McmcConfig,
) -> Result<PosteriorSummary> {
    classification_posterior_on(prior, data, w0, mcmc, &Grid::default())
}

pub fn classification_posterior_on<F: Fn(f64) -> f64>(
    prior: &GaussianPrior,
    data: &ClassificationData,
    w0: F,
    mcmc: &McmcConfig,
    grid: &Grid,
) -> Result<PosteriorSummary> {
    let pts = grid.points();
    let cells: Vec<(usize, f64, f64)> = data
        .covariates
        .iter()
        .zip(&data.labels)
        .map(|(&x, &y)| {
            let (i, f) = locate(pts, x);
            (i, f, if y { 1.0 } else { -1.0 })
        })
        .collect();
    let loglik = |w: &[f64]| {
        cells
            .iter()
            .map(|&(i, f, s)| {
                let wx = if f > 0.0 { (1.0 - f) * w[i] + f * w[i + 1] } else { w[i] };
                log_logistic(s * wx)
            })
            .sum::<f64>()
    };
    let f0: Vec<f64> = pts.iter().map(|&t| logistic(w0(t))).collect();
    let sampler = PriorSampler::new(prior, grid)?;
    let chain = run_pcn(&sampler, loglik, mcmc)?;
    summarise(Setting::Classification, pts, chain, |w| {
        let sq: Vec<f64> = w.iter().zip(&f0).map(|(a, b)| (logistic(*a) - b).powi(2)).collect();
        quad::trapezoid(pts, &sq).sqrt()
    })
}
