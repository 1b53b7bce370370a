use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::config::{default_grid_size, PriorSpec};
use gpscale::experiments::{
    contraction_experiment, fit_replication, make_truth, write_rate_fit_csv, ExperimentConfig, Setting,
};
use gpscale::inference::{write_summaries_csv, McmcConfig, SummaryRow};
use gpscale::processes::{sample_paths, write_paths_csv, Grid};
use gpscale::rkhs::{concentration_estimate, write_concentration_csv};
use gpscale::rng::derive_seed;
use gpscale::smallball::{smallball_mc_on, write_smallball_csv, DEFAULT_BATCH, MIN_PATHS};

/// Named CSV payloads produced by a command.
pub type Outputs = Vec<(String, Vec<u8>)>;

pub trait Command: Serialize + for<'de> Deserialize<'de> {
    const NAME: &'static str;
    /// Checks that need no simulation.
    fn validate(&self) -> Result<()>;
    fn run(&self) -> Result<Outputs>;
}

fn check_grid(grid_size: usize) -> Result<Grid> {
    if grid_size < 2 {
        bail!("grid_size must be at least 2, got {grid_size}");
    }
    Ok(Grid::uniform(grid_size))
}

fn check_epsilons(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        bail!("epsilons must not be empty");
    }
    if let Some(e) = eps.iter().find(|e| !(**e > 0.0)) {
        bail!("epsilons must be positive, got {e}");
    }
    Ok(())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> gpscale::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplePrior {
    pub prior: PriorSpec,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
}

impl Command for SamplePrior {
    const NAME: &'static str = "sample-prior";

    fn validate(&self) -> Result<()> {
        self.prior.prior()?;
        check_grid(self.grid_size)?;
        if self.n_paths == 0 {
            bail!("n_paths must be at least 1");
        }
        Ok(())
    }

    fn run(&self) -> Result<Outputs> {
        let paths = sample_paths(&self.prior.prior()?, &check_grid(self.grid_size)?, self.n_paths, self.seed)?;
        Ok(vec![("paths.csv".into(), csv_bytes(|b| write_paths_csv(b, &paths))?)])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmallBall {
    pub priors: Vec<PriorSpec>,
    pub epsilons: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
}

impl Command for SmallBall {
    const NAME: &'static str = "smallball";

    fn validate(&self) -> Result<()> {
        if self.priors.is_empty() {
            bail!("priors must not be empty");
        }
        for p in &self.priors {
            p.prior()?;
        }
        check_epsilons(&self.epsilons)?;
        check_grid(self.grid_size)?;
        if self.n_paths < MIN_PATHS {
            bail!("n_paths must be at least {MIN_PATHS}");
        }
        Ok(())
    }

    /// One row per (prior, epsilon) with seed `derive_seed(seed, [i, j])`.
    fn run(&self) -> Result<Outputs> {
        let grid = check_grid(self.grid_size)?;
        let mut rows = Vec::new();
        for (i, p) in self.priors.iter().enumerate() {
            let prior = p.prior()?;
            for (j, &eps) in self.epsilons.iter().enumerate() {
                let seed = derive_seed(self.seed, &[i as u64, j as u64]);
                rows.push(smallball_mc_on(&prior, eps, self.n_paths, seed, &grid, DEFAULT_BATCH)?);
            }
        }
        Ok(vec![("smallball.csv".into(), csv_bytes(|b| write_smallball_csv(b, &rows))?)])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthSpec {
    pub alpha: f64,
    #[serde(default = "unit")]
    pub amplitude: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Concentration {
    pub prior: PriorSpec,
    pub truth: TruthSpec,
    pub epsilons: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
}

impl Command for Concentration {
    const NAME: &'static str = "concentration";

    fn validate(&self) -> Result<()> {
        self.prior.prior()?;
        check_epsilons(&self.epsilons)?;
        check_grid(self.grid_size)?;
        if !(self.truth.alpha > 0.0) || !self.truth.amplitude.is_finite() {
            bail!("truth needs a positive alpha and a finite amplitude");
        }
        if self.n_paths < MIN_PATHS {
            bail!("n_paths must be at least {MIN_PATHS}");
        }
        Ok(())
    }

    fn run(&self) -> Result<Outputs> {
        let grid = check_grid(self.grid_size)?;
        let prior = self.prior.prior()?;
        let truth = make_truth(Setting::Regression, self.truth.alpha).with_amplitude(self.truth.amplitude);
        let rows = self
            .epsilons
            .iter()
            .enumerate()
            .map(|(j, &eps)| {
                let seed = derive_seed(self.seed, &[j as u64]);
                let sb = smallball_mc_on(&prior, eps, self.n_paths, seed, &grid, DEFAULT_BATCH)?;
                concentration_estimate(&prior, &truth, eps, &sb)
            })
            .collect::<gpscale::Result<Vec<_>>>()?;
        Ok(vec![("concentration.csv".into(), csv_bytes(|b| write_concentration_csv(b, &rows))?)])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fit {
    pub setting: Setting,
    pub prior: PriorSpec,
    pub alpha: f64,
    pub n: usize,
    #[serde(default = "one")]
    pub replications: usize,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

fn one() -> usize {
    1
}

impl Command for Fit {
    const NAME: &'static str = "fit";

    fn validate(&self) -> Result<()> {
        self.prior.prior()?;
        check_grid(self.grid_size)?;
        if !(self.alpha > 0.0) {
            bail!("alpha must be positive, got {}", self.alpha);
        }
        if self.n == 0 || self.replications == 0 {
            bail!("n and replications must be at least 1");
        }
        if self.setting != Setting::Regression {
            self.mcmc.validate()?;
        }
        Ok(())
    }

    /// Replication `r` uses seed `derive_seed(seed, [r])`.
    fn run(&self) -> Result<Outputs> {
        let grid = check_grid(self.grid_size)?;
        let prior = self.prior.prior()?;
        let truth = make_truth(self.setting, self.alpha);
        let rows = (0..self.replications)
            .map(|r| {
                let seed = derive_seed(self.seed, &[r as u64]);
                let s = fit_replication(self.setting, &prior, &truth, self.n, seed, &grid, &self.mcmc)?;
                Ok(SummaryRow::from_summary(&s, self.n, r, seed))
            })
            .collect::<gpscale::Result<Vec<_>>>()?;
        Ok(vec![("posterior.csv".into(), csv_bytes(|b| write_summaries_csv(b, &rows))?)])
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rates(pub ExperimentConfig);

impl Command for Rates {
    const NAME: &'static str = "rates";

    fn validate(&self) -> Result<()> {
        Ok(self.0.validate()?)
    }

    fn run(&self) -> Result<Outputs> {
        let result = contraction_experiment(&self.0)?;
        let rows: Vec<SummaryRow> = result.replications.iter().map(|r| r.row(self.0.setting)).collect();
        Ok(vec![
            ("replications.csv".into(), csv_bytes(|b| write_summaries_csv(b, &rows))?),
            (
                "rate_fit.csv".into(),
                csv_bytes(|b| write_rate_fit_csv(b, std::slice::from_ref(&result)))?,
            ),
        ])
    }
}
