use super::prior::{prior_covariance_matrix, GaussianPrior, Grid};
use crate::error::{Error, Result};
use crate::linalg::{jittered_cholesky, lower_mul};
use crate::rng::{derive_seed, stream};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use std::io::Write;

/// Cholesky factor of a prior on a fixed grid, reusable across draws.
#[derive(Clone, Debug)]
pub struct PriorSampler {
    grid: Grid,
    lower: DMatrix<f64>,
    jitter: f64,
}

impl PriorSampler {
    pub fn new(prior: &GaussianPrior, grid: &Grid) -> Result<Self> {
        let ch = jittered_cholesky(&prior_covariance_matrix(prior, grid))?;
        Ok(PriorSampler {
            grid: grid.clone(),
            lower: ch.lower,
            jitter: ch.jitter,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.grid.len();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n];
        lower_mul(&self.lower, &z, &mut out);
        out
    }

    /// Whether a fresh draw stays inside `[-eps, eps]` on the whole grid.
    /// Consumes the same normals as [`draw`](Self::draw) but stops the
    /// triangular product at the first excursion.
    pub fn draw_within<R: Rng + ?Sized>(&self, rng: &mut R, eps: f64, z: &mut Vec<f64>) -> bool {
        let n = self.grid.len();
        z.clear();
        z.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        for i in 0..n {
            let row = self.lower.row(i);
            let mut s = 0.0;
            for j in 0..=i {
                s += row[j] * z[j];
            }
            if s.abs() > eps {
                return false;
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
}

/// `n_paths` independent prior paths; path `i` uses the stream
/// `derive_seed(seed, [i])`.
pub fn sample_paths(
    prior: &GaussianPrior,
    grid: &Grid,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<PathSample>> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    let sampler = PriorSampler::new(prior, grid)?;
    Ok((0..n_paths)
        .map(|i| {
            let s = derive_seed(seed, &[i as u64]);
            let values = sampler.draw(&mut stream(s));
            PathSample {
                grid: grid.points().to_vec(),
                values,
                seed: s,
            }
        })
        .collect())
}

/// CSV with columns `t,value,path_id`.
pub fn write_paths_csv<W: Write>(out: W, paths: &[PathSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "path_id"])?;
    for (id, p) in paths.iter().enumerate() {
        for (t, v) in p.grid.iter().zip(&p.values) {
            w.write_record([format!("{t}"), format!("{v}"), id.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}
