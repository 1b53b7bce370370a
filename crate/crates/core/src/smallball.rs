//! Monte Carlo small-deviation probabilities and fits of their bounds.

use crate::error::{Error, Result};
use crate::processes::{GaussianPrior, Grid, PriorSampler};
use crate::rng::{derive_seed, stream};
use rayon::prelude::*;
use std::io::Write;

pub const MIN_PATHS: usize = 1000;
pub const DEFAULT_BATCH: usize = 10_000;
const Z95: f64 = 1.959963984540054;

#[derive(Clone, Debug, PartialEq)]
pub struct SmallBallEstimate {
    pub prior: GaussianPrior,
    pub epsilon: f64,
    pub n_paths: usize,
    pub hits: usize,
    /// `−log(hits/n_paths)`, or the lower bound `log(n_paths)` when no path
    /// stayed inside the ball.
    pub neg_log_prob: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub grid_size: usize,
    pub seed: u64,
    pub zero_hits: bool,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: usize, n: usize, z: f64) -> (f64, f64) {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    let lo = if hits == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if hits as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Estimate `−log Pr(max_grid |W| ≤ ε)` on the default grid.
pub fn smallball_mc(prior: &GaussianPrior, epsilon: f64, n_paths: usize, seed: u64) -> Result<SmallBallEstimate> {
    smallball_mc_on(prior, epsilon, n_paths, seed, &Grid::default(), DEFAULT_BATCH)
}

/// As [`smallball_mc`] on an explicit grid and batch size. Batch `b` draws
/// from the stream seeded by `derive_seed(seed, [b])`.
pub fn smallball_mc_on(
    prior: &GaussianPrior,
    epsilon: f64,
    n_paths: usize,
    seed: u64,
    grid: &Grid,
    batch: usize,
) -> Result<SmallBallEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_PATHS} paths, got {n_paths}"
        )));
    }
    if batch == 0 {
        return Err(Error::InvalidParameter("batch size must be positive".into()));
    }
    let sampler = PriorSampler::new(prior, grid)?;
    let batches = n_paths.div_ceil(batch);
    let hits: usize = (0..batches)
        .into_par_iter()
        .map(|b| {
            let size = batch.min(n_paths - b * batch);
            let mut rng = stream(derive_seed(seed, &[b as u64]));
            let mut z = Vec::with_capacity(grid.len());
            (0..size)
                .filter(|_| sampler.draw_within(&mut rng, epsilon, &mut z))
                .count()
        })
        .sum();
    let (p_lo, p_hi) = wilson_interval(hits, n_paths, Z95);
    let zero_hits = hits == 0;
    let neg_log_prob = if zero_hits {
        (n_paths as f64).ln()
    } else {
        -(hits as f64 / n_paths as f64).ln()
    };
    Ok(SmallBallEstimate {
        prior: prior.clone(),
        epsilon,
        n_paths,
        hits,
        neg_log_prob,
        ci_low: -p_hi.ln(),
        ci_high: if p_lo > 0.0 { -p_lo.ln() } else { f64::INFINITY },
        grid_size: grid.len(),
        seed,
        zero_hits,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundFit {
    pub fitted_constant: f64,
    pub r_squared: f64,
}

/// Predictor of `−log Pr(‖W‖ ≤ ε)` from the upper bound of the prior's family:
/// `(1/c) log(1/(cε²))²` for stationary priors and
/// `(c^{k+½} ε)^{−1/(k+½)} + k log(1/(√a ε))` for integrated ones.
pub fn bound_predictor(prior: &GaussianPrior, epsilon: f64) -> f64 {
    let c = prior.c();
    match prior.ibm_params() {
        None => (1.0 / (c * epsilon * epsilon)).ln().powi(2) / c,
        Some((a, k)) => {
            let h = k as f64 + 0.5;
            let main = (1.0 / (c.powf(h) * epsilon)).powf(1.0 / h);
            if a.is_infinite() {
                main
            } else {
                main + k as f64 * (1.0 / (a.sqrt() * epsilon)).ln()
            }
        }
    }
}

/// Least-squares fit of `neg_log_prob ≈ C · predictor` through the origin.
/// `r_squared` is `1 − SS_res / SS_tot` with `SS_tot` about the mean.
pub fn bound_fit(estimates: &[SmallBallEstimate]) -> Result<BoundFit> {
    if estimates.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "bound fit needs at least 6 design points, got {}",
            estimates.len()
        )));
    }
    let family = estimates[0].prior.family_name();
    if estimates.iter().any(|e| e.prior.family_name() != family) {
        return Err(Error::MixedFamilies);
    }
    let stationary = estimates[0].prior.ibm_params().is_none();
    if stationary && estimates.iter().any(|e| e.prior.c() > 1.0) {
        return Err(Error::InvalidParameter("stationary bound fit requires c <= 1".into()));
    }
    let x: Vec<f64> = estimates.iter().map(|e| bound_predictor(&e.prior, e.epsilon)).collect();
    let y: Vec<f64> = estimates.iter().map(|e| e.neg_log_prob).collect();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let fitted_constant = sxy / sxx;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - fitted_constant * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    Ok(BoundFit {
        fitted_constant,
        r_squared,
    })
}

/// CSV with columns
/// `family,c,a,k,epsilon,n_paths,hits,neg_log_prob,ci_low,ci_high,grid_size,seed`.
/// `a` and `k` are empty for stationary priors.
pub fn write_smallball_csv<W: Write>(out: W, rows: &[SmallBallEstimate]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "c",
        "a",
        "k",
        "epsilon",
        "n_paths",
        "hits",
        "neg_log_prob",
        "ci_low",
        "ci_high",
        "grid_size",
        "seed",
    ])?;
    for r in rows {
        let (a, k) = match r.prior.ibm_params() {
            Some((a, k)) => (a.to_string(), k.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.prior.family_name().to_string(),
            r.prior.c().to_string(),
            a,
            k,
            r.epsilon.to_string(),
            r.n_paths.to_string(),
            r.hits.to_string(),
            r.neg_log_prob.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            r.grid_size.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se(c: f64) -> GaussianPrior {
        GaussianPrior::squared_exponential(c).unwrap()
    }

    fn separated(hi: &SmallBallEstimate, lo: &SmallBallEstimate) -> bool {
        hi.ci_low > lo.ci_high
    }

    #[test]
    fn wilson_matches_hand_computation() {
        // p = 0.5, n = 100, z = 1.96: centre 0.5, half 0.0958...
        let (lo, hi) = wilson_interval(50, 100, Z95);
        let z2 = Z95 * Z95;
        let half = Z95 * (0.25 / 100.0 + z2 / 40000.0).sqrt() / (1.0 + z2 / 100.0);
        assert!((lo - (0.5 - half)).abs() < 1e-15);
        assert!((hi - (0.5 + half)).abs() < 1e-15);
        let (lo0, hi0) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo0, 0.0);
        assert!((hi0 - z2 / (1000.0 + z2)).abs() < 1e-15);
    }

    #[test]
    fn huge_ball_contains_every_path() {
        for prior in [se(0.5), GaussianPrior::modified_ibm(1, 1.0, 1.0).unwrap()] {
            let e = smallball_mc(&prior, 1e3 * 2f64.sqrt(), 2000, 1).unwrap();
            assert_eq!(e.hits, e.n_paths);
            assert_eq!(e.neg_log_prob, 0.0);
            assert!(e.ci_low <= e.neg_log_prob && e.neg_log_prob <= e.ci_high);
        }
    }

    #[test]
    fn zero_hits_reports_lower_bound() {
        let e = smallball_mc(&se(0.1), 0.01, 1000, 3).unwrap();
        assert!(e.zero_hits);
        assert_eq!(e.hits, 0);
        assert!((e.neg_log_prob - 1000f64.ln()).abs() < 1e-12);
        assert!(e.ci_high.is_infinite());
        assert!(e.ci_low <= e.neg_log_prob);
    }

    #[test]
    fn identical_seeds_give_identical_estimates() {
        let a = smallball_mc(&se(0.5), 0.5, 5000, 11).unwrap();
        let b = smallball_mc(&se(0.5), 0.5, 5000, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(smallball_mc(&se(0.5), 0.0, 5000, 1).is_err());
        assert!(smallball_mc(&se(0.5), 0.5, 999, 1).is_err());
    }

    #[test]
    fn brownian_motion_matches_fine_grid_oracle() {
        // The grid maximum of Brownian motion misses the continuum supremum by
        // about 0.5826 √Δt, so both runs are referred to the same continuum
        // barrier by shifting ε.
        let bm = GaussianPrior::modified_ibm(0, 1.0, 1e12).unwrap();
        let shift = |n: usize| 0.5826 * (1.0 / (n - 1) as f64).sqrt();
        let eps = 0.5;
        let coarse = smallball_mc_on(&bm, eps, 100_000, 5, &Grid::uniform(256), DEFAULT_BATCH).unwrap();
        let fine_eps = eps + shift(256) - shift(1024);
        let fine = smallball_mc_on(&bm, fine_eps, 100_000, 6, &Grid::uniform(1024), DEFAULT_BATCH).unwrap();
        assert!(
            coarse.ci_low <= fine.ci_high && fine.ci_low <= coarse.ci_high,
            "{coarse:?} vs {fine:?}"
        );
        // and the continuum series with the barrier shifted outward
        let e = eps + shift(256);
        let series: f64 = (0..50)
            .map(|j| {
                let m = (2 * j + 1) as f64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                4.0 / std::f64::consts::PI * sign / m * (-m * m * std::f64::consts::PI.powi(2) / (8.0 * e * e)).exp()
            })
            .sum();
        assert!((coarse.neg_log_prob + series.ln()).abs() < 0.15);
    }

    #[test]
    fn monotone_in_epsilon() {
        let p = se(0.25);
        let est: Vec<SmallBallEstimate> = [0.3, 0.45, 0.7, 1.0]
            .iter()
            .map(|&e| smallball_mc(&p, e, 20_000, 7).unwrap())
            .collect();
        for w in est.windows(2) {
            assert!(separated(&w[0], &w[1]), "{} vs {}", w[0].neg_log_prob, w[1].neg_log_prob);
        }
    }

    #[test]
    fn rougher_prior_has_smaller_ball_probability() {
        let wide = smallball_mc(&se(0.5), 0.3, 20_000, 9).unwrap();
        let narrow = smallball_mc(&se(0.25), 0.3, 20_000, 9).unwrap();
        assert!(separated(&narrow, &wide));
    }

    #[test]
    fn self_similarity_of_integrated_brownian_motion() {
        for k in [0, 1] {
            let c = 0.5;
            let eps = if k == 0 { 0.5 } else { 0.3 };
            let h = k as f64 + 0.5;
            let scaled = smallball_mc(&GaussianPrior::pure_ibm(k, c).unwrap(), eps, 20_000, 21).unwrap();
            let unit = smallball_mc(&GaussianPrior::pure_ibm(k, 1.0).unwrap(), c.powf(h) * eps, 20_000, 22).unwrap();
            assert!(scaled.ci_low <= unit.ci_high && unit.ci_low <= scaled.ci_high);
        }
    }

    fn fake(prior: GaussianPrior, epsilon: f64, value: f64) -> SmallBallEstimate {
        SmallBallEstimate {
            prior,
            epsilon,
            n_paths: 1000,
            hits: 1,
            neg_log_prob: value,
            ci_low: value,
            ci_high: value,
            grid_size: 256,
            seed: 0,
            zero_hits: false,
        }
    }

    #[test]
    fn exact_linear_data_fit() {
        let mut rows = Vec::new();
        for c in [1.0, 0.5, 0.25] {
            for eps in [0.3, 0.1] {
                let p = se(c);
                rows.push(fake(p.clone(), eps, 2.5 * bound_predictor(&p, eps)));
            }
        }
        let fit = bound_fit(&rows).unwrap();
        assert!((fit.fitted_constant - 2.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn integrated_predictor_and_fit_errors() {
        let p = GaussianPrior::modified_ibm(1, 0.5, 4.0).unwrap();
        let expected = (1.0 / (0.5f64.powf(1.5) * 0.2)).powf(1.0 / 1.5) + (1.0 / (2.0 * 0.2f64)).ln();
        assert!((bound_predictor(&p, 0.2) - expected).abs() < 1e-12);
        let rows: Vec<_> = (0..5).map(|i| fake(se(0.5), 0.1 + 0.01 * i as f64, 1.0)).collect();
        assert!(matches!(bound_fit(&rows), Err(Error::InsufficientData(_))));
        let mut rows: Vec<_> = (0..6).map(|i| fake(se(0.5), 0.1 + 0.01 * i as f64, 1.0)).collect();
        rows[3] = fake(p, 0.2, 1.0);
        assert!(matches!(bound_fit(&rows), Err(Error::MixedFamilies)));
    }

    #[test]
    fn csv_layout() {
        let rows = vec![
            fake(se(0.5), 0.1, 1.0),
            fake(GaussianPrior::modified_ibm(1, 0.5, 4.0).unwrap(), 0.2, 2.0),
        ];
        let mut buf = Vec::new();
        write_smallball_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "family,c,a,k,epsilon,n_paths,hits,neg_log_prob,ci_low,ci_high,grid_size,seed");
        assert_eq!(lines[1], "squared_exponential,0.5,,,0.1,1000,1,1,1,1,256,0");
        assert!(lines[2].starts_with("modified_ibm,0.5,4,1,0.2,"));
    }
}
