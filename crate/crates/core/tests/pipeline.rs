use gpscale::experiments::{
    contraction_experiment, contraction_rate, make_truth, rate_fit, scaling_rule, write_rate_fit_csv,
    ExperimentConfig, PriorFamily, Setting, SmoothTruth,
};
use gpscale::inference::{hellinger, regression_posterior_on, DensityModel, McmcConfig, RegressionData};
use gpscale::processes::{sample_paths, GaussianPrior, Grid};
use gpscale::rkhs::{concentration_estimate, entropy_net, write_concentration_csv};
use gpscale::smallball::{smallball_mc, wilson_interval};
use proptest::prelude::*;

#[test]
fn concentration_from_a_fresh_smallball_estimate() {
    let prior = GaussianPrior::squared_exponential(0.5).unwrap();
    let truth = make_truth(Setting::Regression, 1.0);
    let mut rows = Vec::new();
    for eps in [0.5, 0.3] {
        let sb = smallball_mc(&prior, eps, 5_000, 9).unwrap();
        let est = concentration_estimate(&prior, &truth, eps, &sb).unwrap();
        assert!(est.approx_term > 0.0 && est.bandwidth.is_some());
        assert_eq!(est.total, est.approx_term + sb.neg_log_prob);
        rows.push(est);
    }
    // a finer resolution costs more on both terms
    assert!(rows[1].approx_term >= rows[0].approx_term);
    assert!(rows[1].smallball_term > rows[0].smallball_term);
    let mut buf = Vec::new();
    write_concentration_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("epsilon,bandwidth,approx_term,smallball_term,total\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn posterior_mean_tracks_the_truth() {
    let grid = Grid::uniform(128);
    let truth = SmoothTruth::sine();
    let n = 2_000;
    let design: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let y: Vec<f64> = design.iter().map(|&t| truth.value(t)).collect();
    let (c, _) = scaling_rule(PriorFamily::SquaredExponential, 1.0, n as u64, 0).unwrap();
    let prior = GaussianPrior::squared_exponential(c).unwrap();
    let post = regression_posterior_on(&prior, &RegressionData::new(design, y, 0.1).unwrap(), 0.1, &grid).unwrap();
    let w0 = truth.values(grid.points());
    let sup = post.mean.sup_distance(&w0);
    assert!(sup < 0.02, "{sup}");
}

#[test]
fn rate_fit_csv_for_a_small_experiment() {
    let cfg = ExperimentConfig {
        setting: Setting::Regression,
        prior_family: PriorFamily::ModifiedIbm,
        alpha: 1.0,
        k: 1,
        n_values: vec![50, 100, 200, 400],
        replications: 10,
        seed: 3,
        grid_size: 64,
        mcmc: McmcConfig::default(),
        override_c: None,
    };
    let r = contraction_experiment(&cfg).unwrap();
    assert_eq!(r.fit.n_values, cfg.n_values);
    assert!(r.fit.radii.iter().all(|&x| x > 0.0));
    assert!((r.log_corrected_slope + 1.0 / 3.0).abs() < 1e-12);
    let mut buf = Vec::new();
    write_rate_fit_csv(&mut buf, &[r]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "modified_ibm");
    assert_eq!(row[5], "50");
    assert_eq!(row[6], "400");
}

#[test]
fn entropy_nets_grow_as_the_prior_roughens() {
    let card = |c: f64| entropy_net(&GaussianPrior::squared_exponential(c).unwrap(), 0.1).unwrap().log_cardinality;
    assert!(card(0.25) > card(0.5) && card(0.5) > card(1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wilson_interval_brackets_the_proportion(n in 1usize..5_000, frac in 0.0f64..=1.0) {
        let hits = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(hits, n, 1.96);
        let p = hits as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn rate_fit_recovers_power_laws(slope in -2.0f64..0.5, scale in 0.01f64..10.0) {
        let n = [100u64, 300, 900, 2_700, 8_100];
        let radii: Vec<f64> = n.iter().map(|&v| scale * (v as f64).powf(slope)).collect();
        let f = rate_fit(&n, &radii, 1.0).unwrap();
        prop_assert!((f.slope - slope).abs() < 1e-10);
        prop_assert!((f.intercept - scale.ln()).abs() < 1e-8);
    }

    #[test]
    fn scaling_rules_shrink_c_for_rough_truths(alpha in 0.1f64..3.0, n in 10u64..1_000_000) {
        // stationary c_n decreases towards zero once n exceeds e²
        let (c1, _) = scaling_rule(PriorFamily::SquaredExponential, alpha, n, 0).unwrap();
        let (c2, _) = scaling_rule(PriorFamily::SquaredExponential, alpha, 4 * n, 0).unwrap();
        prop_assert!(c2 < c1 && c1 > 0.0);
        // the integrated family roughens exactly when alpha is below k + 1/2
        let k = alpha.ceil() as u32;
        let (c, a) = scaling_rule(PriorFamily::ModifiedIbm, alpha, n, k).unwrap();
        prop_assert!(a > 0.0);
        prop_assert_eq!(c < 1.0, alpha < k as f64 + 0.5);
        prop_assert!(contraction_rate(PriorFamily::ModifiedIbm, alpha, n) < 1.0);
    }

    #[test]
    fn sampled_paths_are_reproducible(c in 0.05f64..2.0, seed in any::<u64>()) {
        let prior = GaussianPrior::squared_exponential(c).unwrap();
        let grid = Grid::uniform(16);
        let a = sample_paths(&prior, &grid, 2, seed).unwrap();
        prop_assert_eq!(&a, &sample_paths(&prior, &grid, 2, seed).unwrap());
        prop_assert!(a[0].values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn hellinger_vanishes_only_on_equal_densities(shift in -3.0f64..3.0, amp in 0.1f64..2.0) {
        let g: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
        let w: Vec<f64> = g.iter().map(|t| amp * (4.0 * t).sin()).collect();
        let p = DensityModel::from_log_density(g.clone(), w.clone()).unwrap();
        let shifted = DensityModel::from_log_density(g.clone(), w.iter().map(|v| v + shift).collect()).unwrap();
        prop_assert!(hellinger(&p, &shifted).unwrap() < 1e-7);
        let flat = DensityModel::from_log_density(g, vec![0.0; 64]).unwrap();
        prop_assert!(hellinger(&p, &flat).unwrap() > 0.0);
    }
}
