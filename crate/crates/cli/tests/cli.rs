use std::path::Path;
use std::process::{Command, Output};

fn gpscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpscale")).args(args).output().unwrap()
}

fn run_with(dir: &Path, cmd: &str, config: &str, out: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{out}.config.json"));
    std::fs::write(&cfg, config).unwrap();
    let out_dir = dir.join(out);
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--output", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    gpscale(&args)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SAMPLE: &str = r#"{"prior": {"family": "squared_exponential", "c": 0.5}, "n_paths": 2, "seed": 7, "grid_size": 32}"#;

#[test]
fn help_exits_zero() {
    let out = gpscale(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for cmd in ["sample-prior", "smallball", "concentration", "fit", "rates"] {
        assert!(text.contains(cmd), "{cmd}");
    }
    for cmd in ["sample-prior", "rates"] {
        assert_eq!(gpscale(&[cmd, "--help"]).status.code(), Some(0));
    }
}

#[test]
fn sample_prior_is_reproducible_and_rerunnable_from_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_with(dir.path(), "sample-prior", SAMPLE, "a", &[]).status.code(), Some(0));
    assert_eq!(run_with(dir.path(), "sample-prior", SAMPLE, "b", &[]).status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a/paths.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b/paths.csv")).unwrap());
    assert!(String::from_utf8(a.clone()).unwrap().starts_with("t,value,path_id\n"));

    let sidecar = dir.path().join("a/sample-prior.json");
    let out = gpscale(&[
        "sample-prior",
        "--config",
        sidecar.to_str().unwrap(),
        "--output",
        dir.path().join("c").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(a, std::fs::read(dir.path().join("c/paths.csv")).unwrap());

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&sidecar).unwrap()).unwrap();
    assert_eq!(json["command"], "sample-prior");
    assert_eq!(json["outputs"][0]["file"], "paths.csv");
    assert_eq!(json["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    run_with(dir.path(), "sample-prior", SAMPLE, "a", &[]);
    run_with(dir.path(), "sample-prior", SAMPLE, "b", &["--seed", "8"]);
    let a = std::fs::read(dir.path().join("a/paths.csv")).unwrap();
    assert_ne!(a, std::fs::read(dir.path().join("b/paths.csv")).unwrap());
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("b/sample-prior.json")).unwrap()).unwrap();
    assert_eq!(json["resolved_config"]["seed"], 8);
}

#[test]
fn config_failures_exit_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        r#"{"prior": {"family": "squared_exponential", "c": 0.5}, "seed": 7}"#,
        r#"{"prior": {"family": "squared_exponential", "c": 0.5}, "n_paths": 2, "seed": 7, "colour": 1}"#,
        r#"{"prior": {"family": "squared_exponential", "c": -1.0}, "n_paths": 2, "seed": 7}"#,
        r#"{"prior": {"family": "cauchy", "c": 1.0}, "n_paths": 2, "seed": 7}"#,
        "not json",
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let name = format!("bad{i}");
        let out = run_with(dir.path(), "sample-prior", cfg, &name, &[]);
        assert_eq!(out.status.code(), Some(2), "{cfg}");
        assert!(!dir.path().join(&name).exists());
    }
    let missing = gpscale(&["fit", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    // a sidecar from another command is rejected
    run_with(dir.path(), "sample-prior", SAMPLE, "ok", &[]);
    let sidecar = dir.path().join("ok/sample-prior.json");
    let out = gpscale(&["smallball", "--config", sidecar.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"prior": {"family": "squared_exponential", "c": 1.0}, "truth": {"alpha": 0.5},
        "epsilons": [1e-9], "n_paths": 1000, "seed": 1, "grid_size": 16}"#;
    let out = run_with(dir.path(), "concentration", cfg, "c", &[]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rougher_prior_has_more_variation() {
    let dir = tempfile::tempdir().unwrap();
    let tv = |c: f64, name: &str| -> Vec<f64> {
        let cfg = format!(r#"{{"prior": {{"family": "squared_exponential", "c": {c}}}, "n_paths": 100, "seed": 11}}"#);
        assert_eq!(run_with(dir.path(), "sample-prior", &cfg, name, &[]).status.code(), Some(0));
        let rows = read_csv(&dir.path().join(name).join("paths.csv"));
        let mut tv = vec![0.0; 100];
        for w in rows.windows(2) {
            if w[0][2] == w[1][2] {
                let id: usize = w[0][2].parse().unwrap();
                let a: f64 = w[0][1].parse().unwrap();
                let b: f64 = w[1][1].parse().unwrap();
                tv[id] += (b - a).abs();
            }
        }
        tv
    };
    let smooth = tv(1.0, "smooth");
    let rough = tv(0.1, "rough");
    let wins = smooth.iter().zip(&rough).filter(|(s, r)| r > s).count();
    assert!(wins >= 95, "{wins}");
}

#[test]
fn zero_truth_has_zero_approximation_term() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"prior": {"family": "modified_ibm", "c": 1.0, "k": 1}, "truth": {"alpha": 1.0, "amplitude": 0.0},
        "epsilons": [0.5, 0.3, 0.2], "n_paths": 2000, "seed": 1, "grid_size": 64}"#;
    assert_eq!(run_with(dir.path(), "concentration", cfg, "z", &[]).status.code(), Some(0));
    let rows = read_csv(&dir.path().join("z/concentration.csv"));
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[3], r[4]);
    }
}

#[test]
fn smallball_and_fit_emit_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"priors": [{"family": "laplace_spectral", "c": 0.5}, {"family": "modified_ibm", "c": 1.0, "k": 0, "a": 2.0}],
        "epsilons": [0.5, 1.0], "n_paths": 1000, "seed": 2, "grid_size": 64}"#;
    assert_eq!(run_with(dir.path(), "smallball", cfg, "s", &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("s/smallball.csv")).unwrap();
    assert!(text.starts_with("family,c,a,k,epsilon,n_paths,hits,neg_log_prob,ci_low,ci_high,grid_size,seed\n"));
    assert_eq!(text.lines().count(), 5);

    let cfg = r#"{"setting": "regression", "prior": {"family": "squared_exponential", "c": 0.3},
        "alpha": 1.0, "n": 100, "replications": 2, "seed": 4, "grid_size": 64}"#;
    assert_eq!(run_with(dir.path(), "fit", cfg, "f", &[]).status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("f/posterior.csv")).unwrap();
    assert!(text.starts_with(
        "setting,n,replication,distance_quantile_0.5,distance_quantile_0.9,acceptance_rate,seed\n"
    ));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn rates_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"setting": "classification", "prior_family": "squared_exponential", "alpha": 1.0,
        "n_values": [50, 100, 200, 400], "replications": 10, "seed": 5, "grid_size": 32,
        "mcmc": {"chain_length": 10000, "burn_in": 2000, "thin": 40, "beta_init": 0.2, "target_acceptance": 0.25, "seed": 0}}"#;
    let start = std::time::Instant::now();
    let out = run_with(dir.path(), "rates", cfg, "r", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(start.elapsed().as_secs() < 300);
    let fit = std::fs::read_to_string(dir.path().join("r/rate_fit.csv")).unwrap();
    assert!(fit.starts_with("alpha,family,slope,slope_se,target_slope,n_min,n_max,log_corrected_slope\n"));
    assert_eq!(read_csv(&dir.path().join("r/replications.csv")).len(), 40);
}
