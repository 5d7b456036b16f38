use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pursuit-lab"))
        .args(args)
        .output()
        .expect("spawn pursuit-lab")
}

fn ok(args: &[&str]) -> String {
    let out = lab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn gen_measure_solve_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("phi.bin");
    let y = dir.path().join("y.csv");
    let x = dir.path().join("x.csv");
    let xhat = dir.path().join("xhat.csv");
    let trace = dir.path().join("trace.csv");
    ok(&[
        "gen",
        "--kind",
        "gaussian",
        "--m",
        "40",
        "--n",
        "80",
        "--seed",
        "3",
        "--out",
        p(&a),
    ]);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(&bytes[..4], b"PLAB");
    assert_eq!(bytes.len(), 12 + 8 * 40 * 80);

    ok(&[
        "measure",
        "--matrix",
        p(&a),
        "--k",
        "3",
        "--seed",
        "1",
        "--y-out",
        p(&y),
        "--x-out",
        p(&x),
    ]);
    let out = ok(&[
        "solve",
        "--matrix",
        p(&a),
        "--y",
        p(&y),
        "--algo",
        "omp",
        "--rule",
        "weak",
        "--alpha",
        "1",
        "--k",
        "3",
        "--tol",
        "1e-10",
        "--trace-out",
        p(&trace),
        "--x-out",
        p(&xhat),
    ]);
    let summary = json(&out);
    assert_eq!(summary["status"], "converged");
    assert_eq!(summary["iterations"], 3);

    let csv = fs::read_to_string(&trace).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,residual_norm,selected_count,support_size,step,contraction_ratio"
    );
    assert_eq!(csv.lines().count(), 1 + 1 + 3);

    let truth = pursuit_vec(&x);
    let est = pursuit_vec(&xhat);
    let err: f64 = truth
        .iter()
        .zip(&est)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-8);
}

fn pursuit_vec(path: &Path) -> Vec<f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .flat_map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<f64>().unwrap())
                .collect::<Vec<_>>()
        })
        .collect()
}

#[test]
fn rip_exhaustive_and_sampled() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("phi.csv");
    ok(&[
        "gen",
        "--kind",
        "bernoulli",
        "--m",
        "64",
        "--n",
        "12",
        "--seed",
        "2",
        "--out",
        p(&a),
    ]);
    let exact = json(&ok(&["rip", "--in", p(&a), "--k", "2"]));
    assert_eq!(exact["method"]["kind"], "exhaustive");
    assert_eq!(exact["delta_lower"], exact["delta_upper"]);
    let sampled = json(&ok(&[
        "rip",
        "--in",
        p(&a),
        "--k",
        "2",
        "--sampled",
        "30",
        "--seed",
        "4",
    ]));
    assert_eq!(sampled["method"]["trials"], 30);
    assert!(sampled["delta_lower"].as_f64().unwrap() <= exact["delta_upper"].as_f64().unwrap());
}

#[test]
fn concentration_and_bounds_print_json() {
    let c = json(&ok(&[
        "concentration",
        "--kind",
        "gaussian",
        "--m",
        "20",
        "--eps",
        "0.4",
        "--trials",
        "2000",
    ]));
    assert_eq!(c["trials"], 2000);
    assert_eq!(c["within_bound"], true);

    let b = json(&ok(&[
        "bounds",
        "--delta",
        "0.1428571428571428",
        "--delta1",
        "0.15",
        "--k",
        "2",
    ]));
    assert!((b["D_k"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!(
        !lab(&["bounds", "--delta", "1.2", "--delta1", "0.1", "--k", "2"])
            .status
            .success()
    );
}

#[test]
fn verify_rip_lemmas_reports_pass_lines() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("phi.bin");
    ok(&[
        "gen",
        "--kind",
        "gaussian",
        "--m",
        "60",
        "--n",
        "14",
        "--seed",
        "5",
        "--out",
        p(&a),
    ]);
    let out = ok(&[
        "verify-rip-lemmas",
        "--matrix",
        p(&a),
        "--k",
        "2",
        "--trials",
        "200",
    ]);
    assert!(out.starts_with("delta_2 = "));
    assert_eq!(out.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    assert!(!out.contains("FAIL"));
}

#[test]
fn phase_and_compressible_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("phase.toml");
    fs::write(
        &cfg,
        "n = 64\nm_values = [16, 32]\nk_values = [2]\ntrials_per_cell = 4\nbase_seed = 1\nkeep_trials = true\n\n\
         [solver]\nalgorithm = \"omp\"\nrule = \"relaxed\"\nalpha = 0.125\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    ok(&["phase", "--config", p(&cfg), "--out-dir", p(&out_dir)]);
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("m,k,recovery_fraction,trials\n16,2,"));
    assert_eq!(
        fs::read_to_string(out_dir.join("trials.csv"))
            .unwrap()
            .lines()
            .count(),
        9
    );

    let ccfg = dir.path().join("snr.toml");
    fs::write(
        &ccfg,
        "n = 32\nm = 32\ndecay_p = 1.0\ntrials = 3\nseed = 2\nmatrix = \"identity\"\noracle_k = 4\n\n\
         [[solvers]]\nalgorithm = \"omp\"\nrule = \"weak\"\nalpha = 1.0\niterations = 32\n",
    )
    .unwrap();
    let csv_path = dir.path().join("snr.csv");
    ok(&["compressible", "--config", p(&ccfg), "--out", p(&csv_path)]);
    let csv = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "solver,iterations,trials,failures,mean_snr_db");
    assert!(lines[1].starts_with("swomp,32,3,0,"));
    assert!(lines[2].starts_with("best_k_oracle,4,3,0,"));
}

#[test]
fn errors_exit_nonzero_with_message() {
    let out = lab(&["rip", "--in", "/nonexistent/phi.bin", "--k", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n = 4\n").unwrap();
    assert!(
        !lab(&["phase", "--config", p(&cfg), "--out-dir", p(dir.path())])
            .status
            .success()
    );
}
