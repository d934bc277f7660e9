//! End-to-end tests of the binary: output values, exit codes, config
//! round-trips, and byte determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tilted-risk"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

#[test]
fn ter_prints_closed_form_value() {
    let out = run(&["ter", "--losses", "0,1", "--gamma", "-1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0.379885493042\n");
}

#[test]
fn bound_prints_report_with_terms() {
    let out = run(&[
        "bound",
        "--family",
        "uniform-bounded",
        "--kind",
        "abs",
        "--M",
        "1",
        "--cardH",
        "10",
        "--delta",
        "0.05",
        "--n",
        "100",
        "--gamma",
        "1e-9",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("value       0.17308183826"), "{text}");
    assert!(text.contains("term        concentration"));
    assert!(text.contains("term        tilt_penalty"));
    assert!(text.contains("valid       true"));
}

#[test]
fn bound_missing_field_is_usage_error() {
    let out = run(&[
        "bound", "--family", "uniform-bounded", "--kind", "abs", "--n", "100", "--gamma", "-0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing field"));
}

#[test]
fn tilt_sign_error_exits_one() {
    let out = run(&[
        "bound", "--family", "shift", "--kind", "population", "--gamma", "0.5", "--n", "10",
        "--kappa-u", "1", "--kappa-s", "1", "--tv", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("tilt sign"));
}

#[test]
fn enumeration_cap_exits_one() {
    let out = run(&["info", "--instance", "threshold-k", "--n", "12", "--kernel", "plain-gibbs"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("enumeration too large"));
}

#[test]
fn coverage_without_required_assumption_exits_two() {
    // outlier-mix has no M, so the uniform-bounded family cannot run on it
    let out = run(&[
        "coverage",
        "instance=outlier-mix",
        "family=uniform-bounded",
        "trials=5",
        "n_grid=8,16",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains('M'), "{}", stderr(&out));
}

#[test]
fn unknown_override_key_exits_two() {
    let out = run(&["coverage", "bogus=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown config key"));
}

#[test]
fn dump_config_round_trips() {
    let args = [
        "coverage",
        "--dump-config",
        "instance=bernoulli-2h",
        "family=uniform-bounded",
        "trials=7",
        "n_grid=8,32",
        "tilt_schedule.kind=power",
        "tilt_schedule.c=2.0",
        "tilt_schedule.beta=0.5",
        "seed=9",
    ];
    let first = run(&args);
    assert!(first.status.success());
    let dumped = stdout(&first);
    assert!(dumped.contains("trials = 7"));

    let dir = std::env::temp_dir().join("tilted-risk-cli-roundtrip.toml");
    std::fs::write(&dir, &dumped).unwrap();
    let second = run(&["coverage", "--dump-config", "--config", dir.to_str().unwrap()]);
    assert!(second.status.success());
    assert_eq!(stdout(&second), dumped);
}

#[test]
fn catalog_lists_builtins() {
    let out = run(&["catalog"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for name in ["bernoulli-2h", "threshold-k", "squared-small", "outlier-mix"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn gibbs_posterior_and_identity_modes() {
    let out = run(&[
        "gibbs", "--instance", "bernoulli-2h", "--alpha", "2", "--gamma", "-1", "--dataset", "1,1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("posterior[0]  0.119202922022"), "{text}");
    assert!(text.contains("posterior[1]  0.880797077978"), "{text}");

    let out = run(&[
        "gibbs", "--instance", "bernoulli-2h", "--alpha", "2", "--gamma", "-1", "--identity",
        "--n", "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("lhs  0.190398538989"), "{text}");
    assert!(text.contains("gap  "));
}

#[test]
fn info_reports_zero_for_independent_kernel() {
    let out = run(&["info", "--instance", "bernoulli-2h", "--n", "2", "--kernel", "independent"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mutual_information          0\n"), "{text}");
    assert!(text.contains("enumerated_datasets         4"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "coverage",
        "--seed",
        "77",
        "instance=bernoulli-2h",
        "trials=50",
        "n_grid=16,64",
        "tilt_schedule.gamma=-0.2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_count_never_changes_output() {
    let base = [
        "robustness",
        "--seed",
        "3",
        "instance=outlier-mix",
        "family=shift",
        "trials=20",
        "n_grid=64",
        "epsilon_grid=0.0,0.3,0.9",
        "tilt_schedule.gamma=-0.8",
    ];
    let mut one = base.to_vec();
    one.extend(["--threads", "1"]);
    let mut eight = base.to_vec();
    eight.extend(["--threads", "8"]);
    let a = run(&one);
    let b = run(&eight);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("epsilon,tv,realized_sup_gen,bound,population_term\n"));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join("tilted-risk-cli-out.csv");
    let out = bin()
        .args(["rate", "--out", path.to_str().unwrap(), "trials=10", "n_grid=8,32,128,512,1024"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,mean_realized,std_err,bound_value,gamma\n"));
    assert!(text.contains("# slope_realized"));
}
