//! Black-box tests of the `secrelay` binary.

use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_secrelay");

fn run_env(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove(secrelay_cli::SEED_ENV);
    if let Some(s) = env_seed {
        cmd.env(secrelay_cli::SEED_ENV, s);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Values of one column, parsed as f64, from CSV output.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn exchangeable_point_is_one_quarter() {
    let o = run(&[
        "point",
        "--lambda-m-db",
        "0",
        "--lambda-e-db",
        "0",
        "--n",
        "2",
        "--rate-nats",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&stdout(&o), "p_analytic"), vec![0.25]);
}

#[test]
fn analytic_and_oracle_agree_with_direct_links() {
    let o = run(&[
        "point",
        "--topology",
        "with-direct",
        "--lambda-sd-db",
        "5",
        "--lambda-se-db",
        "10",
        "--lambda-m-db",
        "15",
        "--kappa-db",
        "0",
        "--n",
        "3",
        "--estimators",
        "analytic,oracle",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let (a, q) = (column(&out, "p_analytic")[0], column(&out, "p_oracle")[0]);
    assert!((a - q).abs() <= 1e-8 * q, "{a} vs {q}");
}

#[test]
fn pretty_point_lists_requested_estimators() {
    let o = run(&[
        "point",
        "--lambda-m-db",
        "10",
        "--kappa-db",
        "3",
        "--n",
        "2",
        "--estimators",
        "analytic,asymptotic",
        "--pretty",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("p_analytic") && out.contains("p_asymptotic"));
    assert!(!out.contains("p_mc") && !out.contains("p_oracle"));
}

#[test]
fn zero_relays_is_a_usage_error() {
    let o = run(&["point", "--lambda-m-db", "0", "--kappa-db", "0", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_relays"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn empty_estimator_list_is_a_usage_error() {
    let o = run(&[
        "sweep",
        "--lambda-m-db",
        "0:10:5",
        "--kappa-db",
        "0",
        "--n",
        "1",
        "--estimators",
        "",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn conflicting_flags_are_rejected() {
    let o = run(&[
        "point",
        "--lambda-m-db",
        "0",
        "--kappa-db",
        "0",
        "--lambda-e-db",
        "0",
        "--n",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_preset_is_a_usage_error() {
    let o = run(&["verify", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope"));
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
    let o = run(&["sweep", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));

    let o = run(&["sweep", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn impossible_tolerance_fails_verification() {
    let o = run(&["verify", "--trials", "20000", "--max-rel-err", "1e-15"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL mc"));
}

#[test]
fn seed_flag_overrides_environment() {
    let args = [
        "point",
        "--lambda-m-db",
        "0",
        "--kappa-db",
        "0",
        "--n",
        "2",
        "--estimators",
        "mc",
        "--trials",
        "5000",
    ];
    let from_env = stdout(&run_env(&args, Some("5")));
    let with_flag: Vec<&str> = args.iter().copied().chain(["--seed", "5"]).collect();
    assert_eq!(from_env, stdout(&run(&with_flag)));
    let overridden: Vec<&str> = args.iter().copied().chain(["--seed", "6"]).collect();
    assert_ne!(from_env, stdout(&run_env(&overridden, Some("5"))));
    assert_ne!(from_env, stdout(&run(&args)));

    let bad = run_env(&args, Some("not-a-number"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn rate_in_bits_is_converted_to_nats() {
    let o = run(&[
        "point",
        "--lambda-m-db",
        "0",
        "--kappa-db",
        "0",
        "--n",
        "1",
        "--rate-bits",
        "1",
    ]);
    assert!(o.status.success());
    let r = column(&stdout(&o), "rate_nats")[0];
    assert!((r - std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn sweep_rows_follow_n_then_lambda() {
    let o = run(&[
        "sweep",
        "--lambda-m-db",
        "0:20:10",
        "--kappa-db",
        "0",
        "--n",
        "3,1",
        "--estimators",
        "analytic",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(column(&out, "n"), vec![1.0, 1.0, 1.0, 3.0, 3.0, 3.0]);
    assert_eq!(column(&out, "lambda_m_db"), vec![0.0, 10.0, 20.0, 0.0, 10.0, 20.0]);
    let p = column(&out, "p_analytic");
    assert!(p.windows(2).take(2).all(|w| w[1] <= w[0]));
}

#[test]
fn sweep_is_deterministic_across_jobs_and_shards() {
    let base = [
        "sweep",
        "--lambda-m-db",
        "0:10:5",
        "--kappa-db",
        "0",
        "--n",
        "1,2",
        "--estimators",
        "mc",
        "--trials",
        "30000",
        "--seed",
        "9",
    ];
    let with = |extra: &[&'static str]| {
        let args: Vec<&str> = base.iter().copied().chain(extra.iter().copied()).collect();
        stdout(&run(&args))
    };
    let reference = with(&["--jobs", "1", "--shards", "1"]);
    assert_eq!(reference, with(&["--jobs", "4", "--shards", "3"]));
    assert_eq!(reference, with(&["--jobs", "2", "--shards", "8"]));
}

#[test]
fn sweep_writes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = run(&[
        "sweep",
        "--lambda-m-db",
        "0",
        "--kappa-db",
        "0",
        "--n",
        "1",
        "--estimators",
        "analytic",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.starts_with(secrelay_cli::format::CSV_HEADER));
}
