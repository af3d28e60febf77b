//! Command-line front end for the secrelay estimators.
//!
//! `point` evaluates one parameter point, `sweep` a grid written as CSV, and
//! `verify` runs the cross-check suite. Exit codes: 0 success, 1 failed
//! verification, 2 invalid input, 3 internal-consistency error.

pub mod args;
pub mod error;
pub mod eval;
pub mod format;
pub mod spec;
pub mod verify;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::CliError;

use args::{PointArgs, SweepArgs, VerifyArgs};
use spec::{LevelField, SpecLayer};

pub const SEED_ENV: &str = "SECRELAY_SEED";

/// Seed from the environment, if set.
pub fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(SEED_ENV, format!("expected an unsigned 64-bit integer, got `{v}`"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::usage(SEED_ENV, e.to_string())),
    }
}

fn parse_n_list(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| CliError::usage("n_relays", format!("`{t}` is not an integer relay count")))
        })
        .collect()
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect()
}

fn sweep_layer(a: &SweepArgs) -> Result<SpecLayer, CliError> {
    Ok(SpecLayer {
        lambda_m_db: a.lambda_m_db.clone(),
        kappa_db: a.kappa_db,
        lambda_e_db: a.lambda_e_db,
        n_list: a.n.as_deref().map(parse_n_list).transpose()?,
        rate_nats: a.rate_nats,
        rate_bits: a.rate_bits,
        topology: a.topology.clone(),
        lambda_sd_db: a.lambda_sd_db.clone().map(LevelField::Text),
        lambda_se_db: a.lambda_se_db.clone().map(LevelField::Text),
        estimators: a.estimators.as_deref().map(split_list),
        trials: a.trials,
        seed: a.seed,
        jobs: a.jobs,
        shards: a.shards,
        curves: None,
    })
}

fn read_config(path: &std::path::Path) -> Result<SpecLayer, CliError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        path: shown.clone(),
        reason: e.to_string(),
    })?;
    SpecLayer::from_json(&shown, &text)
}

/// Validated sweep from flags plus an optional config file.
pub fn sweep_spec(a: &SweepArgs) -> Result<spec::SweepSpec, CliError> {
    let file = match &a.config {
        Some(path) => read_config(path)?,
        None => SpecLayer::default(),
    };
    spec::resolve(&file, &sweep_layer(a)?, env_seed()?)
}

fn write_output(target: &str, text: &str) -> Result<(), CliError> {
    if target == "stdout" || target == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| CliError::Output {
                path: "stdout".into(),
                source,
            })
    } else {
        std::fs::write(target, text).map_err(|source| CliError::Output {
            path: target.into(),
            source,
        })
    }
}

fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let spec = sweep_spec(a)?;
    let rows = eval::run_sweep(&spec)?;
    write_output(&a.out, &format::csv(&rows))
}

fn point(a: &PointArgs) -> Result<(), CliError> {
    let layer = SpecLayer {
        lambda_m_db: Some(a.lambda_m_db.to_string()),
        kappa_db: a.kappa_db,
        lambda_e_db: a.lambda_e_db,
        n_list: Some(vec![a.n]),
        rate_nats: a.rate_nats,
        rate_bits: a.rate_bits,
        topology: a.topology.clone(),
        lambda_sd_db: a.lambda_sd_db.clone().map(LevelField::Text),
        lambda_se_db: a.lambda_se_db.clone().map(LevelField::Text),
        estimators: Some(split_list(&a.estimators)),
        trials: a.trials,
        seed: a.seed,
        jobs: None,
        shards: a.shards,
        curves: None,
    };
    let spec = spec::resolve(&SpecLayer::default(), &layer, env_seed()?)?;
    let rows = eval::run_sweep(&spec)?;
    let text = if a.pretty { rows[0].pretty() } else { format::csv(&rows) };
    write_output("stdout", &text)
}

fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(CliError::usage("trials", "at least one trial is required"));
    }
    if let Some(m) = a.max_rel_err {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(CliError::usage(
                "max_rel_err",
                format!("must be a non-negative number, got {m}"),
            ));
        }
    }
    if a.jobs == Some(0) {
        return Err(CliError::usage("jobs", "must be at least 1"));
    }
    if !verify::PRESETS.contains(&a.preset.as_str()) {
        return Err(CliError::usage(
            "preset",
            format!(
                "unknown preset `{}` (available: {})",
                a.preset,
                verify::PRESETS.join(", ")
            ),
        ));
    }
    let opts = verify::VerifyOptions {
        trials: a.trials,
        seed: a.seed.or(env_seed()?).unwrap_or(42),
        max_rel_err: a.max_rel_err,
        jobs: a.jobs.unwrap_or_else(spec::default_jobs),
    };
    let criteria = verify::run(&a.preset, &opts)?;
    write_output("stdout", &verify::report(&criteria))?;
    let failed = criteria.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::VerifyFailed {
            failed,
            total: criteria.len(),
        })
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Point(a) => point(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
    }
}
