use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "secrelay",
    version,
    about = "Secrecy outage probability of opportunistic relay selection",
    long_about = "Secrecy outage probability of opportunistic decode-and-forward relay selection \
                  over Rayleigh fading. Mean SNRs are given in dB, rates in nats unless --rate-bits \
                  is used. The seed defaults to $SECRELAY_SEED when no flag or config sets it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one parameter point.
    Point(PointArgs),
    /// Evaluate a grid of points and write CSV.
    Sweep(SweepArgs),
    /// Run a verification preset; exits 1 if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// no-direct or with-direct.
    #[arg(long)]
    pub topology: Option<String>,
    /// Main-channel relay SNR grid, start:stop:step in dB.
    #[arg(long = "lambda-m-db", allow_hyphen_values = true)]
    pub lambda_m_db: Option<String>,
    /// Fixed eavesdropper relay SNR in dB.
    #[arg(long = "lambda-e-db", conflicts_with = "kappa_db", allow_negative_numbers = true)]
    pub lambda_e_db: Option<f64>,
    /// Ratio λ_m/λ_e in dB.
    #[arg(long = "kappa-db", allow_negative_numbers = true)]
    pub kappa_db: Option<f64>,
    /// Source-destination SNR in dB, or `track` to follow λ_m.
    #[arg(long = "lambda-sd-db", allow_hyphen_values = true)]
    pub lambda_sd_db: Option<String>,
    /// Source-eavesdropper SNR in dB, or `track` to follow λ_m.
    #[arg(long = "lambda-se-db", allow_hyphen_values = true)]
    pub lambda_se_db: Option<String>,
    /// Comma-separated relay counts.
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    #[arg(long = "rate-nats", conflicts_with = "rate_bits", allow_negative_numbers = true)]
    pub rate_nats: Option<f64>,
    #[arg(long = "rate-bits", allow_negative_numbers = true)]
    pub rate_bits: Option<f64>,
    /// Comma-separated subset of analytic, asymptotic, mc, oracle.
    #[arg(long)]
    pub estimators: Option<String>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads across grid points.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Monte Carlo shards per point; results do not depend on it.
    #[arg(long)]
    pub shards: Option<usize>,
    /// Output file, or `stdout`.
    #[arg(long, default_value = "stdout")]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// no-direct or with-direct.
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long = "lambda-m-db", allow_negative_numbers = true)]
    pub lambda_m_db: f64,
    #[arg(long = "lambda-e-db", conflicts_with = "kappa_db", allow_negative_numbers = true)]
    pub lambda_e_db: Option<f64>,
    #[arg(long = "kappa-db", allow_negative_numbers = true)]
    pub kappa_db: Option<f64>,
    #[arg(long = "lambda-sd-db", allow_hyphen_values = true)]
    pub lambda_sd_db: Option<String>,
    #[arg(long = "lambda-se-db", allow_hyphen_values = true)]
    pub lambda_se_db: Option<String>,
    /// Relay count.
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    #[arg(long = "rate-nats", conflicts_with = "rate_bits", allow_negative_numbers = true)]
    pub rate_nats: Option<f64>,
    #[arg(long = "rate-bits", allow_negative_numbers = true)]
    pub rate_bits: Option<f64>,
    #[arg(long, default_value = "analytic")]
    pub estimators: String,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub shards: Option<usize>,
    /// Print a labelled block instead of CSV.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "acceptance")]
    pub preset: String,
    /// Monte Carlo trials per statistical check.
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    /// Defaults to $SECRELAY_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap every tolerance at this multiple of the reference value.
    #[arg(long = "max-rel-err")]
    pub max_rel_err: Option<f64>,
    #[arg(long)]
    pub jobs: Option<usize>,
}
