//! The `verify` suite: closed forms against the quadrature oracle, the
//! simulator, the high-SNR limits and the monotonicity properties.
//!
//! Each criterion is a list of [`Check`]s. Deterministic checks must all
//! pass; statistical (Monte Carlo) checks may fail up to the criterion's
//! allowance, since a 3σ band misses about 0.3% of the time.

use rand::Rng;
use rayon::prelude::*;

use secrelay::analytic::outage_no_direct_binomial_sum;
use secrelay::model::stream_rng;
use secrelay::{
    asym_no_direct, asym_with_direct_fixed, asym_with_direct_scaling, db_to_linear, estimate_outage, outage_no_direct,
    outage_with_direct, quadrature_outage_with_direct, ChannelParams, McConfig, QuadratureSettings, SecrecyRate,
    SnrRatios, Variant,
};

use crate::error::CliError;
use crate::eval::point_seed;
use crate::format::sig10;

pub const PRESETS: &[&str] = &["acceptance"];

/// Monte Carlo agreement band, in one-sigma Wilson half-widths.
pub const MC_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub trials: u64,
    pub seed: u64,
    /// Caps every check's tolerance at `max_rel_err · |reference|`.
    pub max_rel_err: Option<f64>,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 1_000_000,
            seed: 42,
            max_rel_err: None,
            jobs: crate::spec::default_jobs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub statistical: bool,
}

impl Check {
    /// `|value - reference| ≤ tolerance`.
    fn two_sided(label: String, value: f64, reference: f64, tolerance: f64, opts: &VerifyOptions) -> Self {
        let tolerance = match opts.max_rel_err {
            Some(m) => tolerance.min(m * reference.abs()),
            None => tolerance,
        };
        Check {
            label,
            value,
            reference,
            deviation: (value - reference).abs(),
            tolerance,
            statistical: false,
        }
    }

    /// `value - reference ≤ tolerance`; not subject to the relative cap.
    fn at_most(label: String, value: f64, reference: f64, tolerance: f64) -> Self {
        Check {
            label,
            value,
            reference,
            deviation: value - reference,
            tolerance,
            statistical: false,
        }
    }

    fn statistical(mut self) -> Self {
        self.statistical = true;
        self
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub allowed_statistical_failures: usize,
}

impl Criterion {
    pub fn failed_exact(&self) -> usize {
        self.checks.iter().filter(|c| !c.statistical && !c.passed()).count()
    }

    pub fn failed_statistical(&self) -> usize {
        self.checks.iter().filter(|c| c.statistical && !c.passed()).count()
    }

    pub fn passed(&self) -> bool {
        self.failed_exact() == 0 && self.failed_statistical() <= self.allowed_statistical_failures
    }

    pub fn summary(&self) -> String {
        let stat = self.checks.iter().filter(|c| c.statistical).count();
        format!(
            "{} checks, {} deterministic failed, {}/{} statistical outside {MC_SIGMAS}σ (allowed {})",
            self.checks.len(),
            self.failed_exact(),
            self.failed_statistical(),
            stat,
            self.allowed_statistical_failures
        )
    }
}

fn nats(r: f64) -> SecrecyRate {
    SecrecyRate::nats(r).expect("preset rates are non-negative")
}

fn mc_config(opts: &VerifyOptions, stream: u64) -> Result<McConfig, CliError> {
    let shards = opts.jobs.max(1).min(opts.trials as usize);
    Ok(McConfig::new(opts.trials, point_seed(opts.seed, stream))?.with_shards(shards)?)
}

fn pool(opts: &VerifyOptions) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}

fn describe(p: &ChannelParams, r: f64) -> String {
    let direct = p
        .direct()
        .map(|d| format!("sd={} se={} ", sig10(d.lambda_sd), sig10(d.lambda_se)))
        .unwrap_or_default();
    format!(
        "{direct}lm={} le={} N={} R={}",
        sig10(p.lambda_m()),
        sig10(p.lambda_e()),
        p.n_relays(),
        sig10(r)
    )
}

fn collect<T: Send>(
    opts: &VerifyOptions,
    items: Vec<T>,
    f: impl Fn(usize, T) -> Result<Vec<Check>, CliError> + Sync + Send,
) -> Result<Vec<Check>, CliError> {
    let nested: Vec<Vec<Check>> = pool(opts)?.install(|| {
        items
            .into_par_iter()
            .enumerate()
            .map(|(i, item)| f(i, item))
            .collect::<Result<_, _>>()
    })?;
    Ok(nested.into_iter().flatten().collect())
}

/// Closed form with direct links against the oracle (1e-8 relative) and the
/// simulator (3σ, one excursion allowed) on 26 points.
pub fn criterion_1(opts: &VerifyOptions) -> Result<Criterion, CliError> {
    let lo = 10f64.powf(0.5);
    let mut points = Vec::new();
    for &(sd, se) in &[(lo, lo), (lo, 10.0), (10.0, lo), (10.0, 10.0)] {
        for &lam in &[lo, 10f64.powf(1.5), 10f64.powf(2.5)] {
            for &n in &[1, 3] {
                points.push((ChannelParams::with_direct(sd, se, lam, lam, n)?, 0.3));
            }
        }
    }
    points.push((ChannelParams::with_direct(lo, lo, lo, lo, 1)?, 0.0));
    points.push((
        ChannelParams::with_direct(10.0, 10.0, 10f64.powf(2.5), 10f64.powf(2.5), 3)?,
        0.0,
    ));

    let checks = collect(opts, points, |i, (p, r)| {
        let closed = outage_with_direct(nats(r), &p)?.value();
        let oracle = quadrature_outage_with_direct(nats(r), &p, &QuadratureSettings::default())?
            .probability
            .value();
        let mc = estimate_outage(&p, nats(r), &mc_config(opts, 1_000_000 + i as u64)?)?;
        let at = describe(&p, r);
        Ok(vec![
            Check::two_sided(
                format!("closed~oracle  {at}"),
                closed,
                oracle,
                1e-8 * oracle.abs(),
                opts,
            ),
            Check::two_sided(
                format!("mc~closed      {at}"),
                mc.p_hat,
                closed,
                MC_SIGMAS * mc.sigma_half_width(),
                opts,
            )
            .statistical(),
        ])
    })?;
    Ok(Criterion {
        id: 1,
        title: "triple agreement with direct links",
        checks,
        allowed_statistical_failures: 1,
    })
}

/// Relay-only product form against its binomial expansion (N ≤ 20, 1e-12
/// relative) and the simulator (3σ) on 27 points, plus the forced value 1/4.
pub fn criterion_2(opts: &VerifyOptions) -> Result<Criterion, CliError> {
    let mut points = Vec::new();
    for &lm_db in &[0.0, 15.0, 30.0] {
        for &le_db in &[0.0, 15.0, 30.0] {
            for &r in &[0.0, 0.3, 1.0] {
                points.push((lm_db, le_db, r));
            }
        }
    }
    let mut checks = collect(opts, points, |i, (lm_db, le_db, r)| {
        let (lm, le) = (db_to_linear(lm_db), db_to_linear(le_db));
        let mut worst: Option<Check> = None;
        for n in 1..=20 {
            let p = ChannelParams::no_direct(lm, le, n)?;
            let product = outage_no_direct(nats(r), &p)?.value();
            let sum = outage_no_direct_binomial_sum(nats(r), &p)?;
            let c = Check::two_sided(
                format!("product~sum    {}", describe(&p, r)),
                sum,
                product,
                1e-12 * product.abs(),
                opts,
            );
            if worst
                .as_ref()
                .is_none_or(|w| c.deviation / c.tolerance > w.deviation / w.tolerance)
            {
                worst = Some(c);
            }
        }
        let n = [1, 2, 4][i % 3];
        let p = ChannelParams::no_direct(lm, le, n)?;
        let product = outage_no_direct(nats(r), &p)?.value();
        let mc = estimate_outage(&p, nats(r), &mc_config(opts, 2_000_000 + i as u64)?)?;
        Ok(vec![
            worst.expect("twenty relay counts were checked"),
            Check::two_sided(
                format!("mc~product     {}", describe(&p, r)),
                mc.p_hat,
                product,
                MC_SIGMAS * mc.sigma_half_width(),
                opts,
            )
            .statistical(),
        ])
    })?;
    for lam in [1.0, 1e3] {
        let p = ChannelParams::no_direct(lam, lam, 2)?;
        let at = describe(&p, 0.0);
        checks.push(Check::two_sided(
            format!("forced product {at}"),
            outage_no_direct(nats(0.0), &p)?.value(),
            0.25,
            1e-15,
            opts,
        ));
        checks.push(Check::two_sided(
            format!("forced sum     {at}"),
            outage_no_direct_binomial_sum(nats(0.0), &p)?,
            0.25,
            1e-15,
            opts,
        ));
    }
    Ok(Criterion {
        id: 2,
        title: "relay-only exactness",
        checks,
        allowed_statistical_failures: 0,
    })
}

/// High-SNR limits against the exact forms, 1e-3 absolute.
pub fn criterion_3(opts: &VerifyOptions) -> Result<Criterion, CliError> {
    let r = nats(0.3);
    let mut checks = Vec::new();
    let lm = db_to_linear(60.0);
    for kappa_db in [0.0, 10.0] {
        let kappa = db_to_linear(kappa_db);
        for n in [1, 2, 4] {
            let p = ChannelParams::no_direct(lm, lm / kappa, n)?;
            checks.push(Check::two_sided(
                format!("relay-only limit   {}", describe(&p, 0.3)),
                asym_no_direct(r, kappa, n)?.value(),
                outage_no_direct(r, &p)?.value(),
                1e-3,
                opts,
            ));
        }
    }
    let (lam, dl) = (db_to_linear(70.0), db_to_linear(5.0));
    for n in [1, 2, 4] {
        let p = ChannelParams::with_direct(dl, dl, lam, lam, n)?;
        checks.push(Check::two_sided(
            format!("fixed-direct limit {}", describe(&p, 0.3)),
            asym_with_direct_fixed(r, &p, Variant::Corrected)?.value(),
            outage_with_direct(r, &p)?.value(),
            1e-3,
            opts,
        ));
    }
    for n in [1, 2, 4] {
        let p = ChannelParams::with_direct(lm, lm, lm, lm, n)?;
        checks.push(Check::two_sided(
            format!("scaling limit      {}", describe(&p, 0.3)),
            asym_with_direct_scaling(r, &SnrRatios::from_params(&p)?, n)?.value(),
            outage_with_direct(r, &p)?.value(),
            1e-3,
            opts,
        ));
    }
    Ok(Criterion {
        id: 3,
        title: "asymptotic convergence",
        checks,
        allowed_statistical_failures: 0,
    })
}

/// Vanishing direct links reduce to the relay-only form, 1e-3 absolute.
pub fn criterion_4(opts: &VerifyOptions) -> Result<Criterion, CliError> {
    let r = nats(0.3);
    let mut checks = Vec::new();
    for lm_db in [5.0, 15.0, 25.0] {
        for le_db in [5.0, 15.0, 25.0] {
            let (lm, le) = (db_to_linear(lm_db), db_to_linear(le_db));
            let p = ChannelParams::with_direct(1e-4, 1e-4, lm, le, 2)?;
            checks.push(Check::two_sided(
                format!("weak direct links  {}", describe(&p, 0.3)),
                outage_with_direct(r, &p)?.value(),
                outage_no_direct(r, &p.without_direct())?.value(),
                1e-3,
                opts,
            ));
        }
    }
    Ok(Criterion {
        id: 4,
        title: "negligible direct links",
        checks,
        allowed_statistical_failures: 0,
    })
}

/// Outage can only fall with more relays or a stronger main channel and
/// only rise with the target rate; 100 seeded random points, both topologies.
pub fn criterion_5(opts: &VerifyOptions) -> Result<Criterion, CliError> {
    const SLACK: f64 = 1e-12;
    let mut rng = stream_rng(opts.seed, 5);
    let points: Vec<_> = (0..100)
        .map(|_| {
            (
                rng.gen_range(-10.0..30.0),
                rng.gen_range(-10.0..30.0),
                rng.gen_range(-10.0..40.0),
                rng.gen_range(-10.0..40.0),
                rng.gen_range(1..=16usize),
                rng.gen_range(0.0..2.0),
            )
        })
        .collect();
    let checks = collect(opts, points, |_, (sd_db, se_db, lm_db, le_db, n, r)| {
        let (sd, se, le) = (db_to_linear(sd_db), db_to_linear(se_db), db_to_linear(le_db));
        let mut out = Vec::new();
        for direct in [false, true] {
            let p_out = |lm_db: f64, n: usize, r: f64| -> Result<f64, CliError> {
                let lm = db_to_linear(lm_db);
                let v = if direct {
                    outage_with_direct(nats(r), &ChannelParams::with_direct(sd, se, lm, le, n)?)?
                } else {
                    outage_no_direct(nats(r), &ChannelParams::no_direct(lm, le, n)?)?
                };
                Ok(v.value())
            };
            let base = p_out(lm_db, n, r)?;
            let p = if direct {
                ChannelParams::with_direct(sd, se, db_to_linear(lm_db), le, n)?
            } else {
                ChannelParams::no_direct(db_to_linear(lm_db), le, n)?
            };
            let at = describe(&p, r);
            out.push(Check::at_most(
                format!("N+1 ≤ N        {at}"),
                p_out(lm_db, n + 1, r)?,
                base,
                SLACK,
            ));
            out.push(Check::at_most(
                format!("λm+1dB ≤ λm    {at}"),
                p_out(lm_db + 1.0, n, r)?,
                base,
                SLACK,
            ));
            out.push(Check::at_most(
                format!("R ≤ R+0.05     {at}"),
                base,
                p_out(lm_db, n, r + 0.05)?,
                SLACK,
            ));
        }
        Ok(out)
    })?;
    Ok(Criterion {
        id: 5,
        title: "monotonicity",
        checks,
        allowed_statistical_failures: 0,
    })
}

/// Runs a named preset.
pub fn run(preset: &str, opts: &VerifyOptions) -> Result<Vec<Criterion>, CliError> {
    match preset {
        "acceptance" => Ok(vec![
            criterion_1(opts)?,
            criterion_2(opts)?,
            criterion_3(opts)?,
            criterion_4(opts)?,
            criterion_5(opts)?,
        ]),
        other => Err(CliError::usage(
            "preset",
            format!("unknown preset `{other}` (available: {})", PRESETS.join(", ")),
        )),
    }
}

/// Per-check table, per-criterion summaries and a final tally.
pub fn report(criteria: &[Criterion]) -> String {
    let mut out = String::new();
    for c in criteria {
        out += &format!("criterion {}: {}\n", c.id, c.title);
        for check in &c.checks {
            let flag = match (check.passed(), check.statistical) {
                (true, _) => "PASS",
                (false, true) => "FAIL mc",
                (false, false) => "FAIL",
            };
            out += &format!(
                "  {flag:<7} {}  value={} ref={} dev={} tol={}\n",
                check.label,
                sig10(check.value),
                sig10(check.reference),
                sig10(check.deviation),
                sig10(check.tolerance)
            );
        }
        out += &format!("  => {}: {}\n", if c.passed() { "PASS" } else { "FAIL" }, c.summary());
    }
    let passed = criteria.iter().filter(|c| c.passed()).count();
    out += &format!("summary: {passed}/{} criteria passed\n", criteria.len());
    out
}
