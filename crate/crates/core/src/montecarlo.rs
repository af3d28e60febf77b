//! Event-level simulation of secrecy-based relay selection.
//!
//! Each trial draws every link SNR, selects the relay with the largest
//! secrecy ratio and records an outage when `Z_max <= e^R`. The first hop is
//! assumed to always succeed, so no source→relay channel is drawn.
//!
//! Trials are grouped into fixed blocks of [`BLOCK_TRIALS`]; block `b` is
//! simulated from stream `b` of the seeded generator. Shards only decide
//! which thread runs which blocks, so the outage count depends on
//! `(seed, trials, params, rate)` alone.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::model::{draw_links_into, stream_rng, ChannelParams, LinkDraw, SecrecyRate};

pub const BLOCK_TRIALS: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    trials: u64,
    seed: u64,
    shards: usize,
    confidence: f64,
}

impl McConfig {
    /// Single shard, 95% confidence.
    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("trials", "at least one trial is required"));
        }
        Ok(McConfig {
            trials,
            seed,
            shards: 1,
            confidence: 0.95,
        })
    }

    pub fn with_shards(self, shards: usize) -> Result<Self> {
        if shards == 0 || shards as u64 > self.trials {
            return Err(invalid(
                "shards",
                format!("must lie in 1..={}, got {shards}", self.trials),
            ));
        }
        Ok(McConfig { shards, ..self })
    }

    pub fn with_confidence(self, confidence: f64) -> Result<Self> {
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(invalid("confidence", format!("must lie in (0, 1), got {confidence}")));
        }
        Ok(McConfig { confidence, ..self })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shards(&self) -> usize {
        self.shards
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }
}

/// Two-sided standard normal quantile for a confidence level.
pub fn confidence_z(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0)
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let scale = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / scale;
    let half = z / scale * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Outage frequency with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub successes: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64, confidence: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials, confidence_z(confidence));
        McEstimate {
            p_hat: successes as f64 / trials as f64,
            trials,
            successes,
            ci_low,
            ci_high,
            confidence,
        }
    }

    /// Half-width of the Wilson interval at the configured confidence.
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }

    /// Half-width of the one-standard-error (z = 1) Wilson interval.
    pub fn sigma_half_width(&self) -> f64 {
        let (lo, hi) = wilson_interval(self.successes, self.trials, 1.0);
        (hi - lo) / 2.0
    }

    /// Whether `p` lies within `k` one-sigma Wilson half-widths of `p_hat`.
    pub fn agrees_with(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * self.sigma_half_width()
    }

    /// `|p_hat - p|` in units of the one-sigma Wilson half-width.
    pub fn sigmas_from(&self, p: f64) -> f64 {
        (self.p_hat - p).abs() / self.sigma_half_width()
    }
}

/// `Z_n = (1 + γ_rd[n] + γ_sd) / (1 + γ_re[n] + γ_se)`.
pub fn secrecy_ratio(draw: &LinkDraw, n: usize) -> f64 {
    (1.0 + draw.gamma_rd()[n] + draw.gamma_sd()) / (1.0 + draw.gamma_re()[n] + draw.gamma_se())
}

/// Index and value of the largest secrecy ratio; ties go to the lowest index.
pub fn select_relay(draw: &LinkDraw) -> (usize, f64) {
    let mut best = (0, secrecy_ratio(draw, 0));
    for n in 1..draw.n_relays() {
        let z = secrecy_ratio(draw, n);
        if z > best.1 {
            best = (n, z);
        }
    }
    best
}

/// Outage iff `max(ln Z_max, 0) <= R`, i.e. `Z_max <= e^R`.
pub fn outage_trial(draw: &LinkDraw, rate: SecrecyRate) -> bool {
    select_relay(draw).1 <= rate.threshold()
}

/// Link draws in trial order for a seed, following the block layout used by
/// [`estimate_outage`].
pub struct TrialStream {
    params: ChannelParams,
    seed: u64,
    block: u64,
    in_block: u64,
    rng: rand_chacha::ChaCha8Rng,
    draw: LinkDraw,
}

impl TrialStream {
    pub fn new(params: ChannelParams, seed: u64) -> Self {
        TrialStream {
            params,
            seed,
            block: 0,
            in_block: 0,
            rng: stream_rng(seed, 0),
            draw: LinkDraw::zeroed(params.n_relays()),
        }
    }

    /// Advance one trial and return a view of its draw.
    pub fn next_draw(&mut self) -> &LinkDraw {
        if self.in_block == BLOCK_TRIALS {
            self.block += 1;
            self.in_block = 0;
            self.rng = stream_rng(self.seed, self.block);
        }
        self.in_block += 1;
        draw_links_into(&self.params, &mut self.rng, &mut self.draw);
        &self.draw
    }
}

impl Iterator for TrialStream {
    type Item = LinkDraw;

    fn next(&mut self) -> Option<LinkDraw> {
        Some(self.next_draw().clone())
    }
}

fn count_block(params: &ChannelParams, threshold: f64, seed: u64, block: u64, trials: u64) -> u64 {
    let mut rng = stream_rng(seed, block);
    let mut draw = LinkDraw::zeroed(params.n_relays());
    let mut outages = 0;
    for _ in 0..trials {
        draw_links_into(params, &mut rng, &mut draw);
        if select_relay(&draw).1 <= threshold {
            outages += 1;
        }
    }
    outages
}

/// Monte Carlo outage estimate.
pub fn estimate_outage(params: &ChannelParams, rate: SecrecyRate, cfg: &McConfig) -> Result<McEstimate> {
    let threshold = rate.threshold();
    let blocks = cfg.trials.div_ceil(BLOCK_TRIALS);
    let shards = cfg.shards as u64;
    let block_trials = |b: u64| (cfg.trials - b * BLOCK_TRIALS).min(BLOCK_TRIALS);
    let successes: u64 = (0..shards)
        .into_par_iter()
        .map(|s| {
            let (start, end) = (s * blocks / shards, (s + 1) * blocks / shards);
            (start..end)
                .map(|b| count_block(params, threshold, cfg.seed, b, block_trials(b)))
                .sum::<u64>()
        })
        .sum();
    Ok(McEstimate::from_counts(successes, cfg.trials, cfg.confidence))
}

/// Per-trial outage indicators in trial order.
pub fn outage_indicators(params: &ChannelParams, rate: SecrecyRate, seed: u64, trials: u64) -> Vec<bool> {
    let mut stream = TrialStream::new(*params, seed);
    (0..trials).map(|_| outage_trial(stream.next_draw(), rate)).collect()
}
