//! Channel parameters, rates, and exponential SNR sampling.
//!
//! Every mean SNR is stored as a linear power ratio. The exponential laws are
//! parameterised by their mean, so `γ ~ Exp(mean = λ)` has density
//! `exp(-γ/λ)/λ`.

use rand::distributions::Open01;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Upper bound on the relay count accepted by [`ChannelParams`].
pub const MAX_RELAYS: usize = 64;

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Inverse-CDF draw `-mean * ln(u)` from the exponential law with the given mean.
pub fn sample_exponential(mean: f64, u: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(invalid("mean", format!("must be positive and finite, got {mean}")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("uniform variate must lie in (0, 1), got {u}")));
    }
    Ok(-mean * u.ln())
}

/// Whether the source also reaches the destination and eavesdropper directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    NoDirect,
    WithDirect,
}

/// Mean SNRs of the direct source→destination and source→eavesdropper links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectLinks {
    pub lambda_sd: f64,
    pub lambda_se: f64,
}

/// Mean SNRs of every link plus the relay count.
///
/// Direct-link means only exist for [`Topology::WithDirect`]; a `NoDirect`
/// instance has no value to read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    direct: Option<DirectLinks>,
    lambda_m: f64,
    lambda_e: f64,
    n_relays: usize,
}

fn check_mean(field: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("mean SNR must be positive and finite, got {x}")))
    }
}

fn check_relays(n: usize) -> Result<()> {
    if (1..=MAX_RELAYS).contains(&n) {
        Ok(())
    } else {
        Err(invalid(
            "n_relays",
            format!("relay count must lie in 1..={MAX_RELAYS}, got {n}"),
        ))
    }
}

impl ChannelParams {
    pub fn no_direct(lambda_m: f64, lambda_e: f64, n_relays: usize) -> Result<Self> {
        check_mean("lambda_m", lambda_m)?;
        check_mean("lambda_e", lambda_e)?;
        check_relays(n_relays)?;
        Ok(ChannelParams {
            direct: None,
            lambda_m,
            lambda_e,
            n_relays,
        })
    }

    pub fn with_direct(lambda_sd: f64, lambda_se: f64, lambda_m: f64, lambda_e: f64, n_relays: usize) -> Result<Self> {
        check_mean("lambda_sd", lambda_sd)?;
        check_mean("lambda_se", lambda_se)?;
        let mut p = Self::no_direct(lambda_m, lambda_e, n_relays)?;
        p.direct = Some(DirectLinks { lambda_sd, lambda_se });
        Ok(p)
    }

    pub fn topology(&self) -> Topology {
        match self.direct {
            Some(_) => Topology::WithDirect,
            None => Topology::NoDirect,
        }
    }

    pub fn direct(&self) -> Option<DirectLinks> {
        self.direct
    }

    pub fn lambda_m(&self) -> f64 {
        self.lambda_m
    }

    pub fn lambda_e(&self) -> f64 {
        self.lambda_e
    }

    pub fn n_relays(&self) -> usize {
        self.n_relays
    }

    pub fn with_lambda_m(&self, lambda_m: f64) -> Result<Self> {
        check_mean("lambda_m", lambda_m)?;
        Ok(ChannelParams { lambda_m, ..*self })
    }

    pub fn with_n_relays(&self, n_relays: usize) -> Result<Self> {
        check_relays(n_relays)?;
        Ok(ChannelParams { n_relays, ..*self })
    }

    /// The same relay links with the direct links removed.
    pub fn without_direct(&self) -> Self {
        ChannelParams { direct: None, ..*self }
    }
}

/// Target secrecy rate in nats per channel use.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SecrecyRate(f64);

impl SecrecyRate {
    pub fn nats(rate: f64) -> Result<Self> {
        if rate >= 0.0 && rate.is_finite() {
            Ok(SecrecyRate(rate))
        } else {
            Err(invalid("rate", format!("must be finite and non-negative, got {rate}")))
        }
    }

    pub fn bits(rate: f64) -> Result<Self> {
        Self::nats(rate * std::f64::consts::LN_2)
    }

    pub fn as_nats(self) -> f64 {
        self.0
    }

    /// Outage threshold on the secrecy ratio, `e^R`.
    pub fn threshold(self) -> f64 {
        self.0.exp()
    }
}

/// One realisation of every instantaneous SNR in a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDraw {
    gamma_sd: f64,
    gamma_se: f64,
    gamma_rd: Vec<f64>,
    gamma_re: Vec<f64>,
}

impl LinkDraw {
    pub fn new(gamma_sd: f64, gamma_se: f64, gamma_rd: Vec<f64>, gamma_re: Vec<f64>) -> Result<Self> {
        if gamma_rd.len() != gamma_re.len() {
            return Err(invalid(
                "gamma_re",
                format!("expected {} relay entries, got {}", gamma_rd.len(), gamma_re.len()),
            ));
        }
        check_relays(gamma_rd.len())?;
        let ok = |x: &f64| *x >= 0.0 && x.is_finite();
        if !(ok(&gamma_sd) && ok(&gamma_se) && gamma_rd.iter().all(ok) && gamma_re.iter().all(ok)) {
            return Err(invalid("gamma", "instantaneous SNRs must be finite and non-negative"));
        }
        Ok(LinkDraw {
            gamma_sd,
            gamma_se,
            gamma_rd,
            gamma_re,
        })
    }

    pub(crate) fn zeroed(n_relays: usize) -> Self {
        LinkDraw {
            gamma_sd: 0.0,
            gamma_se: 0.0,
            gamma_rd: vec![0.0; n_relays],
            gamma_re: vec![0.0; n_relays],
        }
    }

    pub fn gamma_sd(&self) -> f64 {
        self.gamma_sd
    }

    pub fn gamma_se(&self) -> f64 {
        self.gamma_se
    }

    pub fn gamma_rd(&self) -> &[f64] {
        &self.gamma_rd
    }

    pub fn gamma_re(&self) -> &[f64] {
        &self.gamma_re
    }

    pub fn n_relays(&self) -> usize {
        self.gamma_rd.len()
    }
}

/// Seeded generator for one simulation stream. Distinct `stream` values give
/// non-overlapping sequences under the same seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
fn exp_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    -mean * u.ln()
}

/// Draw all link SNRs for one trial.
pub fn draw_links<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> LinkDraw {
    let mut draw = LinkDraw::zeroed(params.n_relays);
    draw_links_into(params, rng, &mut draw);
    draw
}

/// Allocation-free variant of [`draw_links`]; `draw` must have been built for
/// the same relay count.
pub fn draw_links_into<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R, draw: &mut LinkDraw) {
    debug_assert_eq!(draw.gamma_rd.len(), params.n_relays);
    match params.direct {
        Some(d) => {
            draw.gamma_sd = exp_draw(d.lambda_sd, rng);
            draw.gamma_se = exp_draw(d.lambda_se, rng);
        }
        None => {
            draw.gamma_sd = 0.0;
            draw.gamma_se = 0.0;
        }
    }
    for (rd, re) in draw.gamma_rd.iter_mut().zip(draw.gamma_re.iter_mut()) {
        *rd = exp_draw(params.lambda_m, rng);
        *re = exp_draw(params.lambda_e, rng);
    }
}
