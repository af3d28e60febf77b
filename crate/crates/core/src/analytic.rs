//! Exact outage probabilities.
//!
//! Without direct links each relay's ratio `Z_n = (1 + γ_rd)/(1 + γ_re)` has
//! CDF `F(z) = 1 - exp(-(z-1)/λ_m) λ_m/(zλ_e + λ_m)` and the selected maximum
//! has CDF `F(z)^N`, so the outage probability is `F(e^R)^N`.
//!
//! With direct links the destination and eavesdropper add the direct SNR to
//! the relay SNR. Writing `z = e^R`, `D = zλ_se + λ_sd`, `a = λ_m/(zλ_e + λ_m)`,
//! `b = 1 - a`, `A = -(z-1)/λ_sd` and `B_n = -n(z-1)/λ_m`, the outage
//! probability is
//!
//! ```text
//! P = 1 - (λ_sd/D) e^A
//!     + b^N e^A / (D (1/λ_sd + N/(zλ_e)))
//!     + (1/D) Σ_{n=1..N} C(N,n) (-a)^n e^{B_n} [ zλ_se λ_m/(n zλ_se + λ_m) + f_n ]
//! f_n = λ_sd λ_m (exp((z-1)(n/λ_m - 1/λ_sd)) - 1) / (nλ_sd - λ_m)     (z - 1 when nλ_sd = λ_m)
//! ```
//!
//! The second term's exponent is `A` alone; see [`Variant::AsPrinted`] for
//! the widely quoted form whose exponent also carries `N/(zλ_e) - N/λ_m`.
//!
//! The alternating sum is evaluated in double-double arithmetic. Each
//! `e^{B_n} f_n` is rewritten as `(z-1) e^{max(A, B_n)} φ(-|x_n|)` with
//! `x_n = (z-1)(nλ_sd - λ_m)/(λ_sd λ_m)` and `φ(x) = expm1(x)/x`, so no
//! exponent is ever positive and the removable singularity at `nλ_sd = λ_m`
//! disappears. When the largest term exceeds `2^50` the double-double
//! budget no longer covers the cancellation, and the same expression is
//! re-evaluated in binary floating point sized from that term.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::UBig;

use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, DirectLinks, SecrecyRate, Topology};
use crate::numeric::{binomial, expm1_over_x, Dd};

/// Slack tolerated outside `[0, 1]` before a value counts as a bug rather
/// than round-off.
pub const RANGE_SLACK: f64 = 1e-9;

/// Relative gap `|nλ_sd - λ_m| / max(nλ_sd, λ_m)` at or below which
/// [`f_correction`] returns its limiting value `e^R - 1`.
pub const SINGULAR_SWITCH: f64 = 1e-9;

/// Which form of a closed expression to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// The form that agrees with direct integration (default).
    #[default]
    Corrected,
    /// The form exactly as originally typeset. Kept for comparison only.
    AsPrinted,
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OutageProbability(f64);

impl OutageProbability {
    /// Accepts values within [`RANGE_SLACK`] of `[0, 1]` and clamps them;
    /// anything else is an internal-consistency error.
    pub fn checked(value: f64, what: &str) -> Result<Self> {
        if value.is_finite() && (-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&value) {
            Ok(OutageProbability(value.clamp(0.0, 1.0)))
        } else {
            Err(Error::InternalConsistency(format!(
                "{what} evaluated to {value:e}, outside [0, 1]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<OutageProbability> for f64 {
    fn from(p: OutageProbability) -> f64 {
        p.0
    }
}

fn require_topology(params: &ChannelParams, want: Topology) -> Result<()> {
    if params.topology() == want {
        Ok(())
    } else {
        Err(invalid(
            "topology",
            format!("expected {want:?} parameters, got {:?}", params.topology()),
        ))
    }
}

fn direct_links(params: &ChannelParams) -> Result<DirectLinks> {
    params
        .direct()
        .ok_or_else(|| invalid("topology", "expected WithDirect parameters, got NoDirect"))
}

/// CDF of a single relay's secrecy ratio without direct links.
pub fn cdf_zn_no_direct(z: f64, lambda_m: f64, lambda_e: f64) -> Result<f64> {
    if !(z >= 1.0) {
        return Err(Error::Domain(format!("secrecy ratio threshold must be >= 1, got {z}")));
    }
    if !(lambda_m > 0.0 && lambda_e > 0.0) {
        return Err(invalid("lambda", "relay mean SNRs must be positive"));
    }
    let denom = z * lambda_e + lambda_m;
    // 1 - a e^B == b - a expm1(B): both terms non-negative
    Ok(z * lambda_e / denom - lambda_m / denom * (-(z - 1.0) / lambda_m).exp_m1())
}

/// Outage probability without direct links, `F(e^R)^N`.
pub fn outage_no_direct(rate: SecrecyRate, params: &ChannelParams) -> Result<OutageProbability> {
    require_topology(params, Topology::NoDirect)?;
    let f = cdf_zn_no_direct(rate.threshold(), params.lambda_m(), params.lambda_e())?;
    OutageProbability::checked(f.powi(params.n_relays() as i32), "no-direct outage")
}

type Big = FBig<HalfEven>;

/// Outage probability without direct links from its binomial expansion
/// `Σ_{n=0..N} C(N,n) (-a e^{-(z-1)/λ_m})^n`.
///
/// The terms grow like `(1 + y)^N` while the sum is `(1 - y)^N`, so the sum is
/// carried out in binary floating point whose precision is sized from that
/// ratio. Intended as a cross-check of [`outage_no_direct`].
pub fn outage_no_direct_binomial_sum(rate: SecrecyRate, params: &ChannelParams) -> Result<f64> {
    require_topology(params, Topology::NoDirect)?;
    let n = params.n_relays() as u32;
    let (lm, le) = (params.lambda_m(), params.lambda_e());

    let z = rate.threshold();
    let y = lm / (z * le + lm) * (-(z - 1.0) / lm).exp();
    let growth = ((1.0 + y) / (1.0 - y).max(f64::EPSILON * 1e-3)).log2().max(0.0);
    let bits = (128.0 + f64::from(n) * growth).ceil() as usize;

    let big = |x: f64| -> Big { Big::try_from(x).expect("finite").with_precision(bits).value() };
    let r = big(rate.as_nats());
    let zb = r.clone().exp();
    let zm1 = r.exp_m1();
    let a = big(lm) / (zb * big(le) + big(lm));
    let y = a * (-(zm1 / big(lm))).exp();

    let mut sum = big(0.0);
    let mut power = big(1.0);
    for k in 0..=n {
        let c = Big::from(UBig::from(binomial(n, k))).with_precision(bits).value();
        sum += c * power.clone();
        power *= -y.clone();
    }
    Ok(sum.to_f64().value())
}

/// Correction term `f` of the direct-link closed form for relay-subset size `n`.
pub fn f_correction(n: usize, rate: SecrecyRate, lambda_sd: f64, lambda_m: f64) -> f64 {
    let zm1 = rate.as_nats().exp_m1();
    let n_sd = n as f64 * lambda_sd;
    let gap = n_sd - lambda_m;
    if gap.abs() <= SINGULAR_SWITCH * n_sd.max(lambda_m) {
        return zm1;
    }
    // λ_sd λ_m expm1(x) / (nλ_sd - λ_m) with x = (z-1)(nλ_sd - λ_m)/(λ_sd λ_m)
    let x = zm1 * (gap / (lambda_sd * lambda_m));
    zm1 * expm1_over_x(x)
}

/// Exact outage probability with direct links.
pub fn outage_with_direct(rate: SecrecyRate, params: &ChannelParams) -> Result<OutageProbability> {
    let p = outage_with_direct_variant(rate, params, Variant::Corrected)?;
    OutageProbability::checked(p, "direct-link outage")
}

/// Direct-link closed form in the requested [`Variant`], without range
/// checking (the as-printed form is not guaranteed to be a probability).
pub fn outage_with_direct_variant(rate: SecrecyRate, params: &ChannelParams, variant: Variant) -> Result<f64> {
    let DirectLinks { lambda_sd, lambda_se } = direct_links(params)?;
    let n_relays = params.n_relays() as u32;
    let nf = f64::from(n_relays);

    let r = Dd::new(rate.as_nats());
    let z = r.exp();
    let zm1 = r.exp_m1();
    let (lsd, lse) = (Dd::new(lambda_sd), Dd::new(lambda_se));
    let (lm, le) = (Dd::new(params.lambda_m()), Dd::new(params.lambda_e()));

    let d = z * lse + lsd;
    let zle = z * le;
    let a = lm / (zle + lm);
    let b = zle / (zle + lm);
    let exp_a_arg = -(zm1 / lsd);
    let exp_a = exp_a_arg.exp();

    let direct_only = Dd::ONE - lsd / d * exp_a;

    let harmonic = lsd.recip() + Dd::new(nf) / zle;
    let all_below = match variant {
        Variant::Corrected => b.powi(n_relays) * exp_a / (harmonic * d),
        Variant::AsPrinted => {
            let arg = -(zm1 * (harmonic - Dd::new(nf) / lm));
            if arg.hi() > 700.0 {
                let log = nf * b.to_f64().ln() - (harmonic * d).to_f64().ln() + arg.to_f64();
                Dd::new(log.exp())
            } else {
                b.powi(n_relays) * arg.exp() / (harmonic * d)
            }
        }
    };

    let zse = z * lse;
    let lsd_lm = lsd * lm;
    let mut sum = Dd::ZERO;
    let mut power = Dd::ONE;
    let mut largest = 0.0f64;
    for n in 1..=n_relays {
        power = power * -a;
        let nd = Dd::new(f64::from(n));
        let exp_b_arg = -(nd * zm1 / lm);
        let eavesdrop = exp_b_arg.exp() * zse * lm / (nd * zse + lm);
        let gap = nd * lsd - lm;
        let x = zm1 * gap / lsd_lm;
        let correction = zm1 * exp_a_arg.max(exp_b_arg).exp() * (-x.abs()).expm1_over_x();
        let term = Dd::from_u128(binomial(n_relays, n)) * power * (eavesdrop + correction);
        largest = largest.max((term / d).hi().abs());
        sum = sum + term;
    }

    if largest > DD_CANCELLATION_LIMIT {
        // absolute error ~ largest 2^-bits; widen until it is 2^-64 of the result
        let mut bits = (128.0 + largest.log2()).ceil() as usize;
        loop {
            let v = with_direct_big(rate, params, variant, bits);
            if v.abs() < f64::MIN_POSITIVE {
                return Ok(v);
            }
            let needed = (64.0 + largest.log2() - v.abs().log2()).ceil();
            if !(needed > bits as f64) || bits >= MAX_BITS {
                return Ok(v);
            }
            bits = (needed + 64.0).min(MAX_BITS as f64) as usize;
        }
    }
    let total = direct_only + all_below + sum / d;
    Ok(total.to_f64())
}

/// Precision cap of the extended-precision fallback.
const MAX_BITS: usize = 8192;

/// Largest alternating-sum term the double-double path accepts.
const DD_CANCELLATION_LIMIT: f64 = 1.125_899_906_842_624e15;

/// The direct-link closed form in `bits`-bit binary floating point, same
/// rearrangement as the double-double path.
fn with_direct_big(rate: SecrecyRate, params: &ChannelParams, variant: Variant, bits: usize) -> f64 {
    let DirectLinks { lambda_sd, lambda_se } = params.direct().expect("checked by the caller");
    let n_relays = params.n_relays() as u32;
    let big = |x: f64| -> Big { Big::try_from(x).expect("finite").with_precision(bits).value() };
    let phi = |x: Big| -> Big {
        if x == big(0.0) {
            big(1.0)
        } else {
            x.clone().exp_m1() / x
        }
    };

    let r = big(rate.as_nats());
    let z = r.clone().exp();
    let zm1 = r.exp_m1();
    let (lsd, lse) = (big(lambda_sd), big(lambda_se));
    let (lm, le) = (big(params.lambda_m()), big(params.lambda_e()));
    let nf = big(f64::from(n_relays));

    let d = z.clone() * lse.clone() + lsd.clone();
    let zle = z.clone() * le;
    let a = lm.clone() / (zle.clone() + lm.clone());
    let b = zle.clone() / (zle.clone() + lm.clone());
    let exp_a_arg = -(zm1.clone() / lsd.clone());

    let mut total = big(1.0) - lsd.clone() / d.clone() * exp_a_arg.clone().exp();
    let harmonic = big(1.0) / lsd.clone() + nf.clone() / zle;
    let all_below_arg = match variant {
        Variant::Corrected => exp_a_arg.clone(),
        Variant::AsPrinted => -(zm1.clone() * (harmonic.clone() - nf / lm.clone())),
    };
    total += b.powi(n_relays.into()) * all_below_arg.exp() / (harmonic * d.clone());

    let zse = z * lse;
    let mut sum = big(0.0);
    let mut power = big(1.0);
    for n in 1..=n_relays {
        power *= -a.clone();
        let nb = big(f64::from(n));
        let exp_b_arg = -(nb.clone() * zm1.clone() / lm.clone());
        let eavesdrop = exp_b_arg.clone().exp() * zse.clone() * lm.clone() / (nb.clone() * zse.clone() + lm.clone());
        let x = zm1.clone() * (nb * lsd.clone() - lm.clone()) / (lsd.clone() * lm.clone());
        let x_abs = if x < big(0.0) { -x } else { x };
        let larger = if exp_a_arg > exp_b_arg {
            exp_a_arg.clone()
        } else {
            exp_b_arg
        };
        let correction = zm1.clone() * larger.exp() * phi(-x_abs);
        let c = Big::from(UBig::from(binomial(n_relays, n)))
            .with_precision(bits)
            .value();
        sum += c * power.clone() * (eavesdrop + correction);
    }
    total += sum / d;
    total.to_f64().value()
}
