//! High-SNR limits of the outage probability at fixed SNR ratios.
//!
//! With `z = e^R`, `κ = λ_m/λ_e` and no direct links the limit is
//! `(z/(z + κ))^N`. With direct links two regimes are covered: fixed direct
//! SNRs while `λ_m, λ_e → ∞` ([`asym_with_direct_fixed`]), and every SNR
//! growing together at fixed ratios ([`asym_with_direct_scaling`]).

use crate::analytic::{OutageProbability, Variant, SINGULAR_SWITCH};
use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, DirectLinks, SecrecyRate, MAX_RELAYS};
use crate::numeric::{binomial, Dd};

/// SNR ratios that stay fixed along a high-SNR sequence. Always derived from
/// one [`ChannelParams`], so `κ_m = κ_d/κ` and `κ_e = κ_m/κ_s` hold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRatios {
    kappa: f64,
    kappa_s: f64,
    kappa_d: f64,
    kappa_e: f64,
    kappa_m: f64,
}

impl SnrRatios {
    pub fn from_params(params: &ChannelParams) -> Result<Self> {
        let DirectLinks { lambda_sd, lambda_se } = params
            .direct()
            .ok_or_else(|| invalid("topology", "SNR ratios need direct-link means"))?;
        let (lm, le) = (params.lambda_m(), params.lambda_e());
        Ok(SnrRatios {
            kappa: lm / le,
            kappa_s: lambda_sd / lambda_se,
            kappa_d: lambda_sd / le,
            kappa_e: lambda_se / lm,
            kappa_m: lambda_sd / lm,
        })
    }

    /// `λ_m / λ_e`
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `λ_sd / λ_se`
    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    /// `λ_sd / λ_e`
    pub fn kappa_d(&self) -> f64 {
        self.kappa_d
    }

    /// `λ_se / λ_m`
    pub fn kappa_e(&self) -> f64 {
        self.kappa_e
    }

    /// `λ_sd / λ_m`
    pub fn kappa_m(&self) -> f64 {
        self.kappa_m
    }
}

fn check_relays(n_relays: usize) -> Result<u32> {
    if (1..=MAX_RELAYS).contains(&n_relays) {
        Ok(n_relays as u32)
    } else {
        Err(invalid(
            "n_relays",
            format!("relay count must lie in 1..={MAX_RELAYS}, got {n_relays}"),
        ))
    }
}

/// High-SNR outage without direct links, `(e^R/(e^R + κ))^N`.
pub fn asym_no_direct(rate: SecrecyRate, kappa: f64, n_relays: usize) -> Result<OutageProbability> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", format!("must be positive and finite, got {kappa}")));
    }
    let n = check_relays(n_relays)?;
    let z = rate.threshold();
    OutageProbability::checked((z / (z + kappa)).powi(n as i32), "asymptotic no-direct outage")
}

/// The three additive terms of the fixed-direct-link limit, and the bound
/// `Σ C(N,n) a^n (1 - e^{B_n}) |…| / D` on its distance from the exact form.
fn fixed_direct_terms(rate: SecrecyRate, params: &ChannelParams, variant: Variant) -> Result<([Dd; 3], f64)> {
    let ratios = SnrRatios::from_params(params)?;
    let DirectLinks { lambda_sd, lambda_se } = params.direct().expect("checked by from_params");
    let n_relays = check_relays(params.n_relays())?;
    let nf = f64::from(n_relays);

    let r = Dd::new(rate.as_nats());
    let z = r.exp();
    let zm1 = r.exp_m1();
    let (lsd, lse) = (Dd::new(lambda_sd), Dd::new(lambda_se));
    let kappa = Dd::new(ratios.kappa);
    let d = z * lse + lsd;
    let exp_a = (-(zm1 / lsd)).exp();

    let direct_only = Dd::ONE - lsd / d * exp_a;

    let all_below_base = (z / (z + kappa)).powi(n_relays) * z * lsd / d;
    let all_below = match variant {
        Variant::Corrected => all_below_base * exp_a / (z + Dd::new(nf * ratios.kappa_d)),
        Variant::AsPrinted => all_below_base / (z + Dd::new(ratios.kappa_d)),
    };

    let neg_ratio = -(kappa / (z + kappa));
    let mut power = Dd::ONE;
    let mut sum = Dd::ZERO;
    let mut dropped = 0.0;
    let lm = params.lambda_m();
    for n in 1..=n_relays {
        power = power * neg_ratio;
        let nd = Dd::new(f64::from(n));
        let eavesdrop = z * lse / (nd * z * Dd::new(ratios.kappa_e) + Dd::ONE);
        // nκ_m - 1 = (nλ_sd - λ_m)/λ_m; same switch rule as the exact correction term
        let n_km = f64::from(n) * ratios.kappa_m;
        let correction = if (n_km - 1.0).abs() <= SINGULAR_SWITCH * n_km.max(1.0) {
            zm1
        } else {
            let x = zm1 * (nd * Dd::new(ratios.kappa_m) - Dd::ONE) / lsd;
            zm1 * x.expm1_over_x()
        };
        let term = Dd::from_u128(binomial(n_relays, n)) * power * (eavesdrop + correction);
        dropped += term.hi().abs() * -(-f64::from(n) * zm1.hi() / lm).exp_m1();
        sum = sum + term;
    }
    Ok(([direct_only, all_below, sum / d], dropped / d.hi()))
}

/// High-SNR outage with fixed direct-link SNRs (`λ_m, λ_e → ∞` at fixed `κ`).
///
/// The ratios `κ_d, κ_e, κ_m` are evaluated at the finite point `params`.
/// [`Variant::Corrected`] is the formal limit of the exact form: its
/// all-relays-below term carries `exp(-(e^R - 1)/λ_sd)/(e^R + Nκ_d)`.
/// [`Variant::AsPrinted`] drops the exponential and uses `e^R + κ_d`.
///
/// The corrected limit differs from the exact form only by the factors
/// `exp(-n(e^R - 1)/λ_m)` it drops, so at finite `λ_m` it may leave `[0, 1]`
/// by at most the resulting bound; such excursions are clamped.
pub fn asym_with_direct_fixed(
    rate: SecrecyRate,
    params: &ChannelParams,
    variant: Variant,
) -> Result<OutageProbability> {
    let ([t1, t2, t3], dropped) = fixed_direct_terms(rate, params, variant)?;
    let value = (t1 + t2 + t3).to_f64();
    if !value.is_finite() || !dropped.is_finite() {
        return Err(Error::Domain(format!(
            "fixed-direct limit overflows at {params:?}; λ_m is far outside the high-SNR regime"
        )));
    }
    let what = "asymptotic fixed-direct outage";
    match variant {
        Variant::Corrected if value.abs() <= 1.0 + dropped * (1.0 + 1e-12) => {
            OutageProbability::checked(value.clamp(0.0, 1.0), what)
        }
        _ => OutageProbability::checked(value, what),
    }
}

/// High-SNR outage when every mean SNR grows at fixed ratios.
pub fn asym_with_direct_scaling(rate: SecrecyRate, ratios: &SnrRatios, n_relays: usize) -> Result<OutageProbability> {
    let n_relays = check_relays(n_relays)?;
    let nf = f64::from(n_relays);
    let z = Dd::new(rate.as_nats()).exp();
    let kappa = Dd::new(ratios.kappa);
    let z_ks = z + Dd::new(ratios.kappa_s);

    let direct_only = z / z_ks;
    let all_below =
        (z / (z + kappa)).powi(n_relays) * z * Dd::new(ratios.kappa_s) / (z_ks * (z + Dd::new(nf * ratios.kappa_d)));

    let neg_ratio = -(kappa / (z + kappa));
    let mut power = Dd::ONE;
    let mut sum = Dd::ZERO;
    for n in 1..=n_relays {
        power = power * neg_ratio;
        let denom = z_ks * (Dd::new(f64::from(n)) * z * Dd::new(ratios.kappa_e) + Dd::ONE);
        sum = sum + z * Dd::from_u128(binomial(n_relays, n)) * power / denom;
    }
    OutageProbability::checked((direct_only + all_below + sum).to_f64(), "asymptotic scaling outage")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{outage_no_direct, outage_with_direct};
    use crate::model::db_to_linear;

    fn nats(r: f64) -> SecrecyRate {
        SecrecyRate::nats(r).unwrap()
    }

    fn eq15(r: f64, kappa: f64, n: usize) -> f64 {
        asym_no_direct(nats(r), kappa, n).unwrap().value()
    }

    #[test]
    fn ratios_are_consistent() {
        let p = ChannelParams::with_direct(2.0, 5.0, 40.0, 8.0, 3).unwrap();
        let k = SnrRatios::from_params(&p).unwrap();
        assert!((k.kappa() - 5.0).abs() < 1e-15);
        assert!((k.kappa_s() - 0.4).abs() < 1e-15);
        assert!((k.kappa_d() - 0.25).abs() < 1e-15);
        assert!((k.kappa_e() - 0.125).abs() < 1e-15);
        assert!((k.kappa_m() - 0.05).abs() < 1e-15);
        assert!((k.kappa_m() - k.kappa_d() / k.kappa()).abs() < 1e-15);
        assert!((k.kappa_e() - k.kappa_m() / k.kappa_s()).abs() < 1e-15);
        assert!(SnrRatios::from_params(&p.without_direct()).is_err());
    }

    #[test]
    fn no_direct_limit_values() {
        assert!((eq15(0.0, 1.0, 1) - 0.5).abs() < 1e-16);
        // extended-precision value of (e^0.3/(e^0.3 + 1))^2
        let want = 0.329_984_205_120_913_1;
        assert!((eq15(0.3, 1.0, 2) - want).abs() < 1e-15, "{}", eq15(0.3, 1.0, 2));
        assert!(asym_no_direct(nats(0.3), 0.0, 2).is_err());
        assert!(asym_no_direct(nats(0.3), 1.0, 0).is_err());
    }

    #[test]
    fn no_direct_limit_matches_exact_at_high_snr() {
        for n in [1, 2, 4] {
            let p = ChannelParams::no_direct(1e6, 1e6, n).unwrap();
            let exact = outage_no_direct(nats(0.3), &p).unwrap().value();
            assert!((exact - eq15(0.3, 1.0, n)).abs() < 1e-4);
        }
    }

    #[test]
    fn fixed_direct_limit_matches_exact_at_high_snr() {
        let s = db_to_linear(5.0);
        let p = ChannelParams::with_direct(s, s, 1e7, 1e7, 2).unwrap();
        let exact = outage_with_direct(nats(0.3), &p).unwrap().value();
        let asym = asym_with_direct_fixed(nats(0.3), &p, Variant::Corrected)
            .unwrap()
            .value();
        assert!((exact - asym).abs() < 1e-5, "{exact} vs {asym}");
    }

    #[test]
    fn fixed_direct_limit_with_tiny_ratios_reduces_to_relay_only() {
        let s = db_to_linear(5.0);
        // κ_d = κ_e = κ_m = 1e-9
        let p = ChannelParams::with_direct(s, s, s * 1e9, s * 1e9, 3).unwrap();
        let asym = asym_with_direct_fixed(nats(0.3), &p, Variant::Corrected)
            .unwrap()
            .value();
        assert!((asym - eq15(0.3, 1.0, 3)).abs() < 1e-6);
    }

    #[test]
    fn symmetric_direct_links_first_term_is_half_at_zero_rate() {
        let p = ChannelParams::with_direct(3.0, 3.0, 100.0, 100.0, 2).unwrap();
        let ([t1, _, _], _) = fixed_direct_terms(nats(0.0), &p, Variant::Corrected).unwrap();
        assert!((t1.to_f64() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn scaling_limit_hand_value() {
        let p = ChannelParams::with_direct(1.0, 1.0, 1.0, 1.0, 1).unwrap();
        let k = SnrRatios::from_params(&p).unwrap();
        let v = asym_with_direct_scaling(nats(0.0), &k, 1).unwrap().value();
        assert!((v - 0.5).abs() < 1e-16);
    }

    #[test]
    fn scaling_limit_matches_exact_at_high_snr() {
        let p = ChannelParams::with_direct(1e6, 1e6, 1e6, 1e6, 2).unwrap();
        let k = SnrRatios::from_params(&p).unwrap();
        let exact = outage_with_direct(nats(0.3), &p).unwrap().value();
        let asym = asym_with_direct_scaling(nats(0.3), &k, 2).unwrap().value();
        assert!((exact - asym).abs() < 1e-4, "{exact} vs {asym}");
    }

    #[test]
    fn scaling_limit_with_weak_direct_eavesdropper_link() {
        // κ_s → ∞ at fixed κ, κ_d: only the all-relays-below term survives,
        // tending to (z/(z+κ))^N z/(z + Nκ_d).
        let (r, n) = (0.3f64, 3usize);
        let z = r.exp();
        let want = eq15(r, 1.0, n) * z / (z + n as f64);
        let mut prev = f64::INFINITY;
        for k in [1e2, 1e4, 1e8, 1e12] {
            let p = ChannelParams::with_direct(1.0, 1.0 / k, 1.0, 1.0, n).unwrap();
            let ratios = SnrRatios::from_params(&p).unwrap();
            let v = asym_with_direct_scaling(nats(r), &ratios, n).unwrap().value();
            let gap = (v - want).abs();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-11);
    }

    #[test]
    fn vanishing_ratios_reduce_to_relay_only_limit() {
        let r = nats(0.3);
        for n in [1usize, 2, 4] {
            let target = eq15(0.3, 1.0, n);
            let s = db_to_linear(5.0);
            let mut prev_fixed = f64::INFINITY;
            let mut prev_scaling = f64::INFINITY;
            for k in 3..=9 {
                let big = 10f64.powi(k);
                let p = ChannelParams::with_direct(s, s, s * big, s * big, n).unwrap();
                let fixed = asym_with_direct_fixed(r, &p, Variant::Corrected).unwrap().value();
                let dev = (fixed - target).abs();
                assert!(dev < prev_fixed, "fixed n={n} k={k}: {dev} >= {prev_fixed}");
                prev_fixed = dev;

                let p = ChannelParams::with_direct(1.0, 1.0, big, big, n).unwrap();
                let ratios = SnrRatios::from_params(&p).unwrap();
                let scaling = asym_with_direct_scaling(r, &ratios, n).unwrap().value();
                let dev = (scaling - target).abs();
                assert!(dev < prev_scaling, "scaling n={n} k={k}: {dev} >= {prev_scaling}");
                prev_scaling = dev;
            }
            assert!(prev_fixed < 1e-6);
            assert!(prev_scaling < 1e-6);
        }
    }

    #[test]
    fn as_printed_fixed_limit_keeps_a_direct_link_offset() {
        // Without exp(-(z-1)/λ_sd) the printed form settles at
        // P15 + P15 λ_sd (1 - e^A)/D instead of P15.
        let (r, n) = (0.3f64, 2usize);
        let s = db_to_linear(5.0);
        let p = ChannelParams::with_direct(s, s, s * 1e9, s * 1e9, n).unwrap();
        let printed = asym_with_direct_fixed(nats(r), &p, Variant::AsPrinted).unwrap().value();
        let z = r.exp();
        let d = z * s + s;
        let p15 = eq15(r, 1.0, n);
        let offset = p15 * s * (1.0 - (-(z - 1.0) / s).exp()) / d;
        assert!(offset > 1e-3);
        assert!((printed - (p15 + offset)).abs() < 1e-6, "{printed} vs {}", p15 + offset);
    }

    #[test]
    fn limits_stay_in_range_on_stress_grid() {
        let lams = [1e-3, 1.0, 1e3];
        for &r in &[0.0, 0.3, 3.0] {
            for &n in &[1usize, 2, 8, 64] {
                for &lm in &lams {
                    for &le in &lams {
                        eq15(r, lm / le, n);
                        for &sd in &lams {
                            for &se in &lams {
                                let p = ChannelParams::with_direct(sd, se, lm, le, n).unwrap();
                                let k = SnrRatios::from_params(&p).unwrap();
                                asym_with_direct_scaling(nats(r), &k, n).unwrap();
                                match asym_with_direct_fixed(nats(r), &p, Variant::Corrected) {
                                    Ok(_) | Err(Error::Domain(_)) => {}
                                    Err(e) => panic!("{p:?} r={r}: {e}"),
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
