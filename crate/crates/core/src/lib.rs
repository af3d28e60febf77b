//! Secrecy outage probability of opportunistic decode-and-forward relay
//! selection over Rayleigh fading.
//!
//! A source reaches a destination through the one of `N` relays that
//! maximises the instantaneous secrecy ratio
//! `Z_n = (1 + γ_rd + γ_sd) / (1 + γ_re + γ_se)`, while an eavesdropper
//! listens to the same transmissions. Every SNR is exponentially distributed
//! with a configured mean. The crate evaluates the probability that the
//! selected link's secrecy rate `max(ln Z_max, 0)` does not exceed a target
//! rate `R` in four independent ways:
//!
//! * [`analytic`]: exact closed forms, with and without direct source links;
//! * [`asymptotic`]: high-SNR limits at fixed SNR ratios;
//! * [`montecarlo`]: an event-level protocol simulator with Wilson intervals;
//! * [`oracle`]: adaptive quadrature of the conditional CDF against the
//!   direct-link difference density.
//!
//! All SNR means are linear power ratios and all rates are in nats.

// `!(x > 0.0)` style guards are deliberate: they reject NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod asymptotic;
mod error;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod oracle;

pub use analytic::{cdf_zn_no_direct, f_correction, outage_no_direct, outage_with_direct, OutageProbability, Variant};
pub use asymptotic::{asym_no_direct, asym_with_direct_fixed, asym_with_direct_scaling, SnrRatios};
pub use error::{Error, Result};
pub use model::{
    db_to_linear, draw_links, linear_to_db, sample_exponential, ChannelParams, DirectLinks, LinkDraw, SecrecyRate,
    Topology, MAX_RELAYS,
};
pub use montecarlo::{estimate_outage, McConfig, McEstimate};
pub use oracle::{quadrature_outage_no_direct, quadrature_outage_with_direct, QuadratureSettings};
