//! Evaluation of sweep grids.

use rayon::prelude::*;

use secrelay::{
    asym_no_direct, asym_with_direct_fixed, asym_with_direct_scaling, db_to_linear, estimate_outage, outage_no_direct,
    outage_with_direct, quadrature_outage_no_direct, quadrature_outage_with_direct, ChannelParams, McConfig,
    QuadratureSettings, SnrRatios, Topology, Variant,
};

use crate::error::CliError;
use crate::format::CurvePoint;
use crate::spec::{CurveSpec, DirectLevel, Estimator, SweepSpec};

/// A row of the sweep: curve, then `N`, then `λ_m` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Position in output order; also keys the point's Monte Carlo seed.
    pub index: u64,
    pub curve: usize,
    pub n: usize,
    pub lambda_m_db: f64,
}

/// All rows in output order.
pub fn grid(spec: &SweepSpec) -> Vec<GridPoint> {
    let mut points = Vec::with_capacity(spec.rows());
    for (curve, c) in spec.curves.iter().enumerate() {
        for &n in &c.n_list {
            for lambda_m_db in c.lambda_m_db.points() {
                points.push(GridPoint {
                    index: points.len() as u64,
                    curve,
                    n,
                    lambda_m_db,
                });
            }
        }
    }
    points
}

/// SplitMix64 finaliser of `seed + (index + 1) γ`: decorrelated per-point seeds.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn channel_params(curve: &CurveSpec, n: usize, lambda_m_db: f64) -> Result<ChannelParams, CliError> {
    let lambda_m = db_to_linear(lambda_m_db);
    let lambda_e = curve.eavesdropper.lambda_e(lambda_m);
    let params = match curve.direct {
        None => ChannelParams::no_direct(lambda_m, lambda_e, n)?,
        Some((sd, se)) => ChannelParams::with_direct(sd.linear(lambda_m), se.linear(lambda_m), lambda_m, lambda_e, n)?,
    };
    Ok(params)
}

/// Relay-only limit without direct links, the fixed-direct-link limit when
/// both direct SNRs are fixed, and the all-SNRs-scale limit when either tracks `λ_m`.
pub fn asymptotic(curve: &CurveSpec, params: &ChannelParams) -> Result<f64, CliError> {
    let rate = curve.rate;
    let value = match curve.direct {
        None => asym_no_direct(rate, params.lambda_m() / params.lambda_e(), params.n_relays())?,
        Some((DirectLevel::Db(_), DirectLevel::Db(_))) => asym_with_direct_fixed(rate, params, Variant::Corrected)?,
        Some(_) => asym_with_direct_scaling(rate, &SnrRatios::from_params(params)?, params.n_relays())?,
    };
    Ok(value.value())
}

pub fn evaluate(spec: &SweepSpec, point: &GridPoint) -> Result<CurvePoint, CliError> {
    let curve = &spec.curves[point.curve];
    let params = channel_params(curve, point.n, point.lambda_m_db)?;
    let rate = curve.rate;
    let wants = |e| spec.estimators.contains(e);
    let direct = params.topology() == Topology::WithDirect;

    let p_analytic = if wants(Estimator::Analytic) {
        let p = if direct {
            outage_with_direct(rate, &params)?
        } else {
            outage_no_direct(rate, &params)?
        };
        Some(p.value())
    } else {
        None
    };
    let p_asymptotic = if wants(Estimator::Asymptotic) {
        Some(asymptotic(curve, &params)?)
    } else {
        None
    };
    let mc = if wants(Estimator::Mc) {
        let cfg = McConfig::new(spec.trials, point_seed(spec.seed, point.index))?.with_shards(spec.shards)?;
        Some(estimate_outage(&params, rate, &cfg)?)
    } else {
        None
    };
    let p_oracle = if wants(Estimator::Oracle) {
        let settings = QuadratureSettings::default();
        let q = if direct {
            quadrature_outage_with_direct(rate, &params, &settings)?
        } else {
            quadrature_outage_no_direct(rate, &params, &settings)?
        };
        Some(q.probability.value())
    } else {
        None
    };

    Ok(CurvePoint {
        lambda_m_db: point.lambda_m_db,
        n: point.n,
        topology: curve.topology_label(),
        rate_nats: rate.as_nats(),
        p_analytic,
        p_asymptotic,
        mc,
        p_oracle,
    })
}

/// Evaluates every row on a pool of `spec.jobs` threads, in output order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CurvePoint>, CliError> {
    let points = grid(spec);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))?;
    pool.install(|| points.par_iter().map(|p| evaluate(spec, p)).collect())
}
