//! Numerical-integration cross-check of the direct-link closed form.
//!
//! Conditioning on `v = zγ_se - γ_sd` (and `u = v + z - 1`), the relays'
//! ratios are independent, so the selected maximum has conditional CDF
//!
//! ```text
//! F_max(z | u) = (1 - e^{-u/λ_m} λ_m/(zλ_e + λ_m))^N        u >= 0
//!              = (zλ_e/(zλ_e + λ_m))^N e^{Nu/(zλ_e)}          u <  0
//! ```
//!
//! and `v` has the two-sided exponential density [`pdf_v`]. The outage
//! probability is `∫ F_max(z | v + z - 1) f(v) dv`, integrated here by
//! adaptive Gauss–Kronrod quadrature split at the kinks `v = 1 - z` and
//! `v = 0`. The two infinite tails are mapped onto `[0, 1)` with
//! `v = v0 ± L t/(1 - t)`, `L` being the tail's density scale, so no
//! truncation is involved.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::analytic::OutageProbability;
use crate::error::{invalid, Error, Result};
use crate::model::{ChannelParams, DirectLinks, SecrecyRate, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return Err(invalid("abs_tol", format!("must be positive, got {abs_tol}")));
        }
        if !(rel_tol > 0.0) {
            return Err(invalid("rel_tol", format!("must be positive, got {rel_tol}")));
        }
        if max_subdivisions < 10 {
            return Err(invalid(
                "max_subdivisions",
                format!("must be at least 10, got {max_subdivisions}"),
            ));
        }
        Ok(QuadratureSettings {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

/// Result of an oracle evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEstimate {
    pub probability: OutageProbability,
    /// Estimated absolute integration error.
    pub error_estimate: f64,
    pub subdivisions: usize,
}

/// CDF of the selected relay's ratio given the direct-link offset `u`.
pub fn cond_cdf_max(z: f64, u: f64, params: &ChannelParams) -> f64 {
    let (lm, le) = (params.lambda_m(), params.lambda_e());
    let n = params.n_relays() as i32;
    let zle = z * le;
    if u >= 0.0 {
        // 1 - a e^{-u/λ_m} == b - a expm1(-u/λ_m)
        let single = zle / (zle + lm) - lm / (zle + lm) * (-u / lm).exp_m1();
        single.powi(n)
    } else {
        (zle / (zle + lm)).powi(n) * (f64::from(n) * u / zle).exp()
    }
}

/// Density of `v = zγ_se - γ_sd`.
pub fn pdf_v(v: f64, z: f64, lambda_sd: f64, lambda_se: f64) -> f64 {
    let norm = z * lambda_se + lambda_sd;
    if v >= 0.0 {
        (-v / (z * lambda_se)).exp() / norm
    } else {
        (v / lambda_sd).exp() / norm
    }
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

pub(crate) struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// An integrand on a finite interval, pre-split at `points` (sorted, ends included).
pub(crate) struct Piece<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub points: Vec<f64>,
}

/// Sorted points `a < p < b` at `a + w 2^k` and `b - w 2^k` for each width,
/// plus the ends. Seeds the adaptive partition with features narrower than
/// the whole interval, which a single Gauss–Kronrod rule could miss.
pub(crate) fn seeded_points(a: f64, b: f64, near_a: &[f64], near_b: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    let mut walk = |origin: f64, dir: f64, width: f64| {
        if !(width > 0.0 && width.is_finite()) {
            return;
        }
        let mut step = width;
        loop {
            let p = origin + dir * step;
            if !(p > a && p < b) {
                break;
            }
            pts.push(p);
            step *= 2.0;
        }
    };
    for &w in near_a {
        walk(a, 1.0, w);
    }
    for &w in near_b {
        walk(b, -1.0, w);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Globally adaptive quadrature over several pieces sharing one tolerance:
/// always bisects the segment with the largest error estimate.
pub(crate) fn integrate_pieces(pieces: &[Piece<'_>], settings: &QuadratureSettings) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    for (i, piece) in pieces.iter().enumerate() {
        for w in piece.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > a {
                let (value, error) = gauss_kronrod(&piece.f, a, b);
                heap.push(Segment {
                    piece: i,
                    a,
                    b,
                    value,
                    error,
                });
            }
        }
    }
    let totals = |heap: &BinaryHeap<Segment>| heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    let mut subdivisions = 0;
    loop {
        let (value, error) = totals(&heap);
        if error <= settings.abs_tol.max(settings.rel_tol * value.abs()) {
            return Ok(Integral {
                value,
                error,
                subdivisions,
            });
        }
        if subdivisions >= settings.max_subdivisions {
            return Err(Error::NonConvergence {
                error_estimate: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("a non-converged integral has segments");
        let f = pieces[worst.piece].f;
        let mid = 0.5 * (worst.a + worst.b);
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gauss_kronrod(&f, a, b);
            heap.push(Segment {
                piece: worst.piece,
                a,
                b,
                value,
                error,
            });
        }
        subdivisions += 1;
    }
}

/// `∫_{v0}^{∞} g` (`dir = 1`) or `∫_{-∞}^{v0} g` (`dir = -1`) mapped onto `t ∈ [0, 1)`.
fn tail<'a>(g: &'a dyn Fn(f64) -> f64, v0: f64, scale: f64, dir: f64) -> impl Fn(f64) -> f64 + 'a {
    move |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t;
        let v = v0 + dir * scale * t / s;
        let jac = scale / (s * s);
        let y = g(v) * jac;
        if y.is_finite() {
            y
        } else {
            0.0
        }
    }
}

/// Width `w` next to a tail's finite end, expressed in the mapped variable.
fn tail_width(w: f64, scale: f64) -> f64 {
    w / (scale + w)
}

/// Outage probability with direct links by integrating the conditional CDF
/// against the density of `v`.
pub fn quadrature_outage_with_direct(
    rate: SecrecyRate,
    params: &ChannelParams,
    settings: &QuadratureSettings,
) -> Result<QuadratureEstimate> {
    let DirectLinks { lambda_sd, lambda_se } = params
        .direct()
        .ok_or_else(|| invalid("topology", "expected WithDirect parameters, got NoDirect"))?;
    let z = rate.threshold();
    let zm1 = rate.as_nats().exp_m1();
    let integrand = move |v: f64| cond_cdf_max(z, v + zm1, params) * pdf_v(v, z, lambda_sd, lambda_se);

    let kink = -zm1;
    let nf = params.n_relays() as f64;
    // CDF feature width in u next to u = 0
    let cdf_width = params.lambda_m() / nf;
    let left_scale = 1.0 / (1.0 / lambda_sd + nf / (z * params.lambda_e()));
    let right_scale = z * lambda_se;
    let left = tail(&integrand, kink, left_scale, -1.0);
    let right = tail(&integrand, 0.0, right_scale, 1.0);
    let pieces = [
        Piece {
            f: &left,
            points: vec![0.0, 1.0],
        },
        Piece {
            f: &integrand,
            points: seeded_points(kink, 0.0, &[cdf_width], &[lambda_sd]),
        },
        Piece {
            f: &right,
            points: seeded_points(0.0, 1.0, &[tail_width(cdf_width, right_scale)], &[]),
        },
    ];
    let integral = integrate_pieces(&pieces, settings)?;
    Ok(QuadratureEstimate {
        probability: OutageProbability::checked(integral.value, "quadrature outage")?,
        error_estimate: integral.error,
        subdivisions: integral.subdivisions,
    })
}

/// Outage probability without direct links: a single relay's ratio CDF
/// `∫ f(γ_re) P(γ_rd <= zγ_re + z - 1) dγ_re` by quadrature, raised to `N`.
pub fn quadrature_outage_no_direct(
    rate: SecrecyRate,
    params: &ChannelParams,
    settings: &QuadratureSettings,
) -> Result<QuadratureEstimate> {
    if params.topology() != Topology::NoDirect {
        return Err(invalid("topology", "expected NoDirect parameters, got WithDirect"));
    }
    let (lm, le) = (params.lambda_m(), params.lambda_e());
    let z = rate.threshold();
    let zm1 = rate.as_nats().exp_m1();
    let inner = move |g: f64| (-g / le).exp() / le * -(-(z * g + zm1) / lm).exp_m1();
    let mapped = tail(&inner, 0.0, le, 1.0);
    let pieces = [Piece {
        f: &mapped,
        points: seeded_points(0.0, 1.0, &[tail_width(lm / z, le)], &[]),
    }];
    let single = integrate_pieces(&pieces, settings)?;
    let n = params.n_relays() as i32;
    let value = single.value.powi(n);
    let error = f64::from(n) * single.value.powi(n - 1) * single.error;
    Ok(QuadratureEstimate {
        probability: OutageProbability::checked(value, "quadrature outage")?,
        error_estimate: error,
        subdivisions: single.subdivisions,
    })
}
