//! Sweep specifications: partial layers from a JSON config and from flags,
//! merged and validated into a [`SweepSpec`] before anything is evaluated.

use std::fmt;
use std::str::FromStr;

use serde::Deserialize;

use secrelay::{SecrecyRate, MAX_RELAYS};

use crate::error::CliError;
use crate::format::sig10;

/// Sweeps larger than this many rows are rejected as a likely typo.
pub const MAX_ROWS: usize = 1_000_000;

pub const DEFAULT_RATE_NATS: f64 = 0.3;
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Inclusive dB grid `start, start + step, …, ≤ stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DbRange {
    /// A single-point grid.
    pub fn single(db: f64) -> Self {
        DbRange {
            start: db,
            stop: db,
            step: 1.0,
        }
    }

    /// Each point is `start + i * step`, never an accumulated sum.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn parse(field: &str, s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| -> Result<f64, CliError> {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::usage(field, format!("`{t}` is not a finite number")))
        };
        let range = match parts.as_slice() {
            [v] => DbRange::single(num(v)?),
            [a, b, c] => DbRange {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => {
                return Err(CliError::usage(
                    field,
                    format!("expected start:stop:step or a single value, got `{s}`"),
                ))
            }
        };
        // also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(range.step > 0.0) {
            return Err(CliError::usage(
                field,
                format!("step must be positive, got {}", range.step),
            ));
        }
        if range.start > range.stop {
            return Err(CliError::usage(
                field,
                format!("start {} exceeds stop {}", range.start, range.stop),
            ));
        }
        if range.len() > MAX_ROWS {
            return Err(CliError::usage(field, format!("grid has more than {MAX_ROWS} points")));
        }
        Ok(range)
    }
}

/// A direct-link mean SNR: fixed in dB, or equal to `λ_m` at every grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectLevel {
    Db(f64),
    Track,
}

impl DirectLevel {
    fn parse(field: &str, s: &str) -> Result<Self, CliError> {
        if s.trim() == "track" {
            return Ok(DirectLevel::Track);
        }
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .map(DirectLevel::Db)
            .ok_or_else(|| CliError::usage(field, format!("expected a dB value or `track`, got `{s}`")))
    }

    pub fn linear(self, lambda_m: f64) -> f64 {
        match self {
            DirectLevel::Db(db) => secrelay::db_to_linear(db),
            DirectLevel::Track => lambda_m,
        }
    }
}

impl fmt::Display for DirectLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectLevel::Db(db) => f.write_str(&sig10(*db)),
            DirectLevel::Track => f.write_str("track"),
        }
    }
}

/// How the relay eavesdropper mean `λ_e` follows the sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eavesdropper {
    /// `λ_e = λ_m / κ` with `κ` in dB.
    KappaDb(f64),
    /// Fixed `λ_e` in dB.
    LambdaEDb(f64),
}

impl Eavesdropper {
    pub fn lambda_e(self, lambda_m: f64) -> f64 {
        match self {
            Eavesdropper::KappaDb(k) => lambda_m / secrelay::db_to_linear(k),
            Eavesdropper::LambdaEDb(db) => secrelay::db_to_linear(db),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    Analytic,
    Asymptotic,
    Mc,
    Oracle,
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "analytic" => Ok(Estimator::Analytic),
            "asymptotic" => Ok(Estimator::Asymptotic),
            "mc" => Ok(Estimator::Mc),
            "oracle" => Ok(Estimator::Oracle),
            other => Err(format!(
                "unknown estimator `{other}` (expected analytic, asymptotic, mc or oracle)"
            )),
        }
    }
}

/// Non-empty set of estimators, kept sorted and free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimatorSet(Vec<Estimator>);

impl EstimatorSet {
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self, CliError> {
        let mut set = Vec::new();
        for item in items {
            let e: Estimator = item.as_ref().parse().map_err(|r| CliError::usage("estimators", r))?;
            if set.contains(&e) {
                return Err(CliError::usage(
                    "estimators",
                    format!("`{}` listed twice", item.as_ref()),
                ));
            }
            set.push(e);
        }
        if set.is_empty() {
            return Err(CliError::usage("estimators", "at least one estimator is required"));
        }
        set.sort();
        Ok(EstimatorSet(set))
    }

    pub fn contains(&self, e: Estimator) -> bool {
        self.0.contains(&e)
    }
}

/// A number or the `track` token, as written in a config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LevelField {
    Db(f64),
    Text(String),
}

impl LevelField {
    fn to_text(&self) -> String {
        match self {
            LevelField::Db(v) => v.to_string(),
            LevelField::Text(s) => s.clone(),
        }
    }
}

/// One layer of settings. Config files deserialize into this shape; flags
/// are collected into it too. Later layers win field by field, except that
/// the exclusive pairs (`kappa_db`/`lambda_e_db`, `rate_nats`/`rate_bits`)
/// are replaced as a unit.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecLayer {
    pub lambda_m_db: Option<String>,
    pub kappa_db: Option<f64>,
    pub lambda_e_db: Option<f64>,
    pub n_list: Option<Vec<i64>>,
    pub rate_nats: Option<f64>,
    pub rate_bits: Option<f64>,
    pub topology: Option<String>,
    pub lambda_sd_db: Option<LevelField>,
    pub lambda_se_db: Option<LevelField>,
    pub estimators: Option<Vec<String>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub shards: Option<usize>,
    pub curves: Option<Vec<SpecLayer>>,
}

impl SpecLayer {
    pub fn from_json(path: &str, text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config {
            path: path.to_string(),
            reason: e.to_string(),
        })
    }

    /// `self` overridden by every field `top` sets.
    pub fn overlay(&self, top: &SpecLayer) -> SpecLayer {
        let (kappa_db, lambda_e_db) = if top.kappa_db.is_some() || top.lambda_e_db.is_some() {
            (top.kappa_db, top.lambda_e_db)
        } else {
            (self.kappa_db, self.lambda_e_db)
        };
        let (rate_nats, rate_bits) = if top.rate_nats.is_some() || top.rate_bits.is_some() {
            (top.rate_nats, top.rate_bits)
        } else {
            (self.rate_nats, self.rate_bits)
        };
        SpecLayer {
            lambda_m_db: top.lambda_m_db.clone().or_else(|| self.lambda_m_db.clone()),
            kappa_db,
            lambda_e_db,
            n_list: top.n_list.clone().or_else(|| self.n_list.clone()),
            rate_nats,
            rate_bits,
            topology: top.topology.clone().or_else(|| self.topology.clone()),
            lambda_sd_db: top.lambda_sd_db.clone().or_else(|| self.lambda_sd_db.clone()),
            lambda_se_db: top.lambda_se_db.clone().or_else(|| self.lambda_se_db.clone()),
            estimators: top.estimators.clone().or_else(|| self.estimators.clone()),
            trials: top.trials.or(self.trials),
            seed: top.seed.or(self.seed),
            jobs: top.jobs.or(self.jobs),
            shards: top.shards.or(self.shards),
            curves: None,
        }
    }

    fn run_level_fields(&self) -> Vec<&'static str> {
        let mut set = Vec::new();
        for (name, present) in [
            ("estimators", self.estimators.is_some()),
            ("trials", self.trials.is_some()),
            ("seed", self.seed.is_some()),
            ("jobs", self.jobs.is_some()),
            ("shards", self.shards.is_some()),
            ("curves", self.curves.is_some()),
        ] {
            if present {
                set.push(name);
            }
        }
        set
    }
}

/// One curve family: everything that fixes `P_out` as a function of `(λ_m, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub lambda_m_db: DbRange,
    pub eavesdropper: Eavesdropper,
    /// `None` for the relay-only topology.
    pub direct: Option<(DirectLevel, DirectLevel)>,
    /// Sorted ascending, distinct.
    pub n_list: Vec<usize>,
    pub rate: SecrecyRate,
}

impl CurveSpec {
    /// `no-direct` or `with-direct:<sd>/<se>`.
    pub fn topology_label(&self) -> String {
        match self.direct {
            None => "no-direct".to_string(),
            Some((sd, se)) => format!("with-direct:{sd}/{se}"),
        }
    }

    pub fn rows(&self) -> usize {
        self.lambda_m_db.len() * self.n_list.len()
    }
}

/// A fully validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub curves: Vec<CurveSpec>,
    pub estimators: EstimatorSet,
    pub trials: u64,
    pub seed: u64,
    pub jobs: usize,
    pub shards: usize,
}

impl SweepSpec {
    pub fn rows(&self) -> usize {
        self.curves.iter().map(CurveSpec::rows).sum()
    }
}

/// Merges `file` (may carry `curves`) under `flags` and validates the result.
/// `env_seed` is the fallback used when neither layer sets a seed.
pub fn resolve(file: &SpecLayer, flags: &SpecLayer, env_seed: Option<u64>) -> Result<SweepSpec, CliError> {
    if flags.curves.is_some() {
        return Err(CliError::usage("curves", "only a config file can declare curves"));
    }
    let mut top = file.clone();
    let curve_layers = top.curves.take().unwrap_or_else(|| vec![SpecLayer::default()]);
    if curve_layers.is_empty() {
        return Err(CliError::usage("curves", "must contain at least one curve"));
    }

    let mut curves = Vec::with_capacity(curve_layers.len());
    for (i, layer) in curve_layers.iter().enumerate() {
        if let Some(field) = layer.run_level_fields().first() {
            return Err(CliError::usage(
                format!("curves[{i}].{field}"),
                "run-wide setting cannot vary per curve",
            ));
        }
        let merged = top.overlay(layer).overlay(flags);
        let prefix = if file.curves.is_some() {
            format!("curves[{i}].")
        } else {
            String::new()
        };
        curves.push(curve_spec(&merged, &prefix)?);
    }

    let run = top.overlay(flags);
    let estimators = EstimatorSet::parse(
        run.estimators
            .as_deref()
            .ok_or_else(|| CliError::usage("estimators", "at least one estimator is required"))?,
    )?;
    let trials = run.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(CliError::usage("trials", "at least one trial is required"));
    }
    let jobs = run.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(CliError::usage("jobs", "must be at least 1"));
    }
    let shards = run.shards.unwrap_or_else(default_jobs).min(trials as usize).max(1);
    if run.shards == Some(0) || run.shards.is_some_and(|s| s as u64 > trials) {
        return Err(CliError::usage(
            "shards",
            format!("must lie in 1..={trials}, got {}", run.shards.unwrap_or(0)),
        ));
    }
    let spec = SweepSpec {
        curves,
        estimators,
        trials,
        seed: run.seed.or(env_seed).unwrap_or(0),
        jobs,
        shards,
    };
    if spec.rows() > MAX_ROWS {
        return Err(CliError::usage(
            "lambda_m_db",
            format!("sweep has more than {MAX_ROWS} rows"),
        ));
    }
    Ok(spec)
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(field, format!("must be finite, got {v}")))
    }
}

fn curve_spec(layer: &SpecLayer, prefix: &str) -> Result<CurveSpec, CliError> {
    let field = |name: &str| format!("{prefix}{name}");

    let lambda_m_db = DbRange::parse(
        &field("lambda_m_db"),
        layer
            .lambda_m_db
            .as_deref()
            .ok_or_else(|| CliError::usage(field("lambda_m_db"), "a start:stop:step grid is required"))?,
    )?;

    let eavesdropper = match (layer.kappa_db, layer.lambda_e_db) {
        (Some(k), None) => Eavesdropper::KappaDb(finite(&field("kappa_db"), k)?),
        (None, Some(e)) => Eavesdropper::LambdaEDb(finite(&field("lambda_e_db"), e)?),
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                field("kappa_db"),
                "set exactly one of kappa_db and lambda_e_db, not both",
            ))
        }
        (None, None) => {
            return Err(CliError::usage(
                field("lambda_e_db"),
                "set exactly one of kappa_db and lambda_e_db",
            ))
        }
    };

    let topology = layer.topology.as_deref().unwrap_or("no-direct");
    let sd = layer.lambda_sd_db.as_ref().map(LevelField::to_text);
    let se = layer.lambda_se_db.as_ref().map(LevelField::to_text);
    let direct = match topology {
        "no-direct" => {
            if sd.is_some() {
                return Err(CliError::usage(
                    field("lambda_sd_db"),
                    "only valid with topology with-direct",
                ));
            }
            if se.is_some() {
                return Err(CliError::usage(
                    field("lambda_se_db"),
                    "only valid with topology with-direct",
                ));
            }
            None
        }
        "with-direct" => {
            let level = |name: &str, v: Option<String>| -> Result<DirectLevel, CliError> {
                let v = v.ok_or_else(|| CliError::usage(field(name), "required with topology with-direct"))?;
                DirectLevel::parse(&field(name), &v)
            };
            Some((level("lambda_sd_db", sd)?, level("lambda_se_db", se)?))
        }
        other => {
            return Err(CliError::usage(
                field("topology"),
                format!("expected no-direct or with-direct, got `{other}`"),
            ))
        }
    };

    let raw_n = layer
        .n_list
        .as_ref()
        .ok_or_else(|| CliError::usage(field("n_relays"), "at least one relay count is required"))?;
    if raw_n.is_empty() {
        return Err(CliError::usage(
            field("n_relays"),
            "at least one relay count is required",
        ));
    }
    let mut n_list = Vec::with_capacity(raw_n.len());
    for &n in raw_n {
        if !(1..=MAX_RELAYS as i64).contains(&n) {
            return Err(CliError::usage(
                field("n_relays"),
                format!("relay count must lie in 1..={MAX_RELAYS}, got {n}"),
            ));
        }
        if n_list.contains(&(n as usize)) {
            return Err(CliError::usage(
                field("n_relays"),
                format!("relay count {n} listed twice"),
            ));
        }
        n_list.push(n as usize);
    }
    n_list.sort_unstable();

    let rate = match (layer.rate_nats, layer.rate_bits) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                field("rate_nats"),
                "set at most one of rate_nats and rate_bits",
            ))
        }
        (_, Some(bits)) => SecrecyRate::bits(bits).map_err(|e| CliError::usage(field("rate_bits"), e.to_string()))?,
        (nats, None) => SecrecyRate::nats(nats.unwrap_or(DEFAULT_RATE_NATS))
            .map_err(|e| CliError::usage(field("rate_nats"), e.to_string()))?,
    };

    Ok(CurveSpec {
        lambda_m_db,
        eavesdropper,
        direct,
        n_list,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SpecLayer {
        SpecLayer {
            lambda_m_db: Some("0:10:5".into()),
            lambda_e_db: Some(15.0),
            n_list: Some(vec![2, 1]),
            estimators: Some(vec!["analytic".into()]),
            ..Default::default()
        }
    }

    fn field_of(e: CliError) -> String {
        match e {
            CliError::Usage { field, .. } => field,
            other => panic!("expected a usage error, got {other}"),
        }
    }

    #[test]
    fn grid_points_are_inclusive_and_exact() {
        let r = DbRange::parse("lambda_m_db", "0:30:2").unwrap();
        assert_eq!(r.len(), 16);
        assert_eq!(r.points().last(), Some(&30.0));
        let r = DbRange::parse("lambda_m_db", "0:1:0.1").unwrap();
        assert_eq!(r.len(), 11);
        assert_eq!(DbRange::parse("x", "-5").unwrap().points(), vec![-5.0]);
        assert!(DbRange::parse("x", "0:1:0").is_err());
        assert!(DbRange::parse("x", "3:1:1").is_err());
        assert!(DbRange::parse("x", "0:1").is_err());
        assert!(DbRange::parse("x", "a:1:1").is_err());
    }

    #[test]
    fn defaults_and_ordering() {
        let s = resolve(&base(), &SpecLayer::default(), None).unwrap();
        assert_eq!(s.curves[0].n_list, vec![1, 2]);
        assert_eq!(s.curves[0].rate.as_nats(), DEFAULT_RATE_NATS);
        assert_eq!(s.curves[0].topology_label(), "no-direct");
        assert_eq!(s.rows(), 6);
        assert_eq!(s.seed, 0);
        assert_eq!(s.trials, DEFAULT_TRIALS);
    }

    #[test]
    fn flags_override_file_and_seed_falls_back_to_env() {
        let flags = SpecLayer {
            kappa_db: Some(0.0),
            rate_bits: Some(1.0),
            ..Default::default()
        };
        let s = resolve(&base(), &flags, Some(9)).unwrap();
        assert_eq!(s.curves[0].eavesdropper, Eavesdropper::KappaDb(0.0));
        assert!((s.curves[0].rate.as_nats() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(s.seed, 9);
        let file = SpecLayer {
            seed: Some(4),
            ..base()
        };
        assert_eq!(resolve(&file, &SpecLayer::default(), Some(9)).unwrap().seed, 4);
        let flags = SpecLayer {
            seed: Some(5),
            ..Default::default()
        };
        assert_eq!(resolve(&file, &flags, Some(9)).unwrap().seed, 5);
    }

    #[test]
    fn curves_inherit_top_level_fields() {
        let json = r#"{
            "lambda_m_db": "0:70:5", "kappa_db": 0, "n_list": [1, 2, 4],
            "estimators": ["analytic", "asymptotic"],
            "curves": [
                {"topology": "no-direct"},
                {"topology": "with-direct", "lambda_sd_db": 5, "lambda_se_db": 5},
                {"topology": "with-direct", "lambda_sd_db": "track", "lambda_se_db": "track"}
            ]
        }"#;
        let file = SpecLayer::from_json("fig", json).unwrap();
        let s = resolve(&file, &SpecLayer::default(), None).unwrap();
        let labels: Vec<String> = s.curves.iter().map(CurveSpec::topology_label).collect();
        assert_eq!(labels, ["no-direct", "with-direct:5/5", "with-direct:track/track"]);
        assert_eq!(s.rows(), 3 * 15 * 3);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = |layer: SpecLayer| field_of(resolve(&layer, &SpecLayer::default(), None).unwrap_err());
        assert_eq!(
            bad(SpecLayer {
                n_list: Some(vec![0]),
                ..base()
            }),
            "n_relays"
        );
        assert_eq!(
            bad(SpecLayer {
                n_list: Some(vec![65]),
                ..base()
            }),
            "n_relays"
        );
        assert_eq!(
            bad(SpecLayer {
                n_list: Some(vec![]),
                ..base()
            }),
            "n_relays"
        );
        assert_eq!(
            bad(SpecLayer {
                estimators: Some(vec![]),
                ..base()
            }),
            "estimators"
        );
        assert_eq!(
            bad(SpecLayer {
                estimators: Some(vec!["exact".into()]),
                ..base()
            }),
            "estimators"
        );
        assert_eq!(
            bad(SpecLayer {
                kappa_db: Some(0.0),
                ..base()
            }),
            "kappa_db"
        );
        assert_eq!(
            bad(SpecLayer {
                lambda_e_db: None,
                ..base()
            }),
            "lambda_e_db"
        );
        assert_eq!(
            bad(SpecLayer {
                rate_nats: Some(-0.1),
                ..base()
            }),
            "rate_nats"
        );
        assert_eq!(
            bad(SpecLayer {
                lambda_m_db: Some("5:0:1".into()),
                ..base()
            }),
            "lambda_m_db"
        );
        assert_eq!(
            bad(SpecLayer {
                trials: Some(0),
                ..base()
            }),
            "trials"
        );
        assert_eq!(
            bad(SpecLayer {
                shards: Some(0),
                ..base()
            }),
            "shards"
        );
        assert_eq!(
            bad(SpecLayer {
                topology: Some("with-direct".into()),
                lambda_sd_db: Some(LevelField::Db(5.0)),
                ..base()
            }),
            "lambda_se_db"
        );
        assert_eq!(
            bad(SpecLayer {
                lambda_sd_db: Some(LevelField::Db(5.0)),
                ..base()
            }),
            "lambda_sd_db"
        );
        assert_eq!(
            bad(SpecLayer {
                curves: Some(vec![SpecLayer {
                    trials: Some(3),
                    ..Default::default()
                }]),
                ..base()
            }),
            "curves[0].trials"
        );
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        assert!(matches!(
            SpecLayer::from_json("c", r#"{"lambda_m": "0:1:1"}"#),
            Err(CliError::Config { .. })
        ));
    }
}
