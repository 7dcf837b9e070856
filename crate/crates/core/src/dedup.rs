//! Significance filtering of environment readings.
//!
//! Each factor contributes a normalized change `d_k`: relative change
//! `|curr - prev| / max(|prev|, epsilon)` for numeric factors, and 0 or 1 for
//! categorical ones (presence, date). The reported dissimilarity is the
//! Euclidean aggregate `D = sqrt(sum d_k^2)`; the store/drop verdict is
//! per-factor: a reading is stored when any factor exceeds its threshold.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::ontology::{EnvironmentReading, TimeOfDay};
use crate::rdf::Iri;

pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DedupError {
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("factor {factor} cannot be {kind}")]
    KindMismatch { factor: Factor, kind: &'static str },
    #[error("values of different kinds cannot be compared")]
    ValueMismatch,
    #[error("invalid threshold {value} for {factor}")]
    InvalidThreshold { factor: Factor, value: f64 },
    #[error("invalid epsilon {0}")]
    InvalidEpsilon(f64),
    #[error("factor {0} listed twice")]
    DuplicateFactor(Factor),
    #[error("at least one factor is required")]
    NoFactors,
    #[error("unknown factor {0:?}")]
    UnknownFactor(String),
    #[error("threshold file: {0}")]
    Config(String),
    #[error("reading {index} of stream {stream:?} is earlier than the one before it")]
    OutOfOrder { stream: String, index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Temperature,
    Illumination,
    Humidity,
    Presence,
    Date,
}

impl Factor {
    pub const ALL: [Factor; 5] = [
        Factor::Temperature,
        Factor::Illumination,
        Factor::Humidity,
        Factor::Presence,
        Factor::Date,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Temperature => "temperature",
            Factor::Illumination => "illumination",
            Factor::Humidity => "humidity",
            Factor::Presence => "presence",
            Factor::Date => "date",
        }
    }

    /// Whether the factor carries a number a relative threshold can apply to.
    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            Factor::Temperature | Factor::Illumination | Factor::Humidity
        )
    }

    pub fn value_of(self, r: &EnvironmentReading) -> FactorValue<'_> {
        match self {
            Factor::Temperature => FactorValue::Number(r.temperature()),
            Factor::Illumination => FactorValue::Number(r.illumination()),
            Factor::Humidity => FactorValue::Number(r.humidity()),
            Factor::Presence => FactorValue::Persons(r.persons_present()),
            Factor::Date => FactorValue::Date(r.date()),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = DedupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Factor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| DedupError::UnknownFactor(s.to_owned()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FactorKind {
    /// Significant when the relative change exceeds `threshold`.
    Numeric { threshold: f64 },
    /// Significant on any change.
    Categorical,
}

impl fmt::Display for FactorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorKind::Numeric { threshold } => write!(f, "{threshold}"),
            FactorKind::Categorical => f.write_str("categorical"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorSpec {
    pub factor: Factor,
    pub kind: FactorKind,
}

impl FactorSpec {
    pub fn new(factor: Factor, kind: FactorKind) -> Result<FactorSpec, DedupError> {
        match kind {
            FactorKind::Numeric { threshold } => {
                if !factor.is_numeric() {
                    return Err(DedupError::KindMismatch {
                        factor,
                        kind: "numeric",
                    });
                }
                if !threshold.is_finite() || threshold < 0.0 {
                    return Err(DedupError::InvalidThreshold {
                        factor,
                        value: threshold,
                    });
                }
            }
            FactorKind::Categorical => {}
        }
        Ok(FactorSpec { factor, kind })
    }
}

/// Factor list and division guard. The default is the home environment
/// table: temperature 0.1, illumination 0.5, humidity 0.35, presence and
/// date categorical.
#[derive(Clone, Debug, PartialEq)]
pub struct DedupConfig {
    factors: Vec<FactorSpec>,
    epsilon: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        let numeric = |factor, threshold| FactorSpec {
            factor,
            kind: FactorKind::Numeric { threshold },
        };
        DedupConfig {
            factors: vec![
                numeric(Factor::Temperature, 0.1),
                numeric(Factor::Illumination, 0.5),
                numeric(Factor::Humidity, 0.35),
                FactorSpec {
                    factor: Factor::Presence,
                    kind: FactorKind::Categorical,
                },
                FactorSpec {
                    factor: Factor::Date,
                    kind: FactorKind::Categorical,
                },
            ],
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl DedupConfig {
    pub fn new(factors: Vec<FactorSpec>, epsilon: f64) -> Result<DedupConfig, DedupError> {
        if factors.is_empty() {
            return Err(DedupError::NoFactors);
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(DedupError::InvalidEpsilon(epsilon));
        }
        let mut seen = BTreeSet::new();
        for spec in &factors {
            FactorSpec::new(spec.factor, spec.kind)?;
            if !seen.insert(spec.factor) {
                return Err(DedupError::DuplicateFactor(spec.factor));
            }
        }
        Ok(DedupConfig { factors, epsilon })
    }

    pub fn factors(&self) -> &[FactorSpec] {
        &self.factors
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn spec(&self, factor: Factor) -> Option<&FactorSpec> {
        self.factors.iter().find(|s| s.factor == factor)
    }

    /// Replaces the kind of `factor`, appending it if absent.
    pub fn set(&mut self, factor: Factor, kind: FactorKind) -> Result<(), DedupError> {
        let spec = FactorSpec::new(factor, kind)?;
        match self.factors.iter_mut().find(|s| s.factor == factor) {
            Some(existing) => *existing = spec,
            None => self.factors.push(spec),
        }
        Ok(())
    }

    /// Applies `factor = threshold | "categorical"` overrides (TOML) on top
    /// of the defaults. An `epsilon` key sets the division guard.
    pub fn from_overrides(text: &str) -> Result<DedupConfig, DedupError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| DedupError::Config(e.to_string()))?;
        let mut cfg = DedupConfig::default();
        for (key, value) in table {
            let number = value
                .as_float()
                .or_else(|| value.as_integer().map(|i| i as f64));
            if key == "epsilon" {
                let eps =
                    number.ok_or_else(|| DedupError::Config("epsilon must be a number".into()))?;
                cfg = DedupConfig::new(cfg.factors, eps)?;
                continue;
            }
            let factor: Factor = key.parse()?;
            let kind = match (number, value.as_str()) {
                (Some(threshold), _) => FactorKind::Numeric { threshold },
                (None, Some("categorical")) => FactorKind::Categorical,
                _ => {
                    return Err(DedupError::Config(format!(
                        "{key}: expected a threshold or \"categorical\", found {value}"
                    )))
                }
            };
            cfg.set(factor, kind)?;
        }
        Ok(cfg)
    }
}

/// A factor's value in one reading.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorValue<'a> {
    Number(f64),
    Date(NaiveDate),
    Persons(&'a BTreeSet<Iri>),
}

/// Normalized change of one factor between the baseline and the current value.
pub fn normalized_delta(
    prev: &FactorValue<'_>,
    curr: &FactorValue<'_>,
    kind: FactorKind,
    epsilon: f64,
) -> Result<f64, DedupError> {
    for v in [prev, curr] {
        if let FactorValue::Number(x) = v {
            if !x.is_finite() {
                return Err(DedupError::NonFinite(*x));
            }
        }
    }
    match (kind, prev, curr) {
        (FactorKind::Numeric { .. }, FactorValue::Number(p), FactorValue::Number(c)) => {
            Ok((c - p).abs() / p.abs().max(epsilon))
        }
        (FactorKind::Numeric { .. }, _, _) => Err(DedupError::ValueMismatch),
        (FactorKind::Categorical, FactorValue::Number(p), FactorValue::Number(c)) => {
            Ok(if p == c { 0.0 } else { 1.0 })
        }
        (FactorKind::Categorical, FactorValue::Date(p), FactorValue::Date(c)) => {
            Ok(if p == c { 0.0 } else { 1.0 })
        }
        (FactorKind::Categorical, FactorValue::Persons(p), FactorValue::Persons(c)) => {
            Ok(if p == c { 0.0 } else { 1.0 })
        }
        (FactorKind::Categorical, _, _) => Err(DedupError::ValueMismatch),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorDelta {
    pub factor: Factor,
    pub d: f64,
    pub exceeded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DedupDecision {
    pub store: bool,
    /// Aggregate dissimilarity; 0 when there is no baseline.
    pub distance: f64,
    pub deltas: Vec<FactorDelta>,
    /// Id of the baseline the reading was compared against.
    pub reference: Option<Iri>,
}

/// Per-factor deltas of `curr` against `prev`, in configuration order.
pub fn factor_deltas(
    prev: &EnvironmentReading,
    curr: &EnvironmentReading,
    cfg: &DedupConfig,
) -> Vec<FactorDelta> {
    cfg.factors
        .iter()
        .map(|spec| {
            let d = normalized_delta(
                &spec.factor.value_of(prev),
                &spec.factor.value_of(curr),
                spec.kind,
                cfg.epsilon,
            )
            .expect("readings hold finite values of the factor's kind");
            let exceeded = match spec.kind {
                FactorKind::Numeric { threshold } => d > threshold,
                FactorKind::Categorical => d == 1.0,
            };
            FactorDelta {
                factor: spec.factor,
                d,
                exceeded,
            }
        })
        .collect()
}

fn aggregate(deltas: &[FactorDelta]) -> f64 {
    deltas.iter().map(|d| d.d * d.d).sum::<f64>().sqrt()
}

/// Dissimilarity `D` of `curr` relative to the baseline `prev`.
///
/// Numeric deltas are relative to `prev`, so `D` is not symmetric in general.
pub fn distance(prev: &EnvironmentReading, curr: &EnvironmentReading, cfg: &DedupConfig) -> f64 {
    aggregate(&factor_deltas(prev, curr, cfg))
}

pub fn should_store(
    baseline: Option<&EnvironmentReading>,
    curr: &EnvironmentReading,
    cfg: &DedupConfig,
) -> DedupDecision {
    let Some(prev) = baseline else {
        return DedupDecision {
            store: true,
            distance: 0.0,
            deltas: Vec::new(),
            reference: None,
        };
    };
    let deltas = factor_deltas(prev, curr, cfg);
    DedupDecision {
        store: deltas.iter().any(|d| d.exceeded),
        distance: aggregate(&deltas),
        deltas,
        reference: Some(prev.id().clone()),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StreamStats {
    pub input_count: usize,
    pub stored_count: usize,
}

impl StreamStats {
    /// `input_count / max(stored_count, 1)`.
    pub fn reduction_factor(&self) -> f64 {
        self.input_count as f64 / self.stored_count.max(1) as f64
    }
}

/// Incremental filter keeping one baseline (the last stored reading) per
/// stream.
#[derive(Clone, Debug, Default)]
pub struct StreamFilter {
    cfg: DedupConfig,
    baselines: HashMap<String, EnvironmentReading>,
    last_seen: HashMap<String, (NaiveDate, TimeOfDay)>,
    counts: HashMap<String, usize>,
    stats: StreamStats,
}

impl StreamFilter {
    pub fn new(cfg: DedupConfig) -> StreamFilter {
        StreamFilter {
            cfg,
            ..StreamFilter::default()
        }
    }

    pub fn config(&self) -> &DedupConfig {
        &self.cfg
    }

    pub fn baseline(&self, stream: &str) -> Option<&EnvironmentReading> {
        self.baselines.get(stream)
    }

    pub fn stats(&self) -> StreamStats {
        self.stats
    }

    /// Decides on `reading` and advances the stream's baseline if stored.
    /// Readings must arrive in nondecreasing timestamp order per stream.
    pub fn offer(
        &mut self,
        stream: &str,
        reading: &EnvironmentReading,
    ) -> Result<DedupDecision, DedupError> {
        let index = self.counts.get(stream).copied().unwrap_or(0);
        if self
            .last_seen
            .get(stream)
            .is_some_and(|last| reading.timestamp() < *last)
        {
            return Err(DedupError::OutOfOrder {
                stream: stream.to_owned(),
                index,
            });
        }
        self.last_seen
            .insert(stream.to_owned(), reading.timestamp());
        self.counts.insert(stream.to_owned(), index + 1);

        let decision = should_store(self.baselines.get(stream), reading, &self.cfg);
        self.stats.input_count += 1;
        if decision.store {
            self.stats.stored_count += 1;
            self.baselines.insert(stream.to_owned(), reading.clone());
        }
        Ok(decision)
    }
}

/// Filters one stream, returning the stored readings and counts.
pub fn filter_stream(
    readings: &[EnvironmentReading],
    cfg: &DedupConfig,
) -> Result<(Vec<EnvironmentReading>, StreamStats), DedupError> {
    filter_streams(readings.iter().map(|r| ("", r)), cfg)
}

/// Filters interleaved readings tagged with stream ids; each stream has its
/// own baseline.
pub fn filter_streams<'a, S, I>(
    readings: I,
    cfg: &DedupConfig,
) -> Result<(Vec<EnvironmentReading>, StreamStats), DedupError>
where
    S: AsRef<str>,
    I: IntoIterator<Item = (S, &'a EnvironmentReading)>,
{
    let mut filter = StreamFilter::new(cfg.clone());
    let mut stored = Vec::new();
    for (stream, reading) in readings {
        if filter.offer(stream.as_ref(), reading)?.store {
            stored.push(reading.clone());
        }
    }
    Ok((stored, filter.stats()))
}
