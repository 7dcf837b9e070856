//! Synthetic sensor traces: steady per-stream levels with bounded
//! multiplicative noise, plus a known number of step events that each
//! exceed a significance threshold.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dedup::{DedupConfig, Factor, FactorKind};
use crate::ingest::{ReadingPayload, WireMessage};
use crate::ontology::TimeOfDay;

const BASE_TEMPERATURE: f64 = 20.0;
const BASE_HUMIDITY: f64 = 40.0;
const BASE_ILLUMINATION: f64 = 400.0;
const EVENT_PERSON: &str = "Father";

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("invalid trace parameters: {0}")]
pub struct TraceError(String);

/// Relative noise amplitude per numeric factor: each value is
/// `level * (1 + u * a)` with `u` uniform in `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Noise {
    pub temperature: f64,
    pub humidity: f64,
    pub illumination: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Noise {
            temperature: 0.02,
            humidity: 0.02,
            illumination: 0.02,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceParams {
    pub streams: usize,
    /// Seconds covered, starting at 00:00:00; at most one day.
    pub duration: u32,
    /// Seconds between two readings of a stream.
    pub period: u32,
    pub events: usize,
    /// Events only land on readings whose offset is a multiple of this many
    /// seconds (1 = anywhere, 60 = on minute boundaries).
    pub event_grid: u32,
    pub noise: Noise,
    pub date: NaiveDate,
}

impl Default for TraceParams {
    fn default() -> Self {
        TraceParams {
            streams: 10,
            duration: 3600,
            period: 1,
            events: 20,
            event_grid: 1,
            noise: Noise::default(),
            date: NaiveDate::from_ymd_opt(2007, 4, 11).expect("valid date"),
        }
    }
}

/// Step applied by an event, cycling through these kinds. Numeric steps
/// multiply the level on the way up and divide on the way back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Presence,
    Temperature,
    Humidity,
    Illumination,
}

const EVENT_CYCLE: [EventKind; 4] = [
    EventKind::Presence,
    EventKind::Temperature,
    EventKind::Humidity,
    EventKind::Illumination,
];

impl EventKind {
    fn step(self) -> f64 {
        match self {
            EventKind::Presence => 1.0,
            EventKind::Temperature => 1.5,
            EventKind::Humidity => 2.0,
            EventKind::Illumination => 3.0,
        }
    }

    fn factor(self) -> Factor {
        match self {
            EventKind::Presence => Factor::Presence,
            EventKind::Temperature => Factor::Temperature,
            EventKind::Humidity => Factor::Humidity,
            EventKind::Illumination => Factor::Illumination,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceEvent {
    /// 1-based line number in the trace.
    pub line: usize,
    pub stream: String,
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub params: TraceParams,
    pub lines: usize,
    /// One stored reading per stream plus one per event.
    pub expected_stored: usize,
    pub events: Vec<TraceEvent>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub lines: Vec<String>,
    pub manifest: Manifest,
}

pub fn stream_name(i: usize) -> String {
    format!("s{}", i + 1)
}

fn relative_noise_bound(a: f64) -> f64 {
    2.0 * a / (1.0 - a)
}

/// Smallest relative change a step of `m` can produce under noise `a`, in
/// either direction, measured against the noisy baseline.
fn min_step_change(m: f64, a: f64) -> f64 {
    let up = m * (1.0 - a) / (1.0 + a) - 1.0;
    let down = 1.0 - (1.0 + a) / (m * (1.0 - a));
    up.min(down)
}

fn validate(p: &TraceParams, cfg: &DedupConfig) -> Result<(), TraceError> {
    let err = |m: String| Err(TraceError(m));
    if p.streams == 0 {
        return err("streams must be at least 1".into());
    }
    if p.period == 0 || p.duration == 0 || p.duration > 86_400 {
        return err("duration must be in 1..=86400 and period at least 1".into());
    }
    if !p.duration.is_multiple_of(p.period) {
        return err(format!(
            "duration {} is not a multiple of period {}",
            p.duration, p.period
        ));
    }
    if p.event_grid == 0 {
        return err("event grid must be at least 1".into());
    }
    let noises = [
        (EventKind::Temperature, p.noise.temperature),
        (EventKind::Humidity, p.noise.humidity),
        (EventKind::Illumination, p.noise.illumination),
    ];
    for (kind, a) in noises {
        if !(0.0..0.25).contains(&a) {
            return err(format!(
                "{:?} noise {a} outside [0, 0.25)",
                kind.factor().name()
            ));
        }
        match cfg.spec(kind.factor()).map(|s| s.kind) {
            Some(FactorKind::Numeric { threshold }) => {
                if relative_noise_bound(a) >= threshold {
                    return err(format!(
                        "{} noise {a} can reach a relative change of {:.4}, not below the threshold {threshold}",
                        kind.factor().name(),
                        relative_noise_bound(a)
                    ));
                }
                if p.events > 0 && min_step_change(kind.step(), a) <= threshold {
                    return err(format!(
                        "{} events (x{}) would not clear the threshold {threshold} under noise {a}",
                        kind.factor().name(),
                        kind.step()
                    ));
                }
            }
            Some(FactorKind::Categorical) if a > 0.0 => {
                return err(format!(
                    "{} is categorical; its noise must be 0",
                    kind.factor().name()
                ));
            }
            _ => {}
        }
    }
    if p.events > 0 && cfg.spec(Factor::Presence).is_none() {
        return err("presence events need presence in the factor list".into());
    }
    Ok(())
}

/// Builds a trace: `streams * duration / period` reading lines ordered by
/// time, streams interleaved. Exactly `events` readings (never a stream's
/// first) carry a step change; every other reading differs from its
/// stream's last step only by noise, so replaying it under `cfg` stores
/// `streams + events` readings.
pub fn gen_trace(params: &TraceParams, seed: u64, cfg: &DedupConfig) -> Result<Trace, TraceError> {
    validate(params, cfg)?;
    let per_stream = (params.duration / params.period) as usize;
    let candidates: Vec<(usize, usize)> = (1..per_stream)
        .filter(|&i| (i as u64 * params.period as u64).is_multiple_of(params.event_grid as u64))
        .flat_map(|i| (0..params.streams).map(move |s| (i, s)))
        .collect();
    if params.events > candidates.len() {
        return Err(TraceError(format!(
            "{} events requested but only {} eligible readings",
            params.events,
            candidates.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: BTreeSet<(usize, usize)> = sample(&mut rng, candidates.len(), params.events)
        .into_iter()
        .map(|k| candidates[k])
        .collect();

    struct Level {
        values: [f64; 3],
        raised: [bool; 3],
        present: bool,
    }
    let mut levels: Vec<Level> = (0..params.streams)
        .map(|_| Level {
            values: [BASE_TEMPERATURE, BASE_HUMIDITY, BASE_ILLUMINATION],
            raised: [false; 3],
            present: false,
        })
        .collect();
    let amps = [
        params.noise.temperature,
        params.noise.humidity,
        params.noise.illumination,
    ];

    let mut lines = Vec::with_capacity(per_stream * params.streams);
    let mut events = Vec::with_capacity(params.events);
    for i in 0..per_stream {
        let time = TimeOfDay::from_seconds(i as u32 * params.period)
            .map_err(|e| TraceError(e.to_string()))?;
        for (s, level) in levels.iter_mut().enumerate() {
            if chosen.contains(&(i, s)) {
                let kind = EVENT_CYCLE[events.len() % EVENT_CYCLE.len()];
                match kind {
                    EventKind::Presence => level.present = !level.present,
                    k => {
                        let slot = EVENT_CYCLE.iter().position(|c| *c == k).expect("in cycle") - 1;
                        if level.raised[slot] {
                            level.values[slot] /= k.step();
                        } else {
                            level.values[slot] *= k.step();
                        }
                        level.raised[slot] = !level.raised[slot];
                    }
                }
                events.push(TraceEvent {
                    line: lines.len() + 1,
                    stream: stream_name(s),
                    kind,
                });
            }
            let mut noisy = [0.0; 3];
            for k in 0..3 {
                let u: f64 = if amps[k] > 0.0 {
                    rng.gen_range(-1.0..=1.0)
                } else {
                    0.0
                };
                noisy[k] = level.values[k] * (1.0 + u * amps[k]);
            }
            let payload = ReadingPayload {
                stream: Some(stream_name(s)),
                date: params.date.format("%Y-%m-%d").to_string(),
                time: time.to_string(),
                temperature: noisy[0],
                humidity: noisy[1],
                illumination: noisy[2],
                present: if level.present {
                    vec![EVENT_PERSON.into()]
                } else {
                    vec![]
                },
            };
            lines.push(WireMessage::Reading(payload).to_line());
        }
    }

    Ok(Trace {
        manifest: Manifest {
            seed,
            params: params.clone(),
            lines: lines.len(),
            expected_stored: params.streams + params.events,
            events,
        },
        lines,
    })
}

/// `<trace>.manifest.json`
pub fn manifest_path(trace: &Path) -> PathBuf {
    let mut name = trace.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the trace and its sidecar manifest.
pub fn write_trace(path: &Path, trace: &Trace) -> std::io::Result<()> {
    let mut text = String::with_capacity(trace.lines.iter().map(|l| l.len() + 1).sum());
    for l in &trace.lines {
        text.push_str(l);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    let manifest = serde_json::to_string_pretty(&trace.manifest).map_err(std::io::Error::other)?;
    std::fs::write(manifest_path(path), manifest + "\n")
}
