use std::io::BufRead;
use std::path::Path;

use serde::Serialize;

use super::engine::{Engine, HandleError, Session};
use super::protocol::WireMessage;
use crate::dedup::DedupConfig;
use crate::rdf::TripleStore;

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {error}")]
    Line { line: usize, error: HandleError },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReplayStats {
    pub input_count: usize,
    pub stored_count: usize,
    pub reduction_factor: f64,
    pub commands_emitted: usize,
}

#[derive(Debug)]
pub struct ReplayReport {
    pub stats: ReplayStats,
    /// Every reply in the order a live connection would have received it.
    pub responses: Vec<WireMessage>,
    pub store: TripleStore,
}

/// Feeds trace lines through one session, exactly as a single connection to
/// the server would, but strictly: any rejected reading is an error. Blank
/// lines are skipped.
pub fn replay_lines<R: BufRead>(
    input: R,
    base: TripleStore,
    cfg: DedupConfig,
) -> Result<ReplayReport, ReplayError> {
    let engine = Engine::new(base, cfg);
    let mut session = Session::new();
    let mut responses = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|source| ReplayError::Io {
            path: "<trace>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let replies = engine
            .handle_line(&mut session, &line)
            .map_err(|error| ReplayError::Line { line: i + 1, error })?;
        responses.extend(replies);
    }
    let s = engine.stats();
    Ok(ReplayReport {
        stats: ReplayStats {
            input_count: s.input_count,
            stored_count: s.stored_count,
            reduction_factor: s.reduction_factor(),
            commands_emitted: engine.commands_emitted(),
        },
        responses,
        store: engine.snapshot(),
    })
}

pub fn replay(
    path: &Path,
    base: TripleStore,
    cfg: DedupConfig,
) -> Result<ReplayReport, ReplayError> {
    let file = std::fs::File::open(path).map_err(|source| ReplayError::Io {
        path: path.display().to_string(),
        source,
    })?;
    replay_lines(std::io::BufReader::new(file), base, cfg)
}
