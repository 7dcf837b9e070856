use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use super::protocol::{decode_line, DecodeError, Inbound, WireMessage};
use super::reason::reason_at;
use crate::dedup::{DedupConfig, StreamFilter, StreamStats};
use crate::ontology::{reading_to_triples, TimeOfDay};
use crate::rdf::TripleStore;

/// Why a line could not be handled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HandleError {
    /// A reading that is malformed, has no stream or arrives out of order.
    /// The server answers with a negative ack and keeps the connection.
    Rejected(String),
    /// Not a valid client message; the connection is closed.
    Protocol(String),
    /// Reasoning failed on the current home model; the connection is closed.
    Internal(String),
}

impl std::fmt::Display for HandleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HandleError::Rejected(m) => write!(f, "reading rejected: {m}"),
            HandleError::Protocol(m) => write!(f, "protocol error: {m}"),
            HandleError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for HandleError {}

/// Per-connection state.
#[derive(Clone, Debug, Default)]
pub struct Session {
    stream: Option<String>,
}

impl Session {
    pub fn new() -> Session {
        Session::default()
    }

    pub fn stream(&self) -> Option<&str> {
        self.stream.as_deref()
    }
}

/// Shared ingest state: the triple store and the per-stream significance
/// filter. Filtering and insertion happen under one lock so all writes are
/// serialized; reasoning only takes the store's read lock.
#[derive(Debug)]
pub struct Engine {
    store: RwLock<TripleStore>,
    filter: Mutex<StreamFilter>,
    commands: AtomicUsize,
}

impl Engine {
    pub fn new(store: TripleStore, cfg: DedupConfig) -> Engine {
        Engine {
            store: RwLock::new(store),
            filter: Mutex::new(StreamFilter::new(cfg)),
            commands: AtomicUsize::new(0),
        }
    }

    pub fn snapshot(&self) -> TripleStore {
        self.store.read().expect("store lock").clone()
    }

    pub fn stats(&self) -> StreamStats {
        self.filter.lock().expect("filter lock").stats()
    }

    pub fn commands_emitted(&self) -> usize {
        self.commands.load(Ordering::Relaxed)
    }

    /// Handles one inbound line, returning the replies in order.
    pub fn handle_line(
        &self,
        session: &mut Session,
        line: &str,
    ) -> Result<Vec<WireMessage>, HandleError> {
        match decode_line(line) {
            Ok(msg) => self.handle(session, msg),
            Err(DecodeError::BadReading(m)) => Err(HandleError::Rejected(m)),
            Err(DecodeError::Protocol(m)) => Err(HandleError::Protocol(m)),
        }
    }

    pub fn handle(
        &self,
        session: &mut Session,
        msg: Inbound,
    ) -> Result<Vec<WireMessage>, HandleError> {
        match msg {
            Inbound::Hello(stream) => {
                if session.stream.is_some() {
                    return Err(HandleError::Protocol("duplicate hello".into()));
                }
                if stream.is_empty() {
                    return Err(HandleError::Protocol("empty stream id".into()));
                }
                session.stream = Some(stream);
                Ok(Vec::new())
            }
            Inbound::Tick(t) => self.reason(t),
            Inbound::Reading(payload) => {
                let stream = match (&payload.stream, &session.stream) {
                    (Some(s), Some(h)) if s != h => {
                        return Err(HandleError::Rejected(format!(
                            "stream {s:?} differs from hello stream {h:?}"
                        )))
                    }
                    (Some(s), _) | (None, Some(s)) => s.clone(),
                    (None, None) => {
                        return Err(HandleError::Rejected("reading names no stream".into()))
                    }
                };
                let reading = payload.to_reading(&stream).map_err(HandleError::Rejected)?;

                let (decision, presence_changed) = {
                    let mut filter = self.filter.lock().expect("filter lock");
                    let presence_changed = filter
                        .baseline(&stream)
                        .is_none_or(|b| b.persons_present() != reading.persons_present());
                    let decision = filter
                        .offer(&stream, &reading)
                        .map_err(|e| HandleError::Rejected(e.to_string()))?;
                    if decision.store {
                        self.store
                            .write()
                            .expect("store lock")
                            .extend(reading_to_triples(&reading));
                    }
                    (decision, presence_changed)
                };

                let mut out = vec![WireMessage::Ack {
                    accepted: true,
                    stored: decision.store,
                    distance: decision.distance,
                }];
                if decision.store && presence_changed {
                    out.extend(self.reason(reading.time())?);
                }
                Ok(out)
            }
        }
    }

    fn reason(&self, t: TimeOfDay) -> Result<Vec<WireMessage>, HandleError> {
        let store = self.store.read().expect("store lock");
        let cmds = reason_at(&store, t).map_err(|e| HandleError::Internal(e.to_string()))?;
        self.commands.fetch_add(cmds.len(), Ordering::Relaxed);
        Ok(cmds.iter().map(WireMessage::from).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reading(stream: Option<&str>, time: &str, temp: f64, present: &[&str]) -> String {
        let stream = stream
            .map(|s| format!(r#""stream":"{s}","#))
            .unwrap_or_default();
        let present: Vec<String> = present.iter().map(|p| format!("{p:?}")).collect();
        format!(
            r#"{{"type":"reading",{stream}"date":"2007-04-11","time":"{time}","temperature":{temp},"humidity":40,"illumination":300,"present":[{}]}}"#,
            present.join(",")
        )
    }

    fn ack(out: &[WireMessage]) -> (bool, bool, f64) {
        match out[0] {
            WireMessage::Ack {
                accepted,
                stored,
                distance,
            } => (accepted, stored, distance),
            ref m => panic!("expected ack, got {m:?}"),
        }
    }

    #[test]
    fn duplicate_is_acked_but_not_stored() {
        let e = Engine::new(TripleStore::new(), DedupConfig::default());
        let mut s = Session::new();
        let first = e
            .handle_line(&mut s, &reading(Some("a"), "100000", 20.0, &[]))
            .unwrap();
        assert_eq!(ack(&first), (true, true, 0.0));
        let len = e.snapshot().len();
        let dup = e
            .handle_line(&mut s, &reading(Some("a"), "100001", 20.0, &[]))
            .unwrap();
        assert_eq!(
            dup,
            vec![WireMessage::Ack {
                accepted: true,
                stored: false,
                distance: 0.0
            }]
        );
        assert_eq!(e.snapshot().len(), len);
        let moved = e
            .handle_line(&mut s, &reading(Some("a"), "100002", 30.0, &[]))
            .unwrap();
        assert_eq!(ack(&moved), (true, true, 0.5));
    }

    #[test]
    fn presence_change_has_unit_distance() {
        let e = Engine::new(TripleStore::new(), DedupConfig::default());
        let mut s = Session::new();
        e.handle_line(&mut s, r#"{"type":"hello","stream":"x"}"#)
            .unwrap();
        e.handle_line(&mut s, &reading(None, "100000", 20.0, &[]))
            .unwrap();
        let out = e
            .handle_line(&mut s, &reading(None, "100005", 20.0, &["Son"]))
            .unwrap();
        assert_eq!(ack(&out), (true, true, 1.0));
    }

    #[test]
    fn rejections_and_protocol_errors() {
        let e = Engine::new(TripleStore::new(), DedupConfig::default());
        let mut s = Session::new();
        assert!(matches!(
            e.handle_line(&mut s, &reading(None, "100000", 20.0, &[])),
            Err(HandleError::Rejected(_))
        ));
        e.handle_line(&mut s, &reading(Some("a"), "100000", 20.0, &[]))
            .unwrap();
        assert!(matches!(
            e.handle_line(&mut s, &reading(Some("a"), "090000", 20.0, &[])),
            Err(HandleError::Rejected(_))
        ));
        e.handle_line(&mut s, r#"{"type":"hello","stream":"b"}"#)
            .unwrap();
        assert!(matches!(
            e.handle_line(&mut s, &reading(Some("a"), "110000", 20.0, &[])),
            Err(HandleError::Rejected(_))
        ));
        assert!(matches!(
            e.handle_line(&mut s, r#"{"type":"hello","stream":"c"}"#),
            Err(HandleError::Protocol(_))
        ));
        assert_eq!(e.stats().input_count, 1);
    }
}
