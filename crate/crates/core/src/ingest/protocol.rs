//! Newline-delimited JSON messages exchanged between sensor clients and the
//! context server. One object per line, tagged by `"type"`.

use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::reason::ApplianceCommand;
use crate::ontology::{person_iri, EnvironmentReading, TimeOfDay};

/// Sensor snapshot as it travels on the wire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadingPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream: Option<String>,
    /// `YYYY-MM-DD`
    pub date: String,
    /// `HHMMSS`
    pub time: String,
    pub temperature: f64,
    pub humidity: f64,
    pub illumination: f64,
    #[serde(default)]
    pub present: Vec<String>,
}

impl ReadingPayload {
    pub fn from_reading(stream: Option<&str>, r: &EnvironmentReading) -> ReadingPayload {
        ReadingPayload {
            stream: stream.map(str::to_owned),
            date: r.date().format("%Y-%m-%d").to_string(),
            time: r.time().to_string(),
            temperature: r.temperature(),
            humidity: r.humidity(),
            illumination: r.illumination(),
            present: r
                .persons_present()
                .iter()
                .map(|p| p.short().to_owned())
                .collect(),
        }
    }

    /// Validates the payload into a reading tagged with `stream`.
    pub fn to_reading(&self, stream: &str) -> Result<EnvironmentReading, String> {
        let date = NaiveDate::parse_from_str(&self.date, "%Y-%m-%d")
            .map_err(|_| format!("bad date {:?}", self.date))?;
        let time: TimeOfDay = self.time.parse().map_err(|e| format!("{e}"))?;
        let present = self
            .present
            .iter()
            .map(|p| person_iri(p))
            .collect::<Result<BTreeSet<_>, _>>()
            .map_err(|e| e.to_string())?;
        EnvironmentReading::new(
            date,
            time,
            self.humidity,
            self.temperature,
            self.illumination,
            present,
        )
        .and_then(|r| r.with_source(stream))
        .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WireMessage {
    Hello {
        stream: String,
    },
    Reading(ReadingPayload),
    Tick {
        time: String,
    },
    Ack {
        accepted: bool,
        stored: bool,
        distance: f64,
    },
    Command {
        appliance: String,
        state: bool,
        person: String,
        activity: String,
        priority: u64,
    },
    Error {
        message: String,
    },
}

impl WireMessage {
    pub fn rejected() -> WireMessage {
        WireMessage::Ack {
            accepted: false,
            stored: false,
            distance: 0.0,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }
}

impl From<&ApplianceCommand> for WireMessage {
    fn from(c: &ApplianceCommand) -> Self {
        WireMessage::Command {
            appliance: c.appliance.short().to_owned(),
            state: c.state,
            person: c.person.short().to_owned(),
            activity: c.activity.short().to_owned(),
            priority: c.priority,
        }
    }
}

/// What a client may send.
#[derive(Clone, Debug, PartialEq)]
pub enum Inbound {
    Hello(String),
    Reading(ReadingPayload),
    Tick(TimeOfDay),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DecodeError {
    /// A `reading` whose fields do not decode; answered with a negative ack.
    BadReading(String),
    /// Anything else that is not a valid client message.
    Protocol(String),
}

pub fn decode_line(line: &str) -> Result<Inbound, DecodeError> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| DecodeError::Protocol(format!("invalid JSON: {e}")))?;
    let kind = value
        .get("type")
        .and_then(|t| t.as_str())
        .ok_or_else(|| DecodeError::Protocol("message without a \"type\"".into()))?
        .to_owned();
    if kind == "reading" {
        let payload: ReadingPayload =
            serde_json::from_value(value).map_err(|e| DecodeError::BadReading(e.to_string()))?;
        return Ok(Inbound::Reading(payload));
    }
    match serde_json::from_value::<WireMessage>(value) {
        Ok(WireMessage::Hello { stream }) => Ok(Inbound::Hello(stream)),
        Ok(WireMessage::Tick { time }) => time
            .parse()
            .map(Inbound::Tick)
            .map_err(|e: crate::ontology::OntologyError| DecodeError::Protocol(e.to_string())),
        Ok(_) => Err(DecodeError::Protocol(format!(
            "unexpected {kind:?} message from client"
        ))),
        Err(e) => Err(DecodeError::Protocol(e.to_string())),
    }
}
