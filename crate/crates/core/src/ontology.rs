//! Typed home context model (persons, activities, preference profiles,
//! environment readings, time of day) and its mapping to and from triples.

use chrono::{Datelike, NaiveDate};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::rdf::{
    Datatype, Iri, Literal, PatternTerm, Term, Triple, TriplePattern, TripleStore, Variable,
};

/// Property and resource names used by the home vocabulary.
pub mod vocab {
    use std::sync::LazyLock;

    use crate::rdf::Iri;

    fn home(local: &str) -> Iri {
        Iri::home(local).expect("vocabulary names are valid local names")
    }

    pub static HUMIDITY: LazyLock<Iri> = LazyLock::new(|| home("Humidity"));
    pub static TEMPERATURE: LazyLock<Iri> = LazyLock::new(|| home("Temperature"));
    pub static ILLUMINATION: LazyLock<Iri> = LazyLock::new(|| home("Illumination"));
    pub static DATE: LazyLock<Iri> = LazyLock::new(|| home("Date"));
    pub static HAS_TIME: LazyLock<Iri> = LazyLock::new(|| home("hasTime"));
    pub static PERSON_IN: LazyLock<Iri> = LazyLock::new(|| home("personIn"));
    pub static WHEN: LazyLock<Iri> = LazyLock::new(|| home("When"));
    pub static WHO: LazyLock<Iri> = LazyLock::new(|| home("Who"));
    pub static DO: LazyLock<Iri> = LazyLock::new(|| home("Do"));
    pub static NAME: LazyLock<Iri> = LazyLock::new(|| home("name"));
    pub static HAS_PRIORITY: LazyLock<Iri> = LazyLock::new(|| home("hasPriority"));
}

#[derive(Debug, Error, PartialEq)]
pub enum OntologyError {
    #[error("{0} not found")]
    NotFound(Iri),
    #[error("{subject}: missing property {}", property.short())]
    MissingProperty { subject: Iri, property: Iri },
    #[error("{subject}: more than one value for {}", property.short())]
    Ambiguous { subject: Iri, property: Iri },
    #[error("{subject}: malformed {}: {message}", property.short())]
    Malformed {
        subject: Iri,
        property: Iri,
        message: String,
    },
    #[error("{subject}: dangling reference {} -> {target}", property.short())]
    DanglingReference {
        subject: Iri,
        property: Iri,
        target: Iri,
    },
    #[error("{person}: priority {value} is not positive")]
    NonPositivePriority { person: Iri, value: String },
    #[error("invalid time of day {0:?}, expected HHMMSS")]
    InvalidTime(String),
    #[error("invalid reading: {0}")]
    InvalidReading(String),
}

/// Wall-clock time with second resolution; written `HHMMSS`, and as a
/// resource `:_HHMMSS`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TimeOfDay {
    hour: u8,
    minute: u8,
    second: u8,
}

impl TimeOfDay {
    pub fn new(hour: u8, minute: u8, second: u8) -> Result<TimeOfDay, OntologyError> {
        if hour > 23 || minute > 59 || second > 59 {
            return Err(OntologyError::InvalidTime(format!(
                "{hour:02}{minute:02}{second:02}"
            )));
        }
        Ok(TimeOfDay {
            hour,
            minute,
            second,
        })
    }

    pub fn from_seconds(secs: u32) -> Result<TimeOfDay, OntologyError> {
        if secs >= 86_400 {
            return Err(OntologyError::InvalidTime(secs.to_string()));
        }
        TimeOfDay::new(
            (secs / 3600) as u8,
            (secs / 60 % 60) as u8,
            (secs % 60) as u8,
        )
    }

    pub fn hour(self) -> u8 {
        self.hour
    }

    pub fn minute(self) -> u8 {
        self.minute
    }

    pub fn second(self) -> u8 {
        self.second
    }

    pub fn seconds_since_midnight(self) -> u32 {
        self.hour as u32 * 3600 + self.minute as u32 * 60 + self.second as u32
    }

    pub fn iri(self) -> Iri {
        Iri::home(&format!("_{self}")).expect("time resource names are valid")
    }

    pub fn from_iri(iri: &Iri) -> Result<TimeOfDay, OntologyError> {
        iri.home_local()
            .and_then(|l| l.strip_prefix('_'))
            .ok_or_else(|| OntologyError::InvalidTime(iri.to_string()))?
            .parse()
    }
}

impl FromStr for TimeOfDay {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OntologyError::InvalidTime(s.to_owned());
        if s.len() != 6 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let field = |i: usize| s[i..i + 2].parse::<u8>().expect("two ascii digits");
        TimeOfDay::new(field(0), field(2), field(4)).map_err(|_| bad())
    }
}

impl fmt::Display for TimeOfDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}{:02}{:02}", self.hour, self.minute, self.second)
    }
}

/// One environment snapshot.
///
/// The id is `_YYMMDDHHMMSS`, optionally followed by `-<source>` when the
/// reading came from a named sensor stream, so two streams reporting at the
/// same second do not share a subject.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentReading {
    id: Iri,
    humidity: f64,
    temperature: f64,
    illumination: f64,
    date: NaiveDate,
    time: TimeOfDay,
    persons_present: BTreeSet<Iri>,
}

impl EnvironmentReading {
    pub fn new(
        date: NaiveDate,
        time: TimeOfDay,
        humidity: f64,
        temperature: f64,
        illumination: f64,
        persons_present: BTreeSet<Iri>,
    ) -> Result<EnvironmentReading, OntologyError> {
        let invalid = |m: &str| Err(OntologyError::InvalidReading(m.to_owned()));
        if !(humidity.is_finite() && (0.0..=100.0).contains(&humidity)) {
            return invalid("humidity must be within [0, 100]");
        }
        if !temperature.is_finite() {
            return invalid("temperature must be finite");
        }
        if !(illumination.is_finite() && illumination >= 0.0) {
            return invalid("illumination must be finite and >= 0");
        }
        Ok(EnvironmentReading {
            id: Iri::home(&format!("_{}", timestamp_key(date, time)))
                .expect("timestamp ids are valid"),
            humidity,
            temperature,
            illumination,
            date,
            time,
            persons_present,
        })
    }

    /// Tags the id with a stream name: `_YYMMDDHHMMSS-<source>`.
    pub fn with_source(mut self, source: &str) -> Result<EnvironmentReading, OntologyError> {
        let id = Iri::home(&format!(
            "_{}-{source}",
            timestamp_key(self.date, self.time)
        ))
        .ok()
        .filter(|iri| !source.is_empty() && iri.home_local().is_some())
        .ok_or_else(|| OntologyError::InvalidReading(format!("bad source name {source:?}")))?;
        self.id = id;
        Ok(self)
    }

    pub fn id(&self) -> &Iri {
        &self.id
    }

    pub fn humidity(&self) -> f64 {
        self.humidity
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn illumination(&self) -> f64 {
        self.illumination
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    pub fn time(&self) -> TimeOfDay {
        self.time
    }

    pub fn persons_present(&self) -> &BTreeSet<Iri> {
        &self.persons_present
    }

    pub fn timestamp(&self) -> (NaiveDate, TimeOfDay) {
        (self.date, self.time)
    }
}

fn timestamp_key(date: NaiveDate, time: TimeOfDay) -> String {
    format!(
        "{:02}{:02}{:02}{time}",
        date.year().rem_euclid(100),
        date.month(),
        date.day()
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Person {
    pub id: Iri,
    pub name: String,
    pub priority: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Activity {
    pub id: Iri,
    pub when: TimeOfDay,
    pub who: Iri,
    pub does: Iri,
}

/// Desired appliance states for one activity; appliances are open-ended IRIs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceProfile {
    pub id: Iri,
    pub appliance_states: BTreeMap<Iri, bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomeModel {
    pub persons: BTreeMap<Iri, Person>,
    pub activities: BTreeMap<Iri, Activity>,
    pub preferences: BTreeMap<Iri, PreferenceProfile>,
}

/// Triples describing `r`, shaped like the environment records of the home
/// ontology: three doubles, a date, a time resource and one `personIn` per
/// person present.
pub fn reading_to_triples(r: &EnvironmentReading) -> Vec<Triple> {
    let double = |v: f64| Literal::double(v).expect("reading values are finite");
    let mut out = vec![
        Triple::new(r.id.clone(), vocab::HUMIDITY.clone(), double(r.humidity)),
        Triple::new(
            r.id.clone(),
            vocab::TEMPERATURE.clone(),
            double(r.temperature),
        ),
        Triple::new(
            r.id.clone(),
            vocab::ILLUMINATION.clone(),
            double(r.illumination),
        ),
        Triple::new(r.id.clone(), vocab::DATE.clone(), Literal::date(r.date)),
        Triple::new(r.id.clone(), vocab::HAS_TIME.clone(), r.time.iri()),
    ];
    out.extend(
        r.persons_present
            .iter()
            .map(|p| Triple::new(r.id.clone(), vocab::PERSON_IN.clone(), p.clone())),
    );
    out
}

fn var(name: &str) -> Variable {
    Variable::new(name).expect("valid variable name")
}

fn objects(store: &TripleStore, subject: &Iri, property: &Iri) -> Vec<Term> {
    store
        .match_pattern(&TriplePattern::new(
            PatternTerm::Const(subject.clone()),
            PatternTerm::Const(property.clone()),
            PatternTerm::Var(var("o")),
        ))
        .into_iter()
        .map(|t| t.object)
        .collect()
}

fn single(store: &TripleStore, subject: &Iri, property: &Iri) -> Result<Term, OntologyError> {
    let mut values = objects(store, subject, property);
    match values.len() {
        0 => Err(OntologyError::MissingProperty {
            subject: subject.clone(),
            property: property.clone(),
        }),
        1 => Ok(values.remove(0)),
        _ => Err(OntologyError::Ambiguous {
            subject: subject.clone(),
            property: property.clone(),
        }),
    }
}

fn malformed(subject: &Iri, property: &Iri, message: impl Into<String>) -> OntologyError {
    OntologyError::Malformed {
        subject: subject.clone(),
        property: property.clone(),
        message: message.into(),
    }
}

fn single_literal(
    store: &TripleStore,
    subject: &Iri,
    property: &Iri,
    datatype: Datatype,
) -> Result<Literal, OntologyError> {
    match single(store, subject, property)? {
        Term::Literal(lit) if lit.datatype() == datatype => Ok(lit),
        other => Err(malformed(
            subject,
            property,
            format!("expected {datatype}, found {other}"),
        )),
    }
}

fn single_iri(store: &TripleStore, subject: &Iri, property: &Iri) -> Result<Iri, OntologyError> {
    match single(store, subject, property)? {
        Term::Iri(iri) => Ok(iri),
        other => Err(malformed(
            subject,
            property,
            format!("expected a resource, found {other}"),
        )),
    }
}

/// Rebuilds the reading stored under `id`.
pub fn triples_to_reading(
    store: &TripleStore,
    id: &Iri,
) -> Result<EnvironmentReading, OntologyError> {
    let about = TriplePattern::new(
        PatternTerm::Const(id.clone()),
        PatternTerm::Var(var("p")),
        PatternTerm::Var(var("o")),
    );
    if store.match_pattern(&about).is_empty() {
        return Err(OntologyError::NotFound(id.clone()));
    }
    let number = |property: &Iri| -> Result<f64, OntologyError> {
        single_literal(store, id, property, Datatype::Double)?
            .as_f64()
            .ok_or_else(|| malformed(id, property, "not a number"))
    };
    let humidity = number(&vocab::HUMIDITY)?;
    let temperature = number(&vocab::TEMPERATURE)?;
    let illumination = number(&vocab::ILLUMINATION)?;
    let date = single_literal(store, id, &vocab::DATE, Datatype::Date)?
        .as_date()
        .ok_or_else(|| malformed(id, &vocab::DATE, "not a date"))?;
    let time_iri = single_iri(store, id, &vocab::HAS_TIME)?;
    let time = TimeOfDay::from_iri(&time_iri)
        .map_err(|e| malformed(id, &vocab::HAS_TIME, e.to_string()))?;
    let mut persons = BTreeSet::new();
    for p in objects(store, id, &vocab::PERSON_IN) {
        match p {
            Term::Iri(iri) => persons.insert(iri),
            other => {
                return Err(malformed(
                    id,
                    &vocab::PERSON_IN,
                    format!("expected a person, found {other}"),
                ))
            }
        };
    }
    let reading =
        EnvironmentReading::new(date, time, humidity, temperature, illumination, persons)?;
    let base = reading.id.as_str().to_owned();
    let reading = match id.as_str().strip_prefix(base.as_str()) {
        Some("") => reading,
        Some(suffix) if suffix.starts_with('-') => reading.with_source(&suffix[1..])?,
        _ => {
            return Err(OntologyError::InvalidReading(format!(
                "id {id} does not encode date {date} and time {time}"
            )))
        }
    };
    Ok(reading)
}

fn subjects_with(store: &TripleStore, property: &Iri) -> BTreeSet<Iri> {
    store
        .match_pattern(&TriplePattern::new(
            PatternTerm::Var(var("s")),
            PatternTerm::Const(property.clone()),
            PatternTerm::Var(var("o")),
        ))
        .into_iter()
        .map(|t| t.subject)
        .collect()
}

fn priority_of(store: &TripleStore, person: &Iri) -> Result<u64, OntologyError> {
    let property = &*vocab::HAS_PRIORITY;
    let lit = match single(store, person, property)? {
        Term::Literal(lit) if lit.datatype().is_numeric() => lit,
        other => {
            return Err(malformed(
                person,
                property,
                format!("expected an integer, found {other}"),
            ))
        }
    };
    let value = lit.as_f64().filter(|v| v.fract() == 0.0).ok_or_else(|| {
        malformed(
            person,
            property,
            format!("{} is not an integer", lit.lexical()),
        )
    })?;
    if value < 1.0 {
        return Err(OntologyError::NonPositivePriority {
            person: person.clone(),
            value: lit.lexical().to_owned(),
        });
    }
    Ok(value as u64)
}

/// Collects persons, activities and the preference profiles they refer to,
/// checking that every activity's `Who` and `Do` resolve.
pub fn load_home_model(store: &TripleStore) -> Result<HomeModel, OntologyError> {
    let mut model = HomeModel::default();

    for id in subjects_with(store, &vocab::HAS_PRIORITY) {
        let priority = priority_of(store, &id)?;
        let name = single_literal(store, &id, &vocab::NAME, Datatype::String)?
            .lexical()
            .to_owned();
        model
            .persons
            .insert(id.clone(), Person { id, name, priority });
    }

    let mut activity_ids = subjects_with(store, &vocab::WHEN);
    activity_ids.extend(subjects_with(store, &vocab::WHO));
    activity_ids.extend(subjects_with(store, &vocab::DO));
    for id in activity_ids {
        let when_iri = single_iri(store, &id, &vocab::WHEN)?;
        let when = TimeOfDay::from_iri(&when_iri)
            .map_err(|e| malformed(&id, &vocab::WHEN, e.to_string()))?;
        let who = single_iri(store, &id, &vocab::WHO)?;
        let does = single_iri(store, &id, &vocab::DO)?;
        if !model.persons.contains_key(&who) {
            return Err(OntologyError::DanglingReference {
                subject: id,
                property: vocab::WHO.clone(),
                target: who,
            });
        }
        if !model.preferences.contains_key(&does) {
            let profile = preference_profile(store, &does).ok_or_else(|| {
                OntologyError::DanglingReference {
                    subject: id.clone(),
                    property: vocab::DO.clone(),
                    target: does.clone(),
                }
            })??;
            model.preferences.insert(does.clone(), profile);
        }
        model.activities.insert(
            id.clone(),
            Activity {
                id,
                when,
                who,
                does,
            },
        );
    }
    Ok(model)
}

/// Boolean-valued properties of `id`; `None` if it has none.
fn preference_profile(
    store: &TripleStore,
    id: &Iri,
) -> Option<Result<PreferenceProfile, OntologyError>> {
    let about = TriplePattern::new(
        PatternTerm::Const(id.clone()),
        PatternTerm::Var(var("p")),
        PatternTerm::Var(var("o")),
    );
    let mut states = BTreeMap::new();
    for t in store.match_pattern(&about) {
        let Some(state) = t.object.as_literal().and_then(Literal::as_bool) else {
            continue;
        };
        if states.insert(t.predicate.clone(), state).is_some() {
            return Some(Err(OntologyError::Ambiguous {
                subject: id.clone(),
                property: t.predicate,
            }));
        }
    }
    if states.is_empty() {
        return None;
    }
    Some(Ok(PreferenceProfile {
        id: id.clone(),
        appliance_states: states,
    }))
}

/// Resolves a person given by local name (`"Father"`) or as `:Father`.
pub fn person_iri(name: &str) -> Result<Iri, OntologyError> {
    let local = name.strip_prefix(':').unwrap_or(name);
    match Iri::home(local) {
        Ok(iri) if !local.is_empty() && iri.home_local().is_some() => Ok(iri),
        _ => Err(OntologyError::InvalidReading(format!(
            "bad person name {name:?}"
        ))),
    }
}
