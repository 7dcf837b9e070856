//! RDF atoms: IRIs, typed literals and triples.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use chrono::{NaiveDate, NaiveTime};

use super::RdfError;

/// Namespace bound to the default `:` prefix.
pub const HOME_NS: &str = "http://example.org/smarthome#";
/// Namespace bound to the `xsd:` prefix.
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// An IRI kept in its canonical written form.
///
/// IRIs in the home namespace are written `:Local`, IRIs in the XSD namespace
/// `xsd:Local`, and everything else `<full-iri>`. Equality and ordering act on
/// that written form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(Arc<str>);

impl Iri {
    /// Builds an IRI from its full (expanded) form.
    pub fn from_full(full: &str) -> Result<Iri, RdfError> {
        if full.is_empty() {
            return Err(RdfError::InvalidIri(full.to_owned()));
        }
        if let Some(bad) = full.chars().find(|c| !is_iriref_char(*c)) {
            return Err(RdfError::InvalidIri(format!("{full} (character {bad:?})")));
        }
        for (ns, prefix) in [(HOME_NS, ""), (XSD_NS, "xsd")] {
            if let Some(local) = full.strip_prefix(ns) {
                if is_local_name(local) {
                    return Ok(Iri(format!("{prefix}:{local}").into()));
                }
            }
        }
        Ok(Iri(format!("<{full}>").into()))
    }

    /// An IRI in the home namespace, e.g. `Iri::home("Father")` is `:Father`.
    pub fn home(local: &str) -> Result<Iri, RdfError> {
        Iri::from_full(&format!("{HOME_NS}{local}"))
    }

    pub(crate) fn xsd(local: &str) -> Iri {
        Iri(format!("xsd:{local}").into())
    }

    /// Canonical written form (`:Father`, `xsd:double`, `<urn:x>`).
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The expanded IRI.
    pub fn full(&self) -> String {
        if let Some(local) = self.0.strip_prefix(':') {
            format!("{HOME_NS}{local}")
        } else if let Some(local) = self.0.strip_prefix("xsd:") {
            format!("{XSD_NS}{local}")
        } else {
            self.0[1..self.0.len() - 1].to_owned()
        }
    }

    /// Local name within the home namespace, if the IRI lives there.
    pub fn home_local(&self) -> Option<&str> {
        self.0.strip_prefix(':')
    }

    /// Short display form: home IRIs lose their `:` prefix.
    pub fn short(&self) -> &str {
        self.home_local().unwrap_or(&self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

pub(crate) fn is_local_name(s: &str) -> bool {
    s.chars().all(is_local_char)
}

pub(crate) fn is_iriref_char(c: char) -> bool {
    !(c.is_whitespace()
        || c.is_control()
        || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
}

/// Literal datatypes the store understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Datatype {
    Boolean,
    Date,
    Double,
    PositiveInteger,
    String,
    Time,
}

impl Datatype {
    pub const ALL: [Datatype; 6] = [
        Datatype::Boolean,
        Datatype::Date,
        Datatype::Double,
        Datatype::PositiveInteger,
        Datatype::String,
        Datatype::Time,
    ];

    pub fn local_name(self) -> &'static str {
        match self {
            Datatype::Boolean => "boolean",
            Datatype::Date => "date",
            Datatype::Double => "double",
            Datatype::PositiveInteger => "positiveInteger",
            Datatype::String => "string",
            Datatype::Time => "time",
        }
    }

    pub fn iri(self) -> Iri {
        Iri::xsd(self.local_name())
    }

    pub fn from_iri(iri: &Iri) -> Option<Datatype> {
        let local = iri.as_str().strip_prefix("xsd:")?;
        Datatype::ALL.into_iter().find(|d| d.local_name() == local)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Datatype::Double | Datatype::PositiveInteger)
    }

    fn validate(self, lexical: &str) -> bool {
        match self {
            Datatype::Boolean => matches!(lexical, "true" | "false"),
            Datatype::Date => NaiveDate::parse_from_str(lexical, "%Y-%m-%d").is_ok(),
            Datatype::Double => {
                !lexical.is_empty()
                    && lexical
                        .chars()
                        .all(|c| c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E'))
                    && lexical.parse::<f64>().is_ok_and(f64::is_finite)
            }
            Datatype::PositiveInteger => {
                !lexical.is_empty()
                    && lexical.bytes().all(|b| b.is_ascii_digit())
                    && lexical.parse::<u64>().is_ok_and(|v| v >= 1)
            }
            Datatype::String => true,
            Datatype::Time => NaiveTime::parse_from_str(lexical, "%H:%M:%S").is_ok(),
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xsd:{}", self.local_name())
    }
}

/// A typed literal whose lexical form has been checked against its datatype.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: &str, datatype: Datatype) -> Result<Literal, RdfError> {
        if !datatype.validate(lexical) {
            return Err(RdfError::InvalidLexical {
                lexical: lexical.to_owned(),
                datatype,
            });
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype,
        })
    }

    pub fn boolean(value: bool) -> Literal {
        Literal {
            lexical: if value { "true" } else { "false" }.into(),
            datatype: Datatype::Boolean,
        }
    }

    /// A double literal using the shortest lexical form that round-trips.
    pub fn double(value: f64) -> Result<Literal, RdfError> {
        Literal::new(&value.to_string(), Datatype::Double)
    }

    pub fn string(value: &str) -> Literal {
        Literal {
            lexical: value.into(),
            datatype: Datatype::String,
        }
    }

    pub fn date(value: NaiveDate) -> Literal {
        Literal {
            lexical: value.format("%Y-%m-%d").to_string().into(),
            datatype: Datatype::Date,
        }
    }

    pub fn positive_integer(value: u64) -> Result<Literal, RdfError> {
        Literal::new(&value.to_string(), Datatype::PositiveInteger)
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn as_bool(&self) -> Option<bool> {
        match (self.datatype, &*self.lexical) {
            (Datatype::Boolean, "true") => Some(true),
            (Datatype::Boolean, "false") => Some(false),
            _ => None,
        }
    }

    /// Numeric value for `xsd:double` and `xsd:positiveInteger` literals.
    pub fn as_f64(&self) -> Option<f64> {
        if self.datatype.is_numeric() {
            self.lexical.parse().ok()
        } else {
            None
        }
    }

    pub fn as_date(&self) -> Option<NaiveDate> {
        match self.datatype {
            Datatype::Date => NaiveDate::parse_from_str(&self.lexical, "%Y-%m-%d").ok(),
            _ => None,
        }
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.datatype
            .local_name()
            .cmp(other.datatype.local_name())
            .then_with(|| self.lexical.cmp(&other.lexical))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                '\t' => f.write_str("\\t")?,
                c => write!(f, "{c}")?,
            }
        }
        write!(f, "\"^^{}", self.datatype)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Object position of a triple. IRIs sort before literals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Iri(_) => None,
        }
    }

    /// Compact form for tables: home IRIs without `:`, literals by lexical form.
    pub fn short(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.short(),
            Term::Literal(lit) => lit.lexical(),
        }
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => fmt::Display::fmt(iri, f),
            Term::Literal(lit) => fmt::Display::fmt(lit, f),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A statement `subject predicate object`. Field order gives the canonical
/// (subject, predicate, object) ordering.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: impl Into<Term>) -> Triple {
        Triple {
            subject,
            predicate,
            object: object.into(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
