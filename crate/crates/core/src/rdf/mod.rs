//! RDF data model, triple store and the Turtle-subset reader/writer.

mod lexer;
mod store;
mod term;
mod turtle;

pub use lexer::Pos;
pub use store::{PatternTerm, TriplePattern, TripleStore, Variable};
pub use term::{Datatype, Iri, Literal, Term, Triple, HOME_NS, XSD_NS};
pub use turtle::{parse_data, serialize};

pub(crate) use lexer::{tokenize, LexError, Tok};
pub(crate) use turtle::Prefixes;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RdfError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unsupported datatype {datatype}")]
    UnsupportedDatatype { pos: Pos, datatype: String },
    #[error("{pos}: invalid lexical form {lexical:?} for {datatype}")]
    InvalidLiteral {
        pos: Pos,
        lexical: String,
        datatype: Datatype,
    },
    #[error("invalid lexical form {lexical:?} for {datatype}")]
    InvalidLexical { lexical: String, datatype: Datatype },
    #[error("invalid IRI {0}")]
    InvalidIri(String),
}

impl RdfError {
    /// Source position, when the error came from parsing text.
    pub fn pos(&self) -> Option<Pos> {
        match self {
            RdfError::Syntax { pos, .. }
            | RdfError::UnsupportedDatatype { pos, .. }
            | RdfError::InvalidLiteral { pos, .. } => Some(*pos),
            RdfError::InvalidLexical { .. } | RdfError::InvalidIri(_) => None,
        }
    }
}

impl From<LexError> for RdfError {
    fn from(e: LexError) -> Self {
        RdfError::Syntax {
            pos: e.pos,
            message: e.message,
        }
    }
}
