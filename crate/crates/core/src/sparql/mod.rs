//! A SPARQL subset: `SELECT [DISTINCT]` over a conjunctive basic graph
//! pattern, `FILTER(datatype(?v) = xsd:T)` and `ORDER BY`.

mod eval;
mod format;
mod parser;

use std::fmt;

use thiserror::Error;

use crate::rdf::{Iri, Pos, Term, TriplePattern, Variable};

pub use eval::{evaluate, solutions, Binding};
pub use format::{format_results, OutputMode};
pub use parser::parse_query;

#[derive(Debug, Error, PartialEq)]
pub enum QueryError {
    #[error("{pos}: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{pos}: unsupported feature {feature}")]
    Unsupported { pos: Pos, feature: String },
    #[error("{pos}: variable {variable} is not bound by any pattern")]
    UnboundVariable { pos: Pos, variable: Variable },
}

impl QueryError {
    pub fn pos(&self) -> Pos {
        match self {
            QueryError::Syntax { pos, .. }
            | QueryError::Unsupported { pos, .. }
            | QueryError::UnboundVariable { pos, .. } => *pos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FilterExpr {
    /// `datatype(?v) = <iri>`
    DatatypeEquals { variable: Variable, datatype: Iri },
}

impl FilterExpr {
    pub fn variable(&self) -> &Variable {
        match self {
            FilterExpr::DatatypeEquals { variable, .. } => variable,
        }
    }

    /// Evaluates against a bound term; unbound never passes.
    pub fn accepts(&self, value: Option<&Term>) -> bool {
        match self {
            FilterExpr::DatatypeEquals { datatype, .. } => value
                .and_then(Term::as_literal)
                .is_some_and(|lit| lit.datatype().iri() == *datatype),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Asc,
    Desc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderKey {
    pub variable: Variable,
    pub direction: Direction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub distinct: bool,
    pub projection: Vec<Variable>,
    /// Patterns in written order.
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<FilterExpr>,
    pub order: Vec<OrderKey>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        for v in &self.projection {
            write!(f, "{v} ")?;
        }
        f.write_str("WHERE {\n")?;
        for p in &self.patterns {
            writeln!(f, "  {p}")?;
        }
        for FilterExpr::DatatypeEquals { variable, datatype } in &self.filters {
            writeln!(f, "  FILTER(datatype({variable}) = {datatype})")?;
        }
        f.write_str("}")?;
        if !self.order.is_empty() {
            f.write_str(" ORDER BY")?;
            for key in &self.order {
                let dir = match key.direction {
                    Direction::Asc => "ASC",
                    Direction::Desc => "DESC",
                };
                write!(f, " {dir}({})", key.variable)?;
            }
        }
        Ok(())
    }
}

/// Solutions projected onto `header`, one term per column.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResultTable {
    pub header: Vec<Variable>,
    pub rows: Vec<Vec<Term>>,
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|v| v.name() == name)
    }
}
