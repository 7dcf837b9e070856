//! A small Turtle subset: `@prefix` lines and one `s p o .` statement per
//! triple, with prefixed-name or `<iri>` terms and `"lexical"^^xsd:type`
//! literals.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::lexer::{tokenize, Pos, Tok};
use super::store::TripleStore;
use super::term::{Datatype, Iri, Literal, Term, Triple, HOME_NS, XSD_NS};
use super::RdfError;

/// Prefix table; `:` and `xsd:` are always bound.
#[derive(Clone, Debug)]
pub(crate) struct Prefixes(HashMap<String, String>);

impl Default for Prefixes {
    fn default() -> Self {
        Prefixes(HashMap::from([
            (String::new(), HOME_NS.to_owned()),
            ("xsd".to_owned(), XSD_NS.to_owned()),
        ]))
    }
}

impl Prefixes {
    pub fn declare(&mut self, prefix: String, namespace: String) {
        self.0.insert(prefix, namespace);
    }

    pub fn resolve(&self, prefix: &str, local: &str, pos: Pos) -> Result<Iri, RdfError> {
        let ns = self.0.get(prefix).ok_or_else(|| RdfError::Syntax {
            pos,
            message: format!("undeclared prefix `{prefix}:`"),
        })?;
        Iri::from_full(&format!("{ns}{local}")).map_err(|e| RdfError::Syntax {
            pos,
            message: e.to_string(),
        })
    }

    /// Resolves an IRI token (prefixed name or `<iri>`), if `tok` is one.
    pub fn iri(&self, tok: &Tok, pos: Pos) -> Option<Result<Iri, RdfError>> {
        match tok {
            Tok::PName { prefix, local } => Some(self.resolve(prefix, local, pos)),
            Tok::IriRef(full) => Some(Iri::from_full(full).map_err(|e| RdfError::Syntax {
                pos,
                message: e.to_string(),
            })),
            _ => None,
        }
    }

    /// Builds a typed literal from a string token followed by `^^` and a datatype.
    pub fn literal(
        &self,
        lexical: &str,
        datatype_tok: &Tok,
        pos: Pos,
        dt_pos: Pos,
    ) -> Result<Literal, RdfError> {
        let dt_iri = self
            .iri(datatype_tok, dt_pos)
            .ok_or_else(|| RdfError::Syntax {
                pos: dt_pos,
                message: format!("expected datatype IRI, found `{datatype_tok}`"),
            })??;
        let datatype =
            Datatype::from_iri(&dt_iri).ok_or_else(|| RdfError::UnsupportedDatatype {
                pos: dt_pos,
                datatype: dt_iri.to_string(),
            })?;
        Literal::new(lexical, datatype).map_err(|_| RdfError::InvalidLiteral {
            pos,
            lexical: lexical.to_owned(),
            datatype,
        })
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    prefixes: Prefixes,
}

impl Parser {
    fn next(&mut self) -> Result<(Tok, Pos), RdfError> {
        let item = self.toks.get(self.at).cloned().ok_or(RdfError::Syntax {
            pos: self.end,
            message: "unexpected end of input".into(),
        })?;
        self.at += 1;
        Ok(item)
    }

    fn expect_dot(&mut self) -> Result<(), RdfError> {
        match self.next()? {
            (Tok::Dot, _) => Ok(()),
            (tok, pos) => Err(unexpected(&tok, pos, "`.`")),
        }
    }

    fn iri(&mut self, what: &str) -> Result<Iri, RdfError> {
        let (tok, pos) = self.next()?;
        self.prefixes
            .iri(&tok, pos)
            .unwrap_or_else(|| Err(unexpected(&tok, pos, what)))
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        let (tok, pos) = self.next()?;
        if let Some(iri) = self.prefixes.iri(&tok, pos) {
            return iri.map(Term::Iri);
        }
        let Tok::Str(lexical) = tok else {
            return Err(unexpected(&tok, pos, "object"));
        };
        match self.next()? {
            (Tok::Carets, _) => {}
            (tok, pos) => return Err(unexpected(&tok, pos, "`^^` after literal")),
        }
        let (dt, dt_pos) = self.next()?;
        self.prefixes
            .literal(&lexical, &dt, pos, dt_pos)
            .map(Term::Literal)
    }

    fn document(&mut self) -> Result<Vec<Triple>, RdfError> {
        let mut triples = Vec::new();
        while self.at < self.toks.len() {
            if self.toks[self.at].0 == Tok::AtPrefix {
                self.at += 1;
                let prefix = match self.next()? {
                    (Tok::PName { prefix, local }, _) if local.is_empty() => prefix,
                    (tok, pos) => return Err(unexpected(&tok, pos, "prefix name `p:`")),
                };
                let ns = match self.next()? {
                    (Tok::IriRef(ns), _) => ns,
                    (tok, pos) => return Err(unexpected(&tok, pos, "namespace `<iri>`")),
                };
                self.expect_dot()?;
                self.prefixes.declare(prefix, ns);
                continue;
            }
            let subject = self.iri("subject")?;
            let predicate = self.iri("predicate")?;
            let object = self.object()?;
            self.expect_dot()?;
            triples.push(Triple::new(subject, predicate, object));
        }
        Ok(triples)
    }
}

fn unexpected(tok: &Tok, pos: Pos, wanted: &str) -> RdfError {
    RdfError::Syntax {
        pos,
        message: format!("expected {wanted}, found `{tok}`"),
    }
}

fn end_pos(text: &str) -> Pos {
    let line = text.lines().count().max(1);
    let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, col }
}

/// Parses a Turtle-subset document, returning its triples in document order.
pub fn parse_data(text: &str) -> Result<Vec<Triple>, RdfError> {
    let mut parser = Parser {
        toks: tokenize(text)?,
        at: 0,
        end: end_pos(text),
        prefixes: Prefixes::default(),
    };
    parser.document()
}

/// Canonical text for `store`: the two built-in prefix lines, a blank line,
/// then one statement per triple in canonical order.
pub fn serialize(store: &TripleStore) -> String {
    let mut out = format!("@prefix : <{HOME_NS}> .\n@prefix xsd: <{XSD_NS}> .\n\n");
    for t in store.iter() {
        let _ = writeln!(out, "{t}");
    }
    out
}
