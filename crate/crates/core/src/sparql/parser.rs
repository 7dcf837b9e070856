use std::collections::BTreeSet;

use crate::rdf::{
    tokenize, Iri, PatternTerm, Pos, Prefixes, RdfError, Term, Tok, TriplePattern, Variable,
};

use super::{Direction, FilterExpr, OrderKey, Query, QueryError};

/// Keywords of SPARQL features outside the subset; reported by name.
const UNSUPPORTED: &[&str] = &[
    "ASK",
    "BASE",
    "BIND",
    "CONSTRUCT",
    "DELETE",
    "DESCRIBE",
    "FROM",
    "GRAPH",
    "GROUP",
    "HAVING",
    "INSERT",
    "LIMIT",
    "LOAD",
    "MINUS",
    "NAMED",
    "OFFSET",
    "OPTIONAL",
    "REDUCED",
    "SERVICE",
    "UNION",
    "VALUES",
];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
    prefixes: Prefixes,
    /// Variables with the position they were referenced at, for validation.
    uses: Vec<(Variable, Pos)>,
}

fn syntax(pos: Pos, message: impl Into<String>) -> QueryError {
    QueryError::Syntax {
        pos,
        message: message.into(),
    }
}

fn from_rdf(e: RdfError) -> QueryError {
    let pos = e.pos().unwrap_or_default();
    match e {
        RdfError::Syntax { message, .. } => syntax(pos, message),
        other => syntax(pos, other.to_string()),
    }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self) -> Result<(Tok, Pos), QueryError> {
        let item = self
            .toks
            .get(self.at)
            .cloned()
            .ok_or_else(|| syntax(self.end, "unexpected end of query"))?;
        self.at += 1;
        Ok(item)
    }

    /// True if the next token is the keyword `kw` (case-insensitive).
    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let hit = self.at_keyword(kw);
        if hit {
            self.at += 1;
        }
        hit
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryError> {
        if self.eat_keyword(kw) {
            return Ok(());
        }
        let (tok, pos) = self.next()?;
        Err(self.unexpected(&tok, pos, &format!("`{kw}`")))
    }

    fn expect(&mut self, want: Tok) -> Result<Pos, QueryError> {
        let (tok, pos) = self.next()?;
        if tok == want {
            Ok(pos)
        } else {
            Err(self.unexpected(&tok, pos, &format!("`{want}`")))
        }
    }

    fn unexpected(&self, tok: &Tok, pos: Pos, wanted: &str) -> QueryError {
        match tok {
            Tok::Word(w) if UNSUPPORTED.iter().any(|k| w.eq_ignore_ascii_case(k)) => {
                QueryError::Unsupported {
                    pos,
                    feature: w.to_ascii_uppercase(),
                }
            }
            _ => syntax(pos, format!("expected {wanted}, found `{tok}`")),
        }
    }

    fn var(&mut self, name: String, pos: Pos) -> Result<Variable, QueryError> {
        let v = Variable::new(&name).ok_or_else(|| syntax(pos, format!("bad variable ?{name}")))?;
        self.uses.push((v.clone(), pos));
        Ok(v)
    }

    fn prologue(&mut self) -> Result<(), QueryError> {
        while self.eat_keyword("PREFIX") {
            let prefix = match self.next()? {
                (Tok::PName { prefix, local }, _) if local.is_empty() => prefix,
                (tok, pos) => return Err(self.unexpected(&tok, pos, "prefix name `p:`")),
            };
            let ns = match self.next()? {
                (Tok::IriRef(ns), _) => ns,
                (tok, pos) => return Err(self.unexpected(&tok, pos, "namespace `<iri>`")),
            };
            self.prefixes.declare(prefix, ns);
        }
        Ok(())
    }

    fn iri_or_var(&mut self, what: &str) -> Result<PatternTerm<Iri>, QueryError> {
        let (tok, pos) = self.next()?;
        if let Tok::Var(name) = tok {
            return Ok(PatternTerm::Var(self.var(name, pos)?));
        }
        if let Some(iri) = self.prefixes.iri(&tok, pos) {
            return iri.map(PatternTerm::Const).map_err(from_rdf);
        }
        match tok {
            Tok::Word(w) if w == "a" => Err(QueryError::Unsupported {
                pos,
                feature: "`a` (rdf:type shorthand)".into(),
            }),
            Tok::Str(_) => Err(syntax(pos, format!("literal not allowed as {what}"))),
            tok => Err(self.unexpected(&tok, pos, what)),
        }
    }

    fn object(&mut self) -> Result<PatternTerm<Term>, QueryError> {
        let (tok, pos) = self.next()?;
        match tok {
            Tok::Var(name) => Ok(PatternTerm::Var(self.var(name, pos)?)),
            Tok::Str(lexical) => {
                match self.next()? {
                    (Tok::Carets, _) => {}
                    (tok, p) => return Err(self.unexpected(&tok, p, "`^^` after literal")),
                }
                let (dt, dt_pos) = self.next()?;
                let lit = self
                    .prefixes
                    .literal(&lexical, &dt, pos, dt_pos)
                    .map_err(from_rdf)?;
                Ok(PatternTerm::Const(Term::Literal(lit)))
            }
            Tok::Word(w) if w.starts_with(|c: char| c.is_ascii_digit()) => {
                Err(QueryError::Unsupported {
                    pos,
                    feature: "numeric literal shorthand".into(),
                })
            }
            tok => match self.prefixes.iri(&tok, pos) {
                Some(iri) => iri
                    .map(|i| PatternTerm::Const(Term::Iri(i)))
                    .map_err(from_rdf),
                None => Err(self.unexpected(&tok, pos, "object")),
            },
        }
    }

    fn filter(&mut self) -> Result<FilterExpr, QueryError> {
        let open = self.pos();
        if self.peek() != Some(&Tok::LParen) {
            return Err(QueryError::Unsupported {
                pos: open,
                feature: "FILTER expression".into(),
            });
        }
        self.at += 1;
        let func = self.pos();
        if !self.eat_keyword("datatype") {
            return Err(QueryError::Unsupported {
                pos: func,
                feature: "FILTER expression".into(),
            });
        }
        self.expect(Tok::LParen)?;
        let variable = match self.next()? {
            (Tok::Var(name), pos) => self.var(name, pos)?,
            (tok, pos) => return Err(self.unexpected(&tok, pos, "variable")),
        };
        self.expect(Tok::RParen)?;
        if self.peek() != Some(&Tok::Eq) {
            return Err(QueryError::Unsupported {
                pos: self.pos(),
                feature: "FILTER expression".into(),
            });
        }
        self.at += 1;
        let (tok, pos) = self.next()?;
        let datatype = match self.prefixes.iri(&tok, pos) {
            Some(iri) => iri.map_err(from_rdf)?,
            None => return Err(self.unexpected(&tok, pos, "datatype IRI")),
        };
        self.expect(Tok::RParen)?;
        Ok(FilterExpr::DatatypeEquals { variable, datatype })
    }

    fn group(&mut self) -> Result<(Vec<TriplePattern>, Vec<FilterExpr>), QueryError> {
        self.expect(Tok::LBrace)?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.at += 1;
                    return Ok((patterns, filters));
                }
                Some(Tok::Dot) if !patterns.is_empty() || !filters.is_empty() => {
                    self.at += 1;
                }
                Some(Tok::LBrace) => {
                    return Err(QueryError::Unsupported {
                        pos: self.pos(),
                        feature: "nested group".into(),
                    })
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.at += 1;
                    filters.push(self.filter()?);
                }
                Some(_) => {
                    let subject = self.iri_or_var("subject")?;
                    let predicate = self.iri_or_var("predicate")?;
                    let object = self.object()?;
                    patterns.push(TriplePattern::new(subject, predicate, object));
                    match self.peek() {
                        Some(Tok::Dot | Tok::RBrace) => {}
                        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {}
                        Some(Tok::Punct(c @ (',' | ';'))) => {
                            return Err(QueryError::Unsupported {
                                pos: self.pos(),
                                feature: format!("`{c}` object/predicate lists"),
                            })
                        }
                        _ => {
                            let (tok, pos) = self.next()?;
                            return Err(self.unexpected(&tok, pos, "`.` or `}`"));
                        }
                    }
                }
                None => return Err(syntax(self.end, "unexpected end of query, expected `}`")),
            }
        }
    }

    fn order_by(&mut self) -> Result<Vec<OrderKey>, QueryError> {
        let mut keys = Vec::new();
        if !self.eat_keyword("ORDER") {
            return Ok(keys);
        }
        self.expect_keyword("BY")?;
        loop {
            let direction = if self.eat_keyword("DESC") {
                Some(Direction::Desc)
            } else if self.eat_keyword("ASC") {
                Some(Direction::Asc)
            } else {
                None
            };
            if direction.is_some() {
                self.expect(Tok::LParen)?;
            }
            let variable = match self.next()? {
                (Tok::Var(name), pos) => self.var(name, pos)?,
                (tok, pos) => return Err(self.unexpected(&tok, pos, "order key")),
            };
            if direction.is_some() {
                self.expect(Tok::RParen)?;
            }
            keys.push(OrderKey {
                variable,
                direction: direction.unwrap_or(Direction::Asc),
            });
            match self.peek() {
                Some(Tok::Var(_)) => {}
                Some(Tok::Word(w))
                    if w.eq_ignore_ascii_case("ASC") || w.eq_ignore_ascii_case("DESC") => {}
                _ => return Ok(keys),
            }
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        self.prologue()?;
        self.expect_keyword("SELECT")?;
        let distinct = self.eat_keyword("DISTINCT");
        let mut projection = Vec::new();
        let mut projected_at = Vec::new();
        while let Some(Tok::Var(name)) = self.peek().cloned() {
            let pos = self.pos();
            self.at += 1;
            projection.push(self.var(name, pos)?);
            projected_at.push(pos);
        }
        if projection.is_empty() {
            let pos = self.pos();
            return match self.peek() {
                Some(Tok::Punct('*')) => Err(QueryError::Unsupported {
                    pos,
                    feature: "SELECT *".into(),
                }),
                Some(Tok::LParen) => Err(QueryError::Unsupported {
                    pos,
                    feature: "SELECT expression".into(),
                }),
                _ => {
                    let (tok, pos) = self.next()?;
                    Err(self.unexpected(&tok, pos, "projected variable"))
                }
            };
        }
        self.eat_keyword("WHERE");
        let (patterns, filters) = self.group()?;
        let order = self.order_by()?;
        if let Some((tok, pos)) = self.toks.get(self.at).cloned() {
            return Err(self.unexpected(&tok, pos, "end of query"));
        }

        let bound: BTreeSet<&Variable> = patterns.iter().flat_map(|p| p.variables()).collect();
        if let Some((variable, pos)) = self.uses.iter().find(|(v, _)| !bound.contains(v)) {
            return Err(QueryError::UnboundVariable {
                pos: *pos,
                variable: variable.clone(),
            });
        }
        Ok(Query {
            distinct,
            projection,
            patterns,
            filters,
            order,
        })
    }
}

/// Parses a query in the supported subset. Anything outside it fails with
/// [`QueryError::Unsupported`] naming the feature.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let toks = tokenize(text).map_err(|e| syntax(e.pos, e.message))?;
    let end = {
        let line = text.lines().count().max(1);
        let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Pos { line, col }
    };
    Parser {
        toks,
        at: 0,
        end,
        prefixes: Prefixes::default(),
        uses: Vec::new(),
    }
    .query()
}
