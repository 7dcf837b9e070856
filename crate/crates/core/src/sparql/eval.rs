use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use crate::rdf::{Iri, PatternTerm, Term, Triple, TriplePattern, TripleStore, Variable};

use super::{Direction, Query, ResultTable};

/// A solution mapping from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binding(BTreeMap<Variable, Term>);

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn get(&self, v: &Variable) -> Option<&Term> {
        self.0.get(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Binds `v`, failing if it is already bound to a different term.
    pub fn bind(&mut self, v: &Variable, t: Term) -> bool {
        match self.0.get(v) {
            Some(existing) => *existing == t,
            None => {
                self.0.insert(v.clone(), t);
                true
            }
        }
    }

    pub fn compatible(&self, other: &Binding) -> bool {
        self.0
            .iter()
            .all(|(v, t)| other.0.get(v).is_none_or(|o| o == t))
    }

    /// Union of two compatible bindings.
    pub fn merge(&self, other: &Binding) -> Option<Binding> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        out.0
            .extend(other.0.iter().map(|(v, t)| (v.clone(), t.clone())));
        Some(out)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Term)> {
        self.0.iter()
    }

    /// Replaces bound variables of `p` with their values. `None` when a
    /// variable in subject or predicate position is bound to a literal, which
    /// no triple can match.
    fn substitute(&self, p: &TriplePattern) -> Option<TriplePattern> {
        let iri_slot = |slot: &PatternTerm<Iri>| -> Option<PatternTerm<Iri>> {
            match slot {
                PatternTerm::Var(v) => match self.get(v) {
                    None => Some(slot.clone()),
                    Some(Term::Iri(i)) => Some(PatternTerm::Const(i.clone())),
                    Some(Term::Literal(_)) => None,
                },
                c => Some(c.clone()),
            }
        };
        let object = match &p.object {
            PatternTerm::Var(v) => match self.get(v) {
                Some(t) => PatternTerm::Const(t.clone()),
                None => p.object.clone(),
            },
            c => c.clone(),
        };
        Some(TriplePattern::new(
            iri_slot(&p.subject)?,
            iri_slot(&p.predicate)?,
            object,
        ))
    }

    /// Extends with the variables of `p` bound to the matching triple.
    fn extend_from(&self, p: &TriplePattern, t: &Triple) -> Option<Binding> {
        let mut out = self.clone();
        let slots = [
            (&p.subject.as_var(), Term::Iri(t.subject.clone())),
            (&p.predicate.as_var(), Term::Iri(t.predicate.clone())),
            (&p.object.as_var(), t.object.clone()),
        ];
        for (var, value) in slots {
            if let Some(v) = var {
                if !out.bind(v, value) {
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// All solutions of the conjunctive pattern list, as a multiset.
///
/// Left-to-right nested-loop join: each pattern is instantiated with the
/// bindings found so far and answered by an index lookup.
pub fn solutions(store: &TripleStore, patterns: &[TriplePattern]) -> Vec<Binding> {
    let mut current = vec![Binding::new()];
    for pattern in patterns {
        let mut next = Vec::new();
        for b in &current {
            let Some(instantiated) = b.substitute(pattern) else {
                continue;
            };
            for t in store.match_pattern(&instantiated) {
                if let Some(extended) = b.extend_from(pattern, &t) {
                    next.push(extended);
                }
            }
        }
        if next.is_empty() {
            return next;
        }
        current = next;
    }
    current
}

/// Ordering for ORDER BY values: numerics (by value) before everything else,
/// the rest in canonical term order.
fn value_cmp(a: &Term, b: &Term) -> Ordering {
    let num = |t: &Term| t.as_literal().and_then(|l| l.as_f64());
    match (num(a), num(b)) {
        (Some(x), Some(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

/// Compares two order-key values; unbound sorts last in either direction.
fn key_cmp(a: Option<&Term>, b: Option<&Term>, dir: Direction) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Greater,
        (Some(_), None) => Ordering::Less,
        (Some(a), Some(b)) => match dir {
            Direction::Asc => value_cmp(a, b),
            Direction::Desc => value_cmp(a, b).reverse(),
        },
    }
}

/// Evaluates `q`: solutions, filters, ORDER BY (ties broken by the projected
/// columns left to right in canonical order), projection, then DISTINCT.
pub fn evaluate(store: &TripleStore, q: &Query) -> ResultTable {
    let mut sols: Vec<Binding> = solutions(store, &q.patterns)
        .into_iter()
        .filter(|b| q.filters.iter().all(|f| f.accepts(b.get(f.variable()))))
        .collect();

    let project = |b: &Binding| -> Vec<Option<Term>> {
        q.projection.iter().map(|v| b.get(v).cloned()).collect()
    };
    sols.sort_by(|a, b| {
        q.order
            .iter()
            .map(|k| key_cmp(a.get(&k.variable), b.get(&k.variable), k.direction))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
            .then_with(|| project(a).cmp(&project(b)))
    });

    let mut seen = HashSet::new();
    let rows = sols
        .iter()
        .map(|b| {
            q.projection
                .iter()
                .map(|v| {
                    b.get(v)
                        .cloned()
                        .expect("projected variables occur in a pattern")
                })
                .collect::<Vec<Term>>()
        })
        .filter(|row| !q.distinct || seen.insert(row.clone()))
        .collect();
    ResultTable {
        header: q.projection.clone(),
        rows,
    }
}
