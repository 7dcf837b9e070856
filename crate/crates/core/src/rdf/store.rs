//! Indexed in-memory triple set.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::term::{Iri, Term, Triple};

/// A query variable, written `?name`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: &str) -> Option<Variable> {
        if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            Some(Variable(name.into()))
        } else {
            None
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One position of a triple pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PatternTerm<T> {
    Var(Variable),
    Const(T),
}

impl<T> PatternTerm<T> {
    pub fn as_const(&self) -> Option<&T> {
        match self {
            PatternTerm::Const(t) => Some(t),
            PatternTerm::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }
}

impl<T: fmt::Display> fmt::Display for PatternTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => fmt::Display::fmt(v, f),
            PatternTerm::Const(t) => fmt::Display::fmt(t, f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm<Iri>,
    pub predicate: PatternTerm<Iri>,
    pub object: PatternTerm<Term>,
}

impl TriplePattern {
    pub fn new(
        subject: PatternTerm<Iri>,
        predicate: PatternTerm<Iri>,
        object: PatternTerm<Term>,
    ) -> TriplePattern {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    /// Constants match structurally; variables match anything. A variable
    /// repeated within the pattern must match equal terms.
    pub fn matches(&self, t: &Triple) -> bool {
        fn slot<T: PartialEq>(p: &PatternTerm<T>, v: &T) -> bool {
            p.as_const().is_none_or(|c| c == v)
        }
        if !(slot(&self.subject, &t.subject)
            && slot(&self.predicate, &t.predicate)
            && slot(&self.object, &t.object))
        {
            return false;
        }
        let s = self.subject.as_var();
        let p = self.predicate.as_var();
        let o = self.object.as_var();
        let subj = Term::Iri(t.subject.clone());
        let pred = Term::Iri(t.predicate.clone());
        if s.is_some() && s == p && t.subject != t.predicate {
            return false;
        }
        if s.is_some() && s == o && subj != t.object {
            return false;
        }
        if p.is_some() && p == o && pred != t.object {
            return false;
        }
        true
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        [
            self.subject.as_var(),
            self.predicate.as_var(),
            self.object.as_var(),
        ]
        .into_iter()
        .flatten()
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

type Bucket = BTreeSet<Triple>;

/// Set of triples with lookup indexes on S, P, O, (S,P) and (P,O).
///
/// Each index bucket is an ordered set, so every lookup yields triples in
/// canonical (subject, predicate, object) order without a sort.
#[derive(Clone, Default)]
pub struct TripleStore {
    all: Bucket,
    by_s: BTreeMap<Iri, Bucket>,
    by_p: BTreeMap<Iri, Bucket>,
    by_o: BTreeMap<Term, Bucket>,
    by_sp: BTreeMap<(Iri, Iri), Bucket>,
    by_po: BTreeMap<(Iri, Term), Bucket>,
}

impl TripleStore {
    pub fn new() -> TripleStore {
        TripleStore::default()
    }

    /// Returns `true` if the triple was not already present.
    pub fn insert(&mut self, t: Triple) -> bool {
        if self.all.contains(&t) {
            return false;
        }
        self.by_s
            .entry(t.subject.clone())
            .or_default()
            .insert(t.clone());
        self.by_p
            .entry(t.predicate.clone())
            .or_default()
            .insert(t.clone());
        self.by_o
            .entry(t.object.clone())
            .or_default()
            .insert(t.clone());
        self.by_sp
            .entry((t.subject.clone(), t.predicate.clone()))
            .or_default()
            .insert(t.clone());
        self.by_po
            .entry((t.predicate.clone(), t.object.clone()))
            .or_default()
            .insert(t.clone());
        self.all.insert(t)
    }

    pub fn extend<I: IntoIterator<Item = Triple>>(&mut self, triples: I) -> usize {
        triples
            .into_iter()
            .filter(|t| self.insert(t.clone()))
            .count()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.all.contains(t)
    }

    pub fn len(&self) -> usize {
        self.all.len()
    }

    pub fn is_empty(&self) -> bool {
        self.all.is_empty()
    }

    /// All triples in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.all.iter()
    }

    /// Triples unifying with `pattern`, in canonical order.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        self.candidates(pattern)
            .filter(|t| pattern.matches(t))
            .cloned()
            .collect()
    }

    fn candidates<'a>(
        &'a self,
        pattern: &TriplePattern,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        fn bucket<'a, K: Ord>(
            map: &'a BTreeMap<K, Bucket>,
            key: &K,
        ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
            match map.get(key) {
                Some(b) => Box::new(b.iter()),
                None => Box::new(std::iter::empty()),
            }
        }
        let s = pattern.subject.as_const();
        let p = pattern.predicate.as_const();
        let o = pattern.object.as_const();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = Triple::new(s.clone(), p.clone(), o.clone());
                match self.all.get(&t) {
                    Some(found) => Box::new(std::iter::once(found)),
                    None => Box::new(std::iter::empty()),
                }
            }
            (Some(s), Some(p), None) => bucket(&self.by_sp, &(s.clone(), p.clone())),
            (None, Some(p), Some(o)) => bucket(&self.by_po, &(p.clone(), o.clone())),
            (Some(s), None, Some(o)) => {
                // no (S,O) index; take the smaller of the two single-key buckets
                let by_s = self.by_s.get(s).map_or(0, |b| b.len());
                let by_o = self.by_o.get(o).map_or(0, |b| b.len());
                if by_s <= by_o {
                    bucket(&self.by_s, s)
                } else {
                    bucket(&self.by_o, o)
                }
            }
            (Some(s), None, None) => bucket(&self.by_s, s),
            (None, Some(p), None) => bucket(&self.by_p, p),
            (None, None, Some(o)) => bucket(&self.by_o, o),
            (None, None, None) => Box::new(self.all.iter()),
        }
    }
}

impl fmt::Debug for TripleStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.all.iter()).finish()
    }
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        self.all == other.all
    }
}

impl Eq for TripleStore {}

impl FromIterator<Triple> for TripleStore {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut store = TripleStore::new();
        store.extend(iter);
        store
    }
}
