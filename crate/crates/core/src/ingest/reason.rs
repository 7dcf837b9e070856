//! Priority-ordered appliance reasoning.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use crate::ontology::{load_home_model, OntologyError, TimeOfDay};
use crate::rdf::{Iri, Term, TripleStore};
use crate::sparql::{evaluate, parse_query, Query};

const APPLIANCE_QUERY: &str = "SELECT DISTINCT ?person ?what ?appliance ?status ?priority
WHERE
{
?work :When :{time}.
?environment :hasTime :{time}.
?environment :personIn ?person.
?work :Who ?person.
?work :Do ?what.
?person :hasPriority ?priority.
?what ?appliance ?status.
filter(datatype(?status)=xsd:boolean)
}
ORDER BY DESC(?priority)";

/// The appliance-status query: for every person present at `t` doing an
/// activity scheduled at `t`, the boolean appliance states that activity
/// prefers, highest priority first.
pub fn appliance_query(t: TimeOfDay) -> Query {
    let text = APPLIANCE_QUERY.replace("{time}", &format!("_{t}"));
    parse_query(&text).expect("appliance query template is valid")
}

/// One resolved command for the appliance controller.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApplianceCommand {
    pub appliance: Iri,
    pub state: bool,
    pub person: Iri,
    pub activity: Iri,
    pub priority: u64,
}

/// Runs the appliance query at `t` and resolves conflicts per appliance:
/// highest priority wins; on a priority tie `true` wins, then the lower
/// person IRI, then the lower activity IRI. Commands come out in appliance
/// order.
pub fn reason_at(
    store: &TripleStore,
    t: TimeOfDay,
) -> Result<Vec<ApplianceCommand>, OntologyError> {
    load_home_model(store)?;
    let rt = evaluate(store, &appliance_query(t));
    let col = |name: &str| rt.column(name).expect("column of the appliance query");
    let (person, what, appliance, status, priority) = (
        col("person"),
        col("what"),
        col("appliance"),
        col("status"),
        col("priority"),
    );

    let mut best: BTreeMap<Iri, ApplianceCommand> = BTreeMap::new();
    for row in &rt.rows {
        let (Term::Iri(p), Term::Iri(w), Term::Iri(a)) =
            (&row[person], &row[what], &row[appliance])
        else {
            continue;
        };
        let Some(state) = row[status].as_literal().and_then(|l| l.as_bool()) else {
            continue;
        };
        let prio = row[priority]
            .as_literal()
            .and_then(|l| l.as_f64())
            .filter(|v| *v >= 1.0 && v.fract() == 0.0)
            .ok_or_else(|| OntologyError::NonPositivePriority {
                person: p.clone(),
                value: row[priority].short().to_owned(),
            })? as u64;
        let cand = ApplianceCommand {
            appliance: a.clone(),
            state,
            person: p.clone(),
            activity: w.clone(),
            priority: prio,
        };
        let rank = |c: &ApplianceCommand| {
            (
                c.priority,
                c.state,
                Reverse(c.person.clone()),
                Reverse(c.activity.clone()),
            )
        };
        match best.get(a) {
            Some(cur) if rank(cur) >= rank(&cand) => {}
            _ => {
                best.insert(a.clone(), cand);
            }
        }
    }
    Ok(best.into_values().collect())
}
