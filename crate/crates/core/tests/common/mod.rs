//! Seeded generators and brute-force oracles shared by the integration and
//! acceptance tests. Nothing here calls the engine's matching or ordering
//! code.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use homectx::ontology::{EnvironmentReading, TimeOfDay};
use homectx::rdf::{Datatype, Iri, Literal, Term, Triple, TripleStore};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn home(local: &str) -> Iri {
    Iri::home(local).unwrap()
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

// ---------------------------------------------------------------------------
// Round-trip stores

const LOCAL_CHARS: &[u8] = b"abcXYZ019_-";
const STRING_CHARS: &[char] = &[
    'a', 'Z', '0', ' ', '"', '\\', '\n', '\r', '\t', '#', '.', ':', '<', '>', '{', '}', '^', 'é',
    '→', '😀', '\'',
];

pub fn random_local<R: Rng>(rng: &mut R) -> String {
    let len = rng.gen_range(1..8);
    (0..len)
        .map(|_| *LOCAL_CHARS.choose(rng).unwrap() as char)
        .collect()
}

pub fn random_iri<R: Rng>(rng: &mut R) -> Iri {
    if rng.gen_bool(0.8) {
        home(&random_local(rng))
    } else {
        let path: String = (0..rng.gen_range(0..6))
            .map(|_| *b"abz09/#.~_-".choose(rng).unwrap() as char)
            .collect();
        Iri::from_full(&format!("http://other.example/{path}")).unwrap()
    }
}

pub fn random_literal<R: Rng>(rng: &mut R) -> Literal {
    match rng.gen_range(0..6) {
        0 => Literal::boolean(rng.gen()),
        1 => {
            let v = match rng.gen_range(0..4) {
                0 => rng.gen_range(-1e3..1e3),
                1 => rng.gen_range(-1e300..1e300),
                2 => f64::from(rng.gen_range(-50i32..50)),
                _ => rng.gen_range(-1e-300..1e-300),
            };
            Literal::double(v).unwrap()
        }
        2 => Literal::positive_integer(rng.gen_range(1..=u64::MAX)).unwrap(),
        3 => Literal::date(date(
            rng.gen_range(1900..2100),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28),
        )),
        4 => {
            let t = TimeOfDay::from_seconds(rng.gen_range(0..86_400)).unwrap();
            let lex = format!("{:02}:{:02}:{:02}", t.hour(), t.minute(), t.second());
            Literal::new(&lex, Datatype::Time).unwrap()
        }
        _ => {
            let s: String = (0..rng.gen_range(0..10))
                .map(|_| *STRING_CHARS.choose(rng).unwrap())
                .collect();
            Literal::string(&s)
        }
    }
}

pub fn random_store<R: Rng>(rng: &mut R, max: usize) -> TripleStore {
    let n = rng.gen_range(0..=max);
    let mut store = TripleStore::new();
    for _ in 0..n {
        let object = if rng.gen_bool(0.5) {
            Term::Iri(random_iri(rng))
        } else {
            Term::Literal(random_literal(rng))
        };
        store.insert(Triple::new(random_iri(rng), random_iri(rng), object));
    }
    store
}

// ---------------------------------------------------------------------------
// Readings

pub const PEOPLE: &[&str] = &["Father", "Mother", "Son", "Daughter", "Guest-1"];

pub fn random_reading<R: Rng>(rng: &mut R) -> EnvironmentReading {
    let persons: BTreeSet<Iri> = PEOPLE
        .iter()
        .filter(|_| rng.gen_bool(0.4))
        .map(|p| home(p))
        .collect();
    let humidity = match rng.gen_range(0..4) {
        0 => 0.0,
        1 => 100.0,
        _ => rng.gen_range(0.0..=100.0),
    };
    let r = EnvironmentReading::new(
        date(
            rng.gen_range(2000..2099),
            rng.gen_range(1..=12),
            rng.gen_range(1..=28),
        ),
        TimeOfDay::from_seconds(rng.gen_range(0..86_400)).unwrap(),
        humidity,
        rng.gen_range(-40.0..60.0),
        if rng.gen_bool(0.1) {
            0.0
        } else {
            rng.gen_range(0.0..1e5)
        },
        persons,
    )
    .unwrap();
    if rng.gen_bool(0.5) {
        r.with_source(&random_local(rng)).unwrap()
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Query instances and the brute-force enumerator

pub const VARS: &[&str] = &["a", "b", "c", "d"];
const SUBJECTS: &[&str] = &["s1", "s2", "s3", "s4"];
const PREDICATES: &[&str] = &["p", "q", "r"];

fn small_literals() -> Vec<Literal> {
    vec![
        Literal::double(1.0).unwrap(),
        Literal::double(2.5).unwrap(),
        Literal::positive_integer(2).unwrap(),
        Literal::positive_integer(10).unwrap(),
        Literal::string("x"),
        Literal::string("10"),
        Literal::boolean(true),
        Literal::date(date(2007, 4, 11)),
    ]
}

fn small_object<R: Rng>(rng: &mut R) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::Iri(home(SUBJECTS.choose(rng).unwrap())),
        1 => Term::Iri(home(PREDICATES.choose(rng).unwrap())),
        _ => Term::Literal(small_literals().choose(rng).unwrap().clone()),
    }
}

/// A store of at most `max` triples over a deliberately tiny vocabulary so
/// random patterns join often.
pub fn random_small_store<R: Rng>(rng: &mut R, max: usize) -> TripleStore {
    let mut store = TripleStore::new();
    let n = rng.gen_range(0..=max);
    for _ in 0..n {
        store.insert(Triple::new(
            home(SUBJECTS.choose(rng).unwrap()),
            home(PREDICATES.choose(rng).unwrap()),
            small_object(rng),
        ));
    }
    store
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Slot {
    Var(String),
    Const(Term),
}

impl Slot {
    fn text(&self) -> String {
        match self {
            Slot::Var(v) => format!("?{v}"),
            Slot::Const(t) => t.to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QueryCase {
    pub patterns: Vec<[Slot; 3]>,
    pub filters: Vec<(String, Datatype)>,
    pub projection: Vec<String>,
    /// (variable, 0 = bare, 1 = ASC, 2 = DESC)
    pub order: Vec<(String, u8)>,
    pub distinct: bool,
}

impl QueryCase {
    pub fn vars(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for p in &self.patterns {
            for s in p {
                if let Slot::Var(v) = s {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
            }
        }
        seen
    }

    pub fn text(&self) -> String {
        let mut q = String::from("SELECT ");
        if self.distinct {
            q.push_str("DISTINCT ");
        }
        for v in &self.projection {
            q.push_str(&format!("?{v} "));
        }
        q.push_str("WHERE {\n");
        for p in &self.patterns {
            q.push_str(&format!(
                "  {} {} {} .\n",
                p[0].text(),
                p[1].text(),
                p[2].text()
            ));
        }
        for (v, dt) in &self.filters {
            q.push_str(&format!(
                "  FILTER(datatype(?{v}) = xsd:{})\n",
                dt.local_name()
            ));
        }
        q.push('}');
        if !self.order.is_empty() {
            q.push_str(" ORDER BY");
            for (v, style) in &self.order {
                match style {
                    0 => q.push_str(&format!(" ?{v}")),
                    1 => q.push_str(&format!(" ASC(?{v})")),
                    _ => q.push_str(&format!(" DESC(?{v})")),
                }
            }
        }
        q
    }
}

fn random_slot<R: Rng>(rng: &mut R, position: usize) -> Slot {
    if rng.gen_bool(0.55) {
        return Slot::Var(VARS.choose(rng).unwrap().to_string());
    }
    match position {
        0 => Slot::Const(Term::Iri(home(SUBJECTS.choose(rng).unwrap()))),
        1 => Slot::Const(Term::Iri(home(PREDICATES.choose(rng).unwrap()))),
        _ => Slot::Const(small_object(rng)),
    }
}

pub fn random_query<R: Rng>(rng: &mut R) -> QueryCase {
    loop {
        let n = rng.gen_range(1..=3);
        let patterns: Vec<[Slot; 3]> = (0..n)
            .map(|_| {
                [
                    random_slot(rng, 0),
                    random_slot(rng, 1),
                    random_slot(rng, 2),
                ]
            })
            .collect();
        let mut case = QueryCase {
            patterns,
            filters: vec![],
            projection: vec![],
            order: vec![],
            distinct: rng.gen(),
        };
        let vars = case.vars();
        if vars.is_empty() {
            continue;
        }
        let mut projection: Vec<String> =
            vars.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
        if projection.is_empty() {
            projection.push(vars.choose(rng).unwrap().clone());
        }
        projection.shuffle(rng);
        case.projection = projection;
        if rng.gen_bool(0.3) {
            let dt = *Datatype::ALL.choose(rng).unwrap();
            case.filters.push((vars.choose(rng).unwrap().clone(), dt));
        }
        for _ in 0..rng.gen_range(0..=2) {
            case.order
                .push((vars.choose(rng).unwrap().clone(), rng.gen_range(0..3)));
        }
        return case;
    }
}

pub type Assignment = BTreeMap<String, Term>;

fn active_domain(store: &TripleStore) -> Vec<Term> {
    let mut terms = BTreeSet::new();
    for t in store.iter() {
        terms.insert(Term::Iri(t.subject.clone()));
        terms.insert(Term::Iri(t.predicate.clone()));
        terms.insert(t.object.clone());
    }
    terms.into_iter().collect()
}

/// Every total assignment of the case's variables over the store's terms
/// under which every pattern instance is a stored triple and every filter
/// holds.
pub fn brute_force_solutions(store: &TripleStore, case: &QueryCase) -> Vec<Assignment> {
    let vars = case.vars();
    let domain = active_domain(store);
    let id = |t: &Term| domain.binary_search(t).ok();
    let stored: BTreeSet<[usize; 3]> = store
        .iter()
        .map(|t| {
            [
                id(&Term::Iri(t.subject.clone())).unwrap(),
                id(&Term::Iri(t.predicate.clone())).unwrap(),
                id(&t.object).unwrap(),
            ]
        })
        .collect();
    // slot -> Ok(variable index) | Err(term id); a constant outside the
    // domain can never match
    let mut slots = Vec::new();
    for p in &case.patterns {
        let mut ids = [Ok(0); 3];
        for (k, s) in p.iter().enumerate() {
            ids[k] = match s {
                Slot::Var(v) => Ok(vars.iter().position(|x| x == v).unwrap()),
                Slot::Const(t) => match id(t) {
                    Some(i) => Err(i),
                    None => return Vec::new(),
                },
            };
        }
        slots.push(ids);
    }
    let filters: Vec<(usize, Datatype)> = case
        .filters
        .iter()
        .map(|(v, dt)| (vars.iter().position(|x| x == v).unwrap(), *dt))
        .collect();

    let mut out = Vec::new();
    if domain.is_empty() {
        return out;
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let value = |s: &Result<usize, usize>| match s {
            Ok(v) => idx[*v],
            Err(c) => *c,
        };
        let holds = slots
            .iter()
            .all(|p| stored.contains(&[value(&p[0]), value(&p[1]), value(&p[2])]))
            && filters
                .iter()
                .all(|(v, dt)| matches!(&domain[idx[*v]], Term::Literal(l) if l.datatype() == *dt));
        if holds {
            out.push(
                vars.iter()
                    .zip(&idx)
                    .map(|(v, &i)| (v.clone(), domain[i].clone()))
                    .collect(),
            );
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < domain.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn numeric(t: &Term) -> Option<f64> {
    match t {
        Term::Literal(l)
            if matches!(l.datatype(), Datatype::Double | Datatype::PositiveInteger) =>
        {
            l.lexical().parse().ok()
        }
        _ => None,
    }
}

/// Numbers by value first, then every other term in canonical order.
fn oracle_value_cmp(a: &Term, b: &Term) -> Ordering {
    match (numeric(a), numeric(b)) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap().then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

pub fn project(case: &QueryCase, a: &Assignment) -> Vec<Term> {
    case.projection.iter().map(|v| a[v].clone()).collect()
}

/// Expected result rows: solutions sorted by the ORDER BY keys, ties by the
/// projected row, projected, then de-duplicated keeping first occurrences.
pub fn brute_force_rows(store: &TripleStore, case: &QueryCase) -> Vec<Vec<Term>> {
    let mut sols = brute_force_solutions(store, case);
    sols.sort_by(|x, y| {
        for (v, style) in &case.order {
            let o = oracle_value_cmp(&x[v], &y[v]);
            let o = if *style == 2 { o.reverse() } else { o };
            if o != Ordering::Equal {
                return o;
            }
        }
        project(case, x).cmp(&project(case, y))
    });
    let mut rows: Vec<Vec<Term>> = sols.iter().map(|a| project(case, a)).collect();
    if case.distinct {
        let mut seen = BTreeSet::new();
        rows.retain(|r| seen.insert(r.clone()));
    }
    rows
}

/// Checks one instance against the engine. Returns a description of the
/// first mismatch.
pub fn check_query_case(store: &TripleStore, case: &QueryCase) -> Result<(), String> {
    use homectx::sparql::{evaluate, parse_query, solutions};

    let text = case.text();
    let q = parse_query(&text).map_err(|e| format!("{text}\nparse: {e}"))?;

    // pre-DISTINCT multiset of full solutions
    let mut engine_sols: Vec<Assignment> = solutions(store, &q.patterns)
        .into_iter()
        .filter(|b| q.filters.iter().all(|f| f.accepts(b.get(f.variable()))))
        .map(|b| {
            b.iter()
                .map(|(v, t)| (v.name().to_owned(), t.clone()))
                .collect()
        })
        .collect();
    let mut oracle_sols = brute_force_solutions(store, case);
    engine_sols.sort();
    oracle_sols.sort();
    if engine_sols != oracle_sols {
        return Err(format!(
            "{text}\nsolutions differ: engine {} vs oracle {}",
            engine_sols.len(),
            oracle_sols.len()
        ));
    }

    let got = evaluate(store, &q).rows;
    let want = brute_force_rows(store, case);
    if got != want {
        return Err(format!(
            "{text}\nrows differ:\nengine {got:?}\noracle {want:?}"
        ));
    }
    if case.distinct {
        let set: BTreeSet<_> = got.iter().collect();
        if set.len() != got.len() {
            return Err(format!("{text}\nduplicate rows under DISTINCT"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fixture, server harness and traces

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/home_fixture.ttl");
pub const APPLIANCE_QUERY: &str =
    concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/appliance_status.rq");

pub fn fixture_store() -> TripleStore {
    let text = std::fs::read_to_string(FIXTURE).unwrap();
    homectx::rdf::parse_data(&text)
        .unwrap()
        .into_iter()
        .collect()
}

/// (appliance, state, person, activity, priority) expected at 18:00.
pub fn evening_study_commands() -> BTreeSet<(String, bool, String, String, u64)> {
    [
        ("TV", false),
        ("AirConditioner", true),
        ("Light", true),
        ("Projector", true),
    ]
    .into_iter()
    .map(|(a, s)| {
        (
            a.to_owned(),
            s,
            "Son".to_owned(),
            "Self-study".to_owned(),
            5,
        )
    })
    .collect()
}

pub fn reading_line(
    stream: Option<&str>,
    time: &str,
    temp: f64,
    hum: f64,
    ill: f64,
    present: &[&str],
) -> String {
    let payload = homectx::ingest::ReadingPayload {
        stream: stream.map(str::to_owned),
        date: "2007-04-11".into(),
        time: time.into(),
        temperature: temp,
        humidity: hum,
        illumination: ill,
        present: present.iter().map(|p| p.to_string()).collect(),
    };
    homectx::ingest::WireMessage::Reading(payload).to_line()
}

pub struct Server {
    pub addr: std::net::SocketAddr,
    pub engine: std::sync::Arc<homectx::ingest::Engine>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<std::io::Result<()>>>,
}

impl Server {
    pub async fn start(store: TripleStore) -> Server {
        let engine = std::sync::Arc::new(homectx::ingest::Engine::new(
            store,
            homectx::dedup::DedupConfig::default(),
        ));
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let task = tokio::spawn(homectx::ingest::serve(
            listener,
            engine.clone(),
            async move {
                let _ = rx.await;
            },
        ));
        Server {
            addr,
            engine,
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub async fn shutdown(mut self) {
        let _ = self.stop.take().unwrap().send(());
        tokio::time::timeout(std::time::Duration::from_secs(5), self.task.take().unwrap())
            .await
            .expect("server stops")
            .unwrap()
            .unwrap();
    }
}

pub struct Client {
    lines: tokio::io::Lines<tokio::io::BufReader<tokio::net::tcp::OwnedReadHalf>>,
    write: tokio::net::tcp::OwnedWriteHalf,
}

impl Client {
    pub async fn connect(addr: std::net::SocketAddr) -> Client {
        use tokio::io::AsyncBufReadExt;
        let (r, w) = tokio::net::TcpStream::connect(addr)
            .await
            .unwrap()
            .into_split();
        Client {
            lines: tokio::io::BufReader::new(r).lines(),
            write: w,
        }
    }

    pub async fn send(&mut self, line: &str) {
        use tokio::io::AsyncWriteExt;
        self.write
            .write_all(format!("{line}\n").as_bytes())
            .await
            .unwrap();
    }

    /// Next reply, `None` once the server has closed the connection.
    pub async fn recv(&mut self) -> Option<homectx::ingest::WireMessage> {
        let line = tokio::time::timeout(std::time::Duration::from_secs(5), self.lines.next_line())
            .await
            .expect("reply within 5 s")
            .ok()??;
        Some(serde_json::from_str(&line).unwrap())
    }

    pub async fn finish(self) -> Vec<homectx::ingest::WireMessage> {
        let Client {
            mut lines,
            mut write,
        } = self;
        {
            use tokio::io::AsyncWriteExt;
            write.shutdown().await.unwrap();
        }
        let mut out = Vec::new();
        while let Ok(Some(line)) = lines.next_line().await {
            out.push(serde_json::from_str(&line).unwrap());
        }
        out
    }
}

/// Trace mixing the fixture times (so reasoning fires), ticks, and a small
/// generated multi-stream workload.
pub fn mixed_trace() -> Vec<String> {
    use homectx::tracegen::{gen_trace, TraceParams};
    let mut lines = vec![
        reading_line(Some("hall"), "115500", 20.0, 30.0, 400.0, &["Father"]),
        r#"{"type":"tick","time":"180000"}"#.to_owned(),
        reading_line(Some("hall"), "180000", 21.0, 32.0, 350.0, &["Son"]),
        reading_line(Some("hall"), "180500", 21.2, 32.0, 350.0, &["Son"]),
        reading_line(Some("hall"), "200000", 20.0, 33.0, 300.0, &["Father"]),
        r#"{"type":"tick","time":"030000"}"#.to_owned(),
        reading_line(Some("hall"), "200100", 30.0, 33.0, 300.0, &["Father"]),
    ];
    let params = TraceParams {
        streams: 3,
        duration: 300,
        events: 12,
        ..TraceParams::default()
    };
    lines.extend(
        gen_trace(&params, 7, &homectx::dedup::DedupConfig::default())
            .unwrap()
            .lines,
    );
    lines.push(r#"{"type":"tick","time":"200000"}"#.to_owned());
    lines
}

/// Streams `lines` through one live connection and collects every reply.
pub async fn serve_lines(
    store: TripleStore,
    lines: &[String],
) -> (Vec<homectx::ingest::WireMessage>, TripleStore) {
    let server = Server::start(store).await;
    let mut client = Client::connect(server.addr).await;
    for l in lines {
        client.send(l).await;
    }
    let replies = client.finish().await;
    let store = server.engine.snapshot();
    server.shutdown().await;
    (replies, store)
}
