mod common;

use common::{random_reading, random_store};
use homectx::ontology::{reading_to_triples, triples_to_reading, EnvironmentReading};
use homectx::rdf::{parse_data, serialize, Literal, Term, Triple, TripleStore};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn reparse(store: &TripleStore) -> TripleStore {
    let text = serialize(store);
    parse_data(&text)
        .unwrap_or_else(|e| panic!("{e}\n{text}"))
        .into_iter()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn turtle_serialize_parse_identity(seed in any::<u64>()) {
        let store = random_store(&mut ChaCha8Rng::seed_from_u64(seed), 60);
        let back = reparse(&store);
        prop_assert_eq!(&back, &store);
        // canonical text is a fixed point
        prop_assert_eq!(serialize(&back), serialize(&store));
    }

    #[test]
    fn arbitrary_strings_survive(s in any::<String>(), d in any::<f64>()) {
        let subject = common::home("x");
        let mut store = TripleStore::new();
        store.insert(Triple::new(subject.clone(), common::home("label"), Literal::string(&s)));
        if let Ok(lit) = Literal::double(d) {
            prop_assert!(d.is_finite());
            store.insert(Triple::new(subject, common::home("value"), lit));
        } else {
            prop_assert!(!d.is_finite());
        }
        prop_assert_eq!(reparse(&store), store);
    }

    #[test]
    fn reading_triples_bijection(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_reading(&mut rng);
        let triples = reading_to_triples(&r);
        prop_assert_eq!(triples.len(), 5 + r.persons_present().len());
        let store: TripleStore = triples.iter().cloned().collect();
        prop_assert_eq!(store.len(), triples.len());
        prop_assert_eq!(triples_to_reading(&store, r.id()).unwrap(), r.clone());

        // and injective: a different reading never yields the same triples
        let other = random_reading(&mut rng);
        if other != r {
            let other_store: TripleStore = reading_to_triples(&other).into_iter().collect();
            prop_assert_ne!(other_store, store);
        }
    }

    #[test]
    fn reading_survives_turtle_text(seed in any::<u64>()) {
        let r = random_reading(&mut ChaCha8Rng::seed_from_u64(seed));
        let store: TripleStore = reading_to_triples(&r).into_iter().collect();
        let back: EnvironmentReading = triples_to_reading(&reparse(&store), r.id()).unwrap();
        prop_assert_eq!(back, r);
    }
}

proptest! {
    #[test]
    fn reading_survives_wire_line(seed in any::<u64>(), temp in -1e6f64..1e6, ill in 0.0f64..1e9) {
        use homectx::ingest::{decode_line, Inbound, ReadingPayload, WireMessage};
        let r = random_reading(&mut ChaCha8Rng::seed_from_u64(seed));
        let r = EnvironmentReading::new(r.date(), r.time(), r.humidity(), temp, ill, r.persons_present().clone())
            .unwrap()
            .with_source("wire")
            .unwrap();
        let line = WireMessage::Reading(ReadingPayload::from_reading(Some("wire"), &r)).to_line();
        let Ok(Inbound::Reading(p)) = decode_line(&line) else { panic!("{line}") };
        prop_assert_eq!(p.to_reading("wire").unwrap(), r);
    }
}

#[test]
fn fixture_is_canonical_after_one_pass() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/home_fixture.ttl"
    ))
    .unwrap();
    let store: TripleStore = parse_data(&text).unwrap().into_iter().collect();
    assert_eq!(reparse(&store), store);
    let fathers = store
        .iter()
        .filter(|t| t.object == Term::Iri(common::home("Father")))
        .count();
    assert!(fathers >= 2);
}
