mod common;

use common::golden_facts::{cars, covid, golden_captions, golden_facts};
use factweaver::facts::validate;
use factweaver::narrate::caption;

#[test]
fn every_template_matches_its_golden() {
    let (cars, covid) = (cars(), covid());
    let goldens = golden_captions();
    let facts = golden_facts();
    assert_eq!(goldens.len(), 10);
    for ((name, fact, on_covid), (gname, want)) in facts.iter().zip(&goldens) {
        assert_eq!(name, gname);
        let table = if *on_covid { &covid } else { &cars };
        validate(fact, table.schema()).unwrap();
        assert_eq!(&caption(fact, table).unwrap(), want, "{name}");
    }
}

#[test]
fn captions_never_leak_placeholders() {
    let (cars, covid) = (cars(), covid());
    for (name, fact, on_covid) in golden_facts() {
        let c = caption(&fact, if on_covid { &covid } else { &cars }).unwrap();
        assert!(!c.contains("{{") && !c.contains("}}"), "{name}: {c}");
        assert!(c.ends_with('.'));
    }
}
