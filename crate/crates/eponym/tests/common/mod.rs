//! Shared fixtures: the Wilhelmstraße worked example, a synthetic benchmark
//! with popularity traps, and raw input files for driving the binary end to
//! end.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use eponym_core::dag::LocationNode;
use eponym_core::ids::EntityId;
use eponym_core::index::{build_indexes, IndexBundle};
use eponym_core::person::{PersonRecord, RelationKind};
use eponym_core::street::StreetRecord;

pub fn id(s: &str) -> EntityId {
    EntityId::from(s)
}

/// The worked-example world: Wilhelmstraße in Mitte, the three Wilhelm
/// candidates, and enough similarly shaped training streets for the
/// classifier to learn that spatial relatedness beats popularity.
pub struct WilhelmFixture {
    pub bundle: IndexBundle,
    /// (street, true person) pairs; `streets[0]` is the Wilhelmstraße.
    pub ground_truth: Vec<(StreetRecord, EntityId)>,
}

pub fn wilhelm_locations() -> Vec<LocationNode> {
    vec![
        LocationNode::new("Q100", "Deutschland"),
        LocationNode::new("Q110", "Brandenburg").with_parents(["Q100"]),
        LocationNode::new("Q120", "Niedersachsen").with_parents(["Q100"]),
        LocationNode::new("Q130", "Baden-Württemberg").with_parents(["Q100"]),
        LocationNode::new("Q200", "Berlin").with_parents(["Q100"]),
        LocationNode::new("Q300", "Mitte").with_parents(["Q200"]),
        LocationNode::new("Q310", "Kreuzberg").with_parents(["Q200"]),
        LocationNode::new("Q210", "Potsdam").with_parents(["Q110"]),
        LocationNode::new("Q211", "Friedenskirche").with_parents(["Q210"]),
        LocationNode::new("Q212", "Garnisonkirche").with_parents(["Q210"]),
        LocationNode::new("Q220", "Wiedensahl").with_parents(["Q120"]),
        LocationNode::new("Q240", "Stuttgart").with_parents(["Q130"]),
        LocationNode::new("Q9000", "Wilhelmstraße").with_parents(["Q300"]),
    ]
}

pub fn wilhelm_persons() -> Vec<PersonRecord> {
    let mut persons = Vec::new();

    let mut friedrich = PersonRecord::new("Q501", "Friedrich Wilhelm I.");
    friedrich.first_names = vec!["Friedrich".into(), "Wilhelm".into()];
    friedrich.last_names = vec!["Wilhelm".into()];
    friedrich.occupations = vec![id("QOCC1"), id("QPOS1")];
    friedrich.locations = vec![
        (RelationKind::Born, id("Q200")),
        (RelationKind::Died, id("Q210")),
        (RelationKind::Buried, id("Q211")),
        (RelationKind::Buried, id("Q212")),
        (RelationKind::WorkLocation, id("Q200")),
    ];
    friedrich.link_count = 800;
    persons.push(friedrich);

    let mut busch = PersonRecord::new("Q502", "Wilhelm Busch");
    busch.first_names = vec!["Wilhelm".into()];
    busch.last_names = vec!["Busch".into()];
    busch.occupations = vec![id("QOCC2"), id("QOCC3")];
    busch.locations = vec![
        (RelationKind::Born, id("Q220")),
        (RelationKind::Died, id("Q220")),
    ];
    busch.link_count = 3000;
    persons.push(busch);

    let mut paul = PersonRecord::new("Q503", "Paul Wilhelm");
    paul.first_names = vec!["Paul".into()];
    paul.last_names = vec!["Wilhelm".into()];
    paul.aliases = vec!["Paul von Württemberg".into()];
    paul.occupations = vec![id("QOCC4")];
    paul.locations = vec![(RelationKind::Born, id("Q240"))];
    paul.link_count = 50;
    persons.push(paul);

    let mut adenauer = PersonRecord::new("Q504", "Konrad Adenauer");
    adenauer.first_names = vec!["Konrad".into()];
    adenauer.last_names = vec!["Adenauer".into()];
    adenauer.occupations = vec![id("QOCC5")];
    adenauer.locations = vec![(RelationKind::Born, id("Q240"))];
    adenauer.link_count = 5000;
    persons.push(adenauer);

    // Training persons: per street one true person born in the street's
    // district plus one famous same-name impostor without locations.
    for i in 0..16 {
        let surname = format!("Nachname{i:02}");
        let district = if i % 2 == 0 { "Q300" } else { "Q310" };

        let mut truth = PersonRecord::new(format!("Q71{i:02}"), format!("Erika {surname}"));
        truth.first_names = vec!["Erika".into()];
        truth.last_names = vec![surname.clone()];
        truth.occupations = vec![id(&format!("QOCC{}", 1 + i % 5))];
        truth.locations = vec![(RelationKind::Born, id(district))];
        truth.link_count = 100 + i as u64;
        persons.push(truth);

        let mut famous = PersonRecord::new(format!("Q72{i:02}"), format!("Max {surname}"));
        famous.first_names = vec!["Max".into()];
        famous.last_names = vec![surname];
        famous.occupations = vec![id(&format!("QX{}", i % 4))];
        famous.link_count = 10_000 + i as u64;
        persons.push(famous);
    }
    persons
}

/// Street in the fixture hierarchy; `district` is Q300 (Mitte) or Q310
/// (Kreuzberg).
fn fixture_street(
    osm_id: &str,
    name: &str,
    point: (f64, f64),
    district: &str,
    wikidata: Option<&str>,
    bundle: &IndexBundle,
) -> StreetRecord {
    let mut street = StreetRecord::new(osm_id, name, point, wikidata.map(id));
    street.attach_chain(&id(district), bundle.dag());
    street
}

pub fn wilhelm_fixture() -> WilhelmFixture {
    let (bundle, _) = build_indexes(wilhelm_persons(), wilhelm_locations());

    let mut ground_truth = Vec::new();
    let wilhelmstrasse = fixture_street(
        "way/1",
        "Wilhelmstraße",
        (52.51, 13.38),
        "Q300",
        Some("Q9000"),
        &bundle,
    );
    assert_eq!(
        wilhelmstrasse.chain.len(),
        4,
        "street, Mitte, Berlin, Germany"
    );
    ground_truth.push((wilhelmstrasse, id("Q501")));

    for i in 0..16 {
        let district = if i % 2 == 0 { "Q300" } else { "Q310" };
        let lat = 52.46 + (i as f64) * 0.001 + if i % 2 == 0 { 0.05 } else { 0.0 };
        let street = fixture_street(
            &format!("way/{}", 10 + i),
            &format!("Nachname{i:02}straße"),
            (lat, 13.40),
            district,
            None,
            &bundle,
        );
        ground_truth.push((street, id(&format!("Q71{i:02}"))));
    }
    ground_truth.push((
        fixture_street(
            "way/40",
            "Konrad-Adenauer-Straße",
            (52.46, 13.41),
            "Q310",
            None,
            &bundle,
        ),
        id("Q504"),
    ));

    WilhelmFixture {
        bundle,
        ground_truth,
    }
}

// ── synthetic benchmark ────────────────────────────────────────────────

/// 300 streets, 1000 persons: every true person is born in the street's
/// city, every street also retrieves ten same-name distractors with much
/// higher link counts and no spatial relations. Popularity ranking is wrong
/// everywhere; the classifier has to use the containment features.
pub struct SyntheticBenchmark {
    pub bundle: IndexBundle,
    pub ground_truth: Vec<(StreetRecord, EntityId)>,
}

const GROUPS: usize = 70;

fn group_of_street(street: usize) -> usize {
    // 60 groups of four streets, then 10 groups of six.
    if street < 240 {
        street / 4
    } else {
        60 + (street - 240) / 6
    }
}

pub fn synthetic_benchmark(seed: u64) -> SyntheticBenchmark {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut locations = vec![LocationNode::new("QLAND", "Land")];
    for state in 0..10 {
        locations.push(LocationNode::new(format!("QS{state}"), "State").with_parents(["QLAND"]));
    }
    for city in 0..300 {
        locations.push(
            LocationNode::new(format!("QC{city:03}"), "City")
                .with_parents([format!("QS{}", city % 10)]),
        );
    }

    let mut persons = Vec::new();
    let mut ground_truth = Vec::new();

    // Ten distractors per surname group.
    for group in 0..GROUPS {
        for j in 0..10 {
            let mut famous = PersonRecord::new(
                format!("QD{group:02}_{j}"),
                format!("Promi{j} Fam{group:02}"),
            );
            famous.first_names = vec![format!("Promi{j}")];
            famous.last_names = vec![format!("Fam{group:02}")];
            famous.occupations = vec![id(&format!("QX{}", j % 5))];
            famous.link_count = 10_000 + (group * 100 + j * 13) as u64;
            persons.push(famous);
        }
    }

    for street_idx in 0..300 {
        let group = group_of_street(street_idx);
        let surname = format!("Fam{group:02}");
        let city = format!("QC{street_idx:03}");

        let mut truth = PersonRecord::new(
            format!("QT{street_idx:03}"),
            format!("Vorname{street_idx:03} {surname}"),
        );
        truth.first_names = vec![format!("Vorname{street_idx:03}")];
        truth.last_names = vec![surname.clone()];
        truth.occupations = vec![
            id(&format!("QJ{:02}", street_idx % 25)),
            id(&format!("QJ{:02}", (street_idx + 7) % 25)),
        ];
        truth.locations = vec![(RelationKind::Born, id(&city))];
        truth.link_count = 50 + rng.random_range(0..200);
        let truth_id = truth.id.clone();
        persons.push(truth);

        let name = match street_idx % 3 {
            0 => format!("{surname}straße"),
            1 => format!("{surname}-Straße"),
            _ => format!("{surname}weg"),
        };
        let mut street = StreetRecord::new(format!("way/{street_idx}"), name, (0.0, 0.0), None);
        street.chain = vec![
            street.element().clone(),
            id(&city),
            id(&format!("QS{}", street_idx % 10)),
            id("QLAND"),
        ];
        street.chain_resolved = true;
        street.etymology_person = Some(truth_id.clone());
        ground_truth.push((street, truth_id));
    }

    assert_eq!(persons.len(), 1000);
    assert_eq!(ground_truth.len(), 300);
    let (bundle, _) = build_indexes(persons, locations);
    SyntheticBenchmark {
        bundle,
        ground_truth,
    }
}

// ── raw input files for the end-to-end runs ────────────────────────────

fn label_json(language: &str, value: &str) -> String {
    format!(r#""{language}":{{"language":"{language}","value":"{value}"}}"#)
}

fn entity_claim(property: &str, targets: &[&str]) -> String {
    let statements: Vec<String> = targets
        .iter()
        .map(|t| {
            format!(
                r#"{{"mainsnak":{{"snaktype":"value","datavalue":{{"type":"wikibase-entityid","value":{{"entity-type":"item","id":"{t}"}}}}}},"type":"statement"}}"#
            )
        })
        .collect();
    format!(r#""{property}":[{}]"#, statements.join(","))
}

fn entity_line(entity_id: &str, label: &str, aliases: &[&str], claims: &[String]) -> String {
    let alias_json = if aliases.is_empty() {
        String::new()
    } else {
        let list: Vec<String> = aliases
            .iter()
            .map(|a| format!(r#"{{"language":"de","value":"{a}"}}"#))
            .collect();
        format!(r#","aliases":{{"de":[{}]}}"#, list.join(","))
    };
    format!(
        r#"{{"type":"item","id":"{entity_id}","labels":{{{}}}{alias_json},"claims":{{{}}},"sitelinks":{{}}}}"#,
        label_json("de", label),
        claims.join(",")
    )
}

fn dump_location(entity_id: &str, label: &str, parent: Option<&str>, classes: &[&str]) -> String {
    let mut claims = Vec::new();
    if !classes.is_empty() {
        claims.push(entity_claim("P31", classes));
    }
    if let Some(parent) = parent {
        claims.push(entity_claim("P131", &[parent]));
    }
    entity_line(entity_id, label, &[], &claims)
}

fn dump_person(person: &PersonRecord) -> String {
    let mut claims = vec![entity_claim("P31", &["Q5"])];
    if !person.occupations.is_empty() {
        let occs: Vec<&str> = person.occupations.iter().map(|o| o.as_str()).collect();
        claims.push(entity_claim("P106", &occs));
    }
    for (kind, prop) in [
        (RelationKind::Born, "P19"),
        (RelationKind::Died, "P20"),
        (RelationKind::Buried, "P119"),
        (RelationKind::EducatedAt, "P69"),
        (RelationKind::WorkLocation, "P937"),
    ] {
        let targets: Vec<&str> = person
            .locations
            .iter()
            .filter(|(k, _)| *k == kind)
            .map(|(_, l)| l.as_str())
            .collect();
        if !targets.is_empty() {
            claims.push(entity_claim(prop, &targets));
        }
    }
    let aliases: Vec<&str> = person.aliases.iter().map(String::as_str).collect();
    entity_line(person.id.as_str(), &person.full_name, &aliases, &claims)
}

/// Write the fixture world as raw pipeline inputs: an entity dump, a
/// link-count table and an OSM XML extract with boundary polygons for
/// Mitte, Kreuzberg and Berlin.
pub fn write_cli_fixture(dir: &Path) -> CliFixture {
    let dump_path = dir.join("dump.ndjson");
    let link_counts_path = dir.join("link_counts.tsv");
    let extract_path = dir.join("extract.osm");

    let mut lines: Vec<String> = Vec::new();
    lines.push(dump_location("Q100", "Deutschland", None, &["Q6256"]));
    for (entity, label, parent) in [
        ("Q110", "Brandenburg", "Q100"),
        ("Q120", "Niedersachsen", "Q100"),
        ("Q130", "Baden-Württemberg", "Q100"),
        ("Q200", "Berlin", "Q100"),
        ("Q300", "Mitte", "Q200"),
        ("Q310", "Kreuzberg", "Q200"),
        ("Q210", "Potsdam", "Q110"),
        ("Q211", "Friedenskirche", "Q210"),
        ("Q212", "Garnisonkirche", "Q210"),
        ("Q220", "Wiedensahl", "Q120"),
        ("Q240", "Stuttgart", "Q130"),
    ] {
        lines.push(dump_location(entity, label, Some(parent), &[]));
    }
    // The Wilhelmstraße street entity: named after Friedrich Wilhelm I.
    lines.push(format!(
        r#"{{"type":"item","id":"Q9000","labels":{{{}}},"claims":{{{},{},{}}},"sitelinks":{{}}}}"#,
        label_json("de", "Wilhelmstraße"),
        entity_claim("P31", &["Q79007"]),
        entity_claim("P131", &["Q300"]),
        entity_claim("P138", &["Q501"]),
    ));
    // Name entities exercising the given-name claim resolution path.
    lines.push(dump_location("Q801", "Friedrich", None, &["Q12308941"]));
    lines.push(dump_location("Q802", "Wilhelm", None, &["Q12308941"]));

    for person in wilhelm_persons() {
        if person.id.as_str() == "Q501" {
            // Friedrich Wilhelm I. resolves his given names via claims.
            let mut claims = vec![
                entity_claim("P31", &["Q5"]),
                entity_claim("P735", &["Q801", "Q802"]),
                entity_claim("P106", &["QOCC1"]),
                entity_claim("P39", &["QPOS1"]),
                entity_claim("P19", &["Q200"]),
                entity_claim("P20", &["Q210"]),
                entity_claim("P119", &["Q211", "Q212"]),
            ];
            claims.push(entity_claim("P937", &["Q200"]));
            lines.push(entity_line("Q501", "Friedrich Wilhelm I.", &[], &claims));
        } else {
            lines.push(dump_person(&person));
        }
    }
    // A malformed line the streaming parser must skip and count.
    lines.push(String::from("{this is not json"));

    let dump_body = format!("[\n{},\n]\n", lines.join(",\n"));
    std::fs::write(&dump_path, dump_body).unwrap();

    let mut link_counts = String::new();
    for person in wilhelm_persons() {
        if person.link_count > 0 {
            link_counts.push_str(&format!("{}\t{}\n", person.id, person.link_count));
        }
    }
    std::fs::write(&link_counts_path, link_counts).unwrap();

    std::fs::write(&extract_path, osm_extract_xml()).unwrap();

    CliFixture {
        dump: dump_path,
        link_counts: link_counts_path,
        extract: extract_path,
    }
}

pub struct CliFixture {
    pub dump: std::path::PathBuf,
    pub link_counts: std::path::PathBuf,
    pub extract: std::path::PathBuf,
}

#[derive(Default)]
struct XmlParts {
    next_node: i64,
    nodes: String,
    ways: String,
    relations: String,
}

impl XmlParts {
    fn street_way(&mut self, way_id: i64, name: &str, lat: f64, lon: f64, tags: &str) {
        let a = self.next_node;
        let b = self.next_node + 1;
        let c = self.next_node + 2;
        self.next_node += 3;
        self.nodes.push_str(&format!(
            "  <node id=\"{a}\" lat=\"{}\" lon=\"{}\"/>\n  <node id=\"{b}\" lat=\"{lat}\" lon=\"{lon}\"/>\n  <node id=\"{c}\" lat=\"{}\" lon=\"{}\"/>\n",
            lat - 0.0005,
            lon - 0.0005,
            lat + 0.0005,
            lon + 0.0005
        ));
        self.ways.push_str(&format!(
            "  <way id=\"{way_id}\">\n    <nd ref=\"{a}\"/><nd ref=\"{b}\"/><nd ref=\"{c}\"/>\n    <tag k=\"highway\" v=\"residential\"/>\n    <tag k=\"name\" v=\"{name}\"/>\n{tags}  </way>\n"
        ));
    }

    /// Boundary rectangle split over two member ways.
    #[allow(clippy::too_many_arguments)]
    fn boundary(&mut self, rel: i64, wikidata: &str, name: &str, level: u8, s: f64, w: f64, n: f64, e: f64) {
        let a = self.next_node;
        let b = self.next_node + 1;
        let c = self.next_node + 2;
        let d = self.next_node + 3;
        self.next_node += 4;
        self.nodes.push_str(&format!(
            "  <node id=\"{a}\" lat=\"{s}\" lon=\"{w}\"/>\n  <node id=\"{b}\" lat=\"{s}\" lon=\"{e}\"/>\n  <node id=\"{c}\" lat=\"{n}\" lon=\"{e}\"/>\n  <node id=\"{d}\" lat=\"{n}\" lon=\"{w}\"/>\n"
        ));
        let w1 = rel * 10;
        let w2 = rel * 10 + 1;
        self.ways.push_str(&format!(
            "  <way id=\"{w1}\">\n    <nd ref=\"{a}\"/><nd ref=\"{b}\"/><nd ref=\"{c}\"/>\n  </way>\n  <way id=\"{w2}\">\n    <nd ref=\"{c}\"/><nd ref=\"{d}\"/><nd ref=\"{a}\"/>\n  </way>\n"
        ));
        self.relations.push_str(&format!(
            "  <relation id=\"{rel}\">\n    <member type=\"way\" ref=\"{w1}\" role=\"outer\"/>\n    <member type=\"way\" ref=\"{w2}\" role=\"outer\"/>\n    <tag k=\"type\" v=\"boundary\"/>\n    <tag k=\"boundary\" v=\"administrative\"/>\n    <tag k=\"admin_level\" v=\"{level}\"/>\n    <tag k=\"name\" v=\"{name}\"/>\n    <tag k=\"wikidata\" v=\"{wikidata}\"/>\n  </relation>\n"
        ));
    }
}

fn osm_extract_xml() -> String {
    let mut parts = XmlParts {
        next_node: 1000,
        ..XmlParts::default()
    };

    parts.street_way(
        1,
        "Wilhelmstraße",
        52.51,
        13.38,
        "    <tag k=\"wikidata\" v=\"Q9000\"/>\n    <tag k=\"name:etymology:wikidata\" v=\"Q501\"/>\n",
    );
    for i in 0..16i64 {
        let lat = if i % 2 == 0 {
            52.51 + (i as f64) * 0.001
        } else {
            52.46 + (i as f64) * 0.001
        };
        parts.street_way(
            10 + i,
            &format!("Nachname{i:02}straße"),
            lat,
            13.40,
            &format!("    <tag k=\"name:etymology:wikidata\" v=\"Q71{i:02}\"/>\n"),
        );
    }
    parts.street_way(
        40,
        "Konrad-Adenauer-Straße",
        52.46,
        13.41,
        "    <tag k=\"name:etymology:wikidata\" v=\"Q504\"/>\n",
    );
    // Streets without etymology: one linkable, one with no candidates.
    parts.street_way(50, "Buschweg", 52.52, 13.39, "");
    parts.street_way(51, "Zzyzxweg", 52.47, 13.42, "");

    parts.boundary(300, "Q300", "Mitte", 9, 52.50, 13.35, 52.56, 13.45);
    parts.boundary(310, "Q310", "Kreuzberg", 9, 52.44, 13.35, 52.50, 13.45);
    parts.boundary(200, "Q200", "Berlin", 4, 52.30, 13.10, 52.70, 13.80);

    let mut xml = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n");
    xml.push_str(&parts.nodes);
    xml.push_str(&parts.ways);
    xml.push_str(&parts.relations);
    xml.push_str("</osm>\n");
    xml
}

/// Gold map view of a ground-truth list.
pub fn gold_map(gt: &[(StreetRecord, EntityId)]) -> BTreeMap<String, EntityId> {
    gt.iter()
        .map(|(street, person)| (street.osm_id.clone(), person.clone()))
        .collect()
}
