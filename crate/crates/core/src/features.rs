//! The 30 features of a street–candidate pair: link count, four name
//! containment flags, twenty occupation flags and five spatial containment
//! scores.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::affix::{truncate, AffixSet};
use crate::dag::SpatialDag;
use crate::ids::EntityId;
use crate::index::IndexBundle;
use crate::normalize::{contains_subsequence, tokenize};
use crate::person::{PersonRecord, RelationKind};
use crate::street::StreetRecord;

pub const OCCUPATION_SLOTS: usize = 20;
pub const FEATURE_DIM: usize = 1 + 4 + OCCUPATION_SLOTS + 5;

/// One street–candidate feature vector. The serialized order is fixed:
/// link count, the four name flags, the twenty occupation flags, then the
/// five spatial scores in [`RelationKind`] order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureVector {
    pub link_count: f64,
    pub name_full: bool,
    pub name_first: bool,
    pub name_last: bool,
    pub name_alias: bool,
    pub occupation_flags: [bool; OCCUPATION_SLOTS],
    pub spatial_born: f64,
    pub spatial_died: f64,
    pub spatial_buried: f64,
    pub spatial_educated: f64,
    pub spatial_work: f64,
}

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector {
            link_count: 0.0,
            name_full: false,
            name_first: false,
            name_last: false,
            name_alias: false,
            occupation_flags: [false; OCCUPATION_SLOTS],
            spatial_born: 0.0,
            spatial_died: 0.0,
            spatial_buried: 0.0,
            spatial_educated: 0.0,
            spatial_work: 0.0,
        }
    }
}

impl FeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        out[0] = self.link_count;
        out[1] = f64::from(u8::from(self.name_full));
        out[2] = f64::from(u8::from(self.name_first));
        out[3] = f64::from(u8::from(self.name_last));
        out[4] = f64::from(u8::from(self.name_alias));
        for (i, flag) in self.occupation_flags.iter().enumerate() {
            out[5 + i] = f64::from(u8::from(*flag));
        }
        out[5 + OCCUPATION_SLOTS] = self.spatial_born;
        out[6 + OCCUPATION_SLOTS] = self.spatial_died;
        out[7 + OCCUPATION_SLOTS] = self.spatial_buried;
        out[8 + OCCUPATION_SLOTS] = self.spatial_educated;
        out[9 + OCCUPATION_SLOTS] = self.spatial_work;
        out
    }
}

/// Column names matching [`FeatureVector::to_array`], for feature dumps.
pub fn feature_names() -> Vec<String> {
    let mut names = alloc::vec![
        String::from("link_count"),
        String::from("name_full"),
        String::from("name_first"),
        String::from("name_last"),
        String::from("name_alias"),
    ];
    for i in 0..OCCUPATION_SLOTS {
        names.push(alloc::format!("occ_{i:02}"));
    }
    for kind in RelationKind::ALL {
        names.push(alloc::format!("spatial_{}", kind.as_str()));
    }
    names
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("no positive examples to derive an occupation vocabulary from")]
    EmptyPositives,
    #[error("occupation vocabulary needs exactly {expected} distinct entries, got {got}")]
    WrongVocabSize { expected: usize, got: usize },
    #[error("unknown person id {0}")]
    UnknownPerson(EntityId),
}

/// The twenty occupations whose flags enter the feature vector; order is
/// fixed at creation and persisted with the model.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OccupationVocabulary {
    ids: Vec<EntityId>,
}

impl OccupationVocabulary {
    pub fn new(ids: Vec<EntityId>) -> Result<Self, FeatureError> {
        let mut seen = BTreeSet::new();
        if ids.len() != OCCUPATION_SLOTS || !ids.iter().all(|id| seen.insert(id.clone())) {
            return Err(FeatureError::WrongVocabSize {
                expected: OCCUPATION_SLOTS,
                got: ids.len(),
            });
        }
        Ok(OccupationVocabulary { ids })
    }

    pub fn ids(&self) -> &[EntityId] {
        &self.ids
    }

    /// Filler id for vocabulary slots that could not be populated from data.
    /// Real knowledge-graph ids never start with "Q0", so these match no
    /// person.
    pub fn padding_id(slot: usize) -> EntityId {
        EntityId::new(alloc::format!("Q0{slot:02}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VocabReport {
    pub from_positives: usize,
    pub from_global: usize,
    pub padded: usize,
}

/// The most common occupations among the distinct persons of the training
/// positives, ties broken by lexicographic id. When fewer than twenty
/// occupations occur, the gap is filled by global occupation frequency (and,
/// for tiny data sets, by padding ids); the report says how much filling
/// happened.
pub fn top_occupations<'a, I>(
    positive_persons: I,
    bundle: &IndexBundle,
) -> Result<(OccupationVocabulary, VocabReport), FeatureError>
where
    I: IntoIterator<Item = &'a EntityId>,
{
    let distinct: BTreeSet<&EntityId> = positive_persons.into_iter().collect();
    if distinct.is_empty() {
        return Err(FeatureError::EmptyPositives);
    }

    let rank = |counts: BTreeMap<&EntityId, usize>| -> Vec<EntityId> {
        let mut ranked: Vec<(&EntityId, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.into_iter().map(|(id, _)| id.clone()).collect()
    };

    let mut counts: BTreeMap<&EntityId, usize> = BTreeMap::new();
    for person in &distinct {
        let held: BTreeSet<&EntityId> = bundle.occupations_of(person).iter().collect();
        for occupation in held {
            *counts.entry(occupation).or_default() += 1;
        }
    }
    let mut ids = rank(counts);
    ids.truncate(OCCUPATION_SLOTS);
    let mut report = VocabReport {
        from_positives: ids.len(),
        ..VocabReport::default()
    };

    if ids.len() < OCCUPATION_SLOTS {
        let mut global: BTreeMap<&EntityId, usize> = BTreeMap::new();
        for person in bundle.persons() {
            let held: BTreeSet<&EntityId> = person.occupations.iter().collect();
            for occupation in held {
                *global.entry(occupation).or_default() += 1;
            }
        }
        for id in rank(global) {
            if ids.len() == OCCUPATION_SLOTS {
                break;
            }
            if !ids.contains(&id) {
                ids.push(id);
                report.from_global += 1;
            }
        }
    }
    let mut slot = 0;
    while ids.len() < OCCUPATION_SLOTS {
        let pad = OccupationVocabulary::padding_id(slot);
        slot += 1;
        if !ids.contains(&pad) {
            ids.push(pad);
            report.padded += 1;
        }
    }

    Ok((OccupationVocabulary::new(ids)?, report))
}

/// How far a location and a street contain each other: the overlap of the
/// two containment chains over the street-chain length, in [0, 1]. Unknown
/// locations and locations sharing nothing with the street's chain (outside
/// the country of interest) score 0; the street's own element scores 1.
pub fn containment_score(street_chain: &[EntityId], location: &EntityId, dag: &SpatialDag) -> f64 {
    if street_chain.is_empty() {
        return 0.0;
    }
    if location == &street_chain[0] {
        return 1.0;
    }
    let street_set: BTreeSet<&EntityId> = street_chain.iter().collect();
    let overlap = dag
        .chain_of(location)
        .iter()
        .filter(|id| street_set.contains(id))
        .count();
    overlap as f64 / street_chain.len() as f64
}

/// The five spatial scores of a person against a street: per relation kind,
/// the maximum containment score over the person's locations of that kind.
pub fn spatial_features(
    street: &StreetRecord,
    locations: &[(RelationKind, EntityId)],
    dag: &SpatialDag,
) -> [f64; 5] {
    let mut scores = [0.0; 5];
    for (kind, location) in locations {
        let score = containment_score(&street.chain, location, dag);
        let slot = &mut scores[kind.index()];
        if score > *slot {
            *slot = score;
        }
    }
    scores
}

/// The four name flags: does the person's full name, a first-name token, a
/// last-name token or an alias occur in the street name? Matching is at
/// token boundaries over the street's truncation variants, which covers
/// glued compounds ("Wilhelm" inside "Wilhelmstraße") the same way retrieval
/// does.
pub fn name_match_features(
    person: &PersonRecord,
    street_name: &str,
    affixes: &AffixSet,
) -> (bool, bool, bool, bool) {
    let mut forms: Vec<Vec<String>> = truncate(street_name, affixes)
        .iter()
        .map(|v| tokenize(v))
        .collect();
    let raw = tokenize(street_name);
    if !forms.contains(&raw) {
        forms.push(raw);
    }

    let seq_match = |needle: &str| -> bool {
        let tokens = tokenize(needle);
        !tokens.is_empty() && forms.iter().any(|form| contains_subsequence(form, &tokens))
    };
    let token_match = |names: &[String]| -> bool {
        names
            .iter()
            .flat_map(|n| tokenize(n))
            .any(|token| forms.iter().any(|form| form.contains(&token)))
    };

    (
        seq_match(&person.full_name),
        token_match(&person.first_names),
        token_match(&person.last_names),
        person.aliases.iter().any(|a| seq_match(a)),
    )
}

/// Assemble the full 30-dimensional vector for a street–candidate pair.
pub fn extract_features(
    street: &StreetRecord,
    person_id: &EntityId,
    bundle: &IndexBundle,
    vocab: &OccupationVocabulary,
    affixes: &AffixSet,
) -> Result<FeatureVector, FeatureError> {
    let person = bundle
        .person(person_id)
        .ok_or_else(|| FeatureError::UnknownPerson(person_id.clone()))?;

    let (name_full, name_first, name_last, name_alias) =
        name_match_features(person, &street.name, affixes);

    let held = bundle.occupations_of(person_id);
    let mut occupation_flags = [false; OCCUPATION_SLOTS];
    for (slot, occupation) in vocab.ids().iter().enumerate() {
        occupation_flags[slot] = held.contains(occupation);
    }

    let spatial = spatial_features(street, bundle.locations_of(person_id), bundle.dag());

    Ok(FeatureVector {
        link_count: person.link_count as f64,
        name_full,
        name_first,
        name_last,
        name_alias,
        occupation_flags,
        spatial_born: spatial[0],
        spatial_died: spatial[1],
        spatial_buried: spatial[2],
        spatial_educated: spatial[3],
        spatial_work: spatial[4],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::LocationNode;
    use crate::index::build_indexes;

    fn id(s: &str) -> EntityId {
        EntityId::from(s)
    }

    fn dag() -> SpatialDag {
        SpatialDag::build([
            LocationNode::new("Q300", "Mitte").with_parents(["Q200"]),
            LocationNode::new("Q200", "Berlin").with_parents(["Q100"]),
            LocationNode::new("Q210", "Potsdam").with_parents(["Q100"]),
            LocationNode::new("Q211", "Friedenskirche").with_parents(["Q210"]),
            LocationNode::new("Q100", "Germany"),
        ])
        .0
    }

    fn wilhelmstrasse() -> StreetRecord {
        let mut street = StreetRecord::new("way/1", "Wilhelmstraße", (52.51, 13.38), None);
        street.attach_chain(&id("Q300"), &dag());
        street
    }

    #[test]
    fn berlin_scores_half_against_the_fig3_chain() {
        // Street chain [street, Mitte, Berlin, Germany]; Berlin's chain
        // [Berlin, Germany] overlaps two of four elements.
        let street = wilhelmstrasse();
        assert_eq!(street.chain.len(), 4);
        assert_eq!(containment_score(&street.chain, &id("Q200"), &dag()), 0.5);
    }

    #[test]
    fn the_street_element_scores_one() {
        let street = wilhelmstrasse();
        let element = street.element().clone();
        assert_eq!(containment_score(&street.chain, &element, &dag()), 1.0);
    }

    #[test]
    fn unknown_locations_score_zero() {
        let street = wilhelmstrasse();
        assert_eq!(containment_score(&street.chain, &id("Q999"), &dag()), 0.0);
    }

    #[test]
    fn chain_elements_score_by_depth() {
        let street = wilhelmstrasse();
        let d = dag();
        assert_eq!(containment_score(&street.chain, &id("Q300"), &d), 0.75);
        assert_eq!(containment_score(&street.chain, &id("Q100"), &d), 0.25);
    }

    #[test]
    fn extending_shared_tail_never_decreases_the_score() {
        let street = wilhelmstrasse();
        let d = dag();
        // Germany ⊂ Berlin ⊂ Mitte chains share ever longer tails.
        let s_country = containment_score(&street.chain, &id("Q100"), &d);
        let s_city = containment_score(&street.chain, &id("Q200"), &d);
        let s_district = containment_score(&street.chain, &id("Q300"), &d);
        assert!(s_city >= s_country);
        assert!(s_district >= s_city);
    }

    #[test]
    fn spatial_features_take_the_best_location_per_kind() {
        let street = wilhelmstrasse();
        // Buried twice: once in a Potsdam church (1/4 shared: Germany), once
        // in Berlin itself (2/4).
        let locations = alloc::vec![
            (RelationKind::Buried, id("Q211")),
            (RelationKind::Buried, id("Q200")),
        ];
        let scores = spatial_features(&street, &locations, &dag());
        assert_eq!(scores[RelationKind::Buried.index()], 0.5);
    }

    #[test]
    fn missing_relations_score_zero() {
        let street = wilhelmstrasse();
        let scores = spatial_features(&street, &[], &dag());
        assert_eq!(scores, [0.0; 5]);
    }

    #[test]
    fn born_in_berlin_scores_half() {
        let street = wilhelmstrasse();
        let locations = alloc::vec![(RelationKind::Born, id("Q200"))];
        let scores = spatial_features(&street, &locations, &dag());
        assert_eq!(scores[RelationKind::Born.index()], 0.5);
    }

    fn affixes() -> AffixSet {
        AffixSet::default_german()
    }

    #[test]
    fn first_name_matches_the_compound_head() {
        let mut busch = PersonRecord::new("Q502", "Wilhelm Busch");
        busch.first_names = alloc::vec!["Wilhelm".into()];
        busch.last_names = alloc::vec!["Busch".into()];
        let (full, first, last, alias) =
            name_match_features(&busch, "Wilhelmstraße", &affixes());
        assert!(!full, "full name is not contained");
        assert!(first, "first-name token matches the compound head");
        assert!(!last);
        assert!(!alias, "no alias, no alias match");
    }

    #[test]
    fn hyphenated_full_name_matches_everything() {
        let mut adenauer = PersonRecord::new("Q504", "Konrad Adenauer");
        adenauer.first_names = alloc::vec!["Konrad".into()];
        adenauer.last_names = alloc::vec!["Adenauer".into()];
        let (full, first, last, _) =
            name_match_features(&adenauer, "Konrad-Adenauer-Straße", &affixes());
        assert!(full && first && last);
    }

    #[test]
    fn alias_matching_uses_whole_alias() {
        let mut person = PersonRecord::new("Q9", "Someone Else");
        person.aliases = alloc::vec!["Wilhelm".into()];
        let (_, _, _, alias) = name_match_features(&person, "Wilhelmstraße", &affixes());
        assert!(alias);
    }

    fn vocabulary_bundle() -> IndexBundle {
        // 25 persons; person i holds occupation QO{i % 25} plus everyone
        // holds QO0, so counts are distinct enough to rank.
        let persons = (0..25).map(|i| {
            let mut p = PersonRecord::new(alloc::format!("Q{:03}", 600 + i), "Person X");
            p.occupations = alloc::vec![id(&alloc::format!("QO{i}"))];
            if i % 2 == 0 {
                p.occupations.push(id("QO0"));
            }
            p
        });
        build_indexes(persons, []).0
    }

    #[test]
    fn top_occupations_ranks_by_count_then_id() {
        let bundle = vocabulary_bundle();
        let positives: Vec<EntityId> =
            (0..25).map(|i| id(&alloc::format!("Q{:03}", 600 + i))).collect();
        let (vocab, report) = top_occupations(positives.iter(), &bundle).unwrap();
        // Brute-force expectation: QO0 held by 13 persons (i=0 plus the 12
        // other even i), every other occupation once; ties by id.
        assert_eq!(vocab.ids()[0], id("QO0"));
        let mut rest: Vec<EntityId> = (1..25).map(|i| id(&alloc::format!("QO{i}"))).collect();
        rest.sort();
        assert_eq!(&vocab.ids()[1..], &rest[..19]);
        assert_eq!(report.from_positives, OCCUPATION_SLOTS);
        assert_eq!(report.padded, 0);
    }

    #[test]
    fn sparse_occupations_trigger_the_padding_path() {
        let mut monarch = PersonRecord::new("Q1", "A");
        monarch.occupations = alloc::vec![id("QO1")];
        let mut writer = PersonRecord::new("Q2", "B");
        writer.occupations = alloc::vec![id("QO2")];
        let (bundle, _) = build_indexes([monarch, writer], []);
        let positives = [id("Q1"), id("Q2")];
        let (vocab, report) = top_occupations(positives.iter(), &bundle).unwrap();
        assert_eq!(vocab.ids().len(), OCCUPATION_SLOTS);
        assert_eq!(report.from_positives, 2);
        assert_eq!(report.padded, OCCUPATION_SLOTS - 2);
    }

    #[test]
    fn empty_positives_are_an_error() {
        let bundle = vocabulary_bundle();
        assert_eq!(
            top_occupations([].iter(), &bundle),
            Err(FeatureError::EmptyPositives)
        );
    }

    #[test]
    fn vocabulary_rejects_duplicates_and_wrong_sizes() {
        assert!(OccupationVocabulary::new(alloc::vec![id("Q1"); 20]).is_err());
        assert!(OccupationVocabulary::new(alloc::vec![id("Q1"); 3]).is_err());
    }

    fn full_bundle() -> (IndexBundle, OccupationVocabulary) {
        let mut friedrich = PersonRecord::new("Q501", "Friedrich Wilhelm I.");
        friedrich.first_names = alloc::vec!["Friedrich".into(), "Wilhelm".into()];
        friedrich.last_names = alloc::vec!["Wilhelm".into()];
        friedrich.occupations = alloc::vec![id("QOCC1")];
        friedrich.locations = alloc::vec![(RelationKind::Born, id("Q200"))];
        friedrich.link_count = 800;

        let nodes = [
            LocationNode::new("Q300", "Mitte").with_parents(["Q200"]),
            LocationNode::new("Q200", "Berlin").with_parents(["Q100"]),
            LocationNode::new("Q100", "Germany"),
        ];
        let (bundle, _) = build_indexes([friedrich], nodes);

        let mut ids = alloc::vec![id("QOCC1")];
        for slot in 1..OCCUPATION_SLOTS {
            ids.push(OccupationVocabulary::padding_id(slot));
        }
        (bundle, OccupationVocabulary::new(ids).unwrap())
    }

    #[test]
    fn extract_features_assembles_the_worked_example() {
        let (bundle, vocab) = full_bundle();
        let mut street = StreetRecord::new("way/1", "Wilhelmstraße", (52.51, 13.38), None);
        street.attach_chain(&id("Q300"), bundle.dag());

        let fv = extract_features(&street, &id("Q501"), &bundle, &vocab, &affixes()).unwrap();
        assert_eq!(fv.link_count, 800.0);
        assert!(fv.name_first, "second given name Wilhelm matches");
        assert!(fv.occupation_flags[0], "monarch flag set");
        assert_eq!(fv.spatial_born, 0.5, "born in Berlin, chain overlap 2/4");
        assert_eq!(fv.to_array().len(), FEATURE_DIM);
    }

    #[test]
    fn full_fixture_vector_matches_a_straight_line_assembly() {
        // The expected vector is written out by hand, feature by feature,
        // independent of the extraction code path.
        let mut friedrich = PersonRecord::new("Q501", "Friedrich Wilhelm I.");
        friedrich.first_names = alloc::vec!["Friedrich".into(), "Wilhelm".into()];
        friedrich.last_names = alloc::vec!["Wilhelm".into()];
        friedrich.occupations = alloc::vec![id("QOCC1"), id("QPOS1")];
        friedrich.locations = alloc::vec![
            (RelationKind::Born, id("Q200")),
            (RelationKind::Died, id("Q210")),
            (RelationKind::Buried, id("Q211")),
            (RelationKind::WorkLocation, id("Q200")),
        ];
        friedrich.link_count = 800;
        let nodes = [
            LocationNode::new("Q300", "Mitte").with_parents(["Q200"]),
            LocationNode::new("Q200", "Berlin").with_parents(["Q100"]),
            LocationNode::new("Q210", "Potsdam").with_parents(["Q100"]),
            LocationNode::new("Q211", "Friedenskirche").with_parents(["Q210"]),
            LocationNode::new("Q100", "Germany"),
        ];
        let (bundle, _) = build_indexes([friedrich], nodes);
        let mut street = StreetRecord::new("way/1", "Wilhelmstraße", (52.51, 13.38), None);
        street.attach_chain(&id("Q300"), bundle.dag());

        let mut ids = alloc::vec![id("QOCC1"), id("QPOS1")];
        for slot in 2..OCCUPATION_SLOTS {
            ids.push(OccupationVocabulary::padding_id(slot));
        }
        let vocab = OccupationVocabulary::new(ids).unwrap();

        let mut expected_occ = [false; OCCUPATION_SLOTS];
        expected_occ[0] = true; // monarch
        expected_occ[1] = true; // king in prussia, merged from position held
        let expected = FeatureVector {
            link_count: 800.0,
            name_full: false,  // "friedrich wilhelm i." not in the street name
            name_first: true,  // token "wilhelm" heads the compound
            name_last: true,   // last name is also "wilhelm"
            name_alias: false, // no aliases recorded
            occupation_flags: expected_occ,
            spatial_born: 2.0 / 4.0,    // [Berlin, Germany] overlap
            spatial_died: 1.0 / 4.0,    // [Potsdam, Germany] shares Germany
            spatial_buried: 1.0 / 4.0,  // [church, Potsdam, Germany] shares Germany
            spatial_educated: 0.0,      // no such relation
            spatial_work: 2.0 / 4.0,    // works in Berlin
        };
        let actual =
            extract_features(&street, &id("Q501"), &bundle, &vocab, &affixes()).unwrap();
        assert_eq!(actual, expected);
    }

    #[test]
    fn unknown_person_is_a_named_error() {
        let (bundle, vocab) = full_bundle();
        let street = StreetRecord::new("way/1", "Wilhelmstraße", (0.0, 0.0), None);
        assert_eq!(
            extract_features(&street, &id("Q404"), &bundle, &vocab, &affixes()),
            Err(FeatureError::UnknownPerson(id("Q404")))
        );
    }

    #[test]
    fn person_without_data_yields_zeroes_except_name_flags() {
        let mut nobody = PersonRecord::new("Q700", "Wilhelm Leer");
        nobody.first_names = alloc::vec!["Wilhelm".into()];
        nobody.last_names = alloc::vec!["Leer".into()];
        let (bundle, _) = build_indexes([nobody], []);
        let mut ids = Vec::new();
        for slot in 0..OCCUPATION_SLOTS {
            ids.push(OccupationVocabulary::padding_id(slot));
        }
        let vocab = OccupationVocabulary::new(ids).unwrap();
        let street = StreetRecord::new("way/1", "Wilhelmstraße", (0.0, 0.0), None);
        let fv = extract_features(&street, &id("Q700"), &bundle, &vocab, &affixes()).unwrap();
        assert_eq!(fv.link_count, 0.0);
        assert!(fv.name_first);
        assert_eq!(fv.occupation_flags, [false; OCCUPATION_SLOTS]);
        assert_eq!(
            [fv.spatial_born, fv.spatial_died, fv.spatial_buried, fv.spatial_educated, fv.spatial_work],
            [0.0; 5]
        );
    }

    #[test]
    fn feature_names_match_the_dimensionality() {
        assert_eq!(feature_names().len(), FEATURE_DIM);
    }
}
