//! The preprocessed knowledge graph: person name index, occupation index,
//! location index and spatial dependency DAG, built once and queried by the
//! whole pipeline.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::dag::{DagReport, LocationNode, SpatialDag};
use crate::ids::EntityId;
use crate::normalize::normalize;
use crate::person::{PersonRecord, RelationKind};

static EMPTY_IDS: BTreeSet<EntityId> = BTreeSet::new();

/// Exact-term inverted index from normalized name variants to person ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PersonNameIndex {
    entries: BTreeMap<String, BTreeSet<EntityId>>,
}

impl PersonNameIndex {
    pub fn insert(&mut self, term: &str, person: EntityId) {
        let normalized = normalize(term);
        if normalized.is_empty() {
            return;
        }
        self.entries.entry(normalized).or_default().insert(person);
    }

    /// Person ids matching the term exactly (after normalization). Unknown
    /// terms return the empty set.
    pub fn lookup(&self, term: &str) -> &BTreeSet<EntityId> {
        self.entries.get(&normalize(term)).unwrap_or(&EMPTY_IDS)
    }

    pub fn term_count(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&String, &BTreeSet<EntityId>)> {
        self.entries.iter()
    }

    pub fn from_entries(entries: BTreeMap<String, BTreeSet<EntityId>>) -> Self {
        PersonNameIndex { entries }
    }
}

/// All indexed name variants of one person: the full name, every first-name
/// and last-name token, every alias, and every "first last" pair.
fn name_variants(person: &PersonRecord) -> Vec<String> {
    let mut variants = alloc::vec![person.full_name.clone()];
    let mut first_tokens: Vec<&str> = Vec::new();
    let mut last_tokens: Vec<&str> = Vec::new();
    for name in &person.first_names {
        for token in name.split_whitespace() {
            variants.push(String::from(token));
            if !first_tokens.contains(&token) {
                first_tokens.push(token);
            }
        }
    }
    for name in &person.last_names {
        for token in name.split_whitespace() {
            variants.push(String::from(token));
            if !last_tokens.contains(&token) {
                last_tokens.push(token);
            }
        }
    }
    for alias in &person.aliases {
        variants.push(alias.clone());
    }
    for first in &first_tokens {
        for last in &last_tokens {
            if first != last {
                variants.push(alloc::format!("{first} {last}"));
            }
        }
    }
    variants
}

/// Build summary for one index bundle.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexReport {
    pub persons: usize,
    pub locations: usize,
    pub name_terms: usize,
    pub dag: DagReport,
}

/// The preprocessed data sets as one loadable unit. Immutable after build;
/// queries are safe from any number of threads.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IndexBundle {
    persons: BTreeMap<EntityId, PersonRecord>,
    name_index: PersonNameIndex,
    occupation_index: OccupationIndex,
    location_index: LocationIndex,
    dag: SpatialDag,
}

impl IndexBundle {
    pub fn person(&self, id: &EntityId) -> Option<&PersonRecord> {
        self.persons.get(id)
    }

    pub fn contains_person(&self, id: &EntityId) -> bool {
        self.persons.contains_key(id)
    }

    pub fn persons(&self) -> impl Iterator<Item = &PersonRecord> {
        self.persons.values()
    }

    pub fn person_count(&self) -> usize {
        self.persons.len()
    }

    pub fn name_index(&self) -> &PersonNameIndex {
        &self.name_index
    }

    pub fn occupations_of(&self, person: &EntityId) -> &[EntityId] {
        self.occupation_index
            .get(person)
            .map_or(&[], Vec::as_slice)
    }

    pub fn locations_of(&self, person: &EntityId) -> &[(RelationKind, EntityId)] {
        self.location_index.get(person).map_or(&[], Vec::as_slice)
    }

    pub fn dag(&self) -> &SpatialDag {
        &self.dag
    }

    /// Query the person index with a term; exact match after normalization.
    pub fn lookup_persons(&self, term: &str) -> &BTreeSet<EntityId> {
        self.name_index.lookup(term)
    }

    pub fn link_count(&self, person: &EntityId) -> u64 {
        self.persons.get(person).map_or(0, |p| p.link_count)
    }

    /// Reassemble a bundle from persisted parts. The occupation and location
    /// indexes are projections of the person records and are rebuilt here.
    pub fn from_parts(
        persons: BTreeMap<EntityId, PersonRecord>,
        name_index: PersonNameIndex,
        dag: SpatialDag,
    ) -> Self {
        let (occupation_index, location_index) = project_person_indexes(&persons);
        IndexBundle {
            persons,
            name_index,
            occupation_index,
            location_index,
            dag,
        }
    }
}

type OccupationIndex = BTreeMap<EntityId, Vec<EntityId>>;
type LocationIndex = BTreeMap<EntityId, Vec<(RelationKind, EntityId)>>;

fn project_person_indexes(
    persons: &BTreeMap<EntityId, PersonRecord>,
) -> (OccupationIndex, LocationIndex) {
    let mut occupation_index = BTreeMap::new();
    let mut location_index = BTreeMap::new();
    for (id, person) in persons {
        occupation_index.insert(id.clone(), person.occupations.clone());
        location_index.insert(id.clone(), person.locations.clone());
    }
    (occupation_index, location_index)
}

/// Build all four indexes from normalized records. Inputs are deduplicated
/// by id, last record wins.
pub fn build_indexes(
    persons: impl IntoIterator<Item = PersonRecord>,
    locations: impl IntoIterator<Item = LocationNode>,
) -> (IndexBundle, IndexReport) {
    let mut person_map: BTreeMap<EntityId, PersonRecord> = BTreeMap::new();
    for person in persons {
        person_map.insert(person.id.clone(), person);
    }

    let mut name_index = PersonNameIndex::default();
    for (id, person) in &person_map {
        for variant in name_variants(person) {
            name_index.insert(&variant, id.clone());
        }
    }

    let (dag, dag_report) = SpatialDag::build(locations);
    let (occupation_index, location_index) = project_person_indexes(&person_map);

    let report = IndexReport {
        persons: person_map.len(),
        locations: dag.len(),
        name_terms: name_index.term_count(),
        dag: dag_report,
    };
    let bundle = IndexBundle {
        persons: person_map,
        name_index,
        occupation_index,
        location_index,
        dag,
    };
    (bundle, report)
}
