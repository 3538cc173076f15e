//! Person and location records extracted from raw knowledge-graph entities.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dag::LocationNode;
use crate::ids::EntityId;

/// The five spatial relations a person can have to a street's region.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RelationKind {
    Born,
    Died,
    Buried,
    EducatedAt,
    WorkLocation,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] = [
        RelationKind::Born,
        RelationKind::Died,
        RelationKind::Buried,
        RelationKind::EducatedAt,
        RelationKind::WorkLocation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Born => "born",
            RelationKind::Died => "died",
            RelationKind::Buried => "buried",
            RelationKind::EducatedAt => "educated_at",
            RelationKind::WorkLocation => "work_location",
        }
    }

    /// Slot in the spatial part of the feature vector.
    pub fn index(self) -> usize {
        match self {
            RelationKind::Born => 0,
            RelationKind::Died => 1,
            RelationKind::Buried => 2,
            RelationKind::EducatedAt => 3,
            RelationKind::WorkLocation => 4,
        }
    }
}

/// A raw knowledge-graph entity, already flattened from the dump encoding:
/// claim values are target entity ids (or literal strings), one list per
/// property, never empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawEntity {
    pub id: EntityId,
    pub labels: BTreeMap<String, String>,
    pub aliases: BTreeMap<String, Vec<String>>,
    pub claims: BTreeMap<String, Vec<String>>,
    pub sitelink_titles: BTreeMap<String, String>,
}

impl RawEntity {
    pub fn new(id: impl Into<EntityId>) -> Self {
        RawEntity {
            id: id.into(),
            ..RawEntity::default()
        }
    }

    pub fn claim_values(&self, property: &str) -> &[String] {
        self.claims.get(property).map_or(&[], Vec::as_slice)
    }

    pub fn is_instance_of_any(&self, cfg: &ExtractConfig, classes: &BTreeSet<String>) -> bool {
        self.claim_values(&cfg.instance_of)
            .iter()
            .any(|target| classes.contains(target))
    }

    /// Label in the requested language, falling back to English.
    pub fn label_in(&self, language: &str) -> Option<&str> {
        self.labels
            .get(language)
            .or_else(|| self.labels.get("en"))
            .map(String::as_str)
    }
}

/// One indexed person.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PersonRecord {
    pub id: EntityId,
    pub full_name: String,
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
    pub aliases: Vec<String>,
    pub occupations: Vec<EntityId>,
    pub locations: Vec<(RelationKind, EntityId)>,
    pub link_count: u64,
}

impl PersonRecord {
    pub fn new(id: impl Into<EntityId>, full_name: impl Into<String>) -> Self {
        PersonRecord {
            id: id.into(),
            full_name: full_name.into(),
            first_names: Vec::new(),
            last_names: Vec::new(),
            aliases: Vec::new(),
            occupations: Vec::new(),
            locations: Vec::new(),
            link_count: 0,
        }
    }

    pub fn locations_of(&self, kind: RelationKind) -> impl Iterator<Item = &EntityId> {
        self.locations
            .iter()
            .filter(move |(k, _)| *k == kind)
            .map(|(_, id)| id)
    }
}

/// Resolves entity ids to labels; used to turn given-name / family-name
/// claims into name strings.
pub trait LabelResolver {
    fn resolve_label(&self, id: &str) -> Option<&str>;
}

/// Resolver that knows nothing; extraction then falls back to splitting the
/// full name.
pub struct NoLabels;

impl LabelResolver for NoLabels {
    fn resolve_label(&self, _id: &str) -> Option<&str> {
        None
    }
}

impl LabelResolver for BTreeMap<String, String> {
    fn resolve_label(&self, id: &str) -> Option<&str> {
        self.get(id).map(String::as_str)
    }
}

impl LabelResolver for BTreeMap<EntityId, String> {
    fn resolve_label(&self, id: &str) -> Option<&str> {
        self.get(id).map(String::as_str)
    }
}

/// Which knowledge-graph properties and classes drive extraction. The
/// defaults are the Wikidata vocabulary; a deployment can override them from
/// a config file so the mapping stays auditable.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ExtractConfig {
    pub instance_of: String,
    pub human_classes: BTreeSet<String>,
    pub given_name_props: Vec<String>,
    pub family_name_props: Vec<String>,
    /// Occupation and position-held properties are merged into one
    /// occupation list.
    pub occupation_props: Vec<String>,
    pub born_prop: String,
    pub died_prop: String,
    pub buried_prop: String,
    pub educated_at_prop: String,
    pub work_location_prop: String,
    pub located_in: String,
    /// Classes that make an entity a location node even without a
    /// located-in claim (countries sit at the top of the hierarchy).
    pub geo_classes: BTreeSet<String>,
    /// Classes whose instances are name entities; their labels feed the
    /// given/family name resolution.
    pub name_classes: BTreeSet<String>,
    /// Classes whose instances are streets (ground-truth harvesting).
    pub street_classes: BTreeSet<String>,
    pub named_after: String,
    pub coordinate_prop: String,
    /// Tokens excluded from last-name candidacy when splitting a full name
    /// (numerals, nobiliary particles).
    pub name_stop_tokens: BTreeSet<String>,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        let strings = |items: &[&str]| -> Vec<String> {
            items.iter().map(|s| s.to_string()).collect()
        };
        let set = |items: &[&str]| -> BTreeSet<String> {
            items.iter().map(|s| s.to_string()).collect()
        };
        ExtractConfig {
            instance_of: "P31".to_string(),
            human_classes: set(&["Q5"]),
            given_name_props: strings(&["P735"]),
            family_name_props: strings(&["P734"]),
            occupation_props: strings(&["P106", "P39"]),
            born_prop: "P19".to_string(),
            died_prop: "P20".to_string(),
            buried_prop: "P119".to_string(),
            educated_at_prop: "P69".to_string(),
            work_location_prop: "P937".to_string(),
            located_in: "P131".to_string(),
            geo_classes: set(&["Q6256", "Q3624078"]),
            name_classes: set(&["Q202444", "Q12308941", "Q11879590", "Q3409032", "Q101352"]),
            street_classes: set(&["Q79007", "Q34442"]),
            named_after: "P138".to_string(),
            coordinate_prop: "P625".to_string(),
            name_stop_tokens: set(&[
                "i.", "ii.", "iii.", "iv.", "v.", "vi.", "vii.", "viii.", "ix.", "x.", "xi.",
                "xii.", "von", "van", "der", "de", "den", "zu", "zur", "zum", "ter", "ten", "da",
                "di", "du", "la", "le",
            ]),
        }
    }
}

impl ExtractConfig {
    pub fn location_props(&self) -> [(RelationKind, &str); 5] {
        [
            (RelationKind::Born, self.born_prop.as_str()),
            (RelationKind::Died, self.died_prop.as_str()),
            (RelationKind::Buried, self.buried_prop.as_str()),
            (RelationKind::EducatedAt, self.educated_at_prop.as_str()),
            (RelationKind::WorkLocation, self.work_location_prop.as_str()),
        ]
    }

    fn is_stop_token(&self, token: &str) -> bool {
        self.name_stop_tokens.contains(&token.to_lowercase())
    }
}

/// Split a full name into given-name tokens and a last name. The first
/// token is a given name and tokens strictly between it and the last name
/// become additional given names. Last-name candidacy skips the stop list,
/// so "Friedrich Wilhelm I." exposes "Wilhelm" as a retrievable token.
pub fn split_full_name(full_name: &str, cfg: &ExtractConfig) -> (Vec<String>, Vec<String>) {
    let tokens: Vec<&str> = full_name.split_whitespace().collect();
    let Some(first) = tokens.first() else {
        return (Vec::new(), Vec::new());
    };

    let last_idx = tokens
        .iter()
        .rposition(|t| !cfg.is_stop_token(t))
        .unwrap_or(0);

    let mut firsts = alloc::vec![first.to_string()];
    for token in tokens.iter().take(last_idx).skip(1) {
        if !cfg.is_stop_token(token) && !firsts.iter().any(|f| f == token) {
            firsts.push(token.to_string());
        }
    }
    (firsts, alloc::vec![tokens[last_idx].to_string()])
}

/// Turn a raw entity into a person record iff it is an instance of human.
///
/// The full name comes from the label in `language` with an English
/// fallback; entities without either label cannot be indexed and return
/// `None`. Given and family names use the name-entity labels where the
/// resolver knows them, otherwise the split rule above. `link_count` starts
/// at zero and is filled in later from the link-count table.
pub fn extract_person(
    raw: &RawEntity,
    language: &str,
    cfg: &ExtractConfig,
    labels: &impl LabelResolver,
) -> Option<PersonRecord> {
    if !raw.is_instance_of_any(cfg, &cfg.human_classes) {
        return None;
    }
    let full_name = raw.label_in(language)?.trim();
    if full_name.is_empty() {
        return None;
    }

    let resolve_names = |props: &[String]| -> Vec<String> {
        let mut names = Vec::new();
        for prop in props {
            for target in raw.claim_values(prop) {
                if let Some(label) = labels.resolve_label(target) {
                    if !label.is_empty() && !names.iter().any(|n| n == label) {
                        names.push(label.to_string());
                    }
                }
            }
        }
        names
    };

    let mut first_names = resolve_names(&cfg.given_name_props);
    let mut last_names = resolve_names(&cfg.family_name_props);
    if first_names.is_empty() || last_names.is_empty() {
        let (split_firsts, split_lasts) = split_full_name(full_name, cfg);
        if first_names.is_empty() {
            first_names = split_firsts;
        }
        if last_names.is_empty() {
            last_names = split_lasts;
        }
    }

    let aliases: Vec<String> = raw
        .aliases
        .get(language)
        .map(|list| {
            let mut seen = BTreeSet::new();
            list.iter()
                .map(|a| a.trim().to_string())
                .filter(|a| !a.is_empty() && seen.insert(a.clone()))
                .collect()
        })
        .unwrap_or_default();

    let mut occupations: Vec<EntityId> = Vec::new();
    for prop in &cfg.occupation_props {
        for target in raw.claim_values(prop) {
            if target.starts_with('Q') {
                let id = EntityId::from(target.as_str());
                if !occupations.contains(&id) {
                    occupations.push(id);
                }
            }
        }
    }

    let mut locations: Vec<(RelationKind, EntityId)> = Vec::new();
    for (kind, prop) in cfg.location_props() {
        for target in raw.claim_values(prop) {
            if target.starts_with('Q') {
                let entry = (kind, EntityId::from(target.as_str()));
                if !locations.contains(&entry) {
                    locations.push(entry);
                }
            }
        }
    }

    Some(PersonRecord {
        id: raw.id.clone(),
        full_name: full_name.to_string(),
        first_names,
        last_names,
        aliases,
        occupations,
        locations,
        link_count: 0,
    })
}

/// Turn a raw entity into a location node iff it carries located-in claims
/// or belongs to a configured geographic class.
pub fn extract_location(
    raw: &RawEntity,
    language: &str,
    cfg: &ExtractConfig,
) -> Option<LocationNode> {
    let targets = raw.claim_values(&cfg.located_in);
    if targets.is_empty() && !raw.is_instance_of_any(cfg, &cfg.geo_classes) {
        return None;
    }

    let mut parents: Vec<EntityId> = Vec::new();
    for target in targets {
        if target.starts_with('Q') && target.as_str() != raw.id.as_str() {
            let id = EntityId::from(target.as_str());
            if !parents.contains(&id) {
                parents.push(id);
            }
        }
    }

    let label = raw
        .label_in(language)
        .unwrap_or_else(|| raw.id.as_str())
        .to_string();
    Some(LocationNode {
        id: raw.id.clone(),
        label,
        parents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExtractConfig {
        ExtractConfig::default()
    }

    fn human(id: &str, label_de: &str) -> RawEntity {
        let mut raw = RawEntity::new(id);
        raw.claims
            .insert("P31".into(), alloc::vec!["Q5".to_string()]);
        raw.labels.insert("de".into(), label_de.to_string());
        raw
    }

    #[test]
    fn human_with_label_becomes_person() {
        let raw = human("Q502", "Wilhelm Busch");
        let person = extract_person(&raw, "de", &cfg(), &NoLabels).unwrap();
        assert_eq!(person.full_name, "Wilhelm Busch");
        assert!(person.first_names.contains(&"Wilhelm".to_string()));
        assert!(person.last_names.contains(&"Busch".to_string()));
        assert_eq!(person.link_count, 0);
    }

    #[test]
    fn non_humans_are_filtered() {
        let mut raw = RawEntity::new("Q64");
        raw.claims
            .insert("P31".into(), alloc::vec!["Q515".to_string()]);
        raw.labels.insert("de".into(), "Berlin".into());
        assert!(extract_person(&raw, "de", &cfg(), &NoLabels).is_none());
    }

    #[test]
    fn english_label_fallback() {
        let mut raw = RawEntity::new("Q1");
        raw.claims
            .insert("P31".into(), alloc::vec!["Q5".to_string()]);
        raw.labels.insert("en".into(), "John Smith".into());
        let person = extract_person(&raw, "de", &cfg(), &NoLabels).unwrap();
        assert_eq!(person.full_name, "John Smith");
    }

    #[test]
    fn unlabeled_humans_are_skipped() {
        let mut raw = RawEntity::new("Q2");
        raw.claims
            .insert("P31".into(), alloc::vec!["Q5".to_string()]);
        assert!(extract_person(&raw, "de", &cfg(), &NoLabels).is_none());
    }

    #[test]
    fn split_exposes_middle_names_and_skips_numerals() {
        // The ordinal is never a last name; "Wilhelm" takes its place and
        // stays retrievable.
        let (firsts, lasts) = split_full_name("Friedrich Wilhelm I.", &cfg());
        assert_eq!(firsts, ["Friedrich"].map(String::from));
        assert_eq!(lasts, ["Wilhelm"].map(String::from));
    }

    #[test]
    fn split_skips_nobiliary_particles() {
        let (firsts, lasts) = split_full_name("Johann Wolfgang von Goethe", &cfg());
        assert_eq!(firsts, ["Johann", "Wolfgang"].map(String::from));
        assert_eq!(lasts, ["Goethe"].map(String::from));
    }

    #[test]
    fn resolved_name_claims_win_over_splitting() {
        let mut raw = human("Q501", "Friedrich Wilhelm I.");
        raw.claims
            .insert("P735".into(), alloc::vec!["Q93".to_string(), "Q94".to_string()]);
        let mut labels: BTreeMap<String, String> = BTreeMap::new();
        labels.insert("Q93".into(), "Friedrich".into());
        labels.insert("Q94".into(), "Wilhelm".into());
        let person = extract_person(&raw, "de", &cfg(), &labels).unwrap();
        assert_eq!(person.first_names, ["Friedrich", "Wilhelm"].map(String::from));
        // Family name claim absent: split fallback still applies per field.
        assert_eq!(person.last_names, ["Wilhelm"].map(String::from));
    }

    #[test]
    fn occupation_and_position_held_are_merged() {
        let mut raw = human("Q501", "Friedrich Wilhelm I.");
        raw.claims
            .insert("P106".into(), alloc::vec!["Q116".to_string()]);
        raw.claims
            .insert("P39".into(), alloc::vec!["Q117".to_string(), "Q116".to_string()]);
        let person = extract_person(&raw, "de", &cfg(), &NoLabels).unwrap();
        assert_eq!(
            person.occupations,
            [EntityId::from("Q116"), EntityId::from("Q117")]
        );
    }

    #[test]
    fn location_relations_use_the_five_kinds() {
        let mut raw = human("Q501", "Friedrich Wilhelm I.");
        raw.claims.insert("P19".into(), alloc::vec!["Q200".to_string()]);
        raw.claims
            .insert("P119".into(), alloc::vec!["Q211".to_string(), "Q212".to_string()]);
        let person = extract_person(&raw, "de", &cfg(), &NoLabels).unwrap();
        assert_eq!(
            person.locations,
            [
                (RelationKind::Born, EntityId::from("Q200")),
                (RelationKind::Buried, EntityId::from("Q211")),
                (RelationKind::Buried, EntityId::from("Q212")),
            ]
        );
    }

    #[test]
    fn located_in_makes_a_location_node() {
        let mut raw = RawEntity::new("Q200");
        raw.labels.insert("de".into(), "Berlin".into());
        raw.claims
            .insert("P131".into(), alloc::vec!["Q100".to_string(), "Q100".to_string()]);
        let node = extract_location(&raw, "de", &cfg()).unwrap();
        assert_eq!(node.parents, [EntityId::from("Q100")]);
        assert_eq!(node.label, "Berlin");
    }

    #[test]
    fn non_geographic_entities_are_not_location_nodes() {
        let mut raw = RawEntity::new("Q502");
        raw.claims
            .insert("P31".into(), alloc::vec!["Q5".to_string()]);
        assert!(extract_location(&raw, "de", &cfg()).is_none());
    }

    #[test]
    fn countries_qualify_via_geo_class() {
        let mut raw = RawEntity::new("Q100");
        raw.labels.insert("de".into(), "Deutschland".into());
        raw.claims
            .insert("P31".into(), alloc::vec!["Q6256".to_string()]);
        let node = extract_location(&raw, "de", &cfg()).unwrap();
        assert!(node.parents.is_empty());
    }

    #[test]
    fn extraction_is_deterministic() {
        let raw = human("Q502", "Wilhelm Busch");
        let a = extract_person(&raw, "de", &cfg(), &NoLabels);
        let b = extract_person(&raw, "de", &cfg(), &NoLabels);
        assert_eq!(a, b);
    }
}
