//! Streaming ingestion of a Wikidata-style entity dump: newline-delimited
//! JSON documents (the surrounding `[`/`]` array lines and trailing commas
//! of the dump convention are tolerated), flattened into [`RawEntity`]
//! values one line at a time. Nothing of the dump is ever materialized
//! beyond the current line.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use serde::Deserialize;

use eponym_core::dag::LocationNode;
use eponym_core::ids::EntityId;
use eponym_core::person::{extract_location, extract_person, ExtractConfig, PersonRecord, RawEntity};
use eponym_core::street::StreetRecord;

/// Counters kept while streaming a dump.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct StreamStats {
    pub yielded: u64,
    pub skipped_malformed: u64,
    pub skipped_non_item: u64,
}

/// Iterator over the entities of a dump. Malformed lines are counted and
/// skipped; only read failures end the stream with an error.
pub struct EntityStream<R> {
    reader: R,
    buf: String,
    pub stats: StreamStats,
}

impl<R: BufRead> EntityStream<R> {
    pub fn new(reader: R) -> Self {
        EntityStream {
            reader,
            buf: String::new(),
            stats: StreamStats::default(),
        }
    }
}

impl<R: BufRead> Iterator for EntityStream<R> {
    type Item = std::io::Result<RawEntity>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e)),
            }
            let line = self.buf.trim();
            let line = line.strip_suffix(',').unwrap_or(line).trim();
            if line.is_empty() || line == "[" || line == "]" {
                continue;
            }
            match serde_json::from_str::<WdDocument>(line) {
                Ok(doc) => {
                    if doc.id.starts_with('Q') {
                        self.stats.yielded += 1;
                        return Some(Ok(doc.into_raw()));
                    }
                    // Properties and lexemes are legitimate dump content,
                    // just not items.
                    self.stats.skipped_non_item += 1;
                }
                Err(_) => {
                    self.stats.skipped_malformed += 1;
                }
            }
        }
    }
}

#[derive(Deserialize)]
struct WdDocument {
    #[serde(default)]
    id: String,
    #[serde(default)]
    labels: HashMap<String, WdMonolingual>,
    #[serde(default)]
    aliases: HashMap<String, Vec<WdMonolingual>>,
    #[serde(default)]
    claims: HashMap<String, Vec<WdStatement>>,
    #[serde(default)]
    sitelinks: HashMap<String, WdSitelink>,
}

#[derive(Deserialize)]
struct WdMonolingual {
    #[serde(default)]
    value: String,
}

#[derive(Deserialize)]
struct WdSitelink {
    #[serde(default)]
    title: String,
}

#[derive(Deserialize)]
struct WdStatement {
    mainsnak: Option<WdSnak>,
}

#[derive(Deserialize)]
struct WdSnak {
    datavalue: Option<WdDatavalue>,
}

#[derive(Deserialize)]
struct WdDatavalue {
    #[serde(rename = "type", default)]
    kind: String,
    #[serde(default)]
    value: serde_json::Value,
}

impl WdDocument {
    fn into_raw(self) -> RawEntity {
        let mut raw = RawEntity::new(self.id.as_str());
        for (lang, label) in self.labels {
            if !label.value.is_empty() {
                raw.labels.insert(lang, label.value);
            }
        }
        for (lang, list) in self.aliases {
            let values: Vec<String> = list
                .into_iter()
                .map(|a| a.value)
                .filter(|v| !v.is_empty())
                .collect();
            if !values.is_empty() {
                raw.aliases.insert(lang, values);
            }
        }
        for (property, statements) in self.claims {
            let mut values = Vec::new();
            for statement in statements {
                let Some(value) = statement
                    .mainsnak
                    .and_then(|s| s.datavalue)
                    .and_then(flatten_datavalue)
                else {
                    continue;
                };
                values.push(value);
            }
            if !values.is_empty() {
                raw.claims.insert(property, values);
            }
        }
        for (site, link) in self.sitelinks {
            if !link.title.is_empty() {
                raw.sitelink_titles.insert(site, link.title);
            }
        }
        raw
    }
}

/// Flatten a dump datavalue into the string form [`RawEntity`] carries:
/// entity references become their `Q…` id, strings pass through, globe
/// coordinates become `"lat,lon"`. Other value kinds are irrelevant here.
fn flatten_datavalue(dv: WdDatavalue) -> Option<String> {
    match dv.kind.as_str() {
        "wikibase-entityid" => dv
            .value
            .get("id")
            .and_then(|v| v.as_str())
            .map(String::from),
        "string" => dv.value.as_str().map(String::from),
        "globecoordinate" => {
            let lat = dv.value.get("latitude")?.as_f64()?;
            let lon = dv.value.get("longitude")?.as_f64()?;
            Some(format!("{lat},{lon}"))
        }
        _ => None,
    }
}

/// Parse the two-column link-count table (`entity-id<TAB>count`). Duplicate
/// ids keep the maximum count; unparsable lines are counted and skipped.
pub fn load_link_counts(reader: impl BufRead) -> std::io::Result<(BTreeMap<EntityId, u64>, u64)> {
    let mut counts: BTreeMap<EntityId, u64> = BTreeMap::new();
    let mut skipped = 0u64;
    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let parsed = match (fields.next(), fields.next()) {
            (Some(id), Some(count)) if !id.is_empty() => {
                count.trim().parse::<u64>().ok().map(|c| (id, c))
            }
            _ => None,
        };
        match parsed {
            Some((id, count)) => {
                let entry = counts.entry(EntityId::from(id)).or_insert(0);
                *entry = (*entry).max(count);
            }
            None => skipped += 1,
        }
    }
    Ok((counts, skipped))
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct IngestStats {
    pub stream: StreamStats,
    pub persons: u64,
    pub humans_without_label: u64,
    pub locations: u64,
    pub name_labels: u64,
    pub ground_truth_streets: u64,
    pub link_count_entries: u64,
    pub link_count_lines_skipped: u64,
    pub persons_with_links: u64,
}

pub struct KgIngest {
    pub persons: Vec<PersonRecord>,
    pub locations: Vec<LocationNode>,
    /// Streets harvested from street-class entities carrying a named-after
    /// claim. Their chain holds `[street, located-in target]`, expanded
    /// against the DAG at training time.
    pub ground_truth: Vec<StreetRecord>,
    pub stats: IngestStats,
}

/// Keep only the parts of a person entity that `extract_person` reads, so
/// the deferred second pass holds slim records instead of full documents.
fn slim_person_raw(raw: &RawEntity, language: &str, cfg: &ExtractConfig) -> RawEntity {
    let mut slim = RawEntity::new(raw.id.as_str());
    for lang in [language, "en"] {
        if let Some(label) = raw.labels.get(lang) {
            slim.labels.insert(String::from(lang), label.clone());
        }
    }
    if let Some(aliases) = raw.aliases.get(language) {
        slim.aliases.insert(String::from(language), aliases.clone());
    }
    let mut keep: Vec<&str> = vec![cfg.instance_of.as_str()];
    keep.extend(cfg.given_name_props.iter().map(String::as_str));
    keep.extend(cfg.family_name_props.iter().map(String::as_str));
    keep.extend(cfg.occupation_props.iter().map(String::as_str));
    keep.extend(cfg.location_props().map(|(_, p)| p));
    for prop in keep {
        if let Some(values) = raw.claims.get(prop) {
            slim.claims.insert(String::from(prop), values.clone());
        }
    }
    slim
}

fn parse_coordinate(value: &str) -> Option<(f64, f64)> {
    let (lat, lon) = value.split_once(',')?;
    Some((lat.trim().parse().ok()?, lon.trim().parse().ok()?))
}

/// Harvest a ground-truth street from a street-class entity with a
/// named-after claim.
fn extract_gt_street(raw: &RawEntity, language: &str, cfg: &ExtractConfig) -> Option<StreetRecord> {
    if !raw.is_instance_of_any(cfg, &cfg.street_classes) {
        return None;
    }
    let target = raw
        .claims
        .get(&cfg.named_after)?
        .iter()
        .find(|t| t.starts_with('Q'))?;
    let name = raw.label_in(language)?;
    let point = raw
        .claim_values(&cfg.coordinate_prop)
        .first()
        .and_then(|v| parse_coordinate(v))
        .unwrap_or((0.0, 0.0));

    let mut street = StreetRecord::new(
        format!("wd:{}", raw.id),
        name,
        point,
        Some(raw.id.clone()),
    );
    street.etymology_person = Some(EntityId::from(target.as_str()));
    if let Some(anchor) = raw
        .claim_values(&cfg.located_in)
        .iter()
        .find(|t| t.starts_with('Q'))
    {
        street.chain.push(EntityId::from(anchor.as_str()));
    }
    Some(street)
}

/// One pass over the dump: persons (with deferred name resolution),
/// location nodes, name-entity labels and the named-after ground truth.
/// Link counts merge in at the end; persons missing from the table keep
/// count zero.
pub fn ingest_kg(
    dump: impl BufRead,
    link_counts: Option<(BTreeMap<EntityId, u64>, u64)>,
    language: &str,
    cfg: &ExtractConfig,
) -> std::io::Result<KgIngest> {
    let mut stream = EntityStream::new(dump);
    let mut person_raws: Vec<RawEntity> = Vec::new();
    let mut locations: Vec<LocationNode> = Vec::new();
    let mut ground_truth: Vec<StreetRecord> = Vec::new();
    let mut name_labels: BTreeMap<String, String> = BTreeMap::new();
    let mut humans_without_label = 0u64;

    for entity in &mut stream {
        let raw = entity?;
        if raw.is_instance_of_any(cfg, &cfg.name_classes) {
            if let Some(label) = raw.label_in(language) {
                name_labels.insert(String::from(raw.id.as_str()), String::from(label));
            }
        }
        if raw.is_instance_of_any(cfg, &cfg.human_classes) {
            if raw.label_in(language).is_some() {
                person_raws.push(slim_person_raw(&raw, language, cfg));
            } else {
                humans_without_label += 1;
            }
        }
        if let Some(node) = extract_location(&raw, language, cfg) {
            locations.push(node);
        }
        if let Some(street) = extract_gt_street(&raw, language, cfg) {
            ground_truth.push(street);
        }
    }

    let (counts, lines_skipped) = link_counts.unwrap_or_default();
    let mut persons: Vec<PersonRecord> = Vec::with_capacity(person_raws.len());
    let mut persons_with_links = 0u64;
    for raw in &person_raws {
        if let Some(mut person) = extract_person(raw, language, cfg, &name_labels) {
            if let Some(count) = counts.get(&person.id) {
                person.link_count = *count;
                persons_with_links += 1;
            }
            persons.push(person);
        }
    }

    let stats = IngestStats {
        stream: stream.stats.clone(),
        persons: persons.len() as u64,
        humans_without_label,
        locations: locations.len() as u64,
        name_labels: name_labels.len() as u64,
        ground_truth_streets: ground_truth.len() as u64,
        link_count_entries: counts.len() as u64,
        link_count_lines_skipped: lines_skipped,
        persons_with_links,
    };
    Ok(KgIngest {
        persons,
        locations,
        ground_truth,
        stats,
    })
}
