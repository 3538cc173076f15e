//! OSM XML extract parsing: named highways become street records, and
//! administrative boundary relations become containment polygons.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use eponym_core::ids::EntityId;
use eponym_core::street::{AdminBoundary, StreetRecord};

use crate::error::Error;

#[derive(Debug, Default, Clone)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: HashMap<String, String>,
}

#[derive(Debug, Default, Clone)]
pub struct OsmMember {
    pub member_type: String,
    pub member_ref: i64,
    pub role: String,
}

#[derive(Debug, Default, Clone)]
pub struct OsmRelation {
    pub id: i64,
    pub members: Vec<OsmMember>,
    pub tags: HashMap<String, String>,
}

/// A parsed extract. Node coordinates are (latitude, longitude).
#[derive(Debug, Default)]
pub struct OsmExtract {
    pub nodes: HashMap<i64, (f64, f64)>,
    pub ways: Vec<OsmWay>,
    pub relations: Vec<OsmRelation>,
}

impl OsmExtract {
    pub fn way_tags(&self) -> HashMap<String, &HashMap<String, String>> {
        self.ways
            .iter()
            .map(|w| (format!("way/{}", w.id), &w.tags))
            .collect()
    }
}

enum Container {
    None,
    Way(OsmWay),
    Relation(OsmRelation),
}

pub fn parse_osm_xml(stage: &'static str, path: &Path, reader: impl BufRead) -> Result<OsmExtract, Error> {
    let mut xml = Reader::from_reader(reader);
    xml.config_mut().trim_text(true);

    let mut extract = OsmExtract::default();
    let mut container = Container::None;
    let mut buf = Vec::new();
    loop {
        let event = xml.read_event_into(&mut buf).map_err(|e| Error::Parse {
            stage,
            path: path.to_path_buf(),
            line: 0,
            message: format!("XML error at byte {}: {e}", xml.buffer_position()),
        })?;
        match event {
            Event::Start(ref element) | Event::Empty(ref element) => {
                let is_empty = matches!(event, Event::Empty(_));
                match element.name().as_ref() {
                    b"node" => {
                        let id = attr_i64(element, b"id");
                        let lat = attr_f64(element, b"lat");
                        let lon = attr_f64(element, b"lon");
                        if let (Some(id), Some(lat), Some(lon)) = (id, lat, lon) {
                            extract.nodes.insert(id, (lat, lon));
                        }
                    }
                    b"way" => {
                        if let Some(id) = attr_i64(element, b"id") {
                            let way = OsmWay {
                                id,
                                ..OsmWay::default()
                            };
                            if is_empty {
                                extract.ways.push(way);
                            } else {
                                container = Container::Way(way);
                            }
                        }
                    }
                    b"relation" => {
                        if let Some(id) = attr_i64(element, b"id") {
                            let relation = OsmRelation {
                                id,
                                ..OsmRelation::default()
                            };
                            if is_empty {
                                extract.relations.push(relation);
                            } else {
                                container = Container::Relation(relation);
                            }
                        }
                    }
                    b"nd" => {
                        if let (Container::Way(way), Some(node)) =
                            (&mut container, attr_i64(element, b"ref"))
                        {
                            way.node_refs.push(node);
                        }
                    }
                    b"tag" => {
                        let key = attr_string(element, b"k");
                        let value = attr_string(element, b"v");
                        if let (Some(key), Some(value)) = (key, value) {
                            match &mut container {
                                Container::Way(way) => {
                                    way.tags.insert(key, value);
                                }
                                Container::Relation(relation) => {
                                    relation.tags.insert(key, value);
                                }
                                Container::None => {}
                            }
                        }
                    }
                    b"member" => {
                        if let Container::Relation(relation) = &mut container {
                            if let Some(member_ref) = attr_i64(element, b"ref") {
                                relation.members.push(OsmMember {
                                    member_type: attr_string(element, b"type")
                                        .unwrap_or_default(),
                                    member_ref,
                                    role: attr_string(element, b"role").unwrap_or_default(),
                                });
                            }
                        }
                    }
                    _ => {}
                }
            }
            Event::End(ref element) => match element.name().as_ref() {
                b"way" => {
                    if let Container::Way(way) = std::mem::replace(&mut container, Container::None)
                    {
                        extract.ways.push(way);
                    }
                }
                b"relation" => {
                    if let Container::Relation(relation) =
                        std::mem::replace(&mut container, Container::None)
                    {
                        extract.relations.push(relation);
                    }
                }
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(extract)
}

fn attr_string(element: &BytesStart<'_>, name: &[u8]) -> Option<String> {
    element
        .attributes()
        .flatten()
        .find(|a| a.key.as_ref() == name)
        .and_then(|a| a.unescape_value().ok())
        .map(|v| v.into_owned())
}

fn attr_i64(element: &BytesStart<'_>, name: &[u8]) -> Option<i64> {
    attr_string(element, name)?.parse().ok()
}

fn attr_f64(element: &BytesStart<'_>, name: &[u8]) -> Option<f64> {
    attr_string(element, name)?.parse().ok()
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct StreetStats {
    pub highway_ways: u64,
    pub named_streets: u64,
    pub skipped_missing_nodes: u64,
    pub with_etymology: u64,
}

fn first_entity_id(value: &str) -> Option<EntityId> {
    let first = value.split(';').next()?.trim();
    let valid = first.len() > 1
        && first.starts_with('Q')
        && first[1..].bytes().all(|b| b.is_ascii_digit());
    valid.then(|| EntityId::from(first))
}

/// One street record per named highway way. The representative point is the
/// coordinate of the way's middle node (middle index); ways whose middle
/// node has no coordinates in the extract are skipped and counted.
pub fn extract_streets(extract: &OsmExtract) -> (Vec<StreetRecord>, StreetStats) {
    let mut streets = Vec::new();
    let mut stats = StreetStats::default();
    for way in &extract.ways {
        if !way.tags.contains_key("highway") {
            continue;
        }
        stats.highway_ways += 1;
        let Some(name) = way.tags.get("name").filter(|n| !n.trim().is_empty()) else {
            continue;
        };
        let Some(point) = way
            .node_refs
            .get(way.node_refs.len() / 2)
            .and_then(|id| extract.nodes.get(id))
        else {
            stats.skipped_missing_nodes += 1;
            continue;
        };
        let wikidata = way.tags.get("wikidata").and_then(|v| first_entity_id(v));
        let mut street =
            StreetRecord::new(format!("way/{}", way.id), name.trim(), *point, wikidata);
        if let Some(value) = way.tags.get("name:etymology:wikidata") {
            street.etymology_person = first_entity_id(value);
            if street.etymology_person.is_some() {
                stats.with_etymology += 1;
            }
        }
        stats.named_streets += 1;
        streets.push(street);
    }
    (streets, stats)
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BoundaryStats {
    pub boundary_relations: u64,
    pub assembled: u64,
    pub dropped_open_rings: u64,
    pub dropped_missing_nodes: u64,
    pub without_wikidata: u64,
}

/// Assemble administrative boundary polygons from the extract's boundary
/// relations: member ways are stitched end-to-end into closed rings
/// (`outer` and `inner` roles both contribute; even-odd containment treats
/// inner rings as holes automatically).
pub fn assemble_boundaries(extract: &OsmExtract) -> (Vec<AdminBoundary>, BoundaryStats) {
    let ways_by_id: HashMap<i64, &OsmWay> = extract.ways.iter().map(|w| (w.id, w)).collect();
    let mut boundaries = Vec::new();
    let mut stats = BoundaryStats::default();

    for relation in &extract.relations {
        let is_boundary = relation.tags.get("boundary").map(String::as_str) == Some("administrative")
            || relation.tags.get("type").map(String::as_str) == Some("boundary");
        let Some(admin_level) = relation
            .tags
            .get("admin_level")
            .and_then(|l| l.trim().parse::<i32>().ok())
        else {
            continue;
        };
        if !is_boundary {
            continue;
        }
        stats.boundary_relations += 1;

        let segments: Vec<Vec<i64>> = relation
            .members
            .iter()
            .filter(|m| {
                m.member_type == "way" && matches!(m.role.as_str(), "outer" | "inner" | "")
            })
            .filter_map(|m| ways_by_id.get(&m.member_ref))
            .map(|w| w.node_refs.clone())
            .filter(|refs| !refs.is_empty())
            .collect();
        let (rings, open) = stitch_rings(segments);
        stats.dropped_open_rings += open;
        if rings.is_empty() {
            continue;
        }

        let mut polygon = Vec::with_capacity(rings.len());
        let mut missing = false;
        for ring in rings {
            let mut points = Vec::with_capacity(ring.len());
            for node in ring {
                match extract.nodes.get(&node) {
                    Some(point) => points.push(*point),
                    None => {
                        missing = true;
                        break;
                    }
                }
            }
            if missing {
                break;
            }
            polygon.push(points);
        }
        if missing {
            stats.dropped_missing_nodes += 1;
            continue;
        }

        let wikidata = relation.tags.get("wikidata").and_then(|v| first_entity_id(v));
        if wikidata.is_none() {
            stats.without_wikidata += 1;
        }
        match AdminBoundary::new(format!("relation/{}", relation.id), admin_level, polygon, wikidata)
        {
            Ok(mut boundary) => {
                boundary.name = relation.tags.get("name").cloned();
                stats.assembled += 1;
                boundaries.push(boundary);
            }
            Err(_) => {
                stats.dropped_open_rings += 1;
            }
        }
    }
    (boundaries, stats)
}

/// Stitch way segments into closed node rings by matching endpoints;
/// segments may need reversing. Returns the closed rings and the number of
/// assemblies abandoned as open.
fn stitch_rings(mut segments: Vec<Vec<i64>>) -> (Vec<Vec<i64>>, u64) {
    let mut rings = Vec::new();
    let mut open = 0u64;
    while let Some(mut ring) = segments.pop() {
        loop {
            let first = *ring.first().expect("segments are non-empty");
            let last = *ring.last().expect("segments are non-empty");
            if first == last {
                if ring.len() >= 4 {
                    rings.push(ring);
                } else {
                    open += 1;
                }
                break;
            }
            let position = segments.iter().position(|seg| {
                let s = *seg.first().unwrap();
                let e = *seg.last().unwrap();
                s == last || e == last || s == first || e == first
            });
            match position {
                Some(idx) => {
                    let mut seg = segments.remove(idx);
                    if *seg.last().unwrap() == last || *seg.first().unwrap() == first {
                        seg.reverse();
                    }
                    if *seg.first().unwrap() == last {
                        ring.extend(seg.into_iter().skip(1));
                    } else {
                        // seg ends where the ring starts; prepend it.
                        let mut prefix = seg;
                        prefix.extend(ring.into_iter().skip(1));
                        ring = prefix;
                    }
                }
                None => {
                    open += 1;
                    break;
                }
            }
        }
    }
    (rings, open)
}
