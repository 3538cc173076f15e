//! Boundary polygons from GeoJSON files, plus the region-name fallback
//! table for extracts without usable polygons.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use eponym_core::ids::EntityId;
use eponym_core::normalize::normalize;
use eponym_core::street::AdminBoundary;

use crate::error::Error;
use crate::fsio;

#[derive(Deserialize)]
struct FeatureCollection {
    #[serde(default)]
    features: Vec<Feature>,
}

#[derive(Deserialize)]
struct Feature {
    #[serde(default)]
    properties: Properties,
    geometry: Option<Geometry>,
}

#[derive(Deserialize, Default)]
struct Properties {
    #[serde(default)]
    admin_level: Option<serde_json::Value>,
    #[serde(default)]
    wikidata: Option<String>,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(tag = "type")]
enum Geometry {
    Polygon {
        coordinates: Vec<Vec<[f64; 2]>>,
    },
    MultiPolygon {
        coordinates: Vec<Vec<Vec<[f64; 2]>>>,
    },
}

fn admin_level_of(value: &Option<serde_json::Value>) -> Option<i32> {
    match value {
        Some(serde_json::Value::Number(n)) => n.as_i64().map(|v| v as i32),
        Some(serde_json::Value::String(s)) => s.trim().parse().ok(),
        _ => None,
    }
}

/// GeoJSON positions are `[longitude, latitude]`; boundary rings store
/// (latitude, longitude).
fn ring_from_positions(positions: Vec<[f64; 2]>) -> Vec<(f64, f64)> {
    positions.into_iter().map(|[lon, lat]| (lat, lon)).collect()
}

/// Read admin boundaries from a GeoJSON FeatureCollection. Features without
/// a polygonal geometry or a parsable `admin_level` are skipped; invalid
/// rings are a format error, not a silent wrong answer.
pub fn load_geojson_boundaries(
    stage: &'static str,
    path: &Path,
) -> Result<Vec<AdminBoundary>, Error> {
    let bytes = fsio::read_bytes(path).map_err(|e| Error::io(stage, path, e))?;
    let collection: FeatureCollection = serde_json::from_slice(&bytes)
        .map_err(|e| Error::format(stage, path, format!("invalid GeoJSON: {e}")))?;

    let mut boundaries = Vec::new();
    for (index, feature) in collection.features.into_iter().enumerate() {
        let Some(level) = admin_level_of(&feature.properties.admin_level) else {
            continue;
        };
        let rings: Vec<Vec<(f64, f64)>> = match feature.geometry {
            Some(Geometry::Polygon { coordinates }) => {
                coordinates.into_iter().map(ring_from_positions).collect()
            }
            Some(Geometry::MultiPolygon { coordinates }) => coordinates
                .into_iter()
                .flatten()
                .map(ring_from_positions)
                .collect(),
            None => continue,
        };
        if rings.is_empty() {
            continue;
        }
        let wikidata = feature
            .properties
            .wikidata
            .as_deref()
            .filter(|w| w.starts_with('Q'))
            .map(EntityId::from);
        let mut boundary =
            AdminBoundary::new(format!("feature/{index}"), level, rings, wikidata)
                .map_err(|e| Error::format(stage, path, format!("feature {index}: {e}")))?;
        boundary.name = feature.properties.name;
        boundaries.push(boundary);
    }
    Ok(boundaries)
}

/// The two-column fallback table: normalized region name → entity id.
/// Used to anchor streets via their `addr:*`/`is_in` tags when no polygon
/// matched.
pub fn load_region_map(
    stage: &'static str,
    path: &Path,
) -> Result<BTreeMap<String, EntityId>, Error> {
    let reader = fsio::open_reader(path).map_err(|e| Error::io(stage, path, e))?;
    let mut map = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(stage, path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((name, id)) = trimmed.split_once('\t') else {
            return Err(Error::Parse {
                stage,
                path: path.to_path_buf(),
                line: idx as u64 + 1,
                message: String::from("expected two tab-separated columns"),
            });
        };
        map.insert(normalize(name), EntityId::from(id.trim()));
    }
    Ok(map)
}

/// Tags consulted, in order, when resolving a street's region by name.
pub const REGION_TAG_KEYS: [&str; 4] = ["addr:suburb", "addr:city", "addr:district", "is_in"];

/// Resolve a street's region from its way tags against the region map.
pub fn region_from_tags(
    tags: &std::collections::HashMap<String, String>,
    region_map: &BTreeMap<String, EntityId>,
) -> Option<EntityId> {
    for key in REGION_TAG_KEYS {
        let Some(value) = tags.get(key) else {
            continue;
        };
        for part in value.split(';') {
            if let Some(id) = region_map.get(&normalize(part)) {
                return Some(id.clone());
            }
        }
    }
    None
}
