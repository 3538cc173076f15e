//! Street records and their anchoring into the location hierarchy.

use alloc::string::String;
use alloc::vec::Vec;

use crate::dag::SpatialDag;
use crate::geometry::{point_in_rings, Point};
use crate::ids::EntityId;

/// One named street. `chain` is the containment chain used by the spatial
/// features: the street's own element first, then its region, up to the
/// country. A street inside Mitte yields `[street, Mitte, Berlin, Germany]`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StreetRecord {
    pub osm_id: String,
    pub name: String,
    /// (latitude, longitude) of the way's middle node.
    pub representative_point: (f64, f64),
    pub chain: Vec<EntityId>,
    pub etymology_person: Option<EntityId>,
    /// True when the chain was anchored into a known region of the spatial
    /// hierarchy; false means `chain` holds only the street element (or an
    /// anchor unknown to the DAG).
    pub chain_resolved: bool,
}

impl StreetRecord {
    /// A fresh street with an unanchored chain. The chain element is the
    /// street's own knowledge-graph id when known, else a synthetic
    /// `osm:`-prefixed id.
    pub fn new(
        osm_id: impl Into<String>,
        name: impl Into<String>,
        representative_point: (f64, f64),
        wikidata_id: Option<EntityId>,
    ) -> Self {
        let osm_id = osm_id.into();
        let element = wikidata_id.unwrap_or_else(|| EntityId::new(alloc::format!("osm:{osm_id}")));
        StreetRecord {
            osm_id,
            name: name.into(),
            representative_point,
            chain: alloc::vec![element],
            etymology_person: None,
            chain_resolved: false,
        }
    }

    /// The street's own chain element.
    pub fn element(&self) -> &EntityId {
        &self.chain[0]
    }

    /// Anchor the street at `anchor` and extend the chain through the DAG.
    pub fn attach_chain(&mut self, anchor: &EntityId, dag: &SpatialDag) {
        self.chain.truncate(1);
        self.chain.extend(dag.chain_of(anchor));
        self.chain_resolved = dag.contains(anchor);
    }

    /// Re-derive the upper chain from an already stored anchor (used after
    /// loading records whose chain was written as `[street, anchor]`).
    pub fn expand_chain(&mut self, dag: &SpatialDag) {
        if let Some(anchor) = self.chain.get(1).cloned() {
            self.attach_chain(&anchor, dag);
        }
    }
}

/// One administrative boundary polygon, used to anchor streets by
/// point-in-polygon containment.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdminBoundary {
    pub osm_relation_id: String,
    pub admin_level: i32,
    /// Closed rings (first point equals last, at least four points each).
    pub polygon: Vec<Vec<Point>>,
    pub wikidata_id: Option<EntityId>,
    pub name: Option<String>,
}

impl AdminBoundary {
    /// Validate the ring invariants; invalid rings are rejected rather than
    /// silently producing wrong containment answers.
    pub fn new(
        osm_relation_id: impl Into<String>,
        admin_level: i32,
        polygon: Vec<Vec<Point>>,
        wikidata_id: Option<EntityId>,
    ) -> Result<Self, BoundaryError> {
        for ring in &polygon {
            if ring.len() < 4 {
                return Err(BoundaryError::TooFewPoints(ring.len()));
            }
            if ring.first() != ring.last() {
                return Err(BoundaryError::OpenRing);
            }
        }
        Ok(AdminBoundary {
            osm_relation_id: osm_relation_id.into(),
            admin_level,
            polygon,
            wikidata_id,
            name: None,
        })
    }

    pub fn contains(&self, point: Point) -> bool {
        point_in_rings(point, &self.polygon)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BoundaryError {
    #[error("boundary ring has {0} points, need at least 4")]
    TooFewPoints(usize),
    #[error("boundary ring is not closed (first point != last point)")]
    OpenRing,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AssignReport {
    pub anchored: usize,
    pub unmatched: usize,
    pub anchor_unknown_to_dag: usize,
}

/// Anchor each street into the hierarchy: the innermost (highest
/// `admin_level`) boundary containing the representative point that carries
/// a knowledge-graph id wins. Streets matching no boundary keep their
/// single-element chain and stay flagged unresolved.
///
/// The result is independent of street order; boundaries are ordered by
/// descending admin level with the relation id as tie-break.
pub fn assign_chains(
    streets: &mut [StreetRecord],
    boundaries: &[AdminBoundary],
    dag: &SpatialDag,
) -> AssignReport {
    let mut order: Vec<&AdminBoundary> = boundaries
        .iter()
        .filter(|b| b.wikidata_id.is_some())
        .collect();
    order.sort_by(|a, b| {
        b.admin_level
            .cmp(&a.admin_level)
            .then_with(|| a.osm_relation_id.cmp(&b.osm_relation_id))
    });

    let mut report = AssignReport::default();
    for street in streets.iter_mut() {
        let hit = order
            .iter()
            .find(|b| b.contains(street.representative_point));
        match hit {
            Some(boundary) => {
                let anchor = boundary.wikidata_id.clone().expect("filtered above");
                street.attach_chain(&anchor, dag);
                if street.chain_resolved {
                    report.anchored += 1;
                } else {
                    report.anchor_unknown_to_dag += 1;
                }
            }
            None => {
                street.chain.truncate(1);
                street.chain_resolved = false;
                report.unmatched += 1;
            }
        }
    }
    report
}

/// Ground-truth pairs from streets carrying a person reference. Pairs whose
/// target is not a person in the store are dropped and counted.
pub fn harvest_etymology<'a>(
    streets: impl IntoIterator<Item = &'a StreetRecord>,
    is_person: impl Fn(&EntityId) -> bool,
) -> (Vec<(StreetRecord, EntityId)>, usize) {
    let mut pairs = Vec::new();
    let mut dropped_non_person = 0;
    for street in streets {
        let Some(person) = &street.etymology_person else {
            continue;
        };
        if is_person(person) {
            pairs.push((street.clone(), person.clone()));
        } else {
            dropped_non_person += 1;
        }
    }
    (pairs, dropped_non_person)
}
