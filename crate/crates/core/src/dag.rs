//! The spatial dependency database: "located in" relations between
//! locations, queried as canonical containment chains.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::ids::EntityId;

/// One location and its direct "located in" parents.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LocationNode {
    pub id: EntityId,
    pub label: String,
    pub parents: Vec<EntityId>,
}

impl LocationNode {
    pub fn new(id: impl Into<EntityId>, label: impl Into<String>) -> Self {
        LocationNode {
            id: id.into(),
            label: label.into(),
            parents: Vec::new(),
        }
    }

    pub fn with_parents<I, T>(mut self, parents: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<EntityId>,
    {
        self.parents = parents.into_iter().map(Into::into).collect();
        self
    }
}

/// What the DAG build had to clean up.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DagReport {
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub dangling_parents_dropped: usize,
    pub cycle_edges_removed: Vec<(EntityId, EntityId)>,
}

/// Containment graph over locations, acyclic after [`SpatialDag::build`].
///
/// Multi-parent nodes resolve to a single canonical chain by following the
/// lexicographically smallest parent id. All parents are administrative
/// territorial entities by construction (they come from the located-in
/// property), so no further preference can discriminate between them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpatialDag {
    nodes: BTreeMap<EntityId, LocationNode>,
}

impl SpatialDag {
    /// Deduplicate (last record wins), drop self loops and dangling parents,
    /// and break cycles deterministically: within each cycle found, the edge
    /// whose source id is lexicographically largest is removed.
    pub fn build(locations: impl IntoIterator<Item = LocationNode>) -> (Self, DagReport) {
        let mut report = DagReport::default();

        let mut nodes: BTreeMap<EntityId, LocationNode> = BTreeMap::new();
        for loc in locations {
            nodes.insert(loc.id.clone(), loc);
        }

        let known: BTreeSet<EntityId> = nodes.keys().cloned().collect();
        for node in nodes.values_mut() {
            let mut parents: Vec<EntityId> = Vec::with_capacity(node.parents.len());
            for parent in node.parents.drain(..) {
                if parent == node.id {
                    report.self_loops_dropped += 1;
                } else if !known.contains(&parent) {
                    report.dangling_parents_dropped += 1;
                } else if !parents.contains(&parent) {
                    parents.push(parent);
                }
            }
            parents.sort();
            node.parents = parents;
        }

        let mut dag = SpatialDag { nodes };
        while let Some(cycle) = dag.find_cycle() {
            // Remove the edge leaving the lexicographically largest node of
            // the cycle.
            let pos = cycle
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp(b.1))
                .map(|(i, _)| i)
                .expect("cycle is non-empty");
            let source = cycle[pos].clone();
            let target = cycle[(pos + 1) % cycle.len()].clone();
            let node = dag.nodes.get_mut(&source).expect("cycle node exists");
            node.parents.retain(|p| *p != target);
            report.cycle_edges_removed.push((source, target));
        }

        report.nodes = dag.nodes.len();
        report.edges = dag.nodes.values().map(|n| n.parents.len()).sum();
        (dag, report)
    }

    /// Reassemble a previously built (already acyclic) DAG.
    pub fn from_parts(nodes: BTreeMap<EntityId, LocationNode>) -> Self {
        SpatialDag { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn node(&self, id: &EntityId) -> Option<&LocationNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &LocationNode> {
        self.nodes.values()
    }

    /// The parent followed by [`SpatialDag::chain_of`]. Parents are kept
    /// sorted, so the first is the lexicographically smallest.
    pub fn canonical_parent(&self, id: &EntityId) -> Option<&EntityId> {
        self.nodes.get(id)?.parents.first()
    }

    /// Containment chain starting at `id` (self first, most general last).
    /// Unknown ids yield the singleton chain.
    pub fn chain_of(&self, id: &EntityId) -> Vec<EntityId> {
        let mut chain = alloc::vec![id.clone()];
        let mut current = id.clone();
        // Acyclicity bounds the walk; the explicit cap guards data that came
        // in through `from_parts`.
        for _ in 0..self.nodes.len() {
            match self.canonical_parent(&current) {
                Some(parent) => {
                    if chain.contains(parent) {
                        break;
                    }
                    chain.push(parent.clone());
                    current = parent.clone();
                }
                None => break,
            }
        }
        chain
    }

    fn find_cycle(&self) -> Option<Vec<EntityId>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let ids: Vec<&EntityId> = self.nodes.keys().collect();
        let mut color: BTreeMap<&EntityId, Color> =
            ids.iter().map(|id| (*id, Color::White)).collect();

        for root in &ids {
            if color[*root] != Color::White {
                continue;
            }
            // Iterative DFS keeping the gray path for cycle extraction.
            let mut stack: Vec<(&EntityId, usize)> = alloc::vec![(*root, 0)];
            *color.get_mut(*root).unwrap() = Color::Gray;
            while let Some((node, next_child)) = stack.pop() {
                let parents = &self.nodes[node].parents;
                if next_child < parents.len() {
                    stack.push((node, next_child + 1));
                    let child = &parents[next_child];
                    match color[child] {
                        Color::White => {
                            *color.get_mut(child).unwrap() = Color::Gray;
                            stack.push((child, 0));
                        }
                        Color::Gray => {
                            let mut cycle: Vec<EntityId> = stack
                                .iter()
                                .map(|(id, _)| (*id).clone())
                                .skip_while(|id| id != child)
                                .collect();
                            if cycle.is_empty() {
                                cycle.push(child.clone());
                            }
                            return Some(cycle);
                        }
                        Color::Black => {}
                    }
                } else {
                    *color.get_mut(node).unwrap() = Color::Black;
                }
            }
        }
        None
    }
}
