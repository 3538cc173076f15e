//! Candidate retrieval: from a street name to its set of candidate persons.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::affix::{truncate, AffixSet};
use crate::ids::EntityId;
use crate::index::IndexBundle;
use crate::street::StreetRecord;

/// How truncation variants combine into the candidate set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RetrievalMode {
    /// The first truncation variant with a non-empty lookup wins.
    #[default]
    FirstMatch,
    /// Union of the lookups of every truncation variant (ablation mode).
    Union,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RetrievalOptions {
    pub mode: RetrievalMode,
    /// Optional per-street cap, applied by descending link count with the
    /// lexicographically smaller id winning ties.
    pub cap: Option<usize>,
}

/// The candidate persons of one street.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub street: StreetRecord,
    pub term_used: String,
    pub candidates: BTreeSet<EntityId>,
}

/// Query the person index with the street's truncation variants, best
/// first. When every variant misses, `candidates` is empty and `term_used`
/// is the head variant (or the raw name if truncation yielded nothing).
pub fn retrieve(
    street: &StreetRecord,
    bundle: &IndexBundle,
    affixes: &AffixSet,
    opts: RetrievalOptions,
) -> CandidateSet {
    let terms = truncate(&street.name, affixes);

    let mut term_used: Option<String> = None;
    let mut candidates: BTreeSet<EntityId> = BTreeSet::new();
    match opts.mode {
        RetrievalMode::FirstMatch => {
            for term in &terms {
                let hits = bundle.lookup_persons(term);
                if !hits.is_empty() {
                    term_used = Some(term.clone());
                    candidates = hits.clone();
                    break;
                }
            }
        }
        RetrievalMode::Union => {
            for term in &terms {
                let hits = bundle.lookup_persons(term);
                if !hits.is_empty() {
                    if term_used.is_none() {
                        term_used = Some(term.clone());
                    }
                    candidates.extend(hits.iter().cloned());
                }
            }
        }
    }

    if let Some(cap) = opts.cap {
        candidates = apply_cap(candidates, cap, bundle);
    }

    CandidateSet {
        street: street.clone(),
        term_used: term_used
            .or_else(|| terms.first().cloned())
            .unwrap_or_else(|| street.name.clone()),
        candidates,
    }
}

fn apply_cap(candidates: BTreeSet<EntityId>, cap: usize, bundle: &IndexBundle) -> BTreeSet<EntityId> {
    if candidates.len() <= cap {
        return candidates;
    }
    let mut ranked: Vec<EntityId> = candidates.into_iter().collect();
    // BTreeSet iteration is id-ascending, so a stable sort by descending
    // link count leaves ties in id order.
    ranked.sort_by_key(|person| core::cmp::Reverse(bundle.link_count(person)));
    ranked.truncate(cap);
    ranked.into_iter().collect()
}
