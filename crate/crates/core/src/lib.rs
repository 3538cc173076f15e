//! Core logic for linking named streets to the persons they were named after.
//!
//! Everything in this crate is pure computation over in-memory data: street
//! name truncation, exact-term candidate retrieval against a person name
//! index, spatial containment scoring over a "located in" hierarchy, a
//! 30-dimensional feature extractor, a logistic-regression linker and the
//! evaluation harness. Parsing, persistence and the command line live in the
//! companion `eponym` crate.
//!
//! The crate is `no_std`-compatible (requires `alloc`); enable the `libm`
//! feature instead of `std` for freestanding builds.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("eponym-core needs either the `std` or the `libm` feature for f64 math");

pub mod affix;
pub mod dag;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod ids;
pub mod index;
pub mod model;
pub mod normalize;
pub mod person;
pub mod retrieve;
pub mod street;

mod scalar;

pub use affix::AffixSet;
pub use dag::{LocationNode, SpatialDag};
pub use features::{FeatureVector, OccupationVocabulary, FEATURE_DIM, OCCUPATION_SLOTS};
pub use ids::EntityId;
pub use index::{build_indexes, IndexBundle, PersonNameIndex};
pub use model::{Hyperparameters, LabeledPair, LinkDecision, Model};
pub use person::{PersonRecord, RawEntity, RelationKind};
pub use retrieve::{retrieve, CandidateSet, RetrievalMode, RetrievalOptions};
pub use street::{harvest_etymology, AdminBoundary, StreetRecord};
