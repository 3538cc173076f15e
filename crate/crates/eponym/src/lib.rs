//! IO, file formats and orchestration around [`eponym_core`]: streaming
//! knowledge-graph ingestion, OSM extract parsing, index and model
//! persistence, run manifests and the pipeline behind the `eponym` binary.

pub mod affixio;
pub mod boundaries;
pub mod bundle_io;
pub mod config;
pub mod error;
pub mod fsio;
pub mod kg;
pub mod manifest;
pub mod model_io;
pub mod osm;
pub mod pipeline;
pub mod records;

pub use error::Error;
