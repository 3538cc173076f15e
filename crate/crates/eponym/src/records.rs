//! Newline-delimited JSON record files for persons, locations and streets.
//! Field names are exactly those of the record types.

use std::io::BufRead;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use eponym_core::dag::LocationNode;
use eponym_core::person::PersonRecord;
use eponym_core::street::StreetRecord;

use crate::error::Error;
use crate::fsio;

pub fn write_ndjson<T: Serialize>(
    stage: &'static str,
    path: &Path,
    records: &[T],
) -> Result<(), Error> {
    fsio::write_atomic(path, |w| {
        for record in records {
            let line = serde_json::to_string(record)
                .map_err(|e| std::io::Error::other(format!("serialize record: {e}")))?;
            w.write_all(line.as_bytes())?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
    .map_err(|e| Error::io(stage, path, e))
}

pub fn read_ndjson<T: DeserializeOwned>(stage: &'static str, path: &Path) -> Result<Vec<T>, Error> {
    let reader = fsio::open_reader(path).map_err(|e| Error::io(stage, path, e))?;
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(stage, path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            stage,
            path: path.to_path_buf(),
            line: idx as u64 + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

pub fn write_persons(stage: &'static str, path: &Path, persons: &[PersonRecord]) -> Result<(), Error> {
    write_ndjson(stage, path, persons)
}

pub fn read_persons(stage: &'static str, path: &Path) -> Result<Vec<PersonRecord>, Error> {
    read_ndjson(stage, path)
}

pub fn write_locations(
    stage: &'static str,
    path: &Path,
    locations: &[LocationNode],
) -> Result<(), Error> {
    write_ndjson(stage, path, locations)
}

pub fn read_locations(stage: &'static str, path: &Path) -> Result<Vec<LocationNode>, Error> {
    read_ndjson(stage, path)
}

pub fn write_streets(stage: &'static str, path: &Path, streets: &[StreetRecord]) -> Result<(), Error> {
    write_ndjson(stage, path, streets)
}

pub fn read_streets(stage: &'static str, path: &Path) -> Result<Vec<StreetRecord>, Error> {
    read_ndjson(stage, path)
}
