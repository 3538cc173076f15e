//! Versioned binary persistence for [`IndexBundle`].
//!
//! Layout (all integers little-endian, strings length-prefixed UTF-8):
//!
//! ```text
//! magic "STPB" | u32 version
//! u64 person count | persons…
//!   person: id, full_name, [first], [last], [aliases], [occupation ids],
//!           u32 location count × (u8 relation kind, location id), u64 links
//! u64 node count | nodes…     (id, label, [parent ids])
//! u64 term count | terms…     (term, [person ids])
//! ```
//!
//! The occupation and location indexes are projections of the person
//! records and are rebuilt on load; observational equality is covered by
//! the round-trip tests.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Read, Write};
use std::path::Path;

use eponym_core::dag::{LocationNode, SpatialDag};
use eponym_core::ids::EntityId;
use eponym_core::index::{IndexBundle, PersonNameIndex};
use eponym_core::person::{PersonRecord, RelationKind};

use crate::error::Error;
use crate::fsio;

pub const BUNDLE_MAGIC: &[u8; 4] = b"STPB";
pub const BUNDLE_VERSION: u32 = 1;

pub fn save_bundle(stage: &'static str, path: &Path, bundle: &IndexBundle) -> Result<(), Error> {
    fsio::write_atomic(path, |w| write_bundle(w, bundle)).map_err(|e| Error::io(stage, path, e))
}

pub fn load_bundle(stage: &'static str, path: &Path) -> Result<IndexBundle, Error> {
    let mut reader = fsio::open_reader(path).map_err(|e| Error::io(stage, path, e))?;
    read_bundle(&mut reader).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof => Error::Format {
            stage,
            path: path.to_path_buf(),
            message: format!("corrupt or incompatible index bundle (expected format version {BUNDLE_VERSION}): {e}"),
        },
        _ => Error::io(stage, path, e),
    })
}

fn write_bundle(w: &mut dyn Write, bundle: &IndexBundle) -> io::Result<()> {
    w.write_all(BUNDLE_MAGIC)?;
    w.write_all(&BUNDLE_VERSION.to_le_bytes())?;

    w.write_all(&(bundle.person_count() as u64).to_le_bytes())?;
    for person in bundle.persons() {
        write_str(w, person.id.as_str())?;
        write_str(w, &person.full_name)?;
        write_str_list(w, person.first_names.iter().map(String::as_str))?;
        write_str_list(w, person.last_names.iter().map(String::as_str))?;
        write_str_list(w, person.aliases.iter().map(String::as_str))?;
        write_str_list(w, person.occupations.iter().map(EntityId::as_str))?;
        w.write_all(&(person.locations.len() as u32).to_le_bytes())?;
        for (kind, location) in &person.locations {
            w.write_all(&[kind.index() as u8])?;
            write_str(w, location.as_str())?;
        }
        w.write_all(&person.link_count.to_le_bytes())?;
    }

    let nodes: Vec<&LocationNode> = bundle.dag().nodes().collect();
    w.write_all(&(nodes.len() as u64).to_le_bytes())?;
    for node in nodes {
        write_str(w, node.id.as_str())?;
        write_str(w, &node.label)?;
        write_str_list(w, node.parents.iter().map(EntityId::as_str))?;
    }

    w.write_all(&(bundle.name_index().term_count() as u64).to_le_bytes())?;
    for (term, ids) in bundle.name_index().entries() {
        write_str(w, term)?;
        write_str_list(w, ids.iter().map(EntityId::as_str))?;
    }
    Ok(())
}

fn read_bundle(r: &mut dyn Read) -> io::Result<IndexBundle> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BUNDLE_MAGIC {
        return Err(invalid("bad magic, not an index bundle"));
    }
    let version = read_u32(r)?;
    if version != BUNDLE_VERSION {
        return Err(invalid(format!("unsupported format version {version}")));
    }

    let person_count = read_u64(r)?;
    let mut persons: BTreeMap<EntityId, PersonRecord> = BTreeMap::new();
    for _ in 0..person_count {
        let id = EntityId::new(read_str(r)?);
        let full_name = read_str(r)?;
        let first_names = read_str_list(r)?;
        let last_names = read_str_list(r)?;
        let aliases = read_str_list(r)?;
        let occupations = read_str_list(r)?.into_iter().map(EntityId::new).collect();
        let location_count = read_u32(r)?;
        let mut locations = Vec::with_capacity(location_count as usize);
        for _ in 0..location_count {
            let mut kind_byte = [0u8; 1];
            r.read_exact(&mut kind_byte)?;
            let kind = relation_from_index(kind_byte[0])?;
            locations.push((kind, EntityId::new(read_str(r)?)));
        }
        let link_count = read_u64(r)?;
        persons.insert(
            id.clone(),
            PersonRecord {
                id,
                full_name,
                first_names,
                last_names,
                aliases,
                occupations,
                locations,
                link_count,
            },
        );
    }

    let node_count = read_u64(r)?;
    let mut nodes: BTreeMap<EntityId, LocationNode> = BTreeMap::new();
    for _ in 0..node_count {
        let id = EntityId::new(read_str(r)?);
        let label = read_str(r)?;
        let parents = read_str_list(r)?.into_iter().map(EntityId::new).collect();
        nodes.insert(id.clone(), LocationNode { id, label, parents });
    }

    let term_count = read_u64(r)?;
    let mut entries: BTreeMap<String, BTreeSet<EntityId>> = BTreeMap::new();
    for _ in 0..term_count {
        let term = read_str(r)?;
        let ids: BTreeSet<EntityId> = read_str_list(r)?.into_iter().map(EntityId::new).collect();
        entries.insert(term, ids);
    }

    // Trailing garbage means the file is not what we wrote.
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(invalid("trailing bytes after bundle payload"));
    }

    Ok(IndexBundle::from_parts(
        persons,
        PersonNameIndex::from_entries(entries),
        SpatialDag::from_parts(nodes),
    ))
}

fn relation_from_index(byte: u8) -> io::Result<RelationKind> {
    RelationKind::ALL
        .get(byte as usize)
        .copied()
        .ok_or_else(|| invalid(format!("invalid relation kind {byte}")))
}

fn invalid(message: impl ToString) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, message.to_string())
}

const MAX_STR: u32 = 64 * 1024 * 1024;

fn write_str(w: &mut dyn Write, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn write_str_list<'a>(w: &mut dyn Write, items: impl ExactSizeIterator<Item = &'a str>) -> io::Result<()> {
    w.write_all(&(items.len() as u32).to_le_bytes())?;
    for item in items {
        write_str(w, item)?;
    }
    Ok(())
}

fn read_u32(r: &mut dyn Read) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(r: &mut dyn Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_str(r: &mut dyn Read) -> io::Result<String> {
    let len = read_u32(r)?;
    if len > MAX_STR {
        return Err(invalid(format!("string length {len} exceeds limit")));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| invalid("string payload is not UTF-8"))
}

fn read_str_list(r: &mut dyn Read) -> io::Result<Vec<String>> {
    let count = read_u32(r)?;
    let mut items = Vec::with_capacity(count.min(1024) as usize);
    for _ in 0..count {
        items.push(read_str(r)?);
    }
    Ok(items)
}
