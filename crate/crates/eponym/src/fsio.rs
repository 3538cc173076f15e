//! File helpers: transparent gzip, atomic writes.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;

const BUF_CAPACITY: usize = 1 << 20;

/// Open a file for buffered reading, decompressing `.gz` transparently.
pub fn open_reader(path: &Path) -> io::Result<Box<dyn BufRead>> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let decoder = MultiGzDecoder::new(BufReader::with_capacity(BUF_CAPACITY, file));
        Ok(Box::new(BufReader::with_capacity(BUF_CAPACITY, decoder)))
    } else {
        Ok(Box::new(BufReader::with_capacity(BUF_CAPACITY, file)))
    }
}

/// Write a file atomically: everything goes to a temporary file in the same
/// directory which is renamed over the target only after a successful flush.
/// An interrupted run never leaves a partial file under the final name.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut temp = match dir {
        Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    {
        let mut buffered = io::BufWriter::with_capacity(BUF_CAPACITY, temp.as_file_mut());
        write(&mut buffered)?;
        buffered.flush()?;
    }
    temp.as_file_mut().sync_all()?;
    temp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Convenience wrapper writing a fully materialized buffer atomically.
pub fn write_atomic_bytes(path: &Path, bytes: &[u8]) -> io::Result<()> {
    write_atomic(path, |w| w.write_all(bytes))
}

/// Read a whole file into memory (used for digests and small inputs).
pub fn read_bytes(path: &Path) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}
