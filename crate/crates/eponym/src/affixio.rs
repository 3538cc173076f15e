//! Loading affix lists from a directory holding `prefixes.txt` and
//! `suffixes.txt` (one affix per line, UTF-8, `#` comments). Without a
//! directory the shipped German lists apply.

use std::path::Path;

use eponym_core::affix::AffixSet;

use crate::error::Error;

pub fn load_affixes(stage: &'static str, dir: Option<&Path>) -> Result<AffixSet, Error> {
    let Some(dir) = dir else {
        return Ok(AffixSet::default_german());
    };
    let prefix_path = dir.join("prefixes.txt");
    let suffix_path = dir.join("suffixes.txt");
    let prefixes =
        std::fs::read_to_string(&prefix_path).map_err(|e| Error::io(stage, &prefix_path, e))?;
    let suffixes =
        std::fs::read_to_string(&suffix_path).map_err(|e| Error::io(stage, &suffix_path, e))?;
    Ok(AffixSet::from_file_contents(&prefixes, &suffixes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lists_apply_without_a_directory() {
        let set = load_affixes("test", None).unwrap();
        assert_eq!(set.suffixes().len(), 80);
        assert_eq!(set.prefixes().len(), 34);
    }

    #[test]
    fn custom_directory_wins() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("prefixes.txt"), "# none\nAm\n").unwrap();
        std::fs::write(dir.path().join("suffixes.txt"), "Weg\nPfad\n").unwrap();
        let set = load_affixes("test", Some(dir.path())).unwrap();
        assert_eq!(set.prefixes().len(), 1);
        assert_eq!(set.suffixes().len(), 2);
    }

    #[test]
    fn missing_files_are_io_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_affixes("test", Some(dir.path())).is_err());
    }
}
