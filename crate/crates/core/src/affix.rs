//! Street-name truncation: strip street affixes so that only the part that
//! can name a person remains.
//!
//! The default German lists (80 suffixes, 34 prefixes) ship with the crate;
//! custom lists load from plain text, one affix per line, `#` comments
//! allowed.

use alloc::string::String;
use alloc::vec::Vec;

use crate::normalize::{self, collapse_whitespace, hyphens_to_spaces, is_hyphen, normalize};

pub const DEFAULT_SUFFIXES: &str = include_str!("../data/affixes/suffixes.txt");
pub const DEFAULT_PREFIXES: &str = include_str!("../data/affixes/prefixes.txt");

/// Ordered affix lists. Entries are normalized and sorted longest-first so
/// that "Landstraße" wins over "Straße".
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AffixSet {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
}

impl AffixSet {
    pub fn new<P, S>(prefixes: P, suffixes: S) -> Self
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        S: IntoIterator,
        S::Item: AsRef<str>,
    {
        AffixSet {
            prefixes: clean_entries(prefixes),
            suffixes: clean_entries(suffixes),
        }
    }

    /// Parse the plain-text file format (one affix per line, `#` comments).
    pub fn from_file_contents(prefixes: &str, suffixes: &str) -> Self {
        AffixSet::new(parse_lines(prefixes), parse_lines(suffixes))
    }

    /// The shipped German lists: 80 suffixes and 34 prefixes.
    pub fn default_german() -> Self {
        let set = AffixSet::from_file_contents(DEFAULT_PREFIXES, DEFAULT_SUFFIXES);
        debug_assert_eq!(set.suffixes.len(), 80);
        debug_assert_eq!(set.prefixes.len(), 34);
        set
    }

    pub fn empty() -> Self {
        AffixSet::default()
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }
}

fn parse_lines(contents: &str) -> Vec<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

fn clean_entries<I>(entries: I) -> Vec<String>
where
    I: IntoIterator,
    I::Item: AsRef<str>,
{
    let mut cleaned: Vec<String> = entries
        .into_iter()
        .map(|e| normalize(&hyphens_to_spaces(e.as_ref())))
        .filter(|e| !e.is_empty())
        .collect();
    // Longest first (in chars), then lexicographic for determinism.
    cleaned.sort_by(|a, b| {
        b.chars()
            .count()
            .cmp(&a.chars().count())
            .then_with(|| a.cmp(b))
    });
    cleaned.dedup();
    cleaned
}

/// Produce candidate person-name terms for a street name, best first.
///
/// At most one suffix and one prefix are removed. Suffixes match both glued
/// ("Wilhelmstraße") and separated ("Konrad-Adenauer-Straße", "Große
/// Straße"); prefixes match as leading tokens only, since glued prefix
/// matching would mangle given names ("Annastraße" must not lose "An").
/// Remaining hyphens become spaces and whitespace is collapsed.
///
/// The fully stripped form comes first, then the suffix-only, prefix-only
/// and raw fallbacks, deduplicated. Variants that are empty or consist
/// entirely of affixes are omitted, so a name like "Neue Straße" yields an
/// empty list.
pub fn truncate(name: &str, affixes: &AffixSet) -> Vec<String> {
    // A name consisting only of affixes ("Neue Straße") has no person part.
    if is_affix_tiling(name, affixes) {
        return Vec::new();
    }

    let chars: Vec<char> = name.chars().collect();
    let after_suffix = strip_suffix(&chars, affixes);
    let after_prefix = strip_prefix(&chars, affixes);
    let after_both = match &after_suffix {
        Some(rest) => strip_prefix(rest, affixes).or_else(|| Some(rest.clone())),
        None => None,
    };

    let mut out: Vec<String> = Vec::with_capacity(4);
    let mut push = |variant: Option<&[char]>| {
        let raw: String = match variant {
            Some(v) => v.iter().collect(),
            None => return,
        };
        let finalized = collapse_whitespace(&hyphens_to_spaces(&raw));
        if finalized.is_empty() {
            return;
        }
        if !out.contains(&finalized) {
            out.push(finalized);
        }
    };

    push(after_both.as_deref());
    push(after_suffix.as_deref());
    push(after_prefix.as_deref());
    push(Some(&chars));
    out
}

/// Case folding for affix matching: char-wise lowercase with hyphens mapped
/// to spaces, so "An-der-Höhe" matches the prefix "an der".
fn fold(c: char) -> char {
    if is_hyphen(c) {
        ' '
    } else {
        c.to_lowercase().next().unwrap_or(c)
    }
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || is_hyphen(c)
}

fn strip_suffix(chars: &[char], affixes: &AffixSet) -> Option<Vec<char>> {
    for suffix in &affixes.suffixes {
        let pat: Vec<char> = suffix.chars().collect();
        if pat.len() > chars.len() {
            continue;
        }
        let boundary = chars.len() - pat.len();
        let tail_matches = chars[boundary..]
            .iter()
            .zip(&pat)
            .all(|(c, p)| fold(*c) == *p);
        if !tail_matches {
            continue;
        }
        if boundary == 0 {
            return Some(Vec::new());
        }
        let prev = chars[boundary - 1];
        if is_separator(prev) {
            return Some(chars[..boundary].to_vec());
        }
        // Glued compound: only single-token suffixes can end a compound, and
        // something of the token must remain.
        if !suffix.contains(' ') {
            return Some(chars[..boundary].to_vec());
        }
    }
    None
}

fn strip_prefix(chars: &[char], affixes: &AffixSet) -> Option<Vec<char>> {
    for prefix in &affixes.prefixes {
        let pat: Vec<char> = prefix.chars().collect();
        if pat.len() > chars.len() {
            continue;
        }
        let head_matches = chars[..pat.len()]
            .iter()
            .zip(&pat)
            .all(|(c, p)| fold(*c) == *p);
        if !head_matches {
            continue;
        }
        if pat.len() == chars.len() {
            return Some(Vec::new());
        }
        if is_separator(chars[pat.len()]) {
            return Some(chars[pat.len()..].to_vec());
        }
    }
    None
}

/// True iff the term's token sequence is exactly a concatenation of affix
/// entries, i.e. nothing person-name-like remains.
fn is_affix_tiling(term: &str, affixes: &AffixSet) -> bool {
    let tokens = normalize::tokenize(term);
    if tokens.is_empty() {
        return true;
    }
    let pieces: Vec<Vec<String>> = affixes
        .prefixes
        .iter()
        .chain(&affixes.suffixes)
        .map(|a| normalize::tokenize(a))
        .filter(|t| !t.is_empty())
        .collect();
    if pieces.is_empty() {
        return false;
    }
    // Tiny DP over token positions.
    let mut reachable = alloc::vec![false; tokens.len() + 1];
    reachable[0] = true;
    for start in 0..tokens.len() {
        if !reachable[start] {
            continue;
        }
        for piece in &pieces {
            let end = start + piece.len();
            if end <= tokens.len() && tokens[start..end] == piece[..] {
                reachable[end] = true;
            }
        }
    }
    reachable[tokens.len()]
}
