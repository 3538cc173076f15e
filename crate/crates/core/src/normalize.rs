//! Term normalization shared by the name index, truncation and matching.
//!
//! Normalization is case-folding plus whitespace cleanup. Diacritics and
//! umlauts are preserved on purpose: "Müller" and "Muller" are different
//! German names and must stay distinct index terms.

use alloc::string::String;
use alloc::vec::Vec;

/// Case-fold, trim and collapse internal whitespace runs to single spaces.
pub fn normalize(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

/// Trim and collapse internal whitespace runs to single spaces.
pub fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for token in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Replace hyphen characters with single spaces (whitespace is collapsed by
/// the caller). Covers ASCII `-` and the Unicode hyphens that show up in map
/// data.
pub fn hyphens_to_spaces(s: &str) -> String {
    s.chars()
        .map(|c| if is_hyphen(c) { ' ' } else { c })
        .collect()
}

pub fn is_hyphen(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}' | '\u{2013}')
}

/// Normalized whitespace tokens of a term, with hyphens treated as
/// separators.
pub fn tokenize(s: &str) -> Vec<String> {
    normalize(&hyphens_to_spaces(s))
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// True iff `needle` occurs as a contiguous run inside `hay`.
pub fn contains_subsequence<T: PartialEq>(hay: &[T], needle: &[T]) -> bool {
    if needle.is_empty() || needle.len() > hay.len() {
        return false;
    }
    hay.windows(needle.len()).any(|w| w == needle)
}
