//! Pronunciation lexicon, homophone index, and glyph typing-code tables.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::jyutping::JyutpingCode;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub character: char,
    pub code: JyutpingCode,
}

/// Ordered `(character, code)` entries with duplicates collapsed.
///
/// File order is kept so later stages can break ties by first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    seen: BTreeSet<(char, JyutpingCode)>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (char, JyutpingCode)>,
    {
        let mut lex = Self::new();
        for (character, code) in entries {
            lex.insert(character, code);
        }
        lex
    }

    /// Adds an entry, returning `false` if the pair was already present.
    pub fn insert(&mut self, character: char, code: JyutpingCode) -> bool {
        if !self.seen.insert((character, code.clone())) {
            return false;
        }
        self.entries.push(LexiconEntry { character, code });
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    /// Distinct characters in order of first appearance.
    pub fn characters(&self) -> Vec<char> {
        let mut seen = BTreeSet::new();
        self.entries
            .iter()
            .filter(|e| seen.insert(e.character))
            .map(|e| e.character)
            .collect()
    }
}

/// Homophone sets keyed by Jyutping code, plus per-character pronunciation
/// counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomophoneIndex {
    by_code: BTreeMap<JyutpingCode, Vec<char>>,
    codes: BTreeMap<char, Vec<JyutpingCode>>,
}

impl HomophoneIndex {
    pub fn build(lex: &Lexicon) -> Self {
        let mut by_code: BTreeMap<JyutpingCode, BTreeSet<char>> = BTreeMap::new();
        let mut codes: BTreeMap<char, BTreeSet<JyutpingCode>> = BTreeMap::new();
        for entry in lex.entries() {
            by_code
                .entry(entry.code.clone())
                .or_default()
                .insert(entry.character);
            codes
                .entry(entry.character)
                .or_default()
                .insert(entry.code.clone());
        }
        Self {
            by_code: by_code
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
            codes: codes
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.by_code.is_empty()
    }

    /// `H_c` for one code, ordered by code point. Empty if the code is unknown.
    pub fn characters_for(&self, code: &JyutpingCode) -> &[char] {
        self.by_code.get(code).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn codes_of(&self, character: char) -> &[JyutpingCode] {
        self.codes.get(&character).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of distinct codes listing `character`; zero when absent.
    pub fn pron_count(&self, character: char) -> u32 {
        self.codes_of(character).len() as u32
    }

    /// Union of the homophone sets over every code of `character`, minus the
    /// character itself, ordered by code point.
    pub fn homophones_of(&self, character: char) -> Vec<char> {
        let mut out = BTreeSet::new();
        for code in self.codes_of(character) {
            out.extend(self.characters_for(code).iter().copied());
        }
        out.remove(&character);
        out.into_iter().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&JyutpingCode, &[char])> {
        self.by_code.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Characters with at least one code, ordered by code point.
    pub fn characters(&self) -> impl Iterator<Item = char> + '_ {
        self.codes.keys().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GlyphError {
    #[error("typing code for {character:?} must be non-empty ascii")]
    InvalidCode { character: char },
}

/// Character to typing-code mapping for one glyph-based input method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphCodeTable {
    method: String,
    codes: BTreeMap<char, Vec<String>>,
}

impl GlyphCodeTable {
    /// Input methods the discovery step was designed around.
    pub const KNOWN_METHODS: [&'static str; 10] = [
        "Changjei5",
        "Simplex5",
        "BSM",
        "CKC",
        "QCode",
        "G6Code",
        "Stroke5",
        "Boshiamy",
        "DaYi4",
        "4Corner5",
    ];

    pub fn new(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            codes: BTreeMap::new(),
        }
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    /// Records an alternative typing; repeated codes are ignored.
    pub fn insert(&mut self, character: char, code: &str) -> Result<(), GlyphError> {
        if code.is_empty() || !code.is_ascii() {
            return Err(GlyphError::InvalidCode { character });
        }
        let list = self.codes.entry(character).or_default();
        if !list.iter().any(|c| c == code) {
            list.push(String::from(code));
        }
        Ok(())
    }

    pub fn codes_of(&self, character: char) -> Option<&[String]> {
        self.codes.get(&character).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[String])> {
        self.codes.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}
