use alloc::string::String;
use core::fmt;
use core::str::FromStr;

/// A Jyutping syllable with its tone, e.g. `wong4`.
///
/// Ordering is by syllable text, then tone.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JyutpingCode {
    syllable: String,
    tone: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JyutpingError {
    #[error("empty jyutping code")]
    Empty,
    #[error("jyutping code has no tone digit")]
    MissingTone,
    #[error("invalid tone {0}, expected 1..=6")]
    InvalidTone(u8),
    #[error("jyutping syllable must be lowercase ascii letters")]
    InvalidSyllable,
}

impl JyutpingCode {
    pub fn new(syllable: &str, tone: u8) -> Result<Self, JyutpingError> {
        if syllable.is_empty() {
            return Err(JyutpingError::Empty);
        }
        if !syllable.bytes().all(|b| b.is_ascii_lowercase()) {
            return Err(JyutpingError::InvalidSyllable);
        }
        if !(1..=6).contains(&tone) {
            return Err(JyutpingError::InvalidTone(tone));
        }
        Ok(Self {
            syllable: String::from(syllable),
            tone,
        })
    }

    pub fn syllable(&self) -> &str {
        &self.syllable
    }

    pub fn tone(&self) -> u8 {
        self.tone
    }
}

impl FromStr for JyutpingCode {
    type Err = JyutpingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let last = s.chars().next_back().ok_or(JyutpingError::Empty)?;
        let tone = last.to_digit(10).ok_or(JyutpingError::MissingTone)? as u8;
        let syllable = &s[..s.len() - 1];
        if syllable.is_empty() {
            return Err(JyutpingError::Empty);
        }
        Self::new(syllable, tone)
    }
}

impl fmt::Display for JyutpingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.syllable, self.tone)
    }
}
