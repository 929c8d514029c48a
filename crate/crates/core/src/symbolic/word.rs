use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{input, Result};

const DIGITS: &[u8] = b"0123456789abcdefghijklmnopqrstuvwxyz";

/// Largest alphabet that still has a one-character spelling.
pub const MAX_ALPHABET: usize = 36;

/// A finite word over `{0, .., k-1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses a word spelled with `0-9a-z`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut out = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c.to_digit(36) {
                Some(d) => out.push(d as u8),
                None => return input(format!("bad symbol {c:?} in word {s:?}")),
            }
        }
        Ok(Word(out))
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    /// The word with its first `a` symbols removed (the shift applied `a` times).
    pub fn shifted(&self, a: usize) -> Word {
        Word(self.0[a.min(self.0.len())..].to_vec())
    }

    pub fn extended(&self, b: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(b);
        Word(v)
    }

    pub fn push(&mut self, b: u8) {
        self.0.push(b);
    }

    pub fn starts_with(&self, other: &Word) -> bool {
        self.0.starts_with(&other.0)
    }

    pub fn contains_factor(&self, factor: &[u8]) -> bool {
        if factor.is_empty() {
            return true;
        }
        self.0.windows(factor.len()).any(|w| w == factor)
    }

    pub fn max_symbol(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            let c = DIGITS.get(b as usize).copied().unwrap_or(b'?');
            write!(f, "{}", c as char)?;
        }
        Ok(())
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Word::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let w = Word::parse("0a19").unwrap();
        assert_eq!(w.symbols(), &[0, 10, 1, 9]);
        assert_eq!(w.to_string(), "0a19");
        assert!(Word::parse("0-1").is_err());
    }

    #[test]
    fn shifted_and_prefix() {
        let w = Word::parse("01101").unwrap();
        assert_eq!(w.prefix(2).to_string(), "01");
        assert_eq!(w.shifted(2).to_string(), "101");
        assert!(w.contains_factor(&[1, 1]));
        assert!(!w.contains_factor(&[0, 0]));
    }
}
