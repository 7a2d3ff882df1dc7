use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Binary inclusion vector over the p features of a dataset.
///
/// An all-zero mask is representable; objectives decide how to score it.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FeatureMask {
    bits: Vec<bool>,
}

impl FeatureMask {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn full(p: usize) -> Self {
        Self { bits: vec![true; p] }
    }

    pub fn empty(p: usize) -> Self {
        Self { bits: vec![false; p] }
    }

    /// Builds a mask from 0/1 integers.
    pub fn from_ints(values: &[u8]) -> Self {
        Self {
            bits: values.iter().map(|&v| v != 0).collect(),
        }
    }

    /// Builds a mask of length `p` selecting exactly `indices`.
    pub fn from_indices(p: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; p];
        for &i in indices {
            bits[i] = true;
        }
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn selected_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when no feature is selected.
    pub fn is_none_selected(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn xor(&self, other: &FeatureMask) -> Result<FeatureMask> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(FeatureMask::new(
            self.bits.iter().zip(&other.bits).map(|(a, b)| a ^ b).collect(),
        ))
    }

    pub fn complement(&self) -> FeatureMask {
        FeatureMask::new(self.bits.iter().map(|b| !b).collect())
    }

    pub fn hamming(&self, other: &FeatureMask) -> usize {
        self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count()
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for FeatureMask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Data(format!("invalid mask character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(FeatureMask::new)
    }
}

impl Serialize for FeatureMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FeatureMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_and_indices() {
        let m = FeatureMask::from_ints(&[1, 0, 1, 1]);
        assert_eq!(m.selected_count(), 3);
        assert_eq!(m.selected_indices(), vec![0, 2, 3]);
        assert!(!m.is_none_selected());
        assert!(FeatureMask::empty(3).is_none_selected());
        assert_eq!(m.to_string(), "1011");
    }

    #[test]
    fn xor_length_mismatch() {
        let a = FeatureMask::full(3);
        let b = FeatureMask::full(4);
        assert!(matches!(a.xor(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_bad_characters() {
        assert!("10x1".parse::<FeatureMask>().is_err());
    }

    proptest! {
        #[test]
        fn string_form_roundtrips(bits in proptest::collection::vec(any::<bool>(), 0..64)) {
            let m = FeatureMask::new(bits);
            let json = serde_json::to_string(&m).unwrap();
            let back: FeatureMask = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
