use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A classical bitstring, most significant (leftmost) bit first.
///
/// `BitString` is used both for search targets `t1 t2 ... tn` and for
/// measurement outcomes over a qubit subset, in the order the qubits were
/// listed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitString(vec![false; len])
    }

    /// Bits of `value` as a `len`-bit string, MSB first.
    pub fn from_index(value: usize, len: usize) -> Self {
        BitString((0..len).map(|k| (value >> (len - 1 - k)) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Bits `range.start..range.end`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BitString {
        BitString(self.0[range].to_vec())
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    pub fn hamming_weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse {
                    position: i,
                    message: format!("expected '0' or '1', found {c:?}"),
                }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

impl From<Vec<bool>> for BitString {
    fn from(v: Vec<bool>) -> Self {
        BitString(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let b: BitString = "011".parse().unwrap();
        assert_eq!(b.to_index(), 3);
        assert_eq!(BitString::from_index(3, 3), b);
        assert_eq!(b.to_string(), "011");
    }

    #[test]
    fn rejects_other_characters() {
        assert!(matches!(
            "01x".parse::<BitString>(),
            Err(Error::Parse { position: 2, .. })
        ));
    }
}
