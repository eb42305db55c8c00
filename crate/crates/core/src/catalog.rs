//! Named search circuits and fixed target lists for the 3-, 4- and 5-qubit studies.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::plan::SearchPlan;

pub const CATALOG_3Q: [&str; 6] = ["D3M3", "D2M3", "G1D2M2", "D3D3M3", "D3M1|D2M2", "D2M1|D2M2"];

pub const CATALOG_4Q: [&str; 14] = [
    "D4M4",
    "D3M4",
    "D2M4",
    "G1D3M3",
    "G2D2M2",
    "D4D4M4",
    "D3D4M4",
    "D2D4M4",
    "D4M1|D3M3",
    "D3M1|D3M3",
    "D2M1|D3M3",
    "D4M2|D2M2",
    "D3M2|D2M2",
    "D2M2|D2M2",
];

pub const CATALOG_5Q: [&str; 5] = ["D5M5", "G2D3M3", "G3D2M2", "D2M2|D3M3", "D3M3|D2M2"];

const TARGETS_3Q: [&str; 30] = [
    "001", "101", "010", "001", "001", "111", "010", "111", "001", "100", //
    "011", "000", "100", "111", "010", "011", "110", "111", "110", "011", //
    "101", "111", "110", "001", "001", "000", "001", "001", "001", "001",
];

const TARGETS_4Q: [&str; 30] = [
    "1001", "1101", "1010", "0001", "1110", "0010", "1001", "0100", "0011", "0111", //
    "0001", "0101", "1110", "0000", "1010", "1010", "0101", "0011", "0001", "0000", //
    "1100", "0110", "1111", "0111", "0000", "0101", "1101", "1111", "1000", "0111",
];

const TARGETS_5Q: [&str; 30] = [
    "01010", "10001", "01011", "01000", "11111", "00000", "00000", "00100", "01010", "00010", //
    "01011", "11100", "10101", "11010", "00100", "10100", "01010", "11001", "01100", "10001", //
    "00011", "01101", "00011", "10000", "10100", "10000", "11000", "10100", "11111", "11000",
];

/// Circuit names of the catalog for `n` qubits.
pub fn catalog(n: usize) -> Result<&'static [&'static str]> {
    match n {
        3 => Ok(&CATALOG_3Q),
        4 => Ok(&CATALOG_4Q),
        5 => Ok(&CATALOG_5Q),
        _ => Err(Error::Argument(format!("no catalog for {n} qubits"))),
    }
}

pub fn catalog_plans(n: usize) -> Result<Vec<SearchPlan>> {
    catalog(n)?.iter().map(|name| SearchPlan::parse(name, n)).collect()
}

/// The fixed thirty-target list used for the `n`-qubit experiments.
pub fn fixture_targets(n: usize) -> Result<Vec<BitString>> {
    let list: &[&str] = match n {
        3 => &TARGETS_3Q,
        4 => &TARGETS_4Q,
        5 => &TARGETS_5Q,
        _ => return Err(Error::Argument(format!("no target fixture for {n} qubits"))),
    };
    list.iter().map(|s| s.parse()).collect()
}

/// Success probability of the one-oracle classical strategy: guess, check,
/// and on failure guess again among the rest.
pub fn classical_one_oracle(n: usize) -> f64 {
    2.0 / 2f64.powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_sizes_and_validity() {
        assert_eq!(catalog_plans(3).unwrap().len(), 6);
        assert_eq!(catalog_plans(4).unwrap().len(), 14);
        assert_eq!(catalog_plans(5).unwrap().len(), 5);
        assert!(catalog(6).is_err());
    }

    #[test]
    fn fixture_lists() {
        for n in 3..=5 {
            let t = fixture_targets(n).unwrap();
            assert_eq!(t.len(), 30);
            assert!(t.iter().all(|b| b.len() == n));
        }
        let three = fixture_targets(3).unwrap();
        let head: Vec<String> = three[..3].iter().map(|b| b.to_string()).collect();
        assert_eq!(head, ["001", "101", "010"]);
    }

    #[test]
    fn classical_baseline() {
        assert_eq!(classical_one_oracle(5), 0.0625);
    }
}
