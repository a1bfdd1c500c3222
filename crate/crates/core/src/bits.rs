//! Bit-string helpers and small GF(2) kernels.
//!
//! Bit strings are stored as `u64` with an explicit width. Qubit `j` owns bit
//! `j - 1`, and strings print most-significant-first, i.e. `format_bits(5, 4)`
//! is `"0101"` — the ordinary binary literal.

use crate::error::{Error, Result};

/// Render `width` low bits of `value`, most-significant-first.
pub fn format_bits(value: u64, width: usize) -> String {
    debug_assert!(width == 64 || value < (1u64 << width));
    format!("{value:0width$b}")
}

/// Parse a '0'/'1' string (most-significant-first) into `(value, width)`.
pub fn parse_bits(s: &str) -> Result<(u64, usize)> {
    if s.is_empty() || s.len() > 63 {
        return Err(Error::Malformed(format!(
            "bit string must have 1..=63 characters, got {}",
            s.len()
        )));
    }
    if let Some(bad) = s.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Error::Malformed(format!(
            "bit string may only contain '0' and '1', got {bad:?}"
        )));
    }
    let value = u64::from_str_radix(s, 2).expect("validated binary digits");
    Ok((value, s.len()))
}

/// Parse a bit string and require an exact width.
pub fn parse_bits_exact(s: &str, width: usize) -> Result<u64> {
    let (value, got) = parse_bits(s)?;
    if got != width {
        return Err(Error::BitLengthMismatch {
            expected: width,
            actual: got,
        });
    }
    Ok(value)
}

/// Parity of the set bits, as a bit.
pub fn parity(x: u64) -> u64 {
    (x.count_ones() & 1) as u64
}

/// Extract the bit owned by qubit `j` (1-based).
pub fn qubit_bit(value: u64, j: usize) -> u8 {
    ((value >> (j - 1)) & 1) as u8
}

/// Rank of a set of bit vectors over GF(2).
pub fn gf2_rank(vectors: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &b in &basis {
            let pivot = 1u64 << (63 - b.leading_zeros());
            if v & pivot != 0 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len()
}

/// True iff the vectors are linearly independent over GF(2).
pub fn gf2_independent(vectors: &[u64]) -> bool {
    gf2_rank(vectors) == vectors.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse_round_trip() {
        assert_eq!(format_bits(5, 4), "0101");
        assert_eq!(parse_bits("0101").unwrap(), (5, 4));
        assert_eq!(parse_bits_exact("0101", 4).unwrap(), 5);
        assert!(parse_bits_exact("0101", 3).is_err());
        assert!(parse_bits("01a1").is_err());
        assert!(parse_bits("").is_err());
    }

    #[test]
    fn qubit_one_is_lowest_bit() {
        // 0b0101: qubit 1 set, qubit 2 clear, qubit 3 set.
        assert_eq!(qubit_bit(5, 1), 1);
        assert_eq!(qubit_bit(5, 2), 0);
        assert_eq!(qubit_bit(5, 3), 1);
        assert_eq!(qubit_bit(5, 4), 0);
    }

    #[test]
    fn gf2_rank_detects_dependencies() {
        assert!(gf2_independent(&[0b001, 0b010, 0b100]));
        // 111 = 001 ^ 010 ^ 100
        assert!(!gf2_independent(&[0b001, 0b010, 0b100, 0b111]));
        assert_eq!(gf2_rank(&[0b001, 0b010, 0b100, 0b111]), 3);
        assert_eq!(gf2_rank(&[0b011, 0b011]), 1);
        assert_eq!(gf2_rank(&[0]), 0);
    }

    #[test]
    fn parity_of_masks() {
        assert_eq!(parity(0), 0);
        assert_eq!(parity(0b1011), 1);
        assert_eq!(parity(0b1001), 0);
    }
}
