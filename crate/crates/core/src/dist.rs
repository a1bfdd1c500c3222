//! Classical distributions over fixed-width bit strings, total variation
//! distance, and the TSV interchange format
//! (`<bitstring><TAB><probability>`, 17 significant digits, sorted).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;

use crate::bits;
use crate::error::{Error, Result};
use crate::tol::TOL;

/// A probability distribution over `num_bits`-bit strings. Absent keys mean
/// probability zero; stored entries are strictly positive and sum to 1
/// within tolerance.
#[derive(Clone, Debug)]
pub struct ClassicalDistribution {
    num_bits: usize,
    probs: BTreeMap<u64, f64>,
}

impl ClassicalDistribution {
    /// Build from `(bits, probability)` pairs; repeated keys accumulate.
    /// Validates non-negativity and unit total.
    pub fn from_probabilities(
        num_bits: usize,
        entries: impl IntoIterator<Item = (u64, f64)>,
    ) -> Result<Self> {
        if !(1..=63).contains(&num_bits) {
            return Err(Error::invalid(
                "num_bits",
                format!("{num_bits} outside supported range 1..=63"),
            ));
        }
        let limit = 1u64 << num_bits;
        let mut probs: BTreeMap<u64, f64> = BTreeMap::new();
        for (bits, p) in entries {
            if bits >= limit {
                return Err(Error::invalid(
                    "bits",
                    format!("{bits} does not fit in {num_bits} bits"),
                ));
            }
            if p < -TOL {
                return Err(Error::invalid("probability", format!("{p} is negative")));
            }
            if p > 0.0 {
                *probs.entry(bits).or_insert(0.0) += p;
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() >= TOL {
            return Err(Error::invalid(
                "probabilities",
                format!("sum {total} is not 1"),
            ));
        }
        Ok(ClassicalDistribution { num_bits, probs })
    }

    /// All mass on one string.
    pub fn point_mass(num_bits: usize, bits: u64) -> Result<Self> {
        Self::from_probabilities(num_bits, [(bits, 1.0)])
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn support_len(&self) -> usize {
        self.probs.len()
    }

    pub fn probability(&self, bits: u64) -> f64 {
        self.probs.get(&bits).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&k, &v)| (k, v))
    }

    /// `Some(bits)` iff the distribution is a point mass within tolerance.
    pub fn is_point_mass(&self) -> Option<u64> {
        self.probs
            .iter()
            .find(|(_, &p)| p >= 1.0 - TOL)
            .map(|(&k, _)| k)
    }

    /// Total variation distance: (1/2) sum |p - q| over the union of
    /// supports. Always in [0, 1].
    pub fn tvd(&self, other: &ClassicalDistribution) -> Result<f64> {
        if self.num_bits != other.num_bits {
            return Err(Error::BitLengthMismatch {
                expected: self.num_bits,
                actual: other.num_bits,
            });
        }
        let mut sum = 0.0;
        for (&k, &p) in &self.probs {
            sum += (p - other.probability(k)).abs();
        }
        for (&k, &q) in &other.probs {
            if !self.probs.contains_key(&k) {
                sum += q;
            }
        }
        Ok(sum / 2.0)
    }

    /// The distribution of `m ^ mask` for `m` drawn from `self`.
    pub fn xor_shift(&self, mask: u64) -> Result<ClassicalDistribution> {
        if mask >= (1u64 << self.num_bits) {
            return Err(Error::BitLengthMismatch {
                expected: self.num_bits,
                actual: 64 - mask.leading_zeros() as usize,
            });
        }
        ClassicalDistribution::from_probabilities(
            self.num_bits,
            self.iter().map(|(k, p)| (k ^ mask, p)),
        )
    }

    /// Marginal of the lowest `n` bits.
    pub fn marginal_low(&self, n: usize) -> Result<ClassicalDistribution> {
        if n < 1 || n > self.num_bits {
            return Err(Error::invalid(
                "n",
                format!("cannot marginalize {} bits to {n}", self.num_bits),
            ));
        }
        let mask = (1u64 << n) - 1;
        ClassicalDistribution::from_probabilities(n, self.iter().map(|(k, p)| (k & mask, p)))
    }

    /// Push the distribution through a bit-string map.
    pub fn pushforward(
        &self,
        out_bits: usize,
        f: impl Fn(u64) -> Result<u64>,
    ) -> Result<ClassicalDistribution> {
        let mapped: Result<Vec<(u64, f64)>> =
            self.iter().map(|(k, p)| Ok((f(k)?, p))).collect();
        ClassicalDistribution::from_probabilities(out_bits, mapped?)
    }

    /// Draw one string.
    pub fn sample(&self, rng: &mut impl Rng) -> u64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last = 0;
        for (&k, &p) in &self.probs {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
        last
    }

    /// Per-entry comparison over the union of supports.
    pub fn max_abs_diff(&self, other: &ClassicalDistribution) -> f64 {
        let mut max = 0.0f64;
        for (k, p) in self.iter() {
            max = max.max((p - other.probability(k)).abs());
        }
        for (k, q) in other.iter() {
            max = max.max((q - self.probability(k)).abs());
        }
        max
    }

    /// Render the TSV table: one `<bitstring>\t<probability>` line per
    /// support string, sorted by bit string, 17 significant digits.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (k, p) in self.iter() {
            writeln!(out, "{}\t{:.16e}", bits::format_bits(k, self.num_bits), p)
                .expect("write to string");
        }
        out
    }

    /// Parse the TSV table produced by [`to_tsv`].
    pub fn from_tsv(text: &str) -> Result<ClassicalDistribution> {
        let mut entries = Vec::new();
        let mut num_bits: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let (bits_str, prob_str) = line.split_once('\t').ok_or_else(|| {
                Error::Malformed(format!("line {}: expected <bits>\\t<prob>", lineno + 1))
            })?;
            let (value, width) = bits::parse_bits(bits_str)?;
            match num_bits {
                None => num_bits = Some(width),
                Some(w) if w != width => {
                    return Err(Error::BitLengthMismatch {
                        expected: w,
                        actual: width,
                    })
                }
                _ => {}
            }
            let p: f64 = prob_str.trim().parse().map_err(|_| {
                Error::Malformed(format!("line {}: bad probability {prob_str:?}", lineno + 1))
            })?;
            entries.push((value, p));
        }
        let num_bits =
            num_bits.ok_or_else(|| Error::Malformed("empty distribution file".into()))?;
        ClassicalDistribution::from_probabilities(num_bits, entries)
    }
}
