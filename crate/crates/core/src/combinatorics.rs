//! Exact integer combinatorics over partitions of the pair number.
//!
//! A partition `π ⊢ M` records how `M` indistinguishable pairs are spread
//! over occupied modes, ignoring which mode is which. Everything here is
//! exact: counts are [`BigCount`] and conversion to `f64` happens only in
//! [`ratio_to_f64`].

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type BigCount = BigUint;

/// Largest total accepted by [`bounded_compositions_oracle`].
pub const ORACLE_LIMIT: u32 = 16;

/// An integer partition with parts in non-increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition from parts that are already non-increasing and positive.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(
                "parts must be non-increasing".into(),
            ));
        }
        Ok(Partition { parts })
    }

    /// Sorts the parts and drops zeros.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `M`, the number being partitioned.
    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `l(π)`, the number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Distinct part values, largest first, with their multiplicities.
    pub fn distinct_parts(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((v, c)) if *v == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

/// Entry `i` (0-based here) counts the parts equal to `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityVector {
    counts: Vec<u32>,
}

impl MultiplicityVector {
    pub fn new(counts: Vec<u32>) -> Self {
        MultiplicityVector { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u32 + 1) * c)
            .sum()
    }

    pub fn length(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn to_partition(&self) -> Partition {
        let mut parts = Vec::with_capacity(self.length() as usize);
        for (i, &c) in self.counts.iter().enumerate().rev() {
            parts.extend(std::iter::repeat_n(i as u32 + 1, c as usize));
        }
        Partition { parts }
    }
}

pub fn multiplicity_vector(partition: &Partition) -> MultiplicityVector {
    let mut counts = vec![0u32; partition.total() as usize];
    for &p in partition.parts() {
        counts[p as usize - 1] += 1;
    }
    MultiplicityVector { counts }
}

/// Iterator over the partitions of `M` in reverse-lexicographic order,
/// starting at `[M]` and ending at `[1; M]`.
#[derive(Debug, Clone)]
pub struct Partitions {
    next: Option<Vec<u32>>,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.next.take()?;
        self.next = successor(&current);
        Some(Partition { parts: current })
    }
}

fn successor(parts: &[u32]) -> Option<Vec<u32>> {
    let k = parts.iter().rposition(|&p| p > 1)?;
    let ones = parts.len() - k - 1;
    let bound = parts[k] - 1;
    let mut next = parts[..k].to_vec();
    next.push(bound);
    let mut rest = ones as u32 + 1;
    while rest > 0 {
        let p = rest.min(bound);
        next.push(p);
        rest -= p;
    }
    Some(next)
}

/// All partitions of `total`; `0` yields the single empty partition.
pub fn partitions_of(total: u32) -> Partitions {
    let first = if total == 0 { Vec::new() } else { vec![total] };
    Partitions { next: Some(first) }
}

/// Exact binomial coefficient, `0` when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigCount::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigCount::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

fn factorial(n: u32) -> BigCount {
    (1..=n as u64).fold(BigCount::one(), |acc, i| acc * i)
}

/// `N! / (m_1! ⋯ m_M! (N − l(π))!)`: the number of ways to place the parts
/// of `π` on `N` labelled modes.
pub fn mode_count_weight(partition: &Partition, modes: u64) -> Result<BigCount> {
    let length = partition.len();
    if length as u64 > modes {
        return Err(Error::PartitionLongerThanModes { length, modes });
    }
    let mut falling = BigCount::one();
    for i in 0..length as u64 {
        falling *= modes - i;
    }
    let denom = partition
        .distinct_parts()
        .into_iter()
        .fold(BigCount::one(), |acc, (_, c)| acc * factorial(c));
    Ok(falling / denom)
}

/// Signed inclusion–exclusion coefficients indexed by total excess, up to `upto`.
///
/// Choosing `j` of the `c` variables bounded by `v` to violate their bound
/// removes `j(v + 1)` from the free total and contributes `(−1)^j C(c, j)`.
/// Multiplying these per-value polynomials groups all `2^l(π)` subsets by
/// their excess.
fn exclusion_coefficients(partition: &Partition, upto: u32) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::zero(); upto as usize + 1];
    coeffs[0] = BigInt::one();
    for (value, count) in partition.distinct_parts() {
        let step = (value + 1) as usize;
        let mut next = vec![BigInt::zero(); coeffs.len()];
        for (offset, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for j in 0..=count as usize {
                let shifted = offset + j * step;
                if shifted >= next.len() {
                    break;
                }
                let term = c * BigInt::from(binomial(count as u64, j as u64));
                if j % 2 == 0 {
                    next[shifted] += term;
                } else {
                    next[shifted] -= term;
                }
            }
        }
        coeffs = next;
    }
    coeffs
}

fn count_from_coefficients(coeffs: &[BigInt], length: usize, m: u32) -> BigCount {
    if length == 0 {
        return if m == 0 {
            BigCount::one()
        } else {
            BigCount::zero()
        };
    }
    let free = length as u64 - 1;
    let mut acc = BigInt::zero();
    for (offset, c) in coeffs.iter().enumerate().take(m as usize + 1) {
        if c.is_zero() {
            continue;
        }
        let rest = (m as u64) - offset as u64;
        acc += c * BigInt::from(binomial(free + rest, free));
    }
    debug_assert!(!acc.is_negative());
    acc.to_biguint().unwrap_or_default()
}

fn check_polarization_count(partition: &Partition, m: i64) -> Result<u32> {
    let total = partition.total();
    if m < 0 || m > total as i64 {
        return Err(Error::PolarizationCountOutOfRange { m, total });
    }
    Ok(m as u32)
}

/// `A^π_m`: solutions of `x_1 + … + x_l = m` with `0 ≤ x_i ≤ π_i`.
pub fn bounded_compositions(partition: &Partition, m: i64) -> Result<BigCount> {
    let m = check_polarization_count(partition, m)?;
    let coeffs = exclusion_coefficients(partition, m);
    Ok(count_from_coefficients(&coeffs, partition.len(), m))
}

/// `A^π_m` for every `m = 0..=M`.
pub fn bounded_composition_table(partition: &Partition) -> Vec<BigCount> {
    let total = partition.total();
    let coeffs = exclusion_coefficients(partition, total);
    (0..=total)
        .map(|m| count_from_coefficients(&coeffs, partition.len(), m))
        .collect()
}

/// `C_π = Σ_m A^π_m`, which is `∏ (π_i + 1)`.
pub fn composition_normalization(partition: &Partition) -> BigCount {
    partition
        .parts()
        .iter()
        .fold(BigCount::one(), |acc, &p| acc * (p as u64 + 1))
}

/// Exhaustive enumeration of every bounded tuple; independent check on
/// [`bounded_compositions`].
pub fn bounded_compositions_oracle(partition: &Partition, m: i64) -> Result<BigCount> {
    let total = partition.total();
    if total > ORACLE_LIMIT {
        return Err(Error::OracleSizeLimit {
            total,
            limit: ORACLE_LIMIT,
        });
    }
    let m = check_polarization_count(partition, m)?;
    let bounds = partition.parts();
    let mut x = vec![0u32; bounds.len()];
    let mut count: u64 = 0;
    loop {
        if x.iter().sum::<u32>() == m {
            count += 1;
        }
        // odometer step
        let mut i = 0;
        loop {
            if i == x.len() {
                return Ok(BigCount::from(count));
            }
            if x[i] < bounds[i] {
                x[i] += 1;
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

/// Converts an exact ratio to the nearest-ish `f64`, valid when either side
/// exceeds the `f64` range.
pub fn ratio_to_f64(numer: &BigCount, denom: &BigCount) -> f64 {
    if numer.is_zero() {
        return 0.0;
    }
    BigRational::new(BigInt::from(numer.clone()), BigInt::from(denom.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}
