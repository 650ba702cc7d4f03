//! Leading blocks, their successors, and Benford-type probabilities.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fixed;
use crate::numeration::{is_valid, join_digits, Automaton, NumerationSystem};

/// Blocks up to this length use `f64` dot products; longer ones switch to
/// fixed point so that `theta^s` does not lose the difference between
/// neighbours.
const FLOAT_DEPTH: usize = 30;

/// Default cap on explicit enumeration.
pub const MAX_ENUMERATION: u64 = 1 << 21;

/// Families larger than this are normalized group-wise.
const FULL_NORMALIZATION: u64 = 1 << 18;
const GROUP_TARGET: u64 = 1 << 16;

/// A leading block of length `s`: the first `s` digits of an expansion,
/// right-padded with zeros to length `N` when `s < N`.
///
/// The exclusive block that closes a family is represented with
/// `exclusive = true`; it is not itself a member of the collection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LeadingBlock {
    digits: Vec<u32>,
    s: usize,
    exclusive: bool,
}

impl LeadingBlock {
    /// Builds the block with the given `s`-prefix, checking membership.
    pub fn new(prefix: &[u32], system: &NumerationSystem) -> Result<Self> {
        let s = prefix.len();
        if !is_valid(prefix, system.block()) {
            return Err(Error::NotInFamily(prefix.to_vec(), s));
        }
        Ok(Self::padded(prefix.to_vec(), system.block().period()))
    }

    fn padded(mut digits: Vec<u32>, n: usize) -> Self {
        let s = digits.len();
        if digits.len() < n {
            digits.resize(n, 0);
        }
        Self { digits, s, exclusive: false }
    }

    /// All stored digits (length `max(s, N)`).
    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// The first `s` digits.
    pub fn prefix(&self) -> &[u32] {
        &self.digits[..self.s]
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn is_exclusive(&self) -> bool {
        self.exclusive
    }
}

impl fmt::Display for LeadingBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_digits(&self.digits))
    }
}

/// The leading block of length `s` of `n`, or `None` when `n < H_s`.
pub fn leading_block(n: &BigUint, s: usize, system: &NumerationSystem) -> Option<LeadingBlock> {
    if s == 0 || n.is_zero() {
        return None;
    }
    let prefix = system.expand_prefix(n, s);
    (prefix.len() == s).then(|| LeadingBlock::padded(prefix, system.block().period()))
}

/// `|H_s| = H_(s+1) - H_s`.
pub fn family_size(s: usize, system: &NumerationSystem) -> BigUint {
    assert!(s >= 1, "block length must be positive");
    system.h(s + 1) - system.h(s)
}

/// The exclusive block closing the length-`s` family.
pub fn exclusive_block(s: usize, system: &NumerationSystem) -> LeadingBlock {
    let a = system.block().entries();
    let n = a.len();
    let digits = if s < n {
        let mut d = a.to_vec();
        d[n - 1] += 1;
        d
    } else {
        let p = s % n;
        let mut d: Vec<u32> = (0..s - p).map(|i| a[i % n]).collect();
        *d.last_mut().unwrap() += 1;
        d.resize(s, 0);
        d
    };
    LeadingBlock { digits, s, exclusive: true }
}

fn check_member(b: &LeadingBlock, system: &NumerationSystem) -> Result<()> {
    if b.exclusive || b.s == 0 || !is_valid(b.prefix(), system.block()) || b.digits[b.s..].iter().any(|&d| d != 0) {
        return Err(Error::NotInFamily(b.digits.clone(), b.s));
    }
    Ok(())
}

/// The lexicographically next block of the same length, or the exclusive
/// block after the largest one.
pub fn successor(b: &LeadingBlock, system: &NumerationSystem) -> Result<LeadingBlock> {
    check_member(b, system)?;
    let prefix = b.prefix();
    let mut autos = Vec::with_capacity(prefix.len());
    let mut a = Automaton::new(system.block());
    for &d in prefix {
        autos.push(a);
        a.push(d);
    }
    for k in (0..prefix.len()).rev() {
        if prefix[k] < autos[k].bound() {
            let mut next = prefix[..=k].to_vec();
            next[k] += 1;
            next.resize(prefix.len(), 0);
            return Ok(LeadingBlock::padded(next, system.block().period()));
        }
    }
    Ok(exclusive_block(b.s, system))
}

/// Smallest block of length `s`: `(1, 0, ..., 0)`.
pub fn first_block(s: usize, system: &NumerationSystem) -> LeadingBlock {
    let mut d = vec![0; s];
    d[0] = 1;
    LeadingBlock::padded(d, system.block().period())
}

/// The lexicographically previous block; the first block wraps around to
/// the largest one.
pub fn predecessor(b: &LeadingBlock, system: &NumerationSystem) -> Result<LeadingBlock> {
    check_member(b, system)?;
    let prefix = b.prefix();
    let k = (0..prefix.len()).rev().find(|&k| prefix[k] > 0 && (k > 0 || prefix[0] > 1));
    Ok(match k {
        Some(k) => {
            let mut head = prefix[..=k].to_vec();
            head[k] -= 1;
            last_extension(&head, b.s, system)
        }
        None => last_extension(&[], b.s, system),
    })
}

/// `b` itself, or the first block of the family when `b` is exclusive.
pub fn first_if_exclusive(b: LeadingBlock, system: &NumerationSystem) -> LeadingBlock {
    if b.exclusive {
        first_block(b.s, system)
    } else {
        b
    }
}

/// Largest member of the family of length `s` starting with `prefix`.
fn last_extension(prefix: &[u32], s: usize, system: &NumerationSystem) -> LeadingBlock {
    let mut a = Automaton::new(system.block());
    for &d in prefix {
        a.push(d);
    }
    let mut d = prefix.to_vec();
    while d.len() < s {
        let x = a.bound();
        a.push(x);
        d.push(x);
    }
    LeadingBlock::padded(d, system.block().period())
}

/// All blocks of length `s` in increasing order plus the exclusive block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub s: usize,
    pub blocks: Vec<LeadingBlock>,
    pub exclusive: LeadingBlock,
}

impl BlockFamily {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn position(&self, b: &LeadingBlock) -> Option<usize> {
        self.blocks.binary_search(b).ok()
    }

    /// `P(b_k)` for every block, from consecutive log positions.
    pub fn probabilities(&self, system: &NumerationSystem, exec: Execution) -> Vec<f64> {
        exec::map_range(exec, 0..self.blocks.len(), |k| {
            let next = self.blocks.get(k + 1).unwrap_or(&self.exclusive);
            log_gap(&self.blocks[k], next, system)
        })
    }
}

pub fn enumerate_blocks(s: usize, system: &NumerationSystem) -> Result<BlockFamily> {
    enumerate_blocks_limited(s, system, MAX_ENUMERATION)
}

pub fn enumerate_blocks_limited(s: usize, system: &NumerationSystem, limit: u64) -> Result<BlockFamily> {
    if s == 0 {
        return Err(Error::OutOfRange("block length 0".into()));
    }
    let size = family_size(s, system);
    if size > BigUint::from(limit) {
        return Err(Error::FamilyTooLarge { s, size: size.to_string(), limit });
    }
    let mut blocks = Vec::with_capacity(size.to_usize().unwrap_or(0));
    let mut b = first_block(s, system);
    loop {
        let next = successor(&b, system)?;
        blocks.push(b);
        if next.exclusive {
            return Ok(BlockFamily { s, blocks, exclusive: next });
        }
        b = next;
    }
}

/// `b . H-hat` in `f64`.
pub fn dot_hat(digits: &[u32], system: &NumerationSystem) -> f64 {
    let theta = system.theta();
    digits.iter().rev().fold(0.0, |acc, &d| acc * theta + d as f64)
}

/// `b . H-hat` scaled by `2^bits`.
pub(crate) fn dot_hat_scaled(digits: &[u32], bits: u32, system: &NumerationSystem) -> (u32, BigUint) {
    let (bits, powers) = system.theta_powers_scaled(digits.len(), bits);
    let v = digits.iter().zip(&powers.1).filter(|(&d, _)| d > 0).map(|(&d, p)| p * d).sum();
    (bits, v)
}

/// `log_psi(b . H-hat)`, a point of `[0, 1)` for members.
pub fn log_position(b: &LeadingBlock, system: &NumerationSystem) -> f64 {
    if b.digits.len() <= FLOAT_DEPTH {
        return dot_hat(&b.digits, system).ln() / system.psi().ln();
    }
    let (bits, v) = dot_hat_scaled(&b.digits, system.bits_for_depth(b.digits.len()), system);
    fixed::scaled_to_f64(&v, bits).ln() / system.psi().ln()
}

/// `log_psi(c . H-hat / b . H-hat)` without cancellation.
pub(crate) fn log_gap(b: &LeadingBlock, c: &LeadingBlock, system: &NumerationSystem) -> f64 {
    let len = b.digits.len().max(c.digits.len());
    let at = |d: &[u32], k: usize| d.get(k).copied().unwrap_or(0) as i64;
    let ratio = if len <= FLOAT_DEPTH {
        let theta = system.theta();
        let diff = (0..len).rev().fold(0.0, |acc, k| acc * theta + (at(&c.digits, k) - at(&b.digits, k)) as f64);
        diff / dot_hat(&b.digits, system)
    } else {
        let (bits, lo) = dot_hat_scaled(&b.digits, system.bits_for_depth(len), system);
        let (_, hi) = dot_hat_scaled(&c.digits, bits, system);
        fixed::ratio_f64_signed(&(BigInt::from(hi) - BigInt::from(lo.clone())), &lo)
    };
    ratio.ln_1p() / system.psi().ln()
}

/// `P(b) = log_psi(b~ . H-hat / b . H-hat)`.
pub fn benford_probability(b: &LeadingBlock, system: &NumerationSystem) -> Result<f64> {
    let next = successor(b, system)?;
    Ok(log_gap(b, &next, system))
}

/// `[b_m * H, b~_m * H)`: the integers with leading block `b` and exactly
/// `m` digits.
pub fn block_range(b: &LeadingBlock, m: usize, system: &NumerationSystem) -> Result<(BigUint, BigUint)> {
    check_member(b, system)?;
    if m < b.s {
        return Err(Error::OutOfRange(format!("m = {m} is shorter than the block length {}", b.s)));
    }
    let next = successor(b, system)?;
    let lo = padded_value(b.prefix(), m, system);
    let hi = if next.exclusive { system.h(m + 1) } else { padded_value(next.prefix(), m, system) };
    Ok((lo, hi))
}

fn padded_value(prefix: &[u32], m: usize, system: &NumerationSystem) -> BigUint {
    let t = system.table(m);
    prefix.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, &d)| &t[m - 1 - i] * d).sum()
}

/// Assigns integers to blocks of a family by binary search over block
/// thresholds, without expanding the integer.
pub struct Classifier<'a> {
    system: &'a NumerationSystem,
    s: usize,
    prefixes: Vec<Vec<u32>>,
}

impl<'a> Classifier<'a> {
    pub fn new(family: &BlockFamily, system: &'a NumerationSystem) -> Self {
        let prefixes = family.blocks.iter().map(|b| b.prefix().to_vec()).collect();
        Self { system, s: family.s, prefixes }
    }

    /// Index of the block of `n` within the family, `None` when `n < H_s`.
    pub fn classify(&self, n: &BigUint) -> Option<usize> {
        let m = self.system.index_of(n);
        if m < self.s {
            return None;
        }
        let small = self.system.small_table();
        if let Some(v) = n.to_u128().filter(|_| m < small.len()) {
            let thr = |k: usize| -> u128 {
                self.prefixes[k].iter().enumerate().map(|(i, &d)| d as u128 * small[m - 1 - i]).sum()
            };
            return Some(largest_at_most(self.prefixes.len(), |k| thr(k) <= v));
        }
        let t = self.system.table(m);
        let thr = |k: usize| -> BigUint {
            self.prefixes[k].iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, &d)| &t[m - 1 - i] * d).sum()
        };
        Some(largest_at_most(self.prefixes.len(), |k| &thr(k) <= n))
    }
}

/// Largest `k < len` with `pred(k)`, given `pred(0)` and monotonicity.
fn largest_at_most(len: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, len);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `sum_(b in H_s) P(b)`.
///
/// Small families are summed block by block. Large ones are split by their
/// length-`r` prefix: the blocks sharing a prefix are consecutive, so each
/// group contributes the log gap between its first block and the successor
/// of its last block. The successor of one group's last block must equal the
/// next group's first block; this is checked for every group.
pub fn normalization_sum(s: usize, system: &NumerationSystem, exec: Execution) -> Result<f64> {
    let size = family_size(s, system);
    if size <= BigUint::from(FULL_NORMALIZATION) {
        let fam = enumerate_blocks_limited(s, system, FULL_NORMALIZATION)?;
        return Ok(compensated_sum(fam.probabilities(system, exec)));
    }
    let r = (1..s).take_while(|&r| family_size(r, system) <= BigUint::from(GROUP_TARGET)).last().unwrap_or(1);
    let prefixes =
        enumerate_blocks_limited(r, system, GROUP_TARGET.max(family_size(r, system).to_u64().unwrap_or(u64::MAX)))?;
    let groups = exec::map_slice(exec, &prefixes.blocks, |p| -> Result<(LeadingBlock, LeadingBlock, f64)> {
        let mut first = p.prefix().to_vec();
        first.resize(s, 0);
        let first = LeadingBlock::padded(first, system.block().period());
        let last = last_extension(p.prefix(), s, system);
        let next = successor(&last, system)?;
        let gap = log_gap(&first, &next, system);
        Ok((first, next, gap))
    });
    let groups = groups.into_iter().collect::<Result<Vec<_>>>()?;
    for (k, (_, next, _)) in groups.iter().enumerate() {
        let chained = match groups.get(k + 1) {
            Some((first, _, _)) => next == first,
            None => next.exclusive,
        };
        if !chained {
            return Err(Error::Internal(format!("block groups do not chain at group {k}")));
        }
    }
    Ok(compensated_sum(groups.iter().map(|g| g.2)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(e: &[u32]) -> NumerationSystem {
        NumerationSystem::from_entries(e).unwrap()
    }

    fn lb(d: &[u32], s: &NumerationSystem) -> LeadingBlock {
        LeadingBlock::new(d, s).unwrap()
    }

    #[test]
    fn fibonacci_families() {
        let f = sys(&[1, 0]);
        let fam = enumerate_blocks(3, &f).unwrap();
        let got: Vec<_> = fam.blocks.iter().map(|b| b.digits().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 0, 0], vec![1, 0, 1]]);
        assert_eq!(fam.exclusive.digits(), [1, 1, 0]);
        let fam = enumerate_blocks(6, &f).unwrap();
        assert_eq!(fam.len(), 8);
        assert_eq!(fam.exclusive.digits(), [1, 0, 1, 0, 1, 1]);
    }

    #[test]
    fn short_blocks_are_padded() {
        let s = sys(&[3, 2, 1]);
        let fam = enumerate_blocks(1, &s).unwrap();
        assert_eq!(
            fam.blocks.iter().map(|b| b.digits().to_vec()).collect::<Vec<_>>(),
            vec![vec![1, 0, 0], vec![2, 0, 0], vec![3, 0, 0]]
        );
        assert_eq!(fam.exclusive.digits(), [3, 2, 2]);
        assert!((dot_hat(fam.exclusive.digits(), &s) - s.psi()).abs() < 1e-13);
    }

    #[test]
    fn base_ten_exclusive() {
        let s = sys(&[9, 9]);
        let b = lb(&[9, 9, 9, 9, 9, 9], &s);
        let e = successor(&b, &s).unwrap();
        assert!(e.is_exclusive());
        assert_eq!(e.digits(), [9, 9, 9, 9, 9, 10]);
        assert_eq!(s.evaluate_conv(e.digits()), BigUint::from(1_000_000u32));
        assert!((dot_hat(e.digits(), &s) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn family_sizes_match_enumeration() {
        for e in [&[1, 0][..], &[2, 1], &[3, 2, 1], &[1, 0, 0, 2]] {
            let s = sys(e);
            for len in 1..9 {
                let fam = enumerate_blocks(len, &s).unwrap();
                assert_eq!(BigUint::from(fam.len()), family_size(len, &s));
                assert!(fam.blocks.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn predecessor_inverts_successor() {
        for e in [&[1, 0][..], &[3, 2, 1], &[2, 0, 1]] {
            let sys = sys(e);
            for s in 1..7 {
                let fam = enumerate_blocks(s, &sys).unwrap();
                for w in fam.blocks.windows(2) {
                    assert_eq!(predecessor(&w[1], &sys).unwrap(), w[0]);
                }
                assert_eq!(&predecessor(&fam.blocks[0], &sys).unwrap(), fam.blocks.last().unwrap());
            }
        }
    }

    #[test]
    fn too_large_family_is_refused() {
        let s = sys(&[9, 9]);
        assert!(matches!(enumerate_blocks(9, &s), Err(Error::FamilyTooLarge { .. })));
    }

    #[test]
    fn ranges_examples() {
        let f = sys(&[1, 0]);
        assert_eq!(block_range(&lb(&[1, 0, 0], &f), 3, &f).unwrap(), (3u32.into(), 4u32.into()));
        assert_eq!(block_range(&lb(&[1, 0, 1], &f), 3, &f).unwrap(), (4u32.into(), 5u32.into()));
        assert_eq!(block_range(&lb(&[1, 0, 0], &f), 5, &f).unwrap(), (8u32.into(), 11u32.into()));
        let t = sys(&[9, 9]);
        assert_eq!(block_range(&lb(&[2, 1], &t), 4, &t).unwrap(), (2100u32.into(), 2200u32.into()));
        assert!(block_range(&lb(&[1, 0, 0], &f), 2, &f).is_err());
    }

    #[test]
    fn probability_examples() {
        let t = sys(&[9, 9]);
        let p = benford_probability(&lb(&[2, 1], &t), &t).unwrap();
        assert!((p - (22f64 / 21.0).log10()).abs() < 1e-14);
        let f = sys(&[1, 0]);
        let phi = f.psi();
        let p = benford_probability(&lb(&[1, 0, 0], &f), &f).unwrap();
        let want = (1.0 + 1.0 / (phi * phi)).ln() / phi.ln();
        assert!((p - want).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_path_matches_float_path() {
        let f = sys(&[1, 0]);
        let mut d = vec![0; 40];
        d[0] = 1;
        d[39] = 1;
        let b = lb(&d, &f);
        let c = successor(&b, &f).unwrap();
        let fixed = log_gap(&b, &c, &f);
        let theta = f.theta();
        let diff: f64 = c
            .digits()
            .iter()
            .zip(b.digits())
            .enumerate()
            .map(|(k, (&x, &y))| (x as f64 - y as f64) * theta.powi(k as i32))
            .sum();
        let float = (diff / dot_hat(b.digits(), &f)).ln_1p() / f.psi().ln();
        assert!((fixed - float).abs() < 1e-12 * float);
    }

    #[test]
    fn classifier_agrees_with_expansion() {
        let s = sys(&[2, 1]);
        let fam = enumerate_blocks(4, &s).unwrap();
        let c = Classifier::new(&fam, &s);
        for n in 1u32..3000 {
            let n = BigUint::from(n);
            let want = leading_block(&n, 4, &s).map(|b| fam.position(&b).unwrap());
            assert_eq!(c.classify(&n), want);
        }
        let big = BigUint::from(7u32).pow(300);
        assert_eq!(c.classify(&big), leading_block(&big, 4, &s).and_then(|b| fam.position(&b)));
    }

    #[test]
    fn normalization_small_and_grouped() {
        let f = sys(&[1, 0]);
        for s in 1..12 {
            assert!((normalization_sum(s, &f, Execution::Sequential).unwrap() - 1.0).abs() < 1e-13);
        }
        let t = sys(&[9, 9]);
        assert!((normalization_sum(12, &t, Execution::Parallel).unwrap() - 1.0).abs() < 1e-13);
    }
}
