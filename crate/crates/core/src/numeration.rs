//! Periodic Zeckendorf collections, their fundamental sequences, membership,
//! and expansion of positive integers.

use std::fmt;
use std::str::FromStr;
use std::sync::{RwLock, RwLockReadGuard};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed;
use crate::spectral::{self, DominantRoot};

/// The tuple `L = (a_1, ..., a_N)` whose periodic repetition bounds legal
/// digit strings lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct PrincipalBlock {
    entries: Vec<u32>,
}

impl PrincipalBlock {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::BlockTooShort(entries.len()));
        }
        if entries[0] == 0 {
            return Err(Error::LeadingZeroBlock);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// `N`, the period.
    pub fn period(&self) -> usize {
        self.entries.len()
    }

    /// `Theta(k)` for 1-based `k`.
    pub fn theta(&self, k: usize) -> u32 {
        assert!(k >= 1, "Theta is 1-based");
        self.entries[(k - 1) % self.entries.len()]
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    /// Comma-separated form, e.g. `1,0`.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PrincipalBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_digits(&self.entries))
    }
}

impl FromStr for PrincipalBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(parse_digits(s)?)
    }
}

impl TryFrom<Vec<u32>> for PrincipalBlock {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PrincipalBlock> for Vec<u32> {
    fn from(b: PrincipalBlock) -> Self {
        b.entries
    }
}

pub(crate) fn join_digits(d: &[u32]) -> String {
    d.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Parses a comma-separated digit list such as `1,0,1`.
pub fn parse_digits(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<u32>().map_err(|_| Error::InvalidSpec(format!("bad digit `{t}`")))
        })
        .collect()
}

/// A finite digit tuple, most significant digit first, with a positive
/// leading digit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CoefficientFunction {
    digits: Vec<u32>,
}

impl CoefficientFunction {
    pub fn new(digits: Vec<u32>) -> Result<Self> {
        match digits.first() {
            None => Err(Error::EmptyInput),
            Some(0) => Err(Error::NonPositive(join_digits(&digits))),
            Some(_) => Ok(Self { digits }),
        }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `epsilon(k)` for 1-based `k`.
    pub fn digit(&self, k: usize) -> u32 {
        self.digits[k - 1]
    }

    pub fn into_digits(self) -> Vec<u32> {
        self.digits
    }
}

impl fmt::Display for CoefficientFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_digits(&self.digits))
    }
}

/// Streaming membership check. The state is the length of the current match
/// against `Theta`, reduced mod `N` (Theta is periodic, so that is enough).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Automaton<'a> {
    block: &'a [u32],
    state: usize,
}

impl<'a> Automaton<'a> {
    pub(crate) fn new(block: &'a PrincipalBlock) -> Self {
        Self { block: &block.entries, state: 0 }
    }

    /// Largest digit allowed next.
    pub(crate) fn bound(&self) -> u32 {
        self.block[self.state]
    }

    /// Feeds one digit; false if it breaks membership (state then unchanged).
    pub(crate) fn push(&mut self, d: u32) -> bool {
        let bound = self.block[self.state];
        if d > bound {
            return false;
        }
        self.state = if d == bound { (self.state + 1) % self.block.len() } else { 0 };
        true
    }
}

/// Membership in the collection `H` (non-empty, positive leading digit).
pub fn is_valid(candidate: &[u32], block: &PrincipalBlock) -> bool {
    matches!(candidate.first(), Some(&d) if d > 0) && is_valid_relaxed(candidate, block)
}

/// Membership in the relaxed collection that also admits leading zeros.
pub(crate) fn is_valid_relaxed(candidate: &[u32], block: &PrincipalBlock) -> bool {
    let mut a = Automaton::new(block);
    candidate.iter().all(|&d| a.push(d))
}

/// `sum eps(k) * Q_k` (the dot product, no reversal).
pub fn evaluate_dot(digits: &[u32], q: &[f64]) -> f64 {
    assert!(q.len() >= digits.len(), "Q must provide at least len(eps) values");
    digits.iter().zip(q).map(|(&d, &x)| d as f64 * x).sum()
}

/// A periodic Zeckendorf collection together with its fundamental sequence
/// and spectral data.
///
/// The fundamental-sequence table grows on demand behind a lock; reads may
/// proceed concurrently.
pub struct NumerationSystem {
    block: PrincipalBlock,
    root: DominantRoot,
    table: RwLock<Vec<BigUint>>,
    small: Vec<u128>,
    theta_powers: RwLock<(u32, Vec<BigUint>)>,
}

impl fmt::Debug for NumerationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NumerationSystem").field("block", &self.block).field("root", &self.root).finish_non_exhaustive()
    }
}

impl NumerationSystem {
    pub fn new(block: PrincipalBlock) -> Result<Self> {
        let root = spectral::dominant_zero(&block, spectral::DEFAULT_TOL)?;
        let mut table = Vec::new();
        extend_table(&block, &mut table, 64);
        let small = table.iter().map_while(|h| h.to_u128().filter(|&v| v < (1u128 << 126))).collect::<Vec<_>>();
        let mut sys =
            Self { block, root, table: RwLock::new(table), small, theta_powers: RwLock::new((0, Vec::new())) };
        // extend the u128 fast-path table as far as it goes
        let mut n = sys.small.len();
        while n == sys.table.read().unwrap().len() {
            n *= 2;
            sys.ensure_len(n);
            sys.small =
                sys.table.read().unwrap().iter().map_while(|h| h.to_u128().filter(|&v| v < (1u128 << 126))).collect();
            n = sys.small.len();
        }
        Ok(sys)
    }

    pub fn from_entries(entries: &[u32]) -> Result<Self> {
        Self::new(PrincipalBlock::new(entries.to_vec())?)
    }

    /// Classical Zeckendorf, `L = (1, 0)`.
    pub fn fibonacci() -> Self {
        Self::from_entries(&[1, 0]).expect("valid block")
    }

    /// Base-`b` positional notation, `L = (b-1, b-1)`.
    pub fn base(b: u32) -> Result<Self> {
        if b < 2 {
            return Err(Error::OutOfRange(format!("base {b}")));
        }
        Self::from_entries(&[b - 1, b - 1])
    }

    pub fn block(&self) -> &PrincipalBlock {
        &self.block
    }

    pub fn root(&self) -> &DominantRoot {
        &self.root
    }

    pub fn psi(&self) -> f64 {
        self.root.psi
    }

    pub fn theta(&self) -> f64 {
        self.root.theta
    }

    pub fn id(&self) -> String {
        self.block.id()
    }

    pub(crate) fn is_fibonacci(&self) -> bool {
        self.block.entries == [1, 0]
    }

    /// `H_1, ..., H_count`.
    pub fn fundamental_sequence(&self, count: usize) -> Vec<BigUint> {
        self.table(count)[..count].to_vec()
    }

    /// `H_n` for 1-based `n`.
    pub fn h(&self, n: usize) -> BigUint {
        assert!(n >= 1, "H is 1-based");
        self.table(n)[n - 1].clone()
    }

    /// Grows the table to at least `len` entries (amortized doubling).
    pub fn ensure_len(&self, len: usize) {
        if self.table.read().unwrap().len() >= len {
            return;
        }
        let mut t = self.table.write().unwrap();
        if t.len() < len {
            let target = len.max(2 * t.len());
            extend_table(&self.block, &mut t, target);
        }
    }

    /// Grows the table until its last entry exceeds `x`.
    pub fn ensure_covers(&self, x: &BigUint) {
        loop {
            let (len, last_ok) = {
                let t = self.table.read().unwrap();
                (t.len(), t.last().is_some_and(|h| h > x))
            };
            if last_ok {
                return;
            }
            // H_n grows at least like 2^(n/N)
            let est = (x.bits() as usize + 1) * self.block.period() + 2;
            self.ensure_len(est.max(len + 1));
        }
    }

    /// Read access to at least `min_len` entries (`[0]` is `H_1`).
    pub fn table(&self, min_len: usize) -> RwLockReadGuard<'_, Vec<BigUint>> {
        self.ensure_len(min_len);
        self.table.read().unwrap()
    }

    /// Read access to a table whose last entry exceeds `x`.
    pub fn table_covering(&self, x: &BigUint) -> RwLockReadGuard<'_, Vec<BigUint>> {
        self.ensure_covers(x);
        self.table.read().unwrap()
    }

    /// The `m` with `H_m <= x < H_{m+1}` (0 for `x = 0`).
    pub fn index_of(&self, x: &BigUint) -> usize {
        if let Some(v) = x.to_u128() {
            if self.small.last().is_some_and(|&h| h > v) {
                return self.small.partition_point(|&h| h <= v);
            }
        }
        let t = self.table_covering(x);
        t.partition_point(|h| h <= x)
    }

    /// The unique `eps` in `H` with `eps * H = n`, by greedy digit selection.
    pub fn expand(&self, n: &BigUint) -> Result<CoefficientFunction> {
        if n.is_zero() {
            return Err(Error::NonPositive(n.to_string()));
        }
        let digits = match n.to_u128() {
            Some(v) if self.small.last().is_some_and(|&h| h > v) => self.expand_small(v),
            _ => self.expand_big(n, usize::MAX),
        };
        debug_assert!(is_valid(&digits, &self.block));
        CoefficientFunction::new(digits)
    }

    /// First `s` digits of the expansion (or all of them if shorter).
    pub fn expand_prefix(&self, n: &BigUint, s: usize) -> Vec<u32> {
        self.expand_big(n, s)
    }

    fn expand_small(&self, mut v: u128) -> Vec<u32> {
        let m = self.small.partition_point(|&h| h <= v);
        let mut auto = Automaton::new(&self.block);
        let mut out = Vec::with_capacity(m);
        for k in (0..m).rev() {
            let w = self.small[k];
            let d = (v / w).min(auto.bound() as u128) as u32;
            v -= d as u128 * w;
            auto.push(d);
            out.push(d);
        }
        assert_eq!(v, 0, "greedy expansion left a remainder");
        out
    }

    fn expand_big(&self, n: &BigUint, limit: usize) -> Vec<u32> {
        let t = self.table_covering(n);
        let m = t.partition_point(|h| h <= n);
        let mut rem = n.clone();
        let mut auto = Automaton::new(&self.block);
        let mut out = Vec::with_capacity(m.min(limit));
        for k in (0..m).rev().take(limit) {
            let w = &t[k];
            let d = if &rem < w {
                0
            } else {
                let q = &rem / w;
                q.to_u32().map_or(auto.bound(), |q| q.min(auto.bound()))
            };
            if d > 0 {
                rem -= w * d;
            }
            auto.push(d);
            out.push(d);
        }
        if limit >= m {
            assert!(rem.is_zero(), "greedy expansion left a remainder");
        }
        out
    }

    /// `eps * H = sum eps(k) H_{t-k+1}`.
    pub fn evaluate_conv(&self, digits: &[u32]) -> BigUint {
        let t = digits.len();
        let table = self.table(t.max(1));
        digits.iter().enumerate().filter(|(_, &d)| d > 0).map(|(k, &d)| &table[t - k - 1] * d).sum()
    }

    /// `H-hat_n = theta^(n-1)` for `n = 1..=count`.
    pub fn hat(&self, count: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(count);
        let mut x = 1.0;
        for _ in 0..count {
            v.push(x);
            x *= self.root.theta;
        }
        v
    }

    /// `theta^k * 2^bits` for `k = 0..count`, with `bits >= min_bits`.
    ///
    /// The cache is rebuilt at higher precision when a caller needs more.
    pub(crate) fn theta_powers_scaled(
        &self,
        count: usize,
        min_bits: u32,
    ) -> (u32, RwLockReadGuard<'_, (u32, Vec<BigUint>)>) {
        let ok = |c: &(u32, Vec<BigUint>)| c.0 >= min_bits && c.1.len() >= count;
        if !ok(&self.theta_powers.read().unwrap()) {
            let mut c = self.theta_powers.write().unwrap();
            if c.0 < min_bits {
                let bits = min_bits.max(fixed::precision_bits()).next_multiple_of(64);
                let theta = spectral::theta_scaled(&self.block, bits);
                *c = (bits, vec![BigUint::one() << bits, theta]);
            }
            let bits = c.0;
            if c.1.len() < count {
                let theta = c.1[1].clone();
                while c.1.len() < count {
                    let next = (c.1.last().unwrap() * &theta) >> bits;
                    c.1.push(next);
                }
            }
        }
        let g = self.theta_powers.read().unwrap();
        (g.0, g)
    }

    /// Fractional bits needed so that `theta^s` keeps the working precision.
    pub(crate) fn bits_for_depth(&self, s: usize) -> u32 {
        fixed::precision_bits() + (s as f64 * self.psi().log2()).ceil() as u32 + 64
    }

    /// `u128` prefix of the fundamental sequence (every entry below `2^126`).
    pub(crate) fn small_table(&self) -> &[u128] {
        &self.small
    }
}

fn extend_table(block: &PrincipalBlock, table: &mut Vec<BigUint>, target: usize) {
    let a = block.entries();
    let n_per = a.len();
    while table.len() < target {
        let n = table.len() + 1; // computing H_n
        let next = if n <= n_per + 1 {
            // H_n = 1 + sum_{k=1}^{n-1} a_k H_{n-k}
            let mut v = BigUint::one();
            for k in 1..n {
                v += &table[n - k - 1] * a[k - 1];
            }
            v
        } else {
            // H_n = a_1 H_{n-1} + ... + a_{N-1} H_{n-N+1} + (1 + a_N) H_{n-N}
            let mut v = BigUint::zero();
            for k in 1..n_per {
                if a[k - 1] > 0 {
                    v += &table[n - k - 1] * a[k - 1];
                }
            }
            v += &table[n - n_per - 1] * (1 + a[n_per - 1]);
            v
        };
        table.push(next);
    }
}
