//! Uniform continuations given by a limit profile, their inverses, and the
//! distributions they induce on leading blocks.
//!
//! A continuation `h` of `H` is represented by one increasing map
//! `f: [0,1] -> [0,1]` with `h(n + p) = H_n + (H_(n+1) - H_n) f(p)`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::blocks::{self, dot_hat, LeadingBlock};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fixed;
use crate::numeration::{Automaton, NumerationSystem};

/// Number of knots used when a profile is built from a sampled function.
pub const DEFAULT_KNOTS: usize = 1025;

/// The limit profile `h_inf` of a uniform continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitProfile {
    /// `(psi^p - 1) / (psi - 1)`.
    Benford { psi: f64 },
    /// The identity.
    Line,
    /// Linear interpolation through `(p, f(p))` knots from `(0,0)` to `(1,1)`.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
    /// `p^exponent`.
    Power { exponent: f64 },
}

impl LimitProfile {
    pub fn benford(system: &NumerationSystem) -> Self {
        LimitProfile::Benford { psi: system.psi() }
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::OutOfRange(format!("power exponent {exponent}")));
        }
        Ok(LimitProfile::Power { exponent })
    }

    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self> {
        validate_knots(&knots)?;
        Ok(LimitProfile::PiecewiseLinear { knots })
    }

    /// Piecewise-linear profile agreeing with the Benford profile at the
    /// points `log_psi(b . H-hat)` for the blocks `b` of length `s`.
    pub fn interpolated_benford(system: &NumerationSystem, s: usize) -> Result<Self> {
        let fam = blocks::enumerate_blocks(s, system)?;
        let benford = Self::benford(system);
        let mut knots = vec![(0.0, 0.0)];
        for b in &fam.blocks {
            let p = blocks::log_position(b, system);
            if p > knots.last().unwrap().0 {
                knots.push((p, benford.forward(p)));
            }
        }
        knots.push((1.0, 1.0));
        Self::piecewise(knots)
    }

    pub fn name(&self) -> &'static str {
        match self {
            LimitProfile::Benford { .. } => "benford",
            LimitProfile::Line => "line",
            LimitProfile::PiecewiseLinear { .. } => "piecewise",
            LimitProfile::Power { .. } => "power",
        }
    }

    pub fn forward(&self, p: f64) -> f64 {
        match self {
            LimitProfile::Benford { psi } => ((p * psi.ln()).exp_m1() / (psi - 1.0)).clamp(0.0, 1.0),
            LimitProfile::Line => p,
            LimitProfile::PiecewiseLinear { knots } => interpolate(knots, p, false),
            LimitProfile::Power { exponent } => p.max(0.0).powf(*exponent),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self {
            LimitProfile::Benford { psi } => ((psi - 1.0) * y).ln_1p() / psi.ln(),
            LimitProfile::Line => y,
            LimitProfile::PiecewiseLinear { knots } => interpolate(knots, y, true),
            LimitProfile::Power { exponent } => y.max(0.0).powf(exponent.recip()),
        }
    }

    /// Largest `|forward(inverse(y)) - y|` over a uniform grid of `points + 1` values.
    pub fn round_trip_error(&self, points: usize) -> f64 {
        (0..=points)
            .map(|i| {
                let y = i as f64 / points as f64;
                (self.forward(self.inverse(y)) - y).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn validate_knots(knots: &[(f64, f64)]) -> Result<()> {
    if knots.len() < 2 {
        return Err(Error::InvalidSpec("a piecewise profile needs at least two knots".into()));
    }
    let (first, last) = (knots[0], knots[knots.len() - 1]);
    if first != (0.0, 0.0) || last != (1.0, 1.0) {
        return Err(Error::InvalidSpec("profile knots must run from (0,0) to (1,1)".into()));
    }
    if knots.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
        return Err(Error::NonMonotone);
    }
    Ok(())
}

fn interpolate(knots: &[(f64, f64)], x: f64, inverse: bool) -> f64 {
    let key = |k: &(f64, f64)| if inverse { k.1 } else { k.0 };
    let val = |k: &(f64, f64)| if inverse { k.0 } else { k.1 };
    let x = x.clamp(0.0, 1.0);
    let i = knots.partition_point(|k| key(k) <= x).clamp(1, knots.len() - 1);
    let (a, b) = (&knots[i - 1], &knots[i]);
    let t = (x - key(a)) / (key(b) - key(a));
    val(a) + t * (val(b) - val(a))
}

/// Builds the profile whose inverse interpolates the samples `(x, cdf(x))`.
///
/// Samples must be strictly increasing in both coordinates and run from
/// `(0,0)` to `(1,1)`. Samples of the identity give [`LimitProfile::Line`].
pub fn profile_from_cdf(samples: &[(f64, f64)]) -> Result<LimitProfile> {
    validate_knots(samples)?;
    if samples.iter().all(|(x, y)| (x - y).abs() <= 1e-15) {
        return Ok(LimitProfile::Line);
    }
    let knots = samples.iter().map(|&(x, y)| (y, x)).collect();
    LimitProfile::piecewise(knots)
}

/// Samples `cdf` on a uniform grid of `knots` points and calls [`profile_from_cdf`].
pub fn profile_from_cdf_fn(cdf: impl Fn(f64) -> f64, knots: usize) -> Result<LimitProfile> {
    if knots < 2 {
        return Err(Error::OutOfRange(format!("{knots} knots")));
    }
    let samples: Vec<_> = (0..knots)
        .map(|i| {
            let x = i as f64 / (knots - 1) as f64;
            (
                x,
                if i == 0 {
                    0.0
                } else if i == knots - 1 {
                    1.0
                } else {
                    cdf(x)
                },
            )
        })
        .collect();
    profile_from_cdf(&samples)
}

/// `h^-1(x)` for the continuation with the given profile: the `n` with
/// `H_n <= x < H_(n+1)` plus `inverse((x - H_n) / (H_(n+1) - H_n))`.
pub fn continuation_inverse(x: &BigUint, profile: &LimitProfile, system: &NumerationSystem) -> Result<f64> {
    let (n, frac) = split_inverse(x, profile, system)?;
    Ok(n as f64 + frac)
}

fn split_inverse(x: &BigUint, profile: &LimitProfile, system: &NumerationSystem) -> Result<(usize, f64)> {
    if x.is_zero() {
        return Err(Error::OutOfRange("continuation inverse needs x >= 1".into()));
    }
    let n = system.index_of(x);
    let (lo, hi) = (system.h(n), system.h(n + 1));
    let y = fixed::ratio_f64(&(x - &lo), &(hi - &lo));
    let p = profile.inverse(y);
    // rounding may land exactly on 1; the point then belongs to the next unit
    Ok(if p >= 1.0 { (n + 1, 0.0) } else { (n, p) })
}

/// `H-frak^-1(x)` for integer `x >= 1`.
pub fn benford_inverse(x: &BigUint, system: &NumerationSystem) -> Result<f64> {
    continuation_inverse(x, &LimitProfile::benford(system), system)
}

/// `H-frak^-1(x)` for real `x >= 1`.
pub fn benford_inverse_real(x: f64, system: &NumerationSystem) -> Result<f64> {
    if !(x.is_finite() && x >= 1.0) {
        return Err(Error::OutOfRange(format!("benford inverse needs x >= 1, got {x}")));
    }
    let whole = BigUint::from(x.floor() as u128);
    let n = system.index_of(&whole);
    let (lo, hi) = (system.h(n).to_f64().unwrap(), system.h(n + 1).to_f64().unwrap());
    let psi = system.psi();
    Ok(n as f64 + ((psi - 1.0) * (x - lo) / (hi - lo)).ln_1p() / psi.ln())
}

/// `H-frak(x)` for real `x >= 1`.
pub fn benford_continuation(x: f64, system: &NumerationSystem) -> Result<f64> {
    if !(x.is_finite() && x >= 1.0) {
        return Err(Error::OutOfRange(format!("benford continuation needs x >= 1, got {x}")));
    }
    let n = x.floor() as usize;
    let (lo, hi) = (system.h(n).to_f64().unwrap(), system.h(n + 1).to_f64().unwrap());
    Ok(lo + (hi - lo) * LimitProfile::benford(system).forward(x - n as f64))
}

/// The analytic continuation `alpha (phi^x + phi^-x cos(pi x) phi^-2)` of the
/// Fibonacci numbers `F_1 = 1, F_2 = 2, ...`, with `alpha = phi / sqrt 5`.
pub fn analytic_fibonacci(x: f64) -> f64 {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let alpha = phi / 5f64.sqrt();
    let tail = |x: f64| alpha * phi.powf(-x - 2.0) * (std::f64::consts::PI * x).cos();
    if !(1.0..90.0).contains(&x) {
        return alpha * phi.powf(x) + tail(x);
    }
    // split off the integer part so that integer arguments land exactly on F_n
    let n = x.floor();
    let p = x - n;
    let f_n = fibonacci_f64(n as u32);
    let sign = if (n as u32).is_multiple_of(2) { 1.0 } else { -1.0 };
    let main = f_n - sign * alpha * phi.powf(-n - 2.0);
    if p == 0.0 {
        return main + tail(x);
    }
    phi.powf(p) * main + tail(x)
}

fn fibonacci_f64(n: u32) -> f64 {
    let (mut a, mut b) = (1u128, 2u128);
    for _ in 1..n {
        (a, b) = (b, a + b);
    }
    a as f64
}

/// Inverse of [`analytic_fibonacci`] on `[1, inf)` by bisection.
pub fn analytic_fibonacci_inverse(y: f64) -> Result<f64> {
    if !(y.is_finite() && y >= 1.0) {
        return Err(Error::OutOfRange(format!("analytic Fibonacci inverse needs y >= 1, got {y}")));
    }
    let mut n = 1u32;
    while fibonacci_f64(n + 1) <= y {
        n += 1;
        if n > 180 {
            return Err(Error::OutOfRange(format!("{y} is too large")));
        }
    }
    let (mut lo, mut hi) = (n as f64, n as f64 + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if analytic_fibonacci(mid) <= y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `{h^-1(K_n)}` for each term.
pub fn fractional_parts(
    terms: &[BigUint],
    profile: &LimitProfile,
    system: &NumerationSystem,
    exec: Execution,
) -> Result<Vec<f64>> {
    if let Some(m) = terms.iter().max() {
        system.ensure_covers(m);
    }
    exec::map_slice(exec, terms, |k| split_inverse(k, profile, system).map(|(_, p)| p)).into_iter().collect()
}

/// Lazy variant of [`fractional_parts`].
pub fn fractional_parts_iter<'a, I>(
    terms: I,
    profile: &'a LimitProfile,
    system: &'a NumerationSystem,
) -> impl Iterator<Item = Result<f64>> + 'a
where
    I: IntoIterator<Item = BigUint>,
    I::IntoIter: 'a,
{
    terms.into_iter().map(move |k| split_inverse(&k, profile, system).map(|(_, p)| p))
}

/// Star discrepancy `D*_N` of values in `[0, 1)`.
pub fn star_discrepancy(values: &[f64], exec: Execution) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(Error::OutOfRange(format!("{v} is outside [0, 1)")));
    }
    let mut sorted = values.to_vec();
    exec::sort_floats(exec, &mut sorted);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n)).fold(0.0, f64::max))
}

/// `K_n = floor(H_(n+o) + (H_(n+o+1) - H_(n+o)) f({n pi}))` for `n = 1..=count`,
/// where `o` is `offset` and `f` the profile.
pub fn synthesize(
    profile: &LimitProfile,
    system: &NumerationSystem,
    count: usize,
    offset: usize,
    exec: Execution,
) -> Result<Vec<BigUint>> {
    if count == 0 {
        return Err(Error::OutOfRange("count must be at least 1".into()));
    }
    let bits = fixed::precision_bits();
    let fracs = fixed::frac_multiples_of_pi(count, bits);
    system.ensure_len(count + offset + 2);
    let integer_power = match profile {
        LimitProfile::Power { exponent } if exponent.fract() == 0.0 && *exponent <= 64.0 => Some(*exponent as u32),
        LimitProfile::Line => Some(1),
        _ => None,
    };
    Ok(exec::map_range(exec, 0..count, |i| {
        let n = i + 1 + offset;
        let (lo, hi) = (system.h(n), system.h(n + 1));
        let gap = &hi - &lo;
        let step = match integer_power {
            Some(e) => {
                // exact: gap * frac^e / 2^(bits e)
                let p = fracs[i].pow(e);
                (gap * p) >> (bits as u64 * e as u64)
            }
            None => fixed::floor_mul_f64(&gap, profile.forward(fixed::scaled_to_f64(&fracs[i], bits))),
        };
        lo + step
    }))
}

/// `inverse((b~ . H-hat - 1)/(psi - 1)) - inverse((b . H-hat - 1)/(psi - 1))`.
pub fn profile_probability(b: &LeadingBlock, profile: &LimitProfile, system: &NumerationSystem) -> Result<f64> {
    let next = blocks::successor(b, system)?;
    let psi = system.psi();
    let x = |c: &LeadingBlock| ((dot_hat(c.digits(), system) - 1.0) / (psi - 1.0)).clamp(0.0, 1.0);
    let hi = if next.is_exclusive() { 1.0 } else { x(&next) };
    Ok(profile.inverse(hi) - profile.inverse(x(b)))
}

/// A finite prefix of the expansion `beta = sum mu(k) theta^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealExpansion {
    /// `mu(1), ..., mu(depth)`.
    pub digits: Vec<u32>,
    pub depth: usize,
    /// True when a trailing run of `Theta` digits (the image of an input
    /// just below a finite expansion) was carried into the preceding digit.
    pub folded: bool,
}

impl RealExpansion {
    /// `sum mu(k) theta^k` in `f64`.
    pub fn partial_sum(&self, system: &NumerationSystem) -> f64 {
        system.theta() * dot_hat(&self.digits, system)
    }
}

/// Greedy `theta`-expansion of `beta` in `(0, 1)` to `depth` digits.
pub fn real_expansion(beta: f64, system: &NumerationSystem, depth: usize) -> Result<RealExpansion> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutOfRange(format!("beta = {beta} is outside (0, 1)")));
    }
    if depth == 0 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    let (bits, powers) = system.theta_powers_scaled(depth + 1, system.bits_for_depth(depth + 1));
    let mut rem = fixed::f64_to_scaled(beta, bits);
    let mut auto = Automaton::new(system.block());
    let mut digits = Vec::with_capacity(depth);
    for k in 1..=depth {
        let w = &powers.1[k];
        let q = (&rem / w).to_u32().unwrap_or(u32::MAX);
        let d = q.min(auto.bound());
        rem -= w * d;
        auto.push(d);
        digits.push(d);
    }
    let folded = fold_theta_tail(&mut digits, system);
    Ok(RealExpansion { digits, depth, folded })
}

/// Replaces `x, Theta(1), Theta(2), ...` running to the end of the window by
/// `x + 1, 0, 0, ...` when the run is long and the result stays valid.
fn fold_theta_tail(digits: &mut [u32], system: &NumerationSystem) -> bool {
    let block = system.block();
    let n = block.period();
    let min_run = (2 * n).max(12);
    for start in 1..digits.len() {
        let run = digits.len() - start;
        if run < min_run {
            break;
        }
        if (0..run).all(|i| digits[start + i] == block.theta(i + 1)) {
            let mut candidate = digits.to_vec();
            candidate[start - 1] += 1;
            candidate[start..].fill(0);
            if crate::numeration::is_valid_relaxed(&candidate, block) {
                digits.copy_from_slice(&candidate);
                return true;
            }
            return false;
        }
    }
    false
}

/// Side from which a sequence's fractional parts approach their limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    FromAbove,
    FromBelow,
    #[default]
    Unknown,
}

/// The block of length `s` carrying all leading blocks of a sequence with
/// `K_n ~ a psi^n`.
///
/// With `c = {log_psi(delta / a)}`, this is the block `b` with
/// `log_psi(b . H-hat) <= c < log_psi(b~ . H-hat)`. When `c` sits on a block
/// boundary the answer depends on the side the terms approach from; with
/// [`Approach::Unknown`] that case is reported as an error.
pub fn concentration_block(a: f64, system: &NumerationSystem, s: usize, approach: Approach) -> Result<LeadingBlock> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::OutOfRange(format!("limit constant {a} must be positive")));
    }
    if s == 0 {
        return Err(Error::OutOfRange("block length 0".into()));
    }
    let psi = system.psi();
    let l = (system.root().delta / a).ln() / psi.ln();
    let c = l - l.floor();
    // y = psi^c in [1, psi); the block's digits are the expansion of theta * y
    let y = (c * psi.ln()).exp();
    let target = (y / psi).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    let exp = real_expansion(target, system, s)?;
    let mut prefix = exp.digits;
    if prefix[0] == 0 {
        // y rounded just below 1: c is at the wrap-around point
        prefix = vec![0; s];
        prefix[0] = 1;
    }
    let b = LeadingBlock::new(&prefix, system)?;
    let next = blocks::successor(&b, system)?;
    let at = |c: &LeadingBlock| blocks::log_position(c, system);
    let tol = 64.0 * f64::EPSILON;
    let lower = (c - at(&b)).abs() < tol || (c - 1.0).abs() < tol || c < tol;
    let upper = if next.is_exclusive() { (1.0 - c) < tol } else { (at(&next) - c).abs() < tol };
    if !(lower || upper) {
        return Ok(b);
    }
    let on = if lower { b } else { blocks::first_if_exclusive(next, system) };
    match approach {
        Approach::FromAbove => Ok(on),
        Approach::FromBelow => blocks::predecessor(&on, system),
        Approach::Unknown => Err(Error::BoundaryCollision(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> NumerationSystem {
        NumerationSystem::fibonacci()
    }

    #[test]
    fn profiles_round_trip() {
        let f = fib();
        for p in [LimitProfile::benford(&f), LimitProfile::Line, LimitProfile::power(2.0).unwrap()] {
            assert!(p.round_trip_error(1024) < 1e-12, "{p:?}");
            assert_eq!(p.forward(0.0), 0.0);
            assert!((p.forward(1.0) - 1.0).abs() < 1e-15);
        }
        let fake = LimitProfile::interpolated_benford(&f, 4).unwrap();
        assert!(fake.round_trip_error(1024) < 1e-12);
    }

    #[test]
    fn inverse_hits_table_points() {
        let f = fib();
        for n in 1..60 {
            assert_eq!(benford_inverse(&f.h(n), &f).unwrap(), n as f64);
        }
        assert_eq!(benford_inverse(&BigUint::from(233u32), &f).unwrap(), 12.0);
        assert!(benford_inverse(&BigUint::zero(), &f).is_err());
        assert!((benford_inverse_real(233.0, &f).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_fibonacci_on_integers() {
        let mut fib = (1u64, 2u64);
        for n in 1..=40 {
            assert!((analytic_fibonacci(n as f64) - fib.0 as f64).abs() < 1e-9, "n = {n}");
            fib = (fib.1, fib.0 + fib.1);
        }
        let x = analytic_fibonacci_inverse(100.0).unwrap();
        assert!((analytic_fibonacci(x) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(star_discrepancy(&[0.0, 0.5], Execution::Sequential).unwrap(), 0.5);
        let n = 10;
        let mid: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64 - 0.5 / n as f64).collect();
        assert!((star_discrepancy(&mid, Execution::Parallel).unwrap() - 0.05).abs() < 1e-15);
        assert!(matches!(star_discrepancy(&[], Execution::Sequential), Err(Error::EmptyInput)));
    }

    #[test]
    fn synthesize_line_examples() {
        let f = fib();
        let k = synthesize(&LimitProfile::Line, &f, 10, 0, Execution::Sequential).unwrap();
        assert_eq!(k, [1u64, 2, 3, 6, 11, 19, 33, 36, 64, 111].map(BigUint::from));
        let t = NumerationSystem::base(10).unwrap();
        let k = synthesize(&LimitProfile::Line, &t, 4, 1, Execution::Parallel).unwrap();
        assert_eq!(k, [22u64, 354, 4823, 60973].map(BigUint::from));
    }

    #[test]
    fn profile_probability_examples() {
        let f = fib();
        let omega = f.theta();
        let b = LeadingBlock::new(&[1, 0, 0, 1, 0, 1], &f).unwrap();
        assert!((profile_probability(&b, &LimitProfile::Line, &f).unwrap() - omega.powi(5)).abs() < 1e-14);
        let b = LeadingBlock::new(&[1, 0, 1, 0, 1, 0], &f).unwrap();
        assert!((profile_probability(&b, &LimitProfile::Line, &f).unwrap() - omega.powi(4)).abs() < 1e-14);
    }

    #[test]
    fn real_expansion_examples() {
        let f = fib();
        let w = f.theta();
        let e = real_expansion(w, &f, 20).unwrap();
        assert_eq!(e.digits[0], 1);
        assert!(e.digits[1..].iter().all(|&d| d == 0));
        let e = real_expansion(w * w + w.powi(5), &f, 20).unwrap();
        let mut want = vec![0; 20];
        want[1] = 1;
        want[4] = 1;
        assert_eq!(e.digits, want);
    }

    #[test]
    fn lucas_concentration() {
        let f = fib();
        let a = (5f64.sqrt() - 1.0) / 2.0;
        let b = concentration_block(a, &f, 9, Approach::Unknown).unwrap();
        assert_eq!(b.digits(), [1, 0, 0, 0, 1, 0, 0, 0, 1]);
        let b = concentration_block(a, &f, 10, Approach::Unknown).unwrap();
        assert_eq!(b.digits(), [1, 0, 0, 0, 1, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn boundary_needs_a_side() {
        let f = fib();
        let delta = f.root().delta;
        assert!(matches!(concentration_block(delta, &f, 5, Approach::Unknown), Err(Error::BoundaryCollision(_))));
        let b = concentration_block(delta, &f, 5, Approach::FromAbove).unwrap();
        assert_eq!(b.digits(), [1, 0, 0, 0, 0]);
        let b = concentration_block(delta, &f, 5, Approach::FromBelow).unwrap();
        assert_eq!(b.digits(), [1, 0, 1, 0, 1]);
    }
}
