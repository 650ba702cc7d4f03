//! Integer sequences and the leading-block statistics measured on them.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{self, Classifier, LeadingBlock};
use crate::continuation::{self, LimitProfile};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fixed::QuadraticSurd;
use crate::numeration::{NumerationSystem, PrincipalBlock};

/// Terms per work unit when generating or classifying in parallel.
const CHUNK: usize = 256;
/// Spot checks of threshold classification against full expansion per report.
const SPOT_CHECKS: usize = 1000;

/// An integer sequence `K_1, K_2, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceSpec {
    /// `a^n`.
    Power { base: u64 },
    /// `K_(n+d) = c_1 K_(n+d-1) + ... + c_d K_n` from the given initial terms.
    LinearRecurrence { coeffs: Vec<i64>, init: Vec<i64> },
    /// `floor(c gamma^n)`.
    FloorGeometric { c: QuadraticSurd, gamma: BigRational },
    /// `n^a`.
    Monomial { exponent: u32 },
    /// Terms synthesized from a limit profile over a numeration system.
    Synthesized { profile: LimitProfile, block: PrincipalBlock, offset: usize },
}

impl SequenceSpec {
    /// `2, 1, 3, 4, 7, 11, ...`
    pub fn lucas() -> Self {
        SequenceSpec::LinearRecurrence { coeffs: vec![1, 1], init: vec![2, 1] }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        match self {
            SequenceSpec::Power { base } if *base < 2 => bad(format!("power base {base} must be at least 2")),
            SequenceSpec::Monomial { exponent: 0 } => bad("monomial exponent 0 gives a constant sequence".into()),
            SequenceSpec::LinearRecurrence { coeffs, init } => {
                if coeffs.is_empty() || coeffs.len() != init.len() {
                    bad("a recurrence needs as many initial terms as coefficients".into())
                } else if init.iter().any(|&x| x <= 0) {
                    bad("initial terms must be positive".into())
                } else {
                    Ok(())
                }
            }
            SequenceSpec::FloorGeometric { c, gamma } => {
                if gamma <= &BigRational::one() {
                    bad(format!("gamma = {gamma} must exceed 1"))
                } else if c.to_f64() <= 0.0 {
                    bad("c must be positive".into())
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// First `count` terms, exactly.
pub fn generate(spec: &SequenceSpec, count: usize, exec: Execution) -> Result<Vec<BigUint>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::OutOfRange("count must be at least 1".into()));
    }
    let terms = match spec {
        SequenceSpec::Power { base } => {
            let base = BigUint::from(*base);
            chunked(exec, count, |start, end| {
                let mut x = base.pow(start as u32 + 1);
                let mut out = Vec::with_capacity(end - start);
                for _ in start..end {
                    out.push(x.clone());
                    x *= &base;
                }
                out
            })
        }
        SequenceSpec::Monomial { exponent } => exec::map_range(exec, 1..count + 1, |n| BigUint::from(n).pow(*exponent)),
        SequenceSpec::LinearRecurrence { coeffs, init } => linear_recurrence(coeffs, init, count)?,
        SequenceSpec::FloorGeometric { c, gamma } => {
            exec::map_range(exec, 1..count + 1, |n| floor_geometric(c, gamma, n)).into_iter().collect::<Result<_>>()?
        }
        SequenceSpec::Synthesized { profile, block, offset } => {
            let system = NumerationSystem::new(block.clone())?;
            continuation::synthesize(profile, &system, count, *offset, exec)?
        }
    };
    check_growth(&terms)?;
    Ok(terms)
}

fn chunked<T: Send>(exec: Execution, count: usize, f: impl Fn(usize, usize) -> Vec<T> + Sync + Send) -> Vec<T> {
    let chunks = count.div_ceil(CHUNK);
    exec::map_range(exec, 0..chunks, |i| f(i * CHUNK, ((i + 1) * CHUNK).min(count))).into_iter().flatten().collect()
}

fn linear_recurrence(coeffs: &[i64], init: &[i64], count: usize) -> Result<Vec<BigUint>> {
    let mut k: Vec<BigInt> = init.iter().map(|&x| BigInt::from(x)).collect();
    while k.len() < count {
        let n = k.len();
        let next = coeffs.iter().enumerate().map(|(i, &c)| &k[n - 1 - i] * c).sum();
        k.push(next);
    }
    k.truncate(count.max(1));
    k.into_iter()
        .map(|x| if x.is_positive() { Ok(x.magnitude().clone()) } else { Err(Error::NonPositive(x.to_string())) })
        .collect()
}

/// `floor(c gamma^n)`, certified by an enclosure of `c` that is refined
/// until both ends give the same floor.
pub fn floor_geometric(c: &QuadraticSurd, gamma: &BigRational, n: usize) -> Result<BigUint> {
    let g = gamma.pow(n as i32);
    let (p, q) = (g.numer().clone(), g.denom().clone());
    if c.b.is_zero() || c.d.is_zero() {
        // rational c: exact
        let num = &c.a * &p;
        let den = BigInt::from(c.c.clone()) * &q;
        return to_positive(num.div_floor(&den));
    }
    // the enclosure error is scaled by p/q, so resolve that many extra bits
    let magnitude = p.bits().saturating_sub(q.bits()) as u32;
    let mut bits = (magnitude + 64).max(crate::fixed::precision_bits());
    for _ in 0..16 {
        let (lo, hi) = c.enclose(bits);
        let den = &q << (bits as u64);
        let flo = (lo * &p).div_floor(&den);
        let fhi = (hi * &p).div_floor(&den);
        if flo == fhi {
            return to_positive(flo);
        }
        bits *= 2;
    }
    Err(Error::NonConvergence(16))
}

fn to_positive(x: BigInt) -> Result<BigUint> {
    if x.is_positive() {
        Ok(x.magnitude().clone())
    } else {
        Err(Error::NonPositive(x.to_string()))
    }
}

/// Terms must be positive and the second half strictly increasing.
fn check_growth(terms: &[BigUint]) -> Result<()> {
    if let Some(z) = terms.iter().find(|x| x.is_zero()) {
        return Err(Error::NonPositive(z.to_string()));
    }
    let tail = &terms[terms.len() / 2..];
    if tail.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonMonotone);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub block: String,
    pub count: u64,
    pub empirical: f64,
    pub theoretical: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub system: String,
    pub s: usize,
    pub rows: Vec<FrequencyRow>,
    /// Terms with a defined leading block of length `s`.
    pub total: u64,
    pub max_deviation: f64,
    /// Terms whose threshold classification was confirmed by full expansion.
    pub spot_checks: usize,
}

impl FrequencyReport {
    pub fn row(&self, block: &str) -> Option<&FrequencyRow> {
        self.rows.iter().find(|r| r.block == block)
    }
}

pub fn empirical_block_frequency(
    spec: &SequenceSpec,
    system: &NumerationSystem,
    s: usize,
    count: usize,
    exec: Execution,
) -> Result<FrequencyReport> {
    let terms = generate(spec, count, exec)?;
    frequency_of_terms(&terms, system, s, exec)
}

/// Leading-block frequencies of the given terms against the Benford
/// probabilities.
pub fn frequency_of_terms(
    terms: &[BigUint],
    system: &NumerationSystem,
    s: usize,
    exec: Execution,
) -> Result<FrequencyReport> {
    let family = blocks::enumerate_blocks(s, system)?;
    if let Some(m) = terms.iter().max() {
        system.ensure_covers(m);
    }
    let classifier = Classifier::new(&family, system);
    let len = family.len();
    let counts = exec::fold_chunks(
        exec,
        terms.len(),
        CHUNK,
        || vec![0u64; len],
        |mut acc, r| {
            for k in &terms[r] {
                if let Some(i) = classifier.classify(k) {
                    acc[i] += 1;
                }
            }
            acc
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    let stride = terms.len().div_ceil(SPOT_CHECKS).max(1);
    let checked: Vec<usize> = (0..terms.len()).step_by(stride).collect();
    let mismatches = exec::map_slice(exec, &checked, |&i| {
        let by_expansion = blocks::leading_block(&terms[i], s, system).and_then(|b| family.position(&b));
        by_expansion != classifier.classify(&terms[i])
    });
    if let Some(i) = mismatches.iter().position(|&m| m) {
        return Err(Error::Internal(format!(
            "threshold classification disagrees with expansion at term {}",
            checked[i] + 1
        )));
    }
    let theoretical = family.probabilities(system, exec);
    let total: u64 = counts.iter().sum();
    let rows: Vec<FrequencyRow> = family
        .blocks
        .iter()
        .zip(&counts)
        .zip(&theoretical)
        .map(|((b, &count), &theo)| {
            let empirical = if total == 0 { 0.0 } else { count as f64 / total as f64 };
            FrequencyRow {
                block: b.to_string(),
                count,
                empirical,
                theoretical: theo,
                deviation: (empirical - theo).abs(),
            }
        })
        .collect();
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(FrequencyReport { system: system.id(), s, rows, total, max_deviation, spot_checks: checked.len() })
}

/// A flagged `(system, s, block)` from an absolute-Benford run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub system: String,
    pub s: usize,
    pub block: String,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsoluteReport {
    pub threshold: f64,
    pub reports: Vec<FrequencyReport>,
    pub flagged: Vec<Deviation>,
}

pub const DEFAULT_DEVIATION_THRESHOLD: f64 = 0.03;

/// Frequency reports for every system and every `s <= s_max`.
pub fn absolute_benford_suite(
    spec: &SequenceSpec,
    systems: &[NumerationSystem],
    s_max: usize,
    count: usize,
    threshold: f64,
    exec: Execution,
) -> Result<AbsoluteReport> {
    if systems.is_empty() {
        return Err(Error::EmptyInput);
    }
    let terms = generate(spec, count, exec)?;
    let mut reports = Vec::new();
    let mut flagged = Vec::new();
    for system in systems {
        for s in 1..=s_max {
            let r = frequency_of_terms(&terms, system, s, exec)?;
            for row in r.rows.iter().filter(|row| row.deviation > threshold) {
                flagged.push(Deviation {
                    system: r.system.clone(),
                    s,
                    block: row.block.clone(),
                    deviation: row.deviation,
                });
            }
            reports.push(r);
        }
    }
    Ok(AbsoluteReport { threshold, reports, flagged })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationPoint {
    pub n: u64,
    /// Window index: `H_m <= n^a < H_(m+1)`.
    pub m: usize,
    /// `{H-frak^-1(n^a)}`.
    pub p: f64,
    /// `#{k <= n : LB_s(k^a) = b} / n`.
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationTrace {
    pub exponent: u32,
    pub block: String,
    pub system: String,
    pub points: Vec<OscillationPoint>,
    pub empirical_max: f64,
    pub empirical_min: f64,
    /// Closed-form `(limsup, liminf)`, for the Fibonacci system only.
    pub closed_form: Option<(f64, f64)>,
}

/// Samples per window on the continuation grid.
pub const OSCILLATION_GRID: usize = 16;

/// Running proportions of `LB_s(k^a) = b` over the windows `m_lo..=m_hi`.
pub fn oscillation_scan(
    a: u32,
    b: &LeadingBlock,
    system: &NumerationSystem,
    m_lo: usize,
    m_hi: usize,
    exec: Execution,
) -> Result<OscillationTrace> {
    if a == 0 {
        return Err(Error::OutOfRange("exponent must be at least 1".into()));
    }
    if m_lo < b.s() || m_hi < m_lo {
        return Err(Error::OutOfRange(format!("windows {m_lo}..={m_hi} for a block of length {}", b.s())));
    }
    // k^a has leading block b exactly for k in [ceil_root(lo_m), ceil_root(hi_m))
    let runs: Vec<(u64, u64)> = (b.s()..=m_hi)
        .map(|m| {
            let (lo, hi) = blocks::block_range(b, m, system)?;
            Ok((ceil_root(&lo, a)?, ceil_root(&hi, a)?))
        })
        .collect::<Result<_>>()?;
    let count_upto = |n: u64| -> u64 { runs.iter().map(|&(l, h)| h.min(n + 1).saturating_sub(l)).sum() };
    let mut ns = Vec::new();
    for m in m_lo..=m_hi {
        for j in 0..=OSCILLATION_GRID {
            let x = continuation::benford_continuation(m as f64 + j as f64 / OSCILLATION_GRID as f64, system)?;
            ns.push(x.powf(1.0 / a as f64).floor() as u64);
        }
        let (l, h) = runs[m - b.s()];
        ns.extend([l.saturating_sub(1), l, h.saturating_sub(1), h]);
    }
    let (first, last) = (ceil_root(&system.h(m_lo), a)?, ceil_root(&system.h(m_hi + 1), a)?.saturating_sub(1));
    ns.retain(|&n| n >= first.max(1) && n <= last);
    ns.sort_unstable();
    ns.dedup();
    let benford = LimitProfile::benford(system);
    let points = exec::map_slice(exec, &ns, |&n| -> Result<OscillationPoint> {
        let v = BigUint::from(n).pow(a);
        let m = system.index_of(&v);
        let p = continuation::continuation_inverse(&v, &benford, system)?;
        Ok(OscillationPoint { n, m, p: p - p.floor(), proportion: count_upto(n) as f64 / n as f64 })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let empirical_max = points.iter().map(|p| p.proportion).fold(f64::NEG_INFINITY, f64::max);
    let empirical_min = points.iter().map(|p| p.proportion).fold(f64::INFINITY, f64::min);
    let closed_form = if system.is_fibonacci() { Some(oscillation_bounds(a, b, system)?) } else { None };
    Ok(OscillationTrace {
        exponent: a,
        block: b.to_string(),
        system: system.id(),
        points,
        empirical_max,
        empirical_min,
        closed_form,
    })
}

fn ceil_root(x: &BigUint, a: u32) -> Result<u64> {
    let r = x.nth_root(a);
    let r = if &r.pow(a) < x { r + 1u32 } else { r };
    r.to_u64().ok_or_else(|| Error::OutOfRange(format!("{a}-th root of {x} exceeds 64 bits")))
}

/// Closed-form `(limsup, liminf)` of the running proportion of `LB_s(k^a) = b`.
///
/// With `[beta0, beta1)` the interval of `b` and
/// `r_i = (psi^(beta_i/a) - 1) / (psi^(1/a) - 1)`, the limiting proportion at
/// fractional position `p` is `C(p; beta1, r1) - C(p; beta0, r0)` with
/// `C(p; beta, r) = (r + psi^(min(p, beta)/a) - 1) / psi^(p/a)`. It is
/// monotone between the breakpoints `0, beta0, beta1, 1`, so the extremes are
/// taken there.
pub fn oscillation_bounds(a: u32, b: &LeadingBlock, system: &NumerationSystem) -> Result<(f64, f64)> {
    let next = blocks::successor(b, system)?;
    let beta0 = blocks::log_position(b, system);
    let beta1 = if next.is_exclusive() { 1.0 } else { blocks::log_position(&next, system) };
    let psi = system.psi();
    let a = a as f64;
    let r = |beta: f64| (psi.powf(beta / a) - 1.0) / (psi.powf(1.0 / a) - 1.0);
    let c = |p: f64, beta: f64| (r(beta) + psi.powf(p.min(beta) / a) - 1.0) / psi.powf(p / a);
    let at = |p: f64| c(p, beta1) - c(p, beta0);
    let values = [0.0, beta0, beta1, 1.0].map(at);
    Ok((values.iter().copied().fold(f64::NEG_INFINITY, f64::max), values.iter().copied().fold(f64::INFINITY, f64::min)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinExpansionReport {
    pub t: usize,
    pub outer: String,
    pub inner: String,
    pub block: String,
    /// `log_psi(b~ . H-hat / b . H-hat)` for the inner system.
    pub expected: f64,
    pub epsilon: f64,
    pub samples: usize,
    /// Number of indices `k <= t` with `LB_s(K_k) = b`.
    pub hits: usize,
    pub fraction: f64,
    pub mean: f64,
}

/// Samples `n` uniformly from `[1, K_(t+1))`, expands it over the outer
/// system, and measures the digit-weighted share of summands `K_k` whose
/// inner leading block is `b`.
#[allow(clippy::too_many_arguments)]
pub fn within_expansion(
    outer: &NumerationSystem,
    inner: &NumerationSystem,
    b: &LeadingBlock,
    t: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<WithinExpansionReport> {
    if t == 0 || samples == 0 {
        return Err(Error::OutOfRange("t and samples must be positive".into()));
    }
    let expected = blocks::benford_probability(b, inner)?;
    let k = outer.fundamental_sequence(t + 1);
    let in_s: Vec<bool> = k[..t].iter().map(|x| blocks::leading_block(x, b.s(), inner).as_ref() == Some(b)).collect();
    let hits = in_s.iter().filter(|&&x| x).count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = BigUint::one();
    let draws: Vec<BigUint> = (0..samples).map(|_| rng.gen_biguint_range(&one, &k[t])).collect();
    let shares = exec::map_slice(exec, &draws, |n| -> Result<f64> {
        let mu = outer.expand(n)?;
        let len = mu.len();
        let (mut num, mut den) = (0u64, 0u64);
        for (i, &d) in mu.digits().iter().enumerate() {
            // digit i multiplies K_(len - i)
            den += d as u64;
            if in_s[len - i - 1] {
                num += d as u64;
            }
        }
        Ok(num as f64 / den as f64)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let close = shares.iter().filter(|&&p| (p - expected).abs() < epsilon).count();
    let mean = shares.iter().sum::<f64>() / samples as f64;
    Ok(WithinExpansionReport {
        t,
        outer: outer.id(),
        inner: inner.id(),
        block: b.to_string(),
        expected,
        epsilon,
        samples,
        hits,
        fraction: close as f64 / samples as f64,
        mean,
    })
}
