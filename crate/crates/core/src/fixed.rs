//! Binary fixed-point helpers over `num-bigint`.
//!
//! A fixed-point value with `bits` fractional bits is stored as the integer
//! `floor(x * 2^bits)`. Only the handful of operations the experiments need
//! are provided.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Default working precision in fractional bits.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// Working precision, overridable with `ZB_PRECISION_BITS` (minimum 64).
pub fn precision_bits() -> u32 {
    static BITS: OnceLock<u32> = OnceLock::new();
    *BITS.get_or_init(|| {
        std::env::var("ZB_PRECISION_BITS")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .map(|b| b.max(64))
            .unwrap_or(DEFAULT_PRECISION_BITS)
    })
}

fn atan_inv_scaled(x: u32, bits: u32) -> BigInt {
    // atan(1/x) = sum (-1)^k / ((2k+1) x^(2k+1))
    let x = BigUint::from(x);
    let x2 = &x * &x;
    let mut term: BigUint = (BigUint::one() << bits) / &x;
    let mut sum = BigInt::from(term.clone());
    let mut k = 1u32;
    while !term.is_zero() {
        term /= &x2;
        let t = BigInt::from(&term / BigUint::from(2 * k + 1));
        if k % 2 == 1 {
            sum -= t;
        } else {
            sum += t;
        }
        k += 1;
    }
    sum
}

/// `floor(pi * 2^bits)`, exact up to one unit in the last place.
pub fn pi_scaled(bits: u32) -> BigUint {
    const GUARD: u32 = 32;
    let w = bits + GUARD;
    let pi: BigInt = atan_inv_scaled(5, w) * 16 - atan_inv_scaled(239, w) * 4;
    let pi = pi.to_biguint().expect("pi is positive");
    pi >> GUARD
}

/// Fractional parts `{n pi}` for `n = 1..=count`, each scaled by `2^bits`.
///
/// Uses `pi` with enough guard bits that the error in every value stays below
/// `2^-bits` for `n` up to `2^32`.
pub fn frac_multiples_of_pi(count: usize, bits: u32) -> Vec<BigUint> {
    let work = bits + 40;
    let pi = pi_scaled(work);
    let mask = (BigUint::one() << work) - BigUint::one();
    let mut acc = BigUint::zero();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        acc += &pi;
        acc &= &mask;
        out.push(&acc >> 40u32);
    }
    out
}

/// Converts `raw / 2^bits` to the nearest-ish `f64` (truncated mantissa).
pub fn scaled_to_f64(raw: &BigUint, bits: u32) -> f64 {
    let len = raw.bits();
    if len == 0 {
        return 0.0;
    }
    if len <= 64 {
        return raw.to_f64().unwrap_or(0.0) * (-(bits as f64)).exp2();
    }
    let shift = len - 64;
    let top = (raw >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    top * ((shift as f64) - bits as f64).exp2()
}

/// `num / den` as `f64`, accurate to a few ulps even for huge operands.
pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "division by zero");
    let shift = num.bits().max(den.bits()).saturating_sub(120);
    let n = (num >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (den >> shift).to_f64().unwrap_or(f64::INFINITY);
    if d == 0.0 {
        // num >> shift dominates: ratio is enormous
        return f64::INFINITY;
    }
    n / d
}

/// Signed variant of [`ratio_f64`].
pub fn ratio_f64_signed(num: &BigInt, den: &BigUint) -> f64 {
    let r = ratio_f64(num.magnitude(), den);
    if num.sign() == Sign::Minus {
        -r
    } else {
        r
    }
}

/// `floor(x * y)` for `y` a finite non-negative `f64`, computed exactly.
pub fn floor_mul_f64(x: &BigUint, y: f64) -> BigUint {
    assert!(y.is_finite() && y >= 0.0, "multiplier must be finite and non-negative");
    if y == 0.0 {
        return BigUint::zero();
    }
    let bits = y.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let prod = x * BigUint::from(mant);
    if e >= 0 {
        prod << (e as u64)
    } else {
        prod >> ((-e) as u64)
    }
}

/// `floor(y * 2^bits)` for a finite non-negative `f64`, exact.
pub fn f64_to_scaled(y: f64, bits: u32) -> BigUint {
    floor_mul_f64(&(BigUint::one() << bits), y)
}

/// `floor(sqrt(d) * 2^bits)`.
pub fn sqrt_scaled(d: &BigUint, bits: u32) -> BigUint {
    (d << (2 * bits as u64)).sqrt()
}

/// Real constants of the form `(a + b*sqrt(d)) / c` with integer parameters.
///
/// Rationals are the special case `b = 0`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuadraticSurd {
    pub a: BigInt,
    pub b: BigInt,
    pub d: BigUint,
    pub c: BigUint,
}

impl QuadraticSurd {
    pub fn rational(num: BigInt, den: BigUint) -> Self {
        Self { a: num, b: BigInt::zero(), d: BigUint::zero(), c: den }
    }

    /// `phi / sqrt(5) = (5 + sqrt 5) / 10`.
    pub fn golden_over_sqrt5() -> Self {
        Self { a: 5.into(), b: 1.into(), d: 5u32.into(), c: 10u32.into() }
    }

    /// `(sqrt 5 - 1) / 2`, the leading coefficient of the Lucas numbers against `phi^n`.
    pub fn lucas_leading() -> Self {
        Self { a: (-1).into(), b: 1.into(), d: 5u32.into(), c: 2u32.into() }
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.enclose(80);
        (ratio_f64_signed(&lo, &(BigUint::one() << 80u32)) + ratio_f64_signed(&hi, &(BigUint::one() << 80u32))) / 2.0
    }

    /// Integers `(lo, hi)` with `lo <= value * 2^bits <= hi` and `hi - lo <= 2`.
    pub fn enclose(&self, bits: u32) -> (BigInt, BigInt) {
        let r = BigInt::from(sqrt_scaled(&self.d, bits));
        let base = &self.a << (bits as u64);
        let (blo, bhi) = if self.b.sign() == Sign::Minus {
            (&self.b * (&r + 1), &self.b * &r)
        } else {
            (&self.b * &r, &self.b * (&r + 1))
        };
        let c = BigInt::from(self.c.clone());
        let lo = (&base + blo).div_floor(&c);
        let hi = -((-(&base + bhi)).div_floor(&c));
        (lo, hi)
    }
}
