//! Characteristic polynomial, dominant zero and the Binet constant.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed;
use crate::numeration::{NumerationSystem, PrincipalBlock};

pub const DEFAULT_TOL: f64 = 1e-15;

/// Integer polynomial with coefficients listed from the highest degree down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    pub coeffs: Vec<i64>,
}

impl Polynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, &c| acc * x + c as f64)
    }

    pub fn eval_derivative(&self, x: f64) -> f64 {
        let d = self.degree();
        self.coeffs[..d].iter().enumerate().fold(0.0, |acc, (i, &c)| acc * x + (c * (d - i) as i64) as f64)
    }

    /// Quotient by `(x - r)`, highest degree first.
    pub fn deflate(&self, r: f64) -> Vec<f64> {
        let mut q = Vec::with_capacity(self.degree());
        let mut acc = 0.0;
        for &c in &self.coeffs[..self.degree()] {
            acc = acc * r + c as f64;
            q.push(acc);
        }
        q
    }
}

/// `g_L(x) = x^N - a_1 x^(N-1) - ... - a_(N-1) x - (1 + a_N)`.
pub fn characteristic_polynomial(block: &PrincipalBlock) -> Polynomial {
    let a = block.entries();
    let n = a.len();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1);
    coeffs.extend(a[..n - 1].iter().map(|&x| -(x as i64)));
    coeffs.push(-(1 + a[n - 1] as i64));
    Polynomial { coeffs }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominantRoot {
    /// Dominant real zero of the characteristic polynomial, `psi > 1`.
    pub psi: f64,
    /// `1 / psi`.
    pub theta: f64,
    /// `lim H_n / psi^n`.
    pub delta: f64,
    /// Size of the last Newton correction.
    pub tol: f64,
}

/// Dominant zero by bisection on `(1, 2 + sum a_k]` polished with Newton.
pub fn dominant_zero(block: &PrincipalBlock, tol: f64) -> Result<DominantRoot> {
    let g = characteristic_polynomial(block);
    let mut lo = 1.0f64;
    let mut hi = 2.0 + block.entries().iter().map(|&a| a as f64).sum::<f64>();
    if g.eval(lo) >= 0.0 || g.eval(hi) <= 0.0 {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g.eval(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut psi = 0.5 * (lo + hi);
    let mut step = f64::INFINITY;
    for _ in 0..8 {
        let d = g.eval_derivative(psi);
        step = g.eval(psi) / d;
        psi -= step;
        if step.abs() <= tol * psi {
            break;
        }
    }
    if !(psi.is_finite() && psi > 1.0) {
        return Err(Error::NonConvergence(8));
    }
    let delta = delta_formula(block, &g, psi);
    Ok(DominantRoot { psi, theta: 1.0 / psi, delta, tol: step.abs() })
}

/// Which route to use for the Binet constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaMethod {
    /// Successive ratios `H_n / psi^n` until they settle.
    Limit,
    /// Residue of the generating function at `psi`.
    Formula,
}

pub fn binet_delta(system: &NumerationSystem, method: DeltaMethod) -> Result<f64> {
    let psi = system.psi();
    match method {
        DeltaMethod::Formula => {
            let g = characteristic_polynomial(system.block());
            Ok(delta_formula(system.block(), &g, psi))
        }
        DeltaMethod::Limit => {
            let max_n = (700.0 / psi.ln()) as usize;
            let h = system.fundamental_sequence(max_n);
            let mut pow = 1.0;
            let mut prev = f64::NAN;
            for (i, hn) in h.iter().enumerate() {
                pow *= psi;
                let r = fixed::ratio_f64(hn, &BigUint::one()) / pow;
                if i > 8 && (r - prev).abs() < 1e-12 * r {
                    return Ok(r);
                }
                prev = r;
            }
            Err(Error::NonConvergence(max_n))
        }
    }
}

/// `delta = (1 / (psi g'(psi))) sum_k H_k q_(k-1)` with `q = g / (x - psi)`.
fn delta_formula(block: &PrincipalBlock, g: &Polynomial, psi: f64) -> f64 {
    let n = block.period();
    // deflate gives q from the highest degree down; q_(k-1) is q[n-k]
    let q = g.deflate(psi);
    let a = block.entries();
    let mut h = Vec::with_capacity(n);
    for i in 1..=n {
        let v = 1.0 + (1..i).map(|k| a[k - 1] as f64 * h[i - k - 1]).sum::<f64>();
        h.push(v);
    }
    let s: f64 = (1..=n).map(|k| h[k - 1] * q[n - k]).sum();
    s / (psi * g.eval_derivative(psi))
}

/// `theta * 2^bits`, as the largest `x` with
/// `a_1 x + ... + a_(N-1) x^(N-1) + (1 + a_N) x^N <= 1`.
pub fn theta_scaled(block: &PrincipalBlock, bits: u32) -> BigUint {
    let w = bits + 16;
    let one = BigUint::one() << w;
    let a = block.entries();
    let n = a.len();
    let coeff = |k: usize| if k == n { 1 + a[n - 1] } else { a[k - 1] };
    let eval = |x: &BigUint| {
        let mut acc = &one * coeff(n);
        for k in (1..n).rev() {
            acc = (&one * coeff(k)) + ((&acc * x) >> w);
        }
        (acc * x) >> w
    };
    let mut lo = BigUint::from(0u32);
    let mut hi = one.clone();
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1;
        if eval(&mid) <= one {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo >> 16
}
