//! Compensated accumulation and the additive character `e(x) = exp(2πix)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier (improved Kahan–Babuška) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        iter.into_iter().for_each(|x| acc.add(x));
        acc
    }
}

/// Compensated complex accumulator (independent Neumaier sums per component).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = ComplexSum::default();
        iter.into_iter().for_each(|z| acc.add(z));
        acc
    }
}

pub const CHUNK: u64 = 1 << 15;

/// `Σ_{n=lo}^{hi} term(n)`, split into fixed chunks of `CHUNK` indices that are
/// summed in parallel and merged in index order. The result does not depend
/// on the number of threads.
pub fn chunked_sum<F>(lo: u64, hi: u64, term: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    if hi < lo {
        return Complex64::new(0.0, 0.0);
    }
    let chunks = (hi - lo) / CHUNK + 1;
    let partials: Vec<ComplexSum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let a = lo + c * CHUNK;
            let b = (a + CHUNK - 1).min(hi);
            (a..=b).map(&term).collect()
        })
        .collect();
    let mut total = ComplexSum::default();
    partials.iter().for_each(|p| total.merge(p));
    total.value()
}

/// `e(num/den)`, with exact values on the quarter turns.
pub fn e_ratio(num: i64, den: u64) -> Complex64 {
    let r = (num as i128).rem_euclid(den as i128) as u64;
    if (4 * r as u128) % den as u128 == 0 {
        return match 4 * r as u128 / den as u128 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // angle in (-π, π]
    let signed = if 2 * r > den { r as f64 - den as f64 } else { r as f64 };
    let (s, c) = (TAU * signed / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// Fractional part in `[-1/2, 1/2)` of `x`.
#[inline]
fn centered_frac(x: f64) -> f64 {
    x - x.round_ties_even()
}

/// `e(x)`, reduced modulo 1 before evaluating the exponential.
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * centered_frac(x)).sin_cos();
    Complex64::new(c, s)
}

/// `e(n·α)` with the product's fractional part formed by a fused multiply-add,
/// so large `n·α` keep full precision in the phase.
pub fn e_mul(n: f64, alpha: f64) -> Complex64 {
    let prod = n * alpha;
    let whole = prod.round_ties_even();
    let frac = n.mul_add(alpha, -whole);
    let (s, c) = (TAU * centered_frac(frac)).sin_cos();
    Complex64::new(c, s)
}
