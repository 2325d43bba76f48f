use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::factor::factor;

pub fn totient(n: u64) -> Result<u64> {
    Ok(factor(n)?.iter().map(|(p, e)| (p - 1) * p.pow(e - 1)).product())
}

pub fn moebius(n: u64) -> Result<i32> {
    let f = factor(n)?;
    if f.iter().any(|(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.factors().len() % 2 == 0 { 1 } else { -1 })
}

pub fn divisor_count(n: u64) -> Result<u64> {
    Ok(factor(n)?.iter().map(|(_, e)| e as u64 + 1).product())
}

/// True iff every prime factor of `n` is at most `y`.
pub fn is_smooth(n: u64, y: f64) -> Result<bool> {
    Ok(factor(n)?.largest_prime().is_none_or(|p| p as f64 <= y))
}

/// Membership test for the `y`-smooth integers. `y` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothFilter {
    pub y: f64,
}

impl SmoothFilter {
    pub fn new(y: f64) -> Self {
        SmoothFilter { y }
    }

    pub fn unrestricted() -> Self {
        SmoothFilter { y: f64::INFINITY }
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        if self.y.is_infinite() && self.y > 0.0 {
            return Ok(n >= 1);
        }
        is_smooth(n, self.y)
    }

    /// Membership for every `n` in `0..=n_max` (index 0 is false).
    pub fn mask(&self, n_max: usize) -> Vec<bool> {
        let mut mask = vec![true; n_max + 1];
        mask[0] = false;
        if self.y >= n_max as f64 {
            return mask;
        }
        // strike multiples of every prime p > y
        let mut composite = vec![false; n_max + 1];
        for p in 2..=n_max {
            if composite[p] {
                continue;
            }
            let mut j = p * 2;
            while j <= n_max {
                composite[j] = true;
                j += p;
            }
            if p as f64 > self.y {
                let mut j = p;
                while j <= n_max {
                    mask[j] = false;
                    j += p;
                }
            }
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn divisors_naive(n: u64) -> Vec<u64> {
        (1..=n).filter(|d| n % d == 0).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(totient(1).unwrap(), 1);
        assert_eq!(totient(12).unwrap(), 4);
        assert_eq!(moebius(12).unwrap(), 0);
        assert_eq!(moebius(1).unwrap(), 1);
        assert_eq!(moebius(30).unwrap(), -1);
        assert!(is_smooth(1, 2.0).unwrap());
        assert!(is_smooth(15, 5.0).unwrap());
        assert!(!is_smooth(15, 4.0).unwrap());
    }

    #[test]
    fn divisor_sums_to_10k() {
        for n in 1..=10_000u64 {
            let divs = divisors_naive(n);
            assert_eq!(divisor_count(n).unwrap(), divs.len() as u64);
            let phi_sum: u64 = divs.iter().map(|&d| totient(d).unwrap()).sum();
            assert_eq!(phi_sum, n);
            let mu_sum: i32 = divs.iter().map(|&d| moebius(d).unwrap()).sum();
            assert_eq!(mu_sum, i32::from(n == 1));
        }
    }

    #[test]
    fn smooth_matches_trial_division() {
        fn largest_prime_factor(mut n: u64) -> u64 {
            let mut best = 1;
            let mut d = 2;
            while d * d <= n {
                while n % d == 0 {
                    best = d;
                    n /= d;
                }
                d += 1;
            }
            if n > 1 {
                best = best.max(n);
            }
            best
        }
        for y in [2.0, 5.0, 16.0, 100.0] {
            let mask = SmoothFilter::new(y).mask(100_000);
            for n in 1..=100_000u64 {
                let expect = largest_prime_factor(n) as f64 <= y;
                assert_eq!(is_smooth(n, y).unwrap(), expect, "n={n} y={y}");
                assert_eq!(mask[n as usize], expect, "mask n={n} y={y}");
            }
        }
    }
}
