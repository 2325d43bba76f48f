//! Continued fractions, Dirichlet approximation, and the three-way arc
//! classification of a frequency `α`.
//!
//! A double `α` is expanded as the exact dyadic rational it represents.
//! `continued_fraction` stops once a convergent rounds back to `α`.
//! `dirichlet_approx` selects from the full expansion but reports quality 0
//! for a fraction that rounds back to `α`.

use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::error::{Error, Result};

/// Default ceiling for the approximation window `M`.
pub const M_CAP: f64 = 1e12;
const MAX_ABS_ALPHA: f64 = (1u64 << 52) as f64;
const FRAC_BITS: u32 = 120;
// keeps `r as f64` exact
const DENOM_LIMIT: u128 = 1 << 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergent {
    pub b: i64,
    pub r: u64,
}

impl Convergent {
    /// `|α − b/r|` with the numerator `rα − b` formed by one fused multiply-add.
    pub fn error(&self, alpha: f64) -> f64 {
        (self.r as f64).mul_add(alpha, -(self.b as f64)).abs() / self.r as f64
    }

    fn rounds_to(&self, alpha: f64) -> bool {
        self.b as f64 / self.r as f64 == alpha
    }
}

/// Convergents of `α`, at most `depth` of them, with strictly increasing
/// denominators.
pub fn continued_fraction(alpha: f64, depth: usize) -> Result<Vec<Convergent>> {
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    let mut out = raw_convergents(alpha, depth + 1, true)?;
    if out.len() >= 2 && out[1].r == 1 {
        // a_1 = 1 repeats denominator 1; the second one is closer
        out.remove(0);
    }
    out.truncate(depth);
    Ok(out)
}

/// `h_i/k_i` from the standard recurrence, starting at `a_0/1`.
fn raw_convergents(alpha: f64, count: usize, stop_on_round: bool) -> Result<Vec<Convergent>> {
    if !alpha.is_finite() || alpha.abs() >= MAX_ABS_ALPHA {
        return Err(Error::invalid(format!("alpha must be finite with |alpha| < 2^52, got {alpha}")));
    }
    let a0 = alpha.floor();
    let frac = alpha - a0; // exact for |alpha| < 2^52
    let mut num = (frac * 2f64.powi(FRAC_BITS as i32)).round() as u128;
    let mut den = 1u128 << FRAC_BITS;

    let (mut h_prev, mut k_prev) = (1i128, 0i128);
    let (mut h, mut k) = (a0 as i128, 1i128);
    let mut out = vec![Convergent { b: h as i64, r: 1 }];
    while out.len() < count && num != 0 && !(stop_on_round && out.last().unwrap().rounds_to(alpha)) {
        let a = (den / num) as i128;
        (den, num) = (num, den % num);
        let (h_next, k_next) = (a * h + h_prev, a * k + k_prev);
        if k_next as u128 > DENOM_LIMIT || h_next.unsigned_abs() > DENOM_LIMIT {
            break;
        }
        (h_prev, k_prev, h, k) = (h, k, h_next, k_next);
        out.push(Convergent { b: h as i64, r: k as u64 });
    }
    Ok(out)
}

/// A reduced fraction `b/r` with `r <= M` and `|α − b/r| <= 1/(rM)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub alpha: f64,
    pub b: i64,
    pub r: u64,
    pub quality: f64,
    #[serde(rename = "M")]
    pub m_window: f64,
}

impl RationalApprox {
    /// `min(x, 1/|rα − b|)`, the shortened summation length used when
    /// replacing `α` by `b/r`.
    pub fn reduction_length(&self, x: f64) -> f64 {
        let d = self.quality * self.r as f64;
        if d == 0.0 { x } else { x.min(1.0 / d) }
    }
}

/// The last convergent of `α` with denominator at most `M`, or the largest
/// admissible semiconvergent when that one is strictly closer and still
/// within `1/(rM)`.
pub fn dirichlet_approx(alpha: f64, m: f64) -> Result<RationalApprox> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::invalid(format!("M must be finite and at least 2, got {m}")));
    }
    let convs = raw_convergents(alpha, 400, false)?;
    let i = convs.iter().take_while(|c| c.r as f64 <= m).count() - 1;
    let mut best = convs[i];
    let exact = best.rounds_to(alpha);
    let mut quality = if exact { 0.0 } else { best.error(alpha) };
    if !exact && i + 1 < convs.len() {
        // semiconvergents between convs[i-1] and convs[i+1]: (j·h_i + h_{i-1}) / (j·k_i + k_{i-1})
        let prev = if i == 0 { Convergent { b: 1, r: 0 } } else { convs[i - 1] };
        let cur = convs[i];
        let j = ((m.floor() as u64 - prev.r) / cur.r) as i64;
        if j >= 1 {
            let semi = Convergent { b: j * cur.b + prev.b, r: j as u64 * cur.r + prev.r };
            let q = semi.error(alpha);
            if q < quality && q <= 1.0 / (semi.r as f64 * m) {
                best = semi;
                quality = q;
            }
        }
    }
    debug_assert_eq!(gcd(best.b.unsigned_abs(), best.r), 1);
    Ok(RationalApprox { alpha, b: best.b, r: best.r, quality, m_window: m })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcTag {
    Minor,
    MajorNonExceptional,
    MajorExceptional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcClass {
    pub tag: ArcTag,
    pub approx: RationalApprox,
    /// `ln y`.
    pub threshold: f64,
    pub exceptional_modulus: u64,
    /// `|r − ln y|`.
    pub margin: f64,
    /// `exp(exp(lnln y / lnlnln y))` before any clamping.
    pub theoretical_m: f64,
}

/// `exp(exp(ln ln y / ln ln ln y))`; may be `inf`.
pub fn theoretical_window(y: f64) -> Result<f64> {
    if !(y >= 16.0) {
        return Err(Error::invalid(format!("arc classification needs y >= 16, got {y}")));
    }
    let lll = y.ln().ln().ln();
    if !(lll > 0.0) {
        return Err(Error::invalid(format!("ln ln ln y must be positive, y = {y}")));
    }
    Ok((y.ln().ln() / lll).exp().exp())
}

/// Classify `α` by its Dirichlet approximation with window
/// `M = m_override.unwrap_or(min(theoretical window, 1e12))`.
pub fn classify_arc(alpha: f64, y: f64, m: u64, m_override: Option<f64>) -> Result<ArcClass> {
    if m == 0 {
        return Err(Error::invalid("exceptional modulus must be positive"));
    }
    let theoretical_m = theoretical_window(y)?;
    let window = m_override.unwrap_or(theoretical_m.min(M_CAP));
    let approx = dirichlet_approx(alpha, window)?;
    let ly = y.ln();
    let tag = if approx.r as f64 > ly {
        ArcTag::Minor
    } else if approx.r % m == 0 {
        ArcTag::MajorExceptional
    } else {
        ArcTag::MajorNonExceptional
    };
    Ok(ArcClass { tag, approx, threshold: ly, exceptional_modulus: m, margin: (approx.r as f64 - ly).abs(), theoretical_m })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;

    fn pairs(c: &[Convergent]) -> Vec<(i64, u64)> {
        c.iter().map(|c| (c.b, c.r)).collect()
    }

    #[test]
    fn cf_examples() {
        assert_eq!(pairs(&continued_fraction(1.0 / 3.0, 10).unwrap()), vec![(0, 1), (1, 3)]);
        assert_eq!(pairs(&continued_fraction(PI, 4).unwrap()), vec![(3, 1), (22, 7), (333, 106), (355, 113)]);
        assert_eq!(pairs(&continued_fraction(-0.25, 5).unwrap()), vec![(0, 1), (-1, 4)]);
        assert_eq!(pairs(&continued_fraction(2.0, 5).unwrap()), vec![(2, 1)]);
    }

    #[test]
    fn golden_ratio_gives_fibonacci() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let conv = continued_fraction(phi, 30).unwrap();
        let mut fib = vec![1u64, 1];
        while fib.len() < 40 {
            fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
        }
        for (i, c) in conv.iter().enumerate() {
            assert_eq!((c.b as u64, c.r), (fib[i + 2], fib[i + 1]));
        }
        assert_eq!(conv.len(), 30);
    }

    #[test]
    fn cf_error_bound() {
        for alpha in [PI, 2f64.sqrt(), std::f64::consts::E, 0.123456789, -7.3] {
            let c = continued_fraction(alpha, 25).unwrap();
            for w in c.windows(2) {
                assert!(w[0].r < w[1].r);
                assert!(w[0].error(alpha) < 1.0 / (w[0].r as f64 * w[1].r as f64));
            }
        }
    }

    #[test]
    fn dirichlet_examples() {
        let a = dirichlet_approx(PI, 100.0).unwrap();
        assert_eq!((a.b, a.r), (22, 7));
        assert!((a.quality - 0.00126448926734968).abs() < 1e-12 && a.quality <= 1.0 / 700.0);
        let a = dirichlet_approx(1.0 / 3.0, 10.0).unwrap();
        assert_eq!((a.b, a.r, a.quality), (1, 3, 0.0));
        let a = dirichlet_approx(0.0, 10.0).unwrap();
        assert_eq!((a.b, a.r, a.quality), (0, 1, 0.0));
        assert!(dirichlet_approx(0.5, 1.0).is_err());
    }

    #[test]
    fn best_among_convergents_and_farey() {
        let alphas = [PI, 0.7071067811865476, 0.1, 0.999, 0.618034, 0.2718281828, 0.33, 0.4142135623730951];
        for &alpha in &alphas {
            for m in 2..=200u64 {
                let a = dirichlet_approx(alpha, m as f64).unwrap();
                let convs = continued_fraction(alpha, 100).unwrap();
                for c in convs.iter().filter(|c| c.r <= m) {
                    assert!(a.quality <= c.error(alpha) + 1e-18);
                }
                // Farey scan over every fraction with denominator <= m that
                // meets the Dirichlet bound
                let best = (1..=m)
                    .map(|r| {
                        let b = (alpha * r as f64).round();
                        (r as f64).mul_add(alpha, -b).abs() / r as f64
                    })
                    .enumerate()
                    .filter(|&(i, q)| q <= 1.0 / ((i + 1) as f64 * m as f64))
                    .map(|(_, q)| q)
                    .fold(f64::INFINITY, f64::min);
                assert!(a.quality <= 1.0 / (a.r as f64 * m as f64));
                assert!(a.quality <= best + 1e-18, "alpha={alpha} m={m}");
            }
        }
    }

    #[test]
    fn arc_examples() {
        let c = classify_arc(0.0, 1e6, 4, None).unwrap();
        assert_eq!((c.approx.b, c.approx.r, c.tag), (0, 1, ArcTag::MajorNonExceptional));
        let c = classify_arc(0.25, 1e6, 4, None).unwrap();
        assert_eq!((c.approx.r, c.tag), (4, ArcTag::MajorExceptional));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = classify_arc(phi, 1e6, 4, None).unwrap();
        assert_eq!(c.tag, ArcTag::Minor);
        assert_eq!(c.approx.m_window, c.theoretical_m.min(M_CAP));
        assert_eq!(classify_arc(phi, 16.0, 4, None).unwrap().approx.m_window, M_CAP);
        assert!(classify_arc(0.1, 10.0, 4, None).is_err());
        let c = classify_arc(phi, 1e6, 4, Some(3.0)).unwrap();
        assert_eq!((c.approx.b, c.approx.r, c.tag), (5, 3, ArcTag::MajorNonExceptional));
    }

    #[test]
    fn json_shape() {
        let a = dirichlet_approx(PI, 100.0).unwrap();
        let v = serde_json::to_value(a).unwrap();
        assert_eq!(v["M"], 100.0);
        assert_eq!(v["b"], 22);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1_000))]

        #[test]
        fn dirichlet_contract(alpha in -1e6f64..1e6, m in 2.0f64..1e12) {
            let a = dirichlet_approx(alpha, m).unwrap();
            prop_assert!(a.r as f64 <= m);
            prop_assert!(a.quality <= 1.0 / (a.r as f64 * m));
            prop_assert_eq!(gcd(a.b.unsigned_abs(), a.r), 1);
        }

        #[test]
        fn classification_is_exclusive(alpha in -10.0f64..10.0, y in 16.0f64..1e9, m in 1u64..30) {
            let c = classify_arc(alpha, y, m, None).unwrap();
            let minor = c.approx.r as f64 > y.ln();
            let exc = !minor && c.approx.r % m == 0;
            let expect = if minor { ArcTag::Minor } else if exc { ArcTag::MajorExceptional } else { ArcTag::MajorNonExceptional };
            prop_assert_eq!(c.tag, expect);
        }
    }
}
