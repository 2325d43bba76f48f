//! Closed-form constants, the roots-of-unity minimum lemma, and plug-in
//! evaluators for the right-hand sides of the exponential-sum bounds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, totient};
use crate::dioph::ArcTag;
use crate::error::{Error, Result};

/// `δ_g = 1 − (g/π) sin(π/g)`.
pub fn delta_g(g: u64) -> Result<f64> {
    if g < 3 || g % 2 == 0 {
        return Err(Error::invalid(format!("delta_g needs an odd g >= 3, got {g}")));
    }
    let g = g as f64;
    Ok(1.0 - g / PI * (PI / g).sin())
}

/// `F_N(ω) = cos(2π{ω}/N) + tan(π/N) sin(2π{ω}/N)`.
pub fn f_n(n: u64, omega: f64) -> Result<f64> {
    if n < 6 {
        return Err(Error::invalid(format!("F_N needs N >= 6, got {n}")));
    }
    Ok(f_n_unchecked(n as f64, omega))
}

fn f_n_unchecked(n: f64, omega: f64) -> f64 {
    let frac = omega - omega.floor();
    let a = 2.0 * PI * frac / n;
    a.cos() + (PI / n).tan() * a.sin()
}

/// `(N/π) tan(π/N)`, the mean of `F_N` over a period.
pub fn f_n_mean_exact(n: u64) -> f64 {
    let n = n as f64;
    n / PI * (PI / n).tan()
}

/// Composite Simpson rule for `∫_0^1 F_N`.
pub fn f_n_mean_simpson(n: u64, panels: usize) -> Result<f64> {
    if panels == 0 || panels % 2 == 1 {
        return Err(Error::invalid("Simpson's rule needs an even, positive panel count"));
    }
    f_n(n, 0.0)?;
    let h = 1.0 / panels as f64;
    // F_N(1) is the left limit at 1, not F_N(0)
    let end = {
        let a = 2.0 * PI / n as f64;
        a.cos() + (PI / n as f64).tan() * a.sin()
    };
    let mut acc = f_n_unchecked(n as f64, 0.0) + end;
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f_n_unchecked(n as f64, i as f64 * h);
    }
    Ok(acc * h / 3.0)
}

/// Parameters `(g, k, θ)` with `g >= 3` odd, `k >= 2` even, `θ ∈ (−1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumminParams {
    pub g: u64,
    pub k: u64,
    pub theta: f64,
}

impl SumminParams {
    pub fn new(g: u64, k: u64, theta: f64) -> Result<Self> {
        if g < 3 || g % 2 == 0 {
            return Err(Error::invalid(format!("g must be odd and at least 3, got {g}")));
        }
        if k < 2 || k % 2 == 1 {
            return Err(Error::invalid(format!("k must be even and at least 2, got {k}")));
        }
        if !(theta > -0.5 && theta <= 0.5) {
            return Err(Error::invalid(format!("theta must lie in (-1/2, 1/2], got {theta}")));
        }
        Ok(SumminParams { g, k, theta })
    }

    pub fn d(&self) -> u64 {
        gcd(self.g, self.k)
    }

    pub fn k_star(&self) -> u64 {
        self.k / self.d()
    }
}

/// Minimum over `z ∈ μ_g ∪ {0}` of `1 − Re z·e(φ)`, and whether `z = 0` attains it.
fn min_over_roots(g: u64, phi: f64) -> (f64, bool) {
    let best_root = (0..g)
        .map(|j| 1.0 - (2.0 * PI * (j as f64 / g as f64 + phi)).cos())
        .fold(f64::INFINITY, f64::min);
    if 1.0 < best_root {
        (1.0, true)
    } else {
        (best_root, false)
    }
}

/// Brute-force `(1/k) Σ_{ℓ mod k} min_{z∈μ_g∪{0}} (1 − Re z·e(θ − ℓ/k))`.
pub fn summin_lhs(p: &SumminParams) -> f64 {
    let total: f64 = (0..p.k)
        .map(|l| min_over_roots(p.g, p.theta - l as f64 / p.k as f64).0)
        .sum();
    total / p.k as f64
}

/// True if `z = 0` attains the minimum for some `ℓ`.
pub fn summin_selects_zero(p: &SumminParams) -> bool {
    (0..p.k).any(|l| min_over_roots(p.g, p.theta - l as f64 / p.k as f64).1)
}

/// Closed form `1 − sin(π/g) / (k* tan(π/(g k*))) · F_{g k*}(−g k* θ)`.
pub fn summin_rhs(p: &SumminParams) -> f64 {
    let (g, ks) = (p.g as f64, p.k_star() as f64);
    let n = g * ks;
    1.0 - (PI / g).sin() / (ks * (PI / n).tan()) * f_n_unchecked(n, -n * p.theta)
}

/// `1 − sin(π/g) / (k* sin(π/(g k*)))`, the minimum of the closed form over `θ`.
pub fn summin_floor(p: &SumminParams) -> f64 {
    let (g, ks) = (p.g as f64, p.k_star() as f64);
    1.0 - (PI / g).sin() / (ks * (PI / (g * ks)).sin())
}

/// `θ = −1/2 + i/points` for `i = 1..=points`: open at `−1/2`, closed at `1/2`.
pub fn theta_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| -0.5 + i as f64 / points as f64).collect()
}

/// Settings for unquantified terms: `o(1)` exponents and absolute constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSettings {
    pub o1: f64,
    pub c: f64,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings { o1: 0.0, c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub value: f64,
    pub terms: Vec<f64>,
    pub settings: BoundSettings,
}

fn bound(terms: Vec<f64>, settings: BoundSettings) -> BoundValue {
    BoundValue { value: terms.iter().sum(), terms, settings }
}

/// `(log y) e^{−𝕄} + (log y)^{2/3+o(1)}`, with `m_value = 𝕄(fξ̄; y, log² y)`.
pub fn bound_rhs_theorem1(y: f64, m_value: f64, s: BoundSettings) -> BoundValue {
    let ly = y.ln();
    bound(vec![ly * (-m_value).exp(), ly.powf(2.0 / 3.0 + s.o1)], s)
}

/// `log r + (log r)^{5/2}/√r · log y + log log y`.
pub fn bound_rhs_minor(r: u64, y: f64) -> BoundValue {
    let lr = (r as f64).ln();
    bound(
        vec![lr, lr.powf(2.5) / (r as f64).sqrt() * y.ln(), y.ln().ln()],
        BoundSettings::default(),
    )
}

/// `(log y)^{2/3+o(1)}/√r + √r e^{C√(log log y)} + [m | r] √m/φ(m) (log y) e^{−𝕄}`.
pub fn bound_rhs_major(r: u64, m: u64, y: f64, m_value: f64, s: BoundSettings) -> Result<BoundValue> {
    if r == 0 || m == 0 {
        return Err(Error::invalid("r and m must be positive"));
    }
    let ly = y.ln();
    let sr = (r as f64).sqrt();
    let exceptional = if r % m == 0 {
        (m as f64).sqrt() / totient(m)? as f64 * ly * (-m_value).exp()
    } else {
        0.0
    };
    Ok(bound(vec![ly.powf(2.0 / 3.0 + s.o1) / sr, sr * (s.c * ly.ln().sqrt()).exp(), exceptional], s))
}

/// `(log x) e^{−𝕄(f; x, T)} + 1/√T`.
pub fn bound_rhs_halasz(x: f64, t: f64, m_value: f64) -> BoundValue {
    bound(vec![x.ln() * (-m_value).exp(), 1.0 / t.sqrt()], BoundSettings::default())
}

/// Right-hand side for the arc class of `α`: `(log y)^{1/2+o(1)}` on minor arcs,
/// `(log y)^{2/3+o(1)}` on non-exceptional major arcs, and the three-term
/// bound on exceptional ones.
pub fn bound_rhs_hybrid(tag: ArcTag, r: u64, m: u64, y: f64, m_value: f64, s: BoundSettings) -> Result<BoundValue> {
    let ly = y.ln();
    Ok(match tag {
        ArcTag::Minor => bound(vec![ly.powf(0.5 + s.o1)], s),
        ArcTag::MajorNonExceptional => bound(vec![ly.powf(2.0 / 3.0 + s.o1)], s),
        ArcTag::MajorExceptional => {
            if m == 0 || r == 0 {
                return Err(Error::invalid("r and m must be positive"));
            }
            bound(
                vec![
                    (m as f64).sqrt() / totient(m)? as f64 * ly * (-m_value).exp(),
                    ly.powf(2.0 / 3.0 + s.o1) / (r as f64).sqrt(),
                    ly.powf(0.5 + s.o1),
                ],
                s,
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_values() {
        let d3 = delta_g(3).unwrap();
        assert_eq!((d3 * 1000.0).round() / 1000.0, 0.173);
        assert!((d3 - 0.173_006_656_867_311_93).abs() < 1e-15);
        let mut prev = d3;
        for g in (5..=99).step_by(2) {
            let d = delta_g(g).unwrap();
            assert!(d < prev && d > 0.0);
            prev = d;
        }
        assert!(prev < 1e-3);
        assert!(delta_g(4).is_err() && delta_g(1).is_err());
    }

    #[test]
    fn f_n_properties() {
        for n in [6u64, 10, 30] {
            assert!((f_n(n, 0.0).unwrap() - 1.0).abs() <= 1e-12);
            assert!((f_n(n, 0.5).unwrap() * (PI / n as f64).cos() - 1.0).abs() <= 1e-12);
            let mean = f_n_mean_simpson(n, 10_000).unwrap();
            assert!((mean - f_n_mean_exact(n)).abs() <= 1e-6);
            let h = 1.0 / 1000.0;
            let vals: Vec<f64> = (0..1000).map(|i| f_n(n, i as f64 * h).unwrap()).collect();
            for w in vals.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12);
            }
            for i in 1..1000 {
                let w = i as f64 * h;
                assert!((f_n(n, w).unwrap() - f_n(n, 1.0 - w).unwrap()).abs() <= 1e-12);
            }
        }
        assert!(f_n(5, 0.0).is_err());
    }

    #[test]
    fn summin_hand_case() {
        let p = SumminParams::new(3, 2, 0.0).unwrap();
        assert!((summin_lhs(&p) - 0.25).abs() < 1e-15);
        assert!((summin_rhs(&p) - 0.25).abs() < 1e-15);
        assert!(SumminParams::new(4, 2, 0.0).is_err());
        assert!(SumminParams::new(3, 3, 0.0).is_err());
        assert!(SumminParams::new(3, 2, -0.5).is_err());
        assert!(SumminParams::new(3, 2, 0.5).is_ok());
    }

    #[test]
    fn summin_identity_grid() {
        for g in [3u64, 5, 7, 9, 15] {
            for k in (2..=24).step_by(2) {
                for theta in theta_grid(101) {
                    let p = SumminParams::new(g, k, theta).unwrap();
                    let (l, r) = (summin_lhs(&p), summin_rhs(&p));
                    assert!((l - r).abs() <= 1e-12, "g={g} k={k} theta={theta}: {l} vs {r}");
                    assert!((0.0..=2.0).contains(&l));
                    assert!(!summin_selects_zero(&p));
                    assert!(summin_floor(&p) <= r + 1e-12);
                }
            }
        }
    }

    #[test]
    fn closed_form_depends_on_fractional_part() {
        let p = SumminParams::new(5, 4, 0.1).unwrap();
        let n = (p.g * p.k_star()) as f64;
        let q = SumminParams::new(5, 4, 0.1 - 1.0 / n).unwrap();
        assert!((summin_rhs(&p) - summin_rhs(&q)).abs() < 1e-12);
    }

    #[test]
    fn bound_plug_ins() {
        let h = bound_rhs_halasz(1e6, 100.0, 0.0);
        assert!((h.value - (1e6f64.ln() + 0.1)).abs() < 1e-12);
        let m = bound_rhs_minor(2, 16.0);
        let l2 = 2f64.ln();
        let expect = l2 + l2.powf(2.5) / 2f64.sqrt() * 16f64.ln() + 16f64.ln().ln();
        assert!((m.value - expect).abs() < 1e-12);
        let t = bound_rhs_theorem1(1e4, 0.0, BoundSettings::default());
        assert_eq!(t.settings, BoundSettings { o1: 0.0, c: 1.0 });
        let major = bound_rhs_major(4, 4, 1e6, 0.5, BoundSettings::default()).unwrap();
        assert!(major.terms[2] > 0.0);
        let major = bound_rhs_major(3, 4, 1e6, 0.5, BoundSettings::default()).unwrap();
        assert_eq!(major.terms[2], 0.0);
    }
}
