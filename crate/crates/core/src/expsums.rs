//! Character sums `S_χ(t)`, weighted exponential sums over smooth numbers,
//! Pólya's Fourier expansion, and the two sides of the rational-frequency
//! identity that expands `Σ f(n)/n e(bn/r)` over the characters mod `r/d`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::arith::{factor, gcd, reduce};
use crate::characters::{enumerate_characters, gauss_sum, DirichletCharacter};
use crate::error::{Error, Result};
use crate::multfun::CMFunction;
use crate::summation::{chunked_sum, e_mul, e_ratio, ComplexSum};

/// Largest number of terms in any direct sum.
pub const SUM_CAP: u64 = 10_000_000;

fn check_terms(what: &'static str, n: u64) -> Result<()> {
    if n > SUM_CAP {
        return Err(Error::CapExceeded { what, value: n, cap: SUM_CAP });
    }
    Ok(())
}

fn terms_below(x: f64, what: &'static str) -> Result<u64> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("{what} must be nonnegative, got {x}")));
    }
    if x >= SUM_CAP as f64 + 1.0 {
        return Err(Error::CapExceeded { what, value: x.min(u64::MAX as f64) as u64, cap: SUM_CAP });
    }
    Ok(x.floor() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t_or_n: f64,
    pub value: Complex64,
}

/// Sampled partial sums with their largest magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumProfile {
    pub kind: String,
    pub params: Map<String, Value>,
    pub points: Vec<ProfilePoint>,
    pub max_abs: f64,
    pub argmax: f64,
}

impl SumProfile {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_or_n,re,im,abs")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.t_or_n, p.value.re, p.value.im, p.value.norm())?;
        }
        Ok(())
    }

    pub fn summary(&self) -> Value {
        json!({
            "kind": self.kind,
            "max_abs": self.max_abs,
            "argmax": self.argmax,
            "params": self.params,
        })
    }

    pub fn final_value(&self) -> Option<Complex64> {
        self.points.last().map(|p| p.value)
    }
}

/// Tracks partial sums, keeping every `stride`-th point and the running maximum.
struct ProfileBuilder {
    sum: ComplexSum,
    points: Vec<ProfilePoint>,
    stride: u64,
    max_abs: f64,
    argmax: f64,
}

impl ProfileBuilder {
    fn new(n_terms: u64, max_points: u64) -> Self {
        ProfileBuilder {
            sum: ComplexSum::default(),
            points: Vec::new(),
            stride: n_terms.div_ceil(max_points.max(1)).max(1),
            max_abs: 0.0,
            argmax: 0.0,
        }
    }

    fn push(&mut self, n: u64, term: Complex64, last: bool) {
        self.sum.add(term);
        let v = self.sum.value();
        let a = v.norm();
        if a > self.max_abs {
            self.max_abs = a;
            self.argmax = n as f64;
        }
        if n % self.stride == 0 || last {
            self.points.push(ProfilePoint { t_or_n: n as f64, value: v });
        }
    }

    fn finish(self, kind: &str, params: Map<String, Value>) -> SumProfile {
        SumProfile { kind: kind.into(), params, points: self.points, max_abs: self.max_abs, argmax: self.argmax }
    }
}

/// `S_χ(t) = Σ_{n ≤ t} χ(n)`.
pub fn char_sum(chi: &DirichletCharacter, t: f64) -> Result<Complex64> {
    let n = terms_below(t, "character sum length")?;
    let q = chi.modulus();
    let k = chi.order() as usize;
    // whole periods contribute φ(q) for the principal character and 0 otherwise
    let (periods, rest) = (n / q, n % q);
    let mut counts = vec![0u64; k];
    for m in 1..=rest {
        if let Some(p) = chi.phase(m as i64) {
            counts[p.num as usize] += 1;
        }
    }
    if chi.is_principal() {
        counts[0] += periods * chi.group().order();
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(j, &c)| c as f64 * e_ratio(j as i64, k as u64))
        .collect::<ComplexSum>()
        .value())
}

/// `max_{t ≤ q} |S_χ(t)|` over the integer cut points, with the trajectory.
pub fn max_char_sum(chi: &DirichletCharacter) -> Result<SumProfile> {
    let q = chi.modulus();
    check_terms("character sum length", q)?;
    let k = chi.order();
    let mut b = ProfileBuilder::new(q, q);
    for n in 1..=q {
        let term = chi.phase(n as i64).map_or(Complex64::new(0.0, 0.0), |p| e_ratio(p.num as i64, k));
        b.push(n, term, n == q);
    }
    let mut params = Map::new();
    params.insert("modulus".into(), json!(q));
    params.insert("index".into(), json!(chi.index()));
    Ok(b.finish("char_sum", params))
}

fn smooth_values(f: &CMFunction, n: u64, y: f64) -> Result<Vec<Complex64>> {
    check_terms("sum length", n)?;
    if y.is_infinite() && y > 0.0 {
        return f.values_up_to(n);
    }
    if y < 2.0 {
        // only n = 1 is y-smooth
        let mut v = vec![Complex64::new(0.0, 0.0); n as usize + 1];
        if n >= 1 {
            v[1] = f.evaluate(1)?;
        }
        return Ok(v);
    }
    f.smooth_restrict(y)?.values_up_to(n)
}

/// `Σ_{n ≤ x, n ∈ S(y)} f(n)/n · e(nα)`; pass `f64::INFINITY` for no smoothness restriction.
pub fn weighted_expsum(f: &CMFunction, x: f64, y: f64, alpha: f64) -> Result<Complex64> {
    if !(x >= 1.0) {
        return Err(Error::invalid(format!("weighted sums need x >= 1, got {x}")));
    }
    let n = terms_below(x, "sum length")?;
    let vals = smooth_values(f, n, y)?;
    Ok(chunked_sum(1, n, |m| {
        let v = vals[m as usize];
        if v.re == 0.0 && v.im == 0.0 {
            return v;
        }
        v / m as f64 * e_mul(m as f64, alpha)
    }))
}

/// Partial sums of [`weighted_expsum`] sampled at up to `max_points` values of `n`.
pub fn weighted_expsum_profile(f: &CMFunction, x: f64, y: f64, alpha: f64, max_points: u64) -> Result<SumProfile> {
    if !(x >= 1.0) {
        return Err(Error::invalid(format!("weighted sums need x >= 1, got {x}")));
    }
    let n = terms_below(x, "sum length")?;
    let vals = smooth_values(f, n, y)?;
    let mut b = ProfileBuilder::new(n, max_points);
    for m in 1..=n {
        let v = vals[m as usize];
        b.push(m, v / m as f64 * e_mul(m as f64, alpha), m == n);
    }
    let mut params = Map::new();
    params.insert("x".into(), json!(x));
    params.insert("y".into(), if y.is_finite() { json!(y) } else { json!("inf") });
    params.insert("alpha".into(), json!(alpha));
    Ok(b.finish("weighted_expsum", params))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyaValue {
    pub main: Complex64,
    pub exact: Complex64,
    pub residual: f64,
}

/// Main term `τ(χ)/(2πi) Σ_{1≤|n|≤N} χ̄(n)/n (1 − e(−nt/q))` against `S_χ(t)`.
pub fn polya_expansion(chi: &DirichletCharacter, t: f64, n_max: u64) -> Result<PolyaValue> {
    if !chi.is_primitive() {
        return Err(Error::precondition("the Fourier expansion needs a primitive character"));
    }
    if n_max == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    check_terms("expansion length", n_max)?;
    let q = chi.modulus() as f64;
    let conj = chi.conj();
    let one = Complex64::new(1.0, 0.0);
    let s = chunked_sum(1, n_max, |n| {
        let pos = conj.evaluate(n as i64) / n as f64 * (one - e_mul(n as f64, -t / q));
        let neg = conj.evaluate(-(n as i64)) / -(n as f64) * (one - e_mul(n as f64, t / q));
        pos + neg
    });
    let tau = gauss_sum(chi)?.value;
    let main = tau / Complex64::new(0.0, std::f64::consts::TAU) * s;
    let exact = char_sum(chi, t)?;
    Ok(PolyaValue { main, exact, residual: (main - exact).norm() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentitySides {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl IdentitySides {
    pub fn diff(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

/// Both sides of
/// `Σ_{n≤N, n∈S(y)} f(n)/n e(bn/r) = Σ_{d|r, d∈S(y)} f(d)/d · 1/φ(r/d) Σ_{ψ mod r/d} τ(ψ) ψ̄(b) Σ_{n≤N/d, n∈S(y)} f(n)ψ̄(n)/n`.
pub fn gs_identity_sides(f: &CMFunction, b: i64, r: u64, n_max: u64, y: f64) -> Result<IdentitySides> {
    if b == 0 {
        return Err(Error::invalid("b must be nonzero"));
    }
    if r == 0 {
        return Err(Error::invalid("r must be positive"));
    }
    if gcd(reduce(b, r), r) != 1 {
        return Err(Error::precondition(format!("gcd({b}, {r}) must be 1")));
    }
    let vals = smooth_values(f, n_max, y)?;
    let lhs = chunked_sum(1, n_max, |n| {
        let frac = (reduce(b, r) as u128 * n as u128 % r as u128) as i64;
        vals[n as usize] / n as f64 * e_ratio(frac, r)
    });

    let mut rhs = ComplexSum::default();
    for d in factor(r)?.divisors() {
        if d > n_max {
            continue;
        }
        let fd = if (d as usize) < vals.len() { vals[d as usize] } else { Complex64::new(0.0, 0.0) };
        if fd == Complex64::new(0.0, 0.0) {
            // d is not y-smooth (or f vanishes there)
            continue;
        }
        let rd = r / d;
        let m = n_max / d;
        let chars = enumerate_characters(rd)?;
        let mut inner = ComplexSum::default();
        for psi in &chars {
            let tau = gauss_sum(psi)?.value;
            if tau == Complex64::new(0.0, 0.0) {
                continue;
            }
            let twisted: ComplexSum = (1..=m)
                .map(|n| vals[n as usize] * psi.evaluate(n as i64).conj() / n as f64)
                .collect();
            inner.add(tau * psi.evaluate(b).conj() * twisted.value());
        }
        rhs.add(fd / d as f64 / chars.len() as f64 * inner.value());
    }
    Ok(IdentitySides { lhs, rhs: rhs.value() })
}

/// `Σ_{1≤|n|≤N, |n|∈S(y)} χ̄(n)/n e(nα)`.
pub fn two_sided_sum(chi: &DirichletCharacter, n_max: u64, alpha: f64, y: f64) -> Result<Complex64> {
    check_terms("sum length", n_max)?;
    let conj = chi.conj();
    let smooth = if y.is_finite() {
        Some(crate::arith::SmoothFilter::new(y).mask(n_max as usize))
    } else {
        None
    };
    Ok(chunked_sum(1, n_max, |n| {
        if smooth.as_ref().is_some_and(|s| !s[n as usize]) {
            return Complex64::new(0.0, 0.0);
        }
        let pos = conj.evaluate(n as i64) / n as f64 * e_mul(n as f64, alpha);
        let neg = conj.evaluate(-(n as i64)) / -(n as f64) * e_mul(n as f64, -alpha);
        pos + neg
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HildebrandValue {
    pub lhs: Complex64,
    pub main: Complex64,
    pub residual: f64,
    /// `(ln ln(k+2))^3`.
    pub envelope: f64,
}

/// `Σ_{n≤x,(n,k)=1} g(n)/n` against `Π_{p|k}(1 − g(p)/p) Σ_{n≤x} g(n)/n`.
pub fn hildebrand_residual(g: &CMFunction, x: f64, k: u64) -> Result<HildebrandValue> {
    if !(x >= 1.0) || k == 0 {
        return Err(Error::invalid("need x >= 1 and k >= 1"));
    }
    let n = terms_below(x, "sum length")?;
    let vals = g.values_up_to(n)?;
    let kf = factor(k)?;
    let lhs = chunked_sum(1, n, |m| {
        if gcd(m, k) == 1 { vals[m as usize] / m as f64 } else { Complex64::new(0.0, 0.0) }
    });
    let full = chunked_sum(1, n, |m| vals[m as usize] / m as f64);
    let mut euler = Complex64::new(1.0, 0.0);
    for p in kf.primes() {
        euler *= Complex64::new(1.0, 0.0) - g.prime_value(p)? / p as f64;
    }
    let main = euler * full;
    let envelope = ((k as f64 + 2.0).ln().ln()).powi(3);
    Ok(HildebrandValue { lhs, main, residual: (lhs - main).norm(), envelope })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::characters::primitive_characters;

    const H100: f64 = 5.187_377_517_639_620_3;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn char_sum_examples() {
        let chi4 = DirichletCharacter::chi_minus_4();
        assert_eq!(char_sum(&chi4, 3.0).unwrap(), c(0.0, 0.0));
        assert_eq!(char_sum(&chi4, 3.9).unwrap(), c(0.0, 0.0));
        let leg = DirichletCharacter::legendre(7).unwrap();
        // squares mod 7 are 1, 2, 4: 1 + 1 - 1 + 1 - 1
        assert_eq!(char_sum(&leg, 5.0).unwrap(), c(1.0, 0.0));
        assert_eq!(char_sum(&leg, 7.0 * 1000.0 + 5.0).unwrap(), c(1.0, 0.0));
        let principal = DirichletCharacter::principal(10).unwrap();
        assert_eq!(char_sum(&principal, 25.0).unwrap(), c(10.0, 0.0));
        assert!(char_sum(&chi4, 2e7).unwrap_err().is_cap());
    }

    #[test]
    fn full_periods_vanish() {
        for q in 2..=200u64 {
            for chi in enumerate_characters(q).unwrap().iter().filter(|c| !c.is_principal()) {
                assert!(char_sum(chi, q as f64).unwrap().norm() < 1e-9, "q={q}");
                let direct: ComplexSum = (1..=q / 2).map(|n| chi.evaluate(n as i64)).collect();
                assert!((char_sum(chi, (q / 2) as f64 + 0.5).unwrap() - direct.value()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn max_char_sum_examples() {
        let p = max_char_sum(&DirichletCharacter::principal(2).unwrap()).unwrap();
        assert_eq!((p.max_abs, p.argmax), (1.0, 1.0));
        let p = max_char_sum(&DirichletCharacter::chi_minus_4()).unwrap();
        assert_eq!((p.max_abs, p.argmax), (1.0, 1.0));
        let vals: Vec<f64> = p.points.iter().map(|pt| pt.value.re).collect();
        assert_eq!(vals, vec![1.0, 1.0, 0.0, 0.0]);
        let leg5 = max_char_sum(&DirichletCharacter::legendre(5).unwrap()).unwrap();
        assert_eq!(leg5.max_abs, 1.0);
    }

    #[test]
    fn max_sum_at_least_root_q_over_7() {
        for q in 1..=300u64 {
            for chi in primitive_characters(q).unwrap() {
                let m = max_char_sum(&chi).unwrap().max_abs;
                assert!(m >= (q as f64).sqrt() / 7.0, "q={q} index={}", chi.index());
            }
        }
    }

    #[test]
    fn weighted_examples() {
        let one = CMFunction::one();
        let h = weighted_expsum(&one, 100.0, f64::INFINITY, 0.0).unwrap();
        assert!((h.re - H100).abs() < 1e-9 && h.im == 0.0);
        let h = weighted_expsum(&one, 100.5, 100.0, 0.0).unwrap();
        assert!((h.re - H100).abs() < 1e-9);
        // S(2) = powers of 2
        let f = CMFunction::from_character(&DirichletCharacter::legendre(11).unwrap());
        let s = weighted_expsum(&f, 1000.0, 2.0, 0.0).unwrap();
        let direct: f64 = (0..10).map(|k| f.evaluate(1 << k).unwrap().re / (1u64 << k) as f64).sum();
        assert!((s.re - direct).abs() < 1e-14);
    }

    #[test]
    fn chi4_resonance() {
        let f = CMFunction::from_character(&DirichletCharacter::chi_minus_4());
        // |Σ χ(n)/n e(n/4)| = Σ_{odd n ≤ x} 1/n
        for (x, expect) in [(1e3, 4.0890591455550826), (1e4, 5.2403516095521638), (1e5, 6.3916441552241866)] {
            let v = weighted_expsum(&f, x, f64::INFINITY, 0.25).unwrap().norm();
            assert!((v - expect).abs() < 1e-9, "x={x}: {v}");
            assert!(v >= 0.1 * f64::ln(x));
        }
    }

    #[test]
    fn weighted_sum_is_one_periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = CMFunction::random_unimodular(20_000, &mut rng).unwrap();
        for alpha in [0.25, 1.0 / 3.0, std::f64::consts::SQRT_2 - 1.0, rng.random::<f64>()] {
            let a = weighted_expsum(&f, 20_000.0, 500.0, alpha).unwrap();
            let b = weighted_expsum(&f, 20_000.0, 500.0, alpha + 1.0).unwrap();
            assert!((a - b).norm() < 1e-9, "alpha={alpha}");
        }
    }

    #[test]
    fn profile_tracks_sum() {
        let f = CMFunction::from_character(&DirichletCharacter::chi_minus_4());
        let prof = weighted_expsum_profile(&f, 1000.0, f64::INFINITY, 0.25, 100).unwrap();
        let direct = weighted_expsum(&f, 1000.0, f64::INFINITY, 0.25).unwrap();
        assert!((prof.final_value().unwrap() - direct).norm() < 1e-12);
        assert!((prof.max_abs - direct.norm()).abs() < 1e-12);
        assert_eq!(prof.points.len(), 100);
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t_or_n,re,im,abs\n10,"));
    }

    #[test]
    fn gs_hand_case() {
        let s = gs_identity_sides(&CMFunction::one(), 1, 2, 4, f64::INFINITY).unwrap();
        assert!((s.lhs - c(-7.0 / 12.0, 0.0)).norm() < 1e-15);
        assert!((s.rhs - c(-7.0 / 12.0, 0.0)).norm() < 1e-15);
        assert!(gs_identity_sides(&CMFunction::one(), 2, 4, 10, 10.0).is_err());
        assert!(gs_identity_sides(&CMFunction::one(), 0, 1, 10, 10.0).is_err());
    }

    #[test]
    fn gs_trivial_modulus() {
        let f = CMFunction::random_disc(500, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for y in [10.0, f64::INFINITY] {
            let s = gs_identity_sides(&f, 7, 1, 500, y).unwrap();
            let direct = weighted_expsum(&f, 500.0, y, 0.0).unwrap();
            assert!((s.lhs - direct).norm() < 1e-12 && (s.rhs - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn gs_random_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..30 {
            let n = rng.random_range(2..=2000u64);
            let f = CMFunction::random_unimodular(n, &mut rng).unwrap();
            let r = rng.random_range(1..=30u64);
            let b = loop {
                let b = rng.random_range(-60i64..=60);
                if b != 0 && gcd(reduce(b, r), r) == 1 {
                    break b;
                }
            };
            let y = [10.0, 50.0, f64::INFINITY][rng.random_range(0..3)];
            let s = gs_identity_sides(&f, b, r, n, y).unwrap();
            assert!(s.diff() <= 1e-8 * (1.0 + s.lhs.norm()), "b={b} r={r} n={n} y={y}");
        }
    }

    #[test]
    fn two_sided_examples() {
        let chi4 = DirichletCharacter::chi_minus_4();
        // 2 Σ χ(n)/n cos(πn/2) vanishes at odd n
        let v = two_sided_sum(&chi4, 4, 0.25, f64::INFINITY).unwrap();
        let direct: Complex64 = [1i64, 2, 3, 4, -1, -2, -3, -4]
            .iter()
            .map(|&n| chi4.evaluate(n).conj() / n as f64 * e_ratio(n, 4))
            .sum();
        assert!((v - direct).norm() < 1e-15 && v.norm() < 1e-15);
        let v = two_sided_sum(&chi4, 1000, 0.0, f64::INFINITY).unwrap();
        let one_sided: ComplexSum = (1..=1000).map(|n| chi4.evaluate(n) / n as f64).collect();
        assert!((v - 2.0 * one_sided.value()).norm() < 1e-12);
    }

    #[test]
    fn two_sided_at_zero_frequency() {
        for q in 1..=60u64 {
            for chi in enumerate_characters(q).unwrap() {
                for y in [5.0, f64::INFINITY] {
                    let v = two_sided_sum(&chi, 300, 0.0, y).unwrap();
                    let f = CMFunction::from_character(&chi.conj());
                    let one = weighted_expsum(&f, 300.0, y, 0.0).unwrap();
                    let expect = (1.0 - f64::from(chi.parity())) * one;
                    assert!((v - expect).norm() < 1e-10);
                    if chi.is_even() {
                        assert!(v.norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hildebrand_examples() {
        let one = CMFunction::one();
        let h = hildebrand_residual(&one, 100.0, 1).unwrap();
        assert_eq!(h.residual, 0.0);
        let h = hildebrand_residual(&one, 100.0, 6).unwrap();
        assert!((h.lhs.re - 2.138_296_938_766_556_5).abs() < 1e-12);
        assert!((h.main.re - 0.5 * (2.0 / 3.0) * H100).abs() < 1e-12);
    }

    #[test]
    fn polya_full_period_and_decay() {
        let chi4 = DirichletCharacter::chi_minus_4();
        let p = polya_expansion(&chi4, 4.0, 1000).unwrap();
        assert_eq!(p.exact, c(0.0, 0.0));
        assert!(p.residual < 1.0);
        // away from jumps the expansion converges to S_χ(t)
        let leg = DirichletCharacter::legendre(7).unwrap();
        let mut prev = f64::INFINITY;
        for n in [50u64, 100, 200, 400, 800, 1600, 3200] {
            let r = polya_expansion(&leg, 3.5, n).unwrap().residual;
            assert!(r <= prev + 7.0 * 7f64.ln() / n as f64, "N={n}");
            prev = r;
        }
        assert!(prev < 0.05);
        assert!(polya_expansion(&DirichletCharacter::from_index(8, 2).unwrap(), 1.0, 10).is_err());
    }
}
