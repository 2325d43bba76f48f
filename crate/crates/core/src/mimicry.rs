//! The multiplicative mimicry distance
//! `𝔻(f, g; X)² = Σ_{p≤X} (1 − Re f(p) ḡ(p))/p`, its minimum over archimedean
//! twists `𝕄(f; X, T) = min_{|t|≤T} 𝔻(f, n^{it}; X)²`, and scans built on them.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{floor_bound, prime_table};
use crate::characters::{primitive_characters_below, CharacterRecord, DirichletCharacter};
use crate::error::{Error, Result};
use crate::expsums::weighted_expsum;
use crate::multfun::CMFunction;
use crate::summation::Neumaier;
use crate::theory::delta_g;

const GRID_BLOCK: usize = 1024;
const REFINE_TOL: f64 = 1e-9;
/// Values closer than this count as tied.
pub const TIE_TOL: f64 = 1e-12;

/// `t ↦ Σ_p (1 − Re w_p p^{−it})/p` for fixed prime weights `w_p`.
struct PrimeObjective {
    weights: Vec<Complex64>,
    logs: Vec<f64>,
    base: f64,
    lipschitz: f64,
}

impl PrimeObjective {
    /// Weights `w_p = f(p) ḡ(p)` for `p <= x`.
    fn new(primes: &[u64], w: impl Fn(u64) -> Result<Complex64>) -> Result<Self> {
        let mut weights = Vec::with_capacity(primes.len());
        let mut logs = Vec::with_capacity(primes.len());
        let mut base = Neumaier::default();
        let mut lipschitz = Neumaier::default();
        for &p in primes {
            let v = w(p)?;
            let lp = (p as f64).ln();
            weights.push(v / p as f64);
            logs.push(lp);
            base.add(1.0 / p as f64);
            lipschitz.add(lp * v.norm() / p as f64);
        }
        Ok(PrimeObjective { weights, logs, base: base.value(), lipschitz: lipschitz.value() })
    }

    fn eval(&self, t: f64) -> f64 {
        let mut acc = Neumaier::default();
        acc.add(self.base);
        for (w, &lp) in self.weights.iter().zip(&self.logs) {
            let (s, c) = (t * lp).sin_cos();
            // Re w·e^{−it ln p}
            acc.add(-(w.re * c + w.im * s));
        }
        acc.value().max(0.0)
    }

    /// Values at `t_j = j·h` for `j in lo..=hi`, by rotating the phases
    /// within fixed blocks.
    fn eval_grid(&self, lo: i64, hi: i64, h: f64) -> Vec<f64> {
        let n = (hi - lo + 1) as usize;
        let blocks: Vec<(usize, usize)> = (0..n).step_by(GRID_BLOCK).map(|s| (s, (s + GRID_BLOCK).min(n))).collect();
        let steps: Vec<Complex64> = self.logs.iter().map(|&lp| Complex64::from_polar(1.0, -h * lp)).collect();
        let parts: Vec<Vec<f64>> = blocks
            .par_iter()
            .map(|&(s, e)| {
                let t0 = (lo + s as i64) as f64 * h;
                let mut z: Vec<Complex64> = self.logs.iter().map(|&lp| Complex64::from_polar(1.0, -t0 * lp)).collect();
                let mut out = Vec::with_capacity(e - s);
                for _ in s..e {
                    let mut acc = self.base;
                    for ((w, zp), st) in self.weights.iter().zip(z.iter_mut()).zip(&steps) {
                        acc -= w.re * zp.re - w.im * zp.im;
                        *zp *= st;
                    }
                    out.push(acc.max(0.0));
                }
                out
            })
            .collect();
        parts.concat()
    }
}

fn golden_section(obj: &PrimeObjective, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj.eval(c), obj.eval(d));
    while b - a > REFINE_TOL {
        if fc <= fd {
            (b, d, fd) = (d, c, fc);
            c = b - INV_PHI * (b - a);
            fc = obj.eval(c);
        } else {
            (a, c, fc) = (c, d, fd);
            d = a + INV_PHI * (b - a);
            fd = obj.eval(d);
        }
    }
    let t = 0.5 * (a + b);
    (t, obj.eval(t))
}

/// Result of a distance computation or a minimization over twists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MimicryReport {
    /// `𝔻²`, or `𝕄` for a minimization.
    pub distance_sq: f64,
    pub minimizing_t: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "T")]
    pub t_window: f64,
    pub grid_step: f64,
    pub grid_points: u64,
    pub refined_candidates: u64,
    pub lipschitz: f64,
}

fn primes_to(x: f64) -> Result<Vec<u64>> {
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("X must be nonnegative, got {x}")));
    }
    let b = floor_bound(x)?;
    if b < 2 {
        return Ok(Vec::new());
    }
    Ok(prime_table(b)?.up_to(b).to_vec())
}

/// `𝔻(f, g; X)²`.
pub fn distance_sq(f: &CMFunction, g: &CMFunction, x: f64) -> Result<f64> {
    let primes = primes_to(x)?;
    let mut acc = Neumaier::default();
    for p in primes {
        let v = f.prime_value(p)? * g.prime_value(p)?.conj();
        acc.add((1.0 - v.re) / p as f64);
    }
    Ok(acc.value().max(0.0))
}

/// `𝔻(f, g; X)`.
pub fn distance(f: &CMFunction, g: &CMFunction, x: f64) -> Result<f64> {
    Ok(distance_sq(f, g, x)?.sqrt())
}

/// `𝔻(f, g; X)²` as a report with `t = 0`.
pub fn distance_report(f: &CMFunction, g: &CMFunction, x: f64) -> Result<MimicryReport> {
    Ok(MimicryReport {
        distance_sq: distance_sq(f, g, x)?,
        minimizing_t: 0.0,
        x,
        t_window: 0.0,
        grid_step: 0.0,
        grid_points: 0,
        refined_candidates: 0,
        lipschitz: 0.0,
    })
}

/// `𝕄(f; X, T)`.
///
/// The objective is evaluated on the grid `j·h`, `h = 0.1/ln X`, plus the
/// endpoints `±T`. Every grid local minimum within `L·h/2` of the best grid
/// value (`L` the Lipschitz bound `Σ ln p |f(p)|/p`) is refined by golden
/// section to `1e-9` in `t`. Ties go to the smaller `|t|`.
pub fn m_quantity(f: &CMFunction, x: f64, t_window: f64) -> Result<MimicryReport> {
    if !(t_window >= 0.0) || !t_window.is_finite() {
        return Err(Error::invalid(format!("T must be finite and nonnegative, got {t_window}")));
    }
    let primes = primes_to(x)?;
    let obj = PrimeObjective::new(&primes, |p| f.prime_value(p))?;
    minimize(&obj, x, t_window)
}

fn minimize(obj: &PrimeObjective, x: f64, t_window: f64) -> Result<MimicryReport> {
    let h = 0.1 / x.max(3.0).ln();
    let mut report = MimicryReport {
        distance_sq: obj.eval(0.0),
        minimizing_t: 0.0,
        x,
        t_window,
        grid_step: h,
        grid_points: 1,
        refined_candidates: 0,
        lipschitz: obj.lipschitz,
    };
    if t_window == 0.0 || obj.weights.is_empty() {
        return Ok(report);
    }
    let j_max = (t_window / h).floor() as i64;
    let mut ts: Vec<f64> = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    if (j_max as f64) * h < t_window {
        ts.push(-t_window);
        vals.push(obj.eval(-t_window));
    }
    ts.extend((-j_max..=j_max).map(|j| j as f64 * h));
    vals.extend(obj.eval_grid(-j_max, j_max, h));
    if (j_max as f64) * h < t_window {
        ts.push(t_window);
        vals.push(obj.eval(t_window));
    }
    report.grid_points = ts.len() as u64;

    let best_grid = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = obj.lipschitz * h / 2.0;
    let n = ts.len();
    let candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
            let right = if i + 1 < n { vals[i + 1] } else { f64::INFINITY };
            vals[i] <= left && vals[i] <= right && vals[i] <= best_grid + slack
        })
        .collect();
    report.refined_candidates = candidates.len() as u64;

    let refined: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&i| {
            let a = if i > 0 { ts[i - 1] } else { ts[i] };
            let b = if i + 1 < n { ts[i + 1] } else { ts[i] };
            let (t, v) = if b > a { golden_section(obj, a, b) } else { (ts[i], vals[i]) };
            if vals[i] < v { (ts[i], vals[i]) } else { (t, v) }
        })
        .collect();
    let mut best: (f64, f64) = (0.0, obj.eval(0.0));
    for (t, v) in refined {
        let better = v < best.1 - TIE_TOL || ((v - best.1).abs() <= TIE_TOL && t.abs() < best.0.abs());
        if better {
            best = (t, v);
        }
    }
    report.distance_sq = best.1;
    report.minimizing_t = best.0;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearestEntry {
    pub character: CharacterRecord,
    pub conductor: u64,
    pub index: u64,
    pub report: MimicryReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearestResult {
    pub best: NearestEntry,
    pub runner_up: Option<NearestEntry>,
    pub candidates: u64,
    #[serde(skip)]
    pub xi: Option<DirichletCharacter>,
}

/// The primitive `ψ` of conductor below `conductor_bound` minimizing
/// `𝕄(fψ̄; y, (ln y)²)`. Near-ties are broken by conductor, then index.
pub fn nearest_primitive(f: &CMFunction, y: f64, conductor_bound: f64) -> Result<NearestResult> {
    nearest_primitive_window(f, y, conductor_bound, y.ln().powi(2))
}

pub fn nearest_primitive_window(f: &CMFunction, y: f64, conductor_bound: f64, t_window: f64) -> Result<NearestResult> {
    if !(conductor_bound >= 1.0) {
        return Err(Error::invalid(format!("conductor bound must be at least 1, got {conductor_bound}")));
    }
    let chars = primitive_characters_below(conductor_bound)?;
    if chars.is_empty() {
        return Err(Error::invalid("no primitive characters below the conductor bound"));
    }
    let primes = primes_to(y)?;
    let scored: Vec<(DirichletCharacter, MimicryReport)> = chars
        .into_par_iter()
        .map(|psi| {
            let obj = PrimeObjective::new(&primes, |p| Ok(f.prime_value(p)? * psi.evaluate(p as i64).conj()))?;
            Ok((psi, minimize(&obj, y, t_window)?))
        })
        .collect::<Result<_>>()?;
    let pick = |pool: &[&(DirichletCharacter, MimicryReport)]| -> Option<usize> {
        let v = pool.iter().map(|(_, r)| r.distance_sq).fold(f64::INFINITY, f64::min);
        (0..pool.len())
            .filter(|&i| pool[i].1.distance_sq <= v + TIE_TOL)
            .min_by_key(|&i| (pool[i].0.modulus(), pool[i].0.index()))
    };
    let entry = |(c, r): &(DirichletCharacter, MimicryReport)| NearestEntry {
        character: c.to_record(),
        conductor: c.modulus(),
        index: c.index(),
        report: *r,
    };
    let all: Vec<&(DirichletCharacter, MimicryReport)> = scored.iter().collect();
    let b = pick(&all).expect("nonempty");
    let rest: Vec<&(DirichletCharacter, MimicryReport)> =
        all.iter().enumerate().filter(|&(i, _)| i != b).map(|(_, s)| *s).collect();
    let runner_up = pick(&rest).map(|i| entry(rest[i]));
    Ok(NearestResult { best: entry(all[b]), runner_up, candidates: all.len() as u64, xi: Some(all[b].0.clone()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub beta: f64,
    pub distance_sq: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundScan {
    pub g: u64,
    pub y: f64,
    pub lnln_y: f64,
    pub delta_g: f64,
    pub rows: Vec<ScanRow>,
    pub min_ratio: f64,
    pub argmin_beta: f64,
}

impl LowerBoundScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "beta,distance_sq,ratio")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.beta, r.distance_sq, r.ratio)?;
        }
        Ok(())
    }
}

/// `𝔻(χ(n), ξ(n) n^{iβ}; y)² / ln ln y` over `betas`, for an even primitive
/// `χ` of odd order `g >= 3` and an odd `ξ`.
pub fn distance_lowerbound_scan(
    chi: &DirichletCharacter,
    xi: &DirichletCharacter,
    y: f64,
    betas: &[f64],
) -> Result<LowerBoundScan> {
    let g = chi.order();
    if g < 3 || g % 2 == 0 || !chi.is_even() || !chi.is_primitive() {
        return Err(Error::precondition("χ must be primitive and even of odd order g >= 3"));
    }
    if xi.is_even() {
        return Err(Error::precondition("ξ must be odd"));
    }
    if !(y > std::f64::consts::E.exp()) {
        return Err(Error::invalid("y must exceed e^e so that ln ln y > 1"));
    }
    let primes = primes_to(y)?;
    let obj = PrimeObjective::new(&primes, |p| Ok(chi.evaluate(p as i64) * xi.evaluate(p as i64).conj()))?;
    let lnln = y.ln().ln();
    let rows: Vec<ScanRow> = betas
        .par_iter()
        .map(|&beta| {
            let d = obj.eval(beta);
            ScanRow { beta, distance_sq: d, ratio: d / lnln }
        })
        .collect();
    let (min_ratio, argmin_beta) = rows
        .iter()
        .fold((f64::INFINITY, 0.0), |acc, r| if r.ratio < acc.0 { (r.ratio, r.beta) } else { acc });
    Ok(LowerBoundScan { g, y, lnln_y: lnln, delta_g: delta_g(g)?, rows, min_ratio, argmin_beta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassShare {
    pub l: u64,
    pub sum: f64,
    /// `sum / ((1/k) Σ_{p≤y, p∤m} 1/p)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equidistribution {
    pub k: u64,
    pub y: f64,
    pub classes: Vec<ClassShare>,
    /// `Σ_{p≤y, p∤m} 1/p`.
    pub coprime_total: f64,
    /// `Σ_{p≤y} 1/p`.
    pub total: f64,
    pub max_deviation: f64,
}

/// Reciprocal prime sums split by the value class `ξ(p) = e(ℓ/k)`.
pub fn equidistribution_diagnostic(xi: &DirichletCharacter, y: f64) -> Result<Equidistribution> {
    if xi.is_principal() {
        return Err(Error::precondition("ξ must be nonprincipal"));
    }
    let k = xi.order();
    let mut sums = vec![Neumaier::default(); k as usize];
    let mut coprime = Neumaier::default();
    let mut total = Neumaier::default();
    for p in primes_to(y)? {
        let w = 1.0 / p as f64;
        total.add(w);
        if let Some(ph) = xi.phase(p as i64) {
            sums[ph.num as usize].add(w);
            coprime.add(w);
        }
    }
    let share = coprime.value() / k as f64;
    let classes: Vec<ClassShare> = sums
        .iter()
        .enumerate()
        .map(|(l, s)| ClassShare { l: l as u64, sum: s.value(), ratio: s.value() / share })
        .collect();
    let max_deviation = classes.iter().map(|c| (c.ratio - 1.0).abs()).fold(0.0, f64::max);
    Ok(Equidistribution { k, y, classes, coprime_total: coprime.value(), total: total.value(), max_deviation })
}

/// `|Σ_{n≤x, n∈S(y)} f(n)/n|` next to the twisted prediction
/// `(ln y) e^{−𝕄(f; y, ln² y)}` and the untwisted `1 + (ln y) e^{−𝔻(f,1;y)²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistComparison {
    pub x: f64,
    pub y: f64,
    pub sum_abs: f64,
    pub m_value: f64,
    pub minimizing_t: f64,
    pub d_value: f64,
    pub twisted_prediction: f64,
    pub untwisted_prediction: f64,
}

pub fn twist_comparison(f: &CMFunction, x: f64, y: f64) -> Result<TwistComparison> {
    let sum_abs = weighted_expsum(f, x, y, 0.0)?.norm();
    let ly = y.ln();
    let m = m_quantity(f, y, ly * ly)?;
    let d = distance_sq(f, &CMFunction::one(), y)?;
    Ok(TwistComparison {
        x,
        y,
        sum_abs,
        m_value: m.distance_sq,
        minimizing_t: m.minimizing_t,
        d_value: d,
        twisted_prediction: ly * (-m.distance_sq).exp(),
        untwisted_prediction: 1.0 + ly * (-d).exp(),
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::characters::enumerate_characters;

    fn chi4() -> CMFunction {
        CMFunction::from_character(&DirichletCharacter::chi_minus_4())
    }

    #[test]
    fn distance_examples() {
        let one = CMFunction::one();
        assert_eq!(distance_sq(&one, &one, 1e4).unwrap(), 0.0);
        assert!((distance_sq(&chi4(), &chi4(), 10.0).unwrap() - 0.5).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = CMFunction::random_disc(1000, &mut rng).unwrap();
        let g = CMFunction::random_disc(1000, &mut rng).unwrap();
        assert_eq!(distance_sq(&f, &g, 1000.0).unwrap(), distance_sq(&g, &f, 1000.0).unwrap());
        assert!(distance_sq(&f, &g, 1009.0).is_err());
    }

    #[test]
    fn ramified_defect() {
        for q in [3u64, 12, 15, 77, 100] {
            for chi in enumerate_characters(q).unwrap().into_iter().take(5) {
                let f = CMFunction::from_character(&chi);
                let expect: f64 = crate::arith::factor(q).unwrap().primes().map(|p| 1.0 / p as f64).sum();
                assert!((distance_sq(&f, &f, 1e4).unwrap() - expect).abs() < 1e-12);
            }
        }
        let f = CMFunction::random_unimodular(10_000, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert!(distance_sq(&f, &f, 1e4).unwrap() < 1e-12);
    }

    #[test]
    fn m_examples() {
        let one = CMFunction::one();
        let r = m_quantity(&one, 1e4, 10.0).unwrap();
        assert!(r.distance_sq < 1e-15 && r.minimizing_t == 0.0);
        for t0 in [0.0, 0.5, 3.0, -7.0] {
            let r = m_quantity(&one.twist(t0), 1e4, 10.0).unwrap();
            assert!(r.distance_sq <= 1e-8, "t0={t0}: {}", r.distance_sq);
            assert!((r.minimizing_t - t0).abs() <= 1e-6, "t0={t0}: {}", r.minimizing_t);
        }
    }

    #[test]
    fn m_matches_dense_grid() {
        // independent oracle: 2048-point grid, then local parabolic polishing
        let f = chi4();
        let (x, big_t) = (1e4, 100.0);
        let pv: Vec<(f64, Complex64)> = primes_to(x)
            .unwrap()
            .into_iter()
            .map(|p| (p as f64, f.prime_value(p).unwrap()))
            .collect();
        let obj = |t: f64| -> f64 {
            pv.iter()
                .map(|&(p, v)| (1.0 - (v * Complex64::from_polar(1.0, -t * p.ln())).re) / p)
                .sum()
        };
        let mut best = f64::INFINITY;
        let n = 2048;
        for i in 0..=n {
            let t = -big_t + 2.0 * big_t * i as f64 / n as f64;
            best = best.min(obj(t));
        }
        // refine around every grid point within reach of the best with a fine scan
        let h = 2.0 * big_t / n as f64;
        let mut refined = best;
        for i in 0..=n {
            let t = -big_t + h * i as f64;
            if obj(t) <= best + 0.2 {
                for j in -50..=50 {
                    refined = refined.min(obj(t + h * j as f64 / 50.0));
                }
            }
        }
        let r = m_quantity(&f, x, big_t).unwrap();
        assert!(r.distance_sq <= refined + 1e-6, "{} vs {refined}", r.distance_sq);
        assert!(r.distance_sq >= refined - 1e-6, "{} vs {refined}", r.distance_sq);
    }

    #[test]
    fn m_monotone_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let f = CMFunction::random_unimodular(5_000, &mut rng).unwrap();
            let d0 = distance_sq(&f, &CMFunction::one(), 5_000.0).unwrap();
            let mut prev = f64::INFINITY;
            for t in [0.0, 1.0, 5.0, 20.0] {
                let m = m_quantity(&f, 5_000.0, t).unwrap();
                assert!(m.distance_sq <= d0 + 1e-12);
                assert!(m.distance_sq <= prev + 1e-9);
                assert!(m.minimizing_t.abs() <= t);
                prev = m.distance_sq;
            }
            let mut prev = 0.0;
            for x in [100.0, 1000.0, 5000.0] {
                let m = m_quantity(&f, x, 5.0).unwrap().distance_sq;
                assert!(m >= prev - 1e-9);
                prev = m;
            }
        }
    }

    #[test]
    fn nearest_recognizes_characters() {
        let r = nearest_primitive(&chi4().twist(0.5), 1e4, 10.0).unwrap();
        assert_eq!((r.best.conductor, r.best.index), (4, 1));
        assert!((r.best.report.minimizing_t - 0.5).abs() < 1e-6);
        let runner = r.runner_up.unwrap();
        assert!(r.best.report.distance_sq <= runner.report.distance_sq);

        let chi7 = DirichletCharacter::from_index(7, 2).unwrap();
        let r = nearest_primitive(&CMFunction::from_character(&chi7), 1e4, 10.0).unwrap();
        assert_eq!((r.best.conductor, r.best.index), (7, 2));
        assert!((r.best.report.distance_sq - 1.0 / 7.0).abs() < 1e-9);

        let induced = DirichletCharacter::from_index(8, 2).unwrap();
        let r = nearest_primitive(&CMFunction::from_character(&induced), 1e4, 10.0).unwrap();
        assert_eq!((r.best.conductor, r.best.index), (4, 1));
        assert!((r.best.report.distance_sq - 0.5).abs() < 1e-9);
    }

    #[test]
    fn nearest_is_deterministic_and_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let f = CMFunction::random_unimodular(2_000, &mut rng).unwrap();
        let a = nearest_primitive(&f, 2_000.0, 8.0).unwrap();
        let b = nearest_primitive(&f, 2_000.0, 8.0).unwrap();
        assert_eq!(a.best.character, b.best.character);
        assert_eq!(a.best.report, b.best.report);
        assert!(a.best.report.distance_sq <= a.runner_up.unwrap().report.distance_sq);
        assert!(nearest_primitive(&f, 2_000.0, 0.5).is_err());
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let pick = |rng: &mut ChaCha8Rng| -> CMFunction {
                if rng.random_bool(0.5) {
                    let q = rng.random_range(1..60u64);
                    let n = crate::arith::totient(q).unwrap();
                    CMFunction::from_character(&DirichletCharacter::from_index(q, rng.random_range(0..n)).unwrap())
                } else {
                    CMFunction::random_disc(10_000, rng).unwrap()
                }
            };
            let (f1, g1, f2, g2) = (pick(&mut rng), pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let lhs = distance(&f1, &g1, 1e4).unwrap() + distance(&f2, &g2, 1e4).unwrap();
            let rhs = distance(&f1.mul(&f2), &g1.mul(&g2), 1e4).unwrap();
            assert!(lhs >= rhs - 1e-10);
        }
    }

    #[test]
    fn scan_consistency() {
        let chi = DirichletCharacter::from_index(7, 2).unwrap();
        assert_eq!(chi.order(), 3);
        let xi = DirichletCharacter::chi_minus_4();
        let betas: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.5).collect();
        let scan = distance_lowerbound_scan(&chi, &xi, 1e5, &betas).unwrap();
        let zero = scan.rows.iter().find(|r| r.beta == 0.0).unwrap();
        let d = distance_sq(&CMFunction::from_character(&chi), &CMFunction::from_character(&xi), 1e5).unwrap();
        assert!((zero.ratio - d / scan.lnln_y).abs() < 1e-12);
        assert!(scan.min_ratio <= zero.ratio);
        assert!(distance_lowerbound_scan(&xi, &chi, 1e5, &betas).is_err());
        assert!(distance_lowerbound_scan(&chi, &chi, 1e5, &betas).is_err());
    }

    #[test]
    fn equidistribution_partition() {
        let e = equidistribution_diagnostic(&DirichletCharacter::chi_minus_4(), 1e6).unwrap();
        assert_eq!(e.classes.len(), 2);
        let s: f64 = e.classes.iter().map(|c| c.sum).sum();
        assert!((s - e.coprime_total).abs() < 1e-12);
        assert!((e.total - e.coprime_total - 0.5).abs() < 1e-12);
        assert!(e.max_deviation < 0.2);
        assert!(equidistribution_diagnostic(&DirichletCharacter::principal(5).unwrap(), 100.0).is_err());
    }
}
