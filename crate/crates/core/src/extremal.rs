//! Extremal odd-order characters: the target prime pattern, a search over
//! prime moduli `q ≡ 1 (mod g)` for order-`g` characters matching it, the
//! quadratic (Paley) baseline and growth summaries.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, pow_mod, prime_table, primitive_root_prime};
use crate::characters::{primitive_characters, CharacterRecord, DirichletCharacter};
use crate::error::{Error, Result};
use crate::summation::{e_ratio, ComplexSum};
use crate::theory::delta_g;

/// `z_p = e(j/g)` maximizing `Re z ξ̄(p)`, per prime `p <= P`, `p ∤ g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetPattern {
    pub g: u64,
    pub xi: CharacterRecord,
    pub bound: u64,
    /// prime → `j` with `z_p = e(j/g)`
    pub values: BTreeMap<u64, u64>,
    pub achieved_sum: f64,
    /// `Σ_{p≤P, p∤m} 1/p`
    pub coprime_reciprocal_sum: f64,
}

impl TargetPattern {
    pub fn z(&self, p: u64) -> Option<Complex64> {
        self.values.get(&p).map(|&j| e_ratio(j as i64, self.g))
    }

    pub fn achieved_ratio(&self) -> f64 {
        self.achieved_sum / self.coprime_reciprocal_sum
    }
}

/// The `j` in `0..g` maximizing `cos 2π(j/g − a/k)`, smallest on ties.
pub fn best_root(g: u64, a: u64, k: u64) -> u64 {
    let n = g * k;
    let dist = |j: u64| {
        let d = (j * k + n - (a % k) * g % n) % n;
        d.min(n - d)
    };
    (0..g).min_by_key(|&j| (dist(j), j)).expect("g >= 1")
}

pub fn build_target(g: u64, xi: &DirichletCharacter, bound: u64) -> Result<TargetPattern> {
    if g < 3 || g % 2 == 0 {
        return Err(Error::invalid(format!("g must be odd and at least 3, got {g}")));
    }
    if xi.is_even() {
        return Err(Error::precondition("ξ must be odd"));
    }
    let k = xi.order();
    let mut values = BTreeMap::new();
    let mut achieved = ComplexSum::default();
    let mut coprime = 0.0;
    let primes = if bound >= 2 { prime_table(bound)?.up_to(bound).to_vec() } else { Vec::new() };
    for p in primes {
        if g % p == 0 {
            continue;
        }
        let j = match xi.phase(p as i64) {
            Some(ph) => {
                coprime += 1.0 / p as f64;
                let j = best_root(g, ph.num, k);
                let z = e_ratio(j as i64, g) * e_ratio(ph.num as i64, k).conj();
                achieved.add(Complex64::new(z.re / p as f64, 0.0));
                j
            }
            // every z gives 0; keep z = 1
            None => 0,
        };
        values.insert(p, j);
    }
    Ok(TargetPattern {
        g,
        xi: xi.to_record(),
        bound,
        values,
        achieved_sum: achieved.value().re,
        coprime_reciprocal_sum: coprime,
    })
}

/// The default `ξ`: the odd primitive character of smallest conductor whose
/// order is coprime to `g`.
pub fn default_xi(g: u64) -> Result<DirichletCharacter> {
    for m in 3.. {
        for chi in primitive_characters(m)? {
            if !chi.is_even() && gcd(chi.order(), g) == 1 {
                return Ok(chi);
            }
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `√q (ln ln q)^{1−δ_g}`
    OddOrder,
    /// `√q ln ln q`
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthRecord {
    pub q: u64,
    pub g: u64,
    /// `χ(r) = e(j/g)` at the smallest primitive root `r`.
    pub j: u64,
    pub primitive_root: u64,
    /// canonical enumeration index mod `q`
    pub index: u64,
    pub max_abs: f64,
    pub argmax: u64,
    pub ratio: f64,
    pub normalization: Normalization,
    pub matched_prefix: Option<u64>,
    /// `matched_prefix / ln q`
    pub prefix_ratio: Option<f64>,
}

impl GrowthRecord {
    pub fn character(&self) -> Result<DirichletCharacter> {
        DirichletCharacter::from_index(self.q, self.index)
    }
}

/// Residue classes `ind_r(n) mod g` for `1 <= n < q`, via a primitive-root walk.
fn index_classes(q: u64, r: u64, g: u64) -> Vec<u8> {
    let mut cls = vec![0u8; q as usize];
    let mut x = 1u64;
    for i in 0..q - 1 {
        cls[x as usize] = (i % g) as u8;
        x = x * r % q;
    }
    cls
}

/// `max_{t≤q} |Σ_{n≤t} e(j ind(n)/g)|` and the smallest maximizing `t`.
fn max_power_residue_sum(q: u64, r: u64, g: u64, j: u64) -> (f64, u64) {
    let cls = index_classes(q, r, g);
    let roots: Vec<Complex64> = (0..g).map(|c| e_ratio((c * j % g) as i64, g)).collect();
    let mut counts = vec![0i64; g as usize];
    let (mut best, mut arg) = (0.0f64, 1u64);
    for n in 1..=q {
        if n < q {
            counts[cls[n as usize] as usize] += 1;
        }
        let mut s = Complex64::new(0.0, 0.0);
        for (&c, z) in counts.iter().zip(&roots) {
            s += c as f64 * z;
        }
        let a = s.norm();
        if a > best {
            best = a;
            arg = n;
        }
    }
    (best, arg)
}

fn normalizer(q: u64, g: u64, kind: Normalization) -> Result<f64> {
    let ll = (q as f64).ln().ln();
    if !(ll > 0.0) {
        return Err(Error::invalid(format!("ln ln q must be positive, q = {q}")));
    }
    Ok(match kind {
        Normalization::OddOrder => (q as f64).sqrt() * ll.powf(1.0 - delta_g(g)?),
        Normalization::Quadratic => (q as f64).sqrt() * ll,
    })
}

/// Largest `P <= pattern.bound` with `χ_j(p) = z_p` for every prime `p <= P`,
/// `p ∤ g`, where `χ_j(p) = e(j ind(p)/g)`.
fn matched_prefix(pattern: &TargetPattern, q: u64, zeta_powers: &[u64], j: u64) -> u64 {
    let g = pattern.g;
    for (&p, &target) in &pattern.values {
        let got = if p % q == 0 {
            None
        } else {
            let w = pow_mod(p % q, (q - 1) / g, q);
            zeta_powers.iter().position(|&z| z == w).map(|e| (e as u64 * j) % g)
        };
        if got != Some(target) {
            return p - 1;
        }
    }
    pattern.bound
}

fn order_g_exponents(g: u64) -> Vec<u64> {
    (1..g).filter(|&j| gcd(j, g) == 1).collect()
}

/// Order-`g` characters modulo one prime `q ≡ 1 (mod g)` with
/// `matched_prefix >= p_star`.
pub fn search_modulus(pattern: &TargetPattern, q: u64, p_star: u64) -> Result<Vec<GrowthRecord>> {
    let g = pattern.g;
    if q < 3 || (q - 1) % g != 0 || !crate::arith::is_prime(q) {
        return Err(Error::invalid(format!("q must be a prime ≡ 1 mod {g}, got {q}")));
    }
    let r = primitive_root_prime(q)?;
    let zeta = pow_mod(r, (q - 1) / g, q);
    let zeta_powers: Vec<u64> = (0..g).scan(1u64, |acc, _| {
        let v = *acc;
        *acc = *acc * zeta % q;
        Some(v)
    }).collect();
    let mut out = Vec::new();
    for j in order_g_exponents(g) {
        let mp = matched_prefix(pattern, q, &zeta_powers, j);
        if mp < p_star {
            continue;
        }
        let (max_abs, argmax) = max_power_residue_sum(q, r, g, j);
        out.push(GrowthRecord {
            q,
            g,
            j,
            primitive_root: r,
            index: j * ((q - 1) / g),
            max_abs,
            argmax,
            ratio: max_abs / normalizer(q, g, Normalization::OddOrder)?,
            normalization: Normalization::OddOrder,
            matched_prefix: Some(mp),
            prefix_ratio: Some(mp as f64 / (q as f64).ln()),
        });
    }
    Ok(out)
}

/// Primes in `[q_lo, q_hi]` congruent to 1 mod `g`.
pub fn candidate_moduli(g: u64, q_lo: u64, q_hi: u64) -> Result<Vec<u64>> {
    if q_hi < 2 {
        return Ok(Vec::new());
    }
    Ok(prime_table(q_hi)?
        .up_to(q_hi)
        .iter()
        .copied()
        .filter(|&q| q >= q_lo && q % g == 1 % g && q > 2)
        .collect())
}

/// All matching records for `q` in `[q_lo, q_hi]`, sorted by `(q, j)`.
pub fn search_matching_character(pattern: &TargetPattern, q_lo: u64, q_hi: u64, p_star: u64) -> Result<Vec<GrowthRecord>> {
    let qs = candidate_moduli(pattern.g, q_lo, q_hi)?;
    if qs.is_empty() {
        return Err(Error::invalid(format!("no primes ≡ 1 mod {} in [{q_lo}, {q_hi}]", pattern.g)));
    }
    let parts: Vec<Vec<GrowthRecord>> = qs.par_iter().map(|&q| search_modulus(pattern, q, p_star)).collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Legendre symbols mod odd primes in `[q_lo, q_hi]` with the quadratic
/// normalization.
pub fn paley_baseline(q_lo: u64, q_hi: u64) -> Result<Vec<GrowthRecord>> {
    let qs: Vec<u64> = if q_hi < 3 { Vec::new() } else { prime_table(q_hi)?.up_to(q_hi).iter().copied().filter(|&q| q >= q_lo.max(3)).collect() };
    qs.par_iter()
        .map(|&q| {
            let r = primitive_root_prime(q)?;
            let (max_abs, argmax) = max_power_residue_sum(q, r, 2, 1);
            Ok(GrowthRecord {
                q,
                g: 2,
                j: 1,
                primitive_root: r,
                index: (q - 1) / 2,
                max_abs,
                argmax,
                ratio: max_abs / normalizer(q, 2, Normalization::Quadratic)?,
                normalization: Normalization::Quadratic,
                matched_prefix: None,
                prefix_ratio: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub q: u64,
    pub j: u64,
    pub max_abs: f64,
    pub ratio: f64,
    pub running_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// least-squares slope of `ratio` against `ln ln q`; `None` if undefined
    pub slope: Option<f64>,
    pub slope_undefined: bool,
    /// fitted `a` in `max_abs/√q ≈ C (ln ln q)^a`, when defined
    pub fitted_exponent: Option<f64>,
    pub fitted_constant: Option<f64>,
}

fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn growth_report(records: &[GrowthRecord]) -> Result<GrowthReport> {
    if records.is_empty() {
        return Err(Error::invalid("growth_report needs at least one record"));
    }
    let mut sorted: Vec<&GrowthRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.q, r.j));
    let mut running = 0.0f64;
    let rows: Vec<GrowthRow> = sorted
        .iter()
        .map(|r| {
            running = running.max(r.ratio);
            GrowthRow { q: r.q, j: r.j, max_abs: r.max_abs, ratio: r.ratio, running_max: running }
        })
        .collect();
    let trend: Vec<(f64, f64)> = sorted.iter().map(|r| ((r.q as f64).ln().ln(), r.ratio)).collect();
    let slope = least_squares(&trend).map(|s| s.0);
    let loglog: Vec<(f64, f64)> = sorted
        .iter()
        .filter(|r| (r.q as f64).ln().ln() > 1.0)
        .map(|r| ((r.q as f64).ln().ln().ln(), (r.max_abs / (r.q as f64).sqrt()).ln()))
        .collect();
    let fit = least_squares(&loglog);
    Ok(GrowthReport {
        min_ratio: rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        max_ratio: running,
        slope,
        slope_undefined: slope.is_none(),
        fitted_exponent: fit.map(|f| f.0),
        fitted_constant: fit.map(|f| f.1.exp()),
        rows,
    })
}

impl GrowthReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "q,j,max_abs,ratio,running_max")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.q, r.j, r.max_abs, r.ratio, r.running_max)?;
        }
        Ok(())
    }
}

pub fn write_records_csv<W: Write>(records: &[GrowthRecord], mut w: W) -> Result<()> {
    writeln!(w, "q,g,j,primitive_root,index,max_abs,argmax,ratio,matched_prefix,prefix_ratio")?;
    for r in records {
        let mp = r.matched_prefix.map_or(String::new(), |v| v.to_string());
        let pr = r.prefix_ratio.map_or(String::new(), |v| v.to_string());
        writeln!(w, "{},{},{},{},{},{},{},{},{},{}", r.q, r.g, r.j, r.primitive_root, r.index, r.max_abs, r.argmax, r.ratio, mp, pr)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub g: u64,
    pub xi: CharacterRecord,
    pub pattern_bound: u64,
    pub p_star: u64,
    pub q_min: u64,
    pub q_max: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepState {
    pub version: u32,
    pub config: SweepConfig,
    /// every `q <= last_completed_q` has been searched
    pub last_completed_q: u64,
    pub records: u64,
    pub witness: Option<GrowthRecord>,
    pub complete: bool,
}

pub const STATE_FILE: &str = "state.json";
pub const RECORDS_FILE: &str = "records.jsonl";
pub const CSV_FILE: &str = "records.csv";
const SWEEP_VERSION: u32 = 1;
const BATCH_MODULI: usize = 256;

#[derive(Debug, Clone, Copy)]
pub struct SweepControl {
    pub checkpoint_every: Duration,
    /// stop (with a checkpoint) after this many batches
    pub max_batches: Option<usize>,
}

impl Default for SweepControl {
    fn default() -> Self {
        SweepControl { checkpoint_every: Duration::from_secs(10), max_batches: None }
    }
}

fn write_state(dir: &Path, state: &SweepState) -> Result<()> {
    let tmp = dir.join(format!("{STATE_FILE}.tmp"));
    fs::write(&tmp, serde_json::to_vec_pretty(state)?)?;
    fs::rename(tmp, dir.join(STATE_FILE))?;
    Ok(())
}

pub fn read_state(dir: &Path) -> Result<Option<SweepState>> {
    let path = dir.join(STATE_FILE);
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(serde_json::from_slice(&fs::read(path)?)?))
}

pub fn read_records(dir: &Path) -> Result<Vec<GrowthRecord>> {
    let path = dir.join(RECORDS_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Keep the first `n` lines of the records file, dropping anything appended
/// after the last checkpoint.
fn truncate_records(path: &Path, n: u64) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let text = fs::read_to_string(path)?;
    let kept: String = text.split_inclusive('\n').filter(|l| l.ends_with('\n')).take(n as usize).collect();
    fs::write(path, kept)?;
    Ok(())
}

/// Run or resume a sweep persisted in `dir`. Records are appended to
/// `records.jsonl` and `state.json` is rewritten at each checkpoint. When
/// the sweep completes, `records.csv` is written.
pub fn run_sweep(dir: &Path, config: &SweepConfig, control: SweepControl) -> Result<SweepState> {
    fs::create_dir_all(dir)?;
    let xi = DirichletCharacter::from_record(&config.xi)?;
    let pattern = build_target(config.g, &xi, config.pattern_bound)?;
    let mut state = match read_state(dir)? {
        Some(s) => {
            if s.config != *config {
                return Err(Error::invalid("existing sweep state has a different configuration"));
            }
            truncate_records(&dir.join(RECORDS_FILE), s.records)?;
            s
        }
        None => {
            let _ = fs::remove_file(dir.join(RECORDS_FILE));
            SweepState {
                version: SWEEP_VERSION,
                config: config.clone(),
                last_completed_q: config.q_min.saturating_sub(1),
                records: 0,
                witness: None,
                complete: false,
            }
        }
    };
    if state.complete {
        return Ok(state);
    }
    let qs = candidate_moduli(config.g, state.last_completed_q + 1, config.q_max)?;
    if qs.is_empty() && state.records == 0 && state.last_completed_q < config.q_min {
        return Err(Error::invalid(format!("no primes ≡ 1 mod {} in [{}, {}]", config.g, config.q_min, config.q_max)));
    }
    let mut buffer: Vec<GrowthRecord> = Vec::new();
    let mut last_checkpoint = Instant::now();
    let mut pending_q = state.last_completed_q;
    let flush = |state: &mut SweepState, buffer: &mut Vec<GrowthRecord>, upto: u64| -> Result<()> {
        let mut w = BufWriter::new(OpenOptions::new().create(true).append(true).open(dir.join(RECORDS_FILE))?);
        for r in buffer.iter() {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
        state.records += buffer.len() as u64;
        if state.witness.is_none() {
            state.witness = buffer.iter().find(|r| r.matched_prefix.unwrap_or(0) >= config.p_star).cloned();
        }
        buffer.clear();
        state.last_completed_q = upto;
        write_state(dir, state)
    };
    for (b, batch) in qs.chunks(BATCH_MODULI).enumerate() {
        let parts: Vec<Vec<GrowthRecord>> =
            batch.par_iter().map(|&q| search_modulus(&pattern, q, config.p_star)).collect::<Result<_>>()?;
        buffer.extend(parts.into_iter().flatten());
        pending_q = *batch.last().expect("nonempty chunk");
        if last_checkpoint.elapsed() >= control.checkpoint_every {
            flush(&mut state, &mut buffer, pending_q)?;
            last_checkpoint = Instant::now();
        }
        if control.max_batches.is_some_and(|m| b + 1 >= m) {
            flush(&mut state, &mut buffer, pending_q)?;
            return Ok(state);
        }
    }
    flush(&mut state, &mut buffer, config.q_max.max(pending_q))?;
    state.complete = true;
    write_state(dir, &state)?;
    let records = read_records(dir)?;
    write_records_csv(&records, BufWriter::new(File::create(dir.join(CSV_FILE))?))?;
    Ok(state)
}

pub fn sweep_dir(base: &Path, name: &str) -> PathBuf {
    base.join(name)
}
