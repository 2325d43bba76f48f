//! Prime sieving and the process-wide prime cache.
//!
//! The cache is a sorted list of primes up to a recorded bound. It grows on
//! demand (never shrinks) and is shared behind an `Arc`, so readers see an
//! immutable table. It can be persisted to disk; see `docs/prime-cache-format.md`.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

use super::modular::isqrt;

pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

static SIEVE_CAP: AtomicU64 = AtomicU64::new(DEFAULT_SIEVE_CAP);
static CACHE: RwLock<Option<Arc<PrimeTable>>> = RwLock::new(None);

/// Override the largest bound the sieve will accept.
pub fn set_sieve_cap(cap: u64) {
    SIEVE_CAP.store(cap, Ordering::Relaxed);
}

pub fn sieve_cap() -> u64 {
    SIEVE_CAP.load(Ordering::Relaxed)
}

/// All primes up to a bound, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn build(bound: u64) -> Self {
        PrimeTable { bound, primes: sieve_primes(bound) }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primes `p <= x`. Panics if `x` exceeds the table bound.
    pub fn up_to(&self, x: u64) -> &[u64] {
        assert!(x <= self.bound, "prime table bound {} < {x}", self.bound);
        let end = self.primes.partition_point(|&p| p <= x);
        &self.primes[..end]
    }
}

/// Segmented sieve of Eratosthenes.
pub fn sieve_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let root = isqrt(limit);
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    let mut primes = base.clone();
    const SEGMENT: u64 = 1 << 18;
    let mut seg = vec![true; SEGMENT as usize];
    let mut lo = root + 1;
    while lo <= limit {
        let hi = (lo + SEGMENT - 1).min(limit);
        let len = (hi - lo + 1) as usize;
        seg[..len].iter_mut().for_each(|b| *b = true);
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j <= hi {
                seg[(j - lo) as usize] = false;
                j += p;
            }
        }
        primes.extend((0..len).filter(|&i| seg[i]).map(|i| lo + i as u64));
        lo = hi + 1;
    }
    primes
}

/// Smallest-prime-factor table on `0..=limit` (entries 0 and 1 are 0).
pub fn spf_table(limit: usize) -> Vec<u32> {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > limit {
                break;
            }
            spf[ip] = p;
        }
    }
    spf
}

pub(crate) const SPF_LIMIT: usize = 1_000_000;

/// Shared smallest-prime-factor table up to `SPF_LIMIT`.
pub(crate) fn shared_spf() -> &'static [u32] {
    static SPF: OnceLock<Vec<u32>> = OnceLock::new();
    SPF.get_or_init(|| spf_table(SPF_LIMIT))
}

/// The shared prime table, extended to cover `bound` if needed.
pub fn prime_table(bound: u64) -> Result<Arc<PrimeTable>> {
    let cap = sieve_cap();
    if bound > cap {
        return Err(Error::CapExceeded { what: "sieve bound", value: bound, cap });
    }
    if let Some(t) = CACHE.read().expect("prime cache lock").as_ref() {
        if t.bound >= bound {
            return Ok(t.clone());
        }
    }
    let mut guard = CACHE.write().expect("prime cache lock");
    if let Some(t) = guard.as_ref() {
        if t.bound >= bound {
            return Ok(t.clone());
        }
    }
    let previous = guard.as_ref().map_or(0, |t| t.bound);
    let target = bound.max(previous.saturating_mul(2)).max(1 << 16).min(cap.max(bound));
    let table = Arc::new(PrimeTable::build(target));
    *guard = Some(table.clone());
    Ok(table)
}

/// Install a table (typically loaded from disk) as the shared cache if it
/// covers more than the current one.
pub fn install_prime_table(table: PrimeTable) -> Arc<PrimeTable> {
    let mut guard = CACHE.write().expect("prime cache lock");
    match guard.as_ref() {
        Some(t) if t.bound >= table.bound => t.clone(),
        _ => {
            let t = Arc::new(table);
            *guard = Some(t.clone());
            t
        }
    }
}

/// Exactly the primes `<= x`, ascending.
pub fn primes_up_to(x: f64) -> Result<Vec<u64>> {
    if !(x >= 2.0) {
        return Err(Error::invalid(format!("primes_up_to requires x >= 2, got {x}")));
    }
    let bound = floor_bound(x)?;
    Ok(prime_table(bound)?.up_to(bound).to_vec())
}

pub(crate) fn floor_bound(x: f64) -> Result<u64> {
    let cap = sieve_cap();
    if !x.is_finite() || x >= cap as f64 + 1.0 {
        return Err(Error::CapExceeded {
            what: "sieve bound",
            value: if x.is_finite() { x as u64 } else { u64::MAX },
            cap,
        });
    }
    Ok(x.max(0.0).floor() as u64)
}

const MAGIC: &[u8; 4] = b"MMPC";
pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_FILE_NAME: &str = "primes-v1.bin";

/// On-disk prime cache. Format (all integers little-endian):
///
/// ```text
/// magic   4 bytes  "MMPC"
/// version u32      1
/// bound   u64      sieve bound
/// count   u64      number of primes
/// gaps    count × u32   p[i] - p[i-1], with p[-1] = 0
/// ```
pub struct PrimeCache;

impl PrimeCache {
    pub fn save(table: &PrimeTable, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            w.write_all(MAGIC)?;
            w.write_all(&CACHE_FORMAT_VERSION.to_le_bytes())?;
            w.write_all(&table.bound.to_le_bytes())?;
            w.write_all(&(table.primes.len() as u64).to_le_bytes())?;
            let mut prev = 0u64;
            for &p in &table.primes {
                w.write_all(&((p - prev) as u32).to_le_bytes())?;
                prev = p;
            }
            w.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<PrimeTable> {
        let bad = |reason: &str| Error::Cache { path: path.to_path_buf(), reason: reason.to_string() };
        let mut r = BufReader::new(fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        r.read_exact(&mut b8)?;
        let bound = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8);
        let mut primes = Vec::with_capacity(count as usize);
        let mut prev = 0u64;
        for _ in 0..count {
            r.read_exact(&mut b4)?;
            prev += u32::from_le_bytes(b4) as u64;
            primes.push(prev);
        }
        if primes.last().is_some_and(|&p| p > bound) {
            return Err(bad("prime above recorded bound"));
        }
        Ok(PrimeTable { bound, primes })
    }

    pub fn path_in(dir: &Path) -> PathBuf {
        dir.join(CACHE_FILE_NAME)
    }

    /// Load the cache from `dir` if it covers `bound`, otherwise sieve and
    /// persist. The result is installed as the shared table.
    pub fn load_or_build(dir: &Path, bound: u64) -> Result<Arc<PrimeTable>> {
        let path = Self::path_in(dir);
        if path.exists() {
            if let Ok(t) = Self::load(&path) {
                if t.bound >= bound {
                    return Ok(install_prime_table(t));
                }
            }
        }
        let table = prime_table(bound)?;
        fs::create_dir_all(dir)?;
        Self::save(&table, &path)?;
        Ok(table)
    }
}
