//! Completely multiplicative functions `f: Z_{>0} -> unit disc`, given by
//! their values at primes, with an optional archimedean twist `n^{it}` and an
//! optional smooth cutoff.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, is_prime, primes_up_to, spf_table};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::summation::e;

const DISC_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Base {
    Character(DirichletCharacter),
    Table { primes: Arc<Vec<u64>>, values: Arc<Vec<Complex64>> },
}

impl Base {
    fn support(&self) -> u64 {
        match self {
            Base::Character(_) => u64::MAX,
            Base::Table { primes, .. } => primes.last().copied().unwrap_or(1),
        }
    }

    fn value(&self, p: u64) -> Option<Complex64> {
        match self {
            Base::Character(chi) => Some(chi.evaluate(p as i64)),
            Base::Table { primes, values } => primes.binary_search(&p).ok().map(|i| values[i]),
        }
    }
}

#[derive(Debug, Clone)]
struct Factor {
    base: Base,
    conj: bool,
}

/// A completely multiplicative function with `|f(p)| <= 1`.
///
/// The value at `n` is `Π f0(p)^e · n^{it}`, where `f0` is the product of the
/// stored factors and `t` the twist. With a cutoff `y`, values at integers
/// having a prime factor above `y` are 0.
#[derive(Debug, Clone)]
pub struct CMFunction {
    factors: Vec<Factor>,
    twist: f64,
    cutoff: Option<f64>,
}

impl CMFunction {
    /// The constant function 1.
    pub fn one() -> Self {
        CMFunction { factors: Vec::new(), twist: 0.0, cutoff: None }
    }

    pub fn from_character(chi: &DirichletCharacter) -> Self {
        CMFunction {
            factors: vec![Factor { base: Base::Character(chi.clone()), conj: false }],
            twist: 0.0,
            cutoff: None,
        }
    }

    /// Function with the given prime values. The listed primes must be
    /// exactly the primes up to the largest of them.
    pub fn from_prime_pattern(pattern: &[(u64, Complex64)]) -> Result<Self> {
        let mut pairs = pattern.to_vec();
        pairs.sort_by_key(|&(p, _)| p);
        let support = pairs.last().map_or(1, |&(p, _)| p);
        let primes = if support >= 2 { primes_up_to(support as f64)? } else { Vec::new() };
        if primes.len() != pairs.len() || primes.iter().zip(&pairs).any(|(p, (q, _))| p != q) {
            return Err(Error::invalid("prime pattern must list every prime up to its largest entry"));
        }
        let values = pairs.into_iter().map(|(_, v)| v).collect();
        Self::from_table(primes, values)
    }

    /// Function with `f(p) = value(p)` for all primes `p <= support`.
    pub fn from_prime_fn(support: u64, value: impl Fn(u64) -> Complex64) -> Result<Self> {
        let primes = if support >= 2 { primes_up_to(support as f64)? } else { Vec::new() };
        let values = primes.iter().map(|&p| value(p)).collect();
        Self::from_table(primes, values)
    }

    fn from_table(primes: Vec<u64>, values: Vec<Complex64>) -> Result<Self> {
        if let Some((p, v)) = primes.iter().zip(&values).find(|(_, v)| !(v.norm() <= 1.0 + DISC_TOL)) {
            return Err(Error::invalid(format!("value {v} at prime {p} lies outside the unit disc")));
        }
        Ok(CMFunction {
            factors: vec![Factor {
                base: Base::Table { primes: Arc::new(primes), values: Arc::new(values) },
                conj: false,
            }],
            twist: 0.0,
            cutoff: None,
        })
    }

    /// Prime values drawn uniformly from the unit circle.
    pub fn random_unimodular<R: Rng + ?Sized>(support: u64, rng: &mut R) -> Result<Self> {
        let primes = primes_up_to(support.max(2) as f64)?;
        let values = primes.iter().map(|_| e(rng.random::<f64>())).collect();
        Self::from_table(primes, values)
    }

    /// Prime values drawn uniformly from the closed unit disc.
    pub fn random_disc<R: Rng + ?Sized>(support: u64, rng: &mut R) -> Result<Self> {
        let primes = primes_up_to(support.max(2) as f64)?;
        let values = primes
            .iter()
            .map(|_| {
                let r = rng.random::<f64>().sqrt();
                e(rng.random::<f64>()) * r
            })
            .collect();
        Self::from_table(primes, values)
    }

    /// Largest prime at which the function is defined.
    pub fn support(&self) -> u64 {
        self.factors.iter().map(|f| f.base.support()).min().unwrap_or(u64::MAX)
    }

    pub fn twist_t(&self) -> f64 {
        self.twist
    }

    pub fn cutoff(&self) -> Option<f64> {
        self.cutoff
    }

    /// `f(n) n^{it}`.
    pub fn twist(&self, t: f64) -> Self {
        let mut g = self.clone();
        g.twist += t;
        g
    }

    /// `f_y`: equal to `f` on `y`-smooth integers and 0 elsewhere.
    pub fn smooth_restrict(&self, y: f64) -> Result<Self> {
        if !(y >= 2.0) {
            return Err(Error::invalid(format!("smoothing bound must be at least 2, got {y}")));
        }
        let mut g = self.clone();
        g.cutoff = Some(self.cutoff.map_or(y, |c| c.min(y)));
        Ok(g)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        let cutoff = match (self.cutoff, other.cutoff) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        CMFunction { factors, twist: self.twist + other.twist, cutoff }
    }

    pub fn conj(&self) -> Self {
        CMFunction {
            factors: self.factors.iter().map(|f| Factor { base: f.base.clone(), conj: !f.conj }).collect(),
            twist: -self.twist,
            cutoff: self.cutoff,
        }
    }

    fn cut(&self, p: u64) -> bool {
        self.cutoff.is_some_and(|y| p as f64 > y)
    }

    /// Value at a prime without the twist.
    fn base_value(&self, p: u64) -> Result<Complex64> {
        if self.cut(p) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for f in &self.factors {
            let v = f.base.value(p).ok_or(Error::OutsideSupport { prime: p, support: f.base.support() })?;
            acc *= if f.conj { v.conj() } else { v };
        }
        Ok(acc)
    }

    /// `f(p)` including the twist `p^{it}`.
    pub fn prime_value(&self, p: u64) -> Result<Complex64> {
        Ok(self.base_value(p)? * n_it(p, self.twist))
    }

    pub fn evaluate(&self, n: u64) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::invalid("multiplicative functions are evaluated at n >= 1"));
        }
        let fac = factor(n)?;
        if fac.primes().any(|p| self.cut(p)) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mut acc = Complex64::new(1.0, 0.0);
        for (p, k) in fac.iter() {
            acc *= self.base_value(p)?.powu(k);
        }
        Ok(acc * n_it(n, self.twist))
    }

    /// `f(0..=n_max)` in one sieve pass (entry 0 is 0).
    pub fn values_up_to(&self, n_max: u64) -> Result<Vec<Complex64>> {
        let n = n_max as usize;
        let zero = Complex64::new(0.0, 0.0);
        let mut vals = vec![zero; n + 1];
        if n == 0 {
            return Ok(vals);
        }
        vals[1] = Complex64::new(1.0, 0.0);
        let spf = spf_table(n);
        for m in 2..=n {
            let p = spf[m] as usize;
            vals[m] = if p == m { self.base_value(m as u64)? } else { vals[p] * vals[m / p] };
        }
        if self.twist != 0.0 {
            for (m, v) in vals.iter_mut().enumerate().skip(2) {
                if *v != zero {
                    *v *= n_it(m as u64, self.twist);
                }
            }
        }
        Ok(vals)
    }

    /// JSON form with prime values listed up to `min(support, max_prime)`.
    pub fn to_record(&self, max_prime: u64) -> Result<CMFunctionRecord> {
        let bound = self.support().min(max_prime);
        let mut prime_values = BTreeMap::new();
        if bound >= 2 {
            for p in primes_up_to(bound as f64)? {
                let v = self.base_value(p)?;
                prime_values.insert(p.to_string(), [v.re, v.im]);
            }
        }
        Ok(CMFunctionRecord { support: bound, prime_values, twist: self.twist, cutoff: self.cutoff })
    }

    pub fn from_record(rec: &CMFunctionRecord) -> Result<Self> {
        let mut pattern = Vec::with_capacity(rec.prime_values.len());
        for (k, v) in &rec.prime_values {
            let p: u64 = k.parse().map_err(|_| Error::invalid(format!("bad prime key {k:?}")))?;
            if !is_prime(p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
            pattern.push((p, Complex64::new(v[0], v[1])));
        }
        let mut f = Self::from_prime_pattern(&pattern)?;
        if f.support() < rec.support && rec.support >= 2 {
            return Err(Error::invalid("prime values do not cover the stated support"));
        }
        f.twist = rec.twist;
        f.cutoff = rec.cutoff;
        Ok(f)
    }
}

/// `n^{it}`.
#[inline]
pub fn n_it(n: u64, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (t * (n as f64).ln()).sin_cos();
    Complex64::new(c, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMFunctionRecord {
    pub support: u64,
    pub prime_values: BTreeMap<String, [f64; 2]>,
    pub twist: f64,
    pub cutoff: Option<f64>,
}
