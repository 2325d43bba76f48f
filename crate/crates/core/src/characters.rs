//! Dirichlet characters as exponent vectors on the generators of `(Z/qZ)^*`.
//!
//! A character mod `q` is fixed by its values on the generators of
//! [`UnitGroup`]: generator `i` of order `o_i` is sent to `e(a_i / o_i)`.
//! Characters are enumerated in lexicographic order of `(a_0, a_1, ...)`,
//! and that position is the character's canonical index.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{crt, gcd, lcm, moebius, reduce, UnitGroup, LocalKind};
use crate::error::{Error, Result};
use crate::summation::{e_ratio, ComplexSum};

pub const ENUMERATION_CAP: u64 = 1_000_000;
pub const GAUSS_SUM_CAP: u64 = 1_000_000;

/// A value `e(num/den)` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phase {
    pub num: u64,
    pub den: u64,
}

impl Phase {
    pub fn reduced(self) -> Phase {
        let g = gcd(self.num, self.den);
        Phase { num: self.num / g, den: self.den / g }
    }

    pub fn to_complex(self) -> Complex64 {
        e_ratio(self.num as i64, self.den)
    }

    /// True iff this phase equals `e(l/k)`.
    pub fn equals_root(self, l: i64, k: u64) -> bool {
        // num/den ≡ l/k (mod 1)  ⇔  num·k ≡ l·den (mod den·k)
        let m = self.den as i128 * k as i128;
        (self.num as i128 * k as i128 - l as i128 * self.den as i128).rem_euclid(m) == 0
    }
}

#[derive(Clone)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    exponents: Vec<u64>,
    /// `exponents[i] · (λ / o_i)` where `λ` is the group exponent.
    weights: Vec<u64>,
    order: u64,
    conductor: u64,
    parity: i8,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("modulus", &self.modulus())
            .field("exponents", &self.exponents)
            .field("order", &self.order)
            .field("conductor", &self.conductor)
            .finish()
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus() == other.modulus() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl DirichletCharacter {
    /// The character mod `q` with the given exponent vector.
    pub fn new(q: u64, exponents: Vec<u64>) -> Result<Self> {
        Self::from_group(UnitGroup::shared(q)?, exponents)
    }

    pub fn from_group(group: Arc<UnitGroup>, exponents: Vec<u64>) -> Result<Self> {
        let gens = group.generators();
        if exponents.len() != gens.len() {
            return Err(Error::invalid(format!(
                "modulus {} needs {} exponents, got {}",
                group.modulus(),
                gens.len(),
                exponents.len()
            )));
        }
        let exponents: Vec<u64> = exponents.iter().zip(gens).map(|(&a, g)| a % g.order).collect();
        let lambda = group.exponent();
        let weights = exponents.iter().zip(gens).map(|(&a, g)| a * (lambda / g.order)).collect();
        let order = exponents
            .iter()
            .zip(gens)
            .fold(1, |acc, (&a, g)| lcm(acc, g.order / gcd(a, g.order)));
        let mut chi = DirichletCharacter { group, exponents, weights, order, conductor: 1, parity: 1 };
        chi.conductor = chi.compute_conductor();
        chi.parity = match chi.phase(-1) {
            Some(p) if p.num != 0 => -1,
            _ => 1,
        };
        Ok(chi)
    }

    pub fn principal(q: u64) -> Result<Self> {
        let n = UnitGroup::shared(q)?.generators().len();
        Self::new(q, vec![0; n])
    }

    /// The character mod 1.
    pub fn trivial() -> Self {
        Self::principal(1).expect("modulus 1")
    }

    /// The nontrivial character mod 4.
    pub fn chi_minus_4() -> Self {
        Self::new(4, vec![1]).expect("modulus 4")
    }

    /// The Legendre symbol `(·/p)` for an odd prime `p`.
    pub fn legendre(p: u64) -> Result<Self> {
        if p < 3 || !crate::arith::is_prime(p) {
            return Err(Error::invalid(format!("legendre symbol needs an odd prime, got {p}")));
        }
        Self::new(p, vec![(p - 1) / 2])
    }

    /// The character at position `index` in the canonical enumeration mod `q`.
    pub fn from_index(q: u64, index: u64) -> Result<Self> {
        let group = UnitGroup::shared(q)?;
        if index >= group.order() {
            return Err(Error::invalid(format!("index {index} out of range for modulus {q}")));
        }
        let mut rem = index;
        let mut exps = vec![0; group.generators().len()];
        for (slot, g) in exps.iter_mut().zip(group.generators()).rev() {
            *slot = rem % g.order;
            rem /= g.order;
        }
        Self::from_group(group, exps)
    }

    pub fn index(&self) -> u64 {
        self.exponents
            .iter()
            .zip(self.group.generators())
            .fold(0, |acc, (&a, g)| acc * g.order + a)
    }

    pub fn modulus(&self) -> u64 {
        self.group.modulus()
    }

    pub fn group(&self) -> &Arc<UnitGroup> {
        &self.group
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Least `k` with `χ^k` principal.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// `χ(-1)`.
    pub fn parity(&self) -> i8 {
        self.parity
    }

    pub fn is_even(&self) -> bool {
        self.parity == 1
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus()
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    /// `"q=<modulus>,index=<index>"`.
    pub fn label(&self) -> String {
        format!("q={},index={}", self.modulus(), self.index())
    }

    /// `χ(n) = e(num/order)`, or `None` when `gcd(n, q) > 1`.
    pub fn phase(&self, n: i64) -> Option<Phase> {
        let lambda = self.group.exponent();
        let mut acc: u128 = 0;
        let unit = self.group.for_each_log(n, |i, l| {
            acc = (acc + self.weights[i] as u128 * l as u128) % lambda as u128;
        });
        unit.then(|| Phase { num: acc as u64 / (lambda / self.order), den: self.order })
    }

    pub fn evaluate(&self, n: i64) -> Complex64 {
        self.phase(n).map_or(Complex64::new(0.0, 0.0), Phase::to_complex)
    }

    /// Values on the residues `0..q`.
    pub fn period_values(&self) -> Vec<Complex64> {
        (0..self.modulus()).map(|n| self.evaluate(n as i64)).collect()
    }

    pub fn conj(&self) -> Self {
        let exps = self
            .exponents
            .iter()
            .zip(self.group.generators())
            .map(|(&a, g)| (g.order - a) % g.order)
            .collect();
        Self::from_group(self.group.clone(), exps).expect("same group")
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.modulus() != other.modulus() {
            return Err(Error::invalid("characters must share a modulus"));
        }
        let exps = self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect();
        Self::from_group(self.group.clone(), exps)
    }

    pub fn pow(&self, k: u64) -> Self {
        let exps = self
            .exponents
            .iter()
            .zip(self.group.generators())
            .map(|(&a, g)| ((a as u128 * k as u128) % g.order as u128) as u64)
            .collect();
        Self::from_group(self.group.clone(), exps).expect("same group")
    }

    fn compute_conductor(&self) -> u64 {
        let mut cond = 1u64;
        let mut i = 0;
        for c in self.group.components() {
            let f = match c.kind {
                LocalKind::Trivial => 0,
                LocalKind::Cyclic { .. } if c.prime == 2 => {
                    i += 1;
                    if self.exponents[i - 1] == 0 { 0 } else { 2 }
                }
                LocalKind::Cyclic { .. } => {
                    let a = self.exponents[i];
                    i += 1;
                    if a == 0 {
                        0
                    } else {
                        c.exponent - valuation(a, c.prime).min(c.exponent - 1)
                    }
                }
                LocalKind::TwoPower { k } => {
                    let (sign, a5) = (self.exponents[i], self.exponents[i + 1]);
                    i += 2;
                    match (sign, a5) {
                        (0, 0) => 0,
                        (_, 0) => 2,
                        _ => k - valuation(a5, 2),
                    }
                }
            };
            cond *= c.prime.pow(f);
        }
        cond
    }

    /// The conductor `m*` and the primitive character mod `m*` inducing `χ`.
    pub fn conductor_and_primitive(&self) -> Result<(u64, DirichletCharacter)> {
        let q = self.modulus();
        let m = self.conductor;
        if m == q {
            return Ok((m, self.clone()));
        }
        // part of q coprime to m
        let coprime_part: u64 = self
            .group
            .components()
            .iter()
            .filter(|c| m % c.prime != 0)
            .map(|c| c.modulus)
            .product();
        let target = UnitGroup::shared(m)?;
        let exps = target
            .generators()
            .iter()
            .map(|g| {
                let lift = crt(&[(g.value as i64, m), (1, coprime_part)])?;
                let phase = self.phase(lift as i64).expect("lift is a unit mod q").reduced();
                // e(num/den) = e(a/order_g)
                Ok(phase.num * (g.order / phase.den))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((m, DirichletCharacter::from_group(target, exps)?))
    }

    pub fn to_record(&self) -> CharacterRecord {
        CharacterRecord {
            modulus: self.modulus(),
            exponent_vector: self.exponents.clone(),
            order: self.order,
            conductor: self.conductor,
            parity: self.parity,
        }
    }

    pub fn from_record(rec: &CharacterRecord) -> Result<Self> {
        let chi = Self::new(rec.modulus, rec.exponent_vector.clone())?;
        if chi.exponents != rec.exponent_vector
            || chi.order != rec.order
            || chi.conductor != rec.conductor
            || chi.parity != rec.parity
        {
            return Err(Error::invalid("character record fields are inconsistent"));
        }
        Ok(chi)
    }
}

fn valuation(mut a: u64, p: u64) -> u32 {
    let mut v = 0;
    while a != 0 && a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

/// JSON form of a character.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharacterRecord {
    pub modulus: u64,
    pub exponent_vector: Vec<u64>,
    pub order: u64,
    pub conductor: u64,
    pub parity: i8,
}

/// All `φ(q)` characters mod `q` in canonical order (index 0 is principal).
pub fn enumerate_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    if q > ENUMERATION_CAP {
        return Err(Error::CapExceeded { what: "enumeration modulus", value: q, cap: ENUMERATION_CAP });
    }
    let n = UnitGroup::shared(q)?.order();
    (0..n).map(|i| DirichletCharacter::from_index(q, i)).collect()
}

pub fn primitive_characters(q: u64) -> Result<Vec<DirichletCharacter>> {
    Ok(enumerate_characters(q)?.into_iter().filter(|c| c.is_primitive()).collect())
}

/// Primitive characters of conductor strictly below `bound`, ordered by
/// conductor and then canonical index. The character mod 1 is included.
pub fn primitive_characters_below(bound: f64) -> Result<Vec<DirichletCharacter>> {
    let mut out = Vec::new();
    let mut m = 1u64;
    while (m as f64) < bound {
        out.extend(primitive_characters(m)?);
        m += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussSumValue {
    pub value: Complex64,
    pub modulus: u64,
    pub index: u64,
}

/// `τ(χ) = Σ_{n ≤ q} χ(n) e(n/q)`.
pub fn gauss_sum(chi: &DirichletCharacter) -> Result<GaussSumValue> {
    let q = chi.modulus();
    if q > GAUSS_SUM_CAP {
        return Err(Error::CapExceeded { what: "gauss sum modulus", value: q, cap: GAUSS_SUM_CAP });
    }
    let sum: ComplexSum = (1..=q)
        .filter_map(|n| chi.phase(n as i64).map(|p| p.to_complex() * e_ratio(n as i64, q)))
        .collect();
    Ok(GaussSumValue { value: sum.value(), modulus: q, index: chi.index() })
}

/// `μ(m/m*) ψ*(m/m*) τ(ψ*)` for `ψ` mod `m` induced by the primitive `ψ*` mod `m*`.
pub fn gauss_sum_induced(psi: &DirichletCharacter) -> Result<Complex64> {
    let (m_star, prim) = psi.conductor_and_primitive()?;
    let ratio = psi.modulus() / m_star;
    let mu = moebius(ratio)?;
    if mu == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(f64::from(mu) * prim.evaluate(ratio as i64) * gauss_sum(&prim)?.value)
}

/// Number of residues `a mod m` with `ξ(a) = e(ℓ/k)`, `k` the order of `ξ`.
pub fn coset_count(xi: &DirichletCharacter, l: i64) -> Result<u64> {
    if xi.is_principal() {
        return Err(Error::precondition("coset_count needs a nonprincipal character"));
    }
    let k = xi.order();
    let target = reduce(l, k);
    Ok((0..xi.modulus())
        .filter(|&a| xi.phase(a as i64).is_some_and(|p| p.num == target))
        .count() as u64)
}
