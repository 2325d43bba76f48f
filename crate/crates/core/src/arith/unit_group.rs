//! Cyclic decomposition of the unit group `(Z/qZ)^*`.
//!
//! The group is split over the prime powers dividing `q`. Odd prime powers are
//! cyclic with a fixed primitive root; `4` is cyclic on `3`; `2^k` for `k >= 3`
//! is `<-1> x <5>`; `2` contributes nothing. Generators are listed in
//! increasing prime order, and for `2^k` the sign generator comes first.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

use super::factor::factor;
use super::modular::{bsgs, crt, lcm, primitive_root_prime_power, reduce};

pub const UNIT_GROUP_CAP: u64 = 1_000_000_000_000;
const TABLE_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    /// `Z/2` or `Z/1`: no units beyond 1.
    Trivial,
    /// Cyclic of the given order, generated by `generator`.
    Cyclic { generator: u64, order: u64 },
    /// `(Z/2^k)^*` with `k >= 3`, generated by `-1` and `5`.
    TwoPower { k: u32 },
}

#[derive(Debug)]
pub struct LocalComponent {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    pub kind: LocalKind,
    /// Discrete logs of residues (cyclic generator, or of `5` for 2-powers).
    table: Option<Vec<u32>>,
}

impl LocalComponent {
    fn new(prime: u64, exponent: u32) -> Result<Self> {
        let modulus = prime.pow(exponent);
        let kind = match (prime, exponent) {
            (2, 1) => LocalKind::Trivial,
            (2, 2) => LocalKind::Cyclic { generator: 3, order: 2 },
            (2, k) => LocalKind::TwoPower { k },
            (p, e) => LocalKind::Cyclic {
                generator: primitive_root_prime_power(p, e)?,
                order: (p - 1) * p.pow(e - 1),
            },
        };
        let mut comp = LocalComponent { prime, exponent, modulus, kind, table: None };
        if modulus <= TABLE_LIMIT {
            comp.table = comp.build_table();
        }
        Ok(comp)
    }

    fn build_table(&self) -> Option<Vec<u32>> {
        let (g, order) = match self.kind {
            LocalKind::Trivial => return None,
            LocalKind::Cyclic { generator, order } => (generator, order),
            LocalKind::TwoPower { k } => (5, 1u64 << (k - 2)),
        };
        let mut table = vec![u32::MAX; self.modulus as usize];
        let mut x = 1u64;
        for i in 0..order {
            table[x as usize] = i as u32;
            x = x * g % self.modulus;
        }
        Some(table)
    }

    /// Orders of this component's generators.
    pub fn generator_orders(&self) -> Vec<u64> {
        match self.kind {
            LocalKind::Trivial => vec![],
            LocalKind::Cyclic { order, .. } => vec![order],
            LocalKind::TwoPower { k } => vec![2, 1 << (k - 2)],
        }
    }

    fn generator_values(&self) -> Vec<u64> {
        match self.kind {
            LocalKind::Trivial => vec![],
            LocalKind::Cyclic { generator, .. } => vec![generator],
            LocalKind::TwoPower { .. } => vec![self.modulus - 1, 5],
        }
    }

    fn cyclic_log(&self, r: u64, g: u64, order: u64) -> u64 {
        match &self.table {
            Some(t) => t[r as usize] as u64,
            None => bsgs(g, r, self.modulus, order).expect("unit lies in cyclic group"),
        }
    }

    /// Logs of the residue `r` (a unit mod this prime power) w.r.t. the local generators.
    fn logs(&self, r: u64, out: &mut impl FnMut(u64)) {
        match self.kind {
            LocalKind::Trivial => {}
            LocalKind::Cyclic { generator, order } => out(self.cyclic_log(r, generator, order)),
            LocalKind::TwoPower { k } => {
                let negative = r % 4 == 3;
                let m = if negative { self.modulus - r } else { r };
                out(u64::from(negative));
                out(self.cyclic_log(m, 5, 1 << (k - 2)));
            }
        }
    }
}

/// A generator of the global unit group together with its order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator {
    /// Residue mod q: the local generator on its own component, 1 elsewhere.
    pub value: u64,
    pub order: u64,
    pub prime: u64,
}

#[derive(Debug)]
pub struct UnitGroup {
    modulus: u64,
    components: Vec<LocalComponent>,
    generators: Vec<Generator>,
    order: u64,
    exponent: u64,
}

impl UnitGroup {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("modulus must be positive"));
        }
        if q > UNIT_GROUP_CAP {
            return Err(Error::CapExceeded { what: "unit group modulus", value: q, cap: UNIT_GROUP_CAP });
        }
        let components = factor(q)?
            .iter()
            .map(|(p, e)| LocalComponent::new(p, e))
            .collect::<Result<Vec<_>>>()?;
        let mut generators = Vec::new();
        for c in &components {
            let rest = q / c.modulus;
            for (g, ord) in c.generator_values().into_iter().zip(c.generator_orders()) {
                let value = crt(&[(g as i64, c.modulus), (1, rest)])?;
                generators.push(Generator { value, order: ord, prime: c.prime });
            }
        }
        let order = generators.iter().map(|g| g.order).product();
        let exponent = generators.iter().fold(1, |acc, g| lcm(acc, g.order));
        Ok(UnitGroup { modulus: q, components, generators, order, exponent })
    }

    /// Memoized shared instance for modulus `q`.
    pub fn shared(q: u64) -> Result<Arc<UnitGroup>> {
        static GROUPS: OnceLock<Mutex<HashMap<u64, Arc<UnitGroup>>>> = OnceLock::new();
        let groups = GROUPS.get_or_init(Default::default);
        if let Some(g) = groups.lock().expect("unit group memo").get(&q) {
            return Ok(g.clone());
        }
        let g = Arc::new(UnitGroup::new(q)?);
        Ok(groups.lock().expect("unit group memo").entry(q).or_insert(g).clone())
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `φ(q)`.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Least common multiple of the generator orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn components(&self) -> &[LocalComponent] {
        &self.components
    }

    /// Calls `f(i, log_i)` for each generator index; returns false (without
    /// calling `f`) if `n` is not a unit.
    pub fn for_each_log(&self, n: i64, mut f: impl FnMut(usize, u64)) -> bool {
        let residues: Vec<u64> = self.components.iter().map(|c| reduce(n, c.modulus)).collect();
        if self.components.iter().zip(&residues).any(|(c, &r)| r % c.prime == 0) {
            return false;
        }
        let mut i = 0;
        for (c, &r) in self.components.iter().zip(&residues) {
            c.logs(r, &mut |l| {
                f(i, l);
                i += 1;
            });
        }
        true
    }

    /// Exponent vector of `n` in the generator basis, or `None` for non-units.
    pub fn log_vector(&self, n: i64) -> Option<Vec<u64>> {
        let mut v = vec![0; self.generators.len()];
        self.for_each_log(n, |i, l| v[i] = l).then_some(v)
    }
}
