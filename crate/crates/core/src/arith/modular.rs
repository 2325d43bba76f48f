use std::collections::HashMap;

use crate::error::{Error, Result};

use super::factor::{factor, is_prime};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Reduce a signed integer into `[0, m)`.
#[inline]
pub fn reduce(n: i64, m: u64) -> u64 {
    (n as i128).rem_euclid(m as i128) as u64
}

/// Chinese remainder theorem for pairwise-coprime moduli.
///
/// Returns the unique solution in `[0, product of moduli)`.
pub fn crt(residues: &[(i64, u64)]) -> Result<u64> {
    for (i, &(_, mi)) in residues.iter().enumerate() {
        if mi == 0 {
            return Err(Error::invalid("crt modulus must be positive"));
        }
        for &(_, mj) in &residues[i + 1..] {
            if gcd(mi, mj) != 1 {
                return Err(Error::NotCoprime(mi, mj));
            }
        }
    }
    let mut x: u128 = 0;
    let mut modulus: u128 = 1;
    for &(a, m) in residues {
        let a = reduce(a, m) as u128;
        let m128 = m as u128;
        // x + modulus * t ≡ a (mod m)
        let inv = mod_inverse((modulus % m128) as u64, m).expect("coprime moduli");
        let diff = (a + m128 - x % m128) % m128;
        let t = diff * inv as u128 % m128;
        x += modulus * t;
        modulus *= m128;
        if modulus > u64::MAX as u128 {
            return Err(Error::CapExceeded {
                what: "crt modulus product",
                value: u64::MAX,
                cap: u64::MAX,
            });
        }
    }
    Ok(x as u64)
}

/// Multiplicative order of `a` in a group of order `group_order` (mod `m`).
pub fn multiplicative_order(a: u64, m: u64, group_order: u64) -> Result<u64> {
    let mut order = group_order;
    for (p, _) in factor(group_order)?.iter() {
        while order % p == 0 && pow_mod(a, order / p, m) == 1 {
            order /= p;
        }
    }
    Ok(order)
}

/// Baby-step giant-step: smallest `e` in `[0, order)` with `base^e ≡ target (mod modulus)`.
///
/// `order` must be a multiple of the order of `base`; `base` must be a unit.
pub fn bsgs(base: u64, target: u64, modulus: u64, order: u64) -> Option<u64> {
    let target = target % modulus;
    if order == 0 {
        return None;
    }
    let steps = (order as f64).sqrt().ceil() as u64;
    let steps = steps.max(1);
    let mut baby = HashMap::with_capacity(steps as usize);
    let mut cur = 1 % modulus;
    for j in 0..steps {
        baby.entry(cur).or_insert(j);
        cur = mul_mod(cur, base, modulus);
    }
    let giant = mod_inverse(pow_mod(base, steps, modulus), modulus)?;
    let mut gamma = target;
    for i in 0..=steps {
        if let Some(&j) = baby.get(&gamma) {
            let e = i * steps + j;
            if e < order {
                return Some(e);
            }
        }
        gamma = mul_mod(gamma, giant, modulus);
    }
    None
}

/// Discrete logarithm modulo a prime `p` by baby-step giant-step.
///
/// The result lies in `[0, order(base))`.
pub fn discrete_log(base: u64, target: u64, p: u64) -> Result<u64> {
    if p < 2 || !is_prime(p) {
        return Err(Error::invalid(format!("discrete_log modulus {p} is not prime")));
    }
    let (b, t) = (base % p, target % p);
    if b == 0 || t == 0 {
        return Err(Error::invalid("discrete_log arguments must be units"));
    }
    let order = multiplicative_order(b, p, p - 1)?;
    bsgs(b, t, p, order).ok_or(Error::OutsideSubgroup { base, target, modulus: p })
}

/// Smallest primitive root modulo a prime `p`.
pub fn primitive_root_prime(p: u64) -> Result<u64> {
    if p == 2 {
        return Ok(1);
    }
    let factors = factor(p - 1)?;
    (2..p)
        .find(|&g| factors.iter().all(|(r, _)| pow_mod(g, (p - 1) / r, p) != 1))
        .ok_or_else(|| Error::invalid(format!("no primitive root mod {p}")))
}

/// A primitive root modulo `p^e` for an odd prime `p`.
pub fn primitive_root_prime_power(p: u64, e: u32) -> Result<u64> {
    let g = primitive_root_prime(p)?;
    if e == 1 {
        return Ok(g);
    }
    let p2 = p * p;
    Ok(if pow_mod(g, p - 1, p2) == 1 { g + p } else { g })
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crt_small_cases() {
        assert_eq!(crt(&[(1, 2), (2, 3)]).unwrap(), 5);
        assert_eq!(crt(&[(0, 7)]).unwrap(), 0);
        assert_eq!(crt(&[(-1, 5), (3, 4)]).unwrap(), 19);
        assert!(matches!(crt(&[(1, 4), (1, 6)]), Err(Error::NotCoprime(4, 6))));
    }

    #[test]
    fn crt_unique_by_exhaustive_scan() {
        let moduli = [(4u64, 9u64), (7, 11), (8, 125), (3, 5)];
        for &(m1, m2) in &moduli {
            for a in 0..m1 {
                for b in 0..m2 {
                    let x = crt(&[(a as i64, m1), (b as i64, m2)]).unwrap();
                    let hits: Vec<u64> = (0..m1 * m2).filter(|n| n % m1 == a && n % m2 == b).collect();
                    assert_eq!(hits, vec![x]);
                }
            }
        }
    }

    #[test]
    fn discrete_log_examples() {
        assert_eq!(discrete_log(2, 1, 11).unwrap(), 0);
        assert_eq!(discrete_log(2, 8, 11).unwrap(), 3);
        // 3 has order 5 mod 11; 2 is not a power of 3
        assert!(matches!(discrete_log(3, 2, 11), Err(Error::OutsideSubgroup { .. })));
        assert!(discrete_log(2, 3, 12).is_err());
    }

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root_prime(7).unwrap(), 3);
        assert_eq!(primitive_root_prime(11).unwrap(), 2);
        assert_eq!(primitive_root_prime(41).unwrap(), 6);
        // 10 is a primitive root mod 487 but not mod 487^2
        let g = primitive_root_prime_power(487, 2).unwrap();
        assert_eq!(multiplicative_order(g, 487 * 487, 486 * 487).unwrap(), 486 * 487);
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, u64::MAX, (1 << 62) - 1] {
            let r = isqrt(n);
            assert!(r as u128 * r as u128 <= n as u128);
            assert!((r as u128 + 1) * (r as u128 + 1) > n as u128);
        }
    }

    #[test]
    fn inverse_roundtrip() {
        for m in 2..60u64 {
            for a in 0..m {
                match mod_inverse(a, m) {
                    Some(inv) => assert_eq!(mul_mod(a, inv, m), 1),
                    None => assert_ne!(gcd(a, m), 1),
                }
            }
        }
    }
}
