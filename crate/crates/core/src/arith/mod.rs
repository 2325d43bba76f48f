//! Exact integer substrate: sieves, factorization, unit groups, CRT and
//! discrete logarithms.

mod factor;
mod functions;
mod modular;
mod sieve;
mod unit_group;

pub use factor::{factor, is_prime, Factorization, FACTOR_CAP};
pub use functions::{divisor_count, is_smooth, moebius, totient, SmoothFilter};
pub use modular::{
    bsgs, crt, discrete_log, gcd, isqrt, lcm, mod_inverse, mul_mod, multiplicative_order, pow_mod,
    primitive_root_prime, primitive_root_prime_power, reduce,
};
pub use sieve::{
    install_prime_table, prime_table, primes_up_to, set_sieve_cap, sieve_cap, sieve_primes, spf_table,
    PrimeCache, PrimeTable, CACHE_FILE_NAME, CACHE_FORMAT_VERSION, DEFAULT_SIEVE_CAP,
};
pub(crate) use sieve::floor_bound;
pub use unit_group::{Generator, LocalComponent, LocalKind, UnitGroup, UNIT_GROUP_CAP};
