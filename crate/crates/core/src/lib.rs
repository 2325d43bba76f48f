//! Dirichlet characters, character and exponential sums, and the
//! multiplicative mimicry distance between completely multiplicative
//! functions.

pub mod arith;
pub mod characters;
pub mod dioph;
pub mod error;
pub mod expsums;
pub mod extremal;
pub mod mimicry;
pub mod multfun;
pub mod summation;
pub mod theory;
pub mod verify;

pub use characters::{DirichletCharacter, Phase};
pub use error::{Error, Result};
