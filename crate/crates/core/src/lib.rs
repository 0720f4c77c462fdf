//! Primes of the form `⌊iL(n)⌋`, where `iL` inverts the offset logarithmic
//! integral, and the exponential-sum machinery that shows their count is
//! asymptotic to `x / log² x`.
//!
//! Modules, bottom-up:
//! - [`specfun`]: `Li`, `iL`, `⌊iL(n)⌋`, the sawtooth `ψ` and weight `g`.
//! - [`arith`]: segmented sieve tabulating primality, `Λ`, `μ` and factors.
//! - [`expsums`]: Type I, `S₀` and Type II sums with bound-ratio reports.
//! - [`vaughan`]: exact Vaughan identity checks and the bilinear decomposition.
//! - [`counting`]: `π̂(x)` by two independent routes and the `Σ` reduction.
//! - [`golden`]: write-once store for empirically recorded constants.

pub mod arith;
pub mod counting;
pub mod dd;
pub mod error;
pub mod expsums;
pub mod golden;
mod quad;
pub mod specfun;
pub mod vaughan;

pub use error::{Error, Result};
