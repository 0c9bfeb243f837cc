//! Exact-arithmetic laboratory for conditional algorithmic probability.
//!
//! Everything here is computable at desk scale: masses are dyadic rationals,
//! machines are small prefix machines with a step budget, and every
//! "complexity" is an upper-bound estimate found by exhaustive search.
//!
//! Module map:
//!
//! - [`arith`]: [`Dyadic`] numbers, half-open subintervals of `[0,1)` and
//!   binary (cylinder) intervals.
//! - [`bits`] and [`codes`]: bit strings, the string/number bijection,
//!   self-delimiting codes, pairing, prefix-freeness and Kraft sums.
//! - [`vm`]: a toy prefix machine, its standard enumeration, a universal
//!   machine and the stage-by-stage dovetailing scheduler.
//! - [`complexity`]: resource-bounded upper bounds on conditional prefix
//!   complexity and the symmetry-of-information report.
//! - [`apriori`]: lower approximations of the conditional a priori
//!   probability of a machine.
//! - [`semimeasure`]: monotone approximators, the normalization algorithm,
//!   universal mixtures and domination checks.
//! - [`coder`]: Shannon-Fano interval codes, power-of-two discretization and
//!   the conditional codebook with its decoder.
//! - [`quotient`]: classical quotient conditionals and the gap reports that
//!   show why they admit no coding theorem.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod apriori;
pub mod arith;
pub mod bits;
pub mod codes;
pub mod coder;
pub mod complexity;
pub mod quotient;
pub mod semimeasure;
pub mod vm;

pub use arith::{BinaryInterval, Dyadic, Interval};
pub use bits::BitString;
