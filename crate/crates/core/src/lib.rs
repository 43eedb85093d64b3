//! Exact and rigorous computations behind fibred multiplicative Diophantine
//! approximation experiments: real parameters with certified enclosures,
//! continued fractions and Diophantine exponents, divisor sums, limsup sets
//! on the circle, Kronecker discrepancy, and Borel-Cantelli style sums.

pub mod arith;
pub mod cfrac;
pub mod circlesets;
pub mod discrepancy;
mod error;
pub mod gallagher;
pub mod realnum;
pub mod record;

pub use error::{Error, Result};
