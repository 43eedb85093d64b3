//! Approximation functions, the fibred ψ′ construction and the experiments
//! built on them.

mod approx;
mod census;
mod sampling;
mod series;

pub use approx::*;
pub use census::*;
pub use sampling::*;
pub use series::*;
