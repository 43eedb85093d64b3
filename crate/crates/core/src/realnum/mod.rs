//! Real parameters, exact-rational enclosures and decidable comparisons.

mod decide;
pub mod elementary;
pub mod enclosure;
mod expr;
mod param;
pub mod torus;

pub use decide::{
    compare, compare_dist, decide, dist_enclosure, frac01_enclosure, frac_and_dist, frac_and_dist_enclosure,
    frac_dist_rational, half, in_half_open, nearest_int, Comparison, FracDist,
};
pub use enclosure::{int, rat, tree_sum, DyadicSum, Enclosure};
pub use expr::{Atom, Precision, RealExpr};
pub use param::{parse_decimal, parse_rational, NamedConstant, RealParam};
pub use torus::TorusPoint;

/// Shorthand for `x.eval(bits)` under the default precision policy.
pub fn eval(x: &RealExpr, bits: u32, prec: &Precision) -> crate::Result<Enclosure> {
    x.eval(bits, prec)
}
