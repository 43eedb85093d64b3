//! Points of R/Z in 128-bit fixed point with an explicit error radius.
//!
//! Integer multiples are exact modulo 1 up to the scaled error, which keeps
//! long orbit scans cheap; anything the radius cannot settle goes back to
//! [`RealExpr`] evaluation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use super::enclosure::{ceil_scaled, dyadic, floor_scaled, Enclosure};
use super::expr::RealExpr;

pub const TORUS_BITS: u32 = 128;
pub const HALF: u128 = 1 << 127;
const EVAL_BITS: u32 = 200;

/// `value / 2^128` mod 1, known to within `err / 2^128` on the circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    pub value: u128,
    pub err: u128,
}

fn to_u128_mod(n: &BigInt) -> u128 {
    let m = BigInt::one() << TORUS_BITS as usize;
    let r = n.mod_floor(&m);
    r.try_into().unwrap()
}

impl TorusPoint {
    pub const ZERO: TorusPoint = TorusPoint { value: 0, err: 0 };

    pub fn from_enclosure(e: &Enclosure) -> Self {
        let lo = floor_scaled(e.lo(), TORUS_BITS);
        let hi = ceil_scaled(e.hi(), TORUS_BITS);
        if lo == hi {
            return TorusPoint { value: to_u128_mod(&lo), err: 0 };
        }
        let mid: BigInt = (&lo + &hi) >> 1usize;
        let rad = (&hi - &mid).max(&mid - &lo);
        let err = if rad >= BigInt::from(HALF) { HALF } else { rad.try_into().unwrap() };
        TorusPoint { value: to_u128_mod(&mid), err }
    }

    pub fn from_expr(x: &RealExpr) -> Self {
        match x.as_rational() {
            Some(r) => Self::from_rational(r),
            None => Self::from_enclosure(&x.enclose(EVAL_BITS)),
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Self::from_enclosure(&Enclosure::exact(r.clone()))
    }

    /// Exact point k / 2^64.
    pub fn from_grid64(k: u64) -> Self {
        TorusPoint { value: (k as u128) << 64, err: 0 }
    }

    pub fn mul(self, k: i64) -> Self {
        let err = self.err.checked_mul(k.unsigned_abs() as u128).map_or(HALF, |e| e.min(HALF));
        TorusPoint { value: self.value.wrapping_mul(k as i128 as u128), err }
    }

    pub fn mul_u64(self, q: u64) -> Self {
        let err = self.err.checked_mul(q as u128).map_or(HALF, |e| e.min(HALF));
        TorusPoint { value: self.value.wrapping_mul(q as u128), err }
    }

    pub fn add(self, o: TorusPoint) -> Self {
        TorusPoint { value: self.value.wrapping_add(o.value), err: self.err.saturating_add(o.err).min(HALF) }
    }

    pub fn sub(self, o: TorusPoint) -> Self {
        TorusPoint { value: self.value.wrapping_sub(o.value), err: self.err.saturating_add(o.err).min(HALF) }
    }

    /// Bounds of ‖x‖ in units of 2^-128.
    pub fn dist_bounds(self) -> (u128, u128) {
        let d = if self.value <= HALF { self.value } else { self.value.wrapping_neg() };
        (d.saturating_sub(self.err), d.saturating_add(self.err).min(HALF))
    }

    pub fn dist(self) -> Enclosure {
        let (lo, hi) = self.dist_bounds();
        bounds_to_enclosure(lo, hi)
    }

    /// Bounds of x mod 1 in [0, 1) unless the error straddles 0.
    pub fn frac01_bounds(self) -> Option<(u128, u128)> {
        if self.err > self.value || self.value > u128::MAX - self.err {
            None
        } else {
            Some((self.value - self.err, self.value + self.err))
        }
    }
}

pub fn bounds_to_enclosure(lo: u128, hi: u128) -> Enclosure {
    Enclosure::new(dyadic(BigInt::from(lo), TORUS_BITS), dyadic(BigInt::from(hi), TORUS_BITS))
}

/// Lower bound in torus units for a rational in [0, 1].
pub fn rational_floor_units(r: &BigRational) -> BigInt {
    floor_scaled(r, TORUS_BITS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::enclosure::rat;
    use crate::realnum::param::RealParam;

    #[test]
    fn multiples_track_distance() {
        let a = RealExpr::from(RealParam::Sqrt(2));
        let t = TorusPoint::from_expr(&a);
        for q in [1i64, 2, 5, 12, 29, -7, 70_000] {
            let exact = a.mul_int(q).enclose(128);
            let d = crate::realnum::decide::dist_enclosure(&exact);
            let fast = t.mul(q).dist();
            assert!(fast.overlaps(&d), "q = {q}");
            assert!(fast.width() < rat(1, 1 << 40));
        }
    }

    #[test]
    fn exact_dyadics() {
        let t = TorusPoint::from_rational(&rat(3, 4));
        assert_eq!(t.err, 0);
        assert_eq!(t.dist(), Enclosure::exact(rat(1, 4)));
        assert_eq!(t.mul(2).dist(), Enclosure::exact(rat(1, 2)));
        let g = TorusPoint::from_grid64(1 << 63);
        assert_eq!(g.dist(), Enclosure::exact(rat(1, 2)));
        let n = TorusPoint::from_rational(&rat(-1, 4));
        assert_eq!(n.frac01_bounds(), Some((3u128 << 126, 3u128 << 126)));
    }

    #[test]
    fn thirds_are_approximate() {
        let t = TorusPoint::from_rational(&rat(1, 3));
        assert!(t.err <= 1);
        let d = t.mul(3).dist();
        assert!(d.contains(&rat(0, 1)));
        assert!(t.mul(3).frac01_bounds().is_none() || d.lo() == &rat(0, 1));
    }
}
