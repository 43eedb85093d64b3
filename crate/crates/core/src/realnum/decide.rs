use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::enclosure::{int, Enclosure};
use super::expr::{Precision, RealExpr};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparison {
    Less,
    Greater,
    Equal,
    Undecided,
}

impl Comparison {
    pub fn flip(self) -> Self {
        match self {
            Comparison::Less => Comparison::Greater,
            Comparison::Greater => Comparison::Less,
            c => c,
        }
    }

    pub fn is_decided(self) -> bool {
        self != Comparison::Undecided
    }

    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::Less,
            Ordering::Greater => Comparison::Greater,
            Ordering::Equal => Comparison::Equal,
        }
    }
}

/// Sign of a quantity given by an enclosure oracle, escalating bits along
/// the schedule. Equal is only returned for a zero-width enclosure at 0.
pub fn decide<F>(prec: &Precision, mut f: F) -> Result<Comparison>
where
    F: FnMut(u32) -> Result<Enclosure>,
{
    let zero = BigRational::zero();
    let mut last_width: Option<BigRational> = None;
    for bits in prec.schedule() {
        let e = match f(bits) {
            Ok(e) => e,
            Err(Error::LiteralPrecision { .. }) | Err(Error::CapExceeded { .. }) => return Ok(Comparison::Undecided),
            Err(e) => return Err(e),
        };
        if let Some(o) = e.cmp_rational(&zero) {
            return Ok(Comparison::from_ordering(o));
        }
        // a width that stops shrinking (decimal literal) cannot get better
        let w = e.width();
        if last_width.as_ref() == Some(&w) {
            return Ok(Comparison::Undecided);
        }
        last_width = Some(w);
    }
    Ok(Comparison::Undecided)
}

/// Compare `x` against the rational `t`.
pub fn compare(x: &RealExpr, t: &BigRational, prec: &Precision) -> Comparison {
    if let Some(r) = x.as_rational() {
        return Comparison::from_ordering(r.cmp(t));
    }
    let y = x.add_rational(&-t);
    decide(prec, |bits| Ok(y.enclose(bits))).unwrap_or(Comparison::Undecided)
}

/// Compare `‖x‖` against the rational `t`.
pub fn compare_dist(x: &RealExpr, t: &BigRational, prec: &Precision) -> Comparison {
    if let Some(r) = x.as_rational() {
        return Comparison::from_ordering(frac_dist_rational(r).1.cmp(t));
    }
    decide(prec, |bits| Ok(&dist_enclosure(&x.enclose(bits)) - &Enclosure::exact(t.clone())))
        .unwrap_or(Comparison::Undecided)
}

/// Nearest integer with ties going down, so that x − n ∈ (−1/2, 1/2].
pub fn nearest_int(x: &BigRational) -> BigInt {
    (x - BigRational::new(BigInt::one(), BigInt::from(2))).ceil().to_integer()
}

/// ({x}, ‖x‖) for a rational x.
pub fn frac_dist_rational(x: &BigRational) -> (BigRational, BigRational) {
    let s = x - BigRational::from_integer(nearest_int(x));
    let d = s.abs();
    (s, d)
}

/// Enclosure of ‖x‖ over every x in `e`.
pub fn dist_enclosure(e: &Enclosure) -> Enclosure {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if let Some(v) = e.exact_value() {
        return Enclosure::exact(frac_dist_rational(v).1);
    }
    let dl = frac_dist_rational(e.lo()).1;
    let dh = frac_dist_rational(e.hi()).1;
    let contains_int = e.lo().ceil() <= e.hi().floor();
    let shifted = Enclosure::new(e.lo() - &half, e.hi() - &half);
    let contains_half = shifted.lo().ceil() <= shifted.hi().floor();
    let lo = if contains_int { BigRational::zero() } else { dl.clone().min(dh.clone()) };
    let hi = if contains_half { half } else { dl.max(dh) };
    Enclosure::new(lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracDist {
    /// {x} ∈ (−1/2, 1/2]
    pub signed_frac: Enclosure,
    /// ‖x‖ ∈ [0, 1/2]
    pub dist: Enclosure,
    /// whether the nearest integer was determined
    pub decided: bool,
}

/// Signed fractional part and distance to the nearest integer.
pub fn frac_and_dist(x: &RealExpr, bits: u32, prec: &Precision) -> Result<FracDist> {
    prec.check(bits)?;
    if let Some(r) = x.as_rational() {
        let (s, d) = frac_dist_rational(r);
        return Ok(FracDist { signed_frac: Enclosure::exact(s), dist: Enclosure::exact(d), decided: true });
    }
    Ok(frac_and_dist_enclosure(&x.enclose(bits)))
}

pub fn frac_and_dist_enclosure(e: &Enclosure) -> FracDist {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let nl = nearest_int(e.lo());
    let nh = nearest_int(e.hi());
    if nl == nh {
        let n = BigRational::from_integer(nl);
        let s = e.shift(&-n);
        let dist = s.abs();
        return FracDist { signed_frac: s, dist, decided: true };
    }
    FracDist { signed_frac: Enclosure::new(-&half, half), dist: dist_enclosure(e), decided: false }
}

/// x mod 1 in [0, 1) when the integer part is decided.
pub fn frac01_enclosure(e: &Enclosure) -> Option<Enclosure> {
    let fl = e.lo().floor();
    if fl != e.hi().floor() {
        return None;
    }
    Some(e.shift(&-fl))
}

/// Decide x mod 1 ∈ [a, b) for 0 ≤ a ≤ b ≤ 1.
pub fn in_half_open(x: &RealExpr, a: &BigRational, b: &BigRational, prec: &Precision) -> Comparison {
    if a >= b {
        return Comparison::Less;
    }
    let member = |v: &BigRational| {
        let f = v - v.floor();
        &f >= a && &f < b
    };
    if let Some(r) = x.as_rational() {
        return if member(r) { Comparison::Equal } else { Comparison::Less };
    }
    // Equal means "inside", Less means "outside"
    for bits in prec.schedule() {
        let e = x.enclose(bits);
        if let Some(f) = frac01_enclosure(&e) {
            if f.lo() >= a && f.hi() < b {
                return Comparison::Equal;
            }
            if f.hi() < a || f.lo() >= b {
                return Comparison::Less;
            }
        }
        if x.has_literal() {
            break;
        }
    }
    Comparison::Undecided
}

pub fn half() -> BigRational {
    int(1) / int(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::enclosure::rat;
    use crate::realnum::param::RealParam;

    fn p(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn frac_examples() {
        let prec = Precision::default();
        let f = frac_and_dist(&RealExpr::rational(rat(3, 4)), 10, &prec).unwrap();
        assert_eq!(f.signed_frac, Enclosure::exact(rat(-1, 4)));
        assert_eq!(f.dist, Enclosure::exact(rat(1, 4)));
        let g = frac_and_dist(&RealExpr::rational(rat(-13, 10)), 10, &prec).unwrap();
        assert_eq!(g.dist, Enclosure::exact(rat(3, 10)));
        let h = frac_and_dist(&RealExpr::rational(rat(1, 2)), 10, &prec).unwrap();
        assert_eq!(h.signed_frac, Enclosure::exact(rat(1, 2)));
        let k = frac_and_dist(&RealExpr::rational(rat(-1, 2)), 10, &prec).unwrap();
        assert_eq!(k.signed_frac, Enclosure::exact(rat(1, 2)));
    }

    #[test]
    fn undecided_nearest_integer_widens() {
        let f = frac_and_dist_enclosure(&Enclosure::new(rat(49, 100), rat(51, 100)));
        assert!(!f.decided);
        assert!(f.dist.contains(&rat(49, 100)) && f.dist.contains(&rat(1, 2)));
        let d = dist_enclosure(&Enclosure::new(rat(-1, 100), rat(3, 100)));
        assert_eq!(d, Enclosure::new(rat(0, 1), rat(3, 100)));
    }

    #[test]
    fn compare_examples() {
        let prec = Precision::default();
        assert_eq!(compare_dist(&p("sqrt:2"), &rat(1, 2), &prec), Comparison::Less);
        let x = &RealExpr::rational(rat(3, 7)).mul_int(7) - &RealExpr::integer(3);
        assert_eq!(compare(&x, &rat(0, 1), &prec), Comparison::Equal);
        // this convergent sits above √2: 665857² − 2·470832² = 1
        let c = rat(665857, 470832);
        assert_eq!(compare(&p("sqrt:2"), &c, &prec), Comparison::Less);
        assert_eq!(compare(&p("sqrt:2"), &rat(275807, 195025), &prec), Comparison::Greater);
        // √2 − 1 against 0.4142: decided at 64 bits
        assert_eq!(compare(&p("sqrt:2"), &rat(14142, 10000), &prec), Comparison::Greater);
    }

    #[test]
    fn undecided_only_at_cap() {
        let prec = Precision::default();
        let d = p("dec:1.5@1e-3");
        assert_eq!(compare(&d, &rat(3, 2), &prec), Comparison::Undecided);
        assert_eq!(compare(&d, &rat(2, 1), &prec), Comparison::Less);
        // a comparison needing more than 64 bits still succeeds
        let s2 = p("sqrt:2");
        let t = s2.enclose(200).lo().clone();
        assert_eq!(compare(&s2, &t, &prec), Comparison::Greater);
        let small = Precision { start_bits: 16, cap_bits: 32, allow_literal: false };
        assert_eq!(compare(&s2, &t, &small), Comparison::Undecided);
    }

    #[test]
    fn box_membership() {
        let prec = Precision::default();
        let s = p("sqrt:2");
        assert_eq!(in_half_open(&s, &rat(0, 1), &rat(1, 2), &prec), Comparison::Equal);
        assert_eq!(in_half_open(&s.mul_int(2), &rat(0, 1), &rat(1, 2), &prec), Comparison::Less);
        assert_eq!(in_half_open(&RealExpr::rational(rat(1, 2)), &rat(0, 1), &rat(1, 2), &prec), Comparison::Less);
        assert_eq!(in_half_open(&RealExpr::rational(rat(-1, 2)), &rat(1, 2), &rat(1, 1), &prec), Comparison::Equal);
    }
}
