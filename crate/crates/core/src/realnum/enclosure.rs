use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Closed rational interval `[lo, hi]` known to contain some real value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// `floor(r * 2^bits)`.
pub fn floor_scaled(r: &BigRational, bits: u32) -> BigInt {
    (r.numer() << bits as usize).div_floor(r.denom())
}

/// `ceil(r * 2^bits)`.
pub fn ceil_scaled(r: &BigRational, bits: u32) -> BigInt {
    -((-r.numer() << bits as usize).div_floor(r.denom()))
}

pub fn dyadic(n: BigInt, bits: u32) -> BigRational {
    BigRational::new(n, BigInt::one() << bits as usize)
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "enclosure with lo > hi");
        Enclosure { lo, hi }
    }

    pub fn exact(x: BigRational) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn zero() -> Self {
        Self::exact(BigRational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Self::exact(int(n))
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn into_bounds(self) -> (BigRational, BigRational) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn radius(&self) -> BigRational {
        self.width() / int(2)
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Widen by `r` on both sides.
    pub fn inflate(&self, r: &BigRational) -> Enclosure {
        Enclosure::new(&self.lo - r, &self.hi + r)
    }

    /// Ordering against `t` when the enclosure decides it.
    pub fn cmp_rational(&self, t: &BigRational) -> Option<Ordering> {
        if &self.hi < t {
            Some(Ordering::Less)
        } else if &self.lo > t {
            Some(Ordering::Greater)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Ordering of two enclosed values when decided.
    pub fn cmp_enclosure(&self, other: &Enclosure) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_exact() && other.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            Enclosure {
                lo: BigRational::zero(),
                hi: (-&self.lo).max(self.hi.clone()),
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Enclosure {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if c.is_negative() {
            Enclosure { lo: b, hi: a }
        } else {
            Enclosure { lo: a, hi: b }
        }
    }

    pub fn shift(&self, c: &BigRational) -> Enclosure {
        Enclosure { lo: &self.lo + c, hi: &self.hi + c }
    }

    pub fn recip(&self) -> Option<Enclosure> {
        if self.contains_zero() {
            return None;
        }
        Some(Enclosure { lo: self.hi.recip(), hi: self.lo.recip() })
    }

    pub fn div(&self, other: &Enclosure) -> Option<Enclosure> {
        other.recip().map(|r| self * &r)
    }

    pub fn powi(&self, k: u32) -> Enclosure {
        let mut acc = Enclosure::exact(BigRational::one());
        for _ in 0..k {
            acc = &acc * self;
        }
        if k % 2 == 0 && k > 0 && self.contains_zero() {
            acc.lo = BigRational::zero();
        }
        acc
    }

    pub fn min(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    pub fn max(&self, other: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    /// Clamp both ends into `[a, b]`.
    pub fn clamp(&self, a: &BigRational, b: &BigRational) -> Enclosure {
        let c = |x: &BigRational| x.clone().max(a.clone()).min(b.clone());
        Enclosure { lo: c(&self.lo), hi: c(&self.hi) }
    }

    /// Replace the endpoints by dyadics with `bits` fractional bits, rounding outward.
    pub fn round_outward(&self, bits: u32) -> Enclosure {
        if self.lo.denom().is_one() && self.hi.denom().is_one() {
            return self.clone();
        }
        Enclosure {
            lo: dyadic(floor_scaled(&self.lo, bits), bits),
            hi: dyadic(ceil_scaled(&self.hi, bits), bits),
        }
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, o: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, o: &Enclosure) -> Enclosure {
        Enclosure { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }
}

impl Neg for &Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -&self.hi, hi: -&self.lo }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, o: &Enclosure) -> Enclosure {
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return Enclosure { lo: &self.lo * &o.lo, hi: &self.hi * &o.hi };
        }
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Enclosure { lo, hi }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Enclosure {
            type Output = Enclosure;
            fn $m(self, o: Enclosure) -> Enclosure {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        -&self
    }
}

/// Sum of exact rationals by pairwise reduction; keeps intermediate denominators small.
pub fn tree_sum(mut v: Vec<BigRational>) -> BigRational {
    if v.is_empty() {
        return BigRational::zero();
    }
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop().unwrap()
}

/// Accumulates enclosures into a dyadic lo/hi pair with outward rounding.
#[derive(Clone, Debug)]
pub struct DyadicSum {
    bits: u32,
    lo: BigInt,
    hi: BigInt,
}

impl DyadicSum {
    pub fn new(bits: u32) -> Self {
        DyadicSum { bits, lo: BigInt::zero(), hi: BigInt::zero() }
    }

    pub fn add(&mut self, e: &Enclosure) {
        self.lo += floor_scaled(&e.lo, self.bits);
        self.hi += ceil_scaled(&e.hi, self.bits);
    }

    /// Add raw scaled bounds (units of 2^-bits).
    pub fn add_scaled(&mut self, lo: &BigInt, hi: &BigInt) {
        self.lo += lo;
        self.hi += hi;
    }

    pub fn merge(&mut self, other: &DyadicSum) {
        assert_eq!(self.bits, other.bits);
        self.lo += &other.lo;
        self.hi += &other.hi;
    }

    pub fn total(&self) -> Enclosure {
        Enclosure::new(dyadic(self.lo.clone(), self.bits), dyadic(self.hi.clone(), self.bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_contains_products() {
        let a = Enclosure::new(rat(-1, 2), rat(3, 2));
        let b = Enclosure::new(rat(2, 1), rat(3, 1));
        let p = &a * &b;
        assert_eq!(p, Enclosure::new(rat(-3, 2), rat(9, 2)));
        assert_eq!((&a - &a).lo(), &rat(-2, 1));
        assert_eq!(a.abs(), Enclosure::new(rat(0, 1), rat(3, 2)));
        assert!(a.recip().is_none());
        assert_eq!(b.recip().unwrap(), Enclosure::new(rat(1, 3), rat(1, 2)));
    }

    #[test]
    fn outward_rounding_contains() {
        let e = Enclosure::new(rat(1, 3), rat(2, 3));
        let r = e.round_outward(8);
        assert!(r.contains_enclosure(&e));
        assert!(r.width() <= e.width() + rat(2, 256));
        let n = Enclosure::new(rat(-1, 3), rat(-1, 5)).round_outward(4);
        assert!(n.contains(&rat(-1, 3)) && n.contains(&rat(-1, 5)));
    }

    #[test]
    fn scaled_floor_and_ceil() {
        assert_eq!(floor_scaled(&rat(-1, 3), 2), BigInt::from(-2));
        assert_eq!(ceil_scaled(&rat(-1, 3), 2), BigInt::from(-1));
        assert_eq!(ceil_scaled(&rat(1, 4), 2), BigInt::from(1));
    }

    #[test]
    fn tree_sum_matches_fold() {
        let v: Vec<_> = (1..40).map(|k| rat(1, k)).collect();
        let f = v.iter().fold(BigRational::zero(), |a, b| a + b);
        assert_eq!(tree_sum(v), f);
    }
}
