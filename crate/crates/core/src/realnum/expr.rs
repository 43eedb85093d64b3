use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;

use super::elementary::{e_const, log2_rat, pi_const, sqrt_rat};
use super::enclosure::{int, Enclosure};
use super::param::{NamedConstant, RealParam};
use crate::arith::factor_u64;
use crate::{Error, Result};

/// Irreducible building block after normalisation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    /// sqrt of a squarefree integer ≥ 2
    Sqrt(u64),
    /// log2 of an odd prime
    Log2(u64),
    E,
    Pi,
    Literal { value: BigRational, radius: BigRational },
}

static ATOM_CACHE: Lazy<Mutex<HashMap<(Atom, u32), Enclosure>>> = Lazy::new(|| Mutex::new(HashMap::new()));

impl Atom {
    /// Enclosure of width ≤ 2^-bits, except literals which keep their radius.
    pub fn enclose(&self, bits: u32) -> Enclosure {
        if let Atom::Literal { value, radius } = self {
            return Enclosure::new(value - radius, value + radius);
        }
        let key = (self.clone(), bits);
        if let Some(e) = ATOM_CACHE.lock().get(&key) {
            return e.clone();
        }
        let e = match self {
            Atom::Sqrt(n) => sqrt_rat(&int(*n), bits),
            Atom::Log2(p) => log2_rat(&int(*p), bits),
            Atom::E => e_const(bits),
            Atom::Pi => pi_const(bits),
            Atom::Literal { .. } => unreachable!(),
        };
        ATOM_CACHE.lock().insert(key, e.clone());
        e
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Sqrt(n) => write!(f, "√{n}"),
            Atom::Log2(p) => write!(f, "log2({p})"),
            Atom::E => write!(f, "e"),
            Atom::Pi => write!(f, "π"),
            Atom::Literal { value, radius } => write!(f, "({value}±{radius})"),
        }
    }
}

/// Rational-linear combination of atoms plus a rational offset.
///
/// Terms are kept sorted by atom with identical atoms merged and zero
/// coefficients dropped, so `√2 − √2` is the exact rational 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealExpr {
    terms: Vec<(Atom, BigRational)>,
    offset: BigRational,
}

/// Precision escalation policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    pub start_bits: u32,
    pub cap_bits: u32,
    /// let decimal literals stand in for irrationals where an operation
    /// needs irrational input
    pub allow_literal: bool,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { start_bits: 64, cap_bits: 4096, allow_literal: false }
    }
}

impl Precision {
    pub fn with_cap(cap_bits: u32) -> Self {
        Precision { start_bits: 64.min(cap_bits), cap_bits, allow_literal: false }
    }

    pub fn allowing_literals(self) -> Self {
        Precision { allow_literal: true, ..self }
    }

    /// start, 2·start, 4·start, … ending exactly at the cap.
    pub fn schedule(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut b = self.start_bits.max(1);
        while b < self.cap_bits {
            out.push(b);
            b = b.saturating_mul(2);
        }
        out.push(self.cap_bits);
        out
    }

    pub fn check(&self, bits: u32) -> Result<()> {
        if bits > self.cap_bits {
            Err(Error::CapExceeded { requested: bits, cap: self.cap_bits })
        } else {
            Ok(())
        }
    }
}

fn ceil_log2_abs(c: &BigRational) -> u32 {
    let n = c.abs().ceil().to_integer();
    if n <= BigInt::one() {
        0
    } else {
        (n - 1u32).bits() as u32
    }
}

impl RealExpr {
    pub fn zero() -> Self {
        RealExpr { terms: Vec::new(), offset: BigRational::zero() }
    }

    pub fn rational(r: BigRational) -> Self {
        RealExpr { terms: Vec::new(), offset: r }
    }

    pub fn integer(n: i64) -> Self {
        Self::rational(int(n))
    }

    pub fn atom(a: Atom, c: BigRational) -> Self {
        RealExpr::zero().plus_atom(a, c)
    }

    fn plus_atom(mut self, a: Atom, c: BigRational) -> Self {
        match self.terms.binary_search_by(|(b, _)| b.cmp(&a)) {
            Ok(i) => {
                self.terms[i].1 += c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => {
                if !c.is_zero() {
                    self.terms.insert(i, (a, c));
                }
            }
        }
        self
    }

    /// `c · p` with `p` normalised into atoms.
    pub fn term(c: BigRational, p: &RealParam) -> Self {
        let mut e = RealExpr::zero();
        match p {
            RealParam::Rational(r) => e.offset = c * r,
            RealParam::Sqrt(n) => {
                let (mut s, mut t) = (1u64, 1u64);
                for (p, k) in factor_u64(*n) {
                    s *= p.pow(k / 2);
                    if k % 2 == 1 {
                        t *= p;
                    }
                }
                let c = c * int(s);
                if t == 1 {
                    e.offset = c;
                } else {
                    e = e.plus_atom(Atom::Sqrt(t), c);
                }
            }
            RealParam::Log2(n) => {
                for (p, k) in factor_u64(*n) {
                    let ck = &c * int(k);
                    if p == 2 {
                        e.offset += ck;
                    } else {
                        e = e.plus_atom(Atom::Log2(p), ck);
                    }
                }
            }
            RealParam::Constant(NamedConstant::E) => e = e.plus_atom(Atom::E, c),
            RealParam::Constant(NamedConstant::Pi) => e = e.plus_atom(Atom::Pi, c),
            RealParam::Constant(NamedConstant::Golden) => {
                let half = &c / int(2);
                e.offset = half.clone();
                e = e.plus_atom(Atom::Sqrt(5), half);
            }
            RealParam::Decimal { value, radius } => {
                e = e.plus_atom(Atom::Literal { value: value.clone(), radius: radius.clone() }, c)
            }
        }
        e
    }

    pub fn terms(&self) -> &[(Atom, BigRational)] {
        &self.terms
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.terms.is_empty().then_some(&self.offset)
    }

    pub fn has_literal(&self) -> bool {
        self.terms.iter().any(|(a, _)| matches!(a, Atom::Literal { .. }))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return RealExpr::zero();
        }
        RealExpr {
            terms: self.terms.iter().map(|(a, k)| (a.clone(), k * c)).collect(),
            offset: &self.offset * c,
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        self.scale(&int(k))
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        RealExpr { terms: self.terms.clone(), offset: &self.offset + r }
    }

    /// Best-effort enclosure: width ≤ 2^-bits unless a literal limits it.
    pub fn enclose(&self, bits: u32) -> Enclosure {
        let mut acc = Enclosure::exact(self.offset.clone());
        let n = self.terms.len() as u32;
        let spread = 1 + (32 - n.leading_zeros());
        for (a, c) in &self.terms {
            let b = bits + spread + ceil_log2_abs(c);
            acc = &acc + &a.enclose(b).scale(c);
        }
        acc
    }

    /// Enclosure of width ≤ 2^-bits, or an error if `bits` is above the cap
    /// or a decimal literal cannot supply that precision.
    pub fn eval(&self, bits: u32, prec: &Precision) -> Result<Enclosure> {
        prec.check(bits)?;
        let e = self.enclose(bits);
        if self.has_literal() && e.width() > super::enclosure::dyadic(BigInt::one(), bits) {
            return Err(Error::LiteralPrecision { literal: self.to_string(), requested: bits });
        }
        Ok(e)
    }
}

impl From<&RealParam> for RealExpr {
    fn from(p: &RealParam) -> Self {
        RealExpr::term(BigRational::one(), p)
    }
}

impl From<RealParam> for RealExpr {
    fn from(p: RealParam) -> Self {
        RealExpr::from(&p)
    }
}

impl From<BigRational> for RealExpr {
    fn from(r: BigRational) -> Self {
        RealExpr::rational(r)
    }
}

impl Add for &RealExpr {
    type Output = RealExpr;
    fn add(self, o: &RealExpr) -> RealExpr {
        let mut e = self.clone();
        e.offset += &o.offset;
        for (a, c) in &o.terms {
            e = e.plus_atom(a.clone(), c.clone());
        }
        e
    }
}

impl Sub for &RealExpr {
    type Output = RealExpr;
    fn sub(self, o: &RealExpr) -> RealExpr {
        self + &(-o)
    }
}

impl Neg for &RealExpr {
    type Output = RealExpr;
    fn neg(self) -> RealExpr {
        self.scale(&int(-1))
    }
}

impl Add for RealExpr {
    type Output = RealExpr;
    fn add(self, o: RealExpr) -> RealExpr {
        &self + &o
    }
}

impl Sub for RealExpr {
    type Output = RealExpr;
    fn sub(self, o: RealExpr) -> RealExpr {
        &self - &o
    }
}

impl Neg for RealExpr {
    type Output = RealExpr;
    fn neg(self) -> RealExpr {
        -&self
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if c.is_one() {
                write!(f, "{a}")?;
            } else {
                write!(f, "{c}·{a}")?;
            }
        }
        if first || !self.offset.is_zero() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{}", self.offset)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::enclosure::{dyadic, rat};

    fn p(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn rational_is_exact() {
        let e = p("rat:3/7").eval(10, &Precision::default()).unwrap();
        assert_eq!(e, Enclosure::exact(rat(3, 7)));
    }

    #[test]
    fn sqrt_two_enclosure() {
        let e = p("sqrt:2").eval(10, &Precision::default()).unwrap();
        assert!(e.width() <= rat(1, 1024));
        assert!(e.lo() < &rat(141422, 100000) && e.hi() > &rat(141421, 100000));
    }

    #[test]
    fn syntactic_cancellation() {
        let x = &p("sqrt:2") - &p("sqrt:2");
        assert_eq!(x.as_rational(), Some(&rat(0, 1)));
        assert_eq!(x.eval(4, &Precision::default()).unwrap(), Enclosure::zero());
        // √8 = 2√2 and log2 12 = 2 + log2 3 normalise onto shared atoms
        let y = &p("sqrt:8") - &p("sqrt:2").mul_int(2);
        assert!(y.as_rational().unwrap().is_zero());
        let z = &p("log2:12") - &p("log2:3");
        assert_eq!(z.as_rational(), Some(&rat(2, 1)));
        let g = &p("const:golden").mul_int(2) - &p("sqrt:5");
        assert_eq!(g.as_rational(), Some(&rat(1, 1)));
    }

    #[test]
    fn cap_is_enforced() {
        let prec = Precision::with_cap(128);
        assert!(matches!(p("sqrt:3").eval(256, &prec), Err(Error::CapExceeded { .. })));
        assert_eq!(Precision::default().schedule(), vec![64, 128, 256, 512, 1024, 2048, 4096]);
        assert_eq!(Precision { start_bits: 100, cap_bits: 300, allow_literal: false }.schedule(), vec![100, 200, 300]);
    }

    #[test]
    fn literal_precision_is_limited() {
        let d = p("dec:1.4142135@1e-7");
        assert!(d.eval(16, &Precision::default()).is_ok());
        assert!(matches!(d.eval(40, &Precision::default()), Err(Error::LiteralPrecision { .. })));
        assert!(d.enclose(40).contains(&rat(14142135, 10000000)));
    }

    #[test]
    fn widths_respect_coefficients() {
        let x = &p("sqrt:2").mul_int(1000) + &p("log2:3").mul_int(-77);
        let x = &x + &p("const:pi").scale(&rat(5, 3));
        for bits in [8, 64, 200] {
            let e = x.eval(bits, &Precision::default()).unwrap();
            assert!(e.width() <= dyadic(BigInt::one(), bits));
        }
        let v = 1000.0 * 2f64.sqrt() - 77.0 * 3f64.log2() + 5.0 / 3.0 * std::f64::consts::PI;
        assert!((x.enclose(64).to_f64() - v).abs() < 1e-9);
    }
}
