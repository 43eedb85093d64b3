use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::enclosure::int;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedConstant {
    E,
    Pi,
    Golden,
}

impl NamedConstant {
    pub fn name(self) -> &'static str {
        match self {
            NamedConstant::E => "e",
            NamedConstant::Pi => "pi",
            NamedConstant::Golden => "golden",
        }
    }
}

/// A real parameter: a rational, a quadratic or logarithmic irrational, a
/// named constant, or a decimal literal with a declared radius.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RealParam {
    Rational(BigRational),
    Sqrt(u64),
    Log2(u64),
    Constant(NamedConstant),
    Decimal { value: BigRational, radius: BigRational },
}

impl RealParam {
    pub fn rational(r: BigRational) -> Self {
        RealParam::Rational(r)
    }

    pub fn sqrt(n: u64) -> Result<Self> {
        let s = n.isqrt();
        if n < 2 || s * s == n {
            return Err(Error::InvalidArgument(format!("sqrt:{n} is rational; use rat:{s}")));
        }
        Ok(RealParam::Sqrt(n))
    }

    pub fn log2(n: u64) -> Result<Self> {
        if n < 3 || n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("log2:{n} is rational or undefined")));
        }
        Ok(RealParam::Log2(n))
    }

    pub fn decimal(value: BigRational, radius: BigRational) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidArgument("decimal literal radius must be positive".into()));
        }
        Ok(RealParam::Decimal { value, radius })
    }

    pub fn golden() -> Self {
        RealParam::Constant(NamedConstant::Golden)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealParam::Rational(_))
    }

    pub fn is_irrational(&self) -> bool {
        matches!(self, RealParam::Sqrt(_) | RealParam::Log2(_) | RealParam::Constant(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, RealParam::Decimal { .. })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            RealParam::Rational(r) => Some(r),
            _ => None,
        }
    }

    /// Reject inputs whose use needs a genuinely irrational parameter.
    pub fn require_irrational(&self, allow_literal: bool) -> Result<()> {
        match self {
            RealParam::Rational(_) => Err(Error::RationalInput(self.to_string())),
            RealParam::Decimal { .. } if !allow_literal => Err(Error::LiteralRejected(self.to_string())),
            _ => Ok(()),
        }
    }
}

/// Parse `[-]digits[.digits][e[+-]digits]` exactly.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad decimal `{s}`"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let e = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if e >= 0 {
        BigRational::from_integer(digits * ten.pow(e as u32))
    } else {
        BigRational::new(digits, ten.pow((-e) as u32))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Parse `p/q`, `p`, or a decimal into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        let d: BigInt = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational `{s}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s)
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_decimal(r: &BigRational) -> String {
    // exact decimal if the denominator is 2^a 5^b, otherwise a fraction
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0u32, 0u32);
    while (&d % &two).is_zero() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    let k = a.max(b);
    if !d.is_one() {
        return fmt_rational(r);
    }
    let scaled = (r * int(BigInt::from(10).pow(k))).to_integer();
    if k == 0 {
        return scaled.to_string();
    }
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = format!("{:0>width$}", s, width = k as usize + 1);
    let (a, b) = s.split_at(s.len() - k as usize);
    format!("{}{}.{}", if neg { "-" } else { "" }, a, b)
}

impl fmt::Display for RealParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealParam::Rational(r) => write!(f, "rat:{}", fmt_rational(r)),
            RealParam::Sqrt(n) => write!(f, "sqrt:{n}"),
            RealParam::Log2(n) => write!(f, "log2:{n}"),
            RealParam::Constant(c) => write!(f, "const:{}", c.name()),
            RealParam::Decimal { value, radius } => {
                write!(f, "dec:{}@{}", fmt_decimal(value), fmt_decimal(radius))
            }
        }
    }
}

impl FromStr for RealParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected kind:value, got `{s}`")))?;
        let int_arg = |b: &str| b.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad integer in `{s}`")));
        match kind {
            "rat" => Ok(RealParam::Rational(parse_rational(body)?)),
            "sqrt" => RealParam::sqrt(int_arg(body)?),
            "log2" => RealParam::log2(int_arg(body)?),
            "const" => match body {
                "e" => Ok(RealParam::Constant(NamedConstant::E)),
                "pi" => Ok(RealParam::Constant(NamedConstant::Pi)),
                "golden" | "phi" => Ok(RealParam::golden()),
                _ => Err(Error::Parse(format!("unknown constant `{body}`"))),
            },
            "dec" => {
                let (v, r) = body
                    .split_once('@')
                    .ok_or_else(|| Error::Parse(format!("decimal literal needs @radius: `{s}`")))?;
                RealParam::decimal(parse_decimal(v)?, parse_decimal(r)?)
            }
            _ => Err(Error::Parse(format!("unknown parameter kind `{kind}`"))),
        }
    }
}

impl Serialize for RealParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RealParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::enclosure::rat;

    #[test]
    fn grammar_roundtrip() {
        for s in ["sqrt:2", "log2:3", "rat:3/7", "rat:-2", "const:golden", "const:pi", "dec:1.4142135@0.0000001"] {
            let p: RealParam = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
            assert_eq!(p.to_string().parse::<RealParam>().unwrap(), p);
        }
        let p: RealParam = "dec:1.4142135@1e-7".parse().unwrap();
        assert_eq!(p, RealParam::Decimal { value: rat(14142135, 10000000), radius: rat(1, 10000000) });
    }

    #[test]
    fn rejects_rational_disguises() {
        assert!("sqrt:4".parse::<RealParam>().is_err());
        assert!("sqrt:1".parse::<RealParam>().is_err());
        assert!("log2:8".parse::<RealParam>().is_err());
        assert!("log2:2".parse::<RealParam>().is_err());
        assert!("dec:1.5@0".parse::<RealParam>().is_err());
        assert!("foo:1".parse::<RealParam>().is_err());
    }

    #[test]
    fn kinds() {
        let r: RealParam = "rat:1/3".parse().unwrap();
        assert!(r.is_rational() && !r.is_irrational());
        assert!(matches!(r.require_irrational(false), Err(Error::RationalInput(_))));
        let d: RealParam = "dec:1.41@1e-2".parse().unwrap();
        assert!(!d.is_irrational());
        assert!(d.require_irrational(false).is_err());
        assert!(d.require_irrational(true).is_ok());
        assert!(RealParam::Sqrt(2).is_irrational());
    }

    #[test]
    fn decimals() {
        assert_eq!(parse_decimal("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_decimal("3e2").unwrap(), rat(300, 1));
        assert_eq!(parse_decimal(".5").unwrap(), rat(1, 2));
        assert!(parse_decimal("1.2.3").is_err());
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
        assert_eq!(fmt_decimal(&rat(-1, 40)), "-0.025");
    }
}
