//! Approximation functions ψ, the rotation ‖qβ − γ′‖ and the truncated ψ′.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cfrac::OmegaSchedule;
use crate::circlesets::RadiusSchedule;
use crate::realnum::elementary::{exp2_enc, log2_enc, log2_rat};
use crate::realnum::enclosure::{ceil_scaled, floor_scaled};
use crate::realnum::torus::TORUS_BITS;
use crate::realnum::{decide, dist_enclosure, frac_dist_rational, half, int, parse_rational, Comparison, Enclosure, Precision, RealExpr, RealParam, TorusPoint};
use crate::{Error, Result};

/// Working precision for ψ values used in sums.
pub const PSI_BITS: u32 = 96;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    /// ψ ≡ c
    Constant,
    /// c/q
    Inv,
    /// c/(q·(log₂q)^a·(log₂log₂q)^b)
    LogPower { a: u32, b: BigRational },
    /// explicit values ψ(q₀), ψ(q₀+1), …
    Table(Vec<BigRational>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxFunction {
    pub family: Family,
    pub c: BigRational,
    /// first q at which the formula is defined and below 1/2
    pub q0: u64,
}

impl ApproxFunction {
    pub fn constant(c: BigRational) -> Result<Self> {
        if !c.is_positive() || c >= half() {
            return Err(Error::PsiOutOfRange(format!("constant {c}")));
        }
        Ok(ApproxFunction { family: Family::Constant, c, q0: 1 })
    }

    pub fn inv(c: BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::PsiOutOfRange(format!("c/q with c = {c}")));
        }
        let q0 = (&c * int(2)).floor().to_integer().to_u64().unwrap_or(u64::MAX - 1) + 1;
        Ok(ApproxFunction { family: Family::Inv, c, q0 })
    }

    pub fn log_power(c: BigRational, a: u32, b: BigRational) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::PsiOutOfRange(format!("log family with c = {c}")));
        }
        let qmin = if !b.is_zero() { 3 } else if a > 0 { 2 } else { 1 };
        let mut f = ApproxFunction { family: Family::LogPower { a, b }, c, q0: qmin };
        f.q0 = f.find_q0(qmin)?;
        Ok(f)
    }

    /// c/(q·log₂q·(log₂log₂q)²)
    pub fn gallagher(c: BigRational) -> Result<Self> {
        Self::log_power(c, 1, int(2))
    }

    /// c/(q·(log₂q)²·(log₂log₂q)^{1/2})
    pub fn mono2(c: BigRational) -> Result<Self> {
        Self::log_power(c, 2, int(1) / int(2))
    }

    pub fn table(q0: u64, values: Vec<BigRational>) -> Result<Self> {
        if q0 == 0 || values.is_empty() {
            return Err(Error::InvalidArgument("table needs q0 ≥ 1 and at least one value".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_positive() || *v >= &half()) {
            return Err(Error::PsiOutOfRange(format!("table value {v}")));
        }
        Ok(ApproxFunction { family: Family::Table(values), c: int(1), q0 })
    }

    fn find_q0(&self, qmin: u64) -> Result<u64> {
        let prec = Precision::default();
        let below = |q: u64| -> Result<bool> {
            match decide(&prec, |bits| Ok(self.formula(q, bits).shift(&-half())))? {
                Comparison::Less => Ok(true),
                Comparison::Greater | Comparison::Equal => Ok(false),
                Comparison::Undecided => Err(Error::Undecided { what: format!("ψ({q}) < 1/2") }),
            }
        };
        if below(qmin)? {
            return Ok(qmin);
        }
        // the log families decrease on their domain: gallop, then bisect
        let mut hi = qmin.max(2);
        while !below(hi)? {
            hi = hi.checked_mul(2).ok_or_else(|| Error::InvalidArgument("ψ stays above 1/2".into()))?;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// The formula without the domain check.
    fn formula(&self, q: u64, bits: u32) -> Enclosure {
        let qq = int(q);
        match &self.family {
            Family::Constant => Enclosure::exact(self.c.clone()),
            Family::Inv => Enclosure::exact(&self.c / qq),
            Family::LogPower { a, b } => {
                let inner = bits + 16;
                let l = log2_rat(&qq, inner);
                let mut den = l.powi(*a).scale(&qq);
                if !b.is_zero() {
                    let ll = log2_enc(&l, inner);
                    den = &den * &exp2_enc(&log2_enc(&ll, inner).scale(b), inner);
                }
                Enclosure::exact(self.c.clone()).div(&den).expect("positive denominator").round_outward(bits + 2)
            }
            Family::Table(v) => Enclosure::exact(v[(q - self.q0) as usize].clone()),
        }
    }

    /// ψ(q) as an enclosure of width about 2^-bits.
    pub fn eval(&self, q: u64, bits: u32) -> Result<Enclosure> {
        if q < self.q0 {
            return Err(Error::Domain { q, q0: self.q0 });
        }
        if let Family::Table(v) = &self.family {
            if q - self.q0 >= v.len() as u64 {
                return Err(Error::InvalidArgument(format!("q = {q} is past the end of the ψ table")));
            }
        }
        Ok(self.formula(q, bits))
    }

    pub fn psi_eval(&self, q: u64) -> Result<Enclosure> {
        self.eval(q, PSI_BITS)
    }

    pub fn is_monotone(&self) -> bool {
        match &self.family {
            Family::Table(v) => v.windows(2).all(|w| w[1] <= w[0]),
            Family::LogPower { b, .. } => !b.is_negative(),
            _ => true,
        }
    }

    /// Last q covered (tables only).
    pub fn q_end(&self) -> Option<u64> {
        match &self.family {
            Family::Table(v) => Some(self.q0 + v.len() as u64 - 1),
            _ => None,
        }
    }
}

impl RadiusSchedule for ApproxFunction {
    fn radius(&self, q: u64) -> Option<Enclosure> {
        if q < self.q0 {
            return Some(Enclosure::zero());
        }
        self.psi_eval(q).ok()
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ApproxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = fmt_rat(&self.c);
        match &self.family {
            Family::Constant => write!(f, "const:{c}"),
            Family::Inv => write!(f, "inv:{c}"),
            Family::LogPower { a, b } => write!(f, "log:{c}:{a}:{}", fmt_rat(b)),
            Family::Table(v) => {
                let vs: Vec<String> = v.iter().map(fmt_rat).collect();
                write!(f, "table:{}:{}", self.q0, vs.join(","))
            }
        }
    }
}

/// `const:C`, `inv:C`, `log:C:A:B`, `gallagher:C`, `mono2:C`, `table:Q0:v1,v2,…`
impl FromStr for ApproxFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("bad ψ specification `{s}`"));
        match parts.as_slice() {
            ["const", c] => Self::constant(parse_rational(c)?),
            ["inv", c] => Self::inv(parse_rational(c)?),
            ["gallagher", c] => Self::gallagher(parse_rational(c)?),
            ["mono2", c] => Self::mono2(parse_rational(c)?),
            ["log", c, a, b] => Self::log_power(parse_rational(c)?, a.parse().map_err(|_| bad())?, parse_rational(b)?),
            ["table", q0, vs] => {
                let vals = vs.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                Self::table(q0.parse().map_err(|_| bad())?, vals)
            }
            _ => Err(bad()),
        }
    }
}

/// The rotation q ↦ ‖qβ − γ′‖ together with the scale q^{−ω(q)}.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub beta: RealParam,
    pub gamma_p: RealParam,
    pub omega: OmegaSchedule,
    be: RealExpr,
    ge: RealExpr,
    tb: TorusPoint,
    tg: TorusPoint,
}

/// Where ‖qβ − γ′‖ falls relative to the cells [2^l q^{−ω}, 2^{l+1} q^{−ω}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Cell(u32),
    /// below q^{−ω}
    Outside,
    /// qβ − γ′ is an integer
    Degenerate,
    Undecided,
}

const SCALE_BITS: u32 = 96;

impl Rotation {
    pub fn new(beta: RealParam, gamma_p: RealParam, omega: OmegaSchedule) -> Self {
        let be = RealExpr::from(&beta);
        let ge = RealExpr::from(&gamma_p);
        let (tb, tg) = (TorusPoint::from_expr(&be), TorusPoint::from_expr(&ge));
        Rotation { beta, gamma_p, omega, be, ge, tb, tg }
    }

    pub fn expr(&self, q: u64) -> RealExpr {
        &self.be.mul_int(q as i64) - &self.ge
    }

    pub fn torus(&self, q: u64) -> TorusPoint {
        self.tb.mul_u64(q).sub(self.tg)
    }

    /// ‖qβ − γ′‖ as an enclosure from the torus path.
    pub fn dist(&self, q: u64) -> Enclosure {
        self.torus(q).dist()
    }

    /// ‖qβ − γ′‖ as a certified positive enclosure, refining when the
    /// torus bounds touch zero.
    pub fn dist_positive(&self, q: u64, prec: &Precision) -> Option<Enclosure> {
        if let Some(r) = self.expr(q).as_rational() {
            let d = frac_dist_rational(r).1;
            return d.is_positive().then(|| Enclosure::exact(d));
        }
        let d = self.dist(q);
        if d.lo().is_positive() {
            return Some(d);
        }
        let x = self.expr(q);
        for bits in prec.schedule() {
            let d = dist_enclosure(&x.enclose(bits.max(2 * TORUS_BITS)));
            if d.lo().is_positive() {
                return Some(d);
            }
        }
        None
    }

    pub fn is_degenerate(&self, q: u64) -> bool {
        self.expr(q).as_rational().is_some_and(|r| r.is_integer())
    }

    /// q^{−ω(q)}, exact when ω(q) is an integer.
    pub fn scale(&self, q: u64, bits: u32) -> Enclosure {
        let qq = int(q);
        match self.omega.exact(q) {
            Some(w) if w.is_integer() => {
                let n = w.to_integer().to_i32().expect("ω out of range");
                Enclosure::exact(num_traits::pow::Pow::pow(&qq, -n))
            }
            Some(w) => exp2_enc(&log2_rat(&qq, bits + 8).scale(&-w), bits),
            None => {
                let w = self.omega.value(q, bits + 8);
                exp2_enc(&(&w * &log2_rat(&qq, bits + 8)).scale(&-int(1)), bits)
            }
        }
    }

    /// Sign of ‖qβ − γ′‖ − s·q^{−ω(q)}.
    pub fn compare_scaled(&self, q: u64, s: &BigRational, prec: &Precision) -> Comparison {
        let (dlo, dhi) = self.torus(q).dist_bounds();
        let t = self.scale(q, SCALE_BITS).scale(s);
        if let (Some(tlo), Some(thi)) = (floor_scaled(t.lo(), TORUS_BITS).to_u128(), ceil_scaled(t.hi(), TORUS_BITS).to_u128()) {
            if thi > 0 && dlo >= thi {
                return Comparison::Greater;
            }
            if dhi < tlo {
                return Comparison::Less;
            }
        }
        let x = self.expr(q);
        decide(prec, |bits| Ok(&dist_enclosure(&x.enclose(bits.max(SCALE_BITS))) - &self.scale(q, bits.max(SCALE_BITS)).scale(s)))
            .unwrap_or(Comparison::Undecided)
    }

    /// The cell index l with 2^l q^{−ω} ≤ ‖qβ − γ′‖ < 2^{l+1} q^{−ω}.
    pub fn level(&self, q: u64, prec: &Precision) -> Level {
        if self.is_degenerate(q) {
            return Level::Degenerate;
        }
        let ge = |c: Comparison| matches!(c, Comparison::Greater | Comparison::Equal);
        match self.compare_scaled(q, &int(1), prec) {
            Comparison::Less => return Level::Outside,
            Comparison::Undecided => return Level::Undecided,
            _ => {}
        }
        // first guess from floating point, then walk to the certified cell
        let d = self.dist(q).to_f64();
        let t = self.scale(q, 53).to_f64();
        let mut l = if d > 0.0 && t > 0.0 { (d / t).log2().floor().max(0.0) as u32 } else { 0 };
        for _ in 0..64 {
            let lower = self.compare_scaled(q, &int(BigInt::one() << l as usize), prec);
            if lower == Comparison::Undecided {
                return Level::Undecided;
            }
            if !ge(lower) {
                l = l.saturating_sub(1);
                continue;
            }
            let upper = self.compare_scaled(q, &int(BigInt::one() << (l + 1) as usize), prec);
            match upper {
                Comparison::Less => return Level::Cell(l),
                Comparison::Undecided => return Level::Undecided,
                _ => l += 1,
            }
        }
        Level::Undecided
    }
}

/// ψ′(q) = ψ(q)/‖qβ − γ′‖ on the support ‖qβ − γ′‖ ∈ [q^{−ω}, 1), else 0.
#[derive(Clone, Debug)]
pub struct PsiPrime {
    pub base: ApproxFunction,
    pub rot: Rotation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiPrimeValue {
    Inside(Enclosure),
    Outside,
    Degenerate,
    Undecided,
}

impl PsiPrimeValue {
    /// The value with boundary cases counted as absent.
    pub fn value(&self) -> Option<Enclosure> {
        match self {
            PsiPrimeValue::Inside(e) => Some(e.clone()),
            PsiPrimeValue::Outside | PsiPrimeValue::Degenerate => Some(Enclosure::zero()),
            PsiPrimeValue::Undecided => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        matches!(self, PsiPrimeValue::Inside(_))
    }
}

impl PsiPrime {
    pub fn new(base: ApproxFunction, beta: RealParam, gamma_p: RealParam, omega: OmegaSchedule) -> Self {
        PsiPrime { base, rot: Rotation::new(beta, gamma_p, omega) }
    }

    pub fn support(&self, q: u64, prec: &Precision) -> PsiPrimeValue {
        if self.rot.is_degenerate(q) {
            return PsiPrimeValue::Degenerate;
        }
        match self.rot.compare_scaled(q, &int(1), prec) {
            Comparison::Less => PsiPrimeValue::Outside,
            Comparison::Undecided => PsiPrimeValue::Undecided,
            _ => PsiPrimeValue::Inside(Enclosure::zero()),
        }
    }

    pub fn psi_prime(&self, q: u64, prec: &Precision) -> Result<PsiPrimeValue> {
        let psi = self.base.psi_eval(q)?;
        Ok(match self.support(q, prec) {
            PsiPrimeValue::Inside(_) => match self.rot.dist_positive(q, prec) {
                Some(d) => PsiPrimeValue::Inside(exact_or_rounded(psi.div(&d).unwrap())),
                None => PsiPrimeValue::Undecided,
            },
            other => other,
        })
    }
}

pub(crate) fn exact_or_rounded(e: Enclosure) -> Enclosure {
    if e.is_exact() {
        e
    } else {
        e.round_outward(PSI_BITS)
    }
}

impl RadiusSchedule for PsiPrime {
    fn radius(&self, q: u64) -> Option<Enclosure> {
        if q < self.base.q0 {
            return Some(Enclosure::zero());
        }
        self.psi_prime(q, &Precision::default()).ok()?.value()
    }
}
