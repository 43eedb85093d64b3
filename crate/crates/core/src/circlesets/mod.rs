//! Finite unions of arcs on R/Z with rational endpoints, the sets
//! A_q = {x : ‖qx − γ‖ < ψ(q)}, and the pairwise intersection lemma.

mod lattice;
mod master;

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{Number, Value};

use crate::realnum::enclosure::{dyadic, floor_scaled};
use crate::realnum::{half, int, tree_sum, Enclosure, RealExpr};
use crate::{Error, Result};

pub use lattice::{overlap_measure, overlap_measure_fixed, pair_geometry, FixedGamma, FixedPsi, PairGeometry, FIXED_BITS};
pub use master::{master_check, master_sweep, pair_sum, BoundCase, IntersectionReport, SweepSummary, Verdict};

/// ψ values per q as enclosures; `None` marks a value that could not be
/// decided (for instance a boundary case of a truncated ψ).
pub trait RadiusSchedule: Sync {
    fn radius(&self, q: u64) -> Option<Enclosure>;
}

/// ψ ≡ c.
#[derive(Clone, Debug)]
pub struct ConstPsi(pub BigRational);

impl RadiusSchedule for ConstPsi {
    fn radius(&self, _q: u64) -> Option<Enclosure> {
        Some(Enclosure::exact(self.0.clone()))
    }
}

/// ψ given by a closure returning exact rationals.
pub struct FnPsi<F: Fn(u64) -> BigRational + Sync>(pub F);

impl<F: Fn(u64) -> BigRational + Sync> RadiusSchedule for FnPsi<F> {
    fn radius(&self, q: u64) -> Option<Enclosure> {
        Some(Enclosure::exact((self.0)(q)))
    }
}

/// Canonical finite union of closed arcs in [0, 1]: sorted, pairwise
/// disjoint and non-touching, no empty arcs. An arc through 0 is stored as
/// two pieces `[a, 1]` and `[0, b]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct CircleSet {
    arcs: Vec<(BigRational, BigRational)>,
}

impl CircleSet {
    pub fn empty() -> Self {
        CircleSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        CircleSet { arcs: vec![(BigRational::zero(), BigRational::one())] }
    }

    /// Union of real intervals `[lo, hi]`, reduced mod 1.
    pub fn from_intervals<I: IntoIterator<Item = (BigRational, BigRational)>>(it: I) -> Self {
        let mut arcs = Vec::new();
        for (lo, hi) in it {
            push_reduced(&mut arcs, lo, hi);
        }
        Self::canonical(arcs)
    }

    /// Union of arcs `[c − r, c + r]`.
    pub fn from_balls<I: IntoIterator<Item = (BigRational, BigRational)>>(it: I) -> Self {
        Self::from_intervals(it.into_iter().map(|(c, r)| (&c - &r, c + r)))
    }

    pub fn canonical(mut arcs: Vec<(BigRational, BigRational)>) -> Self {
        arcs.retain(|(a, b)| a < b);
        arcs.sort();
        let mut out: Vec<(BigRational, BigRational)> = Vec::with_capacity(arcs.len());
        for (a, b) in arcs {
            match out.last_mut() {
                Some((_, hi)) if a <= *hi => {
                    if b > *hi {
                        *hi = b;
                    }
                }
                _ => out.push((a, b)),
            }
        }
        CircleSet { arcs: out }
    }

    pub fn arcs(&self) -> &[(BigRational, BigRational)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> BigRational {
        tree_sum(self.arcs.iter().map(|(a, b)| b - a).collect())
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let f = x - x.floor();
        self.arcs.iter().any(|(a, b)| a <= &f && &f <= b) || (f.is_zero() && self.arcs.last().is_some_and(|(_, b)| b.is_one()))
    }

    pub fn intersect(&self, other: &CircleSet) -> CircleSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.arcs.len() && j < other.arcs.len() {
            let (a1, b1) = &self.arcs[i];
            let (a2, b2) = &other.arcs[j];
            let lo = a1.max(a2);
            let hi = b1.min(b2);
            if lo < hi {
                out.push((lo.clone(), hi.clone()));
            }
            if b1 < b2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::canonical(out)
    }

    pub fn union(&self, other: &CircleSet) -> CircleSet {
        let mut v = self.arcs.clone();
        v.extend(other.arcs.iter().cloned());
        Self::canonical(v)
    }

    /// Union of many sets in one sort.
    pub fn union_all<'a, I: IntoIterator<Item = &'a CircleSet>>(sets: I) -> CircleSet {
        let v: Vec<_> = sets.into_iter().flat_map(|s| s.arcs.iter().cloned()).collect();
        Self::canonical(v)
    }

    pub fn complement(&self) -> CircleSet {
        let mut out = Vec::new();
        let mut prev = BigRational::zero();
        for (a, b) in &self.arcs {
            out.push((prev.clone(), a.clone()));
            prev = b.clone();
        }
        out.push((prev, BigRational::one()));
        Self::canonical(out)
    }

    /// JSON list of arcs, each a pair of `[numerator, denominator]` endpoints.
    pub fn to_json(&self) -> Value {
        let num = |x: &BigInt| Value::Number(Number::from_str(&x.to_string()).unwrap());
        let ep = |r: &BigRational| Value::Array(vec![num(r.numer()), num(r.denom())]);
        Value::Array(self.arcs.iter().map(|(a, b)| Value::Array(vec![ep(a), ep(b)])).collect())
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = || Error::Parse("circle set JSON must be [[[n,d],[n,d]], …]".into());
        let int_of = |v: &Value| -> Result<BigInt> {
            match v {
                Value::Number(n) => n.to_string().parse().map_err(|_| bad()),
                Value::String(s) => s.parse().map_err(|_| bad()),
                _ => Err(bad()),
            }
        };
        let ep = |v: &Value| -> Result<BigRational> {
            let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let d = int_of(&a[1])?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(int_of(&a[0])?, d))
        };
        let arr = v.as_array().ok_or_else(bad)?;
        let mut arcs = Vec::new();
        for arc in arr {
            let a = arc.as_array().filter(|a| a.len() == 2).ok_or_else(bad)?;
            let (lo, hi) = (ep(&a[0])?, ep(&a[1])?);
            if lo.is_negative() || hi > BigRational::one() || lo > hi {
                return Err(bad());
            }
            arcs.push((lo, hi));
        }
        Ok(Self::canonical(arcs))
    }
}

fn push_reduced(arcs: &mut Vec<(BigRational, BigRational)>, lo: BigRational, hi: BigRational) {
    if hi <= lo {
        return;
    }
    if &hi - &lo >= BigRational::one() {
        arcs.push((BigRational::zero(), BigRational::one()));
        return;
    }
    let k = lo.floor();
    let (a, b) = (lo - &k, hi - &k);
    if b <= BigRational::one() {
        arcs.push((a, b));
    } else {
        arcs.push((a, BigRational::one()));
        arcs.push((BigRational::zero(), b - BigRational::one()));
    }
}

/// Bits to which the centre offset of A_q is certified when γ is irrational.
pub const CENTRE_BITS: u32 = 64;

/// γ as a rational centre with a certified slack: |γ − centre| ≤ slack.
pub fn certified_centre(gamma: &RealExpr) -> (BigRational, BigRational) {
    if let Some(r) = gamma.as_rational() {
        return (r.clone(), BigRational::zero());
    }
    let e = gamma.enclose(CENTRE_BITS + 8);
    let m = e.midpoint();
    let scaled = floor_scaled(&(m + dyadic(BigInt::one(), CENTRE_BITS + 1)), CENTRE_BITS);
    let c = dyadic(scaled, CENTRE_BITS);
    let slack = (&c - e.lo()).max(e.hi() - &c);
    (c, slack)
}

/// A_q^{ψ,γ} with rigorous inner and outer approximations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AqSet {
    pub q: u64,
    pub psi: BigRational,
    /// centre slack per arc, δ/q
    pub slack: BigRational,
    /// arcs of radius ψ/q around the rational centres
    pub nominal: CircleSet,
    /// contained in the true set
    pub inner: CircleSet,
    /// contains the true set
    pub outer: CircleSet,
}

impl AqSet {
    /// Rigorous bracket of |A_q|.
    pub fn measure_bounds(&self) -> Enclosure {
        Enclosure::new(self.inner.measure(), self.outer.measure())
    }
}

fn arcs_with_radius(q: u64, centre: &BigRational, r: &BigRational) -> CircleSet {
    if !r.is_positive() {
        return CircleSet::empty();
    }
    let qq = int(q as i64);
    if r * int(2) * &qq >= BigRational::one() {
        return CircleSet::full();
    }
    CircleSet::from_balls((0..q).map(|j| ((centre + int(j as i64)) / &qq, r.clone())))
}

/// Build A_q for 0 < ψ_q < 1/2.
pub fn build_aq(psi: &BigRational, gamma: &RealExpr, q: u64) -> Result<AqSet> {
    if !psi.is_positive() || psi >= &half() {
        return Err(Error::PsiOutOfRange(psi.to_string()));
    }
    assert!(q >= 1);
    let (c, delta) = certified_centre(gamma);
    let qq = int(q as i64);
    let r = psi / &qq;
    let slack = &delta / &qq;
    let nominal = arcs_with_radius(q, &c, &r);
    let (inner, outer) = if slack.is_zero() {
        (nominal.clone(), nominal.clone())
    } else {
        (arcs_with_radius(q, &c, &(&r - &slack)), arcs_with_radius(q, &c, &(&r + &slack)))
    };
    Ok(AqSet { q, psi: psi.clone(), slack, nominal, inner, outer })
}

/// Inner and outer sets for A_q when ψ_q itself is only enclosed; values
/// at or above 1/2 give the whole circle.
pub fn aq_bounds(psi: &Enclosure, gamma: &RealExpr, q: u64) -> (CircleSet, CircleSet) {
    let (c, delta) = certified_centre(gamma);
    let qq = int(q as i64);
    let slack = &delta / &qq;
    let inner = arcs_with_radius(q, &c, &(psi.lo() / &qq - &slack));
    let outer = arcs_with_radius(q, &c, &(psi.hi() / &qq + &slack));
    (inner, outer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::{rat, RealParam};

    fn g(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn build_examples() {
        let a = build_aq(&rat(1, 10), &g("rat:0"), 2).unwrap();
        assert_eq!(
            a.nominal.arcs(),
            &[(rat(0, 1), rat(1, 20)), (rat(9, 20), rat(11, 20)), (rat(19, 20), rat(1, 1))]
        );
        assert_eq!(a.nominal.measure(), rat(1, 5));
        let b = build_aq(&rat(1, 10), &g("rat:1/3"), 1).unwrap();
        assert_eq!(b.nominal.arcs(), &[(rat(7, 30), rat(13, 30))]);
        assert_eq!(build_aq(&rat(1, 10), &g("rat:0"), 3).unwrap().nominal.measure(), rat(1, 5));
        assert!(build_aq(&rat(1, 2), &g("rat:0"), 3).is_err());
        assert!(build_aq(&rat(0, 1), &g("rat:0"), 3).is_err());
    }

    #[test]
    fn irrational_centres_are_bracketed() {
        let a = build_aq(&rat(1, 7), &g("sqrt:2"), 13).unwrap();
        assert_eq!(a.nominal.measure(), rat(2, 7));
        assert!(a.slack.is_positive() && a.slack <= rat(1, 13) * dyadic(BigInt::one(), 64));
        let m = a.measure_bounds();
        assert!(m.contains(&rat(2, 7)));
        assert!(a.inner.intersect(&a.outer) == a.inner);
    }

    #[test]
    fn measures_and_ops() {
        assert_eq!(CircleSet::empty().measure(), rat(0, 1));
        assert_eq!(CircleSet::full().measure(), rat(1, 1));
        let z = g("rat:0");
        let a2 = build_aq(&rat(1, 10), &z, 2).unwrap().nominal;
        let a3 = build_aq(&rat(1, 10), &z, 3).unwrap().nominal;
        assert_eq!(a2.intersect(&a3).measure(), rat(1, 15));
        assert_eq!(a2.intersect(&a2), a2);
        let u = a2.union(&a3);
        assert_eq!(u.measure() + a2.intersect(&a3).measure(), a2.measure() + a3.measure());
        assert_eq!(a2.complement().measure(), rat(4, 5));
        assert_eq!(a2.union(&a2.complement()), CircleSet::full());
    }

    #[test]
    fn wraparound_is_split() {
        let s = CircleSet::from_intervals([(rat(-1, 10), rat(1, 10))]);
        assert_eq!(s.arcs(), &[(rat(0, 1), rat(1, 10)), (rat(9, 10), rat(1, 1))]);
        let t = CircleSet::from_intervals([(rat(19, 10), rat(21, 10))]);
        assert_eq!(s, t);
        assert!(s.contains(&rat(0, 1)) && s.contains(&rat(-1, 20)));
        assert_eq!(CircleSet::from_intervals([(rat(1, 3), rat(7, 3))]), CircleSet::full());
    }

    #[test]
    fn json_roundtrip() {
        let s = CircleSet::from_intervals([(rat(1, 3), rat(1, 2)), (rat(-1, 7), rat(0, 1))]);
        let j = s.to_json();
        assert_eq!(j.to_string(), "[[[1,3],[1,2]],[[6,7],[1,1]]]");
        assert_eq!(CircleSet::from_json(&j).unwrap(), s);
        let big = CircleSet::from_intervals([(dyadic(BigInt::one(), 100), rat(1, 2))]);
        assert_eq!(CircleSet::from_json(&big.to_json()).unwrap(), big);
        assert!(CircleSet::from_json(&serde_json::json!([[1, 2]])).is_err());
    }
}
