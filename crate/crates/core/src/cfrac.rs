//! Continued fractions, best approximations, height-truncated Diophantine
//! exponents and the ω(q) schedules.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::realnum::elementary::{log2_enc, log2_rat, sqrt_enc};
use crate::realnum::torus::TorusPoint;
use crate::realnum::{decide, dist_enclosure, int, parse_rational, Comparison, Enclosure, Precision, RealExpr, RealParam};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFExpansion {
    /// a0, a1, …
    pub quotients: Vec<BigInt>,
    /// (p_k, q_k) for each quotient
    pub convergents: Vec<(BigInt, BigInt)>,
    /// the expansion ended (rational input)
    pub terminated: bool,
}

impl CFExpansion {
    fn from_quotients(quotients: Vec<BigInt>, terminated: bool) -> Self {
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p1, mut p2) = (BigInt::one(), BigInt::zero());
        let (mut q1, mut q2) = (BigInt::zero(), BigInt::one());
        for a in &quotients {
            let p = a * &p1 + &p2;
            let q = a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p.clone());
            q2 = std::mem::replace(&mut q1, q.clone());
            convergents.push((p, q));
        }
        CFExpansion { quotients, convergents, terminated }
    }

    pub fn convergent(&self, k: usize) -> BigRational {
        let (p, q) = &self.convergents[k];
        BigRational::new(p.clone(), q.clone())
    }
}

/// Floor-based expansion of a rational, at most `max_terms` quotients.
/// The flag reports whether the expansion ended within the limit.
pub fn cf_of_rational(r: &BigRational, max_terms: usize) -> (Vec<BigInt>, bool) {
    let mut out = Vec::new();
    let (mut n, mut d) = (r.numer().clone(), r.denom().clone());
    while out.len() < max_terms {
        let (a, rem) = n.div_mod_floor(&d);
        out.push(a);
        if rem.is_zero() {
            return (out, true);
        }
        n = d;
        d = rem;
    }
    (out, false)
}

/// First `n` quotients after a0 (so `n + 1` in total), each certified by the
/// enclosure endpoints sharing it.
pub fn expand(alpha: &RealParam, n: usize, prec: &Precision) -> Result<CFExpansion> {
    expand_expr(&RealExpr::from(alpha), n, prec)
}

pub fn expand_expr(x: &RealExpr, n: usize, prec: &Precision) -> Result<CFExpansion> {
    let want = n + 1;
    if let Some(r) = x.as_rational() {
        let (q, done) = cf_of_rational(r, want);
        return Ok(CFExpansion::from_quotients(q, done));
    }
    for bits in prec.schedule() {
        let e = x.enclose(bits);
        let (a, _) = cf_of_rational(e.lo(), want + 1);
        let (b, _) = cf_of_rational(e.hi(), want + 1);
        // a_i is certified when both endpoints agree on it and continue past it
        let mut k = 0;
        while k < want && k + 1 < a.len() && k + 1 < b.len() && a[k] == b[k] {
            k += 1;
        }
        if k >= want {
            return Ok(CFExpansion::from_quotients(a[..want].to_vec(), false));
        }
        if x.has_literal() {
            break;
        }
    }
    Err(Error::CapExceeded { requested: prec.cap_bits.saturating_mul(2), cap: prec.cap_bits })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinDist {
    pub value: Enclosure,
    pub argmin: u64,
}

/// min over 1 ≤ n ≤ N of ‖nα‖ with its argmin, found among the convergent
/// denominators.
pub fn min_dist(alpha: &RealParam, n_max: u64, prec: &Precision) -> Result<MinDist> {
    alpha.require_irrational(true)?;
    assert!(n_max >= 1);
    let x = RealExpr::from(alpha);
    let mut terms = 8;
    let cands: Vec<u64> = loop {
        let cf = expand_expr(&x, terms, prec)?;
        let last = &cf.convergents.last().unwrap().1;
        if *last > BigInt::from(n_max) {
            let mut v: Vec<u64> = cf
                .convergents
                .iter()
                .filter(|(_, q)| *q <= BigInt::from(n_max))
                .map(|(_, q)| q.try_into().unwrap())
                .collect();
            v.dedup();
            break v;
        }
        terms *= 2;
    };
    let mut best = *cands.last().unwrap();
    for &c in cands.iter().rev().skip(1) {
        if cmp_dist(&x, c, best, prec)? == Comparison::Less {
            best = c;
        }
    }
    let value = dist_enclosure(&x.mul_int(best as i64).enclose(128)).round_outward(160);
    Ok(MinDist { value, argmin: best })
}

fn cmp_dist(x: &RealExpr, a: u64, b: u64, prec: &Precision) -> Result<Comparison> {
    let xa = x.mul_int(a as i64);
    let xb = x.mul_int(b as i64);
    decide(prec, |bits| Ok(&dist_enclosure(&xa.enclose(bits)) - &dist_enclosure(&xb.enclose(bits))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Witness {
    Single(u64),
    Pair(i64, i64),
}

impl Witness {
    pub fn height(&self) -> u64 {
        match *self {
            Witness::Single(n) => n,
            Witness::Pair(a, b) => a.unsigned_abs().max(b.unsigned_abs()),
        }
    }
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::Single(n) => write!(f, "({n})"),
            Witness::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileEntry {
    pub n: u64,
    /// enclosure of the max exponent over heights 2..=n
    pub sigma: Enclosure,
    pub witness: Witness,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophantineProfile {
    pub entries: Vec<ProfileEntry>,
}

impl DiophantineProfile {
    pub fn at(&self, n: u64) -> Option<&ProfileEntry> {
        self.entries.iter().find(|e| e.n == n)
    }

    pub fn last(&self) -> &ProfileEntry {
        self.entries.last().expect("empty profile")
    }
}

fn linear_form(gamma: &RealExpr, beta: &RealExpr, w: Witness) -> RealExpr {
    match w {
        Witness::Single(n) => gamma.mul_int(n as i64),
        Witness::Pair(a, b) => &gamma.mul_int(a) + &beta.mul_int(b),
    }
}

/// −log2‖x‖ / log2 h, or None if ‖x‖ is not yet separated from 0.
fn exponent_at(x: &RealExpr, h: u64, bits: u32) -> Option<Enclosure> {
    let d = dist_enclosure(&x.enclose(bits + 8));
    if !d.is_positive() {
        return None;
    }
    let l = log2_enc(&d, bits);
    let lh = log2_rat(&int(h), bits);
    (-l).div(&lh).map(|e| e.round_outward(bits + 4))
}

fn exponent(x: &RealExpr, h: u64, prec: &Precision) -> Result<(u32, Enclosure)> {
    if let Some(r) = x.as_rational() {
        if r.is_integer() {
            return Err(Error::InvalidArgument("zero distance".into()));
        }
    }
    for bits in prec.schedule() {
        if let Some(e) = exponent_at(x, h, bits) {
            return Ok((bits, e));
        }
    }
    Err(Error::Undecided { what: format!("‖{x}‖ > 0") })
}

struct Candidate {
    witness: Witness,
    expr: RealExpr,
    bits: u32,
    exp: Enclosure,
}

impl Candidate {
    fn new(gamma: &RealExpr, beta: &RealExpr, w: Witness, prec: &Precision) -> Result<Self> {
        let expr = linear_form(gamma, beta, w);
        let (bits, exp) = exponent(&expr, w.height(), prec)?;
        Ok(Candidate { witness: w, expr, bits, exp })
    }

    fn refine(&mut self, prec: &Precision) -> bool {
        let next = self.bits.saturating_mul(2);
        if next > prec.cap_bits {
            return false;
        }
        self.bits = next;
        if let Some(e) = exponent_at(&self.expr, self.witness.height(), next) {
            self.exp = e;
        }
        true
    }
}

/// Ordering of two exponents, escalating as needed; None when undecidable.
fn cmp_candidates(a: &mut Candidate, b: &mut Candidate, prec: &Precision) -> Option<Ordering> {
    loop {
        if let Some(o) = a.exp.cmp_enclosure(&b.exp) {
            return Some(o);
        }
        let ra = a.refine(prec);
        let rb = b.refine(prec);
        if !ra && !rb {
            return None;
        }
    }
}

/// Running maximum over heights, producing one profile entry per n.
fn fold_profile(mut per_height: Vec<Candidate>, prec: &Precision) -> DiophantineProfile {
    let mut entries = Vec::with_capacity(per_height.len());
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    let mut best: Option<usize> = None;
    for i in 0..per_height.len() {
        let n = per_height[i].witness.height();
        let c = &per_height[i].exp;
        match best {
            None => {
                lo = c.lo().clone();
                hi = c.hi().clone();
                best = Some(i);
            }
            Some(b) => {
                lo = lo.max(c.lo().clone());
                hi = hi.max(c.hi().clone());
                let (x, y) = per_height.split_at_mut(i);
                let ord = cmp_candidates(&mut y[0], &mut x[b], prec);
                if ord == Some(Ordering::Greater) {
                    best = Some(i);
                }
            }
        }
        let w = per_height[best.unwrap()].witness;
        entries.push(ProfileEntry { n, sigma: Enclosure::new(lo.clone(), hi.clone()), witness: w });
    }
    DiophantineProfile { entries }
}

/// σ_γ(n) for every 2 ≤ n ≤ N.
pub fn sigma_single_profile(gamma: &RealParam, n_max: u64, prec: &Precision) -> Result<DiophantineProfile> {
    gamma.require_irrational(prec.allow_literal)?;
    if n_max < 2 {
        return Err(Error::InvalidArgument("σ needs N ≥ 2".into()));
    }
    let g = RealExpr::from(gamma);
    let zero = RealExpr::zero();
    let cands: Result<Vec<Candidate>> =
        (2..=n_max).into_par_iter().map(|n| Candidate::new(&g, &zero, Witness::Single(n), prec)).collect();
    Ok(fold_profile(cands?, prec))
}

pub fn sigma_single(gamma: &RealParam, n_max: u64, prec: &Precision) -> Result<ProfileEntry> {
    Ok(sigma_single_profile(gamma, n_max, prec)?.last().clone())
}

/// Sign-normalised pairs of exact height h: k1 > 0, or k1 = 0 and k2 > 0.
pub fn pairs_at_height(h: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    if h == 0 {
        return v;
    }
    // k1 = 0
    v.push((0, h));
    for k1 in 1..=h {
        if k1 == h {
            for k2 in -h..=h {
                v.push((k1, k2));
            }
        } else {
            v.push((k1, -h));
            v.push((k1, h));
        }
    }
    v.sort_unstable();
    v
}

/// Pair of height h with the smallest ‖k1γ + k2β‖; ties go to the
/// lexicographically smaller pair.
fn min_pair_at_height(
    g: &RealExpr,
    b: &RealExpr,
    tg: TorusPoint,
    tb: TorusPoint,
    h: i64,
    prec: &Precision,
) -> Result<(i64, i64)> {
    let pairs = pairs_at_height(h);
    let bounds: Vec<(u128, u128)> = pairs.iter().map(|&(k1, k2)| tg.mul(k1).add(tb.mul(k2)).dist_bounds()).collect();
    for (i, &(k1, k2)) in pairs.iter().enumerate() {
        if bounds[i].0 == 0 {
            check_nonzero(g, b, k1, k2)?;
        }
    }
    let min_hi = bounds.iter().map(|b| b.1).min().unwrap();
    let contenders: Vec<usize> = (0..pairs.len()).filter(|&i| bounds[i].0 <= min_hi).collect();
    let mut best = contenders[0];
    for &i in &contenders[1..] {
        let (a1, a2) = pairs[i];
        let (b1, b2) = pairs[best];
        let xa = &g.mul_int(a1) + &b.mul_int(a2);
        let xb = &g.mul_int(b1) + &b.mul_int(b2);
        let c = decide(prec, |bits| Ok(&dist_enclosure(&xa.enclose(bits)) - &dist_enclosure(&xb.enclose(bits))))?;
        if c == Comparison::Less {
            best = i;
        }
    }
    Ok(pairs[best])
}

fn check_nonzero(g: &RealExpr, b: &RealExpr, k1: i64, k2: i64) -> Result<()> {
    let x = &g.mul_int(k1) + &b.mul_int(k2);
    if let Some(r) = x.as_rational() {
        if r.is_integer() {
            return Err(Error::Dependence { k1, k2 });
        }
    }
    Ok(())
}

/// σ_{(γ,β)}(n) for every 2 ≤ n ≤ N.
pub fn sigma_pair_profile(
    gamma: &RealParam,
    beta: &RealParam,
    n_max: u64,
    prec: &Precision,
) -> Result<DiophantineProfile> {
    for p in [gamma, beta] {
        if p.is_literal() && !prec.allow_literal {
            return Err(Error::LiteralRejected(p.to_string()));
        }
    }
    if n_max < 2 {
        return Err(Error::InvalidArgument("σ needs N ≥ 2".into()));
    }
    let g = RealExpr::from(gamma);
    let b = RealExpr::from(beta);
    let tg = TorusPoint::from_expr(&g);
    let tb = TorusPoint::from_expr(&b);
    for (k1, k2) in pairs_at_height(1) {
        check_nonzero(&g, &b, k1, k2)?;
    }
    let mins: Result<Vec<(i64, i64)>> = (2..=n_max as i64)
        .into_par_iter()
        .map(|h| min_pair_at_height(&g, &b, tg, tb, h, prec))
        .collect();
    let cands: Result<Vec<Candidate>> = mins?
        .into_par_iter()
        .map(|(k1, k2)| Candidate::new(&g, &b, Witness::Pair(k1, k2), prec))
        .collect();
    Ok(fold_profile(cands?, prec))
}

pub fn sigma_pair(gamma: &RealParam, beta: &RealParam, n_max: u64, prec: &Precision) -> Result<ProfileEntry> {
    Ok(sigma_pair_profile(gamma, beta, n_max, prec)?.last().clone())
}

/// Re-evaluate a witness and check it reproduces the recorded exponent.
pub fn verify_witness(gamma: &RealParam, beta: Option<&RealParam>, entry: &ProfileEntry, bits: u32) -> bool {
    let g = RealExpr::from(gamma);
    let b = beta.map(RealExpr::from).unwrap_or_else(RealExpr::zero);
    let x = linear_form(&g, &b, entry.witness);
    match exponent_at(&x, entry.witness.height(), bits) {
        Some(e) => e.overlaps(&entry.sigma) && entry.witness.height() <= entry.n,
        None => false,
    }
}

/// The ω(q) schedules: a constant, c/(log2 log2 log2 q)^{1/2}, or
/// c/(log2 log2 q)^{1/2}; the log forms are 1 whenever log2 log2 q ≤ 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OmegaSchedule {
    Constant(BigRational),
    TripleLog(BigRational),
    DoubleLog(BigRational),
}

impl OmegaSchedule {
    pub fn exact(&self, q: u64) -> Option<BigRational> {
        match self {
            OmegaSchedule::Constant(c) => Some(c.clone()),
            _ if q <= 4 => Some(BigRational::one()),
            _ => None,
        }
    }

    pub fn value(&self, q: u64, bits: u32) -> Enclosure {
        if let Some(v) = self.exact(q) {
            return Enclosure::exact(v);
        }
        let inner = bits + 16;
        let l1 = log2_rat(&int(q), inner);
        let l2 = log2_enc(&l1, inner);
        let (c, arg) = match self {
            OmegaSchedule::TripleLog(c) => (c, log2_enc(&l2, inner)),
            OmegaSchedule::DoubleLog(c) => (c, l2),
            OmegaSchedule::Constant(_) => unreachable!(),
        };
        let s = sqrt_enc(&arg, inner);
        let one = Enclosure::exact(c.clone());
        one.div(&s).expect("schedule root is positive").round_outward(bits + 2)
    }

    pub fn describe(&self) -> String {
        match self {
            OmegaSchedule::Constant(c) => format!("{c}"),
            OmegaSchedule::TripleLog(c) => format!("main:{c}"),
            OmegaSchedule::DoubleLog(c) => format!("mono2:{c}"),
        }
    }
}

impl std::str::FromStr for OmegaSchedule {
    type Err = Error;

    /// `c` for a constant, `main:c` for the triple-log and `mono2:c` for the
    /// double-log schedule.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, c) = match s.split_once(':') {
            Some((k, c)) => (k, c),
            None => ("const", s),
        };
        let c = parse_rational(c)?;
        if !c.is_positive() {
            return Err(Error::InvalidArgument(format!("ω parameter must be positive, got {c}")));
        }
        match kind {
            "const" => Ok(OmegaSchedule::Constant(c)),
            "main" => Ok(OmegaSchedule::TripleLog(c)),
            "mono2" => Ok(OmegaSchedule::DoubleLog(c)),
            _ => Err(Error::Parse(format!("unknown ω schedule {kind:?}"))),
        }
    }
}

/// ω(q) = 1 if log2 log2 q ≤ 1, else c/(log2 log2 log2 q)^{1/2}.
pub fn omega_schedule(q: u64, c: &BigRational, bits: u32) -> Enclosure {
    assert!(q >= 1 && c.is_positive());
    OmegaSchedule::TripleLog(c.clone()).value(q, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::{rat, RealParam};
    use num_traits::ToPrimitive;

    fn p(s: &str) -> RealParam {
        s.parse().unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn expansions() {
        let prec = Precision::default();
        let s = expand(&p("sqrt:2"), 4, &prec).unwrap();
        assert_eq!(s.quotients, ints(&[1, 2, 2, 2, 2]));
        let conv: Vec<BigRational> = (0..5).map(|k| s.convergent(k)).collect();
        assert_eq!(conv, vec![rat(1, 1), rat(3, 2), rat(7, 5), rat(17, 12), rat(41, 29)]);
        assert_eq!(expand(&p("const:golden"), 3, &prec).unwrap().quotients, ints(&[1, 1, 1, 1]));
        let r = expand(&p("rat:3/7"), 10, &prec).unwrap();
        assert_eq!(r.quotients, ints(&[0, 2, 3]));
        assert!(r.terminated);
        let e = expand(&p("const:e"), 9, &prec).unwrap();
        assert_eq!(e.quotients, ints(&[2, 1, 2, 1, 1, 4, 1, 1, 6, 1]));
        let pi = expand(&p("const:pi"), 4, &prec).unwrap();
        assert_eq!(pi.quotients, ints(&[3, 7, 15, 1, 292]));
    }

    #[test]
    fn literal_expansion_runs_out() {
        let d = p("dec:1.4142135@1e-7");
        assert!(expand(&d, 3, &Precision::default()).is_ok());
        assert!(matches!(expand(&d, 30, &Precision::default()), Err(Error::CapExceeded { .. })));
    }

    fn brute_min(a: f64, n: u64) -> (f64, u64) {
        let mut best = (1.0, 0);
        for k in 1..=n {
            let x = k as f64 * a;
            let d = (x - x.round()).abs();
            if d < best.0 {
                best = (d, k);
            }
        }
        best
    }

    #[test]
    fn min_dist_examples() {
        let prec = Precision::default();
        let g = min_dist(&p("const:golden"), 5, &prec).unwrap();
        assert_eq!(g.argmin, 5);
        assert!((g.value.to_f64() - 0.0902).abs() < 1e-4);
        let s = min_dist(&p("sqrt:2"), 5, &prec).unwrap();
        assert_eq!(s.argmin, 5);
        assert!((s.value.to_f64() - 0.0711).abs() < 1e-4);
        let one = min_dist(&p("sqrt:3"), 1, &prec).unwrap();
        assert_eq!(one.argmin, 1);
        assert!((one.value.to_f64() - (2.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!(matches!(min_dist(&p("rat:1/3"), 5, &prec), Err(Error::RationalInput(_))));
    }

    #[test]
    fn min_dist_matches_brute_force() {
        let prec = Precision::default();
        for (s, v) in [("sqrt:2", 2f64.sqrt()), ("sqrt:7", 7f64.sqrt()), ("const:pi", std::f64::consts::PI)] {
            for n in [1u64, 2, 3, 10, 57, 113, 400, 1000] {
                let m = min_dist(&p(s), n, &prec).unwrap();
                let (bv, bn) = brute_min(v, n);
                assert_eq!(m.argmin, bn, "{s} N={n}");
                assert!((m.value.to_f64() - bv).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sigma_examples() {
        let prec = Precision::default();
        let s5 = sigma_single(&p("sqrt:2"), 5, &prec).unwrap();
        assert_eq!(s5.witness, Witness::Single(2));
        let oracle = -(2.0 * 2f64.sqrt() - 3.0).abs().log2();
        assert!((s5.sigma.to_f64() - oracle).abs() < 1e-9);
        assert!((s5.sigma.to_f64() - 2.543).abs() < 1e-3);
        let s2 = sigma_single(&p("sqrt:2"), 2, &prec).unwrap();
        assert_eq!(s2.sigma, s5.sigma);
        let pr = sigma_pair(&p("sqrt:2"), &p("sqrt:3"), 2, &prec).unwrap();
        assert_eq!(pr.witness, Witness::Pair(1, -2));
        let v = -((2f64.sqrt() - 2.0 * 3f64.sqrt()).rem_euclid(1.0)).min(1.0 - (2f64.sqrt() - 2.0 * 3f64.sqrt()).rem_euclid(1.0)).log2();
        assert!((pr.sigma.to_f64() - v).abs() < 1e-9);
        assert!((pr.sigma.to_f64() - 4.33).abs() < 5e-3);
        assert!(matches!(
            sigma_pair(&p("sqrt:2"), &p("sqrt:2"), 5, &prec),
            Err(Error::Dependence { k1: 1, k2: -1 })
        ));
        assert!(matches!(sigma_single(&p("rat:1/2"), 5, &prec), Err(Error::RationalInput(_))));
        let lit = p("dec:1.41421356237@1e-11");
        assert!(matches!(sigma_single(&lit, 5, &prec), Err(Error::LiteralRejected(_))));
        assert!(matches!(sigma_pair(&p("sqrt:3"), &lit, 3, &prec), Err(Error::LiteralRejected(_))));
        let loose = prec.allowing_literals();
        let s = sigma_single(&lit, 5, &loose).unwrap();
        assert!((s.sigma.to_f64() - 2.543).abs() < 1e-3);
    }

    #[test]
    fn pair_profile_dominates_single() {
        let prec = Precision::default();
        let g = p("sqrt:2");
        let b = p("sqrt:3");
        let single = sigma_single_profile(&g, 40, &prec).unwrap();
        let pair = sigma_pair_profile(&g, &b, 40, &prec).unwrap();
        for (s, q) in single.entries.iter().zip(&pair.entries) {
            assert!(q.sigma.hi() >= s.sigma.lo());
            assert!(verify_witness(&g, Some(&b), q, 128));
            assert!(verify_witness(&g, None, s, 128));
        }
    }

    #[test]
    fn heights_are_enumerated_once() {
        for h in 1..6 {
            let v = pairs_at_height(h);
            assert_eq!(v.len() as i64, 4 * h);
            assert!(v.iter().all(|&(a, b)| a.abs().max(b.abs()) == h && (a > 0 || (a == 0 && b > 0))));
        }
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_schedule(4, &rat(7, 3), 32), Enclosure::exact(rat(1, 1)));
        assert_eq!(omega_schedule(2, &rat(1, 1), 32), Enclosure::exact(rat(1, 1)));
        assert_eq!(omega_schedule(1, &rat(1, 1), 32), Enclosure::exact(rat(1, 1)));
        let w = omega_schedule(1 << 16, &rat(1, 10), 40);
        assert!(w.contains(&(w.lo().clone())));
        assert!((w.to_f64() - 0.1 / 2f64.sqrt()).abs() < 1e-11);
        assert!(w.width().to_f64().unwrap() < 1e-11);
        let d = OmegaSchedule::DoubleLog(rat(1, 2)).value(1 << 16, 40);
        assert!((d.to_f64() - 0.25).abs() < 1e-11);
        let five = omega_schedule(5, &rat(1, 1), 40).to_f64();
        let l3 = 5f64.log2().log2().log2();
        assert!((five - 1.0 / l3.sqrt()).abs() < 1e-9);
        for s in ["1/4", "main:1", "mono2:1/2"] {
            assert_eq!(s.parse::<OmegaSchedule>().unwrap().describe(), s);
        }
        assert!("main:0".parse::<OmegaSchedule>().is_err());
        assert!("cubic:1".parse::<OmegaSchedule>().is_err());
    }
}
