//! Kronecker orbit counts, star and extreme discrepancy in one dimension,
//! grid-box discrepancy in two, and Erdős–Turán–Koksma bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::cfrac::pairs_at_height;
use crate::realnum::elementary::{exp2_enc, log2_rat};
use crate::realnum::enclosure::{ceil_scaled, dyadic, floor_scaled};
use crate::realnum::torus::TORUS_BITS;
use crate::realnum::{decide, dist_enclosure, frac01_enclosure, int, Comparison, Enclosure, Precision, RealExpr, RealParam, TorusPoint};
use crate::{Error, Result};

/// A product of half-open intervals [a, b) ⊆ [0, 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfOpenBox {
    pub sides: Vec<(BigRational, BigRational)>,
}

impl HalfOpenBox {
    pub fn new(sides: Vec<(BigRational, BigRational)>) -> Result<Self> {
        for (a, b) in &sides {
            if a.is_negative() || b > &int(1) {
                return Err(Error::InvalidArgument(format!("box side [{a}, {b}) leaves [0, 1]")));
            }
        }
        Ok(HalfOpenBox { sides })
    }

    pub fn unit(dim: usize) -> Self {
        HalfOpenBox { sides: vec![(BigRational::zero(), int(1)); dim] }
    }

    pub fn volume(&self) -> BigRational {
        self.sides.iter().fold(int(1), |v, (a, b)| v * (b - a).max(BigRational::zero()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxCountResult {
    pub q_max: u64,
    pub region: HalfOpenBox,
    pub count: u64,
    /// count − Q·|I|
    pub error: BigRational,
}

/// ⌈r·2^128⌉ clamped to [0, 2^128]; `None` stands for 2^128.
fn cut(r: &BigRational) -> Option<u128> {
    let c = ceil_scaled(r, TORUS_BITS);
    if c.is_negative() {
        Some(0)
    } else {
        c.to_u128()
    }
}

fn below(hi: u128, c: Option<u128>) -> bool {
    c.is_none_or(|c| hi < c)
}

fn at_or_above(lo: u128, c: Option<u128>) -> bool {
    c.is_some_and(|c| lo >= c)
}

/// x mod 1 for x = qα in units of 2^-128, certified.
fn frac_units(t: TorusPoint, x: impl Fn() -> RealExpr, prec: &Precision) -> Result<(u128, u128)> {
    if let Some(b) = t.frac01_bounds() {
        return Ok(b);
    }
    let x = x();
    for bits in prec.schedule() {
        if let Some(f) = frac01_enclosure(&x.enclose(bits.max(TORUS_BITS + 32))) {
            let lo = floor_scaled(f.lo(), TORUS_BITS).to_u128();
            let hi = ceil_scaled(f.hi(), TORUS_BITS).to_u128();
            if let (Some(lo), Some(hi)) = (lo, hi) {
                return Ok((lo, hi));
            }
        }
        if x.has_literal() {
            break;
        }
    }
    Err(Error::Undecided { what: format!("fractional part of {x}") })
}

/// S_I(Q) = #{q ≤ Q : ({qα₁}, …) ∈ I} for one or two parameters.
pub fn box_count(params: &[RealParam], q_max: u64, region: &HalfOpenBox, prec: &Precision) -> Result<BoxCountResult> {
    if params.is_empty() || params.len() > 2 || params.len() != region.sides.len() {
        return Err(Error::InvalidArgument("box_count needs 1 or 2 parameters matching the box".into()));
    }
    let exprs: Vec<RealExpr> = params.iter().map(RealExpr::from).collect();
    let base: Vec<TorusPoint> = exprs.iter().map(TorusPoint::from_expr).collect();
    let cuts: Vec<(Option<u128>, Option<u128>)> = region.sides.iter().map(|(a, b)| (cut(a), cut(b))).collect();
    let hits: Vec<bool> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            for (axis, (e, t)) in exprs.iter().zip(&base).enumerate() {
                let (lo, hi) = frac_units(t.mul_u64(q), || e.mul_int(q as i64), prec)?;
                let (ca, cb) = cuts[axis];
                let inside = at_or_above(lo, ca) && below(hi, cb);
                let outside = below(hi, ca) || at_or_above(lo, cb);
                if outside {
                    return Ok(false);
                }
                if !inside {
                    return Err(Error::Undecided { what: format!("box membership of q={q}") });
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<_>>>()?;
    let count = hits.iter().filter(|&&h| h).count() as u64;
    let error = int(count) - int(q_max) * region.volume();
    Ok(BoxCountResult { q_max, region: region.clone(), count, error })
}

/// Star and extreme discrepancy of {qα}, 1 ≤ q ≤ Q, unnormalised
/// (multiplied by Q, so they measure the count error directly).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Discrepancy1d {
    pub q_max: u64,
    /// Q·D*: sup over anchored intervals [0, t)
    pub star: Enclosure,
    /// Q·D: sup over all intervals
    pub extreme: Enclosure,
}

impl Discrepancy1d {
    /// D* itself.
    pub fn star_normalised(&self) -> Enclosure {
        self.star.scale(&BigRational::new(BigInt::one(), BigInt::from(self.q_max)))
    }
}

/// Orbit points mod 1, sorted by centre value, with the largest error radius.
fn sorted_orbit(alpha: &RealParam, q_max: u64, prec: &Precision) -> Result<(Vec<u128>, u128)> {
    let e = RealExpr::from(alpha);
    let t = TorusPoint::from_expr(&e);
    let pts: Vec<(u128, u128)> =
        (1..=q_max).into_par_iter().map(|q| frac_units(t.mul_u64(q), || e.mul_int(q as i64), prec)).collect::<Result<_>>()?;
    let mut err = 0u128;
    let mut mids: Vec<u128> = pts
        .into_iter()
        .map(|(lo, hi)| {
            err = err.max((hi - lo).div_ceil(2));
            lo + (hi - lo) / 2
        })
        .collect();
    mids.sort_unstable();
    Ok((mids, err))
}

/// Exact Q·D* and Q·D. Sorting centres moves each order statistic by at
/// most the largest error radius, which is added to the enclosure.
pub fn star_discrepancy_1d(alpha: &RealParam, q_max: u64, prec: &Precision) -> Result<Discrepancy1d> {
    alpha.require_irrational(prec.allow_literal)?;
    if q_max == 0 {
        return Err(Error::InvalidArgument("Q must be positive".into()));
    }
    let (pts, err) = sorted_orbit(alpha, q_max, prec)?;
    let one = BigInt::one() << TORUS_BITS as usize;
    let q2 = BigInt::from(2 * q_max);
    let qb = BigInt::from(q_max);
    // units of 2^-129: 2Q·x − (2i − 1)
    let mut star_max = BigInt::zero();
    // units of 2^-128: i − Q·x
    let mut dmax: Option<BigInt> = None;
    let mut dmin: Option<BigInt> = None;
    for (i, &x) in pts.iter().enumerate() {
        let i = i as u64 + 1;
        let xb = BigInt::from(x);
        let s = (&q2 * &xb - BigInt::from(2 * i - 1) * &one).abs();
        if s > star_max {
            star_max = s;
        }
        let d = BigInt::from(i) * &one - &qb * &xb;
        if dmax.as_ref().is_none_or(|m| &d > m) {
            dmax = Some(d.clone());
        }
        if dmin.as_ref().is_none_or(|m| &d < m) {
            dmin = Some(d);
        }
    }
    let slack = dyadic(BigInt::from(err) * &qb, TORUS_BITS);
    let star = dyadic(star_max, TORUS_BITS + 1) + int(1) / int(2);
    let extreme = int(1) + dyadic(dmax.unwrap() - dmin.unwrap(), TORUS_BITS);
    let star_lo = (&star - &slack).max(int(1) / int(2));
    let ext_lo = (&extreme - &slack * int(2)).max(int(1));
    Ok(Discrepancy1d {
        q_max,
        star: Enclosure::new(star_lo, star + &slack),
        extreme: Enclosure::new(ext_lo, extreme + slack * int(2)),
    })
}

/// Brackets of the 2D box discrepancy sup_I |E_I| from grid-aligned boxes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDiscrepancy {
    pub q_max: u64,
    pub m: u64,
    pub lower: BigRational,
    pub upper: BigRational,
    /// grid box [i/m, j/m) × [k/m, l/m) attaining the lower value
    pub argmax: (u64, u64, u64, u64),
}

fn cell(t: TorusPoint, x: impl Fn() -> RealExpr, m: u64, prec: &Precision) -> Result<usize> {
    let (lo, hi) = frac_units(t, &x, prec)?;
    let idx = |v: u128| ((BigInt::from(v) * BigInt::from(m)) >> TORUS_BITS as usize).to_usize().unwrap();
    let (a, b) = (idx(lo), idx(hi));
    if a == b {
        return Ok(a);
    }
    // straddles a grid line: settle with more bits
    let x = x();
    for bits in prec.schedule() {
        if let Some(f) = frac01_enclosure(&x.enclose(bits)) {
            let a = (f.lo() * int(m)).floor();
            if a == (f.hi() * int(m)).floor() {
                return Ok(a.to_integer().to_usize().unwrap());
            }
        }
    }
    Err(Error::Undecided { what: format!("grid cell of {x}") })
}

/// max |E| over all m²(m+1)²/4 grid boxes; the upper bracket adds 4Q/m.
pub fn disc2d_grid(alpha: &RealParam, beta: &RealParam, q_max: u64, m: u64, prec: &Precision) -> Result<GridDiscrepancy> {
    if m == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    let (ea, eb) = (RealExpr::from(alpha), RealExpr::from(beta));
    let (ta, tb) = (TorusPoint::from_expr(&ea), TorusPoint::from_expr(&eb));
    let cells: Vec<(usize, usize)> = (1..=q_max)
        .into_par_iter()
        .map(|q| {
            let a = cell(ta.mul_u64(q), || ea.mul_int(q as i64), m, prec)?;
            let b = cell(tb.mul_u64(q), || eb.mul_int(q as i64), m, prec)?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let n = m as usize;
    let mut pre = vec![0i64; (n + 1) * (n + 1)];
    for (a, b) in cells {
        pre[(a + 1) * (n + 1) + b + 1] += 1;
    }
    for i in 1..=n {
        for j in 1..=n {
            pre[i * (n + 1) + j] += pre[(i - 1) * (n + 1) + j] + pre[i * (n + 1) + j - 1] - pre[(i - 1) * (n + 1) + j - 1];
        }
    }
    let p = |i: usize, j: usize| pre[i * (n + 1) + j] as i128;
    let (m2, q) = ((m * m) as i128, q_max as i128);
    // |E|·m² for each box, maximised over rows in parallel
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (0i128, (0u64, 0u64, 0u64, 0u64));
            for j in i + 1..=n {
                for k in 0..n {
                    for l in k + 1..=n {
                        let c = p(j, l) - p(i, l) - p(j, k) + p(i, k);
                        let e = (c * m2 - q * ((j - i) * (l - k)) as i128).abs();
                        if e > best.0 {
                            best = (e, (i as u64, j as u64, k as u64, l as u64));
                        }
                    }
                }
            }
            best
        })
        .reduce(|| (0, (0, 0, 0, 0)), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1 && a.0 > 0) { b } else { a });
    let lower = BigRational::new(BigInt::from(best.0), BigInt::from(m2));
    let upper = &lower + BigRational::new(BigInt::from(4 * q_max), BigInt::from(m));
    Ok(GridDiscrepancy { q_max, m, lower, upper, argmax: best.1 })
}

const TERM_BITS: u32 = 64;

/// Bounds of 1/(w·‖x‖) in units of 2^-64, where x = k₁α + k₂β.
fn recip_term(t: TorusPoint, x: impl Fn() -> RealExpr, w: u64, k: (i64, i64), prec: &Precision) -> Result<(BigInt, BigInt)> {
    let (dlo, dhi) = t.dist_bounds();
    if dlo > 0 {
        let num = BigInt::one() << (TERM_BITS + TORUS_BITS) as usize;
        let wb = BigInt::from(w);
        let lo = &num / (&wb * BigInt::from(dhi));
        let den = &wb * BigInt::from(dlo);
        let hi = (&num + &den - 1u32) / &den;
        return Ok((lo, hi));
    }
    let x = x();
    if x.as_rational().is_some_and(|r| r.is_integer()) {
        return Err(Error::Dependence { k1: k.0, k2: k.1 });
    }
    for bits in prec.schedule() {
        let d = dist_enclosure(&x.enclose(bits.max(2 * TORUS_BITS)));
        if d.lo().is_positive() {
            let r = d.recip().unwrap().scale(&BigRational::new(BigInt::one(), BigInt::from(w)));
            return Ok((floor_scaled(r.lo(), TERM_BITS), ceil_scaled(r.hi(), TERM_BITS)));
        }
        if x.has_literal() {
            break;
        }
    }
    Err(Error::Undecided { what: format!("‖{x}‖ > 0") })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtkBound {
    pub n: u64,
    pub h: u64,
    /// bound at the requested H
    pub bound: Enclosure,
    /// contribution of the frequency shell max|k| = h, for h = 1..=H
    pub shells: Vec<Enclosure>,
    /// bound at every H' ≤ H, index H' − 1
    pub per_h: Vec<Enclosure>,
}

impl EtkBound {
    pub fn at(&self, h: u64) -> Option<&Enclosure> {
        self.per_h.get((h as usize).checked_sub(1)?)
    }
}

/// Σ over the shell max|k| = h as (lo, hi) in units of 2^-64, with the
/// ETK weights 4/(|k|+1)-style folded into integer denominators.
fn shell_sum(exprs: &[RealExpr], tor: &[TorusPoint], h: u64, prec: &Precision) -> Result<(BigInt, BigInt)> {
    let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
    if exprs.len() == 1 {
        let k = h as i64;
        let (a, b) = recip_term(tor[0].mul(k), || exprs[0].mul_int(k), h + 1, (k, 0), prec)?;
        lo += a;
        hi += b;
    } else {
        for (k1, k2) in pairs_at_height(h as i64) {
            let t = tor[0].mul(k1).add(tor[1].mul(k2));
            let w = (k1.unsigned_abs() + 1) * (k2.unsigned_abs() + 1);
            let (a, b) = recip_term(t, || &exprs[0].mul_int(k1) + &exprs[1].mul_int(k2), w, (k1, k2), prec)?;
            lo += a;
            hi += b;
        }
        // pairs_at_height keeps one of ±k
        lo *= 2;
        hi *= 2;
    }
    Ok((lo, hi))
}

/// 9N/H + 72·Σ_{k=1}^{H} 1/((k+1)‖kα‖) in one dimension and
/// 9N/H + 72·Σ′ 1/((|k₁|+1)(|k₂|+1)‖k₁α+k₂β‖) in two.
pub fn etk_bound(params: &[RealParam], n: u64, h: u64, prec: &Precision) -> Result<EtkBound> {
    if params.is_empty() || params.len() > 2 {
        return Err(Error::InvalidArgument("ETK needs 1 or 2 parameters".into()));
    }
    if n == 0 || h == 0 {
        return Err(Error::InvalidArgument("N and H must be positive".into()));
    }
    let exprs: Vec<RealExpr> = params.iter().map(RealExpr::from).collect();
    let tor: Vec<TorusPoint> = exprs.iter().map(TorusPoint::from_expr).collect();
    if exprs.len() == 2 {
        // dependence at height 1 must surface as an error whatever the order
        for (k1, k2) in pairs_at_height(1) {
            let x = &exprs[0].mul_int(k1) + &exprs[1].mul_int(k2);
            if x.as_rational().is_some_and(|r| r.is_integer()) {
                return Err(Error::Dependence { k1, k2 });
            }
        }
    }
    let raw: Vec<(BigInt, BigInt)> = (1..=h).into_par_iter().map(|k| shell_sum(&exprs, &tor, k, prec)).collect::<Result<_>>()?;
    let c72 = int(72);
    let shells: Vec<Enclosure> =
        raw.iter().map(|(a, b)| Enclosure::new(dyadic(a.clone(), TERM_BITS), dyadic(b.clone(), TERM_BITS)).scale(&c72)).collect();
    let mut per_h = Vec::with_capacity(h as usize);
    let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
    for (k, (a, b)) in raw.iter().enumerate() {
        lo += a;
        hi += b;
        let head = BigRational::new(BigInt::from(9 * n), BigInt::from(k as u64 + 1));
        let s = Enclosure::new(dyadic(lo.clone(), TERM_BITS), dyadic(hi.clone(), TERM_BITS)).scale(&c72);
        per_h.push(s.shift(&head));
    }
    Ok(EtkBound { n, h, bound: per_h.last().unwrap().clone(), shells, per_h })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutoH {
    pub h: u64,
    pub sigma: BigRational,
    /// the ETK bound at the chosen H
    pub etk: EtkBound,
    /// 9N(1/H + (8000σ/N)·log₂H·H^σ)
    pub chain: Enclosure,
    /// chain / (N^{σ/(σ+1)}·(log₂N)^{1/(σ+1)})
    pub implied_constant: Enclosure,
}

const AUTO_BITS: u32 = 96;

/// 8000σ·log₂H·H^{σ+1} − N; H qualifies when this is ≥ 0.
fn auto_margin(h: u64, sigma: &BigRational, n: u64, bits: u32) -> Enclosure {
    let lh = log2_rat(&int(h), bits);
    let pw = exp2_enc(&lh.scale(&(sigma + int(1))), bits);
    (&(&lh * &pw) * &Enclosure::exact(int(8000) * sigma)).shift(&-int(n))
}

fn qualifies(h: u64, sigma: &BigRational, n: u64, prec: &Precision) -> Result<bool> {
    if h < 2 {
        return Ok(false);
    }
    match decide(prec, |bits| Ok(auto_margin(h, sigma, n, bits.max(AUTO_BITS))))? {
        Comparison::Less => Ok(false),
        Comparison::Greater | Comparison::Equal => Ok(true),
        Comparison::Undecided => Err(Error::Undecided { what: format!("H = {h} against the optimised-H condition") }),
    }
}

/// Smallest H ≥ 1 with 1/H ≤ (8000σ/N)·log₂H·H^σ, and the bounds it gives.
pub fn etk_auto_h(gamma: &RealParam, beta: &RealParam, n: u64, sigma: &BigRational, prec: &Precision) -> Result<AutoH> {
    if !sigma.is_positive() {
        return Err(Error::InvalidArgument(format!("σ must be positive, got {sigma}")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    // the margin increases with H: gallop, then bisect
    let mut hi = 2u64;
    while !qualifies(hi, sigma, n, prec)? {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if qualifies(mid, sigma, n, prec)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let h = hi;
    let etk = etk_bound(&[gamma.clone(), beta.clone()], n, h, prec)?;
    let bits = AUTO_BITS;
    let lh = log2_rat(&int(h), bits);
    let hs = exp2_enc(&lh.scale(sigma), bits);
    let tail = (&lh * &hs).scale(&(int(8000) * sigma / int(n)));
    let chain = tail.shift(&BigRational::new(BigInt::one(), BigInt::from(h))).scale(&int(9 * n));
    let s1 = sigma + int(1);
    let ln = log2_rat(&int(n), bits);
    let norm = if n == 1 {
        // log₂1 = 0 makes the comparison form degenerate
        Enclosure::zero()
    } else {
        let a = exp2_enc(&ln.scale(&(sigma / &s1)), bits);
        let llog = crate::realnum::elementary::log2_enc(&ln, bits);
        let b = exp2_enc(&llog.scale(&(int(1) / &s1)), bits);
        &a * &b
    };
    let implied_constant = chain.div(&norm).unwrap_or_else(|| Enclosure::new(BigRational::zero(), int(i64::MAX)));
    Ok(AutoH { h, sigma: sigma.clone(), etk, chain, implied_constant })
}
