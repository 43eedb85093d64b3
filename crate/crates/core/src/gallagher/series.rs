//! Borel–Cantelli ratios and truncated union measures.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::circlesets::{aq_bounds, overlap_measure, overlap_measure_fixed, CircleSet, FixedGamma, FixedPsi, RadiusSchedule, FIXED_BITS};
use crate::realnum::{half, int, tree_sum, Enclosure, RealExpr};
use crate::{Error, Result};

/// Largest Q for which the all-rational path sums exact fractions.
pub const EXACT_BC_LIMIT: u64 = 400;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BCRow {
    pub q: u64,
    /// Σ_{q' ≤ q} |A_{q'}|
    pub measure_sum: Enclosure,
    /// Σ_{q', q'' ≤ q} |A_{q'} ∩ A_{q''}|, diagonal included
    pub pair_sum: Enclosure,
    /// measure_sum² / pair_sum, absent while every set is empty
    pub ratio: Option<Enclosure>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BCSeries {
    pub rows: Vec<BCRow>,
    /// exact rational arithmetic throughout (otherwise 2^-64 fixed point)
    pub exact: bool,
    /// q with an undecided ψ value, left out of every sum
    pub undecided: Vec<u64>,
}

impl BCSeries {
    pub fn last(&self) -> &BCRow {
        self.rows.last().expect("at least one row")
    }

    pub fn ratio(&self) -> Result<Enclosure> {
        self.last().ratio.clone().ok_or_else(|| Error::ZeroDenominator("every ψ value is 0".into()))
    }
}

fn ratio(num: &Enclosure, den: &Enclosure) -> Option<Enclosure> {
    if !den.lo().is_positive() {
        return None;
    }
    num.powi(2).div(den)
}

fn rows_from(diag: Vec<Enclosure>, off: Vec<Enclosure>) -> Vec<BCRow> {
    let (mut m_lo, mut m_hi) = (BigRational::zero(), BigRational::zero());
    let (mut p_lo, mut p_hi) = (BigRational::zero(), BigRational::zero());
    let mut rows = Vec::with_capacity(diag.len());
    for (i, (d, o)) in diag.iter().zip(&off).enumerate() {
        m_lo += d.lo();
        m_hi += d.hi();
        p_lo += d.lo() + o.lo() * int(2);
        p_hi += d.hi() + o.hi() * int(2);
        let measure_sum = Enclosure::new(m_lo.clone(), m_hi.clone());
        let pair_sum = Enclosure::new(p_lo.clone(), p_hi.clone());
        let ratio = ratio(&measure_sum, &pair_sum);
        rows.push(BCRow { q: i as u64 + 1, measure_sum, pair_sum, ratio });
    }
    rows
}

/// Borel–Cantelli ratio (Σ|A_q|)² / Σ_{q,q'}|A_q ∩ A_{q'}| for every Q' ≤ Q.
pub fn bc_ratio(psi: &dyn RadiusSchedule, gamma: &RealExpr, q_max: u64) -> Result<BCSeries> {
    if q_max < 2 {
        return Err(Error::InvalidArgument("bc_ratio needs Q ≥ 2".into()));
    }
    let radii: Vec<Option<Enclosure>> = (1..=q_max).into_par_iter().map(|q| psi.radius(q)).collect();
    let undecided: Vec<u64> = (1..=q_max).filter(|&q| radii[(q - 1) as usize].is_none()).collect();
    let all_exact = radii.iter().all(|r| r.as_ref().is_none_or(Enclosure::is_exact));
    let exact = gamma.as_rational().is_some() && all_exact && q_max <= EXACT_BC_LIMIT;
    let (diag, off) = if exact {
        let r: Vec<Enclosure> = radii.iter().map(|r| r.clone().unwrap_or_else(Enclosure::zero).clamp(&BigRational::zero(), &half())).collect();
        let diag: Vec<Enclosure> = r.iter().map(|e| e.scale(&int(2))).collect();
        let off: Vec<Enclosure> = (1..=q_max)
            .into_par_iter()
            .map(|q| {
                let v: Vec<BigRational> = (1..q)
                    .map(|qp| overlap_measure(q, qp, &r[(q - 1) as usize], &r[(qp - 1) as usize], gamma).into_bounds().0)
                    .collect();
                Enclosure::exact(tree_sum(v))
            })
            .collect();
        (diag, off)
    } else {
        let table = FixedPsi::from_radii(&radii);
        let g = FixedGamma::new(gamma);
        let unit = |v: i128| BigRational::new(BigInt::from(v), BigInt::from(1u128 << FIXED_BITS));
        let diag: Vec<Enclosure> = (1..=q_max)
            .map(|q| {
                let (lo, hi) = table.bounds(q);
                Enclosure::new(unit(2 * lo), unit(2 * hi))
            })
            .collect();
        let off: Vec<Enclosure> = (1..=q_max)
            .into_par_iter()
            .map(|q| {
                let (mut lo, mut hi) = (0i128, 0i128);
                for qp in 1..q {
                    let (a, b) = overlap_measure_fixed(q, qp, &table, &g);
                    lo += a;
                    hi += b;
                }
                Enclosure::new(unit(lo), unit(hi))
            })
            .collect();
        (diag, off)
    };
    let rows = rows_from(diag, off);
    if rows.last().unwrap().ratio.is_none() {
        return Err(Error::ZeroDenominator("every ψ value is 0".into()));
    }
    Ok(BCSeries { rows, exact, undecided })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnionRow {
    pub q: u64,
    /// |⋃_{q₀ ≤ q' ≤ q} A_{q'}|
    pub measure: Enclosure,
}

const UNION_BITS: u32 = 64;

/// |⋃_{q=Q₀}^{Q'} A_q| for every Q₀ ≤ Q' ≤ Q.
pub fn union_series(psi: &dyn RadiusSchedule, gamma: &RealExpr, q_start: u64, q_max: u64) -> Result<Vec<UnionRow>> {
    if q_start == 0 || q_start > q_max {
        return Err(Error::InvalidArgument(format!("need 1 ≤ Q0 ≤ Q, got Q0={q_start}, Q={q_max}")));
    }
    let unknown = Enclosure::new(BigRational::zero(), half());
    let sets: Vec<(CircleSet, CircleSet)> = (q_start..=q_max)
        .into_par_iter()
        .map(|q| {
            let r = psi.radius(q).unwrap_or_else(|| unknown.clone());
            let r = if r.is_exact() { r } else { r.round_outward(UNION_BITS) };
            aq_bounds(&r, gamma, q)
        })
        .collect();
    let (mut inner, mut outer) = (CircleSet::empty(), CircleSet::empty());
    let mut rows = Vec::with_capacity(sets.len());
    for (q, (i, o)) in (q_start..).zip(sets) {
        inner = inner.union(&i);
        outer = outer.union(&o);
        rows.push(UnionRow { q, measure: Enclosure::new(inner.measure(), outer.measure()) });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlesets::{ConstPsi, FnPsi};
    use crate::realnum::{rat, RealParam};

    fn g(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn bc_examples() {
        let s = bc_ratio(&ConstPsi(rat(1, 10)), &g("rat:0"), 3).unwrap();
        assert!(s.exact);
        assert_eq!(s.ratio().unwrap(), Enclosure::exact(rat(27, 80)));
        // identical sets: ratio is the common measure
        let s = bc_ratio(&FnPsi(|q| if q == 1 { rat(1, 5) } else { rat(1, 5) }), &g("rat:0"), 2).unwrap();
        assert_eq!(s.rows[0].ratio, Some(Enclosure::exact(rat(2, 5))));
        // A_1 with γ = 1/2 and A_2 with γ = 1/2 are disjoint for small ψ
        let s = bc_ratio(&FnPsi(|q| if q == 1 { rat(1, 10) } else { rat(1, 20) }), &g("rat:1/2"), 2).unwrap();
        assert_eq!(s.ratio().unwrap(), Enclosure::exact(rat(1, 5) + rat(1, 10)));
    }

    #[test]
    fn fixed_path_brackets_exact() {
        let psi = FnPsi(|q| rat(1, 4 * q as i64));
        let exact = bc_ratio(&psi, &g("rat:1/3"), 120).unwrap();
        assert!(exact.exact);
        let g13 = g("rat:1/3");
        let fixed = bc_ratio_fixed_for_test(&psi, &g13, 120);
        for (a, b) in exact.rows.iter().zip(&fixed.rows) {
            assert!(b.pair_sum.contains_enclosure(&a.pair_sum));
            assert!(b.measure_sum.contains_enclosure(&a.measure_sum));
        }
    }

    fn bc_ratio_fixed_for_test(psi: &dyn RadiusSchedule, gamma: &RealExpr, q: u64) -> BCSeries {
        // a ψ value given only as an enclosure forces the fixed path
        struct Widen<'a>(&'a dyn RadiusSchedule);
        impl RadiusSchedule for Widen<'_> {
            fn radius(&self, q: u64) -> Option<Enclosure> {
                let r = self.0.radius(q)?;
                Some(Enclosure::new(r.lo().clone(), r.hi() + rat(1, 1 << 62) * rat(1, 1 << 40)))
            }
        }
        bc_ratio(&Widen(psi), gamma, q).unwrap()
    }

    #[test]
    fn irrational_ratio_in_unit_interval() {
        let s = bc_ratio(&FnPsi(|q| rat(1, 4 * q as i64)), &g("sqrt:3"), 300).unwrap();
        assert!(!s.exact);
        for row in &s.rows {
            let r = row.ratio.as_ref().unwrap();
            assert!(r.lo().is_positive() && r.hi() <= &int(1), "q={}", row.q);
        }
        assert_eq!(bc_ratio(&ConstPsi(rat(0, 1)), &g("rat:0"), 3), Err(Error::ZeroDenominator("every ψ value is 0".into())));
    }

    #[test]
    fn union_examples() {
        let rows = union_series(&ConstPsi(rat(1, 10)), &g("rat:0"), 1, 6).unwrap();
        assert_eq!(rows[0].measure, Enclosure::exact(rat(1, 5)));
        assert_eq!(rows[1].measure, Enclosure::exact(rat(3, 10)));
        for w in rows.windows(2) {
            assert!(w[0].measure.hi() <= w[1].measure.lo());
        }
        let rows = union_series(&FnPsi(|q| rat(1, 4 * q as i64)), &g("sqrt:2"), 1, 40).unwrap();
        for r in &rows {
            assert!(r.measure.width() < rat(1, 1 << 50));
        }
    }
}
