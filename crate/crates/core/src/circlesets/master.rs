//! The intersection lemma: case split on Δ against H·gcd and the two bounds.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::lattice::{overlap_measure, pair_geometry};
use super::RadiusSchedule;
use crate::realnum::{compare_dist, half, int, tree_sum, Comparison, Enclosure, Precision, RealExpr};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundCase {
    /// Δ < H·gcd
    I,
    /// Δ ≥ H·gcd
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionReport {
    pub q: u64,
    pub qp: u64,
    pub gcd: u64,
    pub delta: BigRational,
    pub case: BoundCase,
    /// I_{Δ/gcd} evaluated at {γ(q' − q)/gcd}, closed interval convention
    pub indicator: u8,
    pub measure: Enclosure,
    pub bound: BigRational,
    pub verdict: Verdict,
    /// smallest C₀ ≥ 0 making the case II bound hold
    pub min_c0: Option<BigRational>,
}

fn verdict(measure: &Enclosure, bound: &BigRational) -> Verdict {
    if measure.hi() <= bound {
        Verdict::Holds
    } else if measure.lo() > bound {
        Verdict::Fails
    } else {
        Verdict::Undecided
    }
}

/// Check |A_q ∩ A_{q'}| against the bound of the intersection lemma.
pub fn master_check(
    psi: &(dyn Fn(u64) -> BigRational + Sync),
    gamma: &RealExpr,
    q: u64,
    qp: u64,
    h: u64,
    c0: &BigRational,
    prec: &Precision,
) -> Result<IntersectionReport> {
    if qp == 0 || qp >= q {
        return Err(Error::InvalidArgument(format!("need 1 ≤ q' < q, got q={q}, q'={qp}")));
    }
    if h < 3 {
        return Err(Error::InvalidArgument(format!("H must be at least 3, got {h}")));
    }
    if c0 <= &int(1) {
        return Err(Error::InvalidArgument(format!("C0 must exceed 1, got {c0}")));
    }
    let (pq, pqp) = (psi(q), psi(qp));
    for (k, p) in [(q, &pq), (qp, &pqp)] {
        if !p.is_positive() || p >= &half() {
            return Err(Error::PsiOutOfRange(format!("psi({k}) = {p}")));
        }
    }
    let geo = pair_geometry(q, qp, &pq, &pqp);
    let g = geo.g;
    let x = gamma.scale(&BigRational::new(BigInt::from(qp as i64 - q as i64), BigInt::from(g)));
    let indicator = match compare_dist(&x, &geo.u, prec) {
        Comparison::Less | Comparison::Equal => 1u8,
        Comparison::Greater => 0,
        Comparison::Undecided => {
            return Err(Error::Undecided { what: format!("indicator for q={q}, q'={qp}") });
        }
    };
    let case = if geo.delta < int(h * g) { BoundCase::I } else { BoundCase::II };
    // ‖x‖ > U leaves no lattice term inside the support
    let measure = if indicator == 0 {
        Enclosure::zero()
    } else {
        overlap_measure(q, qp, &Enclosure::exact(pq.clone()), &Enclosure::exact(pqp.clone()), gamma)
    };
    let (qq, qqp) = (int(q), int(qp));
    let (bound, min_c0) = match case {
        BoundCase::I => {
            let m = (&pq / &qq).min(&pqp / &qqp);
            (int(2 * (2 * h + 1) * g) * m * int(indicator as u64), None)
        }
        BoundCase::II => {
            let pp = int(4) * &pq * &pqp;
            let two_h = int(2 * h);
            let bound = &pp * (int(1) + c0 / &two_h);
            let need = ((measure.hi() / &pp - int(1)) * &two_h).max(BigRational::zero());
            (bound, Some(need))
        }
    };
    let verdict = verdict(&measure, &bound);
    Ok(IntersectionReport { q, qp, gcd: g, delta: geo.delta, case, indicator, measure, bound, verdict, min_c0 })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    pub pairs: u64,
    pub case_i: u64,
    pub case_ii: u64,
    pub holds: u64,
    pub fails: u64,
    pub case_i_fails: u64,
    pub undecided: u64,
    pub max_min_c0: Option<BigRational>,
    /// the case II pair needing the largest C₀
    pub worst: Option<IntersectionReport>,
}

impl SweepSummary {
    fn absorb(&mut self, r: Option<IntersectionReport>) {
        self.pairs += 1;
        let Some(r) = r else {
            self.undecided += 1;
            return;
        };
        match r.case {
            BoundCase::I => self.case_i += 1,
            BoundCase::II => self.case_ii += 1,
        }
        match r.verdict {
            Verdict::Holds => self.holds += 1,
            Verdict::Fails => {
                self.fails += 1;
                if r.case == BoundCase::I {
                    self.case_i_fails += 1;
                }
            }
            Verdict::Undecided => self.undecided += 1,
        }
        if let Some(c) = &r.min_c0 {
            if self.max_min_c0.as_ref().is_none_or(|m| c > m) {
                self.max_min_c0 = Some(c.clone());
                self.worst = Some(r);
            }
        }
    }
}

/// Run `master_check` over every pair 1 ≤ q' < q ≤ Q.
pub fn master_sweep(
    psi: &(dyn Fn(u64) -> BigRational + Sync),
    gamma: &RealExpr,
    q_max: u64,
    h: u64,
    c0: &BigRational,
    prec: &Precision,
) -> Result<SweepSummary> {
    let rows: Vec<Vec<Option<IntersectionReport>>> = (2..=q_max)
        .into_par_iter()
        .map(|q| {
            (1..q)
                .map(|qp| match master_check(psi, gamma, q, qp, h, c0, prec) {
                    Ok(r) => Ok(Some(r)),
                    Err(Error::Undecided { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = SweepSummary::default();
    for r in rows.into_iter().flatten() {
        s.absorb(r);
    }
    Ok(s)
}

/// Σ_{1 ≤ q' < q ≤ Q} |A_q ∩ A_{q'}|, exact when γ and ψ are.
pub fn pair_sum(psi: &dyn RadiusSchedule, gamma: &RealExpr, q_max: u64) -> Enclosure {
    let unknown = Enclosure::new(BigRational::zero(), half());
    let radii: Vec<Enclosure> = (0..=q_max).map(|q| if q == 0 { Enclosure::zero() } else { psi.radius(q).unwrap_or_else(|| unknown.clone()) }).collect();
    let rows: Vec<(BigRational, BigRational)> = (2..=q_max)
        .into_par_iter()
        .map(|q| {
            let (lo, hi): (Vec<_>, Vec<_>) = (1..q)
                .map(|qp| overlap_measure(q, qp, &radii[q as usize], &radii[qp as usize], gamma).into_bounds())
                .unzip();
            (tree_sum(lo), tree_sum(hi))
        })
        .collect();
    let (lo, hi): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Enclosure::new(tree_sum(lo), tree_sum(hi))
}

#[cfg(test)]
mod tests {
    use super::super::{build_aq, ConstPsi};
    use super::*;
    use crate::realnum::{rat, RealParam};

    fn g(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn case_one_example() {
        let psi = |_q: u64| rat(1, 10);
        let r = master_check(&psi, &g("rat:0"), 3, 2, 3, &rat(2, 1), &Precision::default()).unwrap();
        assert_eq!(r.case, BoundCase::I);
        assert_eq!(r.delta, rat(1, 2));
        assert_eq!(r.indicator, 1);
        assert_eq!(r.bound, rat(7, 15));
        assert_eq!(r.measure, Enclosure::exact(rat(1, 15)));
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn case_two_example() {
        let psi = |_q: u64| rat(2, 5);
        let c0 = rat(3, 1);
        let r = master_check(&psi, &g("rat:0"), 11, 10, 3, &c0, &Precision::default()).unwrap();
        assert_eq!(r.case, BoundCase::II);
        assert_eq!(r.delta, rat(42, 5));
        assert_eq!(r.bound, int(4) * (int(1) + &c0 / int(6)) * rat(4, 25));
        let direct = build_aq(&rat(2, 5), &g("rat:0"), 11).unwrap().nominal.intersect(&build_aq(&rat(2, 5), &g("rat:0"), 10).unwrap().nominal);
        assert_eq!(r.measure, Enclosure::exact(direct.measure()));
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn gcd_of_divisor_pair() {
        let psi = |_q: u64| rat(1, 10);
        let r = master_check(&psi, &g("rat:0"), 6, 3, 3, &rat(2, 1), &Precision::default()).unwrap();
        assert_eq!(r.gcd, 3);
    }

    #[test]
    fn rejects_bad_arguments() {
        let psi = |_q: u64| rat(1, 10);
        let p = Precision::default();
        assert!(master_check(&psi, &g("rat:0"), 2, 3, 3, &rat(2, 1), &p).is_err());
        assert!(master_check(&psi, &g("rat:0"), 3, 2, 2, &rat(2, 1), &p).is_err());
        assert!(master_check(&psi, &g("rat:0"), 3, 2, 3, &rat(1, 1), &p).is_err());
        let big = |_q: u64| rat(1, 2);
        assert!(matches!(master_check(&big, &g("rat:0"), 3, 2, 3, &rat(2, 1), &p), Err(Error::PsiOutOfRange(_))));
    }

    #[test]
    fn indicator_zero_gives_zero_measure() {
        let psi = |q: u64| rat(1, 4 * q as i64);
        let r = master_check(&psi, &g("sqrt:2"), 7, 2, 3, &rat(2, 1), &Precision::default()).unwrap();
        let x = 5.0 * 2f64.sqrt();
        let d = (x - x.round()).abs();
        let u = 7.0 / 8.0 + 2.0 / 28.0;
        assert_eq!(r.indicator, u8::from(d <= u));
        if r.indicator == 0 {
            assert_eq!(r.measure, Enclosure::zero());
        }
    }

    #[test]
    fn pair_sum_examples() {
        let s = pair_sum(&ConstPsi(rat(1, 10)), &g("rat:0"), 3);
        assert_eq!(s, Enclosure::exact(rat(7, 30)));
        let s2 = pair_sum(&ConstPsi(rat(1, 7)), &g("rat:1/3"), 2);
        let a1 = build_aq(&rat(1, 7), &g("rat:1/3"), 1).unwrap().nominal;
        let a2 = build_aq(&rat(1, 7), &g("rat:1/3"), 2).unwrap().nominal;
        assert_eq!(s2, Enclosure::exact(a1.intersect(&a2).measure()));
    }

    #[test]
    fn small_sweep_holds() {
        let psi = |q: u64| rat(1, 4 * q as i64);
        let s = master_sweep(&psi, &g("sqrt:3"), 40, 3, &rat(2, 1), &Precision::default()).unwrap();
        assert_eq!(s.pairs, 40 * 39 / 2);
        assert_eq!(s.case_i_fails, 0);
        assert_eq!(s.undecided, 0);
        assert_eq!(s.case_i + s.case_ii, s.pairs);
    }
}
