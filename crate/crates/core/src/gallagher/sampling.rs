//! Multiplicative hit counts, the Monte-Carlo survey and the doubly metric
//! sampling experiment.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use super::approx::{exact_or_rounded, ApproxFunction, PsiPrime, PsiPrimeValue, PSI_BITS};
use crate::realnum::elementary::{exp2_rat, log2_rat};
use crate::realnum::enclosure::{ceil_scaled, dyadic, floor_scaled};
use crate::realnum::torus::TORUS_BITS;
use crate::realnum::{decide, dist_enclosure, int, Comparison, DyadicSum, Enclosure, Precision, RealExpr, RealParam, TorusPoint};
use crate::{Error, Result};

/// What a hit is tested against: ‖qx − γ‖ < ψ(q) directly, or the fibred
/// product ‖qx − γ‖·‖qβ − γ′‖ < ψ(q).
#[derive(Clone, Debug)]
pub enum HitModel {
    Direct(ApproxFunction),
    Fibred(PsiPrime),
}

impl HitModel {
    pub fn base(&self) -> &ApproxFunction {
        match self {
            HitModel::Direct(f) => f,
            HitModel::Fibred(pp) => &pp.base,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HitCount {
    pub hits: u64,
    pub undecided: u64,
    /// q with qβ − γ′ an integer; never counted as hits
    pub degenerate: u64,
}

/// Per-q status before any sample is drawn.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Slot {
    Skip,
    Degenerate,
    Undecided,
    /// ‖qx − γ‖ < T with T in units of 2^-128; `None` as hi means T ≥ 1
    Threshold { t: Enclosure, lo: u128, hi: Option<u128> },
}

fn slot(model: &HitModel, q: u64, support_only: bool, prec: &Precision) -> Slot {
    let base = model.base();
    if q < base.q0 {
        return Slot::Skip;
    }
    let Ok(psi) = base.psi_eval(q) else {
        return Slot::Undecided;
    };
    let t = match model {
        HitModel::Direct(_) => psi,
        HitModel::Fibred(pp) => {
            if support_only {
                match pp.support(q, prec) {
                    PsiPrimeValue::Outside => return Slot::Skip,
                    PsiPrimeValue::Degenerate => return Slot::Degenerate,
                    PsiPrimeValue::Undecided => return Slot::Undecided,
                    PsiPrimeValue::Inside(_) => {}
                }
            } else if pp.rot.is_degenerate(q) {
                return Slot::Degenerate;
            }
            match pp.rot.dist_positive(q, prec) {
                Some(d) => exact_or_rounded(psi.div(&d).unwrap()),
                None => return Slot::Undecided,
            }
        }
    };
    let lo = floor_scaled(t.lo(), TORUS_BITS).to_u128().unwrap_or(u128::MAX);
    let hi = ceil_scaled(t.hi(), TORUS_BITS).to_u128();
    Slot::Threshold { t, lo, hi }
}

/// Rigorous decision of ‖qx − γ‖·‖qβ − γ′‖ < ψ(q).
fn hit_test(x: &RealExpr, gamma: &RealExpr, model: &HitModel, q: u64, prec: &Precision) -> Comparison {
    let y = &x.mul_int(q as i64) - gamma;
    let rot = match model {
        HitModel::Fibred(pp) => Some(pp.rot.expr(q)),
        HitModel::Direct(_) => None,
    };
    let base = model.base();
    decide(prec, |bits| {
        let b = bits.max(PSI_BITS);
        let d1 = dist_enclosure(&y.enclose(b));
        let p = match &rot {
            Some(r) => &d1 * &dist_enclosure(&r.enclose(b)),
            None => d1,
        };
        Ok(&p - &base.eval(q, b)?)
    })
    .unwrap_or(Comparison::Undecided)
}

/// #{q ≤ Q : ‖qx − γ‖·‖qβ − γ′‖ < ψ(q)}; with `support_only` the fibred
/// count is restricted to the support of ψ′.
pub fn hit_count(x: &RealExpr, gamma: &RealExpr, model: &HitModel, q_max: u64, support_only: bool, prec: &Precision) -> HitCount {
    let outcomes: Vec<HitCount> = (1..=q_max)
        .into_par_iter()
        .map(|q| match slot(model, q, support_only, prec) {
            Slot::Skip => HitCount::default(),
            Slot::Degenerate => HitCount { degenerate: 1, ..Default::default() },
            Slot::Undecided => HitCount { undecided: 1, ..Default::default() },
            Slot::Threshold { .. } => match hit_test(x, gamma, model, q, prec) {
                Comparison::Less => HitCount { hits: 1, ..Default::default() },
                Comparison::Undecided => HitCount { undecided: 1, ..Default::default() },
                _ => HitCount::default(),
            },
        })
        .collect();
    outcomes.iter().fold(HitCount::default(), |a, b| HitCount {
        hits: a.hits + b.hits,
        undecided: a.undecided + b.undecided,
        degenerate: a.degenerate + b.degenerate,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSurvey {
    pub q_max: u64,
    pub seed: u64,
    /// hit count per sample, in sample order
    pub counts: Vec<u64>,
    pub mean: BigRational,
    /// Σ_q min(1, 2ψ′(q)) over the tested q
    pub expected: Enclosure,
    /// mean / expected − 1
    pub deviation: f64,
    pub undecided: u64,
    pub degenerate: u64,
}

/// The sample point of index i: k/2^64 with k from a ChaCha8 stream keyed by
/// (seed, i).
pub fn sample_grid_point(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn mc_survey(gamma: &RealExpr, model: &HitModel, q_max: u64, samples: u64, seed: u64, prec: &Precision) -> Result<McSurvey> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let slots: Vec<Slot> = (1..=q_max).into_par_iter().map(|q| slot(model, q, true, prec)).collect();
    let mut expected = DyadicSum::new(PSI_BITS);
    let one = Enclosure::exact(int(1));
    let (mut undecided_q, mut degenerate) = (0u64, 0u64);
    for s in &slots {
        match s {
            Slot::Threshold { t, .. } => expected.add(&t.scale(&int(2)).min(&one)),
            Slot::Degenerate => degenerate += 1,
            Slot::Undecided => undecided_q += 1,
            Slot::Skip => {}
        }
    }
    let tg = TorusPoint::from_expr(gamma);
    let per_sample: Vec<(u64, u64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let k = sample_grid_point(seed, i);
            let tx = TorusPoint::from_grid64(k);
            let (mut hits, mut undecided) = (0u64, 0u64);
            let mut x_expr: Option<RealExpr> = None;
            let mut p = TorusPoint::ZERO;
            for (q, s) in (1u64..).zip(&slots) {
                p = p.add(tx);
                let Slot::Threshold { lo, hi, .. } = s else {
                    continue;
                };
                let (dlo, dhi) = p.sub(tg).dist_bounds();
                if dhi < *lo {
                    hits += 1;
                } else if hi.is_some_and(|h| dlo >= h) {
                } else {
                    let x = x_expr.get_or_insert_with(|| RealExpr::rational(dyadic(BigInt::from(k), 64)));
                    match hit_test(x, gamma, model, q, prec) {
                        Comparison::Less => hits += 1,
                        Comparison::Undecided => undecided += 1,
                        _ => {}
                    }
                }
            }
            (hits, undecided)
        })
        .collect();
    let counts: Vec<u64> = per_sample.iter().map(|c| c.0).collect();
    let undecided = per_sample.iter().map(|c| c.1).sum::<u64>() + undecided_q * samples;
    let mean = BigRational::new(BigInt::from(counts.iter().sum::<u64>()), BigInt::from(samples));
    let expected = expected.total();
    let e = expected.to_f64();
    let deviation = if e > 0.0 { mean.to_f64().unwrap() / e - 1.0 } else { 0.0 };
    Ok(McSurvey { q_max, seed, counts, mean, expected, deviation, undecided, degenerate })
}

/// Smallest-ratio pair (k₁, k₂) with 2 ≤ max(|k₁|, |k₂|) ≤ N, k₁k₂ ≠ 0 and
/// ‖k₁γ + k₂β‖ ≤ max(|k₁|, |k₂|)^{−H′}; signs normalised to k₁ > 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PairTest {
    Passes,
    Fails { witness: (i64, i64) },
    Undecided,
}

fn heights(n: u64) -> impl Iterator<Item = (u64, Vec<(i64, i64)>)> {
    (2..=n).map(|k| {
        let h = k as i64;
        let mut v = Vec::with_capacity(4 * k as usize);
        for k2 in (-h..=h).filter(|&x| x != 0) {
            v.push((h, k2));
        }
        for k1 in 1..h {
            v.push((k1, -h));
            v.push((k1, h));
        }
        (k, v)
    })
}

/// k^{−H′} per height as an enclosure and in torus units.
fn height_thresholds(h_prime: &BigRational, n: u64) -> Vec<(Enclosure, u128, u128)> {
    (0..=n)
        .map(|k| {
            if k < 2 {
                return (Enclosure::zero(), 0, 0);
            }
            let t = if h_prime.is_integer() {
                Enclosure::exact(num_traits::pow::Pow::pow(&int(k), -h_prime.to_integer().to_i32().unwrap()))
            } else {
                exp2_rat(&-(log2_rat(&int(k), 128).hi() * h_prime), 128).hull(&exp2_rat(&-(log2_rat(&int(k), 128).lo() * h_prime), 128))
            };
            let lo = floor_scaled(t.lo(), TORUS_BITS).to_u128().unwrap();
            let hi = ceil_scaled(t.hi(), TORUS_BITS).to_u128().unwrap();
            (t, lo, hi)
        })
        .collect()
}

fn pair_test(gamma: &RealExpr, beta: &RealExpr, thresholds: &[(Enclosure, u128, u128)], n: u64, prec: &Precision) -> PairTest {
    let (tg, tb) = (TorusPoint::from_expr(gamma), TorusPoint::from_expr(beta));
    let mut worst: Option<(f64, (i64, i64))> = None;
    let mut undecided = false;
    for (k, pairs) in heights(n) {
        let (t, tlo, thi) = &thresholds[k as usize];
        for (k1, k2) in pairs {
            let p = tg.mul(k1).add(tb.mul(k2));
            let (dlo, dhi) = p.dist_bounds();
            let fails = if dhi <= *tlo {
                true
            } else if dlo > *thi {
                false
            } else {
                let x = &gamma.mul_int(k1) + &beta.mul_int(k2);
                match decide(prec, |bits| Ok(&dist_enclosure(&x.enclose(bits.max(TORUS_BITS))) - t)).unwrap_or(Comparison::Undecided) {
                    Comparison::Less | Comparison::Equal => true,
                    Comparison::Greater => false,
                    Comparison::Undecided => {
                        undecided = true;
                        false
                    }
                }
            };
            if fails {
                let ratio = p.dist().to_f64() / t.to_f64();
                if worst.is_none_or(|(r, _)| ratio < r) {
                    worst = Some((ratio, (k1, k2)));
                }
            }
        }
    }
    match worst {
        Some((_, w)) => PairTest::Fails { witness: w },
        None if undecided => PairTest::Undecided,
        None => PairTest::Passes,
    }
}

/// Test one β against every pair of height 2..=N.
pub fn doubly_metric_check(gamma: &RealExpr, beta: &RealExpr, h_prime: &BigRational, n: u64, prec: &Precision) -> Result<PairTest> {
    if h_prime <= &int(2) {
        return Err(Error::InvalidArgument(format!("H' must exceed 2, got {h_prime}")));
    }
    Ok(pair_test(gamma, beta, &height_thresholds(h_prime, n), n, prec))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoublyMetric {
    pub n: u64,
    pub samples: u64,
    pub failures: u64,
    pub undecided: u64,
    pub fraction: BigRational,
    /// Σ_{k ≤ N} 4k^{1−H′}
    pub union_bound: Enclosure,
    /// per sample: grid numerator of β and the outcome
    pub outcomes: Vec<(u64, PairTest)>,
}

/// Σ_{k=1}^{N} 4k^{1−H′}.
pub fn doubly_metric_union_bound(h_prime: &BigRational, n: u64) -> Enclosure {
    let mut acc = Enclosure::zero();
    for k in 1..=n {
        let e = &int(1) - h_prime;
        let term = if e.is_integer() {
            Enclosure::exact(num_traits::pow::Pow::pow(&int(k), e.to_integer().to_i32().unwrap()))
        } else {
            let l = log2_rat(&int(k), 128);
            let (a, b) = (l.lo() * &e, l.hi() * &e);
            exp2_rat(&a.clone().min(b.clone()), 128).hull(&exp2_rat(&a.max(b), 128))
        };
        acc = &acc + &term.scale(&int(4));
    }
    acc
}

/// β drawn on the 2^-64 grid of [0, 1) from a ChaCha8 stream per sample.
pub fn doubly_metric_sample(gamma: &RealParam, h_prime: &BigRational, n: u64, samples: u64, seed: u64, prec: &Precision) -> Result<DoublyMetric> {
    if h_prime <= &int(2) {
        return Err(Error::InvalidArgument(format!("H' must exceed 2, got {h_prime}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let g = RealExpr::from(gamma);
    let thresholds = height_thresholds(h_prime, n);
    let outcomes: Vec<(u64, PairTest)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let k = sample_grid_point(seed, i);
            let beta = RealExpr::rational(dyadic(BigInt::from(k), 64));
            (k, pair_test(&g, &beta, &thresholds, n, prec))
        })
        .collect();
    let failures = outcomes.iter().filter(|(_, o)| matches!(o, PairTest::Fails { .. })).count() as u64;
    let undecided = outcomes.iter().filter(|(_, o)| *o == PairTest::Undecided).count() as u64;
    Ok(DoublyMetric {
        n,
        samples,
        failures,
        undecided,
        fraction: BigRational::new(BigInt::from(failures), BigInt::from(samples)),
        union_bound: doubly_metric_union_bound(h_prime, n),
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::OmegaSchedule;
    use crate::realnum::rat;

    fn p(s: &str) -> RealParam {
        s.parse().unwrap()
    }

    fn e(s: &str) -> RealExpr {
        RealExpr::from(p(s))
    }

    fn fibred(psi: &str, beta: &str) -> HitModel {
        HitModel::Fibred(PsiPrime::new(psi.parse().unwrap(), p(beta), p("rat:0"), OmegaSchedule::Constant(rat(1, 1))))
    }

    #[test]
    fn hit_examples() {
        let prec = Precision::default();
        let m = fibred("const:1/10", "sqrt:2");
        let c = hit_count(&e("rat:0"), &e("rat:0"), &m, 25, false, &prec);
        assert_eq!(c.hits, 25);
        let c = hit_count(&e("rat:1/2"), &e("rat:0"), &m, 2, false, &prec);
        assert_eq!(c.hits, 1);
        // rational β: q ≡ 0 mod 3 is flagged, not counted
        let m = fibred("const:1/10", "rat:1/3");
        let c = hit_count(&e("rat:0"), &e("rat:0"), &m, 9, false, &prec);
        assert_eq!((c.hits, c.degenerate), (6, 3));
    }

    #[test]
    fn hit_count_matches_floats() {
        let prec = Precision::default();
        let m = HitModel::Direct("inv:1/4".parse().unwrap());
        let x = 0.123456789f64;
        let c = hit_count(&e("dec:0.123456789@1e-30"), &e("sqrt:3"), &m, 2000, false, &prec);
        let want = (1..=2000u64)
            .filter(|&q| {
                let y = q as f64 * x - 3f64.sqrt();
                (y - y.round()).abs() < 0.25 / q as f64
            })
            .count() as u64;
        assert_eq!(c.hits + c.undecided, want);
    }

    #[test]
    fn survey_is_reproducible() {
        let prec = Precision::default();
        let m = HitModel::Direct("inv:1/4".parse().unwrap());
        let a = mc_survey(&e("sqrt:3"), &m, 3000, 20, 7, &prec).unwrap();
        let b = mc_survey(&e("sqrt:3"), &m, 3000, 20, 7, &prec).unwrap();
        assert_eq!(a.counts, b.counts);
        let harmonic: f64 = (1..=3000).map(|q| 0.5 / q as f64).sum();
        assert!((a.expected.to_f64() - harmonic).abs() < 1e-9);
        // each count matches the rigorous per-q test
        let k = sample_grid_point(7, 3);
        let x = RealExpr::rational(dyadic(BigInt::from(k), 64));
        assert_eq!(hit_count(&x, &e("sqrt:3"), &m, 3000, true, &prec).hits, a.counts[3]);
    }

    #[test]
    fn survey_trivia() {
        let prec = Precision::default();
        // β = 1/2, ω = 1: q = 1 lies outside the support
        let m = HitModel::Fibred(PsiPrime::new("const:1/10".parse().unwrap(), p("rat:1/2"), p("rat:0"), OmegaSchedule::Constant(rat(1, 1))));
        let s = mc_survey(&e("sqrt:2"), &m, 1, 5, 1, &prec).unwrap();
        assert_eq!(s.expected, Enclosure::zero());
        // q = 2 is degenerate; q = 3 has ‖3/2‖ = 1/2 ≥ 1/3 and ψ′ = 1/5
        let s = mc_survey(&e("sqrt:2"), &m, 3, 5, 1, &prec).unwrap();
        assert!(s.expected.contains(&rat(2, 5)));
        assert_eq!(s.degenerate, 1);
        let big = HitModel::Fibred(PsiPrime::new("const:2/5".parse().unwrap(), p("rat:1/2"), p("rat:0"), OmegaSchedule::Constant(rat(1, 1))));
        let s = mc_survey(&e("sqrt:2"), &big, 3, 3, 1, &prec).unwrap();
        // ψ′(3) = 4/5 ≥ 1/2 contributes exactly 1
        assert_eq!(s.expected, Enclosure::exact(int(1)));
    }

    #[test]
    fn doubly_metric_examples() {
        let prec = Precision::default();
        let g = e("sqrt:2");
        match doubly_metric_check(&g, &g, &rat(3, 1), 10, &prec).unwrap() {
            PairTest::Fails { witness } => assert_eq!(witness, (2, -2)),
            other => panic!("{other:?}"),
        }
        assert!(doubly_metric_check(&g, &e("sqrt:3"), &rat(2, 1), 10, &prec).is_err());
        let a = doubly_metric_sample(&p("sqrt:2"), &rat(3, 1), 20, 50, 11, &prec).unwrap();
        let b = doubly_metric_sample(&p("sqrt:2"), &rat(4, 1), 20, 50, 11, &prec).unwrap();
        let c = doubly_metric_sample(&p("sqrt:2"), &rat(9, 2), 20, 50, 11, &prec).unwrap();
        assert!(a.failures >= b.failures && b.failures >= c.failures);
        for ((_, x), (_, y)) in a.outcomes.iter().zip(&b.outcomes) {
            if matches!(y, PairTest::Fails { .. }) {
                assert!(matches!(x, PairTest::Fails { .. }));
            }
        }
        let u = doubly_metric_union_bound(&rat(3, 1), 3);
        assert_eq!(u, Enclosure::exact(int(4) + rat(1, 1) + rat(4, 9)));
    }
}
