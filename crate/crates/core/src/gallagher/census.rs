//! Divergence sums, the G^l census, the counts S_{k,l,r}(q) and F-moments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use super::approx::{Level, PsiPrime, PsiPrimeValue, Rotation, PSI_BITS};
use crate::arith::{f_of, gcd_u64};
use crate::realnum::elementary::{exp2_enc, log2_rat};
use crate::realnum::{decide, dist_enclosure, int, Comparison, DyadicSum, Enclosure, Precision, RealExpr};
use crate::{Error, Result};

const SUM_BITS: u32 = 96;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceSum {
    pub q_max: u64,
    pub sum: Enclosure,
    pub contributing: u64,
    pub undecided: Vec<u64>,
    pub degenerate: Vec<u64>,
}

/// Σ_{q₀ ≤ q ≤ Q} ψ′(q); boundary cases are left out and listed.
pub fn divergence_sum(pp: &PsiPrime, q_max: u64, prec: &Precision) -> Result<DivergenceSum> {
    if q_max < pp.base.q0 {
        return Err(Error::Domain { q: q_max, q0: pp.base.q0 });
    }
    let vals: Vec<PsiPrimeValue> = (pp.base.q0..=q_max).into_par_iter().map(|q| pp.psi_prime(q, prec)).collect::<Result<_>>()?;
    let mut acc = DyadicSum::new(SUM_BITS);
    let (mut contributing, mut undecided, mut degenerate) = (0, Vec::new(), Vec::new());
    for (q, v) in (pp.base.q0..).zip(vals) {
        match v {
            PsiPrimeValue::Inside(e) => {
                acc.add(&e);
                contributing += 1;
            }
            PsiPrimeValue::Outside => {}
            PsiPrimeValue::Degenerate => degenerate.push(q),
            PsiPrimeValue::Undecided => undecided.push(q),
        }
    }
    Ok(DivergenceSum { q_max, sum: acc.total(), contributing, undecided, degenerate })
}

/// Membership of 1 ≤ q ≤ Q in the half-open cells
/// G^l = {q : ‖qβ − γ′‖ ∈ [2^l q^{−ω}, 2^{l+1} q^{−ω})}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    pub q_max: u64,
    /// levels[q − 1] for every q
    pub levels: Vec<Level>,
    /// members of G^l, ascending
    pub cells: Vec<Vec<u64>>,
}

impl Census {
    pub fn cell(&self, l: u32) -> &[u64] {
        self.cells.get(l as usize).map_or(&[], |v| v.as_slice())
    }

    pub fn level(&self, q: u64) -> Level {
        self.levels[(q - 1) as usize]
    }

    fn count(&self, want: Level) -> usize {
        self.levels.iter().filter(|&&l| l == want).count()
    }

    pub fn undecided(&self) -> usize {
        self.count(Level::Undecided)
    }

    pub fn degenerate(&self) -> usize {
        self.count(Level::Degenerate)
    }

    pub fn outside(&self) -> usize {
        self.count(Level::Outside)
    }

    pub fn members(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }
}

pub fn gl_census(rot: &Rotation, q_max: u64, prec: &Precision) -> Census {
    let levels: Vec<Level> = (1..=q_max).into_par_iter().map(|q| rot.level(q, prec)).collect();
    let mut cells: Vec<Vec<u64>> = Vec::new();
    for (q, l) in (1u64..).zip(&levels) {
        if let Level::Cell(l) = *l {
            let l = l as usize;
            if cells.len() <= l {
                cells.resize(l + 1, Vec::new());
            }
            cells[l].push(q);
        }
    }
    Census { q_max, levels, cells }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SklrCount {
    pub count: u64,
    /// q′ values where a membership or indicator test stayed open
    pub undecided: Vec<u64>,
}

/// D_k(q) = [q/2^{k+1}, q/2^k] ∩ ℤ_{≥1}.
pub fn dk_range(q: u64, k: u32) -> Option<(u64, u64)> {
    if k >= 64 {
        return None;
    }
    let lo = ((q as u128).div_ceil(1u128 << (k + 1)) as u64).max(1);
    let hi = q >> k;
    (lo <= hi).then_some((lo, hi))
}

fn psi_prime_or_zero(pp: &PsiPrime, q: u64, prec: &Precision) -> Option<Enclosure> {
    if q < pp.base.q0 {
        return Some(Enclosure::zero());
    }
    pp.psi_prime(q, prec).ok()?.value()
}

/// S_{k,l,r}(q): q′ ∈ D_k(q) ∩ G^l with gcd(q′, q) = r and
/// I_{Δ(q′,q)/r}({γ(q′ − q)/r}) = 1, where Δ uses ψ′.
pub fn sklr_sum(pp: &PsiPrime, gamma: &RealExpr, q: u64, k: u32, l: u32, r: u64, prec: &Precision) -> Result<SklrCount> {
    if r == 0 || q % r != 0 {
        return Err(Error::NotADivisor { q, r });
    }
    let mut out = SklrCount { count: 0, undecided: Vec::new() };
    let Some((lo, hi)) = dk_range(q, k) else {
        return Ok(out);
    };
    let Some(pq) = psi_prime_or_zero(pp, q, prec) else {
        out.undecided.extend((lo..=hi).filter(|&qp| gcd_u64(qp, q) == r));
        return Ok(out);
    };
    for qp in lo..=hi {
        if gcd_u64(qp, q) != r {
            continue;
        }
        match pp.rot.level(qp, prec) {
            Level::Cell(m) if m == l => {}
            Level::Undecided => {
                out.undecided.push(qp);
                continue;
            }
            _ => continue,
        }
        let Some(pqp) = psi_prime_or_zero(pp, qp, prec) else {
            out.undecided.push(qp);
            continue;
        };
        // U = (q′ψ′(q) + qψ′(q′))/r, x = γ(q′ − q)/r
        let u = (&pq.scale(&int(qp)) + &pqp.scale(&int(q))).scale(&BigRational::new(BigInt::one(), BigInt::from(r)));
        let x = gamma.scale(&BigRational::new(BigInt::from(qp as i64 - q as i64), BigInt::from(r)));
        let c = if let (Some(xr), Some(ur)) = (x.as_rational(), u.exact_value()) {
            Comparison::from_ordering(crate::realnum::frac_dist_rational(xr).1.cmp(ur))
        } else {
            decide(prec, |bits| Ok(&dist_enclosure(&x.enclose(bits)) - &u))?
        };
        match c {
            Comparison::Less | Comparison::Equal => out.count += 1,
            Comparison::Greater => {}
            Comparison::Undecided => out.undecided.push(qp),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMoment {
    pub q_max: u64,
    pub l: u32,
    pub k: u32,
    /// Σ F(q)^K over G^l ∩ [Q/2, Q]
    pub sum: Enclosure,
    pub members: Vec<u64>,
    pub undecided: u64,
    /// Q^{1−ω(Q)}·2^{l+1}
    pub reference: Enclosure,
}

pub fn f_moment_sum(rot: &Rotation, q_max: u64, l: u32, k: u32, prec: &Precision) -> Result<FMoment> {
    if q_max < 2 || k == 0 {
        return Err(Error::InvalidArgument("need Q ≥ 2 and K ≥ 1".into()));
    }
    let lo = q_max.div_ceil(2);
    let levels: Vec<(u64, Level)> = (lo..=q_max).into_par_iter().map(|q| (q, rot.level(q, prec))).collect();
    let members: Vec<u64> = levels.iter().filter(|(_, v)| *v == Level::Cell(l)).map(|(q, _)| *q).collect();
    let undecided = levels.iter().filter(|(_, v)| *v == Level::Undecided).count() as u64;
    let mut acc = DyadicSum::new(SUM_BITS);
    for &q in &members {
        acc.add(&f_of(q).powi(k));
    }
    let qq = int(q_max);
    let w = rot.omega.value(q_max, PSI_BITS);
    let expo = &Enclosure::exact(int(1)) - &w;
    let reference = exp2_enc(&(&expo * &log2_rat(&qq, PSI_BITS)), PSI_BITS).scale(&int(BigInt::one() << (l + 1) as usize));
    let sum = if members.is_empty() { Enclosure::zero() } else { acc.total() };
    Ok(FMoment { q_max, l, k, sum, members, undecided, reference })
}
