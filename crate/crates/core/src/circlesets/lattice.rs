//! Closed form for |A_q ∩ A_{q'}|.
//!
//! With g = gcd(q, q'), x = γ(q' − q)/g, U = Δ/g and
//! W = 2·min(ψ(q)/q, ψ(q')/q')·qq'/g, the measure is
//! (g²/(qq'))·Σ_m φ(x + m) where φ(t) = clamp(U − |t|, 0, W).
//! The sum is periodic in x and Lipschitz with constant ≤ 2(⌈W⌉ + 1).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::RadiusSchedule;
use crate::arith::gcd_u64;
use crate::realnum::enclosure::{ceil_scaled, floor_scaled};
use crate::realnum::{dist_enclosure, half, int, Enclosure, RealExpr};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairGeometry {
    pub g: u64,
    /// q ψ(q') + q' ψ(q)
    pub delta: BigRational,
    pub u: BigRational,
    pub w: BigRational,
}

fn clamp_psi(p: &BigRational) -> BigRational {
    p.clone().max(BigRational::zero()).min(half())
}

pub fn pair_geometry(q: u64, qp: u64, psi_q: &BigRational, psi_qp: &BigRational) -> PairGeometry {
    let g = gcd_u64(q, qp);
    let (pq, pqp) = (clamp_psi(psi_q), clamp_psi(psi_qp));
    let (qq, qqp, gg) = (int(q as i64), int(qp as i64), int(g as i64));
    let delta = &qq * &pqp + &qqp * &pq;
    let u = &delta / &gg;
    let w = int(2) * (&pq * &qqp).min(&pqp * &qq) / &gg;
    PairGeometry { g, delta, u, w }
}

fn sum_range(a: &BigInt, b: &BigInt) -> BigInt {
    // a + (a+1) + … + b
    (a + b) * (b - a + 1u32) / 2u32
}

/// Σ_m clamp(u − |x + m|, 0, w), exact.
pub(crate) fn lattice_sum(x: &BigRational, u: &BigRational, w: &BigRational) -> BigRational {
    let x = x - x.floor();
    let d = u - w;
    let mut s = BigRational::zero();
    let full_hi = (&d - &x).floor().to_integer();
    let full_lo = (-&d - &x).ceil().to_integer();
    if full_hi >= full_lo {
        s += w * BigRational::from_integer(&full_hi - &full_lo + 1u32);
    }
    // right band x + m ∈ (d, u)
    let m1 = (&d - &x).floor().to_integer() + 1u32;
    let m2 = (u - &x).ceil().to_integer() - 1u32;
    if m2 >= m1 {
        let n = BigRational::from_integer(&m2 - &m1 + 1u32);
        s += &n * (u - &x) - BigRational::from_integer(sum_range(&m1, &m2));
    }
    // left band x + m ∈ (−u, −d)
    let m1 = (-u - &x).floor().to_integer() + 1u32;
    let m2 = (-&d - &x).ceil().to_integer() - 1u32;
    if m2 >= m1 {
        let n = BigRational::from_integer(&m2 - &m1 + 1u32);
        s += &n * (u + &x) + BigRational::from_integer(sum_range(&m1, &m2));
    }
    s
}

const X_BITS: u32 = 128;

/// Rigorous |A_q ∩ A_{q'}| for ψ values given as enclosures (clamped to 1/2).
pub fn overlap_measure(q: u64, qp: u64, psi_q: &Enclosure, psi_qp: &Enclosure, gamma: &RealExpr) -> Enclosure {
    let lo = pair_geometry(q, qp, psi_q.lo(), psi_qp.lo());
    let hi = pair_geometry(q, qp, psi_q.hi(), psi_qp.hi());
    let g = lo.g;
    let k = (qp as i64 - q as i64) as i128;
    let x = gamma.scale(&BigRational::new(BigInt::from(k), BigInt::from(g)));
    let factor = BigRational::new(BigInt::from(g) * BigInt::from(g), BigInt::from(q) * BigInt::from(qp));
    let (slo, shi) = match x.as_rational() {
        Some(xr) => (lattice_sum(xr, &lo.u, &lo.w), lattice_sum(xr, &hi.u, &hi.w)),
        None => {
            let xe = x.enclose(X_BITS);
            if dist_enclosure(&xe).lo() >= &hi.u {
                (BigRational::zero(), BigRational::zero())
            } else {
                let xm = xe.midpoint();
                let rad = xe.radius();
                let lip = int(2) * (hi.w.ceil() + BigRational::one());
                let slack = lip * rad;
                let a = (lattice_sum(&xm, &lo.u, &lo.w) - &slack).max(BigRational::zero());
                let b = lattice_sum(&xm, &hi.u, &hi.w) + slack;
                (a, b)
            }
        }
    };
    Enclosure::new(slo * &factor, shi * &factor)
}

/// Fractional bits of the fixed-point overlap path.
pub const FIXED_BITS: u32 = 64;
const ONE: i128 = 1 << FIXED_BITS;

fn fdiv(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn cdiv(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// ψ(q) for 1 ≤ q ≤ Q as fixed-point bounds, clamped to [0, 1/2].
#[derive(Clone, Debug)]
pub struct FixedPsi {
    lo: Vec<i128>,
    hi: Vec<i128>,
    /// q values whose ψ was undecided and which are treated as absent
    pub undecided: Vec<u64>,
}

impl FixedPsi {
    pub fn new(psi: &dyn RadiusSchedule, q_max: u64) -> Self {
        let radii: Vec<Option<Enclosure>> = (1..=q_max).map(|q| psi.radius(q)).collect();
        Self::from_radii(&radii)
    }

    /// From ψ(1), ψ(2), … with `None` for undecided values.
    pub fn from_radii(radii: &[Option<Enclosure>]) -> Self {
        let n = radii.len();
        let mut lo = vec![0i128; n + 1];
        let mut hi = vec![0i128; n + 1];
        let mut undecided = Vec::new();
        let h = half();
        for (i, r) in radii.iter().enumerate() {
            match r {
                Some(e) => {
                    let a = e.lo().clone().max(BigRational::zero()).min(h.clone());
                    let b = e.hi().clone().max(BigRational::zero()).min(h.clone());
                    lo[i + 1] = floor_scaled(&a, FIXED_BITS).to_i128().unwrap();
                    hi[i + 1] = ceil_scaled(&b, FIXED_BITS).to_i128().unwrap();
                }
                None => undecided.push(i as u64 + 1),
            }
        }
        FixedPsi { lo, hi, undecided }
    }

    pub fn q_max(&self) -> u64 {
        (self.lo.len() - 1) as u64
    }

    pub fn bounds(&self, q: u64) -> (i128, i128) {
        (self.lo[q as usize], self.hi[q as usize])
    }
}

/// γ mod 1 as fixed-point bounds.
#[derive(Clone, Copy, Debug)]
pub struct FixedGamma {
    lo: i128,
    hi: i128,
}

impl FixedGamma {
    pub fn new(gamma: &RealExpr) -> Self {
        let e = match gamma.as_rational() {
            Some(r) => Enclosure::exact(r.clone()),
            None => gamma.enclose(FIXED_BITS + 32),
        };
        let f = e.lo().floor();
        let e = e.shift(&-f);
        FixedGamma {
            lo: floor_scaled(e.lo(), FIXED_BITS).to_i128().unwrap(),
            hi: ceil_scaled(e.hi(), FIXED_BITS).to_i128().unwrap(),
        }
    }
}

fn sum_range_i(a: i128, b: i128) -> i128 {
    (a + b) * (b - a + 1) / 2
}

/// Σ_m clamp(u − |x + m|, 0, w) with all quantities in units of 2^-64.
fn lattice_sum_fixed(x: i128, u: i128, w: i128) -> i128 {
    let x = x.rem_euclid(ONE);
    let d = u - w;
    let mut s = 0i128;
    let full_hi = fdiv(d - x, ONE);
    let full_lo = cdiv(-d - x, ONE);
    if full_hi >= full_lo {
        s += w * (full_hi - full_lo + 1);
    }
    let m1 = fdiv(d - x, ONE) + 1;
    let m2 = cdiv(u - x, ONE) - 1;
    if m2 >= m1 {
        s += (m2 - m1 + 1) * (u - x) - ONE * sum_range_i(m1, m2);
    }
    let m1 = fdiv(-u - x, ONE) + 1;
    let m2 = cdiv(-d - x, ONE) - 1;
    if m2 >= m1 {
        s += (m2 - m1 + 1) * (u + x) + ONE * sum_range_i(m1, m2);
    }
    s
}

/// Fixed-point bounds of |A_q ∩ A_{q'}| in units of 2^-64.
pub fn overlap_measure_fixed(q: u64, qp: u64, psi: &FixedPsi, gamma: &FixedGamma) -> (i128, i128) {
    let g = gcd_u64(q, qp) as i128;
    let (q_, qp_) = (q as i128, qp as i128);
    let (pl, ph) = psi.bounds(q);
    let (ppl, pph) = psi.bounds(qp);
    if ph == 0 || pph == 0 {
        return (0, 0);
    }
    let u_lo = fdiv(q_ * ppl + qp_ * pl, g);
    let u_hi = cdiv(q_ * pph + qp_ * ph, g);
    let w_lo = fdiv(2 * (pl * qp_).min(ppl * q_), g);
    let w_hi = cdiv(2 * (ph * qp_).min(pph * q_), g);
    let k = qp_ - q_;
    let (a, b) = (gamma.lo * k, gamma.hi * k);
    let x_lo = fdiv(a.min(b), g);
    let x_hi = cdiv(a.max(b), g);
    let spread = x_hi - x_lo;
    // exact zero when every shift of x stays at distance ≥ U
    let xr = x_lo.rem_euclid(ONE);
    if spread < ONE && xr >= u_hi && xr + spread <= ONE - u_hi {
        return (0, 0);
    }
    let lip = 2 * (cdiv(w_hi, ONE) + 1);
    let s_lo = (lattice_sum_fixed(x_lo, u_lo, w_lo) - lip * spread).max(0);
    let s_hi = lattice_sum_fixed(x_lo, u_hi, w_hi) + lip * spread;
    // g²s/(qq') in two steps keeps the products inside i128
    (fdiv(g * fdiv(g * s_lo, q_), qp_), cdiv(g * cdiv(g * s_hi, q_), qp_))
}

#[cfg(test)]
pub(crate) fn fixed_to_enclosure(lo: &BigInt, hi: &BigInt) -> Enclosure {
    let den = BigInt::one() << FIXED_BITS as usize;
    Enclosure::new(BigRational::new(lo.clone(), den.clone()), BigRational::new(hi.clone(), den))
}

#[cfg(test)]
mod tests {
    use super::super::{build_aq, ConstPsi, FnPsi};
    use super::*;
    use crate::realnum::{rat, RealParam};

    fn g(s: &str) -> RealExpr {
        RealExpr::from(s.parse::<RealParam>().unwrap())
    }

    #[test]
    fn closed_form_example() {
        let geo = pair_geometry(3, 2, &rat(1, 10), &rat(1, 10));
        assert_eq!(geo.delta, rat(1, 2));
        let m = overlap_measure(3, 2, &Enclosure::exact(rat(1, 10)), &Enclosure::exact(rat(1, 10)), &g("rat:0"));
        assert_eq!(m, Enclosure::exact(rat(1, 15)));
    }

    #[test]
    fn closed_form_matches_set_algebra() {
        for (gs, psis) in [("rat:0", [rat(1, 10), rat(2, 5)]), ("rat:1/3", [rat(1, 7), rat(3, 11)]), ("rat:-5/4", [rat(1, 3), rat(1, 20)])] {
            let gamma = g(gs);
            for q in 1..=12u64 {
                for qp in 1..=12u64 {
                    let (a, b) = (&psis[(q % 2) as usize], &psis[(qp % 2) as usize]);
                    let sa = build_aq(a, &gamma, q).unwrap().nominal;
                    let sb = build_aq(b, &gamma, qp).unwrap().nominal;
                    let direct = sa.intersect(&sb).measure();
                    let m = overlap_measure(q, qp, &Enclosure::exact(a.clone()), &Enclosure::exact(b.clone()), &gamma);
                    assert_eq!(m, Enclosure::exact(direct), "{gs} q={q} q'={qp}");
                }
            }
        }
    }

    #[test]
    fn irrational_gamma_is_bracketed() {
        let gamma = g("sqrt:2");
        for (q, qp) in [(5u64, 3u64), (12, 8), (30, 7), (9, 9)] {
            let (a, b) = (rat(1, 4 * q as i64), rat(1, 4 * qp as i64));
            let m = overlap_measure(q, qp, &Enclosure::exact(a.clone()), &Enclosure::exact(b.clone()), &gamma);
            let sa = build_aq(&a, &gamma, q).unwrap();
            let sb = build_aq(&b, &gamma, qp).unwrap();
            let inner = sa.inner.intersect(&sb.inner).measure();
            let outer = sa.outer.intersect(&sb.outer).measure();
            assert!(m.overlaps(&Enclosure::new(inner.clone(), outer.clone())), "q={q} q'={qp}");
            assert!(m.width() < rat(1, 1 << 30));
        }
    }

    #[test]
    fn fixed_path_contains_exact() {
        for gs in ["rat:0", "rat:1/3", "sqrt:3", "const:golden"] {
            let gamma = g(gs);
            let fg = FixedGamma::new(&gamma);
            let schedules: Vec<Box<dyn RadiusSchedule>> = vec![
                Box::new(ConstPsi(rat(1, 10))),
                Box::new(FnPsi(|q| rat(1, 4 * q as i64))),
                Box::new(FnPsi(|q| if q % 3 == 0 { rat(1, 2) } else { rat(2, 5) })),
            ];
            for psi in &schedules {
                let fp = FixedPsi::new(psi.as_ref(), 40);
                for q in 1..=40u64 {
                    for qp in 1..=q {
                        let e = overlap_measure(q, qp, &psi.radius(q).unwrap(), &psi.radius(qp).unwrap(), &gamma);
                        let (lo, hi) = overlap_measure_fixed(q, qp, &fp, &fg);
                        let f = fixed_to_enclosure(&BigInt::from(lo), &BigInt::from(hi));
                        assert!(f.overlaps(&e), "{gs} q={q} q'={qp}: {f} vs {e}");
                        if let Some(v) = e.exact_value() {
                            assert!(f.contains(v), "{gs} q={q} q'={qp}");
                        }
                        assert!(f.width() < rat(1, 1 << 40));
                    }
                }
            }
        }
    }
}
