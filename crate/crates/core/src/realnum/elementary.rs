//! Two-sided fixed-point evaluation of the elementary functions we need.
//!
//! Every routine carries a lower and an upper integer (units of 2^-p) and
//! rounds each step in the safe direction, so the final pair brackets the
//! true value without any separate error analysis.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;

use super::enclosure::{ceil_scaled, dyadic, floor_scaled, int, Enclosure};

fn guard(bits: u32) -> u32 {
    24 + (32 - bits.leading_zeros())
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

fn shr_ceil(a: &BigInt, p: u32) -> BigInt {
    -((-a) >> p as usize)
}

/// atanh(z) for 0 <= z <= 1/2 given z in [zlo, zhi] at scale 2^-p.
fn atanh_fixed(zlo: &BigInt, zhi: &BigInt, p: u32) -> (BigInt, BigInt) {
    let z2lo = (zlo * zlo) >> p as usize;
    let z2hi = shr_ceil(&(zhi * zhi), p);
    let mut plo = zlo.clone();
    let mut phi = zhi.clone();
    let mut slo = BigInt::zero();
    let mut shi = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let d = BigInt::from(2 * j + 1);
        slo += plo.div_floor(&d);
        shi += ceil_div(&phi, &d);
        plo = (&plo * &z2lo) >> p as usize;
        phi = shr_ceil(&(&phi * &z2hi), p);
        j += 1;
        if phi <= BigInt::one() {
            // remaining tail <= phi / (1 - z^2) <= 2 phi
            shi += BigInt::from(2) * &phi;
            break;
        }
    }
    (slo, shi)
}

static LN2: Lazy<Mutex<HashMap<u32, (BigInt, BigInt)>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// ln 2 = 2 atanh(1/3) at scale 2^-p.
fn ln2_fixed(p: u32) -> (BigInt, BigInt) {
    if let Some(v) = LN2.lock().get(&p) {
        return v.clone();
    }
    let one = BigInt::one() << p as usize;
    let three = BigInt::from(3);
    let zlo = one.div_floor(&three);
    let zhi = ceil_div(&one, &three);
    let (a, b) = atanh_fixed(&zlo, &zhi, p);
    let v = (a * 2, b * 2);
    LN2.lock().insert(p, v.clone());
    v
}

/// ln 2 as an enclosure of width at most 2^-bits.
pub fn ln2(bits: u32) -> Enclosure {
    let p = bits + guard(bits);
    let (lo, hi) = ln2_fixed(p);
    Enclosure::new(dyadic(lo, p), dyadic(hi, p))
}

/// Split x > 0 as 2^k * y with 1 <= y < 2.
fn binary_split(x: &BigRational) -> (i64, BigRational) {
    let nb = x.numer().bits() as i64 - x.denom().bits() as i64;
    let mut k = nb;
    let mut y = scale_pow2(x, -k);
    if y < BigRational::one() {
        k -= 1;
        y = scale_pow2(x, -k);
    }
    (k, y)
}

fn scale_pow2(x: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        BigRational::new(x.numer() << k as usize, x.denom().clone())
    } else {
        BigRational::new(x.numer().clone(), x.denom() << (-k) as usize)
    }
}

/// log2 of a positive rational.
pub fn log2_rat(x: &BigRational, bits: u32) -> Enclosure {
    assert!(x.is_positive(), "log2 of a non-positive number");
    let (k, y) = binary_split(x);
    let kk = int(k);
    if y.is_one() {
        return Enclosure::exact(kk);
    }
    let p = bits + guard(bits);
    let z = (&y - BigRational::one()) / (&y + BigRational::one());
    let (alo, ahi) = atanh_fixed(&floor_scaled(&z, p), &ceil_scaled(&z, p), p);
    let (llo, lhi) = ln2_fixed(p);
    // log2 y = 2 atanh(z) / ln 2
    let flo = ((alo * BigInt::from(2)) << p as usize).div_floor(&lhi);
    let fhi = ceil_div(&((ahi * BigInt::from(2)) << p as usize), &llo);
    Enclosure::new(&kk + dyadic(flo, p), &kk + dyadic(fhi, p))
}

/// 2^x for rational x.
pub fn exp2_rat(x: &BigRational, bits: u32) -> Enclosure {
    let k = x.floor().to_integer();
    let f = x - BigRational::from_integer(k.clone());
    let k: i64 = k.try_into().expect("exponent out of range");
    let pow = |n: BigInt| scale_pow2(&BigRational::from_integer(n), k);
    if f.is_zero() {
        return Enclosure::exact(pow(BigInt::one()));
    }
    let p = bits + guard(bits) + k.max(0) as u32;
    let (llo, lhi) = ln2_fixed(p);
    let tlo = (f.numer() * &llo).div_floor(f.denom());
    let thi = ceil_div(&(f.numer() * &lhi), f.denom());
    let mut term_lo = BigInt::one() << p as usize;
    let mut term_hi = term_lo.clone();
    let mut slo = term_lo.clone();
    let mut shi = term_hi.clone();
    let mut n: u64 = 1;
    loop {
        let d = BigInt::from(n);
        term_lo = ((&term_lo * &tlo) >> p as usize).div_floor(&d);
        term_hi = ceil_div(&shr_ceil(&(&term_hi * &thi), p), &d);
        slo += &term_lo;
        shi += &term_hi;
        n += 1;
        if term_hi <= BigInt::one() {
            shi += &term_hi + BigInt::one();
            break;
        }
    }
    let lo = scale_pow2(&dyadic(slo, p), k);
    let hi = scale_pow2(&dyadic(shi, p), k);
    Enclosure::new(lo, hi)
}

/// Square root of a non-negative rational; exact when the root is rational.
pub fn sqrt_rat(x: &BigRational, bits: u32) -> Enclosure {
    assert!(!x.is_negative(), "sqrt of a negative number");
    let (a, b) = (x.numer(), x.denom());
    let rn = a.sqrt();
    let rd = b.sqrt();
    if &rn * &rn == *a && &rd * &rd == *b {
        return Enclosure::exact(BigRational::new(rn, rd));
    }
    let p = bits + 2;
    let n = (a * b) << (2 * p as usize);
    let s = n.sqrt();
    let den = b << p as usize;
    Enclosure::new(BigRational::new(s.clone(), den.clone()), BigRational::new(s + 1, den))
}

/// Euler's number.
pub fn e_const(bits: u32) -> Enclosure {
    let p = bits + guard(bits);
    let mut tlo = BigInt::one() << p as usize;
    let mut thi = tlo.clone();
    let mut slo = tlo.clone();
    let mut shi = thi.clone();
    let mut n: u64 = 1;
    loop {
        let d = BigInt::from(n);
        tlo = tlo.div_floor(&d);
        thi = ceil_div(&thi, &d);
        slo += &tlo;
        shi += &thi;
        n += 1;
        if thi <= BigInt::one() && n > 2 {
            shi += &thi;
            break;
        }
    }
    Enclosure::new(dyadic(slo, p), dyadic(shi, p))
}

/// atan(1/m) at scale 2^-p, alternating series.
fn atan_inv(m: u64, p: u32) -> (BigInt, BigInt) {
    let m2 = BigInt::from(m * m);
    let one = BigInt::one() << p as usize;
    let mut plo = one.div_floor(&BigInt::from(m));
    let mut phi = ceil_div(&one, &BigInt::from(m));
    let mut slo = BigInt::zero();
    let mut shi = BigInt::zero();
    let mut j: u64 = 0;
    loop {
        let d = BigInt::from(2 * j + 1);
        let tlo = plo.div_floor(&d);
        let thi = ceil_div(&phi, &d);
        if j % 2 == 0 {
            slo += &tlo;
            shi += &thi;
        } else {
            slo -= &thi;
            shi -= &tlo;
        }
        plo = plo.div_floor(&m2);
        phi = ceil_div(&phi, &m2);
        j += 1;
        if phi <= BigInt::one() {
            slo -= 1;
            shi += 1;
            break;
        }
    }
    (slo, shi)
}

/// pi by Machin's formula.
pub fn pi_const(bits: u32) -> Enclosure {
    let p = bits + guard(bits);
    let (alo, ahi) = atan_inv(5, p);
    let (blo, bhi) = atan_inv(239, p);
    let lo = alo * 16 - bhi * 4;
    let hi = ahi * 16 - blo * 4;
    Enclosure::new(dyadic(lo, p), dyadic(hi, p))
}

pub fn log2_enc(x: &Enclosure, bits: u32) -> Enclosure {
    if let Some(v) = x.exact_value() {
        return log2_rat(v, bits);
    }
    let a = log2_rat(x.lo(), bits);
    let b = log2_rat(x.hi(), bits);
    Enclosure::new(a.lo().clone(), b.hi().clone())
}

pub fn sqrt_enc(x: &Enclosure, bits: u32) -> Enclosure {
    if let Some(v) = x.exact_value() {
        return sqrt_rat(v, bits);
    }
    let a = sqrt_rat(x.lo(), bits);
    let b = sqrt_rat(x.hi(), bits);
    Enclosure::new(a.lo().clone(), b.hi().clone())
}

pub fn exp2_enc(x: &Enclosure, bits: u32) -> Enclosure {
    if let Some(v) = x.exact_value() {
        return exp2_rat(v, bits);
    }
    let a = exp2_rat(x.lo(), bits);
    let b = exp2_rat(x.hi(), bits);
    Enclosure::new(a.lo().clone(), b.hi().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realnum::enclosure::rat;
    use num_traits::ToPrimitive;

    fn close(e: &Enclosure, v: f64, tol: f64) {
        let m = e.to_f64();
        assert!((m - v).abs() < tol, "{m} vs {v}");
    }

    fn narrow(e: &Enclosure, bits: u32) {
        assert!(e.width() <= dyadic(BigInt::one(), bits), "width {}", e.width().to_f64().unwrap());
    }

    #[test]
    fn constants() {
        for bits in [10, 64, 300] {
            let l = ln2(bits);
            narrow(&l, bits);
            let tol = 2f64.powi(-(bits.min(50) as i32));
            close(&l, std::f64::consts::LN_2, tol);
            let p = pi_const(bits);
            narrow(&p, bits);
            close(&p, std::f64::consts::PI, tol);
            let e = e_const(bits);
            narrow(&e, bits);
            close(&e, std::f64::consts::E, tol);
        }
    }

    #[test]
    fn pi_digits() {
        // 50 digits of pi
        let digits = "3.14159265358979323846264338327950288419716939937510";
        let v = rat(314159265358979323, 100000000000000000);
        let p = pi_const(200);
        assert!(p.lo() > &v);
        let d: BigInt = digits.replace('.', "").parse().unwrap();
        let lo = BigRational::new(d.clone(), BigInt::from(10).pow(50));
        let hi = BigRational::new(d + 1, BigInt::from(10).pow(50));
        assert!(p.lo() > &lo && p.hi() < &hi);
    }

    #[test]
    fn logs_and_powers() {
        for (x, v) in [(rat(3, 1), 3f64.log2()), (rat(1, 10), 0.1f64.log2()), (rat(1000003, 7), (1000003f64 / 7.0).log2())] {
            let e = log2_rat(&x, 80);
            narrow(&e, 80);
            close(&e, v, 1e-12);
        }
        assert_eq!(log2_rat(&rat(1, 8), 20), Enclosure::exact(rat(-3, 1)));
        assert_eq!(log2_rat(&rat(1, 1), 20), Enclosure::exact(rat(0, 1)));
        for (x, v) in [(rat(1, 2), 2f64.sqrt()), (rat(-7, 3), 2f64.powf(-7.0 / 3.0)), (rat(10, 3), 2f64.powf(10.0 / 3.0))] {
            let e = exp2_rat(&x, 60);
            narrow(&e, 60);
            close(&e, v, 1e-12);
        }
        assert_eq!(exp2_rat(&rat(-2, 1), 5), Enclosure::exact(rat(1, 4)));
    }

    #[test]
    fn square_roots() {
        assert_eq!(sqrt_rat(&rat(9, 4), 10), Enclosure::exact(rat(3, 2)));
        let s = sqrt_rat(&rat(2, 1), 100);
        narrow(&s, 100);
        assert!(s.lo() * s.lo() < rat(2, 1) && s.hi() * s.hi() > rat(2, 1));
        let t = sqrt_rat(&rat(1, 3), 30);
        narrow(&t, 30);
        close(&t, (1.0f64 / 3.0).sqrt(), 1e-9);
    }

    #[test]
    fn log_exp_roundtrip_contains_identity() {
        let x = rat(5, 7);
        let l = log2_rat(&x, 120);
        let back = exp2_enc(&l, 120);
        assert!(back.contains(&x));
    }
}
