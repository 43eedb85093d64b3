//! Divisors, the divisor function d(q) and the weight F(q) = Σ_{r|q} log2 r / r.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use parking_lot::Mutex;
use std::collections::HashMap;

use crate::realnum::elementary::log2_rat;
use crate::realnum::enclosure::{ceil_scaled, dyadic, floor_scaled, Enclosure};

/// Default factorization bound for sweeps.
pub const DEFAULT_SIEVE_BOUND: usize = 10_000_000;

/// Smallest-prime-factor table from a linear sieve.
#[derive(Clone, Debug)]
pub struct Sieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl Sieve {
    pub fn new(limit: usize) -> Self {
        let limit = limit.max(1);
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Sieve { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> bool {
        if n as usize <= self.limit() {
            n >= 2 && self.spf[n as usize] as u64 == n
        } else {
            is_prime_u64(n)
        }
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        assert!(n >= 2 && n as usize <= self.limit());
        self.spf[n as usize] as u64
    }

    /// Prime factorization with multiplicities, ascending.
    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        if n as usize > self.limit() {
            return factor_u64(n);
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn divisor_count(&self, n: u64) -> u64 {
        self.factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn divisors(&self, n: u64) -> Vec<u64> {
        divisors_from_factors(&self.factorize(n))
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Brent's variant; n odd composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x);
            y = f(f(y));
            g = gcd(x.abs_diff(y), n);
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Factorization of an arbitrary 64-bit integer.
pub fn factor_u64(n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    let mut m = n;
    for p in 2u64..1000 {
        if p * p > m {
            break;
        }
        while m % p == 0 {
            primes.push(p);
            m /= p;
        }
    }
    let mut stack = vec![m];
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if is_prime_u64(x) {
            primes.push(x);
            continue;
        }
        let d = pollard_rho(x);
        stack.push(d);
        stack.push(x / d);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn divisors_from_factors(f: &[(u64, u32)]) -> Vec<u64> {
    let mut divs = vec![1u64];
    for &(p, e) in f {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    gcd(a, b)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorTable {
    pub q: u64,
    pub divisors: Vec<u64>,
    pub f: Enclosure,
}

impl DivisorTable {
    pub fn d(&self) -> usize {
        self.divisors.len()
    }
}

const PRIME_LOG_BITS: u32 = 80;

static PRIME_LOGS: Lazy<Mutex<HashMap<u64, Enclosure>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn log2_prime(p: u64) -> Enclosure {
    if let Some(e) = PRIME_LOGS.lock().get(&p) {
        return e.clone();
    }
    let e = log2_rat(&BigRational::from_integer(BigInt::from(p)), PRIME_LOG_BITS);
    PRIME_LOGS.lock().insert(p, e.clone());
    e
}

fn f_from_factors(f: &[(u64, u32)]) -> Enclosure {
    let logs: Vec<Enclosure> = f.iter().map(|&(p, _)| log2_prime(p)).collect();
    // enumerate divisors with their exponent vectors
    let mut divs: Vec<(u64, Vec<u32>)> = vec![(1, vec![0; f.len()])];
    for (i, &(p, e)) in f.iter().enumerate() {
        let len = divs.len();
        for j in 0..len {
            let (mut r, ex) = divs[j].clone();
            for k in 1..=e {
                r *= p;
                let mut ex2 = ex.clone();
                ex2[i] = k;
                divs.push((r, ex2));
            }
        }
    }
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    for (r, ex) in divs {
        if r == 1 {
            continue;
        }
        let mut l = Enclosure::zero();
        for (e, lg) in ex.iter().zip(&logs) {
            if *e > 0 {
                l = &l + &lg.scale(&BigRational::from_integer(BigInt::from(*e)));
            }
        }
        let inv = BigRational::new(BigInt::one(), BigInt::from(r));
        let t = l.scale(&inv);
        lo += t.lo();
        hi += t.hi();
    }
    Enclosure::new(lo, hi).round_outward(64)
}

/// Complete divisor data for q ≥ 1.
pub fn divisor_table(q: u64) -> DivisorTable {
    assert!(q >= 1, "divisor_table needs q >= 1");
    let f = factor_u64(q);
    DivisorTable { q, divisors: divisors_from_factors(&f), f: f_from_factors(&f) }
}

/// F(q) = Σ_{r|q} log2 r / r, width at most 2^-32.
pub fn f_of(q: u64) -> Enclosure {
    assert!(q >= 1, "F needs q >= 1");
    f_from_factors(&factor_u64(q))
}

/// Like [`f_of`] but factorizes through a sieve.
pub fn f_of_sieved(sieve: &Sieve, q: u64) -> Enclosure {
    f_from_factors(&sieve.factorize(q))
}

/// Lower/upper bounds of log2 n for 1 ≤ n ≤ limit in units of 2^-64.
pub struct Log2Table {
    lo: Vec<u128>,
    hi: Vec<u128>,
}

pub const LOG2_TABLE_BITS: u32 = 64;

impl Log2Table {
    pub fn new(sieve: &Sieve, limit: usize) -> Self {
        assert!(limit <= sieve.limit());
        let mut lo = vec![0u128; limit + 1];
        let mut hi = vec![0u128; limit + 1];
        for n in 2..=limit {
            let p = sieve.spf[n] as usize;
            if p == n {
                // log2 p = log2 (p-1) + log2 (p/(p-1)); the second term converges fast
                let step = if n == 2 {
                    Enclosure::from_int(1)
                } else {
                    log2_rat(&BigRational::new(BigInt::from(n), BigInt::from(n - 1)), LOG2_TABLE_BITS + 8)
                };
                let slo: u128 = floor_scaled(step.lo(), LOG2_TABLE_BITS).try_into().unwrap();
                let shi: u128 = ceil_scaled(step.hi(), LOG2_TABLE_BITS).try_into().unwrap();
                lo[n] = lo[n - 1] + slo;
                hi[n] = hi[n - 1] + shi;
            } else {
                lo[n] = lo[p] + lo[n / p];
                hi[n] = hi[p] + hi[n / p];
            }
        }
        Log2Table { lo, hi }
    }

    pub fn limit(&self) -> usize {
        self.lo.len() - 1
    }

    pub fn bounds(&self, n: usize) -> (u128, u128) {
        (self.lo[n], self.hi[n])
    }

    pub fn get(&self, n: usize) -> Enclosure {
        Enclosure::new(
            dyadic(BigInt::from(self.lo[n]), LOG2_TABLE_BITS),
            dyadic(BigInt::from(self.hi[n]), LOG2_TABLE_BITS),
        )
    }
}

/// (1/Q) Σ_{q≤Q} F(q) through Σ_{r≤Q} (log2 r / r)·⌊Q/r⌋.
pub fn f_average(q_max: u64) -> Enclosure {
    assert!(q_max >= 1);
    let n = q_max as usize;
    let sieve = Sieve::new(n);
    let table = Log2Table::new(&sieve, n);
    f_average_with(&table, q_max)
}

pub fn f_average_with(table: &Log2Table, q_max: u64) -> Enclosure {
    let n = q_max as usize;
    assert!(n <= table.limit());
    let mut slo = BigInt::zero();
    let mut shi = BigInt::zero();
    let mut acc_lo: u128 = 0;
    let mut acc_hi: u128 = 0;
    for r in 2..=n {
        let k = (n / r) as u128;
        let (l, h) = table.bounds(r);
        let r128 = r as u128;
        let tl = l * k / r128;
        let th = (h * k).div_ceil(r128);
        if acc_hi > u128::MAX / 2 {
            slo += acc_lo;
            shi += acc_hi;
            acc_lo = 0;
            acc_hi = 0;
        }
        acc_lo += tl;
        acc_hi += th;
    }
    slo += acc_lo;
    shi += acc_hi;
    let den = BigInt::from(q_max) << LOG2_TABLE_BITS as usize;
    Enclosure::new(BigRational::new(slo, den.clone()), BigRational::new(shi, den))
}
