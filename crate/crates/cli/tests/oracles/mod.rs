//! Reference computations for the acceptance checks. Everything here is a
//! direct, slow restatement of the definitions and shares no code with
//! `hw-core`.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn totient(m: u64) -> u64 {
    (1..=m).filter(|&k| gcd(k, m) == 1).count() as u64
}

pub fn is_squarefree(n: u64) -> bool {
    (2..=n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d * d))
}

pub fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

/// Legendre symbol by Euler's criterion, `p` an odd prime.
pub fn legendre(a: i64, p: u64) -> i32 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Splitting of `p` in `Q(sqrt d)` for a fundamental `d = 1 mod 4`.
pub fn splits_as(d: i64, p: u64) -> i32 {
    if p == 2 {
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        };
    }
    legendre(d, p)
}

/// `p + 1 - #E(F_p)` by listing every affine pair `(x, y)`.
pub fn naive_ap(c: [i64; 5], p: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = c.map(|a| a.rem_euclid(p as i64) as u64);
    let mut affine = 0u64;
    for x in 0..p {
        let rhs = (x * x % p * x + a2 * x % p * x + a4 * x + a6) % p;
        for y in 0..p {
            if (y * y + a1 * x % p * y + a3 * y) % p == rhs {
                affine += 1;
            }
        }
    }
    p as i64 - affine as i64
}

/// `a_n` for `n <= n_max`, multiplicative, with `a_{p^k} = a_p^k` at bad primes.
pub fn an_table(c: [i64; 5], conductor: u64, n_max: usize) -> Vec<i64> {
    let mut a = vec![0i64; n_max + 1];
    a[1] = 1;
    let mut prime_power = vec![0u64; n_max + 1];
    for p in 2..=n_max as u64 {
        if !is_prime(p) {
            continue;
        }
        let ap = naive_ap(c, p);
        let bad = conductor.is_multiple_of(p);
        let mut prev = 1i64;
        let mut cur = ap;
        let mut pk = p;
        while pk <= n_max as u64 {
            a[pk as usize] = cur;
            prime_power[pk as usize] = p;
            let next = if bad { cur * ap } else { ap * cur - p as i64 * prev };
            prev = cur;
            cur = next;
            pk *= p;
        }
    }
    for n in 2..=n_max {
        if prime_power[n] != 0 {
            continue;
        }
        let (p, _) = prime_factors(n as u64)[0];
        let mut m = n;
        let mut pk = 1;
        while m % p as usize == 0 {
            m /= p as usize;
            pk *= p as usize;
        }
        a[n] = a[pk] * a[m];
    }
    a
}

/// `E1(x) = int_0^1 exp(-x/u) / u du` by composite Simpson.
pub fn e1_quadrature(x: f64) -> f64 {
    let panels = 20_000;
    let h = 1.0 / panels as f64;
    let f = |u: f64| if u <= 0.0 { 0.0 } else { (-x / u).exp() / u };
    let mut s = f(0.0) + f(1.0);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

/// `L(E, 1)` for root number `+1` as `2 sum a_n/n exp(-2 pi n / sqrt N)`.
pub fn l_value_straight(c: [i64; 5], conductor: u64, terms: usize) -> f64 {
    let a = an_table(c, conductor, terms);
    let x = 2.0 * std::f64::consts::PI / (conductor as f64).sqrt();
    2.0 * (1..=terms).map(|n| a[n] as f64 / n as f64 * (-x * n as f64).exp()).sum::<f64>()
}

/// `L'(E, 1)` for root number `-1` as `2 sum a_n/n E1(2 pi n / sqrt N)`.
pub fn l_derivative_straight(c: [i64; 5], conductor: u64, terms: usize) -> f64 {
    let a = an_table(c, conductor, terms);
    let x = 2.0 * std::f64::consts::PI / (conductor as f64).sqrt();
    let mut s = 0.0;
    for n in 1..=terms {
        let arg = x * n as f64;
        // below f64 resolution of the sum
        if arg > 700.0 {
            break;
        }
        if a[n] != 0 {
            s += a[n] as f64 / n as f64 * e1_quadrature(arg);
        }
    }
    2.0 * s
}

/// Invariant factors (ascending, divisibility chain, no 1s) of a product of
/// cyclic groups, via the primary decomposition.
pub fn invariant_factors(orders: &[u64]) -> Vec<u64> {
    let mut by_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
    for &n in orders {
        for (p, e) in prime_factors(n) {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let width = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut inv = vec![1u64; width];
    for (p, mut es) in by_prime {
        es.sort_unstable_by(|a, b| b.cmp(a));
        for (i, e) in es.into_iter().enumerate() {
            inv[i] *= p.pow(e);
        }
    }
    inv.reverse();
    inv
}

fn ln_big(n: &BigInt) -> f64 {
    let n = n.abs();
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    let shift = bits.saturating_sub(60);
    let top = (&n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `h(x(2^k P)) / 4^k` by exact doubling with the tangent line formulas.
pub fn doubling_height(c: [i64; 5], x: i64, y: i64, k: u32) -> f64 {
    let q = |v: i64| BigRational::from_integer(BigInt::from(v));
    let [a1, a2, a3, a4, _] = c.map(q);
    let (mut px, mut py) = (q(x), q(y));
    for _ in 0..k {
        let den = q(2) * &py + &a1 * &px + &a3;
        assert!(!den.is_zero(), "point of order 2");
        let lam = (q(3) * &px * &px + q(2) * &a2 * &px + &a4 - &a1 * &py) / den;
        let nu = &py - &lam * &px;
        let nx = &lam * &lam + &a1 * &lam - &a2 - q(2) * &px;
        let ny = -(&lam + &a1) * &nx - nu - &a3;
        px = nx;
        py = ny;
    }
    let h = ln_big(px.numer()).max(ln_big(px.denom()));
    h / 4f64.powi(k as i32)
}

/// `v_q(n)` for `n != 0`.
pub fn valuation(mut n: i64, q: i64) -> u32 {
    assert!(n != 0);
    let mut v = 0;
    while n % q == 0 {
        n /= q;
        v += 1;
    }
    v
}
