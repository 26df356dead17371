//! Small exact integer helpers shared by every module: gcds, modular
//! powers and inverses, primality, factorization and the Kronecker symbol.

use num_integer::Integer;

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

/// Non-negative residue of `a` modulo `m` (`m > 0`).
pub fn modp(a: i64, m: i64) -> i64 {
    a.rem_euclid(m)
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn invmod(a: i64, m: i64) -> Option<i64> {
    let e = modp(a, m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(modp(e.x, m))
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes up to and including `bound` (sieve of Eratosthenes).
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n + 1;
    while !is_prime(k) {
        k += 1;
    }
    k
}

/// Trial-division factorization of `|n|` as (prime, exponent) pairs in
/// ascending order. `n = 0` yields an empty list.
pub fn factor(n: i128) -> Vec<(u64, u32)> {
    let mut n = n.unsigned_abs();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut p: u128 = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n as u64, 1));
    }
    out
}

pub fn prime_divisors(n: i128) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: i64) -> bool {
    n != 0 && factor(n as i128).iter().all(|&(_, e)| e == 1)
}

/// Euler's totient.
pub fn totient(n: u64) -> u64 {
    factor(n as i128).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Exponent of the prime `p` in `n` (`n != 0`).
pub fn valuation(mut n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Jacobi symbol (a/n) for odd positive `n`.
pub fn jacobi(a: i64, n: i64) -> i32 {
    assert!(n > 0 && n % 2 == 1, "jacobi needs odd positive modulus");
    let mut a = modp(a, n);
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol (d/n), the multiplicative extension of the Jacobi
/// symbol to all integers `n`.
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut t = 1;
    if n < 0 {
        n = -n;
        if d < 0 {
            t = -1;
        }
    }
    let twos = n.trailing_zeros();
    n >>= twos;
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        // (d/2) = 1 if d = ±1 mod 8, -1 if d = ±3 mod 8
        let r = modp(d, 8);
        if (r == 3 || r == 5) && twos % 2 == 1 {
            t = -t;
        }
    }
    if n == 1 {
        return t;
    }
    t * jacobi(d, n)
}

/// Chinese remainder: the unique `x mod m1*m2` with `x = r1 mod m1` and
/// `x = r2 mod m2`, for coprime moduli.
pub fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> Option<i64> {
    let inv = invmod(m1, m2)? as i128;
    let m = m1 as i128 * m2 as i128;
    let k = ((r2 as i128 - r1 as i128).rem_euclid(m2 as i128) * inv).rem_euclid(m2 as i128);
    Some((r1 as i128 + m1 as i128 * k).rem_euclid(m) as i64)
}

/// Integer square root of a non-negative `i128`.
pub fn isqrt(n: i128) -> i128 {
    if n < 0 {
        panic!("isqrt of negative");
    }
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}
