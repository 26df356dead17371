//! Heegner forms `[N a, B, C]` of discriminant `c^2 d_K` and their CM points
//! on `X_0(N)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HeegnerError;
use crate::arith;
use crate::ec::CurveQ;
use crate::lseries;
use crate::quadforms::{class_number, compose, splitting_type, Discriminant, QuadForm, SplitType};

/// Search limit on the cofactor `a` in `A = N a`.
const MAX_COFACTOR: i64 = 1_000_000;

/// A CM point `tau = (-B + sqrt(D)) / 2A` with `N | A` and `B = beta mod 2N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeegnerTau {
    pub form: QuadForm,
    pub tau: Complex64,
    pub level: u64,
    /// Reduced representative of the class of `form` in `Pic(O_c)`.
    pub class: QuadForm,
}

impl HeegnerTau {
    pub fn from_form(form: QuadForm, level: u64) -> Self {
        let d = form.discriminant();
        let two_a = 2.0 * form.a as f64;
        let tau = Complex64::new(-form.b as f64 / two_a, ((-d) as f64).sqrt() / two_a);
        HeegnerTau { form, tau, level, class: form.reduced() }
    }

    pub fn discriminant(&self) -> i64 {
        self.form.discriminant()
    }
}

/// Heegner points of conductor `c`: one CM point per class of `Pic(O_c)`,
/// sorted by class for a fixed summation order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeegnerOrbit {
    pub level: u64,
    pub d_k: i64,
    pub conductor: u64,
    /// The fixed square root of `D mod 4N` shared by the whole orbit.
    pub beta: i64,
    pub taus: Vec<HeegnerTau>,
}

impl HeegnerOrbit {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn min_im_tau(&self) -> f64 {
        self.taus.iter().map(|t| t.tau.im).fold(f64::INFINITY, f64::min)
    }

    pub fn index_of_class(&self, class: &QuadForm) -> Option<usize> {
        let r = class.reduced();
        self.taus.iter().position(|t| t.class == r)
    }

    /// Index of the conjugate of `taus[i]` under the Artin symbol of `sigma`,
    /// acting by composition of classes.
    pub fn act(&self, i: usize, sigma: &QuadForm) -> Result<usize, HeegnerError> {
        let d = self.taus[i].discriminant();
        let c = compose(&self.taus[i].class, sigma, d)?;
        self.index_of_class(&c).ok_or(HeegnerError::ClassSearch { d })
    }
}

/// Smallest `beta` in `[0, 2N)` with `beta^2 = d mod 4N`.
pub fn heegner_beta(n: u64, d: i64) -> Option<i64> {
    let n = n as i64;
    (0..2 * n).find(|b| (b * b - d).rem_euclid(4 * n) == 0)
}

/// Validates a ring class conductor against `N` and `d_K`.
pub fn check_conductor(curve: &CurveQ, d_k: &Discriminant, c: u64) -> Result<(), HeegnerError> {
    if c == 0 || !arith::is_squarefree(c as i64) {
        return Err(HeegnerError::BadConductor { c, reason: "not squarefree" });
    }
    let nd = curve.conductor() as i64 * d_k.value().abs();
    if arith::gcd(c as i64, nd) != 1 {
        return Err(HeegnerError::BadConductor { c, reason: "not coprime to N d_K" });
    }
    for p in arith::prime_divisors(c as i128) {
        if splitting_type(d_k, p) != SplitType::Inert {
            return Err(HeegnerError::BadConductor { c, reason: "has a prime factor not inert in K" });
        }
    }
    Ok(())
}

/// Heegner forms of conductor `c` on `X_0(N)`, one per class of `Pic(O_c)`,
/// all with `B = c beta_1 mod 2N`.
pub fn heegner_orbit(curve: &CurveQ, d_k: &Discriminant, c: u64) -> Result<HeegnerOrbit, HeegnerError> {
    lseries::heegner_hypothesis(curve, d_k)?;
    check_conductor(curve, d_k, c)?;
    let n = curve.conductor();
    let dk = d_k.value();
    let beta1 = heegner_beta(n, dk).ok_or(HeegnerError::NoSquareRoot { n, d: dk })?;
    let two_n = 2 * n as i64;
    let beta = (c as i64 * beta1).rem_euclid(two_n);
    let d = d_k.order(c);
    let h = class_number(d)?;
    let mut found: BTreeMap<QuadForm, HeegnerTau> = BTreeMap::new();
    let mut a = 1i64;
    while found.len() < h {
        if a > MAX_COFACTOR {
            return Err(HeegnerError::ClassSearch { d });
        }
        let big_a = n as i64 * a;
        for t in 0..a {
            let b = beta + two_n * t;
            let num = b as i128 * b as i128 - d as i128;
            if num % (4 * big_a as i128) != 0 {
                continue;
            }
            let cc = (num / (4 * big_a as i128)) as i64;
            if let Ok(f) = QuadForm::new(big_a, b, cc) {
                let ht = HeegnerTau::from_form(f, c);
                found.entry(ht.class).or_insert(ht);
            }
        }
        a += 1;
    }
    Ok(HeegnerOrbit { level: c, d_k: dk, conductor: n, beta, taus: found.into_values().collect() })
}

/// Image of a class of discriminant `l^2 D` in the class group of
/// discriminant `D` under extension of ideals to the larger order.
pub fn extend_class(f: &QuadForm, l: u64) -> Option<QuadForm> {
    let l = l as i64;
    let d = f.discriminant();
    for bound in [8i64, 64] {
        for x in -bound..=bound {
            for y in 0..=bound {
                if arith::gcd(x, y) != 1 {
                    continue;
                }
                let av = f.eval(x, y);
                if av <= 0 || av > i64::MAX as i128 || arith::gcd(av as i64, l) != 1 {
                    continue;
                }
                // complete (x, y) to a matrix [[x, r], [y, s]] of determinant 1
                let (r, s) = bezout_completion(x, y)?;
                let (fa, fb, fc) = (f.a as i128, f.b as i128, f.c as i128);
                let (xi, yi, ri, si) = (x as i128, y as i128, r as i128, s as i128);
                let a2 = av;
                let b2 = 2 * fa * xi * ri + fb * (xi * si + ri * yi) + 2 * fc * yi * si;
                let g = QuadForm { a: a2 as i64, b: b2 as i64, c: f.eval(r, s) as i64 };
                for t in 0..l {
                    let h = g.translate(t);
                    if h.b % l == 0 && h.c % (l * l) == 0 {
                        let out = QuadForm { a: h.a, b: h.b / l, c: h.c / (l * l) };
                        debug_assert_eq!(out.discriminant() * l * l, d);
                        return Some(out.reduced());
                    }
                }
            }
        }
    }
    None
}

fn bezout_completion(x: i64, y: i64) -> Option<(i64, i64)> {
    // x s - r y = 1
    let (mut r0, mut r1) = (x, y);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    // x s0 + y t0 = r0 = +-1
    match r0 {
        1 => Some((-t0, s0)),
        -1 => Some((t0, -s0)),
        _ => None,
    }
}
