//! Reduction modulo p and naive point counting over F_p and F_{p^2}.

use serde::{Deserialize, Serialize};

use super::{CurveQ, EcError, Weierstrass};
use crate::arith;

/// Largest characteristic accepted by the O(p) counters.
pub const MAX_COUNT_PRIME: u64 = 1_000_000;

/// A Weierstrass model reduced modulo a prime of good reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveFp {
    p: u64,
    a: [u64; 5],
}

impl CurveFp {
    pub fn new(model: &Weierstrass, p: u64) -> Result<Self, EcError> {
        if !arith::is_prime(p) {
            return Err(EcError::NotPrime(p));
        }
        if p > MAX_COUNT_PRIME {
            return Err(EcError::PrimeTooLarge { p, max: MAX_COUNT_PRIME });
        }
        if model.discriminant().rem_euclid(p as i128) == 0 {
            return Err(EcError::SingularReduction(p));
        }
        Ok(Self { p, a: reduce(model, p) })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Reduced coefficients `[a1, a2, a3, a4, a6]`.
    pub fn coefficients(&self) -> [u64; 5] {
        self.a
    }

    /// `#E(F_p)`, including the point at infinity.
    pub fn count_points(&self) -> u64 {
        count_affine(self.a, self.p) + 1
    }

    /// `p + 1 - #E(F_p)`.
    pub fn trace(&self) -> i64 {
        self.p as i64 + 1 - self.count_points() as i64
    }
}

fn reduce(model: &Weierstrass, p: u64) -> [u64; 5] {
    model.coefficients().map(|c| arith::modp(c, p as i64) as u64)
}

/// Affine solution count of the (possibly singular) reduced equation.
fn count_affine(a: [u64; 5], p: u64) -> u64 {
    let [a1, a2, a3, a4, a6] = a;
    if p == 2 {
        let mut n = 0;
        for x in 0..2 {
            for y in 0..2 {
                let lhs = (y * y + a1 * x * y + a3 * y) % 2;
                let rhs = (x * x * x + a2 * x * x + a4 * x + a6) % 2;
                n += (lhs == rhs) as u64;
            }
        }
        return n;
    }
    // Completing the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6.
    let m = p;
    let b2 = (a1 * a1 + 4 * a2) % m;
    let b4 = (2 * a4 + a1 * a3) % m;
    let b6 = (a3 * a3 + 4 * a6) % m;
    let chi = quadratic_character_table(p);
    let mut n = 0u64;
    for x in 0..p {
        let f = (arith::mulmod(4 * x % m, arith::mulmod(x, x, m), m)
            + arith::mulmod(b2, arith::mulmod(x, x, m), m)
            + arith::mulmod(2 * b4 % m, x, m)
            + b6)
            % m;
        n += (1 + chi[f as usize] as i64) as u64;
    }
    n
}

/// `chi[r]` is the Legendre symbol (r/p) for odd `p`.
fn quadratic_character_table(p: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; p as usize];
    chi[0] = 0;
    for x in 1..=(p / 2) {
        chi[arith::mulmod(x, x, p) as usize] = 1;
    }
    chi
}

/// `#E(F_{p^k})` for `k` in {1, 2}, by enumeration over an explicit model of
/// the field with `p^k` elements.
pub fn count_points_ext(model: &Weierstrass, p: u64, k: u32) -> Result<u64, EcError> {
    let fp = CurveFp::new(model, p)?;
    match k {
        1 => Ok(fp.count_points()),
        2 => Ok(count_points_fp2(fp.a, p)),
        _ => Err(EcError::UnsupportedExtension(k)),
    }
}

/// Elements of F_{p^2} as pairs `(u, v)` meaning `u + v t`, with
/// `t^2 = nonresidue` for odd p and `t^2 = t + 1` for p = 2.
#[derive(Clone, Copy)]
struct Fp2 {
    p: u64,
    /// t^2 = s + r t
    s: u64,
    r: u64,
}

impl Fp2 {
    fn new(p: u64) -> Self {
        if p == 2 {
            return Self { p, s: 1, r: 1 };
        }
        let chi = quadratic_character_table(p);
        let n = (2..p).find(|&n| chi[n as usize] == -1).expect("odd prime has a nonresidue");
        Self { p, s: n, r: 0 }
    }

    fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) % self.p, (x.1 + y.1) % self.p)
    }

    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let p = self.p;
        let uu = arith::mulmod(x.0, y.0, p);
        let uv = (arith::mulmod(x.0, y.1, p) + arith::mulmod(x.1, y.0, p)) % p;
        let vv = arith::mulmod(x.1, y.1, p);
        ((uu + arith::mulmod(vv, self.s, p)) % p, (uv + arith::mulmod(vv, self.r, p)) % p)
    }

    fn scalar(&self, c: u64) -> (u64, u64) {
        (c % self.p, 0)
    }

    fn elements(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        (0..self.p).flat_map(move |u| (0..self.p).map(move |v| (u, v)))
    }

    /// Norm to F_p: `z * z^p`.
    fn norm(&self, z: (u64, u64)) -> u64 {
        let p = self.p;
        // conjugate of u + v t is u + v t' with t' = r - t
        let conj = ((z.0 + arith::mulmod(z.1, self.r, p)) % p, (p - z.1) % p);
        let n = self.mul(z, conj);
        debug_assert_eq!(n.1, 0);
        n.0
    }
}

fn count_points_fp2(a: [u64; 5], p: u64) -> u64 {
    let f = Fp2::new(p);
    let [a1, a2, a3, a4, a6] = a.map(|c| f.scalar(c));
    let mut n = 1u64;
    if p == 2 {
        let elems: Vec<_> = f.elements().collect();
        for &x in &elems {
            let x2 = f.mul(x, x);
            let rhs = f.add(f.add(f.mul(x2, x), f.mul(a2, x2)), f.add(f.mul(a4, x), a6));
            for &y in &elems {
                let lhs = f.add(f.add(f.mul(y, y), f.mul(f.mul(a1, x), y)), f.mul(a3, y));
                n += (lhs == rhs) as u64;
            }
        }
        return n;
    }
    let chi = quadratic_character_table(p);
    let four = f.scalar(4);
    let b2 = f.add(f.mul(a1, a1), f.mul(four, a2));
    let b4 = f.add(f.mul(f.scalar(2), a4), f.mul(a1, a3));
    let b6 = f.add(f.mul(a3, a3), f.mul(four, a6));
    for x in f.elements() {
        let x2 = f.mul(x, x);
        let d = f.add(f.add(f.mul(four, f.mul(x2, x)), f.mul(b2, x2)), f.add(f.mul(f.scalar(2), f.mul(b4, x)), b6));
        // A nonzero element of F_{p^2} is a square iff its norm is a square in F_p.
        n += if d == (0, 0) { 1 } else { (1 + chi[f.norm(d) as usize] as i64) as u64 };
    }
    n
}

/// Kodaira-free reduction type at a prime, enough for the local L-factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionType {
    /// `a_p` for bad reduction types; `None` for good reduction.
    pub fn bad_ap(self) -> Option<i64> {
        match self {
            ReductionType::Good => None,
            ReductionType::SplitMultiplicative => Some(1),
            ReductionType::NonsplitMultiplicative => Some(-1),
            ReductionType::Additive => Some(0),
        }
    }
}

/// Reduction type of the model at `p`: locate the singular point of the
/// reduced cubic and classify its tangent cone (distinct tangents give
/// multiplicative reduction, split iff the slopes lie in F_p).
pub fn reduction_type(model: &Weierstrass, p: u64) -> Result<ReductionType, EcError> {
    if !arith::is_prime(p) {
        return Err(EcError::NotPrime(p));
    }
    if model.discriminant().rem_euclid(p as i128) != 0 {
        return Ok(ReductionType::Good);
    }
    if p > MAX_COUNT_PRIME {
        return Err(EcError::PrimeTooLarge { p, max: MAX_COUNT_PRIME });
    }
    let [a1, a2, a3, a4, a6] = reduce(model, p);
    let m = p;
    let mut singular_x = None;
    for x in 0..p {
        let ys: Vec<u64> = if p == 2 {
            vec![0, 1]
        } else {
            // F_y = 2y + a1 x + a3 = 0
            let inv2 = p.div_ceil(2);
            vec![arith::mulmod((m - (a1 * x + a3) % m) % m, inv2, m)]
        };
        for y in ys {
            let f = (y * y + a1 * x % m * y + a3 * y) % m;
            let g = (arith::mulmod(x * x % m, x, m) + a2 * x % m * x + a4 * x + a6) % m;
            let fx =
                (a1 * y % m + 3 * (x * x % m) % m * (m - 1) % m + 2 * a2 * x % m * (m - 1) % m + a4 * (m - 1) % m) % m;
            let fy = (2 * y + a1 * x + a3) % m;
            if f == g && fx == 0 && fy == 0 {
                singular_x = Some(x);
                break;
            }
        }
        if singular_x.is_some() {
            break;
        }
    }
    let x0 = singular_x.ok_or(EcError::NoSingularPoint(p))?;
    // Tangent cone: Y^2 + a1 XY - (3 x0 + a2) X^2.
    let c = (3 * x0 + a2) % m;
    if p == 2 {
        return Ok(match (a1 % 2, c % 2) {
            (0, _) => ReductionType::Additive,
            (_, 0) => ReductionType::SplitMultiplicative,
            _ => ReductionType::NonsplitMultiplicative,
        });
    }
    let disc = (a1 * a1 + 4 * c) % m;
    if disc == 0 {
        return Ok(ReductionType::Additive);
    }
    Ok(if quadratic_character_table(p)[disc as usize] == 1 {
        ReductionType::SplitMultiplicative
    } else {
        ReductionType::NonsplitMultiplicative
    })
}

/// `#` of points on the reduced (possibly singular) cubic, point at infinity
/// included. Used to cross-check `reduction_type` at bad primes.
pub fn count_singular_reduction(model: &Weierstrass, p: u64) -> u64 {
    count_affine(reduce(model, p), p) + 1
}

/// Trace of Frobenius at a good prime.
pub fn ap(curve: &CurveQ, p: u64) -> Result<i64, EcError> {
    if !arith::is_prime(p) {
        return Err(EcError::NotPrime(p));
    }
    if !curve.good_reduction(p) {
        return Err(EcError::BadReduction(p));
    }
    Ok(CurveFp::new(curve.model(), p)?.trace())
}

/// `a_p` for any prime: the Frobenius trace when good, the local sign
/// otherwise.
pub fn ap_any(curve: &CurveQ, p: u64) -> Result<i64, EcError> {
    if curve.good_reduction(p) {
        ap(curve, p)
    } else {
        Ok(reduction_type(curve.model(), p)?.bad_ap().unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;

    /// Brute force over all (x, y) in F_p^2.
    fn naive_count(model: &Weierstrass, p: u64) -> u64 {
        let [a1, a2, a3, a4, a6] = model.coefficients().map(|c| c as i128);
        let p = p as i128;
        let mut n = 1;
        for x in 0..p {
            for y in 0..p {
                let v = y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6);
                if v.rem_euclid(p) == 0 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn counts_match_enumeration() {
        for e in [curve_11a(), curve_37a(), curve_64a(), curve_389a()] {
            for p in arith::primes_up_to(200) {
                if e.good_reduction(p) {
                    let fp = CurveFp::new(e.model(), p).unwrap();
                    assert_eq!(fp.count_points(), naive_count(e.model(), p), "{} p={p}", e.name());
                }
            }
        }
    }

    #[test]
    fn spec_point_counts() {
        let e = curve_37a();
        assert_eq!(CurveFp::new(e.model(), 2).unwrap().count_points(), 5);
        assert_eq!(CurveFp::new(e.model(), 5).unwrap().count_points(), 8);
        let c = curve_64a();
        assert_eq!(CurveFp::new(c.model(), 7).unwrap().count_points(), 8);
        assert_eq!(count_points_ext(c.model(), 3, 1).unwrap(), 4);
        assert_eq!(count_points_ext(e.model(), 2, 1).unwrap(), 5);
    }

    #[test]
    fn ap_values_and_errors() {
        let e = curve_37a();
        assert_eq!(ap(&e, 2), Ok(-2));
        assert_eq!(ap(&curve_64a(), 7), Ok(0));
        assert_eq!(ap(&e, 37), Err(EcError::BadReduction(37)));
        assert_eq!(ap(&e, 4), Err(EcError::NotPrime(4)));
    }

    #[test]
    fn singular_reduction_rejected() {
        assert_eq!(CurveFp::new(curve_37a().model(), 37), Err(EcError::SingularReduction(37)));
        assert_eq!(count_points_ext(curve_37a().model(), 37, 2), Err(EcError::SingularReduction(37)));
    }

    #[test]
    fn prime_ceiling() {
        let e = curve_37a();
        assert!(matches!(CurveFp::new(e.model(), 1_000_003), Err(EcError::PrimeTooLarge { .. })));
    }

    #[test]
    fn fp2_count_brute_force_small_primes() {
        // Full enumeration over F_{p^2} x F_{p^2} for tiny p.
        for e in [curve_37a(), curve_11a(), curve_64a()] {
            for p in [2u64, 3, 5, 7] {
                if !e.good_reduction(p) {
                    continue;
                }
                let f = Fp2::new(p);
                let [a1, a2, a3, a4, a6] = reduce(e.model(), p).map(|c| f.scalar(c));
                let elems: Vec<_> = f.elements().collect();
                let mut n = 1;
                for &x in &elems {
                    for &y in &elems {
                        let lhs = f.add(f.add(f.mul(y, y), f.mul(f.mul(a1, x), y)), f.mul(a3, y));
                        let x2 = f.mul(x, x);
                        let rhs = f.add(f.add(f.mul(x2, x), f.mul(a2, x2)), f.add(f.mul(a4, x), a6));
                        n += (lhs == rhs) as u64;
                    }
                }
                assert_eq!(count_points_ext(e.model(), p, 2).unwrap(), n, "{} p={p}", e.name());
            }
        }
    }

    #[test]
    fn reduction_types_match_singular_counts() {
        // split: p points, nonsplit: p + 2, additive: p + 1.
        let cases = [
            (curve_11a(), 11),
            (curve_37a(), 37),
            (curve_389a(), 389),
            (curve_64a(), 2),
            (curve_43a(), 43),
            (curve_11a3(), 11),
        ];
        for (e, p) in cases {
            let t = reduction_type(e.model(), p).unwrap();
            let n = count_singular_reduction(e.model(), p);
            let expected = match t {
                ReductionType::SplitMultiplicative => p,
                ReductionType::NonsplitMultiplicative => p + 2,
                ReductionType::Additive => p + 1,
                ReductionType::Good => unreachable!(),
            };
            assert_eq!(n, expected, "{} p={p} {t:?}", e.name());
        }
        assert_eq!(reduction_type(curve_64a().model(), 2).unwrap(), ReductionType::Additive);
        assert_eq!(reduction_type(curve_11a().model(), 11).unwrap(), ReductionType::SplitMultiplicative);
        assert_eq!(reduction_type(curve_37a().model(), 37).unwrap(), ReductionType::NonsplitMultiplicative);
    }
}
