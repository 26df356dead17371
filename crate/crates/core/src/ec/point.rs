//! Exact arithmetic on rational points of a Weierstrass model.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::Weierstrass;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RationalPoint {
    Infinity,
    Affine { x: BigRational, y: BigRational },
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl RationalPoint {
    pub fn affine(x: BigRational, y: BigRational) -> Self {
        RationalPoint::Affine { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RationalPoint::Affine { x: q(x), y: q(y) }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, RationalPoint::Infinity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn coords_f64(&self) -> Option<(f64, f64)> {
        match self {
            RationalPoint::Infinity => None,
            RationalPoint::Affine { x, y } => Some((ratio_to_f64(x), ratio_to_f64(y))),
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    let (ln, sn) = log_abs_and_sign(r.numer());
    let (ld, sd) = log_abs_and_sign(r.denom());
    if sn == 0 {
        return 0.0;
    }
    (sn * sd) as f64 * (ln - ld).exp()
}

/// `(ln |n|, sign n)`, accurate for integers of any size.
pub fn log_abs_and_sign(n: &BigInt) -> (f64, i32) {
    if n.is_zero() {
        return (f64::NEG_INFINITY, 0);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let bits = n.bits();
    let ln = if bits <= 1000 {
        let f: f64 = n.abs().to_string().parse().unwrap();
        f.ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = n.abs() >> shift;
        let f: f64 = top.to_string().parse().unwrap();
        f.ln() + shift as f64 * std::f64::consts::LN_2
    };
    (ln, sign)
}

impl Weierstrass {
    fn coeff_q(&self) -> [BigRational; 5] {
        self.coefficients().map(q)
    }

    pub fn on_curve(&self, p: &RationalPoint) -> bool {
        match p {
            RationalPoint::Infinity => true,
            RationalPoint::Affine { x, y } => {
                let [a1, a2, a3, a4, a6] = self.coeff_q();
                let lhs = y * y + &a1 * x * y + &a3 * y;
                let rhs = x * x * x + &a2 * x * x + &a4 * x + &a6;
                lhs == rhs
            }
        }
    }

    pub fn neg(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let [a1, _, a3, _, _] = self.coeff_q();
                RationalPoint::Affine { x: x.clone(), y: -y - &a1 * x - a3 }
            }
        }
    }

    pub fn add(&self, p: &RationalPoint, r: &RationalPoint) -> RationalPoint {
        let (x1, y1, x2, y2) = match (p, r) {
            (RationalPoint::Infinity, _) => return r.clone(),
            (_, RationalPoint::Infinity) => return p.clone(),
            (RationalPoint::Affine { x: x1, y: y1 }, RationalPoint::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let [a1, a2, a3, a4, a6] = self.coeff_q();
        let (lambda, nu);
        if x1 == x2 {
            if y1 + y2 + &a1 * x2 + &a3 == BigRational::zero() {
                return RationalPoint::Infinity;
            }
            let two = q(2);
            let three = q(3);
            let den = &two * y1 + &a1 * x1 + &a3;
            lambda = (&three * x1 * x1 + &two * &a2 * x1 + &a4 - &a1 * y1) / &den;
            nu = (-(x1 * x1 * x1) + &a4 * x1 + &two * &a6 - &a3 * y1) / den;
        } else {
            lambda = (y2 - y1) / (x2 - x1);
            nu = (y1 * x2 - y2 * x1) / (x2 - x1);
        }
        let x3 = &lambda * &lambda + &a1 * &lambda - &a2 - x1 - x2;
        let y3 = -(&lambda + &a1) * &x3 - &nu - &a3;
        RationalPoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &RationalPoint) -> RationalPoint {
        self.add(p, p)
    }

    pub fn mul(&self, k: i64, p: &RationalPoint) -> RationalPoint {
        let mut base = if k < 0 { self.neg(p) } else { p.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = RationalPoint::Infinity;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.double(&base);
            }
        }
        acc
    }

    /// Exact torsion test: `kP = O` for some `1 <= k <= bound`.
    pub fn torsion_order(&self, p: &RationalPoint, bound: u32) -> Option<u32> {
        let mut acc = p.clone();
        for k in 1..=bound {
            if acc.is_infinity() {
                return Some(k);
            }
            acc = self.add(&acc, p);
            if let RationalPoint::Affine { x, .. } = &acc {
                // Torsion points have integral coordinates on an integral model.
                if !x.is_integer() && k < bound {
                    return None;
                }
            }
        }
        None
    }

    /// Whether `P` reduces to a nonsingular point modulo every prime.
    ///
    /// With `x = a/e^2`, `y = b/e^3`, the point is singular mod `p` exactly
    /// when `p` divides both scaled partials and `p` does not divide `e`.
    pub fn nonsingular_everywhere(&self, p: &RationalPoint) -> bool {
        let (x, y) = match p {
            RationalPoint::Infinity => return true,
            RationalPoint::Affine { x, y } => (x, y),
        };
        let e = match exact_root(x.denom(), 2) {
            Some(e) => e,
            None => return false,
        };
        let e2 = &e * &e;
        let a = x.numer() * (&e2 / x.denom());
        let b = y.numer() * ((&e2 * &e) / y.denom());
        let [a1, a2, a3, a4, _] = self.coefficients().map(BigInt::from);
        let e4 = &e2 * &e2;
        let fx = &a1 * &b * &e - (BigInt::from(3) * &a * &a + BigInt::from(2) * &a2 * &a * &e2 + &a4 * &e4);
        let fy = BigInt::from(2) * &b + &a1 * &a * &e + &a3 * &e2 * &e;
        let mut g = fx.gcd(&fy);
        loop {
            let h = g.gcd(&e);
            if h.is_one() {
                break;
            }
            g /= h;
        }
        g.is_one()
    }
}

/// Exact `k`-th root of a positive integer, if it is a perfect power.
pub fn exact_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

/// Rational square root, if one exists.
pub fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = exact_root(r.numer(), 2)?;
    let d = exact_root(r.denom(), 2)?;
    Some(BigRational::new(n, d))
}

/// Naive height `log max(|a|, |b|)` of `x = a/b`; zero at infinity.
pub fn naive_height_x(p: &RationalPoint) -> f64 {
    match p {
        RationalPoint::Infinity => 0.0,
        RationalPoint::Affine { x, .. } => {
            let (ln, _) = log_abs_and_sign(x.numer());
            let (ld, _) = log_abs_and_sign(x.denom());
            ln.max(ld).max(0.0)
        }
    }
}
