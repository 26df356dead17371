//! Néron-Tate heights of rational points and rational recognition of
//! numerically computed coordinates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::lattice::PeriodLattice;
use crate::ec::minimal::{minimal_model, Transform};
use crate::ec::point::{log_abs_and_sign, naive_height_x, ratio_to_f64, RationalPoint};
use crate::ec::Weierstrass;

/// Largest multiplier tried when moving a point into the subgroup of points
/// with nonsingular reduction everywhere.
pub const MAX_NONSINGULAR_MULTIPLE: i64 = 1000;

/// Canonical height, normalized as `lim h(x(2^k P)) / 4^k` with
/// `h(a/b) = log max(|a|, |b|)`.
///
/// Uses `h(Q) = 2 (lambda_inf(Q) + log e_Q + log|Delta| / 12)` for a
/// multiple `Q = mP` that reduces to a nonsingular point at every prime,
/// where `x(Q) = a / e_Q^2`. Non-minimal models are minimized first.
pub fn canonical_height(model: &Weierstrass, p: &RationalPoint) -> Option<f64> {
    if p.is_infinity() || model.torsion_order(p, 16).is_some() {
        return Some(0.0);
    }
    let (min, tr) = minimal_model(model);
    if tr != Transform::IDENTITY {
        return canonical_height(&min, &tr.map_point(p));
    }
    let lattice = PeriodLattice::new(model);
    let (x, y) = p.coords_f64()?;
    let z = lattice.elliptic_log(x.into(), y.into());
    let mut q = p.clone();
    for m in 1..=MAX_NONSINGULAR_MULTIPLE {
        if m > 1 {
            q = model.add(&q, p);
        }
        if model.nonsingular_everywhere(&q) {
            let xq = q.x()?;
            let (log_den, _) = log_abs_and_sign(xq.denom());
            let zq = lattice.reduce(z * m as f64);
            let disc = model.discriminant() as f64;
            let h = lattice.local_height(zq) + 0.5 * log_den + disc.abs().ln() / 12.0;
            return Some(2.0 * h / (m * m) as f64);
        }
    }
    None
}

/// `h(x(2^k P)) / 4^k` by exact doubling.
pub fn doubling_height(model: &Weierstrass, p: &RationalPoint, k: u32) -> f64 {
    let mut q = p.clone();
    for _ in 0..k {
        q = model.double(&q);
    }
    naive_height_x(&q) / 4f64.powi(k as i32)
}

/// Best rational approximation `a/b` of `v` with `b <= max_den` and
/// `|v - a/b| <= tol (1 + |v|)`, by continued fractions.
pub fn recognize_rational(v: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !v.is_finite() {
        return None;
    }
    let bound = tol * (1.0 + v.abs());
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = v;
    for _ in 0..64 {
        let a = r.floor();
        let ai = BigInt::from(a as i128);
        let h2 = &ai * &h1 + &h0;
        let k2 = &ai * &k1 + &k0;
        if k2.to_u64().is_none_or(|k| k > max_den) {
            return None;
        }
        let approx = BigRational::new(h2.clone(), k2.clone());
        if (ratio_to_f64(&approx) - v).abs() <= bound {
            return Some(approx);
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = r - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

/// Rational representative of `P_K`, either on the curve itself or on its
/// quadratic twist when `P_K` lies in the minus part of `E(K)`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Recognized {
    Identity,
    /// `x, y` rational.
    OnCurve {
        x: String,
        y: String,
    },
    /// `x` rational and `y` in `sqrt(d) Q`; stored as the point on the
    /// twist `y^2 = x^3 - 27 c4 d^2 x - 54 c6 d^3`.
    OnTwist {
        d: i64,
        x: String,
        y: String,
        curve_x: String,
    },
}

/// `(Y^2, exact)` with `Y = 2y + a1 x + a3`, as a function of rational `x`.
pub fn y_discriminant(model: &Weierstrass, x: &BigRational) -> BigRational {
    let [a1, a2, a3, a4, a6] = model.coefficients().map(|a| BigRational::from_integer(a.into()));
    let lin = &a1 * x + &a3;
    let cubic = x * x * x + &a2 * x * x + &a4 * x + &a6;
    &lin * &lin + BigRational::from_integer(4.into()) * cubic
}

/// Rational point with the given `x` whose `y` is nearest `y_approx`.
pub fn point_with_x(model: &Weierstrass, x: &BigRational, y_approx: f64) -> Option<RationalPoint> {
    let disc = y_discriminant(model, x);
    let s = crate::ec::point::rational_sqrt(&disc)?;
    let a1x_a3 = BigRational::from_integer(model.a1.into()) * x + BigRational::from_integer(model.a3.into());
    let two = BigRational::from_integer(2.into());
    let y1 = (&s - &a1x_a3) / &two;
    let y2 = (-&s - &a1x_a3) / &two;
    let pick = if (ratio_to_f64(&y1) - y_approx).abs() <= (ratio_to_f64(&y2) - y_approx).abs() { y1 } else { y2 };
    let p = RationalPoint::affine(x.clone(), pick);
    model.on_curve(&p).then_some(p)
}

/// Twist image of a point with rational `x` and `Y = 2y + a1x + a3 = sqrt(d) s`.
pub fn twist_point(model: &Weierstrass, d: i64, x: &BigRational, im_y_sign: f64) -> Option<RationalPoint> {
    let disc = y_discriminant(model, x);
    let dq = BigRational::from_integer(d.into());
    let mut s = crate::ec::point::rational_sqrt(&(disc / &dq))?;
    if im_y_sign < 0.0 {
        s = -s;
    }
    let b2 = BigRational::from_integer(BigInt::from(model.b2()));
    let u = BigRational::from_integer(36.into()) * x + BigRational::from_integer(3.into()) * b2;
    let tx = &dq * u;
    let ty = &dq * &dq * BigRational::from_integer(108.into()) * s;
    Some(RationalPoint::affine(tx, ty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;

    #[test]
    fn height_of_37a_generator() {
        let e = curve_37a();
        let p = RationalPoint::from_ints(0, 0);
        let h = canonical_height(e.model(), &p).unwrap();
        let oracle = doubling_height(e.model(), &p, 10);
        assert!((h - oracle).abs() < 1e-4, "{h} vs {oracle}");
        assert!((h - 0.051_111_408_239_968_8).abs() < 1e-9, "{h}");
    }

    #[test]
    fn quadratic_and_parallelogram() {
        let e = curve_389a();
        let m = e.model();
        let p = RationalPoint::from_ints(-1, 1);
        let q = RationalPoint::from_ints(0, 0);
        let hp = canonical_height(m, &p).unwrap();
        let hq = canonical_height(m, &q).unwrap();
        let h2p = canonical_height(m, &m.double(&p)).unwrap();
        assert!((h2p / hp - 4.0).abs() < 1e-6);
        let hs = canonical_height(m, &m.add(&p, &q)).unwrap();
        let hd = canonical_height(m, &m.add(&p, &m.neg(&q))).unwrap();
        assert!((hs + hd - 2.0 * hp - 2.0 * hq).abs() < 1e-5);
    }

    #[test]
    fn torsion_has_height_zero() {
        let e = curve_11a();
        assert_eq!(canonical_height(e.model(), &RationalPoint::from_ints(5, 5)), Some(0.0));
        assert_eq!(canonical_height(e.model(), &RationalPoint::Infinity), Some(0.0));
    }

    #[test]
    fn height_is_model_independent() {
        let e = curve_37a();
        let short = e.model().short_model();
        let p = RationalPoint::from_ints(3 * e.model().b2() as i64, 108 * e.model().a3);
        let h = canonical_height(&short, &p).unwrap();
        let h0 = canonical_height(e.model(), &RationalPoint::from_ints(0, 0)).unwrap();
        assert!((h - h0).abs() < 1e-10);
    }

    #[test]
    fn continued_fractions() {
        let r = recognize_rational(-0.75, 1_000_000, 1e-12).unwrap();
        assert_eq!(r, BigRational::new((-3).into(), 4.into()));
        let r = recognize_rational(355.0 / 113.0, 1000, 1e-12).unwrap();
        assert_eq!(r, BigRational::new(355.into(), 113.into()));
        assert!(recognize_rational(std::f64::consts::PI, 1000, 1e-12).is_none());
    }
}
