//! Change of Weierstrass coordinates and local minimization of integral
//! models.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::point::RationalPoint;
use super::Weierstrass;
use crate::arith;

/// The substitution `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transform {
    pub u: i64,
    pub r: i64,
    pub s: i64,
    pub t: i64,
}

impl Transform {
    pub const IDENTITY: Transform = Transform { u: 1, r: 0, s: 0, t: 0 };

    /// Coefficients of the new model, or `None` if they are not integral.
    pub fn apply(&self, m: &Weierstrass) -> Option<Weierstrass> {
        let [a1, a2, a3, a4, a6] = m.coefficients().map(i128::from);
        let (u, r, s, t) = (self.u as i128, self.r as i128, self.s as i128, self.t as i128);
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        let div = |n: i128, k: u32| -> Option<i64> {
            let d = u.checked_pow(k)?;
            (n % d == 0).then(|| i64::try_from(n / d).ok()).flatten()
        };
        Some(Weierstrass::new(div(n1, 1)?, div(n2, 2)?, div(n3, 3)?, div(n4, 4)?, div(n6, 6)?))
    }

    /// Image of a point of the old model on the new one.
    pub fn map_point(&self, p: &RationalPoint) -> RationalPoint {
        match p {
            RationalPoint::Infinity => RationalPoint::Infinity,
            RationalPoint::Affine { x, y } => {
                let q = |n: i64| BigRational::from_integer(BigInt::from(n));
                let u2 = q(self.u * self.u);
                let xn = (x - q(self.r)) / &u2;
                let yn = (y - q(self.s) * &u2 * &xn - q(self.t)) / (&u2 * q(self.u));
                RationalPoint::affine(xn, yn)
            }
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transform) -> Transform {
        let (u, r, s, t) = (self.u, self.r, self.s, self.t);
        Transform {
            u: u * next.u,
            r: r + u * u * next.r,
            s: s + u * next.s,
            t: t + u * u * u * next.t + u * u * s * next.r,
        }
    }
}

/// One scaling by `u = p`, if some integral model is reachable that way.
fn reduce_once(m: &Weierstrass, p: i64) -> Option<(Weierstrass, Transform)> {
    let d = m.discriminant();
    if arith::valuation(d, p as u64) < 12 {
        return None;
    }
    for r in 0..p * p {
        for s in 0..p {
            for t in 0..p * p * p {
                let tr = Transform { u: p, r, s, t };
                if let Some(n) = tr.apply(m) {
                    return Some((n, tr));
                }
            }
        }
    }
    None
}

/// A model minimal at `p`, with the transform that reaches it.
pub fn minimize_at(m: &Weierstrass, p: u64) -> (Weierstrass, Transform) {
    let mut cur = *m;
    let mut acc = Transform::IDENTITY;
    while let Some((n, tr)) = reduce_once(&cur, p as i64) {
        cur = n;
        acc = acc.then(&tr);
    }
    (cur, acc)
}

/// A globally minimal model (minimal at every prime).
pub fn minimal_model(m: &Weierstrass) -> (Weierstrass, Transform) {
    let mut cur = *m;
    let mut acc = Transform::IDENTITY;
    for (p, e) in arith::factor(m.discriminant()) {
        if e >= 12 {
            let (n, tr) = minimize_at(&cur, p);
            cur = n;
            acc = acc.then(&tr);
        }
    }
    (cur, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;
    use proptest::prelude::*;

    #[test]
    fn short_model_minimizes_back() {
        for e in [curve_11a(), curve_37a(), curve_389a(), curve_43a()] {
            let short = e.model().short_model();
            let (m, tr) = minimal_model(&short);
            assert_eq!(m.discriminant(), e.discriminant());
            assert_eq!(m.c4(), e.model().c4());
            assert_eq!(tr.u.abs(), 6);
        }
    }

    #[test]
    fn points_follow_the_model() {
        let e = curve_37a();
        let short = e.model().short_model();
        let (m, tr) = minimal_model(&short);
        // image of (0, 0) on the short model
        let b2 = e.model().b2() as i64;
        let p = RationalPoint::from_ints(3 * b2, 108 * e.model().a3);
        assert!(short.on_curve(&p));
        assert!(m.on_curve(&tr.map_point(&p)));
    }

    proptest! {
        #[test]
        fn scaling_then_minimizing_preserves_discriminant(r in -5i64..5, s in -3i64..3, t in -5i64..5) {
            let e = curve_389a();
            let inv = Transform { u: 1, r, s, t };
            let moved = inv.apply(e.model()).unwrap();
            let (m, _) = minimal_model(&moved);
            prop_assert_eq!(m.discriminant(), e.discriminant());
        }
    }
}
