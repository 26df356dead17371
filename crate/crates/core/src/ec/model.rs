use serde::{Deserialize, Serialize};

use super::EcError;
use crate::arith;

/// Primes below this bound that do not divide the conductor are checked
/// for good reduction when a curve is constructed.
pub const VALIDATION_BOUND: u64 = 1000;

/// A long Weierstrass equation
/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with integer coefficients.
///
/// No condition is imposed here; this is the raw model used for twists and
/// other auxiliary equations. [`CurveQ`] carries the validated curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Weierstrass {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
}

impl Weierstrass {
    pub const fn new(a1: i64, a2: i64, a3: i64, a4: i64, a6: i64) -> Self {
        Self { a1, a2, a3, a4, a6 }
    }

    pub fn coefficients(&self) -> [i64; 5] {
        [self.a1, self.a2, self.a3, self.a4, self.a6]
    }

    pub fn b2(&self) -> i128 {
        let (a1, a2) = (self.a1 as i128, self.a2 as i128);
        a1 * a1 + 4 * a2
    }

    pub fn b4(&self) -> i128 {
        let (a1, a3, a4) = (self.a1 as i128, self.a3 as i128, self.a4 as i128);
        2 * a4 + a1 * a3
    }

    pub fn b6(&self) -> i128 {
        let (a3, a6) = (self.a3 as i128, self.a6 as i128);
        a3 * a3 + 4 * a6
    }

    pub fn b8(&self) -> i128 {
        let [a1, a2, a3, a4, a6] = self.coefficients().map(|a| a as i128);
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> i128 {
        let (b2, b4) = (self.b2(), self.b4());
        b2 * b2 - 24 * b4
    }

    pub fn c6(&self) -> i128 {
        let (b2, b4, b6) = (self.b2(), self.b4(), self.b6());
        -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// Whether the affine point `(x, y)` satisfies the equation.
    pub fn contains(&self, x: i64, y: i64) -> bool {
        let [a1, a2, a3, a4, a6] = self.coefficients().map(|a| a as i128);
        let (x, y) = (x as i128, y as i128);
        y * y + a1 * x * y + a3 * y == x * x * x + a2 * x * x + a4 * x + a6
    }

    /// The model `y^2 = x^3 - 27 c4 x - 54 c6`, isomorphic over Q.
    pub fn short_model(&self) -> Weierstrass {
        Weierstrass::new(0, 0, 0, (-27 * self.c4()) as i64, (-54 * self.c6()) as i64)
    }
}

/// An elliptic curve over Q given by an integral model assumed globally
/// minimal, together with its (supplied) conductor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveQ {
    model: Weierstrass,
    conductor: u64,
    label: Option<String>,
}

impl CurveQ {
    /// Validates the model against the conductor: nonzero discriminant,
    /// every prime of `N` divides the discriminant, and every prime
    /// `p <= VALIDATION_BOUND` not dividing `N` has good reduction.
    pub fn new(model: Weierstrass, conductor: u64, label: Option<String>) -> Result<Self, EcError> {
        if conductor == 0 {
            return Err(EcError::InvalidConductor(0));
        }
        let disc = model.discriminant();
        if disc == 0 {
            return Err(EcError::Singular);
        }
        for p in arith::prime_divisors(conductor as i128) {
            if disc % p as i128 != 0 {
                return Err(EcError::ConductorMismatch { p, reason: "divides N but not the discriminant" });
            }
        }
        for p in arith::primes_up_to(VALIDATION_BOUND) {
            if !conductor.is_multiple_of(p) && disc % p as i128 == 0 {
                return Err(EcError::ConductorMismatch { p, reason: "bad reduction at a prime not dividing N" });
            }
        }
        Ok(Self { model, conductor, label })
    }

    pub fn from_coefficients(coeffs: [i64; 5], conductor: u64, label: &str) -> Result<Self, EcError> {
        let [a1, a2, a3, a4, a6] = coeffs;
        Self::new(Weierstrass::new(a1, a2, a3, a4, a6), conductor, Some(label.to_string()))
    }

    pub fn model(&self) -> &Weierstrass {
        &self.model
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// Label, or the coefficient list when the curve is unlabelled.
    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => l.clone(),
            None => format!("{:?}", self.model.coefficients()),
        }
    }

    pub fn discriminant(&self) -> i128 {
        self.model.discriminant()
    }

    pub fn bad_primes(&self) -> Vec<u64> {
        arith::prime_divisors(self.conductor as i128)
    }

    /// Good reduction at `p`, read off the conductor.
    pub fn good_reduction(&self, p: u64) -> bool {
        !self.conductor.is_multiple_of(p)
    }
}

/// The curves used throughout the tests and documentation.
pub mod known {
    use super::{CurveQ, Weierstrass};

    pub fn curve_11a() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, -1, 1, -10, -20), 11, Some("11a".into())).unwrap()
    }

    pub fn curve_37a() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, 0, 1, -1, 0), 37, Some("37a".into())).unwrap()
    }

    pub fn curve_389a() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, 1, 1, -2, 0), 389, Some("389a".into())).unwrap()
    }

    /// `y^2 = x^3 + x`, conductor 64.
    pub fn curve_64a() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, 0, 0, 1, 0), 64, Some("64a".into())).unwrap()
    }

    /// `y^2 + y = x^3 - x^2`, conductor 11 (a curve isogenous to 11a).
    pub fn curve_11a3() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, -1, 1, 0, 0), 11, Some("11a3".into())).unwrap()
    }

    /// 43a: `y^2 + y = x^3 + x^2`, rank 1.
    pub fn curve_43a() -> CurveQ {
        CurveQ::new(Weierstrass::new(0, 1, 1, 0, 0), 43, Some("43a".into())).unwrap()
    }

    pub fn all() -> Vec<CurveQ> {
        vec![curve_11a(), curve_11a3(), curve_37a(), curve_43a(), curve_64a(), curve_389a()]
    }

    pub fn by_label(label: &str) -> Option<CurveQ> {
        all().into_iter().find(|c| c.label() == Some(label))
    }
}

#[cfg(test)]
mod tests {
    use super::known::*;
    use super::*;

    #[test]
    fn discriminants() {
        assert_eq!(Weierstrass::new(0, 0, 1, -1, 0).discriminant(), 37);
        assert_eq!(Weierstrass::new(0, 0, 0, 0, 1).discriminant(), -432);
        assert_eq!(Weierstrass::new(0, 0, 0, 0, 0).discriminant(), 0);
        assert_eq!(curve_11a().discriminant(), -161051);
        assert_eq!(curve_389a().discriminant(), 389);
    }

    #[test]
    fn singular_model_rejected() {
        assert_eq!(CurveQ::new(Weierstrass::new(0, 0, 0, 0, 0), 1, None), Err(EcError::Singular));
    }

    #[test]
    fn wrong_conductor_rejected() {
        let m = Weierstrass::new(0, 0, 1, -1, 0);
        assert!(matches!(CurveQ::new(m, 11, None), Err(EcError::ConductorMismatch { p: 11, .. })));
        assert!(matches!(CurveQ::new(m, 1, None), Err(EcError::ConductorMismatch { p: 37, .. })));
    }

    #[test]
    fn good_reduction_from_conductor() {
        let e = curve_37a();
        assert!(!e.good_reduction(37));
        assert!(e.good_reduction(2));
        assert!(!curve_11a().good_reduction(11));
    }

    #[test]
    fn invariants_relation() {
        for e in [curve_11a(), curve_37a(), curve_389a(), curve_64a()] {
            let m = e.model();
            assert_eq!(4 * m.b8(), m.b2() * m.b6() - m.b4() * m.b4());
            assert_eq!(1728 * m.discriminant(), m.c4().pow(3) - m.c6().pow(2));
        }
    }
}
