//! The modular parametrization `X_0(N) -> C/Lambda`, `tau -> sum a_n/n q^n`,
//! with the Manin constant taken to be 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{CPoint, PeriodLattice};
use super::orbit::HeegnerTau;
use super::HeegnerError;
use crate::ec::{an_series, AnSeries, CurveQ};

pub const TERM_CEILING: usize = 1_000_000;
/// CM points closer than this to the real axis are out of reach.
pub const MIN_IM_TAU: f64 = 5e-3;

/// Bound on `|sum_{n > m} a_n/n q^n|`, using `|a_n| <= d(n) sqrt(n) <= 2n`.
pub fn tail_bound(im_tau: f64, n_terms: usize) -> f64 {
    let r = (-2.0 * PI * im_tau).exp();
    2.0 * r.powf(n_terms as f64 + 1.0) / (1.0 - r)
}

/// Fewest terms whose tail bound is at most `precision`.
pub fn terms_for(im_tau: f64, precision: f64) -> Result<usize, HeegnerError> {
    if im_tau < MIN_IM_TAU {
        return Err(HeegnerError::PrecisionUnreachable { im_tau, terms: TERM_CEILING });
    }
    let r = (-2.0 * PI * im_tau).exp();
    let n = ((precision * (1.0 - r) / 2.0).ln() / r.ln() - 1.0).ceil().max(1.0) as usize;
    if n > TERM_CEILING {
        return Err(HeegnerError::PrecisionUnreachable { im_tau, terms: n });
    }
    Ok(n)
}

/// `sum_{n <= n_terms} a_n/n q^n` without reduction modulo the lattice.
pub fn q_sum(an: &AnSeries, tau: Complex64, n_terms: usize) -> Complex64 {
    let q = (2.0 * PI * Complex64::i() * tau).exp();
    let mut qn = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 1..=n_terms.min(an.n_max()) {
        qn *= q;
        let a = an.get(n);
        if a != 0 {
            sum += qn * (a as f64 / n as f64);
        }
    }
    sum
}

/// Value of the parametrization at one CM point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    /// The unreduced sum.
    pub raw: Complex64,
    pub point: CPoint,
    pub n_terms: usize,
    pub tail_bound: f64,
}

/// Coefficients and lattice of a curve, shared across evaluations.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub curve: CurveQ,
    pub lattice: PeriodLattice,
    an: AnSeries,
}

impl Parametrization {
    pub fn new(curve: &CurveQ, n_max: usize) -> Result<Self, HeegnerError> {
        Ok(Parametrization {
            curve: curve.clone(),
            lattice: PeriodLattice::new(curve.model()),
            an: an_series(curve, n_max)?,
        })
    }

    pub fn n_max(&self) -> usize {
        self.an.n_max()
    }

    /// Extends the stored coefficients to at least `n` terms.
    pub fn ensure(&mut self, n: usize) -> Result<(), HeegnerError> {
        if n > self.an.n_max() {
            self.an = an_series(&self.curve, n)?;
        }
        Ok(())
    }

    pub fn raw(&self, tau: Complex64, n_terms: usize) -> Complex64 {
        q_sum(&self.an, tau, n_terms)
    }

    pub fn eval(&self, tau: Complex64, n_terms: usize) -> ParamPoint {
        let n = n_terms.min(self.an.n_max());
        let raw = self.raw(tau, n);
        ParamPoint { raw, point: self.lattice.elliptic_exp(raw), n_terms: n, tail_bound: tail_bound(tau.im, n) }
    }
}

/// `phi(tau)` on `E(C)` using `n_terms` coefficients.
pub fn modular_param(curve: &CurveQ, tau: &HeegnerTau, n_terms: usize) -> Result<ParamPoint, HeegnerError> {
    if n_terms > TERM_CEILING {
        return Err(HeegnerError::PrecisionUnreachable { im_tau: tau.tau.im, terms: n_terms });
    }
    Ok(Parametrization::new(curve, n_terms)?.eval(tau.tau, n_terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;
    use crate::heegner::orbit::heegner_orbit;
    use crate::quadforms::Discriminant;

    #[test]
    fn one_periodic_and_vanishing_at_the_cusp() {
        let p = Parametrization::new(&curve_37a(), 400).unwrap();
        let tau = Complex64::new(0.123, 0.05);
        let a = p.raw(tau, 400);
        let b = p.raw(tau + 1.0, 400);
        assert!((a - b).norm() < 1e-12);
        assert!(p.raw(Complex64::new(0.3, 40.0), 400).norm() < 1e-100);
        assert!(p.eval(Complex64::new(0.3, 40.0), 400).point.is_identity());
    }

    #[test]
    fn tail_meets_precision() {
        let e = curve_37a();
        let o = heegner_orbit(&e, &Discriminant::fundamental(-7).unwrap(), 1).unwrap();
        let t = &o.taus[0];
        let n = terms_for(t.tau.im, 1e-8).unwrap();
        assert!(tail_bound(t.tau.im, n) < 1e-8);
        assert!(tail_bound(t.tau.im, n - 1) >= 1e-8);
        let p = modular_param(&e, t, n).unwrap();
        // actual tail against a much longer sum
        let long = Parametrization::new(&e, 4 * n).unwrap().raw(t.tau, 4 * n);
        assert!((long - p.raw).norm() < 1e-8);
    }

    #[test]
    fn too_close_to_the_real_axis() {
        assert!(matches!(terms_for(1e-3, 1e-8), Err(HeegnerError::PrecisionUnreachable { .. })));
        assert!(terms_for(MIN_IM_TAU, 1e-12).unwrap() < TERM_CEILING);
    }
}
