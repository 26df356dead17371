//! Period lattices by the AGM, the Weierstrass functions as q-series, the
//! elliptic exponential and logarithm, and the archimedean local height.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ec::Weierstrass;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..100 {
        let (na, nb) = ((a + b) / 2.0, (a * b).sqrt());
        if (na - nb).abs() <= 1e-16 * na.abs() {
            return na;
        }
        a = na;
        b = nb;
    }
    a
}

/// Real roots of `4x^3 + b2 x^2 + 2 b4 x + b6`, descending, refined by Newton.
fn two_division_roots(b2: f64, b4: f64, b6: f64) -> Vec<f64> {
    let f = |x: f64| ((4.0 * x + b2) * x + 2.0 * b4) * x + b6;
    let df = |x: f64| (12.0 * x + 2.0 * b2) * x + 2.0 * b4;
    // depressed cubic for x = t - b2/12: t^3 + p t + q = 0
    let a = b2 / 4.0;
    let b = b4 / 2.0;
    let c = b6 / 4.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);
    let shift = -a / 3.0;
    let mut roots = if disc > 0.0 {
        let r = (-p / 3.0).sqrt();
        let phi = (3.0 * q / (2.0 * p * r)).clamp(-1.0, 1.0).acos();
        (0..3).map(|k| 2.0 * r * ((phi - 2.0 * PI * k as f64) / 3.0).cos() + shift).collect::<Vec<_>>()
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt() + shift]
    };
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let d = df(*r);
            if d == 0.0 {
                break;
            }
            *r -= f(*r) / d;
        }
    }
    roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
    roots
}

/// The lattice `Z w1 + Z w2` with `w1 > 0` the least positive real period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodLattice {
    pub w1: f64,
    pub w2: Complex64,
    /// Positive discriminant: `w2` is purely imaginary.
    pub rectangular: bool,
    /// Basis with `tau = v2/v1` in the standard fundamental domain, used for
    /// all series evaluations.
    v1: Complex64,
    v2: Complex64,
    b2: f64,
    a1: f64,
    a3: f64,
}

/// A point of `E(C)` in both coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CPoint {
    Identity,
    Affine { z: Complex64, x: Complex64, y: Complex64 },
}

impl CPoint {
    pub fn is_identity(&self) -> bool {
        matches!(self, CPoint::Identity)
    }

    pub fn xy(&self) -> Option<(Complex64, Complex64)> {
        match self {
            CPoint::Identity => None,
            CPoint::Affine { x, y, .. } => Some((*x, *y)),
        }
    }

    pub fn z(&self) -> Complex64 {
        match self {
            CPoint::Identity => Complex64::new(0.0, 0.0),
            CPoint::Affine { z, .. } => *z,
        }
    }
}

fn eisenstein(tau: Complex64, k: u32) -> Complex64 {
    // E4 = 1 + 240 sum sigma_3(n) q^n, E6 = 1 - 504 sum sigma_5(n) q^n
    let q = (2.0 * PI * I * tau).exp();
    let (c, e) = if k == 4 { (240.0, 3) } else { (-504.0, 5) };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qn = q;
    for n in 1..200u32 {
        let t = qn / (Complex64::new(1.0, 0.0) - qn) * (n as f64).powi(e);
        sum += t;
        if t.norm() < 1e-18 {
            break;
        }
        qn *= q;
    }
    Complex64::new(1.0, 0.0) + sum * c
}

impl PeriodLattice {
    pub fn new(model: &Weierstrass) -> Self {
        let (b2, b4, b6) = (model.b2() as f64, model.b4() as f64, model.b6() as f64);
        let roots = two_division_roots(b2, b4, b6);
        let disc = model.discriminant();
        let (w1, w2, rect) = if disc > 0 {
            let (e1, e2, e3) = (roots[0], roots[1], roots[2]);
            let w1 = PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt());
            let w2 = I * (PI / agm((e1 - e3).sqrt(), (e2 - e3).sqrt()));
            (w1, w2, true)
        } else {
            let e1 = roots[0];
            let beta = (3.0 * e1 * e1 + b2 * e1 / 2.0 + b4 / 2.0).sqrt();
            let alpha = 3.0 * e1 + b2 / 4.0;
            let w1 = 2.0 * PI / agm(2.0 * beta.sqrt(), (alpha + 2.0 * beta).sqrt());
            let im = PI / agm(2.0 * beta.sqrt(), (2.0 * beta - alpha).sqrt());
            (w1, Complex64::new(w1 / 2.0, im), false)
        };
        let (v1, v2) = reduce_basis(Complex64::new(w1, 0.0), w2);
        Self { w1, w2, rectangular: rect, v1, v2, b2, a1: model.a1 as f64, a3: model.a3 as f64 }
    }

    pub fn tau(&self) -> Complex64 {
        self.v2 / self.v1
    }

    /// `(c4, c6)` reproduced from the lattice through `E4`, `E6`.
    pub fn invariants(&self) -> (Complex64, Complex64) {
        let tau = self.tau();
        let s = 2.0 * PI / self.v1;
        (s.powu(4) * eisenstein(tau, 4), s.powu(6) * eisenstein(tau, 6))
    }

    /// Area of a fundamental parallelogram.
    pub fn covolume(&self) -> f64 {
        (self.v1.conj() * self.v2).im.abs()
    }

    /// Coordinates `(s, t)` with `z = s v1 + t v2`.
    fn coords(&self, z: Complex64) -> (f64, f64) {
        let det = (self.v1.conj() * self.v2).im;
        let s = (z.conj() * self.v2).im / det;
        let t = (self.v1.conj() * z).im / det;
        (s, t)
    }

    /// The reduced basis `(v1, v2)` used for series evaluation.
    pub fn basis(&self) -> (Complex64, Complex64) {
        (self.v1, self.v2)
    }

    /// Representative of `z` with both reduced-basis coordinates in `[-1/2, 1/2)`.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let (s, t) = self.coords(z);
        self.v1 * (s - s.round()) + self.v2 * (t - t.round())
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn distance_to_lattice(&self, z: Complex64) -> f64 {
        let r = self.reduce(z);
        let mut best = f64::INFINITY;
        for i in -1..=1 {
            for j in -1..=1 {
                best = best.min((r - self.v1 * i as f64 - self.v2 * j as f64).norm());
            }
        }
        best
    }

    /// `wp(z)` and `wp'(z)` for `z` not in the lattice.
    pub fn weierstrass_p(&self, z: Complex64) -> (Complex64, Complex64) {
        let z = self.reduce(z);
        let one = Complex64::new(1.0, 0.0);
        let k = 2.0 * PI * I / self.v1;
        let u = (k * z).exp();
        let q = (2.0 * PI * I * self.tau()).exp();
        let h = |v: Complex64| v / ((one - v) * (one - v));
        let g = |v: Complex64| v * (one + v) / ((one - v) * (one - v) * (one - v));
        let mut p = Complex64::new(1.0 / 12.0, 0.0) + h(u);
        let mut dp = g(u);
        let uinv = one / u;
        let mut qm = q;
        for _ in 0..200 {
            let tp = h(qm * u) + h(qm * uinv) - 2.0 * h(qm);
            let td = g(qm * u) - g(qm * uinv);
            p += tp;
            dp += td;
            if tp.norm() + td.norm() < 1e-18 * (1.0 + p.norm() + dp.norm()) {
                break;
            }
            qm *= q;
        }
        (k * k * p, k * k * k * dp)
    }

    /// The point of `E(C)` with elliptic logarithm `z`.
    pub fn elliptic_exp(&self, z: Complex64) -> CPoint {
        let zr = self.reduce(z);
        if self.distance_to_lattice(zr) < 1e-12 * self.w1 {
            return CPoint::Identity;
        }
        let (p, dp) = self.weierstrass_p(zr);
        let x = p - self.b2 / 12.0;
        let y = (dp - x * self.a1 - self.a3) / 2.0;
        CPoint::Affine { z: zr, x, y }
    }

    /// Elliptic logarithm of the affine point `(x, y)`, reduced mod the lattice.
    pub fn elliptic_log(&self, x: Complex64, y: Complex64) -> Complex64 {
        let target_p = x + self.b2 / 12.0;
        let target_dp = y * 2.0 + x * self.a1 + self.a3;
        let scale = 1.0 / (self.w1 * self.w1);
        let score = |z: Complex64| {
            let (p, dp) = self.weierstrass_p(z);
            (p - target_p).norm() / (scale + target_p.norm()) + (dp - target_dp).norm() / (scale + target_dp.norm())
        };
        let mut best = Complex64::new(0.0, 0.0);
        let mut best_score = f64::INFINITY;
        let mut consider = |z: Complex64| {
            let s = score(z);
            if s < best_score {
                best_score = s;
                best = z;
            }
        };
        let n = 32;
        for i in 0..n {
            for j in 0..n {
                let z = self.v1 * ((i as f64 + 0.5) / n as f64 - 0.5) + self.v2 * ((j as f64 + 0.5) / n as f64 - 0.5);
                consider(z);
            }
        }
        // near the identity wp ~ 1/z^2
        if target_p.norm() > 100.0 * scale {
            let r = target_p.sqrt().inv();
            consider(r);
            consider(-r);
        }
        let mut z = best;
        for _ in 0..60 {
            let (p, dp) = self.weierstrass_p(z);
            if dp.norm() < 1e-300 {
                break;
            }
            let step = (p - target_p) / dp;
            z -= step;
            if step.norm() < 1e-16 * self.w1 {
                break;
            }
        }
        let (_, dp) = self.weierstrass_p(z);
        if (dp - target_dp).norm() > (dp + target_dp).norm() {
            z = -z;
        }
        self.reduce(z)
    }

    /// Archimedean local height of the point with logarithm `z`, normalized
    /// so that `lambda(P) = log|x(P)|/2 - log|Delta|/12 + o(1)` near the identity.
    pub fn local_height(&self, z: Complex64) -> f64 {
        let (_, t) = self.coords(z);
        let zr = self.v1 * self.coords(z).0.rem_euclid(1.0) + self.v2 * t.rem_euclid(1.0);
        let tau = self.tau();
        let frac = t.rem_euclid(1.0);
        let one = Complex64::new(1.0, 0.0);
        let q = (2.0 * PI * I * tau).exp();
        let u = (2.0 * PI * I * zr / self.v1).exp();
        let b2 = frac * frac - frac + 1.0 / 6.0;
        let mut lambda = -0.5 * b2 * q.norm().ln() - (one - u).norm().ln();
        let mut qn = q;
        for _ in 0..200 {
            let term = ((one - qn * u) * (one - qn / u)).norm().ln();
            lambda -= term;
            if term.abs() < 1e-18 {
                break;
            }
            qn *= q;
        }
        lambda
    }
}

/// Basis of the same lattice with `tau = w2/w1` in the fundamental domain.
fn reduce_basis(mut w1: Complex64, mut w2: Complex64) -> (Complex64, Complex64) {
    for _ in 0..100 {
        let tau = w2 / w1;
        let n = tau.re.round();
        if n != 0.0 {
            w2 -= w1 * n;
        }
        let tau = w2 / w1;
        if tau.norm() < 1.0 - 1e-15 {
            let old = w1;
            w1 = w2;
            w2 = -old;
        } else {
            break;
        }
    }
    (w1, w2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn invariants_reproduce_c4_c6() {
        for e in [curve_11a(), curve_37a(), curve_389a(), curve_43a(), curve_64a(), curve_11a3()] {
            let m = e.model();
            let l = PeriodLattice::new(m);
            let (c4, c6) = l.invariants();
            let (e4, e6) = (m.c4() as f64, m.c6() as f64);
            assert!((c4 - e4).norm() < 1e-8 * (1.0 + e4.abs()), "{}: c4 {c4} vs {e4}", e.name());
            assert!((c6 - e6).norm() < 1e-8 * (1.0 + e6.abs()), "{}: c6 {c6} vs {e6}", e.name());
            assert!(l.w2.im > 0.0);
        }
    }

    #[test]
    fn known_real_periods() {
        // real periods of 11a1 and 37a1 (w1 of the lattice, i.e. the least positive real period)
        assert!((PeriodLattice::new(curve_11a().model()).w1 - 1.269_209_304_279_553).abs() < 1e-12);
        assert!((PeriodLattice::new(curve_37a().model()).w1 - 2.993_458_646_231_959).abs() < 1e-12);
    }

    #[test]
    fn rational_point_from_its_logarithm() {
        let e = curve_37a();
        let l = PeriodLattice::new(e.model());
        let z = l.elliptic_log(c(0.0, 0.0), c(0.0, 0.0));
        let (x, y) = l.elliptic_exp(z).xy().unwrap();
        assert!(x.norm() < 1e-10 && y.norm() < 1e-10);
        // 2z gives 2P = (1, 0)
        let (x, y) = l.elliptic_exp(z * 2.0).xy().unwrap();
        assert!((x - 1.0).norm() < 1e-9 && y.norm() < 1e-9);
    }

    #[test]
    fn half_period_is_two_torsion() {
        for e in [curve_37a(), curve_11a()] {
            let m = e.model();
            let l = PeriodLattice::new(m);
            let (x, y) = l.elliptic_exp(c(l.w1 / 2.0, 0.0)).xy().unwrap();
            assert!(x.im.abs() < 1e-9 && y.im.abs() < 1e-9);
            let s = y + (x * m.a1 as f64 + m.a3 as f64) / 2.0;
            assert!(s.norm() < 1e-8);
        }
        let l = PeriodLattice::new(curve_37a().model());
        assert!(l.elliptic_exp(c(0.0, 0.0)).is_identity());
        assert!(l.elliptic_exp(l.w2 + l.w1).is_identity());
    }

    #[test]
    fn points_satisfy_equation() {
        let e = curve_389a();
        let m = e.model();
        let l = PeriodLattice::new(m);
        for k in 1..20 {
            let z = l.w2 * (0.037 * k as f64) + l.w1 * (0.11 * k as f64);
            let (x, y) = l.elliptic_exp(z).xy().unwrap();
            let lhs = y * y + x * y * m.a1 as f64 + y * m.a3 as f64;
            let rhs = x * x * x + x * x * m.a2 as f64 + x * m.a4 as f64 + m.a6 as f64;
            assert!((lhs - rhs).norm() < 1e-8 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn log_inverts_exp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for e in [curve_11a(), curve_37a(), curve_43a()] {
            let l = PeriodLattice::new(e.model());
            for _ in 0..40 {
                let z = l.w2 * rng.gen_range(-0.5..0.5) + l.w1 * rng.gen_range(-0.5..0.5);
                let p = l.elliptic_exp(z);
                let (x, y) = p.xy().unwrap();
                let back = l.elliptic_log(x, y);
                assert!(l.distance_to_lattice(back - z) < 1e-9, "{}: {z} -> {back}", e.name());
            }
        }
    }

    #[test]
    fn real_period_matches_quadrature() {
        // w1 = 2 int_{e1}^inf dx / sqrt(f) = 4 int_0^inf dt / sqrt(g(e1 + t^2)), f = (x - e1) g
        for e in [curve_11a(), curve_37a(), curve_389a(), curve_43a()] {
            let m = e.model();
            let (b2, b4, b6) = (m.b2() as f64, m.b4() as f64, m.b6() as f64);
            let e1 = two_division_roots(b2, b4, b6)[0];
            let g = |x: f64| 4.0 * x * x + (4.0 * e1 + b2) * x + (4.0 * e1 * e1 + b2 * e1 + 2.0 * b4);
            let n = 20000;
            let h = (PI / 2.0) / n as f64;
            let integrand = |th: f64| {
                if th >= PI / 2.0 {
                    return 0.5; // t -> inf: sec^2 / (2 t^2) -> 1/2
                }
                let t = th.tan();
                1.0 / (th.cos().powi(2) * g(e1 + t * t).sqrt())
            };
            let mut sum = integrand(0.0) + integrand(PI / 2.0);
            for k in 1..n {
                sum += integrand(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            let w1 = 4.0 * sum * h / 3.0;
            let l = PeriodLattice::new(m);
            assert!((l.w1 - w1).abs() < 1e-9, "{}: {} vs {}", e.name(), l.w1, w1);
        }
    }
}
