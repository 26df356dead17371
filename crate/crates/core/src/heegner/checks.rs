//! Traces of Heegner points, torsion tests, the trace relation between
//! conductors `1` and `l`, and the comparison of `P_K` with `L'(E/K, 1)`.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::height::{canonical_height, point_with_x, recognize_rational, twist_point, Recognized};
use super::lattice::{CPoint, PeriodLattice};
use super::orbit::{check_conductor, extend_class, heegner_orbit};
use super::param::{terms_for, Parametrization, MIN_IM_TAU};
use super::HeegnerError;
use crate::arith;
use crate::ec::count::ap_any;
use crate::ec::{CurveQ, RationalPoint, Weierstrass};
use crate::lseries;
use crate::quadforms::Discriminant;

/// Torsion orders considered (all orders occurring over Q).
pub const TORSION_BOUND: u32 = 16;
/// Largest denominator accepted by rational recognition.
pub const RECOGNITION_DENOMINATOR: u64 = 1_000_000;
/// Relative agreement required of a recognized coordinate.
const RECOGNITION_TOL: f64 = 1e-7;

/// Smallest `k <= bound` with `k z` within `tol` of the lattice.
pub fn is_torsion(lattice: &PeriodLattice, z: Complex64, bound: u32, tol: f64) -> Option<u32> {
    (1..=bound).find(|&k| lattice.distance_to_lattice(z * k as f64) < tol)
}

/// The `k`-division point `(i v1 + j v2)/k` of the reduced basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Translate {
    pub k: u32,
    pub i: u32,
    pub j: u32,
}

/// Distance from `z` to the nearest torsion translate of order `<= bound`.
fn nearest_translate(lattice: &PeriodLattice, z: Complex64, bound: u32) -> (f64, Translate) {
    let (v1, v2) = lattice.basis();
    let mut best = (lattice.distance_to_lattice(z), Translate { k: 1, i: 0, j: 0 });
    for k in 2..=bound {
        for i in 0..k {
            for j in 0..k {
                let t = (v1 * i as f64 + v2 * j as f64) / k as f64;
                let dist = lattice.distance_to_lattice(z - t);
                if dist < best.0 - 1e-15 {
                    best = (dist, Translate { k, i, j });
                }
            }
        }
    }
    best
}

/// `P_K`, the sum of the Heegner points of conductor 1 over all classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceToK {
    pub d_k: i64,
    pub orbit_size: usize,
    pub n_terms: usize,
    pub tail_bound: f64,
    pub z: Complex64,
    pub point: CPoint,
    pub torsion_order: Option<u32>,
    /// Rational representative of `P_K + t` for the torsion translate `t`.
    pub recognized: Option<Recognized>,
    pub translate: Option<Translate>,
    /// Canonical height of the recognized rational representative.
    pub height: Option<f64>,
    #[serde(skip)]
    pub rational: Option<(Weierstrass, RationalPoint)>,
}

impl TraceToK {
    pub fn is_torsion(&self) -> bool {
        self.torsion_order.is_some()
    }
}

fn real_part(v: Complex64) -> Option<f64> {
    (v.im.abs() <= 1e-6 * (1.0 + v.norm())).then_some(v.re)
}

/// Rational representative of one point from two evaluations at different
/// precisions; both must recognize to the same `x`.
fn recognize_point(
    curve: &CurveQ,
    d_k: i64,
    lo: &CPoint,
    hi: &CPoint,
) -> Option<(Recognized, Weierstrass, RationalPoint)> {
    let model = *curve.model();
    let (Some((x_lo, _)), Some((x_hi, y_hi))) = (lo.xy(), hi.xy()) else {
        if lo.is_identity() && hi.is_identity() {
            return Some((Recognized::Identity, model, RationalPoint::Infinity));
        }
        return None;
    };
    let x_hi_re = real_part(x_hi)?;
    let r_lo = recognize_rational(real_part(x_lo)?, RECOGNITION_DENOMINATOR, RECOGNITION_TOL)?;
    let r_hi = recognize_rational(x_hi_re, RECOGNITION_DENOMINATOR, RECOGNITION_TOL)?;
    if r_lo != r_hi {
        return None;
    }
    let x: BigRational = r_hi;
    if let Some(yr) = real_part(y_hi) {
        if let Some(p) = point_with_x(&model, &x, yr) {
            if let RationalPoint::Affine { x, y } = &p {
                return Some((Recognized::OnCurve { x: x.to_string(), y: y.to_string() }, model, p));
            }
        }
    }
    let big_y = y_hi * 2.0 + x_hi * model.a1 as f64 + model.a3 as f64;
    let tw = lseries::twist(curve, d_k).ok()?;
    let p = twist_point(&model, d_k, &x, big_y.im)?;
    if !tw.model.on_curve(&p) {
        return None;
    }
    let RationalPoint::Affine { x: tx, y: ty } = &p else { return None };
    let rec = Recognized::OnTwist { d: d_k, x: tx.to_string(), y: ty.to_string(), curve_x: x.to_string() };
    Some((rec, tw.model, p))
}

type Representative = (Recognized, Weierstrass, RationalPoint, Translate);

/// Rational representative of `P_K` up to a torsion translate of order
/// `<= TORSION_BOUND`, trying the untranslated point first.
fn recognize(
    curve: &CurveQ,
    d_k: i64,
    lattice: &PeriodLattice,
    z_lo: Complex64,
    z_hi: Complex64,
) -> Option<Representative> {
    let (v1, v2) = lattice.basis();
    for k in 1..=TORSION_BOUND {
        for i in 0..k {
            for j in 0..k {
                if arith::gcd(arith::gcd(i as i64, j as i64), k as i64) != 1 {
                    continue;
                }
                let t = (v1 * i as f64 + v2 * j as f64) / k as f64;
                let hi = lattice.elliptic_exp(z_hi + t);
                if let Some((x, _)) = hi.xy() {
                    if real_part(x).is_none() {
                        continue;
                    }
                }
                let lo = lattice.elliptic_exp(z_lo + t);
                if let Some((rec, model, p)) = recognize_point(curve, d_k, &lo, &hi) {
                    return Some((rec, model, p, Translate { k, i, j }));
                }
            }
        }
    }
    None
}

/// Sum of the `h(d_K)` conjugate Heegner points of conductor 1, with rational
/// recognition of the result.
pub fn trace_to_k(curve: &CurveQ, d_k: &Discriminant, precision: f64) -> Result<TraceToK, HeegnerError> {
    let orbit = heegner_orbit(curve, d_k, 1)?;
    let im = orbit.min_im_tau();
    let n_lo = terms_for(im, precision)?;
    let n_hi = terms_for(im, precision * 1e-3)?;
    let param = Parametrization::new(curve, n_hi)?;
    let sum = |n: usize| orbit.taus.iter().map(|t| param.raw(t.tau, n)).sum::<Complex64>();
    let (z_lo, z_hi) = (sum(n_lo), sum(n_hi));
    let lattice = &param.lattice;
    let p_hi = lattice.elliptic_exp(z_hi);
    let rec = recognize(curve, d_k.value(), lattice, z_lo, z_hi);
    let (torsion_order, height) = match &rec {
        Some((_, model, p, _)) => {
            let t = model.torsion_order(p, TORSION_BOUND);
            (t, canonical_height(model, p))
        }
        None => (is_torsion(lattice, z_hi, TORSION_BOUND, 1e-6 * lattice.w1), None),
    };
    Ok(TraceToK {
        d_k: d_k.value(),
        orbit_size: orbit.len(),
        n_terms: n_hi,
        tail_bound: super::param::tail_bound(im, n_hi) * orbit.len() as f64,
        z: lattice.reduce(z_hi),
        point: p_hi,
        torsion_order,
        height,
        recognized: rec.as_ref().map(|r| r.0.clone()),
        translate: rec.as_ref().map(|r| r.3),
        rational: rec.map(|r| (r.1, r.2)),
    })
}

/// Outcome of comparing the trace of the conductor-`l` Heegner points over a
/// fixed conductor-1 class with `a_l` times the conductor-1 point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRelationReport {
    pub d_k: i64,
    pub ell: u64,
    pub a_ell: i64,
    pub orbit_size: usize,
    pub expected_size: usize,
    pub n_terms: usize,
    pub min_im_tau: f64,
    /// Distance in `C/Lambda` with no sign change or translate.
    pub raw_residual: f64,
    /// Minimum over sign and torsion translates of order `<= 16`.
    pub residual: f64,
    pub sign: i8,
    pub translate: Translate,
    /// `|sum_j phi((tau + j)/l) + phi(l tau) - a_l phi(tau)|` at the base
    /// point; absent when `Im(tau)/l` is below [`MIN_IM_TAU`].
    pub hecke_residual: Option<f64>,
    pub precision: f64,
    pub passed: bool,
}

/// Units of `O_K` modulo `+-1`.
fn unit_index(d_k: i64) -> usize {
    match d_k {
        -3 => 3,
        -4 => 2,
        _ => 1,
    }
}

/// Checks `Tr(P_l) = a_l P_1` for an inert auxiliary prime `l`, choosing the
/// number of terms from `precision`.
pub fn trace_relation_check(
    curve: &CurveQ,
    d_k: &Discriminant,
    ell: u64,
    precision: f64,
) -> Result<TraceRelationReport, HeegnerError> {
    let level = heegner_orbit(curve, d_k, ell)?;
    let base = heegner_orbit(curve, d_k, 1)?;
    let mut n = terms_for(level.min_im_tau().min(base.min_im_tau()), precision * 1e-3)?;
    if let Ok(m) = terms_for(base.min_im_tau() / ell as f64, precision * 1e-3) {
        n = n.max(m);
    }
    trace_relation_check_with_terms(curve, d_k, ell, n, precision)
}

/// As [`trace_relation_check`] with an explicit number of terms.
pub fn trace_relation_check_with_terms(
    curve: &CurveQ,
    d_k: &Discriminant,
    ell: u64,
    n_terms: usize,
    precision: f64,
) -> Result<TraceRelationReport, HeegnerError> {
    if !arith::is_prime(ell) {
        return Err(HeegnerError::BadAuxiliaryPrime(ell));
    }
    check_conductor(curve, d_k, ell).map_err(|_| HeegnerError::BadAuxiliaryPrime(ell))?;
    let level = heegner_orbit(curve, d_k, ell)?;
    let base = heegner_orbit(curve, d_k, 1)?;
    let base_tau = base.taus[0];
    let fiber: Vec<_> = level
        .taus
        .iter()
        .filter(|t| extend_class(&t.class, ell).map(|c| c == base_tau.class).unwrap_or(false))
        .collect();
    let a_ell = ap_any(curve, ell)?;
    let param = Parametrization::new(curve, n_terms)?;
    let lattice = &param.lattice;
    let trace: Complex64 = fiber.iter().map(|t| param.raw(t.tau, n_terms)).sum();
    let z1 = param.raw(base_tau.tau, n_terms);
    let target = z1 * a_ell as f64;
    let raw_residual = lattice.distance_to_lattice(trace - target);
    let (mut residual, mut translate) = nearest_translate(lattice, trace - target, 16);
    let mut sign = 1i8;
    let (r_minus, t_minus) = nearest_translate(lattice, trace + target, 16);
    if r_minus < residual - 1e-15 {
        (residual, translate, sign) = (r_minus, t_minus, -1);
    }
    let l = ell as f64;
    let hecke = (base_tau.tau.im / l >= MIN_IM_TAU).then(|| {
        let s: Complex64 = (0..ell).map(|j| param.raw((base_tau.tau + j as f64) / l, n_terms)).sum();
        (s + param.raw(base_tau.tau * l, n_terms) - target).norm()
    });
    let expected_size = (ell as usize + 1) / unit_index(d_k.value());
    let min_im_tau = level.min_im_tau().min(base_tau.tau.im);
    Ok(TraceRelationReport {
        d_k: d_k.value(),
        ell,
        a_ell,
        orbit_size: fiber.len(),
        expected_size,
        n_terms,
        min_im_tau,
        raw_residual,
        residual,
        sign,
        translate,
        hecke_residual: hecke,
        precision,
        passed: residual < precision && fiber.len() == expected_size,
    })
}

/// `(P_K non-torsion) <=> (L'(E/K, 1) != 0)`.
pub fn gz_biconditional(p_k_nontorsion: bool, l_nonzero: bool) -> bool {
    p_k_nontorsion == l_nonzero
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GzReport {
    pub d_k: i64,
    pub l_prime_over_k: f64,
    pub l_nonzero: bool,
    pub p_k_nontorsion: bool,
    /// Canonical height of the recognized `P_K`.
    pub height: Option<f64>,
    /// Distance of `log P_K` from the torsion translates; zero for torsion.
    pub norm_proxy: f64,
    /// `height / L'(E/K, 1)` when both are available and nonzero.
    pub ratio: Option<f64>,
    pub biconditional: bool,
}

/// Compares `P_K` with `L'(E/K, 1)`.
pub fn gz_correspondence(
    curve: &CurveQ,
    d_k: &Discriminant,
    precision: f64,
    threshold: f64,
) -> Result<GzReport, HeegnerError> {
    let pk = trace_to_k(curve, d_k, precision)?;
    let l = lseries::l_over_k(curve, d_k, lseries::DEFAULT_TAIL, threshold)?;
    let lattice = PeriodLattice::new(curve.model());
    let (norm_proxy, _) = nearest_translate(&lattice, pk.z, TORSION_BOUND);
    let nontorsion = !pk.is_torsion();
    let ratio = match pk.height {
        Some(h) if h > 0.0 && l.nonzero => Some(h / l.value),
        _ => None,
    };
    Ok(GzReport {
        d_k: d_k.value(),
        l_prime_over_k: l.value,
        l_nonzero: l.nonzero,
        p_k_nontorsion: nontorsion,
        height: pk.height,
        norm_proxy,
        ratio,
        biconditional: gz_biconditional(nontorsion, l.nonzero),
    })
}
