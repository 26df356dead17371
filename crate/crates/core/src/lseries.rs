//! Central values and derivatives of L(E, s) by rapidly convergent
//! exponential sums, numeric root numbers and quadratic twists.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::ec::{an_series, AnSeries, CurveQ, EcError, Weierstrass};
use crate::quadforms::{Discriminant, QfError};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default target for truncation error of the sums.
pub const DEFAULT_TAIL: f64 = 1e-12;
/// Acceptance bound on the functional-equation defect.
pub const FE_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_NONVANISHING: f64 = 1e-3;

/// Points `t` at which the Fricke symmetry of `f(iy)` is tested.
const FE_POINTS: [f64; 4] = [1.1, 1.2, 1.35, 1.5];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LError {
    #[error("root number inconclusive: residuals {plus:e} (+1) and {minus:e} (-1)")]
    Inconclusive { plus: f64, minus: f64 },
    #[error("twist by {d} not allowed: {reason}")]
    BadTwist { d: i64, reason: &'static str },
    #[error("Heegner hypothesis fails: {p} does not split in Q(sqrt({d}))")]
    HeegnerHypothesis { p: u64, d: i64 },
    #[error(transparent)]
    Ec(#[from] EcError),
    #[error(transparent)]
    Qf(#[from] QfError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LEval {
    pub value_at_1: f64,
    pub derivative_at_1: f64,
    pub epsilon: i8,
    pub terms_used: usize,
    pub tail_bound: f64,
    pub fe_residual: f64,
}

/// Exponential integral `E1(x) = int_x^inf e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs a positive argument");
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz on e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Terms `M` with `sum_{n > M} 4 e^{-x n} / w(n) < tail`, where `w` is 1 or
/// `x n` (the latter bounds the `E1` weights).
fn terms_for(x: f64, tail: f64) -> usize {
    let geom = 1.0 - (-x).exp();
    let mut m = ((4.0 / (tail * geom)).ln() / x).ceil().max(1.0) as usize;
    while tail_sum(x, m) > tail {
        m += 1;
    }
    m
}

fn tail_sum(x: f64, m: usize) -> f64 {
    4.0 * (-x * (m + 1) as f64).exp() / (1.0 - (-x).exp())
}

/// Fricke symmetry defect of `f(iy) = sum a_n e^{-2 pi n y}` for sign `eps`:
/// the largest `|f(i/(t sqrt N)) - eps t^2 f(i t / sqrt N)|` over the test points.
pub fn fe_residual(an: &AnSeries, conductor: u64, eps: i8) -> f64 {
    let sq = (conductor as f64).sqrt();
    let g = |y: f64| -> f64 { pairwise_sum(an.iter().map(|(n, a)| a as f64 * (-2.0 * PI * n as f64 * y).exp())) };
    FE_POINTS.iter().map(|&t| (g(1.0 / (t * sq)) - eps as f64 * t * t * g(t / sq)).abs()).fold(0.0, f64::max)
}

/// Fixed-order pairwise summation.
fn pairwise_sum(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    fn rec(v: &[f64]) -> f64 {
        if v.len() <= 16 {
            return v.iter().sum();
        }
        let (l, r) = v.split_at(v.len() / 2);
        rec(l) + rec(r)
    }
    rec(&v)
}

/// Number of coefficients needed for the root number test at `tail`.
/// Never looser than `FE_TOLERANCE / 1e4`, so the sign test is decisive
/// whatever the requested L-value precision.
fn fe_terms(conductor: u64, tail: f64) -> usize {
    let t = FE_POINTS[FE_POINTS.len() - 1];
    terms_for(2.0 * PI / (t * (conductor as f64).sqrt()), tail.min(FE_TOLERANCE * 1e-4))
}

/// Root number from the coefficient sequence; `an` must be long enough
/// for [`fe_terms`].
pub fn root_number_from_series(an: &AnSeries, conductor: u64) -> Result<(i8, f64), LError> {
    let plus = fe_residual(an, conductor, 1);
    let minus = fe_residual(an, conductor, -1);
    let (eps, best, other) = if plus <= minus { (1, plus, minus) } else { (-1, minus, plus) };
    if best > FE_TOLERANCE || other < 100.0 * FE_TOLERANCE {
        return Err(LError::Inconclusive { plus, minus });
    }
    Ok((eps, best))
}

pub fn root_number(curve: &CurveQ, tail: f64) -> Result<(i8, f64), LError> {
    let n = fe_terms(curve.conductor(), tail);
    root_number_from_series(&an_series(curve, n)?, curve.conductor())
}

/// `L(1)`, `L'(1)` and the root number for a series of the given conductor.
///
/// `coeffs(n)` must return `a_1..a_n`.
pub fn l_eval_with(
    conductor: u64,
    tail: f64,
    coeffs: impl Fn(usize) -> Result<AnSeries, LError>,
) -> Result<LEval, LError> {
    let sq = (conductor as f64).sqrt();
    let x = 2.0 * PI / sq;
    let m = terms_for(x, tail);
    let an = coeffs(m.max(fe_terms(conductor, tail)))?;
    let (eps, fe) = root_number_from_series(&an, conductor)?;
    let head = an.as_slice()[..m].iter().enumerate().map(|(i, &a)| (i + 1, a));
    let (value, derivative, bound) = if eps == 1 {
        let v = 2.0 * pairwise_sum(head.map(|(n, a)| a as f64 / n as f64 * (-x * n as f64).exp()));
        // Lambda'(1) = 0 gives L'(1) = L(1) (log 2pi + gamma - log N / 2)
        let d = v * ((2.0 * PI).ln() + EULER_GAMMA - 0.5 * (conductor as f64).ln());
        (v, d, tail_sum(x, m))
    } else {
        let d = 2.0 * pairwise_sum(head.map(|(n, a)| a as f64 / n as f64 * exp_integral_e1(x * n as f64)));
        (0.0, d, tail_sum(x, m) / x)
    };
    Ok(LEval {
        value_at_1: value,
        derivative_at_1: derivative,
        epsilon: eps,
        terms_used: m,
        tail_bound: bound,
        fe_residual: fe,
    })
}

pub fn l_eval(curve: &CurveQ, tail: f64) -> Result<LEval, LError> {
    l_eval_with(curve.conductor(), tail, |n| Ok(an_series(curve, n)?))
}

/// The quadratic twist `E_d` of a curve by a fundamental discriminant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub base: CurveQ,
    pub d: i64,
    /// `y^2 = x^3 - 27 c4 d^2 x - 54 c6 d^3`; not minimal in general.
    pub model: Weierstrass,
    pub conductor: u64,
}

impl TwistSpec {
    /// `a_n(E_d) = a_n(E) (d/n)`.
    pub fn an(&self, n_max: usize) -> Result<AnSeries, EcError> {
        let base = an_series(&self.base, n_max)?;
        Ok(base.twisted(|n| arith::kronecker(self.d, n)))
    }

    pub fn l_eval(&self, tail: f64) -> Result<LEval, LError> {
        l_eval_with(self.conductor, tail, |n| Ok(self.an(n)?))
    }
}

pub fn twist(curve: &CurveQ, d: i64) -> Result<TwistSpec, LError> {
    if d != 1 && !crate::quadforms::is_fundamental(d) {
        return Err(LError::BadTwist { d, reason: "not a fundamental discriminant" });
    }
    if arith::gcd(d, curve.conductor() as i64) != 1 {
        return Err(LError::BadTwist { d, reason: "not coprime to the conductor" });
    }
    if d == 1 {
        return Ok(TwistSpec { base: curve.clone(), d, model: *curve.model(), conductor: curve.conductor() });
    }
    let m = curve.model();
    let d128 = d as i128;
    let a4 = -27 * m.c4() * d128 * d128;
    let a6 = -54 * m.c6() * d128 * d128 * d128;
    let fits = |v: i128| i64::try_from(v).map_err(|_| LError::BadTwist { d, reason: "twisted model overflows i64" });
    let conductor = (curve.conductor() as u128 * (d * d) as u128) as u64;
    Ok(TwistSpec { base: curve.clone(), d, model: Weierstrass::new(0, 0, 0, fits(a4)?, fits(a6)?), conductor })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LOverK {
    /// `L'(E/K, 1)`, the derivative of `L(E, s) L(E_d, s)` at 1.
    pub value: f64,
    pub nonzero: bool,
    pub base: LEval,
    pub twist: LEval,
}

/// Every prime dividing `N` splits in `K`.
pub fn heegner_hypothesis(curve: &CurveQ, d_k: &Discriminant) -> Result<(), LError> {
    for p in curve.bad_primes() {
        if arith::kronecker(d_k.value(), p as i64) != 1 {
            return Err(LError::HeegnerHypothesis { p, d: d_k.value() });
        }
    }
    Ok(())
}

pub fn l_over_k(curve: &CurveQ, d_k: &Discriminant, tail: f64, threshold: f64) -> Result<LOverK, LError> {
    heegner_hypothesis(curve, d_k)?;
    let base = l_eval(curve, tail)?;
    let tw = twist(curve, d_k.value())?.l_eval(tail)?;
    let value =
        if base.epsilon == -1 { base.derivative_at_1 * tw.value_at_1 } else { base.value_at_1 * tw.derivative_at_1 };
    Ok(LOverK { value, nonzero: value.abs() > threshold, base, twist: tw })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankGate {
    Rank0,
    Rank1,
    NotEligible,
}

/// Classifies analytic rank 0 or 1 from nonvanishing of `L(1)` or `L'(1)`.
/// Inconclusive evaluations are treated as not eligible.
pub fn analytic_rank_gate(curve: &CurveQ, tail: f64, threshold: f64) -> RankGate {
    match l_eval(curve, tail) {
        Ok(l) if l.epsilon == 1 && l.value_at_1.abs() > threshold => RankGate::Rank0,
        Ok(l) if l.epsilon == -1 && l.derivative_at_1.abs() > threshold => RankGate::Rank1,
        _ => RankGate::NotEligible,
    }
}
