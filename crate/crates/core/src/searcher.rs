//! Searches for the auxiliary data of the construction: the imaginary
//! quadratic field `K`, the prime `q`, the sequence of inert primes `p_n`,
//! and exact counts in Cartan subgroups of `GL_2(Z/m)`.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::ec::{count, CurveQ, EcError};
use crate::lseries::{self, LError, LOverK, RankGate};
use crate::quadforms::{splitting_type, Discriminant, SplitType};

/// Largest modulus for which [`cartan_counts`] enumerates the group directly.
pub const CARTAN_ENUMERATION_BOUND: u64 = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("curve is not eligible (analytic rank gate: {0:?})")]
    NotEligible(RankGate),
    #[error("no admissible discriminant with |d_K| <= {0}")]
    NotFound(u64),
    #[error("prime bound {bound} exhausted with {} of {wanted} primes", found.len())]
    BoundExhausted { bound: u64, wanted: usize, found: Vec<PrimeSeqItem> },
    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("modulus {0} is not squarefree")]
    NotSquarefree(u64),
    #[error("modulus {m} exceeds the enumeration bound {bound}")]
    EnumerationBound { m: u64, bound: u64 },
    #[error("{b} is not a unit modulo {m}")]
    NotUnit { b: i64, m: u64 },
    #[error(transparent)]
    L(#[from] LError),
    #[error(transparent)]
    Ec(#[from] EcError),
}

/// Source of `a_p` values; lets callers put a cache in front of point counting.
pub trait ApSource: Sync {
    fn ap(&self, p: u64) -> Result<i64, EcError>;
}

impl ApSource for CurveQ {
    fn ap(&self, p: u64) -> Result<i64, EcError> {
        count::ap(self, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub scan_bound: u64,
    pub tail: f64,
    pub nonvanishing: f64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { scan_bound: 500, tail: lseries::DEFAULT_TAIL, nonvanishing: lseries::DEFAULT_NONVANISHING }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSearchResult {
    pub d_k: i64,
    /// `d_K = 1 mod 4` (with `|d_K| > 4`).
    pub cong4: bool,
    /// Coprime to `2N`, and to `d_F N` for a CM field `F`.
    pub coprime: bool,
    /// Every prime of `N` splits in `K`.
    pub heegner: bool,
    pub lprime_nonzero: bool,
    pub l_over_k: Option<LOverK>,
    /// Candidates examined before acceptance, including the accepted one.
    pub candidates_scanned: usize,
}

impl FieldSearchResult {
    pub fn accepted(&self) -> bool {
        self.cong4 && self.coprime && self.heegner && self.lprime_nonzero
    }
}

/// Conditions on a candidate `d` other than the L-value, evaluated in order.
fn field_flags(curve: &CurveQ, d: i64, cm_field: Option<&Discriminant>) -> (bool, bool, bool) {
    let cong4 = d.rem_euclid(4) == 1 && d < -4 && crate::quadforms::is_fundamental(d);
    let n = curve.conductor() as i64;
    let mut coprime = arith::gcd(d, 2 * n) == 1;
    if let Some(f) = cm_field {
        coprime &= arith::gcd(d, f.value() * n) == 1;
    }
    let heegner = curve.bad_primes().iter().all(|&p| arith::kronecker(d, p as i64) == 1);
    (cong4, coprime, heegner)
}

/// Smallest admissible `|d_K| <= scan_bound`.
pub fn find_k(
    curve: &CurveQ,
    params: &SearchParams,
    cm_field: Option<&Discriminant>,
) -> Result<FieldSearchResult, SearchError> {
    let gate = lseries::analytic_rank_gate(curve, params.tail, params.nonvanishing);
    if gate == RankGate::NotEligible {
        return Err(SearchError::NotEligible(gate));
    }
    let mut scanned = 0;
    for abs_d in 5..=params.scan_bound {
        let d = -(abs_d as i64);
        let (cong4, coprime, heegner) = field_flags(curve, d, cm_field);
        if !cong4 {
            continue;
        }
        scanned += 1;
        if !(coprime && heegner) {
            continue;
        }
        let disc = Discriminant::fundamental(d).expect("checked fundamental");
        let l = lseries::l_over_k(curve, &disc, params.tail, params.nonvanishing)?;
        if l.nonzero {
            return Ok(FieldSearchResult {
                d_k: d,
                cong4,
                coprime,
                heegner,
                lprime_nonzero: true,
                l_over_k: Some(l),
                candidates_scanned: scanned,
            });
        }
    }
    Err(SearchError::NotFound(params.scan_bound))
}

/// `1 + 2|d_K|^4 / phi(|d_K|)`, the lower bound on `q` in the CM case.
pub fn cm_q_threshold(d_k: i64) -> f64 {
    let a = d_k.unsigned_abs();
    1.0 + 2.0 * (a as f64).powi(4) / arith::totient(a) as f64
}

/// Smallest odd prime `q` coprime to `2 d_K N`; in the CM case also
/// `(d_F/q) = 1` and `q > 1 + 2|d_K|^4/phi(|d_K|)`.
pub fn choose_q(curve: &CurveQ, d_k: &Discriminant, cm_field: Option<&Discriminant>) -> u64 {
    let n = curve.conductor() as i64;
    let mut q = 3;
    loop {
        let mut ok = arith::gcd(q as i64, 2 * d_k.value() * n) == 1;
        if let Some(f) = cm_field {
            ok &= arith::gcd(q as i64, f.value()) == 1
                && arith::kronecker(f.value(), q as i64) == 1
                && q as f64 > cm_q_threshold(d_k.value());
        }
        if ok {
            return q;
        }
        q = arith::next_prime(q);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeSeqItem {
    pub p: u64,
    /// `p = -1 mod q`
    pub cong_q: bool,
    pub inert: bool,
    pub good_red: bool,
    /// `q` does not divide `a_p`
    pub ap_ok: bool,
    pub a_p: Option<i64>,
    pub ap_mod_q: Option<i64>,
}

impl PrimeSeqItem {
    pub fn accepted(&self) -> bool {
        self.cong_q && self.inert && self.good_red && self.ap_ok
    }
}

/// Flags for a single prime. `a_p` is only computed when the other three
/// conditions hold.
pub fn evaluate_prime(
    curve: &CurveQ,
    d_k: &Discriminant,
    q: u64,
    p: u64,
    source: &dyn ApSource,
) -> Result<PrimeSeqItem, SearchError> {
    let cong_q = p % q == q - 1;
    let inert = splitting_type(d_k, p) == SplitType::Inert;
    let good_red = curve.good_reduction(p);
    let mut item = PrimeSeqItem { p, cong_q, inert, good_red, ap_ok: false, a_p: None, ap_mod_q: None };
    if cong_q && inert && good_red {
        let a = source.ap(p)?;
        let r = a.rem_euclid(q as i64);
        item.a_p = Some(a);
        item.ap_mod_q = Some(r);
        item.ap_ok = r != 0;
    }
    Ok(item)
}

/// The first `count` primes below `p_bound` satisfying all four conditions.
pub fn prime_sequence(
    curve: &CurveQ,
    d_k: &Discriminant,
    q: u64,
    count: usize,
    p_bound: u64,
    source: &dyn ApSource,
) -> Result<Vec<PrimeSeqItem>, SearchError> {
    let mut found = Vec::new();
    if count == 0 {
        return Ok(found);
    }
    // only primes = -1 mod q can qualify
    let mut p = q - 1;
    while p <= p_bound {
        if arith::is_prime(p) {
            let item = evaluate_prime(curve, d_k, q, p, source)?;
            if item.accepted() {
                found.push(item);
                if found.len() == count {
                    return Ok(found);
                }
            }
        }
        p += q;
    }
    Err(SearchError::BoundExhausted { bound: p_bound, wanted: count, found })
}

/// The residue `b mod q|d_K|` with `b = -1 mod q` and `b = a mod |d_K|`.
pub fn crt_target(q: u64, d_k: &Discriminant, a: i64) -> Result<(i64, u64), SearchError> {
    let m2 = d_k.value().unsigned_abs();
    let b = arith::crt(-1, q as i64, a, m2 as i64).ok_or(SearchError::NotCoprime(q, m2))?;
    Ok((b, q * m2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CartanType {
    Split,
    Nonsplit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanCountProblem {
    /// Squarefree modulus.
    pub m: u64,
    /// Cartan type at each prime dividing `m`, ascending by prime.
    pub types: Vec<(u64, CartanType)>,
    /// Target determinant, a unit mod `m`.
    pub b: i64,
    /// The trace condition is `Tr = 0 mod trace_modulus` (a divisor of `m`).
    pub trace_modulus: u64,
}

impl CartanCountProblem {
    /// Same Cartan type at every prime of `m`, trace condition modulo `m`.
    pub fn uniform(m: u64, ty: CartanType, b: i64) -> Self {
        let types = arith::prime_divisors(m as i128).into_iter().map(|p| (p, ty)).collect();
        Self { m, types, b, trace_modulus: m }
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.m == 0 || (self.m > 1 && !arith::is_squarefree(self.m as i64)) {
            return Err(SearchError::NotSquarefree(self.m));
        }
        if arith::gcd(self.b, self.m as i64) != 1 {
            return Err(SearchError::NotUnit { b: self.b, m: self.m });
        }
        let primes: Vec<u64> = self.types.iter().map(|t| t.0).collect();
        assert_eq!(primes, arith::prime_divisors(self.m as i128), "one Cartan type per prime of m");
        assert_eq!(self.m % self.trace_modulus, 0, "trace modulus must divide m");
        Ok(())
    }

    /// `W` mod `m` such that the Cartan subgroup is `{x I + y W}` invertible.
    fn generator(&self) -> [[i64; 2]; 2] {
        // combine per-prime generators by CRT, entrywise
        let mut w = [[0i64; 2]; 2];
        let mut modulus = 1i64;
        for &(p, ty) in &self.types {
            let wp = local_generator(p, ty);
            for i in 0..2 {
                for j in 0..2 {
                    w[i][j] = arith::crt(w[i][j], modulus, wp[i][j], p as i64).expect("distinct primes");
                }
            }
            modulus *= p as i64;
        }
        w
    }
}

/// Split: `diag(0, 1)`. Nonsplit: companion matrix of an irreducible
/// `X^2 - e` (odd `p`, `e` a non-residue) or `X^2 - X - 1` (`p = 2`).
fn local_generator(p: u64, ty: CartanType) -> [[i64; 2]; 2] {
    match ty {
        CartanType::Split => [[0, 0], [0, 1]],
        CartanType::Nonsplit if p == 2 => [[0, 1], [1, 1]],
        CartanType::Nonsplit => {
            let e = (2..p as i64).find(|&e| arith::kronecker(e, p as i64) == -1).unwrap();
            [[0, e], [1, 0]]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanCounts {
    pub det_count: u64,
    pub trace0_det_count: u64,
    pub group_order: u64,
    pub phi_m: u64,
}

/// Histogram of determinants over the Cartan subgroup, and the same
/// restricted to `Tr = 0 mod trace_modulus`, by direct enumeration.
fn enumerate_cartan(problem: &CartanCountProblem) -> (Vec<u64>, Vec<u64>) {
    let m = problem.m as i64;
    let w = problem.generator();
    let t = problem.trace_modulus as i64;
    let mut all = vec![0u64; m as usize];
    let mut tr0 = vec![0u64; m as usize];
    for x in 0..m {
        for y in 0..m {
            let a = (x + y * w[0][0]) % m;
            let b = y * w[0][1] % m;
            let c = y * w[1][0] % m;
            let d = (x + y * w[1][1]) % m;
            let det = (a * d - b * c).rem_euclid(m);
            if arith::gcd(det, m) != 1 {
                continue;
            }
            all[det as usize] += 1;
            if (a + d) % t == 0 {
                tr0[det as usize] += 1;
            }
        }
    }
    (all, tr0)
}

/// Exact counts by enumerating the Cartan subgroup of `GL_2(Z/m)`.
pub fn cartan_counts(problem: &CartanCountProblem) -> Result<CartanCounts, SearchError> {
    problem.validate()?;
    if problem.m > CARTAN_ENUMERATION_BOUND {
        return Err(SearchError::EnumerationBound { m: problem.m, bound: CARTAN_ENUMERATION_BOUND });
    }
    let (all, tr0) = enumerate_cartan(problem);
    let b = problem.b.rem_euclid(problem.m as i64) as usize;
    let counts = CartanCounts {
        det_count: all[b],
        trace0_det_count: tr0[b],
        group_order: all.iter().sum(),
        phi_m: arith::totient(problem.m),
    };
    assert!(counts.det_count >= counts.phi_m, "det fibre smaller than phi(m)");
    Ok(counts)
}

/// Determinant fibre sizes for every unit `b`, with the group order.
pub fn cartan_det_histogram(m: u64, ty: CartanType) -> Result<(Vec<(i64, u64)>, u64), SearchError> {
    let problem = CartanCountProblem::uniform(m, ty, 1);
    problem.validate()?;
    if m > CARTAN_ENUMERATION_BOUND {
        return Err(SearchError::EnumerationBound { m, bound: CARTAN_ENUMERATION_BOUND });
    }
    let (all, _) = enumerate_cartan(&problem);
    let order = all.iter().sum();
    let fibres = (0..m as i64).filter(|&b| arith::gcd(b, m as i64) == 1).map(|b| (b, all[b as usize])).collect();
    Ok((fibres, order))
}

/// Counts for the CM prime search with `m = q|d_K|`: elements with
/// `det = b mod m` and, among them, those with `Tr = 0 mod q`.
///
/// The Cartan subgroup is a product over primes, so both counts are
/// products of local counts; this works for `m` beyond the enumeration bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmCountReport {
    pub q: u64,
    pub m: u64,
    pub b: i64,
    pub det_count: u64,
    pub trace0_det_count: u64,
    /// `2 |d_K|^4`
    pub bound: u64,
    pub phi_m: u64,
    /// `det_count > trace0_det_count`: some element has nonzero trace mod `q`.
    pub nonzero_trace_exists: bool,
}

pub fn cm_trace_count(q: u64, d_k: &Discriminant, a: i64, d_f: &Discriminant) -> Result<CmCountReport, SearchError> {
    let (b, m) = crt_target(q, d_k, a)?;
    if !arith::is_squarefree(m as i64) {
        return Err(SearchError::NotSquarefree(m));
    }
    let mut det_count = 1u64;
    let mut tr0 = 1u64;
    for p in arith::prime_divisors(m as i128) {
        let ty = if arith::kronecker(d_f.value(), p as i64) == 1 { CartanType::Split } else { CartanType::Nonsplit };
        let local = CartanCountProblem { m: p, types: vec![(p, ty)], b: b.rem_euclid(p as i64), trace_modulus: p };
        let (all, t0) = enumerate_cartan(&local);
        let bb = local.b as usize;
        det_count *= all[bb];
        tr0 *= if p == q { t0[bb] } else { all[bb] };
    }
    let abs_d = d_k.value().unsigned_abs();
    Ok(CmCountReport {
        q,
        m,
        b,
        det_count,
        trace0_det_count: tr0,
        bound: 2 * abs_d.pow(4),
        phi_m: arith::totient(m),
        nonzero_trace_exists: det_count > tr0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::known::*;

    fn dk(d: i64) -> Discriminant {
        Discriminant::fundamental(d).unwrap()
    }

    #[test]
    fn field_for_37a_and_11a() {
        let r = find_k(&curve_37a(), &SearchParams::default(), None).unwrap();
        assert_eq!(r.d_k, -7);
        assert!(r.accepted());
        let r = find_k(&curve_11a(), &SearchParams::default(), None).unwrap();
        assert_eq!(r.d_k, -7);
        assert!(matches!(find_k(&curve_389a(), &SearchParams::default(), None), Err(SearchError::NotEligible(_))));
    }

    #[test]
    fn field_search_stable_under_bound() {
        let small = SearchParams { scan_bound: 10, ..Default::default() };
        let large = SearchParams { scan_bound: 2000, ..Default::default() };
        let e = curve_43a();
        let a = find_k(&e, &small, None).map(|r| r.d_k);
        let b = find_k(&e, &large, None).unwrap().d_k;
        if let Ok(a) = a {
            assert_eq!(a, b);
        } else {
            assert!(b.unsigned_abs() > 10);
        }
    }

    #[test]
    fn q_choices() {
        assert_eq!(choose_q(&curve_37a(), &dk(-7), None), 3);
        assert_eq!(choose_q(&curve_11a(), &dk(-7), None), 3);
        // 3 and 5 divide d_K = -15
        assert_eq!(choose_q(&curve_37a(), &dk(-15), None), 7);
        let t = cm_q_threshold(-7);
        assert!((t - (1.0 + 2.0 * 2401.0 / 6.0)).abs() < 1e-9);
        let q = choose_q(&curve_64a(), &dk(-7), Some(&dk(-4)));
        assert!(q as f64 > t && q % 4 == 1);
        assert_eq!(q, 809);
    }

    #[test]
    fn prime_sequence_37a() {
        let e = curve_37a();
        let seq = prime_sequence(&e, &dk(-7), 3, 3, 100_000, &e).unwrap();
        assert_eq!(seq[0].p, 5);
        assert_eq!(seq[0].a_p, Some(-2));
        let eleven = evaluate_prime(&e, &dk(-7), 3, 11, &e).unwrap();
        assert!(eleven.cong_q && !eleven.inert && !eleven.accepted());
        let three = evaluate_prime(&e, &dk(-7), 3, 3, &e).unwrap();
        assert!(!three.cong_q);
        for item in &seq {
            assert_eq!(arith::kronecker(-7, item.p as i64), -1);
            assert_eq!(item.p % 3, 2);
            assert_ne!(37 % item.p, 0);
            assert_ne!(count::ap(&e, item.p).unwrap().rem_euclid(3), 0);
        }
    }

    #[test]
    fn prime_sequence_reports_partial() {
        let e = curve_37a();
        match prime_sequence(&e, &dk(-7), 3, 50, 100, &e) {
            Err(SearchError::BoundExhausted { found, .. }) => assert!(!found.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn crt_examples() {
        assert_eq!(crt_target(3, &dk(-7), 3).unwrap(), (17, 21));
        assert_eq!(crt_target(3, &dk(-7), -1).unwrap(), (20, 21));
        assert!(crt_target(7, &dk(-7), 3).is_err());
    }

    #[test]
    fn cartan_examples() {
        let c = cartan_counts(&CartanCountProblem::uniform(5, CartanType::Split, 2)).unwrap();
        assert_eq!(c.det_count, 4);
        // diag(x, -x) has det -x^2 = 2, i.e. x^2 = 3: not a square mod 5
        assert_eq!(c.trace0_det_count, 0);
        let c = cartan_counts(&CartanCountProblem::uniform(5, CartanType::Split, 1)).unwrap();
        assert_eq!(c.trace0_det_count, 2);
        let c = cartan_counts(&CartanCountProblem::uniform(3, CartanType::Nonsplit, 2)).unwrap();
        assert_eq!((c.det_count, c.group_order), (4, 8));
        assert!(cartan_counts(&CartanCountProblem::uniform(4, CartanType::Split, 1)).is_err());
        assert!(cartan_counts(&CartanCountProblem::uniform(211, CartanType::Split, 1)).is_err());
    }

    #[test]
    fn cartan_orders_and_fibres() {
        for m in (1..=50u64).filter(|&m| m == 1 || arith::is_squarefree(m as i64)) {
            for ty in [CartanType::Split, CartanType::Nonsplit] {
                let (fibres, order) = cartan_det_histogram(m, ty).unwrap();
                let expected: u64 = arith::prime_divisors(m as i128)
                    .iter()
                    .map(|&p| if ty == CartanType::Split { (p - 1) * (p - 1) } else { p * p - 1 })
                    .product();
                assert_eq!(order, expected);
                assert_eq!(fibres.iter().map(|f| f.1).sum::<u64>(), order);
                assert!(fibres.iter().all(|f| f.1 >= arith::totient(m)));
            }
        }
    }

    #[test]
    fn cm_count_respects_bound() {
        let q = 809;
        let d = dk(-7);
        let f = dk(-4);
        for a in [3i64, 5, 6] {
            let r = cm_trace_count(q, &d, a, &f).unwrap();
            assert!(r.trace0_det_count <= r.bound);
            assert!(r.det_count >= r.phi_m);
            assert!(r.nonzero_trace_exists);
        }
    }
}
