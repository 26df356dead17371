//! Dirichlet coefficients of L(E, s) from the Euler product.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::count::{self, ReductionType};
use super::{CurveQ, EcError};
use crate::arith;

/// `a_1 .. a_{n_max}` of L(E, s).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnSeries {
    coeffs: Vec<i64>,
}

impl AnSeries {
    pub fn from_vec(coeffs: Vec<i64>) -> Self {
        Self { coeffs }
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_n` for `1 <= n <= n_max`.
    pub fn get(&self, n: usize) -> i64 {
        self.coeffs[n - 1]
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &a)| (i + 1, a))
    }

    /// Twist by a character: `a_n * chi(n)`.
    pub fn twisted(&self, chi: impl Fn(i64) -> i32) -> AnSeries {
        AnSeries { coeffs: self.iter().map(|(n, a)| a * chi(n as i64) as i64).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Computed,
    Cache,
}

/// `a_p` values keyed by prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApTable {
    pub values: BTreeMap<u64, i64>,
    pub provenance: Provenance,
}

impl ApTable {
    /// `a_p` at every good prime up to `pmax`.
    pub fn compute(curve: &CurveQ, pmax: u64) -> Result<Self, EcError> {
        let mut values = BTreeMap::new();
        for p in arith::primes_up_to(pmax) {
            if curve.good_reduction(p) {
                values.insert(p, count::ap(curve, p)?);
            }
        }
        Ok(Self { values, provenance: Provenance::Computed })
    }

    /// Merge another table in; entries must agree where both are present.
    pub fn merge(&mut self, other: &ApTable) -> Result<(), EcError> {
        for (&p, &a) in &other.values {
            if let Some(&mine) = self.values.get(&p) {
                if mine != a {
                    return Err(EcError::Inconsistent { p, left: mine, right: a });
                }
            }
            self.values.insert(p, a);
        }
        Ok(())
    }

    /// Whether every entry satisfies `a_p^2 <= 4p`.
    pub fn satisfies_hasse(&self) -> bool {
        self.values.iter().all(|(&p, &a)| hasse_ok(p, a))
    }
}

pub fn hasse_ok(p: u64, a: i64) -> bool {
    (a as i128) * (a as i128) <= 4 * p as i128
}

/// Dirichlet coefficients `a_1 .. a_{n_max}`.
///
/// Good primes use point counts and `a_{p^k} = a_p a_{p^{k-1}} - p a_{p^{k-2}}`;
/// multiplicative primes `a_{p^k} = a_p^k`; additive primes vanish.
pub fn an_series(curve: &CurveQ, n_max: usize) -> Result<AnSeries, EcError> {
    let mut local = BTreeMap::new();
    for p in arith::primes_up_to(n_max as u64) {
        let ap = if curve.good_reduction(p) {
            count::ap(curve, p)?
        } else {
            match count::reduction_type(curve.model(), p)? {
                ReductionType::Good => {
                    return Err(EcError::ConductorMismatch { p, reason: "conductor prime with good reduction" })
                }
                t => t.bad_ap().unwrap_or(0),
            }
        };
        local.insert(p, ap);
    }
    Ok(an_from_ap(n_max, |p| (local[&p], curve.good_reduction(p))))
}

/// Multiplicative extension of prime data `p -> (a_p, good)` to `1..=n_max`.
pub fn an_from_ap(n_max: usize, ap: impl Fn(u64) -> (i64, bool)) -> AnSeries {
    if n_max == 0 {
        return AnSeries::from_vec(Vec::new());
    }
    // smallest prime factor sieve
    let mut spf = vec![0usize; n_max + 1];
    for i in 2..=n_max {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n_max {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let mut a = vec![0i64; n_max + 1];
    a[1] = 1;
    for n in 2..=n_max {
        let p = spf[n];
        let mut m = n;
        let mut pk = 1;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        if m > 1 {
            a[n] = a[pk] * a[m];
            continue;
        }
        // n = p^k
        let (ap, good) = ap(p as u64);
        if pk == p {
            a[n] = ap;
        } else if good {
            a[n] = ap * a[n / p] - p as i64 * a[n / p / p];
        } else {
            a[n] = ap * a[n / p];
        }
    }
    a.remove(0);
    AnSeries::from_vec(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ec::count::count_points_ext;
    use crate::ec::known::*;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let e = curve_37a();
        assert_eq!(an_series(&e, 1).unwrap().as_slice(), &[1]);
        let s = an_series(&e, 6).unwrap();
        assert_eq!(s.get(6), s.get(2) * s.get(3));
        assert_eq!(an_series(&e, 4).unwrap().get(4), 2);
    }

    #[test]
    fn known_prefix_11a() {
        // q - 2q^2 - q^3 + 2q^4 + q^5 + 2q^6 - 2q^7 - 2q^9 - 2q^10 + q^11 - 2q^12 + 4q^13
        let s = an_series(&curve_11a(), 13).unwrap();
        assert_eq!(s.as_slice(), &[1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4]);
    }

    #[test]
    fn known_prefix_37a() {
        let s = an_series(&curve_37a(), 12).unwrap();
        assert_eq!(s.as_slice(), &[1, -2, -3, 2, -2, 6, -1, 0, 6, 4, -5, -6]);
    }

    #[test]
    fn ap_square_recursion_matches_fp2_count() {
        for e in [curve_11a(), curve_37a(), curve_64a()] {
            let s = an_series(&e, 2500).unwrap();
            for p in arith::primes_up_to(50) {
                if !e.good_reduction(p) {
                    continue;
                }
                let n2 = count_points_ext(e.model(), p, 2).unwrap() as i64;
                let p = p as i64;
                // #E(F_{p^2}) = p^2 + 1 - (a_p^2 - 2p) and a_{p^2} = a_p^2 - p
                let frob2 = p * p + 1 - n2;
                assert_eq!(s.get((p * p) as usize), frob2 + p, "{} p={p}", e.name());
            }
        }
    }

    #[test]
    fn hasse_bound_small_range() {
        let t = ApTable::compute(&curve_37a(), 2000).unwrap();
        assert!(t.satisfies_hasse());
        assert_eq!(t.provenance, Provenance::Computed);
    }

    #[test]
    fn merge_detects_disagreement() {
        let mut t = ApTable::compute(&curve_11a(), 50).unwrap();
        let mut other = t.clone();
        other.values.insert(3, 5);
        assert!(t.merge(&other).is_err());
    }

    proptest! {
        #[test]
        fn multiplicative_on_coprime_pairs(m in 1usize..60, n in 1usize..60) {
            prop_assume!(num_integer::Integer::gcd(&m, &n) == 1);
            let s = an_series(&curve_37a(), 3600).unwrap();
            prop_assert_eq!(s.get(m * n), s.get(m) * s.get(n));
        }
    }
}
