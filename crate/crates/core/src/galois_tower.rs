//! Exact bookkeeping for the elementary abelian `q`-quotient of a ring class
//! tower: degrees, indices of finitely generated subgroups of `C_q^n`, the
//! `q`-adic divisibility witness, and the involution argument.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;

/// Work limit (subspaces times vectors) for exhaustive subgroup enumeration.
pub const ENUMERATION_LIMIT: u64 = 50_000_000;
/// Largest `q^n` accepted by [`index_bound_bruteforce`].
pub const MAX_GROUP_ORDER: u64 = 1_000_000;
/// Largest `k` tried when checking that a matrix has order `q^k`.
const MAX_ORDER_EXPONENT: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TowerError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{q} does not divide {p} + 1")]
    Divisibility { p: u64, q: u64 },
    #[error("vector of length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("C_{q}^{n} is beyond the enumeration bound")]
    EnumerationBound { q: u64, n: u32 },
    #[error("no contradiction derivable: {0}")]
    NoContradiction(String),
    #[error("witness level {needed} needs {needed} values of a_p, only {have} given")]
    InsufficientPrimes { needed: u32, have: usize },
    #[error("S is not an involution equal to -1")]
    NotMinusIdentity,
    #[error("matrix is not square of the ambient dimension")]
    BadMatrix,
    #[error("T does not have {q}-power order (checked up to {q}^{max_exp})")]
    NotQPowerOrder { q: u64, max_exp: u32 },
}

fn require_odd_prime(q: u64) -> Result<(), TowerError> {
    if q.is_multiple_of(2) || !arith::is_prime(q) {
        return Err(TowerError::NotOddPrime(q));
    }
    Ok(())
}

/// The level `n` of the tower: `Gal(H_n/H) = prod C_{p_i + 1}` and its
/// quotient `C_q^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub q: u64,
    pub primes: Vec<u64>,
    /// `p_i + 1`.
    pub factor_orders: Vec<u64>,
    /// `(p_i + 1) / q`, the orders of the factors cut out by the quotient.
    pub cofactor_orders: Vec<u64>,
    /// `prod (p_i + 1)` as a decimal string.
    pub full_degree: String,
    /// `q^n`.
    pub quotient_degree: String,
    pub quotient_invariants: Vec<u64>,
}

impl TowerLevel {
    pub fn n(&self) -> usize {
        self.primes.len()
    }
}

pub fn tower_structure(q: u64, primes: &[u64]) -> Result<TowerLevel, TowerError> {
    require_odd_prime(q)?;
    for &p in primes {
        if !arith::is_prime(p) {
            return Err(TowerError::NotPrime(p));
        }
        if (p + 1) % q != 0 {
            return Err(TowerError::Divisibility { p, q });
        }
    }
    let factor_orders: Vec<u64> = primes.iter().map(|p| p + 1).collect();
    let full: BigInt = factor_orders.iter().map(|&f| BigInt::from(f)).product();
    let quotient = num_traits::pow(BigInt::from(q), primes.len());
    Ok(TowerLevel {
        q,
        primes: primes.to_vec(),
        cofactor_orders: factor_orders.iter().map(|f| f / q).collect(),
        factor_orders,
        full_degree: full.to_string(),
        quotient_degree: quotient.to_string(),
        quotient_invariants: vec![q; primes.len()],
    })
}

/// Reduced row echelon basis of the span of `rows` over `F_q`.
fn rref(q: u64, n: usize, rows: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % q).collect()).collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][col] != 0) else { continue };
        m.swap(rank, piv);
        let inv = arith::invmod(m[rank][col] as i64, q as i64).expect("nonzero mod prime") as u64;
        for x in m[rank].iter_mut() {
            *x = *x * inv % q;
        }
        for i in 0..m.len() {
            if i != rank && m[i][col] != 0 {
                let f = m[i][col];
                for c in 0..n {
                    m[i][c] = (m[i][c] + q * q - f * m[rank][c] % q) % q;
                }
            }
        }
        rank += 1;
    }
    m.truncate(rank);
    m
}

/// A subgroup of `C_q^n` given by generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupFq {
    pub q: u64,
    pub n: u32,
    pub generators: Vec<Vec<u64>>,
    pub rank: u32,
    /// `q^(n - rank)`.
    pub index: u128,
}

impl SubgroupFq {
    pub fn new(q: u64, n: u32, generators: &[Vec<i64>]) -> Result<Self, TowerError> {
        if !arith::is_prime(q) {
            return Err(TowerError::NotPrime(q));
        }
        let gens: Vec<Vec<u64>> = generators
            .iter()
            .map(|g| {
                if g.len() != n as usize {
                    Err(TowerError::DimensionMismatch { expected: n as usize, got: g.len() })
                } else {
                    Ok(g.iter().map(|&x| x.rem_euclid(q as i64) as u64).collect())
                }
            })
            .collect::<Result<_, _>>()?;
        let rank = rref(q, n as usize, &gens).len() as u32;
        Ok(SubgroupFq { q, n, generators: gens, rank, index: (q as u128).pow(n - rank) })
    }

    pub fn order(&self) -> u128 {
        (self.q as u128).pow(self.rank)
    }
}

/// Index of the subgroup of `C_q^n` generated by `generators`.
pub fn subgroup_index(q: u64, n: u32, generators: &[Vec<i64>]) -> Result<u128, TowerError> {
    Ok(SubgroupFq::new(q, n, generators)?.index)
}

/// Exhaustive minimum index over subgroups of `C_q^n` generated by `r` elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBound {
    pub q: u64,
    pub n: u32,
    pub r: u32,
    pub min_index: u128,
    /// `q^(n - r)`, or 1 once `r >= n`.
    pub bound: u128,
    pub subgroups_examined: usize,
    pub bound_holds: bool,
    pub attained: bool,
}

pub fn index_bound_bruteforce(q: u64, n: u32, r: u32) -> Result<IndexBound, TowerError> {
    if !arith::is_prime(q) {
        return Err(TowerError::NotPrime(q));
    }
    let order = (q as u128).checked_pow(n).filter(|&o| o <= MAX_GROUP_ORDER as u128);
    let Some(order) = order else { return Err(TowerError::EnumerationBound { q, n }) };
    let vectors: Vec<Vec<u64>> = (0..order as u64)
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = k % q;
                    k /= q;
                    d
                })
                .collect()
        })
        .collect();
    // subgroups generated by at most t elements, as rref bases
    let mut level: BTreeSet<Vec<Vec<u64>>> = BTreeSet::from([Vec::new()]);
    let mut all = level.clone();
    for _ in 0..r {
        if level.len() as u64 * order as u64 > ENUMERATION_LIMIT {
            return Err(TowerError::EnumerationBound { q, n });
        }
        let mut next = BTreeSet::new();
        for basis in &level {
            for v in &vectors {
                let mut rows = basis.clone();
                rows.push(v.clone());
                next.insert(rref(q, n as usize, &rows));
            }
        }
        all.extend(next.iter().cloned());
        level = next;
    }
    let best_rank = all.iter().map(|b| b.len() as u32).max().unwrap_or(0);
    let min_index = (q as u128).pow(n - best_rank);
    let bound = (q as u128).pow(n.saturating_sub(r));
    Ok(IndexBound {
        q,
        n,
        r,
        min_index,
        bound,
        subgroups_examined: all.len(),
        bound_holds: min_index >= bound,
        attained: min_index == bound,
    })
}

/// The finitely generated model: `P_L = sum c_j Q_j` modulo torsion with
/// `k` formal generators, and the `a_{p_i}` of the tower primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormalMWModel {
    pub q: u64,
    pub k: usize,
    pub c: Vec<i64>,
    pub a_p: Vec<i64>,
    /// Level from which the index bound is used.
    pub m: u32,
    /// Number of generators of the image subgroup.
    pub r: u32,
}

/// One row of the valuation comparison at level `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValuationEntry {
    pub n: u32,
    /// `n - m - r`: lower bound on `v_q` of the index multiplying `c_{n,j}`.
    pub index_exponent: u32,
    /// `v_q(a_{p_1} ... a_{p_n} c_j)`.
    pub rhs_valuation: u32,
    /// `a_{p_1} ... a_{p_n} c_j / q^(n - m - r)` as a reduced fraction.
    pub implied_coefficient: String,
    pub integral: bool,
}

/// The level at which the traced coefficients can no longer be integral.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilityWitness {
    pub n: u32,
    pub j: usize,
    pub c_j: i64,
    pub v_q_c_j: u32,
    pub ledger: Vec<ValuationEntry>,
    /// The index bound is taken to hold from `n = m + r + 1` on.
    pub threshold_assumed: bool,
}

/// Smallest `n` with `n - m - r > v_q(c_j)`, for the nonzero `c_j` of least
/// valuation.
pub fn divisibility_contradiction(model: &FormalMWModel) -> Result<DivisibilityWitness, TowerError> {
    let q = model.q;
    if !arith::is_prime(q) {
        return Err(TowerError::NotPrime(q));
    }
    if let Some(a) = model.a_p.iter().find(|&&a| a.rem_euclid(q as i64) == 0) {
        return Err(TowerError::NoContradiction(format!("q = {q} divides a_p = {a}")));
    }
    let Some((j, c_j, v)) = model
        .c
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(j, &c)| (j, c, arith::valuation(c as i128, q)))
        .min_by_key(|t| t.2)
    else {
        return Err(TowerError::NoContradiction("all coefficients c_j vanish".into()));
    };
    let n = model.m + model.r + v + 1;
    if model.a_p.len() < n as usize {
        return Err(TowerError::InsufficientPrimes { needed: n, have: model.a_p.len() });
    }
    let start = model.m + model.r + 1;
    let mut ledger = Vec::new();
    let mut prod = BigInt::from(c_j);
    for (i, &a) in model.a_p.iter().enumerate().take(n as usize) {
        prod *= a;
        let level = i as u32 + 1;
        if level < start {
            continue;
        }
        let e = level - model.m - model.r;
        let implied = BigRational::new(prod.clone(), num_traits::pow(BigInt::from(q), e as usize));
        ledger.push(ValuationEntry {
            n: level,
            index_exponent: e,
            rhs_valuation: big_valuation(&prod, q),
            implied_coefficient: implied.to_string(),
            integral: implied.is_integer(),
        });
    }
    Ok(DivisibilityWitness { n, j, c_j, v_q_c_j: v, ledger, threshold_assumed: true })
}

fn big_valuation(n: &BigInt, q: u64) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let q = BigInt::from(q);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &q).is_zero() {
        n /= &q;
        v += 1;
    }
    v
}

/// Square matrix over Q.
pub type QMatrix = Vec<Vec<BigRational>>;

pub fn int_matrix(rows: &[Vec<i64>]) -> QMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect()
}

fn identity(n: usize) -> QMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect()).collect()
}

fn matmul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| &a[i][k] * &b[k][j]).sum()).collect()).collect()
}

fn matpow(a: &QMatrix, mut e: u64) -> QMatrix {
    let mut acc = identity(a.len());
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = matmul(&acc, &base);
        }
        base = matmul(&base, &base);
        e >>= 1;
    }
    acc
}

fn is_square(a: &QMatrix, n: usize) -> bool {
    a.len() == n && a.iter().all(|r| r.len() == n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvolutionOutcome {
    /// `S T S^-1 = T^-1` holds, hence `T^2 = 1`, hence `T = 1`.
    ForcesIdentity,
    /// `S T S^-1 != T^-1`.
    RelationViolated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionReport {
    pub outcome: InvolutionOutcome,
    /// Order of `T`, a power of `q`.
    pub order: u64,
    pub relation_holds: bool,
    pub t_squared_identity: bool,
}

/// With `S = -1` of order 2 and `T` of odd `q`-power order, checks whether
/// `S T S^-1 = T^-1`; when it does, `T^2 = 1` and so `T = 1`.
pub fn involution_check(q: u64, t: &QMatrix, s: &QMatrix) -> Result<InvolutionReport, TowerError> {
    require_odd_prime(q)?;
    let n = t.len();
    if !is_square(t, n) || !is_square(s, n) {
        return Err(TowerError::BadMatrix);
    }
    let id = identity(n);
    let minus: QMatrix = id.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    if *s != minus || matmul(s, s) != id {
        return Err(TowerError::NotMinusIdentity);
    }
    let mut order = None;
    let mut qk = 1u64;
    for _ in 0..=MAX_ORDER_EXPONENT {
        if matpow(t, qk) == id {
            order = Some(qk);
            break;
        }
        qk *= q;
    }
    let Some(qk) = order else { return Err(TowerError::NotQPowerOrder { q, max_exp: MAX_ORDER_EXPONENT }) };
    // the exact order divides q^k
    let mut ord = qk;
    while ord > 1 && matpow(t, ord / q) == id {
        ord /= q;
    }
    // S^-1 = S
    let conj = matmul(&matmul(s, t), s);
    let t_inv = matpow(t, ord - 1);
    let relation_holds = conj == t_inv;
    let t_squared_identity = matmul(t, t) == id;
    let outcome = if relation_holds {
        debug_assert!(t_squared_identity && *t == id);
        InvolutionOutcome::ForcesIdentity
    } else {
        InvolutionOutcome::RelationViolated
    };
    Ok(InvolutionReport { outcome, order: ord, relation_holds, t_squared_identity })
}

/// Square matrix over `F_ell`, entries in `0..ell`.
pub type ModMatrix = Vec<Vec<u64>>;

fn matmul_mod(a: &ModMatrix, b: &ModMatrix, ell: u64) -> ModMatrix {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).fold(0, |acc, k| (acc + a[i][k] * b[k][j]) % ell)).collect()).collect()
}

fn matpow_mod(a: &ModMatrix, mut e: u64, ell: u64) -> ModMatrix {
    let n = a.len();
    let mut acc: ModMatrix = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = matmul_mod(&acc, &base, ell);
        }
        base = matmul_mod(&base, &base, ell);
        e >>= 1;
    }
    acc
}

/// [`involution_check`] for matrices over `F_ell` with `ell` an odd prime
/// (so that `-1 != 1`).
pub fn involution_check_mod(q: u64, ell: u64, t: &ModMatrix, s: &ModMatrix) -> Result<InvolutionReport, TowerError> {
    require_odd_prime(q)?;
    require_odd_prime(ell)?;
    let n = t.len();
    let square = |m: &ModMatrix| m.len() == n && m.iter().all(|r| r.len() == n && r.iter().all(|&x| x < ell));
    if !square(t) || !square(s) {
        return Err(TowerError::BadMatrix);
    }
    let id = matpow_mod(t, 0, ell);
    let minus: ModMatrix = id.iter().map(|r| r.iter().map(|&x| (ell - x) % ell).collect()).collect();
    if *s != minus {
        return Err(TowerError::NotMinusIdentity);
    }
    let mut order = None;
    let mut qk = 1u64;
    for _ in 0..=MAX_ORDER_EXPONENT {
        if matpow_mod(t, qk, ell) == id {
            order = Some(qk);
            break;
        }
        qk *= q;
    }
    let Some(mut ord) = order else { return Err(TowerError::NotQPowerOrder { q, max_exp: MAX_ORDER_EXPONENT }) };
    while ord > 1 && matpow_mod(t, ord / q, ell) == id {
        ord /= q;
    }
    let conj = matmul_mod(&matmul_mod(s, t, ell), s, ell);
    let relation_holds = conj == matpow_mod(t, ord - 1, ell);
    let t_squared_identity = matmul_mod(t, t, ell) == id;
    let outcome = if relation_holds { InvolutionOutcome::ForcesIdentity } else { InvolutionOutcome::RelationViolated };
    Ok(InvolutionReport { outcome, order: ord, relation_holds, t_squared_identity })
}
