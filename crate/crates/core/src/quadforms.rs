//! Imaginary quadratic discriminants, positive definite binary quadratic
//! forms, class groups of orders and the Galois structure of ring class
//! fields over the Hilbert class field.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith;

pub use crate::arith::kronecker;

/// Residue enumeration in [`unit_quotient_structure`] is limited to `c^2` below this.
pub const ENUMERATION_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QfError {
    #[error("{0} is not a negative discriminant (d < 0, d = 0 or 1 mod 4)")]
    InvalidDiscriminant(i64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("form ({0}, {1}, {2}) is not primitive positive definite")]
    InvalidForm(i64, i64, i64),
    #[error("discriminants differ: {0} vs {1}")]
    MismatchedDiscriminant(i64, i64),
    #[error("{p} is not inert in Q(sqrt({d}))")]
    NotInert { p: u64, d: i64 },
    #[error("conductor {0} must be a squarefree product of distinct primes")]
    NotSquarefree(u64),
    #[error("conductor {c} is not coprime to {d}")]
    NotCoprime { c: u64, d: i64 },
    #[error("residue enumeration for c = {0} exceeds the bound")]
    EnumerationBound(u64),
    #[error("enumerated structure {enumerated:?} disagrees with formula {formula:?}")]
    StructureMismatch { enumerated: Vec<u64>, formula: Vec<u64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Discriminant {
    d: i64,
    fundamental: bool,
}

impl Discriminant {
    /// Any negative discriminant of an imaginary quadratic order.
    pub fn new(d: i64) -> Result<Self, QfError> {
        if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
            return Err(QfError::InvalidDiscriminant(d));
        }
        Ok(Self { d, fundamental: is_fundamental(d) })
    }

    /// A fundamental discriminant, rejecting non-maximal orders.
    pub fn fundamental(d: i64) -> Result<Self, QfError> {
        let disc = Self::new(d)?;
        if !disc.fundamental {
            return Err(QfError::NotFundamental(d));
        }
        Ok(disc)
    }

    pub fn value(&self) -> i64 {
        self.d
    }

    pub fn is_fundamental(&self) -> bool {
        self.fundamental
    }

    /// Discriminant `c^2 d` of the order of conductor `c`.
    pub fn order(&self, c: u64) -> i64 {
        self.d * (c * c) as i64
    }
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => arith::is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && arith::is_squarefree(m)
        }
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitType {
    Split,
    Inert,
    Ramified,
}

/// Decomposition of `p` in `Q(sqrt(d_K))`.
pub fn splitting_type(d_k: &Discriminant, p: u64) -> SplitType {
    match kronecker(d_k.value(), p as i64) {
        1 => SplitType::Split,
        -1 => SplitType::Inert,
        _ => SplitType::Ramified,
    }
}

/// `a x^2 + b xy + c y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    /// A primitive positive definite form.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self, QfError> {
        let f = Self { a, b, c };
        if a <= 0 || f.discriminant() >= 0 || arith::gcd(arith::gcd(a, b), c) != 1 {
            return Err(QfError::InvalidForm(a, b, c));
        }
        Ok(f)
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// The identity class `(1, D mod 2, (D mod 2 - D)/4)`.
    pub fn principal(d: i64) -> Self {
        let b = d.rem_euclid(2);
        Self { a: 1, b, c: (b * b - d) / 4 }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.a, b: -self.b, c: self.c }.reduced()
    }

    pub fn is_reduced(&self) -> bool {
        self.b.abs() <= self.a && self.a <= self.c && !(self.b < 0 && (self.b.abs() == self.a || self.a == self.c))
    }

    /// The reduced form in the same proper equivalence class.
    pub fn reduced(&self) -> Self {
        let (mut a, mut b, mut c) = (self.a as i128, self.b as i128, self.c as i128);
        loop {
            // bring b into (-a, a]
            if b <= -a || b > a {
                let two_a = 2 * a;
                let mut t = (a - b).div_euclid(two_a);
                if b + two_a * t <= -a {
                    t += 1;
                }
                let nb = b + two_a * t;
                c += a * t * t + b * t;
                b = nb;
            }
            if a > c {
                std::mem::swap(&mut a, &mut c);
                b = -b;
                continue;
            }
            if a == c && b < 0 {
                b = -b;
            }
            break;
        }
        Self { a: a as i64, b: b as i64, c: c as i64 }
    }

    /// Image under `(x, y) -> (x + t y, y)`; same class.
    pub fn translate(&self, t: i64) -> Self {
        Self { a: self.a, b: self.b + 2 * self.a * t, c: self.a * t * t + self.b * t + self.c }
    }

    /// Value at `(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i128 {
        let (a, b, c, x, y) = (self.a as i128, self.b as i128, self.c as i128, x as i128, y as i128);
        a * x * x + b * x * y + c * y * y
    }
}

/// Reduced primitive forms of discriminant `d`, one per class, sorted.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadForm>, QfError> {
    Discriminant::new(d)?;
    let mut out = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if arith::gcd(arith::gcd(a, b), c) == 1 {
                out.push(QuadForm { a, b, c });
            }
        }
        a += 1;
    }
    out.sort();
    Ok(out)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, x, y) with a x + b y = g >= 0
    if b == 0 {
        return if a < 0 { (-a, -1, 0) } else { (a, 1, 0) };
    }
    let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Gaussian composition, reduced.
pub fn compose(f: &QuadForm, g: &QuadForm, d: i64) -> Result<QuadForm, QfError> {
    for h in [f, g] {
        if h.discriminant() != d {
            return Err(QfError::MismatchedDiscriminant(h.discriminant(), d));
        }
    }
    let (f, g) = if f.a > g.a { (g, f) } else { (f, g) };
    let (a1, b1) = (f.a as i128, f.b as i128);
    let (a2, b2, c2) = (g.a as i128, g.b as i128, g.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;
    let (d0, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        let (dd, u, _) = ext_gcd(a2, a1);
        (dd, u)
    };
    let (d1, x2, y2) = if s % d0 == 0 {
        (d0, 0, -1)
    } else {
        let (dd, u, v) = ext_gcd(s, d0);
        (dd, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (c2 * d1 + r * (b2 + v2 * r)) / v1;
    let h = QuadForm { a: a3 as i64, b: b3 as i64, c: c3 as i64 };
    debug_assert_eq!(h.discriminant(), d);
    Ok(h.reduced())
}

/// `Pic` of the order of discriminant `d` as an explicit finite abelian group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassGroup {
    pub discriminant: i64,
    pub forms: Vec<QuadForm>,
    /// `table[i][j]` is the index of `forms[i] * forms[j]`.
    pub table: Vec<Vec<usize>>,
    /// Invariant factors, each dividing the next; empty for the trivial group.
    pub invariants: Vec<u64>,
}

impl ClassGroup {
    pub fn order(&self) -> usize {
        self.forms.len()
    }

    pub fn index_of(&self, f: &QuadForm) -> Option<usize> {
        let r = f.reduced();
        self.forms.binary_search(&r).ok()
    }

    pub fn identity(&self) -> usize {
        self.index_of(&QuadForm::principal(self.discriminant)).expect("principal form present")
    }

    pub fn pow(&self, x: usize, k: u64) -> usize {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.table[acc][x];
        }
        acc
    }

    pub fn element_order(&self, x: usize) -> u64 {
        let e = self.identity();
        let mut acc = x;
        let mut k = 1;
        while acc != e {
            acc = self.table[acc][x];
            k += 1;
        }
        k
    }
}

pub fn class_group(d: i64) -> Result<ClassGroup, QfError> {
    let forms = reduced_forms(d)?;
    let idx: BTreeMap<QuadForm, usize> = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut table = vec![vec![0; forms.len()]; forms.len()];
    for (i, f) in forms.iter().enumerate() {
        for (j, g) in forms.iter().enumerate() {
            table[i][j] = idx[&compose(f, g, d)?];
        }
    }
    let mut group = ClassGroup { discriminant: d, forms, table, invariants: Vec::new() };
    let orders: Vec<u64> = (0..group.order()).map(|x| group.element_order(x)).collect();
    group.invariants =
        invariants_from_counts(group.order() as u64, |m| orders.iter().filter(|&&o| m % o == 0).count() as u64);
    Ok(group)
}

pub fn class_number(d: i64) -> Result<usize, QfError> {
    Ok(reduced_forms(d)?.len())
}

/// Invariant factors of a finite abelian group of the given order, from
/// `count(m) = #{x : x^m = 1}` evaluated at prime powers.
pub fn invariants_from_counts(order: u64, count: impl Fn(u64) -> u64) -> Vec<u64> {
    // per prime: partition of exponents, largest first
    let mut cyclic_parts: Vec<Vec<u64>> = Vec::new();
    for (l, e) in arith::factor(order as i128) {
        let mut ranks = vec![0u32; e as usize + 1];
        for k in 1..=e {
            let c = count(l.pow(k));
            ranks[k as usize] = ilog_exact(c, l);
        }
        // number of cyclic factors of order >= l^k
        let mut parts = Vec::new();
        for k in 1..=e as usize {
            let at_least = ranks[k] - ranks[k - 1];
            let at_least_next = if k < e as usize { ranks[k + 1] - ranks[k] } else { 0 };
            for _ in 0..(at_least - at_least_next) {
                parts.push(l.pow(k as u32));
            }
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        cyclic_parts.push(parts);
    }
    let len = cyclic_parts.iter().map(Vec::len).max().unwrap_or(0);
    let mut inv: Vec<u64> =
        (0..len).map(|i| cyclic_parts.iter().map(|p| p.get(i).copied().unwrap_or(1)).product()).collect();
    inv.reverse();
    inv
}

fn ilog_exact(mut n: u64, l: u64) -> u32 {
    let mut k = 0;
    while n > 1 {
        assert!(n.is_multiple_of(l), "torsion count is not a power of {l}");
        n /= l;
        k += 1;
    }
    k
}

/// Invariant factors of `C_{n_1} x ... x C_{n_k}`.
pub fn elementary_form(orders: &[u64]) -> Vec<u64> {
    let order: u64 = orders.iter().product();
    invariants_from_counts(order, |m| orders.iter().map(|&n| arith::gcd(n as i64, m as i64) as u64).product())
}

/// `Z[w]` with `w^2 = t w - n`, elements stored as `(u, v)` for `u + v w`.
#[derive(Clone, Copy, Debug)]
struct QuadOrderMod {
    t: i64,
    n: i64,
    c: i64,
}

impl QuadOrderMod {
    fn new(d_k: i64, c: i64) -> Self {
        // d = 1 mod 4: w = (1 + sqrt d)/2, w^2 = w + (d - 1)/4
        // d = 0 mod 4: w = sqrt(d/4), w^2 = d/4
        if d_k.rem_euclid(4) == 1 {
            Self { t: 1, n: -(d_k - 1) / 4, c }
        } else {
            Self { t: 0, n: -d_k / 4, c }
        }
    }

    fn mul(&self, x: (i64, i64), y: (i64, i64)) -> (i64, i64) {
        let c = self.c;
        let vv = x.1 * y.1 % c;
        let u = (x.0 * y.0 - self.n * vv).rem_euclid(c);
        let v = (x.0 * y.1 + x.1 * y.0 + self.t * vv).rem_euclid(c);
        (u, v)
    }

    fn pow(&self, mut x: (i64, i64), mut k: u64) -> (i64, i64) {
        let mut acc = (1 % self.c, 0);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, x);
            }
            x = self.mul(x, x);
            k >>= 1;
        }
        acc
    }

    fn norm(&self, x: (i64, i64)) -> i64 {
        (x.0 * x.0 + self.t * x.0 * x.1 + self.n * x.1 * x.1).rem_euclid(self.c)
    }
}

fn check_conductor(d_k: &Discriminant, c: u64) -> Result<(), QfError> {
    if !d_k.is_fundamental() {
        return Err(QfError::NotFundamental(d_k.value()));
    }
    if c == 0 || (c > 1 && !arith::is_squarefree(c as i64)) {
        return Err(QfError::NotSquarefree(c));
    }
    if arith::gcd(c as i64, d_k.value()) != 1 {
        return Err(QfError::NotCoprime { c, d: d_k.value() });
    }
    Ok(())
}

/// Invariant factors of `(O_K/cO_K)^* / (Z/cZ)^*`, by enumerating residues.
///
/// An element lies in the image of `(Z/c)^*` iff its `w` coordinate is zero,
/// so `#{x in Q : x^m = 1} = #{g in G : g^m has v = 0} / phi(c)`.
pub fn unit_quotient_structure(d_k: &Discriminant, c: u64) -> Result<Vec<u64>, QfError> {
    check_conductor(d_k, c)?;
    if c == 1 {
        return Ok(Vec::new());
    }
    if c.saturating_mul(c) > ENUMERATION_BOUND {
        return Err(QfError::EnumerationBound(c));
    }
    let ring = QuadOrderMod::new(d_k.value(), c as i64);
    let ci = c as i64;
    let mut units = Vec::new();
    for u in 0..ci {
        for v in 0..ci {
            if arith::gcd(ring.norm((u, v)), ci) == 1 {
                units.push((u, v));
            }
        }
    }
    let phi = arith::totient(c);
    let order = units.len() as u64 / phi;
    Ok(invariants_from_counts(order, |m| units.iter().filter(|&&x| ring.pow(x, m).1 == 0).count() as u64 / phi))
}

/// `Gal(H_c / H)` for `c` the product of the given inert primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingClassStructure {
    pub d_k: i64,
    pub conductor: u64,
    pub primes: Vec<u64>,
    /// `p + 1` for each prime, in input order.
    pub factors: Vec<u64>,
    /// Invariant factors of the product of the cyclic factors.
    pub invariants: Vec<u64>,
    pub degree: u64,
    /// Whether residue enumeration confirmed the invariants (`None` when out of range).
    pub enumerated: Option<bool>,
}

pub fn ring_class_structure(d_k: &Discriminant, primes: &[u64]) -> Result<RingClassStructure, QfError> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let c: u64 = primes.iter().product();
    if sorted.len() != primes.len() || primes.iter().any(|&p| !arith::is_prime(p)) {
        return Err(QfError::NotSquarefree(c));
    }
    for &p in primes {
        if splitting_type(d_k, p) != SplitType::Inert {
            return Err(QfError::NotInert { p, d: d_k.value() });
        }
    }
    check_conductor(d_k, c)?;
    let factors: Vec<u64> = primes.iter().map(|p| p + 1).collect();
    let invariants = elementary_form(&factors);
    let enumerated = if c.saturating_mul(c) <= ENUMERATION_BOUND {
        let got = unit_quotient_structure(d_k, c)?;
        if got != invariants {
            return Err(QfError::StructureMismatch { enumerated: got, formula: invariants });
        }
        Some(true)
    } else {
        None
    };
    Ok(RingClassStructure {
        d_k: d_k.value(),
        conductor: c,
        primes: primes.to_vec(),
        degree: factors.iter().product(),
        factors,
        invariants,
        enumerated,
    })
}
