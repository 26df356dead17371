//! Desk-scale computations around Heegner points and ring class towers for
//! elliptic curves over Q.
//!
//! - [`ec`]: models, point counting, `a_p` and `a_n`.
//! - [`quadforms`]: binary quadratic forms, class groups of orders, ring
//!   class Galois structure.
//! - [`lseries`]: `L(E,1)`, `L'(E,1)`, root numbers and twists.
//! - [`searcher`]: the auxiliary field `K`, the prime `q`, the prime
//!   sequence and Cartan subgroup counts.
//! - [`heegner`]: period lattices, modular parametrization, Heegner points,
//!   traces and canonical heights.
//! - [`galois_tower`]: exact bookkeeping for the `C_q^n` tower and the
//!   divisibility contradiction.

pub mod arith;
pub mod ec;
pub mod galois_tower;
pub mod heegner;
pub mod lseries;
pub mod quadforms;
pub mod searcher;
