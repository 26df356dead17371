//! Cross-module agreement: class groups against ring class degrees and
//! Heegner orbits, L-series over K against its factors, lattices against
//! rational points.

use hw_core::arith;
use hw_core::ec::{known, RationalPoint};
use hw_core::galois_tower::tower_structure;
use hw_core::heegner::{self, heegner_orbit, trace_to_k, Recognized};
use hw_core::lseries::{self, l_over_k, twist};
use hw_core::quadforms::{class_number, ring_class_structure, Discriminant};
use num_complex::Complex64;

fn disc(d: i64) -> Discriminant {
    Discriminant::fundamental(d).unwrap()
}

fn inert_primes(d: i64, below: u64) -> Vec<u64> {
    arith::primes_up_to(below).into_iter().filter(|&p| arith::kronecker(d, p as i64) == -1).collect()
}

#[test]
fn ring_class_degree_is_the_class_number_ratio() {
    for d in [-7, -11, -19, -43] {
        let h = class_number(d).unwrap() as u64;
        for p in inert_primes(d, 30) {
            let rc = ring_class_structure(&disc(d), &[p]).unwrap();
            assert_eq!(class_number(d * (p * p) as i64).unwrap() as u64, h * rc.degree, "d = {d}, p = {p}");
        }
    }
}

#[test]
fn tower_degrees_match_ring_class_degrees() {
    let d = disc(-7);
    let ps = [5, 17, 59];
    for n in 0..=ps.len() {
        let t = tower_structure(3, &ps[..n]).unwrap();
        let rc = ring_class_structure(&d, &ps[..n]).unwrap();
        assert_eq!(t.full_degree, rc.degree.to_string());
        assert_eq!(t.quotient_degree, 3u64.pow(n as u32).to_string());
    }
}

#[test]
fn heegner_orbits_have_one_point_per_class() {
    let e = known::curve_37a();
    for (d, c) in [(-7, 1), (-7, 3), (-11, 2), (-11, 7)] {
        let orbit = heegner_orbit(&e, &disc(d), c).unwrap();
        let big_d = d * (c * c) as i64;
        assert_eq!(orbit.len(), class_number(big_d).unwrap(), "({d}, {c})");
        for t in &orbit.taus {
            assert_eq!(t.discriminant(), big_d);
            assert_eq!(t.form.a % 37, 0);
            assert!(t.tau.im > 0.0);
        }
    }
}

#[test]
fn l_over_k_factors() {
    let e = known::curve_11a();
    let l = l_over_k(&e, &disc(-7), lseries::DEFAULT_TAIL, lseries::DEFAULT_NONVANISHING).unwrap();
    assert_eq!(l.base.epsilon, 1);
    assert_eq!(l.twist.epsilon, -1);
    assert!((l.value - l.base.value_at_1 * l.twist.derivative_at_1).abs() < 1e-14);
    // the twist has a_p = (d/p) a_p away from 2 d N
    let tw = twist(&e, -7).unwrap();
    let base = hw_core::ec::an_series(&e, 200).unwrap();
    let twisted = tw.an(200).unwrap();
    for p in arith::primes_up_to(200).into_iter().filter(|&p| p > 7 && p != 11) {
        let chi = arith::kronecker(-7, p as i64) as i64;
        assert_eq!(twisted.get(p as usize), chi * base.get(p as usize), "p = {p}");
    }
}

#[test]
fn elliptic_log_inverts_exp() {
    let e = known::curve_389a();
    let lattice = heegner::period_lattice(&e);
    let (w1, w2) = lattice.basis();
    for (s, t) in [(0.1, 0.2), (0.37, 0.41), (0.8, 0.05), (0.5, 0.3)] {
        let z = w1 * s + w2 * t;
        let (x, y) = lattice.elliptic_exp(z).xy().unwrap();
        let back = lattice.elliptic_log(x, y);
        assert!(lattice.distance_to_lattice(back - z) < 1e-9, "z = {z}");
    }
    // a rational point and its logarithm
    let p = RationalPoint::from_ints(-1, 1);
    let z = lattice.elliptic_log(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0));
    let (x, y) = lattice.elliptic_exp(z).xy().unwrap();
    assert!((x - Complex64::new(-1.0, 0.0)).norm() < 1e-9 && (y - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    assert!(e.model().on_curve(&p));
}

#[test]
fn heegner_point_of_37a_is_the_generator() {
    let e = known::curve_37a();
    let pk = trace_to_k(&e, &disc(-7), 1e-10).unwrap();
    // P_K = +-(0, 0) or +-(0, -1) for the trace over the class group of size 1
    match pk.recognized.unwrap() {
        Recognized::OnCurve { x, .. } => assert_eq!(x, "0"),
        other => panic!("unexpected {other:?}"),
    }
    let (model, point) = pk.rational.unwrap();
    assert!(model.on_curve(&point));
    let h = heegner::canonical_height(&model, &point).unwrap();
    assert!((h - pk.height.unwrap()).abs() < 1e-12);
}
