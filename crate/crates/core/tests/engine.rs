use std::f64::consts::PI;

use num_complex::Complex64;
use specdist::distance::*;
use specdist::geometry::*;
use specdist::linalg::Hermitian;
use specdist::oracles;
use specdist::state::*;

#[test]
fn flat_proxy_decreases_with_ambient_cutoff() {
    let tol = 1e-7;
    let opts = DistanceOptions::with_tol(tol);
    for n in [1usize, 2] {
        let small = build_circle(n).unwrap();
        let x = PI / 2.0;
        let s1 = fejer_state(&small, x / 2.0).unwrap();
        let s2 = fejer_state(&small, -x / 2.0).unwrap();
        let mut previous = f64::INFINITY;
        for k in [n, 2 * n, 4 * n] {
            let ambient = build_circle(k).unwrap();
            let p = circle_middle_projection(k, n).unwrap();
            let r = distance_flat(&ambient, &p, &s1, &s2, &opts).unwrap();
            assert!(r.gap() <= tol);
            assert!(r.value() <= previous + tol, "N = {n}, K = {k}: {} after {previous}", r.value());
            previous = r.value();
        }
        let bounds = oracles::circle_bounds(n, x);
        assert!(previous >= bounds.lower - tol, "N = {n}: {previous} < {}", bounds.lower);
        assert!(previous <= bounds.upper + tol, "N = {n}: {previous} > {}", bounds.upper);
    }
}

#[test]
fn flat_proxy_at_equal_cutoff_is_the_plain_distance() {
    let opts = DistanceOptions::default();
    let triple = build_circle(2).unwrap();
    let s1 = fejer_state(&triple, 0.3).unwrap();
    let s2 = fejer_state(&triple, 1.9).unwrap();
    let p = circle_middle_projection(2, 2).unwrap();
    let flat = distance_flat(&triple, &p, &s1, &s2, &opts).unwrap();
    let plain = distance(&triple, &s1, &s2, &opts).unwrap();
    assert!((flat.value() - plain.value()).abs() <= 2e-7);
}

#[test]
fn hausdorff_of_small_lattice_sets() {
    let triple = build_lattice(0, 6).unwrap();
    let engine = DistanceEngine::new(&triple);
    let opts = DistanceOptions::default();
    let pt = |n| lattice_point(&triple, n).unwrap();
    let a = vec![pt(0)];
    let b = vec![pt(2), pt(5)];
    let h = hausdorff(&engine, &a, &b, &opts).unwrap();
    assert!((h - 5.0).abs() <= 1e-6, "{h}");
    assert_eq!(hausdorff(&engine, &b, &b, &opts).unwrap(), 0.0);
    let c = vec![pt(1), pt(4)];
    let h = hausdorff(&engine, &b, &c, &opts).unwrap();
    assert!((h - 1.0).abs() <= 1e-6, "{h}");
    assert!(hausdorff(&engine, &[], &b, &opts).is_err());
}

#[test]
fn nested_grids_are_close() {
    let opts = DistanceOptions::default();
    let (h, results) = circle_grid_hausdorff(4, 16, 4, 32, &opts).unwrap();
    assert!(h > 0.0 && h <= PI / 16.0 + 1e-7, "{h}");
    assert!(results.iter().all(|r| r.gap() <= 1e-6));
    let (coarse, _) = circle_grid_hausdorff(4, 8, 4, 16, &opts).unwrap();
    assert!(coarse > h && coarse <= PI / 8.0 + 1e-7);
}

#[test]
fn hausdorff_with_an_infinite_entry() {
    let triple = build_two_block_lattice(2, 2).unwrap();
    let engine = DistanceEngine::new(&triple);
    let opts = DistanceOptions::default();
    let a = vec![basis_state(&triple, 0).unwrap()];
    let b = vec![basis_state(&triple, 3).unwrap()];
    assert_eq!(hausdorff(&engine, &a, &b, &opts).unwrap(), f64::INFINITY);
}

#[test]
fn infinite_distance_comes_with_a_witness() {
    let triple = build_two_block_lattice(3, 2).unwrap();
    let engine = DistanceEngine::new(&triple);
    assert!(!engine.is_lipschitz());
    let s1 = basis_state(&triple, 1).unwrap();
    let s2 = basis_state(&triple, 4).unwrap();
    let r = engine.distance(&s1, &s2, &DistanceOptions::default()).unwrap();
    assert!(r.is_infinite());
    assert_eq!(r.status.as_str(), "infinite");
    assert!(triple.lipschitz_norm(&r.optimizer).unwrap() <= 1e-10);
    let value = s1.evaluate(&r.optimizer).unwrap() - s2.evaluate(&r.optimizer).unwrap();
    assert!((value - 1.0).abs() <= 1e-10);
    let within = engine.distance(&s1, &basis_state(&triple, 2).unwrap(), &DistanceOptions::default()).unwrap();
    assert!(!within.is_infinite());
    assert!((within.value() - 1.0).abs() <= 1e-6);
}

#[test]
fn lipschitz_geometries() {
    for triple in [
        build_lattice(-3, 3).unwrap(),
        build_circle(3).unwrap(),
        build_moyal(1.0, 4).unwrap(),
        build_fuzzy_sphere(3).unwrap(),
        build_flip(3, 1.0, 0).unwrap(),
    ] {
        assert!(lipschitz_check(&triple), "{}", triple.name);
        let d = triple.hilbert_dim;
        let delta = basis_state(&triple, 0).unwrap().rho().sub(basis_state(&triple, d - 1).unwrap().rho()).unwrap();
        assert!(!detect_infinite(&triple, &delta).unwrap(), "{}", triple.name);
    }
}

#[test]
fn moyal_distance_grows_toward_the_plane_value() {
    let opts = DistanceOptions::default();
    let mut previous = 0.0;
    for n_max in [4usize, 8, 12] {
        let triple = build_moyal(1.0, n_max).unwrap();
        let (s1, _) = moyal_coherent(&triple, Complex64::new(0.0, 0.0)).unwrap();
        let (s2, _) = moyal_coherent(&triple, Complex64::new(1.0, 0.0)).unwrap();
        let r = distance(&triple, &s1, &s2, &opts).unwrap();
        assert!(r.gap() <= 1e-7);
        assert!(r.value() > previous);
        assert!(r.value() <= oracles::geodesic_plane(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)) + 1e-7);
        previous = r.value();
    }
}

#[test]
fn sphere_distance_is_rotation_invariant_in_azimuth() {
    let triple = build_fuzzy_sphere(2).unwrap();
    let opts = DistanceOptions::default();
    let d = |phi: f64| {
        let s1 = bloch_coherent(&triple, 0.7, phi).unwrap();
        let s2 = bloch_coherent(&triple, 2.1, phi + 0.4).unwrap();
        distance(&triple, &s1, &s2, &opts).unwrap().value()
    };
    let base = d(0.0);
    for phi in [0.9, 2.5, 4.0] {
        assert!((d(phi) - base).abs() <= 2e-6);
    }
}

#[test]
fn scaled_states_and_delta_agree() {
    let triple = build_lattice(0, 5).unwrap();
    let engine = DistanceEngine::new(&triple);
    let opts = DistanceOptions::default();
    let s1 = lattice_point(&triple, 1).unwrap();
    let s2 = lattice_point(&triple, 4).unwrap();
    let delta: Hermitian = s1.rho().sub(s2.rho()).unwrap();
    let a = engine.distance(&s1, &s2, &opts).unwrap();
    let b = engine.distance_delta(&delta, &opts).unwrap();
    assert!((a.value() - b.value()).abs() <= 1e-9);
    assert!((a.value() - 3.0).abs() <= 1e-6);
}
