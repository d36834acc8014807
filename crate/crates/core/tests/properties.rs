use proptest::prelude::*;

use specdist::distance::{DistanceEngine, DistanceOptions};
use specdist::geometry::*;
use specdist::linalg::{self, Compression, Hermitian};
use specdist::oracles;
use specdist::random::*;
use specdist::state::*;
use specdist::verify::commutator_identity_defect;

fn norm(m: &linalg::CMatrix) -> f64 {
    linalg::spectral_norm(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_norm_is_a_norm(seed in any::<u64>(), n in 1usize..7, s in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = random_complex_matrix(&mut r, n, n);
        let b = random_complex_matrix(&mut r, n, n);
        let na = norm(&a);
        prop_assert!(na >= 0.0);
        prop_assert!((norm(&a.scale(s)) - s.abs() * na).abs() <= 1e-12 * (1.0 + na));
        prop_assert!(norm(&(&a + &b)) <= na + norm(&b) + 1e-12);
        prop_assert!(norm(&(&a * &b)) <= na * norm(&b) * (1.0 + 1e-12) + 1e-14);
        let u = random_unitary(&mut r, n);
        prop_assert!((norm(&(&u * &a * u.adjoint())) - na).abs() <= 1e-11 * (1.0 + na));
    }

    #[test]
    fn commutator_identity_holds(seed in any::<u64>(), n in 2usize..9, rank in 0usize..9) {
        let mut r = rng(seed);
        let d = random_hermitian(&mut r, n);
        let a = random_hermitian(&mut r, n);
        let p = random_projection(&mut r, n, rank.min(n));
        prop_assert!(commutator_identity_defect(&d, &p, &a) <= 1e-10);
    }

    #[test]
    fn compression_reduces_seminorm(seed in any::<u64>(), n in 2usize..9, rank in 1usize..9) {
        let mut r = rng(seed);
        let d = random_hermitian(&mut r, n);
        let a = random_hermitian(&mut r, n);
        let p = random_projection(&mut r, n, rank.min(n));
        let dl = linalg::compress(&p, &d, Compression::Ambient).unwrap();
        let pap = linalg::compress(&p, &a, Compression::Ambient).unwrap();
        let lhs = norm(&linalg::commutator(dl.matrix(), pap.matrix()).unwrap());
        let rhs = norm(&linalg::commutator(dl.matrix(), a.matrix()).unwrap());
        prop_assert!(lhs <= rhs + 1e-10);
        let twice = linalg::compress(&p, &pap, Compression::Ambient).unwrap();
        prop_assert!(linalg::max_abs(&(twice.matrix() - pap.matrix())) <= 1e-12);
    }

    #[test]
    fn spectral_projection_compression(seed in any::<u64>(), k in 1usize..6, n in 0usize..6) {
        let mut r = rng(seed);
        let n = n.min(k);
        let ambient = build_circle(k).unwrap();
        let p = circle_middle_projection(k, n).unwrap();
        let a = random_hermitian(&mut r, 2 * k + 1);
        let d = ambient.dirac();
        let dl = linalg::compress(&p, d, Compression::Ambient).unwrap();
        let pap = linalg::compress(&p, &a, Compression::Ambient).unwrap();
        let lhs = norm(&linalg::commutator(dl.matrix(), pap.matrix()).unwrap());
        let rhs = norm(&linalg::commutator(d.matrix(), a.matrix()).unwrap());
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn rank_one_variance(seed in any::<u64>(), n in 1usize..10) {
        let mut r = rng(seed);
        let f = random_real_diagonal(&mut r, n);
        let psi = random_unit_vector(&mut r, n);
        let p0 = Hermitian::outer(&psi);
        let c = linalg::commutator(p0.matrix(), f.matrix()).unwrap();
        let fpsi = f.matrix() * &psi;
        let mean = psi.dotc(&fpsi).re;
        let variance = fpsi.norm_squared() - mean * mean;
        prop_assert!((norm(&c).powi(2) - variance).abs() <= 1e-10);
    }

    #[test]
    fn wasserstein_is_a_metric(seed in any::<u64>(), len in 1usize..8, s1 in -4i64..4, s2 in -4i64..4, s3 in -4i64..4) {
        let mut r = rng(seed);
        let p = LatticeDistribution::new(s1, random_distribution(&mut r, len)).unwrap();
        let q = LatticeDistribution::new(s2, random_distribution(&mut r, len)).unwrap();
        let u = LatticeDistribution::new(s3, random_distribution(&mut r, len + 1)).unwrap();
        let w = oracles::lattice_wasserstein;
        prop_assert!(w(&p, &p).abs() <= 1e-12);
        prop_assert!((w(&p, &q) - w(&q, &p)).abs() <= 1e-12);
        prop_assert!(w(&p, &u) <= w(&p, &q) + w(&q, &u) + 1e-12);
    }

    #[test]
    fn rho_bounds_are_ordered(n in 1usize..=32, i in 1usize..=256) {
        let x = std::f64::consts::PI * i as f64 / 256.0;
        let lo = oracles::rho_lower(n, x);
        prop_assert!(lo <= oracles::rho_upper(n, x) + 1e-10);
        prop_assert!(lo <= x + 1e-10);
    }

    #[test]
    fn fejer_kernel_nonnegative(n in 1usize..200, t in -10.0f64..10.0) {
        prop_assert!(oracles::fejer_kernel(n, t) >= 0.0);
    }

    #[test]
    fn fejer_states_are_pure(n in 1usize..12, x in -7.0f64..7.0) {
        let t = build_circle(n).unwrap();
        let s = fejer_state(&t, x).unwrap();
        prop_assert!(s.is_pure());
        prop_assert!((s.rho().trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn geodesic_flow_is_unitary(n in 1usize..6, t in -5.0f64..5.0) {
        let triple = build_circle(n).unwrap();
        let u = triple.geodesic_flow_unitary(t);
        prop_assert!(linalg::unitarity_defect(&u) <= 1e-10);
        let back = triple.geodesic_flow_unitary(-t);
        let id = &u * back;
        prop_assert!(linalg::unitarity_defect(&id) <= 1e-10);
    }
}

fn random_state(r: &mut TestRng, triple: &TruncatedTriple, rank: usize) -> State {
    let n = triple.hilbert_dim;
    State::new(triple, random_density(r, n, rank.clamp(1, n))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn distance_is_a_metric(seed in any::<u64>(), which in 0usize..4, rank in 1usize..4) {
        let triple = match which {
            0 => build_lattice(0, 4).unwrap(),
            1 => build_circle(2).unwrap(),
            2 => build_fuzzy_sphere(2).unwrap(),
            _ => build_moyal(1.0, 2).unwrap(),
        };
        let engine = DistanceEngine::new(&triple);
        let tol = 1e-7;
        let opts = DistanceOptions::with_tol(tol);
        let mut r = rng(seed);
        let s: Vec<State> = (0..3).map(|_| random_state(&mut r, &triple, rank)).collect();
        let d = |i: usize, j: usize| engine.distance(&s[i], &s[j], &opts).unwrap();
        let (d01, d10, d12, d02) = (d(0, 1), d(1, 0), d(1, 2), d(0, 2));
        prop_assert!((d01.value() - d10.value()).abs() <= tol);
        prop_assert!(d02.value() <= d01.value() + d12.value() + 3.0 * tol);
        prop_assert!(d01.value() >= -tol);
        for res in [&d01, &d10, &d12, &d02] {
            prop_assert!(res.gap() <= tol && res.gap() >= -1e-9);
            prop_assert!(res.optimizer_lipschitz <= 1.0 + 1e-8);
            // primal value is the optimizer's evaluation
            let delta = s[0].evaluate(&res.optimizer).unwrap();
            prop_assert!(delta.is_finite());
        }
        let primal = s[0].evaluate(&d01.optimizer).unwrap() - s[1].evaluate(&d01.optimizer).unwrap();
        prop_assert!((primal - d01.primal).abs() <= 1e-10);
    }

    #[test]
    fn lattice_matches_transport(seed in any::<u64>(), len_p in 1usize..6, len_q in 1usize..6, sp in 3i64..7, sq in 3i64..7) {
        let triple = build_lattice(0, 14).unwrap();
        let engine = DistanceEngine::new(&triple);
        let mut r = rng(seed);
        let p = LatticeDistribution::new(sp, random_distribution(&mut r, len_p)).unwrap();
        let q = LatticeDistribution::new(sq, random_distribution(&mut r, len_q)).unwrap();
        let res = engine.distance(&p.to_state(&triple).unwrap(), &q.to_state(&triple).unwrap(), &DistanceOptions::default()).unwrap();
        prop_assert!((res.value() - oracles::lattice_wasserstein(&p, &q)).abs() <= 1e-6);
    }

    #[test]
    fn circle_translation_invariance(n in 1usize..5, x in -3.0f64..3.0, y in -3.0f64..3.0, t in -4.0f64..4.0) {
        let triple = build_circle(n).unwrap();
        let engine = DistanceEngine::new(&triple);
        let tol = 1e-7;
        let opts = DistanceOptions::with_tol(tol);
        let d = |a: f64, b: f64| engine.distance(&fejer_state(&triple, a).unwrap(), &fejer_state(&triple, b).unwrap(), &opts).unwrap().value();
        let base = d(x, y);
        prop_assert!((base - d(x + t, y + t)).abs() <= 2.0 * tol);
        prop_assert!(base <= oracles::geodesic_circle(x, y) + tol);
    }

    #[test]
    fn flip_minimal_length_and_homogeneity(points in 2usize..6, lambda in 0.25f64..5.0, base_raw in 0usize..6, x_raw in 0usize..6, y_raw in 0usize..6) {
        let base = base_raw % points;
        let (x, y) = (x_raw % points, y_raw % points);
        prop_assume!(x != y);
        let opts = DistanceOptions::with_tol(1e-10);
        let t1 = build_flip(points, lambda, base).unwrap();
        let t2 = build_flip(points, 2.0 * lambda, base).unwrap();
        let d1 = specdist::distance::distance(&t1, &basis_state(&t1, x).unwrap(), &basis_state(&t1, y).unwrap(), &opts).unwrap();
        let d2 = specdist::distance::distance(&t2, &basis_state(&t2, x).unwrap(), &basis_state(&t2, y).unwrap(), &opts).unwrap();
        prop_assert!(d1.value() >= 1.0 / lambda - 1e-8);
        prop_assert!((d2.value() - d1.value() / 2.0).abs() <= 1e-8);
    }

    #[test]
    fn grid_minimal_length(m in 2usize..12, x_raw in 0usize..12, y_raw in 0usize..12) {
        let (x, y) = (x_raw % m, y_raw % m);
        prop_assume!(x != y);
        let triple = build_finite_rank_grid(m).unwrap();
        let d_norm = norm(triple.dirac().matrix());
        let res = specdist::distance::distance(&triple, &basis_state(&triple, x).unwrap(), &basis_state(&triple, y).unwrap(), &DistanceOptions::default()).unwrap();
        prop_assert!(res.value() >= 1.0 / d_norm - 1e-7);
    }
}
