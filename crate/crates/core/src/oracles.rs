//! Closed-form reference values: lattice transport, Fejér bounds, geodesic
//! distances and Berezin kernels.
//!
//! Nothing here touches the solver or the dense linear algebra.

use num_complex::Complex64;

use crate::state::LatticeDistribution;

/// Panels used by the quadrature checks on `[−π, π]`.
pub const SIMPSON_PANELS: usize = 4096;

/// Neumaier compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            carry += (sum - s) + t;
        } else {
            carry += (t - s) + sum;
        }
        sum = s;
    }
    sum + carry
}

/// Earth mover's distance on ℤ with unit spacing: `Σ_j |CDF_p(j) − CDF_q(j)|`.
pub fn lattice_wasserstein(p: &LatticeDistribution, q: &LatticeDistribution) -> f64 {
    let lo = p.start.min(q.start);
    let hi = p.end().max(q.end());
    let weight = |d: &LatticeDistribution, j: i64| -> f64 {
        if j < d.start || j > d.end() {
            0.0
        } else {
            d.probs[(j - d.start) as usize]
        }
    };
    let mut cdf_gap = 0.0;
    compensated_sum((lo..hi).map(|j| {
        cdf_gap += weight(p, j) - weight(q, j);
        cdf_gap.abs()
    }))
}

/// Lower bound `ρ_N(x)`: the Fejér transform difference of the tent function.
pub fn rho_lower(n: usize, x: f64) -> f64 {
    let big = (n + 1) as f64;
    let sum = compensated_sum((1..=n).step_by(2).map(|k| {
        let kf = k as f64;
        let sign = if (k - 1) / 2 % 2 == 0 { 1.0 } else { -1.0 };
        sign / (kf * kf) * (1.0 - kf / big) * (kf * x / 2.0).sin()
    }));
    8.0 / std::f64::consts::PI * sum
}

/// Upper bound `ρ'_N(x)` from Cauchy-Schwarz and Parseval.
pub fn rho_upper(n: usize, x: f64) -> f64 {
    let big = (n + 1) as f64;
    let sum = compensated_sum((1..=n).map(|k| {
        let kf = k as f64;
        let c = (1.0 - kf / big) * (kf * x / 2.0).sin() / kf;
        c * c
    }));
    2.0 * 2.0_f64.sqrt() * sum.sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
}

/// `[ρ_N(x), min(ρ'_N(x), |x|)]` for a separation `x ∈ (0, π]`.
pub fn circle_bounds(n: usize, x: f64) -> BoundPair {
    BoundPair { lower: rho_lower(n, x), upper: rho_upper(n, x).min(geodesic_circle(0.0, x)) }
}

/// `F_N(t) = (1/N)(sin(Nt/2)/sin(t/2))²`, with the limit `N` at `t ∈ 2πℤ`.
pub fn fejer_kernel(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    let s = (t / 2.0).sin();
    if s.abs() < 1e-12 {
        return nf;
    }
    let r = (nf * t / 2.0).sin() / s;
    r * r / nf
}

/// Composite Simpson rule; `panels` is rounded up to an even number.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = (panels.max(2) + 1) & !1;
    let h = (b - a) / panels as f64;
    let inner = compensated_sum((1..panels).map(|i| {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        w * f(a + i as f64 * h)
    }));
    (f(a) + f(b) + inner) * h / 3.0
}

/// Fejér transform `(2π)⁻¹ ∫ f(t) F_{N+1}(x − t) dt`, the value of the Fejér
/// state `Ψ_{x,N}` on the multiplication operator by `f`.
pub fn fejer_average<F: Fn(f64) -> f64>(f: F, n: usize, x: f64) -> f64 {
    use std::f64::consts::PI;
    simpson(|t| f(t) * fejer_kernel(n + 1, x - t), -PI, PI, SIMPSON_PANELS) / (2.0 * PI)
}

/// Fejér transform from Fourier coefficients `f_k`, `k = 0..=N`
/// (with `f_{−k} = conj f_k`): `Σ_{|k|≤N} (1 − |k|/(N+1)) f_k e^{ikx}`.
pub fn fejer_fourier_sum(coeffs: &[Complex64], x: f64) -> f64 {
    let big = coeffs.len() as f64;
    let head = coeffs.first().map_or(0.0, |c| c.re);
    head + compensated_sum(coeffs.iter().enumerate().skip(1).map(|(k, c)| {
        let w = 1.0 - k as f64 / big;
        2.0 * w * (c * Complex64::from_polar(1.0, k as f64 * x)).re
    }))
}

pub fn geodesic_circle(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(2.0 * std::f64::consts::PI);
    d.min(2.0 * std::f64::consts::PI - d)
}

pub fn geodesic_plane(z: Complex64, w: Complex64) -> f64 {
    (z - w).norm()
}

/// Great-circle distance between `(polar, azimuth)` points of the unit sphere.
pub fn geodesic_sphere(a: (f64, f64), b: (f64, f64)) -> f64 {
    let unit = |(t, p): (f64, f64)| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
    let (u, v) = (unit(a), unit(b));
    let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Circle(f64),
    Plane(Complex64),
    /// Polar and azimuthal angle.
    Sphere(f64, f64),
}

/// Geodesic distance between two points of the same model space; `None`
/// when the kinds differ.
pub fn geodesic(a: Point, b: Point) -> Option<f64> {
    match (a, b) {
        (Point::Circle(x), Point::Circle(y)) => Some(geodesic_circle(x, y)),
        (Point::Plane(z), Point::Plane(w)) => Some(geodesic_plane(z, w)),
        (Point::Sphere(t1, p1), Point::Sphere(t2, p2)) => Some(geodesic_sphere((t1, p1), (t2, p2))),
        _ => None,
    }
}

/// `K_z(ξ) = θ⁻¹ exp(−|z − ξ|²/θ)`; `π⁻¹ ∫ K_z = 1`.
pub fn berezin_plane_kernel(theta: f64, z: Complex64, xi: Complex64) -> f64 {
    (-(z - xi).norm_sqr() / theta).exp() / theta
}

/// Berezin transform `π⁻¹ ∫ K_z(ξ) f(ξ) d²ξ` by tensor Simpson quadrature on
/// a box of half-width `8√θ` around `z` (the Gaussian tail outside is below
/// `e^{−64}`).
pub fn berezin_plane_transform<F: Fn(Complex64) -> f64>(f: F, theta: f64, z: Complex64, panels: usize) -> f64 {
    let half = 8.0 * theta.sqrt();
    let g = |u: f64, v: f64| {
        let xi = z + Complex64::new(u, v);
        berezin_plane_kernel(theta, z, xi) * f(xi)
    };
    simpson(|u| simpson(|v| g(u, v), -half, half, panels), -half, half, panels) / std::f64::consts::PI
}

/// `ln C(n, k)` as a sum of logarithms.
fn ln_choose(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    compensated_sum((1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()))
}

/// Coefficient `(π/2^{γ+2}) C(2γ, γ)` with `γ = 2ℓ + 1`.
pub fn berezin_sphere_bound(two_ell: usize) -> f64 {
    let gamma = two_ell + 1;
    let ln = ln_choose(2 * gamma, gamma) - (gamma + 2) as f64 * std::f64::consts::LN_2;
    std::f64::consts::PI * ln.exp()
}

/// Mean geodesic displacement `∫ d_geo(x₀, y) K_{x₀}(y) dμ(y)` of the spin-ℓ
/// Berezin kernel `K = γ cos^{4ℓ}(ϑ/2)` (normalized measure), by quadrature.
pub fn berezin_sphere_displacement(two_ell: usize) -> f64 {
    let gamma = (two_ell + 1) as f64;
    let power = 2 * two_ell as i32;
    simpson(
        |t| t * gamma * (t / 2.0).cos().powi(power) * t.sin() / 2.0,
        0.0,
        std::f64::consts::PI,
        SIMPSON_PANELS,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn wasserstein_points_and_self() {
        let a = LatticeDistribution::point(3);
        let b = LatticeDistribution::point(-4);
        assert_eq!(lattice_wasserstein(&a, &b), 7.0);
        let p = LatticeDistribution::new(0, vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(lattice_wasserstein(&p, &p), 0.0);
        // mass 0.2 moves 2 steps, 0.5 moves 1 step
        let q = LatticeDistribution::new(2, vec![1.0]).unwrap();
        assert!((lattice_wasserstein(&p, &q) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rho_closed_values() {
        assert!((rho_lower(1, PI) - 4.0 / PI).abs() < 1e-15);
        assert!((rho_upper(1, PI) - 2.0_f64.sqrt()).abs() < 1e-15);
        for n in [1, 5, 40, 100] {
            assert_eq!(rho_lower(n, 0.0), 0.0);
            assert_eq!(rho_upper(n, 0.0), 0.0);
        }
        let x = 1.3;
        assert!((rho_lower(1, x) - 4.0 / PI * (x / 2.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn rho_ordering() {
        for n in 1..=32 {
            for i in 1..=256 {
                let x = PI * i as f64 / 256.0;
                let lo = rho_lower(n, x);
                assert!(lo <= rho_upper(n, x) + 1e-10, "N={n} x={x}");
                assert!(lo <= x + 1e-10);
            }
        }
    }

    #[test]
    fn rho_lower_tends_to_geodesic() {
        assert!((rho_lower(4000, FRAC_PI_2) - FRAC_PI_2).abs() < 2e-3);
    }

    #[test]
    fn fejer_kernel_values() {
        assert_eq!(fejer_kernel(7, 0.0), 7.0);
        assert!(fejer_kernel(2, PI).abs() < 1e-30);
        for i in 0..1000 {
            assert!(fejer_kernel(9, -PI + i as f64 * 0.00628) >= 0.0);
        }
        for n in [1, 3, 17] {
            let total = simpson(|t| fejer_kernel(n, t), -PI, PI, SIMPSON_PANELS) / (2.0 * PI);
            assert!((total - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fejer_quadrature_matches_fourier_sum() {
        let coeffs = [Complex64::new(0.3, 0.0), Complex64::new(0.2, -0.4), Complex64::new(-0.1, 0.25), Complex64::new(0.05, 0.0)];
        let f = |t: f64| {
            coeffs[0].re
                + coeffs.iter().enumerate().skip(1).map(|(k, c)| 2.0 * (c * Complex64::from_polar(1.0, k as f64 * t)).re).sum::<f64>()
        };
        for n in [3, 5] {
            let mut padded = coeffs.to_vec();
            padded.resize(n + 1, Complex64::new(0.0, 0.0));
            for x in [0.0, 0.7, -2.1] {
                assert!((fejer_average(f, n, x) - fejer_fourier_sum(&padded, x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn geodesics() {
        assert_eq!(geodesic(Point::Circle(0.0), Point::Circle(FRAC_PI_2)), Some(FRAC_PI_2));
        assert!((geodesic_circle(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-14);
        assert_eq!(geodesic(Point::Plane(Complex64::new(0.0, 0.0)), Point::Plane(Complex64::new(3.0, 4.0))), Some(5.0));
        assert!((geodesic(Point::Sphere(0.0, 0.0), Point::Sphere(PI, 0.0)).unwrap() - PI).abs() < 1e-15);
        assert_eq!(geodesic(Point::Circle(0.0), Point::Sphere(0.0, 0.0)), None);
    }

    #[test]
    fn plane_kernel_normalized() {
        let z = Complex64::new(0.4, -1.0);
        assert_eq!(berezin_plane_kernel(2.0, z, z), 0.5);
        let total = berezin_plane_transform(|_| 1.0, 0.7, z, 512);
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn plane_berezin_bound() {
        // 1-Lipschitz test functions
        let theta: f64 = 0.5;
        let bound = (PI * theta).sqrt();
        let fs: [fn(Complex64) -> f64; 3] = [|z| z.norm(), |z| (z.re).sin(), |z| (z - Complex64::new(1.0, 0.5)).norm().min(1.0)];
        for f in fs {
            for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.5), Complex64::new(-0.3, 2.0)] {
                let b = berezin_plane_transform(f, theta, z, SIMPSON_PANELS);
                assert!((f(z) - b).abs() <= bound, "{} vs {}", f(z), b);
            }
        }
    }

    #[test]
    fn sphere_bound_values() {
        assert!((berezin_sphere_bound(2) - 5.0 * PI / 8.0).abs() < 1e-14);
        assert!((berezin_sphere_bound(0) - PI / 4.0).abs() < 1e-15);
        // exact binomials
        for two_ell in 0..=40usize {
            let gamma = two_ell as u128 + 1;
            let mut binom: u128 = 1;
            for j in 0..gamma {
                binom = binom * (2 * gamma - j) / (j + 1);
            }
            let exact = PI * binom as f64 / 2.0_f64.powi(gamma as i32 + 2);
            assert!((berezin_sphere_bound(two_ell) / exact - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_displacement_decreases() {
        // printed coefficient and kernel integral agree at ℓ = 1/2 only
        assert!((berezin_sphere_displacement(1) - berezin_sphere_bound(1)).abs() < 1e-10);
        assert!((berezin_sphere_displacement(0) - FRAC_PI_2).abs() < 1e-10);
        for two_ell in 0..40 {
            let gamma = (two_ell + 1) as f64;
            let closed = PI * (ln_choose(2 * two_ell + 2, two_ell + 1) - 2.0 * gamma * std::f64::consts::LN_2).exp();
            assert!((berezin_sphere_displacement(two_ell) - closed).abs() < 1e-10);
            assert!(berezin_sphere_displacement(two_ell + 1) < berezin_sphere_displacement(two_ell));
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = std::iter::once(1e16).chain(std::iter::repeat_n(1.0, 1000)).chain(std::iter::once(-1e16));
        assert_eq!(compensated_sum(terms), 1000.0);
    }
}
