//! Seeded random operators and distributions for property checks.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMatrix, CVector, Hermitian};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let t = std::f64::consts::TAU * u2;
    (r * t.cos(), r * t.sin())
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let (re, im) = gaussian_pair(rng);
        Complex64::new(re, im)
    })
}

pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize) -> Hermitian {
    let a = random_complex_matrix(rng, n, n);
    Hermitian::from_matrix_unchecked(&a + a.adjoint())
}

pub fn random_real_diagonal<R: Rng>(rng: &mut R, n: usize) -> Hermitian {
    let diag: Vec<f64> = (0..n).map(|_| gaussian_pair(rng).0).collect();
    Hermitian::from_real_diagonal(&diag)
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix, with the
/// phases of R's diagonal folded back into Q.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let a = random_complex_matrix(rng, n, n);
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| {
            let (re, im) = gaussian_pair(rng);
            Complex64::new(re, im)
        });
        let norm = v.norm();
        if norm > 1e-8 {
            return v.unscale(norm);
        }
    }
}

/// Probability vector with entries drawn uniformly then normalized.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Random mixed state: W W† / Tr(W W†) for a Gaussian n×rank matrix W.
pub fn random_density<R: Rng>(rng: &mut R, n: usize, rank: usize) -> Hermitian {
    let w = random_complex_matrix(rng, n, rank.max(1));
    let rho = &w * w.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    Hermitian::from_matrix_unchecked(rho.unscale(tr))
}

pub fn random_real_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gaussian_pair(rng).0)
}

/// Random orthogonal projection of the given rank.
pub fn random_projection<R: Rng>(rng: &mut R, n: usize, rank: usize) -> Hermitian {
    let u = random_unitary(rng, n);
    let v = u.columns(0, rank.min(n)).into_owned();
    Hermitian::from_matrix_unchecked(&v * v.adjoint())
}
