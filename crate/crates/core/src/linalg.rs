//! Dense complex linear algebra: Hermitian operators, spectral norms,
//! commutators, compressions by projections and spin doubling.
//!
//! Everything is dense. Sizes in this crate stay at a few hundred rows, where
//! the eigendecompositions dominate and sparse storage buys nothing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Asymmetry above this is reported when a matrix is symmetrized.
const SYMMETRIZE_WARN: f64 = 1e-10;
/// Asymmetry above this (relative) is not floating-point drift.
const SYMMETRIZE_REJECT: f64 = 1e-6;
/// Tolerance for P² = P = P†.
pub const PROJECTION_TOL: f64 = 1e-10;

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A self-adjoint matrix. Construction symmetrizes `(M + M†)/2`, so the
/// stored matrix is Hermitian to rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian {
    matrix: CMatrix,
}

impl Hermitian {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput(format!(
                "Hermitian operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if !is_finite(&matrix) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let adjoint = matrix.adjoint();
        let asymmetry = max_abs(&(&matrix - &adjoint)) / 2.0;
        let scale = max_abs(&matrix).max(1.0);
        if asymmetry > SYMMETRIZE_REJECT * scale {
            return Err(Error::NotHermitian { asymmetry });
        }
        if asymmetry > SYMMETRIZE_WARN {
            log::warn!("symmetrizing operator with asymmetry {asymmetry:.3e}");
        }
        let matrix = (matrix + adjoint).unscale(2.0);
        Ok(Self { matrix })
    }

    /// Wraps a matrix the caller knows to be Hermitian; still symmetrizes.
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let adjoint = matrix.adjoint();
        Self {
            matrix: (matrix + adjoint).unscale(2.0),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = c64(d, 0.0);
        }
        Self { matrix: m }
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`; `psi` is used as given (no normalization).
    pub fn outer(psi: &CVector) -> Self {
        Self::from_matrix_unchecked(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Re Tr(self · other).
    pub fn trace_product(&self, other: &Hermitian) -> f64 {
        trace_product(&self.matrix, &other.matrix).re
    }

    /// Eigenvalues in ascending order with matching eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vectors = CMatrix::zeros(self.dim(), self.dim());
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Largest |eigenvalue|, the operator norm of a Hermitian matrix.
    pub fn norm(&self) -> f64 {
        let values = self.eigenvalues();
        values[0].abs().max(values[values.len() - 1].abs())
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        projection_defect(self) <= tol
    }

    pub fn scale(&self, s: f64) -> Hermitian {
        Hermitian {
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Hermitian) -> Result<Hermitian> {
        check_dims(self.dim(), other.dim())?;
        Ok(Hermitian {
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Hermitian) -> Result<Hermitian> {
        check_dims(self.dim(), other.dim())?;
        Ok(Hermitian {
            matrix: &self.matrix - &other.matrix,
        })
    }

    /// Conjugation `U · self · U†` by a unitary (or any square matrix).
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Hermitian> {
        check_dims(self.dim(), u.nrows())?;
        Ok(Hermitian::from_matrix_unchecked(u * &self.matrix * u.adjoint()))
    }

    /// Trace norm ‖·‖₁, the sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues().iter().map(|v| v.abs()).sum()
    }
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Tr(A·B) without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn projection_defect(p: &Hermitian) -> f64 {
    let m = p.matrix();
    let square = m * m;
    let idempotency = max_abs(&(square - m));
    let adjointness = max_abs(&(m - m.adjoint()));
    idempotency.max(adjointness)
}

/// Largest singular value, from the top eigenvalue of the Hermitian A†A.
pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    if !is_finite(a) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let gram = a.adjoint() * a;
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, &v| acc.max(v));
    Ok(top.sqrt())
}

/// Largest singular value from the Hermitian dilation [[0, A], [A†, 0]],
/// whose spectrum is ±σ(A). Used to cross-check [`spectral_norm`].
pub fn spectral_norm_dilation(a: &CMatrix) -> Result<f64> {
    if !is_finite(a) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let (r, c) = a.shape();
    let mut dilation = CMatrix::zeros(r + c, r + c);
    dilation.view_mut((0, r), (r, c)).copy_from(a);
    dilation.view_mut((r, 0), (c, r)).copy_from(&a.adjoint());
    let values = dilation.symmetric_eigenvalues();
    Ok(values.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs())))
}

/// `[D, a] = D a − a D`.
pub fn commutator(d: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if d.shape() != a.shape() || !d.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d.nrows(),
            got: a.nrows(),
        });
    }
    Ok(d * a - a * d)
}

/// How a compression reports its result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compression {
    /// P A P on the ambient space.
    Ambient,
    /// V† A V on the range of P, with V an orthonormal range basis.
    RangeBasis,
}

/// Orthonormal basis of the range of a projection, as columns of an n×r
/// isometry. Diagonal 0/1 projections keep the canonical basis order.
pub fn range_basis(p: &Hermitian) -> Result<CMatrix> {
    let defect = projection_defect(p);
    if defect > PROJECTION_TOL {
        return Err(Error::NotProjection { defect });
    }
    let m = p.matrix();
    let n = p.dim();
    let off_diagonal = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .fold(0.0_f64, |acc, (i, j)| acc.max(m[(i, j)].norm()));
    if off_diagonal <= PROJECTION_TOL {
        let kept: Vec<usize> = (0..n).filter(|&i| m[(i, i)].re > 0.5).collect();
        let mut v = CMatrix::zeros(n, kept.len());
        for (col, &row) in kept.iter().enumerate() {
            v[(row, col)] = c64(1.0, 0.0);
        }
        return Ok(v);
    }
    let (values, vectors) = p.eigh();
    let kept: Vec<usize> = (0..n).filter(|&i| values[i] > 0.5).collect();
    let mut v = CMatrix::zeros(n, kept.len());
    for (col, &src) in kept.iter().enumerate() {
        v.set_column(col, &vectors.column(src));
    }
    Ok(v)
}

/// Compression of `a` by the orthogonal projection `p`.
///
/// With [`Compression::RangeBasis`] the result has dimension rank(P). A rank
/// zero projection yields the zero operator on the ambient space in ambient
/// mode, and an error in range mode (there is no zero-dimensional operator).
pub fn compress(p: &Hermitian, a: &Hermitian, mode: Compression) -> Result<Hermitian> {
    check_dims(p.dim(), a.dim())?;
    let defect = projection_defect(p);
    if defect > PROJECTION_TOL {
        return Err(Error::NotProjection { defect });
    }
    match mode {
        Compression::Ambient => {
            let pm = p.matrix();
            Ok(Hermitian::from_matrix_unchecked(pm * a.matrix() * pm))
        }
        Compression::RangeBasis => {
            let v = range_basis(p)?;
            if v.ncols() == 0 {
                return Err(Error::InvalidInput(
                    "range of a rank-zero projection has no basis".into(),
                ));
            }
            Ok(Hermitian::from_matrix_unchecked(v.adjoint() * a.matrix() * &v))
        }
    }
}

/// Block-diagonal embedding `diag(a, …, a)` with `s` copies, matching a Dirac
/// operator whose spinor index is the outer (slowest) index.
pub fn spin_double(a: &Hermitian, s: usize) -> Result<Hermitian> {
    if s == 0 {
        return Err(Error::InvalidInput("spin multiplicity must be >= 1".into()));
    }
    if s == 1 {
        return Ok(a.clone());
    }
    let n = a.dim();
    let mut m = CMatrix::zeros(n * s, n * s);
    for block in 0..s {
        m.view_mut((block * n, block * n), (n, n)).copy_from(a.matrix());
    }
    Ok(Hermitian { matrix: m })
}

/// `exp(i t H)` through the eigendecomposition of `H`.
pub fn unitary_exp(h: &Hermitian, t: f64) -> CMatrix {
    let (values, vectors) = h.eigh();
    let phases = CVector::from_iterator(values.len(), values.iter().map(|&l| Complex64::from_polar(1.0, t * l)));
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * vectors.adjoint()
}

/// ‖U†U − I‖_max.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_complex_matrix, random_hermitian, random_unitary, rng};

    fn kron_naive(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (ra, ca) = a.shape();
        let (rb, cb) = b.shape();
        let mut out = CMatrix::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in 0..ca {
                for k in 0..rb {
                    for l in 0..cb {
                        out[(i * rb + k, j * cb + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn spectral_norm_of_identity_and_nilpotent() {
        let id = CMatrix::identity(3, 3);
        assert!((spectral_norm(&id).unwrap() - 1.0).abs() < 1e-14);
        let mut nil = CMatrix::zeros(2, 2);
        nil[(0, 1)] = c64(1.0, 0.0);
        assert!((spectral_norm(&nil).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_matches_independent_svd() {
        let mut r = rng(11);
        let a = random_complex_matrix(&mut r, 8, 8);
        let via_gram = spectral_norm(&a).unwrap();
        let svd = a.clone().svd(false, false);
        let via_svd = svd.singular_values.iter().fold(0.0_f64, |m, &v| m.max(v));
        assert!((via_gram - via_svd).abs() <= 1e-10 * via_svd);
        let via_dilation = spectral_norm_dilation(&a).unwrap();
        assert!((via_gram - via_dilation).abs() <= 1e-10 * via_svd);
    }

    #[test]
    fn spectral_norm_rejects_nan() {
        let mut a = CMatrix::identity(2, 2);
        a[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(spectral_norm(&a), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectral_norm_is_unitarily_invariant() {
        let mut r = rng(5);
        for _ in 0..10 {
            let a = random_complex_matrix(&mut r, 6, 6);
            let u = random_unitary(&mut r, 6);
            let v = random_unitary(&mut r, 6);
            let lhs = spectral_norm(&(&u * &a * &v)).unwrap();
            assert!((lhs - spectral_norm(&a).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn commutator_trivial_cases() {
        let mut r = rng(3);
        let d = random_hermitian(&mut r, 5);
        let id = CMatrix::identity(5, 5);
        assert!(max_abs(&commutator(d.matrix(), &id).unwrap()) < 1e-14);
        assert!(max_abs(&commutator(d.matrix(), d.matrix()).unwrap()) < 1e-12);
        assert!(commutator(d.matrix(), &CMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn commutator_leibniz_rule() {
        let mut r = rng(7);
        for _ in 0..10 {
            let d = random_hermitian(&mut r, 6);
            let a = random_hermitian(&mut r, 6);
            let b = random_hermitian(&mut r, 6);
            let ab = a.matrix() * b.matrix();
            let lhs = commutator(d.matrix(), &ab).unwrap();
            let rhs = commutator(d.matrix(), a.matrix()).unwrap() * b.matrix()
                + a.matrix() * commutator(d.matrix(), b.matrix()).unwrap();
            assert!(max_abs(&(lhs - rhs)) < 1e-10);
            let swap = commutator(a.matrix(), d.matrix()).unwrap() + commutator(d.matrix(), a.matrix()).unwrap();
            assert!(max_abs(&swap) < 1e-12);
        }
    }

    #[test]
    fn compress_identity_and_rank_zero() {
        let mut r = rng(9);
        let a = random_hermitian(&mut r, 4);
        let id = Hermitian::identity(4);
        let same = compress(&id, &a, Compression::Ambient).unwrap();
        assert!(max_abs(&(same.matrix() - a.matrix())) < 1e-14);
        let zero = compress(&Hermitian::zeros(4), &a, Compression::Ambient).unwrap();
        assert!(max_abs(zero.matrix()) == 0.0);
    }

    #[test]
    fn compress_diagonal_pattern_masks_rows_and_columns() {
        let mut r = rng(13);
        let a = random_hermitian(&mut r, 6);
        let pattern = [1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let p = Hermitian::from_real_diagonal(&pattern);
        let pap = compress(&p, &a, Compression::Ambient).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if pattern[i] * pattern[j] > 0.0 { a.matrix()[(i, j)] } else { c64(0.0, 0.0) };
                assert!((pap.matrix()[(i, j)] - expected).norm() < 1e-15);
            }
        }
        let reduced = compress(&p, &a, Compression::RangeBasis).unwrap();
        assert_eq!(reduced.dim(), 4);
        assert_eq!(reduced.matrix()[(1, 2)], a.matrix()[(2, 3)]);
        let twice = compress(&p, &pap, Compression::Ambient).unwrap();
        assert!(max_abs(&(twice.matrix() - pap.matrix())) < 1e-12);
    }

    #[test]
    fn compress_rejects_non_projection() {
        let p = Hermitian::from_real_diagonal(&[0.5, 1.0]);
        let a = Hermitian::identity(2);
        assert!(matches!(compress(&p, &a, Compression::Ambient), Err(Error::NotProjection { .. })));
    }

    #[test]
    fn spin_double_matches_kronecker_oracle() {
        let mut r = rng(17);
        let a = random_hermitian(&mut r, 2);
        assert_eq!(spin_double(&a, 1).unwrap(), a);
        let doubled = spin_double(&a, 2).unwrap();
        let oracle = kron_naive(&CMatrix::identity(2, 2), a.matrix());
        assert!(max_abs(&(doubled.matrix() - oracle)) == 0.0);
        let id = spin_double(&Hermitian::identity(3), 2).unwrap();
        assert_eq!(id, Hermitian::identity(6));
    }

    #[test]
    fn hermitian_construction_symmetrizes_and_rejects() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c64(1.0, 1e-12);
        m[(1, 0)] = c64(1.0, 0.0);
        let h = Hermitian::new(m).unwrap();
        assert!((h.matrix()[(0, 1)] - h.matrix()[(1, 0)].conj()).norm() < 1e-16);
        let mut bad = CMatrix::identity(2, 2);
        bad[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(Hermitian::new(bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn unitary_exp_group_property() {
        let mut r = rng(21);
        let h = random_hermitian(&mut r, 5);
        let u = unitary_exp(&h, 0.7);
        let v = unitary_exp(&h, -0.7);
        assert!(max_abs(&(&u * &v - CMatrix::identity(5, 5))) < 1e-10);
        assert!(unitarity_defect(&u) < 1e-10);
        let zero = unitary_exp(&h, 0.0);
        assert!(max_abs(&(zero - CMatrix::identity(5, 5))) < 1e-12);
    }
}
