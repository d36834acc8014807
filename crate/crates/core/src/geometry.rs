//! Truncated spectral triples.
//!
//! Ordering conventions: the spinor index is the outer index, so a vector of a
//! triple with `hilbert_dim = L` and `spin_dim = 2` is `(ψ₊, ψ₋)` with each
//! half of length `L`. Lattice sites ascend from the window start, Fourier
//! modes ascend from `−N`, Fock levels ascend from 0 and sphere weights ascend
//! from `m = −ℓ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Hermitian};
use crate::sparse::SparseMatrix;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryParams {
    /// Sites `n_min..=n_max` of ℤ with the two-spinor hopping Dirac operator.
    Lattice { n_min: i64, n_max: i64 },
    /// Sites `n_min..=n_max` with the centred difference `i(|n+1⟩ − |n−1⟩)`.
    LatticeVariant { n_min: i64, n_max: i64 },
    /// Fourier modes `−n..=n` on the circle.
    Circle {
        n: usize,
        #[serde(default)]
        full_algebra: bool,
    },
    /// Fock levels `0..=n_max` of the Moyal plane with deformation `theta`.
    Moyal { theta: f64, n_max: usize },
    /// Spin `ℓ = two_ell / 2` fuzzy sphere.
    FuzzySphere { two_ell: usize },
    /// `points` points with the flip Dirac operator `lambda·F`.
    Flip { points: usize, lambda: f64, base: usize },
    /// Two lattice windows with no hopping between them.
    TwoBlockLattice { len_a: usize, len_b: usize },
    /// `points` grid cells with the rank-two Dirac operator `P₁ + 2P₂`.
    FiniteRankGrid { points: usize },
}

impl GeometryParams {
    pub fn build(&self) -> Result<TruncatedTriple> {
        match *self {
            GeometryParams::Lattice { n_min, n_max } => build_lattice(n_min, n_max),
            GeometryParams::LatticeVariant { n_min, n_max } => build_lattice_variant(n_min, n_max),
            GeometryParams::Circle { n, full_algebra } => {
                if full_algebra {
                    build_circle_full(n)
                } else {
                    build_circle(n)
                }
            }
            GeometryParams::Moyal { theta, n_max } => build_moyal(theta, n_max),
            GeometryParams::FuzzySphere { two_ell } => build_fuzzy_sphere(two_ell),
            GeometryParams::Flip { points, lambda, base } => build_flip(points, lambda, base),
            GeometryParams::TwoBlockLattice { len_a, len_b } => build_two_block_lattice(len_a, len_b),
            GeometryParams::FiniteRankGrid { points } => build_finite_rank_grid(points),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            GeometryParams::Lattice { n_min, n_max } => format!("lattice[{n_min},{n_max}]"),
            GeometryParams::LatticeVariant { n_min, n_max } => format!("lattice-variant[{n_min},{n_max}]"),
            GeometryParams::Circle { n, full_algebra } => {
                if full_algebra {
                    format!("circle-full(N={n})")
                } else {
                    format!("circle(N={n})")
                }
            }
            GeometryParams::Moyal { theta, n_max } => format!("moyal(theta={theta},n_max={n_max})"),
            GeometryParams::FuzzySphere { two_ell } => format!("fuzzy-sphere(2l={two_ell})"),
            GeometryParams::Flip { points, lambda, base } => format!("flip(m={points},lambda={lambda},base={base})"),
            GeometryParams::TwoBlockLattice { len_a, len_b } => format!("two-block-lattice({len_a},{len_b})"),
            GeometryParams::FiniteRankGrid { points } => format!("finite-rank-grid({points})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedTriple {
    pub name: String,
    pub params: GeometryParams,
    pub hilbert_dim: usize,
    pub spin_dim: usize,
    dirac: Hermitian,
    dirac_sparse: SparseMatrix,
    /// Real-linear basis of the truncated algebra; entry 0 is the identity.
    generators: Vec<SparseMatrix>,
}

impl TruncatedTriple {
    fn new(params: GeometryParams, hilbert_dim: usize, spin_dim: usize, dirac: SparseMatrix, generators: Vec<SparseMatrix>) -> Self {
        debug_assert_eq!(dirac.rows(), hilbert_dim * spin_dim);
        debug_assert!(generators[0] == SparseMatrix::identity(hilbert_dim));
        Self {
            name: params.label(),
            params,
            hilbert_dim,
            spin_dim,
            dirac: dirac.to_hermitian(),
            dirac_sparse: dirac,
            generators,
        }
    }

    /// Same algebra and parameters with another Dirac operator. States built
    /// on `self` remain valid on the result.
    pub fn with_dirac(&self, dirac: &Hermitian) -> Result<TruncatedTriple> {
        linalg::check_dims(self.full_dim(), dirac.dim())?;
        let sparse = SparseMatrix::from_dense(dirac.matrix());
        Ok(Self {
            name: format!("{} (modified Dirac)", self.name),
            dirac: sparse.to_hermitian(),
            dirac_sparse: sparse,
            ..self.clone()
        })
    }

    /// Dimension of the space the Dirac operator acts on.
    pub fn full_dim(&self) -> usize {
        self.hilbert_dim * self.spin_dim
    }

    pub fn dirac(&self) -> &Hermitian {
        &self.dirac
    }

    pub fn dirac_sparse(&self) -> &SparseMatrix {
        &self.dirac_sparse
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[SparseMatrix] {
        &self.generators
    }

    pub fn algebra_basis(&self) -> Vec<Hermitian> {
        self.generators.iter().map(SparseMatrix::to_hermitian).collect()
    }

    /// `Σ x_k G_k`.
    pub fn element(&self, coeffs: &[f64]) -> Result<Hermitian> {
        linalg::check_dims(self.generators.len(), coeffs.len())?;
        let mut m = CMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for (g, &x) in self.generators.iter().zip(coeffs) {
            if x != 0.0 {
                for &(r, c, v) in g.entries() {
                    m[(r, c)] += v * x;
                }
            }
        }
        Ok(Hermitian::from_matrix_unchecked(m))
    }

    /// `[D, a ⊗ I_s]` for an operator `a` on the truncated Hilbert space.
    pub fn commutator_with(&self, a: &Hermitian) -> Result<CMatrix> {
        linalg::check_dims(self.hilbert_dim, a.dim())?;
        let lifted = linalg::spin_double(a, self.spin_dim)?;
        linalg::commutator(self.dirac.matrix(), lifted.matrix())
    }

    /// Lipschitz seminorm `‖[D, a ⊗ I_s]‖`.
    pub fn lipschitz_norm(&self, a: &Hermitian) -> Result<f64> {
        linalg::spectral_norm(&self.commutator_with(a)?)
    }

    /// Hermitian constraint matrices `i[D, G_k ⊗ I_s]`, one per generator.
    pub fn constraint_matrices(&self) -> Vec<SparseMatrix> {
        self.generators
            .iter()
            .map(|g| self.dirac_sparse.commutator(&g.spin_double(self.spin_dim)).scale(im(1.0)))
            .collect()
    }

    pub fn geodesic_flow_unitary(&self, t: f64) -> CMatrix {
        linalg::unitary_exp(&self.dirac, t)
    }

    /// Smallest eigenvalue of the Hilbert-Schmidt Gram matrix of the basis
    /// divided by the largest; positive iff the basis is independent.
    pub fn basis_conditioning(&self) -> f64 {
        let k = self.generators.len();
        let mut gram = nalgebra::DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = self.generators[i].trace_product(&self.generators[j]).re;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let eig = gram.symmetric_eigenvalues();
        let max = eig.iter().fold(f64::MIN, |m, &v| m.max(v));
        let min = eig.iter().fold(f64::MAX, |m, &v| m.min(v));
        min / max
    }
}

fn indicator_basis(dim: usize) -> Vec<SparseMatrix> {
    let mut gens = vec![SparseMatrix::identity(dim)];
    for j in 1..dim {
        gens.push(SparseMatrix::from_triplets(dim, dim, [(j, j, re(1.0))]));
    }
    gens
}

/// Identity, diagonal units `E_pp` for `p ≥ 1`, then for each `p < q` the pair
/// `E_pq + E_qp`, `i(E_pq − E_qp)`.
pub fn full_hermitian_basis(dim: usize) -> Vec<SparseMatrix> {
    let mut gens = indicator_basis(dim);
    for p in 0..dim {
        for q in (p + 1)..dim {
            gens.push(SparseMatrix::from_triplets(dim, dim, [(p, q, re(1.0)), (q, p, re(1.0))]));
            gens.push(SparseMatrix::from_triplets(dim, dim, [(p, q, im(1.0)), (q, p, im(-1.0))]));
        }
    }
    gens
}

fn lattice_len(n_min: i64, n_max: i64, min_len: usize) -> Result<usize> {
    let len = n_max - n_min + 1;
    if len < min_len as i64 {
        return Err(Error::InvalidGeometry(format!(
            "lattice window [{n_min},{n_max}] needs at least {min_len} sites"
        )));
    }
    Ok(len as usize)
}

/// Hops `|n⟩₊ → |n+1⟩₋` and back inside each block of sites, spinor-major.
fn lattice_hops(blocks: &[(usize, usize)], total: usize) -> SparseMatrix {
    let mut triplets = Vec::new();
    for &(start, len) in blocks {
        for n in start..start + len - 1 {
            triplets.push((total + n + 1, n, re(1.0)));
            triplets.push((n, total + n + 1, re(1.0)));
        }
    }
    SparseMatrix::from_triplets(2 * total, 2 * total, triplets)
}

pub fn build_lattice(n_min: i64, n_max: i64) -> Result<TruncatedTriple> {
    let len = lattice_len(n_min, n_max, 2)?;
    let dirac = lattice_hops(&[(0, len)], len);
    Ok(TruncatedTriple::new(
        GeometryParams::Lattice { n_min, n_max },
        len,
        2,
        dirac,
        indicator_basis(len),
    ))
}

pub fn build_lattice_variant(n_min: i64, n_max: i64) -> Result<TruncatedTriple> {
    let len = lattice_len(n_min, n_max, 3)?;
    let mut triplets = Vec::new();
    for n in 0..len - 1 {
        // i·D' with D'|n⟩ = |n+1⟩ − |n−1⟩
        triplets.push((n + 1, n, im(1.0)));
        triplets.push((n, n + 1, im(-1.0)));
    }
    let dirac = SparseMatrix::from_triplets(len, len, triplets);
    Ok(TruncatedTriple::new(
        GeometryParams::LatticeVariant { n_min, n_max },
        len,
        1,
        dirac,
        indicator_basis(len),
    ))
}

fn circle_dirac(n: usize) -> SparseMatrix {
    let dim = 2 * n + 1;
    SparseMatrix::from_triplets(dim, dim, (0..dim).map(|i| (i, i, re(i as f64 - n as f64))))
}

/// Shift `T_k` with `(T_k)_{ij} = 1` when `i − j = k`.
pub fn toeplitz_shift(dim: usize, k: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(dim, dim, (k..dim).map(|i| (i, i - k, re(1.0))))
}

/// Generators `I`, then `T_k + T_k†`, `i(T_k − T_k†)` for `k = 1..=2N`. The
/// coefficients of a real trigonometric polynomial with Fourier coefficients
/// `f_k` are `f_0`, then `Re f_k`, `Im f_k`.
pub fn build_circle(n: usize) -> Result<TruncatedTriple> {
    if n == 0 {
        return Err(Error::InvalidGeometry("circle cutoff must be >= 1".into()));
    }
    let dim = 2 * n + 1;
    let mut gens = vec![SparseMatrix::identity(dim)];
    for k in 1..dim {
        let t = toeplitz_shift(dim, k);
        let t_adj = t.adjoint();
        gens.push(t.add(&t_adj));
        gens.push(t.sub(&t_adj).scale(im(1.0)));
    }
    Ok(TruncatedTriple::new(
        GeometryParams::Circle { n, full_algebra: false },
        dim,
        1,
        circle_dirac(n),
        gens,
    ))
}

pub fn build_circle_full(n: usize) -> Result<TruncatedTriple> {
    if n == 0 {
        return Err(Error::InvalidGeometry("circle cutoff must be >= 1".into()));
    }
    let dim = 2 * n + 1;
    Ok(TruncatedTriple::new(
        GeometryParams::Circle { n, full_algebra: true },
        dim,
        1,
        circle_dirac(n),
        full_hermitian_basis(dim),
    ))
}

/// Projection of the `2K+1` mode space onto the middle `2N+1` modes.
pub fn circle_middle_projection(k: usize, n: usize) -> Result<Hermitian> {
    if n > k {
        return Err(Error::InvalidGeometry(format!("inner cutoff {n} exceeds ambient cutoff {k}")));
    }
    let diag: Vec<f64> = (0..2 * k + 1)
        .map(|i| if (i as i64 - k as i64).unsigned_abs() as usize <= n { 1.0 } else { 0.0 })
        .collect();
    Ok(Hermitian::from_real_diagonal(&diag))
}

/// Truncated annihilation operator on Fock levels `0..=n_max`.
pub fn annihilation(n_max: usize) -> SparseMatrix {
    let dim = n_max + 1;
    SparseMatrix::from_triplets(dim, dim, (1..dim).map(|n| (n - 1, n, re((n as f64).sqrt()))))
}

pub fn build_moyal(theta: f64, n_max: usize) -> Result<TruncatedTriple> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::InvalidGeometry(format!("theta must be positive, got {theta}")));
    }
    if n_max == 0 {
        return Err(Error::InvalidGeometry("n_max must be >= 1".into()));
    }
    let dim = n_max + 1;
    let scale = 2.0 / theta.sqrt();
    let a = annihilation(n_max);
    let mut triplets = Vec::new();
    for &(r, c, v) in a.entries() {
        // upper-right block a†, lower-left block a
        triplets.push((c, dim + r, v.conj() * scale));
        triplets.push((dim + r, c, v * scale));
    }
    let dirac = SparseMatrix::from_triplets(2 * dim, 2 * dim, triplets);
    Ok(TruncatedTriple::new(
        GeometryParams::Moyal { theta, n_max },
        dim,
        2,
        dirac,
        full_hermitian_basis(dim),
    ))
}

/// `(ρ(H), ρ(E))` for spin `two_ell/2` in the basis `m = −ℓ, …, ℓ`.
pub fn su2_generators(two_ell: usize) -> (SparseMatrix, SparseMatrix) {
    let dim = two_ell + 1;
    let ell = two_ell as f64 / 2.0;
    let h = SparseMatrix::from_triplets(dim, dim, (0..dim).map(|i| (i, i, re(i as f64 - ell))));
    let e = SparseMatrix::from_triplets(
        dim,
        dim,
        (0..dim - 1).map(|i| {
            let m = i as f64 - ell;
            (i + 1, i, re(((ell - m) * (ell + m + 1.0)).sqrt()))
        }),
    );
    (h, e)
}

pub fn build_fuzzy_sphere(two_ell: usize) -> Result<TruncatedTriple> {
    if two_ell == 0 {
        return Err(Error::InvalidGeometry("2l must be >= 1".into()));
    }
    let dim = two_ell + 1;
    let (h, e) = su2_generators(two_ell);
    let f = e.adjoint();
    let mut triplets = Vec::new();
    for i in 0..dim {
        triplets.push((i, i, re(0.5)));
        triplets.push((dim + i, dim + i, re(0.5)));
    }
    for &(r, c, v) in h.entries() {
        triplets.push((r, c, v));
        triplets.push((dim + r, dim + c, -v));
    }
    for &(r, c, v) in f.entries() {
        triplets.push((r, dim + c, v));
    }
    for &(r, c, v) in e.entries() {
        triplets.push((dim + r, c, v));
    }
    let dirac = SparseMatrix::from_triplets(2 * dim, 2 * dim, triplets);
    Ok(TruncatedTriple::new(
        GeometryParams::FuzzySphere { two_ell },
        dim,
        2,
        dirac,
        full_hermitian_basis(dim),
    ))
}

/// Hilbert space `ℂ^m ⊕ ℂ^m`; point `j` is represented as
/// `diag(e_j, [j = base]·I)`.
pub fn build_flip(points: usize, lambda: f64, base: usize) -> Result<TruncatedTriple> {
    if points < 2 {
        return Err(Error::InvalidGeometry("flip geometry needs at least 2 points".into()));
    }
    if base >= points {
        return Err(Error::InvalidGeometry(format!("base {base} out of range for {points} points")));
    }
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidGeometry(format!("lambda must be positive, got {lambda}")));
    }
    let dim = 2 * points;
    let dirac = SparseMatrix::from_triplets(
        dim,
        dim,
        (0..points).flat_map(|j| [(j, points + j, re(lambda)), (points + j, j, re(lambda))]),
    );
    let mut gens = vec![SparseMatrix::identity(dim)];
    for j in (0..points).filter(|&j| j != base) {
        gens.push(SparseMatrix::from_triplets(dim, dim, [(j, j, re(1.0))]));
    }
    Ok(TruncatedTriple::new(
        GeometryParams::Flip { points, lambda, base },
        dim,
        1,
        dirac,
        gens,
    ))
}

pub fn build_two_block_lattice(len_a: usize, len_b: usize) -> Result<TruncatedTriple> {
    if len_a < 2 || len_b < 2 {
        return Err(Error::InvalidGeometry("each block needs at least 2 sites".into()));
    }
    let len = len_a + len_b;
    let dirac = lattice_hops(&[(0, len_a), (len_a, len_b)], len);
    Ok(TruncatedTriple::new(
        GeometryParams::TwoBlockLattice { len_a, len_b },
        len,
        2,
        dirac,
        indicator_basis(len),
    ))
}

/// Grid vectors of the rank-two Dirac operator: the constant vector and
/// `cos(π x_j)` at cell centres `x_j = (j + 1/2)/m`, both normalized.
pub fn finite_rank_grid_vectors(points: usize) -> (Vec<f64>, Vec<f64>) {
    let m = points as f64;
    let psi1 = vec![1.0 / m.sqrt(); points];
    let raw: Vec<f64> = (0..points)
        .map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / m).cos())
        .collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let psi2 = raw.into_iter().map(|v| v / norm).collect();
    (psi1, psi2)
}

pub fn build_finite_rank_grid(points: usize) -> Result<TruncatedTriple> {
    if points < 2 {
        return Err(Error::InvalidGeometry("grid needs at least 2 points".into()));
    }
    let (psi1, psi2) = finite_rank_grid_vectors(points);
    let mut triplets = Vec::new();
    for i in 0..points {
        for j in 0..points {
            let v = psi1[i] * psi1[j] + 2.0 * psi2[i] * psi2[j];
            triplets.push((i, j, re(v)));
        }
    }
    let dirac = SparseMatrix::from_triplets(points, points, triplets);
    Ok(TruncatedTriple::new(
        GeometryParams::FiniteRankGrid { points },
        points,
        1,
        dirac,
        indicator_basis(points),
    ))
}
