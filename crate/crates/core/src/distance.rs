//! Certified spectral distances.
//!
//! The distance `sup{Tr(Δa) : ‖[D, a ⊗ I_s]‖ ≤ 1}` over the real span of the
//! algebra generators is solved as the SDP
//!
//! ```text
//! max c·x   s.t.  −I ⪯ Σ_k x_k H_k ⪯ I,   H_k = i[D, G_k ⊗ I_s],  c_k = Tr(Δ G_k)
//! ```
//!
//! with the identity generator dropped. The dual certificate is a Hermitian
//! `W` with `Re Tr(H_k W) = c_k` for every generator; then
//! `Tr(Δa) = Re Tr(H(x) W) ≤ ‖W‖₁` for every feasible `a`, so `‖W‖₁` is an
//! upper bound. The lower bound is `Tr(Δa)` for the solver's `a`, rescaled if
//! its commutator norm, recomputed independently, exceeds one.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::TruncatedTriple;
use crate::linalg::{self, CMatrix, Hermitian};
use crate::sdp::{self, BlockSdp, SdpOptions, SdpStatus, SymSparse};
use crate::sparse::SparseMatrix;
use crate::state::{self, State};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Kernel directions with `|Tr(Δa)|` above this (unit coefficient norm) make
/// the distance infinite.
pub const INFINITE_THRESHOLD: f64 = 1e-10;
/// Pivots of the constraint Gram matrix below this fraction of its largest
/// diagonal entry are treated as zero (relative singular value ~1e-7).
pub const KERNEL_PIVOT_RELATIVE: f64 = 1e-14;
/// A density difference whose imaginary (real) part is below this fraction of
/// its largest entry counts as real (imaginary).
const PHASE_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct DistanceOptions {
    /// Target for `dual − primal`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }
}

impl DistanceOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceStatus {
    Finite,
    Infinite,
    GapNotClosed,
}

impl DistanceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DistanceStatus::Finite => "finite",
            DistanceStatus::Infinite => "infinite",
            DistanceStatus::GapNotClosed => "gap-not-closed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub status: DistanceStatus,
    /// `Tr(Δa)` for the returned feasible optimizer; `+∞` when infinite.
    pub primal: f64,
    /// `‖W‖₁` for the dual certificate `W`; `+∞` when infinite.
    pub dual: f64,
    /// Feasible `a` for finite results; for infinite ones a kernel element
    /// with `[D, a] = 0` and `Tr(Δa) = 1`.
    pub optimizer: Hermitian,
    /// `‖[D, a ⊗ I_s]‖` of the optimizer, recomputed densely.
    pub optimizer_lipschitz: f64,
    /// `max_k |Re Tr(H_k W) − c_k|` of the certificate.
    pub certificate_residual: f64,
    pub iterations: usize,
}

impl DistanceResult {
    pub fn gap(&self) -> f64 {
        if self.status == DistanceStatus::Infinite {
            0.0
        } else {
            self.dual - self.primal
        }
    }

    /// Reported distance: the certified lower bound.
    pub fn value(&self) -> f64 {
        self.primal
    }

    pub fn is_infinite(&self) -> bool {
        self.status == DistanceStatus::Infinite
    }
}

/// Generators whose constraint matrices can be handled separately: for a real
/// Dirac operator, real and imaginary generators give Hilbert-Schmidt
/// orthogonal constraint matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Real,
    Imaginary,
    Mixed,
}

/// Pivoted Cholesky factorization of a Gram matrix restricted to a group of
/// generators.
#[derive(Clone, Debug)]
struct GramGroup {
    /// Generator indices of the group.
    members: Vec<usize>,
    /// Positions (into `members`) of the pivots, in pivot order.
    pivots: Vec<usize>,
    /// Positions of the dependent generators.
    dependents: Vec<usize>,
    /// Cholesky columns: `l[(i, j)]` for member position `i`, pivot `j`.
    l: DMatrix<f64>,
}

impl GramGroup {
    fn factor(members: Vec<usize>, h: &[SparseMatrix]) -> Self {
        let m = members.len();
        let mut gram = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = h[members[i]].trace_product(&h[members[j]]).re;
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let mut diag: Vec<f64> = (0..m).map(|i| gram[(i, i)]).collect();
        let max_diag = diag.iter().fold(0.0_f64, |a, &b| a.max(b));
        let threshold = KERNEL_PIVOT_RELATIVE * max_diag;
        let mut l = DMatrix::zeros(m, m);
        let mut used = vec![false; m];
        let mut pivots = Vec::new();
        for j in 0..m {
            let mut best = None;
            for i in 0..m {
                if !used[i] && best.is_none_or(|b: usize| diag[i] > diag[b]) {
                    best = Some(i);
                }
            }
            let p = match best {
                Some(p) if diag[p] > threshold && max_diag > 0.0 => p,
                _ => break,
            };
            used[p] = true;
            pivots.push(p);
            let root = diag[p].sqrt();
            for i in 0..m {
                if used[i] && i != p {
                    continue;
                }
                let mut v = gram[(i, p)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(p, k)];
                }
                l[(i, j)] = if i == p { root } else { v / root };
            }
            for i in 0..m {
                if !used[i] {
                    diag[i] -= l[(i, j)] * l[(i, j)];
                }
            }
        }
        let rank = pivots.len();
        let dependents = (0..m).filter(|&i| !used[i]).collect();
        Self { members, pivots, dependents, l: l.columns(0, rank).into_owned() }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// `L_P⁻¹ v_P` by forward substitution in pivot order.
    fn forward(&self, v: &[f64]) -> Vec<f64> {
        let r = self.rank();
        let mut u = vec![0.0; r];
        for j in 0..r {
            let row = self.pivots[j];
            let mut s = v[j];
            for k in 0..j {
                s -= self.l[(row, k)] * u[k];
            }
            u[j] = s / self.l[(row, j)];
        }
        u
    }

    /// `L_P⁻ᵀ u` by back substitution.
    fn backward(&self, u: &[f64]) -> Vec<f64> {
        let r = self.rank();
        let mut w = vec![0.0; r];
        for j in (0..r).rev() {
            let mut s = u[j];
            for k in (j + 1)..r {
                s -= self.l[(self.pivots[k], j)] * w[k];
            }
            w[j] = s / self.l[(self.pivots[j], j)];
        }
        w
    }

    /// Kernel directions `z_k = e_k − Σ_P t_kp e_p` for the dependent
    /// generators, as (generator index, coefficient) lists of unit norm.
    fn kernel_vectors(&self) -> Vec<Vec<(usize, f64)>> {
        self.dependents
            .iter()
            .map(|&d| {
                let row: Vec<f64> = (0..self.rank()).map(|k| self.l[(d, k)]).collect();
                let t = self.backward(&row);
                let mut z: Vec<(usize, f64)> = vec![(self.members[d], 1.0)];
                for (j, &p) in self.pivots.iter().enumerate() {
                    z.push((self.members[p], -t[j]));
                }
                let norm = z.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
                z.into_iter().map(|(k, v)| (k, v / norm)).collect()
            })
            .collect()
    }
}

/// Precomputed constraint data for one triple, reusable across state pairs.
#[derive(Clone, Debug)]
pub struct DistanceEngine {
    triple: TruncatedTriple,
    /// `i[D, G_k ⊗ I_s]` for every generator (entry 0 is zero).
    h: Vec<SparseMatrix>,
    phases: Vec<Phase>,
    real_dirac: bool,
    groups: Vec<GramGroup>,
}

impl DistanceEngine {
    pub fn new(triple: &TruncatedTriple) -> Self {
        let h = triple.constraint_matrices();
        let phases: Vec<Phase> = triple
            .generators()
            .iter()
            .map(|g| {
                if g.is_real() {
                    Phase::Real
                } else if g.is_imaginary() {
                    Phase::Imaginary
                } else {
                    Phase::Mixed
                }
            })
            .collect();
        let real_dirac = triple.dirac_sparse().is_real();
        let non_identity: Vec<usize> = (1..h.len()).collect();
        let split = real_dirac && phases[1..].iter().all(|&p| p != Phase::Mixed);
        let groups = if split {
            [Phase::Real, Phase::Imaginary]
                .iter()
                .map(|&ph| non_identity.iter().copied().filter(|&k| phases[k] == ph).collect::<Vec<_>>())
                .filter(|members| !members.is_empty())
                .map(|members| GramGroup::factor(members, &h))
                .collect()
        } else {
            vec![GramGroup::factor(non_identity, &h)]
        };
        Self { triple: triple.clone(), h, phases, real_dirac, groups }
    }

    pub fn triple(&self) -> &TruncatedTriple {
        &self.triple
    }

    /// Rank of the constraint map on the non-identity generators.
    pub fn constraint_rank(&self) -> usize {
        self.groups.iter().map(GramGroup::rank).sum()
    }

    /// True iff the kernel of `a ↦ [D, a ⊗ I_s]` on the algebra is spanned by
    /// the identity.
    pub fn is_lipschitz(&self) -> bool {
        self.constraint_rank() == self.triple.num_generators() - 1
    }

    /// Dimension of the kernel of `a ↦ [D, a ⊗ I_s]`, identity included.
    pub fn kernel_dimension(&self) -> usize {
        self.triple.num_generators() - self.constraint_rank()
    }

    fn objective(&self, delta: &Hermitian) -> Vec<f64> {
        self.triple
            .generators()
            .iter()
            .map(|g| g.trace_with_dense(delta.matrix()).re)
            .collect()
    }

    /// Kernel element with `Tr(Δa) = 1`, if one exists.
    fn infinite_witness(&self, c: &[f64]) -> Option<Vec<(usize, f64)>> {
        for group in &self.groups {
            for z in group.kernel_vectors() {
                let value: f64 = z.iter().map(|&(k, v)| v * c[k]).sum();
                if value.abs() > INFINITE_THRESHOLD {
                    return Some(z.into_iter().map(|(k, v)| (k, v / value)).collect());
                }
            }
        }
        None
    }

    pub fn detect_infinite(&self, delta: &Hermitian) -> Result<bool> {
        linalg::check_dims(self.triple.hilbert_dim, delta.dim())?;
        Ok(self.infinite_witness(&self.objective(delta)).is_some())
    }

    fn check_states(&self, s1: &State, s2: &State) -> Result<()> {
        if s1.geometry() != &self.triple.params || s2.geometry() != &self.triple.params {
            return Err(Error::GeometryMismatch);
        }
        Ok(())
    }

    pub fn distance(&self, s1: &State, s2: &State, opts: &DistanceOptions) -> Result<DistanceResult> {
        self.check_states(s1, s2)?;
        let delta = s1.rho().sub(s2.rho())?;
        self.distance_delta(&delta, opts)
    }

    /// Distance for a traceless Hermitian `Δ = ρ₁ − ρ₂`.
    pub fn distance_delta(&self, delta: &Hermitian, opts: &DistanceOptions) -> Result<DistanceResult> {
        linalg::check_dims(self.triple.hilbert_dim, delta.dim())?;
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", opts.tol)));
        }
        if delta.trace().abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("Δ has trace {:.3e}", delta.trace())));
        }
        let c = self.objective(delta);
        if let Some(witness) = self.infinite_witness(&c) {
            let mut coeffs = vec![0.0; self.triple.num_generators()];
            for (k, v) in witness {
                coeffs[k] = v;
            }
            let optimizer = self.triple.element(&coeffs)?;
            let lip = self.triple.lipschitz_norm(&optimizer)?;
            return Ok(DistanceResult {
                status: DistanceStatus::Infinite,
                primal: f64::INFINITY,
                dual: f64::INFINITY,
                optimizer,
                optimizer_lipschitz: lip,
                certificate_residual: 0.0,
                iterations: 0,
            });
        }

        let kept = self.kept_generators(delta);
        let mut sdp_opts = SdpOptions { gap_tol: 0.25 * opts.tol, feas_tol: 0.01 * opts.tol, max_iter: opts.max_iter };
        let mut best: Option<DistanceResult> = None;
        for _ in 0..3 {
            let result = self.solve_once(delta, &c, &kept, &sdp_opts)?;
            let done = result.0.status == DistanceStatus::Finite || result.1 != SdpStatus::Converged;
            let better = best.as_ref().is_none_or(|b| result.0.gap() < b.gap());
            if better {
                best = Some(result.0);
            }
            if done {
                break;
            }
            sdp_opts.gap_tol *= 0.01;
            sdp_opts.feas_tol *= 0.01;
        }
        Ok(best.expect("at least one solve"))
    }

    /// Independent generators entering the SDP. When `D` is real and `Δ` is
    /// real (imaginary), an optimal `a` can be taken real (imaginary), so only
    /// generators of that phase are kept.
    fn kept_generators(&self, delta: &Hermitian) -> (Vec<usize>, Option<Phase>) {
        let m = delta.matrix();
        let scale = linalg::max_abs(m);
        let max_im = m.iter().fold(0.0_f64, |a, z| a.max(z.im.abs()));
        let max_re = m.iter().fold(0.0_f64, |a, z| a.max(z.re.abs()));
        let reducible = self.real_dirac && self.phases[1..].iter().all(|&p| p != Phase::Mixed);
        let phase = if !reducible || scale == 0.0 {
            None
        } else if max_im <= PHASE_TOL * scale {
            Some(Phase::Real)
        } else if max_re <= PHASE_TOL * scale {
            Some(Phase::Imaginary)
        } else {
            None
        };
        let mut kept: Vec<usize> = self
            .groups
            .iter()
            .flat_map(|g| g.pivots.iter().map(move |&p| g.members[p]))
            .filter(|&k| phase.is_none_or(|ph| self.phases[k] == ph))
            .collect();
        kept.sort_unstable();
        (kept, phase)
    }

    fn solve_once(
        &self,
        delta: &Hermitian,
        c: &[f64],
        kept: &(Vec<usize>, Option<Phase>),
        sdp_opts: &SdpOptions,
    ) -> Result<(DistanceResult, SdpStatus)> {
        let (indices, phase) = kept;
        let n = self.triple.full_dim();
        let real = indices.iter().all(|&k| self.h[k].is_real());
        let dim = if real { n } else { 2 * n };
        let constraints: Vec<SymSparse> = indices.iter().map(|&k| embed(&self.h[k], n, real)).collect();
        let grading = self.find_grading(&constraints, n, real);
        let signs = if grading.is_some() { vec![1.0] } else { vec![1.0, -1.0] };
        let problem = BlockSdp {
            dim,
            signs,
            constraints,
            c: indices.iter().map(|&k| c[k]).collect(),
        };
        let solution = sdp::solve(&problem, sdp_opts)?;

        // dual certificate in solver coordinates
        let w_solver = match &grading {
            Some(gamma) => {
                let x = &solution.x[0];
                let flipped = DMatrix::from_fn(dim, dim, |i, j| gamma[i] * gamma[j] * x[(i, j)]);
                (x - flipped).scale(0.5)
            }
            None => &solution.x[0] - &solution.x[1],
        };
        let mut w = unembed(&w_solver, n, real);
        match phase {
            Some(Phase::Real) => w = w.map(|z| Complex64::new(0.0, z.im)),
            Some(Phase::Imaginary) => w = w.map(|z| Complex64::new(z.re, 0.0)),
            _ => {}
        }
        let residual = self.repair(&mut w, c);
        let w = Hermitian::from_matrix_unchecked(w);
        let dual = w.trace_norm();

        // primal: rebuild a and recheck its seminorm densely
        let mut coeffs = vec![0.0; self.triple.num_generators()];
        for (&k, &yk) in indices.iter().zip(&solution.y) {
            coeffs[k] = yk;
        }
        let mut optimizer = self.triple.element(&coeffs)?;
        let mut lip = self.triple.lipschitz_norm(&optimizer)?;
        if lip > 1.0 {
            optimizer = optimizer.scale(1.0 / lip);
            lip = self.triple.lipschitz_norm(&optimizer)?;
        }
        let primal = delta.trace_product(&optimizer);
        let gap = dual - primal;
        let status = if gap <= self_tol(sdp_opts) {
            DistanceStatus::Finite
        } else {
            DistanceStatus::GapNotClosed
        };
        log::debug!(
            "{}: primal {primal:.12} dual {dual:.12} gap {gap:.3e} residual {residual:.3e} iterations {} ({:?})",
            self.triple.name,
            solution.iterations,
            solution.status
        );
        Ok((
            DistanceResult {
                status,
                primal,
                dual,
                optimizer,
                optimizer_lipschitz: lip,
                certificate_residual: residual,
                iterations: solution.iterations,
            },
            solution.status,
        ))
    }

    /// Makes `Re Tr(H_k W) = c_k` hold for all generators by adding a least
    /// change in the span of the constraint matrices; returns the remaining
    /// largest residual.
    fn repair(&self, w: &mut CMatrix, c: &[f64]) -> f64 {
        for group in &self.groups {
            let r: Vec<f64> = group
                .pivots
                .iter()
                .map(|&p| {
                    let k = group.members[p];
                    self.h[k].trace_with_dense(w).re - c[k]
                })
                .collect();
            // G_PP w = r with G_PP = L_P L_Pᵀ
            let u = group.forward(&r);
            let coeffs = group.backward(&u);
            for (j, &p) in group.pivots.iter().enumerate() {
                for &(row, col, v) in self.h[group.members[p]].entries() {
                    w[(row, col)] -= v * coeffs[j];
                }
            }
        }
        (1..self.h.len())
            .map(|k| (self.h[k].trace_with_dense(w).re - c[k]).abs())
            .fold(0.0, f64::max)
    }

    /// Diagonal ±1 grading `Γ` with `Γ A_k Γ = −A_k` for every constraint,
    /// which makes the spectrum of `Σ y_k A_k` symmetric so that one block
    /// of the norm constraint suffices.
    fn find_grading(&self, constraints: &[SymSparse], n: usize, real: bool) -> Option<Vec<f64>> {
        let dim = if real { n } else { 2 * n };
        let half = self.triple.hilbert_dim;
        let chiral = |i: usize| if (i % n) < half { 1.0 } else { -1.0 };
        let conj = |i: usize| if i < n { 1.0 } else { -1.0 };
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if self.triple.spin_dim == 2 {
            candidates.push((0..dim).map(chiral).collect());
        }
        if !real {
            candidates.push((0..dim).map(conj).collect());
            if self.triple.spin_dim == 2 {
                candidates.push((0..dim).map(|i| chiral(i) * conj(i)).collect());
            }
        }
        candidates.into_iter().find(|gamma| {
            constraints
                .iter()
                .all(|a| a.entries().iter().all(|&(r, c, _)| gamma[r] != gamma[c]))
        })
    }

    /// Distance between compressed states lifted into this engine's (larger)
    /// triple through the range of `p`.
    pub fn distance_flat(&self, p: &Hermitian, s1: &State, s2: &State, opts: &DistanceOptions) -> Result<DistanceResult> {
        let v = linalg::range_basis(p)?;
        let l1 = state::lift_state(s1, &v, &self.triple)?;
        let l2 = state::lift_state(s2, &v, &self.triple)?;
        self.distance(&l1, &l2, opts)
    }
}

fn self_tol(opts: &SdpOptions) -> f64 {
    4.0 * opts.gap_tol
}

/// Real symmetric form of a Hermitian matrix: itself when real, otherwise
/// `[[Re, −Im], [Im, Re]]`.
fn embed(h: &SparseMatrix, n: usize, real: bool) -> SymSparse {
    if real {
        return SymSparse::new(n, h.entries().iter().map(|&(r, c, v)| (r, c, v.re)));
    }
    let mut triplets = Vec::with_capacity(4 * h.nnz());
    for &(r, c, v) in h.entries() {
        if v.re != 0.0 {
            triplets.push((r, c, v.re));
            triplets.push((n + r, n + c, v.re));
        }
        if v.im != 0.0 {
            triplets.push((r, n + c, -v.im));
            triplets.push((n + r, c, v.im));
        }
    }
    SymSparse::new(2 * n, triplets)
}

/// Inverse of [`embed`] on certificates: `Re Tr(H W) = Tr(embed(H) X)` for
/// `W = (P + S) + i(Qᵀ − Q)` where `X = [[P, Q], [Qᵀ, S]]`.
fn unembed(x: &DMatrix<f64>, n: usize, real: bool) -> CMatrix {
    if real {
        return x.map(|v| Complex64::new(v, 0.0));
    }
    CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(x[(i, j)] + x[(n + i, n + j)], x[(n + i, j)] - x[(i, n + j)])
    })
}

/// One-shot distance between two states of a triple.
pub fn distance(triple: &TruncatedTriple, s1: &State, s2: &State, opts: &DistanceOptions) -> Result<DistanceResult> {
    DistanceEngine::new(triple).distance(s1, s2, opts)
}

pub fn detect_infinite(triple: &TruncatedTriple, delta: &Hermitian) -> Result<bool> {
    DistanceEngine::new(triple).detect_infinite(delta)
}

pub fn lipschitz_check(triple: &TruncatedTriple) -> bool {
    DistanceEngine::new(triple).is_lipschitz()
}

/// Distance between states of a compressed triple, lifted into an ambient
/// triple through the range of the projection `p`.
pub fn distance_flat(
    ambient: &TruncatedTriple,
    p: &Hermitian,
    s1: &State,
    s2: &State,
    opts: &DistanceOptions,
) -> Result<DistanceResult> {
    DistanceEngine::new(ambient).distance_flat(p, s1, s2, opts)
}

/// Hausdorff distance read off a matrix of pairwise distances between a set
/// `A` (rows) and a set `B` (columns); infinite entries propagate.
pub fn hausdorff_from_matrix(d: &DMatrix<f64>) -> Result<f64> {
    if d.nrows() == 0 || d.ncols() == 0 {
        return Err(Error::InvalidInput("Hausdorff distance needs nonempty sets".into()));
    }
    let a_to_b = d.row_iter().map(|row| row.iter().fold(f64::INFINITY, |m, &v| m.min(v))).fold(0.0, f64::max);
    let b_to_a = d.column_iter().map(|col| col.iter().fold(f64::INFINITY, |m, &v| m.min(v))).fold(0.0, f64::max);
    Ok(a_to_b.max(b_to_a))
}

/// Pairwise distance matrix between two state sets on one engine.
pub fn distance_matrix(engine: &DistanceEngine, a: &[State], b: &[State], opts: &DistanceOptions) -> Result<DMatrix<f64>> {
    let mut d = DMatrix::zeros(a.len(), b.len());
    for (i, sa) in a.iter().enumerate() {
        for (j, sb) in b.iter().enumerate() {
            d[(i, j)] = if sa == sb {
                0.0
            } else {
                let r = engine.distance(sa, sb, opts)?;
                if r.is_infinite() {
                    f64::INFINITY
                } else {
                    r.value()
                }
            };
        }
    }
    Ok(d)
}

pub fn hausdorff(engine: &DistanceEngine, a: &[State], b: &[State], opts: &DistanceOptions) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("Hausdorff distance needs nonempty sets".into()));
    }
    hausdorff_from_matrix(&distance_matrix(engine, a, b, opts)?)
}

/// Uniform angle grid `2πi/s`, `i = 0..s`.
pub fn uniform_angles(samples: usize) -> Vec<f64> {
    (0..samples).map(|i| 2.0 * std::f64::consts::PI * i as f64 / samples as f64).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Distances `g(t) = d(Ψ_{0,N_a}, Ψ_{t,N_b})` on circle(K), `K = max(N_a, N_b)`,
/// for `t` on the uniform grid of `steps` angles. Rotations are isometries,
/// so these determine every distance between the two uniform Fejér grids.
fn circle_offsets(n_a: usize, n_b: usize, steps: usize, opts: &DistanceOptions) -> Result<(Vec<f64>, Vec<DistanceResult>)> {
    let ambient = crate::geometry::build_circle(n_a.max(n_b))?;
    let engine = DistanceEngine::new(&ambient);
    let origin = state::fejer_state_on(&ambient, n_a, 0.0)?;
    let mut values = Vec::with_capacity(steps);
    let mut results = Vec::with_capacity(steps);
    for t in uniform_angles(steps) {
        let r = engine.distance(&origin, &state::fejer_state_on(&ambient, n_b, t)?, opts)?;
        values.push(if r.is_infinite() { f64::INFINITY } else { r.value() });
        results.push(r);
    }
    Ok((values, results))
}

/// Hausdorff distance between the uniform Fejér grids `{Ψ_{x,N_a}}` (`s_a`
/// angles) and `{Ψ_{x,N_b}}` (`s_b` angles), both placed on circle(max N).
/// Uses rotation invariance: entry `(i, j)` of the distance matrix is
/// `g(x_j − x_i)`, so only `lcm(s_a, s_b)` distances are solved.
pub fn circle_grid_hausdorff(
    n_a: usize,
    s_a: usize,
    n_b: usize,
    s_b: usize,
    opts: &DistanceOptions,
) -> Result<(f64, Vec<DistanceResult>)> {
    if s_a == 0 || s_b == 0 {
        return Err(Error::InvalidInput("Hausdorff distance needs nonempty sets".into()));
    }
    let steps = s_a / gcd(s_a, s_b) * s_b;
    let (g, results) = circle_offsets(n_a, n_b, steps, opts)?;
    let (ra, rb) = (steps / s_a, steps / s_b);
    let d = DMatrix::from_fn(s_a, s_b, |i, j| g[(j * rb + steps - i * ra) % steps]);
    Ok((hausdorff_from_matrix(&d)?, results))
}

/// Largest deviation `max |d(Ψ_{x_i,N}, Ψ_{x_j,N}) − d_geo(x_i, x_j)|` over a
/// uniform grid of `samples` angles.
pub fn circle_grid_distortion(n: usize, samples: usize, opts: &DistanceOptions) -> Result<(f64, Vec<DistanceResult>)> {
    let (g, results) = circle_offsets(n, n, samples, opts)?;
    let worst = uniform_angles(samples)
        .iter()
        .zip(&g)
        .map(|(&t, &d)| (d - crate::oracles::geodesic_circle(0.0, t)).abs())
        .fold(0.0, f64::max);
    Ok((worst, results))
}
