//! Primal-dual interior-point method for block-diagonal real symmetric SDPs
//! of the form
//!
//! ```text
//! (P)  min  Σ_b Tr X_b        s.t.  Σ_b s_b ⟨A_k, X_b⟩ = c_k,  X_b ⪰ 0
//! (D)  max  c·y               s.t.  Z_b = I − s_b Σ_k y_k A_k ⪰ 0
//! ```
//!
//! where every block shares the constraint matrices `A_k` up to the sign
//! `s_b = ±1`. The dual iterate starts at `y = 0` and stays exactly feasible;
//! `Z` is always recomputed from `y`. Search directions are HKM with a
//! Mehrotra predictor-corrector.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Real symmetric sparse matrix with both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymSparse {
    dim: usize,
    /// (row, col, value) sorted by (row, col).
    entries: Vec<(usize, usize, f64)>,
    /// Distinct rows with their (col, value) lists.
    rows: Vec<(usize, Vec<(usize, f64)>)>,
}

impl SymSparse {
    /// Builds from entries of a symmetric matrix; asymmetric input is
    /// symmetrized.
    pub fn new(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc = std::collections::BTreeMap::new();
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim);
            *acc.entry((r, c)).or_insert(0.0) += 0.5 * v;
            *acc.entry((c, r)).or_insert(0.0) += 0.5 * v;
        }
        let entries: Vec<(usize, usize, f64)> =
            acc.into_iter().filter(|(_, v)| *v != 0.0).map(|((r, c), v)| (r, c, v)).collect();
        let mut rows: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for &(r, c, v) in &entries {
            match rows.last_mut() {
                Some((row, list)) if *row == r => list.push((c, v)),
                _ => rows.push((r, vec![(c, v)])),
            }
        }
        Self { dim, entries, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `Tr(A G)` for a dense (not necessarily symmetric) `G`.
    pub fn inner(&self, g: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(r, c, v)| v * g[(c, r)]).sum()
    }

    pub fn add_scaled_to(&self, s: f64, out: &mut DMatrix<f64>) {
        for &(r, c, v) in &self.entries {
            out[(r, c)] += s * v;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.add_scaled_to(1.0, &mut m);
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct BlockSdp {
    pub dim: usize,
    pub signs: Vec<f64>,
    pub constraints: Vec<SymSparse>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    /// Stop once `Tr X − c·y` is below this.
    pub gap_tol: f64,
    /// Stop once `‖c − A(X)‖_∞` is below this.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-9, feas_tol: 1e-10, max_iter: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Converged,
    IterationLimit,
    Stalled,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub y: Vec<f64>,
    pub x: Vec<DMatrix<f64>>,
    /// `Σ Tr X_b`.
    pub primal_objective: f64,
    /// `c·y`.
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub iterations: usize,
}

/// Step-to-boundary fraction.
const STEP_FRACTION: f64 = 0.95;

struct Workspace<'a> {
    sdp: &'a BlockSdp,
}

impl<'a> Workspace<'a> {
    fn nblocks(&self) -> usize {
        self.sdp.signs.len()
    }

    /// `Σ_k y_k A_k`.
    fn combine(&self, y: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.sdp.dim, self.sdp.dim);
        for (a, &yk) in self.sdp.constraints.iter().zip(y) {
            if yk != 0.0 {
                a.add_scaled_to(yk, &mut out);
            }
        }
        out
    }

    fn slacks(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let ay = self.combine(y);
        self.sdp
            .signs
            .iter()
            .map(|&s| {
                let mut z = ay.scale(-s);
                for i in 0..self.sdp.dim {
                    z[(i, i)] += 1.0;
                }
                z
            })
            .collect()
    }

    /// `A(G)_k = Σ_b s_b Tr(A_k G_b)`.
    fn apply(&self, g: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.sdp.constraints.len(),
            self.sdp.constraints.iter().map(|a| {
                self.sdp.signs.iter().zip(g).map(|(&s, gb)| s * a.inner(gb)).sum::<f64>()
            }),
        )
    }

    /// Schur complement `M_ij = Σ_b Tr(A_i X_b A_j Z_b⁻¹)`.
    fn schur(&self, x: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.sdp.constraints.len();
        let n = self.sdp.dim;
        let mut schur = DMatrix::zeros(m, m);
        for (j, aj) in self.sdp.constraints.iter().enumerate() {
            let cols: Vec<usize> = aj.rows.iter().map(|(r, _)| *r).collect();
            for b in 0..self.nblocks() {
                // X A_j Z⁻¹ = X[:, P] · R with R[p, :] = Σ_q A_j[p, q] Z⁻¹[q, :]
                // Z⁻¹ is symmetric, so Rᵀ is built from its columns
                let mut rt = DMatrix::zeros(n, cols.len());
                for (idx, (_, list)) in aj.rows.iter().enumerate() {
                    let mut col = rt.column_mut(idx);
                    for &(q, v) in list {
                        col.axpy(v, &zinv[b].column(q), 1.0);
                    }
                }
                let xcols = x[b].select_columns(cols.iter());
                let t = xcols * rt.transpose();
                for (i, ai) in self.sdp.constraints.iter().enumerate() {
                    schur[(i, j)] += ai.inner(&t);
                }
            }
        }
        symmetrize(&schur)
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()).scale(0.5)
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(m.clone()).map(|c| symmetrize(&c.inverse()))
}

/// Largest `α ≤ cap` with `M + α Δ ⪰ 0`, for `M ≻ 0`.
fn max_step(m: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let chol = match Cholesky::new(m.clone()) {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    // S = L⁻¹ Δ L⁻ᵀ
    let left = match l.solve_lower_triangular(delta) {
        Some(v) => v,
        None => return 0.0,
    };
    let s = match l.solve_lower_triangular(&left.transpose()) {
        Some(v) => v,
        None => return 0.0,
    };
    let s = symmetrize(&s);
    let min = s.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn frobenius_inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn solve_regularized(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok(ch.solve(rhs));
    }
    let scale = (0..m.nrows()).fold(0.0_f64, |a, i| a.max(m[(i, i)].abs())).max(f64::MIN_POSITIVE);
    let mut shift = 1e-14 * scale;
    for _ in 0..12 {
        let mut reg = m.clone();
        for i in 0..reg.nrows() {
            reg[(i, i)] += shift;
        }
        if let Some(ch) = Cholesky::new(reg) {
            return Ok(ch.solve(rhs));
        }
        shift *= 10.0;
    }
    Err(Error::Numerical("Schur complement is not positive definite".into()))
}

/// Iterations without halving the merit before the loop gives up.
const STALL_WINDOW: usize = 8;

struct Best {
    merit: f64,
    y: Vec<f64>,
    x: Vec<DMatrix<f64>>,
    iteration: usize,
}

/// Solves the block SDP. Returns the converged iterate, or else the best one
/// seen, with a status explaining why the loop stopped.
pub fn solve(sdp: &BlockSdp, opts: &SdpOptions) -> Result<SdpSolution> {
    let m = sdp.constraints.len();
    if sdp.c.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: sdp.c.len() });
    }
    if sdp.signs.is_empty() || sdp.dim == 0 {
        return Err(Error::InvalidInput("SDP needs at least one nonempty block".into()));
    }
    let ws = Workspace { sdp };
    let nb = sdp.signs.len();
    let n_total = (sdp.dim * nb) as f64;
    let c = DVector::from_column_slice(&sdp.c);

    let mut y = vec![0.0; m];
    if m == 0 {
        return Ok(SdpSolution {
            status: SdpStatus::Converged,
            y,
            x: vec![DMatrix::zeros(sdp.dim, sdp.dim); nb],
            primal_objective: 0.0,
            dual_objective: 0.0,
            primal_infeasibility: 0.0,
            iterations: 0,
        });
    }
    let scale = sdp
        .constraints
        .iter()
        .zip(&sdp.c)
        .map(|(a, ck)| (1.0 + ck.abs()) / (1.0 + a.frobenius()))
        .fold(0.0_f64, f64::max);
    let lambda = (10.0 * scale).max(1.0);
    let mut x: Vec<DMatrix<f64>> = (0..nb).map(|_| DMatrix::identity(sdp.dim, sdp.dim).scale(lambda)).collect();
    let mut z = ws.slacks(&y);

    let mut status = SdpStatus::IterationLimit;
    let mut iterations = 0;
    let mut stalled_steps = 0;
    let mut best: Option<Best> = None;
    let mut last_progress = 0;
    for iter in 0..opts.max_iter {
        iterations = iter;
        let zinv: Vec<DMatrix<f64>> = match z.iter().map(inverse_spd).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => {
                status = SdpStatus::Stalled;
                break;
            }
        };
        let mu = frobenius_inner(&x, &z) / n_total;
        let residual = &c - ws.apply(&x);
        let infeas = residual.amax();
        let primal_obj: f64 = x.iter().map(|b| b.trace()).sum();
        let dual_obj = c.dot(&DVector::from_column_slice(&y));
        let gap = primal_obj - dual_obj;
        log::trace!("iter {iter}: primal {primal_obj:.12e} dual {dual_obj:.12e} gap {gap:.3e} infeas {infeas:.3e} mu {mu:.3e}");
        if gap.abs() <= opts.gap_tol && infeas <= opts.feas_tol {
            status = SdpStatus::Converged;
            break;
        }
        // near the boundary the Schur complement loses accuracy and the
        // residuals can drift upward; keep the best iterate seen
        let merit = (gap.abs() / opts.gap_tol).max(infeas / opts.feas_tol);
        if best.as_ref().is_none_or(|b| merit < b.merit) {
            if best.as_ref().is_none_or(|b| merit < 0.5 * b.merit) {
                last_progress = iter;
            }
            best = Some(Best { merit, y: y.clone(), x: x.clone(), iteration: iter });
        } else if iter >= last_progress + STALL_WINDOW {
            status = SdpStatus::Stalled;
            break;
        }

        let schur = ws.schur(&x, &zinv);
        let direction = |rhs: &DVector<f64>, target: f64, second: Option<&[DMatrix<f64>]>| -> Result<(Vec<f64>, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>)> {
            let dy = solve_regularized(&schur, rhs)?;
            let ady = ws.combine(dy.as_slice());
            let mut dz = Vec::with_capacity(nb);
            let mut dx = Vec::with_capacity(nb);
            for b in 0..nb {
                let dzb = ady.scale(-sdp.signs[b]);
                let mut dxb = zinv[b].scale(target) - &x[b] - &x[b] * &dzb * &zinv[b];
                if let Some(corr) = second {
                    dxb -= &corr[b];
                }
                dx.push(symmetrize(&dxb));
                dz.push(dzb);
            }
            Ok((dy.as_slice().to_vec(), dx, dz))
        };

        // predictor
        let (_, dx_a, dz_a) = direction(&c, 0.0, None)?;
        let alpha_p = (0..nb).map(|b| max_step(&x[b], &dx_a[b])).fold(f64::INFINITY, f64::min);
        let alpha_d = (0..nb).map(|b| max_step(&z[b], &dz_a[b])).fold(f64::INFINITY, f64::min);
        let ap = (STEP_FRACTION * alpha_p).min(1.0);
        let ad = (STEP_FRACTION * alpha_d).min(1.0);
        let x_aff: Vec<DMatrix<f64>> = (0..nb).map(|b| &x[b] + dx_a[b].scale(ap)).collect();
        let z_aff: Vec<DMatrix<f64>> = (0..nb).map(|b| &z[b] + dz_a[b].scale(ad)).collect();
        let mu_aff = frobenius_inner(&x_aff, &z_aff) / n_total;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };

        // corrector
        let second: Vec<DMatrix<f64>> = (0..nb).map(|b| &dx_a[b] * &dz_a[b] * &zinv[b]).collect();
        let rhs = &c - ws.apply(&zinv).scale(sigma * mu) + ws.apply(&second);
        let (dy, dx, dz) = direction(&rhs, sigma * mu, Some(&second))?;
        let alpha_p = (0..nb).map(|b| max_step(&x[b], &dx[b])).fold(f64::INFINITY, f64::min);
        let alpha_d = (0..nb).map(|b| max_step(&z[b], &dz[b])).fold(f64::INFINITY, f64::min);
        let ap = (STEP_FRACTION * alpha_p).min(1.0);
        let ad = (STEP_FRACTION * alpha_d).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalled_steps += 1;
            if stalled_steps >= 3 {
                status = SdpStatus::Stalled;
                break;
            }
        } else {
            stalled_steps = 0;
        }
        for b in 0..nb {
            x[b] += dx[b].scale(ap);
        }
        let y_new: Vec<f64> = y.iter().zip(&dy).map(|(a, d)| a + ad * d).collect();
        let z_new = ws.slacks(&y_new);
        if z_new.iter().all(|zb| Cholesky::new(zb.clone()).is_some()) {
            y = y_new;
            z = z_new;
        } else {
            // rounding pushed the recomputed slack out of the cone; keep y
            stalled_steps += 1;
            if stalled_steps >= 3 {
                status = SdpStatus::Stalled;
                break;
            }
        }
        iterations = iter + 1;
    }

    if status != SdpStatus::Converged {
        if let Some(b) = best {
            y = b.y;
            x = b.x;
            iterations = b.iteration;
        }
    }
    let residual = &c - ws.apply(&x);
    let primal_objective = x.iter().map(|b| b.trace()).sum();
    let dual_objective = c.dot(&DVector::from_column_slice(&y));
    Ok(SdpSolution {
        status,
        y,
        x,
        primal_objective,
        dual_objective,
        primal_infeasibility: residual.amax(),
        iterations,
    })
}
