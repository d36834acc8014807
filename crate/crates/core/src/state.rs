//! States as density matrices on the truncated Hilbert space.
//!
//! The density matrix never carries the spinor factor: the algebra acts
//! diagonally on spinors, so only the Dirac operator sees `spin_dim`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GeometryParams, TruncatedTriple};
use crate::linalg::{self, CMatrix, CVector, Hermitian};

pub const STATE_TOL: f64 = 1e-10;
/// Moments beyond this are reported as infinite.
pub const MOMENT_CAP: f64 = 1e12;
/// Coherent-state truncations discarding more norm than this are flagged.
pub const COHERENT_TAIL_WARN: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    geometry: GeometryParams,
    rho: Hermitian,
}

impl State {
    /// Checks positivity and unit trace against the triple's dimension.
    pub fn new(triple: &TruncatedTriple, rho: Hermitian) -> Result<Self> {
        Self::on(triple.params.clone(), triple.hilbert_dim, rho)
    }

    fn on(geometry: GeometryParams, dim: usize, rho: Hermitian) -> Result<Self> {
        linalg::check_dims(dim, rho.dim())?;
        let trace = rho.trace();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} differs from 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { geometry, rho })
    }

    pub fn geometry(&self) -> &GeometryParams {
        &self.geometry
    }

    pub fn rho(&self) -> &Hermitian {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// `φ(a) = Tr(ρ a)`.
    pub fn evaluate(&self, a: &Hermitian) -> Result<f64> {
        linalg::check_dims(self.dim(), a.dim())?;
        Ok(self.rho.trace_product(a))
    }

    /// The same density matrix viewed on another geometry with the same
    /// Hilbert space, e.g. a circle with its full matrix algebra.
    pub fn retag(&self, triple: &TruncatedTriple) -> Result<Self> {
        Self::on(triple.params.clone(), triple.hilbert_dim, self.rho.clone())
    }

    pub fn is_pure(&self) -> bool {
        let sq = self.rho.matrix() * self.rho.matrix();
        linalg::max_abs(&(sq - self.rho.matrix())) < STATE_TOL
    }
}

/// Trace-norm distance `‖ρ₁ − ρ₂‖₁`, at most 2.
pub fn trace_distance(s1: &State, s2: &State) -> Result<f64> {
    Ok(s1.rho().sub(s2.rho())?.trace_norm())
}

/// Serialized form: geometry descriptor plus dense real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub geometry: GeometryParams,
    pub rho_re: Vec<Vec<f64>>,
    pub rho_im: Vec<Vec<f64>>,
}

impl From<&State> for StateRecord {
    fn from(s: &State) -> Self {
        let m = s.rho.matrix();
        let n = m.nrows();
        Self {
            geometry: s.geometry.clone(),
            rho_re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            rho_im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

impl TryFrom<StateRecord> for State {
    type Error = Error;

    fn try_from(r: StateRecord) -> Result<Self> {
        let n = r.rho_re.len();
        if r.rho_im.len() != n || r.rho_re.iter().chain(&r.rho_im).any(|row| row.len() != n) {
            return Err(Error::InvalidState("density matrix record is not square".into()));
        }
        let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(r.rho_re[i][j], r.rho_im[i][j]));
        let triple = r.geometry.build()?;
        State::new(&triple, Hermitian::new(m)?)
    }
}

impl Serialize for State {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRecord::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let record = StateRecord::deserialize(deserializer)?;
        State::try_from(record).map_err(serde::de::Error::custom)
    }
}

/// `|ψ⟩⟨ψ|` for a unit vector.
pub fn vector_state(triple: &TruncatedTriple, psi: &CVector) -> Result<State> {
    linalg::check_dims(triple.hilbert_dim, psi.len())?;
    let norm = psi.norm();
    if norm == 0.0 {
        return Err(Error::InvalidState("zero vector".into()));
    }
    if (norm - 1.0).abs() > STATE_TOL {
        return Err(Error::InvalidState(format!("vector norm {norm} differs from 1")));
    }
    State::new(triple, Hermitian::outer(psi))
}

/// Basis vector state `|e_i⟩⟨e_i|` by basis index.
pub fn basis_state(triple: &TruncatedTriple, index: usize) -> Result<State> {
    if index >= triple.hilbert_dim {
        return Err(Error::InvalidState(format!("basis index {index} out of range")));
    }
    let mut psi = CVector::zeros(triple.hilbert_dim);
    psi[index] = Complex64::new(1.0, 0.0);
    vector_state(triple, &psi)
}

/// `(N+1)^{-1/2} Σ_{n=0}^{N} e^{−inx} e_n` in the `−N..=N` mode space.
pub fn fejer_vector(n: usize, x: f64) -> CVector {
    let dim = 2 * n + 1;
    let norm = ((n + 1) as f64).sqrt();
    let mut psi = CVector::zeros(dim);
    for k in 0..=n {
        psi[n + k] = Complex64::from_polar(1.0 / norm, -(k as f64) * x);
    }
    psi
}

pub fn fejer_state(triple: &TruncatedTriple, x: f64) -> Result<State> {
    let n = match triple.params {
        GeometryParams::Circle { n, .. } => n,
        _ => return Err(Error::InvalidState("Fejér states live on circle geometries".into())),
    };
    vector_state(triple, &fejer_vector(n, x))
}

/// Fejér state `Ψ_{x,N}` placed on a circle truncation with cutoff `K ≥ N`
/// (modes outside `−N..=N` are empty).
pub fn fejer_state_on(ambient: &TruncatedTriple, n: usize, x: f64) -> Result<State> {
    let k = match ambient.params {
        GeometryParams::Circle { n: k, .. } => k,
        _ => return Err(Error::InvalidState("Fejér states live on circle geometries".into())),
    };
    if n == 0 || n > k {
        return Err(Error::InvalidState(format!("Fejér cutoff {n} must lie in 1..={k}")));
    }
    let inner = fejer_vector(n, x);
    let mut psi = CVector::zeros(2 * k + 1);
    psi.rows_mut(k - n, 2 * n + 1).copy_from(&inner);
    vector_state(ambient, &psi)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentTruncation {
    /// Squared norm of the truncated vector before renormalization.
    pub retained: f64,
    /// `1 − retained`, the discarded probability mass.
    pub tail: f64,
}

/// Truncated Fock coherent vector `e^{−|z|²/2θ} Σ z̄ⁿ/√(θⁿ n!) h_n`,
/// renormalized, with the discarded mass.
pub fn moyal_coherent_vector(theta: f64, n_max: usize, z: Complex64) -> (CVector, CoherentTruncation) {
    let r = z.norm_sqr() / theta;
    let step = z.conj() / theta.sqrt();
    let mut psi = CVector::zeros(n_max + 1);
    psi[0] = Complex64::new((-r / 2.0).exp(), 0.0);
    for n in 1..=n_max {
        psi[n] = psi[n - 1] * step / (n as f64).sqrt();
    }
    let retained = psi.norm_squared();
    let info = CoherentTruncation { retained, tail: (1.0 - retained).max(0.0) };
    (psi.unscale(retained.sqrt()), info)
}

pub fn moyal_coherent(triple: &TruncatedTriple, z: Complex64) -> Result<(State, CoherentTruncation)> {
    let (theta, n_max) = match triple.params {
        GeometryParams::Moyal { theta, n_max } => (theta, n_max),
        _ => return Err(Error::InvalidState("coherent states live on Moyal geometries".into())),
    };
    if z.norm_sqr() / theta > n_max as f64 / 4.0 {
        log::warn!("coherent state |z|²/θ = {:.3} is large for n_max = {n_max}", z.norm_sqr() / theta);
    }
    let (psi, info) = moyal_coherent_vector(theta, n_max, z);
    if info.tail > COHERENT_TAIL_WARN {
        log::warn!("coherent state truncation discards mass {:.3e}", info.tail);
    }
    Ok((vector_state(triple, &psi)?, info))
}

/// `ln C(n, k)` through the log-gamma-free product form.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Bloch coherent vector with components
/// `C(2ℓ, ℓ+m)^{1/2} (sin ϑ/2)^{ℓ+m} (cos ϑ/2)^{ℓ−m} e^{−imφ}`, `m = −ℓ..=ℓ`.
pub fn bloch_vector(two_ell: usize, theta: f64, phi: f64) -> CVector {
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let ell = two_ell as f64 / 2.0;
    CVector::from_fn(two_ell + 1, |i, _| {
        let up = i as i32; // ℓ + m
        let down = (two_ell - i) as i32; // ℓ − m
        let m = i as f64 - ell;
        let magnitude = (0.5 * ln_binomial(two_ell, i)).exp() * s.powi(up) * c.powi(down);
        Complex64::from_polar(magnitude, -m * phi)
    })
}

pub fn bloch_coherent(triple: &TruncatedTriple, theta: f64, phi: f64) -> Result<State> {
    let two_ell = match triple.params {
        GeometryParams::FuzzySphere { two_ell } => two_ell,
        _ => return Err(Error::InvalidState("Bloch states live on fuzzy-sphere geometries".into())),
    };
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidState(format!("polar angle {theta} outside [0, π]")));
    }
    let psi = bloch_vector(two_ell, theta, phi);
    let norm = psi.norm();
    vector_state(triple, &psi.unscale(norm))
}

/// `PRP / Tr(RP)` expressed on the range of `P` and attached to `target`,
/// together with the normalization `Z = Tr(RP)`.
pub fn truncate_state(state: &State, p: &Hermitian, target: &TruncatedTriple) -> Result<(State, f64)> {
    linalg::check_dims(state.dim(), p.dim())?;
    let v = linalg::range_basis(p)?;
    linalg::check_dims(target.hilbert_dim, v.ncols())?;
    let z = state.rho.trace_product(p);
    if z <= 1e-14 {
        return Err(Error::UndefinedTruncation { weight: z });
    }
    let compressed = v.adjoint() * state.rho.matrix() * &v;
    let rho = Hermitian::from_matrix_unchecked(compressed.unscale(z));
    Ok((State::new(target, rho)?, z))
}

/// `V ρ V†` for an isometry `V` from the state's space into `ambient`.
pub fn lift_state(state: &State, v: &CMatrix, ambient: &TruncatedTriple) -> Result<State> {
    linalg::check_dims(state.dim(), v.ncols())?;
    linalg::check_dims(ambient.hilbert_dim, v.nrows())?;
    let rho = Hermitian::from_matrix_unchecked(v * state.rho.matrix() * v.adjoint());
    State::new(ambient, rho)
}

/// Probability weights on consecutive lattice sites starting at `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDistribution {
    pub start: i64,
    pub probs: Vec<f64>,
}

impl LatticeDistribution {
    pub fn new(start: i64, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidState("empty distribution".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidState("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self { start, probs })
    }

    pub fn point(site: i64) -> Self {
        Self { start: site, probs: vec![1.0] }
    }

    /// Weights normalized from nonnegative raw values.
    pub fn normalized(start: i64, raw: &[f64]) -> Result<Self> {
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState("weights sum to zero".into()));
        }
        Self::new(start, raw.iter().map(|w| w / total).collect())
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(k, &p)| (self.start + k as i64, p))
    }

    pub fn end(&self) -> i64 {
        self.start + self.probs.len() as i64 - 1
    }

    /// Diagonal density matrix on a lattice window containing the support.
    pub fn to_state(&self, triple: &TruncatedTriple) -> Result<State> {
        let n_min = match triple.params {
            GeometryParams::Lattice { n_min, .. } | GeometryParams::LatticeVariant { n_min, .. } => n_min,
            _ => return Err(Error::InvalidState("lattice distributions live on lattice windows".into())),
        };
        let mut diag = vec![0.0; triple.hilbert_dim];
        for (site, p) in self.sites() {
            let idx = site - n_min;
            if p != 0.0 {
                if idx < 0 || idx as usize >= triple.hilbert_dim {
                    return Err(Error::InvalidState(format!("site {site} outside the window")));
                }
                diag[idx as usize] = p;
            }
        }
        State::new(triple, Hermitian::from_real_diagonal(&diag))
    }
}

/// Pure state at lattice site `n`.
pub fn lattice_point(triple: &TruncatedTriple, n: i64) -> Result<State> {
    LatticeDistribution::point(n).to_state(triple)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Moment {
    Finite(f64),
    Infinite,
}

/// `Σ_k p_k cost(k, n)`; partial sums above [`MOMENT_CAP`] report infinity.
pub fn moment1<F: Fn(i64, i64) -> f64>(p: &LatticeDistribution, n: i64, cost: F) -> Moment {
    let mut total = 0.0;
    for (site, weight) in p.sites() {
        if weight == 0.0 {
            continue;
        }
        total += weight * cost(site, n);
        if !(total <= MOMENT_CAP) {
            return Moment::Infinite;
        }
    }
    Moment::Finite(total)
}

pub fn lattice_cost(k: i64, n: i64) -> f64 {
    (k - n).abs() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_circle, build_fuzzy_sphere, build_lattice, build_moyal};
    use crate::linalg::max_abs;
    use crate::random::{random_unit_vector, rng};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn vector_states_on_lattice() {
        let t = build_lattice(0, 3).unwrap();
        let e0 = Hermitian::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]);
        let delta0 = basis_state(&t, 0).unwrap();
        assert_eq!(delta0.evaluate(&e0).unwrap(), 1.0);
        let mut psi = CVector::zeros(4);
        psi[0] = c(0.5_f64.sqrt());
        psi[1] = c(0.5_f64.sqrt());
        let half = vector_state(&t, &psi).unwrap();
        assert!((half.evaluate(&e0).unwrap() - 0.5).abs() < 1e-15);
        assert!(vector_state(&t, &CVector::zeros(4)).is_err());
        assert!(vector_state(&t, &psi.scale(2.0)).is_err());
    }

    #[test]
    fn random_vector_states_are_pure() {
        let t = build_lattice(0, 6).unwrap();
        let mut r = rng(8);
        for _ in 0..10 {
            let s = vector_state(&t, &random_unit_vector(&mut r, 7)).unwrap();
            assert!((s.rho().trace() - 1.0).abs() < 1e-10);
            assert!(s.is_pure());
        }
    }

    #[test]
    fn state_validation() {
        let t = build_lattice(0, 1).unwrap();
        assert!(State::new(&t, Hermitian::from_real_diagonal(&[0.5, 0.4])).is_err());
        assert!(State::new(&t, Hermitian::from_real_diagonal(&[1.5, -0.5])).is_err());
        assert!(State::new(&t, Hermitian::from_real_diagonal(&[0.5, 0.2, 0.3])).is_err());
    }

    #[test]
    fn fejer_state_at_origin_on_cosine() {
        let t = build_circle(1).unwrap();
        let s = fejer_state(&t, 0.0).unwrap();
        // cos x = (e^{ix} + e^{−ix})/2 is half the first generator
        let cos = t.generators()[1].to_hermitian().scale(0.5);
        assert!((s.evaluate(&cos).unwrap() - 0.5).abs() < 1e-15);
        let one = t.generators()[0].to_hermitian();
        assert!((s.evaluate(&one).unwrap() - 1.0).abs() < 1e-15);
        assert!(fejer_state(&build_lattice(0, 2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn coherent_vacuum_and_first_moment() {
        let t = build_moyal(1.0, 20).unwrap();
        let (vac, info) = moyal_coherent(&t, c(0.0)).unwrap();
        assert_eq!(info.tail, 0.0);
        assert_eq!(vac.rho().matrix()[(0, 0)], c(1.0));
        let theta = 0.7;
        let t = build_moyal(theta, 30).unwrap();
        let z = Complex64::new(0.6, -0.4);
        let (s, info) = moyal_coherent(&t, z).unwrap();
        assert!(info.tail < 1e-15);
        // σ(√θ a†)(z) = ⟨ψ_z, √θ a† ψ_z⟩
        let ad = crate::geometry::annihilation(30).to_dense().adjoint().scale(theta.sqrt());
        let value = (s.rho().matrix() * ad).trace();
        assert!((value - z).norm() < 1e-12);
    }

    #[test]
    fn coherent_tail_matches_series() {
        let (theta, n_max) = (1.0, 6);
        let z = Complex64::new(1.5, 0.5);
        let (_, info) = moyal_coherent_vector(theta, n_max, z);
        let r: f64 = z.norm_sqr() / theta;
        let mut term = (-r).exp();
        let mut tail = 0.0;
        for n in 1..200 {
            term *= r / n as f64;
            if n > n_max {
                tail += term;
            }
        }
        assert!((info.tail - tail).abs() < 1e-14);
        assert!((info.retained - (1.0 - tail)).abs() < 1e-14);
    }

    #[test]
    fn bloch_states() {
        let t = build_fuzzy_sphere(1).unwrap();
        let s = bloch_coherent(&t, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        for z in s.rho().matrix().iter() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
        for two_ell in 1..=6 {
            let t = build_fuzzy_sphere(two_ell).unwrap();
            let north = bloch_coherent(&t, 0.0, 1.3).unwrap();
            assert!((north.rho().matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);
            let s = bloch_coherent(&t, 1.1, -0.4).unwrap();
            assert!((s.rho().trace() - 1.0).abs() < 1e-10);
            assert!(s.is_pure());
        }
        assert!(bloch_coherent(&t, -0.1, 0.0).is_err());
    }

    #[test]
    fn bloch_entries_match_binomial_formula() {
        let two_ell = 3;
        let t = build_fuzzy_sphere(two_ell).unwrap();
        let (th, ph) = (0.9_f64, 2.1_f64);
        let s = bloch_coherent(&t, th, ph).unwrap();
        let binom: [f64; 4] = [1.0, 3.0, 3.0, 1.0];
        let ell = 1.5;
        for i in 0..4 {
            for j in 0..4 {
                let (m, n) = (i as f64 - ell, j as f64 - ell);
                let mag = (binom[i] * binom[j]).sqrt()
                    * (th / 2.0).sin().powf(2.0 * ell + m + n)
                    * (th / 2.0).cos().powf(2.0 * ell - m - n);
                let expected = Complex64::from_polar(mag, (n - m) * ph);
                assert!((s.rho().matrix()[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn truncation_of_geometric_distribution() {
        let k = 20;
        let ambient = build_lattice(0, k).unwrap();
        let raw: Vec<f64> = (0..=k).map(|n| 0.5_f64.powi(n as i32)).collect();
        let dist = LatticeDistribution::normalized(0, &raw).unwrap();
        let s = dist.to_state(&ambient).unwrap();
        let n = 5;
        let diag: Vec<f64> = (0..=k).map(|i| if i <= n { 1.0 } else { 0.0 }).collect();
        let p = Hermitian::from_real_diagonal(&diag);
        let target = build_lattice(0, n).unwrap();
        let (t, z) = truncate_state(&s, &p, &target).unwrap();
        let expected = (1.0 - 0.5_f64.powi(n as i32 + 1)) / (1.0 - 0.5_f64.powi(k as i32 + 1));
        assert!((z - expected).abs() < 1e-14);
        assert!((t.rho().matrix()[(0, 0)].re - 1.0 / expected / raw.iter().sum::<f64>()).abs() < 1e-14);
        let (same, one) = truncate_state(&s, &Hermitian::identity(k as usize + 1), &ambient).unwrap();
        assert_eq!(one, 1.0);
        assert!(max_abs(&(same.rho().matrix() - s.rho().matrix())) < 1e-15);
        let far = lattice_point(&ambient, 15).unwrap();
        assert!(matches!(truncate_state(&far, &p, &target), Err(Error::UndefinedTruncation { .. })));
    }

    #[test]
    fn moments() {
        let p = LatticeDistribution::point(4);
        assert_eq!(moment1(&p, 1, lattice_cost), Moment::Finite(3.0));
        let u = LatticeDistribution::normalized(0, &[1.0, 1.0, 1.0]).unwrap();
        match moment1(&u, 0, lattice_cost) {
            Moment::Finite(v) => assert!((v - 1.0).abs() < 1e-15),
            Moment::Infinite => panic!("finite moment reported infinite"),
        }
        assert_eq!(moment1(&u, 0, |_, _| 1e13), Moment::Infinite);
        assert!(LatticeDistribution::new(0, vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = build_circle(2).unwrap();
        let s = fejer_state(&t, 0.4).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: State = serde_json::from_str(&json).unwrap();
        assert!(max_abs(&(back.rho().matrix() - s.rho().matrix())) < 1e-15);
        assert_eq!(back.geometry(), s.geometry());
    }

    #[test]
    fn trace_distance_is_at_most_two() {
        let t = build_lattice(0, 3).unwrap();
        let a = lattice_point(&t, 0).unwrap();
        let b = lattice_point(&t, 3).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn binomials() {
        assert!((ln_binomial(6, 3).exp() - 20.0).abs() < 1e-12);
        assert_eq!(ln_binomial(5, 0), 0.0);
    }

    #[test]
    fn circle_retag_to_full_algebra() {
        let t = build_circle(1).unwrap();
        let full = crate::geometry::build_circle_full(1).unwrap();
        let s = fejer_state(&t, 0.3).unwrap().retag(&full).unwrap();
        assert_eq!(s.geometry(), &full.params);
    }
}
