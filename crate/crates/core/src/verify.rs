//! Named invariant suites with machine-readable reports.

use num_complex::Complex64;
use serde::Serialize;

use crate::distance::{DistanceEngine, DistanceOptions, DistanceResult};
use crate::error::{Error, Result};
use crate::geometry::{self, TruncatedTriple};
use crate::linalg::{self, CMatrix, Hermitian};
use crate::oracles;
use crate::random;
use crate::state::{self, LatticeDistribution, State};

pub const SUITES: &[&str] = &[
    "lattice-closed-forms",
    "lattice-wasserstein",
    "commutator-identity",
    "seminorm-inequalities",
    "variance-formula",
    "flip-discrete-metric",
    "circle-sandwich",
    "fejer-identity",
    "fuzzy-sphere",
    "metric-axioms",
];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { suite: suite.to_string(), seed, passed, checks }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Largest value of `err` over `cases`, with the case that attains it.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
    count: usize,
}

impl Worst {
    fn record(&mut self, err: f64, at: impl FnOnce() -> String) {
        self.count += 1;
        if !(err <= self.value) {
            self.value = err;
            self.at = at();
        }
    }

    fn check(self, name: &str, tol: f64) -> Check {
        let detail = format!("worst {:.3e} (tolerance {tol:.1e}) over {} cases at {}", self.value, self.count, self.at);
        Check::new(name, self.value <= tol, detail)
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let checks = match name {
        "lattice-closed-forms" => {
            let triple = geometry::build_lattice(0, 16)?;
            lattice_closed_forms(&triple, 12)?
        }
        "lattice-wasserstein" => lattice_wasserstein(seed)?,
        "commutator-identity" => commutator_identity(seed)?,
        "seminorm-inequalities" => seminorm_inequalities(seed)?,
        "variance-formula" => variance_formula(seed),
        "flip-discrete-metric" => flip_discrete_metric()?,
        "circle-sandwich" => circle_sandwich()?,
        "fejer-identity" => fejer_identity(seed)?,
        "fuzzy-sphere" => fuzzy_sphere()?,
        "metric-axioms" => metric_axioms(seed)?,
        _ => {
            return Err(Error::InvalidInput(format!("unknown suite `{name}`; known suites: {}", SUITES.join(", "))));
        }
    };
    Ok(SuiteReport::new(name, seed, checks))
}

fn certificate_checks(results: &[DistanceResult]) -> Vec<Check> {
    let mut gap = Worst::default();
    let mut lip = Worst::default();
    for (i, r) in results.iter().enumerate() {
        if r.is_infinite() {
            continue;
        }
        gap.record(r.gap(), || format!("call {i}"));
        lip.record(r.optimizer_lipschitz - 1.0, || format!("call {i}"));
    }
    vec![gap.check("certified gap", 1e-6), lip.check("optimizer feasibility", 1e-8)]
}

/// Pure-state distances `|m − n|` on a lattice window for sites
/// `n_min ≤ m < n ≤ n_min + max_offset`, plus the Lemma-type seminorm checks.
pub fn lattice_closed_forms(triple: &TruncatedTriple, max_offset: i64) -> Result<Vec<Check>> {
    let n_min = match triple.params {
        geometry::GeometryParams::Lattice { n_min, .. } => n_min,
        _ => return Err(Error::InvalidInput("lattice-closed-forms needs a lattice geometry".into())),
    };
    let engine = DistanceEngine::new(triple);
    let opts = DistanceOptions::default();
    let mut worst = Worst::default();
    let mut results = Vec::new();
    for m in n_min..=n_min + max_offset {
        for n in (m + 1)..=n_min + max_offset {
            let r = engine.distance(&state::lattice_point(triple, m)?, &state::lattice_point(triple, n)?, &opts)?;
            worst.record((r.value() - (n - m) as f64).abs(), || format!("({m}, {n})"));
            results.push(r);
        }
    }
    let mut checks = vec![worst.check("d(δ_m, δ_n) = |m − n|", 1e-6)];
    // a_n = n has seminorm sup |a_n − a_{n+1}| = 1
    let ramp: Vec<f64> = (0..triple.hilbert_dim).map(|i| i as f64).collect();
    let lip = triple.lipschitz_norm(&Hermitian::from_real_diagonal(&ramp))?;
    checks.push(Check::new("‖[D, ramp]‖ = 1", (lip - 1.0).abs() < 1e-12, format!("{lip:.15}")));
    let constant = triple.lipschitz_norm(&Hermitian::identity(triple.hilbert_dim))?;
    checks.push(Check::new("‖[D, 1]‖ = 0", constant == 0.0, format!("{constant:e}")));
    checks.extend(certificate_checks(&results));
    Ok(checks)
}

fn random_window_distribution<R: rand::Rng>(rng: &mut R, start: i64, len: usize) -> Result<LatticeDistribution> {
    LatticeDistribution::new(start, random::random_distribution(rng, len))
}

fn lattice_wasserstein(seed: u64) -> Result<Vec<Check>> {
    let triple = geometry::build_lattice(0, 14)?;
    let engine = DistanceEngine::new(&triple);
    let opts = DistanceOptions::default();
    let mut rng = random::rng(seed);
    let mut transport = Worst::default();
    let mut moment = Worst::default();
    let mut results = Vec::new();
    for case in 0..20 {
        let p = random_window_distribution(&mut rng, 3, 6)?;
        let q = random_window_distribution(&mut rng, 5, 6)?;
        let r = engine.distance(&p.to_state(&triple)?, &q.to_state(&triple)?, &opts)?;
        transport.record((r.value() - oracles::lattice_wasserstein(&p, &q)).abs(), || format!("case {case}"));
        results.push(r);
        let n = 4 + case % 6;
        let r = engine.distance(&p.to_state(&triple)?, &state::lattice_point(&triple, n)?, &opts)?;
        let expected: f64 = p.sites().map(|(k, w)| w * (k - n).abs() as f64).sum();
        moment.record((r.value() - expected).abs(), || format!("case {case}, n = {n}"));
        results.push(r);
    }
    let mut checks = vec![
        transport.check("d(φ, φ′) = W(φ, φ′)", 1e-6),
        moment.check("d(φ, δ_n) = Σ|k − n| p_k", 1e-6),
    ];
    checks.extend(certificate_checks(&results));
    Ok(checks)
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `[PDP, PaP] − P([D, a] + [[P, a], [D, P]])P`.
pub fn commutator_identity_defect(d: &Hermitian, p: &Hermitian, a: &Hermitian) -> f64 {
    let (d, p, a) = (d.matrix(), p.matrix(), a.matrix());
    let lhs = commutator(&(p * d * p), &(p * a * p));
    let rhs = p * (commutator(d, a) + commutator(&commutator(p, a), &commutator(d, p))) * p;
    linalg::max_abs(&(lhs - rhs))
}

fn commutator_identity(seed: u64) -> Result<Vec<Check>> {
    let mut rng = random::rng(seed);
    let ambient = geometry::build_circle(4)?;
    let middle = geometry::circle_middle_projection(4, 2)?;
    let mut spectral = Worst::default();
    let mut generic = Worst::default();
    for case in 0..100 {
        let a = random::random_hermitian(&mut rng, 9);
        spectral.record(commutator_identity_defect(ambient.dirac(), &middle, &a), || format!("case {case}"));
        let d = random::random_hermitian(&mut rng, 9);
        let rank = 1 + case % 8;
        let p = random::random_projection(&mut rng, 9, rank);
        generic.record(commutator_identity_defect(&d, &p, &a), || format!("case {case}"));
    }
    Ok(vec![
        spectral.check("identity with spectral projection", 1e-10),
        generic.check("identity with random projection", 1e-10),
    ])
}

fn seminorm_inequalities(seed: u64) -> Result<Vec<Check>> {
    let mut rng = random::rng(seed);
    let ambient = geometry::build_circle(4)?;
    let d = ambient.dirac();
    let mut commuting = Worst::default();
    let mut general = Worst::default();
    for case in 0..100 {
        let p = geometry::circle_middle_projection(4, case % 4)?;
        let a = random::random_hermitian(&mut rng, 9);
        let pap = linalg::compress(&p, &a, linalg::Compression::Ambient)?;
        let d_lambda = linalg::compress(&p, d, linalg::Compression::Ambient)?;
        let lhs = linalg::spectral_norm(&linalg::commutator(d_lambda.matrix(), pap.matrix())?)?;
        let rhs = linalg::spectral_norm(&linalg::commutator(d.matrix(), a.matrix())?)?;
        commuting.record(lhs - rhs, || format!("case {case}"));

        let dr = random::random_hermitian(&mut rng, 9);
        let pr = random::random_projection(&mut rng, 9, 1 + case % 8);
        let d_lambda = linalg::compress(&pr, &dr, linalg::Compression::Ambient)?;
        let pap = linalg::compress(&pr, &a, linalg::Compression::Ambient)?;
        let lhs = linalg::spectral_norm(&linalg::commutator(d_lambda.matrix(), pap.matrix())?)?;
        let rhs = linalg::spectral_norm(&linalg::commutator(d_lambda.matrix(), a.matrix())?)?;
        general.record(lhs - rhs, || format!("case {case}"));
    }
    Ok(vec![
        commuting.check("L_Λ(PaP) ≤ L_D(a) for [D, P] = 0", 1e-10),
        general.check("L_Λ(PaP) ≤ L_Λ(a)", 1e-10),
    ])
}

fn variance_formula(seed: u64) -> Vec<Check> {
    let mut rng = random::rng(seed);
    let mut worst = Worst::default();
    for case in 0..100 {
        let n = 2 + case % 7;
        let f = random::random_real_diagonal(&mut rng, n);
        let psi = random::random_unit_vector(&mut rng, n);
        let p0 = Hermitian::outer(&psi);
        let norm = linalg::spectral_norm(&commutator(p0.matrix(), f.matrix())).unwrap_or(f64::NAN);
        let fpsi = f.matrix() * &psi;
        let mean = psi.dotc(&fpsi).re;
        let variance = fpsi.norm_squared() - mean * mean;
        worst.record((norm * norm - variance).abs(), || format!("case {case}"));
    }
    vec![worst.check("‖[P₀, f]‖² = variance", 1e-10)]
}

fn flip_discrete_metric() -> Result<Vec<Check>> {
    let opts = DistanceOptions::with_tol(1e-10);
    let mut off_base = Worst::default();
    let mut on_base = Worst::default();
    let mut minimal = Worst::default();
    let mut results = Vec::new();
    for lambda in [0.5, 1.0, 4.0] {
        let triple = geometry::build_flip(4, lambda, 0)?;
        let engine = DistanceEngine::new(&triple);
        for x in 0..4 {
            for y in (x + 1)..4 {
                let r = engine.distance(&state::basis_state(&triple, x)?, &state::basis_state(&triple, y)?, &opts)?;
                let target = if x == 0 { 1.0 / lambda } else { 2.0 / lambda };
                let worst = if x == 0 { &mut on_base } else { &mut off_base };
                worst.record((r.value() - target).abs(), || format!("Λ = {lambda}, ({x}, {y})"));
                minimal.record(1.0 / lambda - r.value(), || format!("Λ = {lambda}, ({x}, {y})"));
                results.push(r);
            }
        }
    }
    let mut checks = vec![
        off_base.check("d = 2/Λ away from the base point", 1e-8),
        on_base.check("d = 1/Λ from the base point", 1e-8),
        minimal.check("d ≥ 1/‖D‖", 1e-8),
    ];
    checks.extend(certificate_checks(&results));
    Ok(checks)
}

fn circle_sandwich() -> Result<Vec<Check>> {
    let opts = DistanceOptions::default();
    let mut lower = Worst::default();
    let mut upper = Worst::default();
    let mut shift = Worst::default();
    let mut results = Vec::new();
    for n in [1usize, 2, 4] {
        let triple = geometry::build_circle(n)?;
        let engine = DistanceEngine::new(&triple);
        for i in 1..=8 {
            let x = std::f64::consts::PI * i as f64 / 8.0;
            let a = state::fejer_state(&triple, x / 2.0)?;
            let b = state::fejer_state(&triple, -x / 2.0)?;
            let r = engine.distance(&a, &b, &opts)?;
            let bounds = oracles::circle_bounds(n, x);
            lower.record(bounds.lower - r.value(), || format!("N = {n}, x = {x:.4}"));
            upper.record(r.value() - bounds.upper, || format!("N = {n}, x = {x:.4}"));
            let t = 0.37 * i as f64;
            let moved = engine.distance(
                &state::fejer_state(&triple, x / 2.0 + t)?,
                &state::fejer_state(&triple, -x / 2.0 + t)?,
                &opts,
            )?;
            shift.record((moved.value() - r.value()).abs(), || format!("N = {n}, x = {x:.4}, t = {t:.2}"));
            results.push(r);
            results.push(moved);
        }
    }
    let mut checks = vec![
        lower.check("d ≥ ρ_N", 1e-6),
        upper.check("d ≤ min(ρ′_N, geodesic)", 1e-6),
        shift.check("translation invariance", 2e-7),
    ];
    checks.extend(certificate_checks(&results));
    Ok(checks)
}

/// Random real trigonometric polynomial of degree `degree`: Fourier
/// coefficients `f_0 ∈ ℝ`, `f_1..f_degree ∈ ℂ`.
pub fn random_trig_coefficients<R: rand::Rng>(rng: &mut R, degree: usize) -> Vec<Complex64> {
    let v = random::random_real_vector(rng, 2 * degree + 1);
    let mut coeffs = vec![Complex64::new(v[0], 0.0)];
    for k in 1..=degree {
        coeffs.push(Complex64::new(v[2 * k - 1], v[2 * k]));
    }
    coeffs
}

/// Multiplication operator of a trigonometric polynomial on a circle
/// truncation, as an algebra element.
pub fn circle_multiplication(triple: &TruncatedTriple, coeffs: &[Complex64]) -> Result<Hermitian> {
    let mut x = vec![0.0; triple.num_generators()];
    let max_degree = (triple.num_generators() - 1) / 2;
    if coeffs.len() > max_degree + 1 {
        return Err(Error::InvalidInput(format!("degree {} exceeds {max_degree}", coeffs.len() - 1)));
    }
    if let Some(c0) = coeffs.first() {
        x[0] = c0.re;
    }
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        x[2 * k - 1] = c.re;
        x[2 * k] = c.im;
    }
    triple.element(&x)
}

fn fejer_identity(seed: u64) -> Result<Vec<Check>> {
    let mut rng = random::rng(seed);
    let mut worst = Worst::default();
    for case in 0..20 {
        let n = 1 + case % 16;
        let triple = geometry::build_circle(n)?;
        let coeffs = random_trig_coefficients(&mut rng, 2 * n);
        let f = circle_multiplication(&triple, &coeffs)?;
        let x = random::random_real_vector(&mut rng, 1)[0];
        let value = state::fejer_state(&triple, x)?.evaluate(&f)?;
        // modes beyond N carry zero Fejér weight
        let expected = oracles::fejer_fourier_sum(&coeffs[..=n], x);
        worst.record((value - expected).abs(), || format!("case {case}, N = {n}"));
    }
    Ok(vec![worst.check("Fejér state = weighted Fourier sum", 1e-12)])
}

fn fuzzy_sphere() -> Result<Vec<Check>> {
    let mut relations = Worst::default();
    for two_ell in 1..=8 {
        let (h, e) = geometry::su2_generators(two_ell);
        let (h, e) = (h.to_dense(), e.to_dense());
        let f = e.adjoint();
        let ef = commutator(&e, &f) - h.scale(2.0);
        let he = commutator(&h, &e) - &e;
        let hf = commutator(&h, &f) + &f;
        let defect = linalg::max_abs(&ef).max(linalg::max_abs(&he)).max(linalg::max_abs(&hf));
        relations.record(defect, || format!("2ℓ = {two_ell}"));
    }
    let opts = DistanceOptions::default();
    let mut azimuth = Worst::default();
    let mut finite = true;
    let mut results = Vec::new();
    for two_ell in [1usize, 2, 3] {
        let triple = geometry::build_fuzzy_sphere(two_ell)?;
        let engine = DistanceEngine::new(&triple);
        let r0 = engine.distance(&state::bloch_coherent(&triple, 0.9, 0.0)?, &state::bloch_coherent(&triple, 0.9, 2.0)?, &opts)?;
        for phi in [0.7, 2.9, 4.4] {
            let r = engine.distance(
                &state::bloch_coherent(&triple, 0.9, phi)?,
                &state::bloch_coherent(&triple, 0.9, phi + 2.0)?,
                &opts,
            )?;
            azimuth.record((r.value() - r0.value()).abs(), || format!("2ℓ = {two_ell}, φ = {phi}"));
            results.push(r);
        }
        let poles = engine.distance(
            &state::bloch_coherent(&triple, 0.0, 0.0)?,
            &state::bloch_coherent(&triple, std::f64::consts::PI, 0.0)?,
            &opts,
        )?;
        finite &= !poles.is_infinite() && poles.value().is_finite();
        results.push(r0);
        results.push(poles);
    }
    let mut checks = vec![
        relations.check("su(2) relations", 1e-12),
        azimuth.check("azimuth invariance", 2e-6),
        Check::new("antipodal distance finite", finite, String::new()),
    ];
    checks.extend(certificate_checks(&results));
    Ok(checks)
}

fn random_state<R: rand::Rng>(rng: &mut R, triple: &TruncatedTriple) -> Result<State> {
    let n = triple.hilbert_dim;
    let rank = 1 + rng.gen_range(0..n);
    State::new(triple, random::random_density(rng, n, rank))
}

fn metric_axioms(seed: u64) -> Result<Vec<Check>> {
    let mut rng = random::rng(seed);
    let tol = 1e-7;
    let opts = DistanceOptions::with_tol(tol);
    let triples = [
        geometry::build_lattice(0, 5)?,
        geometry::build_circle(2)?,
        geometry::build_fuzzy_sphere(2)?,
        geometry::build_moyal(1.0, 3)?,
    ];
    let mut symmetry = Worst::default();
    let mut triangle = Worst::default();
    let mut identity = Worst::default();
    let mut results = Vec::new();
    for triple in &triples {
        let engine = DistanceEngine::new(triple);
        for case in 0..3 {
            let s: Vec<State> = (0..3).map(|_| random_state(&mut rng, triple)).collect::<Result<_>>()?;
            let d = |i: usize, j: usize| engine.distance(&s[i], &s[j], &opts);
            let (d01, d10, d12, d02) = (d(0, 1)?, d(1, 0)?, d(1, 2)?, d(0, 2)?);
            let d00 = d(0, 0)?;
            let at = || format!("{} case {case}", triple.name);
            symmetry.record((d01.value() - d10.value()).abs(), at);
            triangle.record(d02.value() - d01.value() - d12.value(), at);
            identity.record(d00.value().abs().max(d00.dual.abs()), at);
            results.extend([d01, d10, d12, d02, d00]);
        }
    }
    let mut checks = vec![
        symmetry.check("symmetry", tol),
        triangle.check("triangle inequality", 3.0 * tol),
        identity.check("d(φ, φ) = 0", tol),
    ];
    checks.extend(certificate_checks(&results));
    Ok(checks)
}
