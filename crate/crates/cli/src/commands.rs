use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context};
use rayon::prelude::*;
use specdist::distance::{self, DistanceEngine, DistanceOptions, DistanceResult, DistanceStatus};
use specdist::geometry::GeometryParams;
use specdist::oracles;
use specdist::verify;

use crate::config::{self, Experiment, RunConfig, StateSpec};
use crate::records::{self, DistanceRecord, Format, HausdorffRecord, Record, Solve, SweepRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_GAP_NOT_CLOSED: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Command-line settings that override the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub timing: bool,
}

struct Setup {
    opts: DistanceOptions,
    out: Option<PathBuf>,
    format: Format,
    timing: bool,
    pool: rayon::ThreadPool,
}

impl Setup {
    fn new(config: &RunConfig, o: &Overrides) -> anyhow::Result<Self> {
        let mut opts = DistanceOptions::default();
        if let Some(tol) = o.tol.or(config.tolerance) {
            ensure!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
            opts.tol = tol;
        }
        if let Some(max_iter) = config.max_iter {
            opts.max_iter = max_iter;
        }
        let out = o.out.clone().or_else(|| config.output.clone());
        let format = o.format.unwrap_or(match out.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        });
        let jobs = o.jobs.unwrap_or(1);
        ensure!(jobs >= 1, "--jobs must be at least 1");
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        Ok(Self { opts, out, format, timing: o.timing, pool })
    }

    fn emit<R: Record>(&self, records: &[R]) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                records::write_records(&mut w, records, self.format, self.timing)?;
                w.flush()?;
            }
            None => records::write_records(std::io::stdout().lock(), records, self.format, self.timing)?,
        }
        Ok(())
    }

    fn solve(&self, geometry: &GeometryParams, a: &StateSpec, b: &StateSpec) -> anyhow::Result<(DistanceResult, f64)> {
        let triple = geometry.build()?;
        let sa = a.build(&triple).with_context(|| format!("state {}", a.label()))?;
        let sb = b.build(&triple).with_context(|| format!("state {}", b.label()))?;
        let start = Instant::now();
        let r = DistanceEngine::new(&triple).distance(&sa, &sb, &self.opts)?;
        Ok((r, start.elapsed().as_secs_f64()))
    }
}

fn exit_for(statuses: impl IntoIterator<Item = &'static str>) -> i32 {
    let mut code = EXIT_OK;
    for s in statuses {
        if s == DistanceStatus::GapNotClosed.as_str() {
            log::warn!("a solve ended with the duality gap above tolerance");
            code = EXIT_GAP_NOT_CLOSED;
        }
    }
    code
}

fn state_pair(config: &RunConfig) -> anyhow::Result<(&StateSpec, &StateSpec)> {
    match config.states.as_slice() {
        [a, b] => Ok((a, b)),
        s => bail!("expected exactly two [[states]], found {}", s.len()),
    }
}

pub fn distance(config: &RunConfig, o: &Overrides) -> anyhow::Result<i32> {
    config.check_experiment(Experiment::Distance)?;
    let cx = Setup::new(config, o)?;
    let geometry = config.geometry()?;
    let (a, b) = state_pair(config)?;
    let (r, secs) = cx.solve(geometry, a, b)?;
    let record = DistanceRecord {
        geometry: geometry.label(),
        state_a: a.label(),
        state_b: b.label(),
        solve: Solve::new(&r, cx.opts.tol, secs, cx.timing),
        geodesic: config::geodesic(a, b),
    };
    cx.emit(std::slice::from_ref(&record))?;
    if cx.out.is_some() {
        let line = format!("{} d = {} ({}, gap {:.3e})", record.geometry, records::real(r.value()), r.status.as_str(), r.gap());
        writeln!(std::io::stdout().lock(), "{line}")?;
    }
    Ok(exit_for([record.solve.status]))
}

pub fn table(config: &RunConfig, o: &Overrides) -> anyhow::Result<i32> {
    config.check_experiment(Experiment::Table)?;
    let cx = Setup::new(config, o)?;
    let geometry = config.geometry()?;
    ensure!(config.states.len() >= 2, "a table needs at least two [[states]]");
    let n = config.states.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let triple = geometry.build()?;
    let engine = DistanceEngine::new(&triple);
    let states = config
        .states
        .iter()
        .map(|s| s.build(&triple).with_context(|| format!("state {}", s.label())))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows: Vec<anyhow::Result<DistanceRecord>> = cx.pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| {
                let start = Instant::now();
                let r = engine.distance(&states[i], &states[j], &cx.opts)?;
                let secs = start.elapsed().as_secs_f64();
                Ok(DistanceRecord {
                    geometry: geometry.label(),
                    state_a: config.states[i].label(),
                    state_b: config.states[j].label(),
                    solve: Solve::new(&r, cx.opts.tol, secs, cx.timing),
                    geodesic: config::geodesic(&config.states[i], &config.states[j]),
                })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    cx.emit(&rows)?;
    Ok(exit_for(rows.iter().map(|r| r.solve.status)))
}

fn circle_oracles(geometry: &GeometryParams, a: &StateSpec, b: &StateSpec) -> (Option<f64>, Option<f64>) {
    match (geometry, a, b) {
        (GeometryParams::Circle { n, full_algebra: false }, StateSpec::Fejer { x }, StateSpec::Fejer { x: y }) => {
            let t = oracles::geodesic_circle(*x, *y);
            (Some(oracles::rho_lower(*n, t)), Some(oracles::rho_upper(*n, t)))
        }
        _ => (None, None),
    }
}

pub fn sweep(config: &RunConfig, o: &Overrides) -> anyhow::Result<i32> {
    config.check_experiment(Experiment::Sweep)?;
    let cx = Setup::new(config, o)?;
    let base = config.geometry()?;
    let spec = config.sweep.as_ref().context("config has no [sweep] table")?;
    let (a, b) = state_pair(config)?;
    let points = spec
        .values()?
        .into_iter()
        .map(|v| Ok((v, config::with_field(base, &spec.variable, v)?)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows: Vec<anyhow::Result<SweepRecord>> = cx.pool.install(|| {
        points
            .par_iter()
            .map(|(value, geometry)| {
                let (r, secs) = cx.solve(geometry, a, b).with_context(|| format!("{} = {value}", spec.variable))?;
                let (rho_lower, rho_upper) = circle_oracles(geometry, a, b);
                Ok(SweepRecord {
                    variable: spec.variable.clone(),
                    value: *value,
                    geometry: geometry.label(),
                    solve: Solve::new(&r, cx.opts.tol, secs, cx.timing),
                    geodesic: config::geodesic(a, b),
                    rho_lower,
                    rho_upper,
                })
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    cx.emit(&rows)?;
    Ok(exit_for(rows.iter().map(|r| r.solve.status)))
}

pub fn hausdorff(config: &RunConfig, o: &Overrides) -> anyhow::Result<i32> {
    config.check_experiment(Experiment::Hausdorff)?;
    let cx = Setup::new(config, o)?;
    if let Some(g) = &config.geometry {
        ensure!(matches!(g, GeometryParams::Circle { full_algebra: false, .. }), "hausdorff runs on circle geometries, not {}", g.label());
    }
    let spec = config.hausdorff.as_ref().context("config has no [hausdorff] table")?;
    ensure!(spec.ladder.len() >= 2, "the ladder needs at least two truncations");
    ensure!(spec.ladder.iter().all(|&n| n >= 1), "ladder entries must be at least 1");
    ensure!(spec.samples >= 1, "at least one sample is needed");
    let residuals: Vec<anyhow::Result<(f64, Vec<DistanceResult>, f64)>> = cx.pool.install(|| {
        spec.ladder
            .par_iter()
            .map(|&n| {
                let start = Instant::now();
                let (w, results) = distance::circle_grid_distortion(n, spec.samples, &cx.opts)?;
                Ok((w, results, start.elapsed().as_secs_f64()))
            })
            .collect()
    });
    let residuals = residuals.into_iter().collect::<anyhow::Result<Vec<_>>>()?;
    let rungs: Vec<usize> = (0..spec.ladder.len() - 1).collect();
    let pairs: Vec<anyhow::Result<(f64, Vec<DistanceResult>, f64)>> = cx.pool.install(|| {
        rungs
            .par_iter()
            .map(|&i| {
                let start = Instant::now();
                let (h, results) = distance::circle_grid_hausdorff(spec.ladder[i], spec.samples, spec.ladder[i + 1], spec.samples, &cx.opts)?;
                Ok((h, results, start.elapsed().as_secs_f64()))
            })
            .collect()
    });
    let pairs = pairs.into_iter().collect::<anyhow::Result<Vec<_>>>()?;

    let mut statuses = Vec::new();
    let mut rows = Vec::new();
    for (i, (h, results, secs)) in pairs.iter().enumerate() {
        let all = results.iter().chain(&residuals[i].1).chain(&residuals[i + 1].1);
        let max_gap = all.clone().map(|r| r.gap()).fold(0.0, f64::max);
        statuses.extend(all.map(|r| r.status.as_str()));
        rows.push(HausdorffRecord {
            n_a: spec.ladder[i],
            n_b: spec.ladder[i + 1],
            samples: spec.samples,
            hausdorff: *h,
            residual_a: residuals[i].0,
            residual_b: residuals[i + 1].0,
            max_gap,
            solves: results.len(),
            wall_time_s: cx.timing.then_some(*secs),
        });
    }
    cx.emit(&rows)?;
    let decreasing = rows.windows(2).all(|w| w[1].hausdorff < w[0].hausdorff);
    eprintln!("hausdorff strictly decreasing over the ladder: {}", if decreasing { "yes" } else { "no" });
    Ok(exit_for(statuses))
}

/// Runs one suite, or every suite for `all`. Reports are printed as JSON.
pub fn verify(config: &RunConfig, suite: Option<&str>, o: &Overrides) -> anyhow::Result<i32> {
    config.check_experiment(Experiment::Verify)?;
    let suite = suite.or(config.verify.as_ref().map(|v| v.suite.as_str())).context("no suite given")?;
    let seed = o.seed.or(config.seed).unwrap_or(0);
    let names: Vec<&str> = if suite == "all" { verify::SUITES.to_vec() } else { vec![suite] };
    let reports = names.iter().map(|name| verify::run_suite(name, seed)).collect::<specdist::Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let text = serde_json::to_string_pretty(&reports)?;
    match o.out.as_ref().or(config.output.as_ref()) {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => writeln!(std::io::stdout().lock(), "{text}")?,
    }
    for r in &reports {
        for c in r.failures() {
            eprintln!("FAILED {}: {} ({})", r.suite, c.name, c.detail);
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
