//! Output records and their CSV / JSON encodings.
//!
//! CSV files have a header row and a fixed column order per record type.
//! Reals are written with 17 significant digits; absent values are empty.

use std::io::{Read, Write};

use anyhow::{bail, ensure, Context};
use serde::Serialize;
use specdist::distance::DistanceResult;

pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub trait Record: Serialize {
    fn header(timing: bool) -> Vec<&'static str>;
    fn fields(&self, timing: bool) -> Vec<String>;
}

/// Solver outcome shared by all record types.
#[derive(Clone, Debug, Serialize)]
pub struct Solve {
    pub status: &'static str,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub tol: f64,
    pub optimizer_lipschitz: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Solve {
    pub fn new(r: &DistanceResult, tol: f64, seconds: f64, timing: bool) -> Self {
        Self {
            status: r.status.as_str(),
            primal: r.primal,
            dual: r.dual,
            gap: r.gap(),
            tol,
            optimizer_lipschitz: r.optimizer_lipschitz,
            iterations: r.iterations,
            wall_time_s: timing.then_some(seconds),
        }
    }

    const HEADER: [&'static str; 7] = ["status", "primal", "dual", "gap", "tol", "optimizer_lipschitz", "iterations"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.status.to_string(),
            real(self.primal),
            real(self.dual),
            real(self.gap),
            real(self.tol),
            real(self.optimizer_lipschitz),
            self.iterations.to_string(),
        ]
    }

    fn wall_time(&self) -> String {
        opt_real(self.wall_time_s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceRecord {
    pub geometry: String,
    pub state_a: String,
    pub state_b: String,
    #[serde(flatten)]
    pub solve: Solve,
    pub geodesic: Option<f64>,
}

impl Record for DistanceRecord {
    fn header(timing: bool) -> Vec<&'static str> {
        let mut h = vec!["geometry", "state_a", "state_b"];
        h.extend(Solve::HEADER);
        h.push("geodesic");
        if timing {
            h.push("wall_time_s");
        }
        h
    }

    fn fields(&self, timing: bool) -> Vec<String> {
        let mut f = vec![self.geometry.clone(), self.state_a.clone(), self.state_b.clone()];
        f.extend(self.solve.fields());
        f.push(opt_real(self.geodesic));
        if timing {
            f.push(self.solve.wall_time());
        }
        f
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub variable: String,
    pub value: f64,
    pub geometry: String,
    #[serde(flatten)]
    pub solve: Solve,
    pub geodesic: Option<f64>,
    pub rho_lower: Option<f64>,
    pub rho_upper: Option<f64>,
}

impl Record for SweepRecord {
    fn header(timing: bool) -> Vec<&'static str> {
        let mut h = vec!["variable", "value", "geometry"];
        h.extend(Solve::HEADER);
        h.extend(["geodesic", "rho_lower", "rho_upper"]);
        if timing {
            h.push("wall_time_s");
        }
        h
    }

    fn fields(&self, timing: bool) -> Vec<String> {
        let mut f = vec![self.variable.clone(), real(self.value), self.geometry.clone()];
        f.extend(self.solve.fields());
        f.extend([opt_real(self.geodesic), opt_real(self.rho_lower), opt_real(self.rho_upper)]);
        if timing {
            f.push(self.solve.wall_time());
        }
        f
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HausdorffRecord {
    pub n_a: usize,
    pub n_b: usize,
    pub samples: usize,
    pub hausdorff: f64,
    /// Largest `|d − geodesic|` on the `n_a` and `n_b` sample grids.
    pub residual_a: f64,
    pub residual_b: f64,
    pub max_gap: f64,
    pub solves: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Record for HausdorffRecord {
    fn header(timing: bool) -> Vec<&'static str> {
        let mut h = vec!["n_a", "n_b", "samples", "hausdorff", "residual_a", "residual_b", "max_gap", "solves"];
        if timing {
            h.push("wall_time_s");
        }
        h
    }

    fn fields(&self, timing: bool) -> Vec<String> {
        let mut f = vec![
            self.n_a.to_string(),
            self.n_b.to_string(),
            self.samples.to_string(),
            real(self.hausdorff),
            real(self.residual_a),
            real(self.residual_b),
            real(self.max_gap),
            self.solves.to_string(),
        ];
        if timing {
            f.push(opt_real(self.wall_time_s));
        }
        f
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub fn write_records<R: Record, W: Write>(out: W, records: &[R], format: Format, timing: bool) -> anyhow::Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(R::header(timing))?;
            for r in records {
                w.write_record(r.fields(timing))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Reads a CSV written by [`write_records`] and re-checks every row with a
/// solver outcome: `primal ≤ dual + tol` unless the status is
/// `gap-not-closed`. Returns the header and rows.
pub fn read_validated<R: Read>(input: R) -> anyhow::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let col = |name: &str| header.iter().position(|h| h == name);
    let solve_cols = (col("status"), col("primal"), col("dual"), col("tol"));
    let mut rows = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row: Vec<String> = row?.iter().map(str::to_string).collect();
        ensure!(row.len() == header.len(), "row {} has {} fields, expected {}", i + 1, row.len(), header.len());
        if let (Some(s), Some(p), Some(d), Some(t)) = solve_cols {
            let parse = |k: usize| -> anyhow::Result<f64> {
                row[k].parse::<f64>().with_context(|| format!("row {}: `{}` is not a number", i + 1, row[k]))
            };
            let (primal, dual, tol) = (parse(p)?, parse(d)?, parse(t)?);
            if row[s] != "gap-not-closed" && !(primal <= dual + tol) {
                bail!("row {}: primal {primal} exceeds dual {dual} by more than {tol}", i + 1);
            }
        }
        rows.push(row);
    }
    Ok((header, rows))
}
