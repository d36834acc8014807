//! Run configuration files (TOML).
//!
//! ```toml
//! config_version = 1
//! experiment = "sweep"        # optional; checked against the subcommand
//! tolerance = 1e-7
//! seed = 7
//! output = "circle.csv"
//!
//! [geometry]
//! kind = "circle"             # see `GeometryParams` for all kinds
//! n = 1
//!
//! [[states]]
//! kind = "fejer"
//! x = 0.7853981633974483
//!
//! [[states]]
//! kind = "fejer"
//! x = -0.7853981633974483
//!
//! [sweep]
//! variable = "n"              # any numeric field of the geometry
//! values = [1, 2, 4, 8]       # or start / end / step
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use specdist::geometry::{GeometryParams, TruncatedTriple};
use specdist::oracles::Point;
use specdist::state::{self, LatticeDistribution, State};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Distance,
    Sweep,
    Verify,
    Table,
    Hausdorff,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Distance => "distance",
            Experiment::Sweep => "sweep",
            Experiment::Verify => "verify",
            Experiment::Table => "table",
            Experiment::Hausdorff => "hausdorff",
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub config_version: u32,
    pub experiment: Option<Experiment>,
    pub geometry: Option<GeometryParams>,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    pub sweep: Option<SweepSpec>,
    pub hausdorff: Option<HausdorffSpec>,
    pub verify: Option<VerifySpec>,
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
}

/// State constructors. Each is evaluated against the geometry it is used on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    LatticePoint { site: i64 },
    /// Weights on consecutive sites from `start`, normalized on load.
    LatticeDistribution { start: i64, weights: Vec<f64> },
    Basis { index: usize },
    /// Basis vector at `floor(fraction · dim)`, for sweeps over the size.
    BasisFraction { fraction: f64 },
    Fejer { x: f64 },
    MoyalCoherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Bloch { theta: f64, phi: f64 },
}

impl StateSpec {
    pub fn build(&self, triple: &TruncatedTriple) -> specdist::Result<State> {
        match self {
            StateSpec::LatticePoint { site } => state::lattice_point(triple, *site),
            StateSpec::LatticeDistribution { start, weights } => LatticeDistribution::normalized(*start, weights)?.to_state(triple),
            StateSpec::Basis { index } => state::basis_state(triple, *index),
            StateSpec::BasisFraction { fraction } => {
                let n = triple.hilbert_dim;
                let index = ((fraction * n as f64).floor().max(0.0) as usize).min(n - 1);
                state::basis_state(triple, index)
            }
            StateSpec::Fejer { x } => state::fejer_state(triple, *x),
            StateSpec::MoyalCoherent { re, im } => state::moyal_coherent(triple, Complex64::new(*re, *im)).map(|(s, _)| s),
            StateSpec::Bloch { theta, phi } => state::bloch_coherent(triple, *theta, *phi),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StateSpec::LatticePoint { site } => format!("lattice_point({site})"),
            StateSpec::LatticeDistribution { start, weights } => format!("lattice_distribution({start};{} sites)", weights.len()),
            StateSpec::Basis { index } => format!("basis({index})"),
            StateSpec::BasisFraction { fraction } => format!("basis_fraction({fraction})"),
            StateSpec::Fejer { x } => format!("fejer({x})"),
            StateSpec::MoyalCoherent { re, im } => format!("moyal_coherent({re}{im:+}i)"),
            StateSpec::Bloch { theta, phi } => format!("bloch({theta},{phi})"),
        }
    }

    fn point(&self) -> Option<Point> {
        match *self {
            StateSpec::Fejer { x } => Some(Point::Circle(x)),
            StateSpec::MoyalCoherent { re, im } => Some(Point::Plane(Complex64::new(re, im))),
            StateSpec::Bloch { theta, phi } => Some(Point::Sphere(theta, phi)),
            _ => None,
        }
    }
}

/// Distance in the commutative model the pair of states localizes on, if any.
pub fn geodesic(a: &StateSpec, b: &StateSpec) -> Option<f64> {
    if let (StateSpec::LatticePoint { site: m }, StateSpec::LatticePoint { site: n }) = (a, b) {
        return Some((m - n).abs() as f64);
    }
    specdist::oracles::geodesic(a.point()?, b.point()?)
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: String,
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub end: Option<f64>,
    pub step: Option<f64>,
}

impl SweepSpec {
    pub fn values(&self) -> anyhow::Result<Vec<f64>> {
        let values = match (&self.values, self.start, self.end) {
            (Some(v), None, None) => v.clone(),
            (None, Some(start), Some(end)) => {
                let step = self.step.unwrap_or(1.0);
                ensure!(step > 0.0, "sweep step must be positive");
                let count = ((end - start) / step + 1e-9).floor();
                ensure!(count >= 0.0, "sweep range [{start}, {end}] is empty");
                (0..=count as usize).map(|i| start + i as f64 * step).collect()
            }
            _ => bail!("sweep needs either `values` or `start` and `end`"),
        };
        ensure!(!values.is_empty(), "sweep range is empty");
        ensure!(values.iter().all(|v| v.is_finite()), "sweep values must be finite");
        Ok(values)
    }
}

/// Geometry with one numeric field replaced.
pub fn with_field(geometry: &GeometryParams, field: &str, value: f64) -> anyhow::Result<GeometryParams> {
    let mut json = serde_json::to_value(geometry)?;
    let map = json.as_object_mut().context("geometry is not a table")?;
    ensure!(
        field != "kind" && map.contains_key(field),
        "sweep variable `{field}` is not a parameter of {}",
        geometry.label()
    );
    let number = if value.fract() == 0.0 && value.abs() < 9.0e15 {
        serde_json::Value::from(value as i64)
    } else {
        serde_json::Value::from(value)
    };
    map.insert(field.to_string(), number);
    serde_json::from_value(json).with_context(|| format!("`{field}` = {value} is not valid for {}", geometry.label()))
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HausdorffSpec {
    /// Truncation ladder; consecutive entries are compared.
    pub ladder: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    16
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub suite: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        ensure!(
            config.config_version == CONFIG_VERSION,
            "unsupported config_version {} (expected {CONFIG_VERSION})",
            config.config_version
        );
        if let Some(tol) = config.tolerance {
            ensure!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn check_experiment(&self, wanted: Experiment) -> anyhow::Result<()> {
        if let Some(e) = self.experiment {
            ensure!(e == wanted, "config is for `{}`, not `{}`", e.as_str(), wanted.as_str());
        }
        Ok(())
    }

    pub fn geometry(&self) -> anyhow::Result<&GeometryParams> {
        self.geometry.as_ref().context("config has no [geometry] table")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_distance_config() {
        let c = RunConfig::parse(
            r#"
            config_version = 1
            experiment = "distance"
            [geometry]
            kind = "lattice"
            n_min = 0
            n_max = 10
            [[states]]
            kind = "lattice_point"
            site = 2
            [[states]]
            kind = "lattice_point"
            site = 7
            "#,
        )
        .unwrap();
        assert_eq!(c.geometry, Some(GeometryParams::Lattice { n_min: 0, n_max: 10 }));
        assert_eq!(geodesic(&c.states[0], &c.states[1]), Some(5.0));
        assert!(c.check_experiment(Experiment::Sweep).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("config_version = 2").is_err());
        assert!(RunConfig::parse("experiment = \"distance\"").is_err());
        assert!(RunConfig::parse("config_version = 1\ncolour = 3").is_err());
        assert!(RunConfig::parse("config_version = 1\n[geometry]\nkind = \"torus\"").is_err());
        assert!(RunConfig::parse("config_version = 1\ntolerance = -1.0").is_err());
    }

    #[test]
    fn sweep_ranges() {
        let s = SweepSpec { variable: "n".into(), values: None, start: Some(1.0), end: Some(4.0), step: None };
        assert_eq!(s.values().unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let empty = SweepSpec { end: Some(0.0), ..s.clone() };
        assert!(empty.values().is_err());
        let both = SweepSpec { values: Some(vec![1.0]), ..s };
        assert!(both.values().is_err());
    }

    #[test]
    fn replaces_geometry_fields() {
        let g = GeometryParams::Moyal { theta: 1.0, n_max: 5 };
        assert_eq!(with_field(&g, "n_max", 12.0).unwrap(), GeometryParams::Moyal { theta: 1.0, n_max: 12 });
        assert_eq!(with_field(&g, "theta", 0.5).unwrap(), GeometryParams::Moyal { theta: 0.5, n_max: 5 });
        assert!(with_field(&g, "n", 3.0).is_err());
        assert!(with_field(&g, "n_max", 2.5).is_err());
        assert!(with_field(&g, "kind", 1.0).is_err());
    }
}
