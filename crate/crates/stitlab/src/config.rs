//! Experiment configuration: a TOML document with one optional section per
//! subcommand. Unknown keys are rejected; semantic checks report the dotted
//! path of the offending field.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stitlab_core::geometry::{Point, Polygon, Polyhedron};
use stitlab_core::measure::{DirectionalDistribution, HyperplaneMeasure};
use stitlab_core::mecke::Functional;
use thiserror::Error;

use crate::suite::AcceptanceConfig;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { path: path.to_owned(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    pub simulate: Option<SimulateConfig>,
    pub mecke: Option<MeckeConfig>,
    pub acceptance: Option<AcceptanceConfig>,
}

fn default_seed() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Some(s) = &self.simulate {
            s.validate("simulate")?;
        }
        if let Some(m) = &self.mecke {
            m.validate("mecke")?;
        }
        if let Some(a) = &self.acceptance {
            a.validate("acceptance")?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, so formatting and comments in the
    /// source file do not matter.
    pub fn hash(&self) -> String {
        hash_json(self)
    }
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_string(value).expect("configs serialize");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Directions along the coordinate axes with equal weights.
    AxisParallel,
    Isotropic,
    /// Finitely many unit normals (normalized on load) with weights.
    Discrete { directions: Vec<Vec<f64>>, weights: Vec<f64> },
}

impl MeasureSpec {
    pub fn validate(&self, path: &str, d: usize) -> Result<(), ConfigError> {
        if let MeasureSpec::Discrete { directions, weights } = self {
            if directions.len() != weights.len() || directions.is_empty() {
                return Err(field(&format!("{path}.weights"), "need one weight per direction"));
            }
            for (i, v) in directions.iter().enumerate() {
                if v.len() != d {
                    return Err(field(&format!("{path}.directions[{i}]"), format!("expected {d} coordinates")));
                }
            }
        }
        self.build_dyn(path, d).map(|_| ())
    }

    fn build_dyn(&self, path: &str, d: usize) -> Result<(), ConfigError> {
        match d {
            2 => self.build::<2>(path).map(|_| ()),
            3 => self.build::<3>(path).map(|_| ()),
            _ => Err(field(path, "dimension must be 2 or 3")),
        }
    }

    pub fn build<const D: usize>(&self, path: &str) -> Result<HyperplaneMeasure<D>, ConfigError> {
        let dir = match self {
            MeasureSpec::AxisParallel => DirectionalDistribution::axis_parallel(),
            MeasureSpec::Isotropic => DirectionalDistribution::isotropic().map_err(|e| field(path, e.to_string()))?,
            MeasureSpec::Discrete { directions, weights } => {
                let mut atoms = Vec::new();
                for (i, (v, w)) in directions.iter().zip(weights).enumerate() {
                    let p: Point<D> = v
                        .as_slice()
                        .try_into()
                        .map_err(|_| field(&format!("{path}.directions[{i}]"), format!("expected {D} coordinates")))?;
                    atoms.push((p, *w));
                }
                DirectionalDistribution::discrete(atoms).map_err(|e| field(path, e.to_string()))?
            }
        };
        Ok(HyperplaneMeasure::new(dir))
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSpec {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo, lo], hi: vec![hi, hi] }
    }

    pub fn validate(&self, path: &str, d: usize) -> Result<(), ConfigError> {
        if self.lo.len() != d || self.hi.len() != d {
            return Err(field(path, format!("lo and hi need {d} coordinates")));
        }
        for i in 0..d {
            if !(self.lo[i] < self.hi[i]) || !self.lo[i].is_finite() || !self.hi[i].is_finite() {
                return Err(field(&format!("{path}.hi[{i}]"), "must be finite and exceed lo"));
            }
        }
        Ok(())
    }

    pub fn polygon(&self) -> Polygon {
        Polygon::rectangle(self.lo[0], self.lo[1], self.hi[0], self.hi[1]).expect("validated box")
    }

    pub fn polyhedron(&self) -> Polyhedron {
        Polyhedron::cuboid([self.lo[0], self.lo[1], self.lo[2]], [self.hi[0], self.hi[1], self.hi[2]])
            .expect("validated box")
    }

    fn contains(&self, other: &BoxSpec) -> bool {
        (0..self.lo.len()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    pub measure: MeasureSpec,
    pub window: BoxSpec,
    pub t: f64,
    /// `stit-tess/1` JSON destination; stdout if absent.
    pub output: Option<String>,
    /// Optional SVG rendering (planar only).
    pub svg: Option<String>,
}

fn default_dimension() -> usize {
    2
}

pub(crate) fn positive(path: &str, x: f64) -> Result<(), ConfigError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(field(path, "must be positive and finite"));
    }
    Ok(())
}

pub(crate) fn at_least(path: &str, x: usize, min: usize) -> Result<(), ConfigError> {
    if x < min {
        return Err(field(path, format!("must be at least {min}")));
    }
    Ok(())
}

impl SimulateConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if !matches!(self.dimension, 2 | 3) {
            return Err(field(&format!("{path}.dimension"), "must be 2 or 3"));
        }
        if self.svg.is_some() && self.dimension != 2 {
            return Err(field(&format!("{path}.svg"), "SVG output is planar only"));
        }
        self.measure.validate(&format!("{path}.measure"), self.dimension)?;
        self.window.validate(&format!("{path}.window"), self.dimension)?;
        positive(&format!("{path}.t"), self.t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    /// `φ(s) = 1`
    One,
    /// `φ(s) = s`
    Linear,
    /// `φ(s) = e^{−s}`
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureProfile {
    /// `ψ(ℓ) = 0`
    Zero,
    /// `ψ(ℓ) = 1`
    One,
    /// `ψ(ℓ) = ℓ/(1+ℓ)`
    Saturating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalSpec {
    Simple { phi: TimeProfile, psi: MeasureProfile },
    /// Faces with exactly `count` internal vertices at the horizon.
    Nested { count: usize },
}

impl FunctionalSpec {
    pub fn functional(&self) -> Functional {
        match *self {
            FunctionalSpec::Simple { phi, psi } => Functional::Simple {
                phi: match phi {
                    TimeProfile::One => |_| 1.0,
                    TimeProfile::Linear => |s| s,
                    TimeProfile::Decay => |s: f64| (-s).exp(),
                },
                psi: match psi {
                    MeasureProfile::Zero => |_| 0.0,
                    MeasureProfile::One => |_| 1.0,
                    MeasureProfile::Saturating => |l| l / (1.0 + l),
                },
            },
            FunctionalSpec::Nested { count } => Functional::Nested { count },
        }
    }
}

/// Planar two-sided Mecke estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeckeConfig {
    pub measure: MeasureSpec,
    pub window: BoxSpec,
    /// Only divisions of cells inside this box count.
    pub localization: BoxSpec,
    /// Face centres must lie here; defaults to the localization box.
    pub region: Option<BoxSpec>,
    pub horizon: f64,
    pub functional: FunctionalSpec,
    #[serde(default = "default_mecke_reps")]
    pub replications: usize,
    #[serde(default = "default_grid")]
    pub grid_intervals: usize,
    #[serde(default = "default_inner_mc")]
    pub inner_mc: usize,
    pub output: Option<String>,
}

fn default_mecke_reps() -> usize {
    500
}

fn default_grid() -> usize {
    40
}

fn default_inner_mc() -> usize {
    1
}

impl MeckeConfig {
    pub fn validate(&self, path: &str) -> Result<(), ConfigError> {
        self.measure.validate(&format!("{path}.measure"), 2)?;
        self.window.validate(&format!("{path}.window"), 2)?;
        self.localization.validate(&format!("{path}.localization"), 2)?;
        if !self.window.contains(&self.localization) {
            return Err(field(&format!("{path}.localization"), "must lie inside the window"));
        }
        if let Some(r) = &self.region {
            r.validate(&format!("{path}.region"), 2)?;
        }
        positive(&format!("{path}.horizon"), self.horizon)?;
        at_least(&format!("{path}.replications"), self.replications, 2)?;
        at_least(&format!("{path}.grid_intervals"), self.grid_intervals, 1)?;
        at_least(&format!("{path}.inner_mc"), self.inner_mc, 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIM: &str = r#"
master_seed = 7

[simulate]
measure = { kind = "isotropic" }
window = { lo = [0.0, 0.0], hi = [4.0, 4.0] }
t = 1.5
"#;

    #[test]
    fn parses_and_hashes_canonically() {
        let a = ExperimentConfig::from_toml(SIM).unwrap();
        assert_eq!(a.master_seed, 7);
        let s = a.simulate.as_ref().unwrap();
        assert_eq!(s.dimension, 2);
        let reformatted = SIM.replace("t = 1.5", "# horizon\nt   =   1.50");
        assert_eq!(ExperimentConfig::from_toml(&reformatted).unwrap().hash(), a.hash());
        let changed = SIM.replace("t = 1.5", "t = 2.5");
        assert_ne!(ExperimentConfig::from_toml(&changed).unwrap().hash(), a.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = SIM.replace("t = 1.5", "t = 1.5\nhorizon = 2");
        let e = ExperimentConfig::from_toml(&bad).unwrap_err();
        assert!(matches!(e, ConfigError::Parse(ref m) if m.contains("horizon")), "{e}");
    }

    #[test]
    fn reports_field_paths() {
        let bad = SIM.replace("hi = [4.0, 4.0]", "hi = [4.0, -1.0]");
        assert_eq!(ExperimentConfig::from_toml(&bad).unwrap_err().to_string(), "simulate.window.hi[1]: must be finite and exceed lo");
        let bad = SIM.replace("t = 1.5", "t = -1.0");
        assert_eq!(ExperimentConfig::from_toml(&bad).unwrap_err().to_string(), "simulate.t: must be positive and finite");
        let bad = SIM.replace(r#"{ kind = "isotropic" }"#, r#"{ kind = "discrete", directions = [[1.0, 0.0, 0.0]], weights = [1.0] }"#);
        assert_eq!(
            ExperimentConfig::from_toml(&bad).unwrap_err().to_string(),
            "simulate.measure.directions[0]: expected 2 coordinates"
        );
    }

    #[test]
    fn mecke_section() {
        let text = r#"
[mecke]
measure = { kind = "axis-parallel" }
window = { lo = [0.0, 0.0], hi = [10.0, 10.0] }
localization = { lo = [2.0, 2.0], hi = [8.0, 8.0] }
horizon = 1.0
functional = { kind = "simple", phi = "one", psi = "saturating" }
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let m = c.mecke.unwrap();
        assert_eq!(m.replications, 500);
        assert!(matches!(m.functional.functional(), Functional::Simple { .. }));
        let outside = text.replace("hi = [8.0, 8.0]", "hi = [8.0, 18.0]");
        assert_eq!(
            ExperimentConfig::from_toml(&outside).unwrap_err().to_string(),
            "mecke.localization: must lie inside the window"
        );
    }
}
