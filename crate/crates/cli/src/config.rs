//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::PathBuf;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::Spanned;

use crate::error::CliError;
use crate::presets::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Single,
    Sweep,
    Geometry,
}

/// A tuning parameter that is either given or left to the empirical rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Param {
    #[default]
    Auto,
    Value(f64),
}

impl Param {
    pub fn resolve(self, auto: f64) -> f64 {
        match self {
            Param::Auto => auto,
            Param::Value(v) => v,
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Param::Auto => s.serialize_str("auto"),
            Param::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Param;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Param, E> {
                Ok(Param::Value(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Param, E> {
                Ok(Param::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Param, E> {
                if v == "auto" {
                    Ok(Param::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A function descriptor together with where it appeared in the config text.
pub type Desc = Spanned<String>;

fn desc(s: &str) -> Desc {
    Spanned::new(0..0, s.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub n_cells: usize,
    pub n_steps: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub source: Desc,
    pub initial_value: Desc,
    pub p_true: Desc,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            n_cells: 100,
            n_steps: 100,
            x_min: 0.0,
            x_max: 1.0,
            t_max: 1.0,
            source: desc("linear_xt"),
            initial_value: desc("one"),
            p_true: desc("sine_bump"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObservationConfig {
    pub omega: Vec<[f64; 2]>,
    pub delta0: f64,
    pub seed: u64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        Self {
            omega: vec![[0.0, 0.1], [0.9, 1.0]],
            delta0: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationBlock {
    pub k: Param,
    pub alpha: Param,
    pub epsilon: Param,
    pub max_iter: usize,
    pub clamp: bool,
    pub kappa1: f64,
    pub m1: f64,
    pub p0: Desc,
    /// Boundary values of `p`; taken from `p_true` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<[f64; 2]>,
}

impl Default for IterationBlock {
    fn default() -> Self {
        Self {
            k: Param::Auto,
            alpha: Param::Auto,
            epsilon: Param::Auto,
            max_iter: wavecoeff::reconstruct::DEFAULT_MAX_ITER,
            clamp: true,
            kappa1: 0.1,
            m1: 100.0,
            p0: desc("one"),
            boundary: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write wall-clock times into sweep.csv; `false` writes `-` so reruns
    /// are byte-identical.
    pub timings: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            timings: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    /// Center `x₀` of `d(x) = (x − x₀)²`, unless `d` is given.
    pub center: f64,
    /// Sampled weight profile, overriding `center`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Desc>,
    pub beta: f64,
    pub lambda: f64,
    pub delta: f64,
    /// Observation time; the problem's `t_max` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            center: -0.1,
            d: None,
            beta: 0.9,
            lambda: 1.0,
            delta: 0.0,
            t_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub omega: Vec<[f64; 2]>,
    pub delta0: f64,
    #[serde(default)]
    pub k: Param,
    #[serde(default)]
    pub alpha: Param,
    #[serde(default)]
    pub epsilon: Param,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_true: Option<Desc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub problem: ProblemConfig,
    pub observation: ObservationConfig,
    pub iteration: IterationBlock,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(rename = "case", skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<CaseConfig>,
}

/// A parsed configuration and the text its spans point into.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
}

impl LoadedConfig {
    /// 1-based line of a descriptor, if it came from the text.
    pub fn line_of(&self, d: &Desc) -> Option<usize> {
        let span = d.span();
        (span.end > span.start && span.start <= self.source.len())
            .then(|| self.source[..span.start].matches('\n').count() + 1)
    }

    pub fn describe(&self, d: &Desc, key: &str) -> String {
        match self.line_of(d) {
            Some(line) => format!("`{key}` (line {line})"),
            None => format!("`{key}`"),
        }
    }
}

pub fn parse(text: &str) -> Result<LoadedConfig, CliError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(LoadedConfig {
        config,
        source: text.to_string(),
    })
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Builds the configuration from an optional preset and an optional file;
/// tables in the file are merged over the preset.
pub fn load(preset: Option<Preset>, file_text: Option<&str>) -> Result<LoadedConfig, CliError> {
    match (preset, file_text) {
        (None, None) => Err(CliError::Config("a config file or --preset is required".into())),
        (None, Some(text)) => parse(text),
        (Some(p), None) => parse(p.text()),
        (Some(p), Some(text)) => {
            let to_table = |t: &str| t.parse::<toml::Table>().map_err(|e| CliError::Config(e.to_string()));
            let mut base = to_table(p.text())?;
            merge(&mut base, to_table(text)?);
            let merged = toml::to_string(&base).map_err(|e| CliError::Config(e.to_string()))?;
            parse(&merged)
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}
