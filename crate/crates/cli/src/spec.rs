use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

/// Top-level experiment file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: String,
    #[serde(default = "empty_object")]
    pub params: Value,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// File stem for the CSV and SVG outputs; defaults to the command name.
    pub output: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))?;
        if let Some(stem) = &spec.output {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(CliError::Spec(format!("output stem {stem:?} must be a plain file name")));
            }
        }
        Ok(spec)
    }

    pub fn params<T: for<'de> Deserialize<'de>>(&self) -> Result<T, CliError> {
        serde_json::from_value(self.params.clone())
            .map_err(|e| CliError::Spec(format!("params for {}: {e}", self.command)))
    }

    pub fn stem(&self) -> &str {
        self.output.as_deref().unwrap_or(&self.command)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FiducialSpec {
    #[default]
    Gaussian,
    Fock {
        n: usize,
    },
    Squeezed {
        r: f64,
        theta: f64,
    },
    Frequency {
        omega: f64,
    },
    Displaced {
        p: f64,
        q: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { p: [-2.0, 2.0], q: [-2.0, 2.0], n: 21 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_dim() -> usize {
    64
}

fn one() -> f64 {
    1.0
}

macro_rules! space_fields {
    ($(#[$m:meta])* pub struct $name:ident { $($body:tt)* }) => {
        $(#[$m])*
        pub struct $name {
            #[serde(default = "default_dim")]
            pub dim: usize,
            #[serde(default = "one")]
            pub hbar: f64,
            #[serde(default = "one")]
            pub omega: f64,
            $($body)*
        }
    };
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct QuantizeParams {
        pub symbol: String,
        #[serde(default)]
        pub fiducial: FiducialSpec,
        /// Leading block to write; defaults to the trusted block.
        pub rows: Option<usize>,
    }
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct SpectrumParams {
        pub symbol: String,
        #[serde(default)]
        pub fiducial: FiducialSpec,
        pub levels: Option<usize>,
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Upper,
    Lower,
    Sandwich,
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct SymbolsParams {
        pub symbol: String,
        pub kind: SymbolKind,
        #[serde(default)]
        pub grid: GridSpec,
    }
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct MetricParams {
        #[serde(default)]
        pub fiducial: FiducialSpec,
        #[serde(default)]
        pub grid: GridSpec,
        #[serde(default = "cartesian")]
        pub chart: String,
    }
}

fn cartesian() -> String {
    "cartesian".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartParams {
    pub map: String,
    pub points: Vec<[f64; 2]>,
    pub symbol: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohrParams {
    pub symbol: String,
    pub n_max: usize,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "cartesian")]
    pub chart: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub symbol: String,
    pub time: f64,
    pub q_start: f64,
    pub q_end: f64,
    pub slices: OneOrMany<usize>,
    #[serde(default = "one")]
    pub hbar: f64,
    pub tail_threshold: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorSpec {
    #[default]
    Marginal,
    Plain,
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct DkParams {
        pub symbol: String,
        pub nu: OneOrMany<f64>,
        pub time: f64,
        pub from: [f64; 2],
        pub to: [f64; 2],
        #[serde(default = "default_samples")]
        pub samples: usize,
        #[serde(default = "default_steps")]
        pub steps: usize,
        #[serde(default = "default_chunk")]
        pub chunk: usize,
        #[serde(default)]
        pub estimator: EstimatorSpec,
        pub gauge: Option<String>,
        #[serde(default)]
        pub allow_non_semibounded: bool,
        pub target_rel_stderr: Option<f64>,
    }
}

fn default_samples() -> usize {
    100_000
}

fn default_steps() -> usize {
    256
}

fn default_chunk() -> usize {
    4096
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinParams {
    pub spin: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "height")]
    pub symbol: String,
}

fn height() -> String {
    "n3".into()
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionTarget {
    Plane,
    Sphere,
}

space_fields! {
    #[derive(Debug, Clone, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct ResolutionParams {
        pub target: ResolutionTarget,
        #[serde(default)]
        pub fiducial: FiducialSpec,
        /// Half-width of the square rule; the default rule is used when absent.
        pub radius: Option<f64>,
        pub nodes: Option<OneOrMany<usize>>,
        pub spin: Option<f64>,
    }
}
