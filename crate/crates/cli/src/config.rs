//! Experiment configuration: schema, loading and canonical hashing.
//!
//! The native encoding is TOML; a `.json` file with the same structure is
//! accepted too. Unknown keys anywhere are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Shots for sampled energy estimates; 0 keeps everything exact.
    #[serde(default)]
    pub shots: u64,
    /// Attach dense reference values to every task of a run.
    #[serde(default)]
    pub oracle: bool,
    pub problem: Problem,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub mitigation: Option<MitigationConfig>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Where the Hamiltonian (or linear-algebra matrix) comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    /// h Σ Z_i Z_{i+1} + λ Σ X_i on an open chain.
    TransverseIsing { n: usize, h: f64, lambda: f64 },
    /// Lines of `<re> <im> <letters>`, inline or from a file.
    Pauli {
        #[serde(default)]
        terms: Option<String>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
    /// DIMACS CNF, inline or from a file; the Hamiltonian counts violated clauses.
    Dimacs {
        #[serde(default)]
        text: Option<String>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    HardwareEfficient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzConfig {
    pub template: Template,
    pub depth: usize,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            template: Template::HardwareEfficient,
            depth: 1,
        }
    }
}

/// Channel specs such as `depolarizing 0.01`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default)]
    pub single_qubit: Option<String>,
    #[serde(default)]
    pub two_qubit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    /// Pauli string of the conserved parity, required by symmetry stages.
    #[serde(default)]
    pub symmetry: Option<String>,
    #[serde(default = "plus_one")]
    pub sector: i8,
    /// Ordered pipeline.
    pub stages: Vec<StageConfig>,
}

fn plus_one() -> i8 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyModeConfig {
    Postselect,
    Postprocess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StageConfig {
    Boost {
        factors: Vec<f64>,
    },
    QuasiProbability {
        #[serde(default)]
        partial: bool,
    },
    Symmetry {
        mode: VerifyModeConfig,
    },
    Richardson,
    Linear,
    Exponential {
        mean_errors: f64,
    },
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvolveMode {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethodConfig {
    Overlap,
    Ssvqe,
    SubspaceExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    Multiply,
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Locality {
    #[default]
    Global,
    Local,
}

fn default_iters() -> usize {
    2000
}

fn default_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Task {
    Vqe {
        #[serde(default)]
        restarts: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
        #[serde(default = "default_step")]
        step_size: f64,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    Qaoa {
        depth: usize,
        #[serde(default)]
        restarts: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
        #[serde(default = "default_step")]
        step_size: f64,
        /// Warm-started schedule from the mixer to the problem Hamiltonian.
        #[serde(default)]
        morphing_steps: Option<usize>,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    Spectrum {
        method: SpectrumMethodConfig,
        /// Highest level index requested (0 = ground only).
        levels: usize,
        #[serde(default)]
        restarts: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
        #[serde(default = "default_step")]
        step_size: f64,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    Evolve {
        mode: EvolveMode,
        time: f64,
        dt: f64,
        #[serde(default)]
        residual_budget: Option<f64>,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
    Gibbs {
        tau: f64,
        dt: f64,
    },
    LinearAlgebra {
        operation: Operation,
        #[serde(default)]
        locality: Locality,
        /// Basis index of |v₀⟩; the uniform superposition when absent.
        #[serde(default)]
        v0_index: Option<usize>,
        #[serde(default)]
        restarts: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
        #[serde(default = "default_step")]
        step_size: f64,
        #[serde(default)]
        init: Option<Vec<f64>>,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Vqe { .. } => "vqe",
            Task::Qaoa { .. } => "qaoa",
            Task::Spectrum { .. } => "spectrum",
            Task::Evolve { .. } => "evolve",
            Task::Gibbs { .. } => "gibbs",
            Task::LinearAlgebra { .. } => "linear-algebra",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

/// A parsed config plus the contents of every file it references.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub path: PathBuf,
    /// Problem text, inline or read from the referenced file.
    pub problem_text: Option<String>,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let config = parse(path, &text)?;
        Self::resolve(config, path)
    }

    pub fn resolve(config: ExperimentConfig, path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or(Path::new("."));
        let inline_or_file = |inline: &Option<String>, file: &Option<PathBuf>, what: &str| {
            match (inline, file) {
                (Some(t), None) => Ok(t.clone()),
                (None, Some(f)) => read(&base.join(f)),
                _ => Err(CliError::Config {
                    path: path.to_path_buf(),
                    message: format!("problem: give exactly one of inline {what} or `file`"),
                }),
            }
        };
        let problem_text = match &config.problem {
            Problem::TransverseIsing { .. } => None,
            Problem::Pauli { terms, file } => Some(inline_or_file(terms, file, "`terms`")?),
            Problem::Dimacs { text, file } => Some(inline_or_file(text, file, "`text`")?),
        };
        Ok(Self {
            config,
            path: path.to_path_buf(),
            problem_text,
        })
    }

    /// SHA-256 of the canonical JSON form: object keys sorted, output block
    /// dropped, referenced files inlined.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(&self.config).expect("config serialises");
        if let serde_json::Value::Object(map) = &mut value {
            map.remove("output");
            if let Some(text) = &self.problem_text {
                map.insert("problem_text".into(), serde_json::Value::String(text.clone()));
            }
        }
        let canonical = canonical_json(&value);
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse by extension: `.json` as JSON, anything else as TOML.
pub fn parse(path: &Path, text: &str) -> Result<ExperimentConfig> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(text).map_err(|e| e.to_string())
    } else {
        toml::from_str(text).map_err(|e| e.to_string())
    };
    parsed.map_err(|message| CliError::Config {
        path: path.to_path_buf(),
        message: message.trim_end().to_string(),
    })
}

/// Compact JSON with keys sorted at every level, independent of map order.
fn canonical_json(value: &serde_json::Value) -> String {
    use serde_json::Value;
    match value {
        Value::Object(map) => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            let body: Vec<String> = sorted
                .into_iter()
                .map(|(k, v)| format!("{}:{}", Value::String(k.clone()), canonical_json(v)))
                .collect();
            format!("{{{}}}", body.join(","))
        }
        Value::Array(items) => {
            let body: Vec<String> = items.iter().map(canonical_json).collect();
            format!("[{}]", body.join(","))
        }
        other => other.to_string(),
    }
}
