//! The experiment document read by every subcommand.

use std::path::{Path, PathBuf};

use fedfdp::data::PartitionSpec;
use fedfdp::engine::{Architecture, SyncConfig};
use fedfdp::tradeoff::DEFAULT_GRID_SIZE;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Record metrics every this many rounds (and after the last one).
    #[serde(default = "one")]
    pub metric_every: usize,
    /// Knots of the curves written by `account` and `curve`.
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    /// Write the single-round curve of each client next to the report.
    #[serde(default)]
    pub emit_curves: bool,
    pub sync: SyncConfig,
    pub dataset: DatasetSource,
    pub partition: PartitionSpec,
    #[serde(default)]
    pub model: ModelSpec,
    /// Accountant inputs that replace the ones implied by the data, so that
    /// `account` can run without loading it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accounting: Option<AccountingOverride>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn one() -> usize {
    1
}

fn default_grid() -> usize {
    DEFAULT_GRID_SIZE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSource {
    /// Gaussian clusters, one per class.
    Synthetic {
        num_classes: usize,
        dim: usize,
        per_class_train: usize,
        per_class_test: usize,
        spread: f64,
    },
    /// MNIST-format files.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    #[default]
    Logistic,
    Mlp { hidden: usize },
}

impl ModelSpec {
    pub fn architecture(self, input_dim: usize, num_classes: usize) -> Architecture {
        match self {
            ModelSpec::Logistic => Architecture::Logistic { input_dim, num_classes },
            ModelSpec::Mlp { hidden } => Architecture::Mlp { input_dim, hidden, num_classes },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountingOverride {
    /// Per-client training set size `n`.
    pub dataset_size: usize,
    pub num_clients: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::invalid(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Validation(msg) => CliError::invalid(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that need no data.
    pub fn validate(&self) -> CliResult<()> {
        self.sync.validate()?;
        self.partition.validate()?;
        if self.grid_size < 2 {
            return Err(CliError::invalid(format!("grid_size must be at least 2, got {}", self.grid_size)));
        }
        if self.metric_every == 0 {
            return Err(CliError::invalid("metric_every must be positive"));
        }
        if let DatasetSource::Synthetic { num_classes, dim, per_class_train, per_class_test, spread } = self.dataset {
            if num_classes == 0 || dim == 0 || per_class_train == 0 || per_class_test == 0 {
                return Err(CliError::invalid("synthetic dataset sizes must be positive"));
            }
            if !(spread >= 0.0 && spread.is_finite()) {
                return Err(CliError::invalid(format!("synthetic spread must be finite and >= 0, got {spread}")));
            }
        }
        if let ModelSpec::Mlp { hidden: 0 } = self.model {
            return Err(CliError::invalid("model.hidden must be positive"));
        }
        if let Some(a) = self.accounting {
            if a.dataset_size == 0 || a.num_clients == 0 {
                return Err(CliError::invalid("accounting sizes must be positive"));
            }
        }
        Ok(())
    }
}

/// Request for a single curve file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `G_mu`.
    Gaussian { mu: f64 },
    /// `C_p(G_mu)`.
    Subsample { mu: f64, p: f64 },
    /// `max(G_mu, 1 - alpha - p^2)`.
    Mixture { mu: f64, p: f64 },
}

impl CurveSpec {
    pub fn file_stem(self) -> String {
        match self {
            CurveSpec::Gaussian { mu } => format!("gaussian_mu{mu}"),
            CurveSpec::Subsample { mu, p } => format!("subsample_mu{mu}_p{p}"),
            CurveSpec::Mixture { mu, p } => format!("mixture_mu{mu}_p{p}"),
        }
    }
}
