//! Subcommands of the `fedfdp` binary, usable as a library.

pub mod config;
pub mod error;
pub mod report;

use std::path::{Path, PathBuf};

use fedfdp::accountant::ClientPrivacyParams;
use fedfdp::data::{load_idx_dataset, partition, synth_train_test, ClientSplit, LabeledDataset, Partition, PartitionSpec};
use fedfdp::engine::{metrics_csv, run_federation, FederationState, ModelVector, RoundMetrics};
use fedfdp::rng::{substream, Purpose, SERVER};
use fedfdp::tradeoff::{mixture_lower_bound, subsample_operator, TradeoffCurve};
use serde::{Deserialize, Serialize};

pub use config::{AccountingOverride, CurveSpec, DatasetSource, ExperimentConfig, ModelSpec};
pub use error::{CliError, CliResult, EXIT_RUNTIME, EXIT_VALIDATION};
pub use report::{build_report, ClientEntry, PrivacyReportDoc};

use error::write_file;

pub const REPORT_FILE: &str = "privacy_report.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const MANIFEST_FILE: &str = "partition.json";
pub const CHECKPOINT_DIR: &str = "checkpoints";

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
    }
}

/// Auditable record of a partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionManifest {
    pub seed: u64,
    pub spec: PartitionSpec,
    pub train_pool_size: usize,
    pub test_pool_size: usize,
    /// Test examples are drawn per client, so two clients may share one.
    pub test_overlap_allowed: bool,
    pub clients: Vec<ClientSplit>,
}

pub fn load_pools(cfg: &ExperimentConfig) -> CliResult<(LabeledDataset, LabeledDataset)> {
    match &cfg.dataset {
        &DatasetSource::Synthetic { num_classes, dim, per_class_train, per_class_test, spread } => {
            let mut rng = substream(cfg.seed, 0, SERVER, Purpose::Synthetic);
            Ok(synth_train_test(num_classes, dim, per_class_train, per_class_test, spread, &mut rng)?)
        }
        DatasetSource::Idx { train_images, train_labels, test_images, test_labels } => {
            let train = load_idx_dataset(train_images, train_labels)?;
            let test = load_idx_dataset(test_images, test_labels)?;
            if train.dim() != test.dim() {
                return Err(CliError::invalid(format!(
                    "train images have {} pixels, test images {}",
                    train.dim(),
                    test.dim()
                )));
            }
            Ok((train, test))
        }
    }
}

fn make_partition(cfg: &ExperimentConfig, train: &LabeledDataset, test: &LabeledDataset) -> CliResult<Partition> {
    let mut rng = substream(cfg.seed, 0, SERVER, Purpose::Partition);
    Ok(partition(train, test, &cfg.partition, &mut rng)?)
}

fn privacy_params(cfg: &ExperimentConfig, dataset_sizes: &[usize]) -> Vec<ClientPrivacyParams> {
    let s = &cfg.sync;
    dataset_sizes
        .iter()
        .map(|&n| ClientPrivacyParams {
            batch_size: s.batch_size,
            dataset_size: n,
            noise_scale: s.noise_scale,
            clip_norm: s.clip_norm,
            local_iters: s.local_iters,
            sync_rounds: s.rounds,
            client_sampling_p: s.sync_probability,
        })
        .collect()
}

/// Per-client training set sizes the accountant should use.
fn accounting_sizes(cfg: &ExperimentConfig) -> CliResult<Vec<usize>> {
    if let Some(AccountingOverride { dataset_size, num_clients }) = cfg.accounting {
        return Ok(vec![dataset_size; num_clients]);
    }
    let pool = match cfg.dataset {
        DatasetSource::Synthetic { num_classes, per_class_train, .. } => num_classes * per_class_train,
        DatasetSource::Idx { .. } => load_pools(cfg)?.0.len(),
    };
    let n = cfg.partition.train_size(pool)?;
    Ok(vec![n; cfg.partition.num_clients()])
}

/// What `account` produced.
#[derive(Debug, Clone)]
pub struct AccountOutput {
    pub report: PrivacyReportDoc,
    pub report_path: PathBuf,
}

pub fn cmd_account(cfg: &ExperimentConfig) -> CliResult<AccountOutput> {
    cfg.validate()?;
    let params = privacy_params(cfg, &accounting_sizes(cfg)?);
    let report = build_report(&params, cfg.emit_curves.then_some(cfg.grid_size), &cfg.output_dir)?;
    let report_path = write_file(&cfg.output_dir.join(REPORT_FILE), &report.to_json())?;
    Ok(AccountOutput { report, report_path })
}

/// What `simulate` produced.
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub metrics: Vec<RoundMetrics>,
    pub report: PrivacyReportDoc,
    pub metrics_path: PathBuf,
    pub report_path: PathBuf,
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> CliResult<SimulateOutput> {
    cfg.validate()?;
    let (train, test) = load_pools(cfg)?;
    let split = make_partition(cfg, &train, &test)?;
    let shards = split.materialize(&train, &test);
    let sizes: Vec<usize> = shards.iter().map(|(tr, _)| tr.len()).collect();
    cfg.sync.validate_for_shards(&sizes)?;

    let params = privacy_params(cfg, &sizes);
    let report = build_report(&params, cfg.emit_curves.then_some(cfg.grid_size), &cfg.output_dir)?;

    let num_classes = train.num_classes().max(test.num_classes());
    let arch = cfg.model.architecture(train.dim(), num_classes);
    let init = ModelVector::init(arch, &mut substream(cfg.seed, 0, SERVER, Purpose::ModelInit));
    let state = FederationState::new(init, shards, cfg.seed)?;
    let run = run_federation(state, &cfg.sync, cfg.metric_every)?;

    let out = &cfg.output_dir;
    let metrics_path = write_file(&out.join(METRICS_FILE), &metrics_csv(&run.metrics))?;
    let report_path = write_file(&out.join(REPORT_FILE), &report.to_json())?;
    write_manifest(cfg, &split, train.len(), test.len())?;
    let ckpt = out.join(CHECKPOINT_DIR);
    write_file(&ckpt.join("global.txt"), &run.state.global_model.to_checkpoint())?;
    for (i, c) in run.state.clients.iter().enumerate() {
        write_file(&ckpt.join(format!("client_{i}.txt")), &c.helper_model.to_checkpoint())?;
    }
    Ok(SimulateOutput { metrics: run.metrics, report, metrics_path, report_path })
}

fn write_manifest(cfg: &ExperimentConfig, split: &Partition, train_len: usize, test_len: usize) -> CliResult<PathBuf> {
    let manifest = PartitionManifest {
        seed: cfg.seed,
        spec: cfg.partition.clone(),
        train_pool_size: train_len,
        test_pool_size: test_len,
        test_overlap_allowed: true,
        clients: split.clients.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&cfg.output_dir.join(MANIFEST_FILE), &text)
}

pub fn cmd_partition(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    cfg.validate()?;
    let (train, test) = load_pools(cfg)?;
    let split = make_partition(cfg, &train, &test)?;
    write_manifest(cfg, &split, train.len(), test.len())
}

pub fn build_curve(spec: CurveSpec, grid_size: usize) -> CliResult<TradeoffCurve> {
    let curve = match spec {
        CurveSpec::Gaussian { mu } => TradeoffCurve::gaussian(mu, grid_size)?,
        CurveSpec::Subsample { mu, p } => subsample_operator(&TradeoffCurve::gaussian(mu, grid_size)?, p)?,
        CurveSpec::Mixture { mu, p } => mixture_lower_bound(&TradeoffCurve::gaussian(mu, grid_size)?, p)?,
    };
    Ok(curve)
}

/// Writes `<out_dir>/<stem>.txt` and returns its path.
pub fn cmd_curve(spec: CurveSpec, grid_size: usize, out_dir: &Path) -> CliResult<PathBuf> {
    let curve = build_curve(spec, grid_size)?;
    write_file(&out_dir.join(format!("{}.txt", spec.file_stem())), &curve.to_text())
}
