#![allow(dead_code)]

pub mod fedavg_oracle;
pub mod normal_oracle;

use fedfdp::data::{shard_partition, synth_train_test, LabeledDataset, PartitionSpec};
use fedfdp::engine::{
    run_federation, AdamParams, Architecture, BatchMode, FederationState, HelperMap, LrSchedule,
    ModelVector, OptimizerKind, SyncConfig,
};
use fedfdp::rng::{substream, Purpose, SERVER};

/// Shards of 30 examples over 6 classes with per-class sizes
/// (120, 120, 90, 90, 90, 90): 20 single-class shards, 2 per client, so each
/// of the 10 clients sees at most 2 of the 6 classes.
pub fn heterogeneous_task(seed: u64, spread: f64) -> Vec<(LabeledDataset, LabeledDataset)> {
    let mut rng = substream(seed, 0, SERVER, Purpose::Synthetic);
    let (train, test): (LabeledDataset, LabeledDataset) =
        synth_train_test(6, 3, 120, 100, spread, &mut rng).unwrap();
    let sizes = [120, 120, 90, 90, 90, 90];
    let by_class = train.indices_by_class();
    let keep: Vec<usize> = by_class
        .iter()
        .zip(sizes)
        .flat_map(|(idx, n)| idx[..n].to_vec())
        .collect();
    let train = train.subset(&keep);
    let spec = PartitionSpec::Shard {
        num_clients: 10,
        total_shards: 20,
        shards_per_client: 2,
        test_per_client: 60,
    };
    let mut prng = substream(seed, 0, SERVER, Purpose::Partition);
    shard_partition(&train, &test, &spec, &mut prng)
        .unwrap()
        .materialize(&train, &test)
}

/// Class-mean distance from the origin for the desk task.
pub const DESK_SPREAD: f64 = 2.5;

pub fn desk_config(sigma: f64) -> SyncConfig {
    SyncConfig {
        sync_probability: 0.5,
        rounds: 60,
        local_iters: 10,
        eta: 1.0,
        helper_alpha: 0.1,
        client_alphas: vec![],
        helper_map: HelperMap::Interpolation,
        optimizer: OptimizerKind::NoisyAdam,
        lr: LrSchedule::constant(0.05),
        adam: AdamParams::default(),
        batch_size: 10,
        noise_scale: sigma,
        clip_norm: 1.0,
        batch_mode: BatchMode::PoissonPerExample,
    }
}

/// Final (personalized, global) mean test accuracy.
pub fn desk_run(seed: u64, sigma: f64) -> (f64, f64) {
    let shards = heterogeneous_task(seed, DESK_SPREAD);
    let arch = Architecture::Logistic {
        input_dim: 3,
        num_classes: 6,
    };
    let state = FederationState::new(ModelVector::zeros(arch), shards, seed).unwrap();
    let run = run_federation(state, &desk_config(sigma), 1000).unwrap();
    let last = run.metrics.last().unwrap();
    (last.avg_personalized_acc, last.global_acc)
}

/// The full-participation, noise-free, unclipped setting in which the
/// engine must coincide with plain FedAvg, plus the oracle's view of it.
pub fn fedavg_case(
    seed: u64,
) -> (
    SyncConfig,
    FederationState,
    fedavg_oracle::FedAvgSetup,
    Vec<fedavg_oracle::Shard>,
) {
    use fedfdp::data::iid_partition;
    let (dim, classes, clients) = (4, 3, 10);
    let mut rng = substream(seed, 0, SERVER, Purpose::Synthetic);
    let pool: LabeledDataset =
        fedfdp::data::synth_dataset(classes, dim, 70, 1.5, &mut rng).unwrap();
    let spec = PartitionSpec::Iid {
        num_clients: clients,
        n_train: 20,
        n_test: 10,
    };
    let mut prng = substream(seed, 0, SERVER, Purpose::Partition);
    let shards = iid_partition(&pool, &pool, &spec, &mut prng)
        .unwrap()
        .materialize(&pool, &pool);
    assert_eq!(shards.iter().map(|s| s.0.len()).sum::<usize>(), 200);

    let cfg = SyncConfig {
        sync_probability: 1.0,
        rounds: 12,
        local_iters: 5,
        eta: 1.0,
        helper_alpha: 1.0,
        client_alphas: vec![],
        helper_map: HelperMap::Identity,
        optimizer: OptimizerKind::NoisySgd,
        lr: LrSchedule {
            base_rate: 0.8,
            decay_factor: 0.9,
            decay_interval: 7,
        },
        adam: AdamParams::default(),
        batch_size: 5,
        noise_scale: 0.0,
        clip_norm: f64::INFINITY,
        batch_mode: BatchMode::PoissonPerExample,
    };
    let setup = fedavg_oracle::FedAvgSetup {
        dim,
        classes,
        rounds: cfg.rounds,
        local_iters: cfg.local_iters,
        batch_size: cfg.batch_size,
        base_rate: 0.8,
        decay_factor: 0.9,
        decay_interval: 7,
        root_seed: seed,
    };
    let oracle_shards = shards
        .iter()
        .map(|(train, _)| fedavg_oracle::Shard {
            x: (0..train.len()).map(|i| train.row(i).to_vec()).collect(),
            y: train.labels().to_vec(),
        })
        .collect();
    let arch = Architecture::Logistic {
        input_dim: dim,
        num_classes: classes,
    };
    let state = FederationState::new(ModelVector::zeros(arch), shards, seed).unwrap();
    (cfg, state, setup, oracle_shards)
}

/// Largest per-coordinate gap between the engine's and the oracle's global
/// weights over a whole run.
pub fn fedavg_gap(seed: u64) -> f64 {
    let (cfg, mut state, setup, shards) = fedavg_case(seed);
    let expected = fedavg_oracle::fedavg_trajectory(&setup, &shards);
    let mut worst: f64 = 0.0;
    for want in &expected {
        fedfdp::engine::run_sync_round(&mut state, &cfg).unwrap();
        for (a, b) in state.global_model.weights().iter().zip(want) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

/// A pool of `per_class` one-feature examples for each of `classes` labels,
/// in class-major order.
pub fn label_pool(per_class: usize, classes: usize) -> LabeledDataset {
    let labels: Vec<usize> = (0..classes)
        .flat_map(|c| std::iter::repeat(c).take(per_class))
        .collect();
    let features = (0..labels.len())
        .map(|i| (i % 251) as f64 / 250.0)
        .collect();
    LabeledDataset::new(features, 1, labels, classes).unwrap()
}

/// Distinct train labels per client.
pub fn labels_per_client(p: &fedfdp::data::Partition, pool: &LabeledDataset) -> Vec<usize> {
    p.clients
        .iter()
        .map(|c| {
            let mut seen: Vec<usize> = c.train.iter().map(|&i| pool.label(i)).collect();
            seen.sort_unstable();
            seen.dedup();
            seen.len()
        })
        .collect()
}

/// Mean label TV over `seeds` dirichlet partitions of a 10-class, 60,000
/// example pool into 50 clients of 500.
pub fn mean_tv_over_seeds(beta: f64, seeds: u64) -> f64 {
    use fedfdp::data::{dirichlet_partition, mean_label_tv};
    let train = label_pool(6000, 10);
    let test = label_pool(1000, 10);
    let spec = PartitionSpec::Dirichlet {
        num_clients: 50,
        beta,
        n_train: 500,
        n_test: 200,
        pool_frequencies: false,
    };
    (0..seeds)
        .map(|s| {
            let mut rng = substream(s, 0, SERVER, Purpose::Partition);
            mean_label_tv(
                &dirichlet_partition(&train, &test, &spec, &mut rng).unwrap(),
                &train,
            )
        })
        .sum::<f64>()
        / seeds as f64
}
