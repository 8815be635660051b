use fedfdp::accountant::ClientPrivacyParams;
use fedfdp::data::PartitionSpec;
use fedfdp::engine::{Architecture, BatchMode, HelperMap, LrSchedule, OptimizerKind, RoundMetrics, SyncConfig};
use fedfdp::tradeoff::GaussianGuarantee;
use serde_json::json;

#[test]
fn sync_config_fills_defaults() {
    let cfg: SyncConfig = serde_json::from_value(json!({
        "sync_probability": 0.5,
        "rounds": 10,
        "local_iters": 38,
        "eta": 1.0,
        "helper_alpha": 0.1,
        "batch_size": 16,
        "noise_scale": 1.0,
        "clip_norm": 1.0
    }))
    .unwrap();
    assert_eq!(cfg.helper_map, HelperMap::Interpolation);
    assert_eq!(cfg.optimizer, OptimizerKind::NoisySgd);
    assert_eq!(cfg.batch_mode, BatchMode::PoissonPerExample);
    assert_eq!(cfg.lr, LrSchedule { base_rate: 0.1, decay_factor: 1.0, decay_interval: 0 });
    assert_eq!((cfg.adam.beta1, cfg.adam.beta2, cfg.adam.epsilon), (0.9, 0.999, 1e-8));
    assert!(cfg.client_alphas.is_empty());
    cfg.validate().unwrap();

    let back: SyncConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn enum_spellings() {
    assert_eq!(serde_json::to_value(BatchMode::FixedSizeUniform).unwrap(), json!("fixed-size-uniform"));
    assert_eq!(serde_json::to_value(OptimizerKind::NoisyAdam).unwrap(), json!("noisy-adam"));
    assert_eq!(serde_json::to_value(HelperMap::Identity).unwrap(), json!("identity"));
    assert!(serde_json::from_value::<OptimizerKind>(json!("adam")).is_err());
}

#[test]
fn partition_spec_is_tagged_by_scheme() {
    let spec: PartitionSpec = serde_json::from_value(json!({
        "scheme": "dirichlet", "num_clients": 100, "beta": 0.5, "n_train": 500, "n_test": 200
    }))
    .unwrap();
    assert_eq!(
        spec,
        PartitionSpec::Dirichlet { num_clients: 100, beta: 0.5, n_train: 500, n_test: 200, pool_frequencies: false }
    );
    let shard = PartitionSpec::Shard { num_clients: 100, total_shards: 400, shards_per_client: 4, test_per_client: 200 };
    let v = serde_json::to_value(&shard).unwrap();
    assert_eq!(v["scheme"], "shard");
    assert_eq!(serde_json::from_value::<PartitionSpec>(v).unwrap(), shard);
    assert!(serde_json::from_value::<PartitionSpec>(json!({"scheme": "random", "num_clients": 3})).is_err());
}

#[test]
fn architecture_and_guarantee_shapes() {
    let arch = Architecture::Mlp { input_dim: 784, hidden: 64, num_classes: 10 };
    let v = serde_json::to_value(arch).unwrap();
    assert_eq!(v, json!({"kind": "mlp", "input_dim": 784, "hidden": 64, "num_classes": 10}));
    assert_eq!(serde_json::to_value(GaussianGuarantee::new(2.5).unwrap()).unwrap(), json!(2.5));
}

#[test]
fn privacy_params_and_metrics_round_trip() {
    let p = ClientPrivacyParams {
        batch_size: 16,
        dataset_size: 600,
        noise_scale: 0.9,
        clip_norm: 1.0,
        local_iters: 38,
        sync_rounds: 83,
        client_sampling_p: 1.0,
    };
    let back: ClientPrivacyParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
    let m = RoundMetrics { round: 3, avg_personalized_acc: 0.5, global_acc: 0.25, avg_train_loss: 1.5, clients_sampled: 4 };
    assert_eq!(serde_json::from_value::<RoundMetrics>(serde_json::to_value(m).unwrap()).unwrap(), m);
}
