//! Federated training engine.

pub mod config;
pub mod federation;
pub mod model;
pub mod private;

pub use config::{AdamParams, BatchMode, HelperMap, LrSchedule, OptimizerKind, SyncConfig};
pub use federation::{
    aggregate_global, compute_helper, metrics_csv, poisson_sample_clients, run_federation,
    run_sync_round, ClientState, FederationRun, FederationState, RoundMetrics, RoundOutcome,
    METRICS_HEADER,
};
pub use model::{Architecture, ModelVector};
pub use private::{
    clip_gradient, draw_batch, local_private_training, noisy_step, LocalOptimizer, NoObserver,
    StepObserver,
};
