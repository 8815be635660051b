//! The synchronization protocol: Poisson client sampling, parallel private
//! local training, server aggregation and helper-model updates.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{HelperMap, SyncConfig};
use super::model::ModelVector;
use super::private::{local_private_training, NoObserver};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::{substream, Purpose, SERVER};
use crate::scalar::Real;

/// Header of the per-round metrics CSV.
pub const METRICS_HEADER: &str =
    "round,avg_personalized_acc,global_acc,avg_train_loss,clients_sampled";

/// Clients included independently with probability `p`; may be empty.
pub fn poisson_sample_clients<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Vec<usize> {
    (0..m).filter(|_| rng.random::<f64>() < p).collect()
}

/// `(1 - eta) global + eta * mean(locals)`.
pub fn aggregate_global<T: Real>(
    global: &ModelVector<T>,
    locals: &[&ModelVector<T>],
    eta: T,
) -> Result<ModelVector<T>> {
    if locals.is_empty() {
        return Err(Error::invalid(
            "locals",
            "cannot aggregate an empty set of models",
        ));
    }
    let dim = global.dim();
    if let Some(bad) = locals.iter().find(|l| l.dim() != dim) {
        return Err(Error::Shape {
            context: "aggregate_global",
            expected: dim,
            actual: bad.dim(),
        });
    }
    // running mean: exact when every local model is the same
    let mut mean = locals[0].weights().to_vec();
    for (k, local) in locals.iter().enumerate().skip(1) {
        let inv = T::one() / T::lit((k + 1) as f64);
        for (m, &w) in mean.iter_mut().zip(local.weights()) {
            *m += (w - *m) * inv;
        }
    }
    let keep = T::one() - eta;
    let mut next = global.clone();
    for (g, m) in next.weights_mut().iter_mut().zip(mean) {
        *g = keep * *g + eta * m;
    }
    Ok(next)
}

/// `(1 - alpha) local + alpha global` for interpolation; the global model
/// verbatim for the identity map.
pub fn compute_helper<T: Real>(
    global: &ModelVector<T>,
    local: &ModelVector<T>,
    alpha: T,
    map: HelperMap,
) -> ModelVector<T> {
    match map {
        HelperMap::Identity => global.clone(),
        HelperMap::Interpolation => {
            let mut h = local.clone();
            let keep = T::one() - alpha;
            for (w, &g) in h.weights_mut().iter_mut().zip(global.weights()) {
                *w = keep * *w + alpha * g;
            }
            h
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientState<T: Real = f64> {
    /// Last private model `w~(i)` the client produced.
    pub local_model: ModelVector<T>,
    /// Helper model `h~(i)` last pushed by the server; the client's
    /// personalized model.
    pub helper_model: ModelVector<T>,
    pub train: LabeledDataset<T>,
    pub test: LabeledDataset<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationState<T: Real = f64> {
    pub global_model: ModelVector<T>,
    pub clients: Vec<ClientState<T>>,
    /// Rounds completed so far.
    pub round: usize,
    pub root_seed: u64,
}

impl<T: Real> FederationState<T> {
    /// Every model starts at `init`.
    pub fn new(
        init: ModelVector<T>,
        shards: Vec<(LabeledDataset<T>, LabeledDataset<T>)>,
        root_seed: u64,
    ) -> Result<Self> {
        if shards.is_empty() {
            return Err(Error::invalid("clients", "need at least one client"));
        }
        let input_dim = init.architecture().input_dim();
        let mut clients = Vec::with_capacity(shards.len());
        for (train, test) in shards {
            for d in [&train, &test] {
                if d.dim() != input_dim {
                    return Err(Error::Shape {
                        context: "client shard features",
                        expected: input_dim,
                        actual: d.dim(),
                    });
                }
            }
            clients.push(ClientState {
                local_model: init.clone(),
                helper_model: init.clone(),
                train,
                test,
            });
        }
        Ok(Self {
            global_model: init,
            clients,
            round: 0,
            root_seed,
        })
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    /// Mean over clients of each one's personalized model on its own test
    /// shard, and of the global model on the same shards.
    pub fn evaluate(&self) -> Result<(f64, f64, f64)> {
        let m = self.clients.len() as f64;
        let (mut personal, mut global, mut loss) = (0.0, 0.0, 0.0);
        for c in &self.clients {
            personal += c.helper_model.accuracy(&c.test)?;
            global += self.global_model.accuracy(&c.test)?;
            loss += c.helper_model.mean_loss(&c.train)?;
        }
        Ok((personal / m, global / m, loss / m))
    }
}

/// What happened in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome {
    pub sampled: Vec<usize>,
}

/// One synchronization round, in place. An empty sample only advances the
/// round counter.
pub fn run_sync_round<T: Real>(
    state: &mut FederationState<T>,
    cfg: &SyncConfig<T>,
) -> Result<RoundOutcome> {
    if state.round >= cfg.rounds {
        return Err(Error::invalid(
            "round",
            format!("all {} rounds already ran", cfg.rounds),
        ));
    }
    let (root, round) = (state.root_seed, state.round);
    let mut server_rng = substream(root, round as u64, SERVER, Purpose::ClientSampling);
    let sampled = poisson_sample_clients(
        state.num_clients(),
        cfg.sync_probability.as_f64(),
        &mut server_rng,
    );

    if !sampled.is_empty() {
        let clients = &state.clients;
        let trained = sampled
            .par_iter()
            .map(|&i| {
                let c = &clients[i];
                let mut batch_rng = substream(root, round as u64, i as u64, Purpose::Batch);
                let mut noise_rng = substream(root, round as u64, i as u64, Purpose::Noise);
                local_private_training(
                    &c.train,
                    &c.helper_model,
                    cfg,
                    round,
                    &mut batch_rng,
                    &mut noise_rng,
                    &mut NoObserver,
                )
            })
            .collect::<Result<Vec<_>>>()?;

        let refs: Vec<&ModelVector<T>> = trained.iter().collect();
        state.global_model = aggregate_global(&state.global_model, &refs, cfg.eta)?;
        for (&i, local) in sampled.iter().zip(trained) {
            let c = &mut state.clients[i];
            c.helper_model = compute_helper(
                &state.global_model,
                &local,
                cfg.alpha_for(i),
                cfg.helper_map,
            );
            c.local_model = local;
        }
    }
    state.round += 1;
    Ok(RoundOutcome { sampled })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    /// 1-based round index.
    pub round: usize,
    pub avg_personalized_acc: f64,
    pub global_acc: f64,
    pub avg_train_loss: f64,
    pub clients_sampled: usize,
}

#[derive(Debug, Clone)]
pub struct FederationRun<T: Real = f64> {
    pub state: FederationState<T>,
    pub metrics: Vec<RoundMetrics>,
}

/// Runs the remaining rounds. Metrics are recorded every `metric_every`
/// rounds and after the last one.
pub fn run_federation<T: Real>(
    mut state: FederationState<T>,
    cfg: &SyncConfig<T>,
    metric_every: usize,
) -> Result<FederationRun<T>> {
    cfg.validate()?;
    let sizes: Vec<usize> = state.clients.iter().map(|c| c.train.len()).collect();
    cfg.validate_for_shards(&sizes)?;
    let every = metric_every.max(1);
    let mut metrics = Vec::new();
    while state.round < cfg.rounds {
        let outcome = run_sync_round(&mut state, cfg)?;
        if state.round % every == 0 || state.round == cfg.rounds {
            let (personal, global, loss) = state.evaluate()?;
            metrics.push(RoundMetrics {
                round: state.round,
                avg_personalized_acc: personal,
                global_acc: global,
                avg_train_loss: loss,
                clients_sampled: outcome.sampled.len(),
            });
        }
    }
    Ok(FederationRun { state, metrics })
}

/// Metrics CSV, header first, one row per recorded round.
pub fn metrics_csv(metrics: &[RoundMetrics]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{}",
            m.round, m.avg_personalized_acc, m.global_acc, m.avg_train_loss, m.clients_sampled
        );
    }
    out
}
