//! Non-IID client partitions.
//!
//! * shard: sort the training pool by label, cut it into equal shards and
//!   deal a fixed number of random shards to each client; each client's
//!   test set is drawn from test examples whose labels it saw in training.
//! * dirichlet: per client, draw class proportions `q ~ Dir(beta)`, then
//!   multinomial label counts for train and test, and fill them without
//!   replacement (train is exclusive across clients, test is not).
//! * iid: a uniform shuffle.

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of times a client's class proportions are redrawn before the
/// Dirichlet scheme gives up.
pub const DIRICHLET_MAX_RETRIES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum PartitionSpec {
    Shard {
        num_clients: usize,
        total_shards: usize,
        shards_per_client: usize,
        test_per_client: usize,
    },
    Dirichlet {
        num_clients: usize,
        beta: f64,
        n_train: usize,
        n_test: usize,
        /// Use the pool's label frequencies instead of sampling `q`
        /// (the `beta -> infinity` limit).
        #[serde(default)]
        pool_frequencies: bool,
    },
    Iid {
        num_clients: usize,
        n_train: usize,
        n_test: usize,
    },
}

impl PartitionSpec {
    pub fn num_clients(&self) -> usize {
        match *self {
            PartitionSpec::Shard { num_clients, .. }
            | PartitionSpec::Dirichlet { num_clients, .. }
            | PartitionSpec::Iid { num_clients, .. } => num_clients,
        }
    }

    /// Per-client training set size given the pool size.
    pub fn train_size(&self, pool_size: usize) -> Result<usize> {
        match *self {
            PartitionSpec::Shard {
                total_shards,
                shards_per_client,
                ..
            } => {
                if total_shards == 0 || pool_size % total_shards != 0 {
                    return Err(Error::invalid(
                        "total_shards",
                        format!("pool of {pool_size} examples does not split into {total_shards} equal shards"),
                    ));
                }
                Ok(pool_size / total_shards * shards_per_client)
            }
            PartitionSpec::Dirichlet { n_train, .. } | PartitionSpec::Iid { n_train, .. } => {
                Ok(n_train)
            }
        }
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        if self.num_clients() == 0 {
            return Err(Error::invalid("num_clients", "must be positive"));
        }
        match *self {
            PartitionSpec::Shard {
                num_clients,
                total_shards,
                shards_per_client,
                test_per_client,
            } => {
                if shards_per_client == 0 || test_per_client == 0 {
                    return Err(Error::invalid(
                        "shards_per_client",
                        "shard counts and test size must be positive",
                    ));
                }
                if total_shards != num_clients * shards_per_client {
                    return Err(Error::invalid(
                        "total_shards",
                        format!(
                            "{total_shards} != num_clients ({num_clients}) * shards_per_client ({shards_per_client})"
                        ),
                    ));
                }
            }
            PartitionSpec::Dirichlet {
                beta,
                n_train,
                n_test,
                pool_frequencies,
                ..
            } => {
                if !pool_frequencies && !(beta > 0.0 && beta.is_finite()) {
                    return Err(Error::invalid(
                        "beta",
                        format!("must be finite and > 0, got {beta}"),
                    ));
                }
                if n_train == 0 || n_test == 0 {
                    return Err(Error::invalid(
                        "n_train",
                        "per-client sizes must be positive",
                    ));
                }
            }
            PartitionSpec::Iid {
                n_train, n_test, ..
            } => {
                if n_train == 0 || n_test == 0 {
                    return Err(Error::invalid(
                        "n_train",
                        "per-client sizes must be positive",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Indices into the train and test pools for one client.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientSplit {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub clients: Vec<ClientSplit>,
}

impl Partition {
    /// Copies each client's rows out of the pools.
    pub fn materialize<T: Real>(
        &self,
        train: &LabeledDataset<T>,
        test: &LabeledDataset<T>,
    ) -> Vec<(LabeledDataset<T>, LabeledDataset<T>)> {
        self.clients
            .iter()
            .map(|c| (train.subset(&c.train), test.subset(&c.test)))
            .collect()
    }
}

/// Dispatches on the scheme.
pub fn partition<T: Real, R: Rng + ?Sized>(
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    spec: &PartitionSpec,
    rng: &mut R,
) -> Result<Partition> {
    match spec {
        PartitionSpec::Shard { .. } => shard_partition(train, test, spec, rng),
        PartitionSpec::Dirichlet { .. } => dirichlet_partition(train, test, spec, rng),
        PartitionSpec::Iid { .. } => iid_partition(train, test, spec, rng),
    }
}

fn sample_sorted<R: Rng + ?Sized>(pool: &[usize], k: usize, rng: &mut R) -> Vec<usize> {
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    picked
}

pub fn shard_partition<T: Real, R: Rng + ?Sized>(
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    spec: &PartitionSpec,
    rng: &mut R,
) -> Result<Partition> {
    let PartitionSpec::Shard {
        num_clients,
        total_shards,
        shards_per_client,
        test_per_client,
    } = *spec
    else {
        return Err(Error::invalid("scheme", "expected a shard spec"));
    };
    spec.validate()?;
    let shard_size = spec.train_size(train.len())? / shards_per_client;

    let mut order: Vec<usize> = (0..train.len()).collect();
    order.sort_by_key(|&i| train.label(i));
    let mut shard_ids: Vec<usize> = (0..total_shards).collect();
    shard_ids.shuffle(rng);

    let test_by_class = test.indices_by_class();
    let mut clients = Vec::with_capacity(num_clients);
    for (client, dealt) in shard_ids.chunks(shards_per_client).enumerate() {
        let mut train_idx: Vec<usize> = dealt
            .iter()
            .flat_map(|&s| order[s * shard_size..(s + 1) * shard_size].iter().copied())
            .collect();
        train_idx.sort_unstable();

        let mut seen = vec![false; train.num_classes()];
        for &i in &train_idx {
            seen[train.label(i)] = true;
        }
        let candidates: Vec<usize> = test_by_class
            .iter()
            .enumerate()
            .filter(|(c, _)| seen.get(*c).copied().unwrap_or(false))
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        if candidates.len() < test_per_client {
            return Err(Error::PartitionInfeasible(format!(
                "client {client}: only {} test examples carry its labels, need {test_per_client}",
                candidates.len()
            )));
        }
        let test_idx = sample_sorted(&candidates, test_per_client, rng);
        clients.push(ClientSplit {
            train: train_idx,
            test: test_idx,
        });
    }
    Ok(Partition { clients })
}

/// `q ~ Dir(beta, ..., beta)`, drawn through log-gamma variates so that small
/// `beta` does not underflow to an all-zero vector.
pub fn sample_dirichlet<R: Rng + ?Sized>(beta: f64, k: usize, rng: &mut R) -> Vec<f64> {
    let logs: Vec<f64> = if beta >= 1.0 {
        let gamma = Gamma::new(beta, 1.0).expect("beta > 0");
        (0..k).map(|_| gamma.sample(rng).ln()).collect()
    } else {
        // G(beta) = G(beta + 1) * U^{1/beta}
        let gamma = Gamma::new(beta + 1.0, 1.0).expect("beta > 0");
        (0..k)
            .map(|_| {
                let u = 1.0 - rng.random::<f64>();
                gamma.sample(rng).ln() + u.ln() / beta
            })
            .collect()
    };
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Counts of `n` categorical draws with probabilities `q`.
pub fn sample_multinomial<R: Rng + ?Sized>(q: &[f64], n: usize, rng: &mut R) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(q.len());
    let mut acc = 0.0;
    for &p in q {
        acc += p;
        cumulative.push(acc);
    }
    let mut counts = vec![0; q.len()];
    for _ in 0..n {
        let u = rng.random::<f64>() * acc;
        let c = cumulative.partition_point(|&x| x <= u).min(q.len() - 1);
        counts[c] += 1;
    }
    counts
}

pub fn dirichlet_partition<T: Real, R: Rng + ?Sized>(
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    spec: &PartitionSpec,
    rng: &mut R,
) -> Result<Partition> {
    let PartitionSpec::Dirichlet {
        num_clients,
        beta,
        n_train,
        n_test,
        pool_frequencies,
    } = *spec
    else {
        return Err(Error::invalid("scheme", "expected a dirichlet spec"));
    };
    spec.validate()?;
    if num_clients * n_train > train.len() {
        return Err(Error::PartitionInfeasible(format!(
            "{num_clients} clients x {n_train} examples exceeds the pool of {}",
            train.len()
        )));
    }
    let k = train.num_classes().max(test.num_classes());
    let mut remaining = train.indices_by_class();
    remaining.resize(k, Vec::new());
    for pool in remaining.iter_mut() {
        pool.shuffle(rng);
    }
    let mut test_by_class = test.indices_by_class();
    test_by_class.resize(k, Vec::new());
    let pool_freq: Vec<f64> = remaining
        .iter()
        .map(|v| v.len() as f64 / train.len() as f64)
        .collect();

    let mut clients = Vec::with_capacity(num_clients);
    for client in 0..num_clients {
        let mut drawn = None;
        for _ in 0..DIRICHLET_MAX_RETRIES {
            let q = if pool_frequencies {
                pool_freq.clone()
            } else {
                sample_dirichlet(beta, k, rng)
            };
            let tr = sample_multinomial(&q, n_train, rng);
            let te = sample_multinomial(&q, n_test, rng);
            let feasible =
                (0..k).all(|c| tr[c] <= remaining[c].len() && te[c] <= test_by_class[c].len());
            if feasible {
                drawn = Some((tr, te));
                break;
            }
        }
        let Some((tr, te)) = drawn else {
            return Err(Error::PartitionInfeasible(format!(
                "client {client}: no feasible label draw after {DIRICHLET_MAX_RETRIES} retries"
            )));
        };
        let mut train_idx = Vec::with_capacity(n_train);
        let mut test_idx = Vec::with_capacity(n_test);
        for c in 0..k {
            let keep = remaining[c].len() - tr[c];
            train_idx.extend(remaining[c].drain(keep..));
            test_idx.extend(sample_sorted(&test_by_class[c], te[c], rng));
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        clients.push(ClientSplit {
            train: train_idx,
            test: test_idx,
        });
    }
    Ok(Partition { clients })
}

pub fn iid_partition<T: Real, R: Rng + ?Sized>(
    train: &LabeledDataset<T>,
    test: &LabeledDataset<T>,
    spec: &PartitionSpec,
    rng: &mut R,
) -> Result<Partition> {
    let PartitionSpec::Iid {
        num_clients,
        n_train,
        n_test,
    } = *spec
    else {
        return Err(Error::invalid("scheme", "expected an iid spec"));
    };
    spec.validate()?;
    if num_clients * n_train > train.len() || n_test > test.len() {
        return Err(Error::PartitionInfeasible(format!(
            "pools of {} train / {} test cannot supply {num_clients} x ({n_train}, {n_test})",
            train.len(),
            test.len()
        )));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);
    let all_test: Vec<usize> = (0..test.len()).collect();
    let clients = order
        .chunks(n_train)
        .take(num_clients)
        .map(|chunk| {
            let mut tr = chunk.to_vec();
            tr.sort_unstable();
            ClientSplit {
                train: tr,
                test: sample_sorted(&all_test, n_test, rng),
            }
        })
        .collect();
    Ok(Partition { clients })
}

/// Total-variation distance between a label histogram and a distribution.
pub fn label_tv_distance(histogram: &[usize], reference: &[f64]) -> f64 {
    let n: usize = histogram.iter().sum();
    if n == 0 {
        return 0.0;
    }
    0.5 * histogram
        .iter()
        .zip(reference)
        .map(|(&h, &r)| (h as f64 / n as f64 - r).abs())
        .sum::<f64>()
}

/// Mean over clients of the TV distance between the client's training label
/// histogram and the pool's label distribution.
pub fn mean_label_tv<T: Real>(partition: &Partition, train: &LabeledDataset<T>) -> f64 {
    let pool = train.class_histogram();
    let reference: Vec<f64> = pool
        .iter()
        .map(|&c| c as f64 / train.len() as f64)
        .collect();
    let total: f64 = partition
        .clients
        .iter()
        .map(|c| {
            let mut h = vec![0; train.num_classes()];
            for &i in &c.train {
                h[train.label(i)] += 1;
            }
            label_tv_distance(&h, &reference)
        })
        .sum();
    total / partition.clients.len().max(1) as f64
}
