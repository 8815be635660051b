//! Plain FedAvg with full participation and mini-batch SGD on multinomial
//! logistic regression, written against nothing but the substream seeds.
//! Weights use the flat layout `[W (classes x dim, row-major), b]`.

use fedfdp::rng::{substream, Purpose};
use rand::Rng;

pub struct Shard {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<usize>,
}

pub struct FedAvgSetup {
    pub dim: usize,
    pub classes: usize,
    pub rounds: usize,
    pub local_iters: usize,
    pub batch_size: usize,
    pub base_rate: f64,
    pub decay_factor: f64,
    pub decay_interval: usize,
    pub root_seed: u64,
}

fn grad_into(w: &[f64], x: &[f64], y: usize, dim: usize, classes: usize, acc: &mut [f64]) {
    let mut z: Vec<f64> = (0..classes)
        .map(|c| w[classes * dim + c] + (0..dim).map(|d| w[c * dim + d] * x[d]).sum::<f64>())
        .collect();
    let top = z.iter().cloned().fold(f64::MIN, f64::max);
    let total: f64 = z.iter().map(|v| (v - top).exp()).sum();
    for v in z.iter_mut() {
        *v = (*v - top).exp() / total;
    }
    z[y] -= 1.0;
    for c in 0..classes {
        for d in 0..dim {
            acc[c * dim + d] += z[c] * x[d];
        }
        acc[classes * dim + c] += z[c];
    }
}

fn rate(s: &FedAvgSetup, step: usize) -> f64 {
    if s.decay_interval == 0 {
        s.base_rate
    } else {
        s.base_rate * s.decay_factor.powi((step / s.decay_interval) as i32)
    }
}

/// Global weights after every round, starting from zeros.
pub fn fedavg_trajectory(s: &FedAvgSetup, shards: &[Shard]) -> Vec<Vec<f64>> {
    let len = s.classes * (s.dim + 1);
    let mut global = vec![0.0; len];
    let mut out = Vec::new();
    for r in 0..s.rounds {
        let mut sum = vec![0.0; len];
        for (i, shard) in shards.iter().enumerate() {
            let mut w = global.clone();
            let mut batch_rng = substream(s.root_seed, r as u64, i as u64, Purpose::Batch);
            let n = shard.y.len();
            let q = (s.batch_size as f64 / n as f64).min(1.0);
            for k in 0..s.local_iters {
                let mut g = vec![0.0; len];
                for j in 0..n {
                    if batch_rng.random::<f64>() < q {
                        grad_into(&w, &shard.x[j], shard.y[j], s.dim, s.classes, &mut g);
                    }
                }
                let lr = rate(s, r * s.local_iters + k);
                for (wi, gi) in w.iter_mut().zip(&g) {
                    *wi -= lr * gi / s.batch_size as f64;
                }
            }
            for (a, b) in sum.iter_mut().zip(&w) {
                *a += b;
            }
        }
        global = sum.iter().map(|v| v / shards.len() as f64).collect();
        out.push(global.clone());
    }
    out
}
