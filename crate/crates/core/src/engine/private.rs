//! Differentially private local training: per-example clipping, Gaussian
//! noise on the clipped sum, and an SGD or Adam update on the noisy mean.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::config::{BatchMode, OptimizerKind, SyncConfig};
use super::model::ModelVector;
use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::{l2_norm, Real};

/// `v / max(1, |v| / C)`. An infinite `C` leaves `v` untouched.
pub fn clip_gradient<T: Real>(v: &[T], clip_norm: T) -> Vec<T> {
    let mut out = v.to_vec();
    clip_in_place(&mut out, clip_norm);
    out
}

pub fn clip_in_place<T: Real>(v: &mut [T], clip_norm: T) {
    let scale = (l2_norm(v) / clip_norm).max(T::one());
    if scale > T::one() {
        for x in v.iter_mut() {
            *x = *x / scale;
        }
    }
}

/// Hooks into a private step, for instrumentation.
pub trait StepObserver<T> {
    fn clipped_gradient(&mut self, _g: &[T]) {}
    fn noise(&mut self, _noise: &[T]) {}
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl<T> StepObserver<T> for NoObserver {}

/// Row indices of one mini-batch from a shard of `n` examples.
///
/// Poisson mode includes each row independently with rate `B / n` and may
/// return an empty batch. Fixed-size mode draws exactly `B` distinct rows.
pub fn draw_batch<R: Rng + ?Sized>(
    n: usize,
    batch_size: usize,
    mode: BatchMode,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("train_shard", "empty training shard"));
    }
    match mode {
        BatchMode::PoissonPerExample => {
            let rate = (batch_size as f64 / n as f64).min(1.0);
            Ok((0..n).filter(|_| rng.random::<f64>() < rate).collect())
        }
        BatchMode::FixedSizeUniform => {
            if batch_size > n {
                return Err(Error::invalid(
                    "batch_size",
                    format!("{batch_size} exceeds shard size {n} in fixed-size mode"),
                ));
            }
            let mut idx = index::sample(rng, n, batch_size).into_vec();
            idx.sort_unstable();
            Ok(idx)
        }
    }
}

/// Optimizer state that lives for one call of local training.
#[derive(Debug, Clone)]
pub enum LocalOptimizer<T: Real = f64> {
    Sgd,
    Adam { m: Vec<T>, v: Vec<T>, t: i32 },
}

impl<T: Real> LocalOptimizer<T> {
    pub fn new(kind: OptimizerKind, dim: usize) -> Self {
        match kind {
            OptimizerKind::NoisySgd => LocalOptimizer::Sgd,
            OptimizerKind::NoisyAdam => LocalOptimizer::Adam {
                m: vec![T::zero(); dim],
                v: vec![T::zero(); dim],
                t: 0,
            },
        }
    }

    /// Applies one update given the (already noisy) mean gradient.
    fn apply(&mut self, weights: &mut [T], grad: &[T], lr: T, cfg: &SyncConfig<T>) {
        match self {
            LocalOptimizer::Sgd => {
                for (w, &g) in weights.iter_mut().zip(grad) {
                    *w -= lr * g;
                }
            }
            LocalOptimizer::Adam { m, v, t } => {
                let (b1, b2, eps) = (cfg.adam.beta1, cfg.adam.beta2, cfg.adam.epsilon);
                *t += 1;
                let c1 = T::one() - b1.powi(*t);
                let c2 = T::one() - b2.powi(*t);
                for i in 0..weights.len() {
                    m[i] = b1 * m[i] + (T::one() - b1) * grad[i];
                    v[i] = b2 * v[i] + (T::one() - b2) * grad[i] * grad[i];
                    let m_hat = m[i] / c1;
                    let v_hat = v[i] / c2;
                    weights[i] -= lr * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
}

/// One private step:
/// `w <- w - (lr_k / B) (sum_{l in batch} clip(grad_l) + N(0, 4 C^2 sigma^2 I))`
/// for SGD; Adam consumes the same noisy mean gradient.
///
/// `step` is the schedule index fed to the learning-rate decay.
#[allow(clippy::too_many_arguments)]
pub fn noisy_step<T: Real, R: Rng + ?Sized>(
    model: &ModelVector<T>,
    optimizer: &mut LocalOptimizer<T>,
    data: &LabeledDataset<T>,
    batch: &[usize],
    cfg: &SyncConfig<T>,
    step: usize,
    noise_rng: &mut R,
    observer: &mut dyn StepObserver<T>,
) -> Result<ModelVector<T>> {
    if batch.is_empty() && cfg.batch_mode == BatchMode::FixedSizeUniform {
        return Err(Error::invalid("batch", "empty batch in fixed-size mode"));
    }
    let dim = model.dim();
    let mut sum = vec![T::zero(); dim];
    for &i in batch {
        let mut g = model.per_sample_gradient(data.row(i), data.label(i))?;
        clip_in_place(&mut g, cfg.clip_norm);
        observer.clipped_gradient(&g);
        for (s, x) in sum.iter_mut().zip(&g) {
            *s += *x;
        }
    }

    let std = cfg.noise_std();
    if std > T::zero() {
        let noise: Vec<T> = (0..dim)
            .map(|_| std * T::lit(noise_rng.sample::<f64, _>(StandardNormal)))
            .collect();
        observer.noise(&noise);
        for (s, n) in sum.iter_mut().zip(&noise) {
            *s += *n;
        }
    }

    let inv_b = T::one() / T::lit(cfg.batch_size as f64);
    for s in sum.iter_mut() {
        *s = *s * inv_b;
    }
    let mut next = model.clone();
    optimizer.apply(next.weights_mut(), &sum, cfg.lr.rate(step), cfg);
    Ok(next)
}

/// `K` private steps starting from the helper model.
///
/// `round` offsets the schedule index so the learning-rate decay runs over
/// the whole federation, not per round.
pub fn local_private_training<T: Real, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    train: &LabeledDataset<T>,
    helper: &ModelVector<T>,
    cfg: &SyncConfig<T>,
    round: usize,
    batch_rng: &mut R1,
    noise_rng: &mut R2,
    observer: &mut dyn StepObserver<T>,
) -> Result<ModelVector<T>> {
    if cfg.local_iters == 0 {
        return Err(Error::invalid("local_iters", "must be positive"));
    }
    let mut optimizer = LocalOptimizer::new(cfg.optimizer, helper.dim());
    let mut model = helper.clone();
    for k in 0..cfg.local_iters {
        let batch = draw_batch(train.len(), cfg.batch_size, cfg.batch_mode, batch_rng)?;
        let step = round * cfg.local_iters + k;
        model = noisy_step(
            &model,
            &mut optimizer,
            train,
            &batch,
            cfg,
            step,
            noise_rng,
            observer,
        )?;
    }
    Ok(model)
}
