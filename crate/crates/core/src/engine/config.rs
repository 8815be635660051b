use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchMode {
    /// Each example joins the batch independently with rate `B / n`.
    #[default]
    PoissonPerExample,
    /// Exactly `B` distinct examples, uniformly at random.
    FixedSizeUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    #[default]
    NoisySgd,
    NoisyAdam,
}

/// How the server turns the global model into a client's helper model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HelperMap {
    /// Helper is the global model (FedAvg).
    Identity,
    /// Helper is `(1 - alpha) local + alpha global`.
    #[default]
    Interpolation,
}

/// `rate(k) = base_rate * decay_factor^(floor(k / decay_interval))`, where `k`
/// counts local iterations across all rounds. `decay_interval = 0` keeps the
/// rate constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrSchedule<T: Real = f64> {
    pub base_rate: T,
    #[serde(default = "one")]
    pub decay_factor: T,
    #[serde(default)]
    pub decay_interval: usize,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> Default for LrSchedule<T> {
    fn default() -> Self {
        Self {
            base_rate: T::lit(0.1),
            decay_factor: T::one(),
            decay_interval: 0,
        }
    }
}

impl<T: Real> LrSchedule<T> {
    pub fn constant(base_rate: T) -> Self {
        Self {
            base_rate,
            ..Self::default()
        }
    }

    pub fn rate(&self, step: usize) -> T {
        if self.decay_interval == 0 {
            return self.base_rate;
        }
        let decays = (step / self.decay_interval) as i32;
        self.base_rate * self.decay_factor.powi(decays)
    }
}

/// Adam moment decay rates and epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams<T: Real = f64> {
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Real> Default for AdamParams<T> {
    fn default() -> Self {
        Self {
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            epsilon: T::lit(1e-8),
        }
    }
}

/// Protocol and local-training configuration shared by all clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncConfig<T: Real = f64> {
    /// Client sampling probability `p`.
    pub sync_probability: T,
    /// Synchronization rounds `R`.
    pub rounds: usize,
    /// Local iterations `K` per round.
    pub local_iters: usize,
    /// Server aggregation rate `eta`.
    pub eta: T,
    /// Interpolation weight of the global model in the helper.
    pub helper_alpha: T,
    /// Per-client overrides of `helper_alpha`; empty means shared.
    #[serde(default)]
    pub client_alphas: Vec<T>,
    #[serde(default)]
    pub helper_map: HelperMap,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub lr: LrSchedule<T>,
    #[serde(default)]
    pub adam: AdamParams<T>,
    pub batch_size: usize,
    /// Noise multiplier `sigma`; 0 disables noise.
    pub noise_scale: T,
    /// Per-example clipping norm `C`; `+inf` disables clipping (only
    /// allowed together with `noise_scale = 0`).
    pub clip_norm: T,
    #[serde(default)]
    pub batch_mode: BatchMode,
}

fn in_unit<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {x}")))
    }
}

impl<T: Real> SyncConfig<T> {
    pub fn validate(&self) -> Result<()> {
        in_unit("sync_probability", self.sync_probability)?;
        in_unit("eta", self.eta)?;
        in_unit("helper_alpha", self.helper_alpha)?;
        for &a in &self.client_alphas {
            in_unit("client_alphas", a)?;
        }
        if self.local_iters == 0 {
            return Err(Error::invalid("local_iters", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        if !(self.noise_scale >= T::zero()) || !self.noise_scale.is_finite() {
            return Err(Error::invalid(
                "noise_scale",
                format!("must be finite and >= 0, got {}", self.noise_scale),
            ));
        }
        if !(self.clip_norm > T::zero()) {
            return Err(Error::invalid(
                "clip_norm",
                format!("must be > 0, got {}", self.clip_norm),
            ));
        }
        if self.clip_norm.is_infinite() && self.noise_scale > T::zero() {
            return Err(Error::invalid(
                "clip_norm",
                "unbounded clipping is only allowed without noise",
            ));
        }
        if !(self.lr.base_rate > T::zero()) || !self.lr.base_rate.is_finite() {
            return Err(Error::invalid(
                "lr.base_rate",
                format!("must be finite and > 0, got {}", self.lr.base_rate),
            ));
        }
        if !(self.lr.decay_factor > T::zero() && self.lr.decay_factor <= T::one()) {
            return Err(Error::invalid(
                "lr.decay_factor",
                format!("must lie in (0, 1], got {}", self.lr.decay_factor),
            ));
        }
        let a = &self.adam;
        if !(a.beta1 >= T::zero()
            && a.beta1 < T::one()
            && a.beta2 >= T::zero()
            && a.beta2 < T::one())
        {
            return Err(Error::invalid(
                "adam",
                "moment decay rates must lie in [0, 1)",
            ));
        }
        if !(a.epsilon > T::zero()) {
            return Err(Error::invalid("adam.epsilon", "must be > 0"));
        }
        Ok(())
    }

    /// Checks that depend on the client shards.
    pub fn validate_for_shards(&self, shard_sizes: &[usize]) -> Result<()> {
        if !self.client_alphas.is_empty() && self.client_alphas.len() != shard_sizes.len() {
            return Err(Error::Shape {
                context: "client_alphas",
                expected: shard_sizes.len(),
                actual: self.client_alphas.len(),
            });
        }
        if let Some(&smallest) = shard_sizes.iter().min() {
            if smallest == 0 {
                return Err(Error::invalid(
                    "train_shard",
                    "a client has no training data",
                ));
            }
            if self.batch_mode == BatchMode::FixedSizeUniform && self.batch_size > smallest {
                return Err(Error::invalid(
                    "batch_size",
                    format!(
                        "{} exceeds the smallest shard ({smallest}) in fixed-size mode",
                        self.batch_size
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Per-coordinate standard deviation of the injected noise, `2 C sigma`.
    pub fn noise_std(&self) -> T {
        if self.noise_scale == T::zero() {
            T::zero()
        } else {
            T::lit(2.0) * self.clip_norm * self.noise_scale
        }
    }

    pub fn alpha_for(&self, client: usize) -> T {
        self.client_alphas
            .get(client)
            .copied()
            .unwrap_or(self.helper_alpha)
    }
}
