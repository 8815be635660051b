//! Federated privacy accounting.
//!
//! Each client's noisy local training over `K` iterations and `R` rounds is
//! summarized by the central-limit GDP parameter with the finite-sample
//! plug-in `c_j = (B_j / n_j) sqrt(K R)`. The weak guarantee is the largest
//! client `mu`; the strong (coalition) guarantee scales it by `sqrt(m - 1)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tradeoff::{clt_mu, mixture_lower_bound, GaussianGuarantee, TradeoffCurve};

/// Flags the weak/strong values as limits of the central limit theorem.
pub const REGIME_NOTE: &str = "CLT-asymptotic: mu_j is the sqrt(KR) -> infinity limit evaluated \
at the finite plug-in c_j = (B_j/n_j) sqrt(K R); single-round curves are exact lower bounds";

/// Inputs of the accountant for one client.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClientPrivacyParams<T: Real = f64> {
    pub batch_size: usize,
    pub dataset_size: usize,
    pub noise_scale: T,
    pub clip_norm: T,
    pub local_iters: usize,
    pub sync_rounds: usize,
    pub client_sampling_p: T,
}

impl<T: Real> ClientPrivacyParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        if self.dataset_size == 0 {
            return Err(Error::invalid("dataset_size", "must be positive"));
        }
        if self.batch_size > self.dataset_size {
            return Err(Error::invalid(
                "batch_size",
                format!(
                    "{} exceeds dataset_size {}",
                    self.batch_size, self.dataset_size
                ),
            ));
        }
        if !(self.noise_scale > T::zero()) {
            return Err(Error::invalid(
                "noise_scale",
                format!("must be > 0, got {}", self.noise_scale),
            ));
        }
        if !(self.clip_norm > T::zero()) {
            return Err(Error::invalid(
                "clip_norm",
                format!("must be > 0, got {}", self.clip_norm),
            ));
        }
        if self.local_iters == 0 {
            return Err(Error::invalid("local_iters", "must be positive"));
        }
        if self.sync_rounds == 0 {
            return Err(Error::invalid("sync_rounds", "must be positive"));
        }
        if !(self.client_sampling_p >= T::zero() && self.client_sampling_p <= T::one()) {
            return Err(Error::invalid(
                "client_sampling_p",
                format!("must lie in [0, 1], got {}", self.client_sampling_p),
            ));
        }
        Ok(())
    }

    /// `B / n`.
    pub fn sampling_rate(&self) -> T {
        T::lit(self.batch_size as f64 / self.dataset_size as f64)
    }
}

/// `mu_j = clt_mu((B_j / n_j) sqrt(K R), sigma_j)`.
pub fn per_client_mu<T: Real>(params: &ClientPrivacyParams<T>) -> Result<GaussianGuarantee<T>> {
    params.validate()?;
    let iters = (params.local_iters as f64) * (params.sync_rounds as f64);
    let c = params.sampling_rate() * T::lit(iters.sqrt());
    clt_mu(c, params.noise_scale)
}

/// GDP approximation of one round of `K` local noisy steps:
/// `G` at `clt_mu((B_j / n_j) sqrt(K), sigma_j)`.
pub fn local_round_mu<T: Real>(params: &ClientPrivacyParams<T>) -> Result<GaussianGuarantee<T>> {
    params.validate()?;
    let c = params.sampling_rate() * T::lit((params.local_iters as f64).sqrt());
    clt_mu(c, params.noise_scale)
}

/// Weak federated guarantee `G_{mu_max}`.
pub fn weak_guarantee<T: Real>(per_client_mu: &[T]) -> Result<GaussianGuarantee<T>> {
    let first = *per_client_mu
        .first()
        .ok_or_else(|| Error::invalid("per_client_mu", "need at least one client"))?;
    let max = per_client_mu.iter().fold(first, |acc, &m| acc.max(m));
    GaussianGuarantee::new(max)
}

/// Strong federated guarantee `G_{sqrt(m - 1) mu_max}` against a coalition of
/// all other clients.
pub fn strong_guarantee<T: Real>(mu_max: T, m: usize) -> Result<GaussianGuarantee<T>> {
    if m < 2 {
        return Err(Error::invalid(
            "m",
            format!("need at least 2 clients for a coalition, got {m}"),
        ));
    }
    GaussianGuarantee::new(T::lit(((m - 1) as f64).sqrt()) * mu_max)
}

/// One-round factor `g_{p,j} = max(f_j, 1 - alpha - p^2)`.
pub fn single_round_curve<T: Real>(f_j: &TradeoffCurve<T>, p: T) -> Result<TradeoffCurve<T>> {
    mixture_lower_bound(f_j, p)
}

/// Per-client accounting results plus the federation-level guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct FederatedPrivacyReport<T: Real = f64> {
    pub params: Vec<ClientPrivacyParams<T>>,
    pub per_client_mu: Vec<T>,
    pub mu_max: T,
    pub weak_guarantee: GaussianGuarantee<T>,
    /// `None` for a single client: there is no coalition to guard against.
    pub strong_guarantee: Option<GaussianGuarantee<T>>,
    /// `g_{p,j}` per client; empty unless curves were requested.
    pub single_round_curves: Vec<TradeoffCurve<T>>,
    pub regime_note: &'static str,
}

impl<T: Real> FederatedPrivacyReport<T> {
    /// Runs the accountant over every client. When `curve_grid` is set, the
    /// single-round curves are built on a uniform grid of that size.
    pub fn compute(params: &[ClientPrivacyParams<T>], curve_grid: Option<usize>) -> Result<Self> {
        let per_client_mu = params
            .iter()
            .map(|p| per_client_mu(p).map(GaussianGuarantee::mu))
            .collect::<Result<Vec<_>>>()?;
        let weak = weak_guarantee(&per_client_mu)?;
        let strong = if params.len() >= 2 {
            Some(strong_guarantee(weak.mu(), params.len())?)
        } else {
            None
        };

        let mut single_round_curves = Vec::new();
        if let Some(grid) = curve_grid {
            // identical clients share one curve computation
            let mut cache: HashMap<(u64, u64), TradeoffCurve<T>> = HashMap::new();
            for p in params {
                let local = local_round_mu(p)?.mu();
                let key = (
                    local.as_f64().to_bits(),
                    p.client_sampling_p.as_f64().to_bits(),
                );
                if !cache.contains_key(&key) {
                    let f_j = TradeoffCurve::gaussian(local, grid)?;
                    cache.insert(key, single_round_curve(&f_j, p.client_sampling_p)?);
                }
                single_round_curves.push(cache[&key].clone());
            }
        }

        Ok(Self {
            params: params.to_vec(),
            mu_max: weak.mu(),
            per_client_mu,
            weak_guarantee: weak,
            strong_guarantee: strong,
            single_round_curves,
            regime_note: REGIME_NOTE,
        })
    }

    pub fn num_clients(&self) -> usize {
        self.params.len()
    }
}
