//! Gaussian differential privacy: the `mu` parameter, composition and the
//! central-limit `mu` of subsampled noisy gradient descent.

use serde::{Deserialize, Serialize};

use super::{normal, TradeoffCurve};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `mu`-GDP guarantee; its curve is `G_mu`. `mu = 0` is perfect privacy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GaussianGuarantee<T: Real = f64> {
    mu: T,
}

impl<T: Real> GaussianGuarantee<T> {
    pub fn new(mu: T) -> Result<Self> {
        if mu >= T::zero() && mu.is_finite() {
            Ok(Self { mu })
        } else {
            Err(Error::invalid(
                "mu",
                format!("must be finite and >= 0, got {mu}"),
            ))
        }
    }

    pub fn mu(self) -> T {
        self.mu
    }

    pub fn curve(self, grid_size: usize) -> Result<TradeoffCurve<T>> {
        TradeoffCurve::gaussian(self.mu, grid_size)
    }
}

/// Composition of `mu_i`-GDP mechanisms: `sqrt(sum mu_i^2)`.
pub fn gdp_compose<T: Real>(mus: &[T]) -> Result<GaussianGuarantee<T>> {
    if let Some(bad) = mus.iter().find(|m| !(**m >= T::zero())) {
        return Err(Error::invalid(
            "mus",
            format!("entries must be >= 0, got {bad}"),
        ));
    }
    GaussianGuarantee::new(mus.iter().map(|&m| m * m).sum::<T>().sqrt())
}

/// Limit `mu` of `C_{B/n}(G_{1/sigma})^{KR}` when `(B/n) sqrt(KR) -> c`:
///
/// `mu = sqrt(2) c sqrt(e^{1/sigma^2} Phi(1.5/sigma) + 3 Phi(-0.5/sigma) - 2)`.
pub fn clt_mu<T: Real>(c: T, sigma: T) -> Result<GaussianGuarantee<T>> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(Error::invalid(
            "c",
            format!("must be finite and > 0, got {c}"),
        ));
    }
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
    }
    let (c, s_inv) = (c.as_f64(), 1.0 / sigma.as_f64());
    let inner =
        (s_inv * s_inv).exp() * normal::cdf(1.5 * s_inv) + 3.0 * normal::cdf(-0.5 * s_inv) - 2.0;
    // inner -> 0 as sigma -> inf; rounding can push it a hair below zero.
    let mu = std::f64::consts::SQRT_2 * c * inner.max(0.0).sqrt();
    if !mu.is_finite() {
        return Err(Error::invalid(
            "sigma",
            "noise scale too small: mu overflows",
        ));
    }
    GaussianGuarantee::new(T::lit(mu))
}
