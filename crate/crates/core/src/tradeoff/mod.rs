//! Trade-off curves: discretized functions `beta = f(alpha)` on `[0, 1]`.
//!
//! Every curve lives on an explicit, strictly increasing grid of type-I error
//! levels starting at 0 and ending at 1; values between knots are linear
//! interpolations. The operators in [`ops`] map curves to curves on the
//! same grid and clamp their output into `[0, 1]`.

pub mod gdp;
pub mod normal;
pub mod ops;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use gdp::{clt_mu, gdp_compose, GaussianGuarantee};
pub use ops::{
    convexify, curve_dominates, invert_curve, mixture_lower_bound, subsample_operator, sup_distance,
};

/// Default number of uniform knots on `[0, 1]`.
pub const DEFAULT_GRID_SIZE: usize = 10_001;

/// Header line of the two-column text export.
pub const CURVE_HEADER: &str = "# tradeoff-curve v1";

/// Piecewise-linear trade-off curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve<T: Real = f64> {
    alphas: Vec<T>,
    betas: Vec<T>,
}

/// `n` evenly spaced knots on `[0, 1]`, with exact endpoints.
pub fn uniform_grid<T: Real>(n: usize) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::invalid(
            "grid_size",
            format!("need at least 2 knots, got {n}"),
        ));
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                T::one()
            } else {
                T::lit(k as f64 / last)
            }
        })
        .collect())
}

impl<T: Real> TradeoffCurve<T> {
    /// Builds a curve from explicit knots. The grid must start at 0, end at 1
    /// and be strictly increasing; betas are clamped into `[0, 1]`.
    pub fn from_knots(alphas: Vec<T>, betas: Vec<T>) -> Result<Self> {
        if alphas.len() != betas.len() {
            return Err(Error::Shape {
                context: "tradeoff curve knots",
                expected: alphas.len(),
                actual: betas.len(),
            });
        }
        if alphas.len() < 2 {
            return Err(Error::invalid("alphas", "need at least 2 knots"));
        }
        if alphas[0] != T::zero() || alphas[alphas.len() - 1] != T::one() {
            return Err(Error::invalid("alphas", "grid must span exactly [0, 1]"));
        }
        if alphas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("alphas", "grid must be strictly increasing"));
        }
        if betas.iter().any(|b| b.is_nan()) {
            return Err(Error::invalid("betas", "NaN value"));
        }
        Ok(Self::from_raw(alphas, betas))
    }

    /// Trusted constructor used by the operators: clamps, skips grid checks.
    pub(crate) fn from_raw(alphas: Vec<T>, mut betas: Vec<T>) -> Self {
        for b in betas.iter_mut() {
            *b = clamp_unit(*b);
        }
        Self { alphas, betas }
    }

    /// `Id(alpha) = 1 - alpha`, the curve of a perfectly private release.
    pub fn identity(grid_size: usize) -> Result<Self> {
        let alphas = uniform_grid::<T>(grid_size)?;
        let betas = alphas.iter().map(|&a| T::one() - a).collect();
        Ok(Self::from_raw(alphas, betas))
    }

    /// `G_mu(alpha) = Phi(Phi^{-1}(1 - alpha) - mu)` on a uniform grid.
    pub fn gaussian(mu: T, grid_size: usize) -> Result<Self> {
        let alphas = uniform_grid::<T>(grid_size)?;
        Self::gaussian_on(mu, alphas)
    }

    /// `G_mu` evaluated on an existing grid.
    pub fn gaussian_on(mu: T, alphas: Vec<T>) -> Result<Self> {
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::invalid(
                "mu",
                format!("must be finite and >= 0, got {mu}"),
            ));
        }
        let mu = mu.as_f64();
        let betas = alphas
            .iter()
            .map(|&a| T::lit(gaussian_tradeoff(mu, a.as_f64())))
            .collect();
        Ok(Self::from_raw(alphas, betas))
    }

    /// Applies `g` knotwise to produce a new curve on the same grid.
    pub fn map_knots(&self, mut g: impl FnMut(T, T) -> T) -> Self {
        let betas = self
            .alphas
            .iter()
            .zip(&self.betas)
            .map(|(&a, &b)| g(a, b))
            .collect();
        Self::from_raw(self.alphas.clone(), betas)
    }

    pub fn alphas(&self) -> &[T] {
        &self.alphas
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Linear interpolation between knots; `alpha` is clamped into `[0, 1]`.
    pub fn eval(&self, alpha: T) -> T {
        let a = clamp_unit(alpha);
        let k = self.alphas.partition_point(|&x| x < a);
        if k == 0 {
            return self.betas[0];
        }
        if k == self.alphas.len() {
            return self.betas[k - 1];
        }
        let (a0, a1) = (self.alphas[k - 1], self.alphas[k]);
        let (b0, b1) = (self.betas[k - 1], self.betas[k]);
        b0 + (b1 - b0) * (a - a0) / (a1 - a0)
    }

    /// Resamples onto another grid by interpolation.
    pub fn resample(&self, alphas: &[T]) -> Self {
        let betas = alphas.iter().map(|&a| self.eval(a)).collect();
        Self::from_raw(alphas.to_vec(), betas)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.alphas == other.alphas
    }

    /// Betas never increase along the grid (up to `tol`).
    pub fn is_non_increasing(&self, tol: T) -> bool {
        self.betas.windows(2).all(|w| w[1] <= w[0] + tol)
    }

    /// Slopes never decrease along the grid, checked on second differences
    /// scaled to the local spacing.
    pub fn is_convex(&self, tol: T) -> bool {
        (1..self.len().saturating_sub(1)).all(|k| {
            let (a0, a1, a2) = (self.alphas[k - 1], self.alphas[k], self.alphas[k + 1]);
            let (b0, b1, b2) = (self.betas[k - 1], self.betas[k], self.betas[k + 1]);
            // b1 <= chord(a0 -> a2) evaluated at a1
            let chord = b0 + (b2 - b0) * (a1 - a0) / (a2 - a0);
            b1 <= chord + tol
        })
    }

    /// `beta <= 1 - alpha` at every knot (up to `tol`).
    pub fn is_dominated_by_identity(&self, tol: T) -> bool {
        self.alphas
            .iter()
            .zip(&self.betas)
            .all(|(&a, &b)| b <= T::one() - a + tol)
    }

    /// All three trade-off-function shape checks at once.
    pub fn is_tradeoff_function(&self, tol: T) -> bool {
        self.is_non_increasing(tol) && self.is_convex(tol) && self.is_dominated_by_identity(tol)
    }

    /// Two-column text export, one knot per line.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * 32);
        out.push_str(CURVE_HEADER);
        out.push('\n');
        for (a, b) in self.alphas.iter().zip(&self.betas) {
            let _ = writeln!(out, "{} {}", a, b);
        }
        out
    }

    /// Parses the two-column export produced by [`TradeoffCurve::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CURVE_HEADER => {}
            _ => {
                return Err(Error::CurveFormat {
                    line: 1,
                    reason: format!("expected header `{CURVE_HEADER}`"),
                })
            }
        }
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split_whitespace();
            let mut next = |what: &str| -> Result<T> {
                let tok = cols.next().ok_or_else(|| Error::CurveFormat {
                    line: i + 1,
                    reason: format!("missing {what} column"),
                })?;
                tok.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::CurveFormat {
                        line: i + 1,
                        reason: format!("bad {what} `{tok}`: {e}"),
                    })
            };
            alphas.push(next("alpha")?);
            betas.push(next("beta")?);
        }
        Self::from_knots(alphas, betas)
    }
}

/// `G_mu(alpha)` in `f64`, with the endpoint limits taken exactly.
pub fn gaussian_tradeoff(mu: f64, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 1.0;
    }
    if alpha >= 1.0 {
        return 0.0;
    }
    // Phi^{-1}(1 - alpha) = -Phi^{-1}(alpha)
    normal::cdf(-normal::quantile(alpha) - mu)
}

#[inline]
pub(crate) fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}
