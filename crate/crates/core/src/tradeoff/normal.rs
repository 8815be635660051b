//! Standard normal CDF and quantile.
//!
//! The CDF goes through `erfc`, which keeps full relative precision in the
//! lower tail. The quantile is a safeguarded Newton iteration on
//! `ln Phi(x) = ln q` inside a shrinking bracket, always solved in the lower
//! tail so that `q` near 1 does not lose digits.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const TAIL_LIMIT: f64 = 38.5;

/// Phi(x).
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Phi^{-1}(q). Returns -inf at q = 0 and +inf at q = 1.
pub fn quantile(q: f64) -> f64 {
    if q.is_nan() || !(0.0..=1.0).contains(&q) {
        return f64::NAN;
    }
    if q == 0.0 {
        return f64::NEG_INFINITY;
    }
    if q == 1.0 {
        return f64::INFINITY;
    }
    if q > 0.5 {
        // 1 - q is exact here.
        return -lower_tail_quantile(1.0 - q);
    }
    lower_tail_quantile(q)
}

/// Solves Phi(x) = q for q in (0, 0.5]; the root lies in [-38.5, 0].
fn lower_tail_quantile(q: f64) -> f64 {
    if q == 0.5 {
        return 0.0;
    }
    let target = q.ln();
    let (mut lo, mut hi) = (-TAIL_LIMIT, 0.0_f64);
    // Asymptotic tail start point.
    let t = (-2.0 * q.ln()).sqrt();
    let mut x = (-(t
        - (2.515517 + 0.802853 * t + 0.010328 * t * t)
            / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t)))
        .clamp(lo, hi);

    for _ in 0..200 {
        let phi = cdf(x);
        let g = if phi > 0.0 {
            phi.ln() - target
        } else {
            f64::NEG_INFINITY
        };
        if g == 0.0 {
            return x;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = if phi > 0.0 && g.is_finite() {
            // d/dx ln Phi(x) = phi(x) / Phi(x)
            x - g * phi / pdf(x)
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-16 * (1.0 + x.abs()) || hi - lo <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}
