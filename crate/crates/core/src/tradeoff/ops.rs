//! Operators on trade-off curves: inversion, convexification, the
//! subsampling operator `C_p`, the co-sampling mixture bound and dominance.

use std::borrow::Cow;

use super::{clamp_unit, TradeoffCurve};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Knotwise slack used by [`curve_dominates`].
pub const DOMINANCE_TOLERANCE: f64 = 1e-9;

/// `f^{-1}(alpha) = inf { t in [0, 1] : f(t) <= alpha }` on the grid of `f`.
///
/// `f` is read as its piecewise-linear interpolant; on a flat stretch the
/// left end is returned. An empty set maps to 1.
pub fn invert_curve<T: Real>(f: &TradeoffCurve<T>) -> TradeoffCurve<T> {
    let (ts, bs) = (f.alphas(), f.betas());
    let n = ts.len();
    let betas = ts
        .iter()
        .map(|&alpha| {
            let i = bs.partition_point(|&b| b > alpha);
            if i == 0 {
                ts[0]
            } else if i == n {
                T::one()
            } else {
                let (b0, b1) = (bs[i - 1], bs[i]);
                ts[i - 1] + (b0 - alpha) / (b0 - b1) * (ts[i] - ts[i - 1])
            }
        })
        .collect();
    TradeoffCurve::from_raw(ts.to_vec(), betas)
}

/// Greatest convex minorant of the knot set, resampled to the same grid.
///
/// Lower hull by a monotone-chain scan over the (already sorted) knots.
pub fn convexify<T: Real>(f: &TradeoffCurve<T>) -> TradeoffCurve<T> {
    let (xs, ys) = (f.alphas(), f.betas());
    let mut hull: Vec<usize> = Vec::with_capacity(xs.len());
    for k in 0..xs.len() {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[a] - xs[o]) * (ys[k] - ys[o]) - (ys[a] - ys[o]) * (xs[k] - xs[o]);
            if cross <= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }

    let mut betas = Vec::with_capacity(xs.len());
    let mut seg = 0;
    for (k, &x) in xs.iter().enumerate() {
        while seg + 1 < hull.len() - 1 && hull[seg + 1] <= k {
            seg += 1;
        }
        let (i, j) = (hull[seg], hull[(seg + 1).min(hull.len() - 1)]);
        let y = if k == i || i == j {
            ys[i]
        } else if k == j {
            ys[j]
        } else {
            ys[i] + (ys[j] - ys[i]) * (x - xs[i]) / (xs[j] - xs[i])
        };
        betas.push(y);
    }
    TradeoffCurve::from_raw(xs.to_vec(), betas)
}

fn check_probability<T: Real>(name: &'static str, p: T) -> Result<()> {
    if p >= T::zero() && p <= T::one() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1], got {p}")))
    }
}

/// `C_p(f) = min{f_p, f_p^{-1}}**` with `f_p = p f + (1 - p) Id`.
pub fn subsample_operator<T: Real>(f: &TradeoffCurve<T>, p: T) -> Result<TradeoffCurve<T>> {
    check_probability("p", p)?;
    let q = T::one() - p;
    let mixed = f.map_knots(|a, b| p * b + q * (T::one() - a));
    let inverse = invert_curve(&mixed);
    let lower = TradeoffCurve::from_raw(
        mixed.alphas().to_vec(),
        mixed
            .betas()
            .iter()
            .zip(inverse.betas())
            .map(|(&x, &y)| x.min(y))
            .collect(),
    );
    Ok(convexify(&lower))
}

/// One-round co-sampling bound `max(f(alpha), 1 - alpha - p^2)`.
pub fn mixture_lower_bound<T: Real>(f: &TradeoffCurve<T>, p: T) -> Result<TradeoffCurve<T>> {
    check_probability("p", p)?;
    let both = p * p;
    let raised = f.map_knots(|a, b| b.max(clamp_unit(T::one() - a - both)));
    Ok(convexify(&raised))
}

fn on_grid_of<'a, T: Real>(
    f: &TradeoffCurve<T>,
    g: &'a TradeoffCurve<T>,
) -> Cow<'a, TradeoffCurve<T>> {
    if f.same_grid(g) {
        Cow::Borrowed(g)
    } else {
        Cow::Owned(g.resample(f.alphas()))
    }
}

/// `f >= g` at every knot of `f`, up to [`DOMINANCE_TOLERANCE`].
pub fn curve_dominates<T: Real>(f: &TradeoffCurve<T>, g: &TradeoffCurve<T>) -> bool {
    let g = on_grid_of(f, g);
    let tol = T::lit(DOMINANCE_TOLERANCE);
    f.betas().iter().zip(g.betas()).all(|(&a, &b)| a >= b - tol)
}

/// Largest knotwise gap `|f - g|` over the grid of `f`.
pub fn sup_distance<T: Real>(f: &TradeoffCurve<T>, g: &TradeoffCurve<T>) -> T {
    let g = on_grid_of(f, g);
    f.betas()
        .iter()
        .zip(g.betas())
        .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tradeoff::DEFAULT_GRID_SIZE;

    type Curve = TradeoffCurve<f64>;

    fn gauss(mu: f64) -> Curve {
        Curve::gaussian(mu, DEFAULT_GRID_SIZE).unwrap()
    }

    #[test]
    fn identity_is_self_inverse() {
        let id = Curve::identity(DEFAULT_GRID_SIZE).unwrap();
        assert!(sup_distance(&invert_curve(&id), &id) < 1e-12);
    }

    #[test]
    fn gaussian_is_symmetric() {
        for mu in [0.5, 1.0, 2.5] {
            let g = gauss(mu);
            assert!(sup_distance(&invert_curve(&g), &g) < 1e-4, "mu={mu}");
        }
    }

    #[test]
    fn inverse_of_clamped_line() {
        let grid = crate::tradeoff::uniform_grid::<f64>(DEFAULT_GRID_SIZE).unwrap();
        let f = Curve::from_knots(
            grid.clone(),
            grid.iter().map(|a| (1.0 - 2.0 * a).max(0.0)).collect(),
        )
        .unwrap();
        let inv = invert_curve(&f);
        for (a, b) in inv.alphas().iter().zip(inv.betas()) {
            assert!((b - (1.0 - a) / 2.0).abs() < 1e-12, "alpha={a}");
        }
    }

    #[test]
    fn flat_segment_uses_left_endpoint() {
        let f = Curve::from_knots(
            vec![0.0, 0.25, 0.5, 0.75, 1.0],
            vec![1.0, 0.5, 0.5, 0.5, 0.0],
        )
        .unwrap();
        let inv = invert_curve(&f);
        // alpha = 0.5 -> smallest t with f(t) <= 0.5 is 0.25
        assert_eq!(inv.betas()[2], 0.25);
    }

    #[test]
    fn convexify_fixes_convex_input() {
        let g = gauss(1.0);
        assert!(sup_distance(&convexify(&g), &g) < 1e-15);
    }

    #[test]
    fn convexify_tent_gives_chord() {
        let grid = crate::tradeoff::uniform_grid::<f64>(101).unwrap();
        let tent = Curve::from_knots(
            grid.clone(),
            grid.iter().map(|a| 0.5 - (a - 0.5).abs()).collect(),
        )
        .unwrap();
        let hull = convexify(&tent);
        assert!(hull.betas().iter().all(|&b| b.abs() < 1e-15));
    }

    #[test]
    fn subsample_rejects_bad_p() {
        let g = gauss(1.0);
        assert!(subsample_operator(&g, 1.5).is_err());
        assert!(subsample_operator(&g, -0.1).is_err());
        assert!(mixture_lower_bound(&g, 2.0).is_err());
    }

    #[test]
    fn subsample_extremes() {
        let g = gauss(1.8);
        let id = Curve::identity(DEFAULT_GRID_SIZE).unwrap();
        assert!(sup_distance(&subsample_operator(&g, 0.0).unwrap(), &id) < 1e-12);
        assert!(sup_distance(&subsample_operator(&g, 1.0).unwrap(), &g) < 1e-4);
    }

    #[test]
    fn mixture_examples() {
        let g = gauss(1.0);
        let m = mixture_lower_bound(&g, 0.5).unwrap();
        assert!((m.eval(0.2) - 0.55).abs() < 1e-9);
        assert!((m.eval(0.6) - 0.15).abs() < 1e-9);
        assert!(sup_distance(&mixture_lower_bound(&g, 1.0).unwrap(), &g) < 1e-12);
        let id = Curve::identity(DEFAULT_GRID_SIZE).unwrap();
        assert!(sup_distance(&mixture_lower_bound(&g, 0.0).unwrap(), &id) < 1e-12);
    }

    #[test]
    fn dominance_examples() {
        let id = Curve::identity(DEFAULT_GRID_SIZE).unwrap();
        assert!(curve_dominates(&id, &gauss(1.0)));
        assert!(curve_dominates(&gauss(1.0), &gauss(2.0)));
        assert!(!curve_dominates(&gauss(2.0), &gauss(1.0)));
    }

    #[test]
    fn dominance_across_grids() {
        let coarse = Curve::identity(11).unwrap();
        assert!(curve_dominates(&coarse, &gauss(0.5)));
    }
}
