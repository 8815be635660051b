//! Gaussian class-conditional synthetic data.

use rand::Rng;
use rand_distr::StandardNormal;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn class_means<R: Rng + ?Sized>(
    num_classes: usize,
    dim: usize,
    spread: f64,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    (0..num_classes)
        .map(|c| {
            let mut mean = vec![0.0; dim];
            if num_classes <= 2 * dim {
                // +/- spread along distinct axes
                mean[c / 2] = if c % 2 == 0 { spread } else { -spread };
            } else {
                let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                for (m, d) in mean.iter_mut().zip(dir) {
                    *m = spread * d / norm;
                }
            }
            mean
        })
        .collect()
}

/// Raw draws `mean_c + N(0, I)`, class-major order, before normalization.
fn draw<R: Rng + ?Sized>(
    num_classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if num_classes == 0 || dim == 0 || per_class == 0 {
        return Err(Error::invalid(
            "synthetic",
            "class count, dim and per-class size must be positive",
        ));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::invalid(
            "spread",
            format!("must be finite and >= 0, got {spread}"),
        ));
    }
    let means = class_means(num_classes, dim, spread, rng);
    let mut features = Vec::with_capacity(num_classes * per_class * dim);
    let mut labels = Vec::with_capacity(num_classes * per_class);
    for (c, mean) in means.iter().enumerate() {
        for _ in 0..per_class {
            features.extend(
                mean.iter()
                    .map(|m| m + rng.sample::<f64, _>(StandardNormal)),
            );
            labels.push(c);
        }
    }
    Ok((features, labels))
}

/// Per-coordinate affine map of all rows onto `[0, 1]`.
fn normalize(features: &mut [f64], dim: usize) {
    for j in 0..dim {
        let col = features.iter().skip(j).step_by(dim);
        let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        let width = hi - lo;
        for x in features.iter_mut().skip(j).step_by(dim) {
            *x = if width > 0.0 { (*x - lo) / width } else { 0.5 };
        }
    }
}

/// `per_class` examples from each of `num_classes` unit-variance Gaussian
/// clusters whose means sit `spread` away from the origin, rescaled to
/// `[0, 1]`.
pub fn synth_dataset<T: Real, R: Rng + ?Sized>(
    num_classes: usize,
    dim: usize,
    per_class: usize,
    spread: f64,
    rng: &mut R,
) -> Result<LabeledDataset<T>> {
    let (mut features, labels) = draw(num_classes, dim, per_class, spread, rng)?;
    normalize(&mut features, dim);
    LabeledDataset::new(
        features.into_iter().map(T::lit).collect(),
        dim,
        labels,
        num_classes,
    )
}

/// Train and test pools drawn from the same clusters and normalized jointly.
pub fn synth_train_test<T: Real, R: Rng + ?Sized>(
    num_classes: usize,
    dim: usize,
    per_class_train: usize,
    per_class_test: usize,
    spread: f64,
    rng: &mut R,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    if per_class_test == 0 {
        return Err(Error::invalid("per_class_test", "must be positive"));
    }
    let per_class = per_class_train + per_class_test;
    let (mut features, labels) = draw(num_classes, dim, per_class, spread, rng)?;
    normalize(&mut features, dim);
    let all = LabeledDataset::new(
        features.into_iter().map(T::lit).collect(),
        dim,
        labels,
        num_classes,
    )?;
    let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
    for c in 0..num_classes {
        let start = c * per_class;
        train_idx.extend(start..start + per_class_train);
        test_idx.extend(start + per_class_train..start + per_class);
    }
    Ok((all.subset(&train_idx), all.subset(&test_idx)))
}
