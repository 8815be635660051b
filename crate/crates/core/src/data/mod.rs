//! Labeled datasets, IDX ingestion, synthetic generators and non-IID
//! client partitions.

pub mod idx;
pub mod partition;
pub mod synth;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use idx::{load_idx_dataset, parse_idx, IdxError};
pub use partition::{
    dirichlet_partition, iid_partition, label_tv_distance, mean_label_tv, partition,
    sample_dirichlet, sample_multinomial, shard_partition, ClientSplit, Partition, PartitionSpec,
};
pub use synth::{synth_dataset, synth_train_test};

/// Row-major feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T: Real = f64> {
    features: Vec<T>,
    dim: usize,
    labels: Vec<usize>,
    num_classes: usize,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(
        features: Vec<T>,
        dim: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::Shape {
                context: "dataset features",
                expected: dim * labels.len(),
                actual: features.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::invalid(
                "labels",
                format!("label {bad} outside [0, {num_classes})"),
            ));
        }
        Ok(Self {
            features,
            dim,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    /// Copies the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            dim: self.dim,
            labels,
            num_classes: self.num_classes,
        }
    }

    /// Example count per class.
    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.num_classes];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Row indices grouped by class, ascending within each class.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut by = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            by[l].push(i);
        }
        by
    }
}
