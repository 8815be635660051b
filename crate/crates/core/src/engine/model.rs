//! Flat-parameter models with explicit per-example backpropagation.
//!
//! Parameter layout (row-major):
//! * logistic: `W (classes x input) | b (classes)`
//! * MLP: `W1 (hidden x input) | b1 (hidden) | W2 (classes x hidden) | b2 (classes)`

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;

const CHECKPOINT_MAGIC: &str = "# fedfdp-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    /// Multinomial logistic regression.
    Logistic {
        input_dim: usize,
        num_classes: usize,
    },
    /// One hidden ReLU layer.
    Mlp {
        input_dim: usize,
        hidden: usize,
        num_classes: usize,
    },
}

impl Architecture {
    pub fn input_dim(self) -> usize {
        match self {
            Architecture::Logistic { input_dim, .. } | Architecture::Mlp { input_dim, .. } => {
                input_dim
            }
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            Architecture::Logistic { num_classes, .. } | Architecture::Mlp { num_classes, .. } => {
                num_classes
            }
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            Architecture::Logistic {
                input_dim,
                num_classes,
            } => num_classes * (input_dim + 1),
            Architecture::Mlp {
                input_dim,
                hidden,
                num_classes,
            } => hidden * (input_dim + 1) + num_classes * (hidden + 1),
        }
    }

    fn header(self) -> String {
        match self {
            Architecture::Logistic { input_dim, num_classes } => {
                format!("{CHECKPOINT_MAGIC} logistic input_dim={input_dim} num_classes={num_classes}")
            }
            Architecture::Mlp { input_dim, hidden, num_classes } => format!(
                "{CHECKPOINT_MAGIC} mlp input_dim={input_dim} hidden={hidden} num_classes={num_classes}"
            ),
        }
    }

    fn parse_header(line: &str) -> Result<Self> {
        let rest = line
            .strip_prefix(CHECKPOINT_MAGIC)
            .ok_or_else(|| Error::Checkpoint(format!("expected `{CHECKPOINT_MAGIC}` header")))?;
        let mut tokens = rest.split_whitespace();
        let kind = tokens
            .next()
            .ok_or_else(|| Error::Checkpoint("missing architecture".into()))?;
        let mut field = |name: &str| -> Result<usize> {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("missing {name}")))?;
            tok.strip_prefix(name)
                .and_then(|t| t.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Checkpoint(format!("bad field `{tok}`, expected {name}=N")))
        };
        match kind {
            "logistic" => Ok(Architecture::Logistic {
                input_dim: field("input_dim")?,
                num_classes: field("num_classes")?,
            }),
            "mlp" => Ok(Architecture::Mlp {
                input_dim: field("input_dim")?,
                hidden: field("hidden")?,
                num_classes: field("num_classes")?,
            }),
            other => Err(Error::Checkpoint(format!("unknown architecture `{other}`"))),
        }
    }
}

/// Model parameters as one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelVector<T: Real = f64> {
    arch: Architecture,
    weights: Vec<T>,
}

fn softmax_in_place<T: Real>(z: &mut [T]) {
    let top = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut total = T::zero();
    for v in z.iter_mut() {
        *v = (*v - top).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

fn log_sum_exp<T: Real>(z: &[T]) -> T {
    let top = z.iter().copied().fold(T::neg_infinity(), T::max);
    top + z.iter().map(|&v| (v - top).exp()).sum::<T>().ln()
}

/// `out = W x + b` with `W` of shape `(out.len(), x.len())`.
fn affine<T: Real>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let n = x.len();
    for (o, (row, &bias)) in out.iter_mut().zip(w.chunks_exact(n).zip(b)) {
        *o = bias + row.iter().zip(x).map(|(&a, &c)| a * c).sum::<T>();
    }
}

impl<T: Real> ModelVector<T> {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            arch,
            weights: vec![T::zero(); arch.num_params()],
        }
    }

    /// Logistic models start at zero; MLP weight matrices are Glorot-uniform
    /// with zero biases.
    pub fn init<R: Rng + ?Sized>(arch: Architecture, rng: &mut R) -> Self {
        let mut model = Self::zeros(arch);
        if let Architecture::Mlp {
            input_dim,
            hidden,
            num_classes,
        } = arch
        {
            let mut fill = |slice: &mut [T], fan_in: usize, fan_out: usize| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                for w in slice {
                    *w = T::lit(rng.random_range(-limit..limit));
                }
            };
            let w1_end = hidden * input_dim;
            let w2_start = w1_end + hidden;
            fill(&mut model.weights[..w1_end], input_dim, hidden);
            fill(
                &mut model.weights[w2_start..w2_start + num_classes * hidden],
                hidden,
                num_classes,
            );
        }
        model
    }

    pub fn from_weights(arch: Architecture, weights: Vec<T>) -> Result<Self> {
        if weights.len() != arch.num_params() {
            return Err(Error::Shape {
                context: "model weights",
                expected: arch.num_params(),
                actual: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("weights", "entries must be finite"));
        }
        Ok(Self { arch, weights })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [T] {
        &mut self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn check_example(&self, x: &[T], label: usize) -> Result<()> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::Shape {
                context: "example features",
                expected: self.arch.input_dim(),
                actual: x.len(),
            });
        }
        if label >= self.arch.num_classes() {
            return Err(Error::invalid(
                "label",
                format!("{label} outside [0, {})", self.arch.num_classes()),
            ));
        }
        Ok(())
    }

    /// Pre-activations of the hidden layer (MLP only) and the output logits.
    fn forward(&self, x: &[T]) -> (Vec<T>, Vec<T>) {
        match self.arch {
            Architecture::Logistic {
                input_dim,
                num_classes,
            } => {
                let (w, b) = self.weights.split_at(num_classes * input_dim);
                let mut z = vec![T::zero(); num_classes];
                affine(w, b, x, &mut z);
                (Vec::new(), z)
            }
            Architecture::Mlp {
                input_dim,
                hidden,
                num_classes,
            } => {
                let (w1, rest) = self.weights.split_at(hidden * input_dim);
                let (b1, rest) = rest.split_at(hidden);
                let (w2, b2) = rest.split_at(num_classes * hidden);
                let mut pre = vec![T::zero(); hidden];
                affine(w1, b1, x, &mut pre);
                let h: Vec<T> = pre.iter().map(|&v| v.max(T::zero())).collect();
                let mut z = vec![T::zero(); num_classes];
                affine(w2, b2, &h, &mut z);
                (pre, z)
            }
        }
    }

    pub fn logits(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.arch.input_dim() {
            return Err(Error::Shape {
                context: "example features",
                expected: self.arch.input_dim(),
                actual: x.len(),
            });
        }
        Ok(self.forward(x).1)
    }

    /// Cross-entropy of one example.
    pub fn loss(&self, x: &[T], label: usize) -> Result<T> {
        self.check_example(x, label)?;
        let z = self.forward(x).1;
        Ok(log_sum_exp(&z) - z[label])
    }

    /// Most likely class; ties go to the lowest index.
    pub fn predict(&self, x: &[T]) -> Result<usize> {
        let z = self.logits(x)?;
        Ok(z.iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
            .0)
    }

    /// Exact gradient of the single-example cross-entropy.
    pub fn per_sample_gradient(&self, x: &[T], label: usize) -> Result<Vec<T>> {
        self.check_example(x, label)?;
        let mut grad = vec![T::zero(); self.weights.len()];
        let (pre, mut dz) = self.forward(x);
        softmax_in_place(&mut dz);
        dz[label] -= T::one();

        match self.arch {
            Architecture::Logistic {
                input_dim,
                num_classes,
            } => {
                let (gw, gb) = grad.split_at_mut(num_classes * input_dim);
                for (c, &d) in dz.iter().enumerate() {
                    for (g, &xi) in gw[c * input_dim..(c + 1) * input_dim].iter_mut().zip(x) {
                        *g = d * xi;
                    }
                    gb[c] = d;
                }
            }
            Architecture::Mlp {
                input_dim,
                hidden,
                num_classes,
            } => {
                let w2_start = hidden * input_dim + hidden;
                let w2 = &self.weights[w2_start..w2_start + num_classes * hidden];
                let h: Vec<T> = pre.iter().map(|&v| v.max(T::zero())).collect();

                let (g1, g2) = grad.split_at_mut(w2_start);
                let (gw2, gb2) = g2.split_at_mut(num_classes * hidden);
                let mut dh = vec![T::zero(); hidden];
                for (c, &d) in dz.iter().enumerate() {
                    let row = &w2[c * hidden..(c + 1) * hidden];
                    for j in 0..hidden {
                        gw2[c * hidden + j] = d * h[j];
                        dh[j] += row[j] * d;
                    }
                    gb2[c] = d;
                }

                let (gw1, gb1) = g1.split_at_mut(hidden * input_dim);
                for j in 0..hidden {
                    // ReLU'(0) taken as 0
                    let d = if pre[j] > T::zero() { dh[j] } else { T::zero() };
                    for (g, &xi) in gw1[j * input_dim..(j + 1) * input_dim].iter_mut().zip(x) {
                        *g = d * xi;
                    }
                    gb1[j] = d;
                }
            }
        }
        Ok(grad)
    }

    /// Fraction of correctly classified rows; 0 on an empty dataset.
    pub fn accuracy(&self, data: &LabeledDataset<T>) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for i in 0..data.len() {
            if self.predict(data.row(i))? == data.label(i) {
                correct += 1;
            }
        }
        Ok(correct as f64 / data.len() as f64)
    }

    /// Mean cross-entropy; 0 on an empty dataset.
    pub fn mean_loss(&self, data: &LabeledDataset<T>) -> Result<f64> {
        if data.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for i in 0..data.len() {
            total += self.loss(data.row(i), data.label(i))?.as_f64();
        }
        Ok(total / data.len() as f64)
    }

    /// Text checkpoint: an architecture header, then one weight per line.
    pub fn to_checkpoint(&self) -> String {
        let mut out = self.arch.header();
        out.push('\n');
        for w in &self.weights {
            let _ = writeln!(out, "{w}");
        }
        out
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let arch = Architecture::parse_header(lines.next().unwrap_or_default())?;
        let weights = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Checkpoint(format!("bad weight `{l}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_weights(arch, weights)
    }
}
