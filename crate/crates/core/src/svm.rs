//! One-vs-rest linear SVM trained by deterministic epoch-wise subgradient
//! descent on the hinge objective (1/2)|w|^2 + c * sum hinge(1 - y(wx+b)).
//! The step at epoch t is 1/(c*t); sample order is shuffled once from the
//! seed, so training is reproducible bit for bit.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A gesture class: dense id plus human-readable name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GestureLabel {
    pub id: usize,
    pub name: String,
}

/// Class names indexed by dense id 0..C-1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTable {
    names: Vec<String>,
}

impl LabelTable {
    /// Build from id-ordered unique names.
    pub fn new(names: Vec<String>) -> Result<Self> {
        let expected = names.len();
        let mut seen = names.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != expected {
            return Err(Error::BadLabelTable { expected_classes: expected });
        }
        Ok(Self { names })
    }

    /// Table over the sorted distinct class names of a label sequence.
    pub fn from_names<'a>(labels: impl Iterator<Item = &'a str>) -> Result<Self> {
        let mut names: Vec<String> = labels.map(|s| s.to_string()).collect();
        names.sort();
        names.dedup();
        Self::new(names)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn num_classes(&self) -> usize {
        self.names.len()
    }

    pub fn id_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn label(&self, id: usize) -> GestureLabel {
        GestureLabel { id, name: self.names[id].clone() }
    }
}

/// One-vs-rest linear model: one weight vector and bias per class.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    dim: usize,
    labels: LabelTable,
}

impl LinearModel {
    pub fn from_parts(weights: Vec<Vec<f64>>, biases: Vec<f64>, dim: usize, labels: LabelTable) -> Self {
        Self { weights, biases, dim, labels }
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &LabelTable {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }
}

/// Per-class hinge objective after every epoch, for convergence checks.
#[derive(Debug, Clone)]
pub struct TrainingStats {
    pub epoch_objectives: Vec<Vec<f64>>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn hinge_objective(features: &[Vec<f64>], targets: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * dot(w, w);
    let hinge: f64 = features
        .iter()
        .zip(targets.iter())
        .map(|(x, &y)| (1.0 - y * (dot(w, x) + b)).max(0.0))
        .sum();
    reg + c * hinge
}

fn train_binary(
    features: &[Vec<f64>],
    targets: &[f64],
    order: &[usize],
    c: f64,
    epochs: usize,
) -> (Vec<f64>, f64, Vec<f64>) {
    let dim = features[0].len();
    let m = features.len() as f64;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut objectives = Vec::with_capacity(epochs);
    for epoch in 1..=epochs {
        let eta = 1.0 / (c * epoch as f64);
        for &i in order {
            let x = &features[i];
            let y = targets[i];
            let margin = y * (dot(&w, x) + b);
            // Regularizer split evenly over the epoch's updates; the bias
            // is not regularized.
            let shrink = 1.0 - eta / m;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                let step = eta * c * y;
                for (wj, xj) in w.iter_mut().zip(x.iter()) {
                    *wj += step * xj;
                }
                b += step;
            }
        }
        objectives.push(hinge_objective(features, targets, &w, b, c));
    }
    (w, b, objectives)
}

/// Train one binary problem per class. Requires at least two classes and
/// at least one sample of each.
pub fn train_svm(
    features: &[Vec<f64>],
    labels: &[GestureLabel],
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearModel> {
    train_svm_with_stats(features, labels, c, epochs, seed).map(|(model, _)| model)
}

/// As [`train_svm`], also returning the per-epoch objective trace.
pub fn train_svm_with_stats(
    features: &[Vec<f64>],
    labels: &[GestureLabel],
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<(LinearModel, TrainingStats)> {
    if features.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.len(), found: labels.len() });
    }
    if features.is_empty() {
        return Err(Error::EmptyDescriptorSet);
    }
    let dim = features[0].len();
    for f in features {
        if f.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: f.len() });
        }
    }

    let num_classes = labels.iter().map(|l| l.id).max().unwrap() + 1;
    if num_classes < 2 {
        return Err(Error::SingleClass);
    }
    let mut names = vec![None; num_classes];
    for l in labels {
        match &names[l.id] {
            None => names[l.id] = Some(l.name.clone()),
            Some(existing) if *existing != l.name => {
                return Err(Error::BadLabelTable { expected_classes: num_classes });
            }
            _ => {}
        }
    }
    let mut resolved = Vec::with_capacity(num_classes);
    for (id, name) in names.into_iter().enumerate() {
        resolved.push(name.ok_or(Error::EmptyClass { id })?);
    }
    let table = LabelTable::new(resolved)?;

    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut weights = Vec::with_capacity(num_classes);
    let mut biases = Vec::with_capacity(num_classes);
    let mut epoch_objectives = Vec::with_capacity(num_classes);
    for class in 0..num_classes {
        let targets: Vec<f64> =
            labels.iter().map(|l| if l.id == class { 1.0 } else { -1.0 }).collect();
        let (w, b, objectives) = train_binary(features, &targets, &order, c, epochs);
        weights.push(w);
        biases.push(b);
        epoch_objectives.push(objectives);
    }

    Ok((
        LinearModel { weights, biases, dim, labels: table },
        TrainingStats { epoch_objectives },
    ))
}

/// Highest-scoring class, score ties resolved to the lowest id.
pub fn predict(model: &LinearModel, feature: &[f64]) -> Result<GestureLabel> {
    if feature.len() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, found: feature.len() });
    }
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (k, (w, &b)) in model.weights.iter().zip(model.biases.iter()).enumerate() {
        let score = dot(w, feature) + b;
        if score > best_score {
            best_score = score;
            best = k;
        }
    }
    Ok(model.labels.label(best))
}

/// Fraction of samples predicted correctly, in percent.
pub fn accuracy(model: &LinearModel, features: &[Vec<f64>], labels: &[GestureLabel]) -> Result<f64> {
    let mut correct = 0usize;
    for (f, l) in features.iter().zip(labels.iter()) {
        if predict(model, f)?.id == l.id {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / features.len() as f64)
}
