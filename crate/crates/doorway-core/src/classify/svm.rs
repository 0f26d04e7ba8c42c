//! Linear SVM trained by primal stochastic subgradient descent.
//!
//! Minimizes `lambda/2 * |w|^2 + mean hinge loss` on standardized features
//! with targets mapped to -1/+1. Each epoch visits the rows once in a
//! seeded uniformly-shuffled order; the step size at global step `t` is
//! `1 / (lambda * t)`. The bias is driven by the hinge subgradient but not
//! regularized. Training is a pure function of `(dataset, lambda, epochs,
//! seed)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureSchema, FeatureVector};
use crate::scaler::Scaler;

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    schema: FeatureSchema,
    scaler: Scaler,
    weights: Vec<f64>,
    bias: f64,
    lambda: f64,
    epochs: usize,
}

impl SvmModel {
    pub fn train(dataset: &Dataset, lambda: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
        Ok(Self::train_with_history(dataset, lambda, epochs, seed)?.0)
    }

    /// Trains and also returns the objective value at the end of every
    /// epoch, which is how the optimization behavior is tested.
    pub fn train_with_history(
        dataset: &Dataset,
        lambda: f64,
        epochs: usize,
        seed: u64,
    ) -> Result<(SvmModel, Vec<f64>)> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::BadHyperparameter {
                name: "lambda",
                reason: format!("must be positive and finite, got {lambda}"),
            });
        }
        if epochs == 0 {
            return Err(Error::BadHyperparameter {
                name: "epochs",
                reason: "must be at least 1".into(),
            });
        }
        let n_pos = dataset.n_positive();
        if n_pos == 0 || n_pos == dataset.n_rows() {
            return Err(Error::SingleClassDataset);
        }

        let scaler = Scaler::fit(dataset);
        let rows: Vec<Vec<f64>> = dataset
            .rows()
            .iter()
            .map(|r| scaler.apply_values(r))
            .collect::<Result<_>>()?;
        let labels: Vec<f64> = dataset
            .targets()
            .iter()
            .map(|&t| if t { 1.0 } else { -1.0 })
            .collect();

        let dim = dataset.n_features();
        let mut weights = vec![0.0; dim];
        let mut bias = 0.0;
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0u64;
        let mut history = Vec::with_capacity(epochs);

        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let margin = labels[i] * (dot(&weights, &rows[i]) + bias);
                let shrink = 1.0 - eta * lambda;
                if margin < 1.0 {
                    for (w, &x) in weights.iter_mut().zip(&rows[i]) {
                        *w = *w * shrink + eta * labels[i] * x;
                    }
                    bias += eta * labels[i];
                } else {
                    for w in &mut weights {
                        *w *= shrink;
                    }
                }
            }
            history.push(objective(&weights, bias, &rows, &labels, lambda));
        }

        Ok((
            SvmModel {
                schema: dataset.schema(),
                scaler,
                weights,
                bias,
                lambda,
                epochs,
            },
            history,
        ))
    }

    /// Rebuilds a model from serialized parts, validating its invariants.
    pub fn from_parts(
        schema: FeatureSchema,
        scaler: Scaler,
        weights: Vec<f64>,
        bias: f64,
        lambda: f64,
        epochs: usize,
    ) -> Result<SvmModel> {
        if weights.len() != schema.len()
            || scaler.len() != schema.len()
            || weights.iter().any(|w| !w.is_finite())
            || !bias.is_finite()
            || !(lambda > 0.0 && lambda.is_finite())
            || epochs == 0
        {
            return Err(Error::MalformedDocument {
                reason: "svm weights, bias, scaler, and hyperparameters must be finite, \
                         dimension-consistent, and valid"
                    .into(),
            });
        }
        Ok(SvmModel {
            schema,
            scaler,
            weights,
            bias,
            lambda,
            epochs,
        })
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        Ok(self.predict_with_margin(v)?.0)
    }

    /// Signed margin `w . standardize(v) + b`; the class is `margin > 0`,
    /// so an exactly-zero margin is "no".
    pub fn predict_with_margin(&self, v: &FeatureVector) -> Result<(bool, f64)> {
        if v.schema() != self.schema {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                found: v.len(),
            });
        }
        let x = self.scaler.apply_values(v.values())?;
        let margin = dot(&self.weights, &x) + self.bias;
        Ok((margin > 0.0, margin))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `lambda/2 |w|^2 + mean_i hinge(y_i (w.x_i + b))` on standardized rows.
fn objective(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * dot(weights, weights);
    let hinge: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| (1.0 - y * (dot(weights, x) + bias)).max(0.0))
        .sum::<f64>()
        / rows.len() as f64;
    reg + hinge
}
