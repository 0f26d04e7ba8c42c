//! Gaussian naive Bayes in log space.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureSchema, FeatureVector};

/// Absolute variance floor.
pub const VARIANCE_FLOOR_ABS: f64 = 1e-9;
/// Variance floor as a fraction of the pooled per-feature variance.
pub const VARIANCE_FLOOR_POOLED_FRAC: f64 = 1e-2;

/// Per-class Gaussian likelihoods on raw features with frequency priors.
///
/// Class index 0 is "not entrance", 1 is "entrance". Per-class variances
/// are population variances floored at
/// `max(1e-9, 0.01 * pooled population variance of the feature)`, which
/// keeps single-sample classes usable.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    schema: FeatureSchema,
    log_priors: [f64; 2],
    means: [Vec<f64>; 2],
    variances: [Vec<f64>; 2],
}

impl NaiveBayesModel {
    pub fn train(dataset: &Dataset) -> Result<NaiveBayesModel> {
        let n = dataset.n_rows();
        let n_pos = dataset.n_positive();
        if n_pos == 0 || n_pos == n {
            return Err(Error::SingleClassDataset);
        }
        let dim = dataset.n_features();
        let counts = [n - n_pos, n_pos];

        let mut means = [vec![0.0; dim], vec![0.0; dim]];
        for (row, &target) in dataset.rows().iter().zip(dataset.targets()) {
            let class = usize::from(target);
            for (m, &x) in means[class].iter_mut().zip(row) {
                *m += x;
            }
        }
        for class in 0..2 {
            for m in &mut means[class] {
                *m /= counts[class] as f64;
            }
        }

        let mut variances = [vec![0.0; dim], vec![0.0; dim]];
        for (row, &target) in dataset.rows().iter().zip(dataset.targets()) {
            let class = usize::from(target);
            for ((v, &m), &x) in variances[class].iter_mut().zip(&means[class]).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        for class in 0..2 {
            for v in &mut variances[class] {
                *v /= counts[class] as f64;
            }
        }

        // Pooled (all-rows) population variance per feature sets the floor.
        let mut pooled_mean = vec![0.0; dim];
        for row in dataset.rows() {
            for (m, &x) in pooled_mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut pooled_mean {
            *m /= n as f64;
        }
        let mut pooled_var = vec![0.0; dim];
        for row in dataset.rows() {
            for ((v, &m), &x) in pooled_var.iter_mut().zip(&pooled_mean).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        for v in &mut pooled_var {
            *v /= n as f64;
        }
        for class in 0..2 {
            for (v, &pv) in variances[class].iter_mut().zip(&pooled_var) {
                let floor = VARIANCE_FLOOR_ABS.max(VARIANCE_FLOOR_POOLED_FRAC * pv);
                if *v < floor {
                    *v = floor;
                }
            }
        }

        Ok(NaiveBayesModel {
            schema: dataset.schema(),
            log_priors: [
                (counts[0] as f64 / n as f64).ln(),
                (counts[1] as f64 / n as f64).ln(),
            ],
            means,
            variances,
        })
    }

    /// Rebuilds a model from serialized parts, validating its invariants.
    pub fn from_parts(
        schema: FeatureSchema,
        log_priors: [f64; 2],
        means: [Vec<f64>; 2],
        variances: [Vec<f64>; 2],
    ) -> Result<NaiveBayesModel> {
        let dim = schema.len();
        let shapes_ok = means.iter().all(|m| m.len() == dim)
            && variances.iter().all(|v| v.len() == dim);
        let values_ok = means.iter().flatten().all(|m| m.is_finite())
            && variances.iter().flatten().all(|v| v.is_finite() && *v > 0.0)
            && log_priors.iter().all(|p| p.is_finite() && *p <= 0.0);
        if !shapes_ok || !values_ok {
            return Err(Error::MalformedDocument {
                reason: "naive Bayes statistics must match the schema with positive variances"
                    .into(),
            });
        }
        Ok(NaiveBayesModel {
            schema,
            log_priors,
            means,
            variances,
        })
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn log_priors(&self) -> [f64; 2] {
        self.log_priors
    }

    pub fn means(&self) -> &[Vec<f64>; 2] {
        &self.means
    }

    pub fn variances(&self) -> &[Vec<f64>; 2] {
        &self.variances
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        Ok(self.predict_with_log_posteriors(v)?.0)
    }

    /// Returns the class and the unnormalized log posteriors indexed
    /// `[no, yes]`. Ties go to `false`.
    pub fn predict_with_log_posteriors(&self, v: &FeatureVector) -> Result<(bool, [f64; 2])> {
        if v.schema() != self.schema {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                found: v.len(),
            });
        }
        let mut log_post = self.log_priors;
        for class in 0..2 {
            for ((&x, &mean), &var) in v
                .values()
                .iter()
                .zip(&self.means[class])
                .zip(&self.variances[class])
            {
                log_post[class] += -0.5 * (TAU * var).ln() - (x - mean) * (x - mean) / (2.0 * var);
            }
        }
        Ok((log_post[1] > log_post[0], log_post))
    }
}
