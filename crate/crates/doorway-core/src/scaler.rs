//! Per-feature standardization for distance- and margin-based classifiers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector};

/// Standard deviations below this are treated as constant features.
const STD_FLOOR: f64 = 1e-12;

/// Fitted standardization: `(x - mean) / std` per feature.
///
/// Uses the population standard deviation; constant features get `std = 1`
/// so they standardize to zero instead of dividing by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scaler {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(dataset: &Dataset) -> Scaler {
        let n = dataset.n_rows() as f64;
        let dim = dataset.n_features();
        let mut means = vec![0.0; dim];
        for row in dataset.rows() {
            for (m, &x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; dim];
        for row in dataset.rows() {
            for ((v, &m), &x) in vars.iter_mut().zip(&means).zip(row) {
                *v += (x - m) * (x - m);
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s < STD_FLOOR {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Scaler { means, stds }
    }

    /// Rebuilds a scaler from serialized parts, validating its invariants.
    pub fn from_parts(means: Vec<f64>, stds: Vec<f64>) -> Result<Scaler> {
        if means.len() != stds.len() {
            return Err(Error::DimensionMismatch {
                expected: means.len(),
                found: stds.len(),
            });
        }
        if means.iter().any(|m| !m.is_finite())
            || stds.iter().any(|s| !s.is_finite() || *s <= 0.0)
        {
            return Err(Error::MalformedDocument {
                reason: "scaler means must be finite and stds strictly positive".into(),
            });
        }
        Ok(Scaler { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector> {
        let values = self.apply_values(v.values())?;
        FeatureVector::new(v.schema(), values)
    }

    /// Inverse transform; `invert(apply(v))` recovers `v` up to rounding.
    pub fn invert(&self, v: &FeatureVector) -> Result<FeatureVector> {
        self.check_dim(v.len())?;
        let values = v
            .values()
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| x * s + m)
            .collect();
        FeatureVector::new(v.schema(), values)
    }

    pub(crate) fn apply_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(values.len())?;
        Ok(values
            .iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect())
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }
}
