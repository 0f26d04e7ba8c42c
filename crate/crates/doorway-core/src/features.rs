//! Feature extraction and the model-ready dataset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reading::{SensorReading, Trace};

/// Layout of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSchema {
    /// `[num_satellites, snr_db, rss_dbm]`
    Raw3,
    /// Window means of the three signals followed by their
    /// least-squares slopes versus sample index.
    Windowed6,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        match self {
            FeatureSchema::Raw3 => 3,
            FeatureSchema::Windowed6 => 6,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Canonical per-feature names, used when rendering tree rules.
    pub fn feature_names(&self) -> &'static [&'static str] {
        match self {
            FeatureSchema::Raw3 => &["num_satellites", "snr_db", "rss_dbm"],
            FeatureSchema::Windowed6 => &[
                "mean_num_satellites",
                "mean_snr_db",
                "mean_rss_dbm",
                "slope_num_satellites",
                "slope_snr_db",
                "slope_rss_dbm",
            ],
        }
    }
}

/// A fixed-length, finite real vector with a declared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    schema: FeatureSchema,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: FeatureSchema, values: Vec<f64>) -> Result<FeatureVector> {
        if values.len() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                found: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteFeature { index, value });
            }
        }
        Ok(FeatureVector { schema, values })
    }

    /// Builds a `Raw3` vector. Panics on non-finite input.
    pub fn raw3(values: [f64; 3]) -> FeatureVector {
        FeatureVector::new(FeatureSchema::Raw3, values.to_vec()).expect("finite raw3 values")
    }

    /// Builds a `Windowed6` vector. Panics on non-finite input.
    pub fn windowed6(values: [f64; 6]) -> FeatureVector {
        FeatureVector::new(FeatureSchema::Windowed6, values.to_vec())
            .expect("finite windowed6 values")
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl SensorReading {
    /// The `Raw3` feature view of this reading.
    pub fn raw_features(&self) -> FeatureVector {
        FeatureVector::raw3([self.num_satellites as f64, self.snr_db, self.rss_dbm])
    }
}

/// Ordinary-least-squares slope of `values` against 0..n; 0 for a single sample.
fn ols_slope(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let t_mean = (n as f64 - 1.0) / 2.0;
    let v_mean = values.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, &v) in values.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (v - v_mean);
        den += dt * dt;
    }
    num / den
}

impl Trace {
    /// Smoothed `Windowed6` features at reading `index`: per-signal means and
    /// OLS slopes over the trailing window `[max(0, index - window + 1), index]`.
    ///
    /// `window` must be at least 2; at `index = 0` the window degenerates to a
    /// single sample, so the means equal the reading's values and the slopes
    /// are zero.
    pub fn windowed_features(&self, index: usize, window: usize) -> Result<FeatureVector> {
        if window < 2 {
            return Err(Error::BadWindow { window });
        }
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        let start = index.saturating_sub(window - 1);
        let slice = &self.readings()[start..=index];
        let sats: Vec<f64> = slice.iter().map(|r| r.num_satellites as f64).collect();
        let snr: Vec<f64> = slice.iter().map(|r| r.snr_db).collect();
        let rss: Vec<f64> = slice.iter().map(|r| r.rss_dbm).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(FeatureVector::windowed6([
            mean(&sats),
            mean(&snr),
            mean(&rss),
            ols_slope(&sats),
            ols_slope(&snr),
            ols_slope(&rss),
        ]))
    }
}

/// A uniform feature matrix with binary entrance targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    rows: Vec<Vec<f64>>,
    targets: Vec<bool>,
}

impl Dataset {
    pub fn new(rows: Vec<FeatureVector>, targets: Vec<bool>) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if rows.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                found: targets.len(),
            });
        }
        let schema = rows[0].schema();
        for row in &rows {
            if row.schema() != schema {
                return Err(Error::DimensionMismatch {
                    expected: schema.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Dataset {
            schema,
            rows: rows.into_iter().map(|r| r.values).collect(),
            targets,
        })
    }

    /// Raw-feature dataset with the entrance flag as target.
    pub fn from_readings(readings: &[SensorReading]) -> Result<Dataset> {
        let rows = readings.iter().map(|r| r.raw_features()).collect();
        let targets = readings.iter().map(|r| r.entrance).collect();
        Dataset::new(rows, targets)
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn row_values(&self, index: usize) -> &[f64] {
        &self.rows[index]
    }

    pub fn row(&self, index: usize) -> FeatureVector {
        FeatureVector {
            schema: self.schema,
            values: self.rows[index].clone(),
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    pub fn target(&self, index: usize) -> bool {
        self.targets[index]
    }

    /// Count of rows labeled entrance.
    pub fn n_positive(&self) -> usize {
        self.targets.iter().filter(|&&t| t).count()
    }

    /// New dataset holding the given rows, in index order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if indices.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &i in indices {
            if i >= self.n_rows() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.n_rows(),
                });
            }
        }
        Ok(Dataset {
            schema: self.schema,
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
        })
    }
}
