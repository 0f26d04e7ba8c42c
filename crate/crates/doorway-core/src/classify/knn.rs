//! k-nearest-neighbor classifier on standardized features.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureSchema, FeatureVector};
use crate::scaler::Scaler;

/// Heap entry ordered by (distance, insertion index), largest first, so the
/// heap keeps the k nearest candidates.
struct Candidate {
    dist_sq: f64,
    index: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist_sq
            .total_cmp(&other.dist_sq)
            .then(self.index.cmp(&other.index))
    }
}

/// Memorizes the standardized training set and votes among the k nearest
/// rows by Euclidean distance. Distance ties are broken by insertion index,
/// and k is required to be odd so the vote itself can never tie.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    schema: FeatureSchema,
    scaler: Scaler,
    rows: Vec<Vec<f64>>,
    targets: Vec<bool>,
}

impl KnnModel {
    pub fn train(dataset: &Dataset, k: usize) -> Result<KnnModel> {
        if k == 0 || k % 2 == 0 || k > dataset.n_rows() {
            return Err(Error::BadK {
                k,
                n_rows: dataset.n_rows(),
            });
        }
        let scaler = Scaler::fit(dataset);
        let rows = dataset
            .rows()
            .iter()
            .map(|r| scaler.apply_values(r))
            .collect::<Result<_>>()?;
        Ok(KnnModel {
            k,
            schema: dataset.schema(),
            scaler,
            rows,
            targets: dataset.targets().to_vec(),
        })
    }

    /// Rebuilds a model from serialized parts, validating its invariants.
    pub fn from_parts(
        k: usize,
        schema: FeatureSchema,
        scaler: Scaler,
        rows: Vec<Vec<f64>>,
        targets: Vec<bool>,
    ) -> Result<KnnModel> {
        if k == 0 || k % 2 == 0 || k > rows.len() {
            return Err(Error::BadK {
                k,
                n_rows: rows.len(),
            });
        }
        if rows.len() != targets.len()
            || scaler.len() != schema.len()
            || rows
                .iter()
                .any(|r| r.len() != schema.len() || r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::MalformedDocument {
                reason: "knn rows, targets, and scaler must share the schema dimension".into(),
            });
        }
        Ok(KnnModel {
            k,
            schema,
            scaler,
            rows,
            targets,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn scaler(&self) -> &Scaler {
        &self.scaler
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn targets(&self) -> &[bool] {
        &self.targets
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        Ok(self.predict_with_votes(v)?.0)
    }

    /// Majority vote among the k nearest rows; returns the class and the
    /// `(yes, no)` vote counts.
    pub fn predict_with_votes(&self, v: &FeatureVector) -> Result<(bool, (usize, usize))> {
        if v.schema() != self.schema {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                found: v.len(),
            });
        }
        let query = self.scaler.apply_values(v.values())?;
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(self.k + 1);
        for (index, row) in self.rows.iter().enumerate() {
            let dist_sq: f64 = row
                .iter()
                .zip(&query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            heap.push(Candidate { dist_sq, index });
            if heap.len() > self.k {
                heap.pop();
            }
        }
        let yes = heap
            .iter()
            .filter(|c| self.targets[c.index])
            .count();
        let no = self.k - yes;
        Ok((yes > no, (yes, no)))
    }
}
