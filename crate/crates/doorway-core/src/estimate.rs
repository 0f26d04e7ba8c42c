//! Turning per-reading classifications into one entrance position.
//!
//! A trained model classifies each reading of an approach walk, a sliding
//! majority vote removes isolated flips, and the midpoint of the longest
//! positive run becomes the entrance estimate. Ground truth is the
//! entrance plane at distance 0, so the position error is just the
//! absolute distance of the chosen reading.

use serde::Serialize;

use crate::classify::TrainedModel;
use crate::error::{Error, Result};
use crate::features::FeatureSchema;
use crate::reading::Trace;

/// A per-trace entrance estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionResult {
    /// Index of the chosen reading within the trace.
    pub estimated_index: usize,
    /// Signed distance of that reading, meters.
    pub estimated_position_m: f64,
    /// `|estimated_position_m|`, meters.
    pub position_error_m: f64,
    /// Indices classified as entrance after smoothing.
    pub positives: Vec<usize>,
}

impl DetectionResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("detection result serializes")
    }
}

impl std::fmt::Display for DetectionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "entrance at reading {}: position {} m, error {} m ({} positive reading{})",
            self.estimated_index,
            self.estimated_position_m,
            self.position_error_m,
            self.positives.len(),
            if self.positives.len() == 1 { "" } else { "s" },
        )
    }
}

/// Classifies each reading of the trace in order. The model must use the
/// raw three-signal features.
pub fn classify_trace(model: &TrainedModel, trace: &Trace) -> Result<Vec<bool>> {
    if model.schema() != FeatureSchema::Raw3 {
        return Err(Error::DimensionMismatch {
            expected: FeatureSchema::Raw3.len(),
            found: model.schema().len(),
        });
    }
    trace
        .readings()
        .iter()
        .map(|r| model.predict(&r.raw_features()))
        .collect()
}

/// Sliding majority vote with the window centered on each index and
/// truncated at the boundaries. A value flips to positive only when
/// strictly more than half of its window is positive, so `window = 1` is
/// the identity and no positive can appear where the window has none.
pub fn smooth(predictions: &[bool], window: usize) -> Result<Vec<bool>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::BadWindow { window });
    }
    let half = window / 2;
    Ok((0..predictions.len())
        .map(|i| {
            let start = i.saturating_sub(half);
            let end = (i + half).min(predictions.len().saturating_sub(1));
            let len = end - start + 1;
            let positives = predictions[start..=end].iter().filter(|&&p| p).count();
            2 * positives > len
        })
        .collect())
}

/// Detects the entrance along one trace: smooth the per-reading
/// classifications, take the longest contiguous positive run (ties go to
/// the earliest run), and report the run's middle reading (lower middle
/// for even lengths).
pub fn estimate_entrance(
    model: &TrainedModel,
    trace: &Trace,
    window: usize,
) -> Result<DetectionResult> {
    let smoothed = smooth(&classify_trace(model, trace)?, window)?;
    let positives: Vec<usize> = smoothed
        .iter()
        .enumerate()
        .filter_map(|(i, &p)| p.then_some(i))
        .collect();

    let mut best_start = 0;
    let mut best_len = 0;
    let mut run_start = 0;
    let mut run_len = 0;
    for (i, &p) in smoothed.iter().enumerate() {
        if p {
            if run_len == 0 {
                run_start = i;
            }
            run_len += 1;
            if run_len > best_len {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if best_len == 0 {
        return Err(Error::NoEntranceDetected);
    }

    let estimated_index = best_start + (best_len - 1) / 2;
    let estimated_position_m = trace.readings()[estimated_index].distance_m;
    Ok(DetectionResult {
        estimated_index,
        estimated_position_m,
        position_error_m: estimated_position_m.abs(),
        positives,
    })
}
