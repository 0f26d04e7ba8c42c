//! The four classifiers and their on-disk model format.
//!
//! Models serialize to a JSON document with four top-level fields:
//! `format_version` (currently 1), `algo` (`knn`, `nb`, `tree`, or `svm`),
//! `scaler` (`null` for the raw-feature algorithms `nb` and `tree`), and
//! `params` holding the algorithm-specific parameters. Unknown fields are
//! rejected on load, and a round trip preserves every prediction bit for
//! bit.

pub mod knn;
pub mod naive_bayes;
pub mod svm;
pub mod tree;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::features::{FeatureSchema, FeatureVector};
use crate::scaler::Scaler;

pub use knn::KnnModel;
pub use naive_bayes::NaiveBayesModel;
pub use svm::SvmModel;
pub use tree::{Rule, RuleCondition, RuleOp, TreeModel, TreeNode};

/// Version written by [`TrainedModel::save`] and required by
/// [`TrainedModel::load`].
pub const MODEL_FORMAT_VERSION: u64 = 1;

/// A fitted classifier of any of the four supported kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Knn(KnnModel),
    NaiveBayes(NaiveBayesModel),
    Tree(TreeModel),
    Svm(SvmModel),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnnParams {
    k: usize,
    schema: FeatureSchema,
    rows: Vec<Vec<f64>>,
    targets: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NbParams {
    schema: FeatureSchema,
    log_priors: [f64; 2],
    means: [Vec<f64>; 2],
    variances: [Vec<f64>; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeParams {
    schema: FeatureSchema,
    max_depth: usize,
    min_samples_leaf: usize,
    root: TreeNode,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SvmParams {
    schema: FeatureSchema,
    weights: Vec<f64>,
    bias: f64,
    lambda: f64,
    epochs: usize,
}

impl TrainedModel {
    pub fn algo(&self) -> &'static str {
        match self {
            TrainedModel::Knn(_) => "knn",
            TrainedModel::NaiveBayes(_) => "nb",
            TrainedModel::Tree(_) => "tree",
            TrainedModel::Svm(_) => "svm",
        }
    }

    pub fn schema(&self) -> FeatureSchema {
        match self {
            TrainedModel::Knn(m) => m.schema(),
            TrainedModel::NaiveBayes(m) => m.schema(),
            TrainedModel::Tree(m) => m.schema(),
            TrainedModel::Svm(m) => m.schema(),
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        match self {
            TrainedModel::Knn(m) => m.predict(v),
            TrainedModel::NaiveBayes(m) => m.predict(v),
            TrainedModel::Tree(m) => m.predict(v),
            TrainedModel::Svm(m) => m.predict(v),
        }
    }

    pub fn as_tree(&self) -> Option<&TreeModel> {
        match self {
            TrainedModel::Tree(m) => Some(m),
            _ => None,
        }
    }

    /// Serializes to the versioned JSON model document.
    pub fn save(&self) -> String {
        let (scaler, params) = match self {
            TrainedModel::Knn(m) => (
                Some(m.scaler().clone()),
                serde_json::to_value(KnnParams {
                    k: m.k(),
                    schema: m.schema(),
                    rows: m.rows().to_vec(),
                    targets: m.targets().to_vec(),
                }),
            ),
            TrainedModel::NaiveBayes(m) => (
                None,
                serde_json::to_value(NbParams {
                    schema: m.schema(),
                    log_priors: m.log_priors(),
                    means: m.means().clone(),
                    variances: m.variances().clone(),
                }),
            ),
            TrainedModel::Tree(m) => (
                None,
                serde_json::to_value(TreeParams {
                    schema: m.schema(),
                    max_depth: m.max_depth(),
                    min_samples_leaf: m.min_samples_leaf(),
                    root: m.root().clone(),
                }),
            ),
            TrainedModel::Svm(m) => (
                Some(m.scaler().clone()),
                serde_json::to_value(SvmParams {
                    schema: m.schema(),
                    weights: m.weights().to_vec(),
                    bias: m.bias(),
                    lambda: m.lambda(),
                    epochs: m.epochs(),
                }),
            ),
        };
        let doc = json!({
            "format_version": MODEL_FORMAT_VERSION,
            "algo": self.algo(),
            "scaler": scaler,
            "params": params.expect("model parameters serialize"),
        });
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    /// Parses and validates a model document.
    pub fn load(text: &str) -> Result<TrainedModel> {
        let malformed = |reason: String| Error::MalformedDocument { reason };
        let value: Value =
            serde_json::from_str(text).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("expected a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "format_version" | "algo" | "scaler" | "params") {
                return Err(malformed(format!("unknown field `{key}`")));
            }
        }
        let version = obj
            .get("format_version")
            .ok_or_else(|| malformed("missing field `format_version`".into()))?
            .as_u64()
            .ok_or_else(|| malformed("`format_version` must be an unsigned integer".into()))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: version });
        }
        let algo = obj
            .get("algo")
            .ok_or_else(|| malformed("missing field `algo`".into()))?
            .as_str()
            .ok_or_else(|| malformed("`algo` must be a string".into()))?;
        let params = obj
            .get("params")
            .ok_or_else(|| malformed("missing field `params`".into()))?
            .clone();
        let scaler: Option<Scaler> = match obj.get("scaler") {
            None => return Err(malformed("missing field `scaler`".into())),
            Some(Value::Null) => None,
            Some(v) => Some(
                serde_json::from_value(v.clone())
                    .map_err(|e| malformed(format!("invalid scaler: {e}")))
                    .and_then(|raw: Scaler| {
                        Scaler::from_parts(raw.means().to_vec(), raw.stds().to_vec())
                    })?,
            ),
        };

        let require_scaler = || {
            scaler
                .clone()
                .ok_or_else(|| malformed(format!("algo `{algo}` requires a scaler")))
        };
        let forbid_scaler = || {
            if scaler.is_some() {
                Err(malformed(format!("algo `{algo}` does not take a scaler")))
            } else {
                Ok(())
            }
        };

        match algo {
            "knn" => {
                let p: KnnParams = serde_json::from_value(params)
                    .map_err(|e| malformed(format!("invalid knn params: {e}")))?;
                Ok(TrainedModel::Knn(KnnModel::from_parts(
                    p.k,
                    p.schema,
                    require_scaler()?,
                    p.rows,
                    p.targets,
                )?))
            }
            "nb" => {
                forbid_scaler()?;
                let p: NbParams = serde_json::from_value(params)
                    .map_err(|e| malformed(format!("invalid nb params: {e}")))?;
                Ok(TrainedModel::NaiveBayes(NaiveBayesModel::from_parts(
                    p.schema,
                    p.log_priors,
                    p.means,
                    p.variances,
                )?))
            }
            "tree" => {
                forbid_scaler()?;
                let p: TreeParams = serde_json::from_value(params)
                    .map_err(|e| malformed(format!("invalid tree params: {e}")))?;
                Ok(TrainedModel::Tree(TreeModel::from_parts(
                    p.schema,
                    p.root,
                    p.max_depth,
                    p.min_samples_leaf,
                )?))
            }
            "svm" => {
                let p: SvmParams = serde_json::from_value(params)
                    .map_err(|e| malformed(format!("invalid svm params: {e}")))?;
                Ok(TrainedModel::Svm(SvmModel::from_parts(
                    p.schema,
                    require_scaler()?,
                    p.weights,
                    p.bias,
                    p.lambda,
                    p.epochs,
                )?))
            }
            other => Err(Error::UnknownAlgo {
                algo: other.to_string(),
            }),
        }
    }
}
