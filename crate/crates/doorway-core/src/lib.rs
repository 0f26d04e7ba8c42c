//! Detects the position of a building entrance from GPS signal quality and
//! Wi-Fi received signal strength along an approach walk.
//!
//! The pipeline has four stages:
//!
//! 1. **Data** ([`reading`], [`csv_io`], [`features`], [`scaler`]):
//!    validated sensor readings, CSV ingestion, feature extraction, and
//!    standardization.
//! 2. **Generation** ([`synth`]): a deterministic signal model (logistic
//!    GPS transition plus log-distance Wi-Fi path loss) that produces
//!    labeled approach walks from a seed.
//! 3. **Classification** ([`classify`]): k-NN, Gaussian naive Bayes, a
//!    CART decision tree with rule extraction, and a linear SVM, all built
//!    from first principles, with a versioned JSON model format.
//! 4. **Detection** ([`eval`], [`estimate`]): stratified cross-validation
//!    with pooled metrics, a four-classifier benchmark, and the per-trace
//!    entrance estimate in meters.
//!
//! Everything downstream of a seed is deterministic, including parallel
//! trace generation and fold evaluation.

pub mod classify;
pub mod csv_io;
pub mod error;
pub mod estimate;
pub mod eval;
pub mod features;
pub mod reading;
pub mod scaler;
pub mod synth;

pub use classify::{
    KnnModel, NaiveBayesModel, Rule, SvmModel, TrainedModel, TreeModel, TreeNode,
    MODEL_FORMAT_VERSION,
};
pub use csv_io::{parse_csv, write_csv, CSV_COLUMNS};
pub use error::{Error, Result};
pub use estimate::{classify_trace, estimate_entrance, smooth, DetectionResult};
pub use eval::{
    benchmark_all, benchmark_to_csv, benchmark_to_json, evaluate, evaluate_sequential,
    stratified_kfold, AlgoSpec, ConfusionMatrix, CvConfig, Fold, Metrics,
};
pub use features::{Dataset, FeatureSchema, FeatureVector};
pub use reading::{Label, SensorReading, Trace};
pub use scaler::Scaler;
pub use synth::{
    expected_rss, expected_sats, expected_sats_mean, expected_snr, gen_dataset, gen_trace,
    trace_seed, SignalModelParams, TrajectorySpec,
};
