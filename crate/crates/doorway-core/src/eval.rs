//! Stratified cross-validation, classification metrics, and the
//! four-classifier accuracy benchmark.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::classify::{KnnModel, NaiveBayesModel, SvmModel, TrainedModel, TreeModel};
use crate::error::{Error, Result};
use crate::features::Dataset;

/// A classifier choice with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgoSpec {
    Knn { k: usize },
    Svm { lambda: f64, epochs: usize, seed: u64 },
    NaiveBayes,
    Tree { max_depth: usize, min_samples_leaf: usize },
}

impl AlgoSpec {
    pub fn default_knn() -> AlgoSpec {
        AlgoSpec::Knn { k: 5 }
    }

    pub fn default_svm() -> AlgoSpec {
        AlgoSpec::Svm {
            lambda: 0.01,
            epochs: 200,
            seed: 42,
        }
    }

    pub fn default_nb() -> AlgoSpec {
        AlgoSpec::NaiveBayes
    }

    pub fn default_tree() -> AlgoSpec {
        AlgoSpec::Tree {
            max_depth: 4,
            min_samples_leaf: 1,
        }
    }

    /// The benchmark roster, in its fixed reporting order.
    pub fn benchmark_roster() -> [AlgoSpec; 4] {
        [
            Self::default_knn(),
            Self::default_svm(),
            Self::default_nb(),
            Self::default_tree(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            AlgoSpec::Knn { .. } => "knn",
            AlgoSpec::Svm { .. } => "svm",
            AlgoSpec::NaiveBayes => "nb",
            AlgoSpec::Tree { .. } => "tree",
        }
    }

    pub fn train(&self, dataset: &Dataset) -> Result<TrainedModel> {
        Ok(match *self {
            AlgoSpec::Knn { k } => TrainedModel::Knn(KnnModel::train(dataset, k)?),
            AlgoSpec::Svm {
                lambda,
                epochs,
                seed,
            } => TrainedModel::Svm(SvmModel::train(dataset, lambda, epochs, seed)?),
            AlgoSpec::NaiveBayes => TrainedModel::NaiveBayes(NaiveBayesModel::train(dataset)?),
            AlgoSpec::Tree {
                max_depth,
                min_samples_leaf,
            } => TrainedModel::Tree(TreeModel::train(dataset, max_depth, min_samples_leaf)?),
        })
    }
}

/// 2x2 confusion counts with "entrance" as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_positives: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    #[serde(rename = "tn")]
    pub true_negatives: usize,
}

impl ConfusionMatrix {
    pub fn record(&mut self, target: bool, predicted: bool) {
        match (target, predicted) {
            (true, true) => self.true_positives += 1,
            (false, true) => self.false_positives += 1,
            (true, false) => self.false_negatives += 1,
            (false, false) => self.true_negatives += 1,
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        self.true_positives += other.true_positives;
        self.false_positives += other.false_positives;
        self.false_negatives += other.false_negatives;
        self.true_negatives += other.true_negatives;
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

/// Pooled classification metrics. Zero-denominator ratios are defined as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(flatten)]
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Metrics {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Metrics {
        let c = &confusion;
        let accuracy = ratio(c.true_positives + c.true_negatives, c.total());
        let precision = ratio(c.true_positives, c.true_positives + c.false_positives);
        let recall = ratio(c.true_positives, c.true_positives + c.false_negatives);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            confusion,
            accuracy,
            precision,
            recall,
            f1,
        }
    }
}

/// Cross-validation configuration. Folds are always stratified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig { folds: 5, seed: 42 }
    }
}

/// One train/test index split. Folds partition the dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Splits the dataset into stratified folds: each class's indices are
/// shuffled with a generator seeded from `config.seed` (negatives first,
/// then positives, on one stream) and dealt round-robin, so per-fold class
/// counts differ from proportionality by at most one sample.
pub fn stratified_kfold(dataset: &Dataset, config: &CvConfig) -> Result<Vec<Fold>> {
    if config.folds < 2 {
        return Err(Error::BadHyperparameter {
            name: "folds",
            reason: format!("must be at least 2, got {}", config.folds),
        });
    }
    let n_pos = dataset.n_positive();
    let minority = n_pos.min(dataset.n_rows() - n_pos);
    if minority < config.folds {
        return Err(Error::TooFewMinoritySamples {
            folds: config.folds,
            minority,
        });
    }

    let mut negatives: Vec<usize> = Vec::new();
    let mut positives: Vec<usize> = Vec::new();
    for (i, &t) in dataset.targets().iter().enumerate() {
        if t {
            positives.push(i);
        } else {
            negatives.push(i);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    negatives.shuffle(&mut rng);
    positives.shuffle(&mut rng);

    let mut tests: Vec<Vec<usize>> = vec![Vec::new(); config.folds];
    for class in [&negatives, &positives] {
        for (i, &index) in class.iter().enumerate() {
            tests[i % config.folds].push(index);
        }
    }

    let mut folds = Vec::with_capacity(config.folds);
    for test in &mut tests {
        test.sort_unstable();
        let mut in_test = vec![false; dataset.n_rows()];
        for &i in test.iter() {
            in_test[i] = true;
        }
        let train = (0..dataset.n_rows()).filter(|&i| !in_test[i]).collect();
        folds.push(Fold {
            train,
            test: std::mem::take(test),
        });
    }
    Ok(folds)
}

fn eval_fold(algo: &AlgoSpec, dataset: &Dataset, fold: &Fold) -> Result<ConfusionMatrix> {
    let train = dataset.subset(&fold.train)?;
    let model = algo.train(&train)?;
    let mut confusion = ConfusionMatrix::default();
    for &i in &fold.test {
        let predicted = model.predict(&dataset.row(i))?;
        confusion.record(dataset.target(i), predicted);
    }
    Ok(confusion)
}

fn pool(confusions: Vec<ConfusionMatrix>) -> Metrics {
    let mut total = ConfusionMatrix::default();
    for c in &confusions {
        total.merge(c);
    }
    Metrics::from_confusion(total)
}

/// Cross-validates one classifier: per fold, the model (including its
/// scaler) is fitted on the training split only, test predictions are
/// pooled into a single confusion matrix, and metrics come from the pooled
/// counts. Folds run in parallel; the result is identical to
/// [`evaluate_sequential`].
pub fn evaluate(algo: &AlgoSpec, dataset: &Dataset, config: &CvConfig) -> Result<Metrics> {
    let folds = stratified_kfold(dataset, config)?;
    let confusions = folds
        .par_iter()
        .map(|fold| eval_fold(algo, dataset, fold))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool(confusions))
}

/// Sequential reference path for [`evaluate`].
pub fn evaluate_sequential(
    algo: &AlgoSpec,
    dataset: &Dataset,
    config: &CvConfig,
) -> Result<Metrics> {
    let folds = stratified_kfold(dataset, config)?;
    let confusions = folds
        .iter()
        .map(|fold| eval_fold(algo, dataset, fold))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool(confusions))
}

/// Evaluates the default roster under identical folds. Rows come back in
/// the fixed order knn, svm, nb, tree.
pub fn benchmark_all(dataset: &Dataset, config: &CvConfig) -> Result<Vec<(AlgoSpec, Metrics)>> {
    let folds = stratified_kfold(dataset, config)?;
    AlgoSpec::benchmark_roster()
        .into_iter()
        .map(|algo| {
            let confusions = folds
                .par_iter()
                .map(|fold| eval_fold(&algo, dataset, fold))
                .collect::<Result<Vec<_>>>()?;
            Ok((algo, pool(confusions)))
        })
        .collect()
}

/// Renders benchmark rows as CSV with the fixed header
/// `algo,accuracy,precision,recall,f1,tp,fp,fn,tn`.
pub fn benchmark_to_csv(rows: &[(AlgoSpec, Metrics)]) -> String {
    let mut out = String::from("algo,accuracy,precision,recall,f1,tp,fp,fn,tn\n");
    for (algo, m) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            algo.name(),
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.confusion.true_positives,
            m.confusion.false_positives,
            m.confusion.false_negatives,
            m.confusion.true_negatives,
        ));
    }
    out
}

/// Renders benchmark rows as a JSON array of flat records.
pub fn benchmark_to_json(rows: &[(AlgoSpec, Metrics)]) -> String {
    let items: Vec<serde_json::Value> = rows
        .iter()
        .map(|(algo, m)| {
            let mut value = serde_json::to_value(m).expect("metrics serialize");
            value
                .as_object_mut()
                .expect("metrics are an object")
                .insert("algo".into(), json!(algo.name()));
            value
        })
        .collect();
    serde_json::to_string_pretty(&items).expect("benchmark table serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::synth::{gen_dataset, SignalModelParams, TrajectorySpec};
    use proptest::prelude::*;

    /// 100 rows, 20 positive, features that separate the classes.
    fn toy_dataset() -> Dataset {
        let mut rows = Vec::new();
        let mut targets = Vec::new();
        for i in 0..100 {
            let positive = i % 5 == 0;
            let base = if positive { 10.0 } else { 20.0 };
            let jitter = (i % 7) as f64 * 0.25;
            rows.push(FeatureVector::raw3([
                base + jitter,
                base / 2.0 + jitter,
                -50.0 - base - jitter,
            ]));
            targets.push(positive);
        }
        Dataset::new(rows, targets).unwrap()
    }

    #[test]
    fn folds_are_stratified_and_partition_the_dataset() {
        let ds = toy_dataset();
        let config = CvConfig { folds: 5, seed: 42 };
        let folds = stratified_kfold(&ds, &config).unwrap();
        assert_eq!(folds.len(), 5);
        let mut seen = vec![0usize; ds.n_rows()];
        for fold in &folds {
            // 20 positives / 5 folds => exactly 4 positives and 16 negatives.
            let pos = fold.test.iter().filter(|&&i| ds.target(i)).count();
            assert_eq!(pos, 4);
            assert_eq!(fold.test.len(), 20);
            assert_eq!(fold.train.len(), 80);
            for &i in &fold.test {
                seen[i] += 1;
            }
            // Train and test are disjoint and jointly exhaustive.
            let mut all: Vec<usize> = fold.train.iter().chain(&fold.test).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..ds.n_rows()).collect::<Vec<_>>());
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn too_few_minority_samples_is_rejected() {
        let rows = vec![FeatureVector::raw3([1.0, 1.0, -1.0]); 10];
        let mut targets = vec![false; 10];
        targets[0] = true;
        let ds = Dataset::new(rows, targets).unwrap();
        assert!(matches!(
            stratified_kfold(&ds, &CvConfig { folds: 2, seed: 1 }),
            Err(Error::TooFewMinoritySamples { folds: 2, minority: 1 })
        ));
        assert!(matches!(
            stratified_kfold(&toy_dataset(), &CvConfig { folds: 1, seed: 1 }),
            Err(Error::BadHyperparameter { name: "folds", .. })
        ));
    }

    #[test]
    fn folds_are_deterministic_in_the_seed() {
        let ds = toy_dataset();
        let config = CvConfig { folds: 4, seed: 9 };
        assert_eq!(
            stratified_kfold(&ds, &config).unwrap(),
            stratified_kfold(&ds, &config).unwrap()
        );
        let other = stratified_kfold(&ds, &CvConfig { folds: 4, seed: 10 }).unwrap();
        assert_ne!(stratified_kfold(&ds, &config).unwrap(), other);
    }

    #[test]
    fn metrics_identities_on_integer_counts() {
        let confusion = ConfusionMatrix {
            true_positives: 6,
            false_positives: 2,
            false_negatives: 4,
            true_negatives: 88,
        };
        let m = Metrics::from_confusion(confusion);
        assert_eq!(m.accuracy, 94.0 / 100.0);
        assert_eq!(m.precision, 6.0 / 8.0);
        assert_eq!(m.recall, 6.0 / 10.0);
        assert_eq!(m.f1, 2.0 * (0.75 * 0.6) / (0.75 + 0.6));
    }

    #[test]
    fn zero_denominators_yield_zero_metrics() {
        // A constant-negative classifier on 20/80 imbalanced data.
        let confusion = ConfusionMatrix {
            true_positives: 0,
            false_positives: 0,
            false_negatives: 20,
            true_negatives: 80,
        };
        let m = Metrics::from_confusion(confusion);
        assert_eq!(m.accuracy, 0.80);
        assert_eq!(m.precision, 0.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn perfectly_separable_data_evaluates_to_accuracy_one() {
        let ds = toy_dataset();
        let m = evaluate(&AlgoSpec::default_knn(), &ds, &CvConfig::default()).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn parallel_and_sequential_evaluation_agree_exactly() {
        let params = SignalModelParams::default();
        let spec = TrajectorySpec::default();
        let ds = gen_dataset(&params, &spec, 1.0, 20, 3).unwrap().1;
        let config = CvConfig::default();
        for algo in AlgoSpec::benchmark_roster() {
            let par = evaluate(&algo, &ds, &config).unwrap();
            let seq = evaluate_sequential(&algo, &ds, &config).unwrap();
            assert_eq!(par, seq, "{} diverged", algo.name());
        }
    }

    #[test]
    fn benchmark_emits_four_rows_in_fixed_order() {
        let ds = toy_dataset();
        let rows = benchmark_all(&ds, &CvConfig::default()).unwrap();
        let names: Vec<&str> = rows.iter().map(|(a, _)| a.name()).collect();
        assert_eq!(names, ["knn", "svm", "nb", "tree"]);
        let again = benchmark_all(&ds, &CvConfig::default()).unwrap();
        assert_eq!(benchmark_to_csv(&rows), benchmark_to_csv(&again));
    }

    #[test]
    fn csv_rendering_has_the_fixed_header() {
        let rows = benchmark_all(&toy_dataset(), &CvConfig::default()).unwrap();
        let csv = benchmark_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "algo,accuracy,precision,recall,f1,tp,fp,fn,tn"
        );
        assert_eq!(lines.count(), 4);
        let parsed: serde_json::Value =
            serde_json::from_str(&benchmark_to_json(&rows)).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 4);
        assert_eq!(parsed[0]["algo"], "knn");
        assert!(parsed[0]["tp"].is_u64());
    }

    #[test]
    fn scaler_statistics_do_not_leak_from_test_rows() {
        // Perturbing a row only ever changes folds where it lands in the
        // training split; when it is a test row, the fitted model must be
        // unaffected. Train on fold 0's split and check against a dataset
        // whose fold-0 test rows were overwritten.
        let ds = toy_dataset();
        let config = CvConfig::default();
        let folds = stratified_kfold(&ds, &config).unwrap();
        let fold = &folds[0];

        let mut rows: Vec<FeatureVector> = (0..ds.n_rows()).map(|i| ds.row(i)).collect();
        for &i in &fold.test {
            rows[i] = FeatureVector::raw3([999.0, 999.0, -999.0]);
        }
        let perturbed = Dataset::new(rows, ds.targets().to_vec()).unwrap();

        let m1 = AlgoSpec::default_knn().train(&ds.subset(&fold.train).unwrap()).unwrap();
        let m2 = AlgoSpec::default_knn()
            .train(&perturbed.subset(&fold.train).unwrap())
            .unwrap();
        assert_eq!(m1, m2);
    }

    proptest! {
        #[test]
        fn every_index_lands_in_exactly_one_test_fold(
            n_pos in 4usize..20,
            n_neg in 4usize..40,
            folds in 2usize..4,
            seed in 0u64..1000,
        ) {
            prop_assume!(n_pos.min(n_neg) >= folds);
            let mut rows = Vec::new();
            let mut targets = Vec::new();
            for i in 0..(n_pos + n_neg) {
                rows.push(FeatureVector::raw3([i as f64, 0.0, 0.0]));
                targets.push(i < n_pos);
            }
            let ds = Dataset::new(rows, targets).unwrap();
            let result = stratified_kfold(&ds, &CvConfig { folds, seed }).unwrap();
            let mut seen = vec![0usize; ds.n_rows()];
            for fold in &result {
                for &i in &fold.test {
                    seen[i] += 1;
                }
                for &i in &fold.train {
                    prop_assert!(!fold.test.contains(&i));
                }
                // Class proportions within one sample of the global share.
                let pos = fold.test.iter().filter(|&&i| ds.target(i)).count() as f64;
                let expected = n_pos as f64 * fold.test.len() as f64 / ds.n_rows() as f64;
                prop_assert!((pos - expected).abs() <= 1.0 + 1e-9);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
