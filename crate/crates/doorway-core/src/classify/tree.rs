//! CART decision tree with Gini impurity, plus rule extraction.
//!
//! The tree works on raw (unstandardized) features. Candidate thresholds
//! are the midpoints between consecutive distinct sorted feature values;
//! the split with the largest Gini decrease wins, with ties broken toward
//! the lower feature index and then the lower threshold. Descent sends
//! `value <= threshold` to the left child.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureSchema, FeatureVector};

/// A tree node: either an internal split or a leaf with class counts
/// indexed `[no, yes]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        counts: [usize; 2],
    },
}

impl TreeNode {
    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn validate(&self, n_features: usize) -> bool {
        match self {
            TreeNode::Leaf { counts } => counts[0] + counts[1] > 0,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                *feature < n_features
                    && threshold.is_finite()
                    && left.validate(n_features)
                    && right.validate(n_features)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    schema: FeatureSchema,
    root: TreeNode,
    max_depth: usize,
    min_samples_leaf: usize,
}

/// Gini impurity of a class-count pair.
fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    decrease: f64,
}

impl TreeModel {
    pub fn train(dataset: &Dataset, max_depth: usize, min_samples_leaf: usize) -> Result<TreeModel> {
        if max_depth == 0 {
            return Err(Error::BadHyperparameter {
                name: "max_depth",
                reason: "must be at least 1".into(),
            });
        }
        if min_samples_leaf == 0 {
            return Err(Error::BadHyperparameter {
                name: "min_samples_leaf",
                reason: "must be at least 1".into(),
            });
        }
        let indices: Vec<usize> = (0..dataset.n_rows()).collect();
        let root = build(dataset, &indices, 0, max_depth, min_samples_leaf);
        Ok(TreeModel {
            schema: dataset.schema(),
            root,
            max_depth,
            min_samples_leaf,
        })
    }

    /// Rebuilds a model from serialized parts, validating its invariants.
    pub fn from_parts(
        schema: FeatureSchema,
        root: TreeNode,
        max_depth: usize,
        min_samples_leaf: usize,
    ) -> Result<TreeModel> {
        if max_depth == 0 || min_samples_leaf == 0 {
            return Err(Error::MalformedDocument {
                reason: "tree hyperparameters must be at least 1".into(),
            });
        }
        if !root.validate(schema.len()) || root.depth() > max_depth {
            return Err(Error::MalformedDocument {
                reason: "tree nodes must have valid features, finite thresholds, nonzero leaf \
                         counts, and depth within max_depth"
                    .into(),
            });
        }
        Ok(TreeModel {
            schema,
            root,
            max_depth,
            min_samples_leaf,
        })
    }

    pub fn schema(&self) -> FeatureSchema {
        self.schema
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn min_samples_leaf(&self) -> usize {
        self.min_samples_leaf
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn predict(&self, v: &FeatureVector) -> Result<bool> {
        if v.schema() != self.schema {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                found: v.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { counts } => return Ok(counts[1] > counts[0]),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if v.values()[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    /// One rule per leaf whose majority class is entrance, root-to-leaf
    /// condition order.
    pub fn extract_rules(&self) -> Vec<Rule> {
        let mut rules = Vec::new();
        let mut path = Vec::new();
        collect_rules(&self.root, self.schema, &mut path, &mut rules);
        rules
    }
}

fn build(
    dataset: &Dataset,
    indices: &[usize],
    depth: usize,
    max_depth: usize,
    min_samples_leaf: usize,
) -> TreeNode {
    let counts = class_counts(dataset, indices);
    let leaf = TreeNode::Leaf { counts };
    if depth >= max_depth || counts[0] == 0 || counts[1] == 0 {
        return leaf;
    }
    let best = match best_split(dataset, indices, counts, min_samples_leaf) {
        Some(b) => b,
        None => return leaf,
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| dataset.row_values(i)[best.feature] <= best.threshold);
    TreeNode::Split {
        feature: best.feature,
        threshold: best.threshold,
        left: Box::new(build(dataset, &left_idx, depth + 1, max_depth, min_samples_leaf)),
        right: Box::new(build(
            dataset,
            &right_idx,
            depth + 1,
            max_depth,
            min_samples_leaf,
        )),
    }
}

fn class_counts(dataset: &Dataset, indices: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &i in indices {
        counts[usize::from(dataset.target(i))] += 1;
    }
    counts
}

/// Scans features in index order and thresholds in ascending order,
/// keeping a split only when its Gini decrease is strictly larger than the
/// incumbent's, which realizes the documented tie-break.
fn best_split(
    dataset: &Dataset,
    indices: &[usize],
    parent_counts: [usize; 2],
    min_samples_leaf: usize,
) -> Option<BestSplit> {
    let n = indices.len() as f64;
    let parent_gini = gini(parent_counts);
    let mut best: Option<BestSplit> = None;

    for feature in 0..dataset.n_features() {
        let mut ordered: Vec<(f64, bool)> = indices
            .iter()
            .map(|&i| (dataset.row_values(i)[feature], dataset.target(i)))
            .collect();
        ordered.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left = [0usize; 2];
        let mut pos = 0;
        while pos < ordered.len() {
            // Advance over one block of equal feature values.
            let value = ordered[pos].0;
            while pos < ordered.len() && ordered[pos].0 == value {
                left[usize::from(ordered[pos].1)] += 1;
                pos += 1;
            }
            if pos == ordered.len() {
                break;
            }
            let threshold = (value + ordered[pos].0) / 2.0;
            if threshold >= ordered[pos].0 {
                // Adjacent floats: the midpoint rounded up to the next value,
                // so a `<=` split cannot separate the blocks.
                continue;
            }
            let n_left = left[0] + left[1];
            let n_right = indices.len() - n_left;
            if n_left < min_samples_leaf || n_right < min_samples_leaf {
                continue;
            }
            let right = [parent_counts[0] - left[0], parent_counts[1] - left[1]];
            let decrease = parent_gini
                - (n_left as f64 / n) * gini(left)
                - (n_right as f64 / n) * gini(right);
            if decrease > 0.0 && best.as_ref().is_none_or(|b| decrease > b.decrease) {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    best
}

/// Comparison operator of a rule literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleOp {
    Le,
    Gt,
}

/// One literal of a conjunction: `feature <op> threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleCondition {
    pub feature: usize,
    pub op: RuleOp,
    pub threshold: f64,
}

/// A root-to-leaf conjunction that classifies a vector as entrance.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    schema: FeatureSchema,
    conditions: Vec<RuleCondition>,
}

impl Rule {
    pub fn conditions(&self) -> &[RuleCondition] {
        &self.conditions
    }

    /// Evaluates the conjunction against a feature vector.
    pub fn matches(&self, v: &FeatureVector) -> Result<bool> {
        if v.schema() != self.schema {
            return Err(Error::DimensionMismatch {
                expected: self.schema.len(),
                found: v.len(),
            });
        }
        Ok(self.conditions.iter().all(|c| {
            let x = v.values()[c.feature];
            match c.op {
                RuleOp::Le => x <= c.threshold,
                RuleOp::Gt => x > c.threshold,
            }
        }))
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.conditions.is_empty() {
            return write!(f, "always → Entrance");
        }
        let names = self.schema.feature_names();
        let parts: Vec<String> = self
            .conditions
            .iter()
            .map(|c| {
                let op = match c.op {
                    RuleOp::Le => "≤",
                    RuleOp::Gt => ">",
                };
                format!("{} {} {}", names[c.feature], op, c.threshold)
            })
            .collect();
        write!(f, "{} → Entrance", parts.join(" and "))
    }
}

fn collect_rules(
    node: &TreeNode,
    schema: FeatureSchema,
    path: &mut Vec<RuleCondition>,
    rules: &mut Vec<Rule>,
) {
    match node {
        TreeNode::Leaf { counts } => {
            if counts[1] > counts[0] {
                rules.push(Rule {
                    schema,
                    conditions: path.clone(),
                });
            }
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            path.push(RuleCondition {
                feature: *feature,
                op: RuleOp::Le,
                threshold: *threshold,
            });
            collect_rules(left, schema, path, rules);
            path.pop();
            path.push(RuleCondition {
                feature: *feature,
                op: RuleOp::Gt,
                threshold: *threshold,
            });
            collect_rules(right, schema, path, rules);
            path.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::knn::tests::{WALK_ROWS, WALK_TARGETS};
    use proptest::prelude::*;

    fn walk_dataset() -> Dataset {
        let rows = WALK_ROWS.iter().map(|&r| FeatureVector::raw3(r)).collect();
        Dataset::new(rows, WALK_TARGETS.to_vec()).unwrap()
    }

    fn training_accuracy(model: &TreeModel, ds: &Dataset) -> f64 {
        let correct = (0..ds.n_rows())
            .filter(|&i| model.predict(&ds.row(i)).unwrap() == ds.target(i))
            .count();
        correct as f64 / ds.n_rows() as f64
    }

    /// Exhaustive reference for the root split: every midpoint of every
    /// feature, first strictly-better candidate wins.
    fn enumerate_root_split(ds: &Dataset, min_leaf: usize) -> Option<(usize, f64, f64)> {
        let n = ds.n_rows();
        let parent = {
            let pos = ds.n_positive();
            gini([n - pos, pos])
        };
        let mut best: Option<(usize, f64, f64)> = None;
        for f in 0..ds.n_features() {
            let mut values: Vec<f64> = ds.rows().iter().map(|r| r[f]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for pair in values.windows(2) {
                let t = (pair[0] + pair[1]) / 2.0;
                let mut left = [0usize; 2];
                let mut right = [0usize; 2];
                for (row, &target) in ds.rows().iter().zip(ds.targets()) {
                    let side = if row[f] <= t { &mut left } else { &mut right };
                    side[usize::from(target)] += 1;
                }
                let nl = left[0] + left[1];
                let nr = right[0] + right[1];
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let dec = parent
                    - (nl as f64 / n as f64) * gini(left)
                    - (nr as f64 / n as f64) * gini(right);
                if dec > 0.0 && best.map_or(true, |b| dec > b.2) {
                    best = Some((f, t, dec));
                }
            }
        }
        best
    }

    #[test]
    fn isolates_the_single_entrance_row() {
        let ds = walk_dataset();
        let model = TreeModel::train(&ds, 3, 1).unwrap();
        assert_eq!(training_accuracy(&model, &ds), 1.0);
        assert!(model.depth() <= 3);
        // The entrance reading itself descends to a positive leaf.
        assert!(model.predict(&FeatureVector::raw3([9.0, 19.0, -54.0])).unwrap());
    }

    #[test]
    fn pure_input_is_a_single_leaf() {
        let rows = vec![
            FeatureVector::raw3([1.0, 2.0, 3.0]),
            FeatureVector::raw3([4.0, 5.0, 6.0]),
        ];
        let ds = Dataset::new(rows, vec![true, true]).unwrap();
        let model = TreeModel::train(&ds, 4, 1).unwrap();
        assert_eq!(model.root(), &TreeNode::Leaf { counts: [0, 2] });
        assert!(model.predict(&FeatureVector::raw3([0.0, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn depth_one_root_matches_the_exhaustive_enumeration() {
        let ds = walk_dataset();
        let model = TreeModel::train(&ds, 1, 1).unwrap();
        let (feature, threshold, _) = enumerate_root_split(&ds, 1).unwrap();
        match model.root() {
            TreeNode::Split {
                feature: f,
                threshold: t,
                left,
                right,
            } => {
                assert_eq!(*f, feature);
                assert_eq!(*t, threshold);
                assert!(matches!(**left, TreeNode::Leaf { .. }));
                assert!(matches!(**right, TreeNode::Leaf { .. }));
                // With one positive among seven rows, at least one side is
                // majority-negative; the bigger side must predict "no".
                let majority_side_counts = match (&**left, &**right) {
                    (TreeNode::Leaf { counts: l }, TreeNode::Leaf { counts: r }) => {
                        if l[0] + l[1] >= r[0] + r[1] {
                            *l
                        } else {
                            *r
                        }
                    }
                    _ => unreachable!(),
                };
                assert!(majority_side_counts[0] > majority_side_counts[1]);
            }
            TreeNode::Leaf { .. } => panic!("expected one split at depth 1"),
        }
    }

    #[test]
    fn values_at_the_threshold_route_left() {
        let root = TreeNode::Split {
            feature: 0,
            threshold: 9.5,
            left: Box::new(TreeNode::Leaf { counts: [0, 1] }),
            right: Box::new(TreeNode::Leaf { counts: [6, 0] }),
        };
        let model = TreeModel::from_parts(FeatureSchema::Raw3, root, 1, 1).unwrap();
        assert!(model.predict(&FeatureVector::raw3([9.5, 0.0, 0.0])).unwrap());
        assert!(!model.predict(&FeatureVector::raw3([9.51, 0.0, 0.0])).unwrap());
    }

    #[test]
    fn rule_rendering_matches_the_canonical_names() {
        let root = TreeNode::Split {
            feature: 0,
            threshold: 9.5,
            left: Box::new(TreeNode::Leaf { counts: [0, 1] }),
            right: Box::new(TreeNode::Leaf { counts: [6, 0] }),
        };
        let model = TreeModel::from_parts(FeatureSchema::Raw3, root, 1, 1).unwrap();
        let rules = model.extract_rules();
        assert_eq!(rules.len(), 1);
        assert_eq!(rules[0].to_string(), "num_satellites ≤ 9.5 → Entrance");
    }

    #[test]
    fn tree_without_entrance_leaf_has_no_rules() {
        let model = TreeModel::from_parts(
            FeatureSchema::Raw3,
            TreeNode::Leaf { counts: [5, 0] },
            1,
            1,
        )
        .unwrap();
        assert!(model.extract_rules().is_empty());
    }

    #[test]
    fn rules_replay_the_tree_on_training_rows() {
        let ds = walk_dataset();
        let model = TreeModel::train(&ds, 2, 1).unwrap();
        let rules = model.extract_rules();
        for i in 0..ds.n_rows() {
            let v = ds.row(i);
            let by_tree = model.predict(&v).unwrap();
            let by_rules = rules.iter().any(|r| r.matches(&v).unwrap());
            assert_eq!(by_tree, by_rules);
        }
    }

    #[test]
    fn hyperparameters_are_validated() {
        let ds = walk_dataset();
        assert!(matches!(
            TreeModel::train(&ds, 0, 1),
            Err(Error::BadHyperparameter { name: "max_depth", .. })
        ));
        assert!(matches!(
            TreeModel::train(&ds, 3, 0),
            Err(Error::BadHyperparameter { name: "min_samples_leaf", .. })
        ));
    }

    #[test]
    fn min_samples_leaf_bounds_leaf_sizes() {
        let ds = walk_dataset();
        let model = TreeModel::train(&ds, 5, 3).unwrap();
        fn smallest_leaf(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { counts } => counts[0] + counts[1],
                TreeNode::Split { left, right, .. } => smallest_leaf(left).min(smallest_leaf(right)),
            }
        }
        assert!(smallest_leaf(model.root()) >= 3);
    }

    proptest! {
        #[test]
        fn training_accuracy_is_non_decreasing_in_depth(
            rows in proptest::collection::vec(
                ((0.0f64..30.0), (0.0f64..60.0), (-120.0f64..0.0), proptest::bool::ANY),
                4..40,
            ),
        ) {
            prop_assume!(rows.iter().any(|r| r.3) && rows.iter().any(|r| !r.3));
            let fvs = rows.iter().map(|&(a, b, c, _)| FeatureVector::raw3([a, b, c])).collect();
            let targets = rows.iter().map(|r| r.3).collect();
            let ds = Dataset::new(fvs, targets).unwrap();
            let mut last = 0.0;
            for depth in 1..=5 {
                let model = TreeModel::train(&ds, depth, 1).unwrap();
                let acc = training_accuracy(&model, &ds);
                prop_assert!(acc >= last - 1e-12);
                last = acc;
            }
        }
    }
}
