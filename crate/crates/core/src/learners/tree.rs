use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::split::best_split;
use super::table::FeatureTable;
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::LabelScheme;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { class_counts: Vec<usize> },
    /// Rows with `value <= threshold` go left.
    Split { attribute: usize, threshold: f64, left: Box<TreeNode>, right: Box<TreeNode> },
}

impl TreeNode {
    pub fn leaf_for(&self, values: &[f64]) -> &[usize] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class_counts } => return class_counts,
                TreeNode::Split { attribute, threshold, left, right } => {
                    node = if values[*attribute] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Sum of the leaf counts below this node.
    pub fn class_counts(&self) -> Vec<usize> {
        match self {
            TreeNode::Leaf { class_counts } => class_counts.clone(),
            TreeNode::Split { left, right, .. } => {
                let mut c = left.class_counts();
                for (a, b) in c.iter_mut().zip(right.class_counts()) {
                    *a += b;
                }
                c
            }
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a TreeNode)) {
        f(self);
        if let TreeNode::Split { left, right, .. } = self {
            left.visit(f);
            right.visit(f);
        }
    }
}

/// Index of the largest count; ties go to the lower class.
pub fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn normalize(counts: &[usize]) -> Vec<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        let k = counts.len() as f64;
        return vec![1.0 / k; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub root: TreeNode,
    pub scheme: LabelScheme,
    /// Checksum of the attribute list the tree was trained on.
    pub registry_checksum: String,
    pub n_features: usize,
}

impl TreeModel {
    /// True when training collapsed to a single leaf.
    pub fn is_trivial(&self) -> bool {
        matches!(self.root, TreeNode::Leaf { .. })
    }

    pub fn distribution(&self, values: &[f64]) -> Vec<f64> {
        normalize(self.root.leaf_for(values))
    }

    pub fn label(&self, values: &[f64]) -> usize {
        majority(self.root.leaf_for(values))
    }
}

/// Candidate attributes at each node: all of them, or `mtry` drawn without replacement.
pub(crate) enum Candidates<'r> {
    All,
    Sample { mtry: usize, rng: &'r mut ChaCha8Rng },
}

impl Candidates<'_> {
    fn draw(&mut self, n_features: usize) -> Vec<usize> {
        match self {
            Candidates::Sample { mtry, rng } if *mtry < n_features => {
                let mut v: Vec<usize> = rand::seq::index::sample(*rng, n_features, *mtry).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..n_features).collect(),
        }
    }
}

pub(crate) fn grow(
    table: &FeatureTable,
    rows: &[usize],
    depth: usize,
    config: &TrainConfig,
    candidates: &mut Candidates<'_>,
) -> TreeNode {
    let counts = table.class_counts(rows);
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if pure || depth >= config.max_depth || rows.len() < 2 * config.min_leaf.max(1) {
        return TreeNode::Leaf { class_counts: counts };
    }
    let cands = candidates.draw(table.n_features());
    let Some(split) = best_split(table, rows, &cands, config.criterion, config.min_leaf) else {
        return TreeNode::Leaf { class_counts: counts };
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| table.value(r, split.attribute) <= split.threshold);
    let left = grow(table, &left_rows, depth + 1, config, candidates);
    let right = grow(table, &right_rows, depth + 1, config, candidates);
    TreeNode::Split { attribute: split.attribute, threshold: split.threshold, left: Box::new(left), right: Box::new(right) }
}

fn check_trainable(table: &FeatureTable) -> Result<()> {
    if table.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

fn single_class(table: &FeatureTable) -> bool {
    let all: Vec<usize> = (0..table.n_rows()).collect();
    table.class_counts(&all).iter().filter(|&&c| c > 0).count() < 2
}

fn model(table: &FeatureTable, root: TreeNode) -> TreeModel {
    TreeModel { root, scheme: table.scheme, registry_checksum: table.checksum(), n_features: table.n_features() }
}

/// One split over all attributes.
pub fn train_stump(table: &FeatureTable, config: &TrainConfig) -> Result<TreeModel> {
    let stump_config = TrainConfig { max_depth: 1, prune_fraction: 0.0, ..config.clone() };
    train_tree(table, &stump_config)
}

/// Greedy tree on all attributes, optionally followed by reduced-error
/// pruning against a seeded holdout share of `prune_fraction`.
pub fn train_tree(table: &FeatureTable, config: &TrainConfig) -> Result<TreeModel> {
    config.validate(table.n_features())?;
    check_trainable(table)?;
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    if single_class(table) {
        log::warn!("training data holds a single class; the model is one leaf");
        return Ok(model(table, TreeNode::Leaf { class_counts: table.class_counts(&rows) }));
    }
    if config.prune_fraction <= 0.0 {
        let root = grow(table, &rows, 0, config, &mut Candidates::All);
        return Ok(model(table, root));
    }
    let (grow_rows, holdout) = holdout_split(table.n_rows(), config.prune_fraction, config.seed);
    if grow_rows.is_empty() || holdout.is_empty() {
        let root = grow(table, &rows, 0, config, &mut Candidates::All);
        return Ok(model(table, root));
    }
    let root = grow(table, &grow_rows, 0, config, &mut Candidates::All);
    Ok(model(table, prune(root, table, &holdout)))
}

/// Seeded (grow, holdout) partition with `ceil(fraction * n)` holdout rows.
pub fn holdout_split(n: usize, fraction: f64, seed_value: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed::derive(seed_value, &["prune-holdout"])));
    let cut = ((fraction * n as f64).ceil() as usize).min(n);
    let mut holdout = order[..cut].to_vec();
    let mut grow_rows = order[cut..].to_vec();
    holdout.sort_unstable();
    grow_rows.sort_unstable();
    (grow_rows, holdout)
}

fn errors(node: &TreeNode, table: &FeatureTable, rows: &[usize]) -> usize {
    rows.iter().filter(|&&r| majority(node.leaf_for(table.row(r))) != table.labels[r]).count()
}

/// Bottom-up reduced-error pruning: a subtree becomes a leaf whenever the
/// leaf misclassifies no more holdout rows than the subtree does.
pub fn prune(node: TreeNode, table: &FeatureTable, holdout: &[usize]) -> TreeNode {
    match node {
        TreeNode::Leaf { .. } => node,
        TreeNode::Split { attribute, threshold, left, right } => {
            let (l_rows, r_rows): (Vec<usize>, Vec<usize>) =
                holdout.iter().partition(|&&r| table.value(r, attribute) <= threshold);
            let left = prune(*left, table, &l_rows);
            let right = prune(*right, table, &r_rows);
            let subtree = TreeNode::Split { attribute, threshold, left: Box::new(left), right: Box::new(right) };
            let counts = subtree.class_counts();
            let leaf_label = majority(&counts);
            let leaf_errors = holdout.iter().filter(|&&r| table.labels[r] != leaf_label).count();
            if leaf_errors <= errors(&subtree, table, holdout) {
                TreeNode::Leaf { class_counts: counts }
            } else {
                subtree
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{training_accuracy, SplitCriterion};
    use proptest::prelude::*;
    use rand::Rng;

    fn config() -> TrainConfig {
        TrainConfig { max_depth: 10, min_leaf: 1, ..TrainConfig::default() }
    }

    fn table_from(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> FeatureTable {
        let names = (0..rows[0].len()).map(|i| format!("x{i}")).collect();
        FeatureTable::new(names, rows, labels, LabelScheme::Binary).unwrap()
    }

    /// label = (x0 > 0.5) && (x1 > 0.3), with a third irrelevant column.
    fn planted(n: usize, noise: f64, seed_value: u64) -> FeatureTable {
        let mut rng = seed::rng(seed_value);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let x: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
            let mut y = usize::from(x[0] > 0.5 && x[1] > 0.3);
            if rng.gen_bool(noise) {
                y = 1 - y;
            }
            rows.push(x.to_vec());
            labels.push(y);
        }
        table_from(rows, labels)
    }

    #[test]
    fn pure_data_gives_single_leaf() {
        let t = table_from(vec![vec![1.0], vec![2.0], vec![3.0]], vec![1, 1, 1]);
        let m = train_tree(&t, &config()).unwrap();
        assert!(m.is_trivial());
        assert_eq!(m.label(&[9.0]), 1);
        let s = train_stump(&t, &config()).unwrap();
        assert!(s.is_trivial());
    }

    #[test]
    fn planted_rule_learned_exactly() {
        let t = planted(400, 0.0, 1);
        let m = train_tree(&t, &config()).unwrap();
        assert_eq!(training_accuracy(&t, |v| m.label(v)), 1.0);
        assert!(m.root.depth() <= 2, "depth {}", m.root.depth());
    }

    #[test]
    fn stump_on_separable_attribute() {
        let t = table_from(vec![vec![5.0, 1.0], vec![6.0, 8.0], vec![7.0, 2.0], vec![8.0, 9.0]], vec![0, 1, 0, 1]);
        let m = train_stump(&t, &config()).unwrap();
        assert_eq!(m.root.depth(), 1);
        assert_eq!(training_accuracy(&t, |v| m.label(v)), 1.0);
    }

    #[test]
    fn stump_on_xor_stays_near_majority() {
        // XOR of two bits, replicated: no single threshold reduces impurity.
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..25 {
            for (a, b) in [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
                rows.push(vec![a, b]);
                labels.push(usize::from(a != b));
            }
        }
        let t = table_from(rows, labels);
        let all: Vec<usize> = (0..t.n_rows()).collect();
        assert!(best_split(&t, &all, &[0, 1], SplitCriterion::Gini, 1).is_none());
        let m = train_stump(&t, &config()).unwrap();
        assert!((training_accuracy(&t, |v| m.label(v)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pruning_only_removes_nodes_and_keeps_holdout_accuracy() {
        let t = planted(600, 0.3, 2);
        let pruned_cfg = TrainConfig { criterion: SplitCriterion::InfoGain, prune_fraction: 0.2, seed: 5, ..config() };
        let pruned = train_tree(&t, &pruned_cfg).unwrap();
        let (grow_rows, holdout) = holdout_split(t.n_rows(), 0.2, 5);
        let unpruned_root = grow(&t, &grow_rows, 0, &pruned_cfg, &mut Candidates::All);
        assert!(pruned.root.node_count() <= unpruned_root.node_count());
        assert!(errors(&pruned.root, &t, &holdout) <= errors(&unpruned_root, &t, &holdout));
    }

    #[test]
    fn accepted_splits_strictly_reduce_impurity() {
        let t = planted(300, 0.1, 3);
        let m = train_tree(&t, &config()).unwrap();
        m.root.visit(&mut |node| {
            if let TreeNode::Split { left, right, .. } = node {
                let parent = node.class_counts();
                let (l, r) = (left.class_counts(), right.class_counts());
                let n = |c: &[usize]| c.iter().sum::<usize>();
                let g = |c: &[usize]| crate::learners::gini_impurity(c).unwrap();
                let weighted = (n(&l) as f64 * g(&l) + n(&r) as f64 * g(&r)) / n(&parent) as f64;
                assert!(weighted < g(&parent));
            }
        });
    }

    #[test]
    fn depth_and_leaf_size_limits() {
        let t = planted(500, 0.2, 4);
        let cfg = TrainConfig { max_depth: 3, min_leaf: 10, ..config() };
        let m = train_tree(&t, &cfg).unwrap();
        assert!(m.root.depth() <= 3);
        m.root.visit(&mut |node| {
            if let TreeNode::Leaf { class_counts } = node {
                assert!(class_counts.iter().sum::<usize>() >= 10);
            }
        });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn row_order_does_not_change_the_tree(seed_value in any::<u64>()) {
            let t = planted(120, 0.15, seed_value);
            let mut order: Vec<usize> = (0..t.n_rows()).collect();
            order.shuffle(&mut seed::rng(seed_value ^ 0x5a5a));
            let shuffled = t.select(&order);
            let a = train_tree(&t, &config()).unwrap();
            let b = train_tree(&shuffled, &config()).unwrap();
            prop_assert_eq!(a.root, b.root);
        }
    }
}
