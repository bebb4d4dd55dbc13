use rand::Rng;
use rayon::prelude::*;

use super::table::FeatureTable;
use super::tree::{grow, majority, Candidates, TreeModel, TreeNode};
use super::TrainConfig;
use crate::error::{Error, Result};
use crate::model::LabelScheme;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub mtry: usize,
    pub seed: u64,
    pub scheme: LabelScheme,
}

impl ForestModel {
    /// Mean of the member trees' leaf distributions.
    pub fn distribution(&self, values: &[f64]) -> Vec<f64> {
        let k = self.scheme.class_count();
        let mut acc = vec![0.0; k];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.distribution(values)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Majority vote of the trees; ties go to the lower class.
    pub fn label(&self, values: &[f64]) -> usize {
        let mut votes = vec![0usize; self.scheme.class_count()];
        for tree in &self.trees {
            votes[tree.label(values)] += 1;
        }
        majority(&votes)
    }
}

/// Bagged trees with `mtry` attributes drawn per node. Each tree has its own
/// derived seed, so trees train in parallel with scheduling-independent output.
pub fn train_forest(table: &FeatureTable, config: &TrainConfig) -> Result<ForestModel> {
    config.validate(table.n_features())?;
    if table.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let n = table.n_rows();
    let checksum = table.checksum();
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive_index(config.seed, "forest-tree", i));
            let rows: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let root = if single_class(table, &rows) {
                TreeNode::Leaf { class_counts: table.class_counts(&rows) }
            } else {
                grow(table, &rows, 0, config, &mut Candidates::Sample { mtry: config.mtry, rng: &mut rng })
            };
            TreeModel { root, scheme: table.scheme, registry_checksum: checksum.clone(), n_features: table.n_features() }
        })
        .collect();
    Ok(ForestModel { trees, mtry: config.mtry, seed: config.seed, scheme: table.scheme })
}

fn single_class(table: &FeatureTable, rows: &[usize]) -> bool {
    table.class_counts(rows).iter().filter(|&&c| c > 0).count() < 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::tree::train_tree;
    use crate::learners::training_accuracy;

    fn noisy_table() -> FeatureTable {
        let mut rng = seed::rng(11);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..300 {
            let x: Vec<f64> = (0..5).map(|_| rng.gen::<f64>()).collect();
            let mut y = usize::from(x[0] + x[1] > 1.0);
            if rng.gen_bool(0.1) {
                y = 1 - y;
            }
            rows.push(x);
            labels.push(y);
        }
        let names = (0..5).map(|i| format!("x{i}")).collect();
        FeatureTable::new(names, rows, labels, LabelScheme::Binary).unwrap()
    }

    #[test]
    fn forest_of_one_matches_tree() {
        let t = noisy_table();
        let cfg = TrainConfig { n_trees: 1, bootstrap: false, mtry: 5, max_depth: 8, min_leaf: 1, ..TrainConfig::default() };
        let forest = train_forest(&t, &cfg).unwrap();
        let tree = train_tree(&t, &cfg).unwrap();
        assert_eq!(forest.trees[0].root, tree.root);
        for i in 0..t.n_rows() {
            assert_eq!(forest.label(t.row(i)), tree.label(t.row(i)));
            assert_eq!(forest.distribution(t.row(i)), tree.distribution(t.row(i)));
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let t = noisy_table();
        let cfg = TrainConfig { n_trees: 8, mtry: 2, ..TrainConfig::default() };
        assert_eq!(train_forest(&t, &cfg).unwrap(), train_forest(&t, &cfg).unwrap());
        let other = TrainConfig { seed: cfg.seed + 1, ..cfg.clone() };
        assert_ne!(train_forest(&t, &cfg).unwrap(), train_forest(&t, &other).unwrap());
    }

    #[test]
    fn two_tree_tie_goes_to_lower_class() {
        let leaf = |c: Vec<usize>| TreeModel {
            root: TreeNode::Leaf { class_counts: c },
            scheme: LabelScheme::Binary,
            registry_checksum: String::new(),
            n_features: 1,
        };
        let f = ForestModel { trees: vec![leaf(vec![4, 0]), leaf(vec![0, 4])], mtry: 1, seed: 0, scheme: LabelScheme::Binary };
        assert_eq!(f.distribution(&[0.0]), vec![0.5, 0.5]);
        assert_eq!(f.label(&[0.0]), 0);
    }

    #[test]
    fn distributions_are_probability_vectors() {
        let t = noisy_table();
        let f = train_forest(&t, &TrainConfig { n_trees: 10, mtry: 2, max_depth: 4, ..TrainConfig::default() }).unwrap();
        for i in 0..t.n_rows() {
            let d = f.distribution(t.row(i));
            assert!(d.iter().all(|&p| p >= 0.0));
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert!(training_accuracy(&t, |v| f.label(v)) > 0.85);
    }
}
