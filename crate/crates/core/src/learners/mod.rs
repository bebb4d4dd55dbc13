//! Tree-family classifiers built from scratch: a decision stump, a greedy
//! impurity tree (gini), an info-gain tree with reduced-error pruning, and a
//! bagged random forest.

mod forest;
mod impurity;
mod persist;
mod split;
mod table;
mod tree;

pub use forest::{train_forest, ForestModel};
pub use impurity::{entropy, gini_impurity, info_gain};
pub use persist::{load_model, save_model, ModelFile, MODEL_FORMAT_VERSION};
pub use split::{best_split, Split, SplitCriterion};
pub use table::FeatureTable;
pub use tree::{holdout_split, majority, normalize, prune, train_stump, train_tree, TreeModel, TreeNode};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureVector;
use crate::error::{Error, Result};
use crate::model::{registry_checksum, LabelScheme, ATTRIBUTE_COUNT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub criterion: SplitCriterion,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub n_trees: usize,
    /// Attributes drawn per node by the forest; values at or above the
    /// attribute count mean "all".
    pub mtry: usize,
    pub bootstrap: bool,
    pub seed: u64,
    /// Holdout share for reduced-error pruning; 0 disables pruning.
    pub prune_fraction: f64,
}

/// ceil(sqrt(34))
pub const DEFAULT_MTRY: usize = 6;

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            criterion: SplitCriterion::Gini,
            max_depth: 20,
            min_leaf: 1,
            n_trees: 50,
            mtry: DEFAULT_MTRY,
            bootstrap: true,
            seed: 7,
            prune_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, _n_features: usize) -> Result<()> {
        if self.max_depth < 1 {
            return Err(Error::InvalidParameter("max_depth must be at least 1".into()));
        }
        if self.min_leaf < 1 {
            return Err(Error::InvalidParameter("min_leaf must be at least 1".into()));
        }
        if self.n_trees < 1 {
            return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
        }
        if self.mtry < 1 {
            return Err(Error::InvalidParameter("mtry must be at least 1".into()));
        }
        if !(0.0..=0.5).contains(&self.prune_fraction) {
            return Err(Error::InvalidParameter("prune_fraction must lie in [0, 0.5]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Stump,
    Tree,
    PrunedTree,
    Forest,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [LearnerKind::Stump, LearnerKind::Tree, LearnerKind::PrunedTree, LearnerKind::Forest];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::Stump => "stump",
            LearnerKind::Tree => "tree",
            LearnerKind::PrunedTree => "pruned_tree",
            LearnerKind::Forest => "forest",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown learner `{s}` (expected stump, tree, pruned_tree or forest)")))
    }
}

/// A learner and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    pub config: TrainConfig,
}

impl LearnerSpec {
    /// Shipped hyperparameters per learner.
    pub fn default_for(kind: LearnerKind) -> Self {
        let base = TrainConfig::default();
        let config = match kind {
            LearnerKind::Stump => TrainConfig { max_depth: 1, n_trees: 1, bootstrap: false, ..base },
            LearnerKind::Tree => TrainConfig { max_depth: 12, min_leaf: 2, n_trees: 1, bootstrap: false, ..base },
            LearnerKind::PrunedTree => TrainConfig {
                criterion: SplitCriterion::InfoGain,
                min_leaf: 2,
                n_trees: 1,
                bootstrap: false,
                prune_fraction: 0.2,
                ..base
            },
            LearnerKind::Forest => base,
        };
        Self { kind, config }
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { kind: self.kind, config: TrainConfig { seed, ..self.config.clone() } }
    }

    pub fn fit(&self, table: &FeatureTable) -> Result<Model> {
        Ok(match self.kind {
            LearnerKind::Stump => Model::Tree(train_stump(table, &self.config)?),
            LearnerKind::Tree | LearnerKind::PrunedTree => Model::Tree(train_tree(table, &self.config)?),
            LearnerKind::Forest => Model::Forest(train_forest(table, &self.config)?),
        })
    }
}

/// Parses a comma-separated learner list with default hyperparameters.
pub fn parse_learners(list: &str) -> Result<Vec<LearnerSpec>> {
    list.split(',').map(|s| s.trim().parse().map(LearnerSpec::default_for)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Tree(TreeModel),
    Forest(ForestModel),
}

impl Model {
    pub fn scheme(&self) -> LabelScheme {
        match self {
            Model::Tree(t) => t.scheme,
            Model::Forest(f) => f.scheme,
        }
    }

    pub fn registry_checksum(&self) -> &str {
        match self {
            Model::Tree(t) => &t.registry_checksum,
            Model::Forest(f) => &f.trees[0].registry_checksum,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            Model::Tree(t) => t.n_features,
            Model::Forest(f) => f.trees[0].n_features,
        }
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_features() {
            return Err(Error::FeatureLength { expected: self.n_features(), got: values.len() });
        }
        Ok(())
    }

    /// Class probabilities for a raw value slice in the model's column order.
    pub fn distribution_for(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.check_len(values)?;
        Ok(match self {
            Model::Tree(t) => t.distribution(values),
            Model::Forest(f) => f.distribution(values),
        })
    }

    pub fn label_for(&self, values: &[f64]) -> Result<usize> {
        self.check_len(values)?;
        Ok(self.label_unchecked(values))
    }

    pub(crate) fn label_unchecked(&self, values: &[f64]) -> usize {
        match self {
            Model::Tree(t) => t.label(values),
            Model::Forest(f) => f.label(values),
        }
    }

    /// Refuses models trained on a column layout other than the registry.
    pub fn check_registry(&self) -> Result<()> {
        let data = registry_checksum();
        if self.registry_checksum() != data || self.n_features() != ATTRIBUTE_COUNT {
            return Err(Error::ChecksumMismatch { model: self.registry_checksum().to_string(), data });
        }
        Ok(())
    }

    pub fn predict_distribution(&self, fv: &FeatureVector) -> Result<Vec<f64>> {
        self.check_registry()?;
        self.distribution_for(&fv.values)
    }

    pub fn predict_label(&self, fv: &FeatureVector) -> Result<usize> {
        self.check_registry()?;
        self.label_for(&fv.values)
    }
}

/// Share of table rows whose label `predict` reproduces.
pub fn training_accuracy(table: &FeatureTable, predict: impl Fn(&[f64]) -> usize) -> f64 {
    if table.n_rows() == 0 {
        return 0.0;
    }
    let hits = (0..table.n_rows()).filter(|&i| predict(table.row(i)) == table.labels[i]).count();
    hits as f64 / table.n_rows() as f64
}
