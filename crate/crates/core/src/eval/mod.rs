//! Accuracy and Cohen's kappa, stratified cross-validation, the scenario x
//! scheme x learner experiment grid, and leave-one-attribute-out ranking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{assemble_scenario, stratified_kfold, Dataset, FoldPlan};
use crate::error::{Error, Result};
use crate::learners::{training_accuracy, FeatureTable, LearnerSpec};
use crate::model::{LabelScheme, Scenario, SessionRecord};
use crate::seed;

/// Rows are actual classes, columns predicted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub k: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Self {
        Self { k, counts: vec![vec![0; k]; k] }
    }

    pub fn from_rows(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if k == 0 || counts.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidParameter("confusion matrix must be square and non-empty".into()));
        }
        Ok(Self { k, counts })
    }

    pub fn record(&mut self, actual: usize, predicted: usize) {
        self.counts[actual][predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.counts[i][i]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total();
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(cm.trace() as f64 / n as f64)
}

/// Computed as (N·trace − Σ row·col) / (N² − Σ row·col) in exact integer
/// arithmetic, which equals (p_o − p_e)/(1 − p_e) without intermediate
/// rounding. Returns 0 when p_e = 1.
pub fn cohen_kappa(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total() as u128;
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    let chance: u128 = (0..cm.k)
        .map(|c| {
            let row: u64 = cm.counts[c].iter().sum();
            let col: u64 = cm.counts.iter().map(|r| r[c]).sum();
            row as u128 * col as u128
        })
        .sum();
    let denom = n * n - chance;
    if denom == 0 {
        return Ok(0.0);
    }
    let num = (n * cm.trace() as u128) as i128 - chance as i128;
    Ok(num as f64 / denom as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub accuracy: f64,
    pub kappa: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub scenario: Scenario,
    pub scheme: LabelScheme,
    pub k: usize,
    pub seed: u64,
    pub rows: usize,
    pub accuracy: f64,
    pub kappa: f64,
    pub per_fold: Vec<FoldReport>,
    pub aggregate_cm: ConfusionMatrix,
}

/// Stratified k-fold CV. Fold `f` trains with seed `derive(seed, "cv-fold", f)`;
/// the fold plan itself is `stratified_kfold(dataset, k, seed)`.
pub fn cross_validate(spec: &LearnerSpec, dataset: &Dataset, k: usize, seed: u64) -> Result<EvalReport> {
    let plan = stratified_kfold(dataset, k, seed)?;
    let table = FeatureTable::from_dataset(dataset);
    cross_validate_plan(spec, &table, &plan, dataset.scenario)
}

pub fn cross_validate_plan(spec: &LearnerSpec, table: &FeatureTable, plan: &FoldPlan, scenario: Scenario) -> Result<EvalReport> {
    let classes = table.class_count();
    let per_fold = (0..plan.k)
        .into_par_iter()
        .map(|fold| {
            let (train, test) = plan.split(fold);
            let fold_spec = spec.with_seed(seed::derive_index(plan.seed, "cv-fold", fold));
            let model = fold_spec.fit(&table.select(&train))?;
            let mut cm = ConfusionMatrix::new(classes);
            for &r in &test {
                cm.record(table.labels[r], model.label_unchecked(table.row(r)));
            }
            Ok(FoldReport { fold, accuracy: accuracy(&cm)?, kappa: cohen_kappa(&cm)?, confusion: cm })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut aggregate_cm = ConfusionMatrix::new(classes);
    for f in &per_fold {
        aggregate_cm.add(&f.confusion);
    }
    Ok(EvalReport {
        learner: spec.name().to_string(),
        scenario,
        scheme: table.scheme,
        k: plan.k,
        seed: plan.seed,
        rows: table.n_rows(),
        accuracy: accuracy(&aggregate_cm)?,
        kappa: cohen_kappa(&aggregate_cm)?,
        per_fold,
        aggregate_cm,
    })
}

/// Seed of one grid cell.
pub fn cell_seed(seed: u64, scenario: Scenario, scheme: LabelScheme, learner: &str) -> u64 {
    seed::derive(seed, &[scenario.as_str(), scheme.as_str(), learner])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub k: usize,
    pub seed: u64,
    pub learners: Vec<String>,
    /// Ordered by scenario, then scheme, then learner.
    pub reports: Vec<EvalReport>,
}

impl ExperimentGrid {
    pub fn get(&self, scenario: Scenario, scheme: LabelScheme, learner: &str) -> Option<&EvalReport> {
        self.reports.iter().find(|r| r.scenario == scenario && r.scheme == scheme && r.learner == learner)
    }

    /// Cells absent from the grid, as `scenario/scheme/learner`.
    pub fn missing_cells(&self) -> Vec<String> {
        let mut missing = Vec::new();
        for scenario in Scenario::ALL {
            for scheme in LabelScheme::ALL {
                for learner in &self.learners {
                    if self.get(scenario, scheme, learner).is_none() {
                        missing.push(format!("{scenario}/{scheme}/{learner}"));
                    }
                }
            }
        }
        missing
    }
}

/// 3 scenarios x 2 schemes x learners, each cell an independent
/// [`cross_validate`] with its [`cell_seed`].
pub fn run_experiment_grid(sessions: &[SessionRecord], learners: &[LearnerSpec], k: usize, seed: u64) -> Result<ExperimentGrid> {
    if learners.is_empty() {
        return Err(Error::InvalidParameter("no learners given".into()));
    }
    let mut datasets = Vec::new();
    for scenario in Scenario::ALL {
        for scheme in LabelScheme::ALL {
            let ds = assemble_scenario(sessions, scenario, scheme)?;
            if ds.is_empty() {
                return Err(Error::InvalidParameter(format!("scenario {scenario} has no sessions")));
            }
            datasets.push(ds);
        }
    }
    let jobs: Vec<(&Dataset, &LearnerSpec)> = datasets.iter().flat_map(|d| learners.iter().map(move |l| (d, l))).collect();
    let reports = jobs
        .par_iter()
        .map(|(ds, spec)| cross_validate(spec, ds, k, cell_seed(seed, ds.scenario, ds.scheme, spec.name())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentGrid { k, seed, learners: learners.iter().map(|l| l.name().to_string()).collect(), reports })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub attribute: String,
    pub accuracy_without: f64,
    pub impact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeRanking {
    pub baseline_accuracy: f64,
    pub entries: Vec<RankEntry>,
}

impl AttributeRanking {
    pub fn position(&self, attribute: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.attribute == attribute)
    }
}

/// Learner used for rankings attached to models: a shallow Gini tree.
/// Forest impacts are dominated by feature-subsampling noise, so a
/// deterministic tree gives a more stable ordering.
pub fn ranking_spec() -> LearnerSpec {
    let mut spec = LearnerSpec::default_for(crate::learners::LearnerKind::Tree);
    spec.config.criterion = crate::learners::SplitCriterion::Gini;
    spec.config.max_depth = 4;
    spec.config.min_leaf = 5;
    spec
}

pub fn rank_attributes(spec: &LearnerSpec, dataset: &Dataset, seed: u64) -> Result<AttributeRanking> {
    rank_table(spec, &FeatureTable::from_dataset(dataset), seed)
}

/// Leave-one-attribute-out importance on an arbitrary column set. Every
/// retraining and the baseline train and evaluate on the full table with
/// the same seed; entries are sorted by impact descending, ties in column order.
pub fn rank_table(spec: &LearnerSpec, table: &FeatureTable, seed: u64) -> Result<AttributeRanking> {
    if table.n_features() < 2 {
        return Err(Error::InvalidParameter("ranking needs at least two attributes".into()));
    }
    let spec = spec.with_seed(seed);
    let full = |t: &FeatureTable| -> Result<f64> {
        let m = spec.fit(t)?;
        Ok(training_accuracy(t, |v| m.label_unchecked(v)))
    };
    let baseline_accuracy = full(table)?;
    let without = (0..table.n_features())
        .into_par_iter()
        .map(|c| full(&table.without_column(c)))
        .collect::<Result<Vec<_>>>()?;
    let mut entries: Vec<RankEntry> = table
        .names
        .iter()
        .zip(without)
        .map(|(name, acc)| RankEntry { attribute: name.clone(), accuracy_without: acc, impact: baseline_accuracy - acc })
        .collect();
    entries.sort_by(|a, b| b.impact.total_cmp(&a.impact));
    Ok(AttributeRanking { baseline_accuracy, entries })
}
