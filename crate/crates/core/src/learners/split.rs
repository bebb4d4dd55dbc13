use serde::{Deserialize, Serialize};

use super::impurity::{entropy_unchecked, gini_unchecked};
use super::table::FeatureTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    Gini,
    InfoGain,
}

impl SplitCriterion {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitCriterion::Gini => "gini",
            SplitCriterion::InfoGain => "info_gain",
        }
    }

    fn impurity(self, counts: &[usize], n: usize) -> f64 {
        match self {
            SplitCriterion::Gini => gini_unchecked(counts, n),
            SplitCriterion::InfoGain => entropy_unchecked(counts, n),
        }
    }
}

impl std::str::FromStr for SplitCriterion {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "gini" => Ok(Self::Gini),
            "info_gain" => Ok(Self::InfoGain),
            other => Err(crate::error::Error::InvalidParameter(format!("unknown criterion `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub attribute: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurity.
    pub decrease: f64,
}

/// Smallest impurity decrease that counts as an improvement.
const MIN_DECREASE: f64 = 1e-12;

/// Best `value <= threshold` split of `rows` over the candidate attributes.
///
/// Thresholds are midpoints between consecutive distinct values; both sides
/// must keep at least `min_leaf` rows. Ties go to the lower attribute index,
/// then the lower threshold. `None` when nothing strictly lowers impurity.
pub fn best_split(
    table: &FeatureTable,
    rows: &[usize],
    candidates: &[usize],
    criterion: SplitCriterion,
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let k = table.class_count();
    let parent_counts = table.class_counts(rows);
    let parent = criterion.impurity(&parent_counts, n);
    if parent <= 0.0 {
        return None;
    }
    let min_leaf = min_leaf.max(1);

    let mut sorted_candidates = candidates.to_vec();
    sorted_candidates.sort_unstable();
    sorted_candidates.dedup();

    let mut best: Option<Split> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; k];
    let mut right = vec![0usize; k];
    for &attribute in &sorted_candidates {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (table.value(r, attribute), table.labels[r])));
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if pairs[0].0 == pairs[n - 1].0 {
            continue;
        }
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&parent_counts);
        for i in 0..n - 1 {
            let (value, label) = pairs[i];
            left[label] += 1;
            right[label] -= 1;
            let next = pairs[i + 1].0;
            if value == next {
                continue;
            }
            let nl = i + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let weighted = (nl as f64 * criterion.impurity(&left, nl) + nr as f64 * criterion.impurity(&right, nr)) / n as f64;
            let decrease = parent - weighted;
            if decrease > MIN_DECREASE && best.is_none_or(|b| decrease > b.decrease) {
                let mut threshold = value + (next - value) / 2.0;
                if threshold >= next {
                    threshold = value;
                }
                best = Some(Split { attribute, threshold, decrease });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelScheme;

    fn table(columns: &[&[f64]], labels: &[usize]) -> FeatureTable {
        let names = (0..columns.len()).map(|i| format!("x{i}")).collect();
        let rows = (0..labels.len()).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
        FeatureTable::new(names, rows, labels.to_vec(), LabelScheme::Binary).unwrap()
    }

    /// Every midpoint threshold of every attribute, scored from scratch.
    fn brute_force(t: &FeatureTable, criterion: SplitCriterion) -> Option<(usize, f64, f64)> {
        let rows: Vec<usize> = (0..t.n_rows()).collect();
        let parent = criterion.impurity(&t.class_counts(&rows), rows.len());
        let mut best: Option<(usize, f64, f64)> = None;
        for a in 0..t.n_features() {
            let mut values: Vec<f64> = rows.iter().map(|&r| t.value(r, a)).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let th = (w[0] + w[1]) / 2.0;
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| t.value(i, a) <= th);
                let score = parent
                    - (l.len() as f64 * criterion.impurity(&t.class_counts(&l), l.len())
                        + r.len() as f64 * criterion.impurity(&t.class_counts(&r), r.len()))
                        / rows.len() as f64;
                if score > 1e-12 && best.is_none_or(|b| score > b.2) {
                    best = Some((a, th, score));
                }
            }
        }
        best
    }

    #[test]
    fn perfect_threshold() {
        let t = table(&[&[1.0, 2.0, 3.0, 4.0]], &[0, 0, 1, 1]);
        let s = best_split(&t, &[0, 1, 2, 3], &[0], SplitCriterion::Gini, 1).unwrap();
        assert_eq!((s.attribute, s.threshold), (0, 2.5));
        assert!((s.decrease - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_split_cases() {
        let pure = table(&[&[1.0, 2.0, 3.0]], &[1, 1, 1]);
        assert!(best_split(&pure, &[0, 1, 2], &[0], SplitCriterion::Gini, 1).is_none());
        let constant = table(&[&[5.0, 5.0, 5.0, 5.0]], &[0, 1, 0, 1]);
        assert!(best_split(&constant, &[0, 1, 2, 3], &[0], SplitCriterion::InfoGain, 1).is_none());
    }

    #[test]
    fn ties_prefer_lower_attribute() {
        let t = table(&[&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]], &[0, 0, 1, 1]);
        let s = best_split(&t, &[0, 1, 2, 3], &[1, 0], SplitCriterion::Gini, 1).unwrap();
        assert_eq!(s.attribute, 0);
    }

    #[test]
    fn ties_prefer_lower_threshold() {
        // Splitting after the first or after the third row scores the same.
        let t = table(&[&[1.0, 2.0, 3.0, 4.0]], &[0, 1, 1, 0]);
        let s = best_split(&t, &[0, 1, 2, 3], &[0], SplitCriterion::Gini, 1).unwrap();
        assert_eq!(s.threshold, 1.5);
    }

    #[test]
    fn min_leaf_respected() {
        let t = table(&[&[1.0, 2.0, 3.0, 4.0, 5.0]], &[0, 1, 1, 1, 1]);
        let s = best_split(&t, &[0, 1, 2, 3, 4], &[0], SplitCriterion::Gini, 2).unwrap();
        assert_eq!(s.threshold, 2.5);
    }

    #[test]
    fn agrees_with_brute_force() {
        let a = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let b = [2.0, 7.0, 1.0, 8.0, 2.0, 8.0, 1.0, 8.0, 2.0, 8.0];
        let labels = [0, 1, 0, 1, 1, 1, 0, 1, 0, 0];
        let t = table(&[&a, &b], &labels);
        let rows: Vec<usize> = (0..10).collect();
        for criterion in [SplitCriterion::Gini, SplitCriterion::InfoGain] {
            let s = best_split(&t, &rows, &[0, 1], criterion, 1).unwrap();
            let (attr, th, score) = brute_force(&t, criterion).unwrap();
            assert_eq!((s.attribute, s.threshold), (attr, th));
            assert!((s.decrease - score).abs() < 1e-12);
        }
    }
}
