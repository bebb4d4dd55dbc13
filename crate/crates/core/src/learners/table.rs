use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{names_checksum, LabelScheme, ATTRIBUTES};

/// Dense row-major training matrix. Usually the 34 registry attributes, but
/// columns may be appended or dropped for importance experiments; the
/// checksum always tracks the actual column list.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    values: Vec<f64>,
    pub labels: Vec<usize>,
    pub scheme: LabelScheme,
}

impl FeatureTable {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>, labels: Vec<usize>, scheme: LabelScheme) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::InvalidParameter("row and label counts differ".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::FeatureLength { expected: names.len(), got: bad.len() });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= scheme.class_count()) {
            return Err(Error::InvalidParameter(format!("label {l} invalid for the {scheme} scheme")));
        }
        Ok(Self { names, values: rows.concat(), labels, scheme })
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let names = ATTRIBUTES.iter().map(|a| a.name.to_string()).collect();
        let mut values = Vec::with_capacity(dataset.len() * ATTRIBUTES.len());
        for row in &dataset.rows {
            values.extend_from_slice(&row.values);
        }
        Self { names, values, labels: dataset.labels(), scheme: dataset.scheme }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn class_count(&self) -> usize {
        self.scheme.class_count()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_features();
        &self.values[i * m..(i + 1) * m]
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_features() + col]
    }

    pub fn checksum(&self) -> String {
        names_checksum(self.names.iter().map(String::as_str))
    }

    pub fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.class_count()];
        for &r in rows {
            counts[self.labels[r]] += 1;
        }
        counts
    }

    /// Rows in the given order (duplicates allowed, as in a bootstrap sample).
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.n_features());
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Self { names: self.names.clone(), values, labels: rows.iter().map(|&r| self.labels[r]).collect(), scheme: self.scheme }
    }

    pub fn with_column(&self, name: &str, column: &[f64]) -> Result<Self> {
        if column.len() != self.n_rows() {
            return Err(Error::InvalidParameter(format!("column has {} values for {} rows", column.len(), self.n_rows())));
        }
        if self.names.iter().any(|n| n == name) {
            return Err(Error::InvalidParameter(format!("column `{name}` already present")));
        }
        let mut names = self.names.clone();
        names.push(name.to_string());
        let mut values = Vec::with_capacity(self.values.len() + column.len());
        for (i, v) in column.iter().enumerate() {
            values.extend_from_slice(self.row(i));
            values.push(*v);
        }
        Ok(Self { names, values, labels: self.labels.clone(), scheme: self.scheme })
    }

    pub fn without_column(&self, col: usize) -> Self {
        let mut names = self.names.clone();
        names.remove(col);
        let mut values = Vec::with_capacity(self.n_rows() * names.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            values.extend_from_slice(&row[..col]);
            values.extend_from_slice(&row[col + 1..]);
        }
        Self { names, values, labels: self.labels.clone(), scheme: self.scheme }
    }
}

impl From<&Dataset> for FeatureTable {
    fn from(d: &Dataset) -> Self {
        Self::from_dataset(d)
    }
}
