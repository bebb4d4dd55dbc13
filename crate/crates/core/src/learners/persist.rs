//! Line-oriented text model file. Floats are written in shortest round-trip
//! form, so load followed by save reproduces the input byte for byte.

use std::fmt::Write as _;
use std::str::FromStr;

use super::forest::ForestModel;
use super::tree::{TreeModel, TreeNode};
use super::{LearnerKind, LearnerSpec, Model, TrainConfig};
use crate::error::{Error, Result};
use crate::eval::{AttributeRanking, RankEntry};
use crate::model::LabelScheme;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "cybersick-model";

/// A trained model plus what produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub spec: LearnerSpec,
    pub model: Model,
    pub ranking: Option<AttributeRanking>,
}

pub fn save_model(file: &ModelFile) -> String {
    let mut out = String::new();
    let c = &file.spec.config;
    let trees: Vec<&TreeModel> = match &file.model {
        Model::Tree(t) => vec![t],
        Model::Forest(f) => f.trees.iter().collect(),
    };
    let _ = writeln!(out, "{MAGIC} {MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "learner {}", file.spec.kind);
    let _ = writeln!(out, "scheme {}", file.model.scheme());
    let _ = writeln!(out, "attributes {}", file.model.n_features());
    let _ = writeln!(out, "checksum {}", file.model.registry_checksum());
    let _ = writeln!(out, "criterion {}", c.criterion.as_str());
    let _ = writeln!(out, "max_depth {}", c.max_depth);
    let _ = writeln!(out, "min_leaf {}", c.min_leaf);
    let _ = writeln!(out, "n_trees {}", c.n_trees);
    let _ = writeln!(out, "mtry {}", c.mtry);
    let _ = writeln!(out, "bootstrap {}", c.bootstrap);
    let _ = writeln!(out, "seed {}", c.seed);
    let _ = writeln!(out, "prune_fraction {}", c.prune_fraction);
    match &file.ranking {
        None => out.push_str("ranking none\n"),
        Some(r) => {
            let _ = writeln!(out, "ranking {} {}", r.entries.len(), r.baseline_accuracy);
            for e in &r.entries {
                let _ = writeln!(out, "rank {} {}", e.attribute, e.accuracy_without);
            }
        }
    }
    let _ = writeln!(out, "trees {}", trees.len());
    for t in trees {
        let _ = writeln!(out, "tree {}", t.root.node_count());
        write_node(&t.root, &mut out);
    }
    out.push_str("end\n");
    out
}

fn write_node(node: &TreeNode, out: &mut String) {
    match node {
        TreeNode::Leaf { class_counts } => {
            out.push('L');
            for c in class_counts {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        TreeNode::Split { attribute, threshold, left, right } => {
            let _ = writeln!(out, "S {attribute} {threshold}");
            write_node(left, out);
            write_node(right, out);
        }
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat { line: self.line, message: message.into() }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// Reads `key value...` and returns the value part.
    fn field(&mut self, key: &str) -> Result<&'a str> {
        let l = self.next_line()?;
        match l.split_once(' ') {
            Some((k, v)) if k == key => Ok(v),
            _ => Err(self.err(format!("expected `{key} <value>`, found `{l}`"))),
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let v = self.field(key)?;
        v.parse().map_err(|_| self.err(format!("invalid {key} `{v}`")))
    }

    fn num<T: FromStr>(&self, v: &str, what: &str) -> Result<T> {
        v.parse().map_err(|_| self.err(format!("invalid {what} `{v}`")))
    }
}

pub fn load_model(text: &str) -> Result<ModelFile> {
    let mut r = Lines { inner: text.lines().enumerate(), line: 0 };
    let version: u32 = r.parsed(MAGIC)?;
    if version != MODEL_FORMAT_VERSION {
        return Err(r.err(format!("unsupported format version {version}")));
    }
    let kind: LearnerKind = r.field("learner")?.parse().map_err(|e: Error| r.err(e.to_string()))?;
    let scheme: LabelScheme = r.field("scheme")?.parse().map_err(|e: Error| r.err(e.to_string()))?;
    let n_features: usize = r.parsed("attributes")?;
    let checksum = r.field("checksum")?.to_string();
    let criterion = r.field("criterion")?.parse().map_err(|e: Error| r.err(e.to_string()))?;
    let config = TrainConfig {
        criterion,
        max_depth: r.parsed("max_depth")?,
        min_leaf: r.parsed("min_leaf")?,
        n_trees: r.parsed("n_trees")?,
        mtry: r.parsed("mtry")?,
        bootstrap: r.parsed("bootstrap")?,
        seed: r.parsed("seed")?,
        prune_fraction: r.parsed("prune_fraction")?,
    };
    let ranking_head = r.field("ranking")?;
    let ranking = if ranking_head == "none" {
        None
    } else {
        let (count, baseline) = ranking_head.split_once(' ').ok_or_else(|| r.err("expected `ranking <count> <baseline>`"))?;
        let count: usize = r.num(count, "ranking count")?;
        let baseline_accuracy: f64 = r.num(baseline, "baseline accuracy")?;
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let v = r.field("rank")?;
            let (name, acc) = v.split_once(' ').ok_or_else(|| r.err("expected `rank <attribute> <accuracy>`"))?;
            let accuracy_without: f64 = r.num(acc, "accuracy")?;
            entries.push(RankEntry {
                attribute: name.to_string(),
                accuracy_without,
                impact: baseline_accuracy - accuracy_without,
            });
        }
        Some(AttributeRanking { baseline_accuracy, entries })
    };
    let n_trees: usize = r.parsed("trees")?;
    if n_trees == 0 {
        return Err(r.err("model has no trees"));
    }
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let nodes: usize = r.parsed("tree")?;
        let mut read = 0;
        let root = read_node(&mut r, scheme.class_count(), n_features, &mut read, 0)?;
        if read != nodes {
            return Err(r.err(format!("tree declared {nodes} nodes but has {read}")));
        }
        trees.push(TreeModel { root, scheme, registry_checksum: checksum.clone(), n_features });
    }
    if r.next_line()? != "end" {
        return Err(r.err("expected `end`"));
    }
    let model = match kind {
        LearnerKind::Forest => Model::Forest(ForestModel { trees, mtry: config.mtry, seed: config.seed, scheme }),
        _ if n_trees == 1 => Model::Tree(trees.pop().expect("one tree")),
        _ => return Err(r.err(format!("learner {kind} stores exactly one tree"))),
    };
    Ok(ModelFile { spec: LearnerSpec { kind, config }, model, ranking })
}

const MAX_DEPTH: usize = 512;

fn read_node(r: &mut Lines<'_>, classes: usize, n_features: usize, read: &mut usize, depth: usize) -> Result<TreeNode> {
    if depth > MAX_DEPTH {
        return Err(r.err("tree nesting too deep"));
    }
    let l = r.next_line()?;
    *read += 1;
    let mut parts = l.split(' ');
    match parts.next() {
        Some("L") => {
            let class_counts = parts.map(|p| r.num::<usize>(p, "class count")).collect::<Result<Vec<_>>>()?;
            if class_counts.len() != classes {
                return Err(r.err(format!("leaf has {} counts, scheme has {classes} classes", class_counts.len())));
            }
            Ok(TreeNode::Leaf { class_counts })
        }
        Some("S") => {
            let (Some(a), Some(t), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(r.err("expected `S <attribute> <threshold>`"));
            };
            let attribute: usize = r.num(a, "attribute index")?;
            if attribute >= n_features {
                return Err(r.err(format!("attribute index {attribute} out of range")));
            }
            let threshold: f64 = r.num(t, "threshold")?;
            if !threshold.is_finite() {
                return Err(r.err("threshold is not finite"));
            }
            let left = Box::new(read_node(r, classes, n_features, read, depth + 1)?);
            let right = Box::new(read_node(r, classes, n_features, read, depth + 1)?);
            Ok(TreeNode::Split { attribute, threshold, left, right })
        }
        _ => Err(r.err(format!("expected a node line, found `{l}`"))),
    }
}
