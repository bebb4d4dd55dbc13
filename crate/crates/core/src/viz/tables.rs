use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::ExperimentGrid;
use crate::model::{LabelScheme, Scenario};

/// Percent with one decimal: 0.9404 -> "94.0%".
pub fn format_accuracy(acc: f64) -> String {
    format!("{:.1}%", acc * 100.0)
}

/// Four decimals: 0.8805 -> "0.8805".
pub fn format_kappa(kappa: f64) -> String {
    format!("{kappa:.4}")
}

/// One table per scheme: learners as rows, ACC and KPP per scenario.
pub fn emit_grid_tables(grid: &ExperimentGrid) -> Result<String> {
    let missing = grid.missing_cells();
    if !missing.is_empty() {
        return Err(Error::IncompleteGrid(missing.join(", ")));
    }
    let width = grid.learners.iter().map(String::len).max().unwrap_or(0).max("learner".len());
    let mut out = String::new();
    for (i, scheme) in LabelScheme::ALL.into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let title = match scheme {
            LabelScheme::Binary => "Binary classification",
            LabelScheme::Quarterly => "Quarterly classification",
        };
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<width$}", "learner");
        for s in Scenario::ALL {
            let _ = write!(out, " | {:>6} | {:>6}", format!("{s} ACC"), format!("{s} KPP"));
        }
        out.push('\n');
        for learner in &grid.learners {
            let _ = write!(out, "{learner:<width$}");
            for s in Scenario::ALL {
                let r = grid.get(s, scheme, learner).expect("completeness checked");
                let _ = write!(out, " | {:>6} | {:>6}", format_accuracy(r.accuracy), format_kappa(r.kappa));
            }
            out.push('\n');
        }
    }
    Ok(out)
}
