use std::collections::BTreeSet;
use std::io::Write;

use super::{EvalReport, Method, SweepRow};
use crate::error::Result;

/// One JSON object per report.
pub fn write_reports_jsonl<W: Write>(reports: &[EvalReport], mut out: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "sigma,train_size,mean_error,std_error,repetitions")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            r.sigma, r.train_size, r.mean_error, r.std_error, r.repetitions
        )?;
    }
    Ok(())
}

fn column_name(r: &EvalReport) -> String {
    match (r.method, r.sigma) {
        (Method::Lowbow, Some(s)) => format!("lowbow[{s}]@{}", r.train_size),
        (m, _) => format!("{m}@{}", r.train_size),
    }
}

/// Mean test error per method and training size, overall and per class.
///
/// Rows are `all` followed by each class label; columns are
/// `method@train_size`, with the scale in brackets for fixed-scale lowbow,
/// in the order they first appear in `reports`.
pub fn write_grid_csv<W: Write>(reports: &[EvalReport], mut out: W) -> Result<()> {
    let mut columns: Vec<String> = Vec::new();
    for r in reports {
        let name = column_name(r);
        if !columns.contains(&name) {
            columns.push(name);
        }
    }
    let classes: BTreeSet<&str> = reports
        .iter()
        .flat_map(|r| r.confusion.keys().map(String::as_str))
        .collect();

    let mean = |column: &str, class: Option<&str>| -> Option<f64> {
        let values: Vec<f64> = reports
            .iter()
            .filter(|r| column_name(r) == column)
            .filter_map(|r| match class {
                None => Some(r.error_rate),
                Some(c) => r.class_error(c),
            })
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };

    writeln!(out, "class,{}", columns.join(","))?;
    let rows = std::iter::once(None).chain(classes.iter().map(|c| Some(*c)));
    for class in rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|col| {
                mean(col, class)
                    .map(|v| format!("{v:.6}"))
                    .unwrap_or_default()
            })
            .collect();
        writeln!(out, "{},{}", class.unwrap_or("all"), cells.join(","))?;
    }
    Ok(())
}
