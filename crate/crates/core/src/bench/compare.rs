//! Column-wise relative deviation between two result tables.

use serde::Serialize;

use super::emit::Table;
use crate::error::{Error, Result};

/// Axis values must agree to this relative precision.
const AXIS_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDeviation {
    pub name: String,
    pub max_rel: f64,
    pub mean_rel: f64,
    /// Row of the largest deviation.
    pub worst_row: usize,
    /// Rows where both sides are NaN; excluded from the statistics.
    pub skipped: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub tolerance: f64,
    pub columns: Vec<ColumnDeviation>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.columns.iter().all(|c| c.passed)
    }

    pub fn max_rel(&self) -> f64 {
        self.columns.iter().map(|c| c.max_rel).fold(0.0, f64::max)
    }
}

/// `|a − b| / max(|a|, |b|)`; zero when both are zero, infinite when one is NaN.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        return f64::INFINITY;
    }
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

fn selected(name: &str, filter: &[String]) -> bool {
    filter.is_empty()
        || filter
            .iter()
            .any(|f| name == f || name.strip_suffix(f.as_str()).is_some_and(|p| p.ends_with('.')))
}

/// Compares every non-axis column present in both tables. A filter entry
/// `total` selects `total` and every `<label>.total`.
pub fn compare(a: &Table, b: &Table, tolerance: f64, filter: &[String]) -> Result<CompareReport> {
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance", "must be >= 0"));
    }
    if a.names.first() != b.names.first() {
        return Err(Error::AxisMismatch(format!(
            "axis columns differ: {:?} vs {:?}",
            a.names.first(),
            b.names.first()
        )));
    }
    if a.rows() != b.rows() {
        return Err(Error::AxisMismatch(format!("{} rows vs {} rows", a.rows(), b.rows())));
    }
    if let Some(i) = (0..a.rows()).find(|&i| relative_deviation(a.columns[0][i], b.columns[0][i]) > AXIS_RTOL) {
        return Err(Error::AxisMismatch(format!(
            "row {i}: {:e} vs {:e}",
            a.columns[0][i], b.columns[0][i]
        )));
    }

    let mut columns = Vec::new();
    for (name, ca) in a.names.iter().zip(&a.columns).skip(1) {
        if !selected(name, filter) {
            continue;
        }
        let Some(cb) = b.column(name) else { continue };
        let (mut max_rel, mut sum, mut n, mut worst_row, mut skipped) = (0.0_f64, 0.0, 0usize, 0, 0);
        for (i, (&x, &y)) in ca.iter().zip(cb).enumerate() {
            if x.is_nan() && y.is_nan() {
                skipped += 1;
                continue;
            }
            let d = relative_deviation(x, y);
            if d > max_rel {
                max_rel = d;
                worst_row = i;
            }
            sum += d;
            n += 1;
        }
        let mean_rel = if n > 0 { sum / n as f64 } else { 0.0 };
        columns.push(ColumnDeviation {
            name: name.clone(),
            max_rel,
            mean_rel,
            worst_row,
            skipped,
            passed: max_rel <= tolerance,
        });
    }
    if columns.is_empty() {
        return Err(Error::Config("no common columns to compare".into()));
    }
    Ok(CompareReport { tolerance, columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(axis: Vec<f64>, y: Vec<f64>) -> Table {
        Table::new(vec!["x".into(), "c.total".into()], vec![axis, y]).unwrap()
    }

    #[test]
    fn self_comparison_is_zero() {
        let t = table(vec![1.0, 2.0], vec![3.0, f64::NAN]);
        let r = compare(&t, &t, 0.0, &[]).unwrap();
        assert!(r.passed());
        assert_eq!(r.max_rel(), 0.0);
        assert_eq!(r.columns[0].skipped, 1);
    }

    #[test]
    fn deviation_statistics() {
        let a = table(vec![1.0, 2.0], vec![1.0, 2.0]);
        let b = table(vec![1.0, 2.0], vec![1.1, 2.0]);
        let r = compare(&a, &b, 1e-3, &["total".into()]).unwrap();
        let c = &r.columns[0];
        assert!((c.max_rel - 0.1 / 1.1).abs() < 1e-15);
        assert!((c.mean_rel - 0.05 / 1.1).abs() < 1e-15);
        assert_eq!(c.worst_row, 0);
        assert!(!r.passed());
        assert!(compare(&a, &b, 1e-3, &["field".into()]).is_err());
    }

    #[test]
    fn axis_mismatch_detected() {
        let a = table(vec![1.0, 2.0], vec![1.0, 2.0]);
        let b = table(vec![1.0, 2.5], vec![1.0, 2.0]);
        assert!(matches!(compare(&a, &b, 1.0, &[]), Err(Error::AxisMismatch(_))));
        let c = table(vec![1.0], vec![1.0]);
        assert!(matches!(compare(&a, &c, 1.0, &[]), Err(Error::AxisMismatch(_))));
    }
}
