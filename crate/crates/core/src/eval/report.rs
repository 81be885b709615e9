use std::fmt::Write;
use std::str::FromStr;

use super::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?} (table or json)")),
        }
    }
}

/// Rows of `(name, report)` as an aligned text table with the columns
/// Precision, Recall, F-Measure and (P+R)/2.
pub fn render_report_table(rows: &[(&str, &EvalReport)]) -> String {
    let width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>9}  {:>7}  {:>9}  {:>7}  {:>6}  {:>9}  {:>7}",
        "", "Precision", "Recall", "F-Measure", "(P+R)/2", "Truth", "Predicted", "Matched"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>8.2}%  {:>6.2}%  {:>9.2}  {:>7.2}  {:>6}  {:>9}  {:>7}",
            name, r.precision, r.recall, r.f_measure, r.pr_mean, r.truth, r.predicted, r.matched
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let r = EvalReport::from_counts(2, 3, 1);
        let table = render_report_table(&[("rules", &r)]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("Precision") && lines[0].contains("(P+R)/2"));
        assert!(lines[1].starts_with("rules"));
        assert!(
            lines[1].contains("33.33%")
                && lines[1].contains("50.00%")
                && lines[1].contains("40.00")
                && lines[1].contains("41.67")
        );
    }
}
