use std::fmt::Write as _;

use super::{ScoreReport, TaskId};

/// Rounds to one decimal place, halves away from zero.
///
/// A relative nudge absorbs binary representation error, so values such as
/// 48.475 that sit on a half in decimal round up as written.
pub fn round1(x: f64) -> f64 {
    let scaled = x * 10.0;
    let nudged = scaled + scaled.signum() * scaled.abs().max(1.0) * 1e-12;
    (nudged.abs() + 0.5).floor().copysign(x) / 10.0
}

pub fn fmt1(x: f64) -> String {
    format!("{:.1}", round1(x))
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    /// Percent per task, in column order.
    pub values: Vec<(TaskId, f64)>,
    /// Unweighted mean over the row's tasks.
    pub macro_avg: f64,
    /// Item-weighted mean; unknown for rows built from published numbers.
    pub micro_avg: Option<f64>,
}

impl ReportRow {
    /// Builds a row from per-task accuracies, computing the macro average.
    pub fn from_accuracies(label: impl Into<String>, values: Vec<(TaskId, f64)>) -> Self {
        let macro_avg = if values.is_empty() {
            0.0
        } else {
            values.iter().map(|(_, v)| v).sum::<f64>() / values.len() as f64
        };
        Self {
            label: label.into(),
            values,
            macro_avg,
            micro_avg: None,
        }
    }

    /// `v1 v2 ... | macro`, each to one decimal.
    pub fn compact(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|(_, v)| fmt1(*v)).collect();
        format!("{} | {}", vals.join(" "), fmt1(self.macro_avg))
    }
}

/// Results table: tasks as columns followed by macro and micro averages.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportTable {
    pub columns: Vec<TaskId>,
    pub rows: Vec<ReportRow>,
}

/// Chance row plus the scored configuration.
pub fn report_table(report: &ScoreReport, label: &str) -> ReportTable {
    let columns: Vec<TaskId> = report.tasks.iter().map(|t| t.task).collect();
    let mut chance = ReportRow::from_accuracies(
        "Chance level",
        report.tasks.iter().map(|t| (t.task, t.chance)).collect(),
    );
    chance.macro_avg = report.macro_chance;
    chance.micro_avg = Some(report.micro_chance);
    let mut scored = ReportRow::from_accuracies(label, report.tasks.iter().map(|t| (t.task, t.accuracy)).collect());
    scored.macro_avg = report.macro_accuracy;
    scored.micro_avg = Some(report.micro_accuracy);
    ReportTable {
        columns,
        rows: vec![chance, scored],
    }
}

impl ReportTable {
    fn cell(row: &ReportRow, task: TaskId) -> String {
        row.values
            .iter()
            .find(|(t, _)| *t == task)
            .map_or_else(|| "-".to_string(), |(_, v)| fmt1(*v))
    }

    pub fn to_text(&self) -> String {
        let label_w = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .max()
            .unwrap_or(0)
            .max("Configuration".len());
        let mut out = String::new();
        write!(out, "{:<label_w$}", "Configuration").unwrap();
        for c in &self.columns {
            write!(out, " {:>5}", c.abbreviation()).unwrap();
        }
        writeln!(out, " | {:>10} {:>10}", "Avg(macro)", "Avg(micro)").unwrap();
        for row in &self.rows {
            write!(out, "{:<label_w$}", row.label).unwrap();
            for c in &self.columns {
                write!(out, " {:>5}", Self::cell(row, *c)).unwrap();
            }
            let micro = row.micro_avg.map_or_else(|| "-".to_string(), fmt1);
            writeln!(out, " | {:>10} {:>10}", fmt1(row.macro_avg), micro).unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("configuration");
        for c in &self.columns {
            write!(out, ",{c}").unwrap();
        }
        out.push_str(",avg_macro,avg_micro\n");
        for row in &self.rows {
            out.push_str(&row.label.replace(',', " "));
            for c in &self.columns {
                write!(out, ",{}", Self::cell(row, *c)).unwrap();
            }
            let micro = row.micro_avg.map(fmt1).unwrap_or_default();
            writeln!(out, ",{},{micro}", fmt1(row.macro_avg)).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::TaskScore;

    #[test]
    fn rounding_half_up() {
        assert_eq!(fmt1(48.475), "48.5");
        assert_eq!(fmt1(50.94), "50.9");
        assert_eq!(fmt1(100.0 / 3.0), "33.3");
        assert_eq!(fmt1(0.05), "0.1");
        assert_eq!(fmt1(0.04999), "0.0");
        assert_eq!(fmt1(25.0), "25.0");
    }

    #[test]
    fn single_task_average() {
        let r = ScoreReport {
            tasks: vec![TaskScore {
                task: TaskId::ST,
                n_items: 10,
                n_correct: 7,
                accuracy: 70.0,
                chance: 50.0,
                n_unparseable: 0,
                n_missing: 0,
            }],
            micro_accuracy: 70.0,
            macro_accuracy: 70.0,
            micro_chance: 50.0,
            macro_chance: 50.0,
            n_unparseable: 0,
            n_missing: 0,
            warnings: vec![],
        };
        let t = report_table(&r, "model");
        assert_eq!(t.rows[1].compact(), "70.0 | 70.0");
        let text = t.to_text();
        assert!(text.contains("Avg(macro)") && text.contains("Avg(micro)"));
        assert_eq!(t.to_csv().lines().nth(2).unwrap(), "model,70.0,70.0,70.0");
    }
}
