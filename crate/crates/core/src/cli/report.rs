//! CSV report rows.

use std::fs;
use std::path::Path;

use crate::convergence_stats::ConvergenceReport;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment,schedule_value,distance,residual,tolerance,pass";

/// Schedule-value cell of the summary row.
pub const SUMMARY_LABEL: &str = "summary";

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    /// `None` marks the summary row.
    pub schedule_value: Option<f64>,
    pub distance: f64,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// One row per schedule entry, in convergence order, then the summary row.
pub fn rows_from_report(experiment: &str, report: &ConvergenceReport) -> Vec<ReportRow> {
    let mut rows: Vec<ReportRow> = report
        .entries
        .iter()
        .map(|e| ReportRow {
            experiment: experiment.to_string(),
            schedule_value: Some(e.schedule_value),
            distance: e.distance,
            residual: e.residual,
            tolerance: report.tolerance,
            pass: e.distance <= report.tolerance,
        })
        .collect();
    rows.push(ReportRow {
        experiment: experiment.to_string(),
        schedule_value: None,
        distance: report.final_distance,
        residual: report.final_residual(),
        tolerance: report.tolerance,
        pass: report.pass,
    });
    rows
}

/// `%.9g`: nine significant digits, trailing zeros removed, exponent form
/// outside `[1e-5, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.8e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn format_rows(rows: &[ReportRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let schedule = row.schedule_value.map_or_else(|| SUMMARY_LABEL.to_string(), format_sig9);
        let residual = row.residual.map(format_sig9).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.experiment,
            schedule,
            format_sig9(row.distance),
            residual,
            format_sig9(row.tolerance),
            row.pass
        ));
    }
    out
}

pub fn parse_rows(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("report does not start with the expected header".into()));
    }
    let num = |cell: &str| cell.parse::<f64>().map_err(|_| Error::Config(format!("bad numeric cell `{cell}`")));
    lines
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 6 {
                return Err(Error::Config(format!("row `{line}` does not have 6 cells")));
            }
            Ok(ReportRow {
                experiment: cells[0].to_string(),
                schedule_value: if cells[1] == SUMMARY_LABEL { None } else { Some(num(cells[1])?) },
                distance: num(cells[2])?,
                residual: if cells[3].is_empty() { None } else { Some(num(cells[3])?) },
                tolerance: num(cells[4])?,
                pass: match cells[5] {
                    "true" => true,
                    "false" => false,
                    other => return Err(Error::Config(format!("bad pass cell `{other}`"))),
                },
            })
        })
        .collect()
}

/// Writes the CSV; fails on an empty row list.
pub fn emit_report(rows: &[ReportRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("no report rows to write".into()));
    }
    fs::write(path, format_rows(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(distance: f64) -> ReportRow {
        ReportRow { experiment: "e".into(), schedule_value: Some(0.01), distance, residual: None, tolerance: 0.02, pass: true }
    }

    #[test]
    fn formatting() {
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(0.02), "0.02");
        assert_eq!(format_sig9(1e-4), "0.0001");
        assert_eq!(format_sig9(2.5e-7), "2.5e-07");
        assert_eq!(format_sig9(10_000.0), "10000");
        assert_eq!(format_sig9(1e12), "1e+12");
        assert_eq!(format_sig9(-0.019867330675530222), "-0.0198673307");
        assert_eq!(format_sig9(0.0), "0");
    }

    #[test]
    fn one_row_file_has_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_report(&[row(1.0 / 3.0)], &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().nth(1).unwrap(), "e,0.01,0.333333333,,0.02,true");
        assert!(emit_report(&[], &path).is_err());
        assert!(matches!(emit_report(&[row(0.1)], &dir.path().join("missing/dir.csv")), Err(Error::Io(_))));
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            values in prop::collection::vec((1e-12f64..1e6, prop::option::of(-1e3f64..1e3), any::<bool>(), prop::option::of(1e-6f64..1.0)), 1..12)
        ) {
            let rows: Vec<ReportRow> = values
                .iter()
                .map(|&(d, r, p, s)| ReportRow { experiment: "x-1".into(), schedule_value: s, distance: d, residual: r, tolerance: 0.02, pass: p })
                .collect();
            let text = format_rows(&rows);
            let parsed = parse_rows(&text).unwrap();
            prop_assert_eq!(format_rows(&parsed), text.clone());
            // a second pass is exact: rendered values are fixed points
            prop_assert_eq!(parse_rows(&format_rows(&parsed)).unwrap(), parsed.clone());
            for (a, b) in rows.iter().zip(&parsed) {
                prop_assert!((a.distance - b.distance).abs() <= 5e-9 * a.distance.abs());
                prop_assert_eq!(a.pass, b.pass);
                prop_assert_eq!(a.schedule_value.is_some(), b.schedule_value.is_some());
            }
        }
    }
}
