//! Coverage/length reports: per-replication rows, aggregate statistics,
//! and their CSV/JSON/text renderings.

use std::fs;

use ldp_sgd::error::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::spec::ExperimentSpec;

/// One (replication, coordinate) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replicate: u64,
    pub coord: usize,
    pub theta_bar: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
    pub length: f64,
}

/// Aggregate coverage and length for one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateSummary {
    pub coord: usize,
    /// Fraction of replications whose interval contained the target.
    pub coverage: f64,
    /// Binomial standard error sqrt(p(1-p)/M).
    pub coverage_se: f64,
    pub mean_length: f64,
    /// Sample standard deviation of the lengths over sqrt(M).
    pub length_se: f64,
}

/// Recomputes the aggregate statistics from exported rows.
pub fn summarize(rows: &[ReplicationRow], dim: usize, replications: u64) -> Vec<CoordinateSummary> {
    let m = replications as f64;
    (0..dim)
        .map(|coord| {
            let lengths: Vec<f64> =
                rows.iter().filter(|r| r.coord == coord).map(|r| r.length).collect();
            let hits = rows.iter().filter(|r| r.coord == coord && r.covered).count();
            let coverage = hits as f64 / m;
            let mean_length = lengths.iter().sum::<f64>() / m;
            let length_var = if lengths.len() > 1 {
                lengths.iter().map(|l| (l - mean_length) * (l - mean_length)).sum::<f64>()
                    / (m - 1.0)
            } else {
                0.0
            };
            CoordinateSummary {
                coord,
                coverage,
                coverage_se: (coverage * (1.0 - coverage) / m).sqrt(),
                mean_length,
                length_se: (length_var / m).sqrt(),
            }
        })
        .collect()
}

/// Everything `run` produces: the spec echo, aggregate header, and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub summaries: Vec<CoordinateSummary>,
    pub rows: Vec<ReplicationRow>,
}

#[derive(Serialize)]
struct Header<'a> {
    spec: &'a ExperimentSpec,
    summaries: &'a [CoordinateSummary],
}

impl Report {
    pub fn new(spec: ExperimentSpec, rows: Vec<ReplicationRow>) -> Self {
        let summaries = summarize(&rows, spec.model.dim(), spec.replications);
        Self { spec, summaries, rows }
    }

    /// Aggregate header as pretty-printed JSON (rows live in the CSV).
    pub fn summary_json(&self) -> String {
        let header = Header { spec: &self.spec, summaries: &self.summaries };
        let mut text = serde_json::to_string_pretty(&header).expect("report serialization");
        text.push('\n');
        text
    }

    pub fn rows_csv(&self) -> Result<String> {
        rows_to_csv(self.rows.iter().map(|r| (self.spec.method.label(), r)))
    }

    /// Honors the spec's output paths, if any.
    pub fn write_outputs(&self) -> Result<()> {
        if let Some(path) = &self.spec.output.rows {
            fs::write(path, self.rows_csv()?)?;
        }
        if let Some(path) = &self.spec.output.summary {
            fs::write(path, self.summary_json())?;
        }
        Ok(())
    }

    pub fn table(&self) -> String {
        render_table(&[self])
    }
}

fn rows_to_csv<'a, I>(rows: I) -> Result<String>
where
    I: Iterator<Item = (&'static str, &'a ReplicationRow)>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["method", "replicate", "coord", "theta_bar", "lower", "upper", "covered", "length"])?;
    for (method, row) in rows {
        writer.write_record([
            method.to_string(),
            row.replicate.to_string(),
            row.coord.to_string(),
            format!("{}", row.theta_bar),
            format!("{}", row.lower),
            format!("{}", row.upper),
            row.covered.to_string(),
            format!("{}", row.length),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads rows back from the CSV produced by [`Report::rows_csv`].
pub fn rows_from_csv(text: &str) -> Result<Vec<(String, ReplicationRow)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let field = |k: usize| -> Result<&str> {
            record.get(k).ok_or_else(|| Error::MalformedRow {
                row: idx as u64,
                message: format!("missing column {k}"),
            })
        };
        let parse_f64 = |k: usize| -> Result<f64> {
            field(k)?.parse().map_err(|e| Error::MalformedRow {
                row: idx as u64,
                message: format!("column {k}: {e}"),
            })
        };
        out.push((
            field(0)?.to_string(),
            ReplicationRow {
                replicate: field(1)?.parse().map_err(|e| Error::MalformedRow {
                    row: idx as u64,
                    message: format!("column 1: {e}"),
                })?,
                coord: field(2)?.parse().map_err(|e| Error::MalformedRow {
                    row: idx as u64,
                    message: format!("column 2: {e}"),
                })?,
                theta_bar: parse_f64(3)?,
                lower: parse_f64(4)?,
                upper: parse_f64(5)?,
                covered: field(6)? == "true",
                length: parse_f64(7)?,
            },
        ));
    }
    Ok(out)
}

/// Side-by-side text table, one block of rows per report.
pub fn render_table(reports: &[&Report]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<8}{:<7}{:<20}{}\n",
        "method", "coord", "coverage (se)", "length (se)"
    ));
    for report in reports {
        for s in &report.summaries {
            let coverage = format!("{:.3} ({:.3})", s.coverage, s.coverage_se);
            let length = format!("{:.6} ({:.6})", s.mean_length, s.length_se);
            out.push_str(&format!(
                "{:<8}{:<7}{:<20}{length}\n",
                report.spec.method.label(),
                s.coord,
                coverage,
            ));
        }
    }
    out
}

/// Merged rows CSV for a method comparison.
pub fn merged_rows_csv(reports: &[&Report]) -> Result<String> {
    rows_to_csv(
        reports
            .iter()
            .flat_map(|rep| rep.rows.iter().map(|r| (rep.spec.method.label(), r))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{
        BootstrapSpec, DataLaw, Method, ModelSpec, OutputSpec, ScheduleSpec,
    };

    fn spec(method: Method) -> ExperimentSpec {
        ExperimentSpec {
            model: ModelSpec::Quantile { tau: 0.5, law: DataLaw::StandardNormal },
            method,
            n: 1000,
            privacy_epsilon: None,
            schedule: ScheduleSpec::default(),
            bootstrap: BootstrapSpec::default(),
            replications: 2,
            master_seed: 3,
            theta0: None,
            output: OutputSpec::default(),
        }
    }

    fn sample_rows() -> Vec<ReplicationRow> {
        vec![
            ReplicationRow {
                replicate: 0,
                coord: 0,
                theta_bar: 0.01,
                lower: -0.1,
                upper: 0.12,
                covered: true,
                length: 0.22,
            },
            ReplicationRow {
                replicate: 1,
                coord: 0,
                theta_bar: 0.3,
                lower: 0.2,
                upper: 0.4,
                covered: false,
                length: 0.2,
            },
        ]
    }

    #[test]
    fn summaries_match_hand_arithmetic() {
        let report = Report::new(spec(Method::BlockBootstrap), sample_rows());
        let s = &report.summaries[0];
        assert_eq!(s.coverage, 0.5);
        assert_eq!(s.coverage_se, (0.25f64 / 2.0).sqrt());
        assert!((s.mean_length - 0.21).abs() < 1e-15);
        let var = ((0.22f64 - 0.21).powi(2) + (0.2f64 - 0.21).powi(2)) / 1.0;
        assert!((s.length_se - (var / 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trips_rows_exactly() {
        let report = Report::new(spec(Method::BatchMean), sample_rows());
        let text = report.rows_csv().unwrap();
        let back = rows_from_csv(&text).unwrap();
        assert_eq!(back.len(), report.rows.len());
        for ((method, row), original) in back.iter().zip(&report.rows) {
            assert_eq!(method, "bm");
            assert_eq!(row, original);
        }
    }

    #[test]
    fn summaries_recompute_from_exported_rows() {
        let report = Report::new(spec(Method::BlockBootstrap), sample_rows());
        let text = report.rows_csv().unwrap();
        let rows: Vec<ReplicationRow> =
            rows_from_csv(&text).unwrap().into_iter().map(|(_, r)| r).collect();
        let again = summarize(&rows, 1, 2);
        assert_eq!(again, report.summaries);
    }

    #[test]
    fn table_lists_each_method_once() {
        let bb = Report::new(spec(Method::BlockBootstrap), sample_rows());
        let bm = Report::new(spec(Method::BatchMean), sample_rows());
        let table = render_table(&[&bb, &bm]);
        assert_eq!(table.matches("\nbb").count(), 1);
        assert_eq!(table.matches("\nbm").count(), 1);
    }
}
