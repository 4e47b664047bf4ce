// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV ingestion, log returns, regression/lag-embedded samples and exports.
//!
//! Input files are comma-separated UTF-8 with a header row. Missing values
//! are rejected, never imputed. Numbers are written in Rust's shortest
//! round-trip representation, so exported files reload bit-exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sample;
use crate::stats::TestReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSeries {
    /// ISO-8601 dates, compared lexicographically.
    pub timestamps: Option<Vec<String>>,
    pub values: Vec<f64>,
    pub label: String,
}

impl RawSeries {
    pub fn new(values: Vec<f64>, timestamps: Option<Vec<String>>, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite value at position {i}")));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.len() {
                return Err(Error::input(format!("{} timestamps for {} values", ts.len(), values.len())));
            }
            if let Some(i) = ts.windows(2).position(|w| w[0] >= w[1]) {
                return Err(Error::input(format!(
                    "timestamps not strictly increasing at position {}: '{}' then '{}'",
                    i + 1,
                    ts[i],
                    ts[i + 1]
                )));
            }
        }
        Ok(Self { timestamps, values, label: label.into() })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reads `value_column` (and optionally `timestamp_column`) from a headed
/// CSV file. Row numbers in errors are 1-based file lines.
pub fn load_csv(path: impl AsRef<Path>, value_column: &str, timestamp_column: Option<&str>) -> Result<RawSeries> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::input(format!("{display}: no column named '{name}'")))
    };
    let vcol = find(value_column)?;
    let tcol = timestamp_column.map(find).transpose()?;

    let mut values = Vec::new();
    let mut stamps = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |reason: String| Error::Data { path: display.clone(), row, reason };
        let cell = rec.get(vcol).unwrap_or("");
        if cell.is_empty() {
            return Err(bad(format!("missing value in column '{value_column}'")));
        }
        let v: f64 = cell.parse().map_err(|_| bad(format!("cannot parse '{cell}' as a number")))?;
        if !v.is_finite() {
            return Err(bad(format!("non-finite value '{cell}'")));
        }
        values.push(v);
        if let Some(tc) = tcol {
            let ts = rec.get(tc).unwrap_or("");
            if ts.is_empty() {
                return Err(bad("missing timestamp".into()));
            }
            if let Some(prev) = stamps.last() {
                if prev >= &ts.to_string() {
                    return Err(bad(format!("timestamp '{ts}' does not follow '{prev}'")));
                }
            }
            stamps.push(ts.to_string());
        }
    }
    RawSeries::new(values, tcol.map(|_| stamps), value_column)
}

/// `ln v[t+1] - ln v[t]`, dated at the later observation.
pub fn log_diff_returns(series: &RawSeries) -> Result<RawSeries> {
    if series.len() < 2 {
        return Err(Error::input("log returns need at least two values"));
    }
    if let Some(i) = series.values.iter().position(|&v| v <= 0.0) {
        return Err(Error::input(format!("nonpositive value {} at position {i}", series.values[i])));
    }
    let values = series.values.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    let timestamps = series.timestamps.as_ref().map(|ts| ts[1..].to_vec());
    RawSeries::new(values, timestamps, format!("{} log returns", series.label))
}

/// Index-aligned pairs `(x_t, y_t)`.
pub fn make_regression_sample(y_series: &RawSeries, x_series: &RawSeries) -> Result<Sample> {
    if y_series.len() != x_series.len() {
        return Err(Error::input(format!(
            "response has {} values but covariate has {}",
            y_series.len(),
            x_series.len()
        )));
    }
    Sample::univariate(x_series.values.clone(), y_series.values.clone())
}

/// Rows `(Y_{t-1}, ..., Y_{t-d})` with response `Y_t`, `t = d..len`.
pub fn lag_embed(y_series: &RawSeries, d: usize) -> Result<Sample> {
    let y = &y_series.values;
    if d == 0 {
        return Err(Error::input("lag count must be at least 1"));
    }
    if d >= y.len() {
        return Err(Error::input(format!("lag count {d} leaves no rows for a series of length {}", y.len())));
    }
    let mut x = Vec::with_capacity((y.len() - d) * d);
    for t in d..y.len() {
        x.extend((1..=d).map(|j| y[t - j]));
    }
    Sample::new(x, y[d..].to_vec(), d)
}

/// Timestamps of the responses of [`lag_embed`] (drops the first `d`).
pub fn lagged_timestamps(y_series: &RawSeries, d: usize) -> Option<Vec<String>> {
    y_series.timestamps.as_ref().map(|ts| ts[d.min(ts.len())..].to_vec())
}

/// Two-column trajectory CSV, one row per `k = 0..n`: `s,value`, or
/// `date,value` when `timestamps` (one per observation) are given. The
/// `k = 0` row has an empty date.
pub fn export_trajectory(profile: &[f64], timestamps: Option<&[String]>, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let n = profile.len().saturating_sub(1);
    match timestamps {
        Some(ts) => {
            if ts.len() != n {
                return Err(Error::input(format!("{} timestamps for a profile over {n} observations", ts.len())));
            }
            w.write_record(["date", "value"])?;
            for (k, v) in profile.iter().enumerate() {
                let date = if k == 0 { "" } else { ts[k - 1].as_str() };
                w.write_record([date.to_string(), format!("{v:?}")])?;
            }
        }
        None => {
            w.write_record(["s", "value"])?;
            for (k, v) in profile.iter().enumerate() {
                let s = k as f64 / n.max(1) as f64;
                w.write_record([format!("{s:?}"), format!("{v:?}")])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trajectory file back as `(first column, value)` pairs.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Vec<(String, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = rec[1].parse().map_err(|_| Error::input(format!("bad trajectory value '{}'", &rec[1])))?;
        out.push((rec[0].to_string(), v));
    }
    Ok(out)
}

pub fn export_report(report: &TestReport, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, report.to_json()? + "\n")?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<TestReport> {
    TestReport::from_json(&fs::read_to_string(path)?)
}

/// Writes a sample as CSV with columns `t,y,x` (`d = 1`) or `t,y,x1..xd`.
pub fn export_sample(sample: &Sample, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let d = sample.dim();
    let mut header = vec!["t".to_string(), "y".to_string()];
    if d == 1 {
        header.push("x".into());
    } else {
        header.extend((1..=d).map(|j| format!("x{j}")));
    }
    w.write_record(&header)?;
    for t in 0..sample.len() {
        let mut rec = vec![(t + 1).to_string(), format!("{:?}", sample.y()[t])];
        rec.extend(sample.x_row(t).iter().map(|v| format!("{v:?}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`export_sample`].
pub fn load_sample(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    let d = r.headers()?.len().checked_sub(2).filter(|&d| d >= 1).ok_or_else(|| {
        Error::input(format!("{}: expected columns t,y,x...", path.display()))
    })?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Data {
                path: path.display().to_string(),
                row: i + 2,
                reason: format!("cannot parse '{s}'"),
            })
        };
        y.push(parse(&rec[1])?);
        for j in 0..d {
            x.push(parse(&rec[2 + j])?);
        }
    }
    Sample::new(x, y, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(v: &[f64]) -> RawSeries {
        RawSeries::new(v.to_vec(), None, "test").unwrap()
    }

    #[test]
    fn three_row_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "date,rate\n2005-07-26,1.5\n2005-07-27,1.6\n2005-07-28,1.55\n").unwrap();
        let s = load_csv(&p, "rate", Some("date")).unwrap();
        assert_eq!(s.values, vec![1.5, 1.6, 1.55]);
        assert_eq!(s.timestamps.unwrap()[2], "2005-07-28");
    }

    #[test]
    fn csv_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "date,rate\n2005-07-26,1.5\n2005-07-27,\n").unwrap();
        match load_csv(&p, "rate", None) {
            Err(Error::Data { row, .. }) => assert_eq!(row, 3),
            other => panic!("{other:?}"),
        }
        fs::write(&p, "date,rate\n2005-07-26,1.5\n2005-07-27,abc\n").unwrap();
        assert!(matches!(load_csv(&p, "rate", None), Err(Error::Data { row: 3, .. })));
        assert!(load_csv(&p, "nope", None).is_err());
        fs::write(&p, "date,rate\n2005-07-27,1.5\n2005-07-26,1.4\n").unwrap();
        assert!(matches!(load_csv(&p, "rate", Some("date")), Err(Error::Data { row: 3, .. })));
    }

    #[test]
    fn returns() {
        assert!(log_diff_returns(&series(&[2.0, 2.0, 2.0])).unwrap().values.iter().all(|&v| v == 0.0));
        let r = log_diff_returns(&series(&[1.0, std::f64::consts::E])).unwrap();
        assert_eq!(r.values.len(), 1);
        assert!((r.values[0] - 1.0).abs() < 1e-15);
        let geo: Vec<f64> = (0..20).map(|i| 3.0 * 1.01f64.powi(i)).collect();
        for v in log_diff_returns(&series(&geo)).unwrap().values {
            assert!((v - 1.01f64.ln()).abs() < 1e-12);
        }
        assert!(log_diff_returns(&series(&[1.0, 0.0])).is_err());
        assert!(log_diff_returns(&series(&[1.0])).is_err());
        let dated = RawSeries::new(vec![1.0, 2.0, 4.0], Some(vec!["a".into(), "b".into(), "c".into()]), "x").unwrap();
        assert_eq!(log_diff_returns(&dated).unwrap().timestamps.unwrap(), vec!["b", "c"]);
    }

    #[test]
    fn embedding() {
        let s = lag_embed(&series(&[1.0, 2.0, 3.0, 4.0]), 1).unwrap();
        assert_eq!(s.x(), &[1.0, 2.0, 3.0]);
        assert_eq!(s.y(), &[2.0, 3.0, 4.0]);
        let s = lag_embed(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.x_row(0), &[2.0, 1.0]);
        assert_eq!(s.x_row(2), &[4.0, 3.0]);
        assert!(lag_embed(&series(&[1.0, 2.0]), 2).is_err());
        assert!(make_regression_sample(&series(&[1.0, 2.0]), &series(&[1.0])).is_err());
    }

    #[test]
    fn trajectory_export() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        export_trajectory(&[0.0; 11], None, &p).unwrap();
        let rows = load_trajectory(&p).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows.iter().all(|r| r.1 == 0.0));
        assert_eq!(rows[10].0, "1.0");

        let ts: Vec<String> = (1..=3).map(|d| format!("2006-03-0{d}")).collect();
        export_trajectory(&[0.0, 0.1, 0.3, 0.2], Some(&ts), &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("date,value\n"));
        assert_eq!(load_trajectory(&p).unwrap()[2], ("2006-03-02".to_string(), 0.3));
        assert!(export_trajectory(&[0.0, 1.0], Some(&ts), &p).is_err());
    }

    proptest! {
        #[test]
        fn cumulative_exp_inverts_returns(r in proptest::collection::vec(-0.1f64..0.1, 1..50), p0 in 0.1f64..10.0) {
            let mut prices = vec![p0];
            for v in &r {
                let last = *prices.last().unwrap();
                prices.push(last * v.exp());
            }
            let back = log_diff_returns(&series(&prices)).unwrap();
            for (a, b) in back.values.iter().zip(&r) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn lag_rows_index_the_series(v in proptest::collection::vec(-5.0f64..5.0, 4..30), d in 1usize..4) {
            let s = lag_embed(&series(&v), d).unwrap();
            for t in 0..s.len() {
                for j in 0..d {
                    prop_assert_eq!(s.x_row(t)[j], v[t + d - 1 - j]);
                }
                prop_assert_eq!(s.y()[t], v[t + d]);
            }
        }
    }
}
