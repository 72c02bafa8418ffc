//! Reading observed series from CSV files.

use std::path::Path as FsPath;

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;
use diffusion_gof::sde::Path;

/// Trading days per year; one business day is one step.
pub const DAILY_DELTA: f64 = 1.0 / 252.0;

/// Cells treated as missing observations.
const MISSING: [&str; 5] = ["", ".", "NA", "NaN", "null"];

/// Observation stamps of a series.
#[derive(Debug, Clone, PartialEq)]
pub enum Index {
    Dates(Vec<NaiveDate>),
    Times(Vec<f64>),
}

impl Index {
    pub fn len(&self) -> usize {
        match self {
            Index::Dates(d) => d.len(),
            Index::Times(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An observed rate series, in the units of the file (percent for yields).
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    /// Name of the value column, e.g. a maturity such as `DGS10`.
    pub label: String,
    pub index: Index,
    pub rates: Vec<f64>,
    pub delta: f64,
    /// Rows skipped because the value was missing.
    pub dropped: usize,
}

impl RateSeries {
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn to_path(&self) -> Result<Path> {
        Ok(Path::new(self.delta, self.rates.clone())?)
    }
}

/// Which columns to read.
#[derive(Debug, Clone, Default)]
pub struct ColumnSpec {
    /// Date or time column; the first column when absent.
    pub index: Option<String>,
    /// Value column; the second column when absent.
    pub value: Option<String>,
    /// Step between observations. Defaults to `1/252` for dated rows and to
    /// the first time difference for numeric stamps.
    pub delta: Option<f64>,
}

fn position(headers: &csv::StringRecord, name: Option<&str>, fallback: usize) -> Result<usize> {
    match name {
        Some(name) => headers.iter().position(|h| h.trim() == name).ok_or_else(|| {
            let available: Vec<&str> = headers.iter().collect();
            anyhow!("column {name:?} not found; available columns: {}", available.join(", "))
        }),
        None if fallback < headers.len() => Ok(fallback),
        None => bail!("expected at least {} columns, found {}", fallback + 1, headers.len()),
    }
}

/// Loads one series from a CSV file with a header row.
///
/// Rows whose value is missing (`""`, `.`, `NA`, `NaN`, `null`) are dropped
/// and counted; anything else that fails to parse is an error naming the
/// line.
pub fn load_csv(path: impl AsRef<FsPath>, spec: &ColumnSpec) -> Result<RateSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let ti = position(&headers, spec.index.as_deref(), 0)?;
    let vi = position(&headers, spec.value.as_deref(), 1)?;
    let label = headers.get(vi).unwrap_or_default().trim().to_string();

    let mut dates = Vec::new();
    let mut times = Vec::new();
    let mut rates = Vec::new();
    let mut dropped = 0;
    let mut dated: Option<bool> = None;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let stamp = record.get(ti).unwrap_or_default().trim();
        let value = record.get(vi).unwrap_or_default().trim();
        if MISSING.contains(&value) {
            dropped += 1;
            continue;
        }
        let rate: f64 = value
            .parse()
            .map_err(|_| anyhow!("line {line}: cannot parse value {value:?}"))?;
        if !rate.is_finite() {
            bail!("line {line}: value {value:?} is not finite");
        }
        let is_date = *dated.get_or_insert_with(|| NaiveDate::parse_from_str(stamp, "%Y-%m-%d").is_ok());
        if is_date {
            let d = NaiveDate::parse_from_str(stamp, "%Y-%m-%d")
                .map_err(|_| anyhow!("line {line}: cannot parse date {stamp:?}"))?;
            if dates.last().is_some_and(|&last| d <= last) {
                bail!("line {line}: dates must be strictly increasing");
            }
            dates.push(d);
        } else {
            let t: f64 = stamp
                .parse()
                .map_err(|_| anyhow!("line {line}: cannot parse time {stamp:?}"))?;
            if times.last().is_some_and(|&last| t <= last) {
                bail!("line {line}: times must be strictly increasing");
            }
            times.push(t);
        }
        rates.push(rate);
    }
    if rates.is_empty() {
        bail!("{}: no observations", path.display());
    }
    let (index, default_delta) = if dated == Some(true) {
        (Index::Dates(dates), Some(DAILY_DELTA))
    } else {
        let d = match times.as_slice() {
            [t0, t1, ..] => Some(t1 - t0),
            _ => None,
        };
        (Index::Times(times), d)
    };
    let delta = spec
        .delta
        .or(default_delta)
        .ok_or_else(|| anyhow!("cannot infer the time step from a single row; pass --delta"))?;
    if !(delta.is_finite() && delta > 0.0) {
        bail!("time step must be positive, got {delta}");
    }
    Ok(RateSeries {
        label,
        index,
        rates,
        delta,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> tempfile_lite::TempFile {
        tempfile_lite::TempFile::new(text)
    }

    /// Minimal self-deleting temporary file for the parser tests.
    mod tempfile_lite {
        use std::path::PathBuf;
        use std::sync::atomic::{AtomicUsize, Ordering};

        static COUNTER: AtomicUsize = AtomicUsize::new(0);

        pub struct TempFile(pub PathBuf);

        impl TempFile {
            pub fn new(text: &str) -> Self {
                let k = COUNTER.fetch_add(1, Ordering::Relaxed);
                let p = std::env::temp_dir().join(format!("diffgof-data-{}-{k}.csv", std::process::id()));
                std::fs::write(&p, text).unwrap();
                Self(p)
            }
        }

        impl Drop for TempFile {
            fn drop(&mut self) {
                let _ = std::fs::remove_file(&self.0);
            }
        }
    }

    #[test]
    fn dated_series_defaults_to_daily_step() {
        let f = file("date,rate\n2020-01-02,1.5\n2020-01-03,1.6\n2020-01-06,1.55\n");
        let s = load_csv(&f.0, &ColumnSpec::default()).unwrap();
        assert_eq!(s.rates, vec![1.5, 1.6, 1.55]);
        assert_eq!(s.delta, DAILY_DELTA);
        assert_eq!(s.label, "rate");
        assert_eq!(s.dropped, 0);
    }

    #[test]
    fn blank_value_is_dropped_and_counted() {
        let f = file("date,rate\n2020-01-02,1.5\n2020-01-03,\n2020-01-06,1.55\n2020-01-07,.\n");
        let s = load_csv(&f.0, &ColumnSpec::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dropped, 2);
    }

    #[test]
    fn missing_column_lists_headers() {
        let f = file("date,DGS10,DGS1MO\n2020-01-02,1.5,1.0\n");
        let spec = ColumnSpec {
            value: Some("DGS30".into()),
            ..ColumnSpec::default()
        };
        let e = load_csv(&f.0, &spec).unwrap_err().to_string();
        assert!(e.contains("DGS30") && e.contains("date, DGS10, DGS1MO"), "{e}");
    }

    #[test]
    fn bad_number_names_line() {
        let f = file("date,rate\n2020-01-02,1.5\n2020-01-03,abc\n");
        let e = load_csv(&f.0, &ColumnSpec::default()).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }

    #[test]
    fn dates_must_increase() {
        let f = file("date,rate\n2020-01-03,1.5\n2020-01-02,1.6\n");
        assert!(load_csv(&f.0, &ColumnSpec::default()).is_err());
    }

    #[test]
    fn numeric_times_give_step() {
        let f = file("t,x\n0,1\n0.5,2\n1.0,3\n");
        let s = load_csv(&f.0, &ColumnSpec::default()).unwrap();
        assert_eq!(s.delta, 0.5);
        assert!(matches!(s.index, Index::Times(_)));
    }

    #[test]
    fn empty_series_fails() {
        let f = file("date,rate\n2020-01-02,\n");
        assert!(load_csv(&f.0, &ColumnSpec::default()).is_err());
    }

    #[test]
    fn named_columns() {
        let f = file("value,when\n3,0\n4,1\n");
        let spec = ColumnSpec {
            index: Some("when".into()),
            value: Some("value".into()),
            delta: Some(0.1),
        };
        let s = load_csv(&f.0, &spec).unwrap();
        assert_eq!(s.rates, vec![3.0, 4.0]);
        assert_eq!(s.delta, 0.1);
    }
}
