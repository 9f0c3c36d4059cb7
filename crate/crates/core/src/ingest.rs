//! Loading, aligning and differencing panels of closing prices.
//!
//! Input is delimited UTF-8 text: a header row whose first field names the
//! date column and whose remaining fields are the column labels, followed by
//! one row per date. Empty cells (and `NA`, `NaN`, `null`, `.`) are missing
//! observations, to be resolved by [`align_panel`].

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MISSING_TOKENS: [&str; 5] = ["", "NA", "NaN", "null", "."];

/// Delimiter and date pattern of a panel file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelFormat {
    pub delimiter: u8,
    /// `chrono` strftime pattern.
    pub date_format: String,
}

impl Default for PanelFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            date_format: "%Y-%m-%d".to_string(),
        }
    }
}

/// How to resolve missing cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
#[derive(Default)]
pub enum AlignmentPolicy {
    /// Keep only dates where every label has a price.
    #[default]
    DropIncompleteRows,
    /// Fill runs of at most `max_gap` missing cells with the last observation;
    /// rows in longer runs (or before a column's first observation) are dropped.
    ForwardFill { max_gap: usize },
}


/// Closing prices, one row per date and one column per label.
///
/// Cells may be missing until the panel has gone through [`align_panel`].
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl PricePanel {
    /// Builds a panel, sorting rows by date.
    pub fn new(
        dates: Vec<NaiveDate>,
        labels: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        check_labels(&labels)?;
        if dates.len() != rows.len() {
            return Err(Error::Shape {
                left: dates.len(),
                right: rows.len(),
            });
        }
        for row in &rows {
            if row.len() != labels.len() {
                return Err(Error::Shape {
                    left: row.len(),
                    right: labels.len(),
                });
            }
        }
        let mut order: Vec<usize> = (0..dates.len()).collect();
        order.sort_by_key(|&i| dates[i]);
        for w in order.windows(2) {
            if dates[w[0]] == dates[w[1]] {
                return Err(Error::Schema(format!("duplicate date {}", dates[w[0]])));
            }
        }
        for &i in &order {
            for (j, cell) in rows[i].iter().enumerate() {
                if let Some(p) = *cell {
                    if !(p.is_finite() && p > 0.0) {
                        return Err(Error::NonPositivePrice {
                            date: dates[i].to_string(),
                            label: labels[j].clone(),
                            value: p,
                        });
                    }
                }
            }
        }
        let dates = order.iter().map(|&i| dates[i]).collect();
        let mut slots: Vec<Option<Vec<Option<f64>>>> = rows.into_iter().map(Some).collect();
        let rows = order.iter().map(|&i| slots[i].take().unwrap()).collect();
        Ok(Self {
            dates,
            labels,
            rows,
        })
    }

    /// Builds a complete panel from price columns.
    pub fn from_columns(
        dates: Vec<NaiveDate>,
        labels: Vec<String>,
        columns: &[Vec<f64>],
    ) -> Result<Self> {
        if columns.len() != labels.len() {
            return Err(Error::Shape {
                left: columns.len(),
                right: labels.len(),
            });
        }
        let rows = (0..dates.len())
            .map(|t| {
                columns
                    .iter()
                    .map(|c| c.get(t).copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        for c in columns {
            if c.len() != dates.len() {
                return Err(Error::Shape {
                    left: c.len(),
                    right: dates.len(),
                });
            }
        }
        Self::new(dates, labels, rows)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn price(&self, t: usize, j: usize) -> Option<f64> {
        self.rows[t][j]
    }

    pub fn column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn missing_cells(&self) -> usize {
        self.rows.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_cells() == 0
    }
}

fn check_labels(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for l in labels {
        if l.trim().is_empty() {
            return Err(Error::Schema("empty column label".into()));
        }
        if !seen.insert(l.as_str()) {
            return Err(Error::Schema(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Log returns, stored column-major; `dates[t]` is the later date of the
/// price pair that produced row `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        check_labels(&labels)?;
        if columns.len() != labels.len() {
            return Err(Error::Shape {
                left: columns.len(),
                right: labels.len(),
            });
        }
        for w in dates.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Schema(format!(
                    "return dates not strictly increasing at {}",
                    w[1]
                )));
            }
        }
        for (label, col) in labels.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::Shape {
                    left: col.len(),
                    right: dates.len(),
                });
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Schema(format!(
                    "non-finite return for {label} on {}",
                    dates[t]
                )));
            }
        }
        Ok(Self {
            dates,
            labels,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn value(&self, t: usize, j: usize) -> f64 {
        self.columns[j][t]
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    /// Rows `range` as a new panel.
    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates[range.clone()].to_vec(),
            labels: self.labels.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c[range.clone()].to_vec())
                .collect(),
        }
    }

    /// Rows at the given (sorted) indices.
    pub fn select_rows(&self, rows: &[usize]) -> ReturnPanel {
        ReturnPanel {
            dates: rows.iter().map(|&t| self.dates[t]).collect(),
            labels: self.labels.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&t| c[t]).collect())
                .collect(),
        }
    }
}

/// Reads a price panel from delimited text.
pub fn load_price_panel<R: Read>(source: R, format: &PanelFormat) -> Result<PricePanel> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    if header.len() < 2 {
        return Err(Error::Schema(
            "header needs a date column and at least one label".into(),
        ));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    check_labels(&labels)?;

    let mut dates = Vec::new();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let raw_date = &record[0];
        let date = NaiveDate::parse_from_str(raw_date, &format.date_format).map_err(|e| {
            Error::Parse {
                line,
                message: format!("bad date {raw_date:?}: {e}"),
            }
        })?;
        let mut row = Vec::with_capacity(labels.len());
        for (j, field) in record.iter().skip(1).enumerate() {
            if MISSING_TOKENS.contains(&field) {
                row.push(None);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("bad number {field:?} in column {}", labels[j]),
            })?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositivePrice {
                    date: date.to_string(),
                    label: labels[j].clone(),
                    value,
                });
            }
            row.push(Some(value));
        }
        dates.push(date);
        rows.push(row);
        lines.push(line);
    }

    let mut order: Vec<usize> = (0..dates.len()).collect();
    order.sort_by_key(|&i| dates[i]);
    for w in order.windows(2) {
        if dates[w[0]] == dates[w[1]] {
            return Err(Error::Parse {
                line: lines[w[0]].max(lines[w[1]]),
                message: format!("duplicate date {}", dates[w[0]]),
            });
        }
    }
    PricePanel::new(dates, labels, rows)
}

/// [`load_price_panel`] on a file path.
pub fn load_price_panel_path(path: &Path, format: &PanelFormat) -> Result<PricePanel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_price_panel(std::io::BufReader::new(file), format)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// What alignment removed or filled.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub policy: Option<AlignmentPolicy>,
    pub input_rows: usize,
    pub dropped_dates: Vec<NaiveDate>,
    pub filled_cells: usize,
}

/// Resolves missing cells according to `policy`.
pub fn align_panel(panel: &PricePanel, policy: AlignmentPolicy) -> Result<PricePanel> {
    align_panel_with_report(panel, policy).map(|(p, _)| p)
}

/// [`align_panel`], also reporting which dates were dropped.
pub fn align_panel_with_report(
    panel: &PricePanel,
    policy: AlignmentPolicy,
) -> Result<(PricePanel, AlignmentReport)> {
    let n_rows = panel.len();
    let n_cols = panel.n_labels();
    for j in 0..n_cols {
        if panel.rows.iter().all(|r| r[j].is_none()) {
            return Err(Error::EmptyColumn(panel.labels[j].clone()));
        }
    }

    let mut rows = panel.rows.clone();
    let mut keep = vec![true; n_rows];
    let mut filled = 0usize;

    match policy {
        AlignmentPolicy::DropIncompleteRows => {
            for (t, row) in rows.iter().enumerate() {
                if row.iter().any(Option::is_none) {
                    keep[t] = false;
                }
            }
        }
        AlignmentPolicy::ForwardFill { max_gap } => {
            for j in 0..n_cols {
                let mut t = 0;
                while t < n_rows {
                    if panel.rows[t][j].is_some() {
                        t += 1;
                        continue;
                    }
                    let start = t;
                    while t < n_rows && panel.rows[t][j].is_none() {
                        t += 1;
                    }
                    let run = start..t;
                    let fill = if start > 0 && run.len() <= max_gap {
                        panel.rows[start - 1][j]
                    } else {
                        None
                    };
                    for s in run {
                        match fill {
                            Some(v) => {
                                rows[s][j] = Some(v);
                                filled += 1;
                            }
                            None => keep[s] = false,
                        }
                    }
                }
            }
        }
    }

    let mut dates = Vec::new();
    let mut kept_rows = Vec::new();
    let mut dropped = Vec::new();
    for (t, row) in rows.into_iter().enumerate() {
        if keep[t] {
            dates.push(panel.dates[t]);
            kept_rows.push(row);
        } else {
            dropped.push(panel.dates[t]);
            filled -= row
                .iter()
                .enumerate()
                .filter(|(j, c)| c.is_some() && panel.rows[t][*j].is_none())
                .count();
        }
    }
    let report = AlignmentReport {
        policy: Some(policy),
        input_rows: n_rows,
        dropped_dates: dropped,
        filled_cells: filled,
    };
    let aligned = PricePanel {
        dates,
        labels: panel.labels.clone(),
        rows: kept_rows,
    };
    Ok((aligned, report))
}

/// `ln(p[t+1]) - ln(p[t])` per column; one row fewer than the input.
pub fn compute_log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if !panel.is_complete() {
        return Err(Error::Incomplete(format!(
            "{} missing cells; align the panel first",
            panel.missing_cells()
        )));
    }
    if panel.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 price rows, got {}",
            panel.len()
        )));
    }
    let columns = (0..panel.n_labels())
        .map(|j| {
            let logs: Vec<f64> = panel.rows.iter().map(|r| r[j].unwrap().ln()).collect();
            logs.windows(2).map(|w| w[1] - w[0]).collect()
        })
        .collect();
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.labels.clone(), columns)
}
