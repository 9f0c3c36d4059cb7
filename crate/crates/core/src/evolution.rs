//! Windowed transfer entropy and market-wide averages.

use std::collections::BTreeMap;

use chrono::Datelike;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{asymmetry_matrix, te_matrix, EstimatorConfig, MatrixKind, TEMatrix};
use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;
use crate::symbolic::{fit_panel_bins, symbolize_panel_with, BinningSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum WindowScheme {
    /// One window per calendar year of the return dates.
    CalendarYear,
    /// Windows of `width` consecutive rows, starting every `stride` rows.
    FixedLength { width: usize, stride: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub scheme: WindowScheme,
    pub min_observations: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            scheme: WindowScheme::CalendarYear,
            min_observations: 50,
        }
    }
}

impl WindowSpec {
    pub fn calendar_year(min_observations: usize) -> Self {
        Self {
            scheme: WindowScheme::CalendarYear,
            min_observations,
        }
    }

    pub fn fixed(width: usize, stride: usize, min_observations: usize) -> Self {
        Self {
            scheme: WindowScheme::FixedLength { width, stride },
            min_observations,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let WindowScheme::FixedLength { width, stride } = self.scheme {
            if stride == 0 {
                return Err(Error::Config("window stride must be >= 1".into()));
            }
            if width < self.min_observations {
                return Err(Error::Config(format!(
                    "window width {width} is below min_observations {}",
                    self.min_observations
                )));
            }
        }
        Ok(())
    }
}

/// How symbols are assigned inside a window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningMode {
    /// Refit bins to each window's own range.
    #[default]
    PerWindow,
    /// Fit bins once on the full panel and reuse them in every window.
    FullSample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum WindowIssue {
    TooFewObservations { n: usize, min: usize },
    DegenerateColumns { labels: Vec<String> },
}

/// A window that was left out of the analysis, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowWarning {
    pub label: String,
    pub n_observations: usize,
    #[serde(flatten)]
    pub issue: WindowIssue,
}

impl std::fmt::Display for WindowWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.issue {
            WindowIssue::TooFewObservations { n, min } => write!(
                f,
                "window {} skipped: {n} observations < minimum {min}",
                self.label
            ),
            WindowIssue::DegenerateColumns { labels } => write!(
                f,
                "window {} skipped: constant columns {}",
                self.label,
                labels.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Window {
    pub label: String,
    /// Row indices into the source panel.
    pub rows: Vec<usize>,
    pub panel: ReturnPanel,
}

#[derive(Debug, Clone)]
pub struct WindowSplit {
    pub windows: Vec<Window>,
    pub warnings: Vec<WindowWarning>,
}

/// Slices `panel` into windows, dropping those below `min_observations`.
pub fn split_windows(panel: &ReturnPanel, spec: &WindowSpec) -> Result<WindowSplit> {
    spec.validate()?;
    let candidates: Vec<(String, Vec<usize>)> = match spec.scheme {
        WindowScheme::CalendarYear => {
            let mut years: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
            for (t, d) in panel.dates().iter().enumerate() {
                years.entry(d.year()).or_default().push(t);
            }
            years
                .into_iter()
                .map(|(y, rows)| (y.to_string(), rows))
                .collect()
        }
        WindowScheme::FixedLength { width, stride } => {
            let mut out = Vec::new();
            let mut start = 0;
            while start + width <= panel.len() {
                let rows: Vec<usize> = (start..start + width).collect();
                let label = format!(
                    "{}_{}",
                    panel.dates()[start],
                    panel.dates()[start + width - 1]
                );
                out.push((label, rows));
                start += stride;
            }
            out
        }
    };

    let mut windows = Vec::new();
    let mut warnings = Vec::new();
    for (label, rows) in candidates {
        if rows.len() < spec.min_observations {
            warnings.push(WindowWarning {
                label,
                n_observations: rows.len(),
                issue: WindowIssue::TooFewObservations {
                    n: rows.len(),
                    min: spec.min_observations,
                },
            });
            continue;
        }
        let sub = panel.select_rows(&rows);
        windows.push(Window {
            label,
            rows,
            panel: sub,
        });
    }
    if windows.is_empty() {
        return Err(Error::NoValidWindows(format!(
            "{} candidate windows, none with at least {} observations",
            warnings.len(),
            spec.min_observations
        )));
    }
    Ok(WindowSplit { windows, warnings })
}

/// Per-window averages, ordered by window label.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionSeries {
    pub window_labels: Vec<String>,
    pub n_observations: Vec<usize>,
    pub mean_te: Vec<f64>,
    pub mean_abs_asymmetry: Vec<f64>,
    pub te_matrices: Vec<TEMatrix>,
    pub warnings: Vec<WindowWarning>,
}

impl EvolutionSeries {
    pub fn len(&self) -> usize {
        self.window_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window_labels.is_empty()
    }
}

enum WindowOutcome {
    Done { te: TEMatrix, mean_te: f64, mean_abs: f64 },
    Skipped(WindowWarning),
}

/// Transfer entropy matrices and their averages for every window.
pub fn windowed_te(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    cfg: &EstimatorConfig,
    binning: BinningMode,
) -> Result<EvolutionSeries> {
    cfg.validate()?;
    let split = split_windows(panel, spec)?;
    let full_specs: Option<Vec<BinningSpec>> = match binning {
        BinningMode::PerWindow => None,
        BinningMode::FullSample => Some(fit_panel_bins(panel, cfg.q)?),
    };

    let outcomes: Vec<WindowOutcome> = split
        .windows
        .par_iter()
        .map(|w| -> Result<WindowOutcome> {
            let specs = match &full_specs {
                Some(s) => s.clone(),
                None => match fit_panel_bins(&w.panel, cfg.q) {
                    Ok(s) => s,
                    Err(Error::DegenerateColumns { labels }) => {
                        return Ok(WindowOutcome::Skipped(WindowWarning {
                            label: w.label.clone(),
                            n_observations: w.panel.len(),
                            issue: WindowIssue::DegenerateColumns { labels },
                        }))
                    }
                    Err(e) => return Err(e),
                },
            };
            let symbols = symbolize_panel_with(&w.panel, &specs)?;
            let te = te_matrix(&symbols, cfg)?;
            let dte = asymmetry_matrix(&te)?;
            let mean_te = mean_te_of_matrix(&te)?;
            let mean_abs = mean_abs_asymmetry(&dte)?;
            Ok(WindowOutcome::Done {
                te,
                mean_te,
                mean_abs,
            })
        })
        .collect::<Result<_>>()?;

    let mut out = EvolutionSeries {
        window_labels: Vec::new(),
        n_observations: Vec::new(),
        mean_te: Vec::new(),
        mean_abs_asymmetry: Vec::new(),
        te_matrices: Vec::new(),
        warnings: split.warnings,
    };
    for (w, outcome) in split.windows.iter().zip(outcomes) {
        match outcome {
            WindowOutcome::Done {
                te,
                mean_te,
                mean_abs,
            } => {
                out.window_labels.push(w.label.clone());
                out.n_observations.push(w.panel.len());
                out.mean_te.push(mean_te);
                out.mean_abs_asymmetry.push(mean_abs);
                out.te_matrices.push(te);
            }
            WindowOutcome::Skipped(warning) => out.warnings.push(warning),
        }
    }
    if out.is_empty() {
        return Err(Error::NoValidWindows(
            "every window was skipped; see warnings".into(),
        ));
    }
    out.warnings.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

fn require_pairs(m: &TEMatrix) -> Result<f64> {
    let n = m.n();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "averages need at least 2 nodes, got {n}"
        )));
    }
    Ok((n * (n - 1)) as f64)
}

/// Mean of the off-diagonal transfer entropies.
pub fn mean_te_of_matrix(te: &TEMatrix) -> Result<f64> {
    te.require(MatrixKind::TransferEntropy)?;
    let pairs = require_pairs(te)?;
    Ok(te.off_diagonal().sum::<f64>() / pairs)
}

/// Mean of `|Δ|` over unordered pairs.
pub fn mean_abs_asymmetry(dte: &TEMatrix) -> Result<f64> {
    dte.require(MatrixKind::Asymmetry)?;
    let pairs = require_pairs(dte)?;
    let n = dte.n();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += dte.get(i, j).abs();
        }
    }
    Ok(2.0 * sum / pairs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QScanRow {
    pub q: u32,
    pub mean_te: f64,
    pub mean_abs_asymmetry: f64,
}

pub const Q_SCAN_LIMITS: (u32, u32) = (2, 64);

/// Full-sample averages for every bin count in `q_min..=q_max`.
pub fn scan_q(
    panel: &ReturnPanel,
    q_min: u32,
    q_max: u32,
    template: &EstimatorConfig,
) -> Result<Vec<QScanRow>> {
    if q_min > q_max {
        return Err(Error::Config(format!(
            "empty q range: {q_min} > {q_max}"
        )));
    }
    if q_min < Q_SCAN_LIMITS.0 || q_max > Q_SCAN_LIMITS.1 {
        return Err(Error::Config(format!(
            "q range must lie within [{}, {}]",
            Q_SCAN_LIMITS.0, Q_SCAN_LIMITS.1
        )));
    }
    (q_min..=q_max)
        .map(|q| {
            let cfg = EstimatorConfig { q, ..*template };
            let specs = fit_panel_bins(panel, q)?;
            let symbols = symbolize_panel_with(panel, &specs)?;
            let te = te_matrix(&symbols, &cfg)?;
            let dte = asymmetry_matrix(&te)?;
            Ok(QScanRow {
                q,
                mean_te: mean_te_of_matrix(&te)?,
                mean_abs_asymmetry: mean_abs_asymmetry(&dte)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn te(rows: Vec<Vec<f64>>) -> TEMatrix {
        let labels = (0..rows.len()).map(|i| format!("s{i}")).collect();
        TEMatrix::from_rows(labels, rows, MatrixKind::TransferEntropy).unwrap()
    }

    fn daily_panel(start: NaiveDate, n_rows: usize, n_cols: usize) -> ReturnPanel {
        let dates = (0..n_rows)
            .map(|i| start + chrono::Duration::days(i as i64))
            .collect();
        let labels = (0..n_cols).map(|j| format!("c{j}")).collect();
        let columns = (0..n_cols)
            .map(|j| {
                (0..n_rows)
                    .map(|t| (((t * (j + 3) * 7919) % 101) as f64 - 50.0) / 1000.0)
                    .collect()
            })
            .collect();
        ReturnPanel::new(dates, labels, columns).unwrap()
    }

    #[test]
    fn mean_te_fixtures() {
        assert_eq!(mean_te_of_matrix(&te(vec![vec![0.0; 2]; 2])).unwrap(), 0.0);
        let two = te(vec![vec![0.0, 0.4], vec![0.2, 0.0]]);
        assert!((mean_te_of_matrix(&two).unwrap() - 0.3).abs() < 1e-15);
        let dte = asymmetry_matrix(&two).unwrap();
        assert!((mean_abs_asymmetry(&dte).unwrap() - 0.2).abs() < 1e-15);
        assert!(mean_abs_asymmetry(&two).is_err());
        assert!(mean_te_of_matrix(&dte).is_err());
    }

    #[test]
    fn three_node_fixture() {
        let m = te(vec![
            vec![0.0, 0.12, 0.30],
            vec![0.05, 0.0, 0.22],
            vec![0.41, 0.07, 0.0],
        ]);
        // Off-diagonal sum 1.17 over 6 ordered pairs.
        assert!((mean_te_of_matrix(&m).unwrap() - 0.195).abs() < 1e-12);
        // |0.12-0.05| + |0.30-0.41| + |0.22-0.07| = 0.33, times 2/6.
        let d = asymmetry_matrix(&m).unwrap();
        assert!((mean_abs_asymmetry(&d).unwrap() - 0.11).abs() < 1e-12);
    }

    #[test]
    fn calendar_years() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let panel = daily_panel(start, 366 + 365 + 365, 2);
        let split = split_windows(&panel, &WindowSpec::calendar_year(50)).unwrap();
        let labels: Vec<_> = split.windows.iter().map(|w| w.label.as_str()).collect();
        assert_eq!(labels, ["2000", "2001", "2002"]);
        let total: usize = split.windows.iter().map(|w| w.rows.len()).sum();
        assert_eq!(total, panel.len());
    }

    #[test]
    fn short_year_dropped_with_warning() {
        let start = NaiveDate::from_ymd_opt(2002, 3, 1).unwrap();
        let panel = daily_panel(start, 306 + 10, 2);
        let split = split_windows(&panel, &WindowSpec::calendar_year(50)).unwrap();
        assert_eq!(split.windows.len(), 1);
        assert_eq!(split.warnings.len(), 1);
        assert_eq!(split.warnings[0].label, "2003");
        assert_eq!(split.warnings[0].n_observations, 10);
    }

    #[test]
    fn fixed_windows() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let panel = daily_panel(start, 1000, 2);
        let split = split_windows(&panel, &WindowSpec::fixed(250, 250, 50)).unwrap();
        assert_eq!(split.windows.len(), 4);
        let overlapping = split_windows(&panel, &WindowSpec::fixed(250, 125, 50)).unwrap();
        assert_eq!(overlapping.windows.len(), 7);
        assert!(split_windows(&panel, &WindowSpec::fixed(40, 10, 50)).is_err());
        assert!(split_windows(&panel, &WindowSpec::fixed(100, 0, 50)).is_err());
    }

    #[test]
    fn no_valid_windows() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let panel = daily_panel(start, 100, 2);
        assert!(matches!(
            split_windows(&panel, &WindowSpec::calendar_year(500)),
            Err(Error::NoValidWindows(_))
        ));
    }

    #[test]
    fn degenerate_window_is_skipped() {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let mut panel = daily_panel(start, 200, 2);
        let mut cols = panel.columns().to_vec();
        for v in &mut cols[1][100..] {
            *v = 0.0;
        }
        panel = ReturnPanel::new(panel.dates().to_vec(), panel.labels().to_vec(), cols).unwrap();
        let spec = WindowSpec::fixed(100, 100, 50);
        let cfg = EstimatorConfig::with_q(5);
        let ev = windowed_te(&panel, &spec, &cfg, BinningMode::PerWindow).unwrap();
        assert_eq!(ev.len(), 1);
        assert_eq!(ev.warnings.len(), 1);
        assert!(matches!(ev.warnings[0].issue, WindowIssue::DegenerateColumns { .. }));
        // Full-sample bins keep the constant stretch symbolizable.
        let full = windowed_te(&panel, &spec, &cfg, BinningMode::FullSample).unwrap();
        assert_eq!(full.len(), 2);
    }

    #[test]
    fn single_window_matches_full_sample() {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let panel = daily_panel(start, 300, 3);
        let cfg = EstimatorConfig::with_q(6);
        let ev = windowed_te(&panel, &WindowSpec::calendar_year(50), &cfg, BinningMode::PerWindow)
            .unwrap();
        let symbols = crate::symbolic::symbolize_panel(&panel, 6).unwrap();
        let full = te_matrix(&symbols, &cfg).unwrap();
        assert_eq!(ev.mean_te, vec![mean_te_of_matrix(&full).unwrap()]);
    }

    #[test]
    fn q_scan_ranges() {
        let start = NaiveDate::from_ymd_opt(2001, 1, 1).unwrap();
        let panel = daily_panel(start, 300, 3);
        let cfg = EstimatorConfig::default();
        assert_eq!(scan_q(&panel, 2, 2, &cfg).unwrap().len(), 1);
        assert_eq!(scan_q(&panel, 2, 22, &cfg).unwrap().len(), 21);
        assert!(scan_q(&panel, 5, 4, &cfg).is_err());
        assert!(scan_q(&panel, 1, 4, &cfg).is_err());
        assert!(scan_q(&panel, 2, 65, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn averages_bounded(rows in prop::collection::vec(prop::collection::vec(0.0..2.0f64, 4), 4)) {
            let mut rows = rows;
            for (i, r) in rows.iter_mut().enumerate() { r[i] = 0.0; }
            let m = te(rows);
            let mean = mean_te_of_matrix(&m).unwrap();
            let lo = m.off_diagonal().fold(f64::INFINITY, f64::min);
            let hi = m.off_diagonal().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= mean && mean <= hi + 1e-12);
            let abs = mean_abs_asymmetry(&asymmetry_matrix(&m).unwrap()).unwrap();
            prop_assert!(abs >= 0.0);
            prop_assert!(abs <= 2.0 * mean + 1e-12);
        }
    }
}
