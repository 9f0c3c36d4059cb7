//! Equal-width amplitude binning.
//!
//! A series is mapped onto symbols `1..=q` using `q` bins of width
//! `(max - min) / q` fitted to that series. Bins are half-open
//! `[min + (k-1)Δ, min + kΔ)` except the top one, which is closed so that the
//! maximum receives symbol `q`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ReturnPanel;

/// Symbols are 1-based; `0` never appears in a valid series.
pub type Symbol = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    q: u32,
    x_min: f64,
    x_max: f64,
    delta: f64,
}

impl BinningSpec {
    pub fn new(q: u32, x_min: f64, x_max: f64) -> Result<Self> {
        if q < 2 {
            return Err(Error::Config(format!("bin count q must be >= 2, got {q}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Config("bin edges must be finite".into()));
        }
        if x_max <= x_min {
            return Err(Error::DegenerateSeries { value: x_min });
        }
        let delta = (x_max - x_min) / f64::from(q);
        if !(delta > 0.0) {
            return Err(Error::DegenerateSeries { value: x_min });
        }
        Ok(Self {
            q,
            x_min,
            x_max,
            delta,
        })
    }

    /// Spec under which the integer `k` falls in bin `k`, for natively discrete
    /// data over `1..=alphabet`.
    pub fn integer_alphabet(alphabet: u32) -> Result<Self> {
        Self::new(alphabet, 0.5, f64::from(alphabet) + 0.5)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Symbol for `v`, or `None` if `v` lies outside `[x_min, x_max]`.
    #[inline]
    pub fn symbol_of(&self, v: f64) -> Option<Symbol> {
        if !(v >= self.x_min && v <= self.x_max) {
            return None;
        }
        let k = ((v - self.x_min) / self.delta).floor() as u64 + 1;
        Some(k.min(u64::from(self.q)) as Symbol)
    }
}

/// A symbolized series together with the bins that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSeries {
    symbols: Vec<Symbol>,
    spec: BinningSpec,
    label: String,
}

impl SymbolSeries {
    /// Wraps pre-computed symbols, checking they fit `spec`.
    pub fn new(label: impl Into<String>, symbols: Vec<Symbol>, spec: BinningSpec) -> Result<Self> {
        if let Some(i) = symbols.iter().position(|&k| k == 0 || k > spec.q) {
            return Err(Error::OutOfRange {
                index: i,
                value: f64::from(symbols[i]),
                min: 1.0,
                max: f64::from(spec.q),
            });
        }
        Ok(Self {
            symbols,
            spec,
            label: label.into(),
        })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn spec(&self) -> &BinningSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Occupancy of each bin; index `k - 1` holds the count of symbol `k`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.spec.q as usize];
        for &k in &self.symbols {
            h[k as usize - 1] += 1;
        }
        h
    }

    /// Same symbols, reordered by `perm` (`out[i] = self[perm[i]]`).
    pub fn permuted(&self, perm: &[usize]) -> SymbolSeries {
        SymbolSeries {
            symbols: perm.iter().map(|&i| self.symbols[i]).collect(),
            spec: self.spec,
            label: self.label.clone(),
        }
    }
}

/// Fits `q` equal-width bins spanning the sample range.
pub fn fit_bins(series: &[f64], q: u32) -> Result<BinningSpec> {
    if series.is_empty() {
        return Err(Error::InsufficientData("cannot fit bins to an empty series".into()));
    }
    if let Some(i) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::OutOfRange {
            index: i,
            value: series[i],
            min: f64::NEG_INFINITY,
            max: f64::INFINITY,
        });
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    BinningSpec::new(q, lo, hi)
}

/// Maps every value to its bin under `spec`.
pub fn symbolize(series: &[f64], spec: &BinningSpec, label: &str) -> Result<SymbolSeries> {
    let symbols = series
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            spec.symbol_of(v).ok_or(Error::OutOfRange {
                index: i,
                value: v,
                min: spec.x_min,
                max: spec.x_max,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SymbolSeries {
        symbols,
        spec: *spec,
        label: label.to_string(),
    })
}

/// Fits and applies bins to every column independently.
pub fn symbolize_panel(panel: &ReturnPanel, q: u32) -> Result<Vec<SymbolSeries>> {
    let specs = fit_panel_bins(panel, q)?;
    symbolize_panel_with(panel, &specs)
}

/// Per-column bin fits; constant columns are collected into one error.
pub fn fit_panel_bins(panel: &ReturnPanel, q: u32) -> Result<Vec<BinningSpec>> {
    if q < 2 {
        return Err(Error::Config(format!("bin count q must be >= 2, got {q}")));
    }
    let fits: Vec<Result<BinningSpec>> = panel
        .columns()
        .par_iter()
        .map(|c| fit_bins(c, q))
        .collect();
    let mut degenerate = Vec::new();
    let mut specs = Vec::with_capacity(fits.len());
    for (label, fit) in panel.labels().iter().zip(fits) {
        match fit {
            Ok(s) => specs.push(s),
            Err(Error::DegenerateSeries { .. }) => degenerate.push(label.clone()),
            Err(e) => return Err(e),
        }
    }
    if !degenerate.is_empty() {
        return Err(Error::DegenerateColumns { labels: degenerate });
    }
    Ok(specs)
}

/// Applies given per-column specs (e.g. fitted on a longer sample).
pub fn symbolize_panel_with(panel: &ReturnPanel, specs: &[BinningSpec]) -> Result<Vec<SymbolSeries>> {
    if specs.len() != panel.n_labels() {
        return Err(Error::Shape {
            left: specs.len(),
            right: panel.n_labels(),
        });
    }
    panel
        .columns()
        .par_iter()
        .zip(specs.par_iter())
        .zip(panel.labels().par_iter())
        .map(|((c, s), l)| symbolize(c, s, l))
        .collect()
}
