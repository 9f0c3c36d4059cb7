//! Coupled symbol processes with closed-form transfer entropy.
//!
//! All generators draw from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha
//! 0.9), so a given spec reproduces the same series on every platform.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{PricePanel, ReturnPanel};
use crate::symbolic::{BinningSpec, Symbol, SymbolSeries};

pub const GENERATOR: &str = "ChaCha8Rng/rand_chacha-0.9/seed_from_u64";

/// Starting level of generated price columns.
pub const BASE_PRICE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProcessKind {
    /// `x` i.i.d. over {1, 2}; `y[t+1] = x[t]`, flipped with probability `epsilon`.
    CoupledBinary { epsilon: f64 },
    /// `x` i.i.d. over `alphabet` symbols; `y[t] = x[t-1]`.
    LaggedCopy { alphabet: u32 },
    /// Two independent i.i.d. uniform series.
    Independent { alphabet: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub length: usize,
    pub seed: u64,
}

impl CoupledProcessSpec {
    pub fn coupled_binary(epsilon: f64, length: usize, seed: u64) -> Self {
        Self {
            kind: ProcessKind::CoupledBinary { epsilon },
            length,
            seed,
        }
    }

    pub fn lagged_copy(alphabet: u32, length: usize, seed: u64) -> Self {
        Self {
            kind: ProcessKind::LaggedCopy { alphabet },
            length,
            seed,
        }
    }

    pub fn independent(alphabet: u32, length: usize, seed: u64) -> Self {
        Self {
            kind: ProcessKind::Independent { alphabet },
            length,
            seed,
        }
    }

    pub fn alphabet(&self) -> u32 {
        match self.kind {
            ProcessKind::CoupledBinary { .. } => 2,
            ProcessKind::LaggedCopy { alphabet } | ProcessKind::Independent { alphabet } => {
                alphabet
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ProcessKind::CoupledBinary { epsilon } => {
                if !(0.0..=0.5).contains(&epsilon) {
                    return Err(Error::Config(format!(
                        "epsilon must lie in [0, 0.5], got {epsilon}"
                    )));
                }
            }
            ProcessKind::LaggedCopy { alphabet } | ProcessKind::Independent { alphabet } => {
                if alphabet < 2 {
                    return Err(Error::Config(format!(
                        "alphabet size must be >= 2, got {alphabet}"
                    )));
                }
            }
        }
        if self.length < 10 {
            return Err(Error::Config(format!(
                "length must be >= 10, got {}",
                self.length
            )));
        }
        Ok(())
    }
}

fn uniform_symbols<R: Rng>(rng: &mut R, alphabet: u32, len: usize) -> Vec<Symbol> {
    (0..len).map(|_| rng.random_range(1..=alphabet)).collect()
}

fn flip(k: Symbol) -> Symbol {
    3 - k
}

fn wrap(label: &str, symbols: Vec<Symbol>, alphabet: u32) -> Result<SymbolSeries> {
    SymbolSeries::new(label, symbols, BinningSpec::integer_alphabet(alphabet)?)
}

/// Generates `(x, y)` where `x` drives `y` (or neither, for `Independent`).
pub fn generate(spec: &CoupledProcessSpec) -> Result<(SymbolSeries, SymbolSeries)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let len = spec.length;
    let a = spec.alphabet();
    let (x, y) = match spec.kind {
        ProcessKind::CoupledBinary { epsilon } => {
            let x = uniform_symbols(&mut rng, 2, len);
            let y = binary_channel(&mut rng, &x, |_| epsilon);
            (x, y)
        }
        ProcessKind::LaggedCopy { alphabet } => {
            let x = uniform_symbols(&mut rng, alphabet, len);
            let mut y = Vec::with_capacity(len);
            y.push(rng.random_range(1..=alphabet));
            y.extend_from_slice(&x[..len - 1]);
            (x, y)
        }
        ProcessKind::Independent { alphabet } => {
            let x = uniform_symbols(&mut rng, alphabet, len);
            let y = uniform_symbols(&mut rng, alphabet, len);
            (x, y)
        }
    };
    Ok((wrap("x", x, a)?, wrap("y", y, a)?))
}

fn binary_channel<R: Rng>(rng: &mut R, x: &[Symbol], noise_at: impl Fn(usize) -> f64) -> Vec<Symbol> {
    let mut y = Vec::with_capacity(x.len());
    y.push(rng.random_range(1..=2));
    for t in 0..x.len() - 1 {
        let noisy = rng.random::<f64>() < noise_at(t + 1);
        y.push(if noisy { flip(x[t]) } else { x[t] });
    }
    y
}

/// Coupled-binary pair whose noise level changes between consecutive regimes.
///
/// `regimes` lists `(epsilon, length)`; `y[t]` uses the epsilon of the regime
/// containing `t`.
pub fn generate_regimes(regimes: &[(f64, usize)], seed: u64) -> Result<(SymbolSeries, SymbolSeries)> {
    let mut bounds = Vec::with_capacity(regimes.len());
    let mut total = 0;
    for &(epsilon, len) in regimes {
        CoupledProcessSpec::coupled_binary(epsilon, len, seed).validate()?;
        total += len;
        bounds.push((total, epsilon));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = uniform_symbols(&mut rng, 2, total);
    let y = binary_channel(&mut rng, &x, |t| {
        bounds.iter().find(|(end, _)| t < *end).map_or(0.0, |b| b.1)
    });
    Ok((wrap("x", x, 2)?, wrap("y", y, 2)?))
}

/// Extra i.i.d. uniform series, independent of everything else for distinct seeds.
pub fn independent_series(label: &str, alphabet: u32, len: usize, seed: u64) -> Result<SymbolSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    wrap(label, uniform_symbols(&mut rng, alphabet, len), alphabet)
}

/// `H2(p) = -p log2 p - (1-p) log2 (1-p)`, with `H2(0) = H2(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Closed-form `(T(x -> y), T(y -> x))` in bits.
pub fn analytic_te(spec: &CoupledProcessSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    Ok(match spec.kind {
        ProcessKind::CoupledBinary { epsilon } => (1.0 - binary_entropy(epsilon), 0.0),
        ProcessKind::LaggedCopy { alphabet } => (f64::from(alphabet).log2(), 0.0),
        ProcessKind::Independent { .. } => (0.0, 0.0),
    })
}

/// Log return assigned to symbol `k` of an `alphabet`-sized series: evenly
/// spaced levels centred on zero, `step` apart.
pub fn symbol_return(k: Symbol, alphabet: u32, step: f64) -> f64 {
    (f64::from(k) - f64::from(alphabet + 1) / 2.0) * step
}

/// Consecutive calendar days starting at `start`.
pub fn daily_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start.iter_days().take(n).collect()
}

/// Return panel whose column `j` takes the level of `series[j]`'s symbol.
///
/// Binning a column with `q` equal to its alphabet recovers the generating
/// symbols exactly; for two-symbol series any `q` does.
pub fn return_panel(series: &[SymbolSeries], start: NaiveDate, step: f64) -> Result<ReturnPanel> {
    let len = series.first().map_or(0, SymbolSeries::len);
    let columns = series
        .iter()
        .map(|s| {
            s.symbols()
                .iter()
                .map(|&k| symbol_return(k, s.q(), step))
                .collect()
        })
        .collect();
    ReturnPanel::new(
        daily_dates(start.succ_opt().unwrap_or(start), len),
        series.iter().map(|s| s.label().to_string()).collect(),
        columns,
    )
}

/// Price panel `BASE_PRICE · exp(cumulative returns)` with one more row than
/// the series; its log returns reproduce [`return_panel`] up to rounding.
pub fn price_panel(series: &[SymbolSeries], start: NaiveDate, step: f64) -> Result<PricePanel> {
    let len = series.first().map_or(0, SymbolSeries::len);
    let columns: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let mut log_price = BASE_PRICE.ln();
            let mut prices = Vec::with_capacity(len + 1);
            prices.push(BASE_PRICE);
            for &k in s.symbols() {
                log_price += symbol_return(k, s.q(), step);
                prices.push(log_price.exp());
            }
            prices
        })
        .collect();
    PricePanel::from_columns(
        daily_dates(start, len + 1),
        series.iter().map(|s| s.label().to_string()).collect(),
        &columns,
    )
}

/// `n` independent standard-normal return columns scaled by `sigma`.
pub fn gaussian_return_panel(
    n: usize,
    len: usize,
    sigma: f64,
    start: NaiveDate,
    seed: u64,
) -> Result<ReturnPanel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let columns = (0..n)
        .map(|_| {
            (0..len)
                .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect();
    ReturnPanel::new(
        daily_dates(start, len),
        (0..n).map(|j| format!("g{j}")).collect(),
        columns,
    )
}
