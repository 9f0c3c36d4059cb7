//! Plug-in symbolic transfer entropy with one-step histories.
//!
//! For a target `x` and source `y` the estimator is
//!
//! ```text
//! T(y -> x) = Σ p(x[t+1], x[t], y[t]) · log2( p(x[t+1], x[t], y[t]) · p(x[t])
//!                                           / (p(x[t+1], x[t]) · p(x[t], y[t])) )
//! ```
//!
//! Every distribution is taken over the same index range `t = 0..len-1` and
//! normalized by the number of triples, so the marginals are exactly
//! consistent and the sum is an empirical conditional mutual information
//! (hence non-negative up to rounding).

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{Symbol, SymbolSeries};

/// Rounding slack allowed below zero before a negative estimate is a bug.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// Past this many cells, triples are counted by sorting instead of a dense table.
const DENSE_LIMIT: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Bin count used when symbolizing returns.
    pub q: u32,
    /// History length of the target. Only 1 is supported.
    pub own_history: usize,
    /// History length of the source. Only 1 is supported.
    pub other_history: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            q: 15,
            own_history: 1,
            other_history: 1,
        }
    }
}

impl EstimatorConfig {
    pub fn with_q(q: u32) -> Self {
        Self {
            q,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::Config(format!("q must be >= 2, got {}", self.q)));
        }
        if self.own_history != 1 || self.other_history != 1 {
            return Err(Error::Config(format!(
                "only one-step histories are supported (got l = {}, m = {})",
                self.own_history, self.other_history
            )));
        }
        Ok(())
    }
}

/// Sparse joint and marginal counts over `t = 0..len-1`.
///
/// Keys are `(next, current)` for the target's own transition and
/// `(current, source)` for the target/source pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCounts {
    triples: BTreeMap<(Symbol, Symbol, Symbol), u64>,
    self_next: BTreeMap<(Symbol, Symbol), u64>,
    self_other: BTreeMap<(Symbol, Symbol), u64>,
    single_self: BTreeMap<Symbol, u64>,
    total: u64,
}

impl JointCounts {
    /// Counts keyed by `(target[t+1], target[t], source[t])`.
    pub fn triple_counts(&self) -> &BTreeMap<(Symbol, Symbol, Symbol), u64> {
        &self.triples
    }

    /// Counts keyed by `(target[t+1], target[t])`.
    pub fn pair_self_next(&self) -> &BTreeMap<(Symbol, Symbol), u64> {
        &self.self_next
    }

    /// Counts keyed by `(target[t], source[t])`.
    pub fn pair_self_other(&self) -> &BTreeMap<(Symbol, Symbol), u64> {
        &self.self_other
    }

    /// Counts keyed by `target[t]`.
    pub fn single_self(&self) -> &BTreeMap<Symbol, u64> {
        &self.single_self
    }

    pub fn total_triples(&self) -> u64 {
        self.total
    }
}

/// Counts the `(target[t+1], target[t], source[t])` triples.
pub fn accumulate_counts(target: &SymbolSeries, source: &SymbolSeries) -> Result<JointCounts> {
    let x = target.symbols();
    let y = source.symbols();
    if x.len() != y.len() {
        return Err(Error::Shape {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "transfer entropy needs at least 3 observations, got {}",
            x.len()
        )));
    }

    let qx = target.q() as usize;
    let qy = source.q() as usize;
    let triples = if qx * qx * qy <= DENSE_LIMIT {
        dense_triples(x, y, qx, qy)
    } else {
        sorted_triples(x, y)
    };

    let mut self_next = BTreeMap::new();
    let mut self_other = BTreeMap::new();
    let mut single_self = BTreeMap::new();
    let mut total = 0;
    for (&(next, cur, src), &c) in &triples {
        *self_next.entry((next, cur)).or_insert(0) += c;
        *self_other.entry((cur, src)).or_insert(0) += c;
        *single_self.entry(cur).or_insert(0) += c;
        total += c;
    }
    debug_assert_eq!(total as usize, x.len() - 1);

    Ok(JointCounts {
        triples,
        self_next,
        self_other,
        single_self,
        total,
    })
}

fn dense_triples(
    x: &[Symbol],
    y: &[Symbol],
    qx: usize,
    qy: usize,
) -> BTreeMap<(Symbol, Symbol, Symbol), u64> {
    let mut table = vec![0u64; qx * qx * qy];
    for t in 0..x.len() - 1 {
        let next = x[t + 1] as usize - 1;
        let cur = x[t] as usize - 1;
        let src = y[t] as usize - 1;
        table[(next * qx + cur) * qy + src] += 1;
    }
    let mut out = BTreeMap::new();
    for (idx, &c) in table.iter().enumerate() {
        if c > 0 {
            let src = idx % qy;
            let cur = (idx / qy) % qx;
            let next = idx / (qy * qx);
            out.insert(
                (next as Symbol + 1, cur as Symbol + 1, src as Symbol + 1),
                c,
            );
        }
    }
    out
}

fn sorted_triples(x: &[Symbol], y: &[Symbol]) -> BTreeMap<(Symbol, Symbol, Symbol), u64> {
    let mut keys: Vec<(Symbol, Symbol, Symbol)> =
        (0..x.len() - 1).map(|t| (x[t + 1], x[t], y[t])).collect();
    keys.sort_unstable();
    let mut out = BTreeMap::new();
    for k in keys {
        *out.entry(k).or_insert(0) += 1;
    }
    out
}

/// Transfer entropy in bits from the counted distributions.
pub fn transfer_entropy_pair(counts: &JointCounts) -> f64 {
    if counts.total == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (&(next, cur, src), &c) in &counts.triples {
        let self_next = counts.self_next[&(next, cur)];
        let self_other = counts.self_other[&(cur, src)];
        let single = counts.single_self[&cur];
        // Normalizations cancel inside the log; compare raw counts.
        let ratio = (c as f64 * single as f64) / (self_next as f64 * self_other as f64);
        sum += c as f64 * ratio.log2();
    }
    let te = sum / counts.total as f64;
    debug_assert!(
        te >= -NEGATIVE_TOLERANCE,
        "negative transfer entropy {te} exceeds rounding slack"
    );
    if (-NEGATIVE_TOLERANCE..0.0).contains(&te) {
        0.0
    } else {
        te
    }
}

/// Transfer entropy from `source` to `target`, in bits.
pub fn transfer_entropy(target: &SymbolSeries, source: &SymbolSeries) -> Result<f64> {
    accumulate_counts(target, source).map(|c| transfer_entropy_pair(&c))
}

/// Direct evaluation through explicit conditional probabilities.
///
/// Reference implementation for tests: it enumerates every symbol triple and
/// scans the series for each one, so keep alphabets and lengths small.
pub fn brute_force_te(target: &SymbolSeries, source: &SymbolSeries) -> Result<f64> {
    let x = target.symbols();
    let y = source.symbols();
    if x.len() != y.len() {
        return Err(Error::Shape {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "transfer entropy needs at least 3 observations, got {}",
            x.len()
        )));
    }
    if target.q() > 6 || source.q() > 6 || x.len() > 1000 {
        return Err(Error::Config(
            "brute-force oracle limited to q <= 6 and length <= 1000".into(),
        ));
    }
    let n = x.len() - 1;
    let nf = n as f64;
    let mut te = 0.0;
    for a in 1..=target.q() {
        for b in 1..=target.q() {
            let n_b = (0..n).filter(|&t| x[t] == b).count();
            let n_ab = (0..n).filter(|&t| x[t + 1] == a && x[t] == b).count();
            for c in 1..=source.q() {
                let n_abc = (0..n)
                    .filter(|&t| x[t + 1] == a && x[t] == b && y[t] == c)
                    .count();
                if n_abc == 0 {
                    continue;
                }
                let n_bc = (0..n).filter(|&t| x[t] == b && y[t] == c).count();
                let p_joint = n_abc as f64 / nf;
                let p_given_both = n_abc as f64 / n_bc as f64;
                let p_given_self = n_ab as f64 / n_b as f64;
                te += p_joint * (p_given_both / p_given_self).log2();
            }
        }
    }
    Ok(te)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    TransferEntropy,
    Asymmetry,
}

/// Square matrix over labelled nodes; entry `(i, j)` is the flow from `i` to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TEMatrix {
    labels: Vec<String>,
    values: Vec<f64>,
    kind: MatrixKind,
}

impl TEMatrix {
    /// Builds a matrix from row-major values, checking the invariants of `kind`.
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<f64>>, kind: MatrixKind) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape {
                left: rows.len(),
                right: n,
            });
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        let m = Self {
            labels,
            values,
            kind,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return Err(Error::Contract(format!(
                    "diagonal entry ({i}, {i}) is {}",
                    self.get(i, i)
                )));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(Error::Contract(format!("entry ({i}, {j}) is not finite")));
                }
                match self.kind {
                    MatrixKind::TransferEntropy if v < -NEGATIVE_TOLERANCE => {
                        return Err(Error::Contract(format!(
                            "transfer entropy ({i}, {j}) is negative: {v}"
                        )))
                    }
                    MatrixKind::Asymmetry if v != -self.get(j, i) => {
                        return Err(Error::Contract(format!(
                            "asymmetry matrix not antisymmetric at ({i}, {j})"
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[from * self.n() + to]
    }

    pub fn row(&self, from: usize) -> &[f64] {
        let n = self.n();
        &self.values[from * n..(from + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n().max(1))
    }

    /// Off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| self.get(i, j)))
    }

    pub(crate) fn require(&self, kind: MatrixKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Contract(format!(
                "expected a {kind:?} matrix, got {:?}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Pairwise transfer entropy; entry `(i, j)` is `T(series[i] -> series[j])`.
pub fn te_matrix(series: &[SymbolSeries], cfg: &EstimatorConfig) -> Result<TEMatrix> {
    cfg.validate()?;
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 series, got {n}"
        )));
    }
    let len = series[0].len();
    if let Some(s) = series.iter().find(|s| s.len() != len) {
        return Err(Error::Shape {
            left: s.len(),
            right: len,
        });
    }

    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (from, to) = (idx / n, idx % n);
            if from == to {
                return Ok(0.0);
            }
            transfer_entropy(&series[to], &series[from]).map_err(|e| Error::Pair {
                source_label: series[from].label().to_string(),
                target_label: series[to].label().to_string(),
                inner: Box::new(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let m = TEMatrix {
        labels: series.iter().map(|s| s.label().to_string()).collect(),
        values,
        kind: MatrixKind::TransferEntropy,
    };
    debug_assert!(m.check().is_ok());
    Ok(m)
}

/// `Δ(i, j) = T(i -> j) - T(j -> i)`, each unordered pair computed once.
pub fn asymmetry_matrix(te: &TEMatrix) -> Result<TEMatrix> {
    te.require(MatrixKind::TransferEntropy)?;
    let n = te.n();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = te.get(i, j) - te.get(j, i);
            values[i * n + j] = d;
            values[j * n + i] = -d;
        }
    }
    Ok(TEMatrix {
        labels: te.labels.clone(),
        values,
        kind: MatrixKind::Asymmetry,
    })
}

/// Observed estimate against estimates with the source randomly permuted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationNull {
    pub estimate: f64,
    pub null: Vec<f64>,
}

impl PermutationNull {
    /// Linear-interpolated quantile of the null sample.
    pub fn quantile(&self, p: f64) -> f64 {
        let mut sorted = self.null.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.is_empty() {
            return f64::NAN;
        }
        let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    }

    /// `(1 + #{null >= estimate}) / (1 + #null)`.
    pub fn p_value(&self) -> f64 {
        let exceed = self.null.iter().filter(|&&v| v >= self.estimate).count();
        (1 + exceed) as f64 / (1 + self.null.len()) as f64
    }
}

/// Transfer entropy with the source shuffled `shuffles` times.
///
/// Shuffling keeps the source's marginal distribution but destroys its timing
/// relative to the target. The null is a diagnostic; it is never subtracted
/// from estimates.
pub fn permutation_null(
    target: &SymbolSeries,
    source: &SymbolSeries,
    shuffles: usize,
    seed: u64,
) -> Result<PermutationNull> {
    let estimate = transfer_entropy(target, source)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..source.len()).collect();
    let mut null = Vec::with_capacity(shuffles);
    for _ in 0..shuffles {
        perm.shuffle(&mut rng);
        null.push(transfer_entropy(target, &source.permuted(&perm))?);
    }
    Ok(PermutationNull { estimate, null })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::BinningSpec;
    use proptest::prelude::*;

    fn series(label: &str, q: u32, symbols: &[Symbol]) -> SymbolSeries {
        SymbolSeries::new(label, symbols.to_vec(), BinningSpec::integer_alphabet(q).unwrap()).unwrap()
    }

    #[test]
    fn repeated_tuple() {
        let c = accumulate_counts(&series("x", 2, &[1, 1, 1, 1]), &series("y", 2, &[2, 2, 2, 2]))
            .unwrap();
        assert_eq!(c.total_triples(), 3);
        assert_eq!(c.triple_counts().len(), 1);
        assert_eq!(c.triple_counts()[&(1, 1, 2)], 3);
        assert_eq!(transfer_entropy_pair(&c), 0.0);
    }

    #[test]
    fn sliding_window_enumeration() {
        let c = accumulate_counts(&series("x", 2, &[1, 2, 1, 2]), &series("y", 2, &[1, 1, 2, 2]))
            .unwrap();
        let expected: BTreeMap<_, _> = [((2, 1, 1), 1), ((1, 2, 1), 1), ((2, 1, 2), 1)]
            .into_iter()
            .collect();
        assert_eq!(c.triple_counts(), &expected);
        assert_eq!(c.single_self()[&1], 2);
        assert_eq!(c.single_self()[&2], 1);
    }

    #[test]
    fn hand_computed_three_triple_fixture() {
        // Triples (2,1,1), (1,2,1), (2,1,2). With x[t] = 1 the next state is
        // always 2, with x[t] = 2 always 1: every conditional is 1, so T = 0.
        let x = series("x", 2, &[1, 2, 1, 2]);
        let y = series("y", 2, &[1, 1, 2, 2]);
        assert_eq!(transfer_entropy(&x, &y).unwrap(), 0.0);
        assert_eq!(brute_force_te(&x, &y).unwrap(), 0.0);

        // x = (1,1,2,2,1), y = (1,2,1,2,2): triples (1,1,1), (2,1,2), (2,2,1), (1,2,2).
        // p(next | cur, src) = 1 for all four; p(next | cur) = 1/2 for all four.
        // T = Σ 1/4 · log2(1 / (1/2)) = 1 bit.
        let x = series("x", 2, &[1, 1, 2, 2, 1]);
        let y = series("y", 2, &[1, 2, 1, 2, 2]);
        assert_eq!(transfer_entropy(&x, &y).unwrap(), 1.0);
        assert_eq!(brute_force_te(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn exactly_uniform_triples_give_zero() {
        // Length 9 binary target: its 8 transitions visit every (next, cur)
        // pair twice, and the source is arranged so each (next, cur, src)
        // triple occurs exactly once.
        let x = series("x", 2, &[1, 1, 1, 2, 2, 2, 1, 2, 1]);
        let c0 = accumulate_counts(&x, &series("y", 2, &[1; 9])).unwrap();
        let mut y = vec![0; 9];
        let mut seen = std::collections::HashSet::new();
        for t in 0..8 {
            let key = (x.symbols()[t + 1], x.symbols()[t]);
            y[t] = if seen.insert(key) { 1 } else { 2 };
        }
        y[8] = 1;
        let y = series("y", 2, &y);
        let c = accumulate_counts(&x, &y).unwrap();
        assert_eq!(c0.pair_self_next().values().copied().collect::<Vec<_>>(), vec![2, 2, 2, 2]);
        assert_eq!(c.triple_counts().len(), 8);
        assert!(c.triple_counts().values().all(|&v| v == 1));
        assert_eq!(transfer_entropy_pair(&c), 0.0);
        assert_eq!(brute_force_te(&x, &y).unwrap(), 0.0);
    }

    #[test]
    fn short_and_mismatched_inputs() {
        assert!(matches!(
            accumulate_counts(&series("x", 2, &[1, 2]), &series("y", 2, &[1, 2])),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            accumulate_counts(&series("x", 2, &[1, 2, 1]), &series("y", 2, &[1, 2])),
            Err(Error::Shape { .. })
        ));
        assert!(brute_force_te(&series("x", 2, &[1, 2]), &series("y", 2, &[1, 2])).is_err());
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let xs: Vec<Symbol> = (0..500u32).map(|t| (t * 7 + t / 3) % 5 + 1).collect();
        let ys: Vec<Symbol> = (0..500u32).map(|t| (t * 3 + t / 7) % 4 + 1).collect();
        let dense = dense_triples(&xs, &ys, 5, 4);
        let sparse = sorted_triples(&xs, &ys);
        assert_eq!(dense, sparse);
    }

    #[test]
    fn config_rejects_longer_histories() {
        let cfg = EstimatorConfig {
            own_history: 2,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(EstimatorConfig::with_q(1).validate().is_err());
        assert!(EstimatorConfig::default().validate().is_ok());
    }

    #[test]
    fn constant_pair_matrix_is_zero() {
        let a = series("a", 3, &[2; 20]);
        let b = series("b", 3, &[3; 20]);
        let m = te_matrix(&[a, b], &EstimatorConfig::default()).unwrap();
        assert!(m.rows().flatten().all(|&v| v == 0.0));
        let d = asymmetry_matrix(&m).unwrap();
        assert!(d.rows().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn asymmetry_definition() {
        let te = TEMatrix::from_rows(
            vec!["1".into(), "2".into()],
            vec![vec![0.0, 0.3], vec![0.1, 0.0]],
            MatrixKind::TransferEntropy,
        )
        .unwrap();
        let d = asymmetry_matrix(&te).unwrap();
        assert!((d.get(0, 1) - 0.2).abs() < 1e-15);
        assert_eq!(d.get(1, 0), -d.get(0, 1));
        assert!(asymmetry_matrix(&d).is_err());
    }

    #[test]
    fn from_rows_checks_invariants() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(TEMatrix::from_rows(
            labels.clone(),
            vec![vec![0.1, 0.0], vec![0.0, 0.0]],
            MatrixKind::TransferEntropy
        )
        .is_err());
        assert!(TEMatrix::from_rows(
            labels.clone(),
            vec![vec![0.0, -0.5], vec![0.0, 0.0]],
            MatrixKind::TransferEntropy
        )
        .is_err());
        assert!(TEMatrix::from_rows(
            labels,
            vec![vec![0.0, 0.5], vec![-0.4, 0.0]],
            MatrixKind::Asymmetry
        )
        .is_err());
    }

    #[test]
    fn pair_error_names_labels() {
        let a = series("a", 2, &[1, 2]);
        let b = series("b", 2, &[2, 1]);
        match te_matrix(&[a, b], &EstimatorConfig::default()) {
            Err(Error::Pair { inner, .. }) => {
                assert!(matches!(*inner, Error::InsufficientData(_)))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quantile_and_p_value() {
        let n = PermutationNull {
            estimate: 0.5,
            null: (0..=100).map(|i| i as f64 / 100.0).collect(),
        };
        assert!((n.quantile(0.95) - 0.95).abs() < 1e-12);
        assert!((n.p_value() - 52.0 / 102.0).abs() < 1e-15);
    }

    fn pair(max_q: u32) -> impl Strategy<Value = (u32, Vec<Symbol>, Vec<Symbol>)> {
        (2..=max_q, 3usize..120).prop_flat_map(|(q, len)| {
            (
                Just(q),
                prop::collection::vec(1..=q, len),
                prop::collection::vec(1..=q, len),
            )
        })
    }

    proptest! {
        #[test]
        fn marginals_consistent_and_nonnegative((q, xs, ys) in pair(5)) {
            let x = series("x", q, &xs);
            let y = series("y", q, &ys);
            let c = accumulate_counts(&x, &y).unwrap();
            prop_assert_eq!(c.total_triples() as usize, xs.len() - 1);
            prop_assert_eq!(c.triple_counts().values().sum::<u64>(), c.total_triples());
            let mut from_self_other = BTreeMap::new();
            for (&(cur, _), &v) in c.pair_self_other() {
                *from_self_other.entry(cur).or_insert(0u64) += v;
            }
            prop_assert_eq!(&from_self_other, c.single_self());
            let mut from_self_next = BTreeMap::new();
            for (&(_, cur), &v) in c.pair_self_next() {
                *from_self_next.entry(cur).or_insert(0u64) += v;
            }
            prop_assert_eq!(&from_self_next, c.single_self());
            let te = transfer_entropy_pair(&c);
            prop_assert!(te >= -NEGATIVE_TOLERANCE);
            prop_assert!(te <= f64::from(q).log2() + 1e-12);
            let oracle = brute_force_te(&x, &y).unwrap();
            prop_assert!((te - oracle).abs() < 1e-12);
        }

        #[test]
        fn antisymmetric(rows in prop::collection::vec(prop::collection::vec(0.0..3.0f64, 5), 5)) {
            let mut rows = rows;
            for (i, r) in rows.iter_mut().enumerate() {
                r[i] = 0.0;
            }
            let labels = (0..5).map(|i| i.to_string()).collect();
            let te = TEMatrix::from_rows(labels, rows, MatrixKind::TransferEntropy).unwrap();
            let d = asymmetry_matrix(&te).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    prop_assert_eq!(d.get(i, j) + d.get(j, i), 0.0);
                }
            }
        }
    }
}
