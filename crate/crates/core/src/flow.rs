//! Per-node flow statistics and the outflow-on-inflow regression.

use serde::{Deserialize, Serialize};

use crate::entropy::{MatrixKind, TEMatrix};
use crate::error::{Error, Result};
use crate::stats::student_t_two_sided;

/// Average outflow, inflow and net flow of each node, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub labels: Vec<String>,
    pub f_out: Vec<f64>,
    pub f_in: Vec<f64>,
    pub delta_f: Vec<f64>,
}

impl FlowSummary {
    pub fn new(labels: Vec<String>, f_out: Vec<f64>, f_in: Vec<f64>) -> Result<Self> {
        if f_out.len() != labels.len() || f_in.len() != labels.len() {
            return Err(Error::Shape {
                left: f_out.len().max(f_in.len()),
                right: labels.len(),
            });
        }
        let delta_f = f_out.iter().zip(&f_in).map(|(o, i)| o - i).collect();
        Ok(Self {
            labels,
            f_out,
            f_in,
            delta_f,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Row and column means of the off-diagonal entries.
pub fn flow_summary(te: &TEMatrix) -> Result<FlowSummary> {
    te.require(MatrixKind::TransferEntropy)?;
    let n = te.n();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "flow summary needs at least 2 nodes, got {n}"
        )));
    }
    let scale = 1.0 / (n - 1) as f64;
    let mut f_out = Vec::with_capacity(n);
    let mut f_in = Vec::with_capacity(n);
    for i in 0..n {
        let out: f64 = (0..n).filter(|&p| p != i).map(|p| te.get(i, p)).sum();
        let inn: f64 = (0..n).filter(|&p| p != i).map(|p| te.get(p, i)).sum();
        f_out.push(out * scale);
        f_in.push(inn * scale);
    }
    FlowSummary::new(te.labels().to_vec(), f_out, f_in)
}

/// Labels with net flow, descending; ties go to the smaller label first.
pub fn rank_by_net_flow(summary: &FlowSummary) -> Vec<(String, f64)> {
    let mut ranked: Vec<(String, f64)> = summary
        .labels
        .iter()
        .cloned()
        .zip(summary.delta_f.iter().copied())
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Simple linear fit `f_out = slope · f_in + intercept` with OLS inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub t_slope: f64,
    pub t_intercept: f64,
    pub p_slope: f64,
    pub p_intercept: f64,
    pub r2: f64,
    pub r2_adjusted: f64,
    pub n_points: usize,
}

/// Regresses average outflow on average inflow.
pub fn ols_outflow_on_inflow(summary: &FlowSummary) -> Result<RegressionResult> {
    ols_simple(&summary.f_in, &summary.f_out)
}

/// Ordinary least squares of `y` on `x` with intercept; two-sided p-values
/// from the t distribution with `n - 2` degrees of freedom.
pub fn ols_simple(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::Shape {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - x_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegression(
            "regressor has zero variance".into(),
        ));
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - x_mean) * (b - y_mean))
        .sum();
    let syy: f64 = y.iter().map(|v| (v - y_mean).powi(2)).sum();

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();

    let df = nf - 2.0;
    let sigma2 = sse / df;
    let se_slope = (sigma2 / sxx).sqrt();
    let se_intercept = (sigma2 * (1.0 / nf + x_mean * x_mean / sxx)).sqrt();
    let (t_slope, p_slope) = t_test(slope, se_slope, df);
    let (t_intercept, p_intercept) = t_test(intercept, se_intercept, df);

    let r2 = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        // Constant response, fitted exactly by the intercept.
        1.0
    };
    let r2_adjusted = 1.0 - (1.0 - r2) * (nf - 1.0) / df;

    Ok(RegressionResult {
        slope,
        intercept,
        se_slope,
        se_intercept,
        t_slope,
        t_intercept,
        p_slope,
        p_intercept,
        r2,
        r2_adjusted,
        n_points: n,
    })
}

fn t_test(coef: f64, se: f64, df: f64) -> (f64, f64) {
    if se > 0.0 {
        let t = coef / se;
        (t, student_t_two_sided(t, df))
    } else if coef == 0.0 {
        (0.0, 1.0)
    } else {
        (coef.signum() * f64::INFINITY, 0.0)
    }
}
