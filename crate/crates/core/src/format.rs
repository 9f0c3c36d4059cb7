//! CSV and JSON artifact formats.
//!
//! Every number is written with 12 significant digits. Column order is fixed:
//!
//! | file | columns |
//! |------|---------|
//! | matrix | `from`, then one column per label; row `i`, column `j` is the flow `i -> j` |
//! | labels | `index,label,short_label,display_name` |
//! | flows | `label,f_out,f_in,delta_f,rank` |
//! | evolution | `window_label,mean_te,mean_abs_asymmetry,n_observations` |
//! | q scan | `q,mean_te,mean_abs_asymmetry` |
//! | prices | `date`, then one column per label |
//! | symbols | `date`, then one column per label |

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use crate::entropy::{MatrixKind, TEMatrix};
use crate::error::{Error, Result};
use crate::evolution::{EvolutionSeries, QScanRow};
use crate::flow::{rank_by_net_flow, FlowSummary, RegressionResult};
use crate::ingest::PricePanel;
use crate::sectors;
use crate::symbolic::SymbolSeries;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `printf("%.12g")`-style formatting.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "NaN".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

/// Rounds to the value [`fmt_num`] would print.
pub fn round_sig(v: f64) -> f64 {
    fmt_num(v).parse().unwrap_or(v)
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn write_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<output>", io),
        other => Error::Schema(format!("{other:?}")),
    }
}

fn flush<W: Write>(mut wtr: csv::Writer<W>) -> Result<()> {
    wtr.flush().map_err(|e| Error::io("<output>", e))
}

pub fn write_matrix_csv<W: Write>(w: W, m: &TEMatrix) -> Result<()> {
    let mut wtr = csv_writer(w);
    let mut header = vec!["from".to_string()];
    header.extend(m.labels().iter().cloned());
    wtr.write_record(&header).map_err(write_err)?;
    for (label, row) in m.labels().iter().zip(m.rows()) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|&v| fmt_num(v)));
        wtr.write_record(&rec).map_err(write_err)?;
    }
    flush(wtr)
}

pub fn read_matrix_csv<R: Read>(r: R, kind: MatrixKind) -> Result<TEMatrix> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr
        .headers()
        .map_err(|e| parse_err(e, 1))?
        .iter()
        .skip(1)
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut row_labels = Vec::new();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        row_labels.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad number {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if row_labels != header {
        return Err(Error::Schema(
            "matrix row labels must match the header".into(),
        ));
    }
    TEMatrix::from_rows(header, rows, kind)
}

fn parse_err(e: csv::Error, fallback: usize) -> Error {
    Error::Parse {
        line: e.position().map_or(fallback, |p| p.line() as usize),
        message: e.to_string(),
    }
}

pub fn write_labels_csv<W: Write>(w: W, labels: &[String]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["index", "label", "short_label", "display_name"])
        .map_err(write_err)?;
    for (i, l) in labels.iter().enumerate() {
        wtr.write_record([
            i.to_string().as_str(),
            l,
            sectors::short_label(l),
            sectors::display_name(l).unwrap_or(""),
        ])
        .map_err(write_err)?;
    }
    flush(wtr)
}

pub fn write_flows_csv<W: Write>(w: W, s: &FlowSummary) -> Result<()> {
    let ranked = rank_by_net_flow(s);
    let mut wtr = csv_writer(w);
    wtr.write_record(["label", "f_out", "f_in", "delta_f", "rank"])
        .map_err(write_err)?;
    for i in 0..s.n() {
        let rank = ranked
            .iter()
            .position(|(l, _)| *l == s.labels[i])
            .expect("every label is ranked")
            + 1;
        wtr.write_record([
            s.labels[i].clone(),
            fmt_num(s.f_out[i]),
            fmt_num(s.f_in[i]),
            fmt_num(s.delta_f[i]),
            rank.to_string(),
        ])
        .map_err(write_err)?;
    }
    flush(wtr)
}

pub fn read_flows_csv<R: Read>(r: R) -> Result<FlowSummary> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let header = rdr.headers().map_err(|e| parse_err(e, 1))?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("flows file lacks column {name:?}")))
    };
    let (il, io, ii) = (col("label")?, col("f_out")?, col("f_in")?);
    let mut labels = Vec::new();
    let mut f_out = Vec::new();
    let mut f_in = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize| {
            rec[i].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad number {:?}", &rec[i]),
            })
        };
        labels.push(rec[il].to_string());
        f_out.push(num(io)?);
        f_in.push(num(ii)?);
    }
    FlowSummary::new(labels, f_out, f_in)
}

#[derive(Serialize)]
struct RegressionJson {
    slope: f64,
    intercept: f64,
    se_slope: f64,
    se_intercept: f64,
    t_slope: Option<f64>,
    t_intercept: Option<f64>,
    p_slope: f64,
    p_intercept: f64,
    r2: f64,
    r2_adjusted: f64,
    n_points: usize,
    response: &'static str,
    regressor: &'static str,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then(|| round_sig(v))
}

pub fn write_regression_json<W: Write>(mut w: W, r: &RegressionResult) -> Result<()> {
    let out = RegressionJson {
        slope: round_sig(r.slope),
        intercept: round_sig(r.intercept),
        se_slope: round_sig(r.se_slope),
        se_intercept: round_sig(r.se_intercept),
        t_slope: finite(r.t_slope),
        t_intercept: finite(r.t_intercept),
        p_slope: round_sig(r.p_slope),
        p_intercept: round_sig(r.p_intercept),
        r2: round_sig(r.r2),
        r2_adjusted: round_sig(r.r2_adjusted),
        n_points: r.n_points,
        response: "f_out",
        regressor: "f_in",
    };
    serde_json::to_writer_pretty(&mut w, &out)?;
    writeln!(w).map_err(|e| Error::io("<output>", e))
}

pub fn write_evolution_csv<W: Write>(w: W, ev: &EvolutionSeries) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["window_label", "mean_te", "mean_abs_asymmetry", "n_observations"])
        .map_err(write_err)?;
    for i in 0..ev.len() {
        wtr.write_record([
            ev.window_labels[i].clone(),
            fmt_num(ev.mean_te[i]),
            fmt_num(ev.mean_abs_asymmetry[i]),
            ev.n_observations[i].to_string(),
        ])
        .map_err(write_err)?;
    }
    flush(wtr)
}

pub fn write_qscan_csv<W: Write>(w: W, rows: &[QScanRow]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["q", "mean_te", "mean_abs_asymmetry"])
        .map_err(write_err)?;
    for r in rows {
        wtr.write_record([
            r.q.to_string(),
            fmt_num(r.mean_te),
            fmt_num(r.mean_abs_asymmetry),
        ])
        .map_err(write_err)?;
    }
    flush(wtr)
}

pub fn write_price_panel_csv<W: Write>(w: W, panel: &PricePanel) -> Result<()> {
    let mut wtr = csv_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(panel.labels().iter().cloned());
    wtr.write_record(&header).map_err(write_err)?;
    for (d, row) in panel.dates().iter().zip(panel.rows()) {
        let mut rec = vec![d.to_string()];
        rec.extend(row.iter().map(|c| c.map(fmt_num).unwrap_or_default()));
        wtr.write_record(&rec).map_err(write_err)?;
    }
    flush(wtr)
}

pub fn write_symbols_csv<W: Write>(w: W, dates: &[NaiveDate], series: &[SymbolSeries]) -> Result<()> {
    let mut wtr = csv_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(series.iter().map(|s| s.label().to_string()));
    wtr.write_record(&header).map_err(write_err)?;
    for (t, d) in dates.iter().enumerate() {
        let mut rec = vec![d.to_string()];
        rec.extend(series.iter().map(|s| s.symbols()[t].to_string()));
        wtr.write_record(&rec).map_err(write_err)?;
    }
    flush(wtr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-0.2), "-0.2");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_num(100.0 * std::f64::consts::E), "271.828182846");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
        assert_eq!(fmt_num(1e-5), "0.00001");
        assert_eq!(fmt_num(999999999999.9), "1e12");
    }

    #[test]
    fn matrix_round_trip() {
        let te = TEMatrix::from_rows(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                vec![0.0, 0.125, 1.0 / 3.0],
                vec![0.5, 0.0, 0.25],
                vec![0.0625, 0.75, 0.0],
            ],
            MatrixKind::TransferEntropy,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &te).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("from,a,b,c\na,0,0.125,0.333333333333\n"));
        let back = read_matrix_csv(buf.as_slice(), MatrixKind::TransferEntropy).unwrap();
        assert_eq!(back.get(1, 0), 0.5);
        assert_eq!(back.labels(), te.labels());

        let d = crate::entropy::asymmetry_matrix(&te).unwrap();
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &d).unwrap();
        assert!(read_matrix_csv(buf.as_slice(), MatrixKind::Asymmetry).is_ok());
    }

    #[test]
    fn flows_round_trip() {
        let s = FlowSummary::new(
            vec!["a".into(), "b".into()],
            vec![0.4, 0.1],
            vec![0.1, 0.4],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_flows_csv(&mut buf, &s).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "label,f_out,f_in,delta_f,rank\na,0.4,0.1,0.3,1\nb,0.1,0.4,-0.3,2\n"
        );
        let back = read_flows_csv(buf.as_slice()).unwrap();
        assert_eq!(back.f_out, s.f_out);
        assert_eq!(back.f_in, s.f_in);
    }
}
