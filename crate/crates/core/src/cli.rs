//! Batch command line: `compute`, `evolve`, `scan-q`, `synth`, `flows`, `regress`.
//!
//! Every command renders its artifacts in memory first and only then writes
//! them, so a failing run leaves no partial output behind. Exit status is 0
//! on success, 1 on a runtime failure and 2 on a usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::entropy::{asymmetry_matrix, te_matrix, EstimatorConfig, MatrixKind};
use crate::error::Error;
use crate::evolution::{
    mean_abs_asymmetry, mean_te_of_matrix, scan_q, windowed_te, BinningMode, WindowSpec,
};
use crate::flow::{flow_summary, ols_outflow_on_inflow};
use crate::format;
use crate::ingest::{
    align_panel_with_report, compute_log_returns, load_price_panel, AlignmentPolicy,
    AlignmentReport, PanelFormat, ReturnPanel,
};
use crate::symbolic::{symbolize_panel, SymbolSeries};
use crate::synthetic::{self, CoupledProcessSpec, ProcessKind};

pub const TOOL: &str = "infoflow";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Parser)]
#[command(name = "infoflow", version, about = "Symbolic transfer entropy between the columns of a price panel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full-sample transfer entropy and asymmetry matrices, flows and regression.
    Compute(ComputeArgs),
    /// Windowed market-wide averages.
    Evolve(EvolveArgs),
    /// Full-sample averages over a range of bin counts.
    ScanQ(ScanQArgs),
    /// Generate a synthetic coupled price panel.
    Synth(SynthArgs),
    /// Flow summary from an existing transfer entropy matrix.
    Flows(FlowsArgs),
    /// Outflow-on-inflow regression from an existing flows file.
    Regress(RegressArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InputArgs {
    /// Price panel: header `date,<label>...`, one row per date.
    #[arg(long)]
    pub input: PathBuf,
    /// Field delimiter (single byte).
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// strftime pattern of the date column.
    #[arg(long, default_value = "%Y-%m-%d")]
    pub date_format: String,
    /// Missing-data policy: `drop` or `ffill:<max gap>`.
    #[arg(long, default_value = "drop")]
    pub align: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of equal-width bins.
    #[arg(long, default_value_t = 15)]
    pub q: u32,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated artifacts: matrices, flows, regression, heatmap-data, symbols.
    #[arg(long, default_value = "matrices,flows,regression", value_delimiter = ',')]
    pub emit: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningArg {
    PerWindow,
    FullSample,
}

impl From<BinningArg> for BinningMode {
    fn from(b: BinningArg) -> Self {
        match b {
            BinningArg::PerWindow => BinningMode::PerWindow,
            BinningArg::FullSample => BinningMode::FullSample,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 15)]
    pub q: u32,
    #[arg(long, value_enum, default_value = "per-window")]
    pub binning: BinningArg,
    /// `calendar-year` or `fixed:<width>,<stride>`.
    #[arg(long, default_value = "calendar-year")]
    pub window: String,
    /// Windows with fewer return observations are skipped.
    #[arg(long, default_value_t = 50)]
    pub min_observations: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated artifacts: evolution, matrices (one file per window).
    #[arg(long, default_value = "evolution", value_delimiter = ',')]
    pub emit: Vec<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanQArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 2)]
    pub q_min: u32,
    #[arg(long, default_value_t = 22)]
    pub q_max: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    CoupledBinary,
    LaggedCopy,
    Independent,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "coupled-binary")]
    pub kind: KindArg,
    /// Flip probability of the coupled-binary channel.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Alphabet size for lagged-copy and independent processes.
    #[arg(long, default_value_t = 2)]
    pub alphabet: u32,
    /// Number of returns (the price file has one more row).
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Additional independent uniform columns `z1..zK`.
    #[arg(long, default_value_t = 0)]
    pub noise_columns: usize,
    /// Spacing between adjacent symbol return levels.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Date of the first price row.
    #[arg(long, default_value = "2000-01-01")]
    pub start: String,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FlowsArgs {
    /// Transfer entropy matrix CSV as written by `compute`.
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegressArgs {
    /// flows.csv as written by `compute` or `flows`.
    #[arg(long)]
    pub flows: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Run(Error::Json(e))
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "error: {e}"),
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) => 1,
        }
    }
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(_) => 0,
        Err(f) => {
            eprintln!("{TOOL}: {f}");
            f.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, Failure> {
    match cmd {
        Command::Compute(a) => cmd_compute(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::ScanQ(a) => cmd_scan_q(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Flows(a) => cmd_flows(a),
        Command::Regress(a) => cmd_regress(a),
    }
}

/// Artifacts rendered in memory, committed to disk together.
struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn add(
        &mut self,
        name: impl Into<String>,
        render: impl FnOnce(&mut Vec<u8>) -> crate::Result<()>,
    ) -> crate::Result<()> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        self.files.push((name.into(), buf));
        Ok(())
    }

    fn digests(&self) -> Value {
        Value::Array(
            self.files
                .iter()
                .map(|(name, bytes)| json!({ "file": name, "sha256": sha256_hex(bytes) }))
                .collect(),
        )
    }

    /// Writes every artifact plus the manifest; removes them all on failure.
    fn commit(mut self, manifest: Option<Value>) -> crate::Result<Outcome> {
        if let Some(mut m) = manifest {
            m["outputs"] = self.digests();
            let mut buf = serde_json::to_vec_pretty(&m)?;
            buf.push(b'\n');
            self.files.push((MANIFEST.to_string(), buf));
        }
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            if let Err(e) = fs::write(&path, bytes) {
                for p in &written {
                    let _ = fs::remove_file(p);
                }
                let _ = fs::remove_file(&path);
                return Err(Error::io(&path, e));
            }
            written.push(path);
        }
        Ok(Outcome { written })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_align(s: &str) -> Result<AlignmentPolicy, Failure> {
    match s {
        "drop" | "drop-incomplete-rows" => Ok(AlignmentPolicy::DropIncompleteRows),
        _ => s
            .strip_prefix("ffill:")
            .and_then(|g| g.parse().ok())
            .map(|max_gap| AlignmentPolicy::ForwardFill { max_gap })
            .ok_or_else(|| Failure::Usage(format!("--align expects drop or ffill:<gap>, got {s:?}"))),
    }
}

fn parse_window(s: &str, min_observations: usize) -> Result<WindowSpec, Failure> {
    if s == "calendar-year" {
        return Ok(WindowSpec::calendar_year(min_observations));
    }
    let bad = || Failure::Usage(format!("--window expects calendar-year or fixed:<w>,<s>, got {s:?}"));
    let (w, st) = s
        .strip_prefix("fixed:")
        .and_then(|r| r.split_once(','))
        .ok_or_else(bad)?;
    let spec = WindowSpec::fixed(
        w.trim().parse().map_err(|_| bad())?,
        st.trim().parse().map_err(|_| bad())?,
        min_observations,
    );
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(spec)
}

fn check_emit(emit: &[String], allowed: &[&str]) -> Result<(), Failure> {
    for e in emit {
        if !allowed.contains(&e.as_str()) {
            return Err(Failure::Usage(format!(
                "unknown --emit item {e:?}; expected one of {}",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn check_q(q: u32) -> Result<(), Failure> {
    if q < 2 {
        return Err(Failure::Usage(format!("--q must be >= 2, got {q}")));
    }
    Ok(())
}

struct LoadedInput {
    returns: ReturnPanel,
    manifest: Value,
}

fn load_input(args: &InputArgs) -> Result<LoadedInput, Failure> {
    let policy = parse_align(&args.align)?;
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage("--delimiter must be a single ASCII character".into()));
    }
    let fmt = PanelFormat {
        delimiter: args.delimiter as u8,
        date_format: args.date_format.clone(),
    };
    let bytes = fs::read(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let panel = load_price_panel(bytes.as_slice(), &fmt)?;
    let (aligned, report) = align_panel_with_report(&panel, policy)?;
    let returns = compute_log_returns(&aligned)?;
    let manifest = json!({
        "input": {
            "path": args.input.display().to_string(),
            "sha256": sha256_hex(&bytes),
            "bytes": bytes.len(),
        },
        "panel": panel_meta(&report, aligned.labels(), aligned.len(), returns.len()),
    });
    Ok(LoadedInput { returns, manifest })
}

fn panel_meta(report: &AlignmentReport, labels: &[String], price_rows: usize, return_rows: usize) -> Value {
    json!({
        "labels": labels,
        "input_rows": report.input_rows,
        "price_rows": price_rows,
        "return_rows": return_rows,
        "alignment": report.policy,
        "dropped_rows": report.dropped_dates.len(),
        "dropped_dates": report.dropped_dates.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "filled_cells": report.filled_cells,
    })
}

fn base_manifest(command: &str, params: Value, extra: Value) -> Value {
    let mut m = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "parameters": params,
        "created_at": chrono::Utc::now().to_rfc3339(),
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut m, extra) {
        dst.extend(src);
    }
    m
}

pub fn cmd_compute(args: &ComputeArgs) -> Result<Outcome, Failure> {
    check_q(args.q)?;
    check_emit(&args.emit, &["matrices", "flows", "regression", "heatmap-data", "symbols"])?;
    let emits = |k: &str| args.emit.iter().any(|e| e == k);
    let input = load_input(&args.input)?;
    let cfg = EstimatorConfig::with_q(args.q);

    let symbols = symbolize_panel(&input.returns, args.q)?;
    let te = te_matrix(&symbols, &cfg)?;
    let dte = asymmetry_matrix(&te)?;
    let flows = flow_summary(&te)?;

    let mut out = Artifacts::new(&args.out);
    if emits("matrices") {
        out.add("te_matrix.csv", |b| format::write_matrix_csv(b, &te))?;
        out.add("asymmetry_matrix.csv", |b| format::write_matrix_csv(b, &dte))?;
    }
    if emits("flows") {
        out.add("flows.csv", |b| format::write_flows_csv(b, &flows))?;
    }
    if emits("regression") {
        let reg = ols_outflow_on_inflow(&flows)?;
        out.add("regression.json", |b| format::write_regression_json(b, &reg))?;
    }
    if emits("heatmap-data") {
        out.add("labels.csv", |b| format::write_labels_csv(b, te.labels()))?;
    }
    if emits("symbols") {
        out.add("symbols.csv", |b| {
            format::write_symbols_csv(b, input.returns.dates(), &symbols)
        })?;
    }

    let summary = json!({
        "mean_te": format::round_sig(mean_te_of_matrix(&te)?),
        "mean_abs_asymmetry": format::round_sig(mean_abs_asymmetry(&dte)?),
        "bins": bins_meta(&symbols),
    });
    let manifest = base_manifest(
        "compute",
        serde_json::to_value(args)?,
        merge(input.manifest, json!({ "summary": summary, "estimator": cfg })),
    );
    Ok(out.commit(Some(manifest))?)
}

fn bins_meta(symbols: &[SymbolSeries]) -> Value {
    Value::Array(
        symbols
            .iter()
            .map(|s| {
                json!({
                    "label": s.label(),
                    "q": s.q(),
                    "x_min": format::round_sig(s.spec().x_min()),
                    "x_max": format::round_sig(s.spec().x_max()),
                    "delta": format::round_sig(s.spec().delta()),
                })
            })
            .collect(),
    )
}

fn merge(a: Value, b: Value) -> Value {
    match (a, b) {
        (Value::Object(mut a), Value::Object(b)) => {
            a.extend(b);
            Value::Object(a)
        }
        (a, _) => a,
    }
}

fn file_safe(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<Outcome, Failure> {
    check_q(args.q)?;
    check_emit(&args.emit, &["evolution", "matrices"])?;
    let emits = |k: &str| args.emit.iter().any(|e| e == k);
    let spec = parse_window(&args.window, args.min_observations)?;
    let input = load_input(&args.input)?;
    let cfg = EstimatorConfig::with_q(args.q);
    let ev = windowed_te(&input.returns, &spec, &cfg, args.binning.into())?;
    for w in &ev.warnings {
        eprintln!("{TOOL}: warning: {w}");
    }

    let mut out = Artifacts::new(&args.out);
    if emits("evolution") {
        out.add("evolution.csv", |b| format::write_evolution_csv(b, &ev))?;
    }
    if emits("matrices") {
        for (label, m) in ev.window_labels.iter().zip(&ev.te_matrices) {
            out.add(format!("te_matrix_{}.csv", file_safe(label)), |b| {
                format::write_matrix_csv(b, m)
            })?;
        }
    }
    let manifest = base_manifest(
        "evolve",
        serde_json::to_value(args)?,
        merge(
            input.manifest,
            json!({ "window": spec, "estimator": cfg, "warnings": ev.warnings }),
        ),
    );
    Ok(out.commit(Some(manifest))?)
}

pub fn cmd_scan_q(args: &ScanQArgs) -> Result<Outcome, Failure> {
    if args.q_max < args.q_min {
        return Err(Failure::Usage(format!(
            "--q-max {} is below --q-min {}",
            args.q_max, args.q_min
        )));
    }
    let (lo, hi) = crate::evolution::Q_SCAN_LIMITS;
    if args.q_min < lo || args.q_max > hi {
        return Err(Failure::Usage(format!("q range must lie within [{lo}, {hi}]")));
    }
    let input = load_input(&args.input)?;
    let rows = scan_q(&input.returns, args.q_min, args.q_max, &EstimatorConfig::default())?;
    let mut out = Artifacts::new(&args.out);
    out.add("qscan.csv", |b| format::write_qscan_csv(b, &rows))?;
    let manifest = base_manifest("scan-q", serde_json::to_value(args)?, input.manifest);
    Ok(out.commit(Some(manifest))?)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Outcome, Failure> {
    let kind = match args.kind {
        KindArg::CoupledBinary => ProcessKind::CoupledBinary {
            epsilon: args.epsilon,
        },
        KindArg::LaggedCopy => ProcessKind::LaggedCopy {
            alphabet: args.alphabet,
        },
        KindArg::Independent => ProcessKind::Independent {
            alphabet: args.alphabet,
        },
    };
    let spec = CoupledProcessSpec {
        kind,
        length: args.length,
        seed: args.seed,
    };
    if !(args.step.is_finite() && args.step > 0.0) {
        return Err(Failure::Usage("--step must be positive".into()));
    }
    let start = NaiveDate::parse_from_str(&args.start, "%Y-%m-%d")
        .map_err(|e| Failure::Usage(format!("--start: {e}")))?;
    let (x, y) = synthetic::generate(&spec)?;
    let mut series = vec![x, y];
    for k in 1..=args.noise_columns {
        let seed = args.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k as u64));
        series.push(synthetic::independent_series(
            &format!("z{k}"),
            spec.alphabet(),
            args.length,
            seed,
        )?);
    }
    let panel = synthetic::price_panel(&series, start, args.step)?;
    let (te_xy, te_yx) = synthetic::analytic_te(&spec)?;

    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = args
        .out
        .file_name()
        .ok_or_else(|| Failure::Usage("--out must name a file".into()))?
        .to_string_lossy()
        .into_owned();
    let stem = args
        .out
        .file_stem()
        .map_or_else(|| name.clone(), |s| s.to_string_lossy().into_owned());
    let mut out = Artifacts::new(&dir);
    out.add(name, |b| format::write_price_panel_csv(b, &panel))?;
    let manifest = base_manifest(
        "synth",
        serde_json::to_value(args)?,
        json!({
            "process": spec,
            "generator": synthetic::GENERATOR,
            "analytic_te": { "x_to_y": te_xy, "y_to_x": te_yx },
        }),
    );
    let mut buf = serde_json::to_vec_pretty(&merge(manifest, json!({ "outputs": out.digests() })))?;
    buf.push(b'\n');
    out.files.push((format!("{stem}.manifest.json"), buf));
    Ok(out.commit(None)?)
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    Ok(fs::read(path).map_err(|e| Error::io(path, e))?)
}

pub fn cmd_flows(args: &FlowsArgs) -> Result<Outcome, Failure> {
    let bytes = read_file(&args.matrix)?;
    let te = format::read_matrix_csv(bytes.as_slice(), MatrixKind::TransferEntropy)?;
    let flows = flow_summary(&te)?;
    let mut out = Artifacts::new(&args.out);
    out.add("flows.csv", |b| format::write_flows_csv(b, &flows))?;
    let manifest = base_manifest(
        "flows",
        serde_json::to_value(args)?,
        json!({ "input": { "path": args.matrix.display().to_string(), "sha256": sha256_hex(&bytes) } }),
    );
    Ok(out.commit(Some(manifest))?)
}

pub fn cmd_regress(args: &RegressArgs) -> Result<Outcome, Failure> {
    let bytes = read_file(&args.flows)?;
    let flows = format::read_flows_csv(bytes.as_slice())?;
    let reg = ols_outflow_on_inflow(&flows)?;
    let mut out = Artifacts::new(&args.out);
    out.add("regression.json", |b| format::write_regression_json(b, &reg))?;
    let manifest = base_manifest(
        "regress",
        serde_json::to_value(args)?,
        json!({ "input": { "path": args.flows.display().to_string(), "sha256": sha256_hex(&bytes) } }),
    );
    Ok(out.commit(Some(manifest))?)
}
