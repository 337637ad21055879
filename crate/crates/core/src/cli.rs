//! Command-line front end.
//!
//! Every command produces an [`OutputRecord`], rendered as CSV (comment
//! lines for the schema version and parameters, then a fixed header) or as
//! JSON. Numbers are written with 17 significant digits in both formats, so
//! the two encode identical values.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 numeric failure.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Number, Value};

use crate::analytic::{self, RefractiveIndex, ShiftPrediction, ShiftValue};
use crate::error::Error;
use crate::experiments::{self, ScanConfig, ScanKind};
use crate::params::{BeamSpec3D, PacketSpec, Regime};
use crate::synth::{Packet1d, QuadSettings, Wave};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "ghshift", version, about = "Gaussian packets and beams at a potential step")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub output: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub out_file: Option<PathBuf>,
    /// Gauss-Legendre nodes per panel.
    #[arg(long, global = true)]
    pub quad_nodes: Option<usize>,
    /// Panels across the spectral support.
    #[arg(long, global = true)]
    pub quad_panels: Option<usize>,
    /// Accepted for scripting; every computation is deterministic.
    #[arg(long, global = true)]
    pub seed_free: bool,
}

impl CommonArgs {
    fn settings(&self) -> QuadSettings {
        let mut s = QuadSettings::default();
        if let Some(n) = self.quad_nodes {
            s.nodes_per_panel = n;
        }
        if let Some(p) = self.quad_panels {
            s.panels = p;
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichWave {
    Incident,
    Reflected,
    Transmitted,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanKindArg {
    Fig1,
    Fig3,
    Fig4,
    CriticalLinearity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Above,
    Below,
    Critical,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the 1D incident, reflected or transmitted packet.
    Packet1d {
        #[arg(long)]
        kw0: f64,
        #[arg(long, default_value_t = 0.0)]
        k0w0: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 4096)]
        grid_points: usize,
        #[arg(long, value_enum, default_value = "all")]
        which: WhichWave,
    },
    /// Run a sweep comparing measured and predicted shifts.
    Scan {
        #[arg(long, value_enum)]
        kind: ScanKindArg,
        #[arg(long, default_value_t = 500.0)]
        kw0: f64,
        /// Critical angle for fig3 (`45deg`, radians, or `atan(x)`).
        #[arg(long, value_parser = parse_angle, default_value = "atan(1)")]
        theta_c: f64,
        /// √(V0/E) for fig4.
        #[arg(long, default_value_t = 1.3)]
        sqrt_v0_over_e: f64,
        /// Comma-separated abscissae replacing the default sweep.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sweep: Vec<f64>,
        /// Comma-separated τ or ζ values.
        #[arg(long, value_delimiter = ',')]
        evolution: Vec<f64>,
    },
    /// Closed-form shift predictions.
    Predict {
        #[arg(long, default_value_t = 500.0)]
        kw0: f64,
        #[arg(long)]
        k0w0: Option<f64>,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, value_parser = parse_angle)]
        theta: Option<f64>,
        #[arg(long, value_parser = parse_angle)]
        theta_c: Option<f64>,
        /// V0/E.
        #[arg(long)]
        ratio_v_over_e: Option<f64>,
        #[arg(long)]
        sqrt_v0_over_e: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
        /// Append the optical counterpart.
        #[arg(long)]
        optical: bool,
    },
    /// Mean shift at critical incidence, in 1D (`--k0w0`) or 3D (`--theta-c`).
    CriticalMean {
        #[arg(long)]
        k0w0: Option<f64>,
        #[arg(long, default_value_t = 500.0)]
        kw0: f64,
        #[arg(long, value_parser = parse_angle)]
        theta_c: Option<f64>,
        /// Comma-separated τ (1D) or ζ (3D) values.
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        evolution: Vec<f64>,
    },
    /// Translate the step into refractive-index language.
    Optical {
        /// V0/E.
        #[arg(long)]
        ratio_v_over_e: Option<f64>,
        #[arg(long, value_parser = parse_angle)]
        theta_c: Option<f64>,
        #[arg(long, value_parser = parse_angle, default_value = "45deg")]
        theta: f64,
    },
}

/// Parses `45deg`, bare radians, or `atan(x)`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Some(deg) = t.strip_suffix("deg") {
        return deg
            .trim()
            .parse::<f64>()
            .map(f64::to_radians)
            .map_err(|e| format!("bad angle `{s}`: {e}"));
    }
    if let Some(arg) = t.strip_prefix("atan(").and_then(|r| r.strip_suffix(')')) {
        return arg
            .trim()
            .parse::<f64>()
            .map(f64::atan)
            .map_err(|e| format!("bad angle `{s}`: {e}"));
    }
    t.parse::<f64>().map_err(|e| format!("bad angle `{s}`: {e}"))
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Str(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

/// 17 significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => {
                Value::Number(Number::from_str(&format_number(*v)).expect("formatted float"))
            }
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Str(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord {
    pub schema_version: &'static str,
    pub command: &'static str,
    pub parameters: Vec<(String, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
}

impl OutputRecord {
    fn new(command: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command,
            parameters: Vec::new(),
            columns,
            rows: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Cell>) {
        self.parameters.push((key.to_string(), value.into()));
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "# schema_version={}", self.schema_version).unwrap();
        writeln!(out, "# command={}", self.command).unwrap();
        for (k, v) in &self.parameters {
            writeln!(out, "# {k}={}", v.to_csv()).unwrap();
        }
        for w in &self.warnings {
            writeln!(out, "# warning: {}", w.replace('\n', " ")).unwrap();
        }
        let mut writer = csv::WriterBuilder::new().from_writer(out);
        writer.write_record(&self.columns).unwrap();
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::to_csv))
                .unwrap();
        }
        writer.into_inner().expect("in-memory writer")
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut root = Map::new();
        root.insert("schema_version".into(), Value::from(self.schema_version));
        root.insert("command".into(), Value::from(self.command));
        let params: Map<String, Value> = self
            .parameters
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        root.insert("parameters".into(), Value::Object(params));
        root.insert(
            "columns".into(),
            Value::Array(self.columns.iter().map(|c| Value::from(*c)).collect()),
        );
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.to_json()))
                        .collect(),
                )
            })
            .collect();
        root.insert("rows".into(), Value::Array(rows));
        root.insert(
            "warnings".into(),
            Value::Array(self.warnings.iter().map(|w| Value::from(w.as_str())).collect()),
        );
        let mut out = serde_json::to_vec_pretty(&Value::Object(root)).expect("serializable");
        out.push(b'\n');
        out
    }

    pub fn render(&self, format: OutputFormat) -> Vec<u8> {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or combinations; exit code 2.
    Usage(String),
    /// A computation failed; exit code 3.
    Numeric(Error),
    /// Writing the output failed; exit code 1.
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(m) => CliError::Usage(m),
            other => CliError::Numeric(other),
        }
    }
}

fn packet1d(
    common: &CommonArgs,
    kw0: f64,
    k0w0: f64,
    tau: f64,
    grid_points: usize,
    which: WhichWave,
) -> Result<OutputRecord, CliError> {
    if grid_points < 16 {
        return Err(CliError::Usage("--grid-points must be at least 16".into()));
    }
    let spec = PacketSpec::new(kw0, k0w0, tau)?;
    let mut rec = OutputRecord::new(
        "packet1d",
        vec!["wave", "x_over_w0", "intensity", "re", "im"],
    );
    rec.param("kw0", kw0);
    rec.param("k0w0", k0w0);
    rec.param("tau", tau);
    rec.param("grid_points", Cell::Int(grid_points as i64));
    rec.param("regime", spec.regime().as_str());
    let engine = Packet1d::new(spec, common.settings())?;
    let waves: &[Wave] = match which {
        WhichWave::Incident => &[Wave::Incident],
        WhichWave::Reflected => &[Wave::Reflected],
        WhichWave::Transmitted => &[Wave::Transmitted],
        WhichWave::All => &[Wave::Incident, Wave::Reflected, Wave::Transmitted],
    };
    for &wave in waves {
        let window = engine.window(wave)?;
        for s in engine.field_on(wave, window, grid_points)? {
            rec.rows.push(vec![
                wave.as_str().into(),
                s.x_over_w0.into(),
                s.value.norm_sqr().into(),
                s.value.re.into(),
                s.value.im.into(),
            ]);
        }
    }
    Ok(rec)
}

const SCAN_COLUMNS: [&str; 11] = [
    "abscissa",
    "evolution",
    "measured_peak",
    "measured_mean",
    "symmetry_defect",
    "tail_truncated",
    "predicted",
    "prediction_kind",
    "predicted_estimator",
    "in_validity_band",
    "error",
];

#[allow(clippy::too_many_arguments)]
fn scan(
    common: &CommonArgs,
    kind: ScanKindArg,
    kw0: f64,
    theta_c: f64,
    sqrt_v0_over_e: f64,
    sweep: &[f64],
    evolution: &[f64],
) -> Result<OutputRecord, CliError> {
    let mut config = match kind {
        ScanKindArg::Fig1 => ScanConfig::fig1(kw0),
        ScanKindArg::Fig3 => ScanConfig::fig3(kw0, theta_c),
        ScanKindArg::Fig4 => ScanConfig::fig4(kw0, sqrt_v0_over_e),
        ScanKindArg::CriticalLinearity => ScanConfig::critical_linearity(kw0),
    };
    if !sweep.is_empty() {
        config.sweep = sweep.to_vec();
    }
    if !evolution.is_empty() {
        config.evolution_values = evolution.to_vec();
    }
    config.settings = common.settings();
    config.validate()?;

    let mut rec = OutputRecord::new("scan", SCAN_COLUMNS.to_vec());
    rec.param("kind", config.kind.as_str());
    rec.param("kw0", kw0);
    match config.kind {
        ScanKind::BeamAboveBarrier { theta_c } => rec.param("theta_c_rad", theta_c),
        ScanKind::BeamBelowBarrier { sqrt_v0_over_e } => {
            rec.param("sqrt_v0_over_e", sqrt_v0_over_e)
        }
        _ => {}
    }
    rec.param("abscissa", config.kind.abscissa_name());
    rec.param("evolution", config.kind.evolution_name());
    let band = experiments::validity_band(&config.kind, kw0);
    rec.param("excluded_band_lo", band.lo);
    rec.param("excluded_band_hi", band.hi);
    rec.param("quad_panels", Cell::Int(config.settings.panels as i64));
    rec.param("quad_nodes", Cell::Int(config.settings.nodes_per_panel as i64));

    for row in experiments::run_scan(&config)? {
        rec.rows.push(vec![
            row.abscissa.into(),
            row.evolution.into(),
            row.measured_peak.into(),
            row.measured_mean.into(),
            row.symmetry_defect.into(),
            row.tail_truncated.into(),
            row.predicted.into(),
            row.prediction_kind.map_or(Cell::Empty, |k| k.as_str().into()),
            row.predicted_estimator()
                .map_or(Cell::Empty, |e| e.as_str().into()),
            row.in_validity_band.into(),
            row.error.clone().map_or(Cell::Empty, Cell::Str),
        ]);
    }
    Ok(rec)
}

const PREDICT_COLUMNS: [&str; 4] = ["section", "kind", "quantity", "value"];

fn push_prediction(rec: &mut OutputRecord, p: &ShiftPrediction, t: f64) {
    let kind = p.kind.as_str();
    let mut push = |q: &str, v: Cell| {
        rec.rows.push(vec!["prediction".into(), kind.into(), q.into(), v]);
    };
    match p.value {
        ShiftValue::Constant(v) => push("shift", v.into()),
        ShiftValue::Slope(s) => {
            push(&format!("slope_per_{}", p.kind.evolution()), s.into());
            push("shift", p.at(t).into());
        }
        ShiftValue::Affine { slope, intercept } => {
            push(&format!("slope_per_{}", p.kind.evolution()), slope.into());
            push("intercept", intercept.into());
            push("shift", p.at(t).into());
        }
    }
    push("estimator", if p.kind.is_mean() { "mean" } else { "peak" }.into());
    push("validity_lo", p.validity.lo.into());
    push("validity_hi", p.validity.hi.into());
    for (name, v) in &p.aux {
        push(name, (*v).into());
    }
}

fn record_outcome(
    rec: &mut OutputRecord,
    outcome: crate::error::Result<ShiftPrediction>,
    t: f64,
) -> bool {
    match outcome {
        Ok(p) => {
            push_prediction(rec, &p, t);
            true
        }
        Err(e @ (Error::Validity { .. } | Error::SingularExpansion(_))) => {
            rec.warnings.push(e.to_string());
            rec.rows.push(vec![
                "warning".into(),
                "validity".into(),
                "message".into(),
                e.to_string().into(),
            ]);
            false
        }
        Err(e) => {
            rec.warnings.push(e.to_string());
            false
        }
    }
}

fn v0_over_e_from(
    theta_c: Option<f64>,
    ratio: Option<f64>,
    sqrt_ratio: Option<f64>,
) -> Result<Option<f64>, CliError> {
    let given = [theta_c.is_some(), ratio.is_some(), sqrt_ratio.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given > 1 {
        return Err(CliError::Usage(
            "give only one of --theta-c, --ratio-v-over-e, --sqrt-v0-over-e".into(),
        ));
    }
    Ok(theta_c
        .map(|t| t.cos() * t.cos())
        .or(ratio)
        .or(sqrt_ratio.map(|s| s * s)))
}

fn push_optical(rec: &mut OutputRecord, v0_over_e: f64, theta: Option<f64>) -> Result<(), CliError> {
    let beam = BeamSpec3D::new(1.0, v0_over_e, theta.unwrap_or(std::f64::consts::FRAC_PI_4), 0.0)?;
    let o = analytic::optical_translate(&beam)?;
    let mut push = |q: &str, v: Cell| {
        rec.rows.push(vec!["optical".into(), "translation".into(), q.into(), v]);
    };
    push("n_squared", o.n_squared.into());
    match o.index {
        RefractiveIndex::Real(n) => {
            push("index_kind", "real".into());
            push("n", n.into());
        }
        RefractiveIndex::Imaginary(k) => {
            push("index_kind", "imaginary".into());
            push("n_over_i", k.into());
        }
    }
    push("theta_c_optical_rad", o.theta_c_optical.into());
    if theta.is_some() {
        push("alpha_te_re", o.alpha_te.re.into());
        push("alpha_te_im", o.alpha_te.im.into());
        push("alpha_tm_re", o.alpha_tm.re.into());
        push("alpha_tm_im", o.alpha_tm.im.into());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn predict(
    kw0: f64,
    k0w0: Option<f64>,
    regime: Option<RegimeArg>,
    tau: f64,
    theta: Option<f64>,
    theta_c: Option<f64>,
    ratio: Option<f64>,
    sqrt_ratio: Option<f64>,
    zeta: f64,
    optical: bool,
) -> Result<OutputRecord, CliError> {
    let mut rec = OutputRecord::new("predict", PREDICT_COLUMNS.to_vec());
    rec.param("kw0", kw0);
    let v0_over_e = v0_over_e_from(theta_c, ratio, sqrt_ratio)?;

    if let Some(k0w0) = k0w0 {
        if theta.is_some() || v0_over_e.is_some() {
            return Err(CliError::Usage(
                "--k0w0 selects the 1D step; do not combine it with beam angles or ratios".into(),
            ));
        }
        let spec = PacketSpec::new(kw0, k0w0, tau)?;
        rec.param("k0w0", k0w0);
        rec.param("tau", tau);
        rec.param("regime", spec.regime().as_str());
        let regime = match regime {
            Some(RegimeArg::Above) => Regime::Above,
            Some(RegimeArg::Below) => Regime::Below,
            Some(RegimeArg::Critical) => Regime::Critical,
            None => spec.regime(),
        };
        if regime != spec.regime() {
            rec.warnings.push(format!(
                "--regime {} disagrees with k·w0 = {kw0}, k0·w0 = {k0w0} ({})",
                regime.as_str(),
                spec.regime().as_str()
            ));
        }
        let outcome = match regime {
            Regime::Above => analytic::shift_velocity_change(&spec),
            Regime::Below => analytic::shift_delay_time(&spec),
            Regime::Critical => analytic::critical_mean_for(&spec),
        };
        let ok = record_outcome(&mut rec, outcome, tau);
        if !ok && regime != Regime::Critical {
            record_outcome(&mut rec, analytic::critical_mean_for(&spec), tau);
        }
        if optical {
            push_optical(&mut rec, (k0w0 / kw0).powi(2), theta)?;
        }
        return Ok(rec);
    }

    let Some(v0_over_e) = v0_over_e else {
        return Err(CliError::Usage(
            "give --k0w0 for the 1D step, or one of --theta-c, --ratio-v-over-e, --sqrt-v0-over-e"
                .into(),
        ));
    };
    rec.param("v0_over_e", v0_over_e);
    if let Some(theta) = theta {
        let beam = BeamSpec3D::new(kw0, v0_over_e, theta, zeta)?;
        rec.param("theta_rad", theta);
        rec.param("zeta", zeta);
        if let Some(tc) = beam.critical_angle() {
            rec.param("theta_c_rad", tc);
            let primary = if theta < tc {
                analytic::shift_angular_deviation(&beam)
            } else {
                analytic::shift_goos_hanchen(&beam)
            };
            if !record_outcome(&mut rec, primary, zeta) {
                record_outcome(&mut rec, analytic::critical_mean_3d(&beam), zeta);
            }
        } else {
            record_outcome(&mut rec, analytic::shift_below_barrier_3d(&beam), zeta);
        }
    } else if !optical {
        return Err(CliError::Usage("--theta is required for beam predictions".into()));
    }
    if optical {
        push_optical(&mut rec, v0_over_e, theta)?;
    }
    Ok(rec)
}

fn critical_mean(
    k0w0: Option<f64>,
    kw0: f64,
    theta_c: Option<f64>,
    evolution: &[f64],
) -> Result<OutputRecord, CliError> {
    if evolution.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(CliError::Usage("evolution values must be non-negative".into()));
    }
    let mut rec = OutputRecord::new(
        "critical-mean",
        vec!["evolution", "mean_shift", "slope", "intercept"],
    );
    rec.param("coefficient", analytic::critical_coefficient());
    let predictions: Vec<(f64, ShiftPrediction)> = match (k0w0, theta_c) {
        (Some(k0), None) => {
            rec.param("dimension", "1d");
            rec.param("k0w0", k0);
            evolution
                .iter()
                .map(|&t| analytic::critical_mean_1d(k0, t).map(|p| (t, p)))
                .collect::<crate::error::Result<_>>()?
        }
        (None, Some(tc)) => {
            rec.param("dimension", "3d");
            rec.param("kw0", kw0);
            rec.param("theta_c_rad", tc);
            evolution
                .iter()
                .map(|&z| {
                    let beam = BeamSpec3D::from_critical_angle(kw0, tc, tc, z)?;
                    analytic::critical_mean_3d(&beam).map(|p| (z, p))
                })
                .collect::<crate::error::Result<_>>()?
        }
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --k0w0 (1D) or --theta-c (3D)".into(),
            ))
        }
    };
    for (t, p) in predictions {
        let (slope, intercept) = match p.value {
            ShiftValue::Affine { slope, intercept } => (slope, intercept),
            _ => unreachable!("critical means are affine"),
        };
        rec.rows
            .push(vec![t.into(), p.at(t).into(), slope.into(), intercept.into()]);
    }
    Ok(rec)
}

fn optical_cmd(
    ratio: Option<f64>,
    theta_c: Option<f64>,
    theta: f64,
) -> Result<OutputRecord, CliError> {
    let v0_over_e = v0_over_e_from(theta_c, ratio, None)?
        .ok_or_else(|| CliError::Usage("give --ratio-v-over-e or --theta-c".into()))?;
    let beam = BeamSpec3D::new(1.0, v0_over_e, theta, 0.0)?;
    let o = analytic::optical_translate(&beam)?;
    let mut rec = OutputRecord::new(
        "optical",
        vec![
            "v0_over_e",
            "theta_rad",
            "n_squared",
            "index_kind",
            "index",
            "theta_c_optical_rad",
            "alpha_te_re",
            "alpha_te_im",
            "alpha_tm_re",
            "alpha_tm_im",
        ],
    );
    rec.param("v0_over_e", v0_over_e);
    rec.param("theta_rad", theta);
    let (kind, value) = match o.index {
        RefractiveIndex::Real(n) => ("real", n),
        RefractiveIndex::Imaginary(k) => ("imaginary", k),
    };
    rec.rows.push(vec![
        v0_over_e.into(),
        theta.into(),
        o.n_squared.into(),
        kind.into(),
        value.into(),
        o.theta_c_optical.into(),
        o.alpha_te.re.into(),
        o.alpha_te.im.into(),
        o.alpha_tm.re.into(),
        o.alpha_tm.im.into(),
    ]);
    Ok(rec)
}

/// Executes a parsed command and returns its record.
pub fn execute(cli: &Cli) -> Result<OutputRecord, CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::Packet1d {
            kw0,
            k0w0,
            tau,
            grid_points,
            which,
        } => packet1d(common, *kw0, *k0w0, *tau, *grid_points, *which),
        Command::Scan {
            kind,
            kw0,
            theta_c,
            sqrt_v0_over_e,
            sweep,
            evolution,
        } => scan(common, *kind, *kw0, *theta_c, *sqrt_v0_over_e, sweep, evolution),
        Command::Predict {
            kw0,
            k0w0,
            regime,
            tau,
            theta,
            theta_c,
            ratio_v_over_e,
            sqrt_v0_over_e,
            zeta,
            optical,
        } => predict(
            *kw0,
            *k0w0,
            *regime,
            *tau,
            *theta,
            *theta_c,
            *ratio_v_over_e,
            *sqrt_v0_over_e,
            *zeta,
            *optical,
        ),
        Command::CriticalMean {
            k0w0,
            kw0,
            theta_c,
            evolution,
        } => critical_mean(*k0w0, *kw0, *theta_c, evolution),
        Command::Optical {
            ratio_v_over_e,
            theta_c,
            theta,
        } => optical_cmd(*ratio_v_over_e, *theta_c, *theta),
    }
}

/// Parses `args` (including the program name) and renders the output
/// bytes without touching the filesystem.
pub fn run<I, T>(args: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(execute(&cli)?.render(cli.common.output))
}

/// Process entry point: parses, runs, writes, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    if let Some(n) = std::env::var("GHSHIFT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if the global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|rec| {
        let bytes = rec.render(cli.common.output);
        for w in &rec.warnings {
            eprintln!("warning: {w}");
        }
        match &cli.common.out_file {
            Some(path) => std::fs::write(path, bytes).map_err(CliError::Io),
            None => std::io::stdout().write_all(&bytes).map_err(CliError::Io),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ghshift: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(args: &[&str]) -> String {
        String::from_utf8(run(args.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn angles() {
        assert!((parse_angle("45deg").unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-16);
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("atan(2)").unwrap(), 2f64.atan());
        assert!(parse_angle("fortyfive").is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(0.01), "1.0000000000000000e-2");
        let v = 0.1 + 0.2;
        assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn predict_velocity_slope() {
        let out = text(&["ghshift", "predict", "--kw0", "500", "--k0w0", "300", "--regime", "above"]);
        assert!(out.contains("prediction,velocity_change,slope_per_tau,1.0000000000000000e-2"));
        assert!(out.starts_with("# schema_version=1\n"));
    }

    #[test]
    fn predict_goos_hanchen() {
        let out = text(&["ghshift", "predict", "--theta-c", "45deg", "--theta", "60deg", "--kw0", "500"]);
        let hand = 2.0 * 60f64.to_radians().sin() / (500.0 * (0.75f64 - 0.5).sqrt());
        let line = out.lines().find(|l| l.starts_with("prediction,goos_hanchen,shift,")).unwrap();
        let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((v - hand).abs() < 1e-15);
    }

    #[test]
    fn predict_optical_below_barrier() {
        let out = text(&["ghshift", "predict", "--ratio-v-over-e", "2", "--optical"]);
        assert!(out.contains("optical,translation,index_kind,imaginary"));
    }

    #[test]
    fn validity_violation_is_a_warning() {
        let out = text(&["ghshift", "predict", "--kw0", "500", "--k0w0", "499", "--regime", "above"]);
        assert!(out.contains("# warning:"));
        assert!(out.contains("critical_mean_1d"));
    }

    #[test]
    fn json_and_csv_agree() {
        let args = ["ghshift", "critical-mean", "--k0w0", "500"];
        let csv = text(&args);
        let mut j = args.to_vec();
        j.extend(["--output", "json"]);
        let json: Value = serde_json::from_str(&text(&j)).unwrap();
        let first = &json["rows"][0]["mean_shift"];
        let mut data = csv.lines().filter(|l| !l.starts_with('#')).skip(1);
        let csv_value = data.next().unwrap().split(',').nth(1).unwrap();
        assert_eq!(first.to_string(), csv_value);
        assert_eq!(json["schema_version"], "1");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(main_with_args(["ghshift", "predict", "--bogus"]), 2);
        let e = run(["ghshift", "packet1d", "--kw0", "-1", "--tau", "1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = run(["ghshift", "packet1d", "--kw0", "500", "--k0w0", "400", "--tau", "0.001", "--which", "reflected"])
            .unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn packet1d_incident_header() {
        let out = text(&["ghshift", "packet1d", "--kw0", "500", "--tau", "1", "--which", "incident", "--grid-points", "32"]);
        let header = out.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "wave,x_over_w0,intensity,re,im");
        assert_eq!(out.lines().filter(|l| l.starts_with("incident,")).count(), 32);
    }
}
