//! Parameter sweeps comparing measured reflected-packet shifts with the
//! closed-form predictions.

use rayon::prelude::*;

use crate::analytic::{self, ShiftKind, ShiftPrediction};
use crate::error::{Error, Result};
use crate::params::{BeamSpec3D, PacketSpec};
use crate::stats::{self, LineFit};
use crate::synth::{Beam3d, Packet1d, QuadSettings, Wave};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScanKind {
    /// 1D step; abscissa `(V₀ − E)/E`.
    Step1d,
    /// 3D beam above the barrier; abscissa `θ` in degrees.
    BeamAboveBarrier { theta_c: f64 },
    /// 3D beam below the barrier; abscissa `θ` in degrees.
    BeamBelowBarrier { sqrt_v0_over_e: f64 },
    /// 1D packets inside the critical band; abscissa `(V₀ − E)/E`.
    CriticalLinearity,
}

impl ScanKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScanKind::Step1d => "fig1",
            ScanKind::BeamAboveBarrier { .. } => "fig3",
            ScanKind::BeamBelowBarrier { .. } => "fig4",
            ScanKind::CriticalLinearity => "critical-linearity",
        }
    }

    pub fn abscissa_name(&self) -> &'static str {
        match self {
            ScanKind::Step1d | ScanKind::CriticalLinearity => "v0_minus_e_over_e",
            _ => "theta_deg",
        }
    }

    pub fn evolution_name(&self) -> &'static str {
        match self {
            ScanKind::Step1d | ScanKind::CriticalLinearity => "tau",
            _ => "zeta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    Peak,
    Mean,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Peak => "peak",
            Estimator::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub kind: ScanKind,
    pub kw0: f64,
    pub sweep: Vec<f64>,
    pub evolution_values: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub settings: QuadSettings,
}

pub const DEFAULT_EVOLUTION: [f64; 3] = [0.5, 1.0, 2.0];

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl ScanConfig {
    fn with(kind: ScanKind, kw0: f64, sweep: Vec<f64>) -> Self {
        Self {
            kind,
            kw0,
            sweep,
            evolution_values: DEFAULT_EVOLUTION.to_vec(),
            estimators: vec![Estimator::Peak, Estimator::Mean],
            settings: QuadSettings::default(),
        }
    }

    /// 61 values of `(V₀ − E)/E` spanning `[−0.2, 0.2]`.
    pub fn fig1(kw0: f64) -> Self {
        let sweep = (0..61).map(|i| (i as f64 - 30.0) * 0.2 / 30.0).collect();
        Self::with(ScanKind::Step1d, kw0, sweep)
    }

    /// 61 angles spanning `θ_C ± 15°`.
    pub fn fig3(kw0: f64, theta_c: f64) -> Self {
        let c = theta_c.to_degrees();
        let sweep = (0..61).map(|i| c + (i as f64 - 30.0) * 0.5).collect();
        Self::with(ScanKind::BeamAboveBarrier { theta_c }, kw0, sweep)
    }

    /// 61 angles spanning `[5°, 85°]`.
    pub fn fig4(kw0: f64, sqrt_v0_over_e: f64) -> Self {
        Self::with(
            ScanKind::BeamBelowBarrier { sqrt_v0_over_e },
            kw0,
            linspace(5.0, 85.0, 61),
        )
    }

    /// The packet at `k = k₀`, observed at the default times.
    pub fn critical_linearity(kw0: f64) -> Self {
        Self::with(ScanKind::CriticalLinearity, kw0, vec![0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kw0 > 0.0 && self.kw0.is_finite()) {
            return Err(Error::Domain(format!("k·w0 must be positive, got {}", self.kw0)));
        }
        if self.sweep.is_empty() || self.evolution_values.is_empty() {
            return Err(Error::Domain("sweep and evolution values must be non-empty".into()));
        }
        if self.sweep.iter().any(|v| !v.is_finite()) || self.sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("sweep must be finite and strictly increasing".into()));
        }
        if self.evolution_values.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Domain("evolution values must be positive".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Domain("at least one estimator is required".into()));
        }
        Ok(())
    }
}

/// One `(abscissa, evolution)` measurement. Shifts are in `w₀`, measured
/// from the geometric centre of the reflected packet.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub abscissa: f64,
    pub evolution: f64,
    pub measured_peak: Option<f64>,
    pub measured_mean: Option<f64>,
    pub symmetry_defect: Option<f64>,
    pub tail_truncated: bool,
    pub predicted: Option<f64>,
    pub prediction_kind: Option<ShiftKind>,
    pub in_validity_band: bool,
    pub error: Option<String>,
}

impl ScanRow {
    /// Estimator the prediction refers to.
    pub fn predicted_estimator(&self) -> Option<Estimator> {
        self.prediction_kind.map(|k| {
            if k.is_mean() {
                Estimator::Mean
            } else {
                Estimator::Peak
            }
        })
    }

    /// Measurement matching [`Self::predicted_estimator`].
    pub fn measured(&self) -> Option<f64> {
        match self.predicted_estimator()? {
            Estimator::Peak => self.measured_peak,
            Estimator::Mean => self.measured_mean,
        }
    }

    pub fn relative_error(&self) -> Option<f64> {
        let p = self.predicted?;
        Some((self.measured()? - p).abs() / p.abs())
    }
}

/// The interval of the abscissa excluded from the first-order formulas,
/// in the abscissa's own units. Empty (`lo = hi`) when no band exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcludedBand {
    pub lo: f64,
    pub hi: f64,
}

impl ExcludedBand {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lo && v < self.hi
    }
}

pub fn validity_band(kind: &ScanKind, kw0: f64) -> ExcludedBand {
    match *kind {
        ScanKind::Step1d | ScanKind::CriticalLinearity => {
            let b = analytic::band_1d(kw0);
            ExcludedBand { lo: -b, hi: b }
        }
        ScanKind::BeamAboveBarrier { theta_c } => {
            let b = (10.0 / (kw0 * theta_c.cos())).to_degrees();
            let c = theta_c.to_degrees();
            ExcludedBand { lo: c - b, hi: c + b }
        }
        ScanKind::BeamBelowBarrier { .. } => ExcludedBand { lo: 0.0, hi: 0.0 },
    }
}

struct Measurement {
    peak: Option<f64>,
    mean: Option<f64>,
    defect: Option<f64>,
    tail_truncated: bool,
}

fn measure(
    profile: &crate::synth::BeamProfile,
    origin: f64,
    estimators: &[Estimator],
) -> Result<Measurement> {
    let s = stats::analyze(profile)?;
    Ok(Measurement {
        peak: estimators
            .contains(&Estimator::Peak)
            .then_some(s.peak_x_over_w0 - origin),
        mean: estimators
            .contains(&Estimator::Mean)
            .then_some(s.mean_x_over_w0 - origin),
        defect: Some(s.symmetry_defect),
        tail_truncated: s.tail_truncated,
    })
}

/// First-order prediction when it applies, the critical mean otherwise.
fn predict_1d(spec: &PacketSpec) -> (Option<ShiftPrediction>, bool) {
    let first = if spec.potential_ratio() > 0.0 {
        analytic::shift_delay_time(spec)
    } else {
        analytic::shift_velocity_change(spec)
    };
    match first {
        Ok(p) => (Some(p), true),
        Err(_) => (analytic::critical_mean_1d(spec.k0w0(), spec.tau()).ok(), false),
    }
}

fn predict_3d(kind: &ScanKind, beam: &BeamSpec3D) -> (Option<ShiftPrediction>, bool) {
    match kind {
        ScanKind::BeamBelowBarrier { .. } => (analytic::shift_below_barrier_3d(beam).ok(), true),
        _ => {
            let theta_c = beam.critical_angle().unwrap_or(f64::NAN);
            let first = if beam.theta() < theta_c {
                analytic::shift_angular_deviation(beam)
            } else {
                analytic::shift_goos_hanchen(beam)
            };
            match first {
                Ok(p) => (Some(p), true),
                Err(_) => (analytic::critical_mean_3d(beam).ok(), false),
            }
        }
    }
}

fn attach(row: &mut ScanRow, prediction: (Option<ShiftPrediction>, bool), t: f64) {
    let (p, valid) = prediction;
    row.prediction_kind = p.as_ref().map(|p| p.kind);
    row.predicted = p.as_ref().map(|p| p.at(t));
    row.in_validity_band = valid;
}

fn run_row(config: &ScanConfig, abscissa: f64, t: f64) -> ScanRow {
    let mut row = ScanRow {
        abscissa,
        evolution: t,
        measured_peak: None,
        measured_mean: None,
        symmetry_defect: None,
        tail_truncated: false,
        predicted: None,
        prediction_kind: None,
        in_validity_band: false,
        error: None,
    };
    let measured = (|| -> Result<Measurement> {
        match config.kind {
            ScanKind::Step1d | ScanKind::CriticalLinearity => {
                let spec = PacketSpec::from_potential_ratio(config.kw0, abscissa, t)?;
                attach(&mut row, predict_1d(&spec), t);
                let profile = Packet1d::new(spec, config.settings)?.profile(Wave::Reflected)?;
                measure(&profile, -config.kw0 * t, &config.estimators)
            }
            ScanKind::BeamAboveBarrier { theta_c } => {
                let theta = abscissa.to_radians();
                let beam = BeamSpec3D::from_critical_angle(config.kw0, theta_c, theta, t)?;
                attach(&mut row, predict_3d(&config.kind, &beam), t);
                let profile = Beam3d::new(beam, config.settings)?.profile()?;
                measure(&profile, 0.0, &config.estimators)
            }
            ScanKind::BeamBelowBarrier { sqrt_v0_over_e } => {
                let theta = abscissa.to_radians();
                let beam = BeamSpec3D::from_sqrt_v0_over_e(config.kw0, sqrt_v0_over_e, theta, t)?;
                attach(&mut row, predict_3d(&config.kind, &beam), t);
                let profile = Beam3d::new(beam, config.settings)?.profile()?;
                measure(&profile, 0.0, &config.estimators)
            }
        }
    })();
    match measured {
        Ok(m) => {
            row.measured_peak = m.peak;
            row.measured_mean = m.mean;
            row.symmetry_defect = m.defect;
            row.tail_truncated = m.tail_truncated;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Runs every `(abscissa, evolution)` pair. Rows are evaluated in parallel
/// and returned ordered by abscissa, then evolution. Failures are recorded
/// in the row's `error` field.
pub fn run_scan(config: &ScanConfig) -> Result<Vec<ScanRow>> {
    config.validate()?;
    let mut evolution = config.evolution_values.clone();
    evolution.sort_by(f64::total_cmp);
    evolution.dedup();
    let jobs: Vec<(f64, f64)> = config
        .sweep
        .iter()
        .flat_map(|&a| evolution.iter().map(move |&t| (a, t)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(a, t)| run_row(config, a, t))
        .collect())
}

/// Affine fit of measured means against the evolution parameter.
pub fn critical_linearity_fit(rows: &[ScanRow]) -> Result<LineFit> {
    let (t, m): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| r.measured_mean.map(|m| (r.evolution, m)))
        .unzip();
    stats::fit_line(&t, &m)
}
