//! Closed forms: the free packet, the first-order reflected packet, the
//! shift formulas, the critical-incidence mean value and the optical
//! translation.
//!
//! All shifts are reported in units of `w₀`, measured from the geometric
//! centre of the reflected packet (`x = −k w₀ τ` in 1D, `x* = 0` in 3D).
//! Positive values point back toward the step.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::coeffs::{self, branch_sqrt};
use crate::error::{Error, Result};
use crate::params::{BeamSpec3D, PacketSpec, Regime, DEFAULT_CRITICAL_EPS};

/// Free packet `e^{i(kx − k²τ/2)} e^{−(x − kτ)²/(1+2iτ)} / √(1+2iτ)`.
pub fn incident_closed_form(spec: &PacketSpec, x_over_w0: f64) -> Complex64 {
    let k = spec.kw0();
    let tau = spec.tau();
    let d = Complex64::new(1.0, 2.0 * tau);
    let y = x_over_w0 - k * tau;
    Complex64::from_polar(1.0, k * x_over_w0 - 0.5 * k * k * tau) / d.sqrt() * (-(y * y) / d).exp()
}

/// Free beam transverse envelope `e^{−(x² + y²)/(1+2iζ)} / (1+2iζ)`.
pub fn incident_3d_closed_form(x_over_w0: f64, y_over_w0: f64, zeta: f64) -> Complex64 {
    let d = Complex64::new(1.0, 2.0 * zeta);
    (-(x_over_w0 * x_over_w0 + y_over_w0 * y_over_w0) / d).exp() / d
}

/// Envelope correction `ℛ(x, τ) = R(k)(1 + 4i(x + kτ)/(√(k² − k₀²)(1 + 2iτ)))`.
pub fn reflection_factor(spec: &PacketSpec, x_over_w0: f64) -> Result<Complex64> {
    if spec.dispatch_regime(DEFAULT_CRITICAL_EPS) == Regime::Critical {
        return Err(Error::SingularExpansion(format!(
            "k·w0 = {} and k0·w0 = {} coincide; the first-order factor diverges",
            spec.kw0(),
            spec.k0w0()
        )));
    }
    let k = spec.kw0();
    let k0 = spec.k0w0();
    let r = coeffs::reflection_1d(k, k0)?;
    let p = branch_sqrt((k - k0) * (k + k0));
    let y = x_over_w0 + k * spec.tau();
    let correction = Complex64::new(0.0, 4.0 * y) / (p * Complex64::new(1.0, 2.0 * spec.tau()));
    Ok(r * (1.0 + correction))
}

/// First-order reflected packet `ℛ(x, τ) ψ_INC(−x, τ)`.
pub fn reflected_linearized(spec: &PacketSpec, x_over_w0: f64) -> Result<Complex64> {
    let factor = reflection_factor(spec, x_over_w0)?;
    Ok(factor * incident_closed_form(spec, -x_over_w0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    VelocityChange,
    DelayTime,
    CriticalMean1D,
    AngularDeviation,
    GoosHanchen,
    CriticalMean3D,
    BelowBarrier3D,
}

impl ShiftKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftKind::VelocityChange => "velocity_change",
            ShiftKind::DelayTime => "delay_time",
            ShiftKind::CriticalMean1D => "critical_mean_1d",
            ShiftKind::AngularDeviation => "angular_deviation",
            ShiftKind::GoosHanchen => "goos_hanchen",
            ShiftKind::CriticalMean3D => "critical_mean_3d",
            ShiftKind::BelowBarrier3D => "below_barrier_3d",
        }
    }

    /// Whether the prediction refers to the centroid rather than the peak.
    pub fn is_mean(self) -> bool {
        matches!(self, ShiftKind::CriticalMean1D | ShiftKind::CriticalMean3D)
    }

    /// Name of the evolution parameter: `tau` in 1D, `zeta` in 3D.
    pub fn evolution(self) -> &'static str {
        match self {
            ShiftKind::VelocityChange | ShiftKind::DelayTime | ShiftKind::CriticalMean1D => "tau",
            _ => "zeta",
        }
    }
}

/// Dependence of a shift on the evolution parameter `t` (`τ` or `ζ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShiftValue {
    Constant(f64),
    Slope(f64),
    Affine { slope: f64, intercept: f64 },
}

impl ShiftValue {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            ShiftValue::Constant(v) => v,
            ShiftValue::Slope(s) => s * t,
            ShiftValue::Affine { slope, intercept } => intercept + slope * t,
        }
    }
}

/// Region in which a formula was derived, stated as an interval of the
/// controlling parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityRegion {
    pub parameter: &'static str,
    pub lo: f64,
    pub hi: f64,
}

impl ValidityRegion {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPrediction {
    pub kind: ShiftKind,
    pub value: ShiftValue,
    pub validity: ValidityRegion,
    /// Derived quantities (effective wave number, delay, reflection angle).
    pub aux: Vec<(&'static str, f64)>,
}

impl ShiftPrediction {
    pub fn at(&self, t: f64) -> f64 {
        self.value.at(t)
    }

    pub fn aux(&self, name: &str) -> Option<f64> {
        self.aux.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }
}

/// Relative slack on the 1D band edge, so that a ratio recovered from
/// `k₀w₀` after rounding still lands on the side it was requested on.
const BAND_EDGE_SLACK: f64 = 1e-12;

fn inside_band_1d(r: f64, band: f64) -> bool {
    r.abs() < band * (1.0 - BAND_EDGE_SLACK)
}

/// Half-width of the excluded band around `k = k₀` in `(V₀ − E)/E`.
pub fn band_1d(kw0: f64) -> f64 {
    10.0 / kw0
}

/// Half-width in radians of the excluded band around `θ_C`.
pub fn band_3d(beam: &BeamSpec3D) -> Option<f64> {
    coeffs::critical_angle_band(beam)
}

fn violation(formula: &'static str, reason: String) -> Error {
    Error::Validity { formula, reason }
}

/// Time-dependent shift above the step: slope `4/√(k² − k₀²)` per `τ`.
pub fn shift_velocity_change(spec: &PacketSpec) -> Result<ShiftPrediction> {
    const NAME: &str = "velocity-change shift";
    let k = spec.kw0();
    let r = spec.potential_ratio();
    let band = band_1d(k);
    if spec.regime() != Regime::Above || r > 0.0 || inside_band_1d(r, band) {
        return Err(violation(
            NAME,
            format!("needs (E - V0)/E >= {band:.6}, got {:.6}", -r),
        ));
    }
    let p = ((k - spec.k0w0()) * (k + spec.k0w0())).sqrt();
    let slope = 4.0 / p;
    Ok(ShiftPrediction {
        kind: ShiftKind::VelocityChange,
        value: ShiftValue::Slope(slope),
        validity: ValidityRegion {
            parameter: "(E-V0)/E",
            lo: band,
            hi: 1.0,
        },
        aux: vec![
            ("k_eff_w0", k - 4.0 / p),
            ("velocity_ratio", 1.0 - 4.0 / (p * k)),
        ],
    })
}

/// Constant shift below the step `2/√(k₀² − k²)`, with the adimensional
/// delay `τ₀ = 2/(k w₀ √(k₀² − k²) w₀)`.
pub fn shift_delay_time(spec: &PacketSpec) -> Result<ShiftPrediction> {
    const NAME: &str = "delay-time shift";
    let k = spec.kw0();
    let r = spec.potential_ratio();
    let band = band_1d(k);
    if spec.regime() != Regime::Below || r < 0.0 || inside_band_1d(r, band) {
        return Err(violation(
            NAME,
            format!("needs (V0 - E)/E >= {band:.6}, got {r:.6}"),
        ));
    }
    let kappa = ((spec.k0w0() - k) * (spec.k0w0() + k)).sqrt();
    Ok(ShiftPrediction {
        kind: ShiftKind::DelayTime,
        value: ShiftValue::Constant(2.0 / kappa),
        validity: ValidityRegion {
            parameter: "(V0-E)/E",
            lo: band,
            hi: f64::INFINITY,
        },
        aux: vec![("tau_delay", 2.0 / (k * kappa))],
    })
}

/// `2^{5/4} Γ(5/4) / √π`.
pub fn critical_coefficient() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        2f64.powf(1.25) * statrs::function::gamma::gamma(1.25) / std::f64::consts::PI.sqrt()
    })
}

fn critical_affine(scale: f64) -> ShiftValue {
    ShiftValue::Affine {
        slope: 2.0 * scale,
        intercept: scale,
    }
}

/// Mean shift at `k = k₀`: `C/√(k₀w₀) (2τ + 1)`, `C` from
/// [`critical_coefficient`]. The returned value is the whole affine law;
/// `tau` is checked and recorded.
pub fn critical_mean_1d(k0w0: f64, tau: f64) -> Result<ShiftPrediction> {
    if !(k0w0 > 0.0 && k0w0.is_finite()) {
        return Err(Error::Domain(format!("k0·w0 must be positive, got {k0w0}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be non-negative, got {tau}")));
    }
    let band = band_1d(k0w0);
    Ok(ShiftPrediction {
        kind: ShiftKind::CriticalMean1D,
        value: critical_affine(critical_coefficient() / k0w0.sqrt()),
        validity: ValidityRegion {
            parameter: "(V0-E)/E",
            lo: -band,
            hi: band,
        },
        aux: vec![("tau", tau), ("mean_shift", critical_affine(critical_coefficient() / k0w0.sqrt()).at(tau))],
    })
}

/// [`critical_mean_1d`] for a packet, which must sit inside the band
/// around `k = k₀` where the first-order formulas fail.
pub fn critical_mean_for(spec: &PacketSpec) -> Result<ShiftPrediction> {
    let band = band_1d(spec.kw0());
    let r = spec.potential_ratio();
    if !inside_band_1d(r, band) {
        return Err(violation(
            "critical mean value",
            format!("|(V0 - E)/E| = {:.6} lies outside the critical band {band:.6}", r.abs()),
        ));
    }
    critical_mean_1d(spec.k0w0(), spec.tau())
}

fn sin2_critical(beam: &BeamSpec3D) -> Option<f64> {
    let e = beam.energy_excess();
    (e > 0.0).then_some(e)
}

fn outside_angle_band(beam: &BeamSpec3D, formula: &'static str) -> Result<f64> {
    let theta_c = beam.critical_angle().ok_or_else(|| {
        violation(formula, format!("needs E > V0, got V0/E = {}", beam.v0_over_e()))
    })?;
    let band = band_3d(beam).expect("critical angle exists");
    if (beam.theta() - theta_c).abs() < band {
        return Err(violation(
            formula,
            format!(
                "theta = {:.6} rad is within {band:.3e} rad of theta_C = {theta_c:.6} rad",
                beam.theta()
            ),
        ));
    }
    Ok(theta_c)
}

/// Angular deviation below the critical angle: `x*` slope
/// `4 sinθ/(k w₀ √(sin²θ_C − sin²θ))` per `ζ`.
pub fn shift_angular_deviation(beam: &BeamSpec3D) -> Result<ShiftPrediction> {
    const NAME: &str = "angular deviation";
    let theta_c = outside_angle_band(beam, NAME)?;
    let theta = beam.theta();
    if theta > theta_c {
        return Err(violation(NAME, format!("needs theta < theta_C = {theta_c:.6}")));
    }
    let k = beam.kw0();
    let s = theta.sin();
    let slope = 4.0 * s / (k * (sin2_critical(beam).unwrap() - s * s).sqrt());
    let band = band_3d(beam).unwrap();
    Ok(ShiftPrediction {
        kind: ShiftKind::AngularDeviation,
        value: ShiftValue::Slope(slope),
        validity: ValidityRegion {
            parameter: "theta",
            lo: 0.0,
            hi: theta_c - band,
        },
        aux: vec![("theta_ref", theta + slope / k)],
    })
}

/// Goos-Hänchen offset above the critical angle:
/// `2 sinθ/(k w₀ √(sin²θ − sin²θ_C))`.
pub fn shift_goos_hanchen(beam: &BeamSpec3D) -> Result<ShiftPrediction> {
    const NAME: &str = "Goos-Hanchen shift";
    let theta_c = outside_angle_band(beam, NAME)?;
    let theta = beam.theta();
    if theta < theta_c {
        return Err(violation(NAME, format!("needs theta > theta_C = {theta_c:.6}")));
    }
    let s = theta.sin();
    let value = 2.0 * s / (beam.kw0() * (s * s - sin2_critical(beam).unwrap()).sqrt());
    Ok(ShiftPrediction {
        kind: ShiftKind::GoosHanchen,
        value: ShiftValue::Constant(value),
        validity: ValidityRegion {
            parameter: "theta",
            lo: theta_c + band_3d(beam).unwrap(),
            hi: std::f64::consts::FRAC_PI_2,
        },
        aux: vec![],
    })
}

/// Mean `x*` at critical incidence: `√(tanθ_C) C/√(k w₀) (2ζ + 1)`.
pub fn critical_mean_3d(beam: &BeamSpec3D) -> Result<ShiftPrediction> {
    const NAME: &str = "critical mean value (3D)";
    let theta_c = beam.critical_angle().ok_or_else(|| {
        violation(NAME, format!("needs E > V0, got V0/E = {}", beam.v0_over_e()))
    })?;
    let band = band_3d(beam).unwrap();
    if (beam.theta() - theta_c).abs() >= band {
        return Err(violation(
            NAME,
            format!(
                "theta = {:.6} rad is outside the critical band theta_C ± {band:.3e}",
                beam.theta()
            ),
        ));
    }
    let scale = theta_c.tan().sqrt() * critical_coefficient() / beam.kw0().sqrt();
    Ok(ShiftPrediction {
        kind: ShiftKind::CriticalMean3D,
        value: critical_affine(scale),
        validity: ValidityRegion {
            parameter: "theta",
            lo: theta_c - band,
            hi: theta_c + band,
        },
        aux: vec![("zeta", beam.zeta()), ("mean_shift", critical_affine(scale).at(beam.zeta()))],
    })
}

/// Offset below the barrier, any angle:
/// `2 sinθ/(k w₀ √((V₀ − E)/E + sin²θ))`.
pub fn shift_below_barrier_3d(beam: &BeamSpec3D) -> Result<ShiftPrediction> {
    if beam.above_barrier() || beam.v0_over_e() == 1.0 {
        return Err(violation(
            "below-barrier shift",
            format!("needs E < V0, got V0/E = {}", beam.v0_over_e()),
        ));
    }
    let s = beam.theta().sin();
    let excess = beam.v0_over_e() - 1.0;
    Ok(ShiftPrediction {
        kind: ShiftKind::BelowBarrier3D,
        value: ShiftValue::Constant(2.0 * s / (beam.kw0() * (excess + s * s).sqrt())),
        validity: ValidityRegion {
            parameter: "theta",
            lo: 0.0,
            hi: std::f64::consts::FRAC_PI_2,
        },
        aux: vec![],
    })
}

/// Refractive index of the optical counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RefractiveIndex {
    Real(f64),
    /// `n = iκ`, carrying `κ`.
    Imaginary(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalEquivalent {
    pub index: RefractiveIndex,
    pub n_squared: f64,
    /// `arcsin(1/n)`, when total internal reflection exists.
    pub theta_c_optical: Option<f64>,
    pub alpha_te: Complex64,
    pub alpha_tm: Complex64,
}

/// Maps the step onto a dielectric interface with `n² = E/(E − V₀)` and
/// returns the first-order TE/TM coefficients `α^TE = 2 tanφ`,
/// `α^TM = 2 tanφ/(n² sin²θ − cos²θ)`, with `sinφ = n sinθ`.
///
/// Below the barrier `n = iκ`, and `α^TE` is the complex conjugate of
/// `k w₀` times the linear coefficient of
/// [`coeffs::reflection_3d_linearized`]; above it they are equal.
pub fn optical_translate(beam: &BeamSpec3D) -> Result<OpticalEquivalent> {
    let excess = beam.energy_excess();
    if excess == 0.0 {
        return Err(Error::SingularExpansion(
            "E = V0 has no refractive-index counterpart".into(),
        ));
    }
    let n2 = 1.0 / excess;
    let (index, n) = if n2 > 0.0 {
        let n = n2.sqrt();
        (RefractiveIndex::Real(n), Complex64::new(n, 0.0))
    } else {
        let kappa = (-n2).sqrt();
        (RefractiveIndex::Imaginary(kappa), Complex64::new(0.0, kappa))
    };
    let theta_c_optical = match index {
        RefractiveIndex::Real(n) if n >= 1.0 => Some((1.0 / n).asin()),
        _ => None,
    };
    let (s, c) = beam.theta().sin_cos();
    let sin_phi = n * s;
    let cos_phi = branch_sqrt(1.0 - n2 * s * s);
    let alpha_te = 2.0 * sin_phi / cos_phi;
    let alpha_tm = alpha_te / (n2 * s * s - c * c);
    Ok(OpticalEquivalent {
        index,
        n_squared: n2,
        theta_c_optical,
        alpha_te,
        alpha_tm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::reflection_3d_linearized;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    /// `∫₀^∞ e^{−α²/2}(4α^{3/2}τ + α^{−1/2}) dα / √π` by Simpson after
    /// `α = t²`, which removes the endpoint singularity.
    fn mean_integral(tau: f64) -> f64 {
        let n = 40_000;
        let hi = 6.0;
        let h = hi / n as f64;
        let f = |t: f64| {
            let t4 = t.powi(4);
            (-0.5 * t4).exp() * (8.0 * tau * t4 + 2.0)
        };
        let mut sum = f(0.0) + f(hi);
        for i in 1..n {
            let t = h * i as f64;
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
        }
        sum * h / 3.0 / PI.sqrt()
    }

    #[test]
    fn critical_coefficient_against_integral() {
        let c = critical_coefficient();
        assert!((mean_integral(0.0) - c).abs() < 1e-10);
        // Slope term: twice the intercept.
        assert!((mean_integral(1.0) - 3.0 * c).abs() < 1e-10);
        let g14 = statrs::function::gamma::gamma(0.25);
        assert!((g14 - 4.0 * statrs::function::gamma::gamma(1.25)).abs() < 1e-13);
        assert!((c / 500f64.sqrt() - 0.0544).abs() < 1e-4);
    }

    #[test]
    fn critical_mean_is_affine() {
        let p = critical_mean_1d(500.0, 1.0).unwrap();
        assert!((p.at(2.0) / p.at(1.0) - 5.0 / 3.0).abs() <= f64::EPSILON);
        match p.value {
            ShiftValue::Affine { slope, intercept } => assert_eq!(slope / intercept, 2.0),
            _ => panic!("critical mean must be affine"),
        }
    }

    #[test]
    fn closed_form_peak_and_spreading() {
        let spec = PacketSpec::new(500.0, 0.0, 0.0).unwrap();
        assert!((incident_closed_form(&spec, 0.0).norm() - 1.0).abs() < 1e-15);
        let spec = PacketSpec::new(500.0, 0.0, 1.0).unwrap();
        for x in [498.0, 500.0, 501.5] {
            let m2 = incident_closed_form(&spec, x).norm_sqr();
            let expected = (-2.0 * (x - 500.0f64).powi(2) / 5.0).exp() / 5f64.sqrt();
            assert!((m2 - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn linearized_reflection_at_centre_and_without_step() {
        let spec = PacketSpec::new(500.0, 300.0, 1.0).unwrap();
        let x = -500.0;
        let got = reflected_linearized(&spec, x).unwrap();
        let expected = coeffs::reflection_1d(500.0, 300.0).unwrap() * incident_closed_form(&spec, 500.0);
        assert_eq!(got, expected);
        let free = PacketSpec::new(500.0, 0.0, 1.0).unwrap();
        assert_eq!(reflected_linearized(&free, -499.0).unwrap(), Complex64::new(0.0, 0.0));
        let crit = PacketSpec::new(500.0, 500.0, 1.0).unwrap();
        assert!(matches!(reflected_linearized(&crit, -500.0), Err(Error::SingularExpansion(_))));
    }

    #[test]
    fn velocity_change_values() {
        let spec = PacketSpec::new(500.0, 300.0, 1.0).unwrap();
        let p = shift_velocity_change(&spec).unwrap();
        assert_eq!(p.value, ShiftValue::Slope(0.01));
        let far = PacketSpec::new(1000.0, 10.0, 1.0).unwrap();
        let ratio = shift_velocity_change(&far).unwrap().aux("velocity_ratio").unwrap();
        assert!((1.0 - ratio) > 1e-6 && (1.0 - ratio) < 1e-5);
        assert!(shift_velocity_change(&PacketSpec::new(500.0, 600.0, 1.0).unwrap()).is_err());
        // Inside the band.
        let near = PacketSpec::from_potential_ratio(500.0, -0.01, 1.0).unwrap();
        assert!(matches!(shift_velocity_change(&near), Err(Error::Validity { .. })));
    }

    #[test]
    fn near_critical_amplification() {
        // k w0 = k0 w0 + δ/(k w0): 1 − ṽ/v ≈ 4/(√(2δ) k w0).
        let k = 1000.0;
        let delta = 25.0;
        let k0 = k - delta / k;
        let spec = PacketSpec::new(k, k0, 1.0).unwrap();
        let p = ((k - k0) * (k + k0)).sqrt();
        let deficit = 4.0 / (p * k);
        let approx = 4.0 / ((2.0 * delta).sqrt() * k);
        assert!((deficit - approx).abs() < 1e-5 * approx);
        assert!((spec.near_critical_delta() - delta).abs() < 1e-9);
    }

    #[test]
    fn delay_values() {
        let spec = PacketSpec::new(300.0, 500.0, 1.0).unwrap();
        let p = shift_delay_time(&spec).unwrap();
        assert_eq!(p.value, ShiftValue::Constant(2.0 / 400.0));
        assert!((p.aux("tau_delay").unwrap() - 2.0 / (300.0 * 400.0)).abs() < 1e-18);
        // E = V0/2: t0 = 2ħ/V0, i.e. τ0 = 2/(k0 w0)² · 2 = 4/k0².
        let half = PacketSpec::new(500.0, 500.0 * 2f64.sqrt(), 1.0).unwrap();
        let tau0 = shift_delay_time(&half).unwrap().aux("tau_delay").unwrap();
        let k0 = 500.0 * 2f64.sqrt();
        assert!((tau0 - 4.0 / (k0 * k0)).abs() < 1e-15);
    }

    #[test]
    fn angular_deviation_values() {
        let theta_c = FRAC_PI_4;
        let theta = theta_c / 2.0;
        let beam = BeamSpec3D::from_critical_angle(500.0, theta_c, theta, 1.0).unwrap();
        let p = shift_angular_deviation(&beam).unwrap();
        let s = theta.sin();
        let hand = 4.0 * s / (500.0 * (0.5 - s * s).sqrt());
        match p.value {
            ShiftValue::Slope(v) => assert!((v - hand).abs() < 1e-15),
            _ => panic!(),
        }
        let tiny = BeamSpec3D::from_critical_angle(500.0, theta_c, 1e-8, 1.0).unwrap();
        assert!(shift_angular_deviation(&tiny).unwrap().at(1.0).abs() < 1e-9);
        let above = BeamSpec3D::from_critical_angle(500.0, theta_c, 1.2, 1.0).unwrap();
        assert!(shift_angular_deviation(&above).is_err());
    }

    #[test]
    fn goos_hanchen_values() {
        let beam =
            BeamSpec3D::from_critical_angle(500.0, FRAC_PI_4, 60f64.to_radians(), 1.0).unwrap();
        let p = shift_goos_hanchen(&beam).unwrap();
        let hand = 2.0 * 60f64.to_radians().sin() / (500.0 * (0.75f64 - 0.5).sqrt());
        assert!((p.at(7.0) - hand).abs() < 1e-15);
        let grazing = BeamSpec3D::from_critical_angle(500.0, FRAC_PI_4, FRAC_PI_2 - 1e-9, 1.0).unwrap();
        let limit = 2.0 / (500.0 * FRAC_PI_4.cos());
        assert!((shift_goos_hanchen(&grazing).unwrap().at(0.0) - limit).abs() < 1e-9);
    }

    #[test]
    fn critical_3d_ratio_and_reduction() {
        let one = BeamSpec3D::from_critical_angle(500.0, 1f64.atan(), 1f64.atan(), 1.0).unwrap();
        let two = BeamSpec3D::from_critical_angle(500.0, 2f64.atan(), 2f64.atan(), 1.0).unwrap();
        let a = critical_mean_3d(&one).unwrap();
        let b = critical_mean_3d(&two).unwrap();
        assert!((b.at(1.0) / a.at(1.0) - 2f64.sqrt()).abs() < 1e-14);
        let flat = critical_mean_1d(500.0, 0.0).unwrap();
        assert!((a.at(0.0) - flat.at(0.0)).abs() < 1e-15);
        assert!((a.at(0.0) - 0.0544).abs() < 1e-4);
        let off = BeamSpec3D::from_critical_angle(500.0, 1f64.atan(), 0.5, 1.0).unwrap();
        assert!(critical_mean_3d(&off).is_err());
    }

    #[test]
    fn below_barrier_values() {
        let beam = BeamSpec3D::new(500.0, 2.0, FRAC_PI_2 - 1e-12, 1.0).unwrap();
        let v = shift_below_barrier_3d(&beam).unwrap().at(0.0);
        assert!((v - 2.0 / (500.0 * 2f64.sqrt())).abs() < 1e-12);
        let normal = BeamSpec3D::new(500.0, 2.0, 1e-10, 1.0).unwrap();
        assert!(shift_below_barrier_3d(&normal).unwrap().at(0.0) < 1e-12);
        let above = BeamSpec3D::new(500.0, 0.5, 0.3, 1.0).unwrap();
        assert!(shift_below_barrier_3d(&above).is_err());
    }

    #[test]
    fn optical_examples() {
        let free = BeamSpec3D::new(500.0, 0.0, 0.4, 1.0).unwrap();
        let o = optical_translate(&free).unwrap();
        assert_eq!(o.index, RefractiveIndex::Real(1.0));
        assert_eq!(o.theta_c_optical, Some(FRAC_PI_2));
        let half = BeamSpec3D::new(500.0, 0.5, 0.4, 1.0).unwrap();
        let o = optical_translate(&half).unwrap();
        assert!((o.theta_c_optical.unwrap() - FRAC_PI_4).abs() < 1e-15);
        let below = BeamSpec3D::new(500.0, 2.0, 0.4, 1.0).unwrap();
        let o = optical_translate(&below).unwrap();
        assert!(matches!(o.index, RefractiveIndex::Imaginary(_)));
        assert_eq!(o.theta_c_optical, None);
        let at = BeamSpec3D::new(500.0, 1.0, 0.4, 1.0).unwrap();
        assert!(optical_translate(&at).is_err());
    }

    #[test]
    fn optical_te_matches_step_linear_coefficient() {
        for (ratio, theta) in [(0.5, 0.3), (0.5, 1.2), (0.2, 0.9), (1.69, 0.7)] {
            let beam = BeamSpec3D::new(500.0, ratio, theta, 1.0).unwrap();
            let o = optical_translate(&beam).unwrap();
            let lin = reflection_3d_linearized(&beam).unwrap();
            let qm = lin.slope * 500.0;
            let expected = if ratio > 1.0 { qm.conj() } else { qm };
            assert!((o.alpha_te - expected).norm() < 1e-13 * expected.norm(), "{ratio} {theta}");
        }
    }

    proptest! {
        #[test]
        fn translation_reproduces_critical_angle(ratio in 0.0f64..0.999, theta in 0.01f64..1.56) {
            let beam = BeamSpec3D::new(500.0, ratio, theta, 1.0).unwrap();
            let o = optical_translate(&beam).unwrap();
            let direct = beam.critical_angle().unwrap();
            prop_assert!((o.theta_c_optical.unwrap() - direct).abs() < 1e-14);
            let (s, c) = theta.sin_cos();
            let ratio_te_tm = o.alpha_te / o.alpha_tm;
            let denom = o.n_squared * s * s - c * c;
            prop_assert!((ratio_te_tm.re - denom).abs() <= 1e-15 * denom.abs().max(1.0));
        }

        #[test]
        fn shifts_grow_toward_the_branch(k in 500.0f64..1000.0, r1 in 0.02f64..0.2, r2 in 0.02f64..0.2) {
            let (near, far) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assume!(far - near > 1e-9);
            let below = |r| shift_delay_time(&PacketSpec::from_potential_ratio(k, r, 1.0).unwrap()).unwrap().at(1.0);
            let above = |r: f64| shift_velocity_change(&PacketSpec::from_potential_ratio(k, -r, 1.0).unwrap()).unwrap().at(1.0);
            prop_assert!(below(near) > below(far));
            prop_assert!(above(near) > above(far));
        }
    }
}
