//! Plane-wave reflection and transmission coefficients of the step.
//!
//! Branch rule: `√(kx² − k₀²)` is taken as `+i√(k₀² − kx²)` below the step,
//! so the transmitted wave decays into the barrier and `|R| = 1`.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::params::BeamSpec3D;

/// Square root with the decaying branch for negative arguments.
pub fn branch_sqrt(z: f64) -> Complex64 {
    if z >= 0.0 {
        Complex64::new(z.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-z).sqrt())
    }
}

/// Plane-wave coefficients for one normal wave number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepCoefficients {
    pub r: Complex64,
    pub t: Complex64,
    /// Incident wave number normal to the step, times `w₀`.
    pub kz_in: Complex64,
    /// Transmitted wave number normal to the step, times `w₀`.
    pub qz_out: Complex64,
}

impl StepCoefficients {
    pub fn is_evanescent(&self) -> bool {
        self.qz_out.re == 0.0 && self.qz_out.im > 0.0
    }

    /// `|R|² + (q/k)|T|² − 1` for propagating transmission, `|R| − 1` otherwise.
    pub fn flux_defect(&self) -> f64 {
        if self.is_evanescent() {
            self.r.norm() - 1.0
        } else {
            self.r.norm_sqr() + (self.qz_out.re / self.kz_in.re) * self.t.norm_sqr() - 1.0
        }
    }
}

/// Coefficients for normal wave number `kz` against a step of wave number `k0`.
///
/// `kz² − k₀²` values within a few ulps of zero are snapped onto the branch
/// point, which keeps `R = 1` exact at critical incidence.
#[inline]
pub(crate) fn step_raw(kz: f64, k0: f64) -> StepCoefficients {
    let diff = (kz - k0) * (kz + k0);
    let scale = kz * kz + k0 * k0;
    let kz_c = Complex64::new(kz, 0.0);
    if diff.abs() <= 8.0 * f64::EPSILON * scale {
        return StepCoefficients {
            r: Complex64::new(1.0, 0.0),
            t: Complex64::new(2.0, 0.0),
            kz_in: kz_c,
            qz_out: Complex64::new(0.0, 0.0),
        };
    }
    if diff > 0.0 {
        let p = diff.sqrt();
        let s = kz + p;
        // (kz − p)/(kz + p) rewritten to avoid cancellation when k0 ≪ kz.
        StepCoefficients {
            r: Complex64::new(k0 * k0 / (s * s), 0.0),
            t: Complex64::new(2.0 * kz / s, 0.0),
            kz_in: kz_c,
            qz_out: Complex64::new(p, 0.0),
        }
    } else {
        let p = Complex64::new(0.0, (-diff).sqrt());
        let den = kz_c + p;
        StepCoefficients {
            r: (kz_c - p) / den,
            t: Complex64::new(2.0 * kz, 0.0) / den,
            kz_in: kz_c,
            qz_out: p,
        }
    }
}

fn check_1d(kxw0: f64, k0w0: f64) -> Result<()> {
    if !(kxw0.is_finite() && kxw0 > 0.0) {
        return Err(domain(format!("kx·w0 must be positive, got {kxw0}")));
    }
    if !(k0w0.is_finite() && k0w0 >= 0.0) {
        return Err(domain(format!("k0·w0 must be non-negative, got {k0w0}")));
    }
    Ok(())
}

pub fn step_1d(kxw0: f64, k0w0: f64) -> Result<StepCoefficients> {
    check_1d(kxw0, k0w0)?;
    Ok(step_raw(kxw0, k0w0))
}

/// `R(kx) = (kx − √(kx² − k₀²))/(kx + √(kx² − k₀²))`.
pub fn reflection_1d(kxw0: f64, k0w0: f64) -> Result<Complex64> {
    step_1d(kxw0, k0w0).map(|c| c.r)
}

/// `T(kx) = 2kx/(kx + √(kx² − k₀²))`; `1 + R = T`.
pub fn transmission_1d(kxw0: f64, k0w0: f64) -> Result<Complex64> {
    step_1d(kxw0, k0w0).map(|c| c.t)
}

/// Precomputed geometry for evaluating the tilted-step coefficient many
/// times over a spectral grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TiltedStep {
    pub k: f64,
    pub k0: f64,
    pub sin: f64,
    pub cos: f64,
}

impl TiltedStep {
    pub fn new(beam: &BeamSpec3D) -> Self {
        let k = beam.kw0();
        Self {
            k,
            k0: k * beam.v0_over_e().sqrt(),
            sin: beam.theta().sin(),
            cos: beam.theta().cos(),
        }
    }

    /// Normal wave number `k_z̃` of the incident component `(kx, ky)`,
    /// or `None` if it does not travel toward the step.
    #[inline]
    pub fn normal_wavenumber(&self, kx: f64, ky: f64) -> Option<f64> {
        let kz2 = self.k * self.k - kx * kx - ky * ky;
        if kz2 <= 0.0 {
            return None;
        }
        let kzt = -self.sin * kx + self.cos * kz2.sqrt();
        (kzt > 0.0).then_some(kzt)
    }

    #[inline]
    pub fn coefficients(&self, kx: f64, ky: f64) -> Option<StepCoefficients> {
        self.normal_wavenumber(kx, ky).map(|kzt| step_raw(kzt, self.k0))
    }

    /// `kx` where the critical circle crosses `ky = 0`, if the step has one.
    pub fn branch_kx(&self) -> Option<f64> {
        if self.k0 >= self.k {
            return None;
        }
        // With kx = k sin a, the normal wave number is k cos(θ + a).
        let theta = self.sin.atan2(self.cos);
        let a = (self.k0 / self.k).acos() - theta;
        Some(self.k * a.sin())
    }

    /// Positive `ky` on the critical circle for this `kx`, if any.
    pub fn branch_ky(&self, kx: f64) -> Option<f64> {
        let c = (self.k0 + self.sin * kx) / self.cos;
        if c < 0.0 {
            return None;
        }
        let planar = (self.k * self.k - kx * kx).sqrt();
        let ky2 = (planar - c) * (planar + c);
        if ky2 <= 0.0 {
            return None;
        }
        let mut ky = ky2.sqrt();
        // One Newton polish on k_z̃(kx, ky) = k₀.
        let kz = (self.k * self.k - kx * kx - ky * ky).sqrt();
        if kz > 0.0 {
            let f = -self.sin * kx + self.cos * kz - self.k0;
            let df = -self.cos * ky / kz;
            if df != 0.0 {
                let step = f / df;
                if step.abs() < 0.5 * ky {
                    ky -= step;
                }
            }
        }
        Some(ky)
    }
}

/// `R(kx, ky) = (k_z̃ − q_z̃)/(k_z̃ + q_z̃)` for an incident component given in
/// the beam frame, with `k_z̃` obtained by rotating `(kx, kz)` through `θ`.
pub fn reflection_3d(kxw0: f64, kyw0: f64, beam: &BeamSpec3D) -> Result<Complex64> {
    step_3d(kxw0, kyw0, beam).map(|c| c.r)
}

pub fn step_3d(kxw0: f64, kyw0: f64, beam: &BeamSpec3D) -> Result<StepCoefficients> {
    if !(kxw0.is_finite() && kyw0.is_finite()) {
        return Err(domain("spectral coordinates must be finite"));
    }
    TiltedStep::new(beam).coefficients(kxw0, kyw0).ok_or_else(|| {
        domain(format!(
            "component ({kxw0}, {kyw0}) has no real normal wave number toward the step; \
             outside the paraxial support"
        ))
    })
}

/// First-order expansion `R(kx, ky) ≈ R(0,0)(1 + slope·kx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedReflection {
    pub r0: Complex64,
    /// `2 sinθ/(q cosφ)` in units of `w₀`; imaginary under total reflection.
    pub slope: Complex64,
}

/// Half-width (radians) of the angular band around `θ_C` where the
/// first-order expansion is singular: `10/(k w₀ cos θ_C)`.
pub fn critical_angle_band(beam: &BeamSpec3D) -> Option<f64> {
    beam.critical_angle()
        .map(|theta_c| 10.0 / (beam.kw0() * theta_c.cos()))
}

pub fn reflection_3d_linearized(beam: &BeamSpec3D) -> Result<LinearizedReflection> {
    if let (Some(theta_c), Some(band)) = (beam.critical_angle(), critical_angle_band(beam)) {
        if (beam.theta() - theta_c).abs() < band {
            return Err(Error::SingularExpansion(format!(
                "theta = {:.6} rad is within {:.3e} rad of the critical angle {:.6} rad; \
                 use the critical mean value instead",
                beam.theta(),
                band,
                theta_c
            )));
        }
    }
    let c = step_3d(0.0, 0.0, beam)?;
    let slope = Complex64::new(2.0 * beam.theta().sin(), 0.0) / c.qz_out;
    Ok(LinearizedReflection { r0: c.r, slope })
}
