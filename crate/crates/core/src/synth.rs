//! Quadrature synthesis of the incident, reflected and transmitted packets.
//!
//! Spectral variables are measured from the carrier: `s = kx·w₀ − k·w₀` in
//! 1D, and the beam-frame transverse components `(kx, ky)·w₀` in 3D. The
//! Gaussian weight per unit `s` is `e^{−s²/4}/(2√π)`, which puts the free
//! packet's peak amplitude at 1 when `τ = 0`.
//!
//! Each engine builds its amplitude table once, at a fixed `τ` or `ζ`, and
//! then evaluates `Σ_j A_j e^{iκ_j x}` at arbitrary points. Uniform grids are
//! evaluated in short blocks with a phase recurrence, reseeded from exact
//! exponentials at the start of every block.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coeffs::{self, StepCoefficients, TiltedStep};
use crate::error::{domain, Error, Result};
use crate::params::{BeamSpec3D, PacketSpec};
use crate::quadrature::QuadratureRule;
use crate::stats::simpson_weights;

/// Numerical settings shared by the 1D and 3D engines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    /// Spectral half-width around the carrier, in units of `1/w₀`.
    pub half_width: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Panels on `[0, half_width]` for the transverse `ky` integral.
    pub transverse_panels: usize,
    /// Largest accepted change between the rule and its node-doubled copy,
    /// relative to the amplitude scale `Σ|A_j|`.
    pub tolerance: f64,
    pub check_convergence: bool,
    pub grid_points: usize,
    /// Smallest half-width of a sampling window, in `w₀`.
    pub min_window: f64,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            half_width: 14.0,
            panels: 32,
            nodes_per_panel: 32,
            transverse_panels: 16,
            tolerance: 1e-9,
            check_convergence: true,
            grid_points: 4096,
            min_window: 8.0,
        }
    }
}

impl QuadSettings {
    fn validate(&self) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(domain("spectral half-width must be positive"));
        }
        if self.panels == 0 || self.nodes_per_panel == 0 || self.transverse_panels == 0 {
            return Err(domain("panel and node counts must be positive"));
        }
        if self.grid_points < 2 {
            return Err(domain("a grid needs at least two points"));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain("convergence tolerance must be positive"));
        }
        Ok(())
    }

    /// Half-width covering eight intensity standard deviations of a packet
    /// that has spread for time `t`.
    pub fn window_half_width(&self, t: f64) -> f64 {
        self.min_window.max(4.0 * (1.0 + 4.0 * t * t).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wave {
    Incident,
    Reflected,
    Transmitted,
}

impl Wave {
    pub fn as_str(self) -> &'static str {
        match self {
            Wave::Incident => "incident",
            Wave::Reflected => "reflected",
            Wave::Transmitted => "transmitted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Numeric,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x_over_w0: f64,
    pub value: Complex64,
    pub tau_or_zeta: f64,
    pub source: Source,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileMeta {
    Packet { spec: PacketSpec, wave: Wave },
    Beam(BeamSpec3D),
    /// Profiles built directly from samples.
    Synthetic,
}

/// `|ψ|²` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamProfile {
    grid: Vec<f64>,
    intensity: Vec<f64>,
    norm: f64,
    meta: ProfileMeta,
}

impl BeamProfile {
    pub fn new(grid: Vec<f64>, intensity: Vec<f64>, meta: ProfileMeta) -> Result<Self> {
        if grid.len() < 2 || grid.len() != intensity.len() {
            return Err(domain("grid and intensity must have equal length of at least 2"));
        }
        let h = grid[1] - grid[0];
        if !(h > 0.0) {
            return Err(domain("grid must be increasing"));
        }
        let span = grid[grid.len() - 1] - grid[0];
        let uniform = grid
            .windows(2)
            .all(|p| ((p[1] - p[0]) - h).abs() <= 1e-9 * span.max(h));
        if !uniform {
            return Err(domain("grid must be uniformly spaced"));
        }
        if intensity.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain("intensity must be finite and non-negative"));
        }
        let w = simpson_weights(grid.len(), h);
        let norm: f64 = w.iter().zip(&intensity).map(|(a, b)| a * b).sum();
        if !(norm > 0.0) {
            return Err(Error::Degenerate("profile has zero norm".into()));
        }
        Ok(Self {
            grid,
            intensity,
            norm,
            meta,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn meta(&self) -> &ProfileMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64
    }
}

/// A closed sampling interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let h = (self.hi - self.lo) / (n - 1) as f64;
        (0..n).map(|i| self.lo + h * i as f64).collect()
    }
}

/// `Σ_j a_j e^{iκ_j x}` for complex wave numbers `κ_j`.
fn spectral_sum(kappa: &[Complex64], amps: &[Complex64], x: f64) -> Complex64 {
    kappa
        .iter()
        .zip(amps)
        .map(|(k, a)| a * (Complex64::i() * k * x).exp())
        .sum()
}

const RESEED: usize = 16;

/// [`spectral_sum`] on `x0 + m·h`, `m < n`.
fn spectral_sum_grid(
    kappa: &[Complex64],
    amps: &[Complex64],
    x0: f64,
    h: f64,
    n: usize,
) -> Vec<Complex64> {
    let steps: Vec<Complex64> = kappa.iter().map(|k| (Complex64::i() * k * h).exp()).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out.par_chunks_mut(RESEED)
        .enumerate()
        .for_each(|(block, chunk)| {
            let start = block * RESEED;
            let mut terms: Vec<Complex64> = kappa
                .iter()
                .zip(amps)
                .map(|(k, a)| a * (Complex64::i() * k * (x0 + h * start as f64)).exp())
                .collect();
            for (m, slot) in chunk.iter_mut().enumerate() {
                if m > 0 {
                    for (t, s) in terms.iter_mut().zip(&steps) {
                        *t *= s;
                    }
                }
                *slot = terms.iter().sum();
            }
        });
    out
}

fn gaussian_weight(s: f64) -> f64 {
    (-0.25 * s * s).exp() / (2.0 * PI.sqrt())
}

/// Spectral synthesis of the 1D packets at one instant.
#[derive(Debug, Clone)]
pub struct Packet1d {
    spec: PacketSpec,
    settings: QuadSettings,
    rule: QuadratureRule,
    nodes: Vec<f64>,
    incident: Vec<Complex64>,
    reflected: Vec<Complex64>,
    transmitted: Vec<Complex64>,
    /// Transmitted wave numbers `p(kx)·w₀`.
    p: Vec<Complex64>,
    custom: bool,
}

impl Packet1d {
    /// Engine using the step coefficients of [`coeffs::step_1d`].
    pub fn new(spec: PacketSpec, settings: QuadSettings) -> Result<Self> {
        let k0 = spec.k0w0();
        let split = k0 - spec.kw0();
        Self::build(spec, settings, &[split], false, |u| coeffs::step_raw(u, k0))
    }

    /// Engine with user-supplied coefficients as a function of `kx·w₀`.
    /// `splits` lists spectral branch points as offsets `kx·w₀ − k·w₀`.
    pub fn with_coefficients<F>(
        spec: PacketSpec,
        settings: QuadSettings,
        splits: &[f64],
        coefficients: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> StepCoefficients,
    {
        Self::build(spec, settings, splits, true, coefficients)
    }

    fn build<F>(
        spec: PacketSpec,
        settings: QuadSettings,
        splits: &[f64],
        custom: bool,
        coefficients: F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> StepCoefficients,
    {
        settings.validate()?;
        let rule = QuadratureRule::composite(
            -settings.half_width,
            settings.half_width,
            settings.panels,
            settings.nodes_per_panel,
            splits,
        )?;
        Self::from_rule(spec, settings, rule, custom, &coefficients)
    }

    fn from_rule<F>(
        spec: PacketSpec,
        settings: QuadSettings,
        rule: QuadratureRule,
        custom: bool,
        coefficients: &F,
    ) -> Result<Self>
    where
        F: Fn(f64) -> StepCoefficients,
    {
        let k = spec.kw0();
        let tau = spec.tau();
        if k - settings.half_width <= 0.0 {
            return Err(domain(format!(
                "spectral support reaches kx·w0 = {} ≤ 0; k·w0 must exceed the half-width {}",
                k - settings.half_width,
                settings.half_width
            )));
        }
        let n = rule.len();
        let mut incident = Vec::with_capacity(n);
        let mut reflected = Vec::with_capacity(n);
        let mut transmitted = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for (&s, &w) in rule.nodes().iter().zip(rule.weights()) {
            let c = coefficients(k + s);
            let base = w * gaussian_weight(s);
            let free = Complex64::from_polar(base, -0.5 * s * s * tau);
            incident.push(free);
            reflected.push(free * c.r);
            let extra = Complex64::from_polar(1.0, -k * s * tau);
            transmitted.push(free * extra * c.t);
            p.push(c.qz_out);
        }
        Ok(Self {
            spec,
            settings,
            nodes: rule.nodes().to_vec(),
            rule,
            incident,
            reflected,
            transmitted,
            p,
            custom,
        })
    }

    pub fn spec(&self) -> &PacketSpec {
        &self.spec
    }

    pub fn settings(&self) -> &QuadSettings {
        &self.settings
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn kappa_and_amps(&self, wave: Wave) -> (Vec<Complex64>, &[Complex64]) {
        match wave {
            Wave::Incident => (
                self.nodes.iter().map(|&s| Complex64::new(s, 0.0)).collect(),
                &self.incident,
            ),
            Wave::Reflected => (
                self.nodes.iter().map(|&s| Complex64::new(-s, 0.0)).collect(),
                &self.reflected,
            ),
            Wave::Transmitted => (self.p.clone(), &self.transmitted),
        }
    }

    /// Shift from lab position `x/w₀` to the variable the spectral sum uses.
    fn local(&self, wave: Wave, x: f64) -> f64 {
        let kt = self.spec.kw0() * self.spec.tau();
        match wave {
            Wave::Incident => x - kt,
            Wave::Reflected => x + kt,
            Wave::Transmitted => x,
        }
    }

    fn carrier(&self, wave: Wave, x: f64) -> Complex64 {
        let k = self.spec.kw0();
        let e = 0.5 * k * k * self.spec.tau();
        match wave {
            Wave::Incident => Complex64::from_polar(1.0, k * x - e),
            Wave::Reflected => Complex64::from_polar(1.0, -k * x - e),
            Wave::Transmitted => Complex64::from_polar(1.0, -e),
        }
    }

    fn check_region(&self, wave: Wave, x: f64) -> Result<()> {
        match wave {
            Wave::Reflected if x > 0.0 => Err(domain(format!(
                "reflected packet lives at x ≤ 0, got x/w0 = {x}"
            ))),
            Wave::Transmitted if x < 0.0 => Err(domain(format!(
                "transmitted packet lives at x ≥ 0, got x/w0 = {x}"
            ))),
            _ if !x.is_finite() => Err(domain("position must be finite")),
            _ => Ok(()),
        }
    }

    /// Slowly varying envelope, without the plane-wave carrier.
    fn envelope(&self, wave: Wave, x: f64) -> Complex64 {
        let (kappa, amps) = self.kappa_and_amps(wave);
        spectral_sum(&kappa, amps, self.local(wave, x))
    }

    /// Full wave function `ψ(x, τ)`.
    pub fn evaluate(&self, wave: Wave, x_over_w0: f64) -> Result<Complex64> {
        self.check_region(wave, x_over_w0)?;
        Ok(self.carrier(wave, x_over_w0) * self.envelope(wave, x_over_w0))
    }

    pub fn sample(&self, wave: Wave, x_over_w0: f64) -> Result<FieldSample> {
        Ok(FieldSample {
            x_over_w0,
            value: self.evaluate(wave, x_over_w0)?,
            tau_or_zeta: self.spec.tau(),
            source: Source::Numeric,
        })
    }

    /// Sampling window around the packet's zeroth-order centre.
    pub fn window(&self, wave: Wave) -> Result<Window> {
        let tau = self.spec.tau();
        let h = self.settings.window_half_width(tau);
        let kt = self.spec.kw0() * tau;
        match wave {
            Wave::Incident => Ok(Window {
                lo: kt - h,
                hi: kt + h,
            }),
            Wave::Reflected => {
                if -kt + h > 0.0 {
                    return Err(Error::Window(format!(
                        "reflected window [{}, {}] reaches the step; tau = {tau} is too early",
                        -kt - h,
                        -kt + h
                    )));
                }
                Ok(Window {
                    lo: -kt - h,
                    hi: -kt + h,
                })
            }
            Wave::Transmitted => {
                let v = coeffs::branch_sqrt(
                    (self.spec.kw0() - self.spec.k0w0()) * (self.spec.kw0() + self.spec.k0w0()),
                )
                .re;
                Ok(Window {
                    lo: (v * tau - 2.0 * h).max(0.0),
                    hi: v * tau + 2.0 * h,
                })
            }
        }
    }

    /// Node-doubled copy of the engine used for the convergence test.
    pub fn refined(&self) -> Result<Self> {
        if self.custom {
            return Err(domain("custom-coefficient engines cannot rebuild their table"));
        }
        let k0 = self.spec.k0w0();
        Self::from_rule(
            self.spec,
            self.settings,
            self.rule.refined(),
            false,
            &|u| coeffs::step_raw(u, k0),
        )
    }

    /// Largest change at a few probe points across the window when the
    /// nodes per panel are doubled, relative to `Σ|A_j|`.
    pub fn convergence_defect(&self, wave: Wave) -> Result<f64> {
        let fine = self.refined()?;
        let win = self.window(wave).or_else(|_| match wave {
            Wave::Reflected => Ok(Window { lo: -4.0, hi: 0.0 }),
            _ => Err(Error::Window("no window".into())),
        })?;
        let (_, amps) = self.kappa_and_amps(wave);
        let scale: f64 = amps.iter().map(|a| a.norm()).sum();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let mid = 0.5 * (win.lo + win.hi);
        let quarter = 0.25 * (win.hi - win.lo);
        let probes = [mid - quarter, mid - 0.1 * quarter, mid, mid + 0.1 * quarter, mid + quarter];
        let worst = probes
            .iter()
            .map(|&x| (self.envelope(wave, x) - fine.envelope(wave, x)).norm())
            .fold(0.0, f64::max);
        Ok(worst / scale)
    }

    fn ensure_converged(&self, wave: Wave) -> Result<()> {
        if !self.settings.check_convergence || self.custom {
            return Ok(());
        }
        let achieved = self.convergence_defect(wave)?;
        if achieved > self.settings.tolerance {
            return Err(Error::NonConvergence {
                achieved,
                tolerance: self.settings.tolerance,
            });
        }
        Ok(())
    }

    /// Full wave function on `n` uniform points of `window`.
    pub fn field_on(&self, wave: Wave, window: Window, n: usize) -> Result<Vec<FieldSample>> {
        self.check_region(wave, window.lo)?;
        self.check_region(wave, window.hi)?;
        self.ensure_converged(wave)?;
        let env = self.envelope_grid(wave, window, n);
        Ok(window
            .grid(n)
            .into_iter()
            .zip(env)
            .map(|(x, e)| FieldSample {
                x_over_w0: x,
                value: self.carrier(wave, x) * e,
                tau_or_zeta: self.spec.tau(),
                source: Source::Numeric,
            })
            .collect())
    }

    fn envelope_grid(&self, wave: Wave, window: Window, n: usize) -> Vec<Complex64> {
        let (kappa, amps) = self.kappa_and_amps(wave);
        let h = (window.hi - window.lo) / (n - 1) as f64;
        spectral_sum_grid(&kappa, amps, self.local(wave, window.lo), h, n)
    }

    /// `|ψ|²` on `n` uniform points of `window`.
    pub fn profile_on(&self, wave: Wave, window: Window, n: usize) -> Result<BeamProfile> {
        self.check_region(wave, window.lo)?;
        self.check_region(wave, window.hi)?;
        self.ensure_converged(wave)?;
        let intensity = self
            .envelope_grid(wave, window, n)
            .into_iter()
            .map(|e| e.norm_sqr())
            .collect();
        BeamProfile::new(
            window.grid(n),
            intensity,
            ProfileMeta::Packet {
                spec: self.spec,
                wave,
            },
        )
    }

    /// `|ψ|²` on the default window and grid size.
    pub fn profile(&self, wave: Wave) -> Result<BeamProfile> {
        let window = self.window(wave)?;
        self.profile_on(wave, window, self.settings.grid_points)
    }

    /// `∫|g|²(|R|² + (Re q/kx)|T|²) ds`: the reflected plus transmitted
    /// probability carried by the spectral table, which must equal
    /// `∫|g|² ds` for a flux-conserving step.
    pub fn spectral_flux(&self) -> (f64, f64) {
        let k = self.spec.kw0();
        let mut total = 0.0;
        let mut split = 0.0;
        for (&s, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let g2 = gaussian_weight(s).powi(2);
            total += w * g2;
            let c = coeffs::step_raw(k + s, self.spec.k0w0());
            split += w * g2 * (c.r.norm_sqr() + c.qz_out.re / (k + s) * c.t.norm_sqr());
        }
        (total, split)
    }
}

/// `ψ_INC(x, τ)` by quadrature with default settings.
pub fn incident_1d(spec: &PacketSpec, x_over_w0: f64) -> Result<Complex64> {
    let engine = Packet1d::new(*spec, QuadSettings::default())?;
    engine.ensure_converged(Wave::Incident)?;
    engine.evaluate(Wave::Incident, x_over_w0)
}

/// `ψ_REF(x, τ)` with the exact reflection coefficient.
pub fn reflected_1d(spec: &PacketSpec, x_over_w0: f64) -> Result<Complex64> {
    let engine = Packet1d::new(*spec, QuadSettings::default())?;
    engine.ensure_converged(Wave::Reflected)?;
    engine.evaluate(Wave::Reflected, x_over_w0)
}

/// `ψ_TRA(x, τ)` with the exact transmission coefficient.
pub fn transmitted_1d(spec: &PacketSpec, x_over_w0: f64) -> Result<Complex64> {
    let engine = Packet1d::new(*spec, QuadSettings::default())?;
    engine.ensure_converged(Wave::Transmitted)?;
    engine.evaluate(Wave::Transmitted, x_over_w0)
}

/// Reflected 3D beam on the `y = 0` slice, as a function of `x*`, the
/// transverse coordinate of the specularly reflected axis.
///
/// `ψ(x*) = Σ_j A_j e^{i kx_j x*}` with
/// `A_j = w_j e^{−kx²/4} e^{−i kx² ζ/2} B(kx_j)` and
/// `B(kx) = ∫ R(kx, ky) e^{−ky²/4} e^{−i ky² ζ/2} dky / (4π)`.
#[derive(Debug, Clone)]
pub struct Beam3d {
    beam: BeamSpec3D,
    settings: QuadSettings,
    kx: Vec<Complex64>,
    amps: Vec<Complex64>,
    custom: bool,
}

impl Beam3d {
    pub fn new(beam: BeamSpec3D, settings: QuadSettings) -> Result<Self> {
        Self::build(beam, settings, false, 1)
    }

    /// Engine with a user-supplied `R(kx, ky)`; `None` marks a component
    /// outside the domain. No branch splitting is applied.
    pub fn with_reflection<F>(beam: BeamSpec3D, settings: QuadSettings, reflection: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Option<Complex64> + Sync,
    {
        settings.validate()?;
        let outer = QuadratureRule::composite(
            -settings.half_width,
            settings.half_width,
            settings.panels,
            settings.nodes_per_panel,
            &[],
        )?;
        let inner = QuadratureRule::composite(
            0.0,
            settings.half_width,
            settings.transverse_panels,
            settings.nodes_per_panel,
            &[],
        )?;
        let zeta = beam.zeta();
        let amps = outer
            .nodes()
            .par_iter()
            .zip(outer.weights())
            .map(|(&kx, &w)| {
                let mut b = Complex64::new(0.0, 0.0);
                for (&ky, &wy) in inner.nodes().iter().zip(inner.weights()) {
                    let r = reflection(kx, ky).ok_or_else(|| {
                        domain(format!("reflection undefined at ({kx}, {ky})"))
                    })?;
                    b += wy * r * Complex64::from_polar((-0.25 * ky * ky).exp(), -0.5 * ky * ky * zeta);
                }
                b *= 2.0 / (4.0 * PI);
                Ok(w * b * Complex64::from_polar((-0.25 * kx * kx).exp(), -0.5 * kx * kx * zeta))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beam,
            settings,
            kx: outer.nodes().iter().map(|&k| Complex64::new(k, 0.0)).collect(),
            amps,
            custom: true,
        })
    }

    fn build(beam: BeamSpec3D, settings: QuadSettings, custom: bool, refine: usize) -> Result<Self> {
        settings.validate()?;
        let step = TiltedStep::new(&beam);
        let hw = settings.half_width;
        let splits: Vec<f64> = step.branch_kx().into_iter().collect();
        let outer = QuadratureRule::composite(
            -hw,
            hw,
            settings.panels,
            refine * settings.nodes_per_panel,
            &splits,
        )?;
        let zeta = beam.zeta();
        let amps = outer
            .nodes()
            .par_iter()
            .zip(outer.weights())
            .map(|(&kx, &w)| {
                let ky_split: Vec<f64> = step.branch_ky(kx).into_iter().collect();
                let inner = QuadratureRule::composite(
                    0.0,
                    hw,
                    settings.transverse_panels,
                    refine * settings.nodes_per_panel,
                    &ky_split,
                )?;
                let mut b = Complex64::new(0.0, 0.0);
                for (&ky, &wy) in inner.nodes().iter().zip(inner.weights()) {
                    let c = step.coefficients(kx, ky).ok_or_else(|| {
                        domain(format!(
                            "component ({kx:.4}, {ky:.4}) does not travel toward the step; \
                             the beam is outside the paraxial regime"
                        ))
                    })?;
                    b += wy
                        * c.r
                        * Complex64::from_polar((-0.25 * ky * ky).exp(), -0.5 * ky * ky * zeta);
                }
                // R is even in ky, so the half line is doubled.
                b *= 2.0 / (4.0 * PI);
                Ok(w * b * Complex64::from_polar((-0.25 * kx * kx).exp(), -0.5 * kx * kx * zeta))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            beam,
            settings,
            kx: outer.nodes().iter().map(|&k| Complex64::new(k, 0.0)).collect(),
            amps,
            custom,
        })
    }

    pub fn beam(&self) -> &BeamSpec3D {
        &self.beam
    }

    pub fn evaluate(&self, x_star: f64) -> Complex64 {
        spectral_sum(&self.kx, &self.amps, x_star)
    }

    pub fn window(&self) -> Window {
        let h = self.settings.window_half_width(self.beam.zeta());
        Window { lo: -h, hi: h }
    }

    pub fn convergence_defect(&self) -> Result<f64> {
        if self.custom {
            return Err(domain("custom-reflection engines cannot be refined"));
        }
        let fine = Self::build(self.beam, self.settings, false, 2)?;
        let scale: f64 = self.amps.iter().map(|a| a.norm()).sum();
        if scale == 0.0 {
            return Ok(0.0);
        }
        let win = self.window();
        let q = 0.25 * (win.hi - win.lo);
        let worst = [-q, -0.1 * q, 0.0, 0.1 * q, q]
            .iter()
            .map(|&x| (self.evaluate(x) - fine.evaluate(x)).norm())
            .fold(0.0, f64::max);
        Ok(worst / scale)
    }

    fn ensure_converged(&self) -> Result<()> {
        if !self.settings.check_convergence || self.custom {
            return Ok(());
        }
        let achieved = self.convergence_defect()?;
        if achieved > self.settings.tolerance {
            return Err(Error::NonConvergence {
                achieved,
                tolerance: self.settings.tolerance,
            });
        }
        Ok(())
    }

    pub fn field_on(&self, window: Window, n: usize) -> Result<Vec<FieldSample>> {
        self.ensure_converged()?;
        let h = (window.hi - window.lo) / (n - 1) as f64;
        let values = spectral_sum_grid(&self.kx, &self.amps, window.lo, h, n);
        Ok(window
            .grid(n)
            .into_iter()
            .zip(values)
            .map(|(x, value)| FieldSample {
                x_over_w0: x,
                value,
                tau_or_zeta: self.beam.zeta(),
                source: Source::Numeric,
            })
            .collect())
    }

    pub fn profile_on(&self, window: Window, n: usize) -> Result<BeamProfile> {
        self.ensure_converged()?;
        let h = (window.hi - window.lo) / (n - 1) as f64;
        let intensity = spectral_sum_grid(&self.kx, &self.amps, window.lo, h, n)
            .into_iter()
            .map(|v| v.norm_sqr())
            .collect();
        BeamProfile::new(window.grid(n), intensity, ProfileMeta::Beam(self.beam))
    }

    pub fn profile(&self) -> Result<BeamProfile> {
        self.profile_on(self.window(), self.settings.grid_points)
    }
}

/// Reflected `|ψ|²` along `x*` on the supplied uniform grid.
pub fn reflected_3d_profile(beam: &BeamSpec3D, x_star_grid: &[f64]) -> Result<BeamProfile> {
    if x_star_grid.len() < 2 {
        return Err(domain("grid needs at least two points"));
    }
    let engine = Beam3d::new(*beam, QuadSettings::default())?;
    let window = Window {
        lo: x_star_grid[0],
        hi: x_star_grid[x_star_grid.len() - 1],
    };
    let profile = engine.profile_on(window, x_star_grid.len())?;
    BeamProfile::new(x_star_grid.to_vec(), profile.intensity().to_vec(), ProfileMeta::Beam(*beam))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form(k: f64, tau: f64, x: f64) -> Complex64 {
        let d = Complex64::new(1.0, 2.0 * tau);
        let y = x - k * tau;
        Complex64::from_polar(1.0, k * x - 0.5 * k * k * tau) / d.sqrt() * (-(y * y) / d).exp()
    }

    #[test]
    fn free_packet_peak_at_origin() {
        let spec = PacketSpec::new(500.0, 0.0, 0.0).unwrap();
        let v = incident_1d(&spec, 0.0).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        let p = engine.profile(Wave::Incident).unwrap();
        let imax = p
            .intensity()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(p.grid()[imax].abs() <= p.spacing());
    }

    #[test]
    fn incident_matches_closed_form_pointwise() {
        let spec = PacketSpec::new(500.0, 0.0, 1.0).unwrap();
        for x in [495.0, 500.0, 501.3, 503.0] {
            let a = incident_1d(&spec, x).unwrap();
            let b = closed_form(500.0, 1.0, x);
            assert!((a - b).norm() < 1e-8 * b.norm(), "x = {x}");
        }
    }

    #[test]
    fn grid_recurrence_agrees_with_direct_sum() {
        let spec = PacketSpec::new(500.0, 520.0, 1.0).unwrap();
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        let win = engine.window(Wave::Reflected).unwrap();
        let field = engine.field_on(Wave::Reflected, win, 257).unwrap();
        for s in field.iter().step_by(17) {
            let direct = engine.evaluate(Wave::Reflected, s.x_over_w0).unwrap();
            assert!((s.value - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn no_step_no_reflection() {
        let spec = PacketSpec::new(500.0, 0.0, 1.0).unwrap();
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        assert_eq!(engine.evaluate(Wave::Reflected, -500.0).unwrap(), Complex64::new(0.0, 0.0));
        for x in [0.0, 2.0, 500.0, 503.0] {
            let t = engine.evaluate(Wave::Transmitted, x).unwrap();
            let i = engine.evaluate(Wave::Incident, x).unwrap();
            assert!((t - i).norm() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn region_checks() {
        let spec = PacketSpec::new(500.0, 400.0, 1.0).unwrap();
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        assert!(engine.evaluate(Wave::Reflected, 1.0).is_err());
        assert!(engine.evaluate(Wave::Transmitted, -1.0).is_err());
        let early = PacketSpec::new(500.0, 400.0, 0.001).unwrap();
        let engine = Packet1d::new(early, QuadSettings::default()).unwrap();
        assert!(matches!(engine.window(Wave::Reflected), Err(Error::Window(_))));
    }

    #[test]
    fn rejects_support_through_zero() {
        let spec = PacketSpec::new(10.0, 0.0, 1.0).unwrap();
        assert!(matches!(Packet1d::new(spec, QuadSettings::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn branch_point_is_a_panel_boundary() {
        let spec = PacketSpec::new(500.0, 503.0, 1.0).unwrap();
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        let rule = engine.rule();
        assert_eq!(rule.split_points(), &[3.0]);
        assert!(rule.panels().iter().any(|p| p.hi == 3.0));
        assert!(rule.panels().iter().any(|p| p.lo == 3.0));
        assert!(rule.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn converges_near_the_branch() {
        for k0 in [500.0, 505.0, 495.0, 1010.0] {
            let spec = PacketSpec::new(if k0 > 800.0 { 1000.0 } else { 500.0 }, k0, 1.0).unwrap();
            let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
            let d = engine.convergence_defect(Wave::Reflected).unwrap();
            assert!(d < 1e-9, "k0 = {k0}: {d:e}");
        }
    }

    #[test]
    fn spectral_flux_is_conserved() {
        let spec = PacketSpec::new(500.0, 480.0, 1.0).unwrap();
        let engine = Packet1d::new(spec, QuadSettings::default()).unwrap();
        let (total, split) = engine.spectral_flux();
        assert!((total - split).abs() < 1e-12 * total);
    }

    #[test]
    fn beam_with_unit_reflection_is_the_free_beam() {
        let beam = BeamSpec3D::from_critical_angle(500.0, 0.5, 1.2, 1.0).unwrap();
        let engine =
            Beam3d::with_reflection(beam, QuadSettings::default(), |_, _| Some(Complex64::new(1.0, 0.0)))
                .unwrap();
        for x in [-3.0, -0.7, 0.0, 1.1, 2.5] {
            let d = Complex64::new(1.0, 2.0);
            let expected = (-(x * x) / d).exp() / d;
            let got = engine.evaluate(x);
            assert!((got - expected).norm() < 1e-10, "x = {x}");
        }
    }
}
