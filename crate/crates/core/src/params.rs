//! Adimensional parameter types shared by every other module.
//!
//! All numerics downstream work with the collimation products `k·w₀`,
//! `k₀·w₀`, the adimensional time `τ = ħt/(m w₀²)` and the adimensional
//! axial distance `ζ = z/(k w₀²)`. [`PhysicalUnits`] is the only place where
//! SI quantities appear.

use std::f64::consts::FRAC_PI_2;

use crate::error::{domain, Result};

/// Which side of the step height the packet's central energy sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `E > V₀` (`k > k₀`): partial reflection.
    Above,
    /// `E < V₀` (`k < k₀`): total reflection.
    Below,
    /// `E = V₀`.
    Critical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Above => "above",
            Regime::Below => "below",
            Regime::Critical => "critical",
        }
    }
}

/// Relative half-width of the band around `k = k₀` that estimator dispatch
/// treats as critical.
pub const DEFAULT_CRITICAL_EPS: f64 = 1e-9;

/// One-dimensional incident packet in adimensional form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    kw0: f64,
    k0w0: f64,
    tau: f64,
    regime: Regime,
}

impl PacketSpec {
    pub fn new(kw0: f64, k0w0: f64, tau: f64) -> Result<Self> {
        if !(kw0.is_finite() && kw0 > 0.0) {
            return Err(domain(format!("k·w0 must be positive and finite, got {kw0}")));
        }
        if !(k0w0.is_finite() && k0w0 >= 0.0) {
            return Err(domain(format!("k0·w0 must be non-negative and finite, got {k0w0}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(domain(format!("tau must be non-negative and finite, got {tau}")));
        }
        let regime = if kw0 > k0w0 {
            Regime::Above
        } else if kw0 < k0w0 {
            Regime::Below
        } else {
            Regime::Critical
        };
        Ok(Self {
            kw0,
            k0w0,
            tau,
            regime,
        })
    }

    /// Builds a packet from the step-height ratio `(V₀ − E)/E`.
    pub fn from_potential_ratio(kw0: f64, ratio: f64, tau: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= -1.0) {
            return Err(domain(format!("(V0-E)/E must be >= -1, got {ratio}")));
        }
        Self::new(kw0, kw0 * (1.0 + ratio).sqrt(), tau)
    }

    pub fn kw0(&self) -> f64 {
        self.kw0
    }

    pub fn k0w0(&self) -> f64 {
        self.k0w0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Exact classification: `Critical` only when `k·w₀ == k₀·w₀`.
    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Classification used to pick an estimator: anything within
    /// `eps·k·w₀` of the step counts as critical.
    pub fn dispatch_regime(&self, eps: f64) -> Regime {
        if (self.kw0 - self.k0w0).abs() < eps * self.kw0 {
            Regime::Critical
        } else {
            self.regime
        }
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.kw0, self.k0w0, tau)
    }

    /// `(V₀ − E)/E = (k₀² − k²)/k²`, the abscissa of the one-dimensional scans.
    pub fn potential_ratio(&self) -> f64 {
        (self.k0w0 * self.k0w0 - self.kw0 * self.kw0) / (self.kw0 * self.kw0)
    }

    /// `δ` in the near-critical parametrization `k w₀ = k₀ w₀ + δ/(k w₀)`.
    pub fn near_critical_delta(&self) -> f64 {
        (self.kw0 - self.k0w0) * self.kw0
    }
}

/// Three-dimensional Gaussian beam hitting a tilted step.
///
/// The step height is stored as `V₀/E`; for `E > V₀` this fixes the
/// critical angle through `sin²θ_C = 1 − V₀/E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec3D {
    kw0: f64,
    v0_over_e: f64,
    theta: f64,
    zeta: f64,
}

impl BeamSpec3D {
    pub fn new(kw0: f64, v0_over_e: f64, theta: f64, zeta: f64) -> Result<Self> {
        if !(kw0.is_finite() && kw0 > 0.0) {
            return Err(domain(format!("k·w0 must be positive and finite, got {kw0}")));
        }
        if !(v0_over_e.is_finite() && v0_over_e >= 0.0) {
            return Err(domain(format!("V0/E must be non-negative, got {v0_over_e}")));
        }
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return Err(domain(format!("incidence angle must lie in (0, pi/2), got {theta}")));
        }
        if !(zeta.is_finite() && zeta >= 0.0) {
            return Err(domain(format!("zeta must be non-negative, got {zeta}")));
        }
        Ok(Self {
            kw0,
            v0_over_e,
            theta,
            zeta,
        })
    }

    /// Step below the particle energy, specified by its critical angle.
    pub fn from_critical_angle(kw0: f64, theta_c: f64, theta: f64, zeta: f64) -> Result<Self> {
        if !(theta_c > 0.0 && theta_c <= FRAC_PI_2) {
            return Err(domain(format!("critical angle must lie in (0, pi/2], got {theta_c}")));
        }
        let s = theta_c.sin();
        Self::new(kw0, 1.0 - s * s, theta, zeta)
    }

    /// Step specified by `√(V₀/E)`, the parametrization used for barriers.
    pub fn from_sqrt_v0_over_e(kw0: f64, ratio: f64, theta: f64, zeta: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio >= 0.0) {
            return Err(domain(format!("sqrt(V0/E) must be non-negative, got {ratio}")));
        }
        Self::new(kw0, ratio * ratio, theta, zeta)
    }

    pub fn kw0(&self) -> f64 {
        self.kw0
    }

    pub fn v0_over_e(&self) -> f64 {
        self.v0_over_e
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.kw0, self.v0_over_e, theta, self.zeta)
    }

    pub fn with_zeta(&self, zeta: f64) -> Result<Self> {
        Self::new(self.kw0, self.v0_over_e, self.theta, zeta)
    }

    pub fn above_barrier(&self) -> bool {
        self.v0_over_e < 1.0
    }

    /// `(E − V₀)/E`, equal to `sin²θ_C` when positive.
    pub fn energy_excess(&self) -> f64 {
        1.0 - self.v0_over_e
    }

    /// `(q w₀)²` where `ħq = √(2m(E − V₀))`; negative below the barrier.
    pub fn qw0_squared(&self) -> f64 {
        self.kw0 * self.kw0 * self.energy_excess()
    }

    /// `θ_C = arcsin √((E − V₀)/E)`; `None` when `E ≤ V₀`.
    pub fn critical_angle(&self) -> Option<f64> {
        let excess = self.energy_excess();
        (excess > 0.0).then(|| excess.sqrt().asin())
    }
}

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Dimensional description of a packet; the single conversion layer
/// between laboratory units and the adimensional numerics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalUnits {
    pub energy_ev: f64,
    pub waist_um: f64,
    /// Particle mass in electron masses.
    pub particle_mass: f64,
}

impl PhysicalUnits {
    pub fn electron(energy_ev: f64, waist_um: f64) -> Self {
        Self {
            energy_ev,
            waist_um,
            particle_mass: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("energy", self.energy_ev),
            ("waist", self.waist_um),
            ("mass", self.particle_mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn mass_kg(&self) -> f64 {
        self.particle_mass * ELECTRON_MASS
    }

    fn waist_m(&self) -> f64 {
        self.waist_um * 1e-6
    }

    fn wave_number(&self, energy_ev: f64) -> f64 {
        (2.0 * self.mass_kg() * energy_ev * ELECTRON_VOLT).sqrt() / HBAR
    }

    /// `k·w₀ = √(2mE)/ħ · w₀`.
    pub fn to_kw0(&self) -> Result<f64> {
        self.validate()?;
        Ok(self.wave_number(self.energy_ev) * self.waist_m())
    }

    /// `k₀·w₀` for a step of height `v0_ev` seen by this particle.
    pub fn k0w0_for_step(&self, v0_ev: f64) -> Result<f64> {
        self.validate()?;
        if !(v0_ev.is_finite() && v0_ev >= 0.0) {
            return Err(domain(format!("step height must be non-negative, got {v0_ev}")));
        }
        Ok(self.wave_number(v0_ev) * self.waist_m())
    }

    /// Laboratory time corresponding to adimensional `τ`.
    pub fn seconds_from_tau(&self, tau: f64) -> Result<f64> {
        self.validate()?;
        Ok(tau * self.mass_kg() * self.waist_m().powi(2) / HBAR)
    }

    /// Laboratory length corresponding to a shift in units of `w₀`.
    pub fn meters_from_w0(&self, shift: f64) -> Result<f64> {
        self.validate()?;
        Ok(shift * self.waist_m())
    }

    /// Group velocity `ħk/m` in m/s.
    pub fn velocity(&self) -> Result<f64> {
        self.validate()?;
        Ok(HBAR * self.wave_number(self.energy_ev) / self.mass_kg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn regime_examples() {
        assert_eq!(PacketSpec::new(500.0, 400.0, 1.0).unwrap().regime(), Regime::Above);
        assert_eq!(PacketSpec::new(500.0, 500.0, 0.5).unwrap().regime(), Regime::Critical);
        assert_eq!(PacketSpec::new(1000.0, 1010.0, 2.0).unwrap().regime(), Regime::Below);
    }

    #[test]
    fn values_stored_exactly() {
        let s = PacketSpec::new(500.25, 400.125, 0.75).unwrap();
        assert_eq!((s.kw0(), s.k0w0(), s.tau()), (500.25, 400.125, 0.75));
    }

    #[test]
    fn rejects_bad_packets() {
        assert!(matches!(PacketSpec::new(0.0, 1.0, 1.0), Err(crate::Error::Domain(_))));
        assert!(matches!(PacketSpec::new(-3.0, 1.0, 1.0), Err(crate::Error::Domain(_))));
        assert!(matches!(PacketSpec::new(3.0, 1.0, -1.0), Err(crate::Error::Domain(_))));
        assert!(PacketSpec::new(3.0, -1.0, 1.0).is_err());
        assert!(PacketSpec::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn dispatch_band_catches_rounding() {
        let s = PacketSpec::new(500.0, 500.0 * (1.0 + 1e-12), 1.0).unwrap();
        assert_eq!(s.regime(), Regime::Below);
        assert_eq!(s.dispatch_regime(DEFAULT_CRITICAL_EPS), Regime::Critical);
        let far = PacketSpec::new(500.0, 499.0, 1.0).unwrap();
        assert_eq!(far.dispatch_regime(DEFAULT_CRITICAL_EPS), Regime::Above);
    }

    #[test]
    fn potential_ratio_round_trip() {
        let s = PacketSpec::from_potential_ratio(500.0, 0.1, 1.0).unwrap();
        assert!((s.potential_ratio() - 0.1).abs() < 1e-14);
        assert_eq!(s.regime(), Regime::Below);
    }

    #[test]
    fn near_critical_delta_matches_definition() {
        let s = PacketSpec::new(500.0, 499.5, 1.0).unwrap();
        let delta = s.near_critical_delta();
        assert!((s.k0w0() + delta / s.kw0() - s.kw0()).abs() < 1e-12);
    }

    #[test]
    fn beam_validation() {
        assert!(BeamSpec3D::new(500.0, 0.5, 0.0, 1.0).is_err());
        assert!(BeamSpec3D::new(500.0, 0.5, FRAC_PI_2, 1.0).is_err());
        assert!(BeamSpec3D::new(500.0, 0.5, 0.3, -1.0).is_err());
        assert!(BeamSpec3D::new(500.0, -0.5, 0.3, 1.0).is_err());
        let b = BeamSpec3D::from_critical_angle(500.0, 1f64.atan(), 0.5, 1.0).unwrap();
        assert!((b.critical_angle().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let below = BeamSpec3D::from_sqrt_v0_over_e(500.0, 1.3, 0.5, 1.0).unwrap();
        assert!(below.critical_angle().is_none());
        assert!(below.qw0_squared() < 0.0);
    }

    #[test]
    fn electron_one_ev_fifth_micron() {
        let kw0 = PhysicalUnits::electron(1.0, 0.2).to_kw0().unwrap();
        // Independent evaluation with the CODATA values written out inline.
        let oracle = (2.0_f64 * 9.1093837015e-31 * 1.602176634e-19).sqrt() / 1.054571817e-34 * 0.2e-6;
        assert!((kw0 - oracle).abs() < 1e-9 * oracle);
        assert!((kw0 - 1024.3).abs() < 0.5, "kw0 = {kw0}");
        assert!((kw0 / 1000.0 - 1.0).abs() < 0.03);
        // Velocity about 2c/1000.
        let v = PhysicalUnits::electron(1.0, 0.2).velocity().unwrap();
        assert!((v / 299_792_458.0 * 1000.0 - 2.0).abs() < 0.05);
    }

    #[test]
    fn scaling_invariance() {
        let a = PhysicalUnits::electron(1.0, 0.2).to_kw0().unwrap();
        let b = PhysicalUnits::electron(4.0, 0.1).to_kw0().unwrap();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn rejects_non_positive_units() {
        assert!(PhysicalUnits::electron(0.0, 0.2).to_kw0().is_err());
        assert!(PhysicalUnits::electron(1.0, -0.2).to_kw0().is_err());
        let mut u = PhysicalUnits::electron(1.0, 0.2);
        u.particle_mass = 0.0;
        assert!(u.to_kw0().is_err());
    }

    proptest! {
        #[test]
        fn regime_is_total_and_exclusive(kw0 in 1e-3f64..1e4, k0w0 in 0f64..1e4) {
            let s = PacketSpec::new(kw0, k0w0, 1.0).unwrap();
            let expected = match kw0.partial_cmp(&k0w0).unwrap() {
                std::cmp::Ordering::Greater => Regime::Above,
                std::cmp::Ordering::Less => Regime::Below,
                std::cmp::Ordering::Equal => Regime::Critical,
            };
            prop_assert_eq!(s.regime(), expected);
        }

        #[test]
        fn kw0_monotone(e in 0.01f64..100.0, w in 0.01f64..10.0, de in 1e-3f64..1.0, dw in 1e-3f64..1.0) {
            let base = PhysicalUnits::electron(e, w).to_kw0().unwrap();
            prop_assert!(PhysicalUnits::electron(e + de, w).to_kw0().unwrap() > base);
            prop_assert!(PhysicalUnits::electron(e, w + dw).to_kw0().unwrap() > base);
        }

        #[test]
        fn quadrupled_energy_half_waist(e in 0.01f64..100.0, w in 0.01f64..10.0) {
            let a = PhysicalUnits::electron(e, w).to_kw0().unwrap();
            let b = PhysicalUnits::electron(4.0 * e, w / 2.0).to_kw0().unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn ulp_perturbation_is_tiny(e in 0.01f64..100.0, w in 0.01f64..10.0) {
            let a = PhysicalUnits::electron(e, w).to_kw0().unwrap();
            let bumped = f64::from_bits(e.to_bits() + 1);
            let b = PhysicalUnits::electron(bumped, w).to_kw0().unwrap();
            prop_assert!(((a - b) / a).abs() <= 1e-12);
        }
    }
}
