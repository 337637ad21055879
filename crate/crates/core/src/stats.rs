//! Peak and centroid estimators for sampled profiles.

use crate::error::{Error, Result};
use crate::synth::BeamProfile;

/// Minimum number of samples accepted by the estimators.
pub const MIN_POINTS: usize = 16;

/// Boundary intensity, relative to the peak, above which the moments are
/// flagged as affected by truncated tails.
pub const TAIL_THRESHOLD: f64 = 1e-8;

/// Composite Simpson weights on `n` uniformly spaced samples.
///
/// For an even sample count the rule is the average of the two variants
/// that place the single 3/8 segment at the start or at the end, which keeps
/// the weights symmetric under reversal of the grid.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![0.5 * h, 0.5 * h],
        3 => vec![h / 3.0, 4.0 * h / 3.0, h / 3.0],
        4 => vec![3.0 * h / 8.0, 9.0 * h / 8.0, 9.0 * h / 8.0, 3.0 * h / 8.0],
        _ if n % 2 == 1 => {
            let mut w = vec![0.0; n];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = if i == 0 || i == n - 1 {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                };
            }
            w
        }
        _ => {
            let mut head = vec![0.0; n];
            let eighths = [3.0, 9.0, 9.0, 3.0].map(|c| c * h / 8.0);
            head[..4].copy_from_slice(&eighths);
            for (j, s) in simpson_weights(n - 3, h).into_iter().enumerate() {
                head[3 + j] += s;
            }
            let mut w = head.clone();
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = 0.5 * (*wi + head[n - 1 - i]);
            }
            w
        }
    }
}

/// A moment estimate with a flag raised when the grid cuts the tails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub tail_truncated: bool,
}

fn tails_truncated(intensity: &[f64]) -> bool {
    let peak = intensity.iter().cloned().fold(0.0, f64::max);
    let edge = intensity[0].max(intensity[intensity.len() - 1]);
    edge > TAIL_THRESHOLD * peak
}

fn require_points(profile: &BeamProfile) -> Result<()> {
    if profile.len() < MIN_POINTS {
        return Err(Error::Domain(format!(
            "profile has {} points, at least {MIN_POINTS} are needed",
            profile.len()
        )));
    }
    Ok(())
}

/// Position of the maximum, refined by a parabola through the three
/// samples around the discrete argmax.
pub fn peak_position(profile: &BeamProfile) -> Result<f64> {
    require_points(profile)?;
    let y = profile.intensity();
    let x = profile.grid();
    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty profile");
    let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(ymax > 0.0) || ymax == ymin {
        return Err(Error::Degenerate("intensity is flat".into()));
    }
    if imax == 0 || imax == y.len() - 1 {
        return Err(Error::Window(format!(
            "maximum sits on the grid boundary at x = {}; recentre the window",
            x[imax]
        )));
    }
    let (a, b, c) = (y[imax - 1], y[imax], y[imax + 1]);
    let curvature = a - 2.0 * b + c;
    if curvature >= 0.0 {
        return Ok(x[imax]);
    }
    Ok(x[imax] + profile.spacing() * (a - c) / (2.0 * curvature))
}

fn moments(profile: &BeamProfile) -> Result<(f64, f64, f64)> {
    require_points(profile)?;
    let w = simpson_weights(profile.len(), profile.spacing());
    let (mut m0, mut m1) = (0.0, 0.0);
    for ((&x, &y), &wi) in profile.grid().iter().zip(profile.intensity()).zip(&w) {
        m0 += wi * y;
        m1 += wi * y * x;
    }
    if !(m0 > 0.0) {
        return Err(Error::Degenerate("profile carries no intensity".into()));
    }
    let mean = m1 / m0;
    let (mut m2, mut m3) = (0.0, 0.0);
    for ((&x, &y), &wi) in profile.grid().iter().zip(profile.intensity()).zip(&w) {
        let d = x - mean;
        m2 += wi * y * d * d;
        m3 += wi * y * d * d * d;
    }
    Ok((mean, m2 / m0, m3 / m0))
}

/// Intensity-weighted centroid `∫x|ψ|² / ∫|ψ|²` with Simpson weights.
pub fn mean_position(profile: &BeamProfile) -> Result<Estimate> {
    let (mean, _, _) = moments(profile)?;
    Ok(Estimate {
        value: mean,
        tail_truncated: tails_truncated(profile.intensity()),
    })
}

/// Third central moment over the cubed standard deviation.
pub fn symmetry_defect(profile: &BeamProfile) -> Result<Estimate> {
    let (_, var, m3) = moments(profile)?;
    if !(var > 0.0) {
        return Err(Error::Degenerate("profile has zero width".into()));
    }
    Ok(Estimate {
        value: m3 / var.powf(1.5),
        tail_truncated: tails_truncated(profile.intensity()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamStatistics {
    pub peak_x_over_w0: f64,
    pub mean_x_over_w0: f64,
    pub norm: f64,
    pub symmetry_defect: f64,
    pub tail_truncated: bool,
}

pub fn analyze(profile: &BeamProfile) -> Result<BeamStatistics> {
    let peak = peak_position(profile)?;
    let (mean, var, m3) = moments(profile)?;
    Ok(BeamStatistics {
        peak_x_over_w0: peak,
        mean_x_over_w0: mean,
        norm: profile.norm(),
        symmetry_defect: if var > 0.0 { m3 / var.powf(1.5) } else { 0.0 },
        tail_truncated: tails_truncated(profile.intensity()),
    })
}

/// Least-squares line with its largest absolute residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("line fit needs two or more paired samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (intercept + slope * a)).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::ProfileMeta;
    use proptest::prelude::*;

    fn sampled(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> BeamProfile {
        let h = (hi - lo) / (n - 1) as f64;
        let grid: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
        let intensity = grid.iter().map(|&x| f(x)).collect();
        BeamProfile::new(grid, intensity, ProfileMeta::Synthetic).unwrap()
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        for n in [5usize, 6, 7, 8, 33, 4096] {
            let h = 2.0 / (n - 1) as f64;
            let w = simpson_weights(n, h);
            let integral: f64 = (0..n)
                .map(|i| {
                    let x = -1.0 + h * i as f64;
                    w[i] * (x * x * x + 3.0 * x * x + 1.0)
                })
                .sum();
            assert!((integral - 4.0).abs() < 1e-13, "n = {n}: {integral}");
            let rev: Vec<f64> = w.iter().rev().cloned().collect();
            assert_eq!(w, rev);
        }
    }

    #[test]
    fn recovers_offset_gaussian_peak() {
        let n = 801;
        let h = 16.0 / 800.0;
        let centre = 0.3 * h + 0.1;
        let p = sampled(-8.0, 8.0, n, |x| (-2.0 * (x - centre).powi(2)).exp());
        let peak = peak_position(&p).unwrap();
        assert!((peak - centre).abs() < 1e-3 * h, "{}", (peak - centre) / h);
        let mean = mean_position(&p).unwrap();
        assert!(!mean.tail_truncated);
        assert!((peak - mean.value).abs() < h);
        assert!(symmetry_defect(&p).unwrap().value.abs() < 1e-6);
    }

    #[test]
    fn gamma_density_centroid() {
        // x^2 e^{-x} on [0, 60]: centroid 3, skewness 2/√3.
        let p = sampled(0.0, 60.0, 6001, |x| x * x * (-x).exp());
        let mean = mean_position(&p).unwrap();
        assert!((mean.value - 3.0).abs() < 1e-6);
        let skew = symmetry_defect(&p).unwrap().value;
        assert!((skew - 2.0 / 3f64.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn mirrored_profile_flips_defect() {
        let f = |x: f64| (x + 5.0) * (x + 5.0) * (-(x + 5.0)).exp() * f64::from(x > -5.0);
        let p = sampled(-10.0, 30.0, 2001, f);
        let q = sampled(-30.0, 10.0, 2001, |x| f(-x));
        let a = symmetry_defect(&p).unwrap().value;
        let b = symmetry_defect(&q).unwrap().value;
        assert!((a + b).abs() < 1e-12 * a.abs());
    }

    #[test]
    fn boundary_maximum_is_a_window_error() {
        let p = sampled(0.0, 1.0, 64, |x| (-x).exp());
        assert!(matches!(peak_position(&p), Err(Error::Window(_))));
        let mean = mean_position(&p).unwrap();
        assert!(mean.tail_truncated);
    }

    #[test]
    fn flat_profile_is_degenerate() {
        let p = sampled(0.0, 1.0, 64, |_| 1.0);
        assert!(matches!(peak_position(&p), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_few_points() {
        let p = sampled(0.0, 1.0, 8, |x| x * (1.0 - x));
        assert!(peak_position(&p).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let fit = fit_line(&[0.5, 1.0, 2.0], &[2.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-15);
        assert!((fit.intercept - 1.0).abs() < 1e-15);
        assert!(fit.max_residual < 1e-15);
    }

    #[test]
    fn halving_spacing_is_stable() {
        let f = |x: f64| (-2.0 * (x - 0.37).powi(2)).exp() * (1.0 + 0.1 * x);
        let coarse = sampled(-8.0, 8.0, 2049, f);
        let fine = sampled(-8.0, 8.0, 4097, f);
        let dp = peak_position(&coarse).unwrap() - peak_position(&fine).unwrap();
        let dm = mean_position(&coarse).unwrap().value - mean_position(&fine).unwrap().value;
        assert!(dp.abs() < 1e-4 && dm.abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn translation_equivariance(shift in -3.0f64..3.0) {
            let n = 1601;
            let h = 16.0 / 1600.0;
            let f = |x: f64| (-2.0 * x * x).exp() * (1.0 + 0.2 * (x * 1.3).tanh());
            let p = sampled(-8.0, 8.0, n, f);
            let q = sampled(-8.0 + shift, 8.0 + shift, n, |x| f(x - shift));
            let dp = peak_position(&q).unwrap() - peak_position(&p).unwrap();
            let dm = mean_position(&q).unwrap().value - mean_position(&p).unwrap().value;
            prop_assert!((dp - shift).abs() < 1e-3 * h);
            prop_assert!((dm - shift).abs() < 1e-9);
        }
    }
}
