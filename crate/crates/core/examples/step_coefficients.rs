//! Reflection and transmission amplitudes of the step in 1D and for the
//! tilted 3D geometry, with the flux balance |R|² + Re(q/k)|T|² = 1.

use ghshift::coeffs::{self, step_1d};
use ghshift::BeamSpec3D;

fn main() -> ghshift::Result<()> {
    println!("1D step, k0 w0 = 300");
    for kw0 in [200.0, 299.0, 301.0, 500.0, 1000.0] {
        let c = step_1d(kw0, 300.0)?;
        println!(
            "  k w0 = {kw0:6.1}  R = {:+.6}{:+.6}i  |R|^2 = {:.6}  evanescent = {}  flux defect {:.1e}",
            c.r.re,
            c.r.im,
            c.r.norm_sqr(),
            c.is_evanescent(),
            c.flux_defect()
        );
    }

    let beam = BeamSpec3D::from_critical_angle(500.0, 1f64.atan(), 50f64.to_radians(), 1.0)?;
    println!("\n3D, theta_c = 45 deg, theta = 50 deg");
    for kx in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        let r = coeffs::reflection_3d(kx, 0.0, &beam)?;
        println!("  kx w0 = {kx:+.1}  |R| = {:.6}  arg R = {:+.6}", r.norm(), r.arg());
    }
    let lin = coeffs::reflection_3d_linearized(&beam)?;
    println!("  linear expansion: R0 = {:.6}  slope = {:+.6e}", lin.r0, lin.slope);
    Ok(())
}
