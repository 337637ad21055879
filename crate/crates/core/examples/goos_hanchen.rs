//! Total internal reflection of a 3D beam: the profile along the
//! interface-projected axis x* is displaced by the Goos–Hänchen shift.

use ghshift::analytic::shift_goos_hanchen;
use ghshift::stats;
use ghshift::synth::{Beam3d, QuadSettings};
use ghshift::BeamSpec3D;

fn main() -> ghshift::Result<()> {
    let theta_c = 1f64.atan();
    for deg in [55.0f64, 65.0, 75.0] {
        let beam = BeamSpec3D::from_critical_angle(500.0, theta_c, deg.to_radians(), 1.0)?;
        let predicted = shift_goos_hanchen(&beam)?.at(1.0);
        let engine = Beam3d::new(beam, QuadSettings::default())?;
        let st = stats::analyze(&engine.profile()?)?;
        println!(
            "theta = {deg:4.1} deg  peak x* = {:+.6}  predicted {:+.6}  convergence {:.1e}",
            st.peak_x_over_w0,
            predicted,
            engine.convergence_defect()?
        );
    }
    Ok(())
}
