//! A beam whose energy lies below the step for every angle: the shift is
//! set by the evanescent decay length and stays finite at all incidences.

use ghshift::analytic::shift_below_barrier_3d;
use ghshift::stats;
use ghshift::synth::{Beam3d, QuadSettings};
use ghshift::BeamSpec3D;

fn main() -> ghshift::Result<()> {
    for deg in [15.0f64, 45.0, 75.0] {
        let beam = BeamSpec3D::from_sqrt_v0_over_e(500.0, 1.3, deg.to_radians(), 2.0)?;
        let predicted = shift_below_barrier_3d(&beam)?.at(2.0);
        let st = stats::analyze(&Beam3d::new(beam, QuadSettings::default())?.profile()?)?;
        println!(
            "theta = {deg:4.1} deg  measured {:+.6e}  predicted {:+.6e}",
            st.peak_x_over_w0, predicted
        );
    }
    Ok(())
}
