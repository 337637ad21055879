//! Above the barrier the reflected peak drifts linearly in τ because the
//! reflection coefficient reweights the spectrum toward faster components.

use ghshift::analytic::shift_velocity_change;
use ghshift::stats;
use ghshift::synth::{Packet1d, QuadSettings, Wave};
use ghshift::PacketSpec;

fn main() -> ghshift::Result<()> {
    let (kw0, k0w0) = (500.0, 300.0);
    for tau in [0.5, 1.0, 2.0] {
        let spec = PacketSpec::new(kw0, k0w0, tau)?;
        let predicted = shift_velocity_change(&spec)?.at(tau);
        let engine = Packet1d::new(spec, QuadSettings::default())?;
        let st = stats::analyze(&engine.profile(Wave::Reflected)?)?;
        let measured = st.peak_x_over_w0 + kw0 * tau;
        println!(
            "tau={tau:3.1}  measured {measured:.6}  predicted {predicted:.6}  ratio {:.4}",
            measured / predicted
        );
    }
    Ok(())
}
