//! Spreading of a free Gaussian packet: the numerical spectral sum against
//! the closed form, and the analytic width √(1 + 4τ²).

use ghshift::analytic::incident_closed_form;
use ghshift::stats;
use ghshift::synth::{Packet1d, QuadSettings, Wave};
use ghshift::PacketSpec;

fn main() -> ghshift::Result<()> {
    for tau in [0.0, 0.5, 1.0, 2.0] {
        let spec = PacketSpec::new(200.0, 0.0, tau)?;
        let engine = Packet1d::new(spec, QuadSettings::default())?;

        let centre = spec.kw0() * tau;
        let mut worst = 0.0f64;
        for i in -20..=20 {
            let x = centre + 0.2 * f64::from(i);
            let diff = engine.evaluate(Wave::Incident, x)? - incident_closed_form(&spec, x);
            worst = worst.max(diff.norm());
        }

        let profile = engine.profile(Wave::Incident)?;
        let st = stats::analyze(&profile)?;
        let sigma = (1.0 + 4.0 * tau * tau).sqrt();
        println!(
            "tau={tau:4.1}  max|numeric-closed|={worst:.2e}  peak-K*tau={:+.2e}  \
             width factor {sigma:.4}  norm {:.6}",
            st.peak_x_over_w0 - centre,
            st.norm
        );
    }
    Ok(())
}
