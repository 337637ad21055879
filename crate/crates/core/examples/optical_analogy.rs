//! The step as a dielectric interface with n² = E/(E − V0).

use ghshift::analytic::{optical_translate, RefractiveIndex};
use ghshift::BeamSpec3D;

fn main() -> ghshift::Result<()> {
    for ratio in [0.36, 0.5, 2.0] {
        let beam = BeamSpec3D::new(500.0, ratio, 60f64.to_radians(), 1.0)?;
        let o = optical_translate(&beam)?;
        let index = match o.index {
            RefractiveIndex::Real(n) => format!("n = {n:.6}"),
            RefractiveIndex::Imaginary(k) => format!("n = {k:.6} i"),
        };
        println!(
            "V0/E = {ratio:4.2}  {index}  theta_c = {:?}  alpha_TE = {:.4}{:+.4}i  alpha_TM = {:.4}{:+.4}i",
            o.theta_c_optical.map(f64::to_degrees),
            o.alpha_te.re,
            o.alpha_te.im,
            o.alpha_tm.re,
            o.alpha_tm.im
        );
    }
    Ok(())
}
