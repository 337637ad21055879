//! Converting a laboratory electron beam to adimensional parameters.

use ghshift::analytic::shift_delay_time;
use ghshift::{PacketSpec, PhysicalUnits};

fn main() -> ghshift::Result<()> {
    let units = PhysicalUnits::electron(1.0, 0.2);
    let kw0 = units.to_kw0()?;
    let k0w0 = units.k0w0_for_step(1.2)?;
    println!("E = 1 eV, w0 = 0.2 um  ->  k w0 = {kw0:.3}, k0 w0 (V0 = 1.2 eV) = {k0w0:.3}");
    println!("velocity {:.4e} m/s", units.velocity()?);

    let spec = PacketSpec::new(kw0, k0w0, 1.0)?;
    let shift = shift_delay_time(&spec)?.at(1.0);
    println!(
        "tau = 1 is {:.3e} s; delay shift {shift:.3e} w0 = {:.3e} m",
        units.seconds_from_tau(1.0)?,
        units.meters_from_w0(shift)?
    );
    Ok(())
}
