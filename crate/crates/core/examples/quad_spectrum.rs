//! Output spectra of the quad circulator: second-order IMP cancellation and
//! its sensitivity to a clock phase error between the two sub-networks.

use circsim::network::{solve, CirculatorParams, Combining, Topology};
use circsim::spectra::imp_levels_dbc;

fn main() -> circsim::Result<()> {
    let tone = 894e6;
    for combining in [Combining::Ideal, Combining::Tee] {
        let top = Topology::quad(CirculatorParams { combining, ..CirculatorParams::canonical() })?;
        let spec = solve(&top, tone, 16)?.spectrum(2, 1)?;
        println!("{combining:?} combining, ports at {:?} ohm:", top.port_z0());
        for (n, dbc) in imp_levels_dbc(&spec)?.into_iter().filter(|(n, _)| (1..=5).contains(n)) {
            println!("  n = {n}  {dbc:9.2} dBc");
        }
    }

    println!("\nphase error between sub-networks:");
    for deg in [0.0, 1.0, 2.0, 5.0, 10.0] {
        let p = CirculatorParams { phase_error_rad: f64::to_radians(deg), ..CirculatorParams::canonical() };
        let spec = solve(&Topology::quad(p)?, tone, 16)?.spectrum(2, 1)?;
        let levels = imp_levels_dbc(&spec)?;
        println!("  {deg:4.1} deg: n = 2 at {:8.2} dBc, n = 4 at {:7.2} dBc", levels[&2], levels[&4]);
    }
    Ok(())
}
