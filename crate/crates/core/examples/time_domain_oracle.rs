//! Sampled simulation of one gated path, compared with the closed-form
//! sideband coefficients.

use std::f64::consts::FRAC_PI_2;

use circsim::spectra::{branch_output_coeffs, PathConfig};
use circsim::timedomain::{off_sideband_floor, simulate_path, spectrum_at_sidebands, SimGrid};
use circsim::{ClockSpec, FilterModel};

fn main() -> circsim::Result<()> {
    let grid = SimGrid::oracle();
    let filter = FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.0)?;
    println!("{} samples at {} GHz, bin {} kHz", grid.n_samples, grid.fs_hz / 1e9, grid.bin_hz() / 1e3);

    for phase in [0.0, FRAC_PI_2] {
        let clock = ClockSpec::square(12.5e6, phase)?;
        let y = simulate_path(&grid, clock, clock.shifted(FRAC_PI_2), &filter)?;
        let measured = spectrum_at_sidebands(&y, &grid, 4)?;
        let expected = branch_output_coeffs(&PathConfig::new(900e6, clock, 20e-9, 20e6, 0.0)?, 4)?;
        println!("\nclock phase {:.0} deg", phase.to_degrees());
        for n in -4..=4 {
            let (m, e) = (measured.coeff(n), expected.coeff(n));
            println!(
                "  n = {n:+}  sampled {:.5}  closed form {:.5}  |diff| {:.1e}",
                m.norm(),
                e.norm(),
                (m - e).norm()
            );
        }
        println!("  largest bin between sidebands: {:.1e}", off_sideband_floor(&y, &grid, 4)?);
    }
    Ok(())
}
