//! Sideband coefficients of one gated path and the IMP cancellation of the
//! differential and quad arrangements.
//!
//! ```text
//! cargo run --example closed_form_spectra
//! ```

use circsim::spectra::{
    branch_output_coeffs, closed_form_spectrum, imp_levels_dbc, path_sidebands, theoretical_insertion_loss,
    Configuration, PathConfig,
};
use circsim::ClockSpec;

fn main() -> circsim::Result<()> {
    // 900 MHz tone, 12.5 MHz square clocks, 20 ns lossless brick-wall filter.
    let clock = ClockSpec::square(12.5e6, 0.0)?;
    let path = PathConfig::new(900e6, clock, 20e-9, 20e6, 0.0)?;

    let s = path_sidebands(&path)?;
    println!("after the first switch and the filter:");
    println!("  f + fm  |a1| = {:.5}", s.a1.norm());
    println!("  f       |a2| = {:.5}", s.a2.norm());
    println!("  f - fm  |a3| = {:.5}", s.a3.norm());

    println!("\nsingle path output b_n:");
    let b = branch_output_coeffs(&path, 4)?;
    for (n, c) in b.iter() {
        println!("  n = {n:+}  |b| = {:.5}  arg = {:+8.3} deg", c.norm(), c.arg().to_degrees());
    }

    for configuration in [Configuration::Single, Configuration::Differential, Configuration::Quad] {
        let spec = closed_form_spectrum(&path, configuration, 5)?;
        println!(
            "\n{configuration:?}: fundamental {:.5}, IL {:.3} dB",
            spec.coeff(0).norm(),
            theoretical_insertion_loss(&spec)?
        );
        for (n, dbc) in imp_levels_dbc(&spec)?.into_iter().filter(|(n, _)| *n > 0) {
            println!("  n = {n}  {dbc:8.2} dBc");
        }
    }
    Ok(())
}
