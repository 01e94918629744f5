//! Writing, re-reading and analysing a two-port Touchstone file.

use std::f64::consts::TAU;

use circsim::touchstone::{group_delay, parse, write, DataFormat, FrequencyUnit};
use circsim::NetworkData;
use num_complex::Complex64;

fn main() -> circsim::Result<()> {
    // 20 ns matched delay line, 0.5 dB loss, 850 to 950 MHz.
    let freqs: Vec<f64> = (0..=100).map(|k| 850e6 + 1e6 * k as f64).collect();
    let gain = 10f64.powf(-0.5 / 20.0);
    let net = NetworkData::from_fn(freqs, 50.0, |f| {
        let t = Complex64::from_polar(gain, -TAU * f * 20e-9);
        let z = Complex64::new(0.0, 0.0);
        nalgebra::Matrix2::new(z, t, t, z)
    })?;

    for format in [DataFormat::RealImag, DataFormat::MagAngle, DataFormat::DbAngle] {
        let text = write(&net, format, FrequencyUnit::MHz);
        let back = parse(&text)?;
        let worst = net
            .smatrix
            .iter()
            .zip(&back.smatrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!("{format:?}: {} lines, worst round-trip error {worst:.2e}", text.lines().count());
    }

    let preview = write(&net, DataFormat::DbAngle, FrequencyUnit::GHz);
    println!("\n{}", preview.lines().take(4).collect::<Vec<_>>().join("\n"));

    for f in [870e6, 900e6, 930e6] {
        println!("group delay at {} MHz: {:.4} ns", f / 1e6, group_delay(&net, 2, 1, f)? * 1e9);
    }
    Ok(())
}
