//! The three filter models side by side, plus the S/Y conversions.

use circsim::filters::{s_to_y, y_to_s, Extrapolation, FilterModel};
use circsim::NetworkData;

fn main() -> circsim::Result<()> {
    let brick = FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.9)?;
    // 15 to 23 ns of delay across the band, 10 MHz skirts, 20 dB return loss.
    let parametric = FilterModel::parametric_delay_span(900e6, 40e6, 10e6, 15e-9, 23e-9, 0.9, 20.0)?;
    let sampled = NetworkData::from_fn((0..=40).map(|k| 860e6 + 2e6 * k as f64).collect(), 50.0, |f| {
        parametric.evaluate(f).expect("in range")
    })?;
    let tabulated = FilterModel::tabulated(sampled, Extrapolation::Reflective)?;

    println!("{:>8} {:>22} {:>22} {:>22}", "MHz", "brick-wall |S21| |S11|", "parametric", "tabulated");
    for f in [870e6, 885e6, 900e6, 915e6, 919e6, 925e6, 950e6] {
        let cell = |m: &FilterModel| {
            let s = m.evaluate(f).expect("valid frequency");
            format!("{:>10.4} {:>10.4}", s[(1, 0)].norm(), s[(0, 0)].norm())
        };
        println!("{:>8.1} {:>22} {:>22} {:>22}", f / 1e6, cell(&brick), cell(&parametric), cell(&tabulated));
    }

    for (name, m) in [("brick-wall", &brick), ("parametric", &parametric), ("tabulated", &tabulated)] {
        let (lo, hi) = m.passband();
        println!("{name}: passband {:.2} - {:.2} MHz", lo / 1e6, hi / 1e6);
    }

    let s = parametric.evaluate(905e6)?;
    let y = s_to_y(&s, 50.0)?;
    let back = y_to_s(&y, 50.0)?;
    println!("\nY at 905 MHz (S):\n{y:.5}");
    println!("S -> Y -> S error: {:.2e}", (back - s).norm());
    Ok(())
}
