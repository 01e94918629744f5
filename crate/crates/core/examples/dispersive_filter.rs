//! A circulator built from dispersive, imperfectly matched filters instead
//! of ideal brick walls.

use circsim::metrics::{report, ReportConfig};
use circsim::network::{CirculatorParams, SolveOptions, Topology};
use circsim::FilterModel;

fn main() -> circsim::Result<()> {
    let freqs: Vec<f64> = (0..=200).map(|k| 850e6 + 0.5e6 * k as f64).collect();
    let filters = [
        ("brick-wall 20 ns", FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.9)?),
        ("15-23 ns, RL inf", FilterModel::parametric_delay_span(900e6, 40e6, 10e6, 15e-9, 23e-9, 0.9, f64::INFINITY)?),
        ("15-23 ns, RL 15 dB", FilterModel::parametric_delay_span(900e6, 40e6, 10e6, 15e-9, 23e-9, 0.9, 15.0)?),
    ];
    for (name, filter) in filters {
        let top = Topology::differential(CirculatorParams::new(filter))?;
        let r = report(&top, &freqs, &SolveOptions::default(), &ReportConfig::default())?;
        println!(
            "{name:<20} IL {:.3} dB  IX {:6.2} dB  RL {:6.2} dB  IX-BW {:6.2} MHz  delay spread {:.2} ns",
            r.il_db,
            r.ix_db,
            r.rl_db_min,
            r.ix_bw_hz / 1e6,
            r.delay_dispersion_s * 1e9
        );
    }
    Ok(())
}
