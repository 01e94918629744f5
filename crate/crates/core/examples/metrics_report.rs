//! Figures of merit for the canonical differential and quad circulators.

use circsim::metrics::{report, ReportConfig};
use circsim::network::{CirculatorParams, SolveOptions, Topology};

fn main() -> circsim::Result<()> {
    let freqs: Vec<f64> = (0..=200).map(|k| 850e6 + 0.5e6 * k as f64).collect();
    for top in [
        Topology::differential(CirculatorParams::canonical())?,
        Topology::quad(CirculatorParams::canonical())?,
    ] {
        let r = report(&top, &freqs, &SolveOptions::default(), &ReportConfig::default())?;
        println!("{:?}", top.kind());
        println!("  IL            {:.3} dB", r.il_db);
        println!("  isolation     {:.2} dB", r.ix_db);
        println!("  worst RL      {:.2} dB", r.rl_db_min);
        println!("  20 dB IX-BW   {:.2} MHz ({:.2}%)", r.ix_bw_hz / 1e6, 100.0 * r.ix_bw_frac);
        println!("  worst IMP     {:.2} dBc (n = {})", r.imp_worst_dbc, r.imp_worst_n);
        println!("  delay spread  {:.3} ns", r.delay_dispersion_s * 1e9);
    }
    Ok(())
}
