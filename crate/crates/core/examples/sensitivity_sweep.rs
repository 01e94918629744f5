//! Metric trends as switch and clock non-idealities vary.

use std::f64::consts::PI;

use circsim::metrics::{report, ReportConfig};
use circsim::network::{CirculatorParams, SolveOptions, Topology};
use circsim::FilterModel;

fn main() -> circsim::Result<()> {
    let freqs: Vec<f64> = (0..=200).map(|k| 850e6 + 0.5e6 * k as f64).collect();
    let run = |top: Topology| report(&top, &freqs, &SolveOptions::default(), &ReportConfig::default());

    println!("switch off resistance (differential):");
    for roff in [1e2, 1e3, 1e4, 1e6] {
        let r = run(Topology::differential(CirculatorParams { roff_ohm: roff, ..CirculatorParams::canonical() })?)?;
        println!("  {roff:8.0e} ohm  IL {:.3} dB  IX {:6.2} dB  IX-BW {:6.2} MHz", r.il_db, r.ix_db, r.ix_bw_hz / 1e6);
    }

    println!("switch on resistance (differential):");
    for ron in [0.5, 2.0, 5.0, 10.0] {
        let r = run(Topology::differential(CirculatorParams { ron_ohm: ron, ..CirculatorParams::canonical() })?)?;
        println!("  {ron:5.1} ohm  IL {:.3} dB", r.il_db);
    }

    // Below 50% duty a filter side is briefly left floating. With an open
    // out-of-band reflection the band-limited filter current is forced to
    // vanish over those gaps, which all but blocks transmission; a shorted
    // out-of-band reflection does not have this problem.
    println!("duty cycle (differential):");
    for (name, oob_phase) in [("open", 0.0), ("short", PI)] {
        let filter = FilterModel::brick_wall_with_phase(900e6, 40e6, 20e-9, 0.9, oob_phase)?;
        for duty in [0.45, 0.5, 0.55] {
            let p = CirculatorParams { duty, ..CirculatorParams::new(filter.clone()) };
            let r = run(Topology::differential(p)?)?;
            println!(
                "  {name:<5} out of band, duty {duty:.2}  IL {:6.3} dB  worst IMP {:7.2} dBc (n = {})",
                r.il_db, r.imp_worst_dbc, r.imp_worst_n
            );
        }
    }

    println!("sub-network phase error (quad):");
    for deg in [0.0, 1.0, 2.0, 5.0, 10.0] {
        let p = CirculatorParams { phase_error_rad: f64::to_radians(deg), ..CirculatorParams::canonical() };
        let r = run(Topology::quad(p)?)?;
        println!("  {deg:4.1} deg  worst IMP {:8.2} dBc (n = {})", r.imp_worst_dbc, r.imp_worst_n);
    }
    Ok(())
}
