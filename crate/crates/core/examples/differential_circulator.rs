//! Solving the four-port differential circulator and checking its
//! circulation sense.

use circsim::network::{solve, CirculatorParams, Topology};

fn db(x: num_complex::Complex64) -> f64 {
    20.0 * x.norm().log10()
}

fn main() -> circsim::Result<()> {
    let top = Topology::differential(CirculatorParams::canonical())?;
    println!("{} switches, {} filters", top.switches().len(), top.filter_count());
    for sw in top.switches() {
        println!(
            "  {:<5} port {:?} -> filter {} side {}  clock phase {:6.1} deg",
            sw.name,
            sw.port,
            sw.filter,
            sw.side,
            sw.model.clock.phase_rad.to_degrees()
        );
    }

    let s = solve(&top, 900e6, 16)?;
    println!("\n|S| in dB at 900 MHz (row = out, column = in):");
    for out in 1..=4 {
        let row: Vec<String> = (1..=4).map(|i| format!("{:8.2}", db(s.s(out, i)))).collect();
        println!("  {}", row.join(" "));
    }
    println!("\nforward  S21 S32 S43 S14: {:.3} {:.3} {:.3} {:.3} dB", db(s.s(2, 1)), db(s.s(3, 2)), db(s.s(4, 3)), db(s.s(1, 4)));
    println!("reverse  S12 S23 S34 S41: {:.2} {:.2} {:.2} {:.2} dB", db(s.s(1, 2)), db(s.s(2, 3)), db(s.s(3, 4)), db(s.s(4, 1)));
    println!("power leaving all ports and sidebands for port 1 input: {:.4}", s.output_power(1)?);

    // Freezing the switches (roff = ron) gives a reciprocal LTI network.
    let frozen = Topology::differential(CirculatorParams { roff_ohm: 5.0, ..CirculatorParams::canonical() })?;
    println!("frozen switches, max |Sij - Sji|: {:.2e}", solve(&frozen, 903e6, 4)?.reciprocity_error());
    Ok(())
}
