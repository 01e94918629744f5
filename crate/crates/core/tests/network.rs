use std::f64::consts::{FRAC_PI_2, TAU};

use circsim::metrics::{delay_dispersion, report, worst_imp_dbc, FundamentalSweep, ReportConfig};
use circsim::network::{
    output_spectrum, solve, switch_conductance_harmonics, sweep, CirculatorParams, Combining, SolveOptions,
    SwitchModel, Topology,
};
use circsim::spectra::{branch_output_coeffs, PathConfig};
use circsim::touchstone::group_delay;
use circsim::{ClockSpec, FilterModel, NetworkData};
use num_complex::Complex64;

fn dbc(s: &circsim::HarmonicSpectrum, n: i32) -> f64 {
    20.0 * (s.coeff(n).norm() / s.coeff(0).norm()).log10()
}

/// Sideband `n` of one ideal gated path from numerically integrated gate
/// harmonics.
fn quadrature_path(n: i32, f_rf: f64) -> Complex64 {
    const M: usize = 1 << 15;
    let gate = |k: i32, phase: f64| -> Complex64 {
        (0..M)
            .map(|j| (j as f64 + 0.5) / M as f64)
            .filter(|x| (x - phase / TAU).rem_euclid(1.0) < 0.5)
            .map(|x| Complex64::from_polar(1.0, -TAU * k as f64 * x))
            .sum::<Complex64>()
            / M as f64
    };
    (-1..=1)
        .map(|k| gate(k, 0.0) * Complex64::from_polar(1.0, -TAU * (f_rf + k as f64 * 12.5e6) * 20e-9) * gate(n - k, FRAC_PI_2))
        .sum()
}

#[test]
fn single_path_with_ideal_switches_matches_gated_path() {
    let top = Topology::single_path(CirculatorParams::ideal()).unwrap();
    let spec = output_spectrum(&top, 900e6, 1, 2, 16).unwrap();
    let closed = branch_output_coeffs(
        &PathConfig::new(900e6, ClockSpec::square(12.5e6, 0.0).unwrap(), 20e-9, 20e6, 0.0).unwrap(),
        3,
    )
    .unwrap();
    for n in -3..=3 {
        let oracle = quadrature_path(n, 900e6).norm();
        let solver = spec.coeff(n).norm();
        assert!((solver - oracle).abs() <= 1e-3 * oracle, "n = {n}: {solver} vs {oracle}");
        assert!((closed.coeff(n).norm() - oracle).abs() <= 1e-4 * oracle);
    }
}

#[test]
fn switch_conductance_examples() {
    let sw = SwitchModel::new(5.0, 1e6, ClockSpec::square(12.5e6, 0.0).unwrap()).unwrap();
    let g = switch_conductance_harmonics(&sw, 4);
    assert!((g[&0].re - 0.1000005).abs() < 1e-12);
    assert!(g[&2].norm() < 1e-15);
    assert!((g[&1].norm() - (0.2 - 1e-6) / std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn differential_even_only_spectrum_off_center() {
    let top = Topology::differential(CirculatorParams::canonical()).unwrap();
    let spec = output_spectrum(&top, 892e6, 1, 2, 8).unwrap();
    for n in [-7, -5, -3, -1, 1, 3, 5, 7] {
        assert!(dbc(&spec, n) <= -120.0, "n = {n}: {}", dbc(&spec, n));
    }
    assert!(dbc(&spec, 2) > -40.0);
}

#[test]
fn quad_cancels_first_three_imps() {
    for combining in [Combining::Tee, Combining::Ideal] {
        let top = Topology::quad(CirculatorParams { combining, ..CirculatorParams::canonical() }).unwrap();
        let spec = output_spectrum(&top, 894e6, 1, 2, 8).unwrap();
        for n in [-3, -2, -1, 1, 2, 3] {
            assert!(dbc(&spec, n) <= -120.0, "{combining:?} n = {n}");
        }
        assert!(dbc(&spec, 4) > -40.0);
    }
}

#[test]
fn quad_worst_imp_levels() {
    let ideal = Topology::quad(CirculatorParams { combining: Combining::Ideal, ..CirculatorParams::ideal() }).unwrap();
    let spec = solve(&ideal, 900e6, 8).unwrap().spectrum(2, 1).unwrap();
    assert!(worst_imp_dbc(&spec, 3).unwrap().1 < -120.0);
    let (n, level) = worst_imp_dbc(&spec, 4).unwrap();
    assert_eq!(n.abs(), 4);
    assert!((level + 30.5).abs() < 0.05, "{level}");

    let skewed = Topology::quad(CirculatorParams {
        phase_error_rad: 5f64.to_radians(),
        ..CirculatorParams::canonical()
    })
    .unwrap();
    let spec = solve(&skewed, 900e6, 8).unwrap().spectrum(2, 1).unwrap();
    let (_, level) = worst_imp_dbc(&spec, 2).unwrap();
    assert!(level.is_finite() && level > -120.0 && level < -16.5, "{level}");
}

#[test]
fn passivity_of_solutions() {
    let tops = [
        Topology::differential(CirculatorParams::canonical()).unwrap(),
        Topology::differential(CirculatorParams::ideal()).unwrap(),
        Topology::quad(CirculatorParams::canonical()).unwrap(),
        Topology::single_path(CirculatorParams::canonical()).unwrap(),
    ];
    for top in &tops {
        for f in [870e6, 893e6, 900e6, 917e6] {
            let s = solve(top, f, 16).unwrap();
            for p in 1..=top.n_ports() {
                assert!(s.output_power(p).unwrap() <= 1.0 + 1e-6, "{:?} at {f}", top.kind());
            }
        }
    }
}

#[test]
fn sweep_is_pure_and_ordered() {
    let top = Topology::differential(CirculatorParams::canonical()).unwrap();
    let grid: Vec<f64> = (0..=200).map(|k| 850e6 + 0.5e6 * k as f64).collect();
    let rows = sweep(&top, &grid, 16).unwrap();
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().zip(&grid).all(|(r, f)| r.f_rf_hz == *f));
    assert_eq!(sweep(&top, &[900e6], 16).unwrap()[0], solve(&top, 900e6, 16).unwrap());
    let twice = sweep(&top, &[895e6, 895e6], 16).unwrap();
    assert_eq!(twice[0], twice[1]);

    // S21 phase falls monotonically across the inner passband.
    let inner: Vec<f64> = rows
        .iter()
        .filter(|r| (r.f_rf_hz - 900e6).abs() <= 5e6)
        .map(|r| r.s(2, 1).arg())
        .collect();
    let phase = circsim::touchstone::unwrap_phase(&inner);
    assert!(phase.windows(2).all(|w| w[1] < w[0]));
}

fn grid() -> Vec<f64> {
    (0..=200).map(|k| 850e6 + 0.5e6 * k as f64).collect()
}

#[test]
fn canonical_metrics_report() {
    let top = Topology::differential(CirculatorParams::canonical()).unwrap();
    let r = report(&top, &grid(), &SolveOptions::default(), &ReportConfig::default()).unwrap();
    assert!(r.il_db >= 0.0);
    assert!(r.ix_db > 20.0);
    assert!(r.ix_bw_hz > 0.0 && r.ix_bw_hz < 40e6);
    assert!((r.ix_bw_frac - r.ix_bw_hz / 900e6).abs() < 1e-3 * r.ix_bw_frac);
    assert!((r.imp_worst_dbc + 16.5).abs() < 0.1);
}

#[test]
fn lossless_metrics_near_theoretical_il() {
    let top = Topology::differential(CirculatorParams::ideal()).unwrap();
    let r = report(&top, &grid(), &SolveOptions::default(), &ReportConfig::default()).unwrap();
    assert!(r.il_db <= 0.87, "{}", r.il_db);
}

#[test]
fn quad_return_loss_uses_port_impedance() {
    let tee = Topology::quad(CirculatorParams::canonical()).unwrap();
    assert_eq!(tee.port_z0(), &[25.0; 4]);
    let center = |z0: Option<Vec<f64>>| {
        let top = Topology::quad(CirculatorParams { port_z0: z0, ..CirculatorParams::canonical() }).unwrap();
        let s = solve(&top, 900e6, 16).unwrap();
        (-20.0 * s.s(1, 1).norm().log10(), -20.0 * s.s(2, 1).norm().log10())
    };
    let (rl_matched, il_matched) = center(None);
    let (rl_mismatched, il_mismatched) = center(Some(vec![50.0; 4]));
    assert!(rl_matched > rl_mismatched + 2.0, "{rl_matched} vs {rl_mismatched}");
    assert!(il_matched < il_mismatched);
    let r = report(&tee, &grid(), &SolveOptions::default(), &ReportConfig::default()).unwrap();
    assert!(r.rl_db_min > 10.0, "{}", r.rl_db_min);
}

#[test]
fn metrics_ignore_global_clock_phase() {
    let top = Topology::quad(CirculatorParams {
        phase_error_rad: 3f64.to_radians(),
        ..CirculatorParams::canonical()
    })
    .unwrap();
    let shifted = top.with_phase_shift(1.234).unwrap();
    let opts = SolveOptions::default();
    let a = report(&top, &grid(), &opts, &ReportConfig::default()).unwrap();
    let b = report(&shifted, &grid(), &opts, &ReportConfig::default()).unwrap();
    for (x, y) in [
        (a.il_db, b.il_db),
        (a.ix_db, b.ix_db),
        (a.rl_db_min, b.rl_db_min),
        (a.ix_bw_hz, b.ix_bw_hz),
        (a.imp_worst_dbc, b.imp_worst_dbc),
    ] {
        assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{x} vs {y}");
    }
}

fn sampled(filter: &FilterModel, lo: f64, hi: f64, points: usize) -> NetworkData {
    let freqs = (0..points).map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64).collect();
    NetworkData::from_fn(freqs, 50.0, |f| filter.evaluate(f).unwrap()).unwrap()
}

#[test]
fn parametric_delay_span_and_dispersion() {
    let filter = FilterModel::parametric_delay_span(900e6, 40e6, 10e6, 15e-9, 23e-9, 0.9, 20.0).unwrap();
    let net = sampled(&filter, 880e6, 920e6, 401);
    for f in [882e6, 890e6, 900e6, 910e6, 918e6] {
        let expected = 15e-9 + 8e-9 * (f - 880e6) / 40e6;
        let gd = group_delay(&net, 2, 1, f).unwrap();
        assert!((gd - expected).abs() < 1e-3 * expected, "{f}: {gd}");
        assert!((15e-9 - 1e-12..=23e-9 + 1e-12).contains(&gd));
    }
    let sweep = FundamentalSweep::from_network(&net).unwrap();
    let spread = delay_dispersion(&sweep, (880e6, 920e6), 2, 1).unwrap();
    assert!((spread - 8e-9).abs() <= 0.05 * 8e-9, "{spread}");

    let pure = sampled(&FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.0).unwrap(), 885e6, 915e6, 61);
    let sweep = FundamentalSweep::from_network(&pure).unwrap();
    assert!(delay_dispersion(&sweep, (885e6, 915e6), 2, 1).unwrap() < 1e-15);
}

#[test]
fn tabulated_filter_drives_the_solver() {
    let brick = FilterModel::parametric_delay_span(900e6, 40e6, 10e6, 20e-9, 20e-9, 0.9, f64::INFINITY).unwrap();
    let table = FilterModel::tabulated(sampled(&brick, 700e6, 1100e6, 4001), Default::default()).unwrap();
    let a = solve(&Topology::differential(CirculatorParams::new(brick)).unwrap(), 900e6, 16).unwrap();
    let b = solve(&Topology::differential(CirculatorParams::new(table)).unwrap(), 900e6, 16).unwrap();
    assert!((a.s(2, 1).norm() - b.s(2, 1).norm()).abs() < 1e-2);
}
