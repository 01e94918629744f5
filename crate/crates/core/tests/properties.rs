use std::f64::consts::TAU;

use circsim::filters::{s_to_y, y_to_s};
use circsim::metrics::{isolation_bandwidth, FundamentalSweep};
use circsim::network::{solve, CirculatorParams, Topology};
use circsim::timedomain::{simulate_path_on, Gate, SimGrid};
use circsim::touchstone::{parse, write, DataFormat, FrequencyUnit};
use circsim::{ClockSpec, FilterModel, NetworkData};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_in_disk(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0..max, -std::f64::consts::PI..std::f64::consts::PI).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn network() -> impl Strategy<Value = NetworkData> {
    (1usize..12, 1e6..5e9f64, 1e3..1e7f64, 1.0..200.0f64).prop_flat_map(|(n, f0, df, z)| {
        prop::collection::vec(prop::array::uniform4(complex_in_disk(0.5)), n).prop_map(move |rows| {
            let freqs = (0..rows.len()).map(|k| f0 + df * k as f64).collect();
            let s = rows.iter().map(|r| Matrix2::new(r[0], r[2], r[1], r[3])).collect();
            NetworkData::new(freqs, s, z).unwrap()
        })
    })
}

fn format() -> impl Strategy<Value = DataFormat> {
    prop_oneof![Just(DataFormat::RealImag), Just(DataFormat::MagAngle), Just(DataFormat::DbAngle)]
}

fn unit() -> impl Strategy<Value = FrequencyUnit> {
    prop_oneof![
        Just(FrequencyUnit::Hz),
        Just(FrequencyUnit::KHz),
        Just(FrequencyUnit::MHz),
        Just(FrequencyUnit::GHz)
    ]
}

proptest! {
    #[test]
    fn touchstone_write_then_parse_is_identity(net in network(), fmt in format(), u in unit()) {
        let back = parse(&write(&net, fmt, u)).unwrap();
        prop_assert_eq!(back.len(), net.len());
        prop_assert!((back.ref_ohm - net.ref_ohm).abs() <= 1e-12 * net.ref_ohm);
        for (a, b) in net.freqs_hz.iter().zip(&back.freqs_hz) {
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
        for (a, b) in net.smatrix.iter().zip(&back.smatrix) {
            for k in 0..4 {
                prop_assert!((a[k] - b[k]).norm() <= 1e-12 * a[k].norm().max(1e-300));
            }
        }
    }

    #[test]
    fn admittance_round_trip(s11 in complex_in_disk(0.6), s21 in complex_in_disk(0.6), s22 in complex_in_disk(0.6), z in 1.0..200.0f64) {
        let s = Matrix2::new(s11, s21, s21, s22);
        let back = y_to_s(&s_to_y(&s, z).unwrap(), z).unwrap();
        prop_assert!((back - s).norm() < 1e-10);
    }

    #[test]
    fn isolation_bandwidth_shrinks_with_threshold(depth in 25.0..60.0f64, t1 in 5.0..25.0f64, dt in 0.0..20.0f64) {
        let freqs: Vec<f64> = (0..=100).map(|k| 850e6 + 1e6 * k as f64).collect();
        let m = freqs
            .iter()
            .map(|&f| {
                let level = -depth + ((f - 900e6) / 3e6).powi(2);
                let s = Complex64::new(10f64.powf(level.min(0.0) / 20.0), 0.0);
                DMatrix::from_row_slice(2, 2, &[s, s, s, s])
            })
            .collect();
        let sweep = FundamentalSweep::new(freqs, m).unwrap();
        let wide = isolation_bandwidth(&sweep, t1, 2, 1, 900e6).map(|r| r.0).unwrap_or(0.0);
        let narrow = isolation_bandwidth(&sweep, t1 + dt, 2, 1, 900e6).map(|r| r.0).unwrap_or(0.0);
        prop_assert!(narrow <= wide + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn global_clock_shift_rotates_sidebands(delta in 0.0..TAU, f in 875e6..925e6f64) {
        let top = Topology::differential(CirculatorParams::canonical()).unwrap();
        let a = solve(&top, f, 8).unwrap();
        let b = solve(&top.with_phase_shift(delta).unwrap(), f, 8).unwrap();
        for o in 1..=4 {
            for i in 1..=4 {
                for n in -8..=8 {
                    let expected = a.harmonic(o, n, i).unwrap() * Complex64::from_polar(1.0, -(n as f64) * delta);
                    prop_assert!((b.harmonic(o, n, i).unwrap() - expected).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn switched_network_is_passive(
        ron in 0.1..50.0f64,
        roff_exp in 3.0..9.0f64,
        duty in 0.35..0.65f64,
        f in 860e6..940e6f64,
        quad in any::<bool>(),
    ) {
        let p = CirculatorParams { ron_ohm: ron, roff_ohm: 10f64.powf(roff_exp), duty, ..CirculatorParams::canonical() };
        let top = if quad { Topology::quad(p) } else { Topology::differential(p) }.unwrap();
        let s = solve(&top, f, 16).unwrap();
        for port in 1..=4 {
            prop_assert!(s.output_power(port).unwrap() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn time_domain_chain_is_linear(scale_re in -3.0..3.0f64, scale_im in -3.0..3.0f64, phase in 0.0..TAU) {
        let grid = SimGrid::canonical();
        let filter = FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.5).unwrap();
        let clock = ClockSpec::square(12.5e6, phase).unwrap();
        let k = Complex64::new(scale_re, scale_im);
        let x = grid.tone();
        let kx: Vec<Complex64> = x.iter().map(|v| v * k).collect();
        let run = |input: &[Complex64]| {
            simulate_path_on(&grid, input, Gate::from(clock), Gate::from(clock.shifted(1.0)), &filter).unwrap()
        };
        let (y, ky) = (run(&x), run(&kx));
        let err = y.iter().zip(&ky).map(|(a, b)| (a * k - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9);
    }
}
