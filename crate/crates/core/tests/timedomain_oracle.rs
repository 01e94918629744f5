use std::f64::consts::{FRAC_PI_2, PI};

use circsim::spectra::{branch_output_coeffs, PathConfig};
use circsim::timedomain::{simulate_path, simulate_path_on, spectrum_at_sidebands, superpose_paths, Gate, SimGrid};
use circsim::{ClockSpec, FilterModel};
use num_complex::Complex64;

fn brick() -> FilterModel {
    FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.0).unwrap()
}

fn path(grid: &SimGrid, phase: f64) -> Vec<Complex64> {
    let clock = ClockSpec::square(12.5e6, phase).unwrap();
    simulate_path(grid, clock, clock.shifted(FRAC_PI_2), &brick()).unwrap()
}

#[test]
fn sampled_path_matches_closed_form() {
    let grid = SimGrid::oracle();
    for phase in [0.0, FRAC_PI_2, PI, 1.5 * PI] {
        let sampled = spectrum_at_sidebands(&path(&grid, phase), &grid, 5).unwrap();
        let clock = ClockSpec::square(12.5e6, phase).unwrap();
        let closed = branch_output_coeffs(&PathConfig::new(900e6, clock, 20e-9, 20e6, 0.0).unwrap(), 5).unwrap();
        for n in -5..=5 {
            let (s, c) = (sampled.coeff(n), closed.coeff(n));
            assert!((s - c).norm() <= 1e-3 * c.norm(), "phase {phase}, n = {n}: {s} vs {c}");
        }
    }
}

#[test]
fn branch_superposition_cancels_imps() {
    let grid = SimGrid::oracle();
    let branches: Vec<Vec<Complex64>> = [0.0, FRAC_PI_2, PI, 1.5 * PI].iter().map(|&p| path(&grid, p)).collect();

    let diff = superpose_paths(&[branches[0].clone(), branches[2].clone()], 1.0).unwrap();
    let s = spectrum_at_sidebands(&diff, &grid, 5).unwrap();
    assert!((s.coeff(0).norm() - 0.90528).abs() < 1e-4, "{}", s.coeff(0).norm());
    for n in [-5, -3, -1, 1, 3, 5] {
        assert!(s.coeff(n).norm() <= 1e-10 * s.coeff(0).norm());
    }

    let quad = superpose_paths(&branches, 0.5).unwrap();
    let s = spectrum_at_sidebands(&quad, &grid, 4).unwrap();
    for n in [-3, -2, -1, 1, 2, 3] {
        assert!(s.coeff(n).norm() <= 1e-10 * s.coeff(0).norm(), "n = {n}");
    }
}

#[test]
fn pure_tone_reads_unity() {
    let grid = SimGrid::canonical();
    let s = spectrum_at_sidebands(&grid.tone(), &grid, 4).unwrap();
    assert!((s.coeff(0) - 1.0).norm() < 1e-12);
    assert!((-4..=4).filter(|&n| n != 0).all(|n| s.coeff(n).norm() <= 1e-12));
}

#[test]
fn shifting_input_and_clocks_shifts_output() {
    let grid = SimGrid::canonical();
    let shift = 37;
    let dphi = std::f64::consts::TAU * 12.5e6 * shift as f64 / grid.fs_hz;
    let clock = ClockSpec::square(12.5e6, 0.3).unwrap();
    let input = grid.tone();
    let mut delayed = input.clone();
    delayed.rotate_right(shift);

    let run = |x: &[Complex64], c: ClockSpec| {
        simulate_path_on(&grid, x, Gate::from(c), Gate::from(c.shifted(FRAC_PI_2)), &brick()).unwrap()
    };
    let mut expected = run(&input, clock);
    expected.rotate_right(shift);
    let actual = run(&delayed, clock.shifted(dphi));
    let err = expected.iter().zip(&actual).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(err < 1e-9, "{err}");
}
