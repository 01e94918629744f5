//! Square-wave modulation clocks and their Fourier series.
//!
//! A clock with phase `φ` is ON whenever `frac(t·f_m − φ/2π) < duty`, i.e. the
//! zero-phase clock is ON on `[0, duty·T_m)` and a phase `φ` delays it by
//! `φ/ω_m`. With this convention the complex Fourier coefficient at harmonic
//! `n` carries the factor `e^{−inφ}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square-wave control signal driving one switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockSpec {
    pub frequency_hz: f64,
    pub duty: f64,
    /// Folded to `[0, 2π)`.
    pub phase_rad: f64,
}

impl ClockSpec {
    pub fn new(frequency_hz: f64, duty: f64, phase_rad: f64) -> Result<Self> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clock frequency must be > 0, got {frequency_hz}"
            )));
        }
        if !(duty > 0.0 && duty < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "clock duty must lie in (0, 1), got {duty}"
            )));
        }
        if !phase_rad.is_finite() {
            return Err(Error::InvalidParameter("clock phase must be finite".into()));
        }
        Ok(Self {
            frequency_hz,
            duty,
            phase_rad: fold_phase(phase_rad),
        })
    }

    /// 50 % duty clock.
    pub fn square(frequency_hz: f64, phase_rad: f64) -> Result<Self> {
        Self::new(frequency_hz, 0.5, phase_rad)
    }

    pub fn period_s(&self) -> f64 {
        1.0 / self.frequency_hz
    }

    /// Same clock shifted by half a period. For a 50 % duty cycle this is ON
    /// exactly when `self` is OFF.
    pub fn complement(&self) -> Self {
        self.shifted(PI)
    }

    pub fn shifted(&self, delta_rad: f64) -> Self {
        Self {
            phase_rad: fold_phase(self.phase_rad + delta_rad),
            ..*self
        }
    }

    /// Start of the ON window as a fraction of the period, in `[0, 1)`.
    pub fn rise_fraction(&self) -> f64 {
        self.phase_rad / TAU
    }

    /// End of the ON window as a fraction of the period, in `[0, 1)`.
    pub fn fall_fraction(&self) -> f64 {
        (self.rise_fraction() + self.duty).fract()
    }

    /// Whether the clock is ON at time `t` (seconds).
    pub fn is_on_at(&self, t: f64) -> bool {
        self.is_on_fraction(t * self.frequency_hz)
    }

    /// Whether the clock is ON at a position given in periods.
    pub fn is_on_fraction(&self, x: f64) -> bool {
        (x - self.rise_fraction()).rem_euclid(1.0) < self.duty
    }

    /// Fraction of the time interval `[t0, t1)` (seconds) during which the clock is ON.
    pub fn on_fraction_over(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return 0.0;
        }
        let x0 = t0 * self.frequency_hz - self.rise_fraction();
        let x1 = t1 * self.frequency_hz - self.rise_fraction();
        (on_measure_to(x1, self.duty) - on_measure_to(x0, self.duty)) / (x1 - x0)
    }
}

/// Measure of ON time in `[0, x)` for a clock ON on `[k, k + duty)`, `x` in periods.
fn on_measure_to(x: f64, duty: f64) -> f64 {
    let k = x.floor();
    k * duty + (x - k).min(duty)
}

pub(crate) fn fold_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// `e^{-i·n·φ}` with the angle reduced modulo 2π before evaluation.
pub(crate) fn phase_factor(n: i32, phase_rad: f64) -> Complex64 {
    let angle = (-(n as f64) * phase_rad).rem_euclid(TAU);
    Complex64::from_polar(1.0, angle)
}

/// Fourier coefficient of the 0/1 clock waveform at harmonic `n`.
///
/// `c_n = e^{−inφ}·(1 − e^{−i2πn·duty})/(i2πn)`, `c_0 = duty`. For a 50 %
/// clock this is `1/2` at `n = 0`, `−i/(nπ)` for odd `n` and exactly zero for
/// even `n ≠ 0`.
pub fn square_wave_coefficient(clock: &ClockSpec, n: i32) -> Complex64 {
    if n == 0 {
        return Complex64::new(clock.duty, 0.0);
    }
    let nd = n as f64 * clock.duty;
    if (nd - nd.round()).abs() < 1e-12 {
        return Complex64::new(0.0, 0.0);
    }
    let nf = n as f64;
    let edge = Complex64::from_polar(1.0, -TAU * nd.rem_euclid(1.0));
    let base = (Complex64::new(1.0, 0.0) - edge) / Complex64::new(0.0, TAU * nf);
    base * phase_factor(n, clock.phase_rad)
}

/// Fourier coefficient at harmonic `n` of the indicator of `[start, end)`,
/// with both ends given in periods and `0 ≤ start ≤ end ≤ 1`.
pub fn window_coefficient(start: f64, end: f64, n: i32) -> Complex64 {
    if n == 0 {
        return Complex64::new(end - start, 0.0);
    }
    let nf = n as f64;
    let a = Complex64::from_polar(1.0, -TAU * (nf * start).rem_euclid(1.0));
    let b = Complex64::from_polar(1.0, -TAU * (nf * end).rem_euclid(1.0));
    (a - b) / Complex64::new(0.0, TAU * nf)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FM: f64 = 12.5e6;

    #[test]
    fn dc_term_is_duty() {
        let c = ClockSpec::square(FM, 0.0).unwrap();
        assert_eq!(square_wave_coefficient(&c, 0), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn even_harmonics_vanish_exactly() {
        let c = ClockSpec::square(FM, 1.234).unwrap();
        for n in [-6, -4, -2, 2, 4, 6, 100] {
            assert_eq!(square_wave_coefficient(&c, n), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn first_harmonic_is_minus_i_over_pi() {
        let c = ClockSpec::square(FM, 0.0).unwrap();
        let c1 = square_wave_coefficient(&c, 1);
        assert!((c1 - Complex64::new(0.0, -1.0 / PI)).norm() < 1e-15);
        let cm1 = square_wave_coefficient(&c, -1);
        assert!((cm1 - Complex64::new(0.0, 1.0 / PI)).norm() < 1e-15);
        assert!((c1.norm() - 0.31831).abs() < 1e-5);
    }

    #[test]
    fn phase_shift_multiplies_by_exponential() {
        let c0 = ClockSpec::square(FM, 0.0).unwrap();
        let c90 = ClockSpec::square(FM, PI / 2.0).unwrap();
        let expected = square_wave_coefficient(&c0, 1) * Complex64::from_polar(1.0, -PI / 2.0);
        assert!((square_wave_coefficient(&c90, 1) - expected).norm() < 1e-15);
    }

    #[test]
    fn general_duty_matches_window() {
        let c = ClockSpec::new(FM, 0.3, 0.0).unwrap();
        for n in -5..=5 {
            let w = window_coefficient(0.0, 0.3, n);
            assert!((square_wave_coefficient(&c, n) - w).norm() < 1e-14);
        }
    }

    #[test]
    fn complement_is_on_when_original_is_off() {
        let c = ClockSpec::square(FM, 0.7).unwrap();
        let k = c.complement();
        assert!((fold_phase(c.phase_rad + PI) - k.phase_rad).abs() < 1e-15);
        for i in 0..400 {
            let x = (i as f64 + 0.37) / 100.0;
            assert_ne!(c.is_on_fraction(x), k.is_on_fraction(x));
        }
    }

    #[test]
    fn invalid_clocks_rejected() {
        assert!(ClockSpec::new(0.0, 0.5, 0.0).is_err());
        assert!(ClockSpec::new(FM, 1.0, 0.0).is_err());
        assert!(ClockSpec::new(FM, 0.0, 0.0).is_err());
    }

    #[test]
    fn phase_is_folded() {
        let c = ClockSpec::square(FM, -PI / 2.0).unwrap();
        assert!((c.phase_rad - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn on_fraction_over_cell() {
        let c = ClockSpec::square(1.0, 0.0).unwrap();
        assert!((c.on_fraction_over(-0.05, 0.05) - 0.5).abs() < 1e-12);
        assert!((c.on_fraction_over(0.1, 0.2) - 1.0).abs() < 1e-12);
        assert!(c.on_fraction_over(0.6, 0.7).abs() < 1e-12);
        assert!((c.on_fraction_over(0.0, 2.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coefficients_match_numerical_quadrature() {
        let c = ClockSpec::new(1.0, 0.4, 1.1).unwrap();
        let m = 200_000;
        for n in [-3, -1, 1, 2, 5] {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let t = (k as f64 + 0.5) / m as f64;
                if c.is_on_fraction(t) {
                    acc += Complex64::from_polar(1.0, -TAU * n as f64 * t);
                }
            }
            acc /= m as f64;
            assert!((acc - square_wave_coefficient(&c, n)).norm() < 1e-5, "n={n}");
        }
    }
}
