//! Circulator topologies and their LPTV frequency-domain solution.
//!
//! A [`Topology`] is a netlist of port terminations, periodically switched
//! resistors and (frequency-dependent) scattering blocks. [`solve`] returns the
//! multi-harmonic scattering matrix for a tone at `f_rf`; [`assemble_system`]
//! exposes the classic truncated conversion-matrix nodal system.

mod netlist;
mod nodal;
mod solver;
mod topology;

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::clock::{square_wave_coefficient, ClockSpec};
use crate::error::{Error, Result};
use crate::spectra::HarmonicSpectrum;

pub use nodal::{assemble_system, NodalSystem};
pub use solver::{output_spectrum, solve, solve_with, sweep, sweep_with, SolveOptions};
pub use topology::{CirculatorParams, Combining, SwitchPlacement, Topology, TopologyKind};

/// A switch modelled as a resistor toggling between `ron_ohm` and `roff_ohm`
/// with zero transition time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchModel {
    pub ron_ohm: f64,
    pub roff_ohm: f64,
    pub clock: ClockSpec,
}

impl SwitchModel {
    /// `roff_ohm == ron_ohm` is accepted and freezes the switch into a fixed resistor.
    pub fn new(ron_ohm: f64, roff_ohm: f64, clock: ClockSpec) -> Result<Self> {
        if !(ron_ohm > 0.0) || !ron_ohm.is_finite() {
            return Err(Error::InvalidParameter(format!("ron must be > 0, got {ron_ohm}")));
        }
        if !(roff_ohm >= ron_ohm) || !roff_ohm.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "roff must be finite and >= ron ({ron_ohm}), got {roff_ohm}"
            )));
        }
        Ok(Self {
            ron_ohm,
            roff_ohm,
            clock,
        })
    }

    pub fn g_on(&self) -> f64 {
        1.0 / self.ron_ohm
    }

    pub fn g_off(&self) -> f64 {
        1.0 / self.roff_ohm
    }

    pub fn is_frozen(&self) -> bool {
        self.ron_ohm == self.roff_ohm
    }
}

/// Fourier coefficients of the switch conductance `G(t)` for `|n| ≤ n_max`.
pub fn switch_conductance_harmonics(sw: &SwitchModel, n_max: usize) -> BTreeMap<i32, Complex64> {
    let n_max = n_max as i32;
    let dg = sw.g_on() - sw.g_off();
    (-n_max..=n_max)
        .map(|n| {
            let mut g = square_wave_coefficient(&sw.clock, n) * dg;
            if n == 0 {
                g += sw.g_off();
            }
            (n, g)
        })
        .collect()
}

/// Scattering coefficients `S(out_port, n; in_port, 0)` for one sweep
/// frequency: the wave leaving `out_port` at `f_rf + n·f_m` per unit wave
/// incident on `in_port` at `f_rf`. Ports are numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSMatrix {
    pub f_rf_hz: f64,
    pub mod_hz: f64,
    pub n_max: usize,
    n_ports: usize,
    /// Indexed `[(in_port·n_ports + out_port)·(2·n_max + 1) + n + n_max]`.
    data: Vec<Complex64>,
}

impl HarmonicSMatrix {
    pub(crate) fn zeros(f_rf_hz: f64, mod_hz: f64, n_max: usize, n_ports: usize) -> Self {
        Self {
            f_rf_hz,
            mod_hz,
            n_max,
            n_ports,
            data: vec![Complex64::new(0.0, 0.0); n_ports * n_ports * (2 * n_max + 1)],
        }
    }

    fn offset(&self, out0: usize, n: i32, in0: usize) -> usize {
        (in0 * self.n_ports + out0) * (2 * self.n_max + 1) + (n + self.n_max as i32) as usize
    }

    pub(crate) fn set0(&mut self, out0: usize, n: i32, in0: usize, value: Complex64) {
        let k = self.offset(out0, n, in0);
        self.data[k] = value;
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    fn check(&self, out_port: usize, n: i32, in_port: usize) -> Result<()> {
        if out_port == 0 || in_port == 0 || out_port > self.n_ports || in_port > self.n_ports {
            return Err(Error::Range(format!(
                "ports are 1..={}, got S{out_port}{in_port}",
                self.n_ports
            )));
        }
        if n.unsigned_abs() as usize > self.n_max {
            return Err(Error::Range(format!("harmonic {n} exceeds n_max {}", self.n_max)));
        }
        Ok(())
    }

    /// `S(out_port, n; in_port, 0)`.
    pub fn harmonic(&self, out_port: usize, n: i32, in_port: usize) -> Result<Complex64> {
        self.check(out_port, n, in_port)?;
        Ok(self.data[self.offset(out_port - 1, n, in_port - 1)])
    }

    /// Fundamental-to-fundamental `S(out_port, in_port)`.
    pub fn s(&self, out_port: usize, in_port: usize) -> Complex64 {
        self.harmonic(out_port, 0, in_port)
            .unwrap_or_else(|e| panic!("{e}"))
    }

    /// All fundamental S-parameters, `[out][in]`, 0-based.
    pub fn fundamental(&self) -> Vec<Vec<Complex64>> {
        (0..self.n_ports)
            .map(|o| (0..self.n_ports).map(|i| self.data[self.offset(o, 0, i)]).collect())
            .collect()
    }

    /// Total outgoing power over all ports and harmonics per unit incident
    /// power at `in_port`.
    pub fn output_power(&self, in_port: usize) -> Result<f64> {
        self.check(1, 0, in_port)?;
        let h = 2 * self.n_max + 1;
        let start = (in_port - 1) * self.n_ports * h;
        Ok(self.data[start..start + self.n_ports * h]
            .iter()
            .map(|c| c.norm_sqr())
            .sum())
    }

    /// Output sidebands at `out_port` for excitation at `in_port`.
    pub fn spectrum(&self, out_port: usize, in_port: usize) -> Result<HarmonicSpectrum> {
        self.check(out_port, 0, in_port)?;
        let n_max = self.n_max as i32;
        let mut spec = HarmonicSpectrum::new(self.f_rf_hz, self.mod_hz);
        for n in -n_max..=n_max {
            spec.set(n, self.data[self.offset(out_port - 1, n, in_port - 1)]);
        }
        Ok(spec)
    }

    /// Largest `|S_ij − S_ji|` over fundamental entries.
    pub fn reciprocity_error(&self) -> f64 {
        let f = self.fundamental();
        let mut worst: f64 = 0.0;
        for i in 0..self.n_ports {
            for j in 0..self.n_ports {
                worst = worst.max((f[i][j] - f[j][i]).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sw(phase: f64) -> SwitchModel {
        SwitchModel::new(5.0, 1e6, ClockSpec::square(12.5e6, phase).unwrap()).unwrap()
    }

    #[test]
    fn conductance_dc_and_even() {
        let g = switch_conductance_harmonics(&sw(0.0), 4);
        assert!((g[&0].re - 0.1000005).abs() < 1e-12);
        assert_eq!(g[&2], Complex64::new(0.0, 0.0));
        assert!((g[&1].norm() - (0.2 - 1e-6) / PI).abs() < 1e-12);
        assert!((g[&1].norm() - 0.063662).abs() < 1e-6);
        assert_eq!(g.len(), 9);
    }

    #[test]
    fn conductance_matches_sampled_fft() {
        let s = sw(0.9);
        let m = 4096;
        let g = switch_conductance_harmonics(&s, 3);
        for n in -3..=3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..m {
                let x = (k as f64 + 0.5) / m as f64;
                let gt = if s.clock.is_on_fraction(x) { s.g_on() } else { s.g_off() };
                acc += Complex64::from_polar(gt, -2.0 * PI * n as f64 * x);
            }
            acc /= m as f64;
            assert!((acc - g[&n]).norm() < 2e-4, "n={n}");
        }
    }

    #[test]
    fn switch_validation() {
        let c = ClockSpec::square(1e6, 0.0).unwrap();
        assert!(SwitchModel::new(0.0, 1.0, c).is_err());
        assert!(SwitchModel::new(5.0, 1.0, c).is_err());
        assert!(SwitchModel::new(5.0, 5.0, c).unwrap().is_frozen());
    }

    #[test]
    fn harmonic_matrix_indexing() {
        let mut h = HarmonicSMatrix::zeros(9e8, 12.5e6, 2, 4);
        h.set0(1, -2, 0, Complex64::new(0.25, 0.0));
        h.set0(1, 0, 0, Complex64::new(0.5, 0.0));
        assert_eq!(h.harmonic(2, -2, 1).unwrap().re, 0.25);
        assert_eq!(h.s(2, 1).re, 0.5);
        assert!(h.harmonic(5, 0, 1).is_err());
        assert!(h.harmonic(2, 3, 1).is_err());
        assert!((h.output_power(1).unwrap() - 0.3125).abs() < 1e-15);
        assert_eq!(h.output_power(2).unwrap(), 0.0);
        assert_eq!(h.reciprocity_error(), 0.5);
        assert_eq!(h.spectrum(2, 1).unwrap().coeff(-2).re, 0.25);
    }
}
