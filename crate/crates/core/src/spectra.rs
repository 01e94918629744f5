//! Closed-form sideband model of one gated filter path and of its differential
//! and quad superpositions.
//!
//! A unit tone at `f_RF` is gated by the first switch, passes a brick-wall
//! filter that keeps only the carrier and the two first-order products, and is
//! gated again by a clock lagging the first by a quarter period. The output
//! amplitudes `b_n` at `f_RF + n·f_m` are known in closed form.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::clock::{fold_phase, phase_factor, ClockSpec};
use crate::error::{Error, Result};

const CANCEL_REL: f64 = 1e-12;

/// Complex amplitudes at `carrier_hz + n·mod_hz`, relative to a unit input tone.
///
/// Indices that are not stored have amplitude exactly zero; index 0 is always present.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicSpectrum {
    pub carrier_hz: f64,
    pub mod_hz: f64,
    coeffs: BTreeMap<i32, Complex64>,
}

impl HarmonicSpectrum {
    pub fn new(carrier_hz: f64, mod_hz: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, Complex64::new(0.0, 0.0));
        Self {
            carrier_hz,
            mod_hz,
            coeffs,
        }
    }

    pub fn from_coeffs(
        carrier_hz: f64,
        mod_hz: f64,
        coeffs: impl IntoIterator<Item = (i32, Complex64)>,
    ) -> Self {
        let mut s = Self::new(carrier_hz, mod_hz);
        for (n, c) in coeffs {
            s.coeffs.insert(n, c);
        }
        s
    }

    pub fn coeff(&self, n: i32) -> Complex64 {
        self.coeffs
            .get(&n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, n: i32, value: Complex64) {
        self.coeffs.insert(n, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn frequency_of(&self, n: i32) -> f64 {
        self.carrier_hz + n as f64 * self.mod_hz
    }

    /// Largest stored `|n|`.
    pub fn n_max(&self) -> i32 {
        self.coeffs.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    /// Total power `Σ|c_n|²` of the stored coefficients.
    pub fn power(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }
}

/// One gated path: first switch, brick-wall filter, second switch.
#[derive(Debug, Clone, PartialEq)]
pub struct PathConfig {
    pub carrier_hz: f64,
    pub clock_in: ClockSpec,
    /// Lags `clock_in` by π/2 so that the clock delay equals the filter delay when `T_m = 4·T_d`.
    pub clock_out: ClockSpec,
    pub filter_delay_s: f64,
    pub filter_halfbw_hz: f64,
    pub filter_il_db: f64,
}

impl PathConfig {
    pub fn new(
        carrier_hz: f64,
        clock_in: ClockSpec,
        filter_delay_s: f64,
        filter_halfbw_hz: f64,
        filter_il_db: f64,
    ) -> Result<Self> {
        if !(carrier_hz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier must be > 0, got {carrier_hz}"
            )));
        }
        if !(filter_il_db >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "filter IL must be >= 0 dB, got {filter_il_db}"
            )));
        }
        if !(filter_halfbw_hz > 0.0) || !(filter_delay_s >= 0.0) {
            return Err(Error::InvalidParameter(
                "filter half-bandwidth must be > 0 and delay >= 0".into(),
            ));
        }
        Ok(Self {
            carrier_hz,
            clock_in,
            clock_out: clock_in.shifted(FRAC_PI_2),
            filter_delay_s,
            filter_halfbw_hz,
            filter_il_db,
        })
    }

    pub fn mod_hz(&self) -> f64 {
        self.clock_in.frequency_hz
    }

    /// True when the filter passes the first-order products (`halfbw ≥ f_m`).
    pub fn first_order_regime(&self) -> bool {
        self.filter_halfbw_hz >= self.mod_hz()
    }

    pub fn passband_gain(&self) -> f64 {
        10f64.powf(-self.filter_il_db / 20.0)
    }

    /// Same path with both clocks shifted by `delta_rad`.
    pub fn with_phase(&self, phase_rad: f64) -> Self {
        let clock_in = ClockSpec {
            phase_rad: fold_phase(phase_rad),
            ..self.clock_in
        };
        Self {
            clock_in,
            clock_out: clock_in.shifted(FRAC_PI_2),
            ..self.clone()
        }
    }

    fn check_regime(&self) -> Result<()> {
        if self.clock_in.duty != 0.5 || self.clock_out.duty != 0.5 {
            return Err(Error::Regime(
                "closed-form sidebands assume a 50 % duty cycle".into(),
            ));
        }
        if self.clock_in.frequency_hz != self.clock_out.frequency_hz {
            return Err(Error::Regime("input and output clocks differ in frequency".into()));
        }
        let lag = (self.clock_out.phase_rad - self.clock_in.phase_rad).rem_euclid(TAU);
        if (lag - FRAC_PI_2).abs() > 1e-9 {
            return Err(Error::Regime(format!(
                "output clock must lag the input clock by π/2, lags by {lag} rad"
            )));
        }
        if !self.first_order_regime() {
            return Err(Error::Regime(format!(
                "filter half-bandwidth {} Hz blocks the first-order products at ±{} Hz",
                self.filter_halfbw_hz,
                self.mod_hz()
            )));
        }
        Ok(())
    }
}

/// Amplitudes after the first switch and the filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSidebands {
    /// At `f_RF + f_m`.
    pub a1: Complex64,
    /// At `f_RF`.
    pub a2: Complex64,
    /// At `f_RF − f_m`.
    pub a3: Complex64,
}

pub fn path_sidebands(cfg: &PathConfig) -> Result<PathSidebands> {
    cfg.check_regime()?;
    let g = cfg.passband_gain();
    let phi = cfg.clock_in.phase_rad;
    let carrier_phase = TAU * cfg.carrier_hz * cfg.filter_delay_s;
    let polar = |angle: f64, mag: f64| Complex64::from_polar(mag, -angle.rem_euclid(TAU));
    Ok(PathSidebands {
        a1: -polar(carrier_phase + phi, g / PI),
        a2: polar(carrier_phase, 0.5 * g),
        a3: -polar(carrier_phase - phi, g / PI),
    })
}

/// Output coefficient `b_n` of the path for `φ = 0`, without delay or loss.
fn eq8_coefficient(n: i32) -> f64 {
    match n {
        0 => 0.25 + 2.0 / (PI * PI),
        1 | -1 => -1.0 / PI,
        _ if n % 2 == 0 => {
            let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let nf = n as f64;
            sign / (PI * PI) * (1.0 / (nf + 1.0) - 1.0 / (nf - 1.0))
        }
        _ => {
            let sin_half = if n.rem_euclid(4) == 1 { 1.0 } else { -1.0 };
            -sin_half / (2.0 * n as f64 * PI)
        }
    }
}

/// Output sideband amplitudes of one path for `|n| ≤ n_max`, including the
/// carrier delay factor `e^{−iω_RF·T_d}` and the filter passband gain.
pub fn branch_output_coeffs(cfg: &PathConfig, n_max: i32) -> Result<HarmonicSpectrum> {
    if n_max < 1 {
        return Err(Error::InvalidParameter(format!("n_max must be >= 1, got {n_max}")));
    }
    cfg.check_regime()?;
    let delay = Complex64::from_polar(
        cfg.passband_gain(),
        -(TAU * cfg.carrier_hz * cfg.filter_delay_s).rem_euclid(TAU),
    );
    let phi = cfg.clock_in.phase_rad;
    let coeffs =
        (-n_max..=n_max).map(|n| (n, eq8_coefficient(n) * phase_factor(n, phi) * delay));
    Ok(HarmonicSpectrum::from_coeffs(cfg.carrier_hz, cfg.mod_hz(), coeffs))
}

/// Coefficient-wise sum of branch spectra scaled by `normalization`.
///
/// Sums whose magnitude falls below `1e-12` of the largest contributing term
/// are stored as exact zeros.
pub fn superpose_branches(
    branches: &[HarmonicSpectrum],
    normalization: f64,
) -> Result<HarmonicSpectrum> {
    let first = branches
        .first()
        .ok_or_else(|| Error::Mismatch("no branches to superpose".into()))?;
    for b in &branches[1..] {
        if !same_freq(b.carrier_hz, first.carrier_hz) || !same_freq(b.mod_hz, first.mod_hz) {
            return Err(Error::Mismatch(format!(
                "branch at {} Hz / {} Hz does not match {} Hz / {} Hz",
                b.carrier_hz, b.mod_hz, first.carrier_hz, first.mod_hz
            )));
        }
    }
    let mut indices: Vec<i32> = branches.iter().flat_map(|b| b.indices()).collect();
    indices.sort_unstable();
    indices.dedup();

    let mut out = HarmonicSpectrum::new(first.carrier_hz, first.mod_hz);
    for n in indices {
        let terms: Vec<Complex64> = branches.iter().map(|b| b.coeff(n)).collect();
        let largest = terms.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let sum: Complex64 = terms.iter().sum();
        let value = if sum.norm() <= CANCEL_REL * largest {
            Complex64::new(0.0, 0.0)
        } else {
            sum * normalization
        };
        out.set(n, value);
    }
    Ok(out)
}

fn same_freq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// How many gated paths are combined at each port pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Configuration {
    Single,
    Differential,
    Quad,
}

impl Configuration {
    /// Voltage normalization applied to the branch sum. The quad sum is halved
    /// because its two differential halves share the port power.
    pub fn normalization(self) -> f64 {
        match self {
            Configuration::Single | Configuration::Differential => 1.0,
            Configuration::Quad => 0.5,
        }
    }

    /// First-switch phase offsets of the constituent branches.
    pub fn branch_phases(self) -> &'static [f64] {
        match self {
            Configuration::Single => &[0.0],
            Configuration::Differential => &[0.0, PI],
            Configuration::Quad => &[0.0, FRAC_PI_2, PI, 1.5 * PI],
        }
    }
}

/// Closed-form output spectrum of a single, differential or quad arrangement
/// built from copies of `cfg` with the configuration's phase offsets.
pub fn closed_form_spectrum(
    cfg: &PathConfig,
    configuration: Configuration,
    n_max: i32,
) -> Result<HarmonicSpectrum> {
    let branches = configuration
        .branch_phases()
        .iter()
        .map(|offset| branch_output_coeffs(&cfg.with_phase(cfg.clock_in.phase_rad + offset), n_max))
        .collect::<Result<Vec<_>>>()?;
    superpose_branches(&branches, configuration.normalization())
}

/// `−20·log10|c_0|`.
pub fn theoretical_insertion_loss(spectrum: &HarmonicSpectrum) -> Result<f64> {
    let c0 = spectrum.coeff(0).norm();
    if c0 == 0.0 {
        return Err(Error::Degenerate("fundamental coefficient is zero".into()));
    }
    Ok(-20.0 * c0.log10())
}

/// Level of every stored sideband relative to the fundamental, in dBc.
/// Exact zeros map to `-inf`.
pub fn imp_levels_dbc(spectrum: &HarmonicSpectrum) -> Result<BTreeMap<i32, f64>> {
    let c0 = spectrum.coeff(0).norm();
    if c0 == 0.0 {
        return Err(Error::Degenerate("fundamental coefficient is zero".into()));
    }
    Ok(spectrum
        .iter()
        .filter(|(n, _)| *n != 0)
        .map(|(n, c)| (n, 20.0 * (c.norm() / c0).log10()))
        .collect())
}
