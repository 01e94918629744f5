//! Sampled oracle for the gated-filter path: gate a tone with one clock,
//! filter it, gate it with a second clock and read the sidebands off an FFT.
//!
//! The record spans an integer number of carrier and modulation periods, so
//! it is processed circularly: the filter is applied as a multiplication by
//! its frequency response over the full FFT band, and the result is the exact
//! periodic steady state with no warm-up to discard.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::clock::ClockSpec;
use crate::error::{Error, Result};
use crate::filters::FilterModel;
use crate::spectra::HarmonicSpectrum;

/// Input tone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Excitation {
    /// `cos(2π·f_rf·t)`.
    #[default]
    Cosine,
    /// `exp(i·2π·f_rf·t)`: no negative-frequency image, so gated images
    /// cannot fold back onto the analysed sidebands.
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimGrid {
    pub fs_hz: f64,
    pub n_samples: usize,
    pub f_rf_hz: f64,
    pub f_m_hz: f64,
    pub excitation: Excitation,
}

fn integer_ratio(x: f64) -> Option<usize> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0) && r >= 0.0).then_some(r as usize)
}

impl SimGrid {
    pub fn new(fs_hz: f64, n_samples: usize, f_rf_hz: f64, f_m_hz: f64) -> Result<Self> {
        let g = Self {
            fs_hz,
            n_samples,
            f_rf_hz,
            f_m_hz,
            excitation: Excitation::Cosine,
        };
        g.validate()?;
        Ok(g)
    }

    /// 900 MHz tone, 12.5 MHz clocks, 256 samples per modulation period,
    /// 2¹⁸ samples.
    pub fn canonical() -> Self {
        Self::new(3.2e9, 1 << 18, 900e6, 12.5e6).expect("coherent grid")
    }

    /// Same tone and clocks at 1024 samples per modulation period and 2¹⁷
    /// samples, with analytic excitation: accurate to well below 1e−3 for
    /// the first few sidebands.
    pub fn oracle() -> Self {
        Self::new(12.8e9, 1 << 17, 900e6, 12.5e6)
            .expect("coherent grid")
            .with_excitation(Excitation::Analytic)
    }

    pub fn with_excitation(self, excitation: Excitation) -> Self {
        Self { excitation, ..self }
    }

    pub fn with_carrier(self, f_rf_hz: f64) -> Result<Self> {
        let g = Self { f_rf_hz, ..self };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !(self.fs_hz > 0.0) || self.n_samples < 2 {
            return Err(Error::Grid("need fs > 0 and at least 2 samples".into()));
        }
        if !(self.f_rf_hz > 0.0) || !(self.f_m_hz > 0.0) {
            return Err(Error::Grid("tone and modulation frequencies must be > 0".into()));
        }
        for (name, f) in [("carrier", self.f_rf_hz), ("modulation", self.f_m_hz)] {
            if integer_ratio(f * self.n_samples as f64 / self.fs_hz).is_none() {
                return Err(Error::Grid(format!(
                    "{name} frequency {f} Hz does not fall on an FFT bin ({} samples at {} Hz)",
                    self.n_samples, self.fs_hz
                )));
            }
        }
        if 2.0 * self.f_rf_hz >= self.fs_hz {
            return Err(Error::Grid(format!(
                "carrier {} Hz is above Nyquist for fs = {} Hz",
                self.f_rf_hz, self.fs_hz
            )));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.fs_hz
    }

    pub fn bin_hz(&self) -> f64 {
        self.fs_hz / self.n_samples as f64
    }

    fn bin_of(&self, f: f64) -> usize {
        integer_ratio(f / self.bin_hz()).expect("validated grid")
    }

    /// Number of samples spanning `t` seconds, if integral.
    pub fn samples_in(&self, t: f64) -> Option<usize> {
        integer_ratio(t * self.fs_hz)
    }

    /// The input tone.
    pub fn tone(&self) -> Vec<Complex64> {
        let n = self.n_samples;
        let k_rf = self.bin_of(self.f_rf_hz);
        (0..n)
            .map(|k| {
                // Reduce the phase exactly in integers before scaling.
                let idx = (k_rf as u128 * k as u128 % n as u128) as f64;
                let z = Complex64::from_polar(1.0, TAU * idx / n as f64);
                match self.excitation {
                    Excitation::Cosine => Complex64::new(z.re, 0.0),
                    Excitation::Analytic => z,
                }
            })
            .collect()
    }

    /// Amplitude scale that makes a unit tone read as coefficient 1.
    fn spectrum_scale(&self) -> f64 {
        match self.excitation {
            Excitation::Cosine => 2.0 / self.n_samples as f64,
            Excitation::Analytic => 1.0 / self.n_samples as f64,
        }
    }
}

/// Switch driving signal for one gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Clock(ClockSpec),
    /// The duty → 1 limit: a permanently closed switch.
    AlwaysOn,
}

impl From<ClockSpec> for Gate {
    fn from(c: ClockSpec) -> Self {
        Gate::Clock(c)
    }
}

impl Gate {
    /// Gate value per sample: the ON fraction of each sample cell
    /// `[t − dt/2, t + dt/2)`, so an edge landing on a sample gives 1/2.
    pub fn samples(&self, grid: &SimGrid) -> Vec<f64> {
        let dt = grid.dt();
        (0..grid.n_samples)
            .map(|k| match self {
                Gate::AlwaysOn => 1.0,
                Gate::Clock(c) => {
                    let t = k as f64 * dt;
                    c.on_fraction_over(t - 0.5 * dt, t + 0.5 * dt)
                }
            })
            .collect()
    }

    fn check(&self, grid: &SimGrid) -> Result<()> {
        if let Gate::Clock(c) = self {
            if (c.frequency_hz - grid.f_m_hz).abs() > 1e-9 * grid.f_m_hz {
                return Err(Error::Grid(format!(
                    "clock at {} Hz but grid modulation is {} Hz",
                    c.frequency_hz, grid.f_m_hz
                )));
            }
        }
        Ok(())
    }
}

fn fft(data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse {
        planner.plan_fft_inverse(data.len())
    } else {
        planner.plan_fft_forward(data.len())
    };
    plan.process(data);
}

/// Multiplies a circular record by the filter's `S21` at every FFT bin, with
/// `S21(−f) = conj(S21(f))` for a real filter.
pub fn apply_filter(samples: &[Complex64], grid: &SimGrid, filter: &FilterModel) -> Result<Vec<Complex64>> {
    if let FilterModel::BrickWall(b) = filter {
        if grid.samples_in(b.delay_s).is_none() {
            return Err(Error::Grid(format!(
                "filter delay {} s is not an integer number of samples at {} Hz",
                b.delay_s, grid.fs_hz
            )));
        }
    }
    let n = samples.len();
    let mut spec = samples.to_vec();
    fft(&mut spec, false);
    let df = grid.bin_hz();
    for (j, x) in spec.iter_mut().enumerate() {
        let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let f = signed * df;
        let h = if f == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            let s21 = filter.evaluate(f.abs())?[(1, 0)];
            if f > 0.0 {
                s21
            } else {
                s21.conj()
            }
        };
        *x *= h / n as f64;
    }
    fft(&mut spec, true);
    Ok(spec)
}

fn gate(samples: &mut [Complex64], g: &Gate, grid: &SimGrid) {
    if matches!(g, Gate::AlwaysOn) {
        return;
    }
    for (x, w) in samples.iter_mut().zip(g.samples(grid)) {
        *x *= w;
    }
}

/// Output of `gate_out ∘ filter ∘ gate_in` applied to the grid's tone.
pub fn simulate_path(
    grid: &SimGrid,
    gate_in: impl Into<Gate>,
    gate_out: impl Into<Gate>,
    filter: &FilterModel,
) -> Result<Vec<Complex64>> {
    simulate_path_on(grid, &grid.tone(), gate_in.into(), gate_out.into(), filter)
}

/// As [`simulate_path`] for an arbitrary circular input record.
pub fn simulate_path_on(
    grid: &SimGrid,
    input: &[Complex64],
    gate_in: Gate,
    gate_out: Gate,
    filter: &FilterModel,
) -> Result<Vec<Complex64>> {
    if input.len() != grid.n_samples {
        return Err(Error::Grid(format!(
            "input has {} samples, grid has {}",
            input.len(),
            grid.n_samples
        )));
    }
    gate_in.check(grid)?;
    gate_out.check(grid)?;
    let mut x = input.to_vec();
    gate(&mut x, &gate_in, grid);
    let mut y = apply_filter(&x, grid, filter)?;
    gate(&mut y, &gate_out, grid);
    Ok(y)
}

/// Complex amplitudes at `f_rf + n·f_m`, `|n| ≤ n_max`, scaled so the
/// unprocessed tone reads 1 at `n = 0`.
pub fn spectrum_at_sidebands(samples: &[Complex64], grid: &SimGrid, n_max: usize) -> Result<HarmonicSpectrum> {
    let spec = sideband_fft(samples, grid, n_max)?;
    let k_rf = grid.bin_of(grid.f_rf_hz) as i64;
    let k_m = grid.bin_of(grid.f_m_hz) as i64;
    let scale = grid.spectrum_scale();
    let mut out = HarmonicSpectrum::new(grid.f_rf_hz, grid.f_m_hz);
    for n in -(n_max as i64)..=n_max as i64 {
        let bin = (k_rf + n * k_m) as usize;
        out.set(n as i32, spec[bin] * scale);
    }
    Ok(out)
}

/// Largest scaled magnitude at bins strictly between the analysed sidebands.
pub fn off_sideband_floor(samples: &[Complex64], grid: &SimGrid, n_max: usize) -> Result<f64> {
    let spec = sideband_fft(samples, grid, n_max)?;
    let k_rf = grid.bin_of(grid.f_rf_hz) as i64;
    let k_m = grid.bin_of(grid.f_m_hz) as i64;
    let (lo, hi) = (k_rf - n_max as i64 * k_m, k_rf + n_max as i64 * k_m);
    Ok((lo..=hi)
        .filter(|k| (k - k_rf).rem_euclid(k_m) != 0)
        .map(|k| spec[k as usize].norm() * grid.spectrum_scale())
        .fold(0.0, f64::max))
}

fn sideband_fft(samples: &[Complex64], grid: &SimGrid, n_max: usize) -> Result<Vec<Complex64>> {
    if samples.len() != grid.n_samples {
        return Err(Error::Grid(format!(
            "{} samples for a {}-sample grid",
            samples.len(),
            grid.n_samples
        )));
    }
    let lowest = grid.f_rf_hz - n_max as f64 * grid.f_m_hz;
    let highest = grid.f_rf_hz + n_max as f64 * grid.f_m_hz;
    if lowest <= 0.0 || 2.0 * highest >= grid.fs_hz {
        return Err(Error::Grid(format!(
            "sidebands up to n = ±{n_max} span [{lowest}, {highest}] Hz, outside (0, fs/2)"
        )));
    }
    let mut spec = samples.to_vec();
    fft(&mut spec, false);
    Ok(spec)
}

/// Weighted element-wise sum of equally long records.
pub fn superpose_paths(paths: &[Vec<Complex64>], normalization: f64) -> Result<Vec<Complex64>> {
    let first = paths
        .first()
        .ok_or_else(|| Error::Mismatch("no paths to superpose".into()))?;
    if let Some(p) = paths.iter().find(|p| p.len() != first.len()) {
        return Err(Error::Mismatch(format!(
            "path lengths differ: {} vs {}",
            first.len(),
            p.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); first.len()];
    for p in paths {
        for (o, x) in out.iter_mut().zip(p) {
            *o += x;
        }
    }
    for o in &mut out {
        *o *= normalization;
    }
    Ok(out)
}
