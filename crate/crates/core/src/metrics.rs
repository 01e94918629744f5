//! Circulator figures of merit from swept S-parameters.
//!
//! Port roles follow the usual duplexer reading of a circulator: port 1 is
//! the transmitter, port 2 the antenna and port 3 the receiver, so insertion
//! loss is `|S21|` and isolation is `|S31|`.

use std::f64::consts::TAU;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::network::{solve_with, sweep_with, HarmonicSMatrix, SolveOptions, Topology};
use crate::spectra::HarmonicSpectrum;
use crate::touchstone::{unwrap_phase, NetworkData};

/// Fundamental-to-fundamental S-matrices over a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSweep {
    pub freqs_hz: Vec<f64>,
    /// `[out][in]`, 0-based.
    pub smatrix: Vec<DMatrix<Complex64>>,
}

impl FundamentalSweep {
    pub fn new(freqs_hz: Vec<f64>, smatrix: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if freqs_hz.is_empty() || freqs_hz.len() != smatrix.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frequencies for {} matrices",
                freqs_hz.len(),
                smatrix.len()
            )));
        }
        if freqs_hz.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("sweep frequencies decrease".into()));
        }
        Ok(Self { freqs_hz, smatrix })
    }

    pub fn from_solutions(solutions: &[HarmonicSMatrix]) -> Result<Self> {
        Self::new(
            solutions.iter().map(|s| s.f_rf_hz).collect(),
            solutions
                .iter()
                .map(|s| {
                    let f = s.fundamental();
                    DMatrix::from_fn(s.n_ports(), s.n_ports(), |o, i| f[o][i])
                })
                .collect(),
        )
    }

    pub fn from_network(net: &NetworkData) -> Result<Self> {
        Self::new(
            net.freqs_hz.clone(),
            net.smatrix
                .iter()
                .map(|s| DMatrix::from_fn(2, 2, |o, i| s[(o, i)]))
                .collect(),
        )
    }

    pub fn n_ports(&self) -> usize {
        self.smatrix[0].nrows()
    }

    /// `S(out_port, in_port)` over the grid; ports are numbered from 1.
    pub fn param(&self, out_port: usize, in_port: usize) -> Result<Vec<Complex64>> {
        let n = self.n_ports();
        if out_port == 0 || in_port == 0 || out_port > n || in_port > n {
            return Err(Error::Range(format!("ports are 1..={n}, got S{out_port}{in_port}")));
        }
        Ok(self.smatrix.iter().map(|s| s[(out_port - 1, in_port - 1)]).collect())
    }

    fn db(&self, out_port: usize, in_port: usize) -> Result<Vec<f64>> {
        Ok(self.param(out_port, in_port)?.iter().map(|s| db(s.norm())).collect())
    }
}

fn db(mag: f64) -> f64 {
    20.0 * mag.log10()
}

fn lerp(x0: f64, y0: f64, x1: f64, y1: f64, x: f64) -> f64 {
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Width of the contiguous region around `center_hz` where
/// `|S(out, in)| ≤ −threshold_db`, with crossings found by linear
/// interpolation of the dB curve. Returns `(bw_hz, bw / interval midpoint)`.
///
/// If the grid point nearest the center misses the threshold, the
/// qualifying point nearest the center anchors the interval instead.
pub fn isolation_bandwidth(
    sweep: &FundamentalSweep,
    threshold_db: f64,
    out_port: usize,
    in_port: usize,
    center_hz: f64,
) -> Result<(f64, f64)> {
    let level = sweep.db(out_port, in_port)?;
    let f = &sweep.freqs_hz;
    let limit = -threshold_db;
    let ok = |i: usize| level[i] <= limit;
    let anchor = (0..f.len())
        .filter(|&i| ok(i))
        .min_by(|&a, &b| (f[a] - center_hz).abs().total_cmp(&(f[b] - center_hz).abs()))
        .ok_or_else(|| {
            Error::NotFound(format!(
                "|S{out_port}{in_port}| never drops below -{threshold_db} dB in the sweep"
            ))
        })?;
    let mut lo = anchor;
    while lo > 0 && ok(lo - 1) {
        lo -= 1;
    }
    let mut hi = anchor;
    while hi + 1 < f.len() && ok(hi + 1) {
        hi += 1;
    }
    let f_lo = if lo == 0 {
        f[0]
    } else {
        lerp(level[lo - 1], f[lo - 1], level[lo], f[lo], limit)
    };
    let f_hi = if hi + 1 == f.len() {
        f[hi]
    } else {
        lerp(level[hi], f[hi], level[hi + 1], f[hi + 1], limit)
    };
    let bw = f_hi - f_lo;
    let mid = 0.5 * (f_lo + f_hi);
    Ok((bw, bw / mid))
}

/// `−20·log10|S(out, in)|` at `f_hz`, interpolated linearly in dB.
pub fn insertion_loss_at(sweep: &FundamentalSweep, f_hz: f64, out_port: usize, in_port: usize) -> Result<f64> {
    let level = sweep.db(out_port, in_port)?;
    let f = &sweep.freqs_hz;
    let (first, last) = (f[0], f[f.len() - 1]);
    if !(f_hz >= first && f_hz <= last) {
        return Err(Error::Range(format!(
            "{f_hz} Hz is outside the sweep [{first}, {last}] Hz"
        )));
    }
    let i = f.partition_point(|&x| x < f_hz);
    if f[i] == f_hz {
        return Ok(-level[i]);
    }
    Ok(-lerp(f[i - 1], level[i - 1], f[i], level[i], f_hz))
}

/// Least-suppressed sideband with `0 < |n| ≤ n_max` and its level in dBc.
/// When every such sideband is exactly zero the level is `−∞`.
pub fn worst_imp_dbc(spectrum: &HarmonicSpectrum, n_max: i32) -> Result<(i32, f64)> {
    let c0 = spectrum.coeff(0).norm();
    if c0 == 0.0 {
        return Err(Error::Degenerate("fundamental coefficient is zero".into()));
    }
    let (n, mag) = (1..=n_max)
        .flat_map(|k| [k, -k])
        .map(|n| (n, spectrum.coeff(n).norm()))
        .fold((n_max.max(1), -1.0), |best, c| if c.1 > best.1 { c } else { best });
    Ok((n, if mag > 0.0 { db(mag / c0) } else { f64::NEG_INFINITY }))
}

/// Spread (max − min) of the group delay of `S(out, in)` over grid points
/// inside `band`.
pub fn delay_dispersion(
    sweep: &FundamentalSweep,
    band: (f64, f64),
    out_port: usize,
    in_port: usize,
) -> Result<f64> {
    let values = sweep.param(out_port, in_port)?;
    let f = &sweep.freqs_hz;
    let inside: Vec<usize> = (0..f.len()).filter(|&i| f[i] >= band.0 && f[i] <= band.1).collect();
    if inside.len() < 3 {
        return Err(Error::Range(format!(
            "{} sweep points inside [{}, {}] Hz, need at least 3",
            inside.len(),
            band.0,
            band.1
        )));
    }
    if let Some(&i) = inside.iter().find(|&&i| values[i].norm() < 1e-12) {
        return Err(Error::Degenerate(format!(
            "|S{out_port}{in_port}| vanishes at {} Hz",
            f[i]
        )));
    }
    let lo = inside[0];
    let hi = inside[inside.len() - 1];
    let phase = unwrap_phase(&values[lo..=hi].iter().map(|c| c.arg()).collect::<Vec<_>>());
    let m = phase.len();
    let delays = (0..m).map(|k| {
        let (a, b) = if k == 0 {
            (0, 1)
        } else if k == m - 1 {
            (m - 2, m - 1)
        } else {
            (k - 1, k + 1)
        };
        -(phase[b] - phase[a]) / (TAU * (f[lo + b] - f[lo + a]))
    });
    let (min, max) = delays.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Ok(max - min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub center_hz: f64,
    /// Transmitter to antenna loss, `−20·log10|S21|`.
    pub il_db: f64,
    /// Transmitter to receiver isolation, `−20·log10|S31|`.
    pub ix_db: f64,
    /// Smallest return loss over all ports and in-band sweep points.
    pub rl_db_min: f64,
    pub ix_bw_hz: f64,
    pub ix_bw_frac: f64,
    pub imp_worst_n: i32,
    pub imp_worst_dbc: f64,
    pub delay_dispersion_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    /// Defaults to the filter center.
    pub center_hz: Option<f64>,
    /// Defaults to the filter passband.
    pub band: Option<(f64, f64)>,
    pub ix_threshold_db: f64,
    /// IMPs are searched over `0 < |n| ≤ imp_n_max`.
    pub imp_n_max: i32,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            center_hz: None,
            band: None,
            ix_threshold_db: 20.0,
            imp_n_max: 3,
        }
    }
}

/// Sweeps `top` over `freqs` and reduces the result to a [`MetricsReport`].
///
/// A missing 20 dB isolation region yields a bandwidth of 0 rather than an
/// error, and an undefined delay spread yields NaN.
pub fn report(
    top: &Topology,
    freqs: &[f64],
    solve_opts: &SolveOptions,
    cfg: &ReportConfig,
) -> Result<MetricsReport> {
    let solutions = sweep_with(top, freqs, solve_opts)?;
    let sweep = FundamentalSweep::from_solutions(&solutions)?;
    let center = cfg.center_hz.unwrap_or_else(|| top.filter().center_hz());
    let band = cfg.band.unwrap_or_else(|| top.filter().passband());

    let il_db = insertion_loss_at(&sweep, center, 2, 1)?;
    let ix_db = insertion_loss_at(&sweep, center, 3, 1)?;

    let in_band: Vec<usize> = (0..sweep.freqs_hz.len())
        .filter(|&i| sweep.freqs_hz[i] >= band.0 && sweep.freqs_hz[i] <= band.1)
        .collect();
    let rl_points: Vec<usize> = if in_band.is_empty() {
        (0..sweep.freqs_hz.len()).collect()
    } else {
        in_band
    };
    let rl_db_min = (1..=sweep.n_ports())
        .flat_map(|p| rl_points.iter().map(move |&i| (p, i)))
        .map(|(p, i)| -db(sweep.smatrix[i][(p - 1, p - 1)].norm()))
        .fold(f64::INFINITY, f64::min);

    let (ix_bw_hz, ix_bw_frac) = match isolation_bandwidth(&sweep, cfg.ix_threshold_db, 3, 1, center) {
        Ok(v) => v,
        Err(Error::NotFound(msg)) => {
            warn!("{msg}; reporting zero isolation bandwidth");
            (0.0, 0.0)
        }
        Err(e) => return Err(e),
    };

    let at_center = match solutions.iter().find(|s| s.f_rf_hz == center) {
        Some(s) => s.clone(),
        None => solve_with(top, center, solve_opts).map_err(|e| e.at_frequency(center))?,
    };
    let (imp_worst_n, imp_worst_dbc) = worst_imp_dbc(&at_center.spectrum(2, 1)?, cfg.imp_n_max)?;

    let delay_dispersion_s = delay_dispersion(&sweep, band, 2, 1).unwrap_or_else(|e| {
        warn!("delay dispersion unavailable: {e}");
        f64::NAN
    });

    Ok(MetricsReport {
        center_hz: center,
        il_db,
        ix_db,
        rl_db_min,
        ix_bw_hz,
        ix_bw_frac,
        imp_worst_n,
        imp_worst_dbc,
        delay_dispersion_s,
    })
}
