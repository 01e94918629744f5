//! Two-port filter models: ideal brick-wall, a parametric linear-phase
//! bandpass surrogate, and interpolated tabulated data.

use std::f64::consts::{PI, TAU};

use log::warn;
use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::touchstone::{largest_singular_value, NetworkData, SMatrix2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Slack on passband edges so that `f_rf + n·f_m` landing exactly on an edge
/// is not lost to rounding.
const EDGE_SLACK_HZ: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrickWall {
    pub center_hz: f64,
    pub bw_hz: f64,
    pub delay_s: f64,
    pub il_db: f64,
    /// Reflection phase outside the passband (`S11 = S22 = e^{iθ}`).
    pub oob_phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parametric {
    pub center_hz: f64,
    pub bw_hz: f64,
    /// Width of each raised-cosine skirt outside the passband.
    pub edge_hz: f64,
    /// Group delay at the center frequency.
    pub delay_s: f64,
    /// Group delay slope; the delay at `f` is `delay_s + slope·(f − center)`.
    pub delay_slope_s_per_hz: f64,
    pub il_db: f64,
    /// Passband return loss; `f64::INFINITY` gives a perfectly matched passband.
    pub rl_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    Strict,
    /// Outside the grid the filter is a full reflector with zero phase.
    #[default]
    Reflective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    pub data: NetworkData,
    pub extrapolation: Extrapolation,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FilterModel {
    BrickWall(BrickWall),
    Parametric(Parametric),
    Tabulated(Tabulated),
}

fn check_band(center_hz: f64, bw_hz: f64, il_db: f64) -> Result<()> {
    if !(center_hz > 0.0) {
        return Err(Error::InvalidParameter(format!("center must be > 0 Hz, got {center_hz}")));
    }
    if !(bw_hz > 0.0) || bw_hz >= 2.0 * center_hz {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be > 0 and below twice the center, got {bw_hz}"
        )));
    }
    if !(il_db >= 0.0) || !il_db.is_finite() {
        return Err(Error::InvalidParameter(format!("IL must be finite and >= 0 dB, got {il_db}")));
    }
    Ok(())
}

fn db_to_lin(db: f64) -> f64 {
    10f64.powf(-db / 20.0)
}

impl FilterModel {
    pub fn brick_wall(center_hz: f64, bw_hz: f64, delay_s: f64, il_db: f64) -> Result<Self> {
        Self::brick_wall_with_phase(center_hz, bw_hz, delay_s, il_db, 0.0)
    }

    pub fn brick_wall_with_phase(
        center_hz: f64,
        bw_hz: f64,
        delay_s: f64,
        il_db: f64,
        oob_phase_rad: f64,
    ) -> Result<Self> {
        check_band(center_hz, bw_hz, il_db)?;
        if !(delay_s >= 0.0) || !oob_phase_rad.is_finite() {
            return Err(Error::InvalidParameter(
                "delay must be >= 0 and the reflection phase finite".into(),
            ));
        }
        Ok(FilterModel::BrickWall(BrickWall {
            center_hz,
            bw_hz,
            delay_s,
            il_db,
            oob_phase_rad,
        }))
    }

    pub fn parametric(p: Parametric) -> Result<Self> {
        check_band(p.center_hz, p.bw_hz, p.il_db)?;
        if !(p.edge_hz >= 0.0) || !(p.delay_s >= 0.0) || !p.delay_slope_s_per_hz.is_finite() {
            return Err(Error::InvalidParameter(
                "edge width and delay must be >= 0, slope finite".into(),
            ));
        }
        if !(p.rl_db >= 0.0) {
            return Err(Error::InvalidParameter(format!("RL must be >= 0 dB, got {}", p.rl_db)));
        }
        if p.center_hz - p.bw_hz / 2.0 - p.edge_hz <= 0.0 {
            return Err(Error::InvalidParameter("lower skirt reaches 0 Hz".into()));
        }
        let g = db_to_lin(p.il_db);
        let r = db_to_lin(p.rl_db);
        if g * g + r * r > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "IL {} dB with RL {} dB is not passive (|S21|² + |S11|² > 1)",
                p.il_db, p.rl_db
            )));
        }
        Ok(FilterModel::Parametric(p))
    }

    /// Parametric filter whose group delay spans `[delay_lo_s, delay_hi_s]`
    /// linearly across the passband.
    pub fn parametric_delay_span(
        center_hz: f64,
        bw_hz: f64,
        edge_hz: f64,
        delay_lo_s: f64,
        delay_hi_s: f64,
        il_db: f64,
        rl_db: f64,
    ) -> Result<Self> {
        Self::parametric(Parametric {
            center_hz,
            bw_hz,
            edge_hz,
            delay_s: 0.5 * (delay_lo_s + delay_hi_s),
            delay_slope_s_per_hz: (delay_hi_s - delay_lo_s) / bw_hz,
            il_db,
            rl_db,
        })
    }

    pub fn tabulated(data: NetworkData, extrapolation: Extrapolation) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated filter needs at least 2 points".into(),
            ));
        }
        if !data.is_reciprocal(1e-9) {
            warn!("tabulated filter data is not reciprocal (S12 != S21)");
        }
        Ok(FilterModel::Tabulated(Tabulated {
            data,
            extrapolation,
        }))
    }

    /// S-matrix at `f_hz`, referenced to [`FilterModel::ref_ohm`].
    pub fn evaluate(&self, f_hz: f64) -> Result<SMatrix2> {
        if !(f_hz > 0.0) {
            return Err(Error::Range(format!("filter evaluated at {f_hz} Hz")));
        }
        match self {
            FilterModel::BrickWall(b) => Ok(if (f_hz - b.center_hz).abs() <= b.bw_hz / 2.0 + EDGE_SLACK_HZ {
                let t = Complex64::from_polar(db_to_lin(b.il_db), -TAU * (f_hz * b.delay_s).fract());
                Matrix2::new(ZERO, t, t, ZERO)
            } else {
                self.background()
            }),
            FilterModel::Parametric(p) => {
                let w = parametric_weight(p, f_hz);
                if w == 0.0 {
                    return Ok(self.background());
                }
                let df = f_hz - p.center_hz;
                let cycles = (f_hz * p.delay_s).fract() + 0.5 * p.delay_slope_s_per_hz * df * df;
                let rot = Complex64::from_polar(1.0, -TAU * cycles.fract());
                let t = rot * db_to_lin(p.il_db);
                let r = rot * Complex64::new(0.0, if p.rl_db.is_finite() { db_to_lin(p.rl_db) } else { 0.0 });
                let pass = Matrix2::new(r, t, t, r);
                Ok(pass * Complex64::from(w) + self.background() * Complex64::from(1.0 - w))
            }
            FilterModel::Tabulated(t) => interpolate(&t.data, f_hz, t.extrapolation),
        }
    }

    /// The constant response the filter takes far outside its passband.
    pub fn background(&self) -> SMatrix2 {
        match self {
            FilterModel::BrickWall(b) => {
                let e = Complex64::from_polar(1.0, b.oob_phase_rad);
                Matrix2::new(e, ZERO, ZERO, e)
            }
            _ => Matrix2::identity(),
        }
    }

    /// Frequencies outside this closed interval return [`FilterModel::background`]
    /// (or an error, for strict tabulated data).
    pub fn support(&self) -> (f64, f64) {
        match self {
            FilterModel::BrickWall(b) => (
                b.center_hz - b.bw_hz / 2.0 - EDGE_SLACK_HZ,
                b.center_hz + b.bw_hz / 2.0 + EDGE_SLACK_HZ,
            ),
            FilterModel::Parametric(p) => {
                let half = p.bw_hz / 2.0 + p.edge_hz;
                (p.center_hz - half, p.center_hz + half)
            }
            FilterModel::Tabulated(t) => (t.data.freqs_hz[0], t.data.freqs_hz[t.data.len() - 1]),
        }
    }

    /// Nominal passband `(low, high)` in Hz. For tabulated data this is the
    /// contiguous region around the transmission peak within 3 dB of it.
    pub fn passband(&self) -> (f64, f64) {
        match self {
            FilterModel::BrickWall(b) => (b.center_hz - b.bw_hz / 2.0, b.center_hz + b.bw_hz / 2.0),
            FilterModel::Parametric(p) => (p.center_hz - p.bw_hz / 2.0, p.center_hz + p.bw_hz / 2.0),
            FilterModel::Tabulated(t) => {
                let mags: Vec<f64> = t.data.smatrix.iter().map(|s| s[(1, 0)].norm()).collect();
                let peak = (0..mags.len())
                    .max_by(|&a, &b| mags[a].total_cmp(&mags[b]))
                    .unwrap_or(0);
                let floor = mags[peak] * db_to_lin(3.0);
                let mut lo = peak;
                while lo > 0 && mags[lo - 1] >= floor {
                    lo -= 1;
                }
                let mut hi = peak;
                while hi + 1 < mags.len() && mags[hi + 1] >= floor {
                    hi += 1;
                }
                (t.data.freqs_hz[lo], t.data.freqs_hz[hi])
            }
        }
    }

    pub fn center_hz(&self) -> f64 {
        let (lo, hi) = self.passband();
        0.5 * (lo + hi)
    }

    /// Group delay at the center frequency.
    pub fn nominal_delay_s(&self) -> Option<f64> {
        match self {
            FilterModel::BrickWall(b) => Some(b.delay_s),
            FilterModel::Parametric(p) => Some(p.delay_s),
            FilterModel::Tabulated(t) => {
                crate::touchstone::group_delay(&t.data, 2, 1, self.center_hz()).ok()
            }
        }
    }

    /// Reference impedance of the S-parameters.
    pub fn ref_ohm(&self) -> f64 {
        match self {
            FilterModel::Tabulated(t) => t.data.ref_ohm,
            _ => 50.0,
        }
    }

    pub fn is_passive_at(&self, f_hz: f64, tol: f64) -> Result<bool> {
        Ok(largest_singular_value(&self.evaluate(f_hz)?) <= 1.0 + tol)
    }
}

/// Raised-cosine passband weight in `[0, 1]`.
fn parametric_weight(p: &Parametric, f_hz: f64) -> f64 {
    let d = (f_hz - p.center_hz).abs() - p.bw_hz / 2.0;
    if d <= 0.0 {
        1.0
    } else if d >= p.edge_hz {
        0.0
    } else {
        0.5 * (1.0 + (PI * d / p.edge_hz).cos())
    }
}

/// Component-wise linear interpolation of tabulated S-parameters in real and
/// imaginary parts.
pub fn interpolate(net: &NetworkData, f_hz: f64, policy: Extrapolation) -> Result<SMatrix2> {
    let n = net.len();
    if n < 2 {
        return Err(Error::Range("interpolation needs at least 2 points".into()));
    }
    let (lo, hi) = (net.freqs_hz[0], net.freqs_hz[n - 1]);
    if f_hz < lo || f_hz > hi {
        return match policy {
            Extrapolation::Strict => Err(Error::Range(format!(
                "{f_hz} Hz is outside the tabulated range [{lo}, {hi}] Hz"
            ))),
            Extrapolation::Reflective => Ok(Matrix2::identity()),
        };
    }
    let i = net.freqs_hz.partition_point(|&f| f <= f_hz);
    if i > 0 && net.freqs_hz[i - 1] == f_hz {
        return Ok(net.smatrix[i - 1]);
    }
    let (a, b) = (i - 1, i);
    let t = (f_hz - net.freqs_hz[a]) / (net.freqs_hz[b] - net.freqs_hz[a]);
    Ok(net.smatrix[a] * Complex64::from(1.0 - t) + net.smatrix[b] * Complex64::from(t))
}

/// Smallest singular value below which `I ± S` is treated as singular.
const SINGULAR_TOL: f64 = 1e-12;

/// `Y = (1/Z₀)·(I − S)·(I + S)⁻¹`.
pub fn s_to_y(s: &SMatrix2, ref_ohm: f64) -> Result<SMatrix2> {
    let eye = Matrix2::identity();
    let sum = eye + s;
    let inv = checked_inverse(&sum, "s_to_y: I + S")?;
    Ok((eye - s) * inv / Complex64::from(ref_ohm))
}

/// `S = (I − Z₀·Y)·(I + Z₀·Y)⁻¹`.
pub fn y_to_s(y: &SMatrix2, ref_ohm: f64) -> Result<SMatrix2> {
    let eye = Matrix2::identity();
    let zy = y * Complex64::from(ref_ohm);
    let inv = checked_inverse(&(eye + zy), "y_to_s: I + Z0·Y")?;
    Ok((eye - zy) * inv)
}

fn checked_inverse(m: &SMatrix2, context: &str) -> Result<SMatrix2> {
    let sv = m.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= SINGULAR_TOL * smax.max(1.0) {
        return Err(Error::Singular {
            condition: if smin > 0.0 { smax / smin } else { f64::INFINITY },
            context: context.into(),
        });
    }
    m.try_inverse().ok_or_else(|| Error::Singular {
        condition: f64::INFINITY,
        context: context.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn canonical() -> FilterModel {
        FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.0).unwrap()
    }

    #[test]
    fn brick_wall_passband_phase() {
        let s = canonical().evaluate(900e6).unwrap();
        let expected = Complex64::from_polar(1.0, -TAU * 9e8 * 2e-8);
        assert!((s[(1, 0)] - expected).norm() < 1e-12);
        assert_eq!(s[(0, 1)], s[(1, 0)]);
        assert_eq!(s[(0, 0)], ZERO);
    }

    #[test]
    fn brick_wall_stopband_reflects() {
        let s = canonical().evaluate(925e6).unwrap();
        assert_eq!(s[(1, 0)], ZERO);
        assert_eq!(s[(0, 0)].norm(), 1.0);
        let f = FilterModel::brick_wall_with_phase(900e6, 40e6, 0.0, 0.0, PI).unwrap();
        assert!((f.evaluate(800e6).unwrap()[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn brick_wall_edges_are_inclusive() {
        let f = canonical();
        assert!(f.evaluate(920e6).unwrap()[(1, 0)].norm() > 0.9);
        assert_eq!(f.evaluate(920.001e6).unwrap()[(1, 0)], ZERO);
    }

    #[test]
    fn parametric_center_loss_and_delay() {
        let f = FilterModel::parametric_delay_span(900e6, 40e6, 5e6, 15e-9, 23e-9, 0.9, 20.0).unwrap();
        let s = f.evaluate(900e6).unwrap();
        assert!((s[(1, 0)].norm() - 0.90157).abs() < 1e-5);
        assert!((f.nominal_delay_s().unwrap() - 19e-9).abs() < 1e-20);
        for k in 0..200 {
            let fr = 870e6 + k as f64 * 0.3e6;
            assert!(f.is_passive_at(fr, 1e-9).unwrap(), "{fr}");
            let s = f.evaluate(fr).unwrap();
            assert_eq!(s[(0, 1)], s[(1, 0)]);
        }
        assert_eq!(f.evaluate(950e6).unwrap(), Matrix2::identity());
    }

    #[test]
    fn parametric_rejects_active_spec() {
        let p = Parametric {
            center_hz: 900e6,
            bw_hz: 40e6,
            edge_hz: 0.0,
            delay_s: 20e-9,
            delay_slope_s_per_hz: 0.0,
            il_db: 0.0,
            rl_db: 10.0,
        };
        assert!(FilterModel::parametric(p).is_err());
    }

    #[test]
    fn s_to_y_of_matched_is_conductance() {
        let y = s_to_y(&Matrix2::zeros(), 50.0).unwrap();
        assert!((y - Matrix2::identity() / c(50.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn s_to_y_of_thru_is_singular() {
        let thru = Matrix2::new(ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO);
        assert!(matches!(s_to_y(&thru, 50.0), Err(Error::Singular { .. })));
    }

    #[test]
    fn interpolation_basics() {
        let net = NetworkData::new(
            vec![1e9, 2e9],
            vec![Matrix2::zeros(), Matrix2::new(ZERO, c(1.0, 0.0), c(1.0, 0.0), ZERO)],
            50.0,
        )
        .unwrap();
        let mid = interpolate(&net, 1.5e9, Extrapolation::Strict).unwrap();
        assert_eq!(mid[(1, 0)], c(0.5, 0.0));
        assert_eq!(interpolate(&net, 2e9, Extrapolation::Strict).unwrap(), net.smatrix[1]);
        assert_eq!(interpolate(&net, 1e9, Extrapolation::Strict).unwrap(), net.smatrix[0]);
        assert!(matches!(interpolate(&net, 3e9, Extrapolation::Strict), Err(Error::Range(_))));
        assert_eq!(interpolate(&net, 3e9, Extrapolation::Reflective).unwrap(), Matrix2::identity());
    }

    #[test]
    fn dense_pure_delay_interpolation_error() {
        let delay = 20e-9;
        // 256 samples per 2π of phase rotation: chord sag (Δθ)²/8 ≈ 7.5e-5.
        let step = 1.0 / delay / 256.0;
        let freqs: Vec<f64> = (0..=512).map(|k| 850e6 + k as f64 * step).collect();
        let net = NetworkData::from_fn(freqs, 50.0, |f| {
            let t = Complex64::from_polar(1.0, -TAU * f * delay);
            Matrix2::new(ZERO, t, t, ZERO)
        })
        .unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..1000 {
            let f = 850e6 + k as f64 * 0.0937e6;
            if f > net.freqs_hz[net.len() - 1] {
                break;
            }
            let s = interpolate(&net, f, Extrapolation::Strict).unwrap();
            worst = worst.max((s[(1, 0)] - Complex64::from_polar(1.0, -TAU * f * delay)).norm());
        }
        let dtheta = TAU * delay * step;
        assert!(worst <= dtheta * dtheta / 8.0 * (1.0 + 1e-6), "{worst}");
        assert!(worst < 1e-4, "{worst}");
    }

    #[test]
    fn tabulated_passband_from_data() {
        let freqs: Vec<f64> = (0..=100).map(|k| 850e6 + k as f64 * 1e6).collect();
        let bw = canonical();
        let net = NetworkData::from_fn(freqs, 50.0, |f| bw.evaluate(f).unwrap()).unwrap();
        let t = FilterModel::tabulated(net, Extrapolation::Reflective).unwrap();
        assert_eq!(t.passband(), (880e6, 920e6));
        assert!((t.nominal_delay_s().unwrap() - 20e-9).abs() < 1e-12);
    }
}
