//! Touchstone v1 reader/writer for two-port S-parameter files (`.s2p`), plus
//! group delay extraction from tabulated data.
//!
//! Grammar accepted by [`parse`]:
//!
//! ```text
//! ! comment                      (anything after `!` is ignored, also inline)
//! # <HZ|KHZ|MHZ|GHZ> S <RI|MA|DB> R <ohms>
//! <freq> <S11> <S21> <S12> <S22>  (each S-parameter is a pair of numbers)
//! ```
//!
//! Option tokens are case-insensitive. Omitted option fields take the
//! Touchstone defaults (GHz, MA, 50 Ω). Only the first option line counts.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use log::warn;
use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type SMatrix2 = Matrix2<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    RealImag,
    MagAngle,
    DbAngle,
}

impl DataFormat {
    fn keyword(self) -> &'static str {
        match self {
            DataFormat::RealImag => "RI",
            DataFormat::MagAngle => "MA",
            DataFormat::DbAngle => "DB",
        }
    }

    fn decode(self, x: f64, y: f64) -> Complex64 {
        match self {
            DataFormat::RealImag => Complex64::new(x, y),
            DataFormat::MagAngle => Complex64::from_polar(x, y.to_radians()),
            DataFormat::DbAngle => Complex64::from_polar(10f64.powf(x / 20.0), y.to_radians()),
        }
    }

    fn encode(self, s: Complex64) -> (f64, f64) {
        match self {
            DataFormat::RealImag => (s.re, s.im),
            DataFormat::MagAngle => (s.norm(), s.arg().to_degrees()),
            DataFormat::DbAngle => (20.0 * s.norm().log10(), s.arg().to_degrees()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    Hz,
    KHz,
    MHz,
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::Hz => 1.0,
            FrequencyUnit::KHz => 1e3,
            FrequencyUnit::MHz => 1e6,
            FrequencyUnit::GHz => 1e9,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "HZ",
            FrequencyUnit::KHz => "KHZ",
            FrequencyUnit::MHz => "MHZ",
            FrequencyUnit::GHz => "GHZ",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "HZ" => Some(FrequencyUnit::Hz),
            "KHZ" => Some(FrequencyUnit::KHz),
            "MHZ" => Some(FrequencyUnit::MHz),
            "GHZ" => Some(FrequencyUnit::GHz),
            _ => None,
        }
    }
}

/// Two-port S-parameters sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkData {
    pub freqs_hz: Vec<f64>,
    pub smatrix: Vec<SMatrix2>,
    pub ref_ohm: f64,
}

impl NetworkData {
    pub fn new(freqs_hz: Vec<f64>, smatrix: Vec<SMatrix2>, ref_ohm: f64) -> Result<Self> {
        if freqs_hz.len() != smatrix.len() {
            return Err(Error::InvalidParameter(format!(
                "{} frequencies but {} S-matrices",
                freqs_hz.len(),
                smatrix.len()
            )));
        }
        if !(ref_ohm > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference impedance must be > 0, got {ref_ohm}"
            )));
        }
        if let Some(&f) = freqs_hz.iter().find(|f| !(**f > 0.0)) {
            return Err(Error::InvalidParameter(format!("frequency {f} is not > 0")));
        }
        if let Some(w) = freqs_hz.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(format!(
                "frequencies not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            freqs_hz,
            smatrix,
            ref_ohm,
        })
    }

    /// Samples `response` on `freqs_hz`.
    pub fn from_fn(
        freqs_hz: Vec<f64>,
        ref_ohm: f64,
        mut response: impl FnMut(f64) -> SMatrix2,
    ) -> Result<Self> {
        let smatrix = freqs_hz.iter().map(|&f| response(f)).collect();
        Self::new(freqs_hz, smatrix, ref_ohm)
    }

    pub fn len(&self) -> usize {
        self.freqs_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs_hz.is_empty()
    }

    /// `S(out_port, in_port)` at every grid point; ports are numbered 1 and 2.
    pub fn param(&self, out_port: usize, in_port: usize) -> Result<Vec<Complex64>> {
        let (r, c) = port_index(out_port, in_port)?;
        Ok(self.smatrix.iter().map(|s| s[(r, c)]).collect())
    }

    /// Grid indices whose largest singular value exceeds `1 + tol`.
    pub fn passivity_violations(&self, tol: f64) -> Vec<usize> {
        self.smatrix
            .iter()
            .enumerate()
            .filter(|(_, s)| largest_singular_value(s) > 1.0 + tol)
            .map(|(i, _)| i)
            .collect()
    }

    /// Whether `S12 = S21` at every grid point to within `tol`.
    pub fn is_reciprocal(&self, tol: f64) -> bool {
        self.smatrix
            .iter()
            .all(|s| (s[(0, 1)] - s[(1, 0)]).norm() <= tol)
    }
}

pub(crate) fn port_index(out_port: usize, in_port: usize) -> Result<(usize, usize)> {
    if !(1..=2).contains(&out_port) || !(1..=2).contains(&in_port) {
        return Err(Error::Range(format!(
            "two-port data has ports 1 and 2, got S{out_port}{in_port}"
        )));
    }
    Ok((out_port - 1, in_port - 1))
}

pub(crate) fn largest_singular_value(s: &SMatrix2) -> f64 {
    s.singular_values().max()
}

pub fn parse(text: &str) -> Result<NetworkData> {
    let mut options: Option<(FrequencyUnit, DataFormat, f64)> = None;
    let mut freqs = Vec::new();
    let mut smatrix = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('#') {
            if options.is_none() {
                options = Some(parse_option_line(rest, line_no)?);
            }
            continue;
        }
        if content.starts_with('[') {
            return Err(Error::parse(
                line_no,
                format!("Touchstone v2 keyword `{content}` is not supported"),
            ));
        }
        let (unit, format, _) = options.ok_or_else(|| {
            Error::parse(line_no, "data row before the `#` option line")
        })?;
        let values = content
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("invalid number `{tok}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        match values.len() {
            9 => {}
            3 => {
                return Err(Error::parse(
                    line_no,
                    "one-port data is not supported (only two-port files)",
                ))
            }
            n if n > 9 => {
                return Err(Error::parse(
                    line_no,
                    format!("{n} columns: only two-port files are supported"),
                ))
            }
            n => {
                return Err(Error::parse(
                    line_no,
                    format!("expected 9 columns, found {n}"),
                ))
            }
        }
        let f = values[0] * unit.scale();
        if !(f > 0.0) {
            return Err(Error::parse(line_no, format!("frequency {f} Hz is not > 0")));
        }
        if let Some(&prev) = freqs.last() {
            if f <= prev {
                return Err(Error::parse(
                    line_no,
                    format!("frequency {f} Hz does not increase (previous {prev} Hz)"),
                ));
            }
        }
        let p = |k: usize| format.decode(values[1 + 2 * k], values[2 + 2 * k]);
        // Column order S11 S21 S12 S22.
        smatrix.push(Matrix2::new(p(0), p(2), p(1), p(3)));
        freqs.push(f);
    }

    let (_, _, ref_ohm) =
        options.ok_or_else(|| Error::parse(last_line.max(1), "missing `#` option line"))?;
    if freqs.is_empty() {
        return Err(Error::parse(last_line.max(1), "no data rows"));
    }
    let net = NetworkData::new(freqs, smatrix, ref_ohm)
        .map_err(|e| Error::parse(last_line, e.to_string()))?;
    let bad = net.passivity_violations(1e-6);
    if !bad.is_empty() {
        warn!(
            "{} of {} points are not passive (largest singular value > 1 + 1e-6)",
            bad.len(),
            net.len()
        );
    }
    Ok(net)
}

fn parse_option_line(rest: &str, line_no: usize) -> Result<(FrequencyUnit, DataFormat, f64)> {
    let mut unit = FrequencyUnit::GHz;
    let mut format = DataFormat::MagAngle;
    let mut ref_ohm = 50.0;
    let tokens: Vec<String> = rest.split_whitespace().map(|t| t.to_ascii_uppercase()).collect();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i].as_str();
        if let Some(u) = FrequencyUnit::from_keyword(tok) {
            unit = u;
        } else {
            match tok {
                "S" => {}
                "Y" | "Z" | "G" | "H" => {
                    return Err(Error::parse(
                        line_no,
                        format!("parameter type {tok} is not supported (only S)"),
                    ))
                }
                "RI" => format = DataFormat::RealImag,
                "MA" => format = DataFormat::MagAngle,
                "DB" => format = DataFormat::DbAngle,
                "R" => {
                    let value = tokens.get(i + 1).ok_or_else(|| {
                        Error::parse(line_no, "`R` must be followed by a resistance")
                    })?;
                    ref_ohm = value
                        .parse::<f64>()
                        .ok()
                        .filter(|r| *r > 0.0)
                        .ok_or_else(|| {
                            Error::parse(line_no, format!("invalid reference resistance `{value}`"))
                        })?;
                    i += 1;
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("unrecognized option `{other}`"),
                    ))
                }
            }
        }
        i += 1;
    }
    Ok((unit, format, ref_ohm))
}

/// Renders `net` as Touchstone v1 text. Values use the shortest decimal form
/// that parses back to the identical `f64`.
pub fn write(net: &NetworkData, format: DataFormat, unit: FrequencyUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "! two-port S-parameters, {} points", net.len());
    let _ = writeln!(
        out,
        "# {} S {} R {:?}",
        unit.keyword(),
        format.keyword(),
        net.ref_ohm
    );
    for (f, s) in net.freqs_hz.iter().zip(&net.smatrix) {
        let _ = write!(out, "{:?}", f / unit.scale());
        for value in [s[(0, 0)], s[(1, 0)], s[(0, 1)], s[(1, 1)]] {
            let (x, y) = format.encode(value);
            let _ = write!(out, " {x:?} {y:?}");
        }
        out.push('\n');
    }
    out
}

/// Removes 2π jumps: whenever consecutive samples differ by more than π, a
/// running offset of ∓2π is accumulated.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let d = p - q;
            if d > PI {
                offset -= TAU * ((d - PI) / TAU).ceil();
            } else if d < -PI {
                offset += TAU * ((-d - PI) / TAU).ceil();
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// Group delay `−dθ/dω` of `S(out_port, in_port)` at `f_hz`.
///
/// The unwrapped phase is differentiated with central differences at the grid
/// points (one-sided at the ends) and the derivative is interpolated linearly
/// to `f_hz`.
pub fn group_delay(net: &NetworkData, out_port: usize, in_port: usize, f_hz: f64) -> Result<f64> {
    let n = net.len();
    if n < 3 {
        return Err(Error::Range(format!(
            "group delay needs at least 3 points, have {n}"
        )));
    }
    let first = net.freqs_hz[0];
    let last = net.freqs_hz[n - 1];
    if !(f_hz > first && f_hz < last) {
        return Err(Error::Range(format!(
            "{f_hz} Hz is not strictly inside the grid [{first}, {last}] Hz"
        )));
    }
    let values = net.param(out_port, in_port)?;
    let i = net.freqs_hz.partition_point(|&f| f <= f_hz) - 1;
    let lo = i.saturating_sub(1);
    let hi = (i + 2).min(n - 1);
    if let Some(k) = (lo..=hi).find(|&k| values[k].norm() < 1e-12) {
        return Err(Error::Degenerate(format!(
            "|S{out_port}{in_port}| vanishes at {} Hz, phase undefined",
            net.freqs_hz[k]
        )));
    }
    let phase = unwrap_phase(&values.iter().map(|c| c.arg()).collect::<Vec<_>>());
    let slope = |k: usize| {
        let (a, b) = if k == 0 {
            (0, 1)
        } else if k == n - 1 {
            (n - 2, n - 1)
        } else {
            (k - 1, k + 1)
        };
        -(phase[b] - phase[a]) / (TAU * (net.freqs_hz[b] - net.freqs_hz[a]))
    };
    let (f0, f1) = (net.freqs_hz[i], net.freqs_hz[i + 1]);
    let t = (f_hz - f0) / (f1 - f0);
    Ok(slope(i) * (1.0 - t) + slope(i + 1) * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_ma_row() {
        let text = "! filter\n# GHZ S MA R 50\n0.9 0.1 170 0.9 -20 0.9 -20 0.1 170\n";
        let net = parse(text).unwrap();
        assert_eq!(net.freqs_hz, vec![9.0e8]);
        assert_eq!(net.ref_ohm, 50.0);
        let s21 = net.smatrix[0][(1, 0)];
        assert!((s21.norm() - 0.9).abs() < 1e-15);
        assert!((s21.arg().to_degrees() + 20.0).abs() < 1e-12);
        let s11 = net.smatrix[0][(0, 0)];
        assert!((s11.arg().to_degrees() - 170.0).abs() < 1e-12);
    }

    #[test]
    fn db_magnitude_conversion() {
        let text = "# HZ S DB R 50\n1e9 -3.0103 0 -3.0103 0 0 0 0 0\n";
        let net = parse(text).unwrap();
        // -3.0103 dB is half power, i.e. 1/√2 in magnitude.
        assert!((net.smatrix[0][(0, 0)].norm() - 0.70711).abs() < 1e-5);
        assert!((net.smatrix[0][(1, 0)].norm() - 10f64.powf(-3.0103 / 20.0)).abs() < 1e-15);
        assert!((net.smatrix[0][(1, 1)].norm() - 1.0).abs() < 1e-15);
        let three = parse("# HZ S DB R 50\n1e9 -3 0 0 0 0 0 0 0\n").unwrap();
        assert!((three.smatrix[0][(0, 0)].norm() - 0.70795).abs() < 1e-5);
    }

    #[test]
    fn missing_option_line_is_line_one() {
        let err = parse("0.9 0.1 170 0.9 -20 0.9 -20 0.1 170\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 1,
                message: "data row before the `#` option line".into()
            }
        );
        assert!(matches!(parse("! only a comment\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn defaults_and_case_insensitivity() {
        let net = parse("# mhz s ri\n900 0 0 1 0 1 0 0 0\n").unwrap();
        assert_eq!(net.ref_ohm, 50.0);
        assert_eq!(net.freqs_hz, vec![9e8]);
        let net = parse("#\n1 0 0 1 0 1 0 0 0\n").unwrap();
        assert_eq!(net.freqs_hz, vec![1e9]);
    }

    #[test]
    fn inline_comments_tabs_crlf_and_blank_lines() {
        let text = "# KHZ S RI R 75 ! opts\r\n\r\n1000\t0 0\t1 0 1 0 0 0 ! row\r\n2000 0 0 1 0 1 0 0 0\r\n";
        let net = parse(text).unwrap();
        assert_eq!(net.freqs_hz, vec![1e6, 2e6]);
        assert_eq!(net.ref_ohm, 75.0);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let bad_cols = "# GHZ S RI R 50\n0.9 0 0 1 0 1 0 0\n";
        assert!(matches!(parse(bad_cols), Err(Error::Parse { line: 2, .. })));
        let one_port = "# GHZ S RI R 50\n0.9 0 0\n";
        assert!(matches!(parse(one_port), Err(Error::Parse { line: 2, .. })));
        let decreasing = "# GHZ S RI R 50\n0.9 0 0 1 0 1 0 0 0\n! x\n0.8 0 0 1 0 1 0 0 0\n";
        assert!(matches!(parse(decreasing), Err(Error::Parse { line: 4, .. })));
        let bad_num = "# GHZ S RI R 50\n0.9 0 0 1 x 1 0 0 0\n";
        assert!(matches!(parse(bad_num), Err(Error::Parse { line: 2, .. })));
        let bad_opt = "# GHZ Z RI R 50\n";
        assert!(matches!(parse(bad_opt), Err(Error::Parse { line: 1, .. })));
        let v2 = "[Version] 2.0\n# GHZ S RI R 50\n";
        assert!(matches!(parse(v2), Err(Error::Parse { line: 1, .. })));
        let bad_r = "# GHZ S RI R -5\n";
        assert!(matches!(parse(bad_r), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn writes_ri_and_ma_columns() {
        let s = Matrix2::new(c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0));
        let net = NetworkData::new(vec![9e8], vec![s], 50.0).unwrap();
        let ri = write(&net, DataFormat::RealImag, FrequencyUnit::GHz);
        let row = ri.lines().last().unwrap();
        let cols: Vec<&str> = row.split(' ').collect();
        assert_eq!(&cols[3..5], &["0.0", "1.0"], "{row}");
        let ma = write(&net, DataFormat::MagAngle, FrequencyUnit::GHz);
        let cols: Vec<&str> = ma.lines().last().unwrap().split(' ').collect();
        assert_eq!(&cols[1..3], &["1.0", "180.0"]);
        assert!(ma.contains("# GHZ S MA R 50.0"));
    }

    #[test]
    fn unit_spelling_does_not_change_frequencies() {
        let mhz = parse("# MHZ S RI\n900.125 0 0 1 0 1 0 0 0\n").unwrap();
        let ghz = parse("# GHZ S RI\n0.900125 0 0 1 0 1 0 0 0\n").unwrap();
        let rel = (mhz.freqs_hz[0] - ghz.freqs_hz[0]).abs() / mhz.freqs_hz[0];
        assert!(rel < 1e-12);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let wrapped = [3.0, -3.0, -2.5, 2.9, 2.0];
        let u = unwrap_phase(&wrapped);
        for w in u.windows(2) {
            assert!((w[1] - w[0]).abs() <= PI);
        }
        assert!((u[1] - (-3.0 + TAU)).abs() < 1e-15);
    }

    fn pure_delay(delay: f64, f0: f64, f1: f64, n: usize) -> NetworkData {
        let freqs: Vec<f64> = (0..n).map(|i| f0 + (f1 - f0) * i as f64 / (n - 1) as f64).collect();
        NetworkData::from_fn(freqs, 50.0, |f| {
            let t = Complex64::from_polar(1.0, -TAU * f * delay);
            Matrix2::new(c(0.0, 0.0), t, t, c(0.0, 0.0))
        })
        .unwrap()
    }

    #[test]
    fn pure_delay_group_delay() {
        let net = pure_delay(20e-9, 850e6, 950e6, 401);
        for f in [860e6, 900e6, 900.1e6, 940e6] {
            let d = group_delay(&net, 2, 1, f).unwrap();
            assert!((d - 20e-9).abs() < 20e-9 * 1e-3, "{d}");
        }
    }

    #[test]
    fn flat_phase_has_zero_delay() {
        let freqs = vec![1e9, 1.1e9, 1.2e9, 1.3e9];
        let net = NetworkData::from_fn(freqs, 50.0, |_| {
            Matrix2::new(c(0.0, 0.0), c(0.9, 0.0), c(0.9, 0.0), c(0.0, 0.0))
        })
        .unwrap();
        assert_eq!(group_delay(&net, 2, 1, 1.15e9).unwrap(), 0.0);
    }

    #[test]
    fn group_delay_errors() {
        let net = pure_delay(20e-9, 850e6, 950e6, 11);
        assert!(matches!(group_delay(&net, 2, 1, 850e6), Err(Error::Range(_))));
        assert!(matches!(group_delay(&net, 2, 1, 1e9), Err(Error::Range(_))));
        assert!(matches!(group_delay(&net, 3, 1, 900e6), Err(Error::Range(_))));
        let short = pure_delay(20e-9, 850e6, 950e6, 2);
        assert!(matches!(group_delay(&short, 2, 1, 900e6), Err(Error::Range(_))));
        assert!(matches!(group_delay(&net, 1, 1, 900e6), Err(Error::Degenerate(_))));
    }

    #[test]
    fn frequency_reversal_negates_delay() {
        let net = pure_delay(20e-9, 850e6, 950e6, 201);
        let (lo, hi) = (net.freqs_hz[0], net.freqs_hz[net.len() - 1]);
        let mut pairs: Vec<(f64, SMatrix2)> = net
            .freqs_hz
            .iter()
            .zip(&net.smatrix)
            .map(|(f, s)| (lo + hi - f, *s))
            .collect();
        pairs.reverse();
        let rev = NetworkData::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
            50.0,
        )
        .unwrap();
        let a = group_delay(&net, 2, 1, 880e6).unwrap();
        let b = group_delay(&rev, 2, 1, lo + hi - 880e6).unwrap();
        assert!((a + b).abs() < 1e-15, "{a} {b}");
    }

    #[test]
    fn passivity_and_reciprocity_flags() {
        let ok = Matrix2::new(c(0.1, 0.0), c(0.9, 0.0), c(0.9, 0.0), c(0.1, 0.0));
        let hot = Matrix2::new(c(0.5, 0.0), c(1.2, 0.0), c(0.3, 0.0), c(0.5, 0.0));
        let net = NetworkData::new(vec![1e9, 2e9], vec![ok, hot], 50.0).unwrap();
        assert_eq!(net.passivity_violations(1e-6), vec![1]);
        assert!(!net.is_reciprocal(1e-9));
    }

    #[test]
    fn network_data_validation() {
        let s = Matrix2::zeros();
        assert!(NetworkData::new(vec![1.0, 1.0], vec![s, s], 50.0).is_err());
        assert!(NetworkData::new(vec![1.0], vec![s, s], 50.0).is_err());
        assert!(NetworkData::new(vec![1.0], vec![s], 0.0).is_err());
        assert!(NetworkData::new(vec![-1.0], vec![s], 50.0).is_err());
    }
}
