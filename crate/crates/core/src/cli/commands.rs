//! Subcommand bodies. Each returns the text to emit.

use std::path::Path;

use crate::clock::ClockSpec;
use crate::error::{Error, Result};
use crate::filters::{Extrapolation, FilterModel};
use crate::metrics::{report, MetricsReport};
use crate::network::{solve_with, sweep_with, TopologyKind};
use crate::spectra::{closed_form_spectrum, Configuration, HarmonicSpectrum, PathConfig};
use crate::touchstone::{self, NetworkData};

use super::config::{parse_quantity, FilterSpec, Quantity, ScenarioConfig};
use super::format::{self, num, report_column, sparams_csv, spectrum_csv, REPORT_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    ClosedForm,
    #[default]
    Solver,
}

/// Fundamental S-parameters over `freqs`.
pub fn cmd_sparams(cfg: &ScenarioConfig, freqs: &[f64]) -> Result<String> {
    let top = cfg.topology()?;
    Ok(sparams_csv(&sweep_with(&top, freqs, &cfg.solve_options())?))
}

/// Output sidebands at `out_port` for a tone at `in_port`.
pub fn cmd_spectrum(
    cfg: &ScenarioConfig,
    tone_hz: f64,
    in_port: usize,
    out_port: usize,
    model: Model,
) -> Result<String> {
    let spec = match model {
        Model::Solver => {
            let top = cfg.topology()?;
            solve_with(&top, tone_hz, &cfg.solve_options())
                .map_err(|e| e.at_frequency(tone_hz))?
                .spectrum(out_port, in_port)?
        }
        Model::ClosedForm => closed_form(cfg, tone_hz, in_port, out_port)?,
    };
    Ok(spectrum_csv(&spec))
}

/// The ideal-switch gated-path model of the configured arrangement. Only the
/// forward transmission through a brick-wall filter has a closed form.
fn closed_form(cfg: &ScenarioConfig, tone_hz: f64, in_port: usize, out_port: usize) -> Result<HarmonicSpectrum> {
    let FilterSpec::BrickWall { bw_hz, delay_s, il_db, .. } = cfg.filter else {
        return Err(Error::config("filter.model", "the closed-form model needs a brickwall filter"));
    };
    if cfg.phase_error_deg != 0.0 {
        return Err(Error::config("clock.phase_error_deg", "not representable in the closed-form model"));
    }
    let n = cfg.topology.n_ports();
    if out_port != in_port % n + 1 {
        return Err(Error::config(
            "--out-port",
            format!("the closed-form model only covers S{}{in_port}", in_port % n + 1),
        ));
    }
    let configuration = match cfg.topology {
        TopologyKind::SinglePath => Configuration::Single,
        TopologyKind::Differential => Configuration::Differential,
        TopologyKind::Quad => Configuration::Quad,
    };
    let clock = ClockSpec::new(cfg.fm_hz, cfg.duty, cfg.phase_offset_deg.to_radians())?;
    let path = PathConfig::new(tone_hz, clock, delay_s, 0.5 * bw_hz, il_db)?;
    closed_form_spectrum(&path, configuration, cfg.n_max as i32)
}

pub fn cmd_metrics(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    let top = cfg.topology()?;
    report(&top, &cfg.sweep.frequencies(), &cfg.solve_options(), &cfg.report_config())
}

pub const SWEEP_PARAMS: [&str; 5] = ["phase_error_deg", "duty", "ron_ohm", "roff_ohm", "fm_hz"];

fn unknown_param(name: &str) -> Error {
    Error::UnknownParam {
        name: name.to_string(),
        valid: SWEEP_PARAMS.join(", "),
    }
}

/// Reads a comma-separated value list for `param`.
pub fn parse_sweep_values(param: &str, text: &str) -> Result<Vec<f64>> {
    let q = match param {
        "fm_hz" => Some(Quantity::Frequency),
        "ron_ohm" | "roff_ohm" => Some(Quantity::Resistance),
        p if SWEEP_PARAMS.contains(&p) => None,
        p => return Err(unknown_param(p)),
    };
    let values = text
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| {
            match q {
                Some(q) => parse_quantity(v, q),
                None => v.trim().parse().ok(),
            }
            .ok_or_else(|| Error::config("--values", format!("cannot read `{}`", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(Error::config("--values", "at least one value is required"));
    }
    Ok(values)
}

/// One metrics row per value of `param`. With `metric`, only that column is
/// emitted.
pub fn cmd_sweep_param(cfg: &ScenarioConfig, param: &str, values: &[f64], metric: Option<&str>) -> Result<String> {
    if !SWEEP_PARAMS.contains(&param) {
        return Err(unknown_param(param));
    }
    if let Some(m) = metric {
        if !REPORT_COLUMNS.contains(&m) {
            return Err(Error::UnknownParam {
                name: m.to_string(),
                valid: REPORT_COLUMNS.join(", "),
            });
        }
    }
    if values.is_empty() {
        return Err(Error::config("--values", "at least one value is required"));
    }
    let mut out = String::new();
    let header: Vec<&str> = match metric {
        Some(m) => vec![param, m],
        None => std::iter::once(param).chain(REPORT_COLUMNS).collect(),
    };
    out.push_str(&header.join(","));
    out.push('\n');
    for &v in values {
        let mut c = cfg.clone();
        match param {
            "phase_error_deg" => c.phase_error_deg = v,
            "duty" => c.duty = v,
            "ron_ohm" => c.ron_ohm = v,
            "roff_ohm" => c.roff_ohm = v,
            _ => c.fm_hz = v,
        }
        c.validate()?;
        let r = cmd_metrics(&c)?;
        let fields: Vec<String> = match metric {
            Some(m) => vec![num(v), report_column(&r, m).expect("metric validated above")],
            None => std::iter::once(num(v)).chain(format::report_fields(&r)).collect(),
        };
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Summary of a two-port Touchstone file over `band` (default: its 3 dB
/// passband).
pub fn cmd_touchstone_info(path: &Path, band: Option<(f64, f64)>) -> Result<String> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let net = touchstone::parse(&text)?;
    let (first, last) = (net.freqs_hz[0], net.freqs_hz[net.len() - 1]);
    let band = match band {
        Some(b) => b,
        None => FilterModel::tabulated(net.clone(), Extrapolation::Reflective)
            .map(|f| f.passband())
            .unwrap_or((first, last)),
    };
    let in_band: Vec<usize> = (0..net.len())
        .filter(|&i| net.freqs_hz[i] >= band.0 && net.freqs_hz[i] <= band.1)
        .collect();

    let db = |c: num_complex::Complex64| -20.0 * c.norm().log10();
    let s21 = net.param(2, 1)?;
    let s11 = net.param(1, 1)?;
    let extreme = |values: &mut dyn Iterator<Item = f64>| {
        values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (il_min, _) = extreme(&mut in_band.iter().map(|&i| db(s21[i])));
    let (_, rl_max) = extreme(&mut in_band.iter().map(|&i| db(s11[i])));
    let delays = group_delays(&net, &in_band)?;
    let (gd_min, gd_max) = extreme(&mut delays.iter().copied());

    let or_na = |v: f64, render: &dyn Fn(f64) -> String| if v.is_finite() { render(v) } else { "n/a".to_string() };
    let rows = [
        ("file", path.display().to_string()),
        ("points", net.len().to_string()),
        ("frequency range", format!("{:.6} - {:.6} MHz", first / 1e6, last / 1e6)),
        ("reference impedance", format!("{} ohm", num(net.ref_ohm))),
        ("band", format!("{:.6} - {:.6} MHz ({} points)", band.0 / 1e6, band.1 / 1e6, in_band.len())),
        ("min in-band IL (S21)", or_na(il_min, &|v| format!("{v:.3} dB"))),
        ("max in-band RL (S11)", or_na(rl_max, &|v| format!("{v:.3} dB"))),
        ("group delay min (S21)", or_na(gd_min, &|v| format!("{:.4} ns", v * 1e9))),
        ("group delay max (S21)", or_na(gd_max, &|v| format!("{:.4} ns", v * 1e9))),
    ];
    Ok(format::table(&rows))
}

/// Group delay of S21 at in-band grid points strictly inside the file's range.
fn group_delays(net: &NetworkData, in_band: &[usize]) -> Result<Vec<f64>> {
    if net.len() < 3 {
        return Ok(Vec::new());
    }
    in_band
        .iter()
        .filter(|&&i| i > 0 && i + 1 < net.len())
        .map(|&i| touchstone::group_delay(net, 2, 1, net.freqs_hz[i]))
        .collect()
}
