//! Deterministic CSV and table rendering.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::metrics::MetricsReport;
use crate::network::HarmonicSMatrix;
use crate::spectra::HarmonicSpectrum;

/// Rounds to 12 significant digits and prints the shortest representation
/// of the rounded value. Infinities render as `inf` / `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let r = if r == 0.0 { 0.0 } else { r };
    let a = r.abs();
    if r == 0.0 || (1e-6..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn db(c: Complex64) -> f64 {
    20.0 * c.norm().log10()
}

fn deg(c: Complex64) -> f64 {
    c.arg().to_degrees()
}

fn csv_line(out: &mut String, fields: impl IntoIterator<Item = String>) {
    let fields: Vec<String> = fields.into_iter().collect();
    out.push_str(&fields.join(","));
    out.push('\n');
}

/// `freq_hz`, then every `S{out}{in}_db`, then every `S{out}{in}_deg`, with
/// the output port varying fastest.
pub fn sparams_csv(rows: &[HarmonicSMatrix]) -> String {
    let n = rows.first().map_or(0, |r| r.n_ports());
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|j| (1..=n).map(move |i| (i, j))).collect();
    let mut out = String::new();
    csv_line(
        &mut out,
        std::iter::once("freq_hz".to_string())
            .chain(pairs.iter().map(|(i, j)| format!("S{i}{j}_db")))
            .chain(pairs.iter().map(|(i, j)| format!("S{i}{j}_deg"))),
    );
    for r in rows {
        csv_line(
            &mut out,
            std::iter::once(num(r.f_rf_hz))
                .chain(pairs.iter().map(|&(i, j)| num(db(r.s(i, j)))))
                .chain(pairs.iter().map(|&(i, j)| num(deg(r.s(i, j))))),
        );
    }
    out
}

pub fn spectrum_csv(spec: &HarmonicSpectrum) -> String {
    let c0 = spec.coeff(0).norm();
    let mut out = String::new();
    csv_line(
        &mut out,
        ["n", "freq_hz", "amplitude_db", "amplitude_dbc", "phase_deg"].map(String::from),
    );
    for (n, c) in spec.iter() {
        csv_line(
            &mut out,
            [
                n.to_string(),
                num(spec.frequency_of(n)),
                num(db(c)),
                num(20.0 * (c.norm() / c0).log10()),
                num(deg(c)),
            ],
        );
    }
    out
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "center_hz",
    "il_db",
    "ix_db",
    "rl_db_min",
    "ix_bw_hz",
    "ix_bw_frac",
    "imp_worst_n",
    "imp_worst_dbc",
    "delay_dispersion_s",
];

pub fn report_fields(r: &MetricsReport) -> [String; 9] {
    [
        num(r.center_hz),
        num(r.il_db),
        num(r.ix_db),
        num(r.rl_db_min),
        num(r.ix_bw_hz),
        num(r.ix_bw_frac),
        r.imp_worst_n.to_string(),
        num(r.imp_worst_dbc),
        num(r.delay_dispersion_s),
    ]
}

pub fn report_csv(r: &MetricsReport) -> String {
    let mut out = String::new();
    csv_line(&mut out, REPORT_COLUMNS.map(String::from));
    csv_line(&mut out, report_fields(r));
    out
}

/// Selects one report column by name.
pub fn report_column(r: &MetricsReport, name: &str) -> Option<String> {
    let i = REPORT_COLUMNS.iter().position(|c| *c == name)?;
    Some(report_fields(r)[i].clone())
}

pub fn report_table(r: &MetricsReport) -> String {
    let rows = [
        ("center", format!("{:.6} MHz", r.center_hz / 1e6)),
        ("insertion loss (S21)", format!("{:.3} dB", r.il_db)),
        ("isolation (S31)", format!("{:.2} dB", r.ix_db)),
        ("worst in-band return loss", format!("{:.2} dB", r.rl_db_min)),
        ("20 dB isolation bandwidth", format!("{:.3} MHz ({:.2}%)", r.ix_bw_hz / 1e6, 100.0 * r.ix_bw_frac)),
        ("worst IMP", format!("{:.2} dBc at n = {}", r.imp_worst_dbc, r.imp_worst_n)),
        ("group delay spread", format!("{:.3} ns", r.delay_dispersion_s * 1e9)),
    ];
    table(&rows)
}

pub fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        writeln!(out, "{k:<width$}  {v}").expect("write to String");
    }
    out
}
