//! Scenario configuration: a flat INI-style file.
//!
//! ```text
//! # comment (also `;`)
//! [topology]
//! kind = differential        # single | differential | quad
//! combining = tee            # tee | ideal (quad only)
//!
//! [filter]
//! model = brickwall          # brickwall | parametric | touchstone
//! center = 900MHz
//! bw = 40MHz
//! delay = 20ns               # brickwall
//! il_db = 0.9
//! oob_phase_deg = 0          # brickwall
//! edge = 10MHz               # parametric skirt width
//! delay_min = 15ns           # parametric
//! delay_max = 23ns           # parametric
//! rl_db = inf                # parametric
//! path = filter.s2p          # touchstone, relative to the config file
//! extrapolation = reflective # touchstone: reflective | strict
//!
//! [clock]
//! fm = 12.5MHz
//! duty = 0.5
//! phase_offset_deg = 0
//! phase_error_deg = 0
//!
//! [switch]
//! ron = 5ohm
//! roff = 1Mohm
//!
//! [ports]
//! z0 = 50                    # one value for all ports, or a comma list
//!
//! [solver]
//! n_max = 16
//! strict = false
//! tol = 1e-4
//!
//! [sweep]
//! start = 850MHz
//! stop = 950MHz
//! points = 201
//! # or: list = 880MHz, 900MHz, 920MHz
//!
//! [metrics]
//! ix_threshold_db = 20
//! imp_n_max = 3
//! band_start = 880MHz        # defaults to the filter passband
//! band_stop = 920MHz
//! ```
//!
//! Quantities accept an SI prefix and unit (`900MHz`, `20ns`, `1Mohm`,
//! `1e6`). Prefixes are case-sensitive (`m` is milli, `M` mega); the unit
//! itself is not (`GHZ` works). Unknown sections or keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::filters::{Extrapolation, FilterModel};
use crate::metrics::ReportConfig;
use crate::network::{CirculatorParams, Combining, SolveOptions, Topology, TopologyKind};
use crate::touchstone;

#[derive(Debug, Clone, PartialEq)]
pub enum FilterSpec {
    BrickWall {
        center_hz: f64,
        bw_hz: f64,
        delay_s: f64,
        il_db: f64,
        oob_phase_deg: f64,
    },
    Parametric {
        center_hz: f64,
        bw_hz: f64,
        edge_hz: f64,
        delay_min_s: f64,
        delay_max_s: f64,
        il_db: f64,
        rl_db: f64,
    },
    Touchstone {
        path: PathBuf,
        extrapolation: Extrapolation,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepSpec {
    Range { start_hz: f64, stop_hz: f64, points: usize },
    List(Vec<f64>),
}

impl SweepSpec {
    pub fn frequencies(&self) -> Vec<f64> {
        match self {
            SweepSpec::List(v) => v.clone(),
            SweepSpec::Range { start_hz, points: 1, .. } => vec![*start_hz],
            SweepSpec::Range { start_hz, stop_hz, points } => (0..*points)
                .map(|k| start_hz + (stop_hz - start_hz) * k as f64 / (*points - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub topology: TopologyKind,
    pub combining: Combining,
    pub filter: FilterSpec,
    pub fm_hz: f64,
    pub duty: f64,
    pub phase_offset_deg: f64,
    pub phase_error_deg: f64,
    pub ron_ohm: f64,
    pub roff_ohm: f64,
    pub port_z0: Option<Vec<f64>>,
    pub n_max: usize,
    pub strict: bool,
    pub tol: f64,
    pub sweep: SweepSpec,
    pub ix_threshold_db: f64,
    pub imp_n_max: i32,
    pub band: Option<(f64, f64)>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            topology: TopologyKind::Differential,
            combining: Combining::Tee,
            filter: FilterSpec::BrickWall {
                center_hz: 900e6,
                bw_hz: 40e6,
                delay_s: 20e-9,
                il_db: 0.9,
                oob_phase_deg: 0.0,
            },
            fm_hz: 12.5e6,
            duty: 0.5,
            phase_offset_deg: 0.0,
            phase_error_deg: 0.0,
            ron_ohm: 5.0,
            roff_ohm: 1e6,
            port_z0: None,
            n_max: 16,
            strict: false,
            tol: 1e-4,
            sweep: SweepSpec::Range {
                start_hz: 850e6,
                stop_hz: 950e6,
                points: 201,
            },
            ix_threshold_db: 20.0,
            imp_n_max: 3,
            band: None,
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("topology", &["kind", "combining"]),
    (
        "filter",
        &[
            "model", "center", "bw", "delay", "il_db", "oob_phase_deg", "edge", "delay_min", "delay_max", "rl_db",
            "path", "extrapolation",
        ],
    ),
    ("clock", &["fm", "duty", "phase_offset_deg", "phase_error_deg"]),
    ("switch", &["ron", "roff"]),
    ("ports", &["z0"]),
    ("solver", &["n_max", "strict", "tol"]),
    ("sweep", &["start", "stop", "points", "list"]),
    ("metrics", &["ix_threshold_db", "imp_n_max", "band_start", "band_stop"]),
];

/// Raw `section.key → value` entries.
fn parse_ini(text: &str) -> Result<BTreeMap<String, String>> {
    let mut section: Option<String> = None;
    let mut entries = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(format!("line {line_no}"), "unterminated section header"))?
                .trim()
                .to_ascii_lowercase();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                return Err(Error::config(format!("[{name}]"), "unknown section"));
            }
            section = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {line_no}"), "expected `key = value`"))?;
        let key = key.trim().to_ascii_lowercase();
        let sec = section
            .as_deref()
            .ok_or_else(|| Error::config(&key, format!("line {line_no}: key outside any section")))?;
        let full = format!("{sec}.{key}");
        let known = KEYS.iter().find(|(s, _)| *s == sec).is_some_and(|(_, ks)| ks.contains(&key.as_str()));
        if !known {
            return Err(Error::config(full, "unknown key"));
        }
        if entries.insert(full.clone(), value.trim().to_string()).is_some() {
            return Err(Error::config(full, format!("line {line_no}: duplicate key")));
        }
    }
    Ok(entries)
}

/// What a quantity measures, which fixes its accepted unit suffixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Frequency,
    Time,
    Resistance,
}

impl Quantity {
    fn units(self) -> &'static [&'static str] {
        match self {
            Quantity::Frequency => &["hz"],
            Quantity::Time => &["s"],
            Quantity::Resistance => &["ohm", "ohms", "Ω"],
        }
    }
}

/// Parses `900MHz`, `12.5 MHz`, `20ns`, `1e6`, `1Mohm` and the like.
pub fn parse_quantity(text: &str, q: Quantity) -> Option<f64> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            let exponent = matches!(c, 'e' | 'E') && text[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+');
            c.is_alphabetic() && !exponent
        })
        .map_or(text.len(), |(i, _)| i);
    let (number, suffix) = text.split_at(split);
    let value: f64 = number.trim().parse().ok()?;
    let suffix = suffix.trim();
    if suffix.is_empty() {
        return Some(value);
    }
    let lower = suffix.to_lowercase();
    let unit = q.units().iter().find(|u| lower.ends_with(&u.to_lowercase()))?;
    let prefix = &suffix[..suffix.len() - unit.len()];
    let scale = match prefix {
        "" => 1.0,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" | "µ" => 1e-6,
        "m" => 1e-3,
        "k" | "K" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        "T" => 1e12,
        _ => return None,
    };
    Some(value * scale)
}

struct Reader {
    entries: BTreeMap<String, String>,
}

impl Reader {
    fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::config(key, format!("expected a number, got `{v}`")))
            })
            .transpose()
    }

    fn quantity(&self, key: &str, q: Quantity) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| parse_quantity(v, q).ok_or_else(|| Error::config(key, format!("cannot read `{v}` as a {q:?}"))))
            .transpose()
    }

    fn integer(&self, key: &str) -> Result<Option<i64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<i64>()
                    .map_err(|_| Error::config(key, format!("expected an integer, got `{v}`")))
            })
            .transpose()
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        self.raw(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
            })
            .transpose()
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                options
                    .iter()
                    .find(|(name, _)| name.eq_ignore_ascii_case(v))
                    .map(|(_, t)| *t)
                    .ok_or_else(|| {
                        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                        Error::config(key, format!("`{v}` is not one of {}", names.join(", ")))
                    })
            })
            .transpose()
    }

    fn list(&self, key: &str, q: Quantity) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        parse_quantity(item, q)
                            .ok_or_else(|| Error::config(key, format!("cannot read `{}` as a {q:?}", item.trim())))
                    })
                    .collect()
            })
            .transpose()
    }
}

fn require(ok: bool, key: &str, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(key, message))
    }
}

impl ScenarioConfig {
    /// Parses and validates `text`. Relative touchstone paths resolve
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let r = Reader { entries: parse_ini(text)? };
        let mut c = Self::default();

        if let Some(kind) = r.choice(
            "topology.kind",
            &[
                ("single", TopologyKind::SinglePath),
                ("differential", TopologyKind::Differential),
                ("quad", TopologyKind::Quad),
            ],
        )? {
            c.topology = kind;
        }
        if let Some(comb) = r.choice("topology.combining", &[("tee", Combining::Tee), ("ideal", Combining::Ideal)])? {
            c.combining = comb;
        }

        let model = r
            .choice("filter.model", &[("brickwall", 0), ("parametric", 1), ("touchstone", 2)])?
            .unwrap_or(0);
        let center = r.quantity("filter.center", Quantity::Frequency)?.unwrap_or(900e6);
        let bw = r.quantity("filter.bw", Quantity::Frequency)?.unwrap_or(40e6);
        let il = r.number("filter.il_db")?.unwrap_or(0.9);
        let unused = |keys: &[&str]| -> Result<()> {
            match keys.iter().find(|k| r.raw(&format!("filter.{k}")).is_some()) {
                Some(k) => Err(Error::config(format!("filter.{k}"), "not used by this filter model")),
                None => Ok(()),
            }
        };
        c.filter = match model {
            0 => {
                unused(&["edge", "delay_min", "delay_max", "rl_db", "path", "extrapolation"])?;
                FilterSpec::BrickWall {
                    center_hz: center,
                    bw_hz: bw,
                    delay_s: r.quantity("filter.delay", Quantity::Time)?.unwrap_or(20e-9),
                    il_db: il,
                    oob_phase_deg: r.number("filter.oob_phase_deg")?.unwrap_or(0.0),
                }
            }
            1 => {
                unused(&["delay", "oob_phase_deg", "path", "extrapolation"])?;
                FilterSpec::Parametric {
                    center_hz: center,
                    bw_hz: bw,
                    edge_hz: r.quantity("filter.edge", Quantity::Frequency)?.unwrap_or(10e6),
                    delay_min_s: r.quantity("filter.delay_min", Quantity::Time)?.unwrap_or(15e-9),
                    delay_max_s: r.quantity("filter.delay_max", Quantity::Time)?.unwrap_or(23e-9),
                    il_db: il,
                    rl_db: r.number("filter.rl_db")?.unwrap_or(f64::INFINITY),
                }
            }
            _ => {
                unused(&["center", "bw", "delay", "il_db", "oob_phase_deg", "edge", "delay_min", "delay_max", "rl_db"])?;
                let path = r
                    .raw("filter.path")
                    .ok_or_else(|| Error::config("filter.path", "required for the touchstone model"))?;
                FilterSpec::Touchstone {
                    path: base_dir.join(path),
                    extrapolation: r
                        .choice(
                            "filter.extrapolation",
                            &[("reflective", Extrapolation::Reflective), ("strict", Extrapolation::Strict)],
                        )?
                        .unwrap_or_default(),
                }
            }
        };

        if let Some(v) = r.quantity("clock.fm", Quantity::Frequency)? {
            c.fm_hz = v;
        }
        if let Some(v) = r.number("clock.duty")? {
            c.duty = v;
        }
        if let Some(v) = r.number("clock.phase_offset_deg")? {
            c.phase_offset_deg = v;
        }
        if let Some(v) = r.number("clock.phase_error_deg")? {
            c.phase_error_deg = v;
        }
        if let Some(v) = r.quantity("switch.ron", Quantity::Resistance)? {
            c.ron_ohm = v;
        }
        if let Some(v) = r.quantity("switch.roff", Quantity::Resistance)? {
            c.roff_ohm = v;
        }
        if let Some(z) = r.list("ports.z0", Quantity::Resistance)? {
            c.port_z0 = Some(if z.len() == 1 { vec![z[0]; c.topology.n_ports()] } else { z });
        }
        if let Some(v) = r.integer("solver.n_max")? {
            require(v >= 1, "solver.n_max", "must be >= 1")?;
            c.n_max = v as usize;
        }
        if let Some(v) = r.boolean("solver.strict")? {
            c.strict = v;
        }
        if let Some(v) = r.number("solver.tol")? {
            c.tol = v;
        }

        let list = r.list("sweep.list", Quantity::Frequency)?;
        let range_keys = ["sweep.start", "sweep.stop", "sweep.points"];
        if let Some(list) = list {
            if let Some(k) = range_keys.iter().find(|k| r.raw(k).is_some()) {
                return Err(Error::config(*k, "cannot be combined with sweep.list"));
            }
            c.sweep = SweepSpec::List(list);
        } else if let SweepSpec::Range { start_hz, stop_hz, points } = &mut c.sweep {
            if let Some(v) = r.quantity("sweep.start", Quantity::Frequency)? {
                *start_hz = v;
            }
            if let Some(v) = r.quantity("sweep.stop", Quantity::Frequency)? {
                *stop_hz = v;
            }
            if let Some(v) = r.integer("sweep.points")? {
                require(v >= 1, "sweep.points", "must be >= 1")?;
                *points = v as usize;
            }
        }

        if let Some(v) = r.number("metrics.ix_threshold_db")? {
            c.ix_threshold_db = v;
        }
        if let Some(v) = r.integer("metrics.imp_n_max")? {
            require(v >= 1, "metrics.imp_n_max", "must be >= 1")?;
            c.imp_n_max = v as i32;
        }
        let band = (
            r.quantity("metrics.band_start", Quantity::Frequency)?,
            r.quantity("metrics.band_stop", Quantity::Frequency)?,
        );
        c.band = match band {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            (Some(_), None) => return Err(Error::config("metrics.band_stop", "required with metrics.band_start")),
            (None, Some(_)) => return Err(Error::config("metrics.band_start", "required with metrics.band_stop")),
        };

        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Checks every field; errors name the config key.
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        match &self.filter {
            FilterSpec::BrickWall { center_hz, bw_hz, delay_s, il_db, .. } => {
                require(positive(*center_hz), "filter.center", "must be > 0")?;
                require(positive(*bw_hz) && *bw_hz < 2.0 * center_hz, "filter.bw", "must be > 0 and below twice the center")?;
                require(*delay_s >= 0.0 && delay_s.is_finite(), "filter.delay", "must be >= 0")?;
                require(*il_db >= 0.0 && il_db.is_finite(), "filter.il_db", "must be >= 0")?;
            }
            FilterSpec::Parametric { center_hz, bw_hz, edge_hz, delay_min_s, delay_max_s, il_db, rl_db } => {
                require(positive(*center_hz), "filter.center", "must be > 0")?;
                require(positive(*bw_hz) && *bw_hz < 2.0 * center_hz, "filter.bw", "must be > 0 and below twice the center")?;
                require(*edge_hz >= 0.0 && edge_hz.is_finite(), "filter.edge", "must be >= 0")?;
                require(*delay_min_s >= 0.0, "filter.delay_min", "must be >= 0")?;
                require(delay_max_s >= delay_min_s && delay_max_s.is_finite(), "filter.delay_max", "must be >= delay_min")?;
                require(*il_db >= 0.0 && il_db.is_finite(), "filter.il_db", "must be >= 0")?;
                require(*rl_db > 0.0, "filter.rl_db", "must be > 0")?;
            }
            FilterSpec::Touchstone { .. } => {}
        }
        require(positive(self.fm_hz), "clock.fm", "must be > 0")?;
        require(self.duty > 0.0 && self.duty < 1.0, "clock.duty", "must lie in (0, 1)")?;
        require(self.phase_offset_deg.is_finite(), "clock.phase_offset_deg", "must be finite")?;
        require(self.phase_error_deg.is_finite(), "clock.phase_error_deg", "must be finite")?;
        require(positive(self.ron_ohm), "switch.ron", "must be > 0")?;
        require(self.roff_ohm >= self.ron_ohm && self.roff_ohm.is_finite(), "switch.roff", "must be finite and >= ron")?;
        if let Some(z) = &self.port_z0 {
            require(
                z.len() == self.topology.n_ports(),
                "ports.z0",
                &format!("expected 1 or {} values", self.topology.n_ports()),
            )?;
            require(z.iter().all(|&v| positive(v)), "ports.z0", "impedances must be > 0")?;
        }
        require(self.tol > 0.0, "solver.tol", "must be > 0")?;
        match &self.sweep {
            SweepSpec::Range { start_hz, stop_hz, points } => {
                require(positive(*start_hz), "sweep.start", "must be > 0")?;
                require(stop_hz >= start_hz && stop_hz.is_finite(), "sweep.stop", "must be >= sweep.start")?;
                require(*points >= 1, "sweep.points", "must be >= 1")?;
                require(*points == 1 || stop_hz > start_hz, "sweep.stop", "must exceed sweep.start for several points")?;
            }
            SweepSpec::List(v) => {
                require(!v.is_empty(), "sweep.list", "must not be empty")?;
                require(v.iter().all(|&f| positive(f)), "sweep.list", "frequencies must be > 0")?;
                require(v.windows(2).all(|w| w[1] > w[0]), "sweep.list", "must be strictly increasing")?;
            }
        }
        if let Some((a, b)) = self.band {
            require(positive(a), "metrics.band_start", "must be > 0")?;
            require(b > a, "metrics.band_stop", "must exceed metrics.band_start")?;
        }
        Ok(())
    }

    pub fn filter_model(&self) -> Result<FilterModel> {
        let key = "filter";
        match &self.filter {
            FilterSpec::BrickWall { center_hz, bw_hz, delay_s, il_db, oob_phase_deg } => {
                FilterModel::brick_wall_with_phase(*center_hz, *bw_hz, *delay_s, *il_db, oob_phase_deg.to_radians())
            }
            FilterSpec::Parametric { center_hz, bw_hz, edge_hz, delay_min_s, delay_max_s, il_db, rl_db } => {
                FilterModel::parametric_delay_span(*center_hz, *bw_hz, *edge_hz, *delay_min_s, *delay_max_s, *il_db, *rl_db)
            }
            FilterSpec::Touchstone { path, extrapolation } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                FilterModel::tabulated(touchstone::parse(&text)?, *extrapolation)
            }
        }
        .map_err(|e| match e {
            Error::InvalidParameter(m) => Error::config(key, m),
            e => e,
        })
    }

    pub fn circulator_params(&self) -> Result<CirculatorParams> {
        Ok(CirculatorParams {
            filter: self.filter_model()?,
            mod_hz: self.fm_hz,
            duty: self.duty,
            phase_offset_rad: self.phase_offset_deg.to_radians(),
            phase_error_rad: self.phase_error_deg.to_radians(),
            ron_ohm: self.ron_ohm,
            roff_ohm: self.roff_ohm,
            port_z0: self.port_z0.clone(),
            combining: self.combining,
        })
    }

    pub fn topology(&self) -> Result<Topology> {
        Topology::build(self.topology, self.circulator_params()?)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            n_max: self.n_max,
            strict: self.strict,
            tol: self.tol,
        }
    }

    pub fn report_config(&self) -> ReportConfig {
        ReportConfig {
            center_hz: None,
            band: self.band,
            ix_threshold_db: self.ix_threshold_db,
            imp_n_max: self.imp_n_max,
        }
    }
}
