use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::netlist::{Block, BlockKind, Netlist};
use super::SwitchModel;
use crate::clock::ClockSpec;
use crate::error::{Error, Result};
use crate::filters::FilterModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopologyKind {
    /// One gated filter between two ports.
    SinglePath,
    /// Four ports, two filters, eight switches.
    Differential,
    /// Two differential networks in parallel, the second clocked 90° later.
    Quad,
}

impl TopologyKind {
    pub fn n_ports(self) -> usize {
        match self {
            TopologyKind::SinglePath => 2,
            _ => 4,
        }
    }
}

/// How the two differential halves of a quad network share each port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combining {
    /// Both halves hang directly on the port node (a plain tee).
    #[default]
    Tee,
    /// A matched, branch-isolated 3-port splitter (Wilkinson-like) feeds each
    /// half through its own 50 Ω reference.
    Ideal,
}

/// Everything needed to build one of the circulator topologies.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculatorParams {
    pub filter: FilterModel,
    pub mod_hz: f64,
    pub duty: f64,
    /// Added to every clock phase.
    pub phase_offset_rad: f64,
    /// Extra phase on the lower branch (differential) or on the second
    /// sub-network (quad).
    pub phase_error_rad: f64,
    pub ron_ohm: f64,
    pub roff_ohm: f64,
    /// Per-port reference impedances; `None` selects the topology default.
    pub port_z0: Option<Vec<f64>>,
    pub combining: Combining,
}

impl CirculatorParams {
    /// 12.5 MHz square clocks, 5 Ω / 1 MΩ switches.
    pub fn new(filter: FilterModel) -> Self {
        Self {
            filter,
            mod_hz: 12.5e6,
            duty: 0.5,
            phase_offset_rad: 0.0,
            phase_error_rad: 0.0,
            ron_ohm: 5.0,
            roff_ohm: 1e6,
            port_z0: None,
            combining: Combining::Tee,
        }
    }

    /// 900 MHz, 40 MHz wide, 20 ns, 0.9 dB brick-wall filters.
    pub fn canonical() -> Self {
        Self::new(FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.9).expect("valid filter"))
    }

    /// Lossless brick-wall filters and near-ideal (1 µΩ / 1 TΩ) switches.
    pub fn ideal() -> Self {
        Self {
            ron_ohm: 1e-6,
            roff_ohm: 1e12,
            ..Self::new(FilterModel::brick_wall(900e6, 40e6, 20e-9, 0.0).expect("valid filter"))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchPlacement {
    /// `SW<port><branch>` with an `a`/`b` suffix for the quad halves; the
    /// single path uses `SW_in`, `SW_in_load`, `SW_out`, `SW_out_load`.
    pub name: String,
    /// External port number (1-based), or `None` for an internal load.
    pub port: Option<usize>,
    pub filter: usize,
    /// 0 for the filter's left (port-1) side, 1 for the right side.
    pub side: usize,
    pub model: SwitchModel,
}

/// A fully wired circulator network. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    kind: TopologyKind,
    params: CirculatorParams,
    port_z0: Vec<f64>,
    switches: Vec<SwitchPlacement>,
    filter_count: usize,
    pub(crate) netlist: Netlist,
}

/// Reference impedance of the filters and the ideal combiner branches.
const BRANCH_Z0: f64 = 50.0;

/// `(port index, filter, side, clock phase, lower branch)` for one
/// differential network: ports 1 and 3 drive the left filter sides, ports 2
/// and 4 the right sides.
const DIFFERENTIAL_WIRING: [(usize, usize, usize, f64, bool); 8] = [
    (0, 0, 0, 0.0, false),
    (0, 1, 0, PI, true),
    (1, 0, 1, FRAC_PI_2, false),
    (1, 1, 1, 1.5 * PI, true),
    (2, 0, 0, PI, false),
    (2, 1, 0, 0.0, true),
    (3, 0, 1, 1.5 * PI, false),
    (3, 1, 1, FRAC_PI_2, true),
];

impl Topology {
    pub fn build(kind: TopologyKind, params: CirculatorParams) -> Result<Self> {
        if !(params.mod_hz > 0.0) || !params.mod_hz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "modulation frequency must be > 0, got {}",
                params.mod_hz
            )));
        }
        let default_z0 = match (kind, params.combining) {
            (TopologyKind::Quad, Combining::Tee) => 25.0,
            _ => 50.0,
        };
        let port_z0 = match &params.port_z0 {
            Some(z) => {
                if z.len() != kind.n_ports() {
                    return Err(Error::InvalidParameter(format!(
                        "{} port impedances given for a {}-port topology",
                        z.len(),
                        kind.n_ports()
                    )));
                }
                if let Some(bad) = z.iter().find(|z| !(**z > 0.0) || !z.is_finite()) {
                    return Err(Error::InvalidParameter(format!("port impedance {bad} is not > 0")));
                }
                z.clone()
            }
            None => vec![default_z0; kind.n_ports()],
        };

        let mut top = Topology {
            kind,
            params,
            port_z0,
            switches: Vec::new(),
            filter_count: 0,
            netlist: Netlist::new(0),
        };
        match kind {
            TopologyKind::SinglePath => top.wire_single()?,
            TopologyKind::Differential => {
                let ports = top.add_external_ports();
                top.wire_differential(ports, 0.0, "")?;
            }
            TopologyKind::Quad => {
                let ports = top.add_external_ports();
                let (a, b) = match top.params.combining {
                    Combining::Tee => (ports, ports),
                    Combining::Ideal => {
                        let a = top.add_nodes::<4>();
                        let b = top.add_nodes::<4>();
                        for i in 0..4 {
                            top.netlist.blocks.push(Block {
                                nodes: vec![ports[i], a[i], b[i]],
                                z_ref: BRANCH_Z0,
                                kind: BlockKind::Constant(ideal_splitter()),
                            });
                        }
                        (a, b)
                    }
                };
                top.wire_differential(a, 0.0, "a")?;
                let err = top.params.phase_error_rad;
                top.wire_differential(b, FRAC_PI_2 + err, "b")?;
            }
        }
        top.check_timing();
        Ok(top)
    }

    pub fn single_path(params: CirculatorParams) -> Result<Self> {
        Self::build(TopologyKind::SinglePath, params)
    }

    pub fn differential(params: CirculatorParams) -> Result<Self> {
        Self::build(TopologyKind::Differential, params)
    }

    pub fn quad(params: CirculatorParams) -> Result<Self> {
        Self::build(TopologyKind::Quad, params)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn params(&self) -> &CirculatorParams {
        &self.params
    }

    pub fn n_ports(&self) -> usize {
        self.kind.n_ports()
    }

    pub fn port_z0(&self) -> &[f64] {
        &self.port_z0
    }

    pub fn mod_hz(&self) -> f64 {
        self.params.mod_hz
    }

    pub fn filter(&self) -> &FilterModel {
        &self.params.filter
    }

    pub fn filter_count(&self) -> usize {
        self.filter_count
    }

    pub fn switches(&self) -> &[SwitchPlacement] {
        &self.switches
    }

    /// Same network with every clock advanced by `delta_rad`.
    pub fn with_phase_shift(&self, delta_rad: f64) -> Result<Self> {
        let mut p = self.params.clone();
        p.phase_offset_rad += delta_rad;
        Self::build(self.kind, p)
    }

    fn add_nodes<const N: usize>(&mut self) -> [usize; N] {
        let first = self.netlist.n_nodes;
        self.netlist.n_nodes += N;
        std::array::from_fn(|i| first + i)
    }

    fn add_external_ports(&mut self) -> [usize; 4] {
        let nodes = self.add_nodes::<4>();
        for (i, &n) in nodes.iter().enumerate() {
            self.netlist.ports.push((n, self.port_z0[i]));
        }
        nodes
    }

    fn switch(&self, phase_rad: f64) -> Result<SwitchModel> {
        let p = &self.params;
        let clock = ClockSpec::new(p.mod_hz, p.duty, phase_rad + p.phase_offset_rad)?;
        SwitchModel::new(p.ron_ohm, p.roff_ohm, clock)
    }

    fn add_filter(&mut self, left: usize, right: usize) -> usize {
        self.netlist.blocks.push(Block {
            nodes: vec![left, right],
            z_ref: self.params.filter.ref_ohm(),
            kind: BlockKind::Filter(self.params.filter.clone()),
        });
        self.filter_count += 1;
        self.filter_count - 1
    }

    fn add_switch(
        &mut self,
        name: String,
        port: Option<usize>,
        nodes: (usize, usize),
        filter: usize,
        side: usize,
        phase_rad: f64,
    ) -> Result<()> {
        let model = self.switch(phase_rad)?;
        self.netlist.switches.push((nodes.0, nodes.1, model));
        self.switches.push(SwitchPlacement {
            name,
            port,
            filter,
            side,
            model,
        });
        Ok(())
    }

    /// Port 1 feeds the filter while its clock is ON and a matched internal
    /// load takes over while it is OFF, so the filter always sees its
    /// reference impedance. The output side mirrors this a quarter period later.
    fn wire_single(&mut self) -> Result<()> {
        let [p1, p2, left, right, load_in, load_out] = self.add_nodes::<6>();
        self.netlist.ports.push((p1, self.port_z0[0]));
        self.netlist.ports.push((p2, self.port_z0[1]));
        self.netlist.resistors.push((load_in, self.port_z0[0]));
        self.netlist.resistors.push((load_out, self.port_z0[1]));
        let f = self.add_filter(left, right);
        self.add_switch("SW_in".into(), Some(1), (p1, left), f, 0, 0.0)?;
        self.add_switch("SW_in_load".into(), None, (load_in, left), f, 0, PI)?;
        self.add_switch("SW_out".into(), Some(2), (right, p2), f, 1, FRAC_PI_2)?;
        self.add_switch("SW_out_load".into(), None, (right, load_out), f, 1, 1.5 * PI)?;
        Ok(())
    }

    fn wire_differential(&mut self, ports: [usize; 4], offset_rad: f64, suffix: &str) -> Result<()> {
        let [ul, ur, ll, lr] = self.add_nodes::<4>();
        let upper = self.add_filter(ul, ur);
        let lower = self.add_filter(ll, lr);
        let filter_nodes = [[ul, ur], [ll, lr]];
        let filters = [upper, lower];
        let lower_err = match self.kind {
            TopologyKind::Differential => self.params.phase_error_rad,
            _ => 0.0,
        };
        for (port, branch, side, phase, is_lower) in DIFFERENTIAL_WIRING {
            let name = format!("SW{}{}{suffix}", port + 1, branch + 1);
            let extra = if is_lower { lower_err } else { 0.0 };
            self.add_switch(
                name,
                Some(port + 1),
                (ports[port], filter_nodes[branch][side]),
                filters[branch],
                side,
                phase + offset_rad + extra,
            )?;
        }
        Ok(())
    }

    /// The clocks should advance a quarter period per filter traversal.
    fn check_timing(&self) {
        let quarter = 0.25 / self.params.mod_hz;
        if let Some(delay) = self.params.filter.nominal_delay_s() {
            if (quarter - delay).abs() > 0.2 * quarter {
                warn!(
                    "T_m/4 = {:.3e} s differs from the filter group delay {:.3e} s by more than 20%",
                    quarter, delay
                );
            }
        }
    }
}

/// `S = (1/√2)·[[0,1,1],[1,0,0],[1,0,0]]`: all ports matched, branches
/// isolated from each other, power from the common port split equally.
fn ideal_splitter() -> DMatrix<Complex64> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    DMatrix::from_row_slice(3, 3, &[z, h, h, h, z, z, h, z, z])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differential_wiring_table() {
        let top = Topology::differential(CirculatorParams::canonical()).unwrap();
        assert_eq!(top.switches().len(), 8);
        assert_eq!(top.filter_count(), 2);
        let phase = |name: &str| {
            top.switches()
                .iter()
                .find(|s| s.name == name)
                .unwrap()
                .model
                .clock
                .phase_rad
        };
        assert_eq!(phase("SW11"), 0.0);
        assert_eq!(phase("SW12"), PI);
        assert_eq!(phase("SW21"), FRAC_PI_2);
        assert_eq!(phase("SW22"), 1.5 * PI);
        assert_eq!(phase("SW31"), PI);
        assert_eq!(phase("SW32"), 0.0);
        assert_eq!(phase("SW41"), 1.5 * PI);
        assert_eq!(phase("SW42"), FRAC_PI_2);
        assert_eq!(top.port_z0(), &[50.0; 4]);
    }

    #[test]
    fn quad_defaults_and_second_half_lag() {
        let top = Topology::quad(CirculatorParams::canonical()).unwrap();
        assert_eq!(top.switches().len(), 16);
        assert_eq!(top.filter_count(), 4);
        assert_eq!(top.port_z0(), &[25.0; 4]);
        let b = top.switches().iter().find(|s| s.name == "SW11b").unwrap();
        assert!((b.model.clock.phase_rad - FRAC_PI_2).abs() < 1e-15);
        let ideal = Topology::quad(CirculatorParams {
            combining: Combining::Ideal,
            ..CirculatorParams::canonical()
        })
        .unwrap();
        assert_eq!(ideal.port_z0(), &[50.0; 4]);
        assert_eq!(ideal.netlist.blocks.len(), 8);
    }

    #[test]
    fn phase_error_targets() {
        let err = 0.1;
        let p = CirculatorParams {
            phase_error_rad: err,
            ..CirculatorParams::canonical()
        };
        let d = Topology::differential(p.clone()).unwrap();
        let ph = |t: &Topology, n: &str| {
            t.switches().iter().find(|s| s.name == n).unwrap().model.clock.phase_rad
        };
        assert_eq!(ph(&d, "SW11"), 0.0);
        assert!((ph(&d, "SW32") - err).abs() < 1e-15);
        let q = Topology::quad(p).unwrap();
        assert_eq!(ph(&q, "SW32a"), 0.0);
        assert!((ph(&q, "SW11b") - FRAC_PI_2 - err).abs() < 1e-15);
    }

    #[test]
    fn splitter_is_passive_and_matched() {
        let s = ideal_splitter();
        let g = s.adjoint() * &s;
        assert!((g[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!((g[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_port_impedances() {
        let p = CirculatorParams {
            port_z0: Some(vec![50.0; 3]),
            ..CirculatorParams::canonical()
        };
        assert!(Topology::differential(p).is_err());
        let p = CirculatorParams {
            port_z0: Some(vec![50.0, -1.0]),
            ..CirculatorParams::canonical()
        };
        assert!(Topology::single_path(p).is_err());
    }

    #[test]
    fn single_path_layout() {
        let top = Topology::single_path(CirculatorParams::ideal()).unwrap();
        assert_eq!(top.n_ports(), 2);
        assert_eq!(top.netlist.resistors.len(), 2);
        assert_eq!(top.switches().iter().filter(|s| s.port.is_none()).count(), 2);
    }
}
