use nalgebra::DMatrix;
use num_complex::Complex64;

use super::SwitchModel;
use crate::error::Result;
use crate::filters::FilterModel;

/// Ground-referenced netlist. Node indices start at 0; ground is implicit.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Netlist {
    pub n_nodes: usize,
    /// External ports `(node, z0)`, in port order.
    pub ports: Vec<(usize, f64)>,
    /// Fixed resistors from a node to ground.
    pub resistors: Vec<(usize, f64)>,
    /// Switched resistors between two nodes.
    pub switches: Vec<(usize, usize, SwitchModel)>,
    pub blocks: Vec<Block>,
}

/// Ground-referenced N-port scattering element.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Block {
    pub nodes: Vec<usize>,
    pub z_ref: f64,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum BlockKind {
    Filter(FilterModel),
    Constant(DMatrix<Complex64>),
}

impl Block {
    pub fn n_ports(&self) -> usize {
        self.nodes.len()
    }

    pub fn response(&self, f_hz: f64) -> Result<DMatrix<Complex64>> {
        match &self.kind {
            BlockKind::Filter(m) => {
                let s = m.evaluate(f_hz)?;
                Ok(DMatrix::from_fn(2, 2, |r, c| s[(r, c)]))
            }
            BlockKind::Constant(s) => Ok(s.clone()),
        }
    }

    pub fn background(&self) -> DMatrix<Complex64> {
        match &self.kind {
            BlockKind::Filter(m) => {
                let s = m.background();
                DMatrix::from_fn(2, 2, |r, c| s[(r, c)])
            }
            BlockKind::Constant(s) => s.clone(),
        }
    }

    pub fn is_dynamic(&self) -> bool {
        matches!(self.kind, BlockKind::Filter(_))
    }
}

impl Netlist {
    pub fn new(n_nodes: usize) -> Self {
        Self {
            n_nodes,
            ports: Vec::new(),
            resistors: Vec::new(),
            switches: Vec::new(),
            blocks: Vec::new(),
        }
    }

    /// Position of each block's first port current in the unknown vector
    /// `[node voltages; block port currents]`.
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut off = self.n_nodes;
        self.blocks
            .iter()
            .map(|b| {
                let o = off;
                off += b.n_ports();
                o
            })
            .collect()
    }

    pub fn n_unknowns(&self) -> usize {
        self.n_nodes + self.blocks.iter().map(Block::n_ports).sum::<usize>()
    }

    /// Period fractions at which any switch changes state, sorted, with 0
    /// always included.
    pub fn switching_instants(&self) -> Vec<f64> {
        let mut edges = vec![0.0];
        for (_, _, sw) in &self.switches {
            if !sw.is_frozen() {
                edges.push(sw.clock.rise_fraction());
                edges.push(sw.clock.fall_fraction());
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        edges
    }
}
