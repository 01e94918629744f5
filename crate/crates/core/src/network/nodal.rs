//! Truncated conversion-matrix nodal formulation.
//!
//! Unknowns are node voltages at sidebands `|n| ≤ n_max`. A switch between
//! nodes `a` and `b` stamps the Toeplitz block `G_{n−m}`; scattering blocks
//! enter as per-sideband admittance matrices. The truncation of the switch
//! Toeplitz blocks makes this converge only slowly with `n_max`; [`super::solve`]
//! avoids it and is the production solver. This system is kept for
//! inspection and for LTI cross-checks.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::netlist::Block;
use super::solver::{one_norm, MAX_CONDITION};
use super::{switch_conductance_harmonics, HarmonicSMatrix, Topology};
use crate::error::{Error, Result};

/// Contraction applied to a block's S-matrix when `I + S` is singular.
const CONTRACTION: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone)]
pub struct NodalSystem {
    pub f_rf_hz: f64,
    pub mod_hz: f64,
    pub n_max: usize,
    pub n_nodes: usize,
    /// Square matrix of dimension `n_nodes·(2·n_max + 1)`.
    pub matrix: DMatrix<Complex64>,
    /// One column per port: a unit incident wave at that port, harmonic 0.
    pub sources: DMatrix<Complex64>,
    port_nodes: Vec<usize>,
    port_z0: Vec<f64>,
}

impl NodalSystem {
    pub fn harmonics(&self) -> usize {
        2 * self.n_max + 1
    }

    pub fn dimension(&self) -> usize {
        self.n_nodes * self.harmonics()
    }

    /// Row/column of `(node, n)`.
    pub fn index(&self, node: usize, n: i32) -> usize {
        node * self.harmonics() + (n + self.n_max as i32) as usize
    }

    /// Solves for all port excitations and converts node voltages to waves.
    pub fn solve(&self) -> Result<HarmonicSMatrix> {
        let condition = condition_estimate(&self.matrix);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Singular {
                condition,
                context: format!("nodal system at {} Hz", self.f_rf_hz),
            });
        }
        let x = self
            .matrix
            .clone()
            .lu()
            .solve(&self.sources)
            .ok_or_else(|| Error::Singular {
                condition: f64::INFINITY,
                context: format!("nodal system at {} Hz", self.f_rf_hz),
            })?;
        let n_ports = self.port_nodes.len();
        let nm = self.n_max as i32;
        let mut out = HarmonicSMatrix::zeros(self.f_rf_hz, self.mod_hz, self.n_max, n_ports);
        for j in 0..n_ports {
            for (i, &node) in self.port_nodes.iter().enumerate() {
                for n in -nm..=nm {
                    let mut s = x[(self.index(node, n), j)] / self.port_z0[i].sqrt();
                    if i == j && n == 0 {
                        s -= 1.0;
                    }
                    out.set0(i, n, j, s);
                }
            }
        }
        Ok(out)
    }
}

/// Builds the truncated nodal system of `top` for a tone at `f_rf`.
pub fn assemble_system(top: &Topology, f_rf: f64, n_max: usize) -> Result<NodalSystem> {
    let net = &top.netlist;
    let h = 2 * n_max + 1;
    let nm = n_max as i32;
    let dim = net.n_nodes * h;
    let idx = |node: usize, n: i32| node * h + (n + nm) as usize;
    let mut a = DMatrix::<Complex64>::zeros(dim, dim);

    for n in -nm..=nm {
        for &(node, z) in &net.ports {
            a[(idx(node, n), idx(node, n))] += 1.0 / z;
        }
        for &(node, r) in &net.resistors {
            a[(idx(node, n), idx(node, n))] += 1.0 / r;
        }
        let f = f_rf + n as f64 * top.mod_hz();
        for block in &net.blocks {
            let y = block_admittance(block, f)?;
            for (r, &nr) in block.nodes.iter().enumerate() {
                for (c, &nc) in block.nodes.iter().enumerate() {
                    a[(idx(nr, n), idx(nc, n))] += y[(r, c)];
                }
            }
        }
    }
    for (na, nb, sw) in &net.switches {
        let g = switch_conductance_harmonics(sw, 2 * n_max);
        for n in -nm..=nm {
            for m in -nm..=nm {
                let gnm = g[&(n - m)];
                if gnm == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a[(idx(*na, n), idx(*na, m))] += gnm;
                a[(idx(*nb, n), idx(*nb, m))] += gnm;
                a[(idx(*na, n), idx(*nb, m))] -= gnm;
                a[(idx(*nb, n), idx(*na, m))] -= gnm;
            }
        }
    }

    let mut sources = DMatrix::<Complex64>::zeros(dim, net.ports.len());
    for (j, &(node, z)) in net.ports.iter().enumerate() {
        sources[(idx(node, 0), j)] = Complex64::new(2.0 / z.sqrt(), 0.0);
    }
    Ok(NodalSystem {
        f_rf_hz: f_rf,
        mod_hz: top.mod_hz(),
        n_max,
        n_nodes: net.n_nodes,
        matrix: a,
        sources,
        port_nodes: net.ports.iter().map(|p| p.0).collect(),
        port_z0: net.ports.iter().map(|p| p.1).collect(),
    })
}

/// `Y = (1/z)·(I − S)·(I + S)⁻¹`, with `S` contracted slightly when `I + S`
/// is singular (ideal thru, lossless full reflection).
fn block_admittance(block: &Block, f_hz: f64) -> Result<DMatrix<Complex64>> {
    let s = block.response(f_hz)?;
    let n = s.nrows();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let convert = |s: &DMatrix<Complex64>| -> Option<DMatrix<Complex64>> {
        let sum = &eye + s;
        let sv = sum.clone().singular_values();
        if sv.min() <= 1e-12 * sv.max().max(1.0) {
            return None;
        }
        let inv = sum.try_inverse()?;
        Some((&eye - s) * inv / Complex64::from(block.z_ref))
    };
    convert(&s)
        .or_else(|| convert(&(&s * Complex64::from(CONTRACTION))))
        .ok_or_else(|| Error::Singular {
            condition: f64::INFINITY,
            context: format!("block admittance at {f_hz} Hz"),
        })
}

/// 1-norm condition estimate (Hager's method for `‖A⁻¹‖₁`).
fn condition_estimate(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let lu = a.clone().lu();
    let lu_h = a.adjoint().lu();
    let mut x = DMatrix::<Complex64>::from_element(n, 1, Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        est = y.iter().map(|v| v.norm()).sum::<f64>();
        let xi = y.map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) });
        let Some(z) = lu_h.solve(&xi) else {
            return f64::INFINITY;
        };
        let (j, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.norm()))
            .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best });
        let ztx = (z.adjoint() * &x)[(0, 0)].re;
        if zmax <= ztx {
            break;
        }
        x.fill(Complex64::new(0.0, 0.0));
        x[(j, 0)] = Complex64::new(1.0, 0.0);
    }
    one_norm(a) * est
}
