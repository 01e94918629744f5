//! Exact harmonic solution of the switched network.
//!
//! At every instant the network is memoryless apart from the filters, so the
//! unknowns `x = [node voltages; block port currents]` obey `M(t)·x = e + E·r`,
//! where `M(t)` is piecewise constant between switching instants and `r` is
//! the part of the block response that differs from its constant
//! out-of-band value. With `K(n)` the Fourier coefficients of `M(t)⁻¹`,
//!
//! ```text
//! X(n) = Σ_k K(n − k)·(e·δ_k0 + E·r_k),   r_m = ΔS(f + m·f_m)·C·X(m)
//! ```
//!
//! and since `ΔS` vanishes outside a finite set of sidebands the problem
//! reduces to a small dense system in the `r_m`. There is no truncation of
//! the switch conversion matrices; `n_max` only bounds which sidebands of the
//! filters are retained and which output harmonics are reported.

use std::collections::BTreeMap;

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::netlist::Netlist;
use super::{HarmonicSMatrix, Topology};
use crate::clock::window_coefficient;
use crate::error::{Error, Result};
use crate::spectra::HarmonicSpectrum;

/// Condition numbers above this are reported as singular.
pub(crate) const MAX_CONDITION: f64 = 1e15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub n_max: usize,
    /// Re-solve at `2·n_max` and fail if any fundamental |S| moves by more than `tol`.
    pub strict: bool,
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            n_max: 16,
            strict: false,
            tol: 1e-4,
        }
    }
}

impl SolveOptions {
    pub fn with_n_max(n_max: usize) -> Self {
        Self {
            n_max,
            ..Self::default()
        }
    }
}

pub(crate) fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn inverse_checked(m: DMatrix<Complex64>, context: &str) -> Result<DMatrix<Complex64>> {
    let norm = one_norm(&m);
    let inv = m.try_inverse().ok_or_else(|| Error::Singular {
        condition: f64::INFINITY,
        context: context.into(),
    })?;
    let condition = norm * one_norm(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular {
            condition,
            context: context.into(),
        });
    }
    Ok(inv)
}

/// Frequency-independent part of the solution: the switching-state inverses
/// folded into their Fourier coefficients `K(n)`.
struct Kernel<'a> {
    net: &'a Netlist,
    mod_hz: f64,
    port_z0: Vec<f64>,
    offsets: Vec<usize>,
    k: BTreeMap<i32, DMatrix<Complex64>>,
}

impl<'a> Kernel<'a> {
    fn new(top: &'a Topology, k_max: usize) -> Result<Self> {
        let net = &top.netlist;
        let nx = net.n_unknowns();
        let offsets = net.block_offsets();
        let mut m0 = DMatrix::<Complex64>::zeros(nx, nx);
        for &(node, z) in &net.ports {
            m0[(node, node)] += 1.0 / z;
        }
        for &(node, r) in &net.resistors {
            m0[(node, node)] += 1.0 / r;
        }
        // Hybrid block rows: (I − S_bg)·V − z·(I + S_bg)·I = r.
        for (block, &off) in net.blocks.iter().zip(&offsets) {
            let bg = block.background();
            for (row, &node_r) in block.nodes.iter().enumerate() {
                m0[(node_r, off + row)] += 1.0;
                for (col, &node_c) in block.nodes.iter().enumerate() {
                    let eye = if row == col { 1.0 } else { 0.0 };
                    m0[(off + row, node_c)] += eye - bg[(row, col)];
                    m0[(off + row, off + col)] -= (bg[(row, col)] + eye) * block.z_ref;
                }
            }
        }

        let mut edges = net.switching_instants();
        edges.push(1.0);
        let mut states = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let mut m = m0.clone();
            for (na, nb, sw) in &net.switches {
                let g = if sw.clock.is_on_fraction(mid) { sw.g_on() } else { sw.g_off() };
                m[(*na, *na)] += g;
                m[(*nb, *nb)] += g;
                m[(*na, *nb)] -= g;
                m[(*nb, *na)] -= g;
            }
            let inv = inverse_checked(m, &format!("switching state on [{a:.6}, {b:.6}) of the period"))?;
            states.push((a, b, inv));
        }
        debug!("{} switching states, {} unknowns", states.len(), nx);

        let k_max = k_max as i32;
        let k = (-k_max..=k_max)
            .map(|n| {
                let mut acc = DMatrix::<Complex64>::zeros(nx, nx);
                for (a, b, inv) in &states {
                    acc += inv * window_coefficient(*a, *b, n);
                }
                (n, acc)
            })
            .collect();
        Ok(Self {
            net,
            mod_hz: top.mod_hz(),
            port_z0: top.port_z0().to_vec(),
            offsets,
            k,
        })
    }

    fn k(&self, n: i32) -> &DMatrix<Complex64> {
        &self.k[&n]
    }

    fn solve(&self, f_rf: f64, n_max: usize) -> Result<HarmonicSMatrix> {
        if !(f_rf > 0.0) || !f_rf.is_finite() {
            return Err(Error::Range(format!("sweep frequency {f_rf} Hz is not > 0")));
        }
        let nm = n_max as i32;
        let n_ports = self.net.ports.len();

        // Sidebands at which some filter departs from its background response.
        struct Active {
            m: i32,
            block: usize,
            start: usize,
            ds: DMatrix<Complex64>,
        }
        let mut active = Vec::new();
        let mut len = 0;
        for m in -nm..=nm {
            let f = f_rf + m as f64 * self.mod_hz;
            for (bi, block) in self.net.blocks.iter().enumerate() {
                if !block.is_dynamic() {
                    continue;
                }
                if f <= 0.0 {
                    return Err(Error::Range(format!(
                        "sideband {m} lies at {f} Hz; reduce n_max below {}",
                        (f_rf / self.mod_hz).ceil()
                    )));
                }
                let ds = block.response(f)? - block.background();
                if ds.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
                    let np = block.n_ports();
                    active.push(Active {
                        m,
                        block: bi,
                        start: len,
                        ds,
                    });
                    len += np;
                }
            }
        }

        // (C·K(n)·E) restricted to blocks p (rows) and q (columns).
        let cke = |n: i32, p: usize, q: usize| -> DMatrix<Complex64> {
            let k = self.k(n);
            let (bp, bq) = (&self.net.blocks[p], &self.net.blocks[q]);
            let (op, oq) = (self.offsets[p], self.offsets[q]);
            DMatrix::from_fn(bp.n_ports(), bq.n_ports(), |r, c| {
                k[(bp.nodes[r], oq + c)] + k[(op + r, oq + c)] * bp.z_ref
            })
        };

        let sources: Vec<(usize, f64)> = self
            .net
            .ports
            .iter()
            .zip(&self.port_z0)
            .map(|(&(node, _), &z)| (node, 2.0 / z.sqrt()))
            .collect();

        let mut a = DMatrix::<Complex64>::identity(len, len);
        let mut rhs = DMatrix::<Complex64>::zeros(len, n_ports);
        for p in &active {
            for q in &active {
                let block = &p.ds * cke(p.m - q.m, p.block, q.block);
                let mut view = a.view_mut((p.start, q.start), (block.nrows(), block.ncols()));
                view -= block;
            }
            let k = self.k(p.m);
            let bp = &self.net.blocks[p.block];
            let op = self.offsets[p.block];
            for (j, &(node_j, amp)) in sources.iter().enumerate() {
                let cu = DMatrix::from_fn(bp.n_ports(), 1, |r, _| {
                    (k[(bp.nodes[r], node_j)] + k[(op + r, node_j)] * bp.z_ref) * amp
                });
                let contrib = &p.ds * cu;
                for r in 0..bp.n_ports() {
                    rhs[(p.start + r, j)] = contrib[(r, 0)];
                }
            }
        }
        let r = if len == 0 {
            rhs
        } else {
            inverse_checked(a, "filter sideband system")? * rhs
        };

        let mut out = HarmonicSMatrix::zeros(f_rf, self.mod_hz, n_max, n_ports);
        for n in -nm..=nm {
            let k = self.k(n);
            for (i, &(node_i, _)) in self.net.ports.iter().enumerate() {
                let scale = 1.0 / self.port_z0[i].sqrt();
                for (j, &(node_j, amp)) in sources.iter().enumerate() {
                    let mut v = k[(node_i, node_j)] * amp;
                    for q in &active {
                        let kq = self.k(n - q.m);
                        let oq = self.offsets[q.block];
                        for c in 0..self.net.blocks[q.block].n_ports() {
                            v += kq[(node_i, oq + c)] * r[(q.start + c, j)];
                        }
                    }
                    let mut s = v * scale;
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

/// Multi-harmonic S-matrix at `f_rf` with default options and the given `n_max`.
pub fn solve(top: &Topology, f_rf: f64, n_max: usize) -> Result<HarmonicSMatrix> {
    solve_with(top, f_rf, &SolveOptions::with_n_max(n_max))
}

pub fn solve_with(top: &Topology, f_rf: f64, opts: &SolveOptions) -> Result<HarmonicSMatrix> {
    let kernel = Kernel::new(top, kernel_span(opts))?;
    solve_point(&kernel, f_rf, opts)
}

fn kernel_span(opts: &SolveOptions) -> usize {
    let top_n = if opts.strict { 2 * opts.n_max.max(1) } else { opts.n_max };
    2 * top_n
}

fn solve_point(kernel: &Kernel, f_rf: f64, opts: &SolveOptions) -> Result<HarmonicSMatrix> {
    let s = kernel.solve(f_rf, opts.n_max)?;
    if opts.strict {
        let doubled = kernel.solve(f_rf, 2 * opts.n_max.max(1))?;
        let n = s.n_ports();
        for i in 1..=n {
            for j in 1..=n {
                let d = (s.s(i, j).norm() - doubled.s(i, j).norm()).abs();
                if d > opts.tol {
                    return Err(Error::Convergence(format!(
                        "|S{i}{j}| changes by {d:.3e} between n_max {} and {} (tol {:.1e})",
                        opts.n_max,
                        2 * opts.n_max.max(1),
                        opts.tol
                    )));
                }
            }
        }
    }
    Ok(s)
}

/// Independent solves over `freqs`, evaluated in parallel, results in input order.
pub fn sweep(top: &Topology, freqs: &[f64], n_max: usize) -> Result<Vec<HarmonicSMatrix>> {
    sweep_with(top, freqs, &SolveOptions::with_n_max(n_max))
}

pub fn sweep_with(top: &Topology, freqs: &[f64], opts: &SolveOptions) -> Result<Vec<HarmonicSMatrix>> {
    if freqs.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    if let Some(w) = freqs.windows(2).find(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(format!(
            "sweep grid decreases from {} to {} Hz",
            w[0], w[1]
        )));
    }
    let kernel = Kernel::new(top, kernel_span(opts))?;
    let results: Vec<Result<HarmonicSMatrix>> = freqs
        .par_iter()
        .map(|&f| solve_point(&kernel, f, opts).map_err(|e| e.at_frequency(f)))
        .collect();
    results.into_iter().collect()
}

/// Output sidebands at `out_port` for a unit wave incident on `in_port` at `f_in`.
pub fn output_spectrum(
    top: &Topology,
    f_in: f64,
    in_port: usize,
    out_port: usize,
    n_max: usize,
) -> Result<HarmonicSpectrum> {
    solve(top, f_in, n_max)?.spectrum(out_port, in_port)
}
