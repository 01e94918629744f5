//! Harmonic-domain simulation of magnet-free circulators built from
//! periodically switched bandpass filters.
//!
//! * [`spectra`]: closed-form sideband spectra of the gated-filter path and
//!   their differential / quad superpositions.
//! * [`network`]: circulator topologies and the exact LPTV solver returning
//!   multi-harmonic S-matrices.
//! * [`filters`], [`touchstone`]: filter models and `.s2p` I/O.
//! * [`timedomain`]: sampled oracle for the gated path.
//! * [`metrics`]: IL, isolation, return loss, bandwidth, IMP suppression.
//! * [`cli`]: configuration and commands behind the `circsim` binary.

pub mod cli;
pub mod clock;
pub mod error;
pub mod filters;
pub mod metrics;
pub mod network;
pub mod spectra;
pub mod timedomain;
pub mod touchstone;

pub use clock::ClockSpec;
pub use error::{Error, Result};
pub use filters::FilterModel;
pub use network::{solve, sweep, CirculatorParams, HarmonicSMatrix, Topology, TopologyKind};
pub use spectra::HarmonicSpectrum;
pub use touchstone::NetworkData;
