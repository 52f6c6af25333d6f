//! Simulation and optimization library for RIS-aided downlink communications.
//!
//! A base station with a uniform linear array serves a single-antenna user
//! through one or more reconfigurable intelligent surfaces (RISs); the direct
//! link is blocked. Each RIS is an L x L uniform rectangular array of
//! phase-only reflecting elements. Instead of tuning all `N L^2` element
//! phases independently, the phases are constrained to arithmetic sequences
//! (generalized Snell's law), which collapses the design space to a 2-vector
//! phase gradient plus one reference phase per surface and yields a compact
//! cascaded channel expressed through Dirichlet-kernel reflection gains.
//!
//! Module layout:
//! - [`channel`]: geometric multipath channel sampling and assembly
//! - [`phase`]: structured phase profiles, reflection gains, cascaded channels
//! - [`optim`]: transmit/passive beamforming algorithms (MRT, SCA, SPP, SA, ES)
//! - [`harness`]: seeded Monte-Carlo sweeps, rate/timing tables, CSV output

pub mod channel;
pub mod config;
pub mod harness;
pub mod optim;
pub mod phase;

use std::path::PathBuf;

use thiserror::Error;

/// Scalar complex type used throughout.
pub type C64 = num_complex::Complex<f64>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("effective channel is zero; beamforming direction undefined")]
    DegenerateChannel,
    #[error("exhaustive search requires a single RIS, got N={0}")]
    EsRequiresSingleRis(usize),
    #[error("unknown algorithm id `{0}`")]
    UnknownAlgorithm(String),
    #[error("unknown sweep variable `{0}`")]
    UnknownSweepVariable(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
