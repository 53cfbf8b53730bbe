//! Linear stability analysis of shock-capturing finite-volume schemes for the
//! two-dimensional Euler equations.
//!
//! The crate builds a captured steady normal shock on a small Cartesian grid,
//! linearizes the semi-discrete scheme around it (frozen nonlinear weights),
//! and computes the spectrum of the resulting stability matrix. A nonlinear
//! time-marching path with perturbation injection and growth-rate fitting is
//! provided to cross-check the spectral prediction.
//!
//! `no_std` with `alloc`; all IO lives in the companion crate.

#![no_std]
// NaN-rejecting checks are written `!(x > 0.0)` on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dual;
pub mod gas;
pub mod grid;
mod hqr;
pub mod marching;
pub mod reconstruction;
pub mod riemann;
pub mod scheme;
pub mod shock;
pub mod stability;

pub use gas::{Characteristic, Conserved, FaceFrame, GasModel, Primitive};
pub use grid::{BoundaryKind, BoundarySpec, CellId, MeanField};
pub use reconstruction::{NearShockCap, Order, ReconConfig, VariableSpace, WenoVariant};
pub use riemann::{FluxSolver, Smoothing};
pub use scheme::{Scheme, SolverKind};
pub use shock::ShockProblemConfig;
pub use stability::{Spectrum, StabilityMatrix};

pub type Vec4 = nalgebra::Vector4<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("specific heat ratio must exceed 1, got {gamma}")]
    InvalidGas { gamma: f64 },
    #[error("invalid state (rho = {rho}, p = {p}){}", fmt_cell(cell))]
    InvalidState {
        rho: f64,
        p: f64,
        cell: Option<(isize, isize)>,
    },
    #[error("degenerate shock: upstream and downstream entropy coincide")]
    DegenerateShock,
    #[error("upstream Mach number must be at least 1, got {mach}")]
    MachNumber { mach: f64 },
    #[error("shock position must lie in [0, 1], got {epsilon}")]
    ShockPosition { epsilon: f64 },
    #[error("degenerate wave fan: S_R - S_L = {width}")]
    DegenerateFan { width: f64 },
    #[error("Roe average has non-positive sound speed squared ({c2})")]
    RoeAverage { c2: f64 },
    #[error(
        "{scheme} did not converge to a steady state (residual {residual:e} after {steps} steps)"
    )]
    ConvergenceFailure {
        scheme: alloc::string::String,
        residual: f64,
        steps: usize,
    },
    #[error("mean field is not steady (residual {residual:e})")]
    UnsteadyMeanField { residual: f64 },
    #[error("no exponential stage with R^2 >= {threshold} in the monitor series")]
    NoExponentialStage { threshold: f64 },
    #[error("flux differentiation produced non-finite values at {face}")]
    Differentiation { face: alloc::string::String },
    #[error("eigensolver failed: {reason}")]
    Eigensolver { reason: alloc::string::String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(alloc::string::String),
}

fn fmt_cell(cell: &Option<(isize, isize)>) -> alloc::string::String {
    match cell {
        Some((i, j)) => alloc::format!(" at cell ({i}, {j})"),
        None => alloc::string::String::new(),
    }
}

impl Error {
    /// Attaches a cell to an invalid-state error that does not carry one yet.
    pub fn at_cell(self, cell: (isize, isize)) -> Self {
        match self {
            Error::InvalidState { rho, p, cell: None } => Error::InvalidState {
                rho,
                p,
                cell: Some(cell),
            },
            other => other,
        }
    }
}
