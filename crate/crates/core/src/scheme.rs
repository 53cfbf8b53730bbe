//! A complete spatial discretization: flux solver, reconstruction, and the
//! per-face dispatch rules (hybrid solvers, near-shock caps).

use crate::reconstruction::{reconstruct_face, ReconPair};
use crate::riemann::numerical_flux;
use crate::{
    Conserved, Error, FaceFrame, FluxSolver, GasModel, NearShockCap, Order, ReconConfig, Smoothing,
    Vec4,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Roe,
    Hll,
    Hllc,
    VanLeer,
    /// Fifth-order Roe on transverse faces, first-order van Leer on normal
    /// faces.
    Hybrid1,
    /// Hybrid-1 with the two branches swapped.
    Hybrid2,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Roe => "roe",
            SolverKind::Hll => "hll",
            SolverKind::Hllc => "hllc",
            SolverKind::VanLeer => "vanleer",
            SolverKind::Hybrid1 => "hybrid1",
            SolverKind::Hybrid2 => "hybrid2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "roe" => SolverKind::Roe,
            "hll" => SolverKind::Hll,
            "hllc" => SolverKind::Hllc,
            "vanleer" | "van-leer" | "van_leer" => SolverKind::VanLeer,
            "hybrid1" | "hybrid-1" => SolverKind::Hybrid1,
            "hybrid2" | "hybrid-2" => SolverKind::Hybrid2,
            _ => return None,
        })
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, SolverKind::Hybrid1 | SolverKind::Hybrid2)
    }
}

/// Face orientation relative to the x-normal shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `i ± 1/2` faces, normal parallel to the shock normal.
    Normal,
    /// `j ± 1/2` faces.
    Transverse,
}

impl Orientation {
    pub fn frame(self, length: f64) -> FaceFrame {
        match self {
            Orientation::Normal => FaceFrame::x(length),
            Orientation::Transverse => FaceFrame::y(length),
        }
    }
}

/// Solver and order actually used on a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceScheme {
    pub solver: FluxSolver,
    pub recon: ReconConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scheme {
    pub solver: SolverKind,
    pub recon: ReconConfig,
    pub smoothing: Smoothing,
    /// Columns `first..=last` of the numerical shock structure; faces of
    /// these cells count as shock-adjacent for `recon.cap`.
    pub shock_zone: Option<(isize, isize)>,
}

impl Scheme {
    pub fn new(solver: SolverKind, order: Order) -> Self {
        Self {
            solver,
            recon: ReconConfig::default().with_order(order),
            smoothing: Smoothing::default(),
            shock_zone: None,
        }
    }

    pub fn with_recon(mut self, recon: ReconConfig) -> Self {
        self.recon = recon;
        self
    }

    pub fn with_shock_column(self, column: isize) -> Self {
        self.with_shock_zone(column, column)
    }

    pub fn with_shock_zone(mut self, first: isize, last: isize) -> Self {
        self.shock_zone = Some((first.min(last), first.max(last)));
        self
    }

    pub fn label(&self) -> alloc::string::String {
        if self.solver.is_hybrid() {
            alloc::string::String::from(self.solver.name())
        } else {
            alloc::format!("{}-{}", self.solver.name(), self.recon.order.as_number())
        }
    }

    pub fn face_scheme(&self, orientation: Orientation) -> FaceScheme {
        let (solver, order) = match (self.solver, orientation) {
            (SolverKind::Roe, _) => (FluxSolver::Roe, self.recon.order),
            (SolverKind::Hll, _) => (FluxSolver::Hll, self.recon.order),
            (SolverKind::Hllc, _) => (FluxSolver::Hllc, self.recon.order),
            (SolverKind::VanLeer, _) => (FluxSolver::VanLeer, self.recon.order),
            (SolverKind::Hybrid1, Orientation::Transverse)
            | (SolverKind::Hybrid2, Orientation::Normal) => (FluxSolver::Roe, Order::Fifth),
            (SolverKind::Hybrid1, Orientation::Normal)
            | (SolverKind::Hybrid2, Orientation::Transverse) => (FluxSolver::VanLeer, Order::First),
        };
        FaceScheme {
            solver,
            recon: self.recon.with_order(order),
        }
    }

    /// Whether the face lies on the boundary of a shock-zone cell. `a` and
    /// `b` are the columns of the two cells sharing the face.
    pub fn is_shock_face(&self, a: isize, b: isize) -> bool {
        match self.shock_zone {
            Some((lo, hi)) if self.recon.cap != NearShockCap::None => {
                (lo..=hi).contains(&a) || (lo..=hi).contains(&b)
            }
            _ => false,
        }
    }

    /// Reconstructed pair on a face from its six stencil cells.
    pub fn reconstruct(
        &self,
        cells: &[Conserved; 6],
        orientation: Orientation,
        length: f64,
        capped: bool,
        gas: &GasModel,
    ) -> Result<(FaceScheme, ReconPair), Error> {
        let fs = self.face_scheme(orientation);
        let pair = reconstruct_face(cells, &orientation.frame(length), &fs.recon, capped, gas)?;
        Ok((fs, pair))
    }

    /// Flux per unit length through a face.
    pub fn face_flux(
        &self,
        cells: &[Conserved; 6],
        orientation: Orientation,
        length: f64,
        capped: bool,
        gas: &GasModel,
    ) -> Result<(Vec4, bool), Error> {
        let (fs, pair) = self.reconstruct(cells, orientation, length, capped, gas)?;
        let f = numerical_flux(
            fs.solver,
            &pair.left,
            &pair.right,
            &orientation.frame(length),
            gas,
            &self.smoothing,
        )?;
        Ok((f, pair.fell_back))
    }
}
