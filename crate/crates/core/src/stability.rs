//! Linearized perturbation-evolution matrix of the semi-discrete scheme and
//! its spectrum.
//!
//! With the nonlinear weights frozen at the mean field every face state is a
//! fixed linear combination of six cell perturbations, so the flux
//! perturbation through a face is `Σ_s B_s δX_s` with one 4×4 block per
//! stencil cell. The residual of a cell picks up `∓σ B_s` from its two faces
//! in each direction, giving the 13-block row pattern at fifth order.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::linalg::Hessenberg;
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::dual::Dual;
use crate::gas::{cons_to_prim, du_dw, dw_du, prim_to_cons};
use crate::grid::{BoundaryKind, BoundarySpec, MeanField};
use crate::hqr::hessenberg_eigenvalues;
use crate::marching::rhs;
use crate::reconstruction::ReconPair;
use crate::riemann::flux_of_cons;
use crate::scheme::Orientation;
use crate::{
    Error, FaceFrame, FluxSolver, GasModel, Mat4, Primitive, Scheme, Smoothing, VariableSpace, Vec4,
};

/// How the flux Jacobians are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMethod {
    /// Forward-mode dual numbers: exact to rounding.
    #[default]
    Dual,
    /// Central differences with step `max(1e-7, 1e-7 |U_k|)`.
    CentralDifference,
}

/// `∂F/∂U^L` and `∂F/∂U^R` at a pair of face states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxJacobians {
    pub left: Mat4,
    pub right: Mat4,
}

pub fn flux_jacobians(
    solver: FluxSolver,
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
    sm: &Smoothing,
    method: JacobianMethod,
) -> Result<FluxJacobians, Error> {
    let ul = prim_to_cons(wl, gas).to_vec();
    let ur = prim_to_cons(wr, gas).to_vec();
    let g = gas.gamma();
    let face = || alloc::format!("{} face n = ({}, {})", solver.name(), frame.nx, frame.ny);
    let mut left = Mat4::zeros();
    let mut right = Mat4::zeros();
    match method {
        JacobianMethod::Dual => {
            let dl: [Dual<8>; 4] = core::array::from_fn(|k| Dual::variable(ul[k], k));
            let dr: [Dual<8>; 4] = core::array::from_fn(|k| Dual::variable(ur[k], 4 + k));
            let f = flux_of_cons(solver, &dl, &dr, frame, g, sm)?;
            for r in 0..4 {
                for c in 0..4 {
                    left[(r, c)] = f[r].du[c];
                    right[(r, c)] = f[r].du[4 + c];
                }
            }
        }
        JacobianMethod::CentralDifference => {
            let eval = |a: &Vec4, b: &Vec4| -> Result<Vec4, Error> {
                let f = flux_of_cons(solver, &(*a).into(), &(*b).into(), frame, g, sm)?;
                Ok(Vec4::from(f))
            };
            for k in 0..4 {
                for (side, out) in [(0, &mut left), (1, &mut right)] {
                    let base = if side == 0 { ul } else { ur };
                    let step = 1e-7f64.max(1e-7 * base[k].abs());
                    let mut plus = base;
                    let mut minus = base;
                    plus[k] += step;
                    minus[k] -= step;
                    let (fp, fm) = if side == 0 {
                        (eval(&plus, &ur)?, eval(&minus, &ur)?)
                    } else {
                        (eval(&ul, &plus)?, eval(&ul, &minus)?)
                    };
                    let col = (fp - fm) / (2.0 * step);
                    out.set_column(k, &col);
                }
            }
        }
    }
    if left.iter().chain(right.iter()).any(|x| !x.is_finite()) {
        return Err(Error::Differentiation { face: face() });
    }
    Ok(FluxJacobians { left, right })
}

/// Flux-perturbation blocks of one face, one per stencil cell `i−2 ..= i+3`.
///
/// Columns act on the cell perturbation in the reconstruction variables:
/// conservative for conservative and characteristic reconstruction,
/// primitive for primitive reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceCoefficients {
    pub blocks: [Mat4; 6],
}

pub fn face_coefficients(
    pair: &ReconPair,
    solver: FluxSolver,
    frame: &FaceFrame,
    gas: &GasModel,
    sm: &Smoothing,
    method: JacobianMethod,
) -> Result<FaceCoefficients, Error> {
    let j = flux_jacobians(solver, &pair.left, &pair.right, frame, gas, sm, method)?;
    let (jl, jr, post) = match pair.space {
        VariableSpace::Conservative => (j.left, j.right, None),
        VariableSpace::Primitive => (
            j.left * du_dw(&pair.left, gas),
            j.right * du_dw(&pair.right, gas),
            None,
        ),
        VariableSpace::Characteristic => {
            let (l, r) = pair
                .projection
                .expect("characteristic pair carries its projection");
            (j.left * r, j.right * r, Some(l))
        }
    };
    let cl = pair.left_weights.left_coefficients();
    let cr = pair.right_weights.right_coefficients();
    let blocks = core::array::from_fn(|s| {
        let b = jl * Mat4::from_diagonal(&cl[s]) + jr * Mat4::from_diagonal(&cr[s]);
        match post {
            Some(l) => b * l,
            None => b,
        }
    });
    Ok(FaceCoefficients { blocks })
}

/// Variables the columns of the matrix act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unknowns {
    Conservative,
    Primitive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub jacobian: JacobianMethod,
    /// Refuse mean fields with `max |dρ/dt|` above this; `None` skips the check.
    pub steady_tolerance: Option<f64>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            jacobian: JacobianMethod::Dual,
            steady_tolerance: Some(1e-8),
        }
    }
}

/// Sparse block matrix, one row of `(column cell, block)` pairs per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMatrix {
    pub nx: usize,
    pub ny: usize,
    pub unknowns: Unknowns,
    pub rows: Vec<Vec<(usize, Mat4)>>,
}

impl StabilityMatrix {
    pub fn dim(&self) -> usize {
        4 * self.rows.len()
    }

    pub fn block_count(&self, row: usize) -> usize {
        self.rows[row].len()
    }

    fn add(&mut self, row: usize, col: usize, block: Mat4) {
        let entries = &mut self.rows[row];
        match entries.iter_mut().find(|(c, _)| *c == col) {
            Some((_, b)) => *b += block,
            None => entries.push((col, block)),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, entries) in self.rows.iter().enumerate() {
            for (c, b) in entries {
                m.view_mut((4 * r, 4 * c), (4, 4)).copy_from(b);
            }
        }
        m
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (r, entries) in self.rows.iter().enumerate() {
            let mut sorted = entries.clone();
            sorted.sort_by_key(|(c, _)| *c);
            for (c, b) in sorted {
                for a in 0..4 {
                    for k in 0..4 {
                        if b[(a, k)] != 0.0 {
                            out.push((4 * r + a, 4 * c + k, b[(a, k)]));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|(_, b)| b.iter().all(|x| x.is_finite()))
    }
}

/// Column targets of a stencil cell: the interior cells its perturbation
/// depends on, with the chain-rule multiplier through any ghost copy.
fn column_targets(
    field: &MeanField,
    bc: &BoundarySpec,
    unknowns: Unknowns,
    gas: &GasModel,
    i: isize,
    j: isize,
) -> Result<Option<(usize, Mat4)>, Error> {
    let nx = field.nx() as isize;
    let j = field.wrap_j(j);
    if (1..=nx).contains(&i) {
        return Ok(Some((field.index(i, j), Mat4::identity())));
    }
    let kind = if i < 1 { bc.left } else { bc.right };
    let edge = if i < 1 { 1 } else { nx };
    match kind {
        BoundaryKind::Inflow(_) => Ok(None),
        BoundaryKind::Periodic => Ok(Some((field.index(field.wrap_i(i), j), Mat4::identity()))),
        BoundaryKind::Extrapolate => Ok(Some((field.index(edge, j), Mat4::identity()))),
        BoundaryKind::PressureOutflow { .. } => {
            let pin = Mat4::from_diagonal(&Vec4::new(1.0, 1.0, 1.0, 0.0));
            let m = match unknowns {
                Unknowns::Primitive => pin,
                Unknowns::Conservative => {
                    let wn = cons_to_prim(&field.get(edge, j), gas)?;
                    let wg = cons_to_prim(&field.get(i, j), gas)?;
                    du_dw(&wg, gas) * pin * dw_du(&wn, gas)
                }
            };
            Ok(Some((field.index(edge, j), m)))
        }
    }
}

/// Assembles the stability matrix of `scheme` around `field`, whose ghosts
/// must be filled according to `bc`.
pub fn assemble(
    field: &MeanField,
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
    opts: &AssemblyOptions,
) -> Result<StabilityMatrix, Error> {
    if let Some(tol) = opts.steady_tolerance {
        let residual = rhs(field, scheme, gas)?.density_norm();
        if !(residual <= tol) {
            return Err(Error::UnsteadyMeanField { residual });
        }
    }
    let nx = field.nx() as isize;
    let ny = field.ny() as isize;
    let unknowns = match scheme.recon.space {
        VariableSpace::Primitive => Unknowns::Primitive,
        _ => Unknowns::Conservative,
    };
    let sigma = field.face_length() / field.volume();
    let mut s = StabilityMatrix {
        nx: field.nx(),
        ny: field.ny(),
        unknowns,
        rows: vec![Vec::new(); field.cell_count()],
    };

    let row_scale: Vec<Mat4> = match unknowns {
        Unknowns::Primitive => field
            .interior()
            .map(|c| cons_to_prim(&field.get(c.i, c.j), gas).map(|w| dw_du(&w, gas)))
            .collect::<Result<_, _>>()?,
        Unknowns::Conservative => vec![Mat4::identity(); field.cell_count()],
    };

    let add_face = |s: &mut StabilityMatrix,
                    orientation: Orientation,
                    cells: [(isize, isize); 6],
                    owners: [Option<usize>; 2],
                    capped: bool|
     -> Result<(), Error> {
        let states = cells.map(|(a, b)| field.get(a, b));
        let (fs, pair) =
            scheme.reconstruct(&states, orientation, field.face_length(), capped, gas)?;
        let frame = orientation.frame(field.face_length());
        let coeff = face_coefficients(
            &pair,
            fs.solver,
            &frame,
            gas,
            &scheme.smoothing,
            opts.jacobian,
        )?;
        for (slot, &(a, b)) in cells.iter().enumerate() {
            let Some((col, m)) = column_targets(field, bc, unknowns, gas, a, b)? else {
                continue;
            };
            let block = coeff.blocks[slot] * m * sigma;
            if block.iter().all(|x| *x == 0.0) {
                continue;
            }
            if let Some(row) = owners[0] {
                s.add(row, col, -(row_scale[row] * block));
            }
            if let Some(row) = owners[1] {
                s.add(row, col, row_scale[row] * block);
            }
        }
        Ok(())
    };

    for j in 1..=ny {
        for i in 0..=nx {
            let cells = core::array::from_fn(|k| (i - 2 + k as isize, j));
            let owners = [
                (i >= 1).then(|| field.index(i, j)),
                (i < nx).then(|| field.index(i + 1, j)),
            ];
            add_face(
                &mut s,
                Orientation::Normal,
                cells,
                owners,
                scheme.is_shock_face(i, i + 1),
            )
            .map_err(|e| e.at_cell((i, j)))?;
        }
    }
    // periodic in y: faces j+1/2 for j = 1..=ny are the distinct ones, and
    // on a single row they cancel exactly
    let transverse_rows = if ny == 1 { 0 } else { ny };
    for i in 1..=nx {
        for j in 1..=transverse_rows {
            let cells = core::array::from_fn(|k| (i, j - 2 + k as isize));
            let lo = field.index(i, j);
            let hi = field.index(i, field.wrap_j(j + 1));
            add_face(
                &mut s,
                Orientation::Transverse,
                cells,
                [Some(lo), Some(hi)],
                scheme.is_shock_face(i, i),
            )
            .map_err(|e| e.at_cell((i, j)))?;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub max_real: f64,
    /// Eigenvalue with the largest real part (non-negative imaginary part on
    /// ties).
    pub leading: Complex64,
    /// Right eigenvector of `leading`, unit max-norm, four entries per cell.
    pub eigenvector: Vec<Complex64>,
}

/// Full spectrum of a dense matrix plus the leading right eigenvector.
pub fn eigensolve(m: &DMatrix<f64>) -> Result<Spectrum, Error> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Eigensolver {
            reason: alloc::format!("matrix is {}x{}", m.nrows(), m.ncols()),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver {
            reason: "non-finite entries".to_string(),
        });
    }
    let eigenvalues = schur_eigenvalues(m)?;
    let leading = *eigenvalues
        .iter()
        .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .expect("non-empty");
    let eigenvector = inverse_iteration(m, leading)?;
    Ok(Spectrum {
        max_real: leading.re,
        leading,
        eigenvalues,
        eigenvector,
    })
}

/// Eigenvalues from the real Schur form of the balanced matrix. nalgebra's
/// shifted QR has no exceptional shifts and can cycle on the strongly
/// non-normal matrices of captured shocks; those fall back to a Francis
/// iteration that has them.
fn schur_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>, Error> {
    let n = m.nrows();
    let mut b = m.clone();
    balance_parlett_reinsch(&mut b);
    if let Some(schur) = Schur::try_new(b.clone(), f64::EPSILON, 100 * n.max(10)) {
        return Ok(schur.complex_eigenvalues().iter().copied().collect());
    }
    let h = Hessenberg::new(b).h();
    hessenberg_eigenvalues(&h, 300).ok_or_else(|| Error::Eigensolver {
        reason: "QR iteration did not converge".to_string(),
    })
}

fn inverse_iteration(m: &DMatrix<f64>, lambda: Complex64) -> Result<Vec<Complex64>, Error> {
    let n = m.nrows();
    let scale = m.amax().max(1.0);
    let shift = lambda + Complex64::new(1e-10 * scale, 1e-10 * scale);
    let mut a: DMatrix<Complex64> = m.map(|x| Complex64::new(x, 0.0));
    for k in 0..n {
        a[(k, k)] -= shift;
    }
    let lu = a.lu();
    // deterministic, non-degenerate start vector
    let mut x = DVector::from_fn(n, |k, _| {
        Complex64::new(1.0 + (k as f64 * 0.618_034).fract(), 0.0)
    });
    for _ in 0..4 {
        let y = lu.solve(&x).ok_or_else(|| Error::Eigensolver {
            reason: "singular shifted matrix in inverse iteration".to_string(),
        })?;
        let norm = y.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Eigensolver {
                reason: "inverse iteration lost the vector".to_string(),
            });
        }
        x = y / Complex64::new(norm, 0.0);
    }
    // fix the phase so the largest entry is real and positive
    let (kmax, _) =
        x.iter().enumerate().fold(
            (0, 0.0),
            |acc, (k, z)| if z.norm() > acc.1 { (k, z.norm()) } else { acc },
        );
    let phase = x[kmax] / x[kmax].norm();
    Ok(x.iter().map(|z| z / phase).collect())
}

/// Unstable-mode amplitude per grid column.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    /// Max modulus over rows and components, columns `1..=nx` at `[0..nx)`.
    pub profile: Vec<f64>,
    pub argmax_column: isize,
}

/// Per-cell 4-vectors of an eigenvector, converted to primitive variables
/// when requested and the matrix unknowns are conservative.
pub fn eigenvector_cells(
    vector: &[Complex64],
    unknowns: Unknowns,
    field: &MeanField,
    gas: &GasModel,
    primitive: bool,
) -> Result<Vec<[Complex64; 4]>, Error> {
    let mut out = Vec::with_capacity(field.cell_count());
    for (k, c) in field.interior().enumerate() {
        let v: [Complex64; 4] = core::array::from_fn(|a| vector[4 * k + a]);
        if primitive && unknowns == Unknowns::Conservative {
            let t = dw_du(&cons_to_prim(&field.get(c.i, c.j), gas)?, gas);
            out.push(core::array::from_fn(|r| {
                (0..4).map(|a| v[a] * t[(r, a)]).sum()
            }));
        } else {
            out.push(v);
        }
    }
    Ok(out)
}

pub fn localize(cells: &[[Complex64; 4]], nx: usize) -> Localization {
    let mut profile = vec![0.0f64; nx];
    for (k, v) in cells.iter().enumerate() {
        let col = k % nx;
        for z in v {
            profile[col] = profile[col].max(z.norm());
        }
    }
    let argmax = profile
        .iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
        )
        .0;
    Localization {
        profile,
        argmax_column: argmax as isize + 1,
    }
}
