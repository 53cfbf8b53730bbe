//! Ghost-padded structured field and boundary conditions.
//!
//! Interior cells are indexed `1..=nx` by `1..=ny`; three ghost layers sit on
//! every side, so valid indices run from `-2` to `n + 3`.

use alloc::vec;
use alloc::vec::Vec;

use crate::gas::{cons_to_prim, prim_to_cons};
use crate::{Conserved, Error, GasModel};

pub const GHOST: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    pub i: isize,
    pub j: isize,
}

impl CellId {
    pub const fn new(i: isize, j: isize) -> Self {
        Self { i, j }
    }
}

/// Condition on one side of the domain in x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// Ghost cells hold a fixed state.
    Inflow(Conserved),
    /// Copy of the last interior cell with the pressure pinned.
    PressureOutflow {
        p: f64,
    },
    /// Plain zeroth-order extrapolation.
    Extrapolate,
    Periodic,
}

/// Boundary conditions; y is always periodic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySpec {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
}

impl BoundarySpec {
    pub const fn periodic() -> Self {
        Self {
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
        }
    }
}

/// Cell-averaged conservative states on a uniform Cartesian grid of square
/// cells of size `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanField {
    nx: usize,
    ny: usize,
    h: f64,
    cells: Vec<Conserved>,
}

impl MeanField {
    pub fn uniform(nx: usize, ny: usize, h: f64, state: Conserved) -> Self {
        assert!(nx > 0 && ny > 0 && h > 0.0, "empty grid");
        Self {
            nx,
            ny,
            h,
            cells: vec![state; (nx + 2 * GHOST) * (ny + 2 * GHOST)],
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn face_length(&self) -> f64 {
        self.h
    }

    pub fn volume(&self) -> f64 {
        self.h * self.h
    }

    #[inline]
    fn slot(&self, i: isize, j: isize) -> usize {
        let g = GHOST as isize;
        debug_assert!(
            i >= 1 - g && i <= self.nx as isize + g,
            "column {i} outside padding"
        );
        debug_assert!(
            j >= 1 - g && j <= self.ny as isize + g,
            "row {j} outside padding"
        );
        ((j + g - 1) as usize) * (self.nx + 2 * GHOST) + (i + g - 1) as usize
    }

    #[inline]
    pub fn get(&self, i: isize, j: isize) -> Conserved {
        self.cells[self.slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: isize, j: isize, u: Conserved) {
        let s = self.slot(i, j);
        self.cells[s] = u;
    }

    /// Dense index of an interior cell, row-major in `j`.
    #[inline]
    pub fn index(&self, i: isize, j: isize) -> usize {
        (j as usize - 1) * self.nx + (i as usize - 1)
    }

    pub fn cell_of_index(&self, k: usize) -> CellId {
        CellId::new((k % self.nx) as isize + 1, (k / self.nx) as isize + 1)
    }

    pub fn interior(&self) -> impl Iterator<Item = CellId> + '_ {
        (1..=self.ny as isize)
            .flat_map(move |j| (1..=self.nx as isize).map(move |i| CellId::new(i, j)))
    }

    /// Interior states in [`index`](Self::index) order.
    pub fn interior_states(&self) -> Vec<Conserved> {
        self.interior().map(|c| self.get(c.i, c.j)).collect()
    }

    pub fn set_interior_states(&mut self, states: &[Conserved]) {
        assert_eq!(states.len(), self.cell_count());
        for (k, u) in states.iter().enumerate() {
            let c = self.cell_of_index(k);
            self.set(c.i, c.j, *u);
        }
    }

    /// Validates every interior state, reporting the first bad cell.
    pub fn validate(&self, gas: &GasModel) -> Result<(), Error> {
        for c in self.interior() {
            cons_to_prim(&self.get(c.i, c.j), gas).map_err(|e| e.at_cell((c.i, c.j)))?;
        }
        Ok(())
    }

    /// Periodic image of row `j` inside `1..=ny`.
    #[inline]
    pub fn wrap_j(&self, j: isize) -> isize {
        (j - 1).rem_euclid(self.ny as isize) + 1
    }

    #[inline]
    pub fn wrap_i(&self, i: isize) -> isize {
        (i - 1).rem_euclid(self.nx as isize) + 1
    }

    /// Fills ghost cells. Corners are never read and are left alone.
    pub fn apply_boundaries(&mut self, spec: &BoundarySpec, gas: &GasModel) -> Result<(), Error> {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        let g = GHOST as isize;
        for j in 1..=ny {
            for k in 1..=g {
                let left = match spec.left {
                    BoundaryKind::Inflow(u) => u,
                    BoundaryKind::Periodic => self.get(self.wrap_i(1 - k), j),
                    BoundaryKind::Extrapolate => self.get(1, j),
                    BoundaryKind::PressureOutflow { p } => pinned(self.get(1, j), p, gas, (1, j))?,
                };
                self.set(1 - k, j, left);
                let right = match spec.right {
                    BoundaryKind::Inflow(u) => u,
                    BoundaryKind::Periodic => self.get(self.wrap_i(nx + k), j),
                    BoundaryKind::Extrapolate => self.get(nx, j),
                    BoundaryKind::PressureOutflow { p } => {
                        pinned(self.get(nx, j), p, gas, (nx, j))?
                    }
                };
                self.set(nx + k, j, right);
            }
        }
        for i in 1..=nx {
            for k in 1..=g {
                let lo = self.get(i, self.wrap_j(1 - k));
                self.set(i, 1 - k, lo);
                let hi = self.get(i, self.wrap_j(ny + k));
                self.set(i, ny + k, hi);
            }
        }
        Ok(())
    }

    /// Row-averaged conservative state of column `i`.
    pub fn column_average(&self, i: isize) -> Conserved {
        let mut acc = crate::Vec4::zeros();
        for j in 1..=self.ny as isize {
            acc += self.get(i, j).to_vec();
        }
        Conserved::from_vec(&(acc / self.ny as f64))
    }

    /// Copies a single-row field onto `ny` identical rows.
    pub fn replicate_rows(&self, ny: usize) -> Self {
        let mut out = Self::uniform(self.nx, ny, self.h, self.get(1, 1));
        let g = GHOST as isize;
        for j in 1 - g..=ny as isize + g {
            for i in 1 - g..=self.nx as isize + g {
                out.set(i, j, self.get(i, 1));
            }
        }
        out
    }
}

fn pinned(u: Conserved, p: f64, gas: &GasModel, cell: (isize, isize)) -> Result<Conserved, Error> {
    let mut w = cons_to_prim(&u, gas).map_err(|e| e.at_cell(cell))?;
    w.p = p;
    Ok(prim_to_cons(&w, gas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Primitive;

    fn ramp(nx: usize, ny: usize, gas: &GasModel) -> MeanField {
        let mut f = MeanField::uniform(nx, ny, 1.0, Conserved::new(1.0, 0.0, 0.0, 2.5));
        for c in f.clone().interior() {
            let w = Primitive::new(
                1.0 + 0.1 * c.i as f64,
                0.5,
                0.01 * c.j as f64,
                1.0 + 0.2 * c.j as f64,
            );
            f.set(c.i, c.j, prim_to_cons(&w, gas));
        }
        f
    }

    #[test]
    fn boundary_fill_matches_its_definition() {
        let gas = GasModel::air();
        let inflow = prim_to_cons(&Primitive::new(1.4, 20.0, 0.0, 1.0), &gas);
        let spec = BoundarySpec {
            left: BoundaryKind::Inflow(inflow),
            right: BoundaryKind::PressureOutflow { p: 7.0 },
        };
        let mut f = ramp(5, 4, &gas);
        f.apply_boundaries(&spec, &gas).unwrap();
        for j in 1..=4 {
            for k in 0..3 {
                assert_eq!(f.get(-k, j), inflow);
                let g = cons_to_prim(&f.get(6 + k, j), &gas).unwrap();
                let last = cons_to_prim(&f.get(5, j), &gas).unwrap();
                assert!((g.p - 7.0).abs() < 1e-12);
                assert!((g.rho - last.rho).abs() < 1e-12 && (g.u - last.u).abs() < 1e-12);
            }
        }
        for i in 1..=5 {
            assert_eq!(f.get(i, 0), f.get(i, 4));
            assert_eq!(f.get(i, -1), f.get(i, 3));
            assert_eq!(f.get(i, 5), f.get(i, 1));
        }
        let once = f.clone();
        f.apply_boundaries(&spec, &gas).unwrap();
        assert_eq!(f, once);
    }

    #[test]
    fn single_row_wraps_onto_itself() {
        let gas = GasModel::air();
        let mut f = ramp(4, 1, &gas);
        f.apply_boundaries(&BoundarySpec::periodic(), &gas).unwrap();
        for k in -2..=4 {
            assert_eq!(f.get(2, k), f.get(2, 1));
        }
        assert_eq!(f.get(0, 1), f.get(4, 1));
        assert_eq!(f.get(-2, 1), f.get(2, 1));
        let g = f.replicate_rows(3);
        assert_eq!(g.get(3, 2), f.get(3, 1));
        assert!((g.column_average(3).to_vec() - f.get(3, 1).to_vec()).amax() < 1e-14);
    }

    #[test]
    fn dense_indexing_round_trips() {
        let f = MeanField::uniform(3, 2, 0.5, Conserved::new(1.0, 0.0, 0.0, 2.5));
        for (k, c) in f.interior().enumerate() {
            assert_eq!(f.index(c.i, c.j), k);
            assert_eq!(f.cell_of_index(k), c);
        }
        assert_eq!(f.volume(), 0.25);
    }
}
