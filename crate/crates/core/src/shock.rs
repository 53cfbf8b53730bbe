//! The two-dimensional steady normal-shock problem.
//!
//! Upstream state `(ρ, u, v, p) = (1.4, M0, 0, 1)`, so `c = 1` and the inflow
//! velocity equals the Mach number. The downstream state follows from the
//! Rankine–Hugoniot ratios and a single shock column holds an intermediate
//! state on the Hugoniot curve parameterized by `ε ∈ [0, 1]`.

use alloc::vec;
#[allow(unused_imports)]
use num_traits::Float;

use nalgebra::{DMatrix, DVector};

use crate::gas::{cons_to_prim, exact_flux, prim_to_cons, relative_entropy_rise};
use crate::grid::{BoundaryKind, BoundarySpec, MeanField};
use crate::marching::{cfl_dt, rhs, step_damped, step_with_residual, Damping};
use crate::{Conserved, Error, FaceFrame, GasModel, Primitive, Scheme, Vec4};

pub const UPSTREAM_DENSITY: f64 = 1.4;
pub const UPSTREAM_PRESSURE: f64 = 1.0;

/// Density and pressure ratios `(f, g)` across a normal shock.
pub fn jump_ratios(mach: f64, gas: &GasModel) -> Result<(f64, f64), Error> {
    if !(mach >= 1.0) || !mach.is_finite() {
        return Err(Error::MachNumber { mach });
    }
    let g = gas.gamma();
    let m2 = mach * mach;
    let f = 1.0 / (2.0 / ((g + 1.0) * m2) + (g - 1.0) / (g + 1.0));
    let p = 2.0 * g * m2 / (g + 1.0) - (g - 1.0) / (g + 1.0);
    Ok((f, p))
}

pub fn upstream_state(mach: f64, gas: &GasModel) -> Primitive {
    let c = (gas.gamma() * UPSTREAM_PRESSURE / UPSTREAM_DENSITY).sqrt();
    Primitive::new(UPSTREAM_DENSITY, mach * c, 0.0, UPSTREAM_PRESSURE)
}

pub fn downstream_state(mach: f64, gas: &GasModel) -> Result<Primitive, Error> {
    let (f, g) = jump_ratios(mach, gas)?;
    let l = upstream_state(mach, gas);
    Ok(Primitive::new(l.rho * f, l.u / f, 0.0, l.p * g))
}

/// Convex weights `(α_ρ, α_u, α_p)` placing the shock-cell state on the
/// Hugoniot curve.
pub fn hugoniot_weights(mach: f64, epsilon: f64, gas: &GasModel) -> Result<(f64, f64, f64), Error> {
    if mach <= 1.0 {
        return Err(Error::MachNumber { mach });
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::ShockPosition { epsilon });
    }
    let g = gas.gamma();
    let m2 = mach * mach;
    let e = epsilon;
    let a_u = 1.0
        - (1.0 - e)
            * (1.0 + e * (m2 - 1.0) / (1.0 + (g - 1.0) * m2 / 2.0)).powf(-0.5)
            * (1.0 + e * (m2 - 1.0) / (1.0 - 2.0 * g * m2 / (g - 1.0))).powf(-0.5);
    let a_p = e * (1.0 + (1.0 - e) * (g + 1.0) / (g - 1.0) * (m2 - 1.0) / m2).powf(-0.5);
    Ok((e, a_u, a_p))
}

pub fn intermediate_state(mach: f64, epsilon: f64, gas: &GasModel) -> Result<Primitive, Error> {
    let (a_rho, a_u, a_p) = hugoniot_weights(mach, epsilon, gas)?;
    let l = upstream_state(mach, gas);
    let r = downstream_state(mach, gas)?;
    let mix = |a: f64, x: f64, y: f64| (1.0 - a) * x + a * y;
    Ok(Primitive::new(
        mix(a_rho, l.rho, r.rho),
        mix(a_u, l.u, r.u),
        0.0,
        mix(a_p, l.p, r.p),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockProblemConfig {
    pub mach: f64,
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub cfl: f64,
    pub gas: GasModel,
    pub shock_column: isize,
    /// Steady-state tolerance on `max |dρ/dt|`.
    pub tolerance: f64,
    /// Residual below which a run that hit the step cap is still accepted.
    pub accept_tolerance: f64,
    pub max_steps: usize,
    pub steady: SteadyMethod,
    /// Frequency damping used by [`SteadyMethod::March`]; `None` marches the
    /// plain scheme.
    pub damping: Option<Damping>,
    pub outflow: Outflow,
}

/// How [`converge_1d`] finds the steady profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteadyMethod {
    /// Newton iteration on the steady equations with the total mass held at
    /// its initial value.
    ///
    /// Captured steady shocks come in a one-parameter family (the position
    /// of the shock inside its cells) along which the residual is flat, and
    /// the position is what `ε` sets. The total mass of the row fixes that
    /// position, so the constraint selects the family member with the
    /// initial field's shock location. For profiles with a single
    /// intermediate cell it pins that cell's density to `ρ_M(ε)`. Marching
    /// cannot do this: the pinned-pressure outflow does not conserve mass,
    /// and several members of the family are unstable in 1D.
    #[default]
    MassPinned,
    /// Explicit time marching from the initial field.
    March,
}

/// Right-hand boundary of the shock problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Outflow {
    /// Extrapolation with the downstream pressure pinned.
    #[default]
    PinnedPressure,
    /// Ghosts held at the exact downstream state. Both ends then carry the
    /// same flux, so marching conserves the total mass and the captured
    /// shock keeps the position set by the initial field.
    FixedState,
}

impl Default for ShockProblemConfig {
    fn default() -> Self {
        Self {
            mach: 20.0,
            epsilon: 0.1,
            nx: 11,
            ny: 11,
            h: 1.0,
            cfl: 0.1,
            gas: GasModel::air(),
            shock_column: 6,
            tolerance: 1e-12,
            accept_tolerance: 1e-8,
            max_steps: 200_000,
            steady: SteadyMethod::default(),
            damping: Some(Damping::default()),
            outflow: Outflow::default(),
        }
    }
}

impl ShockProblemConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.mach > 1.0) {
            return Err(Error::MachNumber { mach: self.mach });
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::ShockPosition {
                epsilon: self.epsilon,
            });
        }
        if self.nx < 2 || self.ny < 1 || !(self.h > 0.0) || !(self.cfl > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "grid {}x{}, h {}, cfl {}",
                self.nx,
                self.ny,
                self.h,
                self.cfl
            )));
        }
        if self.shock_column < 1 || self.shock_column > self.nx as isize {
            return Err(Error::InvalidConfig(alloc::format!(
                "shock column {} outside the grid",
                self.shock_column
            )));
        }
        Ok(())
    }

    pub fn upstream(&self) -> Primitive {
        upstream_state(self.mach, &self.gas)
    }

    pub fn downstream(&self) -> Primitive {
        downstream_state(self.mach, &self.gas).expect("validated Mach number")
    }

    /// Fixed inflow on the left, pressure-pinned extrapolation on the right,
    /// periodic in y.
    pub fn boundaries(&self) -> BoundarySpec {
        BoundarySpec {
            left: BoundaryKind::Inflow(prim_to_cons(&self.upstream(), &self.gas)),
            right: match self.outflow {
                Outflow::PinnedPressure => BoundaryKind::PressureOutflow {
                    p: self.downstream().p,
                },
                Outflow::FixedState => {
                    BoundaryKind::Inflow(prim_to_cons(&self.downstream(), &self.gas))
                }
            },
        }
    }
}

/// Column-uniform initial field with ghosts filled.
pub fn build_initial_field(cfg: &ShockProblemConfig) -> Result<MeanField, Error> {
    build_rows(cfg, cfg.ny)
}

fn build_rows(cfg: &ShockProblemConfig, ny: usize) -> Result<MeanField, Error> {
    cfg.validate()?;
    let gas = &cfg.gas;
    let l = prim_to_cons(&cfg.upstream(), gas);
    let r = prim_to_cons(&cfg.downstream(), gas);
    let m = prim_to_cons(&intermediate_state(cfg.mach, cfg.epsilon, gas)?, gas);
    let mut field = MeanField::uniform(cfg.nx, ny, cfg.h, l);
    for j in 1..=ny as isize {
        for i in 1..=cfg.nx as isize {
            let u = match i.cmp(&cfg.shock_column) {
                core::cmp::Ordering::Less => l,
                core::cmp::Ordering::Equal => m,
                core::cmp::Ordering::Greater => r,
            };
            field.set(i, j, u);
        }
    }
    field.apply_boundaries(&cfg.boundaries(), gas)?;
    Ok(field)
}

/// Steps without halving the residual after which a run already below the
/// acceptance tolerance is stopped.
const STALL_STEPS: usize = 5000;

/// Newton iterations allowed by [`SteadyMethod::MassPinned`].
const NEWTON_ITERATIONS: usize = 100;

/// A steady single-row profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub field: MeanField,
    /// Final `max |dρ/dt|`.
    pub residual: f64,
    /// Time steps or Newton iterations taken.
    pub steps: usize,
    /// Set when the run stopped (step cap or stalled residual) with the
    /// residual between the two tolerances.
    pub capped: bool,
}

/// Steady state of the one-dimensional restriction of the initial field.
pub fn converge_1d(cfg: &ShockProblemConfig, scheme: &Scheme) -> Result<SteadyProfile, Error> {
    match cfg.steady {
        SteadyMethod::MassPinned => converge_mass_pinned(cfg, scheme),
        SteadyMethod::March => converge_march(cfg, scheme),
    }
}

/// Components solved for; `ρv` stays exactly zero.
const SOLVED: [usize; 3] = [0, 1, 3];

/// Steady residual of the row holding `x` (three components per cell),
/// followed by the mass constraint, each row divided by `scale`. `None` if a
/// state is invalid.
fn pinned_residual(
    base: &MeanField,
    x: &DVector<f64>,
    mass: f64,
    scale: &[f64; 4],
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
) -> Result<Option<DVector<f64>>, Error> {
    let n = base.nx();
    let mut field = base.clone();
    for k in 0..n {
        let c = field.cell_of_index(k);
        field.set(
            c.i,
            c.j,
            Conserved::new(x[3 * k], x[3 * k + 1], 0.0, x[3 * k + 2]),
        );
    }
    if field.validate(gas).is_err() || field.apply_boundaries(bc, gas).is_err() {
        return Ok(None);
    }
    let du = match rhs(&field, scheme, gas) {
        Ok(r) => r.du,
        Err(Error::InvalidState { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let mut out = DVector::zeros(3 * n + 1);
    for k in 0..n {
        for (a, &c) in SOLVED.iter().enumerate() {
            out[3 * k + a] = du[k][c] / scale[a];
        }
    }
    out[3 * n] = ((0..n).map(|k| x[3 * k]).sum::<f64>() - mass) / scale[3];
    Ok(Some(out))
}

fn density_part(r: &DVector<f64>, n: usize) -> f64 {
    (0..n).fold(0.0, |m, k| m.max(r[3 * k].abs()))
}

fn converge_mass_pinned(cfg: &ShockProblemConfig, scheme: &Scheme) -> Result<SteadyProfile, Error> {
    let gas = &cfg.gas;
    let bc = cfg.boundaries();
    let base = build_rows(cfg, 1)?;
    let n = base.nx();
    let states = base.interior_states();
    let mass: f64 = states.iter().map(|u| u.rho).sum();
    let mut x =
        DVector::from_iterator(3 * n, states.iter().flat_map(|u| [u.rho, u.rho_u, u.rho_e]));
    // rows in units of the inflow flux divergence, so no component's
    // roundoff floor dominates the line search
    let inflow = exact_flux(&cfg.upstream(), &FaceFrame::x(cfg.h), gas) / cfg.h;
    let scale = [inflow[0], inflow[1], inflow[3], mass];
    let fail = |residual: f64, steps: usize| Error::ConvergenceFailure {
        scheme: scheme.label(),
        residual,
        steps,
    };
    let eval = |x: &DVector<f64>| pinned_residual(&base, x, mass, &scale, scheme, &bc, gas);
    let density = |r: &DVector<f64>| density_part(r, n) * scale[0];
    let mut r = eval(&x)?.ok_or_else(|| fail(f64::NAN, 0))?;
    let mut steps = 0;
    while steps < NEWTON_ITERATIONS {
        if density(&r) < cfg.tolerance && r[3 * n].abs() < 1e-14 {
            break;
        }
        steps += 1;
        let mut jac = DMatrix::zeros(3 * n + 1, 3 * n);
        for c in 0..3 * n {
            let h = 1e-7 * x[c].abs().max(1e-3);
            let mut xp = x.clone();
            xp[c] += h;
            let mut xm = x.clone();
            xm[c] -= h;
            let (Some(rp), Some(rm)) = (eval(&xp)?, eval(&xm)?) else {
                return Err(fail(density(&r), steps));
            };
            jac.set_column(c, &((rp - rm) / (2.0 * h)));
        }
        // the translation direction makes the square part singular; the
        // mass row restores full column rank
        let dx = jac
            .svd(true, true)
            .solve(&(-&r), 1e-13)
            .map_err(|_| fail(density(&r), steps))?;
        let norm = r.norm();
        let mut a = 1.0;
        let mut accepted = false;
        while a > 1e-4 {
            let trial = &x + &dx * a;
            if let Some(rt) = eval(&trial)? {
                if rt.norm() < norm {
                    (x, r, accepted) = (trial, rt, true);
                    break;
                }
            }
            a *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let mut field = base.clone();
    for k in 0..n {
        let c = field.cell_of_index(k);
        field.set(
            c.i,
            c.j,
            Conserved::new(x[3 * k], x[3 * k + 1], 0.0, x[3 * k + 2]),
        );
    }
    field.apply_boundaries(&bc, gas)?;
    let residual = rhs(&field, scheme, gas)?.density_norm();
    if residual < cfg.tolerance {
        Ok(SteadyProfile {
            field,
            residual,
            steps,
            capped: false,
        })
    } else if residual < cfg.accept_tolerance {
        Ok(SteadyProfile {
            field,
            residual,
            steps,
            capped: true,
        })
    } else {
        Err(fail(residual, steps))
    }
}

/// Marches the initial row to a steady state.
fn converge_march(cfg: &ShockProblemConfig, scheme: &Scheme) -> Result<SteadyProfile, Error> {
    let gas = &cfg.gas;
    let bc = cfg.boundaries();
    let mut field = build_rows(cfg, 1)?;
    let fail = |residual: f64, steps: usize| Error::ConvergenceFailure {
        scheme: scheme.label(),
        residual,
        steps,
    };
    let mut gap = vec![Vec4::zeros(); field.cell_count()];
    let mut best = f64::INFINITY;
    let (mut anchor, mut anchor_step) = (f64::INFINITY, 0);
    let mut steps = cfg.max_steps;
    for step in 0..cfg.max_steps {
        let dt = cfl_dt(&field, cfg.cfl, gas)?;
        let stepped = match &cfg.damping {
            Some(d) => step_damped(&mut field, &mut gap, dt, scheme, &bc, gas, d),
            None => step_with_residual(&mut field, dt, scheme, &bc, gas),
        };
        let residual = match stepped {
            Ok((_, r)) => r,
            Err(Error::InvalidState { .. }) => return Err(fail(f64::NAN, step)),
            Err(e) => return Err(e),
        };
        if !residual.is_finite() {
            return Err(fail(residual, step));
        }
        best = best.min(residual);
        if residual < cfg.tolerance {
            return Ok(SteadyProfile {
                field,
                residual,
                steps: step,
                capped: false,
            });
        }
        if step > 1000 && residual > 1e6 * best.max(1e-300) && residual > 1.0 {
            return Err(fail(residual, step));
        }
        if residual < 0.5 * anchor {
            (anchor, anchor_step) = (residual, step);
        }
        // a residual that has sat at the roundoff floor this long will not
        // reach the tolerance
        if anchor < cfg.accept_tolerance && step - anchor_step > STALL_STEPS {
            steps = step;
            break;
        }
    }
    field.apply_boundaries(&bc, gas)?;
    let residual = rhs(&field, scheme, gas)?.density_norm();
    if residual < cfg.accept_tolerance {
        Ok(SteadyProfile {
            field,
            residual,
            steps,
            capped: true,
        })
    } else {
        Err(fail(residual, steps))
    }
}

/// Replicates a steady profile across `ny` rows.
pub fn project_to_2d(profile: &MeanField, ny: usize) -> MeanField {
    profile.replicate_rows(ny)
}

/// Normalized entropy rise of the row-averaged shock-column state.
pub fn entropy_increase(field: &MeanField, cfg: &ShockProblemConfig) -> Result<f64, Error> {
    let m = cons_to_prim(&field.column_average(cfg.shock_column), &cfg.gas)?;
    relative_entropy_rise(&m, &cfg.upstream(), &cfg.downstream(), &cfg.gas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Order, SolverKind};
    use approx::assert_relative_eq;

    #[test]
    fn jump_ratio_values() {
        let gas = GasModel::air();
        assert_eq!(jump_ratios(1.0, &gas).unwrap(), (1.0, 1.0));
        let (f, g) = jump_ratios(20.0, &gas).unwrap();
        assert_relative_eq!(f, 5.925_925_925_9, epsilon = 1e-9);
        assert_relative_eq!(g, 466.5, epsilon = 1e-12);
        let (f, _) = jump_ratios(1e6, &gas).unwrap();
        assert!((f - 6.0).abs() < 1e-3);
        assert!(jump_ratios(0.5, &gas).is_err());
    }

    #[test]
    fn hugoniot_weights_limits() {
        let gas = GasModel::air();
        assert_eq!(hugoniot_weights(20.0, 0.0, &gas).unwrap(), (0.0, 0.0, 0.0));
        let (a, b, c) = hugoniot_weights(20.0, 1.0, &gas).unwrap();
        assert_eq!(a, 1.0);
        assert_relative_eq!(b, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c, 1.0, epsilon = 1e-15);
        assert!(hugoniot_weights(20.0, 1.5, &gas).is_err());
        let l = upstream_state(20.0, &gas);
        assert_relative_eq!(
            intermediate_state(20.0, 0.0, &gas).unwrap().to_vec(),
            l.to_vec()
        );
        let r = downstream_state(20.0, &gas).unwrap();
        assert_relative_eq!(
            intermediate_state(20.0, 1.0, &gas).unwrap().to_vec(),
            r.to_vec(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn hugoniot_weights_at_a_tenth() {
        // values computed independently with arbitrary-precision arithmetic
        let (a, b, c) = hugoniot_weights(20.0, 0.1, &GasModel::air()).unwrap();
        assert_eq!(a, 0.1);
        assert_relative_eq!(b, 0.258_024_445_416_435_7, epsilon = 1e-12);
        assert_relative_eq!(c, 0.039_570_227_007_426_2, epsilon = 1e-12);
    }

    #[test]
    fn intermediate_state_is_monotone_between_end_states() {
        let gas = GasModel::air();
        for mach in [1.5, 5.0, 20.0] {
            let l = upstream_state(mach, &gas);
            let r = downstream_state(mach, &gas).unwrap();
            assert_relative_eq!(l.rho * l.u, r.rho * r.u, max_relative = 1e-12);
            let mut prev = l;
            for k in 1..=20 {
                let m = intermediate_state(mach, k as f64 / 20.0, &gas).unwrap();
                assert!(m.rho >= prev.rho && m.p >= prev.p && m.u <= prev.u);
                assert!(m.rho <= r.rho * (1.0 + 1e-12) && m.u >= r.u * (1.0 - 1e-12));
                prev = m;
            }
        }
    }

    #[test]
    fn initial_field_structure() {
        let cfg = ShockProblemConfig {
            epsilon: 0.0,
            ..ShockProblemConfig::default()
        };
        let f = build_initial_field(&cfg).unwrap();
        let l = prim_to_cons(&cfg.upstream(), &cfg.gas);
        for j in 1..=11 {
            assert_eq!(f.get(6, j), l);
            for i in 1..=11 {
                assert_eq!(f.get(i, j), f.get(i, 1));
            }
        }
        let cfg = ShockProblemConfig::default();
        let f = build_initial_field(&cfg).unwrap();
        assert_relative_eq!(f.get(1, 1).rho_u, f.get(11, 1).rho_u, max_relative = 1e-12);
        assert!(f.get(6, 3) != f.get(5, 3) && f.get(6, 3) != f.get(7, 3));
    }

    #[test]
    fn first_order_roe_two_state_profile_is_nearly_steady() {
        // exact jump between cells: only the O(δ₀) smoothing of the sonic
        // Roe eigenvalue keeps the residual from vanishing
        let cfg = ShockProblemConfig {
            epsilon: 0.0,
            ..ShockProblemConfig::default()
        };
        let f = build_rows(&cfg, 1).unwrap();
        let scheme = Scheme::new(SolverKind::Roe, Order::First);
        assert!(rhs(&f, &scheme, &cfg.gas).unwrap().density_norm() < 1e-3);
        let sharp = Scheme {
            smoothing: crate::Smoothing { delta0: 1e-14 },
            ..scheme
        };
        assert!(rhs(&f, &sharp, &cfg.gas).unwrap().density_norm() < 1e-10);
    }

    #[test]
    fn stable_first_order_scheme_converges_and_projects() {
        let cfg = ShockProblemConfig::default();
        let scheme = Scheme::new(SolverKind::VanLeer, Order::First);
        let p = converge_1d(&cfg, &scheme).unwrap();
        assert!(p.residual < 1e-11, "{}", p.residual);
        let f = project_to_2d(&p.field, 11);
        for c in f.interior() {
            assert_eq!(f.get(c.i, c.j).rho_v, 0.0);
        }
        let e = entropy_increase(&f, &cfg).unwrap();
        assert!(e.is_finite());
    }

    #[test]
    fn entropy_increase_end_points() {
        let cfg = ShockProblemConfig {
            epsilon: 1.0,
            ..ShockProblemConfig::default()
        };
        let f = build_initial_field(&cfg).unwrap();
        assert_relative_eq!(entropy_increase(&f, &cfg).unwrap(), 1.0, epsilon = 1e-12);
        let cfg = ShockProblemConfig {
            epsilon: 0.0,
            ..cfg
        };
        let f = build_initial_field(&cfg).unwrap();
        assert!(entropy_increase(&f, &cfg).unwrap().abs() < 1e-13);
    }
}
