//! Nonlinear time marching, perturbation injection, and growth-rate fitting.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gas::cons_to_prim;
use crate::grid::{BoundarySpec, MeanField};
use crate::scheme::Orientation;
use crate::{Conserved, Error, GasModel, Scheme, Vec4};

/// Six cells straddling the x-face between columns `i` and `i + 1`.
pub fn stencil_x(field: &MeanField, i: isize, j: isize) -> [Conserved; 6] {
    core::array::from_fn(|s| field.get(i - 2 + s as isize, j))
}

/// Six cells straddling the y-face between rows `j` and `j + 1`.
pub fn stencil_y(field: &MeanField, i: isize, j: isize) -> [Conserved; 6] {
    core::array::from_fn(|s| field.get(i, j - 2 + s as isize))
}

/// Semi-discrete residual `dU/dt` of every interior cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub du: Vec<Vec4>,
    /// Faces where reconstruction fell back to first order.
    pub fallbacks: usize,
}

impl Residual {
    /// `max |dρ/dt|` over the interior.
    pub fn density_norm(&self) -> f64 {
        self.du.iter().fold(0.0, |m, r| m.max(r[0].abs()))
    }
}

/// Residual of a field whose ghost cells are already filled.
pub fn rhs(field: &MeanField, scheme: &Scheme, gas: &GasModel) -> Result<Residual, Error> {
    let nx = field.nx() as isize;
    let ny = field.ny() as isize;
    let len = field.face_length();
    let sigma = len / field.volume();
    let mut du = vec![Vec4::zeros(); field.cell_count()];
    let mut fallbacks = 0;
    for j in 1..=ny {
        for i in 0..=nx {
            let cells = stencil_x(field, i, j);
            let capped = scheme.is_shock_face(i, i + 1);
            let (f, fell) = scheme
                .face_flux(&cells, Orientation::Normal, len, capped, gas)
                .map_err(|e| e.at_cell((i, j)))?;
            fallbacks += fell as usize;
            if i >= 1 {
                du[field.index(i, j)] -= f * sigma;
            }
            if i < nx {
                du[field.index(i + 1, j)] += f * sigma;
            }
        }
    }
    // with a single periodic row both transverse faces of a cell see the same
    // stencil, so their fluxes cancel exactly
    let last = if ny == 1 { 0 } else { nx };
    for i in 1..=last {
        let capped = scheme.is_shock_face(i, i);
        for j in 0..=ny {
            let cells = stencil_y(field, i, j);
            let (f, fell) = scheme
                .face_flux(&cells, Orientation::Transverse, len, capped, gas)
                .map_err(|e| e.at_cell((i, j)))?;
            fallbacks += fell as usize;
            if j >= 1 {
                du[field.index(i, j)] -= f * sigma;
            }
            if j < ny {
                du[field.index(i, j + 1)] += f * sigma;
            }
        }
    }
    Ok(Residual { du, fallbacks })
}

/// `dt = CFL · min h / max(|u| + c, |v| + c)` over the interior.
pub fn cfl_dt(field: &MeanField, cfl: f64, gas: &GasModel) -> Result<f64, Error> {
    let mut fastest: f64 = 0.0;
    for c in field.interior() {
        let w = cons_to_prim(&field.get(c.i, c.j), gas).map_err(|e| e.at_cell((c.i, c.j)))?;
        let a = gas.sound_speed(&w);
        fastest = fastest.max((w.u.abs() + a).max(w.v.abs() + a));
    }
    Ok(cfl * field.h() / fastest)
}

fn axpy(
    field: &MeanField,
    base: &[Conserved],
    a: f64,
    b: f64,
    dt: f64,
    du: &[Vec4],
) -> Vec<Conserved> {
    let cur = field.interior_states();
    base.iter()
        .zip(cur.iter())
        .zip(du)
        .map(|((u0, u), r)| Conserved::from_vec(&(u0.to_vec() * a + (u.to_vec() + r * dt) * b)))
        .collect()
}

/// One SSP-RK3 step. Ghosts are refilled before every stage and on exit.
pub fn step_ssprk3(
    field: &mut MeanField,
    dt: f64,
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
) -> Result<usize, Error> {
    Ok(step_with_residual(field, dt, scheme, bc, gas)?.0)
}

/// [`step_ssprk3`] that also returns the density residual of the state the
/// step started from.
pub fn step_with_residual(
    field: &mut MeanField,
    dt: f64,
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
) -> Result<(usize, f64), Error> {
    field.apply_boundaries(bc, gas)?;
    if dt == 0.0 {
        return Ok((0, rhs(field, scheme, gas)?.density_norm()));
    }
    let u0 = field.interior_states();
    let mut fallbacks = 0;
    let mut residual = f64::NAN;
    for (stage, (a, b)) in [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)]
        .into_iter()
        .enumerate()
    {
        let r = rhs(field, scheme, gas)?;
        if stage == 0 {
            residual = r.density_norm();
        }
        fallbacks += r.fallbacks;
        let next = axpy(field, &u0, a, b, dt, &r.du);
        field.set_interior_states(&next);
        field.validate(gas)?;
        field.apply_boundaries(bc, gas)?;
    }
    Ok((fallbacks, residual))
}

/// Selective frequency damping: a first-order low-pass filter `Ū` of the
/// state with feedback `-gain (U - Ū)` on the residual. Oscillations faster
/// than `1/width` are damped while fixed points are exactly the steady states
/// of the undamped scheme, since `U = Ū` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Damping {
    pub gain: f64,
    pub width: f64,
}

impl Default for Damping {
    fn default() -> Self {
        Self {
            gain: 5.0,
            width: 0.5,
        }
    }
}

/// One SSP-RK3 step of the damped system. The filter is carried as the gap
/// `g = U - Ū`, which obeys `dg/dt = R(U) - (gain + 1/width) g`; storing the
/// small gap instead of `Ū` keeps it from stalling at the roundoff of `U`.
/// Returns fallbacks and the undamped density residual of the starting state.
pub fn step_damped(
    field: &mut MeanField,
    gap: &mut [Vec4],
    dt: f64,
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
    damping: &Damping,
) -> Result<(usize, f64), Error> {
    assert_eq!(gap.len(), field.cell_count());
    field.apply_boundaries(bc, gas)?;
    let u0 = field.interior_states();
    let g0 = gap.to_vec();
    let decay = damping.gain + 1.0 / damping.width;
    let mut fallbacks = 0;
    let mut residual = f64::NAN;
    for (stage, (a, b)) in [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)]
        .into_iter()
        .enumerate()
    {
        let mut r = rhs(field, scheme, gas)?;
        if stage == 0 {
            residual = r.density_norm();
        }
        fallbacks += r.fallbacks;
        for (k, du) in r.du.iter_mut().enumerate() {
            let g = gap[k];
            gap[k] = g0[k] * a + (g + (*du - g * decay) * dt) * b;
            *du -= g * damping.gain;
        }
        let next = axpy(field, &u0, a, b, dt, &r.du);
        field.set_interior_states(&next);
        field.validate(gas)?;
        field.apply_boundaries(bc, gas)?;
    }
    Ok((fallbacks, residual))
}

/// Adds independent `U(-a, a)` samples to every conservative component of
/// every interior cell.
pub fn inject_perturbation(field: &mut MeanField, amplitude: f64, seed: u64) {
    if amplitude == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<_> = field.interior().collect();
    for c in cells {
        let mut u = field.get(c.i, c.j).to_vec();
        for k in 0..4 {
            u[k] += rng.random_range(-amplitude..=amplitude);
        }
        field.set(c.i, c.j, Conserved::from_vec(&u));
    }
}

/// `‖v‖∞`, the largest transverse velocity magnitude.
pub fn transverse_velocity_norm(field: &MeanField) -> f64 {
    field.interior().fold(0.0, |m, c| {
        let u = field.get(c.i, c.j);
        m.max((u.rho_v / u.rho).abs())
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorSeries {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    /// Time at which the run produced a non-physical state.
    pub collapse: Option<f64>,
}

impl MonitorSeries {
    pub fn push(&mut self, t: f64, v: f64) {
        debug_assert!(self.t.last().is_none_or(|&last| t > last));
        self.t.push(t);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub cfl: f64,
    pub end_time: f64,
    pub amplitude: f64,
    pub seed: u64,
    /// March stops early once `‖v‖∞` reaches this level.
    pub stop_level: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            cfl: 0.1,
            end_time: 60.0,
            amplitude: 1e-7,
            seed: 0,
            stop_level: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarchOutcome {
    pub series: MonitorSeries,
    pub field: MeanField,
    pub steps: usize,
    pub fallbacks: usize,
}

/// Perturbs a copy of `base` and marches it, sampling `‖v‖∞` every step.
/// Collapse ends the run but is not an error.
pub fn march(
    base: &MeanField,
    scheme: &Scheme,
    bc: &BoundarySpec,
    gas: &GasModel,
    run: &RunConfig,
) -> Result<MarchOutcome, Error> {
    if !(run.cfl > 0.0) || !(run.amplitude >= 0.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "cfl {} / amplitude {}",
            run.cfl,
            run.amplitude
        )));
    }
    let mut field = base.clone();
    inject_perturbation(&mut field, run.amplitude, run.seed);
    field.apply_boundaries(bc, gas)?;
    let mut series = MonitorSeries::default();
    let mut t = 0.0;
    series.push(t, transverse_velocity_norm(&field));
    let mut steps = 0;
    let mut fallbacks = 0;
    while t < run.end_time {
        let dt = match cfl_dt(&field, run.cfl, gas) {
            Ok(dt) if dt.is_finite() && dt > 0.0 => dt.min(run.end_time - t),
            _ => {
                series.collapse = Some(t);
                break;
            }
        };
        let snapshot = field.clone();
        match step_ssprk3(&mut field, dt, scheme, bc, gas) {
            Ok(n) => fallbacks += n,
            Err(Error::InvalidState { .. })
            | Err(Error::RoeAverage { .. })
            | Err(Error::DegenerateFan { .. }) => {
                field = snapshot;
                series.collapse = Some(t + dt);
                break;
            }
            Err(e) => return Err(e),
        }
        t += dt;
        steps += 1;
        let v = transverse_velocity_norm(&field);
        if !v.is_finite() {
            series.collapse = Some(t);
            break;
        }
        series.push(t, v);
        if v >= run.stop_level {
            break;
        }
    }
    Ok(MarchOutcome {
        series,
        field,
        steps,
        fallbacks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub v0: f64,
    pub t0: f64,
    pub rate: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the log-linear fit.
    pub r2: f64,
}

pub const MIN_SAMPLES: usize = 10;
pub const MIN_R2: f64 = 0.99;
const MAX_FIT_POINTS: usize = 1000;

/// Least-squares fit of `ln ‖v‖∞` against `t` over the longest contiguous
/// window with `R² ≥ 0.99`.
///
/// Growing series (peak at least 10³ × the first sample) are restricted to
/// `[10 v_first, 10⁻² v_max]`, which skips both the initial transient and
/// nonlinear saturation. Otherwise the window search starts at the minimum
/// of the series for growth, or runs over the whole series for decay.
pub fn fit_growth_rate(series: &MonitorSeries) -> Result<GrowthFit, Error> {
    let none = Error::NoExponentialStage { threshold: MIN_R2 };
    let pts: Vec<(f64, f64)> = series
        .t
        .iter()
        .zip(&series.v)
        .filter(|(_, v)| v.is_finite() && **v > 0.0)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(none);
    }
    let v_first = pts[0].1;
    let (imax, v_max) =
        pts.iter().enumerate().fold(
            (0, 0.0),
            |acc, (k, p)| if p.1 > acc.1 { (k, p.1) } else { acc },
        );
    let (imin, _) =
        pts.iter().enumerate().fold(
            (0, f64::INFINITY),
            |acc, (k, p)| if p.1 < acc.1 { (k, p.1) } else { acc },
        );
    let v_last = pts[pts.len() - 1].1;

    let selected: Vec<(f64, f64)> = if v_max >= 1e3 * v_first {
        let (lo, hi) = (10.0 * v_first, 1e-2 * v_max);
        // the growth stage: from the last dip below `lo` before the peak
        let start = pts[..imax]
            .iter()
            .rposition(|p| p.1 < lo)
            .map_or(0, |k| k + 1);
        pts[start..=imax]
            .iter()
            .copied()
            .take_while(|p| p.1 <= hi)
            .filter(|p| p.1 >= lo)
            .collect()
    } else if v_last > pts[imin].1 && imin + MIN_SAMPLES <= pts.len() && v_last > 2.0 * pts[imin].1
    {
        pts[imin..].to_vec()
    } else {
        pts.clone()
    };
    if selected.len() < MIN_SAMPLES {
        return Err(none);
    }
    let stride = selected.len().div_ceil(MAX_FIT_POINTS);
    let data: Vec<(f64, f64)> = selected
        .iter()
        .step_by(stride)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    let n = data.len();
    if n < MIN_SAMPLES {
        return Err(none);
    }

    // prefix sums of t, y, t², ty, y² on origin-shifted times
    let t_ref = data[0].0;
    let mut ps = vec![[0.0f64; 5]; n + 1];
    for (k, (t, y)) in data.iter().enumerate() {
        let t = t - t_ref;
        let p = ps[k];
        ps[k + 1] = [p[0] + t, p[1] + y, p[2] + t * t, p[3] + t * y, p[4] + y * y];
    }
    let fit = |a: usize, b: usize| -> Option<(f64, f64, f64)> {
        let m = (b - a) as f64;
        let s: [f64; 5] = core::array::from_fn(|k| ps[b][k] - ps[a][k]);
        let stt = s[2] - s[0] * s[0] / m;
        let sty = s[3] - s[0] * s[1] / m;
        let syy = s[4] - s[1] * s[1] / m;
        if stt <= 0.0 {
            return None;
        }
        let slope = sty / stt;
        let intercept = (s[1] - slope * s[0]) / m;
        let r2 = if syy <= 0.0 {
            0.0
        } else {
            (sty * sty / (stt * syy)).min(1.0)
        };
        Some((slope, intercept, r2))
    };

    let mut best: Option<(usize, usize, f64, f64, f64)> = None;
    for len in (MIN_SAMPLES..=n).rev() {
        for a in 0..=n - len {
            if let Some((slope, intercept, r2)) = fit(a, a + len) {
                if r2 >= MIN_R2 && best.is_none_or(|b| r2 > b.4) {
                    best = Some((a, a + len, slope, intercept, r2));
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    let (a, b, slope, intercept, r2) = best.ok_or(none)?;
    Ok(GrowthFit {
        v0: intercept.exp(),
        t0: t_ref,
        rate: slope,
        window: (data[a].0, data[b - 1].0),
        r2,
    })
}
