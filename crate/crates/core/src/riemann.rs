//! Interface fluxes.
//!
//! All solvers are implemented once over [`Real`] on plain `[T; 4]` primitive
//! arrays; the `f64` wrappers at the bottom take the typed states. Fluxes are
//! per unit face length.

use crate::dual::Real;
use crate::{Error, FaceFrame, GasModel, Primitive, Vec4};

/// Eigenvalue smoothing for the Roe dissipation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing {
    pub delta0: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { delta0: 1e-4 }
    }
}

impl Smoothing {
    /// `|λ|`, replaced by `(λ² + δ₀²)/(2δ₀)` below `δ₀`.
    pub fn abs<T: Real>(&self, lambda: T) -> T {
        let a = lambda.abs();
        if a.value() < self.delta0 {
            (lambda * lambda + self.delta0 * self.delta0) / (2.0 * self.delta0)
        } else {
            a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluxSolver {
    Roe,
    Hll,
    Hllc,
    VanLeer,
}

impl FluxSolver {
    pub const ALL: [FluxSolver; 4] = [
        FluxSolver::Roe,
        FluxSolver::Hllc,
        FluxSolver::Hll,
        FluxSolver::VanLeer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FluxSolver::Roe => "roe",
            FluxSolver::Hll => "hll",
            FluxSolver::Hllc => "hllc",
            FluxSolver::VanLeer => "vanleer",
        }
    }
}

/// Davis signal-speed bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds<T> {
    pub left: T,
    pub right: T,
}

#[derive(Clone, Copy)]
struct State<T> {
    rho: T,
    u: T,
    v: T,
    p: T,
    q: T,
    c: T,
    /// total energy density
    e: T,
}

impl<T: Real> State<T> {
    fn new(w: &[T; 4], n: (f64, f64), gamma: f64) -> Result<Self, Error> {
        let [rho, u, v, p] = *w;
        if !(rho.value() > 0.0 && p.value() > 0.0) {
            return Err(Error::InvalidState {
                rho: rho.value(),
                p: p.value(),
                cell: None,
            });
        }
        let kinetic = (u * u + v * v) * 0.5;
        Ok(Self {
            rho,
            u,
            v,
            p,
            q: u * n.0 + v * n.1,
            c: (p * gamma / rho).sqrt(),
            e: p / (gamma - 1.0) + rho * kinetic,
        })
    }

    fn cons(&self) -> [T; 4] {
        [self.rho, self.rho * self.u, self.rho * self.v, self.e]
    }

    fn flux(&self, n: (f64, f64)) -> [T; 4] {
        let m = self.rho * self.q;
        [
            m,
            m * self.u + self.p * n.0,
            m * self.v + self.p * n.1,
            (self.e + self.p) * self.q,
        ]
    }
}

/// Primitive from conservative, generic.
pub fn prim_from_cons<T: Real>(u: &[T; 4], gamma: f64) -> Result<[T; 4], Error> {
    let rho = u[0];
    if !(rho.value() > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidState {
            rho: rho.value(),
            p: f64::NAN,
            cell: None,
        });
    }
    let vx = u[1] / rho;
    let vy = u[2] / rho;
    let p = (u[3] - rho * (vx * vx + vy * vy) * 0.5) * (gamma - 1.0);
    if !(p.value() > 0.0) || !p.is_finite() {
        return Err(Error::InvalidState {
            rho: rho.value(),
            p: p.value(),
            cell: None,
        });
    }
    Ok([rho, vx, vy, p])
}

fn lincomb<T: Real>(a: [T; 4], b: [T; 4], fa: T, fb: T) -> [T; 4] {
    [
        a[0] * fa + b[0] * fb,
        a[1] * fa + b[1] * fb,
        a[2] * fa + b[2] * fb,
        a[3] * fa + b[3] * fb,
    ]
}

fn sub<T: Real>(a: [T; 4], b: [T; 4]) -> [T; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn davis_speeds<T: Real>(
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<WaveSpeeds<T>, Error> {
    let n = (frame.nx, frame.ny);
    let l = State::new(wl, n, gas.gamma())?;
    let r = State::new(wr, n, gas.gamma())?;
    Ok(speeds(&l, &r))
}

fn speeds<T: Real>(l: &State<T>, r: &State<T>) -> WaveSpeeds<T> {
    WaveSpeeds {
        left: (l.q - l.c).min(r.q - r.c),
        right: (l.q + l.c).max(r.q + r.c),
    }
}

fn check_fan<T: Real>(s: &WaveSpeeds<T>) -> Result<(), Error> {
    let width = (s.right - s.left).value();
    if width < 1e-12 {
        return Err(Error::DegenerateFan { width });
    }
    Ok(())
}

pub fn roe<T: Real>(
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
    sm: &Smoothing,
) -> Result<[T; 4], Error> {
    let n = (frame.nx, frame.ny);
    let (lx, ly) = frame.tangent();
    let l = State::new(wl, n, gamma)?;
    let r = State::new(wr, n, gamma)?;

    let sl = l.rho.sqrt();
    let sr = r.rho.sqrt();
    let inv = T::cst(1.0) / (sl + sr);
    let u = (sl * l.u + sr * r.u) * inv;
    let v = (sl * l.v + sr * r.v) * inv;
    let h = (sl * (l.e + l.p) / l.rho + sr * (r.e + r.p) / r.rho) * inv;
    let rho = sl * sr;
    let kinetic = (u * u + v * v) * 0.5;
    let c2 = (h - kinetic) * (gamma - 1.0);
    if !(c2.value() > 0.0) {
        return Err(Error::RoeAverage { c2: c2.value() });
    }
    let c = c2.sqrt();
    let q = u * n.0 + v * n.1;
    let ql = u * lx + v * ly;

    let d_rho = r.rho - l.rho;
    let d_p = r.p - l.p;
    let d_q = r.q - l.q;
    let d_ql = (r.u * lx + r.v * ly) - (l.u * lx + l.v * ly);

    let a1 = (d_p - rho * c * d_q) / (c2 * 2.0);
    let a2 = d_rho - d_p / c2;
    let a3 = (d_p + rho * c * d_q) / (c2 * 2.0);
    let a4 = rho * d_ql;

    let k1 = sm.abs(q - c) * a1;
    let k2 = sm.abs(q) * a2;
    let k3 = sm.abs(q + c) * a3;
    let k4 = sm.abs(q) * a4;

    let diss = [
        k1 + k2 + k3,
        k1 * (u - c * n.0) + k2 * u + k3 * (u + c * n.0) + k4 * lx,
        k1 * (v - c * n.1) + k2 * v + k3 * (v + c * n.1) + k4 * ly,
        k1 * (h - q * c) + k2 * kinetic + k3 * (h + q * c) + k4 * ql,
    ];
    let fl = l.flux(n);
    let fr = r.flux(n);
    Ok(core::array::from_fn(|k| {
        (fl[k] + fr[k]) * 0.5 - diss[k] * 0.5
    }))
}

pub fn hll<T: Real>(
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
) -> Result<[T; 4], Error> {
    let n = (frame.nx, frame.ny);
    let l = State::new(wl, n, gamma)?;
    let r = State::new(wr, n, gamma)?;
    let s = speeds(&l, &r);
    check_fan(&s)?;
    if s.left.value() >= 0.0 {
        return Ok(l.flux(n));
    }
    if s.right.value() <= 0.0 {
        return Ok(r.flux(n));
    }
    let fl = l.flux(n);
    let fr = r.flux(n);
    let ul = l.cons();
    let ur = r.cons();
    let inv = T::cst(1.0) / (s.right - s.left);
    Ok(core::array::from_fn(|k| {
        (s.right * fl[k] - s.left * fr[k] + s.left * s.right * (ur[k] - ul[k])) * inv
    }))
}

fn hllc_star<T: Real>(k: &State<T>, s: T, s_star: T, n: (f64, f64)) -> [T; 4] {
    let factor = k.rho * (s - k.q) / (s - s_star);
    let dq = s_star - k.q;
    [
        factor,
        factor * (k.u + dq * n.0),
        factor * (k.v + dq * n.1),
        factor * (k.e / k.rho + dq * (s_star + k.p / (k.rho * (s - k.q)))),
    ]
}

pub fn hllc<T: Real>(
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
) -> Result<[T; 4], Error> {
    let n = (frame.nx, frame.ny);
    let l = State::new(wl, n, gamma)?;
    let r = State::new(wr, n, gamma)?;
    let s = speeds(&l, &r);
    check_fan(&s)?;
    if s.left.value() >= 0.0 {
        return Ok(l.flux(n));
    }
    if s.right.value() <= 0.0 {
        return Ok(r.flux(n));
    }
    let ml = l.rho * (s.left - l.q);
    let mr = r.rho * (s.right - r.q);
    let s_star = (r.p - l.p + ml * l.q - mr * r.q) / (ml - mr);
    let one = T::cst(1.0);
    if s_star.value() >= 0.0 {
        let star = hllc_star(&l, s.left, s_star, n);
        Ok(lincomb(l.flux(n), sub(star, l.cons()), one, s.left))
    } else {
        let star = hllc_star(&r, s.right, s_star, n);
        Ok(lincomb(r.flux(n), sub(star, r.cons()), one, s.right))
    }
}

/// One half of the van Leer splitting; `sign = +1` for `F⁺`, `−1` for `F⁻`.
fn van_leer_split<T: Real>(k: &State<T>, n: (f64, f64), gamma: f64, sign: f64) -> [T; 4] {
    let mach = k.q / k.c;
    if mach.value() >= 1.0 {
        return if sign > 0.0 {
            k.flux(n)
        } else {
            [T::cst(0.0); 4]
        };
    }
    if mach.value() <= -1.0 {
        return if sign > 0.0 {
            [T::cst(0.0); 4]
        } else {
            k.flux(n)
        };
    }
    let fm = k.rho * k.c * (mach + sign).powi2() * (0.25 * sign);
    let shift = (-k.q + k.c * (2.0 * sign)) / gamma;
    let tangential2 = k.u * k.u + k.v * k.v - k.q * k.q;
    let energy = (k.q * (gamma - 1.0) + k.c * (2.0 * sign)).powi2() / (2.0 * (gamma * gamma - 1.0))
        + tangential2 * 0.5;
    [
        fm,
        fm * (k.u + shift * n.0),
        fm * (k.v + shift * n.1),
        fm * energy,
    ]
}

pub fn van_leer<T: Real>(
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
) -> Result<[T; 4], Error> {
    let n = (frame.nx, frame.ny);
    let l = State::new(wl, n, gamma)?;
    let r = State::new(wr, n, gamma)?;
    let fp = van_leer_split(&l, n, gamma, 1.0);
    let fm = van_leer_split(&r, n, gamma, -1.0);
    Ok(core::array::from_fn(|k| fp[k] + fm[k]))
}

/// `F⁺(W)` and `F⁻(W)` of the van Leer splitting.
pub fn van_leer_parts(
    w: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<(Vec4, Vec4), Error> {
    let n = (frame.nx, frame.ny);
    let s = State::new(&to_arr(w), n, gas.gamma())?;
    Ok((
        Vec4::from(van_leer_split(&s, n, gas.gamma(), 1.0)),
        Vec4::from(van_leer_split(&s, n, gas.gamma(), -1.0)),
    ))
}

/// Generic dispatch over the solver.
pub fn flux_t<T: Real>(
    solver: FluxSolver,
    wl: &[T; 4],
    wr: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
    sm: &Smoothing,
) -> Result<[T; 4], Error> {
    match solver {
        FluxSolver::Roe => roe(wl, wr, frame, gamma, sm),
        FluxSolver::Hll => hll(wl, wr, frame, gamma),
        FluxSolver::Hllc => hllc(wl, wr, frame, gamma),
        FluxSolver::VanLeer => van_leer(wl, wr, frame, gamma),
    }
}

/// Flux as a function of the two conservative face states.
pub fn flux_of_cons<T: Real>(
    solver: FluxSolver,
    ul: &[T; 4],
    ur: &[T; 4],
    frame: &FaceFrame,
    gamma: f64,
    sm: &Smoothing,
) -> Result<[T; 4], Error> {
    let wl = prim_from_cons(ul, gamma)?;
    let wr = prim_from_cons(ur, gamma)?;
    flux_t(solver, &wl, &wr, frame, gamma, sm)
}

fn to_arr(w: &Primitive) -> [f64; 4] {
    [w.rho, w.u, w.v, w.p]
}

pub fn numerical_flux(
    solver: FluxSolver,
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
    sm: &Smoothing,
) -> Result<Vec4, Error> {
    flux_t(solver, &to_arr(wl), &to_arr(wr), frame, gas.gamma(), sm).map(Vec4::from)
}

pub fn roe_flux(
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
    sm: &Smoothing,
) -> Result<Vec4, Error> {
    numerical_flux(FluxSolver::Roe, wl, wr, frame, gas, sm)
}

pub fn hll_flux(
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<Vec4, Error> {
    numerical_flux(FluxSolver::Hll, wl, wr, frame, gas, &Smoothing::default())
}

pub fn hllc_flux(
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<Vec4, Error> {
    numerical_flux(FluxSolver::Hllc, wl, wr, frame, gas, &Smoothing::default())
}

pub fn van_leer_flux(
    wl: &Primitive,
    wr: &Primitive,
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<Vec4, Error> {
    numerical_flux(
        FluxSolver::VanLeer,
        wl,
        wr,
        frame,
        gas,
        &Smoothing::default(),
    )
}
