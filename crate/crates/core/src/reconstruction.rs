//! Face-state reconstruction.
//!
//! Every reconstruction used here is, once its nonlinear weights are fixed, a
//! linear combination of the six cell averages `i−2 ..= i+3` straddling the
//! face `i+1/2`. [`ReconPair`] keeps those weights so the stability module can
//! rebuild the frozen-weight linearization without redoing the reconstruction.

use crate::gas::{cons_to_prim, left_eigen_matrix, right_eigen_matrix};
use crate::{Conserved, Error, FaceFrame, GasModel, Mat4, Primitive, Vec4};
#[allow(unused_imports)]
use num_traits::Float;

/// Linear weights of the three-point substencils.
pub const LINEAR_WEIGHTS: [f64; 3] = [0.1, 0.6, 0.3];
/// Guard in the van Albada limiter.
pub const MUSCL_EPSILON: f64 = 1e-12;
pub const WENO_EPSILON: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    /// MUSCL with the van Albada limiter.
    Second,
    /// Five-point WENO.
    Fifth,
}

impl Order {
    pub fn as_number(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
            Order::Fifth => 5,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Order::First),
            2 => Some(Order::Second),
            5 => Some(Order::Fifth),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WenoVariant {
    /// Jiang–Shu weights.
    Js,
    /// Borges et al. WENO-Z weights.
    Z,
    /// Weights pinned to the linear weights: the upstream fifth-order linear
    /// scheme.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariableSpace {
    Conservative,
    Primitive,
    Characteristic,
}

/// State at which the characteristic projection of a face is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionAverage {
    Arithmetic,
    Roe,
}

/// Reduced reconstruction at flagged (shock-adjacent) faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NearShockCap {
    None,
    First,
    Second,
    /// The single smoothest three-point substencil (ENO selection).
    SmoothestThird,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconConfig {
    pub order: Order,
    pub variant: WenoVariant,
    pub space: VariableSpace,
    pub weno_epsilon: f64,
    pub cap: NearShockCap,
    pub projection: ProjectionAverage,
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            order: Order::Fifth,
            variant: WenoVariant::Z,
            space: VariableSpace::Primitive,
            weno_epsilon: WENO_EPSILON,
            cap: NearShockCap::None,
            projection: ProjectionAverage::Arithmetic,
        }
    }
}

impl ReconConfig {
    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_space(mut self, space: VariableSpace) -> Self {
        self.space = space;
        self
    }

    pub fn with_cap(mut self, cap: NearShockCap) -> Self {
        self.cap = cap;
        self
    }

    pub fn with_variant(mut self, variant: WenoVariant) -> Self {
        self.variant = variant;
        self
    }
}

/// Smoothness indicators of the three substencils of a five-point window
/// centred on cell `i` (window = cells `i−2 ..= i+2`).
pub fn smoothness_indicators(w: &[f64; 5]) -> [f64; 3] {
    let sq = |x: f64| x * x;
    let k = 13.0 / 12.0;
    [
        k * sq(w[0] - 2.0 * w[1] + w[2]) + 0.25 * sq(w[0] - 4.0 * w[1] + 3.0 * w[2]),
        k * sq(w[1] - 2.0 * w[2] + w[3]) + 0.25 * sq(w[1] - w[3]),
        k * sq(w[2] - 2.0 * w[3] + w[4]) + 0.25 * sq(3.0 * w[2] - 4.0 * w[3] + w[4]),
    ]
}

fn normalize(alpha: [f64; 3]) -> [f64; 3] {
    let sum = alpha[0] + alpha[1] + alpha[2];
    [alpha[0] / sum, alpha[1] / sum, alpha[2] / sum]
}

pub fn weights_js(beta: &[f64; 3], eps: f64) -> [f64; 3] {
    let d = LINEAR_WEIGHTS;
    normalize([
        d[0] / (beta[0] + eps).powi(2),
        d[1] / (beta[1] + eps).powi(2),
        d[2] / (beta[2] + eps).powi(2),
    ])
}

pub fn weights_z(beta: &[f64; 3], eps: f64) -> [f64; 3] {
    let d = LINEAR_WEIGHTS;
    let tau = (beta[0] - beta[2]).abs();
    normalize([
        d[0] * (1.0 + tau / (beta[0] + eps)),
        d[1] * (1.0 + tau / (beta[1] + eps)),
        d[2] * (1.0 + tau / (beta[2] + eps)),
    ])
}

/// One-hot weights selecting the substencil with the smallest indicator.
pub fn weights_eno(beta: &[f64; 3]) -> [f64; 3] {
    let mut best = 0;
    for m in 1..3 {
        if beta[m] < beta[best] {
            best = m;
        }
    }
    let mut w = [0.0; 3];
    w[best] = 1.0;
    w
}

/// Values at `i+1/2` of the three quadratic candidates.
pub fn candidate_values(w: &[f64; 5]) -> [f64; 3] {
    [
        w[0] / 3.0 - 7.0 / 6.0 * w[1] + 11.0 / 6.0 * w[2],
        -w[1] / 6.0 + 5.0 / 6.0 * w[2] + w[3] / 3.0,
        w[2] / 3.0 + 5.0 / 6.0 * w[3] - w[4] / 6.0,
    ]
}

fn nonlinear_weights(w: &[f64; 5], variant: WenoVariant, eps: f64) -> [f64; 3] {
    match variant {
        WenoVariant::Js => weights_js(&smoothness_indicators(w), eps),
        WenoVariant::Z => weights_z(&smoothness_indicators(w), eps),
        WenoVariant::Linear => LINEAR_WEIGHTS,
    }
}

fn combine(candidates: &[f64; 3], omega: &[f64; 3]) -> f64 {
    omega[0] * candidates[0] + omega[1] * candidates[1] + omega[2] * candidates[2]
}

/// Left state at face `i+1/2` from the window `i−2 ..= i+2`.
pub fn weno5_left_state(w: &[f64; 5], variant: WenoVariant, eps: f64) -> (f64, [f64; 3]) {
    let omega = nonlinear_weights(w, variant, eps);
    (combine(&candidate_values(w), &omega), omega)
}

/// Right state at face `i+1/2` from the window `i−1 ..= i+3` (given in
/// increasing cell order), obtained by mirroring the left reconstruction.
pub fn weno5_right_state(w: &[f64; 5], variant: WenoVariant, eps: f64) -> (f64, [f64; 3]) {
    weno5_left_state(&[w[4], w[3], w[2], w[1], w[0]], variant, eps)
}

/// Van Albada limited slope written as a convex blend of the backward and
/// forward differences; returns the blending weights `(w₋, w₊)`.
pub fn van_albada_weights(backward: f64, forward: f64) -> [f64; 2] {
    let b2 = backward * backward;
    let f2 = forward * forward;
    let denom = b2 + f2 + 2.0 * MUSCL_EPSILON;
    [(f2 + MUSCL_EPSILON) / denom, (b2 + MUSCL_EPSILON) / denom]
}

/// MUSCL left state at `i+1/2` from cells `(i−1, i, i+1)`.
pub fn muscl_left_state(w: &[f64; 3]) -> (f64, [f64; 2]) {
    let backward = w[1] - w[0];
    let forward = w[2] - w[1];
    let weights = van_albada_weights(backward, forward);
    (
        w[1] + 0.5 * (weights[0] * backward + weights[1] * forward),
        weights,
    )
}

pub fn first_order_left_state(w: &[f64; 1]) -> f64 {
    w[0]
}

/// Per-component weights that were used on one side of a face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SideWeights {
    First,
    Muscl([[f64; 2]; 4]),
    Weno([[f64; 3]; 4]),
}

impl SideWeights {
    pub fn order(&self) -> Order {
        match self {
            SideWeights::First => Order::First,
            SideWeights::Muscl(_) => Order::Second,
            SideWeights::Weno(_) => Order::Fifth,
        }
    }

    /// Coefficients, per component, of the six stencil cells for a *left*
    /// face state. Slot `s` is cell `i−2+s`.
    pub fn left_coefficients(&self) -> [Vec4; 6] {
        let mut c = [Vec4::zeros(); 6];
        match self {
            SideWeights::First => c[2] = Vec4::repeat(1.0),
            SideWeights::Muscl(w) => {
                for k in 0..4 {
                    let [wm, wp] = w[k];
                    c[1][k] = -0.5 * wm;
                    c[2][k] = 1.0 + 0.5 * wm - 0.5 * wp;
                    c[3][k] = 0.5 * wp;
                }
            }
            SideWeights::Weno(w) => {
                for k in 0..4 {
                    let [w0, w1, w2] = w[k];
                    c[0][k] = w0 / 3.0;
                    c[1][k] = -(7.0 * w0 + w1) / 6.0;
                    c[2][k] = (11.0 * w0 + 5.0 * w1 + 2.0 * w2) / 6.0;
                    c[3][k] = (2.0 * w1 + 5.0 * w2) / 6.0;
                    c[4][k] = -w2 / 6.0;
                }
            }
        }
        c
    }

    /// Same as [`left_coefficients`](Self::left_coefficients) for a *right*
    /// face state: the mirrored stencil.
    pub fn right_coefficients(&self) -> [Vec4; 6] {
        let mut c = self.left_coefficients();
        c.reverse();
        c
    }
}

/// Reconstructed face states and the frozen weights that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconPair {
    pub left: Primitive,
    pub right: Primitive,
    /// Space the linear combination acted in.
    pub space: VariableSpace,
    pub left_weights: SideWeights,
    pub right_weights: SideWeights,
    /// Left/right eigenvector matrices for characteristic reconstruction.
    pub projection: Option<(Mat4, Mat4)>,
    /// Set when a non-physical reconstructed state forced first order.
    pub fell_back: bool,
}

impl ReconPair {
    pub fn order(&self) -> Order {
        self.left_weights.order()
    }
}

fn to_space(
    u: &Conserved,
    space: VariableSpace,
    l: Option<&Mat4>,
    gas: &GasModel,
) -> Result<Vec4, Error> {
    match space {
        VariableSpace::Conservative => Ok(u.to_vec()),
        VariableSpace::Primitive => Ok(cons_to_prim(u, gas)?.to_vec()),
        VariableSpace::Characteristic => Ok(l.expect("projection") * u.to_vec()),
    }
}

fn from_space(
    x: &Vec4,
    space: VariableSpace,
    r: Option<&Mat4>,
    gas: &GasModel,
) -> Result<Primitive, Error> {
    match space {
        VariableSpace::Conservative => cons_to_prim(&Conserved::from_vec(x), gas),
        VariableSpace::Primitive => Primitive::from_vec(x).validate(),
        VariableSpace::Characteristic => {
            cons_to_prim(&Conserved::from_vec(&(r.expect("projection") * x)), gas)
        }
    }
}

fn roe_average(a: &Primitive, b: &Primitive, gas: &GasModel) -> Primitive {
    let sa = a.rho.sqrt();
    let sb = b.rho.sqrt();
    let wa = sa / (sa + sb);
    let wb = sb / (sa + sb);
    let u = wa * a.u + wb * b.u;
    let v = wa * a.v + wb * b.v;
    let h = wa * gas.enthalpy(a) + wb * gas.enthalpy(b);
    let rho = sa * sb;
    let c2 = (gas.gamma() - 1.0) * (h - 0.5 * (u * u + v * v));
    Primitive::new(rho, u, v, rho * c2 / gas.gamma())
}

/// Reconstructs the two states at a face from the six cells `i−2 ..= i+3`.
///
/// `capped` marks a shock-adjacent face, where `cfg.cap` replaces the
/// configured order.
pub fn reconstruct_face(
    cells: &[Conserved; 6],
    frame: &FaceFrame,
    cfg: &ReconConfig,
    capped: bool,
    gas: &GasModel,
) -> Result<ReconPair, Error> {
    let scheme = effective_scheme(cfg, capped);
    match reconstruct_with(cells, frame, cfg, scheme, gas) {
        Ok(pair) => Ok(pair),
        Err(Error::InvalidState { .. }) if scheme != Scheme::First => {
            let mut pair = reconstruct_with(cells, frame, cfg, Scheme::First, gas)?;
            pair.fell_back = true;
            Ok(pair)
        }
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    First,
    Muscl,
    Weno(WenoVariant),
    Eno,
}

fn effective_scheme(cfg: &ReconConfig, capped: bool) -> Scheme {
    let base = match cfg.order {
        Order::First => Scheme::First,
        Order::Second => Scheme::Muscl,
        Order::Fifth => Scheme::Weno(cfg.variant),
    };
    if !capped {
        return base;
    }
    match (cfg.cap, cfg.order) {
        (NearShockCap::None, _) | (_, Order::First) => base,
        (NearShockCap::First, _) => Scheme::First,
        (NearShockCap::Second, _) => Scheme::Muscl,
        (NearShockCap::SmoothestThird, Order::Second) => base,
        (NearShockCap::SmoothestThird, Order::Fifth) => Scheme::Eno,
    }
}

fn reconstruct_with(
    cells: &[Conserved; 6],
    frame: &FaceFrame,
    cfg: &ReconConfig,
    scheme: Scheme,
    gas: &GasModel,
) -> Result<ReconPair, Error> {
    let space = cfg.space;
    let projection = if space == VariableSpace::Characteristic {
        let a = cons_to_prim(&cells[2], gas)?;
        let b = cons_to_prim(&cells[3], gas)?;
        let avg = match cfg.projection {
            ProjectionAverage::Arithmetic => {
                Primitive::from_vec(&((a.to_vec() + b.to_vec()) * 0.5))
            }
            ProjectionAverage::Roe => roe_average(&a, &b, gas),
        };
        Some((
            left_eigen_matrix(&avg, frame, gas)?,
            right_eigen_matrix(&avg, frame, gas)?,
        ))
    } else {
        None
    };
    let l = projection.as_ref().map(|p| &p.0);
    let r = projection.as_ref().map(|p| &p.1);

    let mut x = [Vec4::zeros(); 6];
    for (slot, cell) in x.iter_mut().zip(cells) {
        *slot = to_space(cell, space, l, gas)?;
    }

    let mut xl = Vec4::zeros();
    let mut xr = Vec4::zeros();
    let (left_weights, right_weights) = match scheme {
        Scheme::First => {
            xl = x[2];
            xr = x[3];
            (SideWeights::First, SideWeights::First)
        }
        Scheme::Muscl => {
            let mut wl = [[0.0; 2]; 4];
            let mut wr = [[0.0; 2]; 4];
            for k in 0..4 {
                let (v, w) = muscl_left_state(&[x[1][k], x[2][k], x[3][k]]);
                xl[k] = v;
                wl[k] = w;
                let (v, w) = muscl_left_state(&[x[4][k], x[3][k], x[2][k]]);
                xr[k] = v;
                wr[k] = w;
            }
            (SideWeights::Muscl(wl), SideWeights::Muscl(wr))
        }
        Scheme::Weno(_) | Scheme::Eno => {
            let mut wl = [[0.0; 3]; 4];
            let mut wr = [[0.0; 3]; 4];
            for k in 0..4 {
                let left = [x[0][k], x[1][k], x[2][k], x[3][k], x[4][k]];
                let right = [x[5][k], x[4][k], x[3][k], x[2][k], x[1][k]];
                let (ol, or) = match scheme {
                    Scheme::Weno(variant) => (
                        nonlinear_weights(&left, variant, cfg.weno_epsilon),
                        nonlinear_weights(&right, variant, cfg.weno_epsilon),
                    ),
                    _ => (
                        weights_eno(&smoothness_indicators(&left)),
                        weights_eno(&smoothness_indicators(&right)),
                    ),
                };
                xl[k] = combine(&candidate_values(&left), &ol);
                xr[k] = combine(&candidate_values(&right), &or);
                wl[k] = ol;
                wr[k] = or;
            }
            (SideWeights::Weno(wl), SideWeights::Weno(wr))
        }
    };

    Ok(ReconPair {
        left: from_space(&xl, space, r, gas)?,
        right: from_space(&xr, space, r, gas)?,
        space,
        left_weights,
        right_weights,
        projection,
        fell_back: false,
    })
}

/// Primitive face state for pure first-order reconstruction; convenience for
/// callers that never need weights.
pub fn first_order_pair(
    left: &Conserved,
    right: &Conserved,
    space: VariableSpace,
    gas: &GasModel,
) -> Result<ReconPair, Error> {
    Ok(ReconPair {
        left: cons_to_prim(left, gas)?,
        right: cons_to_prim(right, gas)?,
        space,
        left_weights: SideWeights::First,
        right_weights: SideWeights::First,
        projection: None,
        fell_back: false,
    })
}
