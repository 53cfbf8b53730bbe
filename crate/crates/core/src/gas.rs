//! Ideal-gas model for the two-dimensional Euler equations.
//!
//! State vectors come in three flavours: conservative `(ρ, ρu, ρv, ρe)`,
//! primitive `(ρ, u, v, p)` and characteristic amplitudes relative to a face
//! normal. Everything here is a pure function over small value types.

use crate::{Error, Mat4, Vec4};
#[allow(unused_imports)]
use num_traits::Float;

/// Calorically perfect gas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidGas { gamma });
        }
        Ok(Self { gamma })
    }

    /// Diatomic gas, γ = 1.4.
    pub fn air() -> Self {
        Self { gamma: 1.4 }
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn sound_speed(&self, w: &Primitive) -> f64 {
        (self.gamma * w.p / w.rho).sqrt()
    }

    /// Total specific enthalpy `H = (ρe + p)/ρ`.
    #[inline]
    pub fn enthalpy(&self, w: &Primitive) -> f64 {
        self.gamma / (self.gamma - 1.0) * w.p / w.rho + 0.5 * (w.u * w.u + w.v * w.v)
    }
}

impl Default for GasModel {
    fn default() -> Self {
        Self::air()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub rho: f64,
    pub rho_u: f64,
    pub rho_v: f64,
    pub rho_e: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
}

/// Characteristic amplitudes ordered as the rows of the left eigenvector
/// matrix: acoustic `q − c`, entropy `q`, acoustic `q + c`, shear `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic(pub Vec4);

impl Conserved {
    pub const fn new(rho: f64, rho_u: f64, rho_v: f64, rho_e: f64) -> Self {
        Self {
            rho,
            rho_u,
            rho_v,
            rho_e,
        }
    }

    #[inline]
    pub fn to_vec(self) -> Vec4 {
        Vec4::new(self.rho, self.rho_u, self.rho_v, self.rho_e)
    }

    #[inline]
    pub fn from_vec(v: &Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.rho.is_finite()
            && self.rho_u.is_finite()
            && self.rho_v.is_finite()
            && self.rho_e.is_finite()
    }
}

impl Primitive {
    pub const fn new(rho: f64, u: f64, v: f64, p: f64) -> Self {
        Self { rho, u, v, p }
    }

    #[inline]
    pub fn to_vec(self) -> Vec4 {
        Vec4::new(self.rho, self.u, self.v, self.p)
    }

    #[inline]
    pub fn from_vec(v: &Vec4) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn validate(self) -> Result<Self, Error> {
        if self.rho > 0.0
            && self.p > 0.0
            && self.u.is_finite()
            && self.v.is_finite()
            && self.p.is_finite()
        {
            Ok(self)
        } else {
            Err(Error::InvalidState {
                rho: self.rho,
                p: self.p,
                cell: None,
            })
        }
    }
}

/// Face orientation: unit normal `n` and the face length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceFrame {
    pub nx: f64,
    pub ny: f64,
    pub length: f64,
}

impl FaceFrame {
    /// Builds a frame from an arbitrary nonzero direction, normalizing it.
    pub fn new(nx: f64, ny: f64, length: f64) -> Self {
        let norm = (nx * nx + ny * ny).sqrt();
        Self {
            nx: nx / norm,
            ny: ny / norm,
            length,
        }
    }

    pub const fn x(length: f64) -> Self {
        Self {
            nx: 1.0,
            ny: 0.0,
            length,
        }
    }

    pub const fn y(length: f64) -> Self {
        Self {
            nx: 0.0,
            ny: 1.0,
            length,
        }
    }

    /// Tangent `ℓ = (−n_y, n_x)`.
    #[inline]
    pub fn tangent(&self) -> (f64, f64) {
        (-self.ny, self.nx)
    }

    #[inline]
    pub fn normal_velocity(&self, w: &Primitive) -> f64 {
        w.u * self.nx + w.v * self.ny
    }

    #[inline]
    pub fn tangential_velocity(&self, w: &Primitive) -> f64 {
        let (lx, ly) = self.tangent();
        w.u * lx + w.v * ly
    }
}

pub fn cons_to_prim(u: &Conserved, gas: &GasModel) -> Result<Primitive, Error> {
    if !(u.rho > 0.0) || !u.is_finite() {
        return Err(Error::InvalidState {
            rho: u.rho,
            p: f64::NAN,
            cell: None,
        });
    }
    let vx = u.rho_u / u.rho;
    let vy = u.rho_v / u.rho;
    let p = (gas.gamma() - 1.0) * (u.rho_e - 0.5 * u.rho * (vx * vx + vy * vy));
    Primitive::new(u.rho, vx, vy, p).validate()
}

pub fn prim_to_cons(w: &Primitive, gas: &GasModel) -> Conserved {
    let kinetic = 0.5 * w.rho * (w.u * w.u + w.v * w.v);
    Conserved::new(
        w.rho,
        w.rho * w.u,
        w.rho * w.v,
        w.p / (gas.gamma() - 1.0) + kinetic,
    )
}

/// Physical flux through a face with normal `frame`.
pub fn exact_flux(w: &Primitive, frame: &FaceFrame, gas: &GasModel) -> Vec4 {
    let q = frame.normal_velocity(w);
    let rho_e = w.p / (gas.gamma() - 1.0) + 0.5 * w.rho * (w.u * w.u + w.v * w.v);
    Vec4::new(
        w.rho * q,
        w.rho * q * w.u + w.p * frame.nx,
        w.rho * q * w.v + w.p * frame.ny,
        (rho_e + w.p) * q,
    )
}

/// Conservative flux from a conservative state.
pub fn exact_flux_cons(u: &Conserved, frame: &FaceFrame, gas: &GasModel) -> Result<Vec4, Error> {
    Ok(exact_flux(&cons_to_prim(u, gas)?, frame, gas))
}

/// `dU/dW`, the Jacobian of the primitive-to-conservative map.
pub fn du_dw(w: &Primitive, gas: &GasModel) -> Mat4 {
    let Primitive { rho, u, v, .. } = *w;
    Mat4::new(
        1.0,
        0.0,
        0.0,
        0.0,
        u,
        rho,
        0.0,
        0.0,
        v,
        0.0,
        rho,
        0.0,
        0.5 * (u * u + v * v),
        rho * u,
        rho * v,
        1.0 / (gas.gamma() - 1.0),
    )
}

/// `dW/dU`, the closed-form inverse of [`du_dw`].
pub fn dw_du(w: &Primitive, gas: &GasModel) -> Mat4 {
    let Primitive { rho, u, v, .. } = *w;
    let g1 = gas.gamma() - 1.0;
    Mat4::new(
        1.0,
        0.0,
        0.0,
        0.0,
        -u / rho,
        1.0 / rho,
        0.0,
        0.0,
        -v / rho,
        0.0,
        1.0 / rho,
        0.0,
        0.5 * g1 * (u * u + v * v),
        -g1 * u,
        -g1 * v,
        g1,
    )
}

/// Left eigenvector matrix of the face-normal flux Jacobian. Rows are
/// ordered (q − c, q, q + c, shear).
pub fn left_eigen_matrix(w: &Primitive, frame: &FaceFrame, gas: &GasModel) -> Result<Mat4, Error> {
    let c2 = gas.gamma() * w.p / w.rho;
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::InvalidState {
            rho: w.rho,
            p: w.p,
            cell: None,
        });
    }
    let c = c2.sqrt();
    let g1 = gas.gamma() - 1.0;
    let (nx, ny) = (frame.nx, frame.ny);
    let (lx, ly) = frame.tangent();
    let q = frame.normal_velocity(w);
    let ql = frame.tangential_velocity(w);
    let vel2 = w.u * w.u + w.v * w.v;
    let b = g1 / c2;
    Ok(Mat4::new(
        0.5 * (0.5 * b * vel2 + q / c),
        -0.5 * (b * w.u + nx / c),
        -0.5 * (b * w.v + ny / c),
        0.5 * b,
        1.0 - 0.5 * b * vel2,
        b * w.u,
        b * w.v,
        -b,
        0.5 * (0.5 * b * vel2 - q / c),
        -0.5 * (b * w.u - nx / c),
        -0.5 * (b * w.v - ny / c),
        0.5 * b,
        -ql,
        lx,
        ly,
        0.0,
    ))
}

/// Right eigenvector matrix, the closed-form inverse of [`left_eigen_matrix`].
pub fn right_eigen_matrix(w: &Primitive, frame: &FaceFrame, gas: &GasModel) -> Result<Mat4, Error> {
    let c2 = gas.gamma() * w.p / w.rho;
    if !(c2 > 0.0) || !c2.is_finite() {
        return Err(Error::InvalidState {
            rho: w.rho,
            p: w.p,
            cell: None,
        });
    }
    let c = c2.sqrt();
    let (nx, ny) = (frame.nx, frame.ny);
    let (lx, ly) = frame.tangent();
    let q = frame.normal_velocity(w);
    let ql = frame.tangential_velocity(w);
    let h = gas.enthalpy(w);
    let (u, v) = (w.u, w.v);
    Ok(Mat4::new(
        1.0,
        1.0,
        1.0,
        0.0,
        u - c * nx,
        u,
        u + c * nx,
        lx,
        v - c * ny,
        v,
        v + c * ny,
        ly,
        h - q * c,
        0.5 * (u * u + v * v),
        h + q * c,
        ql,
    ))
}

/// Analytic flux Jacobian `∂F/∂U` for the face normal.
pub fn analytic_flux_jacobian(
    u: &Conserved,
    frame: &FaceFrame,
    gas: &GasModel,
) -> Result<Mat4, Error> {
    let w = cons_to_prim(u, gas)?;
    let g = gas.gamma();
    let g1 = g - 1.0;
    let (nx, ny) = (frame.nx, frame.ny);
    let (vx, vy) = (w.u, w.v);
    let q = frame.normal_velocity(&w);
    let phi = 0.5 * g1 * (vx * vx + vy * vy);
    let h = gas.enthalpy(&w);
    Ok(Mat4::new(
        0.0,
        nx,
        ny,
        0.0,
        phi * nx - vx * q,
        q - (g - 2.0) * vx * nx,
        vx * ny - g1 * vy * nx,
        g1 * nx,
        phi * ny - vy * q,
        vy * nx - g1 * vx * ny,
        q - (g - 2.0) * vy * ny,
        g1 * ny,
        q * (phi - h),
        h * nx - g1 * vx * q,
        h * ny - g1 * vy * q,
        g * q,
    ))
}

/// Entropy function `s = ln(p / ρ^γ)`.
pub fn entropy(w: &Primitive, gas: &GasModel) -> f64 {
    (w.p / w.rho.powf(gas.gamma())).ln()
}

/// Normalized entropy rise `(s_m − s_l)/(s_r − s_l)` of a state `m` relative
/// to the upstream `l` and downstream `r` states.
pub fn relative_entropy_rise(
    m: &Primitive,
    l: &Primitive,
    r: &Primitive,
    gas: &GasModel,
) -> Result<f64, Error> {
    let sl = entropy(l, gas);
    let denom = entropy(r, gas) - sl;
    if denom.abs() < 1e-14 {
        return Err(Error::DegenerateShock);
    }
    Ok((entropy(m, gas) - sl) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_prim(rng: &mut ChaCha8Rng) -> Primitive {
        Primitive::new(
            rng.random_range(0.1..10.0),
            rng.random_range(-25.0..25.0),
            rng.random_range(-25.0..25.0),
            rng.random_range(0.1..500.0),
        )
    }

    fn random_frame(rng: &mut ChaCha8Rng) -> FaceFrame {
        let theta: f64 = rng.random_range(0.0..core::f64::consts::TAU);
        FaceFrame::new(theta.cos(), theta.sin(), 1.0)
    }

    #[test]
    fn zero_velocity_state_converts() {
        let gas = GasModel::air();
        let w = cons_to_prim(&Conserved::new(1.0, 0.0, 0.0, 2.5), &gas).unwrap();
        assert_relative_eq!(w.p, 1.0, epsilon = 1e-15);
        assert_eq!((w.rho, w.u, w.v), (1.0, 0.0, 0.0));
    }

    #[test]
    fn upstream_state_recovers_unit_pressure() {
        let gas = GasModel::air();
        // ρ = 1.4, u = 20, p = 1: ρe = 1/0.4 + 0.5·1.4·400 = 282.5
        let w = cons_to_prim(&Conserved::new(1.4, 28.0, 0.0, 282.5), &gas).unwrap();
        assert_relative_eq!(w.p, 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.u, 20.0, epsilon = 1e-14);
    }

    #[test]
    fn invalid_states_are_rejected() {
        let gas = GasModel::air();
        assert!(matches!(
            cons_to_prim(&Conserved::new(-1.0, 0.0, 0.0, 1.0), &gas),
            Err(Error::InvalidState { .. })
        ));
        assert!(cons_to_prim(&Conserved::new(1.0, 10.0, 0.0, 1.0), &gas).is_err());
        assert!(GasModel::new(1.0).is_err());
    }

    #[test]
    fn prim_cons_round_trip() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let w = random_prim(&mut rng);
            let u = prim_to_cons(&w, &gas);
            let back = prim_to_cons(&cons_to_prim(&u, &gas).unwrap(), &gas);
            for k in 0..4 {
                assert_relative_eq!(
                    back.to_vec()[k],
                    u.to_vec()[k],
                    max_relative = 1e-12,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn stationary_flux_is_pressure() {
        let gas = GasModel::air();
        let f = exact_flux(
            &Primitive::new(1.3, 0.0, 0.0, 2.0),
            &FaceFrame::x(1.0),
            &gas,
        );
        assert_eq!(f, Vec4::new(0.0, 2.0, 0.0, 0.0));
    }

    #[test]
    fn upstream_flux_by_hand() {
        let gas = GasModel::air();
        let f = exact_flux(
            &Primitive::new(1.4, 20.0, 0.0, 1.0),
            &FaceFrame::x(1.0),
            &gas,
        );
        // (ρe + p)u = (2.5 + 280 + 1)·20
        assert_relative_eq!(f[0], 28.0, epsilon = 1e-12);
        assert_relative_eq!(f[1], 561.0, epsilon = 1e-12);
        assert_eq!(f[2], 0.0);
        assert_relative_eq!(f[3], 5670.0, epsilon = 1e-10);
    }

    #[test]
    fn flux_is_symmetric_under_axis_swap() {
        let gas = GasModel::air();
        let w = Primitive::new(1.1, 3.0, -2.0, 4.0);
        let swapped = Primitive::new(1.1, -2.0, 3.0, 4.0);
        let fy = exact_flux(&w, &FaceFrame::y(1.0), &gas);
        let fx = exact_flux(&swapped, &FaceFrame::x(1.0), &gas);
        assert_relative_eq!(fy[0], fx[0]);
        assert_relative_eq!(fy[1], fx[2]);
        assert_relative_eq!(fy[2], fx[1]);
        assert_relative_eq!(fy[3], fx[3]);
    }

    #[test]
    fn flux_is_rotation_equivariant() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let w = random_prim(&mut rng);
            let frame = random_frame(&mut rng);
            let theta: f64 = rng.random_range(0.0..6.0);
            let (s, c) = theta.sin_cos();
            let rot = |x: f64, y: f64| (c * x - s * y, s * x + c * y);
            let (ru, rv) = rot(w.u, w.v);
            let (rnx, rny) = rot(frame.nx, frame.ny);
            let f = exact_flux(&w, &frame, &gas);
            let fr = exact_flux(
                &Primitive::new(w.rho, ru, rv, w.p),
                &FaceFrame::new(rnx, rny, 1.0),
                &gas,
            );
            let (m1, m2) = rot(f[1], f[2]);
            assert_relative_eq!(fr[0], f[0], max_relative = 1e-12, epsilon = 1e-10);
            assert_relative_eq!(fr[1], m1, max_relative = 1e-12, epsilon = 1e-10);
            assert_relative_eq!(fr[2], m2, max_relative = 1e-12, epsilon = 1e-10);
            assert_relative_eq!(fr[3], f[3], max_relative = 1e-12, epsilon = 1e-9);
        }
    }

    #[test]
    fn du_dw_entries() {
        let gas = GasModel::air();
        let m = du_dw(&Primitive::new(1.0, 0.0, 0.0, 1.0), &gas);
        let expected = Mat4::new(
            1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.5,
        );
        assert_relative_eq!(m, expected, epsilon = 1e-15);
        let m = du_dw(&Primitive::new(2.0, 3.0, 0.0, 1.0), &gas);
        assert_eq!(m[(1, 0)], 3.0);
        assert_eq!(m[(1, 1)], 2.0);
    }

    #[test]
    fn du_dw_matches_central_differences() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let w = random_prim(&mut rng);
            let m = du_dw(&w, &gas);
            for k in 0..4 {
                let h = 1e-6 * w.to_vec()[k].abs().max(1.0);
                let mut plus = w.to_vec();
                let mut minus = w.to_vec();
                plus[k] += h;
                minus[k] -= h;
                let d = (prim_to_cons(&Primitive::from_vec(&plus), &gas).to_vec()
                    - prim_to_cons(&Primitive::from_vec(&minus), &gas).to_vec())
                    / (2.0 * h);
                for r in 0..4 {
                    assert!((d[r] - m[(r, k)]).abs() < 1e-6, "entry ({r},{k})");
                }
            }
            let id = m * dw_du(&w, &gas);
            assert_relative_eq!(id, Mat4::identity(), epsilon = 1e-12);
        }
    }

    #[test]
    fn eigen_matrices_diagonalize_flux_jacobian() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let w = random_prim(&mut rng);
            let frame = random_frame(&mut rng);
            let l = left_eigen_matrix(&w, &frame, &gas).unwrap();
            let r = right_eigen_matrix(&w, &frame, &gas).unwrap();
            assert_relative_eq!(l * r, Mat4::identity(), epsilon = 1e-12);

            let a = analytic_flux_jacobian(&prim_to_cons(&w, &gas), &frame, &gas).unwrap();
            let d = l * a * r;
            let q = frame.normal_velocity(&w);
            let c = gas.sound_speed(&w);
            let expected = [q - c, q, q + c, q];
            let scale = q.abs() + c;
            for i in 0..4 {
                for j in 0..4 {
                    let target = if i == j { expected[i] } else { 0.0 };
                    assert!((d[(i, j)] - target).abs() < 1e-9 * scale, "L A R ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn shear_row_of_left_matrix() {
        let gas = GasModel::air();
        let w = Primitive::new(1.2, 2.0, -3.0, 1.5);
        let l = left_eigen_matrix(&w, &FaceFrame::x(1.0), &gas).unwrap();
        assert_eq!(
            [l[(3, 0)], l[(3, 1)], l[(3, 2)], l[(3, 3)]],
            [3.0, 0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn analytic_jacobian_matches_finite_differences() {
        let gas = GasModel::air();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..3 {
            let w = random_prim(&mut rng);
            let frame = random_frame(&mut rng);
            let u = prim_to_cons(&w, &gas);
            let a = analytic_flux_jacobian(&u, &frame, &gas).unwrap();
            for k in 0..4 {
                let h = 1e-6 * u.to_vec()[k].abs().max(1.0);
                let mut plus = u.to_vec();
                let mut minus = u.to_vec();
                plus[k] += h;
                minus[k] -= h;
                let fp = exact_flux_cons(&Conserved::from_vec(&plus), &frame, &gas).unwrap();
                let fm = exact_flux_cons(&Conserved::from_vec(&minus), &frame, &gas).unwrap();
                let d = (fp - fm) / (2.0 * h);
                for r in 0..4 {
                    assert!(
                        (d[r] - a[(r, k)]).abs() < 1e-6 * a[(r, k)].abs().max(1.0),
                        "entry ({r},{k})"
                    );
                }
            }
            let eig = a.complex_eigenvalues();
            let q = frame.normal_velocity(&w);
            let c = gas.sound_speed(&w);
            let mut re: alloc::vec::Vec<f64> = eig.iter().map(|z| z.re).collect();
            re.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let expected = [q - c, q, q, q + c];
            for (got, want) in re.iter().zip(expected) {
                assert!((got - want).abs() < 1e-7 * (q.abs() + c));
            }
        }
        let a = analytic_flux_jacobian(
            &Conserved::new(1.0, 0.0, 0.0, 2.5),
            &FaceFrame::x(1.0),
            &gas,
        )
        .unwrap();
        assert_eq!(
            [a[(0, 0)], a[(0, 1)], a[(0, 2)], a[(0, 3)]],
            [0.0, 1.0, 0.0, 0.0]
        );
    }

    #[test]
    fn entropy_jump_at_mach_20() {
        let gas = GasModel::air();
        let l = Primitive::new(1.4, 20.0, 0.0, 1.0);
        let f = 5.925925925925926;
        let r = Primitive::new(1.4 * f, 20.0 / f, 0.0, 466.5);
        let jump = entropy(&r, &gas) - entropy(&l, &gas);
        // ln(466.5) - 1.4 ln(160/27), evaluated in 30-digit arithmetic
        assert!((jump - 3.654_186_291_366).abs() < 1e-10, "jump = {jump}");
        assert_relative_eq!(relative_entropy_rise(&r, &l, &r, &gas).unwrap(), 1.0);
        assert_eq!(relative_entropy_rise(&l, &l, &r, &gas).unwrap(), 0.0);
        assert_eq!(
            relative_entropy_rise(&l, &l, &l, &gas),
            Err(Error::DegenerateShock)
        );
    }
}
