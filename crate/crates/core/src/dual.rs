//! Minimal scalar abstraction and forward-mode dual numbers.
//!
//! The interface fluxes are written once over [`Real`] so the same code
//! evaluates in `f64` and in [`Dual`], which carries `N` directional
//! derivatives alongside the value and yields flux Jacobians free of
//! truncation and cancellation error.

use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_traits::Float;

pub trait Real:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
{
    fn cst(x: f64) -> Self;
    fn value(self) -> f64;
    fn sqrt(self) -> Self;

    fn abs(self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other.value() < self.value() {
            other
        } else {
            self
        }
    }

    fn max(self, other: Self) -> Self {
        if other.value() > self.value() {
            other
        } else {
            self
        }
    }

    fn powi2(self) -> Self {
        self * self
    }

    fn is_finite(self) -> bool;
}

impl Real for f64 {
    #[inline]
    fn cst(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        Float::abs(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        Float::is_finite(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub du: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(re: f64) -> Self {
        Self { re, du: [0.0; N] }
    }

    /// Independent variable number `k`.
    pub fn variable(re: f64, k: usize) -> Self {
        let mut du = [0.0; N];
        du[k] = 1.0;
        Self { re, du }
    }

    #[inline]
    fn map(self, f: f64, df: f64) -> Self {
        let mut du = self.du;
        for d in &mut du {
            *d *= df;
        }
        Self { re: f, du }
    }
}

impl<const N: usize> PartialOrd for Dual<N> {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        self.re.partial_cmp(&other.re)
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.re += rhs.re;
        for k in 0..N {
            self.du[k] += rhs.du[k];
        }
        self
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= rhs.re;
        for k in 0..N {
            self.du[k] -= rhs.du[k];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)] // product rule
    fn mul(self, rhs: Self) -> Self {
        let du = core::array::from_fn(|k| self.du[k] * rhs.re + self.re * rhs.du[k]);
        Self {
            re: self.re * rhs.re,
            du,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let du = core::array::from_fn(|k| (self.du[k] - re * rhs.du[k]) * inv);
        Self { re, du }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.map(-self.re, -1.0)
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: f64) -> Self {
        self.re += rhs;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: f64) -> Self {
        self.re -= rhs;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        self.map(self.re * rhs, rhs)
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: f64) -> Self {
        self.map(self.re / rhs, 1.0 / rhs)
    }
}

impl<const N: usize> Real for Dual<N> {
    fn cst(x: f64) -> Self {
        Self::constant(x)
    }

    fn value(self) -> f64 {
        self.re
    }

    fn sqrt(self) -> Self {
        let s = Float::sqrt(self.re);
        self.map(s, 0.5 / s)
    }

    fn is_finite(self) -> bool {
        Float::is_finite(self.re) && self.du.iter().all(|d| Float::is_finite(*d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type D2 = Dual<2>;

    #[test]
    fn product_and_quotient_rules() {
        let x = D2::variable(3.0, 0);
        let y = D2::variable(2.0, 1);
        let f = x * y / (x + y) + x.sqrt() * 2.0 - 1.0;
        let ex = y.re * y.re / (x.re + y.re).powi(2) + 1.0 / x.re.sqrt();
        let ey = x.re * x.re / (x.re + y.re).powi(2);
        assert_relative_eq!(f.du[0], ex, epsilon = 1e-14);
        assert_relative_eq!(f.du[1], ey, epsilon = 1e-14);
    }

    #[test]
    fn abs_min_max_follow_the_selected_branch() {
        let x = D2::variable(-2.0, 0);
        assert_eq!(x.abs().du, [-1.0, 0.0]);
        let y = D2::variable(1.0, 1);
        assert_eq!(x.min(y).du, x.du);
        assert_eq!(x.max(y).du, y.du);
        assert!(!D2::constant(f64::NAN).is_finite());
    }
}
