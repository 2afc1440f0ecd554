//! Small fixed-size tensors: deformation-gradient-like matrices and the
//! null-Lagrangian vector.

use crate::error::{Error, Result};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// Validate a spatial dimension.
pub fn check_dim(d: usize) -> Result<()> {
    if d == 2 || d == 3 {
        Ok(())
    } else {
        Err(Error::Dimension(d))
    }
}

/// Length of the null-Lagrangian vector: (F, det F) in 2D, (F, cof F, det F) in 3D.
pub fn xi_len(d: usize) -> usize {
    if d == 2 {
        5
    } else {
        19
    }
}

/// A d×d matrix stored in a 3×3 array. `m[(i, a)]`: first index spatial,
/// second referential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat {
    d: usize,
    e: [[f64; 3]; 3],
}

impl Mat {
    pub fn zeros(d: usize) -> Self {
        Mat { d, e: [[0.0; 3]; 3] }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            m.e[i][i] = 1.0;
        }
        m
    }

    pub fn from_fn(d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(d);
        for i in 0..d {
            for a in 0..d {
                m.e[i][a] = f(i, a);
            }
        }
        m
    }

    /// Row-major flat slice of length d².
    pub fn from_flat(d: usize, v: &[f64]) -> Self {
        Mat::from_fn(d, |i, a| v[i * d + a])
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.d * self.d);
        for i in 0..self.d {
            for a in 0..self.d {
                v.push(self.e[i][a]);
            }
        }
        v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.d, |i, a| self.e[a][i])
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat::from_fn(self.d, |i, a| s * self.e[i][a])
    }

    /// Frobenius inner product.
    pub fn dot(&self, o: &Mat) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            for a in 0..self.d {
                s += self.e[i][a] * o.e[i][a];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn matmul(&self, o: &Mat) -> Mat {
        Mat::from_fn(self.d, |i, a| (0..self.d).map(|k| self.e[i][k] * o.e[k][a]).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_flat().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, a): (usize, usize)) -> &f64 {
        &self.e[i][a]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, a): (usize, usize)) -> &mut f64 {
        &mut self.e[i][a]
    }
}

impl Add for Mat {
    type Output = Mat;
    fn add(self, o: Mat) -> Mat {
        Mat::from_fn(self.d, |i, a| self.e[i][a] + o.e[i][a])
    }
}

impl Sub for Mat {
    type Output = Mat;
    fn sub(self, o: Mat) -> Mat {
        Mat::from_fn(self.d, |i, a| self.e[i][a] - o.e[i][a])
    }
}

impl Mul<f64> for Mat {
    type Output = Mat;
    fn mul(self, s: f64) -> Mat {
        self.scale(s)
    }
}

/// Null-Lagrangian vector ξ = (F, ζ, w), or (F, w) in 2D. Also used for
/// covectors such as ∂ψ/∂ξ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Xi {
    d: usize,
    c: [f64; 19],
}

impl Xi {
    pub fn zeros(d: usize) -> Self {
        Xi { d, c: [0.0; 19] }
    }

    pub fn from_slice(d: usize, s: &[f64]) -> Self {
        let mut x = Xi::zeros(d);
        x.c[..xi_len(d)].copy_from_slice(&s[..xi_len(d)]);
        x
    }

    /// Assemble from parts; `zeta` is ignored in 2D.
    pub fn from_parts(f: &Mat, zeta: &Mat, w: f64) -> Self {
        let d = f.d();
        let mut x = Xi::zeros(d);
        x.set_f(f);
        if d == 3 {
            x.set_zeta(zeta);
        }
        x.set_w(w);
        x
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        xi_len(self.d)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c[..xi_len(self.d)]
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        let n = xi_len(self.d);
        &mut self.c[..n]
    }

    pub fn f(&self) -> Mat {
        Mat::from_flat(self.d, &self.c[..self.d * self.d])
    }

    /// Cofactor slot; zero matrix in 2D.
    pub fn zeta(&self) -> Mat {
        if self.d == 3 {
            Mat::from_flat(3, &self.c[9..18])
        } else {
            Mat::zeros(2)
        }
    }

    pub fn w(&self) -> f64 {
        self.c[xi_len(self.d) - 1]
    }

    pub fn set_f(&mut self, f: &Mat) {
        let d = self.d;
        self.c[..d * d].copy_from_slice(&f.to_flat());
    }

    pub fn set_zeta(&mut self, z: &Mat) {
        if self.d == 3 {
            self.c[9..18].copy_from_slice(&z.to_flat());
        }
    }

    pub fn set_w(&mut self, w: f64) {
        let n = xi_len(self.d);
        self.c[n - 1] = w;
    }

    pub fn dot(&self, o: &Xi) -> f64 {
        self.as_slice().iter().zip(o.as_slice()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Xi {
        let mut x = *self;
        x.as_mut_slice().iter_mut().for_each(|v| *v *= s);
        x
    }
}

impl Index<usize> for Xi {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.as_slice()[k]
    }
}

impl IndexMut<usize> for Xi {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.as_mut_slice()[k]
    }
}

impl Add for Xi {
    type Output = Xi;
    fn add(self, o: Xi) -> Xi {
        let mut x = self;
        x.as_mut_slice().iter_mut().zip(o.as_slice()).for_each(|(a, b)| *a += b);
        x
    }
}

impl Sub for Xi {
    type Output = Xi;
    fn sub(self, o: Xi) -> Xi {
        let mut x = self;
        x.as_mut_slice().iter_mut().zip(o.as_slice()).for_each(|(a, b)| *a -= b);
        x
    }
}

/// Thermodynamic state at a point: U = (ξ, v, θ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoState {
    pub xi: Xi,
    pub v: [f64; 3],
    pub theta: f64,
}

impl ThermoState {
    pub fn d(&self) -> usize {
        self.xi.d()
    }

    /// Rest state with F = I and consistent cofactor/determinant.
    pub fn rest(d: usize, theta: f64) -> Self {
        let id = Mat::identity(d);
        ThermoState {
            xi: Xi::from_parts(&id, &id, 1.0),
            v: [0.0; 3],
            theta,
        }
    }

    /// Flat state vector (ξ, v, θ) of length n.
    pub fn pack(&self) -> Vec<f64> {
        let d = self.d();
        let mut u = self.xi.as_slice().to_vec();
        u.extend_from_slice(&self.v[..d]);
        u.push(self.theta);
        u
    }

    pub fn unpack(d: usize, u: &[f64]) -> Self {
        let m = xi_len(d);
        let mut v = [0.0; 3];
        v[..d].copy_from_slice(&u[m..m + d]);
        ThermoState {
            xi: Xi::from_slice(d, u),
            v,
            theta: u[m + d],
        }
    }

    pub fn speed2(&self) -> f64 {
        self.v[..self.d()].iter().map(|x| x * x).sum()
    }
}

/// Dimension of the augmented state: 8 in 2D, 23 in 3D.
pub fn state_len(d: usize) -> usize {
    xi_len(d) + d + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(xi_len(2), 5);
        assert_eq!(xi_len(3), 19);
        assert_eq!(state_len(2), 8);
        assert_eq!(state_len(3), 23);
        assert!(check_dim(4).is_err());
    }

    #[test]
    fn pack_roundtrip() {
        let mut s = ThermoState::rest(3, 1.3);
        s.v = [0.1, -0.2, 0.3];
        s.xi[10] = 4.0;
        let u = s.pack();
        assert_eq!(u.len(), 23);
        assert_eq!(ThermoState::unpack(3, &u), s);
    }

    #[test]
    fn slots() {
        let f = Mat::from_fn(3, |i, a| (i * 3 + a) as f64);
        let z = f.transpose();
        let x = Xi::from_parts(&f, &z, 7.0);
        assert_eq!(x.f(), f);
        assert_eq!(x.zeta(), z);
        assert_eq!(x.w(), 7.0);
        assert_eq!(x[5], 5.0);
    }
}
