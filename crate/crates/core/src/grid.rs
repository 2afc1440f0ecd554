//! Uniform periodic node grid on the torus [0, L)^d with central stencils.

use crate::error::{Error, Result};
use crate::tensor::check_dim;

/// Smallest admissible number of cells per axis.
pub const MIN_CELLS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub d: usize,
    pub n: usize,
    pub l: f64,
}

impl Grid {
    pub fn new(d: usize, n: usize, l: f64) -> Result<Self> {
        check_dim(d)?;
        if n < MIN_CELLS {
            return Err(Error::Grid(format!(
                "{n} cells per axis is too coarse for the stencils (need >= {MIN_CELLS})"
            )));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Grid(format!("domain length must be positive, got {l}")));
        }
        Ok(Grid { d, n, l })
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.d as i32)
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    /// Integer coordinates of a cell (axis-major: axis 0 varies slowest).
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for (a, ca) in c.iter_mut().enumerate().take(self.d) {
            *ca = (idx / self.stride(a)) % self.n;
        }
        c
    }

    pub fn index(&self, c: [usize; 3]) -> usize {
        (0..self.d).map(|a| c[a] * self.stride(a)).sum()
    }

    /// Physical position of a node.
    pub fn x(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let mut x = [0.0; 3];
        for a in 0..self.d {
            x[a] = c[a] as f64 * self.h();
        }
        x
    }

    /// Periodic neighbour along `axis`; `step` is +1 or -1.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, step: isize) -> usize {
        let s = self.stride(axis);
        let c = (idx / s) % self.n;
        if step > 0 {
            if c == self.n - 1 {
                idx + s - self.n * s
            } else {
                idx + s
            }
        } else if c == 0 {
            idx + self.n * s - s
        } else {
            idx - s
        }
    }

    /// Table `nb[axis][idx] = (minus, plus)`.
    pub fn neighbors(&self) -> Vec<Vec<(usize, usize)>> {
        (0..self.d)
            .map(|a| {
                (0..self.len())
                    .map(|i| (self.neighbor(i, a, -1), self.neighbor(i, a, 1)))
                    .collect()
            })
            .collect()
    }

    pub fn check_len(&self, f: &[f64], what: &str) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::GridMismatch(format!(
                "{what}: {} values on a grid of {} cells",
                f.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// Second-order central difference along `axis`.
    pub fn diff(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let inv = 0.5 / self.h();
        (0..self.len())
            .map(|i| (f[self.neighbor(i, axis, 1)] - f[self.neighbor(i, axis, -1)]) * inv)
            .collect()
    }

    /// Compact five/seven-point Laplacian.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let inv = 1.0 / (self.h() * self.h());
        (0..self.len())
            .map(|i| {
                (0..self.d)
                    .map(|a| f[self.neighbor(i, a, 1)] - 2.0 * f[i] + f[self.neighbor(i, a, -1)])
                    .sum::<f64>()
                    * inv
            })
            .collect()
    }

    /// Rectangle-rule integral (spectrally accurate for smooth periodic data).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    /// Injection from a grid refined by `factor`.
    pub fn restrict_from(&self, fine: &Grid, f: &[f64], factor: usize) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let c = self.coords(i);
                let mut cf = [0; 3];
                for a in 0..self.d {
                    cf[a] = c[a] * factor;
                }
                f[fine.index(cf)]
            })
            .collect()
    }
}

pub fn max_abs(f: &[f64]) -> f64 {
    f.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_coarse_and_bad_dims() {
        assert!(Grid::new(2, 4, 1.0).is_err());
        assert!(Grid::new(1, 16, 1.0).is_err());
        assert!(Grid::new(2, 16, 0.0).is_err());
    }

    #[test]
    fn index_roundtrip_and_wrap() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        for i in [0, 7, 63, 100, 511] {
            assert_eq!(g.index(g.coords(i)), i);
        }
        let i = g.index([7, 0, 3]);
        assert_eq!(g.coords(g.neighbor(i, 0, 1)), [0, 0, 3]);
        assert_eq!(g.coords(g.neighbor(i, 1, -1)), [7, 7, 3]);
    }

    #[test]
    fn central_difference_second_order() {
        let err = |n: usize| {
            let g = Grid::new(2, n, 1.0).unwrap();
            let f: Vec<f64> = (0..g.len()).map(|i| (2.0 * PI * g.x(i)[1]).sin()).collect();
            let df = g.diff(&f, 1);
            (0..g.len())
                .map(|i| (df[i] - 2.0 * PI * (2.0 * PI * g.x(i)[1]).cos()).abs())
                .fold(0.0, f64::max)
        };
        let rate = (err(16) / err(32)).log2();
        assert!((rate - 2.0).abs() < 0.1, "rate {rate}");
    }

    #[test]
    fn integral_of_constant() {
        let g = Grid::new(2, 10, 2.0).unwrap();
        assert!((g.integrate(&vec![1.5; g.len()]) - 6.0).abs() < 1e-12);
    }
}
