//! Null-Lagrangians of the deformation gradient and their discrete
//! divergence-free / transport properties.

use crate::error::{Error, Result};
use crate::grid::{max_abs, Grid};
use crate::tensor::{xi_len, Mat, Xi};

/// Even and odd permutations of (0, 1, 2) with their signs.
const PERMS: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([0, 2, 1], -1.0),
    ([2, 1, 0], -1.0),
    ([1, 0, 2], -1.0),
];

pub fn det(f: &Mat) -> f64 {
    if f.d() == 2 {
        f[(0, 0)] * f[(1, 1)] - f[(0, 1)] * f[(1, 0)]
    } else {
        let mut s = 0.0;
        for (p, sp) in PERMS {
            s += sp * f[(0, p[0])] * f[(1, p[1])] * f[(2, p[2])];
        }
        s
    }
}

/// Cofactor matrix, cof F = det(F) F^{-T} for invertible F.
pub fn cof(f: &Mat) -> Mat {
    if f.d() == 2 {
        let mut c = Mat::zeros(2);
        c[(0, 0)] = f[(1, 1)];
        c[(0, 1)] = -f[(1, 0)];
        c[(1, 0)] = -f[(0, 1)];
        c[(1, 1)] = f[(0, 0)];
        c
    } else {
        let mut c = Mat::zeros(3);
        for (p, sp) in PERMS {
            for (q, sq) in PERMS {
                c[(p[0], q[0])] += 0.5 * sp * sq * f[(p[1], q[1])] * f[(p[2], q[2])];
            }
        }
        c
    }
}

/// Φ(F) = (F, cof F, det F), or (F, det F) in 2D.
pub fn phi(f: &Mat) -> Xi {
    Xi::from_parts(f, &cof(f), det(f))
}

/// Jacobian ∂Φ^B/∂F_{iα}, row B, column i·d+α.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiJacobian {
    d: usize,
    j: [[f64; 9]; 19],
}

impl PhiJacobian {
    pub fn get(&self, b: usize, i: usize, a: usize) -> f64 {
        self.j[b][i * self.d + a]
    }

    /// Σ_B g_B ∂Φ^B/∂F — the Piola stress when g = ψ_ξ.
    pub fn contract(&self, g: &Xi) -> Mat {
        let d = self.d;
        let gs = g.as_slice();
        Mat::from_fn(d, |i, a| {
            gs.iter().enumerate().map(|(b, gb)| gb * self.j[b][i * d + a]).sum()
        })
    }

    /// Push-forward of a matrix direction: (∂Φ/∂F) : H.
    pub fn apply(&self, h: &Mat) -> Xi {
        let d = self.d;
        let hf = h.to_flat();
        let mut x = Xi::zeros(d);
        for b in 0..xi_len(d) {
            x[b] = (0..d * d).map(|k| self.j[b][k] * hf[k]).sum();
        }
        x
    }
}

pub fn dphi_df(f: &Mat) -> PhiJacobian {
    let d = f.d();
    let mut j = [[0.0; 9]; 19];
    for k in 0..d * d {
        j[k][k] = 1.0;
    }
    let c = cof(f);
    let wrow = xi_len(d) - 1;
    for i in 0..d {
        for a in 0..d {
            j[wrow][i * d + a] = c[(i, a)];
        }
    }
    if d == 3 {
        // ∂cof_{iα}/∂F_{mν} = ε_{imk} ε_{ανγ} F_{kγ}
        for (p, sp) in PERMS {
            for (q, sq) in PERMS {
                let (i, m, k) = (p[0], p[1], p[2]);
                let (a, nu, g) = (q[0], q[1], q[2]);
                j[9 + i * 3 + a][m * 3 + nu] += sp * sq * f[(k, g)];
            }
        }
    }
    PhiJacobian { d, j }
}

/// Σ_B g_B ∂²Φ^B/∂F_{iα}∂F_{mν}, as a d²×d² row-major table.
pub fn phi_second_contract(f: &Mat, g: &Xi) -> Vec<Vec<f64>> {
    let d = f.d();
    let mut out = vec![vec![0.0; d * d]; d * d];
    let gw = g.w();
    if d == 2 {
        // det F = F11 F22 - F12 F21
        out[0][3] += gw;
        out[3][0] += gw;
        out[1][2] -= gw;
        out[2][1] -= gw;
        return out;
    }
    let gz = g.zeta();
    for (p, sp) in PERMS {
        for (q, sq) in PERMS {
            let (i, m, k) = (p[0], p[1], p[2]);
            let (a, nu, ga) = (q[0], q[1], q[2]);
            // second derivative of det: ε_{imk} ε_{ανγ} F_{kγ}
            out[i * 3 + a][m * 3 + nu] += gw * sp * sq * f[(k, ga)];
            // second derivative of cof_{iα}: ε_{imk} ε_{ανγ}
            out[m * 3 + nu][k * 3 + ga] += gz[(i, a)] * sp * sq;
        }
    }
    out
}

/// A velocity field v(x) = L x + p(x) with p periodic; the linear part lets
/// affine motions live on the torus.
#[derive(Clone, Debug)]
pub struct VelocityField {
    pub linear: Mat,
    pub periodic: Vec<[f64; 3]>,
}

impl VelocityField {
    pub fn periodic(d: usize, p: Vec<[f64; 3]>) -> Self {
        VelocityField { linear: Mat::zeros(d), periodic: p }
    }

    /// Velocity at the node `idx` displaced by `shift` cells along `axis`,
    /// with the linear part evaluated at the unwrapped position.
    fn value(&self, grid: &Grid, idx: usize, axis: usize, shift: isize) -> [f64; 3] {
        let d = grid.d;
        let mut x = grid.x(idx);
        x[axis] += shift as f64 * grid.h();
        let j = if shift == 0 { idx } else { grid.neighbor(idx, axis, shift) };
        let mut v = self.periodic[j];
        for i in 0..d {
            for a in 0..d {
                v[i] += self.linear[(i, a)] * x[a];
            }
        }
        v
    }
}

/// Deformation gradient field F = A + ∇_h u from an affine part and a
/// periodic displacement, using central differences.
pub fn gradient_field(grid: &Grid, affine: &Mat, displacement: &[[f64; 3]]) -> Result<Vec<Mat>> {
    if displacement.len() != grid.len() {
        return Err(Error::GridMismatch("displacement length".into()));
    }
    let d = grid.d;
    let comps: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|i| {
            let ui: Vec<f64> = displacement.iter().map(|u| u[i]).collect();
            (0..d).map(|a| grid.diff(&ui, a)).collect()
        })
        .collect();
    Ok((0..grid.len())
        .map(|c| *affine + Mat::from_fn(d, |i, a| comps[i][a][c]))
        .collect())
}

fn mat_component(f: &[Mat], i: usize, a: usize) -> Vec<f64> {
    f.iter().map(|m| m[(i, a)]).collect()
}

/// max |D_α F_{iβ} − D_β F_{iα}| — zero for discrete gradients.
pub fn curl_residual(grid: &Grid, f: &[Mat]) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch("F field length".into()));
    }
    let d = grid.d;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for a in 0..d {
            for b in (a + 1)..d {
                let dab = grid.diff(&mat_component(f, i, b), a);
                let dba = grid.diff(&mat_component(f, i, a), b);
                for c in 0..grid.len() {
                    worst = worst.max((dab[c] - dba[c]).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn gradient_magnitude(grid: &Grid, f: &[Mat]) -> f64 {
    let d = grid.d;
    let mut g: f64 = 0.0;
    for i in 0..d {
        for b in 0..d {
            let comp = mat_component(f, i, b);
            for a in 0..d {
                g = g.max(max_abs(&grid.diff(&comp, a)));
            }
        }
    }
    g
}

/// max over B, i, cells of |Σ_α D_α(∂Φ^B/∂F_{iα}(F))|.
pub fn null_lagrangian_residual(grid: &Grid, f: &[Mat]) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch("F field length".into()));
    }
    let d = grid.d;
    let jac: Vec<PhiJacobian> = f.iter().map(dphi_df).collect();
    let mut worst: f64 = 0.0;
    for b in 0..xi_len(d) {
        for i in 0..d {
            let mut div = vec![0.0; grid.len()];
            for a in 0..d {
                let comp: Vec<f64> = jac.iter().map(|j| j.get(b, i, a)).collect();
                for (s, x) in div.iter_mut().zip(grid.diff(&comp, a)) {
                    *s += x;
                }
            }
            worst = worst.max(max_abs(&div));
        }
    }
    Ok(worst)
}

/// Residual of ∂_tΦ(F) − ∂_α(∂Φ/∂F_{iα}(F) v_i), split by slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportResidual {
    pub f_slot: f64,
    pub cof_slot: f64,
    pub det_slot: f64,
}

impl TransportResidual {
    pub fn max(&self) -> f64 {
        self.f_slot.max(self.cof_slot).max(self.det_slot)
    }
}

/// Relative curl above which a field is rejected as not a gradient.
pub const CURL_TOLERANCE: f64 = 0.1;

/// Transport residual at the middle of three equally spaced time levels
/// `f_path = [F(t−dt), F(t), F(t+dt)]` with velocity v(t).
pub fn transport_residual(
    grid: &Grid,
    f_path: &[Vec<Mat>; 3],
    v: &VelocityField,
    dt: f64,
) -> Result<TransportResidual> {
    for f in f_path {
        if f.len() != grid.len() {
            return Err(Error::GridMismatch("F field length".into()));
        }
    }
    if v.periodic.len() != grid.len() {
        return Err(Error::GridMismatch("velocity field length".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let curl = curl_residual(grid, &f_path[1])?;
    let grad = gradient_magnitude(grid, &f_path[1]);
    if curl > CURL_TOLERANCE * grad + 1e-12 {
        return Err(Error::NotAGradient {
            relative_curl: curl / grad.max(f64::MIN_POSITIVE),
        });
    }

    let d = grid.d;
    let m = xi_len(d);
    let h = grid.h();
    let mut res = vec![0.0f64; m];
    let phi_prev: Vec<Xi> = f_path[0].iter().map(phi).collect();
    let phi_next: Vec<Xi> = f_path[2].iter().map(phi).collect();
    let jac: Vec<PhiJacobian> = f_path[1].iter().map(dphi_df).collect();
    for c in 0..grid.len() {
        for (b, rb) in res.iter_mut().enumerate() {
            let mut r = (phi_next[c][b] - phi_prev[c][b]) / (2.0 * dt);
            for a in 0..d {
                let (cp, cm) = (grid.neighbor(c, a, 1), grid.neighbor(c, a, -1));
                let vp = v.value(grid, c, a, 1);
                let vm = v.value(grid, c, a, -1);
                let mut flux = 0.0;
                for i in 0..d {
                    flux += jac[cp].get(b, i, a) * vp[i] - jac[cm].get(b, i, a) * vm[i];
                }
                r -= flux / (2.0 * h);
            }
            *rb = (*rb).max(r.abs());
        }
    }
    let f_slot = res[..d * d].iter().cloned().fold(0.0, f64::max);
    let cof_slot = if d == 3 { res[9..18].iter().cloned().fold(0.0, f64::max) } else { 0.0 };
    Ok(TransportResidual { f_slot, cof_slot, det_slot: res[m - 1] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(d: usize, seed: u64) -> Mat {
        // cheap deterministic pseudo-random entries
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Mat::from_fn(d, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
        })
    }

    #[test]
    fn cofactor_identity_3d() {
        for seed in 0..20 {
            let f = sample(3, seed);
            let c = cof(&f);
            let prod = f.transpose().matmul(&c);
            let dt = det(&f);
            for i in 0..3 {
                for a in 0..3 {
                    let e = if i == a { dt } else { 0.0 };
                    assert!((prod[(i, a)] - e).abs() < 1e-12);
                }
            }
            assert!((c.dot(&f) / 3.0 - dt).abs() < 1e-12);
        }
    }

    #[test]
    fn cofactor_2d() {
        let f = Mat::from_flat(2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(cof(&f).to_flat(), vec![4.0, -3.0, -2.0, 1.0]);
        assert_eq!(det(&f), -2.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for d in [2, 3] {
            let f = sample(d, 7);
            let j = dphi_df(&f);
            let eps = 1e-6;
            for k in 0..d * d {
                let mut fp = f.to_flat();
                let mut fm = f.to_flat();
                fp[k] += eps;
                fm[k] -= eps;
                let (pp, pm) = (phi(&Mat::from_flat(d, &fp)), phi(&Mat::from_flat(d, &fm)));
                for b in 0..xi_len(d) {
                    let fd = (pp[b] - pm[b]) / (2.0 * eps);
                    assert!((fd - j.get(b, k / d, k % d)).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        for d in [2, 3] {
            let f = sample(d, 3);
            let mut g = Xi::zeros(d);
            for b in 0..xi_len(d) {
                g[b] = 0.1 * b as f64 - 0.4;
            }
            let h2 = phi_second_contract(&f, &g);
            let eps = 1e-6;
            for k in 0..d * d {
                let mut fp = f.to_flat();
                let mut fm = f.to_flat();
                fp[k] += eps;
                fm[k] -= eps;
                let sp = dphi_df(&Mat::from_flat(d, &fp)).contract(&g).to_flat();
                let sm = dphi_df(&Mat::from_flat(d, &fm)).contract(&g).to_flat();
                for l in 0..d * d {
                    let fd = (sp[l] - sm[l]) / (2.0 * eps);
                    assert!((fd - h2[l][k]).abs() < 1e-7, "d={d} l={l} k={k}");
                }
            }
        }
    }

    #[test]
    fn non_gradient_is_rejected() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f: Vec<Mat> = (0..g.len())
            .map(|c| {
                let x = g.x(c);
                let mut m = Mat::identity(2);
                m[(0, 0)] += 0.3 * (2.0 * std::f64::consts::PI * x[1]).sin();
                m
            })
            .collect();
        let v = VelocityField::periodic(2, vec![[0.0; 3]; g.len()]);
        let path = [f.clone(), f.clone(), f];
        assert!(matches!(
            transport_residual(&g, &path, &v, 0.01),
            Err(Error::NotAGradient { .. })
        ));
    }
}


