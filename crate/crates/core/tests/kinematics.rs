use polytherm::grid::Grid;
use polytherm::kinematics::*;
use polytherm::tensor::{xi_len, Mat};
use proptest::prelude::*;

fn mat(d: usize, v: &[f64]) -> Mat {
    Mat::from_fn(d, |i, a| v[i * d + a])
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 { 1.0 } else { -1.0 }
}

/// Leibniz sum over all permutations.
fn det_leibniz(f: &Mat) -> f64 {
    let d = f.d();
    permutations(d).iter().map(|p| sign(p) * (0..d).map(|i| f[(i, p[i])]).product::<f64>()).sum()
}

/// Signed minors: cof(F)_{iα} = (−1)^{i+α} det(F without row i, column α).
fn cof_by_minors(f: &Mat) -> Mat {
    let d = f.d();
    Mat::from_fn(d, |i, a| {
        if d == 2 {
            let s = if (i + a) % 2 == 0 { 1.0 } else { -1.0 };
            return s * f[(1 - i, 1 - a)];
        }
        let rows: Vec<usize> = (0..3).filter(|r| *r != i).collect();
        let cols: Vec<usize> = (0..3).filter(|c| *c != a).collect();
        let m = f[(rows[0], cols[0])] * f[(rows[1], cols[1])] - f[(rows[0], cols[1])] * f[(rows[1], cols[0])];
        if (i + a) % 2 == 0 { m } else { -m }
    })
}

fn entries(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, d * d)
}

proptest! {
    #[test]
    fn cofactor_transpose_identity(d in 2usize..=3, v in entries(3)) {
        let f = mat(d, &v);
        let lhs = f.transpose().matmul(&cof(&f));
        let rhs = Mat::identity(d).scale(det(&f));
        prop_assert!((lhs - rhs).max_abs() <= 1e-12 * f.norm().powi(d as i32).max(1.0));
    }

    #[test]
    fn det_of_cofactor(d in 2usize..=3, v in entries(3)) {
        let f = mat(d, &v);
        let lhs = det(&cof(&f));
        let rhs = det(&f).powi(d as i32 - 1);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * f.norm().powi((d * (d - 1)) as i32).max(1.0));
    }

    #[test]
    fn det_matches_permutation_sum(d in 2usize..=3, v in entries(3)) {
        let f = mat(d, &v);
        prop_assert!((det(&f) - det_leibniz(&f)).abs() <= 1e-12 * f.norm().powi(d as i32).max(1.0));
    }

    #[test]
    fn cofactor_matches_row_expansion(d in 2usize..=3, v in entries(3)) {
        let f = mat(d, &v);
        prop_assert!((cof(&f) - cof_by_minors(&f)).max_abs() <= 1e-12 * f.norm().powi(d as i32 - 1).max(1.0));
    }

    #[test]
    fn phi_jacobian_second_order(d in 2usize..=3, v in entries(3)) {
        let f = mat(d, &v);
        let jac = dphi_df(&f);
        let scale = jac_scale(&f);
        for h in [1e-4, 1e-5] {
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for a in 0..d {
                    let mut fp = f;
                    let mut fm = f;
                    fp[(i, a)] += h;
                    fm[(i, a)] -= h;
                    let (pp, pm) = (phi(&fp), phi(&fm));
                    for b in 0..xi_len(d) {
                        let fd = (pp[b] - pm[b]) / (2.0 * h);
                        worst = worst.max((jac.get(b, i, a) - fd).abs());
                    }
                }
            }
            prop_assert!(worst <= 10.0 * h * h * scale, "h = {h}: {worst:e}");
        }
    }
}

fn jac_scale(f: &Mat) -> f64 {
    f.norm().max(1.0)
}

#[test]
fn phi_of_diagonal() {
    let f = Mat::from_fn(3, |i, a| if i == a { (i + 1) as f64 } else { 0.0 });
    let x = phi(&f);
    assert_eq!(x.f(), f);
    assert_eq!(x.zeta(), Mat::from_fn(3, |i, a| if i == a { [6.0, 3.0, 2.0][i] } else { 0.0 }));
    assert_eq!(x.w(), 6.0);
}

/// y = (I + tM)X: F is constant in space and v = MX is linear, so central
/// differences in space are exact. Φ(I + tM) is a polynomial of degree d in t;
/// the three-point time derivative is exact up to degree 2 and misses the
/// cubic det term by exactly dt²·det M.
#[test]
fn linear_motion_leaves_only_time_error() {
    let m3 = Mat::from_fn(3, |i, a| [[0.1, 0.2, -0.1], [0.05, -0.2, 0.3], [0.2, 0.1, 0.15]][i][a]);
    for d in [2, 3] {
        let m = Mat::from_fn(d, |i, a| m3[(i, a)]);
        let grid = Grid::new(d, 8, 1.0).unwrap();
        let (t, dt) = (0.3, 0.01);
        let field = |s: f64| vec![Mat::identity(d) + m.scale(s); grid.len()];
        let path = [field(t - dt), field(t), field(t + dt)];
        let vel = VelocityField { linear: m, periodic: vec![[0.0; 3]; grid.len()] };
        let r = transport_residual(&grid, &path, &vel, dt).unwrap();
        assert!(r.f_slot <= 1e-13, "d={d}: {r:?}");
        assert!(r.cof_slot <= 1e-12, "d={d}: {r:?}");
        let expected = if d == 3 { dt * dt * det(&m).abs() } else { 0.0 };
        assert!((r.det_slot - expected).abs() <= 1e-12, "d={d}: {r:?} vs {expected:e}");
    }
}

#[test]
fn discrete_gradient_is_curl_free() {
    let grid = Grid::new(3, 12, 1.0).unwrap();
    let k = 2.0 * std::f64::consts::PI;
    let u: Vec<[f64; 3]> = (0..grid.len())
        .map(|c| {
            let x = grid.x(c);
            [0.1 * (k * x[1]).sin(), 0.05 * (k * (x[0] + x[2])).cos(), 0.02 * (k * x[0]).sin() * (k * x[1]).cos()]
        })
        .collect();
    let f = gradient_field(&grid, &Mat::identity(3), &u).unwrap();
    assert!(curl_residual(&grid, &f).unwrap() <= 1e-13);
}
