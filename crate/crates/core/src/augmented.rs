//! The augmented system ∂_t A(U) + ∂_α f_α(U) = 0 with U = (ξ, v, θ):
//! conserved variables, fluxes, entropy multiplier and symmetrizer.

use crate::constitutive::{e_hat, e_theta, eta_hat, eta_theta, min_eigenvalue, FreeEnergy};
use crate::error::{Error, Result};
use crate::kinematics::{dphi_df, phi_second_contract};
use crate::tensor::{state_len, xi_len, ThermoState};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedEval {
    /// A = (ξ, v, ½|v|² + ê)
    pub a: Vec<f64>,
    /// f_α for α = 0..d
    pub f: Vec<Vec<f64>>,
    /// G = (ψ̂_ξ, v, −1)/θ
    pub g: Vec<f64>,
    pub symmetrizer: DMatrix<f64>,
    /// H = −η̂
    pub h: f64,
}

fn check(state: &ThermoState) -> Result<()> {
    if state.theta > 0.0 && state.theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(state.theta))
    }
}

pub fn conserved(law: &dyn FreeEnergy, s: &ThermoState) -> Result<Vec<f64>> {
    let d = s.d();
    let mut a = s.pack();
    a[state_len(d) - 1] = 0.5 * s.speed2() + e_hat(law, &s.xi, s.theta)?;
    Ok(a)
}

/// Fluxes f_α = −(∂Φ/∂F_{·α} v, Σ_{·α}, Σ_{·α}·v).
pub fn fluxes(law: &dyn FreeEnergy, s: &ThermoState) -> Result<Vec<Vec<f64>>> {
    check(s)?;
    let d = s.d();
    let m = xi_len(d);
    let jac = dphi_df(&s.xi.f());
    let sigma = jac.contract(&law.grad_xi(&s.xi, s.theta));
    Ok((0..d)
        .map(|a| {
            let mut f = vec![0.0; state_len(d)];
            for (b, fb) in f.iter_mut().enumerate().take(m) {
                *fb = -(0..d).map(|i| jac.get(b, i, a) * s.v[i]).sum::<f64>();
            }
            for i in 0..d {
                f[m + i] = -sigma[(i, a)];
            }
            f[m + d] = -(0..d).map(|i| sigma[(i, a)] * s.v[i]).sum::<f64>();
            f
        })
        .collect())
}

pub fn multiplier(law: &dyn FreeEnergy, s: &ThermoState) -> Result<Vec<f64>> {
    check(s)?;
    let d = s.d();
    let mut g = law.grad_xi(&s.xi, s.theta).as_slice().to_vec();
    g.extend_from_slice(&s.v[..d]);
    g.push(-1.0);
    Ok(g.into_iter().map(|x| x / s.theta).collect())
}

/// blockdiag(ψ̂_ξξ/θ, I/θ, η̂_θ/θ).
pub fn symmetrizer(law: &dyn FreeEnergy, s: &ThermoState) -> Result<DMatrix<f64>> {
    check(s)?;
    let d = s.d();
    let m = xi_len(d);
    let n = state_len(d);
    let mut out = DMatrix::zeros(n, n);
    let hx = law.hess_xixi(&s.xi, s.theta);
    out.view_mut((0, 0), (m, m)).copy_from(&(hx / s.theta));
    for i in 0..d {
        out[(m + i, m + i)] = 1.0 / s.theta;
    }
    out[(n - 1, n - 1)] = eta_theta(law, &s.xi, s.theta) / s.theta;
    Ok(out)
}

pub fn assemble(law: &dyn FreeEnergy, s: &ThermoState) -> Result<AugmentedEval> {
    Ok(AugmentedEval {
        a: conserved(law, s)?,
        f: fluxes(law, s)?,
        g: multiplier(law, s)?,
        symmetrizer: symmetrizer(law, s)?,
        h: -eta_hat(law, &s.xi, s.theta)?,
    })
}

/// Symmetrizer assembled from central second differences of the scalars H
/// and A_E (the other conserved components are linear in U).
pub fn symmetrizer_fd(law: &dyn FreeEnergy, s: &ThermoState, h: f64) -> Result<DMatrix<f64>> {
    check(s)?;
    let d = s.d();
    let n = state_len(d);
    let u0 = s.pack();
    let g = multiplier(law, s)?;
    let scalar = |u: &[f64]| -> Result<f64> {
        let st = ThermoState::unpack(d, u);
        let hh = -eta_hat(law, &st.xi, st.theta)?;
        let ae = 0.5 * st.speed2() + e_hat(law, &st.xi, st.theta)?;
        Ok(hh - g[n - 1] * ae)
    };
    let at = |k: usize, sk: f64, l: usize, sl: f64| -> Result<f64> {
        let mut u = u0.clone();
        u[k] += sk * h;
        u[l] += sl * h;
        scalar(&u)
    };
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in k..n {
            let v = (at(k, 1.0, l, 1.0)? - at(k, 1.0, l, -1.0)? - at(k, -1.0, l, 1.0)?
                + at(k, -1.0, l, -1.0)?)
                / (4.0 * h * h);
            out[(k, l)] = v;
            out[(l, k)] = v;
        }
    }
    Ok(out)
}

/// Largest |entry| outside the (ξ, v, θ) diagonal blocks.
pub fn off_block_max(m: &DMatrix<f64>, d: usize) -> f64 {
    let xm = xi_len(d);
    let block = |k: usize| {
        if k < xm {
            0
        } else if k < xm + d {
            1
        } else {
            2
        }
    };
    let mut worst: f64 = 0.0;
    for k in 0..m.nrows() {
        for l in 0..m.ncols() {
            if block(k) != block(l) {
                worst = worst.max(m[(k, l)].abs());
            }
        }
    }
    worst
}

/// Residuals of the entropy-pair relations, relative to the size of the
/// terms involved:
///
/// * `dh`: ∇H − G·∇A over all directions of U;
/// * `dq`: Σ_α G·∂_α f_α (entropy flux q_α ≡ 0) over spatial gradients that
///   are compatible (∂_α F_{iβ} = ∂_β F_{iα}). For incompatible gradients
///   the contraction equals −ψ̂_ξB v_i ∂_α(∂Φ^B/∂F_{iα})/θ, which vanishes
///   only through the Piola identity.
pub fn entropy_pair_residual(law: &dyn FreeEnergy, s: &ThermoState, h: f64) -> Result<(f64, f64)> {
    check(s)?;
    let d = s.d();
    let n = state_len(d);
    let u0 = s.pack();
    let g = multiplier(law, s)?;
    let state_at = |du: &[f64], e: f64| {
        let u: Vec<f64> = u0.iter().zip(du).map(|(a, b)| a + e * b).collect();
        ThermoState::unpack(d, &u)
    };

    let mut dh: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let (p, m) = (state_at(&e, h), state_at(&e, -h));
        let dhk = (-eta_hat(law, &p.xi, p.theta)? + eta_hat(law, &m.xi, m.theta)?) / (2.0 * h);
        let (ap, am) = (conserved(law, &p)?, conserved(law, &m)?);
        let gda: f64 = (0..n).map(|j| g[j] * (ap[j] - am[j]) / (2.0 * h)).sum();
        dh = dh.max((dhk - gda).abs());
        scale = scale.max(dhk.abs()).max(gda.abs());
    }
    let dh = dh / scale;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut dq: f64 = 0.0;
    let mut qscale: f64 = 1.0;
    for _ in 0..2 * d {
        // ∂_α U for each α with ∂_α F_{iβ} = T_{iαβ}, T symmetric in (α, β)
        let mut t = [[[0.0; 3]; 3]; 3];
        for ti in t.iter_mut().take(d) {
            for a in 0..d {
                for b in a..d {
                    let x = rng.gen_range(-1.0..1.0);
                    ti[a][b] = x;
                    ti[b][a] = x;
                }
            }
        }
        let mut total = 0.0;
        let mut size: f64 = 0.0;
        for a in 0..d {
            let mut du = vec![0.0; n];
            for i in 0..d {
                for b in 0..d {
                    du[i * d + b] = t[i][a][b];
                }
            }
            for v in du.iter_mut().skip(d * d) {
                *v = rng.gen_range(-1.0..1.0);
            }
            let fp = &fluxes(law, &state_at(&du, h))?[a];
            let fm = &fluxes(law, &state_at(&du, -h))?[a];
            for j in 0..n {
                let term = g[j] * (fp[j] - fm[j]) / (2.0 * h);
                total += term;
                size = size.max(term.abs());
            }
        }
        dq = dq.max(total.abs());
        qscale = qscale.max(size);
    }
    Ok((dh, dq / qscale))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicityReport {
    pub min_eigenvalues: Vec<f64>,
    /// min over samples of (min eigenvalue · θ), removing the 1/θ scaling.
    pub min_scaled: f64,
    pub pass: bool,
}

pub fn hyperbolicity_certificate(law: &dyn FreeEnergy, samples: &[ThermoState]) -> HyperbolicityReport {
    let mut eigs = Vec::with_capacity(samples.len());
    let mut pass = true;
    let mut min_scaled = f64::INFINITY;
    for s in samples {
        match symmetrizer(law, s) {
            Ok(m) => {
                let e = min_eigenvalue(&m);
                if !(e > crate::constitutive::TOL_SPD * m.norm()) {
                    pass = false;
                }
                min_scaled = min_scaled.min(e * s.theta);
                eigs.push(e);
            }
            Err(_) => {
                pass = false;
                eigs.push(f64::NAN);
            }
        }
    }
    HyperbolicityReport { min_eigenvalues: eigs, min_scaled, pass }
}

/// Upper bound on the characteristic speed: sqrt of the Frobenius norm of the
/// isentropic acoustic tensor ∂Σ/∂F + (θ/ê_θ) ∂_θΣ ⊗ ∂_θΣ.
pub fn max_wave_speed(law: &dyn FreeEnergy, s: &ThermoState) -> f64 {
    let d = s.d();
    let m = xi_len(d);
    let f = s.xi.f();
    let jac = dphi_df(&f);
    let hx = law.hess_xixi(&s.xi, s.theta);
    let g = law.grad_xi(&s.xi, s.theta);
    let second = phi_second_contract(&f, &g);
    let sig_t = jac.contract(&law.hess_xitheta(&s.xi, s.theta)).to_flat();
    let coupling = s.theta / e_theta(law, &s.xi, s.theta);
    let mut norm2 = 0.0;
    for k in 0..d * d {
        for l in 0..d * d {
            let mut v = second[k][l] + coupling * sig_t[k] * sig_t[l];
            for b in 0..m {
                let jb = jac.get(b, k / d, k % d);
                if jb == 0.0 {
                    continue;
                }
                for c in 0..m {
                    v += jb * hx[(b, c)] * jac.get(c, l / d, l % d);
                }
            }
            norm2 += v * v;
        }
    }
    norm2.sqrt().sqrt()
}
