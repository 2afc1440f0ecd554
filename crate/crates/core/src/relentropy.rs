//! Relative entropy between two states or two runs: the functional I, the
//! relative quantities, the discrete relative-entropy identity and the
//! sampled verification of the a-priori bounds on I.

use crate::constitutive::{
    check_coeff_bounds, eta_hat, random_unit, FreeEnergy, GrowthExponents, SampleBox, ShellSchedule,
    TransportCoeffs,
};
use crate::error::{Error, Result};
use crate::fields::Fields;
use crate::grid::Grid;
use crate::kinematics::{dphi_df, PhiJacobian};
use crate::tensor::{state_len, xi_len, Mat, ThermoState, Xi};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::Write;

fn check_pair(theta: f64, theta_bar: f64) -> Result<()> {
    for t in [theta, theta_bar] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonPositiveTemperature(t));
        }
    }
    Ok(())
}

/// ψ̂(ξ,θ|ξ̄,θ̄) = ψ̂ − ψ̂̄ − ψ̂_ξ(ξ̄,θ̄)(ξ−ξ̄) + η̂(ξ̄,θ̄)(θ−θ̄).
pub fn rel_free_energy(law: &dyn FreeEnergy, xi: &Xi, th: f64, xib: &Xi, thb: f64) -> Result<f64> {
    check_pair(th, thb)?;
    Ok(law.eval(xi, th) - law.eval(xib, thb) - law.grad_xi(xib, thb).dot(&(*xi - *xib))
        - law.grad_theta(xib, thb) * (th - thb))
}

/// Taylor remainder of η̂ = −ψ̂_θ about (ξ̄, θ̄).
pub fn rel_eta(law: &dyn FreeEnergy, xi: &Xi, th: f64, xib: &Xi, thb: f64) -> Result<f64> {
    check_pair(th, thb)?;
    let eta = -law.grad_theta(xi, th);
    let etab = -law.grad_theta(xib, thb);
    let eta_xi = law.hess_xitheta(xib, thb).scale(-1.0);
    let eta_th = -law.hess_thetatheta(xib, thb);
    Ok(eta - etab - eta_xi.dot(&(*xi - *xib)) - eta_th * (th - thb))
}

/// Taylor remainder of ψ̂_ξ about (ξ̄, θ̄), componentwise.
pub fn rel_stress_deriv(law: &dyn FreeEnergy, xi: &Xi, th: f64, xib: &Xi, thb: f64) -> Result<Xi> {
    check_pair(th, thb)?;
    let d = law.d();
    let m = xi_len(d);
    let g = law.grad_xi(xi, th);
    let gb = law.grad_xi(xib, thb);
    let h = law.hess_xixi(xib, thb);
    let ht = law.hess_xitheta(xib, thb);
    let dx = *xi - *xib;
    let mut out = g - gb;
    for b in 0..m {
        let lin: f64 = (0..m).map(|c| h[(b, c)] * dx[c]).sum();
        out[b] -= lin + ht[b] * (th - thb);
    }
    Ok(out)
}

/// I(U|Ū) = ψ̂(ξ,θ|ξ̄,θ̄) + ½|v − v̄|² + (η̂ − η̂̄)(θ − θ̄) = θ̄ H(U|Ū).
pub fn i_pointwise(law: &dyn FreeEnergy, u: &ThermoState, ub: &ThermoState) -> Result<f64> {
    let d = u.d();
    let dv2: f64 = (0..d).map(|i| (u.v[i] - ub.v[i]).powi(2)).sum();
    let deta = eta_hat(law, &u.xi, u.theta)? - eta_hat(law, &ub.xi, ub.theta)?;
    Ok(rel_free_energy(law, &u.xi, u.theta, &ub.xi, ub.theta)? + 0.5 * dv2 + deta * (u.theta - ub.theta))
}

/// ∫ I dx over the torus.
pub fn i_integral(law: &dyn FreeEnergy, grid: &Grid, u: &Fields, ub: &Fields) -> Result<f64> {
    if u.len() != grid.len() || ub.len() != grid.len() {
        return Err(Error::GridMismatch("fields do not match the grid".into()));
    }
    let vals: Result<Vec<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|c| i_pointwise(law, &u.state(c), &ub.state(c)))
        .collect();
    Ok(grid.integrate(&vals?))
}

/// Body force b (momentum) and heat supply r (energy, in addition to b·v).
#[derive(Clone, Debug, PartialEq)]
pub struct Forcing {
    pub b: Vec<[f64; 3]>,
    pub r: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub t: f64,
    pub u: Fields,
    pub forcing: Option<Forcing>,
}

/// A discrete solution: frames on a common grid with the coefficients that
/// generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrack {
    pub coeffs: TransportCoeffs,
    pub frames: Vec<Frame>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityVariant {
    /// Both sides carry their own viscosity and conductivity.
    General,
    /// Reference is adiabatic: Z̄ = Q̄ = 0.
    ViscousVsAdiabatic,
    /// Reference is thermoelastic: Z̄ = 0, Q̄ = k̄∇θ̄.
    ViscousVsThermoelastic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelEntropyRow {
    pub t: f64,
    pub i_integral: f64,
    pub diss_visc: f64,
    pub diss_heat: f64,
    pub residual_l1: f64,
    pub residual_linf: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelEntropyReport {
    pub rows: Vec<RelEntropyRow>,
    /// Least-squares fit ∫I ≈ C e^{slope·t} over rows with ∫I > 0.
    pub gronwall: Option<(f64, f64)>,
}

pub const RELENTROPY_CSV_HEADER: &str = "t,I_integral,diss_visc,diss_heat,residual_L1,residual_Linf";

impl RelEntropyReport {
    pub fn from_rows(rows: Vec<RelEntropyRow>) -> Self {
        let pts: Vec<(f64, f64)> =
            rows.iter().filter(|r| r.i_integral > 0.0).map(|r| (r.t, r.i_integral.ln())).collect();
        let gronwall = fit_line(&pts).map(|(a, b)| (a.exp(), b));
        RelEntropyReport { rows, gronwall }
    }

    pub fn residual_linf(&self) -> f64 {
        self.rows.iter().map(|r| r.residual_linf).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{RELENTROPY_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                r.t, r.i_integral, r.diss_visc, r.diss_heat, r.residual_l1, r.residual_linf
            )?;
        }
        Ok(())
    }
}

/// Ordinary least squares y ≈ a + b x; None with fewer than two points.
pub fn fit_line(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Three-point derivative at the middle of a nonuniform stencil.
pub fn dt3(t: [f64; 3], f: [f64; 3]) -> f64 {
    let (hm, hp) = (t[1] - t[0], t[2] - t[1]);
    (hm * hm * f[2] - hp * hp * f[0] + (hp * hp - hm * hm) * f[1]) / (hm * hp * (hm + hp))
}

/// Per-cell quantities of one side of the pair at one time level.
struct Side {
    states: Vec<ThermoState>,
    psi_xi: Vec<Xi>,
    jac: Vec<PhiJacobian>,
    /// dv[i][α][cell]
    dv: Vec<Vec<Vec<f64>>>,
    /// dth[α][cell]
    dth: Vec<Vec<f64>>,
    mu: Vec<f64>,
    k: Vec<f64>,
}

impl Side {
    fn new(law: &dyn FreeEnergy, grid: &Grid, u: &Fields, coeffs: &TransportCoeffs) -> Self {
        let d = grid.d;
        let states = u.states();
        let psi_xi = states.iter().map(|s| law.grad_xi(&s.xi, s.theta)).collect();
        let jac = states.iter().map(|s| dphi_df(&s.xi.f())).collect();
        let dv = (0..d).map(|i| (0..d).map(|a| grid.diff(u.v(i), a)).collect()).collect();
        let dth = (0..d).map(|a| grid.diff(u.theta(), a)).collect();
        let mu = states.iter().map(|s| coeffs.mu(&s.xi, s.theta)).collect();
        let k = states.iter().map(|s| coeffs.k(&s.xi, s.theta)).collect();
        Side { states, psi_xi, jac, dv, dth, mu, k }
    }
}

fn check_tracks(grid: &Grid, a: &RunTrack, b: &RunTrack) -> Result<()> {
    if a.frames.len() != b.frames.len() {
        return Err(Error::GridMismatch(format!(
            "runs have {} and {} frames",
            a.frames.len(),
            b.frames.len()
        )));
    }
    if a.frames.len() < 3 {
        return Err(Error::Parameter("identity residual needs at least three frames".into()));
    }
    for (fa, fb) in a.frames.iter().zip(&b.frames) {
        if (fa.t - fb.t).abs() > 1e-12 * fa.t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("time axes differ ({} vs {})", fa.t, fb.t)));
        }
        for u in [&fa.u, &fb.u] {
            if u.len() != grid.len() || u.d() != grid.d {
                return Err(Error::GridMismatch("frame fields do not match the grid".into()));
            }
        }
    }
    for w in a.frames.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::Parameter("frame times must increase".into()));
        }
    }
    Ok(())
}

/// Residual LHS − RHS of the relative-entropy identity at every interior
/// frame, with all derivatives taken by the solver's stencils (central in
/// space, three-point in time). Forcing terms (b − b̄)·(v − v̄) and
/// (θ − θ̄)(r/θ − r̄/θ̄) are included when the frames carry forcing.
pub fn identity_residual(
    law: &dyn FreeEnergy,
    grid: &Grid,
    cand: &RunTrack,
    refr: &RunTrack,
    variant: IdentityVariant,
) -> Result<RelEntropyReport> {
    check_tracks(grid, cand, refr)?;
    let d = grid.d;
    let m = xi_len(d);
    let nc = grid.len();
    let nf = cand.frames.len();

    let i_fields: Vec<Vec<f64>> = (0..nf)
        .map(|n| {
            (0..nc)
                .into_par_iter()
                .map(|c| i_pointwise(law, &cand.frames[n].u.state(c), &refr.frames[n].u.state(c)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for n in 1..nf - 1 {
        let ts = [cand.frames[n - 1].t, cand.frames[n].t, cand.frames[n + 1].t];
        let u = Side::new(law, grid, &cand.frames[n].u, &cand.coeffs);
        let ub = Side::new(law, grid, &refr.frames[n].u, &refr.coeffs);
        let rp = &refr.frames[n - 1].u;
        let rn = &refr.frames[n + 1].u;
        let (zbar_on, qbar_on) = match variant {
            IdentityVariant::General => (true, true),
            IdentityVariant::ViscousVsAdiabatic => (false, false),
            IdentityVariant::ViscousVsThermoelastic => (false, true),
        };

        // ∂_α ψ̂_ξ(ξ̄, θ̄)
        let dpsib: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|b| {
                let comp: Vec<f64> = ub.psi_xi.iter().map(|g| g[b]).collect();
                (0..d).map(|a| grid.diff(&comp, a)).collect()
            })
            .collect();

        // relative flux bracket, one scalar field per α
        let mut div = vec![0.0; nc];
        for a in 0..d {
            let flux: Vec<f64> = (0..nc)
                .map(|c| {
                    let (s, sb) = (&u.states[c], &ub.states[c]);
                    let dpsi = u.psi_xi[c] - ub.psi_xi[c];
                    let mut f = 0.0;
                    for i in 0..d {
                        let dvi = s.v[i] - sb.v[i];
                        let mut jpart = 0.0;
                        for b in 0..m {
                            jpart += dpsi[b] * u.jac[c].get(b, i, a);
                        }
                        let z = u.mu[c] * u.dv[i][a][c];
                        let zb = if zbar_on { ub.mu[c] * ub.dv[i][a][c] } else { 0.0 };
                        f += (jpart + z - zb) * dvi;
                    }
                    let q = u.k[c] * u.dth[a][c];
                    let qb = if qbar_on { ub.k[c] * ub.dth[a][c] } else { 0.0 };
                    f + (s.theta - sb.theta) * (q / s.theta - qb / sb.theta)
                })
                .collect();
            for (x, y) in div.iter_mut().zip(grid.diff(&flux, a)) {
                *x += y;
            }
        }

        let cf = cand.frames[n].forcing.as_ref();
        let rf = refr.frames[n].forcing.as_ref();
        let res_terms: Vec<(f64, f64, f64)> = (0..nc)
            .into_par_iter()
            .map(|c| -> Result<(f64, f64, f64)> {
                let (s, sb) = (&u.states[c], &ub.states[c]);
                let (th, thb) = (s.theta, sb.theta);
                let dt_i = dt3(ts, [i_fields[n - 1][c], i_fields[n][c], i_fields[n + 1][c]]);
                let dt_thb = dt3(ts, [rp.theta()[c], thb, rn.theta()[c]]);
                let mut rhs = -dt_thb * rel_eta(law, &s.xi, th, &sb.xi, thb)?;
                let rsd = rel_stress_deriv(law, &s.xi, th, &sb.xi, thb)?;
                for b in 0..m {
                    rhs += dt3(ts, [rp.xi(b)[c], sb.xi[b], rn.xi(b)[c]]) * rsd[b];
                }
                let dpsi = u.psi_xi[c] - ub.psi_xi[c];
                for a in 0..d {
                    for i in 0..d {
                        let dvi = s.v[i] - sb.v[i];
                        for b in 0..m {
                            let dj = u.jac[c].get(b, i, a) - ub.jac[c].get(b, i, a);
                            if dj == 0.0 {
                                continue;
                            }
                            rhs += dpsib[b][a][c] * dj * dvi;
                            rhs += ub.dv[i][a][c] * dpsi[b] * dj;
                        }
                    }
                }
                let grad_v2: f64 = (0..d).flat_map(|i| (0..d).map(move |a| (i, a)))
                    .map(|(i, a)| u.dv[i][a][c].powi(2))
                    .sum();
                let grad_v_vbar: f64 = (0..d).flat_map(|i| (0..d).map(move |a| (i, a)))
                    .map(|(i, a)| u.dv[i][a][c] * ub.dv[i][a][c])
                    .sum();
                let g_th = |side: &Side| -> [f64; 3] {
                    let mut g = [0.0; 3];
                    for (a, ga) in g.iter_mut().enumerate().take(d) {
                        *ga = side.dth[a][c];
                    }
                    g
                };
                let (gt, gtb) = (g_th(&u), g_th(&ub));
                let (mu, k, mub, kb) = (u.mu[c], u.k[c], ub.mu[c], ub.k[c]);
                let mut lhs = dt_i - div[c];
                let diss_visc = thb * mu * grad_v2 / th;
                let diss_heat;
                match variant {
                    IdentityVariant::General => {
                        for i in 0..d {
                            for a in 0..d {
                                let gv = u.dv[i][a][c] / th - ub.dv[i][a][c] / thb;
                                let gz = mu * u.dv[i][a][c] / th - mub * ub.dv[i][a][c] / thb;
                                rhs -= th * thb * gv * gz;
                            }
                        }
                        for a in 0..d {
                            rhs -= (thb * k * gt[a] / th - th * kb * gtb[a] / thb)
                                * (gt[a] / th - gtb[a] / thb);
                        }
                        diss_heat = thb * k * (0..d).map(|a| gt[a] * gt[a]).sum::<f64>() / (th * th);
                    }
                    IdentityVariant::ViscousVsAdiabatic => {
                        let g2: f64 = (0..d).map(|a| gt[a] * gt[a]).sum();
                        let gg: f64 = (0..d).map(|a| gt[a] * gtb[a]).sum();
                        rhs += -diss_visc - thb * k * g2 / (th * th) + mu * grad_v_vbar + k * gg / th;
                        diss_heat = thb * k * g2 / (th * th);
                    }
                    IdentityVariant::ViscousVsThermoelastic => {
                        let mut diff2 = 0.0;
                        let mut cross = 0.0;
                        for a in 0..d {
                            let e = gtb[a] / thb - gt[a] / th;
                            diff2 += e * e;
                            cross += e * gtb[a] / thb;
                        }
                        lhs += diss_visc + thb * k * diff2;
                        rhs += mu * grad_v_vbar + cross * (thb * k - th * kb);
                        diss_heat = thb * k * diff2;
                    }
                }
                let (b, r) = cf.map(|f| (f.b[c], f.r[c])).unwrap_or(([0.0; 3], 0.0));
                let (bb, rb) = rf.map(|f| (f.b[c], f.r[c])).unwrap_or(([0.0; 3], 0.0));
                rhs += (th - thb) * (r / th - rb / thb);
                for i in 0..d {
                    rhs += (b[i] - bb[i]) * (s.v[i] - sb.v[i]);
                }
                Ok((lhs - rhs, diss_visc, diss_heat))
            })
            .collect::<Result<_>>()?;

        let res: Vec<f64> = res_terms.iter().map(|x| x.0.abs()).collect();
        rows.push(RelEntropyRow {
            t: ts[1],
            i_integral: grid.integrate(&i_fields[n]),
            diss_visc: grid.integrate(&res_terms.iter().map(|x| x.1).collect::<Vec<_>>()),
            diss_heat: grid.integrate(&res_terms.iter().map(|x| x.2).collect::<Vec<_>>()),
            residual_l1: grid.integrate(&res),
            residual_linf: res.iter().cloned().fold(0.0, f64::max),
        });
    }
    Ok(RelEntropyReport::from_rows(rows))
}

/// Forcing (b, r) that makes the given frames an exact solution of the
/// discrete viscous system with the solver's stencils:
///
/// b = D_t v − D_α(Σ + Z), r = D_t E − D_α((Σ + Z)·v + Q) − b·v.
///
/// Returns one entry per frame; the end frames carry `None`.
pub fn manufactured_forcing(
    law: &dyn FreeEnergy,
    grid: &Grid,
    coeffs: &TransportCoeffs,
    frames: &[(f64, Fields)],
) -> Result<Vec<Option<Forcing>>> {
    let d = grid.d;
    let nc = grid.len();
    let energy = |u: &Fields| -> Result<Vec<f64>> {
        (0..nc)
            .map(|c| {
                let s = u.state(c);
                Ok(0.5 * s.speed2() + crate::constitutive::e_hat(law, &s.xi, s.theta)?)
            })
            .collect()
    };
    let mut out = vec![None; frames.len()];
    for n in 1..frames.len().saturating_sub(1) {
        let ts = [frames[n - 1].0, frames[n].0, frames[n + 1].0];
        let u = &frames[n].1;
        let side = Side::new(law, grid, u, coeffs);
        let (ep, e0, en) = (energy(&frames[n - 1].1)?, energy(u)?, energy(&frames[n + 1].1)?);
        let mut b = vec![[0.0; 3]; nc];
        let mut r = vec![0.0; nc];
        for c in 0..nc {
            for (i, bi) in b[c].iter_mut().enumerate().take(d) {
                *bi = dt3(ts, [frames[n - 1].1.v(i)[c], u.v(i)[c], frames[n + 1].1.v(i)[c]]);
            }
            r[c] = dt3(ts, [ep[c], e0[c], en[c]]);
        }
        for a in 0..d {
            let mut mom = vec![vec![0.0; nc]; d];
            let mut en_flux = vec![0.0; nc];
            for c in 0..nc {
                let s = &side.states[c];
                let sig = side.jac[c].contract(&side.psi_xi[c]);
                for i in 0..d {
                    let t = sig[(i, a)] + side.mu[c] * side.dv[i][a][c];
                    mom[i][c] = t;
                    en_flux[c] += t * s.v[i];
                }
                en_flux[c] += side.k[c] * side.dth[a][c];
            }
            for (i, mi) in mom.iter().enumerate() {
                for (c, x) in grid.diff(mi, a).into_iter().enumerate() {
                    b[c][i] -= x;
                }
            }
            for (c, x) in grid.diff(&en_flux, a).into_iter().enumerate() {
                r[c] -= x;
            }
        }
        for c in 0..nc {
            let s = &side.states[c];
            r[c] -= (0..d).map(|i| b[c][i] * s.v[i]).sum::<f64>();
        }
        out[n] = Some(Forcing { b, r });
    }
    Ok(out)
}

/// Closed-form smooth periodic motion y = x + u(x, t) with temperature
/// θ(x, t), used to build manufactured pairs. ξ = Φ(∇y), v = ∂_t y.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigMotion {
    pub d: usize,
    pub l: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub theta0: f64,
    pub theta_amplitude: f64,
}

impl TrigMotion {
    fn k(&self) -> f64 {
        2.0 * PI / self.l
    }

    /// (F, v, θ) at position x and time t.
    pub fn eval(&self, x: [f64; 3], t: f64) -> (Mat, [f64; 3], f64) {
        let d = self.d;
        let (k, a, w) = (self.k(), self.amplitude, self.omega);
        let mut f = Mat::identity(d);
        let mut v = [0.0; 3];
        for i in 0..d {
            let j = (i + 1) % d;
            let p1 = k * x[j] - w * t + self.phase + i as f64;
            let p2 = k * x[i] + 0.7 * w * t + 2.0 * self.phase - 0.5 * i as f64;
            // u_i = a sin(p1) + (a/2) sin(p2)
            f[(i, j)] += a * k * p1.cos();
            f[(i, i)] += 0.5 * a * k * p2.cos();
            v[i] = -a * w * p1.cos() + 0.35 * a * w * p2.cos();
        }
        let th = self.theta0
            * (1.0
                + self.theta_amplitude * (k * x[0] - w * t + self.phase).sin() * (k * x[1] + self.phase).cos());
        (f, v, th)
    }

    pub fn fields(&self, grid: &Grid, t: f64) -> Fields {
        let states: Vec<ThermoState> = (0..grid.len())
            .map(|c| {
                let (f, v, theta) = self.eval(grid.x(c), t);
                ThermoState { xi: crate::kinematics::phi(&f), v, theta }
            })
            .collect();
        Fields::from_states(grid.d, &states)
    }
}

// ---------------------------------------------------------------------------
// a-priori bounds on I

/// Reference-state set Γ_{M,δ} and the temperature floor δ̲ for the
/// conductivity bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaParams {
    pub m: f64,
    pub delta: f64,
    pub theta_floor: f64,
}

impl Default for GammaParams {
    fn default() -> Self {
        GammaParams { m: 3.0, delta: 0.2, theta_floor: 0.2 }
    }
}

/// r(M) = M^p + M^q + M^r + M^ℓ + M².
pub fn r_of_m(e: &GrowthExponents, m: f64) -> f64 {
    m.powf(e.p) + m.powf(e.q) + m.powf(e.r) + m.powf(e.l) + m * m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// LHS ≤ C·RHS; the constant is a supremum.
    Upper,
    /// I ≥ K·RHS; the constant is an infimum and must stay positive.
    Lower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub name: &'static str,
    pub label: &'static str,
    pub kind: BoundKind,
    /// Constants fitted on the near (|U| ≤ R) and far (|U| > R) regions at
    /// N and 4N samples; None when the region had no usable samples.
    pub near: (Option<f64>, Option<f64>),
    pub far: (Option<f64>, Option<f64>),
    pub stable: bool,
    pub applicable: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub radius: f64,
    pub far_samples: usize,
    pub samples: usize,
    pub bounds: Vec<BoundResult>,
    pub pass: bool,
}

const BOUND_NAMES: [(&str, &str, BoundKind); 10] = [
    ("bound1", "jacobian_stress", BoundKind::Upper),
    ("bound2", "relative_stress", BoundKind::Upper),
    ("bound3", "jacobian_velocity", BoundKind::Upper),
    ("bound4", "coercivity", BoundKind::Lower),
    ("bound5", "relative_entropy", BoundKind::Upper),
    ("bound9", "coercivity_graded", BoundKind::Lower),
    ("bound6", "jacobian_stress_by_i", BoundKind::Upper),
    ("bound7", "relative_stress_by_i", BoundKind::Upper),
    ("bound8", "jacobian_velocity_by_i", BoundKind::Upper),
    ("bound10", "conductivity_contrast", BoundKind::Upper),
];

/// Relative quantities below this fraction of the terms they are formed
/// from are cancellation noise and count as exact zeros.
const CANCELLATION_FLOOR: f64 = 1e-11;

/// Per-pair ratios: `ratios[b] = Some((far?, value))`.
type PairRatios = [Option<(bool, f64)>; 10];

fn pair_ratios(
    law: &dyn FreeEnergy,
    coeffs: &TransportCoeffs,
    g: &GammaParams,
    radius: f64,
    u: &ThermoState,
    ub: &ThermoState,
) -> Option<PairRatios> {
    let d = law.d();
    let m = xi_len(d);
    let e = law.exponents();
    let s = e.size(&u.xi, u.theta);
    let v2: f64 = (0..d).map(|i| u.v[i] * u.v[i]).sum();
    let dxi = u.xi - ub.xi;
    let dth = u.theta - ub.theta;
    let dv2: f64 = (0..d).map(|i| (u.v[i] - ub.v[i]).powi(2)).sum();
    let q2 = dxi.dot(&dxi) + dth * dth;
    let i = i_pointwise(law, u, ub).ok()?;
    if !i.is_finite() || q2 + dv2 == 0.0 {
        return None;
    }
    let jac = dphi_df(&u.xi.f());
    let jacb = dphi_df(&ub.xi.f());
    let dpsi = law.grad_xi(&u.xi, u.theta) - law.grad_xi(&ub.xi, ub.theta);
    // |(ΔJ)·Δψ_ξ| and |(ΔJ)·Δv| as matrices / vectors over the free indices
    let mut b1: f64 = 0.0;
    let mut b3 = vec![0.0; d];
    for i in 0..d {
        for a in 0..d {
            let mut t = 0.0;
            for b in 0..m {
                let dj = jac.get(b, i, a) - jacb.get(b, i, a);
                t += dj * dpsi[b];
            }
            b1 += t * t;
        }
    }
    for (a, b3a) in b3.iter_mut().enumerate() {
        for b in 0..m {
            let t: f64 =
                (0..d).map(|i| (jac.get(b, i, a) - jacb.get(b, i, a)) * (u.v[i] - ub.v[i])).sum();
            *b3a += t * t;
        }
    }
    let lhs1 = b1.sqrt();
    let lhs3 = b3.iter().sum::<f64>().sqrt();
    let lhs2 = rel_stress_deriv(law, &u.xi, u.theta, &ub.xi, ub.theta).ok()?.norm();
    let lhs5 = rel_eta(law, &u.xi, u.theta, &ub.xi, ub.theta).ok()?.abs();
    let scale2 = law.grad_xi(&u.xi, u.theta).norm() + law.grad_xi(&ub.xi, ub.theta).norm();
    let scale5 = law.grad_theta(&u.xi, u.theta).abs() + law.grad_theta(&ub.xi, ub.theta).abs();
    let lhs2 = if lhs2 <= CANCELLATION_FLOOR * scale2 { 0.0 } else { lhs2 };
    let lhs5 = if lhs5 <= CANCELLATION_FLOOR * scale5 { 0.0 } else { lhs5 };

    let far_s = s > radius;
    let far_sv = s + v2 > radius;
    let pos = i > 1e-300;
    let mut out: PairRatios = [None; 10];
    out[0] = Some((far_s, if far_s { lhs1 / s } else { lhs1 / q2 }));
    out[1] = Some((far_s, if far_s { lhs2 / s } else { lhs2 / q2 }));
    out[2] = Some((far_sv, if far_sv { lhs3 / (s + 0.5 * dv2) } else { lhs3 / (q2 + dv2) }));
    out[3] = Some((far_sv, if far_sv { 2.0 * i / (s + v2) } else { i / (q2 + dv2) }));
    if pos {
        out[4] = Some((far_sv, lhs5 / i));
        out[6] = Some((far_sv, lhs1 / i));
        out[7] = Some((far_sv, lhs2 / i));
        out[8] = Some((far_sv, lhs3 / i));
    }
    let rel_size = {
        let mut t = dxi.f().norm().powf(e.p) + dxi.w().abs().powf(e.r) + dth.abs().powf(e.l) + dv2;
        if d == 3 {
            t += dxi.zeta().norm().powf(e.q);
        }
        t
    };
    out[5] = Some((far_sv, if far_sv { 4.0 * i / rel_size } else { i / (q2 + dv2) }));
    if coeffs.k0 > 0.0 && u.theta >= g.theta_floor && pos {
        let k = coeffs.k(&u.xi, u.theta);
        let kb = coeffs.k(&ub.xi, ub.theta);
        let lhs10 = u.theta * u.theta / k * (k / u.theta - kb / ub.theta).powi(2);
        out[9] = Some((far_sv, lhs10 / i));
    }
    Some(out)
}

/// Sampled pairs (U, Ū) with Ū ∈ Γ_{M,δ}: 40% near pairs U = Ū + sδ with s
/// log-uniform in [1e−3, 1], 30% broad-box states, 30% far-field states with
/// |ξ|_{p,q,r} + θ^ℓ + |v|² between R and 8R. Half of the near and far
/// directions are confined to a single block (F, ζ, w, v or θ), since the
/// extremal ratios sit on such directions and random directions in 23
/// dimensions almost never come close to them.
pub fn sample_pairs(
    law: &dyn FreeEnergy,
    g: &GammaParams,
    radius: f64,
    n: usize,
    seed: u64,
) -> Vec<(ThermoState, ThermoState)> {
    let d = law.d();
    let nu = state_len(d);
    let e = law.exponents();
    let refs = crate::constitutive::sample_states(d, n, seed, &SampleBox::gamma(g.m, g.delta));
    let broad = crate::constitutive::sample_states(d, n, seed ^ 0xb0ad, &SampleBox::default());
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(17));
    let mut out = Vec::with_capacity(n);
    for (j, ub) in refs.into_iter().enumerate() {
        let kind = j % 10;
        let u = if kind < 4 {
            let scale = 10f64.powf(rng.gen_range(-3.0..0.0));
            let dir = direction(&mut rng, d, j);
            let base = ub.pack();
            let mut u: Vec<f64> = base.iter().zip(&dir).map(|(a, b)| a + scale * b).collect();
            if u[nu - 1] <= 0.05 {
                u[nu - 1] = base[nu - 1];
            }
            ThermoState::unpack(d, &u)
        } else if kind < 7 {
            broad[j]
        } else {
            let dir = direction(&mut rng, d, j);
            let target = radius * 2f64.powf(rng.gen_range(0.0..3.0));
            let at = |s: f64| {
                let mut u: Vec<f64> = dir.iter().map(|x| s * x).collect();
                u[nu - 1] = (s * dir[nu - 1]).abs().max(g.theta_floor);
                ThermoState::unpack(d, &u)
            };
            let size = |s: f64| {
                let st = at(s);
                e.size(&st.xi, st.theta) + st.speed2()
            };
            let mut hi = 1.0;
            while size(hi) < target {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if size(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(hi)
        };
        out.push((u, ub));
    }
    out
}

fn direction(rng: &mut ChaCha8Rng, d: usize, j: usize) -> Vec<f64> {
    let nu = state_len(d);
    if (j / 10).is_multiple_of(2) {
        return random_unit(rng, nu);
    }
    let m = xi_len(d);
    let mut blocks = vec![0..d * d, m - 1..m, m..m + d, nu - 1..nu];
    if d == 3 {
        blocks.push(9..18);
    }
    let blk = blocks[rng.gen_range(0..blocks.len())].clone();
    let sub = random_unit(rng, blk.len());
    let mut dir = vec![0.0; nu];
    for (k, i) in blk.enumerate() {
        dir[i] = sub[k];
    }
    dir
}

/// (near, far) constant of one bound; `None` where no sample applied.
type NearFar = (Option<f64>, Option<f64>);

fn fit_constants(
    law: &dyn FreeEnergy,
    coeffs: &TransportCoeffs,
    g: &GammaParams,
    radius: f64,
    pairs: &[(ThermoState, ThermoState)],
) -> (Vec<NearFar>, usize) {
    let ratios: Vec<Option<PairRatios>> =
        pairs.par_iter().map(|(u, ub)| pair_ratios(law, coeffs, g, radius, u, ub)).collect();
    let mut consts = vec![(None, None); 10];
    let mut far = 0;
    for r in ratios.iter().flatten() {
        if r[3].map(|x| x.0).unwrap_or(false) {
            far += 1;
        }
        for (b, slot) in r.iter().enumerate() {
            if let Some((is_far, val)) = slot {
                if !val.is_finite() {
                    continue;
                }
                let tgt = if *is_far { &mut consts[b].1 } else { &mut consts[b].0 };
                let upd = match BOUND_NAMES[b].2 {
                    BoundKind::Upper => tgt.map_or(*val, |c: f64| c.max(*val)),
                    BoundKind::Lower => tgt.map_or(*val, |c: f64| c.min(*val)),
                };
                *tgt = Some(upd);
            }
        }
    }
    (consts, far)
}

fn consistent(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => {
            (x.abs() <= 1e-12 && y.abs() <= 1e-12) || (x - y).abs() <= 0.2 * x.abs().max(y.abs())
        }
        _ => false,
    }
}

/// Fit the smallest constants of each bound on N and 4N sampled pairs and
/// report whether they are finite, positive where required, and stable
/// within 20%. The bounds hold for some far-field radius R; the search
/// starts at r(M) + 1 and doubles R (at most `MAX_DOUBLINGS` times) until the
/// far constants at N and 4N agree. The conductivity-contrast bound is only
/// claimed when k + θ²/k is controlled by the energy; otherwise it is
/// reported as not applicable.
pub fn relative_bounds_check(
    law: &dyn FreeEnergy,
    coeffs: &TransportCoeffs,
    g: &GammaParams,
    samples: usize,
    seed: u64,
) -> BoundsReport {
    const MAX_DOUBLINGS: usize = 12;
    let hypothesis = coeffs.k0 > 0.0 && {
        let sch = ShellSchedule { theta_floor: g.theta_floor, ..ShellSchedule::default() };
        check_coeff_bounds(coeffs, law, &sch).pass_zero_viscosity_mode
    };
    let applicable = |b: usize| b != 9 || hypothesis;
    let mut radius = r_of_m(&law.exponents(), g.m) + 1.0;
    let mut tries = 0;
    let (small, big, far) = loop {
        let p1 = sample_pairs(law, g, radius, samples, seed);
        let (c1, far1) = fit_constants(law, coeffs, g, radius, &p1);
        if far1 < 100 && tries < MAX_DOUBLINGS {
            radius *= 2.0;
            tries += 1;
            continue;
        }
        let p4 = sample_pairs(law, g, radius, 4 * samples, seed.wrapping_add(1));
        let (c4, _) = fit_constants(law, coeffs, g, radius, &p4);
        let settled = (0..10).all(|b| !applicable(b) || consistent(c1[b].1, c4[b].1));
        if settled || tries >= MAX_DOUBLINGS {
            break (c1, c4, far1);
        }
        radius *= 2.0;
        tries += 1;
    };
    let mut bounds = Vec::new();
    for (b, (name, label, kind)) in BOUND_NAMES.iter().enumerate() {
        let near = (small[b].0, big[b].0);
        let farc = (small[b].1, big[b].1);
        let stable = consistent(near.0, near.1) && consistent(farc.0, farc.1);
        let finite = |x: Option<f64>| x.is_none_or(|v| v.is_finite());
        let positive = |x: Option<f64>| x.is_none_or(|v| v > 0.0);
        let ok = match kind {
            BoundKind::Upper => [near.0, near.1, farc.0, farc.1].into_iter().all(finite),
            BoundKind::Lower => [near.0, near.1, farc.0, farc.1].into_iter().all(positive),
        };
        bounds.push(BoundResult {
            name,
            label,
            kind: *kind,
            near,
            far: farc,
            stable,
            applicable: applicable(b),
            pass: !applicable(b) || (ok && stable),
        });
    }
    let pass = bounds.iter().all(|b| b.pass);
    BoundsReport { radius, far_samples: far, samples, bounds, pass }
}
