//! Explicit RK4 finite-difference solver for the augmented system on the
//! periodic torus, in its viscous, thermoelastic and adiabatic variants.
//!
//! The conserved variables A(U) are evolved; temperature is recovered from
//! the energy after every stage. Hyperbolic fluxes use central differences
//! in conservative form. Viscosity and heat conduction use compact
//! face-based fluxes, so the discrete entropy production is an exact sum of
//! squares (reported as the entropy ledger). Only the adiabatic variant
//! carries a small fourth-order hyperviscosity.

use crate::augmented::{conserved, fluxes, max_wave_speed};
use crate::constitutive::{e_hat, e_theta, eta_hat, FreeEnergy, TransportCoeffs};
use crate::error::{Error, Result};
use crate::fields::Fields;
use crate::grid::{max_abs, Grid};
use crate::kinematics::{cof, curl_residual, det, gradient_field, phi};
use crate::tensor::{state_len, xi_len, Mat, ThermoState, Xi};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{BufRead, Write};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Adiabatic,
    Thermoelastic,
    Thermoviscoelastic,
}

impl Variant {
    pub fn label(&self) -> &'static str {
        match self {
            Variant::Adiabatic => "adiabatic",
            Variant::Thermoelastic => "thermoelastic",
            Variant::Thermoviscoelastic => "thermoviscoelastic",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams {
    pub coeffs: TransportCoeffs,
    pub cfl: f64,
    pub cfl_parabolic: f64,
    /// ε_h of the adiabatic stabilisation −ε_h h³ Δ²A.
    pub hyperviscosity: f64,
    /// Temperature floor δ̲; runs abort below it when set.
    pub theta_floor: Option<f64>,
    /// Abort when max |∇U| exceeds this multiple of its initial value.
    pub smoothness_limit: f64,
}

impl RunParams {
    pub fn new(coeffs: TransportCoeffs) -> Self {
        RunParams {
            coeffs,
            cfl: 0.4,
            cfl_parabolic: 0.25,
            hyperviscosity: 0.05,
            theta_floor: None,
            smoothness_limit: 50.0,
        }
    }

    pub fn variant(&self) -> Variant {
        match (self.coeffs.mu0 > 0.0, self.coeffs.k0 > 0.0) {
            (false, false) => Variant::Adiabatic,
            (false, true) => Variant::Thermoelastic,
            _ => Variant::Thermoviscoelastic,
        }
    }

    fn hyper(&self) -> f64 {
        if self.variant() == Variant::Adiabatic {
            self.hyperviscosity
        } else {
            0.0
        }
    }

    fn bracket_low(&self) -> f64 {
        self.theta_floor.map_or(1e-3, |f| f / 10.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub t: f64,
    /// Conserved variables A(U), component-major.
    pub a: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    pub params: RunParams,
}

impl FieldState {
    pub fn from_primitives(grid: Grid, law: &dyn FreeEnergy, u: &Fields, params: RunParams, t: f64) -> Result<Self> {
        if u.len() != grid.len() || u.d() != grid.d || law.d() != grid.d {
            return Err(Error::GridMismatch("initial fields do not match the grid".into()));
        }
        params.coeffs.validate()?;
        let states = u.states();
        let cols: Vec<Vec<f64>> = states.par_iter().map(|s| conserved(law, s)).collect::<Result<_>>()?;
        let n = state_len(grid.d);
        let a = (0..n).map(|k| cols.iter().map(|c| c[k]).collect()).collect();
        Ok(FieldState { grid, t, a, theta: u.theta().to_vec(), params })
    }

    pub fn primitives(&self) -> Fields {
        let d = self.grid.d;
        let mut comps = self.a.clone();
        comps[state_len(d) - 1] = self.theta.clone();
        Fields::from_comps(d, comps).expect("consistent layout")
    }

    pub fn state(&self, c: usize) -> ThermoState {
        let d = self.grid.d;
        let m = xi_len(d);
        let mut v = [0.0; 3];
        for (i, vi) in v.iter_mut().enumerate().take(d) {
            *vi = self.a[m + i][c];
        }
        let xs: Vec<f64> = (0..m).map(|b| self.a[b][c]).collect();
        ThermoState { xi: Xi::from_slice(d, &xs), v, theta: self.theta[c] }
    }
}

/// Solve ½|v|² + ê(ξ, θ) = E for θ by safeguarded Newton on the monotone map
/// θ ↦ ê(ξ, θ).
pub fn recover_theta(
    law: &dyn FreeEnergy,
    xi: &Xi,
    internal: f64,
    guess: f64,
    low: f64,
    cell: usize,
) -> Result<f64> {
    let g = |t: f64| e_hat(law, xi, t).map(|e| e - internal);
    let mut lo = low;
    let glo = g(lo)?;
    if glo > 0.0 {
        return Err(Error::ThetaRecovery { cell, target: internal, low: glo + internal, high: f64::NAN });
    }
    let mut hi = (10.0 * guess.max(lo)).max(2.0 * lo);
    let mut ghi = g(hi)?;
    let mut tries = 0;
    while ghi < 0.0 {
        lo = hi;
        hi *= 10.0;
        ghi = g(hi)?;
        tries += 1;
        if tries > 30 || !ghi.is_finite() {
            return Err(Error::ThetaRecovery { cell, target: internal, low: glo + internal, high: ghi + internal });
        }
    }
    let tol = 1e-14 * internal.abs().max(1.0);
    let mut t = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let gt = g(t)?;
        if gt.abs() <= tol {
            return Ok(t);
        }
        if gt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = e_theta(law, xi, t);
        let mut next = t - gt / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * t {
            return Ok(next);
        }
        t = next;
    }
    Ok(t)
}

/// Evaluation of the semi-discrete right-hand side.
struct Rhs {
    da: Vec<Vec<f64>>,
    theta: Vec<f64>,
    /// ∫ of the discrete entropy production (viscous, heat).
    production: (f64, f64),
}

fn recover_all(
    law: &dyn FreeEnergy,
    grid: &Grid,
    a: &[Vec<f64>],
    guess: &[f64],
    params: &RunParams,
) -> Result<(Vec<ThermoState>, Vec<f64>)> {
    let d = grid.d;
    let m = xi_len(d);
    let n = state_len(d);
    let low = params.bracket_low();
    let states: Vec<ThermoState> = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let xs: Vec<f64> = (0..m).map(|b| a[b][c]).collect();
            let xi = Xi::from_slice(d, &xs);
            let mut v = [0.0; 3];
            for (i, vi) in v.iter_mut().enumerate().take(d) {
                *vi = a[m + i][c];
            }
            let kin = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
            let e = a[n - 1][c];
            if !e.is_finite() || xs.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("conserved state at cell {c}")));
            }
            let theta = recover_theta(law, &xi, e - kin, guess[c], low, c)?;
            Ok(ThermoState { xi, v, theta })
        })
        .collect::<Result<_>>()?;
    let theta = states.iter().map(|s| s.theta).collect();
    Ok((states, theta))
}

fn rhs(
    law: &dyn FreeEnergy,
    grid: &Grid,
    a: &[Vec<f64>],
    guess: &[f64],
    params: &RunParams,
) -> Result<Rhs> {
    let d = grid.d;
    let m = xi_len(d);
    let n = state_len(d);
    let nc = grid.len();
    let h = grid.h();
    let (states, theta) = recover_all(law, grid, a, guess, params)?;

    let fl: Vec<Vec<Vec<f64>>> = states.par_iter().map(|s| fluxes(law, s)).collect::<Result<_>>()?;
    let mut da = vec![vec![0.0; nc]; n];
    for al in 0..d {
        for (k, dak) in da.iter_mut().enumerate() {
            let comp: Vec<f64> = fl.iter().map(|f| f[al][k]).collect();
            for (x, y) in dak.iter_mut().zip(grid.diff(&comp, al)) {
                *x -= y;
            }
        }
    }

    let coeffs = params.coeffs;
    let mut prod_visc = 0.0;
    let mut prod_heat = 0.0;
    if coeffs.mu0 > 0.0 || coeffs.k0 > 0.0 {
        let mu: Vec<f64> = states.iter().map(|s| coeffs.mu(&s.xi, s.theta)).collect();
        let k: Vec<f64> = states.iter().map(|s| coeffs.k(&s.xi, s.theta)).collect();
        let mut visc_sum = vec![0.0; nc];
        let inv_h2 = 1.0 / (h * h);
        for al in 0..d {
            for c in 0..nc {
                let p = grid.neighbor(c, al, 1);
                let (s, sp) = (&states[c], &states[p]);
                let mu_f = 0.5 * (mu[c] + mu[p]);
                let k_f = 0.5 * (k[c] + k[p]);
                let mut dv2 = 0.0;
                let mut e_flux = 0.0;
                for i in 0..d {
                    let dv = sp.v[i] - s.v[i];
                    dv2 += dv * dv;
                    let mf = mu_f * dv * inv_h2;
                    da[m + i][c] += mf;
                    da[m + i][p] -= mf;
                    e_flux += mu_f * 0.5 * (sp.v[i] * sp.v[i] - s.v[i] * s.v[i]);
                }
                let dth = sp.theta - s.theta;
                e_flux = (e_flux + k_f * dth) * inv_h2;
                da[n - 1][c] += e_flux;
                da[n - 1][p] -= e_flux;
                visc_sum[c] += mu_f * dv2;
                visc_sum[p] += mu_f * dv2;
                prod_heat += k_f * dth * dth * inv_h2 / (s.theta * sp.theta);
            }
        }
        for c in 0..nc {
            prod_visc += visc_sum[c] * 0.5 * inv_h2 / states[c].theta;
        }
        prod_visc *= grid.cell_volume();
        prod_heat *= grid.cell_volume();
    }

    let eps = params.hyper();
    if eps > 0.0 {
        let s = eps * h * h * h;
        for (k, dak) in da.iter_mut().enumerate() {
            let l2 = grid.laplacian(&grid.laplacian(&a[k]));
            for (x, y) in dak.iter_mut().zip(l2) {
                *x -= s * y;
            }
        }
    }
    Ok(Rhs { da, theta, production: (prod_visc, prod_heat) })
}

/// Largest stable step for the current state.
pub fn stable_dt(law: &dyn FreeEnergy, state: &FieldState) -> f64 {
    let g = &state.grid;
    let h = g.h();
    let p = &state.params;
    let cells: Vec<(f64, f64)> = (0..g.len())
        .into_par_iter()
        .map(|c| {
            let s = state.state(c);
            let lam = max_wave_speed(law, &s);
            let mu = p.coeffs.mu(&s.xi, s.theta);
            let kappa = p.coeffs.k(&s.xi, s.theta) / e_theta(law, &s.xi, s.theta);
            (lam, mu.max(kappa))
        })
        .collect();
    let lam = cells.iter().map(|x| x.0).fold(0.0, f64::max);
    let diff = cells.iter().map(|x| x.1).fold(0.0, f64::max);
    let mut dt = if lam > 0.0 { p.cfl * h / lam } else { f64::INFINITY };
    if diff > 0.0 {
        dt = dt.min(p.cfl_parabolic * h * h / diff);
    }
    let eps = p.hyper();
    if eps > 0.0 {
        let d = g.d as f64;
        // RK4 covers [−2.78, 0]; the symbol of h³Δ²_h peaks at 16d²/h
        dt = dt.min(2.0 * h / (16.0 * eps * d * d));
    }
    dt
}

/// A space-time source added to dA/dt.
pub type Source<'a> = &'a (dyn Fn(f64) -> Vec<Vec<f64>> + Sync);

/// One RK4 step. Returns the new state and the time-integrated entropy
/// production (viscous, heat) over the step.
pub fn step_with_source(
    state: &FieldState,
    law: &dyn FreeEnergy,
    dt: f64,
    source: Option<Source>,
) -> Result<(FieldState, (f64, f64))> {
    let limit = stable_dt(law, state);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-9) {
        return Err(Error::Cfl { dt, limit });
    }
    let g = &state.grid;
    let p = &state.params;
    let eval = |a: &[Vec<f64>], guess: &[f64], t: f64| -> Result<Rhs> {
        let mut r = rhs(law, g, a, guess, p)?;
        if let Some(src) = source {
            for (x, s) in r.da.iter_mut().zip(src(t)) {
                for (xi, si) in x.iter_mut().zip(s) {
                    *xi += si;
                }
            }
        }
        Ok(r)
    };
    let axpy = |a: &[Vec<f64>], k: &[Vec<f64>], s: f64| -> Vec<Vec<f64>> {
        a.iter().zip(k).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + s * v).collect()).collect()
    };
    let t = state.t;
    let k1 = eval(&state.a, &state.theta, t)?;
    let k2 = eval(&axpy(&state.a, &k1.da, 0.5 * dt), &k1.theta, t + 0.5 * dt)?;
    let k3 = eval(&axpy(&state.a, &k2.da, 0.5 * dt), &k2.theta, t + 0.5 * dt)?;
    let k4 = eval(&axpy(&state.a, &k3.da, dt), &k3.theta, t + dt)?;
    let a: Vec<Vec<f64>> = (0..state.a.len())
        .map(|k| {
            (0..g.len())
                .map(|c| {
                    state.a[k][c]
                        + dt / 6.0 * (k1.da[k][c] + 2.0 * k2.da[k][c] + 2.0 * k3.da[k][c] + k4.da[k][c])
                })
                .collect()
        })
        .collect();
    let (_, theta) = recover_all(law, g, &a, &k4.theta, p)?;
    let w = |f: fn(&(f64, f64)) -> f64| {
        dt / 6.0 * (f(&k1.production) + 2.0 * f(&k2.production) + 2.0 * f(&k3.production) + f(&k4.production))
    };
    let prod = (w(|x| x.0), w(|x| x.1));
    Ok((FieldState { grid: *g, t: t + dt, a, theta, params: *p }, prod))
}

pub fn step(state: &FieldState, law: &dyn FreeEnergy, dt: f64) -> Result<FieldState> {
    step_with_source(state, law, dt, None).map(|x| x.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsFrame {
    pub t: f64,
    pub e_total: f64,
    pub s_total: f64,
    /// Time-integrated discrete entropy production since t = 0.
    pub s_production_cum: f64,
    /// max |ξ − Φ(F)| over the cofactor and determinant slots.
    pub constraint_drift: f64,
    /// max |D_α F_{iβ} − D_β F_{iα}|.
    pub involution_drift: f64,
    pub theta_min: f64,
    /// Last step size (0 for the initial frame).
    pub dt: f64,
}

pub const DIAGNOSTICS_CSV_HEADER: &str =
    "t,E_total,S_total,S_production_cum,constraint_drift,involution_drift,theta_min,dt";

pub fn diagnostics(law: &dyn FreeEnergy, state: &FieldState, production_cum: f64, dt: f64) -> Result<DiagnosticsFrame> {
    let g = &state.grid;
    let d = g.d;
    let n = state_len(d);
    let states: Vec<ThermoState> = (0..g.len()).map(|c| state.state(c)).collect();
    let eta: Vec<f64> = states.iter().map(|s| eta_hat(law, &s.xi, s.theta)).collect::<Result<_>>()?;
    let drift = states
        .iter()
        .map(|s| {
            let f = s.xi.f();
            let mut e = (s.xi.w() - det(&f)).abs();
            if d == 3 {
                e = e.max((s.xi.zeta() - cof(&f)).max_abs());
            }
            e
        })
        .fold(0.0, f64::max);
    let fs: Vec<Mat> = states.iter().map(|s| s.xi.f()).collect();
    Ok(DiagnosticsFrame {
        t: state.t,
        e_total: g.integrate(&state.a[n - 1]),
        s_total: g.integrate(&eta),
        s_production_cum: production_cum,
        constraint_drift: drift,
        involution_drift: curl_residual(g, &fs)?,
        theta_min: state.theta.iter().cloned().fold(f64::INFINITY, f64::min),
        dt,
    })
}

pub fn write_diagnostics_csv<W: Write>(frames: &[DiagnosticsFrame], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{DIAGNOSTICS_CSV_HEADER}")?;
    for f in frames {
        writeln!(
            w,
            "{:.9e},{:.12e},{:.12e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            f.t, f.e_total, f.s_total, f.s_production_cum, f.constraint_drift, f.involution_drift, f.theta_min, f.dt
        )?;
    }
    Ok(())
}

fn gradient_norm(state: &FieldState) -> f64 {
    let g = &state.grid;
    let mut worst: f64 = 0.0;
    for (k, comp) in state.a.iter().enumerate() {
        let field = if k == state.a.len() - 1 { &state.theta } else { comp };
        for al in 0..g.d {
            worst = worst.max(max_abs(&g.diff(field, al)));
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    /// Number of equally spaced output frames after t = 0.
    pub frames: usize,
    /// Keep the primitive fields at every frame.
    pub keep_fields: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub diagnostics: Vec<DiagnosticsFrame>,
    /// (t, U) at t = 0 and every frame when `keep_fields` is set.
    pub frames: Vec<(f64, Fields)>,
    pub final_state: FieldState,
    pub steps: usize,
}

/// A run that stopped early, with the last good state for dumping.
#[derive(Debug)]
pub struct RunAbort {
    pub error: Error,
    pub last_good: Box<FieldState>,
    pub diagnostics: Vec<DiagnosticsFrame>,
}

impl From<RunAbort> for Error {
    fn from(a: RunAbort) -> Error {
        a.error
    }
}

/// Advance to `t_end`, landing exactly on the frame times t_end·j/frames.
/// `on_step` sees every accepted state.
pub fn run(
    initial: FieldState,
    law: &dyn FreeEnergy,
    opts: &RunOptions,
    mut on_step: Option<&mut dyn FnMut(&FieldState)>,
) -> std::result::Result<RunOutput, RunAbort> {
    let mut state = initial;
    let mut diags = Vec::new();
    let mut frames = Vec::new();
    let abort = |error: Error, state: &FieldState, diags: &Vec<DiagnosticsFrame>| RunAbort {
        error,
        last_good: Box::new(state.clone()),
        diagnostics: diags.clone(),
    };
    if opts.frames == 0 || !(opts.t_end > state.t) {
        return Err(abort(Error::Parameter("need t_end > t0 and at least one frame".into()), &state, &diags));
    }
    let t0 = state.t;
    let g0 = gradient_norm(&state).max(1e-8);
    let mut prod = 0.0;
    match diagnostics(law, &state, 0.0, 0.0) {
        Ok(d) => diags.push(d),
        Err(e) => return Err(abort(e, &state, &diags)),
    }
    if opts.keep_fields {
        frames.push((state.t, state.primitives()));
    }
    if let Some(cb) = on_step.as_deref_mut() {
        cb(&state);
    }
    let mut steps = 0;
    for j in 1..=opts.frames {
        let target = t0 + (opts.t_end - t0) * j as f64 / opts.frames as f64;
        let mut last_dt = 0.0;
        while state.t < target - 1e-14 * target.abs().max(1.0) {
            let dt = stable_dt(law, &state).min(target - state.t);
            match step_with_source(&state, law, dt, None) {
                Ok((next, (pv, ph))) => {
                    state = next;
                    prod += pv + ph;
                }
                Err(e) => return Err(abort(e, &state, &diags)),
            }
            steps += 1;
            last_dt = dt;
            if let Some(cb) = on_step.as_deref_mut() {
                cb(&state);
            }
        }
        state.t = target;
        let growth = gradient_norm(&state) / g0;
        if growth > state.params.smoothness_limit {
            return Err(abort(Error::Smoothness { t: state.t, growth }, &state, &diags));
        }
        let dg = match diagnostics(law, &state, prod, last_dt) {
            Ok(d) => d,
            Err(e) => return Err(abort(e, &state, &diags)),
        };
        if let Some(floor) = state.params.theta_floor {
            if dg.theta_min < floor {
                let t = state.t;
                return Err(abort(Error::ThetaFloor { t, min: dg.theta_min, floor }, &state, &diags));
            }
        }
        diags.push(dg);
        if opts.keep_fields {
            frames.push((state.t, state.primitives()));
        }
    }
    Ok(RunOutput { diagnostics: diags, frames, final_state: state, steps })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    Rest,
    SineShear,
    ThermalBump,
    GradientPerturbation,
}

impl InitialKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rest" => Ok(InitialKind::Rest),
            "sine-shear" => Ok(InitialKind::SineShear),
            "thermal-bump" => Ok(InitialKind::ThermalBump),
            "gradient-perturbation" => Ok(InitialKind::GradientPerturbation),
            _ => Err(Error::Parameter(format!("unknown initial kind '{s}'"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InitialKind::Rest => "rest",
            InitialKind::SineShear => "sine-shear",
            InitialKind::ThermalBump => "thermal-bump",
            InitialKind::GradientPerturbation => "gradient-perturbation",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialCondition {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub theta0: f64,
    /// Size ε of an added smooth velocity/temperature perturbation.
    pub perturbation: f64,
}

impl InitialCondition {
    pub fn new(kind: InitialKind, amplitude: f64, theta0: f64) -> Self {
        InitialCondition { kind, amplitude, theta0, perturbation: 0.0 }
    }

    /// Primitive fields: F₀ = I + D_h u₀ (central differences of a closed-form
    /// periodic displacement, hence exactly curl free on the grid),
    /// ξ₀ = Φ(F₀).
    pub fn fields(&self, grid: &Grid) -> Result<Fields> {
        let d = grid.d;
        let (a, th0) = (self.amplitude, self.theta0);
        if !(a.abs() <= 0.5 && a.is_finite()) {
            return Err(Error::Parameter(format!("amplitude {a} outside the admissible range |a| <= 0.5")));
        }
        if !(th0 > 0.0 && th0.is_finite()) || !self.perturbation.is_finite() {
            return Err(Error::Parameter(format!("theta0 must be positive, got {th0}")));
        }
        let k = 2.0 * PI / grid.l;
        let disp: Vec<[f64; 3]> = (0..grid.len())
            .map(|c| {
                let x = grid.x(c);
                let mut u = [0.0; 3];
                match self.kind {
                    InitialKind::SineShear => u[0] = a / k * (k * x[1]).sin(),
                    InitialKind::GradientPerturbation => {
                        u[0] = a / k * (k * x[0]).sin() * (k * x[1]).sin();
                        u[1] = a / k * (k * (x[0] + x[1])).sin();
                        if d == 3 {
                            u[2] = a / k * (k * (x[2] + x[0])).sin();
                        }
                    }
                    _ => {}
                }
                u
            })
            .collect();
        let fs = gradient_field(grid, &Mat::identity(d), &disp)?;
        let eps = self.perturbation;
        let states: Vec<ThermoState> = (0..grid.len())
            .map(|c| {
                let x = grid.x(c);
                let mut theta = th0;
                if self.kind == InitialKind::ThermalBump {
                    theta *= 1.0 + a * (k * x[0]).cos() * (k * x[1]).cos();
                }
                let mut v = [0.0; 3];
                if eps != 0.0 {
                    for (i, vi) in v.iter_mut().enumerate().take(d) {
                        *vi = eps * (k * x[(i + 1) % d] + 0.3 * i as f64).sin();
                    }
                    theta += eps * th0 * (k * x[0]).cos() * (k * x[1]).sin();
                }
                ThermoState { xi: phi(&fs[c]), v, theta }
            })
            .collect();
        if states.iter().any(|s| !(s.theta > 0.0)) {
            return Err(Error::Parameter("initial temperature not positive".into()));
        }
        Ok(Fields::from_states(d, &states))
    }
}

pub fn make_initial(
    ic: &InitialCondition,
    grid: &Grid,
    law: &dyn FreeEnergy,
    params: RunParams,
) -> Result<FieldState> {
    let u = ic.fields(grid)?;
    if let Some(floor) = params.theta_floor {
        if u.theta_min() < floor {
            return Err(Error::Parameter(format!(
                "initial temperature {:.4} below the floor {floor}",
                u.theta_min()
            )));
        }
    }
    FieldState::from_primitives(*grid, law, &u, params, 0.0)
}

/// Frames restricted to a coarse grid; frame 0 is the initial data.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub frames: Vec<(f64, Fields)>,
    pub diagnostics: Vec<DiagnosticsFrame>,
}

/// Adiabatic solution on a grid refined by `factor`, restricted by injection
/// to `grid` at the frame times.
pub fn reference_solution(
    ic: &InitialCondition,
    grid: &Grid,
    law: &dyn FreeEnergy,
    opts: &RunOptions,
    factor: usize,
    params: RunParams,
) -> Result<Trajectory> {
    let mut p = params;
    p.coeffs = TransportCoeffs::adiabatic();
    refined_solution(ic, grid, law, opts, factor, p)
}

/// As [`reference_solution`] but keeping the transport coefficients of
/// `params` (e.g. a thermoelastic reference).
pub fn refined_solution(
    ic: &InitialCondition,
    grid: &Grid,
    law: &dyn FreeEnergy,
    opts: &RunOptions,
    factor: usize,
    params: RunParams,
) -> Result<Trajectory> {
    if factor == 0 {
        return Err(Error::Parameter("resolution factor must be >= 1".into()));
    }
    let fine = Grid::new(grid.d, grid.n * factor, grid.l)?;
    let init = make_initial(ic, &fine, law, params)?;
    let out = run(init, law, &RunOptions { keep_fields: true, ..*opts }, None)?;
    let frames = out
        .frames
        .into_iter()
        .map(|(t, u)| {
            let comps = u.comps.iter().map(|c| grid.restrict_from(&fine, c, factor)).collect();
            (t, Fields::from_comps(grid.d, comps).expect("restricted layout"))
        })
        .collect();
    Ok(Trajectory { grid: *grid, frames, diagnostics: out.diagnostics })
}

// ---------------------------------------------------------------------------
// snapshots

/// Header line followed by little-endian f64 arrays, one per primitive field.
pub fn write_snapshot<W: Write>(mut w: W, grid: &Grid, t: f64, u: &Fields) -> std::io::Result<()> {
    writeln!(w, "POLYTHERM v1, {}, {}, {:.17e}, {}", grid.d, grid.n, t, u.comps.len())?;
    for comp in &u.comps {
        for x in comp {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(usize, usize, f64, Vec<Vec<f64>>)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let parts: Vec<&str> = header.trim().split(',').map(|s| s.trim()).collect();
    if parts.len() != 5 || parts[0] != "POLYTHERM v1" {
        return Err(Error::Parameter(format!("not a snapshot header: '{}'", header.trim())));
    }
    let bad = |what: &str| Error::Parameter(format!("bad snapshot {what}"));
    let d: usize = parts[1].parse().map_err(|_| bad("dimension"))?;
    let n: usize = parts[2].parse().map_err(|_| bad("size"))?;
    let t: f64 = parts[3].parse().map_err(|_| bad("time"))?;
    let nf: usize = parts[4].parse().map_err(|_| bad("field count"))?;
    let cells = n.pow(d as u32);
    let mut buf = [0u8; 8];
    let mut comps = Vec::with_capacity(nf);
    for _ in 0..nf {
        let mut c = Vec::with_capacity(cells);
        for _ in 0..cells {
            r.read_exact(&mut buf)?;
            c.push(f64::from_le_bytes(buf));
        }
        comps.push(c);
    }
    Ok((d, n, t, comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{LawParams, PolyconvexLaw};

    fn law() -> PolyconvexLaw {
        PolyconvexLaw::new(2, LawParams::default_for(2)).unwrap()
    }

    #[test]
    fn theta_recovery_roundtrip() {
        let law = law();
        let xi = phi(&Mat::from_flat(2, &[1.1, 0.2, -0.1, 0.9]));
        for th in [0.3, 1.0, 4.0] {
            let e = e_hat(&law, &xi, th).unwrap();
            let r = recover_theta(&law, &xi, e, 1.0, 0.01, 0).unwrap();
            assert!((r - th).abs() < 1e-12, "{r} vs {th}");
        }
        assert!(recover_theta(&law, &xi, -100.0, 1.0, 0.01, 3).is_err());
    }

    #[test]
    fn rest_is_a_fixed_point() {
        let law = law();
        let g = Grid::new(2, 8, 1.0).unwrap();
        let ic = InitialCondition::new(InitialKind::Rest, 0.0, 1.0);
        let s0 = make_initial(&ic, &g, &law, RunParams::new(TransportCoeffs::constant(0.01, 0.01))).unwrap();
        let dt = stable_dt(&law, &s0);
        let s1 = step(&s0, &law, dt).unwrap();
        for (a, b) in s0.a.iter().zip(&s1.a) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14));
        }
    }

    #[test]
    fn cfl_violation_is_an_error() {
        let law = law();
        let g = Grid::new(2, 8, 1.0).unwrap();
        let ic = InitialCondition::new(InitialKind::SineShear, 0.05, 1.0);
        let s0 = make_initial(&ic, &g, &law, RunParams::new(TransportCoeffs::adiabatic())).unwrap();
        let dt = stable_dt(&law, &s0);
        assert!(matches!(step(&s0, &law, 2.0 * dt), Err(Error::Cfl { .. })));
    }

    #[test]
    fn snapshot_roundtrip() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let ic = InitialCondition::new(InitialKind::GradientPerturbation, 0.1, 1.0);
        let u = ic.fields(&g).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &g, 0.125, &u).unwrap();
        let (d, n, t, comps) = read_snapshot(std::io::Cursor::new(buf)).unwrap();
        assert_eq!((d, n, t), (2, 8, 0.125));
        assert_eq!(comps, u.comps);
    }

    #[test]
    fn amplitude_out_of_box() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        assert!(InitialCondition::new(InitialKind::SineShear, 0.9, 1.0).fields(&g).is_err());
    }
}
