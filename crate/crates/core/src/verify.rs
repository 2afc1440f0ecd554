//! Property suites behind `polytherm verify`: kinematic identities,
//! constitutive structure, symmetrizability and the relative-entropy bounds.
//! Every check becomes one report row.

use crate::augmented::{entropy_pair_residual, hyperbolicity_certificate, off_block_max, symmetrizer, symmetrizer_fd};
use crate::constitutive::{
    check_coeff_bounds, check_gibbs, check_growth, derivative_check, sample_states, FreeEnergy, LawParams,
    PolyconvexLaw, SampleBox, ShellSchedule, TransportCoeffs,
};
use crate::error::Result;
use crate::grid::Grid;
use crate::kinematics::{cof, det, null_lagrangian_residual, transport_residual, VelocityField};
use crate::relentropy::{
    relative_bounds_check, identity_residual, manufactured_forcing, Frame, GammaParams, IdentityVariant, RunTrack,
    TrigMotion,
};
use crate::tensor::{Mat, ThermoState};
use rayon::prelude::*;
use std::io::Write;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub value: f64,
    /// The threshold `value` is compared against (meaning depends on the check).
    pub tolerance: f64,
    pub status: Status,
}

impl CheckRow {
    fn new(suite: &'static str, check: impl Into<String>, value: f64, tolerance: f64, ok: bool) -> Self {
        CheckRow { suite, check: check.into(), value, tolerance, status: Status::from_bool(ok) }
    }

    fn at_most(suite: &'static str, check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(suite, check, value, tolerance, value <= tolerance)
    }

    fn at_least(suite: &'static str, check: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::new(suite, check, value, tolerance, value >= tolerance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub d: usize,
    pub law: LawParams,
    pub coeffs: TransportCoeffs,
    pub seed: u64,
    /// Random states for derivative, Gibbs and symmetrizer checks.
    pub samples: usize,
    /// Pairs for the relative-entropy bounds (refit at 4× for stability).
    pub bound_samples: usize,
    pub fd_step: f64,
    pub gamma: GammaParams,
    pub schedule: ShellSchedule,
    /// Grid sizes of the refinement studies (d = 2).
    pub refinement: Vec<usize>,
}

impl VerifyConfig {
    pub fn default_for(d: usize) -> Self {
        VerifyConfig {
            d,
            law: LawParams::default_for(d),
            coeffs: TransportCoeffs::constant(1e-2, 1e-2),
            seed: 7,
            samples: 1000,
            bound_samples: 10_000,
            fd_step: 1e-5,
            gamma: GammaParams::default(),
            schedule: ShellSchedule::default(),
            refinement: vec![32, 64, 128],
        }
    }
}

pub const DERIVATIVE_TOL: f64 = 1e-6;
pub const SYMMETRIZER_TOL: f64 = 1e-5;
pub const SYMMETRIZER_STEP: f64 = 1e-4;
pub const ORDER_MIN: f64 = 1.9;
/// Residuals this small count as exact (no rate can be measured).
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Observed orders between consecutive refinements of equally spaced sizes
/// ratio 2; `None` entries when both residuals sit at round-off.
pub fn observed_orders(residuals: &[f64]) -> Vec<Option<f64>> {
    residuals
        .windows(2)
        .map(|w| {
            if w[0] <= ROUNDOFF_FLOOR && w[1] <= ROUNDOFF_FLOOR {
                None
            } else {
                Some((w[0] / w[1]).log2())
            }
        })
        .collect()
}

/// Smallest measured order; +∞ when every level is at round-off.
pub fn min_order(residuals: &[f64]) -> f64 {
    observed_orders(residuals).into_iter().map(|o| o.unwrap_or(f64::INFINITY)).fold(f64::INFINITY, f64::min)
}

fn motion(d: usize) -> TrigMotion {
    TrigMotion { d, l: 1.0, amplitude: 0.05, omega: 2.0, phase: 0.3, theta0: 1.0, theta_amplitude: 0.1 }
}

/// Analytic F = I + ∇u for u₁ = a sin(kx₁) sin(2kx₂), u₂ = a cos(2kx₁ + 0.3) sin(kx₂).
/// Equal wavenumbers per direction would make the discrete mixed partials
/// commute exactly and hide the truncation error.
fn mixed_gradient(x: [f64; 3]) -> Mat {
    let (a, k) = (0.05, 2.0 * PI);
    let (x1, x2) = (x[0], x[1]);
    let mut f = Mat::identity(2);
    f[(0, 0)] += a * k * (k * x1).cos() * (2.0 * k * x2).sin();
    f[(0, 1)] += 2.0 * a * k * (k * x1).sin() * (2.0 * k * x2).cos();
    f[(1, 0)] -= 2.0 * a * k * (2.0 * k * x1 + 0.3).sin() * (k * x2).sin();
    f[(1, 1)] += a * k * (2.0 * k * x1 + 0.3).cos() * (k * x2).cos();
    f
}

/// max over samples of |cof(F)ᵀF − det F·I| relative to |F|^d.
pub fn cofactor_identity_residual(d: usize, n: usize, seed: u64) -> f64 {
    sample_states(d, n, seed, &SampleBox::default())
        .iter()
        .map(|s| {
            let f = s.xi.f();
            let prod = cof(&f).transpose().matmul(&f);
            let dt = det(&f);
            let err = (prod - Mat::identity(d).scale(dt)).max_abs();
            err / f.norm().powi(d as i32).max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Null-Lagrangian and transport residuals of a smooth periodic motion
/// sampled at each grid size (dt = h/2 for the transport).
pub fn refinement_residuals(d: usize, sizes: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mo = motion(d);
    let mut nl = Vec::new();
    let mut tr = Vec::new();
    for &n in sizes {
        let g = Grid::new(d, n, 1.0)?;
        let t = 0.2;
        let dt = 0.5 * g.h();
        let sample = |t: f64| -> (Vec<Mat>, Vec<[f64; 3]>) {
            (0..g.len()).map(|c| {
                let (f, v, _) = mo.eval(g.x(c), t);
                (f, v)
            }).unzip()
        };
        let (f0, _) = sample(t - dt);
        let (f1, v1) = sample(t);
        let (f2, _) = sample(t + dt);
        let fx: Vec<Mat> = (0..g.len()).map(|c| mixed_gradient(g.x(c))).collect();
        nl.push(null_lagrangian_residual(&g, &fx)?);
        let vel = VelocityField::periodic(d, v1);
        tr.push(transport_residual(&g, &[f0, f1, f2], &vel, dt)?.max());
    }
    Ok((nl, tr))
}

/// Candidate and reference motions of the manufactured pair.
pub fn manufactured_pair(d: usize) -> (TrigMotion, TrigMotion) {
    let a = TrigMotion { d, l: 1.0, amplitude: 0.05, omega: 2.0, phase: 0.0, theta0: 1.0, theta_amplitude: 0.1 };
    let b = TrigMotion { d, l: 1.0, amplitude: 0.03, omega: 1.3, phase: 0.7, theta0: 1.1, theta_amplitude: 0.05 };
    (a, b)
}

fn manufactured_track(
    law: &PolyconvexLaw,
    grid: &Grid,
    m: &TrigMotion,
    coeffs: TransportCoeffs,
    times: &[f64],
) -> Result<RunTrack> {
    let frames: Vec<(f64, _)> = times.iter().map(|&t| (t, m.fields(grid, t))).collect();
    let forcing = manufactured_forcing(law, grid, &coeffs, &frames)?;
    Ok(RunTrack {
        coeffs,
        frames: frames.into_iter().zip(forcing).map(|((t, u), forcing)| Frame { t, u, forcing }).collect(),
    })
}

/// Coefficients of the two sides for each identity variant.
pub fn variant_coeffs(v: IdentityVariant) -> (TransportCoeffs, TransportCoeffs) {
    let cand = TransportCoeffs::constant(0.05, 0.05);
    let refr = match v {
        IdentityVariant::General => TransportCoeffs::constant(0.02, 0.03),
        IdentityVariant::ViscousVsAdiabatic => TransportCoeffs::adiabatic(),
        IdentityVariant::ViscousVsThermoelastic => TransportCoeffs::constant(0.0, 0.03),
    };
    (cand, refr)
}

/// Max residual of the relative-entropy identity on the manufactured pair at
/// each grid size, with dt = h/2 refined together with h.
pub fn identity_residuals(law: &PolyconvexLaw, sizes: &[usize], v: IdentityVariant) -> Result<Vec<f64>> {
    let d = law.d();
    let (ma, mb) = manufactured_pair(d);
    let (cc, rc) = variant_coeffs(v);
    sizes
        .iter()
        .map(|&n| {
            let grid = Grid::new(d, n, 1.0)?;
            let dt = 0.5 * grid.h();
            let times: Vec<f64> = (0..5).map(|j| 0.1 + j as f64 * dt).collect();
            let a = manufactured_track(law, &grid, &ma, cc, &times)?;
            let b = manufactured_track(law, &grid, &mb, rc, &times)?;
            Ok(identity_residual(law, &grid, &a, &b, v)?.residual_linf())
        })
        .collect()
}

pub fn identity_suite(law: &PolyconvexLaw, cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    const S: &str = "relentropy";
    if law.d() != 2 {
        return Ok(vec![]);
    }
    let variants = [
        (IdentityVariant::General, "identity_order_general"),
        (IdentityVariant::ViscousVsAdiabatic, "identity_order_vs_adiabatic"),
        (IdentityVariant::ViscousVsThermoelastic, "identity_order_vs_thermoelastic"),
    ];
    let sizes: Vec<usize> = cfg.refinement.iter().map(|n| n / 2).collect();
    variants
        .iter()
        .map(|(v, name)| Ok(CheckRow::at_least(S, *name, min_order(&identity_residuals(law, &sizes, *v)?), ORDER_MIN)))
        .collect()
}

pub fn kinematics_suite(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    const S: &str = "kinematics";
    let mut rows = Vec::new();
    for d in [2, 3] {
        let r = cofactor_identity_residual(d, cfg.samples, cfg.seed);
        rows.push(CheckRow::at_most(S, format!("cofactor_identity_d{d}"), r, 1e-12));
    }
    let (nl, tr) = refinement_residuals(2, &cfg.refinement)?;
    rows.push(CheckRow::at_least(S, "null_lagrangian_order", min_order(&nl), ORDER_MIN));
    rows.push(CheckRow::at_least(S, "transport_order", min_order(&tr), ORDER_MIN));
    Ok(rows)
}

pub fn constitutive_suite(law: &PolyconvexLaw, cfg: &VerifyConfig) -> Vec<CheckRow> {
    const S: &str = "constitutive";
    let samples = sample_states(law.d(), cfg.samples, cfg.seed, &SampleBox::gamma(cfg.gamma.m, cfg.gamma.delta));
    let der = derivative_check(law, &samples, cfg.fd_step);
    let gibbs = check_gibbs(law, &samples);
    let growth = check_growth(law, &cfg.schedule);
    let coeff = check_coeff_bounds(&cfg.coeffs, law, &cfg.schedule);
    vec![
        CheckRow::at_most(S, "derivatives_max_rel_err", der.max(), DERIVATIVE_TOL),
        CheckRow::new(S, "gibbs_min_eig_psi_xixi", gibbs.min_eig_xixi, 0.0, gibbs.pass_xixi),
        CheckRow::new(S, "gibbs_max_psi_thetatheta", gibbs.max_psi_thetatheta, 0.0, gibbs.pass_thetatheta),
        CheckRow::new(S, "growth_sandwich_c_lower", growth.c_lower, 0.0, growth.lower_ok),
        CheckRow::new(S, "growth_sandwich_c_upper", growth.c_upper, 0.0, growth.upper_ok),
        CheckRow::new(S, "growth_flux_limits", if growth.pass { 1.0 } else { 0.0 }, 1.0, growth.pass),
        CheckRow::new(S, "coeff_bounds_adiabatic_mode", coeff.c_mu.max(coeff.c_k), 0.0, coeff.pass_adiabatic_mode),
        CheckRow::new(S, "coeff_bounds_zero_viscosity_mode", coeff.c_combined, 0.0, coeff.pass_zero_viscosity_mode),
    ]
}

/// Largest relative mismatch between the analytic and the finite-difference
/// symmetrizer, and the largest off-block entry, over `samples`.
pub fn symmetrizer_agreement(law: &dyn FreeEnergy, samples: &[ThermoState]) -> Result<(f64, f64)> {
    let d = law.d();
    let r: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|s| {
            let a = symmetrizer(law, s)?;
            let fd = symmetrizer_fd(law, s, SYMMETRIZER_STEP)?;
            let scale = a.amax().max(1.0);
            Ok(((a - &fd).amax() / scale, off_block_max(&fd, d) / scale))
        })
        .collect::<Result<_>>()?;
    Ok(r.iter().fold((0.0f64, 0.0f64), |acc, x| (acc.0.max(x.0), acc.1.max(x.1))))
}

pub fn augmented_suite(law: &PolyconvexLaw, cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    const S: &str = "augmented";
    let samples = sample_states(law.d(), cfg.samples, cfg.seed ^ 0x5a, &SampleBox::gamma(cfg.gamma.m, cfg.gamma.delta));
    let (mismatch, off) = symmetrizer_agreement(law, &samples)?;
    let hyp = hyperbolicity_certificate(law, &samples);
    let pair = samples
        .iter()
        .take(100)
        .map(|s| entropy_pair_residual(law, s, 1e-6))
        .collect::<Result<Vec<_>>>()?;
    let dh = pair.iter().map(|x| x.0).fold(0.0, f64::max);
    let dq = pair.iter().map(|x| x.1).fold(0.0, f64::max);
    let min_eig = hyp.min_eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        CheckRow::at_most(S, "symmetrizer_fd_mismatch", mismatch, SYMMETRIZER_TOL),
        CheckRow::at_most(S, "symmetrizer_off_block", off, SYMMETRIZER_TOL),
        CheckRow::new(S, "symmetrizer_min_eigenvalue", min_eig, 0.0, hyp.pass),
        CheckRow::at_most(S, "entropy_multiplier_residual", dh, 1e-6),
        CheckRow::at_most(S, "entropy_flux_residual", dq, 1e-6),
    ])
}

pub fn bounds_suite(law: &PolyconvexLaw, cfg: &VerifyConfig) -> Vec<CheckRow> {
    const S: &str = "relentropy";
    let rep = relative_bounds_check(law, &cfg.coeffs, &cfg.gamma, cfg.bound_samples, cfg.seed);
    rep.bounds
        .iter()
        .map(|b| {
            let c = [b.near.0, b.far.0].into_iter().flatten().fold(f64::NAN, f64::max);
            CheckRow::new(S, format!("{}_{}", b.name, b.label), c, 0.0, b.pass)
        })
        .collect()
}

/// Run every suite; the law-dependent suites use `cfg.d` and `cfg.law`.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let law = PolyconvexLaw::new(cfg.d, cfg.law)?;
    let mut rows = kinematics_suite(cfg)?;
    rows.extend(constitutive_suite(&law, cfg));
    rows.extend(augmented_suite(&law, cfg)?);
    rows.extend(identity_suite(&law, cfg)?);
    rows.extend(bounds_suite(&law, cfg));
    Ok(rows)
}

pub fn all_pass(rows: &[CheckRow]) -> bool {
    rows.iter().all(|r| r.status == Status::Pass)
}

pub const VERIFY_CSV_HEADER: &str = "suite,check,value,tolerance,status";

pub fn write_report_csv<W: Write>(rows: &[CheckRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{VERIFY_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:.6e},{:.6e},{}", r.suite, r.check, r.value, r.tolerance, r.status.label())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_a_quadratic_sequence() {
        let o = observed_orders(&[4e-3, 1e-3, 2.5e-4]);
        assert!(o.iter().all(|x| (x.unwrap() - 2.0).abs() < 1e-12));
        assert_eq!(min_order(&[1e-14, 1e-15, 1e-14]), f64::INFINITY);
    }

    #[test]
    fn cofactor_identity_holds() {
        assert!(cofactor_identity_residual(3, 200, 1) < 1e-13);
    }
}
