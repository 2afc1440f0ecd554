//! Acceptance criteria with pinned tolerances. Runs as a plain binary so the
//! PASS/WARN/FAIL lines show up in `cargo test` output; exits non-zero iff a
//! criterion FAILs. WARN marks a monotone ladder whose slope leaves the
//! window, which the criterion itself classifies as a warning.

use polytherm::constitutive::{
    derivative_check, sample_states, LawParams, PolyconvexLaw, SampleBox, ThermalKind, TransportCoeffs,
};
use polytherm::grid::Grid;
use polytherm::harness::{run_sweep, Experiment, SweepResult, SweepSpec, Verdict};
use polytherm::kinematics::curl_residual;
use polytherm::relentropy::{relative_bounds_check, GammaParams, IdentityVariant};
use polytherm::solver::{make_initial, run, InitialCondition, InitialKind, RunOptions, RunOutput, RunParams};
use polytherm::verify::{
    augmented_suite, cofactor_identity_residual, identity_residuals, min_order, refinement_residuals, Status,
    VerifyConfig,
};
use rayon::prelude::*;
use std::time::Instant;

const DERIVATIVE_TOL: f64 = 1e-6;
const DERIVATIVE_BUDGET_S: f64 = 10.0;
const ORDER_MIN: f64 = 1.9;
const NULL_LAGRANGIAN_BUDGET_S: f64 = 60.0;
const COFACTOR_TOL: f64 = 1e-12;
const ENERGY_DRIFT_TOL: f64 = 1e-8;
/// Slack of the entropy ledger, in units of h².
const LEDGER_SLACK_H2: f64 = 1.0;
/// Drifts below this are round-off: the quantity is preserved exactly.
const ROUNDOFF: f64 = 1e-10;
const RATIO_WINDOW: (f64, f64) = (80.0, 120.0);
const ENVELOPE_MIN: f64 = 0.95;
const SWEEP_BUDGET_S: f64 = 900.0;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Outcome {
    Pass,
    Warn,
    Fail,
}

struct Line {
    id: usize,
    name: &'static str,
    outcome: Outcome,
    detail: String,
}

fn line(id: usize, name: &'static str, ok: bool, detail: String) -> Line {
    Line { id, name, outcome: if ok { Outcome::Pass } else { Outcome::Fail }, detail }
}

fn law(d: usize, thermal: ThermalKind) -> PolyconvexLaw {
    let mut p = LawParams::default_for(d);
    p.thermal = thermal;
    PolyconvexLaw::new(d, p).expect("built-in law")
}

const LAWS: [ThermalKind; 2] = [ThermalKind::Quadratic, ThermalKind::Logarithmic];

fn derivative_oracles() -> Line {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let samples = sample_states(d, 1000, 7, &SampleBox::gamma(3.0, 0.2));
        for th in LAWS {
            worst = worst.max(derivative_check(&law(d, th), &samples, 1e-5).max());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    line(
        1,
        "derivative oracles",
        worst <= DERIVATIVE_TOL && secs < DERIVATIVE_BUDGET_S,
        format!("max rel err {worst:.2e} (tol {DERIVATIVE_TOL:.0e}), {secs:.2} s"),
    )
}

fn null_lagrangian() -> Line {
    let t = Instant::now();
    let cof = [2, 3].iter().map(|&d| cofactor_identity_residual(d, 1000, 7)).fold(0.0, f64::max);
    let (nl, tr) = refinement_residuals(2, &[32, 64, 128]).expect("refinement");
    // curl of the discrete initial gradient: exactly zero by construction
    let curl = [32, 64, 128]
        .iter()
        .map(|&n| {
            let grid = Grid::new(2, n, 1.0).unwrap();
            let ic = InitialCondition::new(InitialKind::GradientPerturbation, 0.1, 1.0);
            let f: Vec<_> = ic.fields(&grid).unwrap().states().iter().map(|s| s.xi.f()).collect();
            curl_residual(&grid, &f).unwrap()
        })
        .fold(0.0, f64::max);
    let (o1, o2) = (min_order(&nl), min_order(&tr));
    let secs = t.elapsed().as_secs_f64();
    line(
        2,
        "null-Lagrangian suite",
        cof <= COFACTOR_TOL && o1 >= ORDER_MIN && o2 >= ORDER_MIN && curl <= ROUNDOFF && secs < NULL_LAGRANGIAN_BUDGET_S,
        format!("cofactor {cof:.1e}, piola order {o1:.3}, transport order {o2:.3}, curl {curl:.1e}, {secs:.2} s"),
    )
}

fn symmetrizability() -> Line {
    let mut failed = Vec::new();
    let mut detail = Vec::new();
    for th in LAWS {
        let cfg = VerifyConfig::default_for(3);
        let rows = augmented_suite(&law(3, th), &cfg).expect("augmented suite");
        for r in rows.iter().filter(|r| r.check.starts_with("symmetrizer")) {
            if r.status == Status::Fail {
                failed.push(format!("{th:?}/{}", r.check));
            }
            if r.check == "symmetrizer_fd_mismatch" || r.check == "symmetrizer_min_eigenvalue" {
                detail.push(format!("{th:?} {} {:.2e}", r.check.trim_start_matches("symmetrizer_"), r.value));
            }
        }
    }
    line(3, "symmetrizability", failed.is_empty(), format!("{}; failed: {failed:?}", detail.join(", ")))
}

fn simulate(n: usize, coeffs: TransportCoeffs) -> (Grid, RunOutput) {
    let d2 = law(2, ThermalKind::Quadratic);
    let grid = Grid::new(2, n, 1.0).unwrap();
    let ic = InitialCondition::new(InitialKind::GradientPerturbation, 0.1, 1.0);
    let s = make_initial(&ic, &grid, &d2, RunParams::new(coeffs)).unwrap();
    let out = run(s, &d2, &RunOptions { t_end: 0.25, frames: 10, keep_fields: false }, None).expect("run");
    (grid, out)
}

fn conservation_entropy() -> Line {
    let (_, ad) = simulate(64, TransportCoeffs::adiabatic());
    let e0 = ad.diagnostics[0].e_total;
    let drift = ad.diagnostics.iter().map(|f| (f.e_total - e0).abs() / e0.abs()).fold(0.0, f64::max);
    let (grid, vi) = simulate(64, TransportCoeffs::constant(1e-2, 1e-2));
    let s0 = vi.diagnostics[0].s_total;
    let gap = vi.diagnostics.iter().map(|f| f.s_total - s0 - f.s_production_cum).fold(f64::INFINITY, f64::min);
    let slack = LEDGER_SLACK_H2 * grid.h() * grid.h();
    line(
        4,
        "conservation / entropy ledger",
        drift <= ENERGY_DRIFT_TOL && gap >= -slack,
        format!("energy drift {drift:.2e} (tol {ENERGY_DRIFT_TOL:.0e}); min dS - ledger {gap:.2e} >= -h^2 = {:.2e}", -slack),
    )
}

fn constraint_involution() -> Line {
    let runs: Vec<(f64, f64)> = [32, 64, 128]
        .par_iter()
        .map(|&n| {
            let (_, out) = simulate(n, TransportCoeffs::constant(1e-2, 1e-2));
            let last = out.diagnostics[out.diagnostics.len() - 1];
            (last.constraint_drift, last.involution_drift)
        })
        .collect();
    let cons: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let curl: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let oc = min_order(&cons);
    let curl_ok = curl.iter().all(|c| *c <= ROUNDOFF) || min_order(&curl) >= ORDER_MIN;
    line(
        5,
        "constraint / involution drift",
        oc >= ORDER_MIN && curl_ok,
        format!("constraint drift [{}] order {oc:.3}; curl drift [{}] (round-off floor {ROUNDOFF:.0e})", sci(&cons), sci(&curl)),
    )
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

fn identity() -> Line {
    let l = law(2, ThermalKind::Quadratic);
    let orders: Vec<f64> = [IdentityVariant::General, IdentityVariant::ViscousVsAdiabatic, IdentityVariant::ViscousVsThermoelastic]
        .iter()
        .map(|v| min_order(&identity_residuals(&l, &[16, 32, 64], *v).unwrap()))
        .collect();
    line(
        6,
        "relative-entropy identity",
        orders.iter().all(|o| *o >= ORDER_MIN),
        format!("orders (general, vs adiabatic, vs thermoelastic) {orders:.3?}"),
    )
}

fn ladder_line(id: usize, name: &'static str, results: &[&SweepResult], secs: f64) -> Line {
    let monotone = results.iter().all(|r| r.monotone);
    let in_window = results.iter().all(|r| r.slope_in_window);
    let coeff_ok = results.iter().all(|r| r.coeff_bounds_pass != Some(false));
    let slopes: Vec<String> = results
        .iter()
        .map(|r| format!("{} slope {:.3}", r.spec.experiment.label(), r.slope.unwrap_or(f64::NAN)))
        .collect();
    let outcome = if !monotone || !coeff_ok || secs >= SWEEP_BUDGET_S {
        Outcome::Fail
    } else if in_window {
        Outcome::Pass
    } else {
        Outcome::Warn
    };
    Line {
        id,
        name,
        outcome,
        detail: format!(
            "monotone {monotone}, {} (window [0.8, 1.2]), coefficient bounds {coeff_ok}, {secs:.0} s",
            slopes.join(", ")
        ),
    }
}

fn perturbation_line(r: &SweepResult) -> Line {
    let ratios_ok = !r.ratios.is_empty() && r.ratios.iter().all(|x| *x >= RATIO_WINDOW.0 && *x <= RATIO_WINDOW.1);
    let g = r.gronwall.as_ref();
    let env = g.map_or(0.0, |g| g.envelope_fraction);
    let stable = g.is_some_and(|g| g.c2_stable);
    let zero = g.is_some_and(|g| g.zero_rung_identical);
    line(
        9,
        "perturbation stability",
        ratios_ok && env >= ENVELOPE_MIN && stable && zero,
        format!(
            "ratios {:.3?} (window [80, 120]), envelope {:.1}% (>= 95%), C2 stable {stable}, eps=0 identical {zero}",
            r.ratios,
            100.0 * env
        ),
    )
}

fn relative_entropy_bounds() -> Line {
    let mut detail = Vec::new();
    let mut ok = true;
    for d in [2, 3] {
        let rep = relative_bounds_check(
            &law(d, ThermalKind::Quadratic),
            &TransportCoeffs::constant(1e-2, 1e-2),
            &GammaParams::default(),
            10_000,
            7,
        );
        ok &= rep.pass;
        let bad: Vec<&str> = rep.bounds.iter().filter(|b| !b.pass).map(|b| b.name).collect();
        detail.push(format!("d={d}: {}/{} bounds hold, R = {}, failing {bad:?}", rep.bounds.len() - bad.len(), rep.bounds.len(), rep.radius));
    }
    line(10, "pointwise relative-entropy bounds", ok, detail.join("; "))
}

fn main() {
    let mut lines = vec![
        derivative_oracles(),
        null_lagrangian(),
        symmetrizability(),
        conservation_entropy(),
        constraint_involution(),
        identity(),
    ];

    let t = Instant::now();
    let sweeps: Vec<SweepResult> = Experiment::ALL
        .par_iter()
        .map(|e| run_sweep(&SweepSpec::default_for(*e)).expect("sweep"))
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let by = |e: Experiment| sweeps.iter().find(|r| r.spec.experiment == e).expect("experiment");
    lines.push(ladder_line(7, "vanishing-dissipation ladder", &[by(Experiment::AdiabaticLimit)], secs));
    lines.push(ladder_line(
        8,
        "zero-viscosity / heat-to-adiabatic ladders",
        &[by(Experiment::ZeroViscosity), by(Experiment::HeatToAdiabatic)],
        secs,
    ));
    lines.push(perturbation_line(by(Experiment::PerturbationStability)));
    for r in &sweeps {
        debug_assert!(r.verdict != Verdict::Fail || !r.monotone);
    }
    lines.push(relative_entropy_bounds());
    lines.sort_by_key(|l| l.id);

    println!();
    for l in &lines {
        let tag = match l.outcome {
            Outcome::Pass => "PASS",
            Outcome::Warn => "WARN",
            Outcome::Fail => "FAIL",
        };
        println!("criterion {:2} {tag} {}: {}", l.id, l.name, l.detail);
    }
    let failed = lines.iter().filter(|l| l.outcome == Outcome::Fail).count();
    println!("\nacceptance: {} pass, {} warn, {failed} fail", lines.iter().filter(|l| l.outcome == Outcome::Pass).count(), lines.iter().filter(|l| l.outcome == Outcome::Warn).count());
    if failed > 0 {
        std::process::exit(1);
    }
}
