use polytherm::constitutive::*;
use polytherm::fields::Fields;
use polytherm::grid::Grid;
use polytherm::kinematics::phi;
use polytherm::solver::*;
use polytherm::tensor::Mat;
use proptest::prelude::*;

fn law(d: usize) -> PolyconvexLaw {
    PolyconvexLaw::new(d, LawParams::default_for(d)).unwrap()
}

fn run_to(ic: InitialCondition, n: usize, coeffs: TransportCoeffs, t_end: f64, frames: usize) -> RunOutput {
    let l = law(2);
    let g = Grid::new(2, n, 1.0).unwrap();
    let s0 = make_initial(&ic, &g, &l, RunParams::new(coeffs)).unwrap();
    run(s0, &l, &RunOptions { t_end, frames, keep_fields: true }, None).unwrap()
}

fn max_diff(a: &Fields, b: &Fields) -> f64 {
    a.comps.iter().zip(&b.comps).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn temperature_recovery_inverts_internal_energy(
        d in 2usize..=3,
        th in prop_oneof![Just(ThermalKind::Quadratic), Just(ThermalKind::Logarithmic)],
        fv in prop::collection::vec(-0.3..0.3f64, 9),
        theta in 0.2..5.0f64,
        guess in 0.2..5.0f64,
    ) {
        let mut p = LawParams::default_for(d);
        p.thermal = th;
        let l = PolyconvexLaw::new(d, p).unwrap();
        let xi = phi(&Mat::from_fn(d, |i, a| fv[i * d + a] + if i == a { 1.0 } else { 0.0 }));
        let e = e_hat(&l, &xi, theta).unwrap();
        let r = recover_theta(&l, &xi, e, guess, 1e-3, 0).unwrap();
        prop_assert!((e_hat(&l, &xi, r).unwrap() - e).abs() <= 1e-12 * e.abs().max(1.0));
        prop_assert!((r - theta).abs() <= 1e-10 * theta);
    }
}

#[test]
fn rest_run_stays_flat() {
    let out = run_to(InitialCondition::new(InitialKind::Rest, 0.0, 1.0), 8, TransportCoeffs::constant(0.01, 0.01), 0.2, 4);
    let d0 = out.diagnostics[0];
    for d in &out.diagnostics {
        assert!((d.e_total - d0.e_total).abs() <= 1e-14);
        assert!((d.s_total - d0.s_total).abs() <= 1e-14);
        assert!(d.s_production_cum.abs() <= 1e-14);
    }
}

#[test]
fn adiabatic_run_conserves_energy() {
    let out = run_to(InitialCondition::new(InitialKind::SineShear, 0.1, 1.0), 16, TransportCoeffs::adiabatic(), 0.2, 4);
    let e0 = out.diagnostics[0].e_total;
    for d in &out.diagnostics {
        assert!((d.e_total - e0).abs() <= 1e-12 * e0.abs(), "{d:?}");
        assert!(d.involution_drift <= 1e-12);
    }
}

#[test]
fn viscous_entropy_is_nondecreasing() {
    let out = run_to(InitialCondition::new(InitialKind::ThermalBump, 0.2, 1.0), 16, TransportCoeffs::constant(0.02, 0.02), 0.3, 10);
    for w in out.diagnostics.windows(2) {
        assert!(w[1].s_total >= w[0].s_total - 1e-13, "{:?}", w);
        assert!(w[1].s_production_cum >= w[0].s_production_cum);
    }
    let e0 = out.diagnostics[0].e_total;
    assert!(out.diagnostics.iter().all(|d| (d.e_total - e0).abs() <= 1e-12 * e0.abs()));
}

#[test]
fn initial_deformation_gradient_is_curl_free() {
    for kind in [InitialKind::SineShear, InitialKind::GradientPerturbation] {
        let out = run_to(InitialCondition::new(kind, 0.2, 1.0), 16, TransportCoeffs::adiabatic(), 0.01, 1);
        assert!(out.diagnostics[0].involution_drift <= 1e-13);
        assert!(out.diagnostics[0].constraint_drift <= 1e-14);
    }
}

/// The constraint ξ = Φ(F) is not preserved exactly by the scheme, but its
/// drift is a truncation error that shrinks like h².
#[test]
fn constraint_drift_is_second_order() {
    let ic = InitialCondition::new(InitialKind::GradientPerturbation, 0.2, 1.0);
    let drift: Vec<f64> = [16, 32]
        .iter()
        .map(|&n| {
            let out = run_to(ic, n, TransportCoeffs::constant(0.01, 0.01), 0.2, 1);
            out.diagnostics.last().unwrap().constraint_drift
        })
        .collect();
    let order = (drift[0] / drift[1]).log2();
    assert!(order >= 1.8, "{drift:?} order {order:.3}");
}

/// Two-resolution estimate: the 16-vs-32 difference is about four times the
/// 32-vs-64 difference, and small for a gentle shear.
#[test]
fn refinement_differences_shrink_quadratically() {
    let l = law(2);
    let ic = InitialCondition::new(InitialKind::SineShear, 0.05, 1.0);
    let coarse = Grid::new(2, 16, 1.0).unwrap();
    let opts = RunOptions { t_end: 0.1, frames: 1, keep_fields: true };
    let p = RunParams::new(TransportCoeffs::constant(0.01, 0.01));
    let last = |f: usize| refined_solution(&ic, &coarse, &l, &opts, f, p).unwrap().frames.pop().unwrap().1;
    let (u1, u2, u4) = (last(1), last(2), last(4));
    let (e1, e2) = (max_diff(&u1, &u2), max_diff(&u2, &u4));
    assert!(e2 <= 1e-3, "{e2:e}");
    let order = (e1 / e2).log2();
    assert!(order >= 1.8, "{e1:e} {e2:e} order {order:.3}");
}

/// Injection onto a coarse grid keeps integrals of smooth periodic fields.
#[test]
fn restriction_preserves_integrals() {
    let out = run_to(InitialCondition::new(InitialKind::ThermalBump, 0.2, 1.0), 32, TransportCoeffs::constant(0.01, 0.01), 0.1, 1);
    let fine = Grid::new(2, 32, 1.0).unwrap();
    let coarse = Grid::new(2, 16, 1.0).unwrap();
    let u = &out.frames.last().unwrap().1;
    for comp in &u.comps {
        let r = coarse.restrict_from(&fine, comp, 2);
        let scale = comp.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        let gap = (coarse.integrate(&r) - fine.integrate(comp)).abs();
        assert!(gap <= 10.0 * coarse.h().powi(2) * scale, "{gap:e}");
    }
}

#[test]
fn theta_floor_aborts_with_state_at_abort() {
    let l = law(2);
    let g = Grid::new(2, 16, 1.0).unwrap();
    let mut p = RunParams::new(TransportCoeffs::constant(0.01, 0.01));
    p.theta_floor = Some(0.999);
    let s0 = make_initial(&InitialCondition::new(InitialKind::GradientPerturbation, 0.3, 1.0), &g, &l, p).unwrap();
    let err = run(s0, &l, &RunOptions { t_end: 0.5, frames: 5, keep_fields: false }, None).unwrap_err();
    // the dumped state is the one that crossed the floor
    assert!(matches!(err.error, polytherm::error::Error::ThetaFloor { .. }), "{:?}", err.error);
    assert!(err.last_good.theta.iter().cloned().fold(f64::INFINITY, f64::min) < 0.999);
    assert!(!err.diagnostics.is_empty());
}
