use polytherm::grid::Grid;
use polytherm::harness::*;

fn small(e: Experiment) -> SweepSpec {
    let mut s = SweepSpec::default_for(e);
    s.grid = Grid::new(2, 16, 1.0).unwrap();
    s.t_end = 0.1;
    s.frames = 5;
    s
}

#[test]
fn adiabatic_limit_ladder_is_monotone() {
    let r = run_sweep(&small(Experiment::AdiabaticLimit)).unwrap();
    assert!(r.rungs.iter().all(|x| x.ok()));
    assert!(r.monotone, "{:?}", r.rungs.iter().map(|x| x.sup_i).collect::<Vec<_>>());
    let m: Vec<f64> = r.ladder_rungs().iter().map(|x| r.metric(x)).collect();
    assert!(m.windows(2).all(|w| w[1] < w[0]));
    // on 16² the discretisation floor flattens the fit; only its sign is robust
    assert!(r.slope.unwrap() > 0.0);
    // the floor rung uses the same coefficients as the reference
    let floor = r.floor().unwrap();
    assert_eq!(floor.amplitude, 0.0);
    assert!(floor.sup_i < m[2]);
    // at t = 0 only the discrete-gradient mismatch between the two grids
    // remains, which is the same for every rung
    let i0 = floor.series[0].1;
    assert!(i0 <= 1e-6, "{i0:e}");
    assert!(r.ladder_rungs().iter().all(|x| (x.series[0].1 - i0).abs() <= 1e-14));
}

#[test]
fn sweep_outputs_have_expected_shape() {
    let mut spec = small(Experiment::ZeroViscosity);
    spec.include_floor = true;
    let r = run_sweep(&spec).unwrap();
    let mut csv = Vec::new();
    write_sweep_csv(&r, &mut csv).unwrap();
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1);
    assert_eq!(lines[0], SWEEP_CSV_HEADER);
    assert!(lines[4].starts_with("slope,"));
    let cols = lines[0].split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == cols));

    let mut series = Vec::new();
    write_series_csv(&r, &mut series).unwrap();
    let series = String::from_utf8(series).unwrap();
    // 4 rungs (floor included) × (frames + 1)
    assert_eq!(series.lines().count(), 1 + 4 * 6);
    assert!(summary(&r).contains("verdict"));
    assert!(plot_script(&r, "sweep.csv").contains("sweep.csv"));
    assert_eq!(r.coeff_bounds_pass, Some(true));

    // deterministic
    let again = run_sweep(&spec).unwrap();
    assert_eq!(again.rungs, r.rungs);
}

#[test]
fn perturbation_sweep_fits_an_envelope() {
    let r = run_sweep(&small(Experiment::PerturbationStability)).unwrap();
    let g = r.gronwall.as_ref().unwrap();
    assert!(g.zero_rung_identical);
    assert!(g.c2 >= 0.0 && g.c1 >= 1.0 - 1e-9, "{g:?}");
    assert!(g.envelope_fraction >= 0.95);
    // ∫I is quadratic in ε: one decade of ε is two decades of ∫I
    assert!(r.ratios.iter().all(|q| (80.0..=120.0).contains(q)), "{:?}", r.ratios);
}

/// Viscous candidates stay within a uniform bound of the reference over the
/// whole ladder.
#[test]
fn heat_sweep_is_uniformly_bounded() {
    let r = run_sweep(&small(Experiment::HeatToAdiabatic)).unwrap();
    let first = r.metric(&r.ladder_rungs()[0]);
    for x in r.ladder_rungs() {
        assert!(x.ok());
        assert!(x.series.iter().all(|(_, i)| *i >= 0.0 && *i <= first * (1.0 + 1e-12)));
    }
}

#[test]
fn invalid_ladders_are_rejected() {
    let mut s = small(Experiment::AdiabaticLimit);
    s.ladder = vec![];
    assert!(run_sweep(&s).is_err());
    s.ladder = vec![1e-2, 2e-2, 1e-3];
    assert!(run_sweep(&s).is_err());
    assert!(Experiment::parse("nope").is_err());
    assert_eq!(Experiment::parse("zero-viscosity").unwrap(), Experiment::ZeroViscosity);
}
