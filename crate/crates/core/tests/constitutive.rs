use nalgebra::DMatrix;
use polytherm::constitutive::*;
use polytherm::kinematics::phi;
use polytherm::tensor::{Mat, Xi};
use proptest::prelude::*;

fn law(d: usize, thermal: ThermalKind, gamma: f64) -> PolyconvexLaw {
    let mut p = LawParams::default_for(d);
    p.thermal = thermal;
    p.gamma = gamma;
    PolyconvexLaw::new(d, p).unwrap()
}

fn thermal() -> impl Strategy<Value = ThermalKind> {
    prop_oneof![Just(ThermalKind::Quadratic), Just(ThermalKind::Logarithmic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_match_finite_differences(d in 2usize..=3, th in thermal(), seed in any::<u64>()) {
        let l = law(d, th, 0.1);
        let s = sample_states(d, 4, seed, &SampleBox::default());
        let rep = derivative_check(&l, &s, 1e-5);
        prop_assert!(rep.max() <= 1e-6, "{rep:?}");
        prop_assert!(rep.maxwell <= 1e-6);
    }

    #[test]
    fn energy_entropy_free_energy_identity(d in 2usize..=3, th in thermal(), seed in any::<u64>()) {
        let l = law(d, th, 0.1);
        for s in sample_states(d, 4, seed, &SampleBox::default()) {
            let psi = l.eval(&s.xi, s.theta);
            let e = e_hat(&l, &s.xi, s.theta).unwrap();
            let eta = eta_hat(&l, &s.xi, s.theta).unwrap();
            let scale = psi.abs() + (s.theta * eta).abs() + 1.0;
            prop_assert!((e - s.theta * eta - psi).abs() <= 4.0 * f64::EPSILON * scale);
        }
    }

    #[test]
    fn gibbs_relation_de_equals_theta_deta(d in 2usize..=3, th in thermal(), seed in any::<u64>()) {
        let l = law(d, th, 0.1);
        let h = 1e-5;
        for s in sample_states(d, 4, seed, &SampleBox::default()) {
            let fd = |f: &dyn Fn(f64) -> f64| (f(s.theta + h) - f(s.theta - h)) / (2.0 * h);
            let de = fd(&|t| e_hat(&l, &s.xi, t).unwrap());
            let deta = fd(&|t| eta_hat(&l, &s.xi, t).unwrap());
            prop_assert!((de - s.theta * deta).abs() <= 1e-7 * de.abs().max(1.0));
            prop_assert!((de - e_theta(&l, &s.xi, s.theta)).abs() <= 1e-7 * de.abs().max(1.0));
        }
    }

    #[test]
    fn piola_stress_is_gradient_of_composed_energy(
        d in 2usize..=3, th in thermal(), v in prop::collection::vec(-2.0..2.0f64, 9), t in 0.3..4.0f64
    ) {
        let l = law(d, th, 0.1);
        let f = Mat::from_fn(d, |i, a| v[i * d + a] + if i == a { 1.0 } else { 0.0 });
        let sigma = piola_stress(&l, &f, t).unwrap();
        let h = 1e-5;
        for i in 0..d {
            for a in 0..d {
                let (mut fp, mut fm) = (f, f);
                fp[(i, a)] += h;
                fm[(i, a)] -= h;
                let fd = (l.eval(&phi(&fp), t) - l.eval(&phi(&fm), t)) / (2.0 * h);
                prop_assert!((sigma[(i, a)] - fd).abs() <= 1e-6 * sigma.max_abs().max(1.0));
            }
        }
    }
}

#[test]
fn coupled_law_keeps_gibbs_conditions() {
    for d in [2, 3] {
        for th in [ThermalKind::Quadratic, ThermalKind::Logarithmic] {
            let l = law(d, th, 0.5);
            let s = sample_states(d, 1000, 3, &SampleBox::default());
            let g = check_gibbs(&l, &s);
            assert!(g.pass, "d={d} {th:?}: {g:?}");
        }
    }
}

#[test]
fn quartic_law_fluxes_decay_over_shells() {
    let g = check_growth(&law(3, ThermalKind::Quadratic, 0.1), &ShellSchedule::default());
    assert_eq!(g.exponents.p, 4.0);
    assert!(g.exponents_admissible);
    assert_eq!(g.flux_f, LimitStatus::Decaying);
    assert_eq!(g.flux_zeta, LimitStatus::Decaying);
    assert!(g.pass, "{g:?}");
}

/// ψ = exp(|F|²/8) + ½(w − 1)² − ½θ²: the energy outgrows every power of the
/// size, so the upper sandwich bound must fail on the outer shells.
#[derive(Debug)]
struct ExponentialLaw;

impl FreeEnergy for ExponentialLaw {
    fn d(&self) -> usize {
        2
    }
    fn eval(&self, xi: &Xi, theta: f64) -> f64 {
        let f = xi.f();
        (f.dot(&f) / 8.0).exp() + 0.5 * (xi.w() - 1.0).powi(2) - 0.5 * theta * theta
    }
    fn grad_xi(&self, xi: &Xi, _theta: f64) -> Xi {
        let f = xi.f();
        let e = (f.dot(&f) / 8.0).exp();
        let mut g = Xi::zeros(2);
        g.set_f(&f.scale(0.25 * e));
        g.set_w(xi.w() - 1.0);
        g
    }
    fn grad_theta(&self, _xi: &Xi, theta: f64) -> f64 {
        -theta
    }
    fn hess_xixi(&self, xi: &Xi, _theta: f64) -> DMatrix<f64> {
        let f = xi.f().to_flat();
        let e = (f.iter().map(|x| x * x).sum::<f64>() / 8.0).exp();
        let mut h = DMatrix::zeros(5, 5);
        for i in 0..4 {
            for j in 0..4 {
                h[(i, j)] = 0.0625 * e * f[i] * f[j] + if i == j { 0.25 * e } else { 0.0 };
            }
        }
        h[(4, 4)] = 1.0;
        h
    }
    fn hess_xitheta(&self, _xi: &Xi, _theta: f64) -> Xi {
        Xi::zeros(2)
    }
    fn hess_thetatheta(&self, _xi: &Xi, _theta: f64) -> f64 {
        -1.0
    }
    fn exponents(&self) -> GrowthExponents {
        GrowthExponents { p: 2.0, q: 2.0, r: 2.0, l: 2.0 }
    }
}

#[test]
fn exponential_energy_fails_growth() {
    let s = sample_states(2, 50, 1, &SampleBox::gamma(1.0, 0.5));
    assert!(derivative_check(&ExponentialLaw, &s, 1e-5).max() <= 1e-6);
    let g = check_growth(&ExponentialLaw, &ShellSchedule::default());
    assert!(!g.sandwich_pass);
    assert!(!g.pass);
}

#[test]
fn cubic_conductivity_violates_coefficient_bounds() {
    let l = law(2, ThermalKind::Quadratic, 0.1);
    let mut c = TransportCoeffs::constant(1e-2, 1e-2);
    c.k_shape = CoeffShape::CubicTheta;
    let rep = check_coeff_bounds(&c, &l, &ShellSchedule::default());
    assert!(!rep.pass_adiabatic_mode, "{rep:?}");
    assert!(rep.k_ratio.windows(2).all(|w| w[1] > w[0]));
    let ok = check_coeff_bounds(&TransportCoeffs::constant(1e-2, 1e-2), &l, &ShellSchedule::default());
    assert!(ok.pass_adiabatic_mode && ok.pass_zero_viscosity_mode);
}

#[test]
fn degenerate_alpha_fails_gibbs() {
    let mut p = LawParams::default_for(2);
    p.alpha = 0.0;
    let l = PolyconvexLaw::new(2, p).unwrap();
    let g = check_gibbs(&l, &sample_states(2, 200, 1, &SampleBox::default()));
    assert!(!g.pass);
}
