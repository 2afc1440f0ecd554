use polytherm::constitutive::{LawParams, PolyconvexLaw};
use polytherm::relentropy::IdentityVariant;
use polytherm::verify::{identity_residuals, min_order};

#[test]
fn manufactured_identity_converges_all_variants() {
    let law = PolyconvexLaw::new(2, LawParams::default_for(2)).unwrap();
    for v in [IdentityVariant::General, IdentityVariant::ViscousVsAdiabatic, IdentityVariant::ViscousVsThermoelastic] {
        let r = identity_residuals(&law, &[16, 32, 64], v).unwrap();
        let order = min_order(&r);
        assert!(order >= 1.9, "{v:?}: residuals {r:?}, order {order:.3}");
    }
}

mod pointwise {
    use polytherm::augmented::symmetrizer;
    use polytherm::constitutive::*;
    use polytherm::relentropy::{i_pointwise, rel_free_energy};
    use polytherm::tensor::{state_len, ThermoState};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law(d: usize, thermal: ThermalKind, gamma: f64) -> PolyconvexLaw {
        let mut p = LawParams::default_for(d);
        p.thermal = thermal;
        p.gamma = gamma;
        PolyconvexLaw::new(d, p).unwrap()
    }

    fn thermal() -> impl Strategy<Value = ThermalKind> {
        prop_oneof![Just(ThermalKind::Quadratic), Just(ThermalKind::Logarithmic)]
    }

    fn pair(d: usize, seed: u64) -> (ThermoState, ThermoState) {
        let s = sample_states(d, 2, seed, &SampleBox::default());
        (s[0], s[1])
    }

    /// ∫₀¹ (1 − s) D²ψ[Δ, Δ] ds along the straight segment, composite Simpson.
    fn segment_remainder(l: &dyn FreeEnergy, u: &ThermoState, ub: &ThermoState) -> f64 {
        let dxi = u.xi - ub.xi;
        let dth = u.theta - ub.theta;
        let n = 4000;
        let g = |s: f64| {
            let xi = ub.xi + dxi.scale(s);
            let th = ub.theta + s * dth;
            let h = l.hess_xixi(&xi, th);
            let m = dxi.as_slice().len();
            let mut q = 0.0;
            for a in 0..m {
                for b in 0..m {
                    q += dxi[a] * h[(a, b)] * dxi[b];
                }
            }
            q += 2.0 * l.hess_xitheta(&xi, th).dot(&dxi) * dth + l.hess_thetatheta(&xi, th) * dth * dth;
            (1.0 - s) * q
        };
        let hstep = 1.0 / n as f64;
        let mut sum = g(0.0) + g(1.0);
        for k in 1..n {
            sum += g(k as f64 * hstep) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * hstep / 3.0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn relative_entropy_is_nonnegative(d in 2usize..=3, th in thermal(), seed in any::<u64>()) {
            let l = law(d, th, 0.1);
            let (u, ub) = pair(d, seed);
            prop_assert!(i_pointwise(&l, &u, &ub).unwrap() >= 0.0);
            prop_assert!(i_pointwise(&l, &u, &u).unwrap().abs() <= 1e-12);
        }

        #[test]
        fn relative_free_energy_is_taylor_remainder(d in 2usize..=3, th in thermal(), gamma in 0.0..0.5f64, seed in any::<u64>()) {
            let l = law(d, th, gamma);
            let (u, ub) = pair(d, seed);
            let direct = rel_free_energy(&l, &u.xi, u.theta, &ub.xi, ub.theta).unwrap();
            let quad = segment_remainder(&l, &u, &ub);
            prop_assert!((direct - quad).abs() <= 1e-8 * quad.abs().max(1.0), "{direct} vs {quad}");
        }
    }

    /// Near Ū the relative entropy is the symmetrizer quadratic form:
    /// I(Ū + εδU | Ū) = ½ θ̄ ε² δUᵀ S(Ū) δU + O(ε³).
    #[test]
    fn small_perturbations_see_the_symmetrizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2, 3] {
            for th in [ThermalKind::Quadratic, ThermalKind::Logarithmic] {
                let l = law(d, th, 0.3);
                for ub in sample_states(d, 5, 9, &SampleBox::default()) {
                    let du: Vec<f64> = (0..state_len(d)).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let s = symmetrizer(&l, &ub).unwrap();
                    let q: f64 = (0..du.len()).map(|a| (0..du.len()).map(|b| du[a] * s[(a, b)] * du[b]).sum::<f64>()).sum();
                    let model = 0.5 * ub.theta * q;
                    let mut errs = Vec::new();
                    for eps in [1e-2, 1e-3] {
                        let u: Vec<f64> = ub.pack().iter().zip(&du).map(|(a, b)| a + eps * b).collect();
                        let i = i_pointwise(&l, &ThermoState::unpack(d, &u), &ub).unwrap();
                        errs.push((i / (eps * eps) - model).abs() / model);
                    }
                    assert!(errs[1] <= 1e-2, "d={d} {th:?}: {errs:?}");
                    assert!(errs[1] <= 0.2 * errs[0] + 1e-6, "not O(ε): {errs:?}");
                }
            }
        }
    }

    /// For the quadratic law around the rest state, I controls
    /// ½ min(α, β, δ, 1, c_v/θ̄·θ̄)|U − Ū|² for moderate deviations.
    #[test]
    fn quadratic_law_is_coercive_near_rest() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 3] {
            let l = law(d, ThermalKind::Quadratic, 0.0);
            let p = LawParams::default_for(d);
            let c = 0.5 * [p.alpha, p.beta, p.delta, 1.0, p.c_v].into_iter().fold(f64::INFINITY, f64::min);
            let ub = ThermoState::rest(d, p.theta0);
            for _ in 0..200 {
                let du: Vec<f64> = (0..state_len(d)).map(|_| rng.gen_range(-0.05..0.05)).collect();
                let u: Vec<f64> = ub.pack().iter().zip(&du).map(|(a, b)| a + b).collect();
                let i = i_pointwise(&l, &ThermoState::unpack(d, &u), &ub).unwrap();
                let n2: f64 = du.iter().map(|x| x * x).sum();
                assert!(i >= 0.9 * c * n2, "d={d}: I = {i:e}, bound {:e}", c * n2);
            }
        }
    }
}
