//! Polyconvex free energies ψ̂(ξ, θ), derived thermodynamic quantities,
//! transport coefficients and numerical checks of the structural hypotheses.

use crate::error::{Error, Result};
use crate::kinematics::{dphi_df, phi};
use crate::tensor::{xi_len, Mat, ThermoState, Xi};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::fmt::Debug;

/// Growth exponents (p, q, r, ℓ) of |F|^p + |ζ|^q + |w|^r + θ^ℓ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthExponents {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub l: f64,
}

impl GrowthExponents {
    /// |ξ|_{p,q,r} + θ^ℓ.
    pub fn size(&self, xi: &Xi, theta: f64) -> f64 {
        let mut s = xi.f().norm().powf(self.p) + xi.w().abs().powf(self.r) + theta.powf(self.l);
        if xi.d() == 3 {
            s += xi.zeta().norm().powf(self.q);
        }
        s
    }

    /// The hypotheses ask for p ≥ 4 and q, r, ℓ > 1.
    pub fn admissible(&self) -> bool {
        self.p >= 4.0 && self.q > 1.0 && self.r > 1.0 && self.l > 1.0
    }
}

/// A free energy ψ̂(ξ, θ) with analytic derivatives.
pub trait FreeEnergy: Send + Sync + Debug {
    fn d(&self) -> usize;
    fn eval(&self, xi: &Xi, theta: f64) -> f64;
    fn grad_xi(&self, xi: &Xi, theta: f64) -> Xi;
    fn grad_theta(&self, xi: &Xi, theta: f64) -> f64;
    fn hess_xixi(&self, xi: &Xi, theta: f64) -> DMatrix<f64>;
    fn hess_xitheta(&self, xi: &Xi, theta: f64) -> Xi;
    fn hess_thetatheta(&self, xi: &Xi, theta: f64) -> f64;
    fn exponents(&self) -> GrowthExponents;
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTemperature(theta))
    }
}

/// η̂ = −∂ψ̂/∂θ.
pub fn eta_hat(law: &dyn FreeEnergy, xi: &Xi, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(-law.grad_theta(xi, theta))
}

/// ê = ψ̂ + θη̂.
pub fn e_hat(law: &dyn FreeEnergy, xi: &Xi, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(law.eval(xi, theta) - theta * law.grad_theta(xi, theta))
}

/// ∂η̂/∂θ = −ψ̂_θθ.
pub fn eta_theta(law: &dyn FreeEnergy, xi: &Xi, theta: f64) -> f64 {
    -law.hess_thetatheta(xi, theta)
}

/// ∂ê/∂θ = θ ∂η̂/∂θ.
pub fn e_theta(law: &dyn FreeEnergy, xi: &Xi, theta: f64) -> f64 {
    theta * eta_theta(law, xi, theta)
}

/// ∂ê/∂ξ = ψ̂_ξ − θ ψ̂_ξθ.
pub fn e_xi(law: &dyn FreeEnergy, xi: &Xi, theta: f64) -> Xi {
    law.grad_xi(xi, theta) - law.hess_xitheta(xi, theta).scale(theta)
}

/// Σ_{iα} = ψ̂_ξB(Φ(F), θ) ∂Φ^B/∂F_{iα}(F).
pub fn piola_stress(law: &dyn FreeEnergy, f: &Mat, theta: f64) -> Result<Mat> {
    check_theta(theta)?;
    Ok(dphi_df(f).contract(&law.grad_xi(&phi(f), theta)))
}

/// Thermal part of the built-in law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThermalKind {
    /// −(c_v/2)θ², giving η̂ = c_vθ.
    Quadratic,
    /// −c_v θ log θ, giving η̂ = c_v(1 + log θ).
    Logarithmic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LawParams {
    pub thermal: ThermalKind,
    pub alpha: f64,
    /// Coefficient of (1/4)|F|⁴.
    pub quartic: f64,
    pub beta: f64,
    pub delta: f64,
    pub c_v: f64,
    pub gamma: f64,
    pub theta0: f64,
}

impl LawParams {
    /// Defaults: unit moduli, γ = 0.1, quartic term only in 3D.
    pub fn default_for(d: usize) -> Self {
        LawParams {
            thermal: ThermalKind::Quadratic,
            alpha: 1.0,
            quartic: if d == 3 { 1.0 } else { 0.0 },
            beta: 1.0,
            delta: 1.0,
            c_v: 1.0,
            gamma: 0.1,
            theta0: 1.0,
        }
    }
}

/// ψ̂ = (α/2)|F|² + (α₄/4)|F|⁴ + (β/2)|ζ|² + (δ/2)(w−1)² − λ(w−1)
///     + γ(θ−θ₀)(w−1) + thermal(θ).
///
/// λ is chosen so that F = I, θ = θ₀ is stress free; `uncalibrated` sets λ = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyconvexLaw {
    d: usize,
    pub params: LawParams,
    lambda: f64,
}

impl PolyconvexLaw {
    pub fn new(d: usize, params: LawParams) -> Result<Self> {
        let mut law = Self::uncalibrated(d, params)?;
        let s = piola_stress(&law, &Mat::identity(d), params.theta0)?;
        // at F = I every term of Σ is a multiple of I; cof I = I so λ enters Σ₁₁ linearly
        law.lambda = s[(0, 0)];
        Ok(law)
    }

    pub fn uncalibrated(d: usize, params: LawParams) -> Result<Self> {
        crate::tensor::check_dim(d)?;
        let p = params;
        for (name, v) in [
            ("alpha", p.alpha),
            ("quartic", p.quartic),
            ("beta", p.beta),
            ("delta", p.delta),
            ("c_v", p.c_v),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(p.theta0 > 0.0) {
            return Err(Error::Parameter(format!("theta0 must be positive, got {}", p.theta0)));
        }
        if !p.gamma.is_finite() {
            return Err(Error::Parameter("gamma must be finite".into()));
        }
        Ok(PolyconvexLaw { d, params, lambda: 0.0 })
    }

    /// Stress-free offset λ.
    pub fn stress_offset(&self) -> f64 {
        self.lambda
    }

    fn thermal(&self, theta: f64) -> (f64, f64, f64) {
        let c = self.params.c_v;
        match self.params.thermal {
            ThermalKind::Quadratic => (-0.5 * c * theta * theta, -c * theta, -c),
            ThermalKind::Logarithmic => {
                (-c * theta * theta.ln(), -c * (1.0 + theta.ln()), -c / theta)
            }
        }
    }
}

impl FreeEnergy for PolyconvexLaw {
    fn d(&self) -> usize {
        self.d
    }

    fn eval(&self, xi: &Xi, theta: f64) -> f64 {
        let p = &self.params;
        let f2 = xi.f().dot(&xi.f());
        let z2 = xi.zeta().dot(&xi.zeta());
        let w1 = xi.w() - 1.0;
        0.5 * p.alpha * f2 + 0.25 * p.quartic * f2 * f2 + 0.5 * p.beta * z2 + 0.5 * p.delta * w1 * w1
            - self.lambda * w1
            + p.gamma * (theta - p.theta0) * w1
            + self.thermal(theta).0
    }

    fn grad_xi(&self, xi: &Xi, theta: f64) -> Xi {
        let p = &self.params;
        let f = xi.f();
        let f2 = f.dot(&f);
        let w1 = xi.w() - 1.0;
        let mut g = Xi::from_parts(
            &f.scale(p.alpha + p.quartic * f2),
            &xi.zeta().scale(p.beta),
            0.0,
        );
        g.set_w(p.delta * w1 - self.lambda + p.gamma * (theta - p.theta0));
        g
    }

    fn grad_theta(&self, xi: &Xi, theta: f64) -> f64 {
        self.params.gamma * (xi.w() - 1.0) + self.thermal(theta).1
    }

    fn hess_xixi(&self, xi: &Xi, _theta: f64) -> DMatrix<f64> {
        let p = &self.params;
        let d = self.d;
        let m = xi_len(d);
        let mut h = DMatrix::zeros(m, m);
        let f = xi.f().to_flat();
        let f2: f64 = f.iter().map(|x| x * x).sum();
        for k in 0..d * d {
            for l in 0..d * d {
                h[(k, l)] = 2.0 * p.quartic * f[k] * f[l];
            }
            h[(k, k)] += p.alpha + p.quartic * f2;
        }
        if d == 3 {
            for k in 9..18 {
                h[(k, k)] = p.beta;
            }
        }
        h[(m - 1, m - 1)] = p.delta;
        h
    }

    fn hess_xitheta(&self, _xi: &Xi, _theta: f64) -> Xi {
        let mut g = Xi::zeros(self.d);
        g.set_w(self.params.gamma);
        g
    }

    fn hess_thetatheta(&self, _xi: &Xi, theta: f64) -> f64 {
        self.thermal(theta).2
    }

    fn exponents(&self) -> GrowthExponents {
        GrowthExponents {
            p: if self.params.quartic > 0.0 { 4.0 } else { 2.0 },
            q: 2.0,
            r: 2.0,
            l: match self.params.thermal {
                ThermalKind::Quadratic => 2.0,
                ThermalKind::Logarithmic => 1.0,
            },
        }
    }
}

/// Temperature dependence of a transport coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffShape {
    Constant,
    /// amplitude / θ
    InverseTheta,
    /// amplitude · θ³
    CubicTheta,
}

impl CoeffShape {
    pub fn factor(&self, theta: f64) -> f64 {
        match self {
            CoeffShape::Constant => 1.0,
            CoeffShape::InverseTheta => 1.0 / theta,
            CoeffShape::CubicTheta => theta * theta * theta,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(CoeffShape::Constant),
            "inverse-theta" => Ok(CoeffShape::InverseTheta),
            "cubic-theta" => Ok(CoeffShape::CubicTheta),
            _ => Err(Error::Parameter(format!("unknown coefficient kind '{s}'"))),
        }
    }
}

/// Viscosity μ = μ₀·m(θ) and conductivity k = k₀·κ(θ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportCoeffs {
    pub mu0: f64,
    pub mu_shape: CoeffShape,
    pub k0: f64,
    pub k_shape: CoeffShape,
}

impl TransportCoeffs {
    pub fn constant(mu0: f64, k0: f64) -> Self {
        TransportCoeffs {
            mu0,
            mu_shape: CoeffShape::Constant,
            k0,
            k_shape: CoeffShape::Constant,
        }
    }

    pub fn adiabatic() -> Self {
        Self::constant(0.0, 0.0)
    }

    pub fn mu(&self, _xi: &Xi, theta: f64) -> f64 {
        self.mu0 * self.mu_shape.factor(theta)
    }

    pub fn k(&self, _xi: &Xi, theta: f64) -> f64 {
        self.k0 * self.k_shape.factor(theta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu0 >= 0.0 && self.k0 >= 0.0 && self.mu0.is_finite() && self.k0.is_finite() {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "coefficient amplitudes must be finite and >= 0 (mu0 = {}, k0 = {})",
                self.mu0, self.k0
            )))
        }
    }
}

/// Box used for random admissible states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBox {
    pub f_max: f64,
    pub zeta_max: f64,
    pub w: (f64, f64),
    pub theta: (f64, f64),
    pub v_max: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox {
            f_max: 3.0,
            zeta_max: 3.0,
            w: (0.2, 5.0),
            theta: (0.2, 5.0),
            v_max: 3.0,
        }
    }
}

impl SampleBox {
    /// Γ_{M,δ}: |F|, |ζ|, |w|, |v| ≤ M and δ ≤ θ ≤ M.
    pub fn gamma(m: f64, delta: f64) -> Self {
        SampleBox {
            f_max: m,
            zeta_max: m,
            w: (-m, m),
            theta: (delta, m),
            v_max: m,
        }
    }
}

/// Uniformly distributed unit vector (normalised Gaussian).
pub fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

fn random_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    // uniform in the radius, not in the volume, to reach the centre and the rim alike
    let s = rng.gen_range(0.0..1.0) * radius;
    random_unit(rng, dim).into_iter().map(|x| x * s).collect()
}

/// Seeded random states in a sample box.
pub fn sample_states(d: usize, n: usize, seed: u64, b: &SampleBox) -> Vec<ThermoState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let f = Mat::from_flat(d, &random_ball(&mut rng, d * d, b.f_max));
            let z = if d == 3 {
                Mat::from_flat(3, &random_ball(&mut rng, 9, b.zeta_max))
            } else {
                Mat::zeros(2)
            };
            let w = rng.gen_range(b.w.0..=b.w.1);
            let vv = random_ball(&mut rng, d, b.v_max);
            let mut v = [0.0; 3];
            v[..d].copy_from_slice(&vv);
            ThermoState {
                xi: Xi::from_parts(&f, &z, w),
                v,
                theta: rng.gen_range(b.theta.0..=b.theta.1),
            }
        })
        .collect()
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

pub const TOL_SPD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct GibbsReport {
    pub samples: usize,
    pub min_eig_xixi: f64,
    pub max_psi_thetatheta: f64,
    /// Sample index attaining the worst margin.
    pub worst: Option<usize>,
    pub pass_xixi: bool,
    pub pass_thetatheta: bool,
    pub pass: bool,
}

/// ψ̂_ξξ > 0 and ψ̂_θθ < 0 at every sample (tolerances relative to the matrix norm).
pub fn check_gibbs(law: &dyn FreeEnergy, samples: &[ThermoState]) -> GibbsReport {
    let mut min_eig = f64::INFINITY;
    let mut max_tt = f64::NEG_INFINITY;
    let mut worst = None;
    let mut worst_margin = f64::INFINITY;
    let (mut pass_xixi, mut pass_tt) = (true, true);
    for (idx, s) in samples.iter().enumerate() {
        let h = law.hess_xixi(&s.xi, s.theta);
        let scale = h.norm().max(1.0);
        let e = min_eigenvalue(&h);
        let tt = law.hess_thetatheta(&s.xi, s.theta);
        min_eig = min_eig.min(e);
        max_tt = max_tt.max(tt);
        let margin = (e / scale).min(-tt / tt.abs().max(1.0));
        if margin < worst_margin {
            worst_margin = margin;
            worst = Some(idx);
        }
        pass_xixi &= e > TOL_SPD * scale;
        pass_tt &= tt < -TOL_SPD * tt.abs().max(1.0);
    }
    GibbsReport {
        samples: samples.len(),
        min_eig_xixi: min_eig,
        max_psi_thetatheta: max_tt,
        worst,
        pass_xixi,
        pass_thetatheta: pass_tt,
        pass: pass_xixi && pass_tt,
    }
}

/// Behaviour of a ratio sampled over geometric shells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitStatus {
    /// Monotonically decreasing; the numerical proxy for a vanishing limit.
    Decaying,
    /// Neither decaying nor growing: plateaus at a finite level.
    Bounded,
    Growing,
}

impl LimitStatus {
    pub fn classify(r: &[f64]) -> Self {
        if r.iter().any(|x| !x.is_finite()) {
            return LimitStatus::Growing;
        }
        let (first, last) = (r[0], r[r.len() - 1]);
        if last > 1.5 * first.max(1e-300) {
            LimitStatus::Growing
        } else if r.windows(2).all(|w| w[1] <= w[0]) && last < 0.9 * first {
            LimitStatus::Decaying
        } else {
            LimitStatus::Bounded
        }
    }

    pub fn ok(&self) -> bool {
        *self != LimitStatus::Growing
    }

    pub fn label(&self) -> &'static str {
        match self {
            LimitStatus::Decaying => "decaying",
            LimitStatus::Bounded => "bounded",
            LimitStatus::Growing => "growing",
        }
    }
}

/// Geometric shells S = R, 2R, 4R, ... of the size |ξ|_{p,q,r} + θ^ℓ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSchedule {
    pub base: f64,
    pub shells: usize,
    pub directions: usize,
    pub seed: u64,
    /// Lower temperature floor applied to every sample.
    pub theta_floor: f64,
}

impl Default for ShellSchedule {
    fn default() -> Self {
        ShellSchedule {
            base: 50.0,
            shells: 4,
            directions: 200,
            seed: 7,
            theta_floor: 0.2,
        }
    }
}

impl ShellSchedule {
    pub fn radii(&self) -> Vec<f64> {
        (0..self.shells).map(|j| self.base * 2f64.powi(j as i32)).collect()
    }

    fn directions(&self, d: usize) -> Vec<(Xi, f64)> {
        let m = xi_len(d);
        let mut dirs = Vec::new();
        // coordinate-aligned probes of each block
        let mut f = Xi::zeros(d);
        f[0] = 1.0;
        dirs.push((f, 0.0));
        if d == 3 {
            let mut z = Xi::zeros(d);
            z[9] = 1.0;
            dirs.push((z, 0.0));
        }
        for s in [1.0, -1.0] {
            let mut w = Xi::zeros(d);
            w[m - 1] = s;
            dirs.push((w, 0.0));
        }
        dirs.push((Xi::zeros(d), 1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let target = self.directions.max(dirs.len() + 1);
        while dirs.len() < target {
            let mut x = Xi::zeros(d);
            for k in 0..m {
                x[k] = rng.gen_range(-1.0..1.0);
            }
            dirs.push((x, rng.gen_range(0.0..1.0)));
        }
        dirs
    }

    /// Points on each shell, one per direction: `out[shell][dir] = (ξ, θ)`.
    pub fn points(&self, exps: &GrowthExponents, d: usize) -> Vec<Vec<(Xi, f64)>> {
        let dirs = self.directions(d);
        let floor = self.theta_floor;
        let at = |dir: &(Xi, f64), s: f64| (dir.0.scale(s), (s * dir.1).max(floor));
        self.radii()
            .iter()
            .map(|&r| {
                dirs.iter()
                    .map(|dir| {
                        let size = |s: f64| {
                            let (x, t) = at(dir, s);
                            exps.size(&x, t)
                        };
                        let mut hi = 1.0;
                        while size(hi) < r {
                            hi *= 2.0;
                        }
                        let mut lo = 0.0;
                        for _ in 0..100 {
                            let mid = 0.5 * (lo + hi);
                            if size(mid) < r {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        at(dir, hi)
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthShell {
    pub radius: f64,
    /// min and max of ê / (|ξ|_{p,q,r} + θ^ℓ)
    pub e_ratio_min: f64,
    pub e_ratio_max: f64,
    /// max of |ψ̂_F| / S, |ψ̂_ζ|^{p/(p−1)} / S, |ψ̂_w|^{s} / S
    pub flux_f: f64,
    pub flux_zeta: f64,
    pub flux_w: f64,
    /// max of |ψ̂_θ| / S
    pub theta_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub exponents: GrowthExponents,
    pub exponents_admissible: bool,
    pub shells: Vec<GrowthShell>,
    /// Fitted c in c·S − c ≤ ê (lower) and ê ≤ c·S + c (upper) on the outer shells.
    pub c_lower: f64,
    pub c_upper: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub sandwich_pass: bool,
    pub flux_f: LimitStatus,
    pub flux_zeta: LimitStatus,
    pub flux_w: LimitStatus,
    pub theta: LimitStatus,
    pub pass: bool,
}

/// Exponent applied to |ψ̂_w| in the flux-growth ratio. In 3D this is
/// p/(p−2); in 2D the determinant is quadratic, like the cofactor in 3D, and
/// p/(p−1) is used.
pub fn w_flux_exponent(d: usize, p: f64) -> f64 {
    if d == 3 && p > 2.0 {
        p / (p - 2.0)
    } else {
        p / (p - 1.0)
    }
}

pub fn check_growth(law: &dyn FreeEnergy, schedule: &ShellSchedule) -> GrowthReport {
    let d = law.d();
    let exps = law.exponents();
    let pw = w_flux_exponent(d, exps.p);
    let mut shells = Vec::new();
    for (r, pts) in schedule.radii().into_iter().zip(schedule.points(&exps, d)) {
        let mut row = GrowthShell {
            radius: r,
            e_ratio_min: f64::INFINITY,
            e_ratio_max: f64::NEG_INFINITY,
            flux_f: 0.0,
            flux_zeta: 0.0,
            flux_w: 0.0,
            theta_ratio: 0.0,
        };
        for (xi, theta) in pts {
            let s = exps.size(&xi, theta);
            let e = law.eval(&xi, theta) - theta * law.grad_theta(&xi, theta);
            let g = law.grad_xi(&xi, theta);
            let ratio = if e.is_finite() { e / s } else { f64::INFINITY };
            row.e_ratio_min = row.e_ratio_min.min(ratio);
            row.e_ratio_max = row.e_ratio_max.max(ratio);
            row.flux_f = row.flux_f.max(g.f().norm() / s);
            if d == 3 {
                row.flux_zeta = row.flux_zeta.max(g.zeta().norm().powf(exps.p / (exps.p - 1.0)) / s);
            }
            row.flux_w = row.flux_w.max(g.w().abs().powf(pw) / s);
            row.theta_ratio = row.theta_ratio.max(law.grad_theta(&xi, theta).abs() / s);
        }
        shells.push(row);
    }
    let col = |f: fn(&GrowthShell) -> f64| shells.iter().map(f).collect::<Vec<_>>();
    let mins = col(|s| s.e_ratio_min);
    let maxs = col(|s| s.e_ratio_max);
    // The additive constant absorbs inner shells: only the outermost lower
    // ratio has to be positive, and it must not be drifting down.
    let last = mins[mins.len() - 1];
    let c_lower = 0.5 * last;
    let c_upper = maxs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lower_ok = mins.iter().all(|m| m.is_finite()) && last > 0.0 && last >= 0.5 * mins[0];
    let upper_ok = LimitStatus::classify(&maxs).ok();
    let flux_f = LimitStatus::classify(&col(|s| s.flux_f));
    let flux_zeta = if d == 3 {
        LimitStatus::classify(&col(|s| s.flux_zeta))
    } else {
        LimitStatus::Decaying
    };
    let flux_w = LimitStatus::classify(&col(|s| s.flux_w));
    let theta = LimitStatus::classify(&col(|s| s.theta_ratio));
    let sandwich_pass = lower_ok && upper_ok;
    GrowthReport {
        exponents: exps,
        exponents_admissible: exps.admissible(),
        shells,
        c_lower,
        c_upper,
        lower_ok,
        upper_ok,
        sandwich_pass,
        flux_f,
        flux_zeta,
        flux_w,
        theta,
        pass: sandwich_pass && flux_f.ok() && flux_zeta.ok() && flux_w.ok() && theta.ok(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoeffBoundsReport {
    /// Per shell: max |μθ| / (μ₀(1+S)), max |k| / (k₀(1+S)), max (k + θ²/k) / (1+S).
    pub mu_ratio: Vec<f64>,
    pub k_ratio: Vec<f64>,
    pub k_combined_ratio: Vec<f64>,
    pub c_mu: f64,
    pub c_k: f64,
    pub c_combined: f64,
    /// Bounds of the vanishing-dissipation theorem (μ, k both controlled by ê).
    pub pass_adiabatic_mode: bool,
    /// Bounds of the zero-viscosity theorem (k + θ²/k ≤ Cê, θ ≥ floor).
    pub pass_zero_viscosity_mode: bool,
}

/// Coefficient growth relative to the energy scale 1 + S on far shells.
/// The amplitudes μ₀, k₀ cancel from the first two ratios; the combined
/// ratio needs k₀ > 0.
pub fn check_coeff_bounds(
    coeffs: &TransportCoeffs,
    law: &dyn FreeEnergy,
    schedule: &ShellSchedule,
) -> CoeffBoundsReport {
    let d = law.d();
    let exps = law.exponents();
    let mut mu_ratio = Vec::new();
    let mut k_ratio = Vec::new();
    let mut comb = Vec::new();
    for pts in schedule.points(&exps, d) {
        let (mut a, mut b, mut c) = (0.0f64, 0.0f64, 0.0f64);
        for (xi, theta) in pts {
            // ê is only defined up to a constant; compare against 1 + S,
            // which the sandwich makes equivalent to a shifted ê.
            let e = 1.0 + exps.size(&xi, theta);
            a = a.max((coeffs.mu_shape.factor(theta) * theta).abs() / e);
            b = b.max(coeffs.k_shape.factor(theta).abs() / e);
            if coeffs.k0 > 0.0 {
                let k = coeffs.k(&xi, theta);
                c = c.max((k + theta * theta / k) / e);
            } else {
                c = f64::INFINITY;
            }
        }
        mu_ratio.push(a);
        k_ratio.push(b);
        comb.push(c);
    }
    let sup = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let pass41 = LimitStatus::classify(&mu_ratio).ok() && LimitStatus::classify(&k_ratio).ok();
    let pass51 = coeffs.k0 > 0.0 && schedule.theta_floor > 0.0 && LimitStatus::classify(&comb).ok();
    CoeffBoundsReport {
        c_mu: sup(&mu_ratio),
        c_k: sup(&k_ratio),
        c_combined: sup(&comb),
        mu_ratio,
        k_ratio,
        k_combined_ratio: comb,
        pass_adiabatic_mode: pass41,
        pass_zero_viscosity_mode: pass51,
    }
}

/// Worst relative error ‖a − fd‖∞ / max(‖a‖∞, 1) of each analytic derivative
/// against central differences.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DerivativeReport {
    pub samples: usize,
    pub grad_xi: f64,
    pub grad_theta: f64,
    pub hess_xixi: f64,
    pub hess_xitheta: f64,
    pub hess_thetatheta: f64,
    /// Mixed partial from FD of grad_theta in ξ vs FD of grad_xi in θ.
    pub maxwell: f64,
    pub piola: f64,
    pub dphi: f64,
}

impl DerivativeReport {
    pub fn max(&self) -> f64 {
        [
            self.grad_xi,
            self.grad_theta,
            self.hess_xixi,
            self.hess_xitheta,
            self.hess_thetatheta,
            self.maxwell,
            self.piola,
            self.dphi,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let den = a.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    num / den
}

pub fn derivative_check(law: &dyn FreeEnergy, samples: &[ThermoState], step: f64) -> DerivativeReport {
    let d = law.d();
    let m = xi_len(d);
    let h = step;
    let mut rep = DerivativeReport { samples: samples.len(), ..Default::default() };
    for s in samples {
        let (xi, th) = (s.xi, s.theta);
        let bump = |k: usize, e: f64| {
            let mut x = xi;
            x[k] += e;
            x
        };
        // ξ-derivatives
        let mut fd_g = vec![0.0; m];
        let mut fd_h = vec![0.0; m * m];
        let mut fd_mix = vec![0.0; m];
        for k in 0..m {
            let (p, q) = (bump(k, h), bump(k, -h));
            fd_g[k] = (law.eval(&p, th) - law.eval(&q, th)) / (2.0 * h);
            let (gp, gq) = (law.grad_xi(&p, th), law.grad_xi(&q, th));
            for l in 0..m {
                fd_h[l * m + k] = (gp[l] - gq[l]) / (2.0 * h);
            }
            fd_mix[k] = (law.grad_theta(&p, th) - law.grad_theta(&q, th)) / (2.0 * h);
        }
        let g = law.grad_xi(&xi, th);
        let hx = law.hess_xixi(&xi, th);
        let an_h: Vec<f64> = (0..m * m).map(|k| hx[(k / m, k % m)]).collect();
        rep.grad_xi = rep.grad_xi.max(rel_err(g.as_slice(), &fd_g));
        rep.hess_xixi = rep.hess_xixi.max(rel_err(&an_h, &fd_h));
        // θ-derivatives
        let gt = (law.eval(&xi, th + h) - law.eval(&xi, th - h)) / (2.0 * h);
        rep.grad_theta = rep.grad_theta.max(rel_err(&[law.grad_theta(&xi, th)], &[gt]));
        let gtt = (law.grad_theta(&xi, th + h) - law.grad_theta(&xi, th - h)) / (2.0 * h);
        rep.hess_thetatheta =
            rep.hess_thetatheta.max(rel_err(&[law.hess_thetatheta(&xi, th)], &[gtt]));
        let gxp = law.grad_xi(&xi, th + h);
        let gxm = law.grad_xi(&xi, th - h);
        let fd_xt: Vec<f64> = (0..m).map(|k| (gxp[k] - gxm[k]) / (2.0 * h)).collect();
        let an_xt = law.hess_xitheta(&xi, th);
        rep.hess_xitheta = rep.hess_xitheta.max(rel_err(an_xt.as_slice(), &fd_xt));
        rep.maxwell = rep.maxwell.max(rel_err(&fd_xt, &fd_mix));
        // Piola stress and ∂Φ/∂F at the constrained point ξ = Φ(F)
        let f = xi.f();
        let sigma = dphi_df(&f).contract(&law.grad_xi(&phi(&f), th)).to_flat();
        let jac = dphi_df(&f);
        let mut fd_s = vec![0.0; d * d];
        let mut an_j = Vec::with_capacity(m * d * d);
        let mut fd_j = Vec::with_capacity(m * d * d);
        for k in 0..d * d {
            let mut fp = f.to_flat();
            let mut fm = f.to_flat();
            fp[k] += h;
            fm[k] -= h;
            let (pp, pm) = (phi(&Mat::from_flat(d, &fp)), phi(&Mat::from_flat(d, &fm)));
            fd_s[k] = (law.eval(&pp, th) - law.eval(&pm, th)) / (2.0 * h);
            for b in 0..m {
                an_j.push(jac.get(b, k / d, k % d));
                fd_j.push((pp[b] - pm[b]) / (2.0 * h));
            }
        }
        rep.piola = rep.piola.max(rel_err(&sigma, &fd_s));
        rep.dphi = rep.dphi.max(rel_err(&an_j, &fd_j));
    }
    rep
}
