//! Parameter sweeps comparing dissipative (or perturbed) runs against a
//! smooth reference through the relative entropy ∫I dx.
//!
//! Four experiments:
//! - `adiabatic-limit`: μ₀ = k₀ → 0 against the adiabatic reference;
//! - `zero-viscosity`: μ₀ → 0 at fixed k₀ against the thermoelastic reference;
//! - `heat-to-adiabatic`: k₀ → 0 with μ₀ = 0 against the adiabatic reference;
//! - `perturbation-stability`: adiabatic runs from ε-perturbed data.
//!
//! The candidate solutions are smooth discrete solutions; estimates stated
//! for weak solutions are only exercised on smooth data here.

use crate::constitutive::{check_coeff_bounds, CoeffShape, LawParams, PolyconvexLaw, ShellSchedule, TransportCoeffs};
use crate::error::{Error, Result};
use crate::fields::Fields;
use crate::grid::Grid;
use crate::relentropy::{fit_line, i_integral};
use crate::solver::{make_initial, refined_solution, run, InitialCondition, InitialKind, RunOptions, RunParams};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    AdiabaticLimit,
    ZeroViscosity,
    HeatToAdiabatic,
    PerturbationStability,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::AdiabaticLimit,
        Experiment::ZeroViscosity,
        Experiment::HeatToAdiabatic,
        Experiment::PerturbationStability,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.label() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown experiment '{s}'")))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Experiment::AdiabaticLimit => "adiabatic-limit",
            Experiment::ZeroViscosity => "zero-viscosity",
            Experiment::HeatToAdiabatic => "heat-to-adiabatic",
            Experiment::PerturbationStability => "perturbation-stability",
        }
    }

    /// Acceptance window for the fitted exponent of the sweep metric against
    /// the rung amplitude.
    pub fn slope_window(&self) -> (f64, f64) {
        match self {
            // ratio in [80, 120] per decade of ε
            Experiment::PerturbationStability => (80f64.log10(), 120f64.log10()),
            _ => (0.8, 1.2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub experiment: Experiment,
    /// Strictly decreasing rung amplitudes a_j: μ₀ = mu_scale·a, k₀ = k_scale·a
    /// for adiabatic-limit, μ₀ = a for zero-viscosity, k₀ = a for
    /// heat-to-adiabatic, ε = a for perturbation-stability.
    pub ladder: Vec<f64>,
    pub mu_scale: f64,
    pub k_scale: f64,
    /// k₀ shared by candidate and reference in zero-viscosity sweeps.
    pub fixed_k0: f64,
    pub mu_shape: CoeffShape,
    pub k_shape: CoeffShape,
    pub grid: Grid,
    pub t_end: f64,
    pub frames: usize,
    pub initial: InitialCondition,
    pub law: LawParams,
    pub run: RunParams,
    pub reference_factor: usize,
    /// Also run the zero-amplitude rung to measure the discretisation floor.
    pub include_floor: bool,
}

impl SweepSpec {
    pub fn default_for(experiment: Experiment) -> Self {
        let ladder = match experiment {
            Experiment::PerturbationStability => vec![1e-2, 1e-3, 1e-4],
            _ => vec![1e-2, 5e-3, 2.5e-3],
        };
        let mut run = RunParams::new(TransportCoeffs::adiabatic());
        run.theta_floor = Some(0.5);
        SweepSpec {
            experiment,
            ladder,
            mu_scale: 1.0,
            k_scale: 1.0,
            fixed_k0: 1e-2,
            mu_shape: CoeffShape::Constant,
            k_shape: CoeffShape::Constant,
            grid: Grid::new(2, 64, 1.0).expect("default grid"),
            t_end: 0.25,
            frames: 20,
            // sine-shear data is isothermal, so with μ₀ = 0 conduction would
            // never act
            initial: match experiment {
                Experiment::HeatToAdiabatic => InitialCondition::new(InitialKind::ThermalBump, 0.05, 1.0),
                _ => InitialCondition::new(InitialKind::SineShear, 0.05, 1.0),
            },
            law: LawParams::default_for(2),
            run,
            reference_factor: 2,
            include_floor: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.len() < 3 {
            return Err(Error::Parameter(format!("ladder needs at least 3 rungs, got {}", self.ladder.len())));
        }
        if self.ladder.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Parameter("ladder amplitudes must be positive".into()));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Parameter("ladder must be strictly decreasing".into()));
        }
        if self.experiment == Experiment::ZeroViscosity && !(self.fixed_k0 > 0.0) {
            return Err(Error::Parameter("zero-viscosity sweeps need a positive fixed k0".into()));
        }
        if !(self.mu_scale >= 0.0 && self.k_scale >= 0.0) || self.mu_scale + self.k_scale == 0.0 {
            return Err(Error::Parameter("mu_scale and k_scale must be nonnegative, not both zero".into()));
        }
        if !(self.t_end > 0.0) || self.frames == 0 || self.reference_factor == 0 {
            return Err(Error::Parameter("need t_end > 0, frames >= 1 and reference_factor >= 1".into()));
        }
        Ok(())
    }

    /// (μ₀, k₀, ε) of a rung amplitude; `a = 0` is the floor rung.
    pub fn rung_params(&self, a: f64) -> (f64, f64, f64) {
        match self.experiment {
            Experiment::AdiabaticLimit => (self.mu_scale * a, self.k_scale * a, 0.0),
            Experiment::ZeroViscosity => (a, self.fixed_k0, 0.0),
            Experiment::HeatToAdiabatic => (0.0, a, 0.0),
            Experiment::PerturbationStability => (0.0, 0.0, a),
        }
    }

    fn coeffs(&self, mu0: f64, k0: f64) -> TransportCoeffs {
        TransportCoeffs { mu0, mu_shape: self.mu_shape, k0, k_shape: self.k_shape }
    }

    fn reference_coeffs(&self) -> TransportCoeffs {
        match self.experiment {
            Experiment::ZeroViscosity => self.coeffs(0.0, self.fixed_k0),
            _ => TransportCoeffs::adiabatic(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RungResult {
    pub rung: usize,
    /// Amplitude a_j (0 for the floor rung).
    pub amplitude: f64,
    pub mu0: f64,
    pub k0: f64,
    pub eps: f64,
    /// (t, ∫I dx) at every frame, frame 0 included.
    pub series: Vec<(f64, f64)>,
    pub sup_i: f64,
    /// Time integral of the dissipation drivers evaluated on the reference
    /// (∫I at t = 0 for perturbation sweeps).
    pub driver_integral: f64,
    /// Whether the step to this rung from the previous one has a local
    /// exponent inside the window (None for the first rung and the floor).
    pub slope_window_pass: Option<bool>,
    pub error: Option<String>,
}

impl RungResult {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    pub fn i_final(&self) -> f64 {
        self.series.last().map_or(f64::NAN, |x| x.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Warn => "WARN",
            Verdict::Fail => "FAIL",
        }
    }
}

/// Exponential envelope ∫I(t) ≤ C₁ e^{C₂ t} ∫I(0) for perturbation sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct GronwallFit {
    pub c1: f64,
    /// Growth rate of the envelope: the least-squares rate, clamped at 0.
    pub c2: f64,
    /// Unclamped least-squares rate on the largest rung.
    pub c2_raw: f64,
    /// C₂ fitted separately on every ladder rung.
    pub c2_per_rung: Vec<f64>,
    pub c2_stable: bool,
    /// Fraction of frames of the other rungs under the envelope fitted on
    /// the largest rung.
    pub envelope_fraction: f64,
    /// ε = 0 reproduces the reference exactly.
    pub zero_rung_identical: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rungs: Vec<RungResult>,
    /// Ladder rungs only, in order; the floor rung (if any) is last in `rungs`.
    pub monotone: bool,
    /// Fitted exponent of the sweep metric against the amplitude.
    pub slope: Option<f64>,
    pub slope_in_window: bool,
    /// ∫I(T; a_j)/∫I(T; a_{j+1}) for perturbation sweeps.
    pub ratios: Vec<f64>,
    pub gronwall: Option<GronwallFit>,
    /// Zero-viscosity sweeps: the coefficients satisfy the structural bounds.
    pub coeff_bounds_pass: Option<bool>,
    pub verdict: Verdict,
}

impl SweepResult {
    pub fn ladder_rungs(&self) -> &[RungResult] {
        &self.rungs[..self.spec.ladder.len()]
    }

    pub fn floor(&self) -> Option<&RungResult> {
        self.rungs.get(self.spec.ladder.len())
    }

    /// The per-rung quantity whose decay is tested: sup_t∫I, or ∫I(T) for
    /// perturbation sweeps.
    pub fn metric(&self, r: &RungResult) -> f64 {
        match self.spec.experiment {
            Experiment::PerturbationStability => r.i_final(),
            _ => r.sup_i,
        }
    }
}

/// ∫(μ|∇v̄|² + k|∇θ̄|²/θ̄) dx on one reference frame, split into parts.
fn driver_density(grid: &Grid, coeffs: &TransportCoeffs, u: &Fields) -> (f64, f64) {
    let d = grid.d;
    let mut visc = vec![0.0; grid.len()];
    let mut heat = vec![0.0; grid.len()];
    let th = u.theta();
    for al in 0..d {
        let dth = grid.diff(th, al);
        for (c, x) in heat.iter_mut().enumerate() {
            *x += dth[c] * dth[c];
        }
        for i in 0..d {
            let dv = grid.diff(u.v(i), al);
            for (c, x) in visc.iter_mut().enumerate() {
                *x += dv[c] * dv[c];
            }
        }
    }
    for c in 0..grid.len() {
        let s = u.state(c);
        visc[c] *= coeffs.mu(&s.xi, s.theta);
        heat[c] *= coeffs.k(&s.xi, s.theta) / s.theta;
    }
    (grid.integrate(&visc), grid.integrate(&heat))
}

fn trapezoid(series: &[(f64, f64)]) -> f64 {
    series.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

fn run_rung(
    spec: &SweepSpec,
    law: &PolyconvexLaw,
    reference: &[(f64, Fields)],
    rung: usize,
    amplitude: f64,
) -> RungResult {
    let (mu0, k0, eps) = spec.rung_params(amplitude);
    let mut out = RungResult {
        rung,
        amplitude,
        mu0,
        k0,
        eps,
        series: Vec::new(),
        sup_i: f64::NAN,
        driver_integral: f64::NAN,
        slope_window_pass: None,
        error: None,
    };
    let res = (|| -> Result<()> {
        let mut params = spec.run;
        params.coeffs = spec.coeffs(mu0, k0);
        let ic = InitialCondition { perturbation: eps, ..spec.initial };
        let init = make_initial(&ic, &spec.grid, law, params)?;
        let opts = RunOptions { t_end: spec.t_end, frames: spec.frames, keep_fields: true };
        let cand = run(init, law, &opts, None)?;
        if cand.frames.len() != reference.len() {
            return Err(Error::GridMismatch("candidate and reference frame counts differ".into()));
        }
        out.series = cand
            .frames
            .par_iter()
            .zip(reference)
            .map(|((t, u), (_, ub))| Ok((*t, i_integral(law, &spec.grid, u, ub)?)))
            .collect::<Result<_>>()?;
        out.sup_i = out.series.iter().map(|x| x.1).fold(0.0, f64::max);
        out.driver_integral = match spec.experiment {
            Experiment::PerturbationStability => out.series[0].1,
            _ => {
                let coeffs = spec.coeffs(mu0, k0);
                let dens: Vec<(f64, f64)> = reference
                    .iter()
                    .map(|(t, ub)| {
                        let (v, h) = driver_density(&spec.grid, &coeffs, ub);
                        let val = match spec.experiment {
                            Experiment::ZeroViscosity => v,
                            Experiment::HeatToAdiabatic => h,
                            _ => v + h,
                        };
                        (*t, val)
                    })
                    .collect();
                trapezoid(&dens)
            }
        };
        Ok(())
    })();
    if let Err(e) = res {
        out.error = Some(e.to_string());
    }
    out
}

fn gronwall_fit(result: &SweepResult) -> Option<GronwallFit> {
    let rungs = result.ladder_rungs();
    if rungs.iter().any(|r| !r.ok()) {
        return None;
    }
    let log_ratio = |r: &RungResult| -> Vec<(f64, f64)> {
        let i0 = r.series[0].1;
        r.series.iter().filter(|x| x.1 > 0.0 && i0 > 0.0).map(|&(t, i)| (t, (i / i0).ln())).collect()
    };
    let c2_per_rung: Vec<f64> = rungs.iter().filter_map(|r| fit_line(&log_ratio(r)).map(|x| x.1)).collect();
    let pts = log_ratio(&rungs[0]);
    let (_, c2_raw) = fit_line(&pts)?;
    let c2 = c2_raw.max(0.0);
    let a = pts.iter().map(|(t, y)| y - c2 * t).sum::<f64>() / pts.len() as f64;
    let lift = pts.iter().map(|(t, y)| y - (a + c2 * t)).fold(0.0, f64::max);
    let c1 = (a + lift).exp();
    let mut inside = 0;
    let mut total = 0;
    for r in &rungs[1..] {
        let i0 = r.series[0].1;
        for &(t, i) in &r.series {
            total += 1;
            if i <= c1 * (c2 * t).exp() * i0 * (1.0 + 1e-12) {
                inside += 1;
            }
        }
    }
    let spread = c2_per_rung.iter().map(|c| (c - c2_raw).abs()).fold(0.0, f64::max);
    let zero_rung_identical = result.floor().is_some_and(|f| f.ok() && f.series.iter().all(|x| x.1 == 0.0));
    Some(GronwallFit {
        c1,
        c2,
        c2_raw,
        c2_stable: c2_per_rung.len() == rungs.len() && spread <= 0.3 * c2_raw.abs().max(0.1),
        c2_per_rung,
        envelope_fraction: if total > 0 { inside as f64 / total as f64 } else { 0.0 },
        zero_rung_identical,
    })
}

/// Run every rung (in parallel) against a shared reference.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let law = PolyconvexLaw::new(spec.grid.d, spec.law)?;
    let opts = RunOptions { t_end: spec.t_end, frames: spec.frames, keep_fields: true };
    let mut ref_params = spec.run;
    ref_params.coeffs = spec.reference_coeffs();
    let factor = match spec.experiment {
        // both sides live on the same grid
        Experiment::PerturbationStability => 1,
        _ => spec.reference_factor,
    };
    let reference = refined_solution(&spec.initial, &spec.grid, &law, &opts, factor, ref_params)?.frames;

    let mut amps = spec.ladder.clone();
    if spec.include_floor {
        amps.push(0.0);
    }
    let rungs: Vec<RungResult> =
        amps.par_iter().enumerate().map(|(j, &a)| run_rung(spec, &law, &reference, j, a)).collect();

    let mut result = SweepResult {
        spec: spec.clone(),
        rungs,
        monotone: false,
        slope: None,
        slope_in_window: false,
        ratios: Vec::new(),
        gronwall: None,
        coeff_bounds_pass: None,
        verdict: Verdict::Fail,
    };
    let (lo, hi) = spec.experiment.slope_window();
    let n = spec.ladder.len();
    let metrics: Vec<f64> = result.rungs[..n].iter().map(|r| result.metric(r)).collect();
    let all_ok = result.rungs.iter().all(|r| r.ok());
    result.monotone = all_ok && metrics.windows(2).all(|w| w[1] < w[0]);
    for j in 1..n {
        let (a0, a1) = (spec.ladder[j - 1], spec.ladder[j]);
        let local = (metrics[j - 1] / metrics[j]).ln() / (a0 / a1).ln();
        result.rungs[j].slope_window_pass = Some(local.is_finite() && local >= lo && local <= hi);
        if spec.experiment == Experiment::PerturbationStability {
            result.ratios.push(metrics[j - 1] / metrics[j]);
        }
    }
    let amp = |r: &RungResult| match spec.experiment {
        Experiment::AdiabaticLimit => r.mu0 + r.k0,
        _ => r.amplitude,
    };
    if all_ok {
        let pts: Vec<(f64, f64)> = result.rungs[..n]
            .iter()
            .zip(&metrics)
            .filter(|(_, m)| **m > 0.0)
            .map(|(r, m)| (amp(r).ln(), m.ln()))
            .collect();
        result.slope = fit_line(&pts).map(|x| x.1);
    }
    result.slope_in_window = result.slope.is_some_and(|s| s >= lo && s <= hi);

    if spec.experiment == Experiment::ZeroViscosity {
        let coeffs = spec.coeffs(spec.ladder[0], spec.fixed_k0);
        let schedule = ShellSchedule::default();
        let rep = check_coeff_bounds(&coeffs, &law, &schedule);
        result.coeff_bounds_pass = Some(rep.pass_zero_viscosity_mode);
    }
    if spec.experiment == Experiment::PerturbationStability {
        result.gronwall = gronwall_fit(&result);
    }

    result.verdict = if !result.monotone || result.coeff_bounds_pass == Some(false) {
        Verdict::Fail
    } else if let Some(g) = &result.gronwall {
        if (spec.include_floor && !g.zero_rung_identical) || !g.c2_stable || g.envelope_fraction < 0.95 {
            Verdict::Fail
        } else if result.ratios.iter().all(|r| *r >= 80.0 && *r <= 120.0) {
            Verdict::Pass
        } else {
            Verdict::Warn
        }
    } else if spec.experiment == Experiment::PerturbationStability {
        Verdict::Fail
    } else if result.slope_in_window {
        Verdict::Pass
    } else {
        Verdict::Warn
    };
    Ok(result)
}

pub const SWEEP_CSV_HEADER: &str = "rung,mu0,k0,eps,sup_I,driver_integral,slope_window_pass";

fn opt_bool(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "true",
        Some(false) => "false",
        None => "",
    }
}

/// One row per ladder rung, then a `slope` row holding the fitted exponent
/// in the `sup_I` column. The floor rung is reported in the series CSV and
/// the summary only.
pub fn write_sweep_csv<W: Write>(result: &SweepResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for r in result.ladder_rungs() {
        let num = |x: f64| if r.ok() { format!("{x:.9e}") } else { "nan".to_string() };
        writeln!(
            w,
            "{},{:.6e},{:.6e},{:.6e},{},{},{}",
            r.rung,
            r.mu0,
            r.k0,
            r.eps,
            num(r.sup_i),
            num(r.driver_integral),
            opt_bool(r.slope_window_pass)
        )?;
    }
    let slope = result.slope.map_or("nan".to_string(), |s| format!("{s:.6}"));
    writeln!(w, "slope,,,,{slope},,{}", result.slope_in_window)
}

pub const SERIES_CSV_HEADER: &str = "rung,t,I_integral";

/// ∫I(t) for every rung and frame.
pub fn write_series_csv<W: Write>(result: &SweepResult, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SERIES_CSV_HEADER}")?;
    for r in &result.rungs {
        for (t, i) in &r.series {
            writeln!(w, "{},{:.9e},{:.9e}", r.rung, t, i)?;
        }
    }
    Ok(())
}

/// Human-readable `key = value` report with the fitted constants.
pub fn summary(result: &SweepResult) -> String {
    let s = &result.spec;
    let mut o = String::new();
    let _ = writeln!(o, "# sweep summary: {}", s.experiment.label());
    let _ = writeln!(
        o,
        "# scope: candidates are smooth discrete solutions; estimates for weak solutions are exercised on smooth data only"
    );
    let _ = writeln!(o, "{{");
    let _ = writeln!(o, "  experiment = \"{}\"", s.experiment.label());
    let _ = writeln!(o, "  grid = {{ d = {}, N = {}, L = {} }}", s.grid.d, s.grid.n, s.grid.l);
    let _ = writeln!(o, "  t_end = {}, frames = {}", s.t_end, s.frames);
    let _ = writeln!(
        o,
        "  initial = {{ kind = \"{}\", amplitude = {}, theta0 = {} }}",
        s.initial.kind.label(),
        s.initial.amplitude,
        s.initial.theta0
    );
    let _ = writeln!(o, "  ladder = {:?}", s.ladder);
    let _ = writeln!(o, "  hyperviscosity = {}", s.run.hyperviscosity);
    let _ = writeln!(o, "  reference_factor = {}", s.reference_factor);
    for r in &result.rungs {
        match &r.error {
            None => {
                let _ = writeln!(
                    o,
                    "  rung {} = {{ mu0 = {:e}, k0 = {:e}, eps = {:e}, sup_I = {:.6e}, I_T = {:.6e}, driver = {:.6e} }}",
                    r.rung,
                    r.mu0,
                    r.k0,
                    r.eps,
                    r.sup_i,
                    r.i_final(),
                    r.driver_integral
                );
            }
            Some(e) => {
                let _ = writeln!(o, "  rung {} = {{ error = \"{}\" }}", r.rung, e);
            }
        }
    }
    let _ = writeln!(o, "  monotone = {}", result.monotone);
    let (lo, hi) = s.experiment.slope_window();
    match result.slope {
        Some(x) => {
            let _ = writeln!(o, "  slope = {x:.4}  # window [{lo:.3}, {hi:.3}]");
        }
        None => {
            let _ = writeln!(o, "  slope = nan");
        }
    }
    if !result.ratios.is_empty() {
        let _ = writeln!(o, "  ratios = {:?}", result.ratios);
    }
    if let Some(g) = &result.gronwall {
        let _ = writeln!(
            o,
            "  gronwall = {{ C1 = {:.6e}, C2 = {:.6e}, C2_raw = {:.6e}, C2_per_rung = {:?}, C2_stable = {}, envelope_fraction = {:.3}, zero_rung_identical = {} }}",
            g.c1, g.c2, g.c2_raw, g.c2_per_rung, g.c2_stable, g.envelope_fraction, g.zero_rung_identical
        );
    }
    if let Some(p) = result.coeff_bounds_pass {
        let _ = writeln!(o, "  coeff_bounds_pass = {p}");
    }
    let _ = writeln!(o, "  verdict = \"{}\"", result.verdict.label());
    let _ = writeln!(o, "}}");
    o
}

/// Standalone gnuplot script plotting the sweep metric against the rung
/// amplitude on log-log axes.
pub fn plot_script(result: &SweepResult, csv_name: &str) -> String {
    let (x, xlabel) = match result.spec.experiment {
        Experiment::PerturbationStability => ("($4)", "eps"),
        Experiment::ZeroViscosity => ("($2)", "mu0"),
        Experiment::HeatToAdiabatic => ("($3)", "k0"),
        Experiment::AdiabaticLimit => ("($2+$3)", "mu0 + k0"),
    };
    // the floor row (zero amplitude) and the slope row are not positive
    // numbers and drop out on log axes
    format!(
        "# gnuplot script: sup_t int I dx against the rung amplitude\n\
         set datafile separator ','\n\
         set logscale xy\n\
         set key top left\n\
         set xlabel '{xlabel}'\n\
         set ylabel 'sup_t int I dx'\n\
         set title '{title}'\n\
         set terminal pngcairo size 800,600\n\
         set output '{stem}.png'\n\
         plot '{csv}' every ::1 using {x}:5 with linespoints pt 7 title 'sweep'\n",
        title = result.spec.experiment.label(),
        stem = csv_name.trim_end_matches(".csv"),
        csv = csv_name,
    )
}
