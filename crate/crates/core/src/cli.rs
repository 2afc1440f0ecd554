//! Command-line front end: TOML config with dotted overrides, dispatch to the
//! verification suites, the solver and the sweep harness, and report files.

use crate::constitutive::{CoeffShape, LawParams, ThermalKind, TransportCoeffs};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::harness::{self, Experiment, SweepSpec, Verdict};
use crate::solver::{self, InitialCondition, InitialKind, RunOptions, RunParams};
use crate::verify::{self, VerifyConfig};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "polytherm", version, about = "Polyconvex thermoviscoelasticity: checks, runs and sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, value_name = "DIR", default_value = "polytherm-out")]
    pub out: PathBuf,
    /// Override one config key, e.g. `--override law.alpha=0`.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the property suites and write verify_report.csv.
    Verify,
    /// Single run: diagnostics.csv plus field snapshots.
    Simulate,
    /// Parameter ladder: sweep.csv, series.csv, summary.txt, plot.gp.
    Sweep,
}

// Every key is optional; each command overlays the keys that are present on
// its own defaults.

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub law: LawSection,
    #[serde(default)]
    pub coeffs: CoeffsSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub l: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    /// "quadratic" or "logarithmic" thermal factor.
    pub kind: Option<String>,
    pub alpha: Option<f64>,
    pub quartic: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub c_v: Option<f64>,
    pub gamma: Option<f64>,
    pub theta0: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsSection {
    pub mu0: Option<f64>,
    pub k0: Option<f64>,
    /// Shape of both coefficients: "constant", "inverse-theta", "cubic-theta".
    pub kind: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub cfl: Option<f64>,
    pub cfl_parabolic: Option<f64>,
    pub hyperviscosity: Option<f64>,
    /// Temperature floor; 0 disables it.
    pub theta_floor: Option<f64>,
    pub smoothness_limit: Option<f64>,
    pub t_end: Option<f64>,
    pub frames: Option<usize>,
    pub snapshots: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub kind: Option<String>,
    pub amplitude: Option<f64>,
    pub theta0: Option<f64>,
    pub perturbation: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub experiment: Option<String>,
    pub ladder: Option<Vec<f64>>,
    pub mu_scale: Option<f64>,
    pub k_scale: Option<f64>,
    pub fixed_k0: Option<f64>,
    pub reference_factor: Option<usize>,
    pub include_floor: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub samples: Option<usize>,
    pub bound_samples: Option<usize>,
    pub fd_step: Option<f64>,
    pub refinement: Option<Vec<usize>>,
    pub gamma_m: Option<f64>,
    pub gamma_delta: Option<f64>,
    pub theta_floor: Option<f64>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse `value` as TOML if it is a valid TOML value (number, bool, array,
/// quoted string), otherwise take it as a bare string.
fn parse_value(value: &str) -> toml::Value {
    let probe = format!("v = {value}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    }
}

/// Apply `key.path=value` to a TOML table, creating sections as needed.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override `{spec}` is not of the form key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), parse_value(value.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| config_err(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(format!("{e}")))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn dimension(&self) -> usize {
        self.grid.d.unwrap_or(2)
    }

    pub fn grid_or(&self, default: &Grid) -> Result<Grid> {
        let d = self.grid.d.unwrap_or(default.d);
        let n = self.grid.n.unwrap_or(default.n);
        if n < 8 {
            return Err(config_err(format!("grid.n must be at least 8, got {n}")));
        }
        Grid::new(d, n, self.grid.l.unwrap_or(default.l)).map_err(|e| config_err(e.to_string()))
    }

    pub fn law_params(&self, d: usize) -> Result<LawParams> {
        let s = &self.law;
        let mut p = LawParams::default_for(d);
        if let Some(k) = &s.kind {
            p.thermal = match k.as_str() {
                "quadratic" => ThermalKind::Quadratic,
                "logarithmic" | "log" => ThermalKind::Logarithmic,
                other => return Err(config_err(format!("unknown law.kind `{other}`"))),
            };
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.alpha, s.alpha);
        set(&mut p.quartic, s.quartic);
        set(&mut p.beta, s.beta);
        set(&mut p.delta, s.delta);
        set(&mut p.c_v, s.c_v);
        set(&mut p.gamma, s.gamma);
        set(&mut p.theta0, s.theta0);
        Ok(p)
    }

    fn shape(&self) -> Result<Option<CoeffShape>> {
        self.coeffs.kind.as_deref().map(|k| CoeffShape::parse(k).map_err(|e| config_err(e.to_string()))).transpose()
    }

    pub fn coeffs_or(&self, default: TransportCoeffs) -> Result<TransportCoeffs> {
        let mut c = default;
        if let Some(v) = self.coeffs.mu0 {
            c.mu0 = v;
        }
        if let Some(v) = self.coeffs.k0 {
            c.k0 = v;
        }
        if let Some(s) = self.shape()? {
            c.mu_shape = s;
            c.k_shape = s;
        }
        if !(c.mu0 >= 0.0 && c.k0 >= 0.0) {
            return Err(config_err("coeffs.mu0 and coeffs.k0 must be >= 0"));
        }
        Ok(c)
    }

    pub fn run_params_or(&self, mut p: RunParams) -> RunParams {
        let s = &self.solver;
        if let Some(v) = s.cfl {
            p.cfl = v;
        }
        if let Some(v) = s.cfl_parabolic {
            p.cfl_parabolic = v;
        }
        if let Some(v) = s.hyperviscosity {
            p.hyperviscosity = v;
        }
        if let Some(v) = s.theta_floor {
            p.theta_floor = (v > 0.0).then_some(v);
        }
        if let Some(v) = s.smoothness_limit {
            p.smoothness_limit = v;
        }
        p
    }

    pub fn initial_or(&self, mut ic: InitialCondition) -> Result<InitialCondition> {
        let s = &self.initial;
        if let Some(k) = &s.kind {
            ic.kind = InitialKind::parse(k).map_err(|e| config_err(e.to_string()))?;
        }
        if let Some(v) = s.amplitude {
            ic.amplitude = v;
        }
        if let Some(v) = s.theta0 {
            ic.theta0 = v;
        }
        if let Some(v) = s.perturbation {
            ic.perturbation = v;
        }
        Ok(ic)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig> {
        let d = self.dimension();
        crate::tensor::check_dim(d).map_err(|e| config_err(e.to_string()))?;
        let mut c = VerifyConfig::default_for(d);
        c.law = self.law_params(d)?;
        c.coeffs = self.coeffs_or(c.coeffs)?;
        let v = &self.verify;
        if let Some(s) = self.seed {
            c.seed = s;
            c.schedule.seed = s;
        }
        if let Some(x) = v.samples {
            c.samples = x;
        }
        if let Some(x) = v.bound_samples {
            c.bound_samples = x;
        }
        if let Some(x) = v.fd_step {
            c.fd_step = x;
        }
        if let Some(x) = &v.refinement {
            if x.len() < 2 || x.iter().any(|n| *n < 8) {
                return Err(config_err("verify.refinement needs at least two sizes >= 8"));
            }
            c.refinement = x.clone();
        }
        if let Some(x) = v.gamma_m {
            c.gamma.m = x;
        }
        if let Some(x) = v.gamma_delta {
            c.gamma.delta = x;
        }
        if let Some(x) = v.theta_floor {
            c.gamma.theta_floor = x;
            c.schedule.theta_floor = x;
        }
        if c.samples == 0 || c.bound_samples == 0 {
            return Err(config_err("verify sample counts must be positive"));
        }
        Ok(c)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let name = self.sweep.experiment.as_deref().unwrap_or("adiabatic-limit");
        let exp = Experiment::parse(name).map_err(|e| config_err(e.to_string()))?;
        let mut s = SweepSpec::default_for(exp);
        s.grid = self.grid_or(&s.grid)?;
        s.law = self.law_params(s.grid.d)?;
        s.run = self.run_params_or(s.run);
        s.initial = self.initial_or(s.initial)?;
        if let Some(x) = self.solver.t_end {
            s.t_end = x;
        }
        if let Some(x) = self.solver.frames {
            s.frames = x;
        }
        if let Some(sh) = self.shape()? {
            s.mu_shape = sh;
            s.k_shape = sh;
        }
        let w = &self.sweep;
        if let Some(x) = &w.ladder {
            s.ladder = x.clone();
        }
        if let Some(x) = w.mu_scale {
            s.mu_scale = x;
        }
        if let Some(x) = w.k_scale {
            s.k_scale = x;
        }
        if let Some(x) = w.fixed_k0 {
            s.fixed_k0 = x;
        }
        if let Some(x) = w.reference_factor {
            s.reference_factor = x;
        }
        if let Some(x) = w.include_floor {
            s.include_floor = x;
        }
        s.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(s)
    }
}

/// Outcome of a command: exit code plus the files it wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: u8,
    pub files: Vec<PathBuf>,
    pub message: String,
}

fn create(dir: &Path, name: &str, files: &mut Vec<PathBuf>) -> Result<BufWriter<File>> {
    let p = dir.join(name);
    let f = File::create(&p)?;
    files.push(p);
    Ok(BufWriter::new(f))
}

pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let vc = cfg.verify_config()?;
    fs::create_dir_all(out)?;
    let rows = verify::run_all(&vc)?;
    let mut files = Vec::new();
    let mut w = create(out, "verify_report.csv", &mut files)?;
    verify::write_report_csv(&rows, &mut w)?;
    w.flush()?;
    let failed: Vec<String> =
        rows.iter().filter(|r| r.status == verify::Status::Fail).map(|r| format!("{}/{}", r.suite, r.check)).collect();
    let (code, message) = if failed.is_empty() {
        (EXIT_PASS, format!("verify: all {} checks passed", rows.len()))
    } else {
        (EXIT_FAIL, format!("verify: {} of {} checks failed: {}", failed.len(), rows.len(), failed.join(", ")))
    };
    Ok(Outcome { code, files, message })
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let grid = cfg.grid_or(&Grid::new(2, 64, 1.0)?)?;
    let law = crate::constitutive::PolyconvexLaw::new(grid.d, cfg.law_params(grid.d)?)
        .map_err(|e| config_err(e.to_string()))?;
    let coeffs = cfg.coeffs_or(TransportCoeffs::adiabatic())?;
    let params = cfg.run_params_or(RunParams::new(coeffs));
    let theta0 = law.params.theta0;
    let ic = cfg.initial_or(InitialCondition::new(InitialKind::SineShear, 0.05, theta0))?;
    let opts = RunOptions {
        t_end: cfg.solver.t_end.unwrap_or(0.25),
        frames: cfg.solver.frames.unwrap_or(20),
        keep_fields: cfg.solver.snapshots.unwrap_or(true),
    };
    if !(opts.t_end > 0.0) || opts.frames == 0 {
        return Err(config_err("solver.t_end must be > 0 and solver.frames >= 1"));
    }
    let initial = solver::make_initial(&ic, &grid, &law, params).map_err(|e| config_err(e.to_string()))?;
    fs::create_dir_all(out)?;
    let mut files = Vec::new();
    match solver::run(initial, &law, &opts, None) {
        Ok(res) => {
            let mut w = create(out, "diagnostics.csv", &mut files)?;
            solver::write_diagnostics_csv(&res.diagnostics, &mut w)?;
            w.flush()?;
            if opts.keep_fields {
                let dir = out.join("snapshots");
                fs::create_dir_all(&dir)?;
                for (j, (t, u)) in res.frames.iter().enumerate() {
                    let mut w = create(&dir, &format!("frame_{j:04}.bin"), &mut files)?;
                    solver::write_snapshot(&mut w, &grid, *t, u)?;
                    w.flush()?;
                }
            }
            Ok(Outcome {
                code: EXIT_PASS,
                files,
                message: format!(
                    "simulate: {} run reached t = {:.4} in {} steps",
                    params.variant().label(),
                    res.final_state.t,
                    res.steps
                ),
            })
        }
        Err(abort) => {
            let mut w = create(out, "diagnostics.csv", &mut files)?;
            solver::write_diagnostics_csv(&abort.diagnostics, &mut w)?;
            w.flush()?;
            let last = &abort.last_good;
            let mut w = create(out, "abort_state.bin", &mut files)?;
            solver::write_snapshot(&mut w, &last.grid, last.t, &last.primitives())?;
            w.flush()?;
            Ok(Outcome {
                code: EXIT_FAIL,
                message: format!(
                    "simulate: run aborted: {}; state at abort (t = {:.4}) dumped to {}",
                    abort.error,
                    last.t,
                    out.join("abort_state.bin").display()
                ),
                files,
            })
        }
    }
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let spec = cfg.sweep_spec()?;
    fs::create_dir_all(out)?;
    let result = harness::run_sweep(&spec)?;
    let mut files = Vec::new();
    let mut w = create(out, "sweep.csv", &mut files)?;
    harness::write_sweep_csv(&result, &mut w)?;
    w.flush()?;
    let mut w = create(out, "series.csv", &mut files)?;
    harness::write_series_csv(&result, &mut w)?;
    w.flush()?;
    let mut w = create(out, "summary.txt", &mut files)?;
    w.write_all(harness::summary(&result).as_bytes())?;
    w.flush()?;
    let mut w = create(out, "plot.gp", &mut files)?;
    w.write_all(harness::plot_script(&result, "sweep.csv").as_bytes())?;
    w.flush()?;
    let aborted = result.rungs.iter().filter(|r| !r.ok()).count();
    let code = if aborted > 0 || result.verdict == Verdict::Fail { EXIT_FAIL } else { EXIT_PASS };
    let message = format!(
        "sweep {}: verdict {:?}, slope {:.3}, {} aborted rung(s)",
        spec.experiment.label(),
        result.verdict,
        result.slope.unwrap_or(f64::NAN),
        aborted
    );
    Ok(Outcome { code, files, message })
}

/// Run one parsed invocation; config problems map to exit code 2.
pub fn execute(cli: &Cli) -> Outcome {
    let usage = |e: Error| Outcome { code: EXIT_USAGE, files: vec![], message: format!("error: {e}") };
    let cfg = match RunConfig::load(cli.common.config.as_deref(), &cli.common.overrides) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    let out = &cli.common.out;
    let res = match cli.command {
        Command::Verify => cmd_verify(&cfg, out),
        Command::Simulate => cmd_simulate(&cfg, out),
        Command::Sweep => cmd_sweep(&cfg, out),
    };
    match res {
        Ok(o) => o,
        Err(e @ Error::Config(_)) => usage(e),
        Err(e) => Outcome { code: EXIT_FAIL, files: vec![], message: format!("error: {e}") },
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS });
        }
    };
    let o = execute(&cli);
    if o.code == EXIT_PASS {
        if !cli.common.quiet {
            println!("{}", o.message);
            for f in &o.files {
                println!("  wrote {}", f.display());
            }
        }
    } else {
        eprintln!("{}", o.message);
    }
    ExitCode::from(o.code)
}
