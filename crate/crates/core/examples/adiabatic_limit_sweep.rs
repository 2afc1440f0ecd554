//! Vanishing-dissipation ladder μ₀ = k₀ → 0 against an adiabatic reference
//! on a 2× finer grid; prints the summary and the sweep CSV.
//!
//! `cargo run --release --example adiabatic_limit_sweep -- 32`

use polytherm::grid::Grid;
use polytherm::harness::{run_sweep, summary, write_sweep_csv, Experiment, SweepSpec};

fn main() -> polytherm::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let mut spec = SweepSpec::default_for(Experiment::AdiabaticLimit);
    spec.grid = Grid::new(2, n, 1.0)?;
    let result = run_sweep(&spec)?;
    print!("{}", summary(&result));
    write_sweep_csv(&result, std::io::stdout().lock())?;
    Ok(())
}
