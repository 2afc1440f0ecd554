//! Adiabatic run from sine-shear data: total energy is conserved to
//! round-off and the diagnostics CSV goes to stdout.
//!
//! `cargo run --release --example adiabatic_run -- 64`

use polytherm::constitutive::{LawParams, PolyconvexLaw, TransportCoeffs};
use polytherm::grid::Grid;
use polytherm::solver::*;

fn main() -> polytherm::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let law = PolyconvexLaw::new(2, LawParams::default_for(2))?;
    let grid = Grid::new(2, n, 1.0)?;
    let ic = InitialCondition::new(InitialKind::SineShear, 0.05, 1.0);
    let initial = make_initial(&ic, &grid, &law, RunParams::new(TransportCoeffs::adiabatic()))?;
    let out = run(initial, &law, &RunOptions { t_end: 0.25, frames: 10, keep_fields: false }, None)?;
    write_diagnostics_csv(&out.diagnostics, std::io::stdout().lock())?;
    let (first, last) = (out.diagnostics[0], out.diagnostics[out.diagnostics.len() - 1]);
    eprintln!(
        "{} steps; relative energy drift {:.2e}",
        out.steps,
        (last.e_total - first.e_total).abs() / first.e_total.abs()
    );
    Ok(())
}
