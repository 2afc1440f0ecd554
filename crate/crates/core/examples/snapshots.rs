//! Snapshot format: a text header `POLYTHERM v1, d, N, t, n_fields` followed
//! by little-endian f64 field arrays. Writes one and reads it back.

use polytherm::constitutive::{LawParams, PolyconvexLaw, TransportCoeffs};
use polytherm::grid::Grid;
use polytherm::solver::*;
use std::io::BufReader;

fn main() -> polytherm::Result<()> {
    let law = PolyconvexLaw::new(2, LawParams::default_for(2))?;
    let grid = Grid::new(2, 16, 1.0)?;
    let ic = InitialCondition::new(InitialKind::ThermalBump, 0.1, 1.0);
    let state = make_initial(&ic, &grid, &law, RunParams::new(TransportCoeffs::constant(0.0, 1e-2)))?;
    let state = step(&state, &law, 0.5 * stable_dt(&law, &state))?;
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &grid, state.t, &state.primitives())?;
    let header = buf.split(|b| *b == b'\n').next().unwrap_or_default();
    println!("{} bytes, header: {}", buf.len(), String::from_utf8_lossy(header));
    let (d, n, t, comps) = read_snapshot(BufReader::new(&buf[..]))?;
    println!("read back d={d} N={n} t={t:.6e}, {} fields of {} values", comps.len(), comps[0].len());
    Ok(())
}
