//! Fitted constants of the pointwise relative-entropy bounds on sampled
//! pairs (U, Ū), near and far from Γ, at N and 4N samples.

use polytherm::constitutive::{LawParams, PolyconvexLaw, ThermalKind, TransportCoeffs};
use polytherm::relentropy::{relative_bounds_check, GammaParams};

fn fmt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.4e}"))
}

fn main() -> polytherm::Result<()> {
    let d: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    for thermal in [ThermalKind::Quadratic, ThermalKind::Logarithmic] {
        let mut p = LawParams::default_for(d);
        p.thermal = thermal;
        let law = PolyconvexLaw::new(d, p)?;
        let rep = relative_bounds_check(&law, &TransportCoeffs::constant(1e-2, 1e-2), &GammaParams::default(), 10_000, 7);
        println!("d={d} {thermal:?}: far radius R = {}, {} far samples, pass = {}", rep.radius, rep.far_samples, rep.pass);
        for b in &rep.bounds {
            println!(
                "  {:8} {:24} near {} / {}  far {} / {}  stable={} {}",
                b.name,
                b.label,
                fmt(b.near.0),
                fmt(b.near.1),
                fmt(b.far.0),
                fmt(b.far.1),
                b.stable,
                if b.applicable { "" } else { "(hypothesis fails: not applicable)" }
            );
        }
    }
    Ok(())
}
