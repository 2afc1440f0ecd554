//! Symmetrizability of the augmented system: the analytic symmetrizer
//! against its finite-difference assembly, its block structure, and the
//! hyperbolicity certificate (positive definiteness) on Γ_{3,0.2}.

use polytherm::augmented::{hyperbolicity_certificate, max_wave_speed, off_block_max, symmetrizer, symmetrizer_fd};
use polytherm::constitutive::{sample_states, LawParams, PolyconvexLaw, SampleBox, ThermalKind};
use polytherm::tensor::ThermoState;

fn main() -> polytherm::Result<()> {
    for thermal in [ThermalKind::Quadratic, ThermalKind::Logarithmic] {
        let mut p = LawParams::default_for(3);
        p.thermal = thermal;
        let law = PolyconvexLaw::new(3, p)?;
        let rest = ThermoState::rest(3, 1.0);
        let s = symmetrizer(&law, &rest)?;
        let fd = symmetrizer_fd(&law, &rest, 1e-4)?;
        println!("{thermal:?}: symmetrizer at rest is {}x{}", s.nrows(), s.ncols());
        println!("  |analytic - fd|_max = {:.2e}", (&s - &fd).amax());
        println!("  off-block max       = {:.2e}", off_block_max(&s, 3));
        println!("  max wave speed      = {:.4}", max_wave_speed(&law, &rest));
        let samples = sample_states(3, 1000, 7, &SampleBox::gamma(3.0, 0.2));
        let cert = hyperbolicity_certificate(&law, &samples);
        let min = cert.min_eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        println!("  certificate on 1000 samples: pass={} min eigenvalue {:.4e}", cert.pass, min);
    }
    Ok(())
}
