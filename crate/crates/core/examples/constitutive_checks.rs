//! The two built-in free energies: derivative oracles against central
//! differences, the Gibbs (convexity/concavity) conditions, growth over
//! geometric shells and transport-coefficient bounds.

use polytherm::constitutive::*;

fn main() -> polytherm::Result<()> {
    for d in [2, 3] {
        for thermal in [ThermalKind::Quadratic, ThermalKind::Logarithmic] {
            let mut p = LawParams::default_for(d);
            p.thermal = thermal;
            let law = PolyconvexLaw::new(d, p)?;
            let samples = sample_states(d, 1000, 7, &SampleBox::gamma(3.0, 0.2));
            let der = derivative_check(&law, &samples, 1e-5);
            let gibbs = check_gibbs(&law, &samples);
            let growth = check_growth(&law, &ShellSchedule::default());
            let coeffs = check_coeff_bounds(&TransportCoeffs::constant(1e-2, 1e-2), &law, &ShellSchedule::default());
            println!("d={d} {thermal:?} (stress offset {:.3})", law.stress_offset());
            println!("  worst derivative error   {:.2e}", der.max());
            println!(
                "  gibbs                    {} (min eig psi_xixi {:.3}, max psi_thetatheta {:.3})",
                gibbs.pass, gibbs.min_eig_xixi, gibbs.max_psi_thetatheta
            );
            println!(
                "  growth                   {} (c_lower {:.3}, c_upper {:.3}; fluxes F {} zeta {} w {} theta {})",
                growth.pass,
                growth.c_lower,
                growth.c_upper,
                growth.flux_f.label(),
                growth.flux_zeta.label(),
                growth.flux_w.label(),
                growth.theta.label()
            );
            println!(
                "  coefficient bounds       adiabatic mode {}, zero-viscosity mode {}",
                coeffs.pass_adiabatic_mode, coeffs.pass_zero_viscosity_mode
            );
        }
    }
    Ok(())
}
