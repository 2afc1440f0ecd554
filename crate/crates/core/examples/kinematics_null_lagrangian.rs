//! Null-Lagrangian structure of the minors: the pointwise identity
//! cof(F)ᵀF = det F·I, and second-order decay of the discrete Piola and
//! transport residuals of a smooth periodic motion.

use polytherm::kinematics::{cof, det, phi};
use polytherm::tensor::Mat;
use polytherm::verify::{cofactor_identity_residual, min_order, observed_orders, refinement_residuals};

fn main() -> polytherm::Result<()> {
    let f = Mat::from_fn(3, |i, a| if i == a { 1.1 } else { 0.1 * (i + 2 * a) as f64 });
    println!("F = {f:?}");
    println!("det F = {:.6}", det(&f));
    println!("cof F = {:?}", cof(&f));
    println!("Phi(F) = {:?}", phi(&f).as_slice());

    for d in [2, 3] {
        println!("d={d}: max |cof(F)^T F - det F I| over 1000 states = {:.2e}", cofactor_identity_residual(d, 1000, 7));
    }

    let sizes = [32, 64, 128];
    let (nl, tr) = refinement_residuals(2, &sizes)?;
    println!("\n   N   piola_residual   transport_residual");
    for (j, n) in sizes.iter().enumerate() {
        println!("{n:4}   {:.4e}       {:.4e}", nl[j], tr[j]);
    }
    println!("orders: piola {:?}, transport {:?}", observed_orders(&nl), observed_orders(&tr));
    println!("min orders: {:.3} / {:.3}", min_order(&nl), min_order(&tr));
    Ok(())
}
