//! Spin-photon correlations in the Z, X and Y bases and the composite
//! entanglement fidelity, exact and sampled.

use qdtransfer::protocol::{run_entanglement_verification, NoiseModel, Sampling};

fn main() -> qdtransfer::Result<()> {
    let noise = NoiseModel::calibrated();
    for sampling in [Sampling::exact(), Sampling::monte_carlo(100_000, 2024)] {
        let r = run_entanglement_verification(&noise, &sampling)?;
        println!("{:?}", sampling.engine);
        println!("  F_ZZ = {}", r.f_zz);
        println!("  V_XX = {}", r.v_xx);
        println!("  V_YY = {}", r.v_yy);
        println!("  F    = {}", r.result.fidelity);
        for (basis, joint) in &r.joint {
            let cells: Vec<String> = joint.iter().flatten().map(|p| format!("{:.3}", p.value)).collect();
            println!("  {basis:?} joint [00 01 10 11] = {}", cells.join(" "));
        }
    }
    Ok(())
}
