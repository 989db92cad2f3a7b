//! Coincidence fringe against the modulator RF phase.

use std::f64::consts::TAU;

use qdtransfer::protocol::{run_fringe, NoiseModel, Sampling};

fn main() -> qdtransfer::Result<()> {
    let phases: Vec<f64> = (0..24).map(|i| f64::from(i) * TAU / 24.0).collect();
    let r = run_fringe(&NoiseModel::calibrated(), &phases, &Sampling::monte_carlo(50_000, 8))?;
    for p in &r.points {
        let bar = "#".repeat((p.probability.value * 400.0) as usize);
        println!("{:5.3} rad  {:>5}  {bar}", p.rf_phase_rad, p.coincidences);
    }
    println!("visibility {} (expected {:.4})", r.fit.visibility, r.analytic_visibility);
    Ok(())
}
