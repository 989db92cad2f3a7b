//! Fits the unquoted error parameters to the published correlations and
//! transfer fidelities, then reports what the fitted model reproduces.

use qdtransfer::protocol::{calibrate, CalibrationTargets, NoiseModel};

fn main() -> qdtransfer::Result<()> {
    let targets = CalibrationTargets::default();
    let (noise, cal) = calibrate(&NoiseModel::device(), &targets)?;
    println!("re-excitation weight     {:.6}", cal.reexcitation_weight);
    println!("initialization error     {:.6}", cal.init_error);
    println!("readout fidelity         {:.6}", cal.readout_fidelity);
    println!("unrefocused interval     {:.6} ns", cal.unrefocused_ns);
    println!("analyzer depolarization  {:.6}", cal.analyzer_depolarization);
    println!();
    println!("F_ZZ  {:.4}  (target {:.3})", cal.f_zz, targets.f_zz);
    println!("F     {:.4}", cal.fidelity);
    for (name, (got, want)) in ["H", "D+", "sigma+"].iter().zip(cal.transfer.iter().zip(targets.transfer)) {
        println!("transfer {name:<7} {got:.4}  (published {want:.3})");
    }
    println!();
    println!("{}", toml::to_string(&noise).expect("serializable"));
    Ok(())
}
