//! Per-stage detection budget under both readings of the quoted
//! percentages, and its effect on heralded transfer.

use qdtransfer::optics::TargetState;
use qdtransfer::protocol::{run_transfer, LossModel, LossReading, NoiseModel, Sampling};

fn main() -> qdtransfer::Result<()> {
    for reading in [LossReading::Efficiency, LossReading::Loss] {
        let loss = LossModel { reading, ..LossModel::default() };
        println!("{reading:?} reading");
        for (name, eff) in loss.efficiencies() {
            println!("  {name:<28} {eff:.2}");
        }
        println!("  overall                      {:.4e}", loss.overall()?);
    }

    let sampling = Sampling::monte_carlo(20_000, 4);
    let lossless = NoiseModel { loss: LossModel::none(), ..NoiseModel::calibrated() };
    let mut lossy = NoiseModel::calibrated();
    lossy.loss.apply_to_trials = true;
    for (name, noise) in [("lossless", lossless), ("with budget", lossy)] {
        let r = run_transfer(&TargetState::d_plus(), &noise, &sampling)?;
        println!(
            "{name:<12} heralds {:>6}  F = {}  rate = {}",
            r.result.counts.heralded, r.result.fidelity, r.result.success_rate
        );
    }
    Ok(())
}
