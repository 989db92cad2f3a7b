//! Transfers the three axis states and a random polarization onto the spin,
//! with per-outcome statistics and the classical comparison line.

use qdtransfer::optics::TargetState;
use qdtransfer::protocol::{classical_baseline, run_transfer, NoiseModel, Sampling};
use rand::SeedableRng;

fn main() -> qdtransfer::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let targets = [
        ("H", TargetState::h()),
        ("D+", TargetState::d_plus()),
        ("sigma+", TargetState::sigma_plus()),
        ("random", TargetState::random(&mut rng)),
    ];
    let noise = NoiseModel::calibrated();
    let sampling = Sampling::monte_carlo(100_000, 11);
    for (name, t) in &targets {
        let r = run_transfer(t, &noise, &sampling)?;
        println!("{name:<7} F = {}  success = {}", r.result.fidelity, r.result.success_rate);
        for o in &r.per_outcome {
            println!(
                "    detector {} ({:<4}) p = {}  F = {}  correction {}",
                o.outcome.detector(),
                o.outcome.name(),
                o.probability,
                o.fidelity,
                o.outcome.correction().name()
            );
        }
    }

    let ideal = run_transfer(&targets[3].1, &NoiseModel::ideal(), &Sampling::exact())?;
    println!("noiseless random target: F = {}", ideal.result.fidelity);

    let base = classical_baseline(&TargetState::h(), &sampling)?;
    println!(
        "measure-and-prepare: success {}  fidelity {}; random guess {}; bound {}",
        base.measure_prepare.success_rate, base.measure_prepare.fidelity, base.random_guess, base.entanglement_bound
    );
    Ok(())
}
