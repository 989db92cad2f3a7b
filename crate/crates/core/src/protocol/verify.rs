use rand::Rng;

use super::{run_trials, spin_analyzer, CoincidenceRecord, Engine, ExperimentResult, NoiseModel, Sampling, Tally};
use crate::basis::Basis;
use crate::error::Result;
use crate::freq;
use crate::source;
use crate::spin;
use crate::state::ops::CMatrix;
use crate::state::{Dof, QuantumChannel};
use crate::stats::Estimate;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    /// `fidelity` is the composite entanglement fidelity.
    pub result: ExperimentResult,
    pub f_zz: Estimate,
    pub v_xx: Estimate,
    pub v_yy: Estimate,
    /// Per basis, `[photon outcome][spin bit]` probabilities.
    pub joint: Vec<(Basis, [[Estimate; 2]; 2])>,
}

/// `F = [F_ZZ + (V_XX + V_YY)/2]/2`, the fidelity to the ideal pair.
pub fn composite_fidelity(f_zz: Estimate, v_xx: Estimate, v_yy: Estimate) -> Estimate {
    let value = (f_zz.value + (v_xx.value + v_yy.value) / 2.0) / 2.0;
    let var = f_zz.stderr.powi(2) + (v_xx.stderr.powi(2) + v_yy.stderr.powi(2)) / 4.0;
    Estimate::new(value, var.sqrt() / 2.0)
}

/// Sign of the ideal pair's correlator: `⟨ZZ⟩ = ⟨YY⟩ = +1`, `⟨XX⟩ = −1`.
fn ideal_sign(basis: Basis) -> f64 {
    match basis {
        Basis::X => -1.0,
        _ => 1.0,
    }
}

pub fn run_entanglement_verification(noise: &NoiseModel, sampling: &Sampling) -> Result<VerificationResult> {
    noise.validate()?;
    sampling.validate()?;
    let (joint, tally, success) = match sampling.engine {
        Engine::Exact => (exact_joint(noise)?, Tally::default(), Estimate::exact(noise.loss.herald_probability()?)),
        Engine::MonteCarlo => {
            let tally = sample(noise, sampling)?;
            let joint = Basis::ALL
                .iter()
                .map(|&b| {
                    let n = tally.sum(|k| k.spin_basis == Some(b));
                    let mut p = [[Estimate::exact(0.0); 2]; 2];
                    for (f, row) in p.iter_mut().enumerate() {
                        for (s, cell) in row.iter_mut().enumerate() {
                            *cell = Estimate::binomial(tally.count(f as u8 + 1, s as u8, Some(b)), n);
                        }
                    }
                    (b, p)
                })
                .collect();
            let success = Estimate::binomial(tally.heralded, tally.trials);
            (joint, tally, success)
        }
    };
    let score = |basis: Basis| -> Estimate {
        let fraction = match sampling.engine {
            Engine::Exact => {
                let (_, p) = joint.iter().find(|(b, _)| *b == basis).expect("all bases");
                let agree = p[0][0].value + p[1][1].value;
                Estimate::exact(agree / (agree + p[0][1].value + p[1][0].value))
            }
            Engine::MonteCarlo => {
                let b = Some(basis);
                Estimate::binomial(tally.count(1, 0, b) + tally.count(2, 1, b), tally.sum(|k| k.spin_basis == b))
            }
        };
        let e = 2.0 * fraction.value - 1.0;
        Estimate::new(ideal_sign(basis) * e, 2.0 * fraction.stderr)
    };
    let zz = score(Basis::Z);
    let f_zz = Estimate::new((1.0 + zz.value) / 2.0, zz.stderr / 2.0);
    let v_xx = score(Basis::X);
    let v_yy = score(Basis::Y);
    Ok(VerificationResult {
        result: ExperimentResult {
            counts: tally,
            fidelity: composite_fidelity(f_zz, v_xx, v_yy),
            success_rate: success,
        },
        f_zz,
        v_xx,
        v_yy,
        joint,
    })
}

fn exact_joint(noise: &NoiseModel) -> Result<Vec<(Basis, [[Estimate; 2]; 2])>> {
    let pair = source::generate_entangled_pair(&noise.source)?;
    let stored = spin::evolve_ensemble(&pair, &noise.storage(), &noise.spin)?;
    Basis::ALL
        .iter()
        .map(|&b| {
            let rotated = stored.apply(&QuantumChannel::unitary(&[Dof::Spin], spin_analyzer(b, noise))?)?;
            let mut p = [[Estimate::exact(0.0); 2]; 2];
            for (f, row) in p.iter_mut().enumerate() {
                let branch = rotated.apply(&freq::outcome_projector(b, f as u8))?;
                let weight = branch.trace();
                let up = spin::readout_probability(&branch.partial_trace(&[Dof::Frequency])?, &noise.spin)?;
                *row = [Estimate::exact(weight * (1.0 - up)), Estimate::exact(weight * up)];
            }
            Ok((b, p))
        })
        .collect()
}

fn sample(noise: &NoiseModel, sampling: &Sampling) -> Result<Tally> {
    let herald = noise.loss.herald_probability()?;
    let storage = noise.storage();
    let analyzers: Vec<CMatrix> = Basis::ALL.iter().map(|&b| spin_analyzer(b, noise)).collect();
    run_trials(sampling, 0, |id, rng| {
        if herald < 1.0 && rng.random::<f64>() >= herald {
            return Ok(CoincidenceRecord::missed(id));
        }
        let k = (id % 3) as usize;
        let basis = Basis::ALL[k];
        let mut pair = source::sample_entangled_pair(&noise.source, rng)?;
        let detuning = spin::draw_detuning(&noise.spin, rng);
        spin::evolve_trajectory(&mut pair, &storage, &noise.spin, detuning, rng)?;
        let mut s0 = pair.contract(&[Dof::Frequency], &freq::outcome_vector(basis, 0))?;
        let f = if rng.random::<f64>() < s0.norm_sqr() / pair.norm_sqr() { 0 } else { 1 };
        let mut s = if f == 0 {
            s0.normalize()?;
            s0
        } else {
            let mut s1 = pair.contract(&[Dof::Frequency], &freq::outcome_vector(basis, 1))?;
            s1.normalize()?;
            s1
        };
        s.apply_op(&analyzers[k], &[Dof::Spin])?;
        let bit = spin::readout_pure(&s, &noise.spin, rng)?;
        Ok(CoincidenceRecord::heralded(id, f + 1, bit, Some(basis)))
    })
}
