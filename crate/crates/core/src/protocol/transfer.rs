use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    ghz_projectors, run_trials, CoincidenceRecord, Engine, ExperimentResult, GhzOutcome, NoiseModel, Sampling, Tally,
    PHOTON,
};
use crate::basis::Basis;
use crate::error::Result;
use crate::optics::{self, TargetState};
use crate::source::{self, SourceParams};
use crate::spin::{self, PulseSequence};
use crate::state::ops::{mat2, CMatrix};
use crate::state::{Dof, LabeledState, PureState, QuantumChannel};
use crate::stats::Estimate;

/// How the outcome-dependent Pauli correction is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionRoute {
    /// On the measurement record when the correction only relabels the
    /// outcome (Pauli-axis targets); otherwise on the state in software.
    #[default]
    PostProcess,
    /// As a unitary on the spin before readout.
    Operator,
    /// Not applied.
    Omitted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeStats {
    pub outcome: GhzOutcome,
    /// Share of heralded events.
    pub probability: Estimate,
    pub fidelity: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub target: TargetState,
    pub result: ExperimentResult,
    pub per_outcome: Vec<OutcomeStats>,
}

/// Pauli basis the target is an eigenstate of, if any.
pub fn axis_basis(target: &TargetState) -> Option<Basis> {
    let v = target.bloch_vector();
    [Basis::X, Basis::Y, Basis::Z].into_iter().zip(v).find(|(_, x)| (x.abs() - 1.0).abs() < 1e-12).map(|(b, _)| b)
}

/// Rotation taking the target spin state to `|↓⟩` and its orthogonal
/// complement to `|↑⟩`.
fn target_measurement(target: &TargetState) -> CMatrix {
    let (a, b) = (target.alpha, target.beta);
    mat2(a.conj(), b.conj(), -b, a)
}

fn post_rotation(target: &TargetState, noise: &NoiseModel, correction: Option<&CMatrix>) -> CMatrix {
    let frame = noise.storage_frame().adjoint();
    let v = target_measurement(target);
    match correction {
        Some(p) => v * p * frame,
        None => v * frame,
    }
}

pub fn run_transfer(target: &TargetState, noise: &NoiseModel, sampling: &Sampling) -> Result<TransferResult> {
    run_transfer_with(target, noise, sampling, CorrectionRoute::default())
}

pub fn run_transfer_with(
    target: &TargetState,
    noise: &NoiseModel,
    sampling: &Sampling,
    route: CorrectionRoute,
) -> Result<TransferResult> {
    noise.validate()?;
    sampling.validate()?;
    match sampling.engine {
        Engine::Exact => exact(target, noise, route),
        Engine::MonteCarlo => monte_carlo(target, noise, sampling, route),
    }
}

/// Averaged state of all four labels right before the GHZ analyzer, with
/// the spin stored through the flight interval.
fn analyzed_density(target: &TargetState, noise: &NoiseModel) -> Result<LabeledState> {
    let pair = source::generate_entangled_pair(&noise.source)?;
    let photon = optics::correlate_dofs(&pair, &noise.optics.etalons)?.normalized()?;
    let encoded = optics::encode_target(&photon, target)?.apply(&noise.optics.analyzer_channel())?;
    spin::evolve_ensemble(&encoded, &noise.storage(), &noise.spin)
}

fn exact(target: &TargetState, noise: &NoiseModel, route: CorrectionRoute) -> Result<TransferResult> {
    let rho = analyzed_density(target, noise)?;
    let mut rows = Vec::new();
    for (outcome, proj) in ghz_projectors() {
        let spin_state = rho.apply(&proj)?.partial_trace(&PHOTON)?;
        let p = spin_state.trace();
        let corr = outcome.correction().matrix();
        let op = post_rotation(target, noise, (route != CorrectionRoute::Omitted).then_some(&corr));
        let measured = spin_state.normalized()?.apply(&QuantumChannel::unitary(&[Dof::Spin], op)?)?;
        rows.push((outcome, p, 1.0 - spin::readout_probability(&measured, &noise.spin)?));
    }
    let total: f64 = rows.iter().map(|r| r.1).sum();
    let fidelity = rows.iter().map(|r| r.1 * r.2).sum::<f64>() / total;
    let per_outcome = rows
        .iter()
        .map(|&(outcome, p, f)| OutcomeStats {
            outcome,
            probability: Estimate::exact(p / total),
            fidelity: Estimate::exact(f),
        })
        .collect();
    Ok(TransferResult {
        target: *target,
        result: ExperimentResult {
            counts: Tally::default(),
            fidelity: Estimate::exact(fidelity),
            success_rate: Estimate::exact(total * noise.loss.herald_probability()?),
        },
        per_outcome,
    })
}

struct TrialContext<'a> {
    noise: &'a NoiseModel,
    target: &'a TargetState,
    herald: f64,
    analyzer: QuantumChannel,
    storage: PulseSequence,
    axis: Option<Basis>,
    /// Per outcome: post-readout rotation and whether the record is flipped.
    readout: Vec<(CMatrix, bool)>,
}

impl<'a> TrialContext<'a> {
    fn new(target: &'a TargetState, noise: &'a NoiseModel, route: CorrectionRoute) -> Result<Self> {
        let axis = axis_basis(target);
        let readout = GhzOutcome::ALL
            .iter()
            .map(|o| {
                let corr = o.correction();
                match (route, axis) {
                    (CorrectionRoute::PostProcess, Some(b)) => (post_rotation(target, noise, None), corr.flips(b)),
                    (CorrectionRoute::Omitted, _) => (post_rotation(target, noise, None), false),
                    _ => (post_rotation(target, noise, Some(&corr.matrix())), false),
                }
            })
            .collect();
        Ok(Self {
            noise,
            target,
            herald: noise.loss.herald_probability()?,
            analyzer: noise.optics.analyzer_channel(),
            storage: noise.storage(),
            axis,
            readout,
        })
    }

    fn trial(&self, id: u64, rng: &mut ChaCha8Rng) -> Result<CoincidenceRecord> {
        let noise = self.noise;
        if self.herald < 1.0 && rng.random::<f64>() >= self.herald {
            return Ok(CoincidenceRecord::missed(id));
        }
        let pair = source::sample_entangled_pair(&noise.source, rng)?;
        let (photon, _) = optics::correlate_dofs_pure(&pair, &noise.optics.etalons)?;
        let mut psi = optics::encode_target_pure(&photon, self.target)?;
        psi.sample_channel(&self.analyzer, rng)?;
        let Some((k, mut spin_state)) = sample_ghz(&psi, rng)? else {
            return Ok(CoincidenceRecord::missed(id));
        };
        let detuning = spin::draw_detuning(&noise.spin, rng);
        spin::evolve_trajectory(&mut spin_state, &self.storage, &noise.spin, detuning, rng)?;
        let (op, flip) = &self.readout[k];
        spin_state.apply_op(op, &[Dof::Spin])?;
        let bit = spin::readout_pure(&spin_state, &noise.spin, rng)? ^ u8::from(*flip);
        Ok(CoincidenceRecord::heralded(id, GhzOutcome::ALL[k].detector(), bit, self.axis))
    }
}

/// Samples a GHZ outcome; `None` is a no-click event.
fn sample_ghz(psi: &PureState, rng: &mut ChaCha8Rng) -> Result<Option<(usize, PureState)>> {
    let norm = psi.norm_sqr();
    let mut u = rng.random::<f64>();
    for (k, o) in GhzOutcome::ALL.iter().enumerate() {
        let mut branch = psi.contract(&PHOTON, &o.vector())?;
        let w = branch.norm_sqr() / norm;
        if u < w {
            branch.normalize()?;
            return Ok(Some((k, branch)));
        }
        u -= w;
    }
    Ok(None)
}

fn monte_carlo(
    target: &TargetState,
    noise: &NoiseModel,
    sampling: &Sampling,
    route: CorrectionRoute,
) -> Result<TransferResult> {
    let ctx = TrialContext::new(target, noise, route)?;
    let tally = run_trials(sampling, 0, |id, rng| ctx.trial(id, rng))?;
    let per_outcome = GhzOutcome::ALL
        .iter()
        .map(|o| {
            let d = o.detector();
            let n = tally.sum(|k| k.detector == d);
            let good = tally.sum(|k| k.detector == d && k.spin_bit == 0);
            OutcomeStats {
                outcome: *o,
                probability: Estimate::binomial(n, tally.heralded),
                fidelity: Estimate::binomial(good, n),
            }
        })
        .collect();
    let good = tally.sum(|k| k.spin_bit == 0);
    Ok(TransferResult {
        target: *target,
        result: ExperimentResult {
            fidelity: Estimate::binomial(good, tally.heralded),
            success_rate: Estimate::binomial(tally.heralded, tally.trials),
            counts: tally,
        },
        per_outcome,
    })
}

/// Entanglement-free comparison lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalBaseline {
    /// Photon measured in a single basis chosen to herald the target; the
    /// other outcome leaves the orthogonal state and counts as a failure.
    pub measure_prepare: ExperimentResult,
    /// Spin prepared in a random state, ignoring the photon.
    pub random_guess: Estimate,
    /// Largest spin-photon fidelity reachable by separable states.
    pub entanglement_bound: f64,
}

pub fn classical_baseline(target: &TargetState, sampling: &Sampling) -> Result<ClassicalBaseline> {
    sampling.validate()?;
    // ⟨φ|_freq of the ideal pair leaves α|↓⟩ + β|↑⟩ on the spin
    let herald = [target.alpha.conj(), -target.beta.conj()];
    let measure = target_measurement(target);
    let pair = source::ideal_pair();
    match sampling.engine {
        Engine::Exact => {
            let mut s = pair.contract(&[Dof::Frequency], &herald)?;
            let p = s.norm_sqr();
            s.normalize()?;
            s.apply_op(&measure, &[Dof::Spin])?;
            Ok(ClassicalBaseline {
                measure_prepare: ExperimentResult {
                    counts: Tally::default(),
                    fidelity: Estimate::exact(1.0 - s.probability_one(Dof::Spin)?),
                    success_rate: Estimate::exact(p),
                },
                random_guess: Estimate::exact(0.5),
                entanglement_bound: 0.5,
            })
        }
        Engine::MonteCarlo => {
            let perfect = crate::spin::SpinParams::noiseless();
            let tally = run_trials(sampling, 0, |id, rng| {
                let psi = source::sample_entangled_pair(&SourceParams::default(), rng)?;
                let mut s = psi.contract(&[Dof::Frequency], &herald)?;
                if rng.random::<f64>() >= s.norm_sqr() / psi.norm_sqr() {
                    return Ok(CoincidenceRecord::missed(id));
                }
                s.normalize()?;
                s.apply_op(&measure, &[Dof::Spin])?;
                let bit = spin::readout_pure(&s, &perfect, rng)?;
                Ok(CoincidenceRecord::heralded(id, 1, bit, axis_basis(target)))
            })?;
            let guesses = run_trials(sampling, sampling.trials, |id, rng| {
                let mut guess = TargetState::random(rng).spin();
                guess.apply_op(&measure, &[Dof::Spin])?;
                let bit = spin::readout_pure(&guess, &perfect, rng)?;
                Ok(CoincidenceRecord::heralded(id, 1, bit, None))
            })?;
            let good = tally.sum(|k| k.spin_bit == 0);
            Ok(ClassicalBaseline {
                measure_prepare: ExperimentResult {
                    fidelity: Estimate::binomial(good, tally.heralded),
                    success_rate: Estimate::binomial(tally.heralded, tally.trials),
                    counts: tally,
                },
                random_guess: Estimate::binomial(guesses.sum(|k| k.spin_bit == 0), guesses.trials),
                entanglement_bound: 0.5,
            })
        }
    }
}
