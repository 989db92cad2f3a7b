use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{run_trials, spin_analyzer, CoincidenceRecord, Engine, NoiseModel, Sampling};
use crate::basis::Basis;
use crate::error::Result;
use crate::freq::{self, EomSettings};
use crate::source;
use crate::spin::{self, PulseSequence, SpinParams, QUADRATURE_PHASES};
use crate::state::ops::CMatrix;
use crate::state::{Dof, PureState, QuantumChannel};
use crate::stats::{self, Estimate, SinusoidFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Echo,
    Ramsey,
}

impl SweepKind {
    fn sequence(self, span_ns: f64, phase: f64) -> PulseSequence {
        match self {
            SweepKind::Echo => PulseSequence::echo(span_ns, phase),
            SweepKind::Ramsey => PulseSequence::ramsey(span_ns, phase),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub kind: SweepKind,
    /// `(span_ns, visibility)`.
    pub points: Vec<(f64, Estimate)>,
    /// T2 in μs for echo, T2* in ns for Ramsey.
    pub fit: Result<Estimate>,
}

/// Fringe amplitude versus sequence span, from the four-phase estimator.
pub fn run_spin_sweep(kind: SweepKind, spans_ns: &[f64], p: &SpinParams, sampling: &Sampling) -> Result<SweepResult> {
    p.validate()?;
    sampling.validate()?;
    let mut points = Vec::with_capacity(spans_ns.len());
    for (i, &span) in spans_ns.iter().enumerate() {
        let v = match sampling.engine {
            Engine::Exact => Estimate::exact(spin::exact_visibility(|ph| kind.sequence(span, ph), p)?),
            Engine::MonteCarlo => {
                let seqs: Vec<PulseSequence> = QUADRATURE_PHASES.iter().map(|&ph| kind.sequence(span, ph)).collect();
                let tally = run_trials(sampling, i as u64 * sampling.trials, |id, rng| {
                    let k = (id % 4) as usize;
                    let mut s = PureState::basis(Dof::Spin, 0);
                    let d = spin::draw_detuning(p, rng);
                    spin::evolve_trajectory(&mut s, &seqs[k], p, d, rng)?;
                    let bit = spin::readout_pure(&s, p, rng)?;
                    Ok(CoincidenceRecord::heralded(id, k as u8 + 1, bit, Some(Basis::Z)))
                })?;
                let probs = [1u8, 2, 3, 4].map(|det| {
                    let n = tally.sum(|k| k.detector == det);
                    Estimate::binomial(tally.count(det, 1, Some(Basis::Z)), n)
                });
                stats::quadrature_visibility(probs)
            }
        };
        points.push((span, v));
    }
    let (t, v, se): (Vec<f64>, Vec<f64>, Vec<f64>) = {
        let mut t = Vec::new();
        let mut v = Vec::new();
        let mut se = Vec::new();
        for (x, e) in &points {
            t.push(*x);
            v.push(e.value);
            se.push(e.stderr);
        }
        (t, v, se)
    };
    let fit = match kind {
        SweepKind::Echo => {
            stats::fit_exponential_decay(&t, &v, &se).map(|e| Estimate::new(e.value / 1e3, e.stderr / 1e3))
        }
        SweepKind::Ramsey => stats::fit_gaussian_decay(&t, &v, &se),
    };
    Ok(SweepResult { kind, points, fit })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub rf_phase_rad: f64,
    pub theta_rad: f64,
    pub trials: u64,
    pub coincidences: u64,
    /// Coincidence probability per trial.
    pub probability: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeResult {
    pub points: Vec<FringePoint>,
    pub fit: SinusoidFit,
    /// Coherence `2|ρ_rb|/(ρ_rr + ρ_bb)` of the photon state heralded by a
    /// spin-X outcome `0`.
    pub analytic_visibility: f64,
    pub efficiency: f64,
}

/// Coincidences of spin-X outcome `0` with a photon click behind the
/// modulator projector, swept over the RF phase.
pub fn run_fringe(noise: &NoiseModel, rf_phases: &[f64], sampling: &Sampling) -> Result<FringeResult> {
    noise.validate()?;
    sampling.validate()?;
    let analyzer = spin_analyzer(Basis::X, noise);
    let heralded = heralded_photon(noise, &analyzer)?;
    let analytic_visibility = 2.0 * heralded[(0, 1)].norm() / (heralded[(0, 0)].re + heralded[(1, 1)].re);
    let mut points = Vec::with_capacity(rf_phases.len());
    let mut efficiency = 0.0;
    for (i, &phi) in rf_phases.iter().enumerate() {
        let eom = EomSettings { rf_phase_rad: phi, ..noise.eom.clone() };
        let (_, eff) = freq::frequency_projector(&eom)?;
        efficiency = eff;
        let v = freq::superposition_vector(eom.theta());
        let point = match sampling.engine {
            Engine::Exact => {
                let v = nalgebra::DVector::from_row_slice(&v);
                let p = eff * (v.adjoint() * &heralded * &v)[(0, 0)].re;
                FringePoint {
                    rf_phase_rad: phi,
                    theta_rad: eom.theta(),
                    trials: 0,
                    coincidences: 0,
                    probability: Estimate::exact(p),
                }
            }
            Engine::MonteCarlo => {
                let storage = noise.storage();
                let tally = run_trials(sampling, i as u64 * sampling.trials, |id, rng| {
                    let mut pair = source::sample_entangled_pair(&noise.source, rng)?;
                    let d = spin::draw_detuning(&noise.spin, rng);
                    spin::evolve_trajectory(&mut pair, &storage, &noise.spin, d, rng)?;
                    let mut s = pair.contract(&[Dof::Frequency], &v)?;
                    if rng.random::<f64>() >= eff * s.norm_sqr() / pair.norm_sqr() {
                        return Ok(CoincidenceRecord::missed(id));
                    }
                    s.normalize()?;
                    s.apply_op(&analyzer, &[Dof::Spin])?;
                    let bit = spin::readout_pure(&s, &noise.spin, rng)?;
                    Ok(CoincidenceRecord::heralded(id, 1, bit, Some(Basis::X)))
                })?;
                let hits = tally.count(1, 0, Some(Basis::X));
                FringePoint {
                    rf_phase_rad: phi,
                    theta_rad: eom.theta(),
                    trials: tally.trials,
                    coincidences: hits,
                    probability: Estimate::binomial(hits, tally.trials),
                }
            }
        };
        points.push(point);
    }
    let theta: Vec<f64> = points.iter().map(|p| p.theta_rad).collect();
    let y: Vec<f64> = points.iter().map(|p| p.probability.value).collect();
    let se: Vec<f64> = points.iter().map(|p| p.probability.stderr).collect();
    let fit = stats::fit_sinusoid(&theta, &y, &se)?;
    Ok(FringeResult { points, fit, analytic_visibility, efficiency })
}

/// Unnormalized frequency state accompanying a spin-X readout of `0`,
/// readout errors included.
fn heralded_photon(noise: &NoiseModel, analyzer: &CMatrix) -> Result<CMatrix> {
    let pair = source::generate_entangled_pair(&noise.source)?;
    let stored = spin::evolve_ensemble(&pair, &noise.storage(), &noise.spin)?;
    let m = stored.apply(&QuantumChannel::unitary(&[Dof::Spin], analyzer.clone())?)?.matrix().clone();
    let r = noise.spin.readout_fidelity;
    Ok(CMatrix::from_fn(2, 2, |f, g| m[(f, g)] * r + m[(2 + f, 2 + g)] * (1.0 - r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn exact_fringe_fit_matches_coherence() {
        let phases: Vec<f64> = (0..24).map(|i| i as f64 * TAU / 24.0).collect();
        for noise in [NoiseModel::ideal(), NoiseModel::calibrated()] {
            let r = run_fringe(&noise, &phases, &Sampling::exact()).unwrap();
            assert!((r.fit.visibility.value - r.analytic_visibility).abs() < 1e-10);
        }
        let r = run_fringe(&NoiseModel::ideal(), &phases, &Sampling::exact()).unwrap();
        assert!((r.analytic_visibility - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_sweeps_recover_constants() {
        let p = SpinParams::default();
        let spans: Vec<f64> = (0..7).map(|i| 38.0 + 900.0 * i as f64).collect();
        let echo = run_spin_sweep(SweepKind::Echo, &spans, &p, &Sampling::exact()).unwrap();
        assert!((echo.fit.unwrap().value - 2.7).abs() < 1e-9);
        let delays: Vec<f64> = (0..10).map(|i| 0.3 * i as f64).collect();
        let ramsey = run_spin_sweep(SweepKind::Ramsey, &delays, &p, &Sampling::exact()).unwrap();
        // the Ramsey fit also sees the small T2 envelope
        assert!((ramsey.fit.unwrap().value - 1.7).abs() < 1e-3);
    }
}
