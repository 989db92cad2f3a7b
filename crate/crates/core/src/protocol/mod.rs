//! End-to-end orchestration: GHZ-type projection, Pauli feedback,
//! entanglement verification, state transfer and coincidence statistics.

mod calibration;
mod coherence;
mod transfer;
mod verify;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::freq::EomSettings;
use crate::optics::{self, OpticsParams, TargetState};
use crate::source::{self, ReexcitationModel, SourceParams};
use crate::spin::{PulseSequence, SpinParams};
use crate::state::ops::{self, c, CMatrix, ZERO};
use crate::state::{Dof, QuantumChannel};
use crate::stats::Estimate;

pub use calibration::{axis_targets, calibrate, Calibration, CalibrationTargets};
pub use coherence::{run_fringe, run_spin_sweep, FringePoint, FringeResult, SweepKind, SweepResult};
pub use transfer::{
    classical_baseline, run_transfer, run_transfer_with, ClassicalBaseline, CorrectionRoute, OutcomeStats,
    TransferResult,
};
pub use verify::{composite_fidelity, run_entanglement_verification, VerificationResult};

/// Photon labels analyzed by the GHZ projection, in canonical order.
pub const PHOTON: [Dof; 3] = [Dof::Frequency, Dof::Polarization, Dof::Path];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GhzOutcome {
    XiPlus,
    XiMinus,
    ChiPlus,
    ChiMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Correction {
    Sz,
    Identity,
    Sy,
    Sx,
}

impl Correction {
    pub fn matrix(self) -> CMatrix {
        match self {
            Correction::Sz => ops::pauli_z(),
            Correction::Identity => ops::identity(2),
            Correction::Sy => ops::pauli_y(),
            Correction::Sx => ops::pauli_x(),
        }
    }

    /// Whether the correction anticommutes with the Pauli of `basis`, i.e.
    /// flips that basis' measurement record.
    pub fn flips(self, basis: Basis) -> bool {
        !matches!(
            (self, basis),
            (Correction::Identity, _)
                | (Correction::Sz, Basis::Z)
                | (Correction::Sx, Basis::X)
                | (Correction::Sy, Basis::Y)
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::Sz => "sz",
            Correction::Identity => "i",
            Correction::Sy => "sy",
            Correction::Sx => "sx",
        }
    }
}

impl GhzOutcome {
    pub const ALL: [GhzOutcome; 4] =
        [GhzOutcome::XiPlus, GhzOutcome::XiMinus, GhzOutcome::ChiPlus, GhzOutcome::ChiMinus];

    pub fn detector(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_detector(detector: u8) -> Option<Self> {
        Self::ALL.get(usize::from(detector).wrapping_sub(1)).copied()
    }

    pub fn correction(self) -> Correction {
        match self {
            GhzOutcome::XiPlus => Correction::Sz,
            GhzOutcome::XiMinus => Correction::Identity,
            GhzOutcome::ChiPlus => Correction::Sy,
            GhzOutcome::ChiMinus => Correction::Sx,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GhzOutcome::XiPlus => "xi+",
            GhzOutcome::XiMinus => "xi-",
            GhzOutcome::ChiPlus => "chi+",
            GhzOutcome::ChiMinus => "chi-",
        }
    }

    /// `|ξ±⟩ = (|ω_red H T⟩ ± |ω_blue V R⟩)/√2`,
    /// `|χ±⟩ = (|ω_blue H R⟩ ± |ω_red V T⟩)/√2`, over [`PHOTON`].
    pub fn vector(self) -> [Complex64; 8] {
        let (a, b, sign) = match self {
            GhzOutcome::XiPlus => (0b000, 0b111, 1.0),
            GhzOutcome::XiMinus => (0b000, 0b111, -1.0),
            GhzOutcome::ChiPlus => (0b101, 0b010, 1.0),
            GhzOutcome::ChiMinus => (0b101, 0b010, -1.0),
        };
        let mut v = [ZERO; 8];
        v[a] = c(FRAC_1_SQRT_2, 0.0);
        v[b] = c(sign * FRAC_1_SQRT_2, 0.0);
        v
    }

    /// Operator `A_k` with `|Φ⟩ = Σ_k |k⟩ ⊗ A_k|ψ⟩_s`: `σ_z/2, I/2, iσ_y/2,
    /// −σ_x/2`.
    pub fn expansion_operator(self) -> CMatrix {
        let half = c(0.5, 0.0);
        match self {
            GhzOutcome::XiPlus => ops::pauli_z() * half,
            GhzOutcome::XiMinus => ops::identity(2) * half,
            GhzOutcome::ChiPlus => ops::pauli_y() * c(0.0, 0.5),
            GhzOutcome::ChiMinus => ops::pauli_x() * (-half),
        }
    }
}

/// Rank-one projectors onto the four GHZ-type states.
pub fn ghz_projectors() -> Vec<(GhzOutcome, QuantumChannel)> {
    GhzOutcome::ALL
        .iter()
        .map(|&o| (o, QuantumChannel::projector_onto(&PHOTON, &o.vector()).expect("unit vector")))
        .collect()
}

/// The two complementary GHZ pairs, `(|ω_red H R⟩ ± |ω_blue V T⟩)/√2` and
/// `(|ω_blue H T⟩ ± |ω_red V R⟩)/√2`; none of them produces a click.
pub fn complementary_projectors() -> Vec<QuantumChannel> {
    [(0b001, 0b110), (0b100, 0b011)]
        .iter()
        .flat_map(|&(a, b)| {
            [1.0, -1.0].map(move |sign| {
                let mut v = [ZERO; 8];
                v[a] = c(FRAC_1_SQRT_2, 0.0);
                v[b] = c(sign * FRAC_1_SQRT_2, 0.0);
                QuantumChannel::projector_onto(&PHOTON, &v).expect("unit vector")
            })
        })
        .collect()
}

/// Detector operator of the physical analyzer: the PBS sends `ξ` to port
/// A and `χ` to port B (port bit = polarization ⊕ path), then the
/// polarization-frequency parity in the `±` bases picks the sign.
pub fn detector_operator(detector: u8) -> Result<CMatrix> {
    let outcome = GhzOutcome::from_detector(detector)
        .ok_or_else(|| Error::InvalidParameter(format!("detector {detector} not in 1..=4")))?;
    let port = u8::from(matches!(outcome, GhzOutcome::ChiPlus | GhzOutcome::ChiMinus));
    let sign = if matches!(outcome, GhzOutcome::XiPlus | GhzOutcome::ChiPlus) { 1.0 } else { -1.0 };
    // recombination: (pol, path) -> (pol, port)
    let recombine = CMatrix::from_fn(8, 8, |i, j| {
        let (f, p, path) = (j >> 2, (j >> 1) & 1, j & 1);
        if i == (f << 2 | p << 1 | (p ^ path)) {
            ops::ONE
        } else {
            ZERO
        }
    });
    let port_proj = ops::projector(&Basis::Z.vector(port));
    let parity = (ops::identity(4) + ops::kron(&ops::pauli_x(), &ops::pauli_x()) * c(sign, 0.0)) * c(0.5, 0.0);
    let analyzed = ops::kron(&parity, &port_proj);
    Ok(recombine.adjoint() * analyzed * recombine)
}

/// Expansion `⟨k|Φ⟩` of the ideal composite state for each outcome: the
/// unnormalized spin vector left behind.
pub fn ghz_expansion(target: &TargetState) -> Result<Vec<(GhzOutcome, [Complex64; 2])>> {
    let phi = ideal_composite(target)?;
    GhzOutcome::ALL
        .iter()
        .map(|&o| {
            let s = phi.contract(&PHOTON, &o.vector())?;
            Ok((o, [s.amplitudes()[0], s.amplitudes()[1]]))
        })
        .collect()
}

/// `|Φ⟩` built by the optical pipeline from the noiseless pair.
pub fn ideal_composite(target: &TargetState) -> Result<crate::state::PureState> {
    let (psi, _) = optics::correlate_dofs_pure(&source::ideal_pair(), &Default::default())?;
    optics::encode_target_pure(&psi, target)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    #[serde(alias = "mc")]
    MonteCarlo,
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Engine::Exact),
            "mc" | "montecarlo" => Ok(Engine::MonteCarlo),
            other => Err(Error::InvalidParameter(format!("unknown engine `{other}`"))),
        }
    }
}

/// Trial count, master seed and engine of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub trials: u64,
    pub seed: u64,
    pub engine: Engine,
}

impl Sampling {
    pub fn exact() -> Self {
        Self { trials: 1, seed: 0, engine: Engine::Exact }
    }

    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        Self { trials, seed, engine: Engine::MonteCarlo }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Independent random stream of one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Timing {
    /// Precession before the echo that the π pulse does not refocus.
    pub unrefocused_ns: f64,
    pub storage_half_span_ns: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { unrefocused_ns: 0.0, storage_half_span_ns: 19.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossReading {
    /// Stage values are transmissions.
    Efficiency,
    /// Stage values are the fraction lost.
    Loss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossStage {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossModel {
    pub stages: Vec<LossStage>,
    pub reading: LossReading,
    /// Whether trials are heralded with the overall efficiency.
    pub apply_to_trials: bool,
}

impl Default for LossModel {
    fn default() -> Self {
        let stages = [
            ("extraction", 0.08),
            ("detection", 0.20),
            ("fiber_coupling", 0.40),
            ("cross_polarization", 0.50),
            ("waveplates_mirrors", 0.36),
            ("eom_frequency_selection", 0.30),
        ];
        Self {
            stages: stages.iter().map(|&(name, value)| LossStage { name: name.into(), value }).collect(),
            reading: LossReading::Efficiency,
            apply_to_trials: false,
        }
    }
}

impl LossModel {
    pub fn none() -> Self {
        Self { stages: Vec::new(), ..Self::default() }
    }

    /// `(name, efficiency)` per stage under the configured reading.
    pub fn efficiencies(&self) -> Vec<(String, f64)> {
        self.stages
            .iter()
            .map(|s| {
                let eff = match self.reading {
                    LossReading::Efficiency => s.value,
                    LossReading::Loss => 1.0 - s.value,
                };
                (s.name.clone(), eff)
            })
            .collect()
    }

    pub fn overall(&self) -> Result<f64> {
        loss_budget(&self.efficiencies())
    }

    /// Herald probability applied to each trial.
    pub fn herald_probability(&self) -> Result<f64> {
        if self.apply_to_trials {
            self.overall()
        } else {
            Ok(1.0)
        }
    }
}

/// Product of stage efficiencies.
pub fn loss_budget(stages: &[(String, f64)]) -> Result<f64> {
    stages.iter().try_fold(1.0, |acc, (name, eff)| {
        if *eff > 0.0 && *eff <= 1.0 {
            Ok(acc * eff)
        } else {
            Err(Error::InvalidEfficiency { name: name.clone(), value: *eff })
        }
    })
}

/// Every noise and apparatus parameter of the pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub source: SourceParams,
    pub spin: SpinParams,
    pub optics: OpticsParams,
    pub eom: EomSettings,
    pub timing: Timing,
    pub loss: LossModel,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::device()
    }
}

impl NoiseModel {
    /// All noise off, perfect pulses and readout.
    pub fn ideal() -> Self {
        Self {
            source: SourceParams::default(),
            spin: SpinParams::noiseless(),
            optics: OpticsParams::default(),
            eom: EomSettings::default(),
            timing: Timing::default(),
            loss: LossModel::default(),
        }
    }

    /// Quoted device values only: T2*, T2 and the re-excitation penalty.
    pub fn device() -> Self {
        Self {
            source: SourceParams {
                reexcitation_weight: ReexcitationModel::FrequencyDephasing.weight_for_penalty(0.068),
                ..SourceParams::default()
            },
            spin: SpinParams::default(),
            ..Self::ideal()
        }
    }

    /// [`NoiseModel::device`] with the remaining error parameters fitted to
    /// the published correlations and fidelities; computed once.
    pub fn calibrated() -> Self {
        static CACHE: std::sync::OnceLock<NoiseModel> = std::sync::OnceLock::new();
        CACHE
            .get_or_init(|| {
                calibrate(&NoiseModel::device(), &CalibrationTargets::default()).expect("calibration converges").0
            })
            .clone()
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.spin.validate()?;
        self.optics.validate()?;
        self.eom.validate()?;
        if !(self.timing.unrefocused_ns >= 0.0) || !(self.timing.storage_half_span_ns >= 0.0) {
            return Err(Error::InvalidParameter("storage timing must be non-negative".into()));
        }
        self.loss.overall()?;
        Ok(())
    }

    /// Spin storage during photon flight.
    pub fn storage(&self) -> PulseSequence {
        PulseSequence::storage(self.timing.unrefocused_ns, self.timing.storage_half_span_ns)
    }

    /// Known frame of the storage sequence, undone in post-processing.
    pub fn storage_frame(&self) -> CMatrix {
        self.storage().ideal_unitary(self.spin.larmor_freq_ghz)
    }
}

/// Undoes the storage frame and maps the basis onto `|↓⟩, |↑⟩`.
pub(crate) fn spin_analyzer(basis: Basis, noise: &NoiseModel) -> CMatrix {
    let [a0, a1] = basis.vector(0);
    let [b0, b1] = basis.vector(1);
    ops::mat2(a0.conj(), a1.conj(), b0.conj(), b1.conj()) * noise.storage_frame().adjoint()
}

/// One coincidence event. `detector` is `0` when no photon was heralded.
/// `spin_basis` is `None` when the spin was measured in the basis of the
/// transfer target itself, in which case bit `0` means "found in target".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoincidenceRecord {
    pub detector: u8,
    pub spin_bit: u8,
    pub spin_basis: Option<Basis>,
    pub trial_id: u64,
    pub heralded: bool,
}

impl CoincidenceRecord {
    pub fn missed(trial_id: u64) -> Self {
        Self { detector: 0, spin_bit: 0, spin_basis: None, trial_id, heralded: false }
    }

    pub fn heralded(trial_id: u64, detector: u8, spin_bit: u8, spin_basis: Option<Basis>) -> Self {
        Self { detector, spin_bit, spin_basis, trial_id, heralded: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountKey {
    pub detector: u8,
    pub spin_bit: u8,
    pub spin_basis: Option<Basis>,
}

/// Order-independent aggregate of coincidence records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub counts: BTreeMap<CountKey, u64>,
    pub trials: u64,
    pub heralded: u64,
}

impl Tally {
    pub fn record(mut self, r: &CoincidenceRecord) -> Self {
        self.trials += 1;
        if r.heralded {
            self.heralded += 1;
            let key = CountKey { detector: r.detector, spin_bit: r.spin_bit, spin_basis: r.spin_basis };
            *self.counts.entry(key).or_insert(0) += 1;
        }
        self
    }

    pub fn merge(mut self, other: Tally) -> Self {
        self.trials += other.trials;
        self.heralded += other.heralded;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
        self
    }

    pub fn count(&self, detector: u8, spin_bit: u8, spin_basis: Option<Basis>) -> u64 {
        self.counts.get(&CountKey { detector, spin_bit, spin_basis }).copied().unwrap_or(0)
    }

    /// Heralded events matching a predicate on the key.
    pub fn sum(&self, pred: impl Fn(&CountKey) -> bool) -> u64 {
        self.counts.iter().filter(|(k, _)| pred(k)).map(|(_, v)| v).sum()
    }
}

/// Runs `trials` independent trials in parallel and tallies the records.
pub(crate) fn run_trials<F>(sampling: &Sampling, offset: u64, trial: F) -> Result<Tally>
where
    F: Fn(u64, &mut ChaCha8Rng) -> Result<CoincidenceRecord> + Sync,
{
    (0..sampling.trials)
        .into_par_iter()
        .map(|i| {
            let id = offset + i;
            trial(id, &mut trial_rng(sampling.seed, id))
        })
        .try_fold(Tally::default, |t, r| r.map(|r| t.record(&r)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub counts: Tally,
    pub fidelity: Estimate,
    pub success_rate: Estimate,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ops::max_abs_diff;
    use crate::state::LabeledState;

    #[test]
    fn projectors_complete_the_photon_space() {
        let total = ghz_projectors()
            .iter()
            .map(|(_, ch)| ch.kraus_ops()[0].clone())
            .chain(complementary_projectors().iter().map(|ch| ch.kraus_ops()[0].clone()))
            .fold(CMatrix::zeros(8, 8), |a, b| a + b);
        assert!(max_abs_diff(&total, &ops::identity(8)) < 1e-15);
    }

    #[test]
    fn xi_plus_misses_orthogonal_product() {
        // |H⟩|ω_blue⟩|R⟩
        let s = LabeledState::from_amplitudes(&PHOTON, &{
            let mut v = [ZERO; 8];
            v[0b101] = ops::ONE;
            v
        })
        .unwrap();
        let (_, xi) = &ghz_projectors()[0];
        assert_eq!(s.apply(xi).unwrap().trace(), 0.0);
    }

    #[test]
    fn analyzer_resolves_each_ghz_state() {
        for o in GhzOutcome::ALL {
            let v = nalgebra::DVector::from_row_slice(&o.vector());
            for d in 1..=4u8 {
                let p = (v.adjoint() * detector_operator(d).unwrap() * &v)[(0, 0)].re;
                let expected = if d == o.detector() { 1.0 } else { 0.0 };
                assert!((p - expected).abs() < 1e-15, "{o:?} at {d}");
            }
        }
        assert!(detector_operator(5).is_err());
    }

    #[test]
    fn detector_bijection() {
        let dets: Vec<u8> = GhzOutcome::ALL.iter().map(|o| o.detector()).collect();
        assert_eq!(dets, [1, 2, 3, 4]);
        for o in GhzOutcome::ALL {
            assert_eq!(GhzOutcome::from_detector(o.detector()), Some(o));
        }
        assert_eq!(GhzOutcome::from_detector(0), None);
        let corr: Vec<Correction> = GhzOutcome::ALL.iter().map(|o| o.correction()).collect();
        assert_eq!(corr, [Correction::Sz, Correction::Identity, Correction::Sy, Correction::Sx]);
    }

    #[test]
    fn correction_flip_matches_anticommutation() {
        for corr in [Correction::Sz, Correction::Identity, Correction::Sy, Correction::Sx] {
            for b in Basis::ALL {
                let p = corr.matrix();
                let q = b.pauli();
                let anti = max_abs_diff(&(&p * &q + &q * &p), &CMatrix::zeros(2, 2)) < 1e-15;
                assert_eq!(corr.flips(b), anti, "{corr:?} {b}");
            }
        }
    }

    #[test]
    fn loss_budget_products() {
        assert_eq!(loss_budget(&[]).unwrap(), 1.0);
        assert_eq!(loss_budget(&[("a".into(), 0.5)]).unwrap(), 0.5);
        let budget = LossModel::default().overall().unwrap();
        assert!((budget - 0.08 * 0.2 * 0.4 * 0.5 * 0.36 * 0.3).abs() < 1e-18);
        assert!((budget - 3.456e-4).abs() < 1e-15);
        let loss = LossModel { reading: LossReading::Loss, ..Default::default() };
        assert!((loss.overall().unwrap() - 0.92 * 0.8 * 0.6 * 0.5 * 0.64 * 0.7).abs() < 1e-15);
        assert_eq!(
            loss_budget(&[("bad".into(), 0.0)]),
            Err(Error::InvalidEfficiency { name: "bad".into(), value: 0.0 })
        );
        assert!(loss_budget(&[("bad".into(), 1.2)]).is_err());
    }

    #[test]
    fn trial_streams_are_independent_and_reproducible() {
        use rand::Rng;
        let a: f64 = trial_rng(5, 0).random();
        let b: f64 = trial_rng(5, 1).random();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(5, 0).random::<f64>());
    }

    #[test]
    fn tally_merge_is_order_independent() {
        let recs: Vec<CoincidenceRecord> = (0..50)
            .map(|i| {
                if i % 7 == 0 {
                    CoincidenceRecord::missed(i)
                } else {
                    CoincidenceRecord::heralded(i, (i % 4) as u8 + 1, (i % 2) as u8, Some(Basis::X))
                }
            })
            .collect();
        let forward = recs.iter().fold(Tally::default(), |t, r| t.record(r));
        let split = recs[25..]
            .iter()
            .fold(Tally::default(), |t, r| t.record(r))
            .merge(recs[..25].iter().rev().fold(Tally::default(), |t, r| t.record(r)));
        assert_eq!(forward, split);
        assert_eq!(forward.trials, 50);
        assert_eq!(forward.heralded, 42);
    }
}
