//! Λ-system quantum-dot source of the spin-photon entangled pair.
//!
//! The dot is initialized to `|↓⟩`, driven to the trion and decays through
//! one of two channels, leaving `(|↓⟩|ω_red⟩ − |↑⟩|ω_blue⟩)/√2` over the
//! `Spin` and `Frequency` labels. The trion never appears in stored states.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Result};
use crate::state::ops::{c, ZERO};
use crate::state::{Dof, LabeledState, PureState, QuantumChannel};

/// How re-excitation by the driving pulse corrupts the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReexcitationModel {
    /// Frequency coherence is lost, spin-frequency populations are kept.
    /// Fidelity to the ideal pair is `1 − w/2`.
    FrequencyDephasing,
    /// Frequency label replaced by the maximally mixed state.
    /// Fidelity to the ideal pair is `1 − 3w/4`.
    FrequencyDepolarizing,
}

impl ReexcitationModel {
    /// Admixture weight producing a given fidelity penalty.
    pub fn weight_for_penalty(self, penalty: f64) -> f64 {
        match self {
            ReexcitationModel::FrequencyDephasing => 2.0 * penalty,
            ReexcitationModel::FrequencyDepolarizing => 4.0 * penalty / 3.0,
        }
    }
}

/// Replaces the entangled resource for control experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Entangled,
    /// `(|↓ ω_red⟩⟨·| + |↑ ω_blue⟩⟨·|)/2`, separable with perfect Z correlation.
    ClassicallyCorrelated,
    /// Spin replaced by the maximally mixed state.
    MixedSpin,
}

impl ResourceKind {
    fn channel(self) -> Option<QuantumChannel> {
        match self {
            ResourceKind::Entangled => None,
            ResourceKind::ClassicallyCorrelated => {
                Some(QuantumChannel::pauli(Dof::Frequency, 0.0, 0.0, 0.5).expect("valid"))
            }
            ResourceKind::MixedSpin => Some(QuantumChannel::pauli(Dof::Spin, 0.25, 0.25, 0.25).expect("valid")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceParams {
    /// Probability the spin starts in `|↑⟩` instead of `|↓⟩`.
    pub init_error: f64,
    pub reexcitation_weight: f64,
    pub reexcitation_model: ReexcitationModel,
    /// Separation of the two frequency bins.
    pub zeeman_splitting_ghz: f64,
    /// Metadata only; emission is not time resolved.
    pub excitation_pulse_width_ps: f64,
    pub resource: ResourceKind,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            init_error: 0.0,
            reexcitation_weight: 0.0,
            reexcitation_model: ReexcitationModel::FrequencyDephasing,
            zeeman_splitting_ghz: 18.0,
            excitation_pulse_width_ps: 400.0,
            resource: ResourceKind::Entangled,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("init_error", self.init_error)?;
        check_probability("reexcitation_weight", self.reexcitation_weight)?;
        check_positive("zeeman_splitting_ghz", self.zeeman_splitting_ghz)?;
        Ok(())
    }

    /// Noise channels in the order they act on the ideal pair.
    fn channels(&self) -> Vec<QuantumChannel> {
        let w = self.reexcitation_weight;
        let reexcite = match self.reexcitation_model {
            ReexcitationModel::FrequencyDephasing => QuantumChannel::pauli(Dof::Frequency, 0.0, 0.0, w / 2.0),
            ReexcitationModel::FrequencyDepolarizing => {
                QuantumChannel::pauli(Dof::Frequency, w / 4.0, w / 4.0, w / 4.0)
            }
        };
        let mut out = vec![
            // a dot starting in |↑⟩ emits the spin-flipped pair
            QuantumChannel::pauli(Dof::Spin, self.init_error, 0.0, 0.0).expect("validated"),
            reexcite.expect("validated"),
        ];
        out.extend(self.resource.channel());
        out
    }
}

/// The noiseless pair `(|↓⟩|ω_red⟩ − |↑⟩|ω_blue⟩)/√2`.
pub fn ideal_pair() -> PureState {
    let h = c(FRAC_1_SQRT_2, 0.0);
    PureState::new(&[Dof::Spin, Dof::Frequency], vec![h, ZERO, ZERO, -h]).expect("two labels")
}

/// Density matrix of the emitted spin-photon pair.
pub fn generate_entangled_pair(p: &SourceParams) -> Result<LabeledState> {
    p.validate()?;
    p.channels().iter().try_fold(ideal_pair().to_density(), |rho, ch| rho.apply(ch))
}

/// One sampled trajectory of the source; averaging `|ψ⟩⟨ψ|` over draws
/// reproduces [`generate_entangled_pair`].
pub fn sample_entangled_pair<R: Rng + ?Sized>(p: &SourceParams, rng: &mut R) -> Result<PureState> {
    p.validate()?;
    let mut psi = ideal_pair();
    for ch in p.channels() {
        psi.sample_channel(&ch, rng)?;
    }
    Ok(psi)
}

/// Crossed-polarizer filter onto `(|H⟩ − i|V⟩)/√2`.
pub fn crossed_polarizer_projection() -> QuantumChannel {
    QuantumChannel::projector_onto(&[Dof::Polarization], &[c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)])
        .expect("unit vector")
}
