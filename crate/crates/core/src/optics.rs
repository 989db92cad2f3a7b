//! Photon-side apparatus: PBS path splitting, path-resolved etalons, wave
//! plates and target encoding.
//!
//! [`correlate_dofs`] turns the spin-frequency pair into the four-label state
//! where `|ω_red⟩ ↦ |ω_red⟩|H⟩|T⟩` and `|ω_blue⟩ ↦ |ω_blue⟩|V⟩|R⟩`;
//! [`encode_target`] then disentangles polarization and writes the state to
//! be transferred into it.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_probability, Error, Result};
use crate::state::ops::{self, c, CMatrix, ONE, ZERO};
use crate::state::{Dof, LabeledState, PureState, QuantumChannel, ALGEBRA_TOL};

/// Lorentzian power transmission of a filter of width `fwhm` at `detuning`.
pub fn lorentzian(detuning: f64, fwhm: f64) -> f64 {
    1.0 / (1.0 + (2.0 * detuning / fwhm).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtalonModel {
    /// Passes the nearest frequency bin, blocks the other one.
    IdealProjector,
    LorentzianLeakage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtalonSpec {
    /// Offset from the midpoint between the two bins.
    pub center_ghz: f64,
    pub fwhm_ghz: f64,
    pub model: EtalonModel,
}

impl EtalonSpec {
    pub fn ideal(center_ghz: f64) -> Self {
        Self { center_ghz, fwhm_ghz: 1.0, model: EtalonModel::IdealProjector }
    }

    pub fn lorentzian(center_ghz: f64, fwhm_ghz: f64) -> Self {
        Self { center_ghz, fwhm_ghz, model: EtalonModel::LorentzianLeakage }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("etalon fwhm_ghz", self.fwhm_ghz)
    }

    /// Power transmission at `freq_ghz` (relative to the bin midpoint) for
    /// bins separated by `separation_ghz`.
    pub fn transmission(&self, freq_ghz: f64, separation_ghz: f64) -> f64 {
        let detuning = freq_ghz - self.center_ghz;
        match self.model {
            EtalonModel::IdealProjector => {
                if detuning.abs() < separation_ghz / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            EtalonModel::LorentzianLeakage => lorentzian(detuning, self.fwhm_ghz),
        }
    }
}

/// Etalons on the transmitted (`T`, red) and reflected (`R`, blue) paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtalonPair {
    pub transmitted: EtalonSpec,
    pub reflected: EtalonSpec,
    pub bin_separation_ghz: f64,
}

impl Default for EtalonPair {
    fn default() -> Self {
        Self::ideal(18.0)
    }
}

impl EtalonPair {
    pub fn ideal(separation_ghz: f64) -> Self {
        Self {
            transmitted: EtalonSpec::ideal(-separation_ghz / 2.0),
            reflected: EtalonSpec::ideal(separation_ghz / 2.0),
            bin_separation_ghz: separation_ghz,
        }
    }

    pub fn lorentzian(separation_ghz: f64, fwhm_ghz: f64) -> Self {
        Self {
            transmitted: EtalonSpec::lorentzian(-separation_ghz / 2.0, fwhm_ghz),
            reflected: EtalonSpec::lorentzian(separation_ghz / 2.0, fwhm_ghz),
            bin_separation_ghz: separation_ghz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.transmitted.validate()?;
        self.reflected.validate()?;
        check_positive("bin_separation_ghz", self.bin_separation_ghz)
    }

    /// Filter on `[Frequency, Path]`: each path's etalon weights each bin by
    /// the square root of its power transmission.
    pub fn channel(&self) -> Result<QuantumChannel> {
        self.validate()?;
        let half = self.bin_separation_ghz / 2.0;
        let amp = |e: &EtalonSpec, f: f64| c(e.transmission(f, self.bin_separation_ghz).sqrt(), 0.0);
        let diag = [
            amp(&self.transmitted, -half),
            amp(&self.reflected, -half),
            amp(&self.transmitted, half),
            amp(&self.reflected, half),
        ];
        let k = CMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag));
        QuantumChannel::filter(&[Dof::Frequency, Dof::Path], k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateKind {
    Half,
    Quarter,
}

/// Wave plate with its fast axis at `angle` radians from `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateSetting {
    pub kind: PlateKind,
    pub angle: f64,
}

impl WavePlateSetting {
    pub fn half(angle: f64) -> Self {
        Self { kind: PlateKind::Half, angle }
    }

    pub fn quarter(angle: f64) -> Self {
        Self { kind: PlateKind::Quarter, angle }
    }

    pub fn retardance(&self) -> f64 {
        match self.kind {
            PlateKind::Half => PI,
            PlateKind::Quarter => FRAC_PI_2,
        }
    }

    /// `R(−θ) diag(1, e^{−iΓ}) R(θ)` in the `{H, V}` basis.
    pub fn jones(&self) -> CMatrix {
        let (s, co) = self.angle.sin_cos();
        let rot = |s: f64| ops::mat2(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
        let ret = ops::mat2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, -self.retardance()));
        rot(-s) * ret * rot(s)
    }
}

pub fn waveplate_channel(w: WavePlateSetting) -> QuantumChannel {
    QuantumChannel::unitary(&[Dof::Polarization], w.jones()).expect("Jones matrices are unitary")
}

/// Polarization state `α|H⟩ + β|V⟩` to be transferred to the spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl TargetState {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidParameter(format!("|α|² + |β|² = {n}, expected 1")));
        }
        Ok(Self { alpha, beta })
    }

    /// `|H⟩`, mapped to `|↓⟩`.
    pub fn h() -> Self {
        Self { alpha: ONE, beta: ZERO }
    }

    /// `|D⁺⟩ = (|H⟩ + |V⟩)/√2`, mapped to `(|↓⟩ + |↑⟩)/√2`.
    pub fn d_plus() -> Self {
        Self { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(FRAC_1_SQRT_2, 0.0) }
    }

    /// `|σ⁺⟩ = (|H⟩ + i|V⟩)/√2`, mapped to `(|↓⟩ + i|↑⟩)/√2`.
    pub fn sigma_plus() -> Self {
        Self { alpha: c(FRAC_1_SQRT_2, 0.0), beta: c(0.0, FRAC_1_SQRT_2) }
    }

    /// Bloch-sphere point `(θ, φ)`: `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self { alpha: c((theta / 2.0).cos(), 0.0), beta: Complex64::from_polar((theta / 2.0).sin(), phi) }
    }

    /// Haar-random target.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut g = || -> f64 { StandardNormal.sample(rng) };
        let (a, b) = (c(g(), g()), c(g(), g()));
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        Self { alpha: a / n, beta: b / n }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.alpha, self.beta]
    }

    /// Bloch vector `(⟨σ_x⟩, ⟨σ_y⟩, ⟨σ_z⟩)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let cross = self.alpha.conj() * self.beta;
        [2.0 * cross.re, 2.0 * cross.im, self.alpha.norm_sqr() - self.beta.norm_sqr()]
    }

    pub fn polarization(&self) -> PureState {
        PureState::qubit(Dof::Polarization, self.alpha, self.beta)
    }

    /// The spin state the protocol should deliver: `α|↓⟩ + β|↑⟩`.
    pub fn spin(&self) -> PureState {
        PureState::qubit(Dof::Spin, self.alpha, self.beta)
    }
}

/// Half-wave then quarter-wave plate turning `|H⟩` into `target`, up to a
/// global phase.
pub fn plates_preparing(target: &TargetState) -> (WavePlateSetting, WavePlateSetting) {
    let [s1, s2, s3] = {
        let [x, y, z] = target.bloch_vector();
        // Stokes (S1, S2, S3) = (z, x, y) in the H/V basis
        [z, x, y]
    };
    let azimuth = 0.5 * s2.atan2(s1);
    let ellipticity = 0.5 * s3.clamp(-1.0, 1.0).asin();
    let overlap = |h: WavePlateSetting, q: WavePlateSetting| {
        let v = q.jones() * h.jones();
        (target.alpha.conj() * v[(0, 0)] + target.beta.conj() * v[(1, 0)]).norm()
    };
    [azimuth + ellipticity, azimuth - ellipticity]
        .into_iter()
        .map(|linear| (WavePlateSetting::half(linear / 2.0), WavePlateSetting::quarter(azimuth)))
        .max_by(|a, b| overlap(a.0, a.1).total_cmp(&overlap(b.0, b.1)))
        .expect("two candidates")
}

/// Product of the plates from [`plates_preparing`] with the global phase
/// removed so that `W|H⟩ = α|H⟩ + β|V⟩` exactly.
pub fn encoding_unitary(target: &TargetState) -> CMatrix {
    let (h, q) = plates_preparing(target);
    let w = q.jones() * h.jones();
    let ov = target.alpha.conj() * w[(0, 0)] + target.beta.conj() * w[(1, 0)];
    w * Complex64::from_polar(1.0, -ov.arg())
}

/// Optics settings shared by the exact and sampled pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsParams {
    pub etalons: EtalonPair,
    /// Depolarizing probability on polarization between encoding and the
    /// GHZ analyzer (wave plate, mirror and interferometer imperfections).
    pub analyzer_depolarization: f64,
}

impl Default for OpticsParams {
    fn default() -> Self {
        Self { etalons: EtalonPair::default(), analyzer_depolarization: 0.0 }
    }
}

impl OpticsParams {
    pub fn validate(&self) -> Result<()> {
        self.etalons.validate()?;
        check_probability("analyzer_depolarization", self.analyzer_depolarization)
    }

    pub fn analyzer_channel(&self) -> QuantumChannel {
        let q = self.analyzer_depolarization / 4.0;
        QuantumChannel::pauli(Dof::Polarization, q, q, q).expect("validated probability")
    }
}

fn polarizing_beam_splitter() -> QuantumChannel {
    // path follows polarization: H stays on T, V goes to R
    let cnot = CMatrix::from_fn(4, 4, |i, j| {
        let (pol, path) = (j >> 1, j & 1);
        if i == (pol << 1 | (path ^ pol)) {
            ONE
        } else {
            ZERO
        }
    });
    QuantumChannel::unitary(&[Dof::Polarization, Dof::Path], cnot).expect("permutation")
}

/// Half-wave plate at 45° on the `R` path only.
fn reflected_path_flip() -> QuantumChannel {
    let t = ops::projector(&[ONE, ZERO]);
    let r = ops::projector(&[ZERO, ONE]);
    let op = ops::kron(&ops::identity(2), &t) + ops::kron(&WavePlateSetting::half(FRAC_PI_4).jones(), &r);
    QuantumChannel::unitary(&[Dof::Polarization, Dof::Path], op).expect("block unitary")
}

fn fresh_photon_modes() -> PureState {
    PureState::qubit(Dof::Polarization, c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0))
        .tensor(&PureState::basis(Dof::Path, 0))
        .expect("disjoint")
}

fn require_labels(found: &[Dof], expected: &[Dof]) -> Result<()> {
    if found != expected {
        return Err(Error::LabelMismatch { expected: expected.to_vec(), found: found.to_vec() });
    }
    Ok(())
}

/// Adjoins `(|H⟩+|V⟩)/√2 ⊗ |T⟩`, splits on the PBS and filters each path
/// with its etalon. The trace drops by the etalon pass probability (one half
/// for ideal etalons).
pub fn correlate_dofs(state: &LabeledState, etalons: &EtalonPair) -> Result<LabeledState> {
    require_labels(state.labels(), &[Dof::Spin, Dof::Frequency])?;
    let filter = etalons.channel()?;
    state.tensor(&fresh_photon_modes().to_density())?.apply(&polarizing_beam_splitter())?.apply(&filter)
}

/// Trajectory version of [`correlate_dofs`]; returns the renormalized state
/// and the etalon pass probability.
pub fn correlate_dofs_pure(psi: &PureState, etalons: &EtalonPair) -> Result<(PureState, f64)> {
    require_labels(psi.labels(), &[Dof::Spin, Dof::Frequency])?;
    let mut out = psi.tensor(&fresh_photon_modes())?;
    out.apply_unitary(&polarizing_beam_splitter())?;
    let pass = out.filter(&etalons.channel()?)?;
    out.normalize()?;
    Ok((out, pass))
}

fn encoding_channels(target: &TargetState) -> [QuantumChannel; 2] {
    [reflected_path_flip(), QuantumChannel::unitary(&[Dof::Polarization], encoding_unitary(target)).expect("unitary")]
}

/// Flips `V → H` on the `R` path, then prepares `|ψ⟩_p` on both paths.
pub fn encode_target(state: &LabeledState, target: &TargetState) -> Result<LabeledState> {
    require_labels(state.labels(), &Dof::ALL)?;
    encoding_channels(target).iter().try_fold(state.clone(), |s, ch| s.apply(ch))
}

pub fn encode_target_pure(psi: &PureState, target: &TargetState) -> Result<PureState> {
    require_labels(psi.labels(), &Dof::ALL)?;
    let mut out = psi.clone();
    for ch in encoding_channels(target) {
        out.apply_unitary(&ch)?;
    }
    Ok(out)
}
