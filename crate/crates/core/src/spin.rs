//! Electron-spin dynamics: instantaneous rotation pulses, Larmor precession
//! with a quasi-static Overhauser detuning, echo-limited phase damping and
//! spin readout.
//!
//! Ensemble averages over the Gaussian detuning are exact: while a sequence
//! runs, the density matrix is kept as a sum of Fourier components
//! `Σ_τ M_τ e^{2πiδτ}` and averaged at the end with `E[e^{2πiδτ}] =
//! e^{−2π²σ²τ²}`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{check_positive, check_probability, Error, Result};
use crate::state::ops::{self, CMatrix};
use crate::state::{embed, Dof, LabeledState, Layout, PureState, QuantumChannel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpinParams {
    /// Inhomogeneous dephasing time; `inf` disables hyperfine noise.
    pub t2_star_ns: f64,
    /// Echo coherence time; `inf` disables phase damping.
    pub t2_echo_us: f64,
    pub larmor_freq_ghz: f64,
    pub readout_fidelity: f64,
    /// Fractional over-rotation applied to every pulse angle.
    pub rotation_error: f64,
}

impl Default for SpinParams {
    fn default() -> Self {
        Self { t2_star_ns: 1.7, t2_echo_us: 2.7, larmor_freq_ghz: 18.0, readout_fidelity: 1.0, rotation_error: 0.0 }
    }
}

impl SpinParams {
    pub fn noiseless() -> Self {
        Self { t2_star_ns: f64::INFINITY, t2_echo_us: f64::INFINITY, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("t2_star_ns", self.t2_star_ns)?;
        check_positive("t2_echo_us", self.t2_echo_us)?;
        if self.t2_echo_us.is_finite() && self.t2_echo_us * 1e3 <= self.t2_star_ns {
            return Err(Error::InvalidParameter(format!(
                "t2_echo_us = {} must exceed t2_star_ns = {}",
                self.t2_echo_us, self.t2_star_ns
            )));
        }
        check_probability("readout_fidelity", self.readout_fidelity)?;
        if !self.larmor_freq_ghz.is_finite() || !self.rotation_error.is_finite() {
            return Err(Error::InvalidParameter("larmor and rotation error must be finite".into()));
        }
        Ok(())
    }

    /// Standard deviation of the Overhauser detuning, GHz. Chosen so the
    /// Ramsey envelope is `exp(−(t/T2*)²)`.
    pub fn detuning_sigma_ghz(&self) -> f64 {
        if self.t2_star_ns.is_infinite() {
            0.0
        } else {
            2f64.sqrt() / (2.0 * PI * self.t2_star_ns)
        }
    }

    /// Coherence factor from echo-limited phase damping over `dt_ns`.
    pub fn damping_factor(&self, dt_ns: f64) -> f64 {
        (-dt_ns / (self.t2_echo_us * 1e3)).exp()
    }
}

/// Instantaneous rotation by `angle` about the Bloch unit vector `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEvent {
    pub time_ns: f64,
    pub axis: [f64; 3],
    pub angle: f64,
}

impl PulseEvent {
    pub fn new(time_ns: f64, axis: [f64; 3], angle: f64) -> Self {
        Self { time_ns, axis, angle }
    }

    /// Rotation about an equatorial axis at azimuth `phase`.
    pub fn equatorial(time_ns: f64, phase: f64, angle: f64) -> Self {
        Self::new(time_ns, [phase.cos(), phase.sin(), 0.0], angle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub events: Vec<PulseEvent>,
    pub total_span_ns: f64,
}

enum Segment {
    Free(f64),
    Pulse(PulseEvent),
}

impl PulseSequence {
    pub fn new(events: Vec<PulseEvent>, total_span_ns: f64) -> Result<Self> {
        let seq = Self { events, total_span_ns };
        seq.validate()?;
        Ok(seq)
    }

    pub fn empty() -> Self {
        Self { events: Vec::new(), total_span_ns: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let mut last = 0.0;
        for e in &self.events {
            if !(e.time_ns >= last) {
                return Err(Error::UnsortedSequence);
            }
            last = e.time_ns;
            let norm = e.axis.iter().map(|a| a * a).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!("pulse axis norm {norm}")));
            }
        }
        if !(self.total_span_ns >= last) {
            return Err(Error::InvalidParameter(format!(
                "total span {} ends before the last pulse at {last}",
                self.total_span_ns
            )));
        }
        Ok(())
    }

    /// `π/2 – delay – π/2`, the second pulse about azimuth `phase`.
    pub fn ramsey(delay_ns: f64, phase: f64) -> Self {
        Self {
            events: vec![
                PulseEvent::equatorial(0.0, 0.0, FRAC_PI_2),
                PulseEvent::equatorial(delay_ns, phase, FRAC_PI_2),
            ],
            total_span_ns: delay_ns,
        }
    }

    /// `π/2 – span/2 – π – span/2 – π/2`, the last pulse about azimuth
    /// `phase`.
    pub fn echo(span_ns: f64, phase: f64) -> Self {
        Self {
            events: vec![
                PulseEvent::equatorial(0.0, 0.0, FRAC_PI_2),
                PulseEvent::equatorial(span_ns / 2.0, 0.0, PI),
                PulseEvent::equatorial(span_ns, phase, FRAC_PI_2),
            ],
            total_span_ns: span_ns,
        }
    }

    /// Storage during photon flight: `unrefocused_ns` of plain precession
    /// followed by a symmetric echo of `2 × half_span_ns`.
    pub fn storage(unrefocused_ns: f64, half_span_ns: f64) -> Self {
        let mut events = Vec::new();
        if half_span_ns > 0.0 {
            events.push(PulseEvent::equatorial(unrefocused_ns + half_span_ns, 0.0, PI));
        }
        Self { events, total_span_ns: unrefocused_ns + 2.0 * half_span_ns }
    }

    /// Free precession for `span_ns`, then the pre-rotation that maps the
    /// `0` outcome of `basis` onto `|↓⟩`. The pulse axis absorbs the known
    /// Larmor phase so that only the random detuning dephases the result.
    pub fn measure_after(span_ns: f64, basis: Basis, larmor_freq_ghz: f64) -> Self {
        let larmor_phase = 2.0 * PI * larmor_freq_ghz * span_ns;
        let events = match basis {
            Basis::Z => Vec::new(),
            // R_y(−π/2) sends (|↓⟩+|↑⟩)/√2 to |↓⟩
            Basis::X => vec![PulseEvent::equatorial(span_ns, FRAC_PI_2 + larmor_phase, -FRAC_PI_2)],
            // R_x(π/2) sends (|↓⟩+i|↑⟩)/√2 to |↓⟩
            Basis::Y => vec![PulseEvent::equatorial(span_ns, larmor_phase, FRAC_PI_2)],
        };
        Self { events, total_span_ns: span_ns }
    }

    fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut now = 0.0;
        for e in &self.events {
            if e.time_ns > now {
                out.push(Segment::Free(e.time_ns - now));
            }
            now = e.time_ns;
            out.push(Segment::Pulse(*e));
        }
        if self.total_span_ns > now {
            out.push(Segment::Free(self.total_span_ns - now));
        }
        out
    }

    /// Unitary of the sequence at zero detuning with ideal pulses; used as
    /// the known frame that post-processing undoes.
    pub fn ideal_unitary(&self, larmor_freq_ghz: f64) -> CMatrix {
        self.segments().iter().fold(ops::identity(2), |u, seg| match seg {
            Segment::Free(dt) => ops::phase_rotation(2.0 * PI * larmor_freq_ghz * dt) * u,
            Segment::Pulse(e) => ops::rotation(e.axis, e.angle) * u,
        })
    }
}

fn pulse_matrix(e: &PulseEvent, p: &SpinParams) -> CMatrix {
    ops::rotation(e.axis, e.angle * (1.0 + p.rotation_error))
}

fn require_spin(labels: &[Dof]) -> Result<()> {
    if labels.contains(&Dof::Spin) {
        Ok(())
    } else {
        Err(Error::LabelMismatch { expected: vec![Dof::Spin], found: labels.to_vec() })
    }
}

/// Evolves under `seq` for one fixed detuning. Echo-limited phase damping is
/// applied as a channel on every free interval.
pub fn evolve(state: &LabeledState, seq: &PulseSequence, p: &SpinParams, detuning_ghz: f64) -> Result<LabeledState> {
    require_spin(state.labels())?;
    seq.validate()?;
    let mut rho = state.clone();
    for seg in seq.segments() {
        rho = match seg {
            Segment::Free(dt) => {
                let u = ops::phase_rotation(2.0 * PI * (p.larmor_freq_ghz + detuning_ghz) * dt);
                rho.apply(&QuantumChannel::unitary(&[Dof::Spin], u)?)?
                    .apply(&QuantumChannel::dephasing(Dof::Spin, p.damping_factor(dt))?)?
            }
            Segment::Pulse(e) => rho.apply(&QuantumChannel::unitary(&[Dof::Spin], pulse_matrix(&e, p))?)?,
        };
    }
    Ok(rho)
}

/// Sampled-trajectory version of [`evolve`]: phase damping is unravelled
/// into random `σ_z` jumps.
pub fn evolve_trajectory<R: Rng + ?Sized>(
    psi: &mut PureState,
    seq: &PulseSequence,
    p: &SpinParams,
    detuning_ghz: f64,
    rng: &mut R,
) -> Result<()> {
    require_spin(psi.labels())?;
    for seg in seq.segments() {
        match seg {
            Segment::Free(dt) => {
                let u = ops::phase_rotation(2.0 * PI * (p.larmor_freq_ghz + detuning_ghz) * dt);
                psi.apply_op(&u, &[Dof::Spin])?;
                let flip = (1.0 - p.damping_factor(dt)) / 2.0;
                if flip > 0.0 && rng.random::<f64>() < flip {
                    psi.apply_op(&ops::pauli_z(), &[Dof::Spin])?;
                }
            }
            Segment::Pulse(e) => psi.apply_op(&pulse_matrix(&e, p), &[Dof::Spin])?,
        }
    }
    Ok(())
}

/// Delays closer than 1e-6 ns share a Fourier component.
const KEY_SCALE: f64 = 1e6;

/// Exact average of [`evolve`] over the Gaussian Overhauser detuning.
pub fn evolve_ensemble(state: &LabeledState, seq: &PulseSequence, p: &SpinParams) -> Result<LabeledState> {
    require_spin(state.labels())?;
    seq.validate()?;
    let layout = Layout::new(state.labels());
    let mask = 1usize << layout.shift(layout.position(Dof::Spin)?);
    let dim = state.dim();
    // key -> (delay τ in ns, M_τ)
    let mut terms: BTreeMap<i64, (f64, CMatrix)> = BTreeMap::new();
    terms.insert(0, (0.0, state.matrix().clone()));
    for seg in seq.segments() {
        match seg {
            Segment::Free(dt) => {
                let phase =
                    num_complex::Complex64::from_polar(p.damping_factor(dt), -2.0 * PI * p.larmor_freq_ghz * dt);
                let mut next: BTreeMap<i64, (f64, CMatrix)> = BTreeMap::new();
                for (_, (tau, m)) in terms {
                    let mut diag = CMatrix::zeros(dim, dim);
                    let mut up = CMatrix::zeros(dim, dim);
                    let mut down = CMatrix::zeros(dim, dim);
                    for i in 0..dim {
                        for j in 0..dim {
                            match (i & mask != 0, j & mask != 0) {
                                (false, true) => up[(i, j)] = m[(i, j)] * phase,
                                (true, false) => down[(i, j)] = m[(i, j)] * phase.conj(),
                                _ => diag[(i, j)] = m[(i, j)],
                            }
                        }
                    }
                    for (t, part) in [(tau, diag), (tau - dt, up), (tau + dt, down)] {
                        if part.iter().any(|z| z.norm() > 0.0) {
                            let key = (t * KEY_SCALE).round() as i64;
                            next.entry(key).or_insert_with(|| (t, CMatrix::zeros(dim, dim))).1 += part;
                        }
                    }
                }
                terms = next;
            }
            Segment::Pulse(e) => {
                let u = embed(&pulse_matrix(&e, p), &[Dof::Spin], state.labels())?;
                let ud = u.adjoint();
                for (_, m) in terms.values_mut() {
                    *m = &u * &*m * &ud;
                }
            }
        }
    }
    let sigma = p.detuning_sigma_ghz();
    let matrix = terms.into_values().fold(CMatrix::zeros(dim, dim), |acc, (tau, m)| {
        let w = (-2.0 * PI * PI * sigma * sigma * tau * tau).exp();
        acc + m * ops::c(w, 0.0)
    });
    LabeledState::from_matrix(state.labels(), matrix)
}

/// Draws one quasi-static Overhauser detuning (GHz); deterministic in
/// `seed`.
pub fn sample_detuning(p: &SpinParams, seed: u64) -> f64 {
    draw_detuning(p, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn draw_detuning<R: Rng + ?Sized>(p: &SpinParams, rng: &mut R) -> f64 {
    let sigma = p.detuning_sigma_ghz();
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

/// Probability of reading `1` (bright, `|↑⟩`) including readout errors.
pub fn readout_probability(state: &LabeledState, p: &SpinParams) -> Result<f64> {
    require_spin(state.labels())?;
    let up = state.marginal(&[Dof::Spin])?;
    let p_up = up.matrix()[(1, 1)].re / up.trace();
    Ok(flip_probability(p_up, p.readout_fidelity))
}

fn flip_probability(p_up: f64, fidelity: f64) -> f64 {
    fidelity * p_up + (1.0 - fidelity) * (1.0 - p_up)
}

/// Samples one readout bit from a density matrix.
pub fn readout<R: Rng + ?Sized>(state: &LabeledState, p: &SpinParams, rng: &mut R) -> Result<u8> {
    let p1 = readout_probability(state, p)?;
    Ok(u8::from(rng.random::<f64>() < p1))
}

/// Samples one readout bit from a trajectory, collapsing nothing.
pub fn readout_pure<R: Rng + ?Sized>(psi: &PureState, p: &SpinParams, rng: &mut R) -> Result<u8> {
    let p1 = flip_probability(psi.probability_one(Dof::Spin)?, p.readout_fidelity);
    Ok(u8::from(rng.random::<f64>() < p1))
}

/// Fringe amplitude from readout probabilities at final-pulse azimuths
/// `0, π/2, π, 3π/2`.
pub fn quadrature_visibility(p: [f64; 4]) -> f64 {
    ((p[0] - p[2]).powi(2) + (p[1] - p[3]).powi(2)).sqrt()
}

pub const QUADRATURE_PHASES: [f64; 4] = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];

/// Exact ensemble visibility of a sequence family built by `make(phase)`,
/// starting from `|↓⟩`.
pub fn exact_visibility(make: impl Fn(f64) -> PulseSequence, p: &SpinParams) -> Result<f64> {
    let down = LabeledState::basis(Dof::Spin, 0);
    let mut probs = [0.0; 4];
    for (slot, &phase) in probs.iter_mut().zip(QUADRATURE_PHASES.iter()) {
        let rho = evolve_ensemble(&down, &make(phase), p)?;
        *slot = readout_probability(&rho, p)?;
    }
    Ok(quadrature_visibility(probs))
}
