//! Frequency-qubit measurement with a phase-locked electro-optic modulator
//! followed by an etalon.
//!
//! Driving the modulator at half the bin separation makes the blue sideband
//! of `|ω_red⟩` overlap the red sideband of `|ω_blue⟩`. The etalon keeps only
//! that overlapped bin, so a click projects the frequency qubit onto
//! `(|ω_red⟩ + e^{iθ}|ω_blue⟩)/√2` with `θ` set by the RF phase. The other
//! sidebands are discarded and show up as the efficiency `J_n(β)²`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::Basis;
use crate::error::{check_positive, Error, Result};
use crate::state::ops::{c, ONE};
use crate::state::{Dof, LabeledState, QuantumChannel};

/// Bessel function of the first kind, `J_n(x) = (1/π)∫₀^π cos(nτ − x sin τ) dτ`.
///
/// The integrand is smooth and periodic, so the trapezoid rule converges
/// geometrically; the node count grows with `|x|` and `n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let nodes = (64.0 + 2.0 * (x.abs() + n.unsigned_abs() as f64)).ceil() as usize;
    let h = PI / nodes as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let interior: f64 = (1..nodes).map(|k| f(k as f64 * h)).sum();
    (interior + 0.5 * (f(0.0) + f(PI))) * h / PI
}

/// Smallest modulation depth whose sideband power `J_n(β)²` equals
/// `efficiency`, searched below the first maximum of `J_n`.
pub fn modulation_depth_for_efficiency(efficiency: f64, order: i32) -> Result<f64> {
    let power = |b: f64| bessel_j(order, b).powi(2);
    // walk up to the first maximum of J_n
    let step = 1e-3;
    let mut peak = step;
    while power(peak + step) > power(peak) {
        peak += step;
    }
    let peak = peak + step;
    if !(efficiency > 0.0 && efficiency <= power(peak)) {
        return Err(Error::InvalidParameter(format!(
            "sideband efficiency {efficiency} not reachable at order {order} (max {:.4})",
            power(peak)
        )));
    }
    let (mut lo, mut hi) = (0.0, peak);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if power(mid) < efficiency {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EomSettings {
    pub modulation_freq_ghz: f64,
    /// Phase-modulation index β.
    pub modulation_depth: f64,
    pub rf_phase_rad: f64,
    /// Calibration constant θ₀.
    pub phase_offset_rad: f64,
    pub sideband_order: i32,
    /// Slope `s` of `θ(φ) = s·φ + θ₀`, either `+2` or `−2`.
    pub phase_slope: i32,
}

impl Default for EomSettings {
    fn default() -> Self {
        Self {
            modulation_freq_ghz: 9.0,
            modulation_depth: modulation_depth_for_efficiency(0.3, 1).expect("reachable"),
            rf_phase_rad: 0.0,
            phase_offset_rad: 0.0,
            sideband_order: 1,
            phase_slope: 2,
        }
    }
}

impl EomSettings {
    pub fn validate(&self) -> Result<()> {
        check_positive("modulation_freq_ghz", self.modulation_freq_ghz)?;
        if !(self.modulation_depth >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "modulation_depth = {} must be non-negative",
                self.modulation_depth
            )));
        }
        if self.phase_slope.abs() != 2 {
            return Err(Error::InvalidParameter(format!("phase_slope = {} must be +2 or -2", self.phase_slope)));
        }
        if self.sideband_order < 1 {
            return Err(Error::InvalidParameter("sideband_order must be at least 1".into()));
        }
        Ok(())
    }

    /// Measurement phase `θ(φ) = s·φ + θ₀`.
    pub fn theta(&self) -> f64 {
        f64::from(self.phase_slope) * self.rf_phase_rad + self.phase_offset_rad
    }

    /// Same settings with the RF phase chosen to realize `theta`.
    pub fn at_theta(&self, theta: f64) -> Self {
        Self { rf_phase_rad: (theta - self.phase_offset_rad) / f64::from(self.phase_slope), ..self.clone() }
    }

    /// Sideband detuning from the bin midpoint for a given bin separation;
    /// zero when the overlapping condition holds.
    pub fn overlap_detuning_ghz(&self, bin_separation_ghz: f64) -> f64 {
        f64::from(self.sideband_order) * self.modulation_freq_ghz - bin_separation_ghz / 2.0
    }

    pub fn efficiency(&self) -> f64 {
        bessel_j(self.sideband_order, self.modulation_depth).powi(2)
    }
}

/// Projector vector `(|ω_red⟩ + e^{iθ}|ω_blue⟩)/√2`.
pub fn superposition_vector(theta: f64) -> [Complex64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [c(s, 0.0), Complex64::from_polar(s, theta)]
}

/// Frequency projector realized by the modulator settings, with the
/// retained-sideband efficiency.
pub fn frequency_projector(e: &EomSettings) -> Result<(QuantumChannel, f64)> {
    e.validate()?;
    let ch = QuantumChannel::projector_onto(&[Dof::Frequency], &superposition_vector(e.theta()))?;
    Ok((ch, e.efficiency()))
}

/// Analyzer phases `(θ₀, θ₁)` of the two outcomes in a basis.
pub fn basis_phases(basis: Basis) -> Option<(f64, f64)> {
    match basis {
        Basis::Z => None,
        Basis::X => Some((0.0, PI)),
        Basis::Y => Some((FRAC_PI_2, 3.0 * FRAC_PI_2)),
    }
}

/// Analyzer vector of a frequency-basis outcome. Z outcomes are the etalon
/// bins; X and Y outcomes are modulator projectors at the phases of
/// [`basis_phases`].
pub fn outcome_vector(basis: Basis, outcome: u8) -> [Complex64; 2] {
    match basis_phases(basis) {
        None => {
            let mut v = [Complex64::new(0.0, 0.0); 2];
            v[usize::from(outcome & 1)] = ONE;
            v
        }
        Some((t0, t1)) => superposition_vector(if outcome == 0 { t0 } else { t1 }),
    }
}

pub fn outcome_projector(basis: Basis, outcome: u8) -> QuantumChannel {
    QuantumChannel::projector_onto(&[Dof::Frequency], &outcome_vector(basis, outcome)).expect("unit vector")
}

/// Outcome weights `(p₀, p₁)`; they sum to the trace of `state`.
pub fn measure_frequency_basis(state: &LabeledState, basis: Basis) -> Result<(f64, f64)> {
    if !state.labels().contains(&Dof::Frequency) {
        return Err(Error::LabelMismatch { expected: vec![Dof::Frequency], found: state.labels().to_vec() });
    }
    let p = |o| state.apply(&outcome_projector(basis, o)).map(|s| s.trace());
    Ok((p(0)?, p(1)?))
}

/// Visibility of the RF-phase fringe for a frequency state:
/// `2|ρ_rb| / (ρ_rr + ρ_bb)`.
pub fn fringe_visibility(state: &LabeledState) -> Result<f64> {
    let f = state.marginal(&[Dof::Frequency])?;
    let m = f.matrix();
    Ok(2.0 * m[(0, 1)].norm() / (m[(0, 0)].re + m[(1, 1)].re))
}
