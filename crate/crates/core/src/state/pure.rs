use num_complex::Complex64;
use rand::Rng;

use super::ops::{self, CMatrix};
use super::{canonical, ChannelKind, Dof, LabeledState, Layout, QuantumChannel};
use crate::error::{Error, Result};

/// State vector over labeled qubits, used for sampled trajectories.
///
/// Shares the index convention of [`LabeledState`]. The squared norm plays
/// the role of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    labels: Vec<Dof>,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(labels: &[Dof], amps: Vec<Complex64>) -> Result<Self> {
        let canon = canonical(labels)?;
        if amps.len() != 1 << labels.len() {
            return Err(Error::InvalidState(format!("{} amplitudes for {} labels", amps.len(), labels.len())));
        }
        if canon == labels {
            return Ok(Self { labels: canon, amps });
        }
        let masks = Layout::new(labels).masks(&canon)?;
        let amps = (0..amps.len()).map(|n| amps[Layout::compose(&masks, 0, n)]).collect();
        Ok(Self { labels: canon, amps })
    }

    pub fn qubit(dof: Dof, a: Complex64, b: Complex64) -> Self {
        Self { labels: vec![dof], amps: vec![a, b] }
    }

    pub fn basis(dof: Dof, bit: u8) -> Self {
        let mut amps = vec![ops::ZERO; 2];
        amps[usize::from(bit & 1)] = ops::ONE;
        Self { labels: vec![dof], amps }
    }

    pub fn labels(&self) -> &[Dof] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::InvalidState("cannot normalize a null vector".into()));
        }
        self.amps.iter_mut().for_each(|z| *z /= n);
        Ok(())
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        if let Some(d) = self.labels.iter().find(|d| other.labels.contains(d)) {
            return Err(Error::DuplicateLabel(*d));
        }
        let labels: Vec<Dof> = self.labels.iter().chain(other.labels.iter()).copied().collect();
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Self::new(&labels, amps)
    }

    /// Applies `op` (written in the order of `targets`) in place.
    pub fn apply_op(&mut self, op: &CMatrix, targets: &[Dof]) -> Result<()> {
        let masks = Layout::new(&self.labels).masks(targets)?;
        let all: usize = masks.iter().sum();
        let sub = 1usize << targets.len();
        if op.shape() != (sub, sub) {
            return Err(Error::InvalidChannel(format!("operator shape {:?}", op.shape())));
        }
        let idx: Vec<usize> = (0..sub).map(|s| Layout::compose(&masks, 0, s)).collect();
        let mut buf = vec![ops::ZERO; sub];
        for rest in (0..self.amps.len()).filter(|r| r & all == 0) {
            for (s, b) in buf.iter_mut().enumerate() {
                *b = self.amps[rest | idx[s]];
            }
            for (r, &i) in idx.iter().enumerate() {
                self.amps[rest | i] = (0..sub).map(|s| op[(r, s)] * buf[s]).sum();
            }
        }
        Ok(())
    }

    /// Copy with `op` applied, left unnormalized.
    pub fn branch(&self, op: &CMatrix, targets: &[Dof]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_op(op, targets)?;
        Ok(out)
    }

    /// Applies a unitary channel.
    pub fn apply_unitary(&mut self, ch: &QuantumChannel) -> Result<()> {
        if ch.kind() != ChannelKind::Unitary {
            return Err(Error::InvalidChannel(format!("{:?} is not unitary", ch.kind())));
        }
        self.apply_op(&ch.kraus_ops()[0], ch.targets())
    }

    /// Applies a single-operator channel (projector or filter) without
    /// renormalizing and returns the surviving probability relative to the
    /// incoming norm.
    pub fn filter(&mut self, ch: &QuantumChannel) -> Result<f64> {
        if ch.kraus_ops().len() != 1 {
            return Err(Error::InvalidChannel("filter needs a single operator".into()));
        }
        let before = self.norm_sqr();
        self.apply_op(&ch.kraus_ops()[0], ch.targets())?;
        Ok(self.norm_sqr() / before)
    }

    /// Quantum-jump unravelling of a trace-preserving channel: picks Kraus
    /// branch `k` with probability `‖K_k ψ‖²`, applies it and renormalizes.
    /// Returns the chosen branch index.
    pub fn sample_channel<R: Rng + ?Sized>(&mut self, ch: &QuantumChannel, rng: &mut R) -> Result<usize> {
        if ch.kraus_ops().len() == 1 {
            self.apply_op(&ch.kraus_ops()[0], ch.targets())?;
            self.normalize()?;
            return Ok(0);
        }
        let branches = ch.kraus_ops().iter().map(|op| self.branch(op, ch.targets())).collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = branches.iter().map(PureState::norm_sqr).collect();
        let mut u = rng.random::<f64>() * weights.iter().sum::<f64>();
        // rounding can leave u past the end; fall back to the last live branch
        let mut chosen = weights
            .iter()
            .rposition(|&w| w > 0.0)
            .ok_or_else(|| Error::InvalidChannel("no Kraus branch carries weight".into()))?;
        for (k, &w) in weights.iter().enumerate() {
            if w > 0.0 && u < w {
                chosen = k;
                break;
            }
            u -= w;
        }
        *self = branches.into_iter().nth(chosen).expect("index in range");
        self.normalize()?;
        Ok(chosen)
    }

    /// `(⟨bra| ⊗ I)|ψ⟩` where `bra` is given over `dofs` in that order.
    pub fn contract(&self, dofs: &[Dof], bra: &[Complex64]) -> Result<Self> {
        if bra.len() != 1 << dofs.len() {
            return Err(Error::InvalidState("bra dimension mismatch".into()));
        }
        let layout = Layout::new(&self.labels);
        let dmasks = layout.masks(dofs)?;
        let keep: Vec<Dof> = self.labels.iter().copied().filter(|d| !dofs.contains(d)).collect();
        if keep.is_empty() {
            return Err(Error::EmptyRemainder);
        }
        let kmasks = layout.masks(&keep)?;
        let amps = (0..1usize << keep.len())
            .map(|k| {
                let base = Layout::compose(&kmasks, 0, k);
                bra.iter().enumerate().map(|(d, b)| b.conj() * self.amps[Layout::compose(&dmasks, base, d)]).sum()
            })
            .collect();
        Ok(Self { labels: keep, amps })
    }

    /// Probability of the `|1⟩` outcome of `dof`, relative to the norm.
    pub fn probability_one(&self, dof: Dof) -> Result<f64> {
        let layout = Layout::new(&self.labels);
        let mask = 1 << layout.shift(layout.position(dof)?);
        let p1: f64 = self.amps.iter().enumerate().filter(|(i, _)| i & mask != 0).map(|(_, z)| z.norm_sqr()).sum();
        Ok(p1 / self.norm_sqr())
    }

    pub fn to_density(&self) -> LabeledState {
        LabeledState { labels: self.labels.clone(), matrix: ops::projector(&self.amps) }
    }
}
