//! Exact linear algebra over composite systems of named two-level degrees
//! of freedom.
//!
//! Every state carries an ordered label list. Labels are kept in the
//! canonical order `Spin, Frequency, Polarization, Path` and the first label
//! is the most significant bit of a basis index. Basis conventions:
//!
//! | label        | bit 0      | bit 1       |
//! |--------------|------------|-------------|
//! | Spin         | `|↓⟩`      | `|↑⟩`       |
//! | Frequency    | `|ω_red⟩`  | `|ω_blue⟩`  |
//! | Polarization | `|H⟩`      | `|V⟩`       |
//! | Path         | `|T⟩`      | `|R⟩`       |

mod channel;
pub mod ops;
mod pure;

pub use channel::{ChannelKind, QuantumChannel};
pub use pure::PureState;

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use ops::CMatrix;

/// Tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance for eigenvalue positivity and purity tests.
pub const SPECTRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dof {
    Spin,
    Frequency,
    Polarization,
    Path,
}

impl Dof {
    pub const ALL: [Dof; 4] = [Dof::Spin, Dof::Frequency, Dof::Polarization, Dof::Path];
}

impl fmt::Display for Dof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dof::Spin => "spin",
            Dof::Frequency => "frequency",
            Dof::Polarization => "polarization",
            Dof::Path => "path",
        };
        f.write_str(s)
    }
}

/// Checks that labels are distinct and returns them in canonical order.
pub(crate) fn canonical(labels: &[Dof]) -> Result<Vec<Dof>> {
    let mut sorted = labels.to_vec();
    sorted.sort();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(Error::DuplicateLabel(w[0]));
        }
    }
    Ok(sorted)
}

/// Bit position helpers for a fixed label list.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    labels: Vec<Dof>,
}

impl Layout {
    pub fn new(labels: &[Dof]) -> Self {
        Self { labels: labels.to_vec() }
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn position(&self, dof: Dof) -> Result<usize> {
        self.labels.iter().position(|&d| d == dof).ok_or(Error::UnknownLabel(dof))
    }

    /// Shift of the bit for the label at `pos`.
    pub fn shift(&self, pos: usize) -> usize {
        self.labels.len() - 1 - pos
    }

    /// Bit masks of `targets` in the order given, most significant first.
    pub fn masks(&self, targets: &[Dof]) -> Result<Vec<usize>> {
        targets.iter().map(|&t| self.position(t).map(|p| 1 << self.shift(p))).collect()
    }

    /// Index of a full basis state restricted to `masks`.
    pub fn sub_index(masks: &[usize], full: usize) -> usize {
        masks.iter().fold(0, |acc, &m| (acc << 1) | usize::from(full & m != 0))
    }

    /// Inverse of `sub_index`, filling the masked bits of `rest`.
    pub fn compose(masks: &[usize], rest: usize, sub: usize) -> usize {
        let n = masks.len();
        masks.iter().enumerate().fold(rest, |acc, (k, &m)| if (sub >> (n - 1 - k)) & 1 == 1 { acc | m } else { acc })
    }
}

/// Embeds an operator on `targets` into the full space of `labels`.
pub(crate) fn embed(op: &CMatrix, targets: &[Dof], labels: &[Dof]) -> Result<CMatrix> {
    let layout = Layout::new(labels);
    let masks = layout.masks(targets)?;
    let all: usize = masks.iter().sum();
    let dim = layout.dim();
    Ok(DMatrix::from_fn(dim, dim, |i, j| {
        if i & !all == j & !all {
            op[(Layout::sub_index(&masks, i), Layout::sub_index(&masks, j))]
        } else {
            ops::ZERO
        }
    }))
}

/// Density matrix over a canonical, duplicate-free list of labels.
///
/// A trace below one is the probability that the branch was heralded.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledState {
    labels: Vec<Dof>,
    matrix: CMatrix,
}

impl LabeledState {
    /// Builds a state from a density matrix whose basis follows `labels` in
    /// the order given. The result is reordered to canonical form.
    pub fn from_matrix(labels: &[Dof], matrix: CMatrix) -> Result<Self> {
        let canon = canonical(labels)?;
        let dim = 1usize << labels.len();
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidState(format!(
                "matrix shape {:?} does not match {} labels",
                matrix.shape(),
                labels.len()
            )));
        }
        let state = Self { labels: labels.to_vec(), matrix };
        if canon == labels {
            Ok(state)
        } else {
            Ok(state.reorder(&canon))
        }
    }

    /// Pure state `|v⟩⟨v|` from amplitudes ordered as `labels`.
    pub fn from_amplitudes(labels: &[Dof], amplitudes: &[Complex64]) -> Result<Self> {
        Self::from_matrix(labels, ops::projector(amplitudes))
    }

    /// Computational basis state of a single label.
    pub fn basis(dof: Dof, bit: u8) -> Self {
        let mut v = [ops::ZERO; 2];
        v[usize::from(bit & 1)] = ops::ONE;
        Self { labels: vec![dof], matrix: ops::projector(&v) }
    }

    /// Single-label pure state `a|0⟩ + b|1⟩`.
    pub fn qubit(dof: Dof, a: Complex64, b: Complex64) -> Self {
        Self { labels: vec![dof], matrix: ops::projector(&[a, b]) }
    }

    pub fn maximally_mixed(dof: Dof) -> Self {
        Self { labels: vec![dof], matrix: ops::identity(2) * ops::c(0.5, 0.0) }
    }

    pub fn labels(&self) -> &[Dof] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re / self.trace().powi(2)
    }

    /// Multiplies the trace by `factor`, e.g. a detection efficiency.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { labels: self.labels.clone(), matrix: &self.matrix * ops::c(factor, 0.0) }
    }

    /// Heralded (post-selected) state with unit trace.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero-trace state".into()));
        }
        Ok(self.scaled(1.0 / tr))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.hermitian_part()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part()).eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    fn hermitian_part(&self) -> CMatrix {
        (&self.matrix + self.matrix.adjoint()) * ops::c(0.5, 0.0)
    }

    /// Checks hermiticity, positivity and trace bounds.
    pub fn validate(&self) -> Result<()> {
        let herm = ops::max_abs_diff(&self.matrix, &self.matrix.adjoint());
        if herm > ALGEBRA_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if !(tr > 0.0 && tr <= 1.0 + ALGEBRA_TOL) {
            return Err(Error::InvalidState(format!("trace {tr} outside (0, 1]")));
        }
        let min = self.min_eigenvalue();
        if min < -SPECTRAL_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Same state with the basis ordered by `order`, a permutation of the
    /// current labels.
    pub fn reorder(&self, order: &[Dof]) -> Self {
        let from = Layout::new(&self.labels);
        let masks = from.masks(order).expect("reorder requires a permutation of the labels");
        let dim = self.dim();
        // new index n corresponds to old index with bits scattered by masks
        let old_of: Vec<usize> = (0..dim).map(|n| Layout::compose(&masks, 0, n)).collect();
        let matrix = DMatrix::from_fn(dim, dim, |i, j| self.matrix[(old_of[i], old_of[j])]);
        Self { labels: order.to_vec(), matrix }
    }

    /// Matrix in an arbitrary label order, used to compare against
    /// hand-built operators.
    pub fn matrix_in_order(&self, order: &[Dof]) -> Result<CMatrix> {
        if canonical(order)? != self.labels {
            return Err(Error::LabelMismatch { expected: self.labels.clone(), found: order.to_vec() });
        }
        Ok(self.reorder(order).matrix)
    }

    pub fn tensor(&self, other: &LabeledState) -> Result<Self> {
        tensor(self, other)
    }

    pub fn apply(&self, ch: &QuantumChannel) -> Result<Self> {
        apply(self, ch)
    }

    pub fn partial_trace(&self, discard: &[Dof]) -> Result<Self> {
        partial_trace(self, discard)
    }

    /// Keeps only `keep`, tracing out everything else.
    pub fn marginal(&self, keep: &[Dof]) -> Result<Self> {
        let keep = canonical(keep)?;
        for k in &keep {
            if !self.labels.contains(k) {
                return Err(Error::UnknownLabel(*k));
            }
        }
        let discard: Vec<Dof> = self.labels.iter().copied().filter(|d| !keep.contains(d)).collect();
        if discard.is_empty() {
            return Ok(self.clone());
        }
        partial_trace(self, &discard)
    }

    /// `Tr[(op ⊗ I) ρ]` for an operator on `targets`.
    pub fn expectation(&self, op: &CMatrix, targets: &[Dof]) -> Result<Complex64> {
        let full = embed(op, targets, &self.labels)?;
        Ok((full * &self.matrix).trace())
    }
}

/// Tensor product of states on disjoint label sets.
pub fn tensor(a: &LabeledState, b: &LabeledState) -> Result<LabeledState> {
    if let Some(d) = a.labels.iter().find(|d| b.labels.contains(d)) {
        return Err(Error::DuplicateLabel(*d));
    }
    let labels: Vec<Dof> = a.labels.iter().chain(b.labels.iter()).copied().collect();
    LabeledState::from_matrix(&labels, ops::kron(&a.matrix, &b.matrix))
}

/// Applies a channel to the labels it targets; all other labels are left
/// untouched.
pub fn apply(state: &LabeledState, ch: &QuantumChannel) -> Result<LabeledState> {
    let mut out = CMatrix::zeros(state.dim(), state.dim());
    for k in ch.kraus_ops() {
        let full = embed(k, ch.targets(), &state.labels)?;
        out += &full * &state.matrix * full.adjoint();
    }
    Ok(LabeledState { labels: state.labels.clone(), matrix: out })
}

/// Traces out `discard`, which must be a proper subset of the labels.
pub fn partial_trace(state: &LabeledState, discard: &[Dof]) -> Result<LabeledState> {
    let discard = canonical(discard)?;
    let layout = Layout::new(&state.labels);
    let dmasks = layout.masks(&discard)?;
    let keep: Vec<Dof> = state.labels.iter().copied().filter(|d| !discard.contains(d)).collect();
    if keep.is_empty() {
        return Err(Error::EmptyRemainder);
    }
    let kmasks = layout.masks(&keep)?;
    let kdim = 1 << keep.len();
    let ddim = 1 << discard.len();
    let mut out = CMatrix::zeros(kdim, kdim);
    for a in 0..kdim {
        let ia = Layout::compose(&kmasks, 0, a);
        for b in 0..kdim {
            let ib = Layout::compose(&kmasks, 0, b);
            let mut acc = ops::ZERO;
            for d in 0..ddim {
                acc += state.matrix[(Layout::compose(&dmasks, ia, d), Layout::compose(&dmasks, ib, d))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(LabeledState { labels: keep, matrix: out })
}

/// Overlap `⟨t|ρ|t⟩` of a normalized state with a pure target.
pub fn fidelity(state: &LabeledState, target: &LabeledState) -> Result<f64> {
    if state.labels != target.labels {
        return Err(Error::LabelMismatch { expected: target.labels.clone(), found: state.labels.clone() });
    }
    for s in [state, target] {
        let tr = s.trace();
        if (tr - 1.0).abs() > SPECTRAL_TOL {
            return Err(Error::NotNormalized(tr));
        }
    }
    let purity = target.purity();
    if (purity - 1.0).abs() > SPECTRAL_TOL {
        return Err(Error::NonPureTarget(purity));
    }
    let f = (&state.matrix * &target.matrix).trace().re;
    Ok(f.clamp(0.0, 1.0))
}
