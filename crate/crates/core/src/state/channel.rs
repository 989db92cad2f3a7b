use num_complex::Complex64;

use super::ops::{self, CMatrix};
use super::{canonical, Dof, ALGEBRA_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Unitary,
    Cptp,
    Projector,
    /// Single Kraus operator with `K†K ≤ I`, e.g. a lossy spectral filter.
    Filter,
}

/// Kraus map acting on a subset of labels. Operators are written in the
/// basis of `targets` in the order given (first target most significant).
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    targets: Vec<Dof>,
    kraus: Vec<CMatrix>,
    kind: ChannelKind,
}

fn check_shape(targets: &[Dof], ops: &[CMatrix]) -> Result<()> {
    canonical(targets)?;
    let dim = 1usize << targets.len();
    if ops.is_empty() {
        return Err(Error::InvalidChannel("no Kraus operators".into()));
    }
    for k in ops {
        if k.shape() != (dim, dim) {
            return Err(Error::InvalidChannel(format!(
                "operator shape {:?} does not match {} targets",
                k.shape(),
                targets.len()
            )));
        }
    }
    Ok(())
}

impl QuantumChannel {
    pub fn unitary(targets: &[Dof], u: CMatrix) -> Result<Self> {
        check_shape(targets, std::slice::from_ref(&u))?;
        let dev = ops::max_abs_diff(&(u.adjoint() * &u), &ops::identity(u.nrows()));
        if dev > ALGEBRA_TOL {
            return Err(Error::InvalidChannel(format!("U†U deviates from I by {dev:e}")));
        }
        Ok(Self { targets: targets.to_vec(), kraus: vec![u], kind: ChannelKind::Unitary })
    }

    pub fn cptp(targets: &[Dof], kraus: Vec<CMatrix>) -> Result<Self> {
        check_shape(targets, &kraus)?;
        let dim = kraus[0].nrows();
        let sum = kraus.iter().fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let dev = ops::max_abs_diff(&sum, &ops::identity(dim));
        if dev > ALGEBRA_TOL {
            return Err(Error::InvalidChannel(format!("ΣK†K deviates from I by {dev:e}")));
        }
        Ok(Self { targets: targets.to_vec(), kraus, kind: ChannelKind::Cptp })
    }

    pub fn projector(targets: &[Dof], p: CMatrix) -> Result<Self> {
        check_shape(targets, std::slice::from_ref(&p))?;
        let idem = ops::max_abs_diff(&(&p * &p), &p);
        let herm = ops::max_abs_diff(&p.adjoint(), &p);
        if idem > ALGEBRA_TOL || herm > ALGEBRA_TOL {
            return Err(Error::InvalidChannel(format!("not an orthogonal projector (P²-P: {idem:e}, P†-P: {herm:e})")));
        }
        Ok(Self { targets: targets.to_vec(), kraus: vec![p], kind: ChannelKind::Projector })
    }

    /// Rank-one projector onto `v` (normalized internally).
    pub fn projector_onto(targets: &[Dof], v: &[Complex64]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidChannel("zero projection vector".into()));
        }
        let v: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::projector(targets, ops::projector(&v))
    }

    pub fn filter(targets: &[Dof], k: CMatrix) -> Result<Self> {
        check_shape(targets, std::slice::from_ref(&k))?;
        let m = k.adjoint() * &k;
        let excess = nalgebra::SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if excess > 1.0 + ALGEBRA_TOL {
            return Err(Error::InvalidChannel(format!("filter amplifies (‖K‖² = {excess})")));
        }
        Ok(Self { targets: targets.to_vec(), kraus: vec![k], kind: ChannelKind::Filter })
    }

    /// Mixture of Pauli errors with probabilities `(px, py, pz)`.
    pub fn pauli(target: Dof, px: f64, py: f64, pz: f64) -> Result<Self> {
        let pi = 1.0 - px - py - pz;
        if [px, py, pz, pi].iter().any(|p| !(-ALGEBRA_TOL..=1.0 + ALGEBRA_TOL).contains(p)) {
            return Err(Error::InvalidChannel(format!("Pauli probabilities ({px}, {py}, {pz}) out of range")));
        }
        let r = |p: f64| ops::c(p.max(0.0).sqrt(), 0.0);
        let kraus =
            vec![ops::identity(2) * r(pi), ops::pauli_x() * r(px), ops::pauli_y() * r(py), ops::pauli_z() * r(pz)];
        Self::cptp(&[target], kraus)
    }

    /// Phase damping that multiplies the coherence of `target` by `factor`.
    pub fn dephasing(target: Dof, factor: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&factor) {
            return Err(Error::InvalidChannel(format!("coherence factor {factor}")));
        }
        Self::pauli(target, 0.0, 0.0, (1.0 - factor) / 2.0)
    }

    pub fn targets(&self) -> &[Dof] {
        &self.targets
    }

    pub fn kraus_ops(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// Sequential composition: `self` first, then `next`. Both must act on
    /// the same targets.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if self.targets != next.targets {
            return Err(Error::LabelMismatch { expected: self.targets.clone(), found: next.targets.clone() });
        }
        let kraus: Vec<CMatrix> = next.kraus.iter().flat_map(|b| self.kraus.iter().map(move |a| b * a)).collect();
        let kind = match (self.kind, next.kind) {
            (ChannelKind::Unitary, ChannelKind::Unitary) => ChannelKind::Unitary,
            (ChannelKind::Unitary | ChannelKind::Cptp, ChannelKind::Unitary | ChannelKind::Cptp) => ChannelKind::Cptp,
            _ => ChannelKind::Filter,
        };
        Ok(QuantumChannel { targets: self.targets.clone(), kraus, kind })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ops::*;

    #[test]
    fn rejects_non_unitary() {
        let m = pauli_x() + pauli_z();
        assert!(QuantumChannel::unitary(&[Dof::Spin], m).is_err());
    }

    #[test]
    fn rejects_non_projector() {
        assert!(QuantumChannel::projector(&[Dof::Spin], pauli_x()).is_err());
    }

    #[test]
    fn rejects_wrong_shape() {
        assert!(QuantumChannel::unitary(&[Dof::Spin, Dof::Path], pauli_x()).is_err());
    }

    #[test]
    fn pauli_channel_is_trace_preserving() {
        let ch = QuantumChannel::pauli(Dof::Spin, 0.1, 0.2, 0.3).unwrap();
        assert_eq!(ch.kind(), ChannelKind::Cptp);
        assert!(QuantumChannel::pauli(Dof::Spin, 0.6, 0.6, 0.0).is_err());
    }

    #[test]
    fn filter_must_not_amplify() {
        assert!(QuantumChannel::filter(&[Dof::Path], identity(2) * c(0.5, 0.0)).is_ok());
        assert!(QuantumChannel::filter(&[Dof::Path], identity(2) * c(1.5, 0.0)).is_err());
    }
}
