//! Single-qubit operators used throughout the simulator.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> CMatrix {
    DMatrix::from_row_slice(2, 2, &[a, b, c, d])
}

pub fn identity(dim: usize) -> CMatrix {
    DMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    mat2(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> CMatrix {
    mat2(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> CMatrix {
    mat2(ONE, ZERO, ZERO, -ONE)
}

/// `exp(-i angle/2 n·σ)` for a unit Bloch vector `axis`.
pub fn rotation(axis: [f64; 3], angle: f64) -> CMatrix {
    let (s, co) = (angle / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    mat2(c(co, -s * nz), c(-s * ny, -s * nx), c(s * ny, -s * nx), c(co, s * nz))
}

/// Free precession `exp(-i phase/2 σ_z)`.
pub fn phase_rotation(phase: f64) -> CMatrix {
    rotation([0.0, 0.0, 1.0], phase)
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &[Complex64], b: &[Complex64]) -> CMatrix {
    DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

pub fn projector(v: &[Complex64]) -> CMatrix {
    outer(v, v)
}

/// Kronecker product, first operand most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
