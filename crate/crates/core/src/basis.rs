use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::state::ops::{self, c, CMatrix, ONE, ZERO};

/// Pauli measurement basis. Outcome `0` is the `+1` eigenstate:
/// `|0⟩`, `(|0⟩+|1⟩)/√2`, `(|0⟩+i|1⟩)/√2` for Z, X, Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Z, Basis::X, Basis::Y];

    pub fn vector(self, outcome: u8) -> [Complex64; 2] {
        let s = if outcome == 0 { 1.0 } else { -1.0 };
        match self {
            Basis::Z if outcome == 0 => [ONE, ZERO],
            Basis::Z => [ZERO, ONE],
            Basis::X => [c(FRAC_1_SQRT_2, 0.0), c(s * FRAC_1_SQRT_2, 0.0)],
            Basis::Y => [c(FRAC_1_SQRT_2, 0.0), c(0.0, s * FRAC_1_SQRT_2)],
        }
    }

    pub fn pauli(self) -> CMatrix {
        match self {
            Basis::Z => ops::pauli_z(),
            Basis::X => ops::pauli_x(),
            Basis::Y => ops::pauli_y(),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
            Basis::Y => "Y",
        })
    }
}
