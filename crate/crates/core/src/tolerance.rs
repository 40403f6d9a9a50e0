//! Numerical tolerances used when validating states, bases and tables.

use serde::{Deserialize, Serialize};

/// Validation thresholds. The defaults leave double-precision headroom up to `d = 64`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Normalization of states and traces.
    pub norm: f64,
    /// Hermiticity of density matrices.
    pub herm: f64,
    /// Orthonormality of basis vectors.
    pub ortho: f64,
    /// Allowed negativity of density-matrix eigenvalues.
    pub psd: f64,
    /// Allowed imaginary part of quantities that must be real.
    pub imag: f64,
    /// Smallest `|<b|a>|` accepted as a divisor.
    pub overlap: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        norm: 1e-10,
        herm: 1e-10,
        ortho: 1e-10,
        psd: 1e-9,
        imag: 1e-10,
        overlap: 1e-8,
    };

    /// Sets every validation tolerance to `tol`. The overlap gate is left alone
    /// since it guards a division rather than a consistency check.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            norm: tol,
            herm: tol,
            ortho: tol,
            psd: tol,
            imag: tol,
            overlap: Self::DEFAULT.overlap,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
