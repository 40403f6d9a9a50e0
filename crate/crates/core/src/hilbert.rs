//! Finite-dimensional complex Hilbert-space primitives.
//!
//! Every type here is validated at construction and immutable afterwards. Matrices are
//! dense `nalgebra` matrices over `Complex64`; the dimensions of interest are small
//! (`d <= 64`), so nothing is sparse or structured.
//!
//! Randomness always comes from [`seeded_rng`]: ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, with complex Gaussian entries whose real and imaginary
//! parts are independent standard normals drawn in that order.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure_dim, Error, Result};
use crate::tolerance::Tolerances;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Normalized pure state `|psi>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: DVector<C64>,
}

impl StateVector {
    /// Validates finiteness and normalization with the default tolerances.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        Self::with_tolerance(amplitudes, &Tolerances::DEFAULT)
    }

    pub fn with_tolerance(amplitudes: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        check_finite(&amplitudes)?;
        if amplitudes.is_empty() {
            return Err(Error::BadDimension { dim: 0, reason: "state must have at least one amplitude" });
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(StateVector { amps: DVector::from_vec(amplitudes) })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        check_finite(&amplitudes)?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if amplitudes.is_empty() || norm == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        Ok(StateVector { amps: DVector::from_vec(amplitudes) / C64::from(norm) })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index >= dim {
            return Err(Error::BadDimension { dim, reason: "basis index out of range" });
        }
        let mut amps = DVector::from_element(dim, ZERO);
        amps[index] = ONE;
        Ok(StateVector { amps })
    }

    pub(crate) fn from_dvector_unchecked(amps: DVector<C64>) -> Self {
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.amps.iter().copied().collect()
    }

    /// `<self|ket>`.
    pub fn overlap(&self, ket: &StateVector) -> Result<C64> {
        overlap(self, ket)
    }

    /// `|self><self|` as an operator.
    pub fn projector(&self) -> LinearOperator {
        LinearOperator::outer(self, self)
    }

    /// Equality up to a global phase, `| |<self|other>| - 1 | <= tol`.
    pub fn eq_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim() && (self.amps.dotc(&other.amps).norm() - 1.0).abs() <= tol
    }
}

/// Arbitrary square operator; no Hermiticity is assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<C64>,
}

impl LinearOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        check_finite(matrix.as_slice())?;
        Ok(LinearOperator { matrix })
    }

    /// Builds from row-major nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn zeros(dim: usize) -> Self {
        LinearOperator { matrix: DMatrix::from_element(dim, dim, ZERO) }
    }

    pub fn identity(dim: usize) -> Self {
        LinearOperator { matrix: DMatrix::identity(dim, dim) }
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &StateVector, bra: &StateVector) -> Self {
        LinearOperator { matrix: ket.amps.clone() * bra.amps.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        LinearOperator { matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        LinearOperator { matrix: &self.matrix * factor }
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(LinearOperator { matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<Self> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(LinearOperator { matrix: &self.matrix - &other.matrix })
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        ensure_dim(self.dim(), other.dim())?;
        Ok(LinearOperator { matrix: &self.matrix * &other.matrix })
    }

    pub fn apply(&self, ket: &StateVector) -> Result<DVector<C64>> {
        ensure_dim(self.dim(), ket.dim())?;
        Ok(&self.matrix * &ket.amps)
    }

    /// `<bra|self|ket>`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        ensure_dim(self.dim(), bra.dim())?;
        Ok(bra.amps.dotc(&self.apply(ket)?))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }
}

/// Hermitian, positive semidefinite, unit-trace density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(matrix, &Tolerances::DEFAULT)
    }

    pub fn with_tolerance(matrix: DMatrix<C64>, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() == 0 {
            return Err(Error::BadDimension { dim: 0, reason: "density matrix must be non-empty" });
        }
        check_finite(matrix.as_slice())?;
        let deviation = max_abs_diff(&matrix, &matrix.adjoint());
        if deviation > tol.herm {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.norm || trace.im.abs() > tol.norm {
            return Err(Error::BadTrace { trace_re: trace.re, trace_im: trace.im });
        }
        let min_eigenvalue = hermitian_eigenvalues(&matrix).min();
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(DensityOperator { matrix })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::BadDimension { dim, reason: "dimension must be positive" });
        }
        Ok(DensityOperator { matrix: DMatrix::identity(dim, dim) / C64::from(dim as f64) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = hermitian_eigenvalues(&self.matrix).iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Number of eigenvalues above `threshold`.
    pub fn rank(&self, threshold: f64) -> usize {
        self.eigenvalues().into_iter().filter(|&v| v > threshold).count()
    }

    /// Born probability `<psi|rho|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        ensure_dim(self.dim(), psi.dim())?;
        Ok(psi.amps.dotc(&(&self.matrix * &psi.amps)).re)
    }

    pub fn as_operator(&self) -> LinearOperator {
        LinearOperator { matrix: self.matrix.clone() }
    }

    /// Frobenius distance `||self - other||_F`.
    pub fn frobenius_distance(&self, other: &DensityOperator) -> Result<f64> {
        ensure_dim(self.dim(), other.dim())?;
        Ok((&self.matrix - &other.matrix).norm())
    }
}

/// Ordered orthonormal basis `{|v_0>, ..., |v_{d-1}>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    vectors: Vec<StateVector>,
    label: String,
}

impl OrthonormalBasis {
    pub fn new(vectors: Vec<StateVector>, label: impl Into<String>) -> Result<Self> {
        Self::with_tolerance(vectors, label, &Tolerances::DEFAULT)
    }

    pub fn with_tolerance(
        vectors: Vec<StateVector>,
        label: impl Into<String>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = vectors.len();
        if dim == 0 {
            return Err(Error::BadDimension { dim, reason: "basis must contain at least one vector" });
        }
        for v in &vectors {
            ensure_dim(dim, v.dim())?;
        }
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate().skip(i) {
                let target = if i == j { ONE } else { ZERO };
                let deviation = (vi.amps.dotc(&vj.amps) - target).norm();
                if deviation > tol.ortho {
                    return Err(Error::NotOrthonormal { i, j, deviation });
                }
            }
        }
        Ok(OrthonormalBasis { vectors, label: label.into() })
    }

    /// Standard basis `{|0>, ..., |d-1>}`.
    pub fn computational(dim: usize) -> Result<Self> {
        let vectors = (0..dim).map(|i| StateVector::basis_state(dim, i)).collect::<Result<_>>()?;
        Self::new(vectors, "computational")
    }

    /// `{(|0> + |1>)/sqrt2, (|0> - |1>)/sqrt2}`.
    pub fn hadamard2() -> Self {
        let mut basis = fourier_basis(2).expect("d = 2 is valid");
        basis.label = "hadamard2".to_owned();
        basis
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vector(&self, index: usize) -> &StateVector {
        &self.vectors[index]
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn projector(&self, index: usize) -> LinearOperator {
        self.vectors[index].projector()
    }

    /// Unitary whose column `k` is basis vector `k`.
    pub fn unitary(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, k| self.vectors[k].amps[i])
    }

    /// Gram matrix `G[i][j] = <v_i|v_j>`.
    pub fn gram(&self) -> DMatrix<C64> {
        let u = self.unitary();
        u.adjoint() * u
    }
}

/// `<bra|ket>`, conjugate-linear in `bra`.
pub fn overlap(bra: &StateVector, ket: &StateVector) -> Result<C64> {
    ensure_dim(bra.dim(), ket.dim())?;
    Ok(bra.amps.dotc(&ket.amps))
}

/// `|psi><psi|`.
pub fn make_pure_density(psi: &StateVector) -> DensityOperator {
    DensityOperator { matrix: psi.amps.clone() * psi.amps.adjoint() }
}

/// `Tr(op rho) = sum_{i,j} op[i][j] rho[j][i]`.
pub fn product_trace(op: &LinearOperator, rho: &DensityOperator) -> Result<C64> {
    ensure_dim(op.dim(), rho.dim())?;
    Ok(trace_of_product(&op.matrix, &rho.matrix))
}

pub(crate) fn trace_of_product(x: &DMatrix<C64>, y: &DMatrix<C64>) -> C64 {
    let d = x.nrows();
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += x[(i, j)] * y[(j, i)];
        }
    }
    acc
}

/// Discrete Fourier basis: vector `k` has amplitude `exp(2 pi i j k / d)/sqrt(d)` at index `j`.
pub fn fourier_basis(dim: usize) -> Result<OrthonormalBasis> {
    if dim < 2 {
        return Err(Error::BadDimension { dim, reason: "Fourier basis needs d >= 2" });
    }
    let scale = 1.0 / (dim as f64).sqrt();
    let vectors = (0..dim)
        .map(|k| {
            let amps = (0..dim)
                .map(|j| C64::from_polar(scale, 2.0 * PI * ((j * k) % dim) as f64 / dim as f64))
                .collect::<Vec<_>>();
            StateVector::from_dvector_unchecked(DVector::from_vec(amps))
        })
        .collect();
    OrthonormalBasis::new(vectors, "fourier")
}

pub fn computational_basis(dim: usize) -> Result<OrthonormalBasis> {
    OrthonormalBasis::computational(dim)
}

/// The crate-wide deterministic generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_c64<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Haar-like random pure state (normalized complex Gaussian vector).
pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    if dim == 0 {
        return Err(Error::BadDimension { dim, reason: "dimension must be positive" });
    }
    let mut rng = seeded_rng(seed);
    StateVector::normalized((0..dim).map(|_| gaussian_c64(&mut rng)).collect())
}

/// `rho = G G^dagger / Tr(G G^dagger)` with `G` a `dim x rank` complex Gaussian matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let mut rng = seeded_rng(seed);
    let g = DMatrix::from_fn(dim, rank, |_, _| gaussian_c64(&mut rng));
    let mut gg = &g * g.adjoint();
    let trace = gg.trace().re;
    gg /= C64::from(trace);
    // exact Hermitian symmetrization removes rounding asymmetry
    let matrix = (&gg + gg.adjoint()) * C64::from(0.5);
    DensityOperator::new(matrix)
}

/// Random normalized state orthogonal to `v`.
pub fn random_state_orthogonal_to(v: &StateVector, seed: u64) -> Result<StateVector> {
    let dim = v.dim();
    if dim < 2 {
        return Err(Error::BadDimension { dim, reason: "orthogonal complement is empty for d < 2" });
    }
    let mut rng = seeded_rng(seed);
    loop {
        let mut w = DVector::from_fn(dim, |_, _| gaussian_c64(&mut rng));
        // two projection passes for full double-precision orthogonality
        for _ in 0..2 {
            let c = v.amps.dotc(&w);
            w -= &v.amps * c;
        }
        let norm = w.norm();
        if norm > 1e-6 {
            return Ok(StateVector::from_dvector_unchecked(w / C64::from(norm)));
        }
    }
}

/// Random orthonormal basis from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_basis(dim: usize, seed: u64) -> Result<OrthonormalBasis> {
    if dim == 0 {
        return Err(Error::BadDimension { dim, reason: "dimension must be positive" });
    }
    let mut rng = seeded_rng(seed);
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(dim);
    while vectors.len() < dim {
        let mut w = DVector::from_fn(dim, |_, _| gaussian_c64(&mut rng));
        for _ in 0..2 {
            for u in &vectors {
                let c = u.dotc(&w);
                w -= u * c;
            }
        }
        let norm = w.norm();
        if norm > 1e-6 {
            vectors.push(w / C64::from(norm));
        }
    }
    let vectors = vectors.into_iter().map(StateVector::from_dvector_unchecked).collect();
    OrthonormalBasis::new(vectors, format!("random:{seed}"))
}

/// Random Hermitian operator with complex Gaussian entries.
pub fn random_hermitian(dim: usize, seed: u64) -> LinearOperator {
    let mut rng = seeded_rng(seed);
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian_c64(&mut rng));
    LinearOperator { matrix: (&g + g.adjoint()) * C64::from(0.5) }
}

pub(crate) fn hermitian_eigenvalues(matrix: &DMatrix<C64>) -> DVector<f64> {
    let hermitian_part = (matrix + matrix.adjoint()) * C64::from(0.5);
    hermitian_part.symmetric_eigenvalues()
}

pub(crate) fn max_abs_diff(x: &DMatrix<C64>, y: &DMatrix<C64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

pub(crate) fn matrix_from_rows(rows: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    let d = rows.len();
    for row in rows {
        ensure_dim(d, row.len())?;
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn check_finite(values: &[C64]) -> Result<()> {
    match values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}
