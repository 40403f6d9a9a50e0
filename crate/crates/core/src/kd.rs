//! Kirkwood-Dirac joint quasi-probabilities.
//!
//! For bases `{|a>}` and `{|b>}` the joint operator with the `a` projection applied first
//! is `Pi(a,b) = |b><b|a><a|`, and the joint quasi-probability of a state is
//! `rho(a,b) = Tr(Pi(a,b) rho) = <b|a><a|rho|b>`. The opposite ordering gives the complex
//! conjugate table. Conditional probabilities `P(m|a,b) = <b|m|a>/<b|a>` are weak values.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::hilbert::{
    DensityOperator, LinearOperator, OrthonormalBasis, StateVector, C64, ZERO,
};
use crate::tolerance::Tolerances;

/// Which projector acts first in `Pi(a,b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Ordering {
    /// `|b><b|a><a|`: project on `a` first.
    #[default]
    AB,
    /// `|a><a|b><b|`: project on `b` first.
    BA,
}

impl Ordering {
    pub fn reversed(self) -> Self {
        match self {
            Ordering::AB => Ordering::BA,
            Ordering::BA => Ordering::AB,
        }
    }
}

impl fmt::Display for Ordering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ordering::AB => "AB",
            Ordering::BA => "BA",
        })
    }
}

impl FromStr for Ordering {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AB" => Ok(Ordering::AB),
            "BA" => Ok(Ordering::BA),
            other => Err(format!("unknown ordering '{other}', expected AB or BA")),
        }
    }
}

/// Joint operator for the pair `(a, b)`.
pub fn kd_operator(a: &StateVector, b: &StateVector, ordering: Ordering) -> Result<LinearOperator> {
    ensure_dim(a.dim(), b.dim())?;
    let (first, second) = match ordering {
        Ordering::AB => (a, b),
        Ordering::BA => (b, a),
    };
    // |second><second|first><first|
    let inner = second.overlap(first)?;
    Ok(LinearOperator::outer(second, first).scale(inner))
}

/// Complex joint table `table[(a, b)]` together with its generating bases.
#[derive(Debug, Clone, PartialEq)]
pub struct KdDistribution {
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    ordering: Ordering,
    table: DMatrix<C64>,
}

impl KdDistribution {
    /// Wraps an externally supplied table, checking unit total and real marginals.
    pub fn new(
        table: DMatrix<C64>,
        basis_a: OrthonormalBasis,
        basis_b: OrthonormalBasis,
        ordering: Ordering,
        tol: &Tolerances,
    ) -> Result<Self> {
        let d = basis_a.dim();
        ensure_dim(d, basis_b.dim())?;
        ensure_dim(d, table.nrows())?;
        ensure_dim(d, table.ncols())?;
        let total = table.sum();
        if (total.re - 1.0).abs() > tol.norm || total.im.abs() > tol.norm {
            return Err(Error::BadTrace { trace_re: total.re, trace_im: total.im });
        }
        let dist = KdDistribution { basis_a, basis_b, ordering, table };
        kd_marginal_a_with(&dist, tol)?;
        kd_marginal_b_with(&dist, tol)?;
        Ok(dist)
    }

    pub fn dim(&self) -> usize {
        self.table.nrows()
    }

    pub fn table(&self) -> &DMatrix<C64> {
        &self.table
    }

    pub fn get(&self, a: usize, b: usize) -> C64 {
        self.table[(a, b)]
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    /// Row-major copy of the table.
    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim()).map(|a| (0..self.dim()).map(|b| self.table[(a, b)]).collect()).collect()
    }
}

/// `overlaps[(b, a)] = <b|a>`.
fn overlap_matrix(basis_a: &OrthonormalBasis, basis_b: &OrthonormalBasis) -> DMatrix<C64> {
    basis_b.unitary().adjoint() * basis_a.unitary()
}

/// KD table of `rho` over the basis pair.
pub fn kd_transform(
    rho: &DensityOperator,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    ordering: Ordering,
) -> Result<KdDistribution> {
    let d = rho.dim();
    ensure_dim(d, basis_a.dim())?;
    ensure_dim(d, basis_b.dim())?;
    let ua = basis_a.unitary();
    let ub = basis_b.unitary();
    let overlaps = overlap_matrix(basis_a, basis_b);
    let table = match ordering {
        Ordering::AB => {
            // <b|a> <a|rho|b>
            let mixed = ua.adjoint() * rho.matrix() * &ub;
            DMatrix::from_fn(d, d, |a, b| overlaps[(b, a)] * mixed[(a, b)])
        }
        Ordering::BA => {
            // <a|b> <b|rho|a>
            let mixed = ub.adjoint() * rho.matrix() * &ua;
            DMatrix::from_fn(d, d, |a, b| overlaps[(b, a)].conj() * mixed[(b, a)])
        }
    };
    Ok(KdDistribution { basis_a: basis_a.clone(), basis_b: basis_b.clone(), ordering, table })
}

pub fn kd_marginal_a(dist: &KdDistribution) -> Result<Vec<f64>> {
    kd_marginal_a_with(dist, &Tolerances::DEFAULT)
}

/// Row sums `sum_b rho(a,b)`; an imaginary part above `tol.imag` is an error.
pub fn kd_marginal_a_with(dist: &KdDistribution, tol: &Tolerances) -> Result<Vec<f64>> {
    real_sums((0..dist.dim()).map(|a| dist.table.row(a).sum()), tol)
}

pub fn kd_marginal_b(dist: &KdDistribution) -> Result<Vec<f64>> {
    kd_marginal_b_with(dist, &Tolerances::DEFAULT)
}

/// Column sums `sum_a rho(a,b)`.
pub fn kd_marginal_b_with(dist: &KdDistribution, tol: &Tolerances) -> Result<Vec<f64>> {
    real_sums((0..dist.dim()).map(|b| dist.table.column(b).sum()), tol)
}

fn real_sums(sums: impl Iterator<Item = C64>, tol: &Tolerances) -> Result<Vec<f64>> {
    sums.enumerate()
        .map(|(index, s)| {
            if s.im.abs() > tol.imag {
                Err(Error::ComplexMarginal { index, imag: s.im })
            } else {
                Ok(s.re)
            }
        })
        .collect()
}

pub fn kd_inverse(dist: &KdDistribution) -> Result<DensityOperator> {
    kd_inverse_with(dist, &Tolerances::DEFAULT)
}

/// Reconstructs the density operator from its KD table.
///
/// Divides out the overlaps to recover the mixed matrix elements `<a|rho|b>` and then
/// changes basis back. Fails with `SingularOverlap` on the first pair with
/// `|<b|a>| <= tol.overlap`.
pub fn kd_inverse_with(dist: &KdDistribution, tol: &Tolerances) -> Result<DensityOperator> {
    let d = dist.dim();
    let overlaps = overlap_matrix(&dist.basis_a, &dist.basis_b);
    for a in 0..d {
        for b in 0..d {
            let magnitude = overlaps[(b, a)].norm();
            if magnitude <= tol.overlap {
                return Err(Error::SingularOverlap { pair: Some((a, b)), magnitude });
            }
        }
    }
    let ua = dist.basis_a.unitary();
    let ub = dist.basis_b.unitary();
    let matrix = match dist.ordering {
        Ordering::AB => {
            let mixed = DMatrix::from_fn(d, d, |a, b| dist.table[(a, b)] / overlaps[(b, a)]);
            &ua * mixed * ub.adjoint()
        }
        Ordering::BA => {
            // mixed[(b, a)] = <b|rho|a>
            let mixed = DMatrix::from_fn(d, d, |b, a| dist.table[(a, b)] / overlaps[(b, a)].conj());
            &ub * mixed * ua.adjoint()
        }
    };
    DensityOperator::with_tolerance(matrix, tol)
}

pub fn conditional_weak_value(m_op: &LinearOperator, a: &StateVector, b: &StateVector) -> Result<C64> {
    conditional_weak_value_with(m_op, a, b, &Tolerances::DEFAULT)
}

/// `<b|m|a> / <b|a>`.
pub fn conditional_weak_value_with(
    m_op: &LinearOperator,
    a: &StateVector,
    b: &StateVector,
    tol: &Tolerances,
) -> Result<C64> {
    let denominator = b.overlap(a)?;
    if denominator.norm() <= tol.overlap {
        return Err(Error::SingularOverlap { pair: None, magnitude: denominator.norm() });
    }
    Ok(m_op.matrix_element(b, a)? / denominator)
}

/// `P(m) = sum_{a,b} P(m|a,b) rho(a,b)` evaluated in the combined form
/// `sum_{a,b} <b|m|a><a|rho|b>`, which needs no division.
pub fn total_probability(
    m_op: &LinearOperator,
    rho: &DensityOperator,
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
) -> Result<C64> {
    let d = rho.dim();
    ensure_dim(d, m_op.dim())?;
    ensure_dim(d, basis_a.dim())?;
    ensure_dim(d, basis_b.dim())?;
    let ua = basis_a.unitary();
    let ub = basis_b.unitary();
    let conditional = ub.adjoint() * m_op.matrix() * &ua;
    let mixed = ua.adjoint() * rho.matrix() * &ub;
    let mut acc = ZERO;
    for a in 0..d {
        for b in 0..d {
            acc += conditional[(b, a)] * mixed[(a, b)];
        }
    }
    Ok(acc)
}
