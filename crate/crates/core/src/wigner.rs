//! Discrete Wigner function for odd dimensions.
//!
//! `W(q,p) = (1/d) sum_x exp(-4 pi i p x / d) <q+x|rho|q-x>` with indices mod `d`. The
//! kernel sign is chosen so that `sum_q W(q,p)` is the probability of Fourier basis
//! vector `p` as produced by [`fourier_basis`](crate::hilbert::fourier_basis). Coherences
//! between `q-x` and `q+x` land on the midpoint `q`; for a double-slit superposition that
//! is a position with zero occupation, which is where the third requirement fails.
//!
//! Even dimensions are rejected: `2` has no inverse mod `d`, so the midpoint is undefined.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::audit::QuasiProbRep;
use crate::error::{Error, Result};
use crate::hilbert::{fourier_basis, DensityOperator, LinearOperator, OrthonormalBasis, StateVector, C64};

/// Largest imaginary part tolerated before the table is declared non-real.
pub const REALITY_TOL: f64 = 1e-12;

/// A position marginal at or below this is treated as exactly zero.
pub const ZERO_MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct WignerTable {
    table: DMatrix<f64>,
}

impl WignerTable {
    pub fn dim(&self) -> usize {
        self.table.nrows()
    }

    pub fn get(&self, q: usize, p: usize) -> f64 {
        self.table[(q, p)]
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|q| self.table.row(q).iter().copied().collect()).collect()
    }

    /// `sum_p W(q,p)`.
    pub fn position_marginal(&self) -> Vec<f64> {
        (0..self.dim()).map(|q| self.table.row(q).sum()).collect()
    }

    /// `sum_q W(q,p)`.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        (0..self.dim()).map(|p| self.table.column(p).sum()).collect()
    }
}

fn require_odd(dim: usize) -> Result<()> {
    if dim % 2 == 0 {
        Err(Error::EvenDimension { dim })
    } else {
        Ok(())
    }
}

fn kernel_phase(d: usize, p: usize, x: usize) -> C64 {
    C64::from_polar(1.0, -4.0 * PI * ((p * x) % d) as f64 / d as f64)
}

pub fn discrete_wigner(rho: &DensityOperator) -> Result<WignerTable> {
    let d = rho.dim();
    require_odd(d)?;
    let m = rho.matrix();
    let mut table = DMatrix::zeros(d, d);
    for q in 0..d {
        for p in 0..d {
            let mut acc = C64::from(0.0);
            for x in 0..d {
                acc += kernel_phase(d, p, x) * m[((q + x) % d, (q + d - x) % d)];
            }
            acc /= d as f64;
            if acc.im.abs() > REALITY_TOL {
                return Err(Error::NonRealWigner { q, p, imag: acc.im });
            }
            table[(q, p)] = acc.re;
        }
    }
    Ok(WignerTable { table })
}

/// `(|slit1> + |slit2>)/sqrt2` in odd dimension `dim`, with an on-grid midpoint.
pub fn double_slit_state(dim: usize, slit1: usize, slit2: usize) -> Result<StateVector> {
    require_odd(dim)?;
    if slit1 == slit2 || slit1 >= dim || slit2 >= dim || (slit1 + slit2) % 2 != 0 {
        return Err(Error::BadSlits { dim, slit1, slit2 });
    }
    let mut amps = vec![C64::from(0.0); dim];
    amps[slit1] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    amps[slit2] = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    StateVector::new(amps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerViolation {
    pub q: usize,
    pub p: usize,
    pub value: f64,
}

/// Cells with non-zero `W(q,p)` at a position `q` whose marginal vanishes.
pub fn condition3_violation_report(rho: &DensityOperator) -> Result<Vec<WignerViolation>> {
    let w = discrete_wigner(rho)?;
    let marginal = w.position_marginal();
    let mut out = Vec::new();
    for (q, &mq) in marginal.iter().enumerate() {
        if mq.abs() > ZERO_MARGINAL_TOL {
            continue;
        }
        for p in 0..w.dim() {
            let value = w.get(q, p);
            if value.abs() > ZERO_MARGINAL_TOL {
                out.push(WignerViolation { q, p, value });
            }
        }
    }
    Ok(out)
}

/// Phase-point operators `A(q,p) = (1/d) sum_x exp(-4 pi i p x/d) |q-x><q+x|` over the
/// position / Fourier basis pair, so that `Tr(A(q,p) rho) = W(q,p)`.
pub fn wigner_as_rep(dim: usize) -> Result<QuasiProbRep> {
    require_odd(dim)?;
    let positions = OrthonormalBasis::computational(dim)?;
    let momenta = fourier_basis(dim)?;
    let d = dim;
    let operators = (0..d)
        .map(|q| {
            (0..d)
                .map(|p| {
                    let mut m = DMatrix::from_element(d, d, C64::from(0.0));
                    for x in 0..d {
                        m[((q + d - x) % d, (q + x) % d)] += kernel_phase(d, p, x) / d as f64;
                    }
                    LinearOperator::new(m)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    QuasiProbRep::new(positions, momenta, operators, "wigner")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{check_condition1, check_condition2, check_condition3, evaluate};
    use crate::hilbert::{make_pure_density, random_density};
    use crate::kd::{kd_transform, Ordering};

    #[test]
    fn maximally_mixed_is_uniform() {
        let w = discrete_wigner(&DensityOperator::maximally_mixed(3).unwrap()).unwrap();
        for z in w.table().iter() {
            assert!((z - 1.0 / 9.0).abs() < 1e-15);
        }
    }

    #[test]
    fn position_eigenstate_occupies_one_row() {
        let d = 5;
        for q0 in 0..d {
            let rho = make_pure_density(&StateVector::basis_state(d, q0).unwrap());
            let w = discrete_wigner(&rho).unwrap();
            for q in 0..d {
                for p in 0..d {
                    let expected = if q == q0 { 0.2 } else { 0.0 };
                    assert!((w.get(q, p) - expected).abs() < 1e-15);
                }
            }
            assert!(condition3_violation_report(&rho).unwrap().is_empty());
        }
    }

    #[test]
    fn double_slit_has_weight_between_the_slits() {
        let psi = double_slit_state(5, 1, 3).unwrap();
        let amps = psi.to_vec();
        assert_eq!(amps[0].norm(), 0.0);
        assert!((amps[1].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        let rho = make_pure_density(&psi);
        assert!((rho.matrix()[(1, 3)].re - 0.5).abs() < 1e-15);

        let w = discrete_wigner(&rho).unwrap();
        assert!(w.position_marginal()[2].abs() < 1e-12);
        // x = +-1 pick up rho_31 = rho_13 = 1/2 with phase 1 at p = 0: (1/5)(1/2 + 1/2)
        assert!((w.get(2, 0) - 0.2).abs() < 1e-12);

        let report = condition3_violation_report(&rho).unwrap();
        assert!(report.iter().any(|v| v.q == 2 && v.p == 0 && (v.value - 0.2).abs() < 1e-12));
        assert!(report.iter().all(|v| v.q == 2 || w.position_marginal()[v.q].abs() < 1e-10));

        // KD row for the empty position is identically zero
        let dist = kd_transform(&rho, &OrthonormalBasis::computational(5).unwrap(), &fourier_basis(5).unwrap(), Ordering::AB).unwrap();
        for p in 0..5 {
            assert!(dist.get(2, p).norm() < 1e-12);
        }
    }

    #[test]
    fn slit_validation() {
        assert!(matches!(double_slit_state(5, 1, 2), Err(Error::BadSlits { .. })));
        assert!(matches!(double_slit_state(5, 1, 1), Err(Error::BadSlits { .. })));
        assert!(matches!(double_slit_state(5, 1, 7), Err(Error::BadSlits { .. })));
        assert!(matches!(double_slit_state(4, 0, 2), Err(Error::EvenDimension { dim: 4 })));
    }

    #[test]
    fn even_dimension_rejected() {
        let rho = DensityOperator::maximally_mixed(4).unwrap();
        assert_eq!(discrete_wigner(&rho), Err(Error::EvenDimension { dim: 4 }));
        assert!(wigner_as_rep(4).is_err());
    }

    #[test]
    fn no_violations_for_maximally_mixed() {
        let rho = DensityOperator::maximally_mixed(3).unwrap();
        assert!(condition3_violation_report(&rho).unwrap().is_empty());
    }

    #[test]
    fn marginals_match_born_probabilities() {
        for d in [3, 5, 7] {
            let f = fourier_basis(d).unwrap();
            for seed in 0..20 {
                let rho = random_density(d, d, seed).unwrap();
                let w = discrete_wigner(&rho).unwrap();
                let pm = w.position_marginal();
                let mm = w.momentum_marginal();
                for k in 0..d {
                    assert!((pm[k] - rho.matrix()[(k, k)].re).abs() < 1e-12);
                    assert!((mm[k] - rho.expectation(f.vector(k)).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rep_agrees_with_direct_table_and_fails_condition3() {
        let rep = wigner_as_rep(5).unwrap();
        for seed in 0..10 {
            let rho = random_density(5, 3, seed).unwrap();
            let table = evaluate(&rep, &rho).unwrap();
            let w = discrete_wigner(&rho).unwrap();
            for q in 0..5 {
                for p in 0..5 {
                    assert!((table[(q, p)] - C64::from(w.get(q, p))).norm() < 1e-12);
                }
            }
        }
        assert!(check_condition1(&rep, 1e-12).passed);
        assert!(check_condition2(&rep, 1e-12).passed);
        let c3 = check_condition3(&rep, 4, 0, 1e-10).unwrap();
        assert!(!c3.passed);
        assert!(c3.worst_violation >= 0.2);
    }
}
