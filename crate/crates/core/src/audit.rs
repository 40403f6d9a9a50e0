//! Candidate joint-probability representations and mechanical audits of the three
//! requirements a representation must meet:
//!
//! 1. marginals: `sum_b Pi(a,b) = |a><a|` and `sum_a Pi(a,b) = |b><b|`;
//! 2. eigenstate inputs: `<a'|Pi(a,b)|a'> = delta_{a,a'} |<a|b>|^2` (and likewise for `b`);
//! 3. orthogonal inputs: `<m|Pi(a,b)|m> = 0` whenever `<a|m> = 0` or `<b|m> = 0`.
//!
//! Requirement 3 is decided by the compression `||Q_a Pi(a,b) Q_a||_F` with
//! `Q_a = 1 - |a><a|`: over the complex field a quadratic form vanishes on a subspace
//! exactly when its compression to that subspace does. Random states in the complement
//! are sampled as well, as an independent witness.

use std::fmt;

use nalgebra::DMatrix;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::hilbert::{
    random_state_orthogonal_to, seeded_rng, trace_of_product, DensityOperator, LinearOperator,
    OrthonormalBasis, StateVector, C64,
};
use crate::kd::{kd_operator, Ordering};
use crate::tolerance::Tolerances;

/// A family of `d^2` operators `Pi(a,b)` over a pair of bases.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiProbRep {
    basis_a: OrthonormalBasis,
    basis_b: OrthonormalBasis,
    /// Row-major: entry `a * d + b`.
    operators: Vec<LinearOperator>,
    label: String,
}

impl QuasiProbRep {
    /// `operators[a][b]` is `Pi(a,b)`.
    pub fn new(
        basis_a: OrthonormalBasis,
        basis_b: OrthonormalBasis,
        operators: Vec<Vec<LinearOperator>>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let d = basis_a.dim();
        ensure_dim(d, basis_b.dim())?;
        ensure_dim(d, operators.len())?;
        let mut flat = Vec::with_capacity(d * d);
        for row in operators {
            ensure_dim(d, row.len())?;
            for op in row {
                ensure_dim(d, op.dim())?;
                flat.push(op);
            }
        }
        Ok(QuasiProbRep { basis_a, basis_b, operators: flat, label: label.into() })
    }

    fn from_fn(
        basis_a: &OrthonormalBasis,
        basis_b: &OrthonormalBasis,
        label: impl Into<String>,
        mut f: impl FnMut(usize, usize) -> Result<LinearOperator>,
    ) -> Result<Self> {
        let d = basis_a.dim();
        ensure_dim(d, basis_b.dim())?;
        let mut operators = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                operators.push(f(a, b)?);
            }
        }
        Ok(QuasiProbRep {
            basis_a: basis_a.clone(),
            basis_b: basis_b.clone(),
            operators,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis_a.dim()
    }

    pub fn basis_a(&self) -> &OrthonormalBasis {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &OrthonormalBasis {
        &self.basis_b
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn operator(&self, a: usize, b: usize) -> &LinearOperator {
        &self.operators[a * self.dim() + b]
    }

    /// Same bases and label, operators transformed cell by cell.
    pub fn map_operators(
        &self,
        label: impl Into<String>,
        mut f: impl FnMut(usize, usize, &LinearOperator) -> LinearOperator,
    ) -> Self {
        let d = self.dim();
        let operators = self
            .operators
            .iter()
            .enumerate()
            .map(|(i, op)| f(i / d, i % d, op))
            .collect();
        QuasiProbRep {
            basis_a: self.basis_a.clone(),
            basis_b: self.basis_b.clone(),
            operators,
            label: label.into(),
        }
    }
}

/// The KD family `Pi(a,b) = kd_operator(A_a, B_b, ordering)`.
pub fn kd_rep(basis_a: &OrthonormalBasis, basis_b: &OrthonormalBasis, ordering: Ordering) -> Result<QuasiProbRep> {
    let label = match ordering {
        Ordering::AB => "kd",
        Ordering::BA => "kd-ba",
    };
    QuasiProbRep::from_fn(basis_a, basis_b, label, |a, b| {
        kd_operator(basis_a.vector(a), basis_b.vector(b), ordering)
    })
}

/// `lambda * Pi_AB + (1 - lambda) * Pi_BA`; `lambda = 1/2` is the Hermitian (real-part) choice.
pub fn mixed_kd_rep(basis_a: &OrthonormalBasis, basis_b: &OrthonormalBasis, lambda: f64) -> Result<QuasiProbRep> {
    QuasiProbRep::from_fn(basis_a, basis_b, format!("mixed:{lambda}"), |a, b| {
        let ab = kd_operator(basis_a.vector(a), basis_b.vector(b), Ordering::AB)?;
        let ba = kd_operator(basis_a.vector(a), basis_b.vector(b), Ordering::BA)?;
        ab.scale(C64::from(lambda)).add(&ba.scale(C64::from(1.0 - lambda)))
    })
}

/// Zero-sum sign pattern used by the violator: `(-1)^(a+b)` for even `d`, and
/// identity minus cyclic shift (`delta_{a,b} - delta_{b,a+1}`) for odd `d`.
pub fn violator_sign(d: usize, a: usize, b: usize) -> f64 {
    if d % 2 == 0 {
        if (a + b) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    } else if a == b {
        1.0
    } else if b == (a + 1) % d {
        -1.0
    } else {
        0.0
    }
}

/// KD family plus `epsilon * s(a,b) * C`, where `C = |A_0><A_1| + |A_1><A_0|` and `s` has
/// zero row and column sums. Marginals are untouched; eigenstate inputs pick up
/// correlations.
pub fn make_condition2_violator(
    basis_a: &OrthonormalBasis,
    basis_b: &OrthonormalBasis,
    epsilon: f64,
) -> Result<QuasiProbRep> {
    let d = basis_a.dim();
    if d < 2 {
        return Err(Error::BadDimension { dim: d, reason: "violator needs d >= 2" });
    }
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::BadEpsilon { epsilon });
    }
    let (a0, a1) = (basis_a.vector(0), basis_a.vector(1));
    let c = LinearOperator::outer(a0, a1).add(&LinearOperator::outer(a1, a0))?;
    QuasiProbRep::from_fn(basis_a, basis_b, format!("violator:{epsilon}"), |a, b| {
        let base = kd_operator(basis_a.vector(a), basis_b.vector(b), Ordering::AB)?;
        base.add(&c.scale(C64::from(epsilon * violator_sign(d, a, b))))
    })
}

/// `table[(a, b)] = Tr(Pi(a,b) rho)`.
pub fn evaluate(rep: &QuasiProbRep, rho: &DensityOperator) -> Result<DMatrix<C64>> {
    let d = rep.dim();
    ensure_dim(d, rho.dim())?;
    Ok(DMatrix::from_fn(d, d, |a, b| trace_of_product(rep.operator(a, b).matrix(), rho.matrix())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    C1,
    C2,
    C3,
    Span,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::C1 => "C1",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::Span => "Span",
        })
    }
}

/// Outcome of one audit. `passed` holds exactly when `worst_violation <= tol`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub condition: Condition,
    pub passed: bool,
    pub worst_violation: f64,
    pub witness: String,
    pub samples_used: usize,
    pub seed: u64,
}

/// Running maximum with a lazily rendered witness.
struct Worst {
    value: f64,
    witness: String,
}

impl Worst {
    fn new() -> Self {
        Worst { value: 0.0, witness: "none".to_owned() }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> String) {
        // NaN must surface as a failure
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            self.value = value;
            self.witness = witness();
        }
    }

    fn report(self, condition: Condition, tol: f64, samples_used: usize, seed: u64) -> AuditReport {
        AuditReport {
            condition,
            passed: self.value <= tol,
            worst_violation: self.value,
            witness: self.witness,
            samples_used,
            seed,
        }
    }
}

/// Frobenius distance of each row and column operator sum from the basis projector.
pub fn check_condition1(rep: &QuasiProbRep, tol: f64) -> AuditReport {
    let d = rep.dim();
    let mut worst = Worst::new();
    for a in 0..d {
        let mut sum = LinearOperator::zeros(d).matrix().clone();
        for b in 0..d {
            sum += rep.operator(a, b).matrix();
        }
        let dev = (sum - rep.basis_a.projector(a).matrix()).norm();
        worst.offer(dev, || format!("row a={a}: ||sum_b Pi(a,b) - |a><a| ||_F = {dev:e}"));
    }
    for b in 0..d {
        let mut sum = LinearOperator::zeros(d).matrix().clone();
        for a in 0..d {
            sum += rep.operator(a, b).matrix();
        }
        let dev = (sum - rep.basis_b.projector(b).matrix()).norm();
        worst.offer(dev, || format!("column b={b}: ||sum_a Pi(a,b) - |b><b| ||_F = {dev:e}"));
    }
    worst.report(Condition::C1, tol, 0, 0)
}

/// Feeds every eigenstate of both bases through the representation and compares with
/// `delta |<a|b>|^2`. The reported violation is the largest single-cell deviation.
pub fn check_condition2(rep: &QuasiProbRep, tol: f64) -> AuditReport {
    let d = rep.dim();
    let overlap_sq =
        DMatrix::from_fn(d, d, |a, b| rep.basis_b.vector(b).amplitudes().dotc(rep.basis_a.vector(a).amplitudes()).norm_sqr());
    let mut worst = Worst::new();
    for (side, basis) in [("A", &rep.basis_a), ("B", &rep.basis_b)] {
        for k in 0..d {
            let input = basis.vector(k);
            for a in 0..d {
                for b in 0..d {
                    let value = quadratic_form(rep.operator(a, b), input);
                    let allowed = if side == "A" { a == k } else { b == k };
                    let expected = if allowed { overlap_sq[(a, b)] } else { 0.0 };
                    let dev = (value - C64::from(expected)).norm();
                    worst.offer(dev, || {
                        format!(
                            "input {side}_{k}, cell (a={a}, b={b}): value {}, expected {expected:e} ({})",
                            fmt_c(value),
                            if allowed { "allowed" } else { "forbidden" }
                        )
                    });
                }
            }
        }
    }
    worst.report(Condition::C2, tol, 0, 0)
}

/// Deterministic compression test plus `samples` random orthogonal states per basis vector.
pub fn check_condition3(rep: &QuasiProbRep, samples: usize, seed: u64, tol: f64) -> Result<AuditReport> {
    if samples == 0 {
        return Err(Error::BadSampleCount);
    }
    let d = rep.dim();
    let identity = DMatrix::<C64>::identity(d, d);
    let mut worst = Worst::new();
    let mut rng = seeded_rng(seed);
    let mut samples_used = 0;

    for (side, basis) in [("A", &rep.basis_a), ("B", &rep.basis_b)] {
        for k in 0..d {
            let q = &identity - basis.projector(k).matrix();
            let cells: Vec<(usize, usize)> =
                (0..d).map(|j| if side == "A" { (k, j) } else { (j, k) }).collect();

            for &(a, b) in &cells {
                let op = rep.operator(a, b);
                let compressed = &q * op.matrix() * &q;
                let norm = compressed.norm();
                worst.offer(norm, || {
                    let (m, value) = numerical_radius_witness(&compressed);
                    format!(
                        "compression on complement of {side}_{k}, cell (a={a}, b={b}): ||Q Pi Q||_F = {norm:e}; \
                         state m = {} gives <m|Pi|m> = {}",
                        fmt_state(&m),
                        fmt_c(value)
                    )
                });
            }

            if d < 2 {
                continue;
            }
            for _ in 0..samples {
                let m = random_state_orthogonal_to(basis.vector(k), rng.next_u64())?;
                samples_used += 1;
                for &(a, b) in &cells {
                    let value = quadratic_form(rep.operator(a, b), &m);
                    let magnitude = value.norm();
                    worst.offer(magnitude, || {
                        format!(
                            "sampled m orthogonal to {side}_{k}, cell (a={a}, b={b}): |<m|Pi|m>| = {magnitude:e}; m = {}",
                            fmt_state(m.amplitudes().as_slice())
                        )
                    });
                }
            }
        }
    }
    Ok(worst.report(Condition::C3, tol, samples_used, seed))
}

/// Per-cell distance from `Pi(a,b)` to `span{P_b P_a, P_a P_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanResidual {
    pub residuals: DMatrix<f64>,
    /// Cells with `|<b|a>| <= tol.overlap`, where both products vanish; their residual is
    /// the raw operator norm.
    pub degenerate: DMatrix<bool>,
}

impl SpanResidual {
    /// Largest residual over cells that are not degenerate.
    pub fn max_nondegenerate(&self) -> f64 {
        self.residuals
            .iter()
            .zip(self.degenerate.iter())
            .filter(|(_, &deg)| !deg)
            .map(|(&r, _)| r)
            .fold(0.0, f64::max)
    }
}

pub fn span_residual(rep: &QuasiProbRep) -> SpanResidual {
    span_residual_with(rep, &Tolerances::DEFAULT)
}

pub fn span_residual_with(rep: &QuasiProbRep, tol: &Tolerances) -> SpanResidual {
    let d = rep.dim();
    let mut residuals = DMatrix::zeros(d, d);
    let mut degenerate = DMatrix::from_element(d, d, false);
    for a in 0..d {
        for b in 0..d {
            let pa = rep.basis_a.projector(a);
            let pb = rep.basis_b.projector(b);
            let op = rep.operator(a, b).matrix();
            let overlap = rep.basis_b.vector(b).amplitudes().dotc(rep.basis_a.vector(a).amplitudes()).norm();
            if overlap <= tol.overlap {
                degenerate[(a, b)] = true;
                residuals[(a, b)] = op.norm();
                continue;
            }
            let x1 = pb.matrix() * pa.matrix();
            let x2 = pa.matrix() * pb.matrix();
            residuals[(a, b)] = residual_to_span(op, &x1, &x2);
        }
    }
    SpanResidual { residuals, degenerate }
}

/// Least-squares distance from `op` to `span{x1, x2}` in the Frobenius inner product.
fn residual_to_span(op: &DMatrix<C64>, x1: &DMatrix<C64>, x2: &DMatrix<C64>) -> f64 {
    let inner = |x: &DMatrix<C64>, y: &DMatrix<C64>| x.dotc(y);
    let g11 = inner(x1, x1);
    let g12 = inner(x1, x2);
    let g21 = inner(x2, x1);
    let g22 = inner(x2, x2);
    let r1 = inner(x1, op);
    let r2 = inner(x2, op);
    let det = g11 * g22 - g12 * g21;
    let projection = if det.norm() <= 1e-12 * g11.norm() * g22.norm() {
        // x1 and x2 are collinear (identical basis vectors up to phase)
        x1 * (r1 / g11)
    } else {
        let c1 = (g22 * r1 - g12 * r2) / det;
        let c2 = (g11 * r2 - g21 * r1) / det;
        x1 * c1 + x2 * c2
    };
    (op - projection).norm()
}

/// Span membership as an audit: passes when every nondegenerate residual is `<= tol`.
pub fn check_span(rep: &QuasiProbRep, tol: f64) -> AuditReport {
    let span = span_residual(rep);
    let d = rep.dim();
    let mut worst = Worst::new();
    for a in 0..d {
        for b in 0..d {
            if span.degenerate[(a, b)] {
                continue;
            }
            let r = span.residuals[(a, b)];
            worst.offer(r, || format!("cell (a={a}, b={b}): distance to span{{P_b P_a, P_a P_b}} = {r:e}"));
        }
    }
    let degenerate = span.degenerate.iter().filter(|&&x| x).count();
    let mut report = worst.report(Condition::Span, tol, 0, 0);
    if degenerate > 0 {
        report.witness.push_str(&format!("; {degenerate} degenerate cell(s) with <b|a> = 0 skipped"));
    }
    report
}

fn quadratic_form(op: &LinearOperator, m: &StateVector) -> C64 {
    m.amplitudes().dotc(&(op.matrix() * m.amplitudes()))
}

/// A unit vector approximately maximizing `|<m|X|m>|`, taken from the extreme
/// eigenvectors of the Hermitian and anti-Hermitian parts of `X`.
fn numerical_radius_witness(x: &DMatrix<C64>) -> (Vec<C64>, C64) {
    let half = C64::from(0.5);
    let herm = (x + x.adjoint()) * half;
    let anti = (x - x.adjoint()) * C64::new(0.0, -0.5);
    let mut best: (Vec<C64>, C64) = (vec![C64::from(0.0); x.nrows()], C64::from(0.0));
    for part in [herm, anti] {
        let eig = part.symmetric_eigen();
        for (i, _) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i).into_owned();
            let value = v.dotc(&(x * &v));
            if value.norm() > best.1.norm() {
                best = (v.iter().copied().collect(), value);
            }
        }
    }
    best
}

fn fmt_c(z: C64) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

fn fmt_state(amps: &[C64]) -> String {
    // fix the global phase so the largest amplitude is real and positive
    let pivot = amps.iter().copied().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap_or(C64::from(1.0));
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::from(1.0) };
    let parts: Vec<String> = amps
        .iter()
        .map(|z| {
            let z = z * phase;
            let re = if z.re.abs() < 1e-12 { 0.0 } else { z.re };
            let im = if z.im.abs() < 1e-12 { 0.0 } else { z.im };
            format!("{re:.6}{im:+.6}i")
        })
        .collect();
    format!("[{}]", parts.join(", "))
}
