//! `kdq/1` file formats.
//!
//! Structured data is JSON with a top-level `"schema": "kdq/1"`; tables and sweeps are
//! CSV. Complex numbers are `[re, im]` pairs, indices are 0-based, and floats are written
//! in shortest round-trip form so re-parsing reproduces them bit for bit.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{fourier_basis, random_basis, DensityOperator, OrthonormalBasis, StateVector, C64};
use crate::kd::{kd_marginal_a_with, kd_marginal_b_with, KdDistribution, Ordering};
use crate::tolerance::Tolerances;
use crate::weak::SweepRow;
use crate::wigner::{WignerTable, WignerViolation};

pub const SCHEMA: &str = "kdq/1";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("malformed input: {0}")]
    Parse(String),
    #[error("unsupported schema '{0}', expected '{SCHEMA}'")]
    Schema(String),
    #[error("inconsistent file: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Invalid(#[from] crate::Error),
    #[error("output failed: {0}")]
    Write(String),
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Read { .. } => "read_error",
            FormatError::Parse(_) => "parse_error",
            FormatError::Schema(_) => "schema_mismatch",
            FormatError::Inconsistent(_) => "inconsistent_file",
            FormatError::Invalid(e) => e.code(),
            FormatError::Write(_) => "write_error",
        }
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse(e.to_string())
    }
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError::Write(e.to_string())
    }
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> Self {
        FormatError::Write(e.to_string())
    }
}

type Result<T> = std::result::Result<T, FormatError>;

fn check_schema(schema: &str) -> Result<()> {
    if schema == SCHEMA {
        Ok(())
    } else {
        Err(FormatError::Schema(schema.to_owned()))
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| FormatError::Read { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateData {
    Pure(Vec<C64>),
    Mixed(Vec<Vec<C64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub schema: String,
    pub dim: usize,
    pub kind: StateKind,
    pub data: StateData,
}

/// A validated state from a [`StateFile`].
#[derive(Debug, Clone, PartialEq)]
pub enum LoadedState {
    Pure(StateVector),
    Mixed(DensityOperator),
}

impl LoadedState {
    pub fn dim(&self) -> usize {
        match self {
            LoadedState::Pure(psi) => psi.dim(),
            LoadedState::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density(&self) -> DensityOperator {
        match self {
            LoadedState::Pure(psi) => crate::make_pure_density(psi),
            LoadedState::Mixed(rho) => rho.clone(),
        }
    }
}

impl StateFile {
    pub fn pure(psi: &StateVector) -> Self {
        StateFile { schema: SCHEMA.to_owned(), dim: psi.dim(), kind: StateKind::Pure, data: StateData::Pure(psi.to_vec()) }
    }

    pub fn mixed(rho: &DensityOperator) -> Self {
        StateFile { schema: SCHEMA.to_owned(), dim: rho.dim(), kind: StateKind::Mixed, data: StateData::Mixed(matrix_rows(rho.matrix())) }
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<LoadedState> {
        check_schema(&self.schema)?;
        match (&self.kind, &self.data) {
            (StateKind::Pure, StateData::Pure(amps)) => {
                if amps.len() != self.dim {
                    return Err(crate::Error::DimMismatch { expected: self.dim, found: amps.len() }.into());
                }
                Ok(LoadedState::Pure(StateVector::with_tolerance(amps.clone(), tol)?))
            }
            (StateKind::Mixed, StateData::Mixed(rows)) => {
                if rows.len() != self.dim {
                    return Err(crate::Error::DimMismatch { expected: self.dim, found: rows.len() }.into());
                }
                let m = crate::hilbert::matrix_from_rows(rows)?;
                Ok(LoadedState::Mixed(DensityOperator::with_tolerance(m, tol)?))
            }
            (kind, _) => Err(FormatError::Inconsistent(format!("data does not match kind {kind:?}"))),
        }
    }
}

pub fn parse_state(json: &str, tol: &Tolerances) -> Result<LoadedState> {
    serde_json::from_str::<StateFile>(json)?.validate(tol)
}

pub fn load_state(path: &Path, tol: &Tolerances) -> Result<LoadedState> {
    parse_state(&read_file(path)?, tol)
}

/// Explicit basis: `explicit[k]` lists the amplitudes of basis vector `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    #[serde(default)]
    pub label: Option<String>,
    pub explicit: Vec<Vec<C64>>,
}

impl BasisRecord {
    pub fn from_basis(basis: &OrthonormalBasis) -> Self {
        BasisRecord {
            label: Some(basis.label().to_owned()),
            explicit: basis.vectors().iter().map(StateVector::to_vec).collect(),
        }
    }

    pub fn to_basis(&self, tol: &Tolerances) -> Result<OrthonormalBasis> {
        let vectors = self
            .explicit
            .iter()
            .map(|v| StateVector::with_tolerance(v.clone(), tol))
            .collect::<crate::Result<Vec<_>>>()?;
        Ok(OrthonormalBasis::with_tolerance(vectors, self.label.clone().unwrap_or_else(|| "explicit".to_owned()), tol)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisFile {
    pub schema: String,
    #[serde(flatten)]
    pub basis: BasisRecord,
}

/// Resolves a basis spec: `computational`, `fourier`, `hadamard2`, `random:<seed>`, or a
/// path to a [`BasisFile`].
pub fn resolve_basis(spec: &str, dim: usize, tol: &Tolerances) -> Result<OrthonormalBasis> {
    let basis = match spec {
        "computational" => OrthonormalBasis::computational(dim)?,
        "fourier" => fourier_basis(dim)?,
        "hadamard2" => {
            if dim != 2 {
                return Err(crate::Error::DimMismatch { expected: dim, found: 2 }.into());
            }
            OrthonormalBasis::hadamard2()
        }
        _ if spec.starts_with("random:") => {
            let seed = spec["random:".len()..]
                .parse::<u64>()
                .map_err(|e| FormatError::Parse(format!("bad seed in basis spec '{spec}': {e}")))?;
            random_basis(dim, seed)?
        }
        path => {
            let file: BasisFile = serde_json::from_str(&read_file(Path::new(path))?)?;
            check_schema(&file.schema)?;
            let basis = file.basis.to_basis(tol)?;
            if basis.dim() != dim {
                return Err(crate::Error::DimMismatch { expected: dim, found: basis.dim() }.into());
            }
            basis
        }
    };
    Ok(basis)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdFile {
    pub schema: String,
    pub dim: usize,
    pub ordering: Ordering,
    pub basis_a: BasisRecord,
    pub basis_b: BasisRecord,
    /// `table[a][b]`.
    pub table: Vec<Vec<C64>>,
    pub marginal_a: Vec<f64>,
    pub marginal_b: Vec<f64>,
}

impl KdFile {
    pub fn from_distribution(dist: &KdDistribution, tol: &Tolerances) -> crate::Result<Self> {
        Ok(KdFile {
            schema: SCHEMA.to_owned(),
            dim: dist.dim(),
            ordering: dist.ordering(),
            basis_a: BasisRecord::from_basis(dist.basis_a()),
            basis_b: BasisRecord::from_basis(dist.basis_b()),
            table: dist.rows(),
            marginal_a: kd_marginal_a_with(dist, tol)?,
            marginal_b: kd_marginal_b_with(dist, tol)?,
        })
    }

    pub fn to_distribution(&self, tol: &Tolerances) -> Result<KdDistribution> {
        check_schema(&self.schema)?;
        let basis_a = self.basis_a.to_basis(tol)?;
        let basis_b = self.basis_b.to_basis(tol)?;
        if self.table.len() != self.dim || basis_a.dim() != self.dim {
            return Err(crate::Error::DimMismatch { expected: self.dim, found: self.table.len() }.into());
        }
        let table = crate::hilbert::matrix_from_rows(&self.table)?;
        Ok(KdDistribution::new(table, basis_a, basis_b, self.ordering, tol)?)
    }
}

pub fn parse_kd(json: &str, tol: &Tolerances) -> Result<KdDistribution> {
    serde_json::from_str::<KdFile>(json)?.to_distribution(tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerFile {
    pub schema: String,
    pub dim: usize,
    /// `table[q][p]`.
    pub table: Vec<Vec<f64>>,
    pub position_marginal: Vec<f64>,
    pub momentum_marginal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<WignerViolation>>,
}

impl WignerFile {
    pub fn new(w: &WignerTable, violations: Option<Vec<WignerViolation>>) -> Self {
        WignerFile {
            schema: SCHEMA.to_owned(),
            dim: w.dim(),
            table: w.rows(),
            position_marginal: w.position_marginal(),
            momentum_marginal: w.momentum_marginal(),
            violations,
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub const SWEEP_HEADER: [&str; 7] = ["g", "re_est", "im_est", "re_exact", "im_exact", "abs_err", "postselect_prob"];

/// Sweep CSV; the header is written even when `rows` is empty.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(|e| FormatError::Parse(e.to_string()))).collect()
}

/// Wigner table as CSV: one row per `q`, one column per `p`.
pub fn write_wigner_csv<W: Write>(w: &WignerTable, out: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    let header: Vec<String> = std::iter::once("q".to_owned()).chain((0..w.dim()).map(|p| format!("p{p}"))).collect();
    csv.write_record(&header)?;
    for q in 0..w.dim() {
        let record: Vec<String> =
            std::iter::once(q.to_string()).chain((0..w.dim()).map(|p| w.get(q, p).to_string())).collect();
        csv.write_record(&record)?;
    }
    csv.flush()?;
    Ok(())
}

/// KD table as long-form CSV `a,b,re,im`.
pub fn write_kd_csv<W: Write>(dist: &KdDistribution, out: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["a", "b", "re", "im"])?;
    for a in 0..dist.dim() {
        for b in 0..dist.dim() {
            let z = dist.get(a, b);
            csv.write_record([a.to_string(), b.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    csv.flush()?;
    Ok(())
}

fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
