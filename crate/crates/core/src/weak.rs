//! Idealized von Neumann pointer model of a weak measurement with post-selection.
//!
//! A one-dimensional Gaussian pointer `phi(x) ~ exp(-x^2 / 4 sigma^2)` on a periodic grid
//! is coupled to the system by a controlled translation: the component `P|psi>` has its
//! pointer displaced by `g`, the rest is left alone. After projecting the system onto
//! `|b>`, the pointer wavefunction is `<b|P|psi> phi(x - g) + <b|(1-P)|psi> phi(x)`.
//! To first order in `g` its mean position is `g Re(w)` and its mean momentum is
//! `2 g Var_p Im(w)`, with `w = <b|P|psi>/<b|psi>` and `Var_p = 1/(4 sigma^2)` (hbar = 1).
//!
//! The translation is applied as a phase in the momentum representation, which is exact
//! on the periodic grid for band-limited wavefunctions, so no interpolation is involved.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::hilbert::{LinearOperator, StateVector, C64};
use crate::kd::conditional_weak_value;

/// Post-selection probabilities below this leave the readout undefined.
pub const MIN_POSTSELECT_PROB: f64 = 1e-12;

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerConfig {
    /// Number of grid points `N`; a power of two, at least 16.
    pub grid_points: usize,
    /// Window length `L`; positions run over `[-L/2, L/2)`.
    pub grid_extent: f64,
    /// Initial position spread `sigma`.
    pub sigma: f64,
    /// Displacement `g` applied to the pointer of the projected component.
    pub coupling: f64,
}

impl Default for PointerConfig {
    fn default() -> Self {
        PointerConfig { grid_points: 512, grid_extent: 20.0, sigma: 1.0, coupling: 0.1 }
    }
}

impl PointerConfig {
    pub fn with_coupling(self, coupling: f64) -> Self {
        PointerConfig { coupling, ..self }
    }

    pub fn spacing(&self) -> f64 {
        self.grid_extent / self.grid_points as f64
    }

    /// Initial momentum variance `1 / (4 sigma^2)`.
    pub fn momentum_variance(&self) -> f64 {
        1.0 / (4.0 * self.sigma * self.sigma)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid_points;
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidPointerConfig(format!("grid_points {n} must be a power of two >= 16")));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidPointerConfig(format!("sigma {} must be positive", self.sigma)));
        }
        if !(self.grid_extent > 8.0 * self.sigma) || !self.grid_extent.is_finite() {
            return Err(Error::InvalidPointerConfig(format!(
                "grid_extent {} must exceed 8 sigma = {}",
                self.grid_extent,
                8.0 * self.sigma
            )));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidPointerConfig("coupling must be finite".to_owned()));
        }
        if self.spacing() > 0.5 * self.sigma {
            return Err(Error::GridTooCoarse(format!(
                "grid spacing {} exceeds sigma/2 = {}",
                self.spacing(),
                0.5 * self.sigma
            )));
        }
        if self.coupling.abs() > 0.5 * self.grid_extent - 4.0 * self.sigma {
            return Err(Error::GridTooCoarse(format!(
                "displacement {} wraps the shifted pointer around the window of length {}",
                self.coupling, self.grid_extent
            )));
        }
        Ok(())
    }

    fn positions(&self) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.grid_points).map(|j| -0.5 * self.grid_extent + j as f64 * dx).collect()
    }

    /// Angular wavenumbers in FFT order.
    fn wavenumbers(&self) -> Vec<f64> {
        let n = self.grid_points;
        (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                2.0 * PI * signed / self.grid_extent
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerReadout {
    pub mean_x: f64,
    pub mean_p: f64,
    pub postselect_prob: f64,
    pub coupling: f64,
}

/// System-pointer wavefunction after the controlled translation: `components[i][j]` is the
/// amplitude for system index `i` and pointer position `x_j`.
#[derive(Debug, Clone)]
pub struct JointState {
    components: Vec<Vec<C64>>,
    spacing: f64,
}

impl JointState {
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * self.spacing
    }

    /// Pointer wavefunction conditioned on the system outcome `b` (unnormalized).
    fn project(&self, b: &StateVector) -> Vec<C64> {
        let n = self.components[0].len();
        let mut chi = vec![C64::from(0.0); n];
        for (bi, comp) in b.amplitudes().iter().zip(&self.components) {
            let w = bi.conj();
            for (c, z) in chi.iter_mut().zip(comp) {
                *c += w * z;
            }
        }
        chi
    }
}

struct Pointer {
    initial: Vec<C64>,
    shifted: Vec<C64>,
}

fn prepare_pointer(cfg: &PointerConfig, planner: &mut FftPlanner<f64>) -> Pointer {
    let n = cfg.grid_points;
    let dx = cfg.spacing();
    let mut initial: Vec<C64> =
        cfg.positions().iter().map(|&x| C64::from((-x * x / (4.0 * cfg.sigma * cfg.sigma)).exp())).collect();
    let norm = (initial.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
    for z in &mut initial {
        *z /= norm;
    }

    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut shifted = initial.clone();
    forward.process(&mut shifted);
    for (z, k) in shifted.iter_mut().zip(cfg.wavenumbers()) {
        *z *= Complex64::from_polar(1.0 / n as f64, -k * cfg.coupling);
    }
    inverse.process(&mut shifted);
    Pointer { initial, shifted }
}

fn check_projector(a_proj: &LinearOperator) -> Result<()> {
    let m = a_proj.matrix();
    let idempotence = (m * m - m).norm();
    let hermiticity = a_proj.hermiticity_defect();
    let deviation = idempotence.max(hermiticity);
    if deviation > PROJECTOR_TOL {
        return Err(Error::NotProjector { deviation });
    }
    Ok(())
}

/// Applies the controlled translation to `psi` times the Gaussian pointer.
pub fn controlled_translation(psi: &StateVector, a_proj: &LinearOperator, cfg: &PointerConfig) -> Result<JointState> {
    cfg.validate()?;
    ensure_dim(psi.dim(), a_proj.dim())?;
    check_projector(a_proj)?;
    let mut planner = FftPlanner::new();
    let pointer = prepare_pointer(cfg, &mut planner);
    let projected = a_proj.apply(psi)?;
    let components = psi
        .amplitudes()
        .iter()
        .zip(projected.iter())
        .map(|(&full, &inside)| {
            let outside = full - inside;
            pointer.shifted.iter().zip(&pointer.initial).map(|(s, i)| inside * s + outside * i).collect()
        })
        .collect();
    Ok(JointState { components, spacing: cfg.spacing() })
}

pub fn simulate_weak_measurement(
    psi: &StateVector,
    a_proj: &LinearOperator,
    b: &StateVector,
    cfg: &PointerConfig,
) -> Result<PointerReadout> {
    ensure_dim(psi.dim(), b.dim())?;
    let joint = controlled_translation(psi, a_proj, cfg)?;
    let chi = joint.project(b);
    let dx = cfg.spacing();

    let postselect_prob = chi.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx;
    if !(postselect_prob >= MIN_POSTSELECT_PROB) {
        return Err(Error::DegeneratePostselection { probability: postselect_prob, threshold: MIN_POSTSELECT_PROB });
    }
    let mean_x =
        cfg.positions().iter().zip(&chi).map(|(x, z)| x * z.norm_sqr()).sum::<f64>() * dx / postselect_prob;

    let mut spectrum = chi;
    FftPlanner::new().plan_fft_forward(cfg.grid_points).process(&mut spectrum);
    let weight: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum();
    let mean_p = cfg.wavenumbers().iter().zip(&spectrum).map(|(k, z)| k * z.norm_sqr()).sum::<f64>() / weight;

    Ok(PointerReadout { mean_x, mean_p, postselect_prob, coupling: cfg.coupling })
}

/// First-order estimate `mean_x/g + i mean_p/(2 g Var_p)`.
pub fn weak_value_estimate(readout: &PointerReadout, cfg: &PointerConfig) -> Result<C64> {
    let g = readout.coupling;
    if g == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    Ok(C64::new(readout.mean_x / g, readout.mean_p / (2.0 * g * cfg.momentum_variance())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub g: f64,
    pub re_est: f64,
    pub im_est: f64,
    pub re_exact: f64,
    pub im_exact: f64,
    pub abs_err: f64,
    pub postselect_prob: f64,
}

impl SweepRow {
    pub fn estimate(&self) -> C64 {
        C64::new(self.re_est, self.im_est)
    }
}

/// Runs the simulation for each coupling and compares against the exact weak value.
pub fn coupling_sweep(
    psi: &StateVector,
    a_proj: &LinearOperator,
    b: &StateVector,
    cfg: &PointerConfig,
    couplings: &[f64],
) -> Result<Vec<SweepRow>> {
    if couplings.is_empty() {
        return Ok(Vec::new());
    }
    for (i, &g) in couplings.iter().enumerate() {
        if g == 0.0 {
            return Err(Error::ZeroCoupling);
        }
        if couplings[..i].contains(&g) {
            return Err(Error::InvalidPointerConfig(format!("coupling {g} listed twice")));
        }
    }
    let unconditioned = b.overlap(psi)?.norm_sqr();
    if unconditioned < MIN_POSTSELECT_PROB {
        return Err(Error::DegeneratePostselection { probability: unconditioned, threshold: MIN_POSTSELECT_PROB });
    }
    let exact = conditional_weak_value(a_proj, psi, b)?;
    couplings
        .iter()
        .map(|&g| {
            let point = cfg.with_coupling(g);
            let readout = simulate_weak_measurement(psi, a_proj, b, &point)?;
            let est = weak_value_estimate(&readout, &point)?;
            Ok(SweepRow {
                g,
                re_est: est.re,
                im_est: est.im,
                re_exact: exact.re,
                im_exact: exact.im,
                abs_err: (est - exact).norm(),
                postselect_prob: readout.postselect_prob,
            })
        })
        .collect()
}

/// Power-law fit `abs_err ~ constant * (|g|/sigma)^order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceFit {
    pub order: f64,
    pub constant: f64,
}

/// Least-squares slope of `ln abs_err` against `ln(|g|/sigma)`; `None` with fewer than
/// two usable rows.
pub fn fit_convergence(rows: &[SweepRow], sigma: f64) -> Option<ConvergenceFit> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_err > 0.0)
        .map(|r| ((r.g.abs() / sigma).ln(), r.abs_err.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let order = sxy / sxx;
    Some(ConvergenceFit { order, constant: (my - order * mx).exp() })
}
