//! Browser bindings for the heatmap and sweep demo in `www/`.
//!
//! Tables come back as flat `Float64Array`s, row-major.

use kdq::weak::{coupling_sweep, PointerConfig};
use kdq::wigner::{discrete_wigner, double_slit_state};
use kdq::{
    computational_basis, fourier_basis, kd_transform, make_pure_density, random_basis, random_density, random_state,
    DensityOperator, OrthonormalBasis, Ordering,
};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn demo_state(dim: usize, kind: &str, seed: u64) -> Result<DensityOperator, String> {
    match kind {
        "pure" => Ok(make_pure_density(&random_state(dim, seed).map_err(err)?)),
        "mixed" => random_density(dim, dim, seed).map_err(err),
        "uniform" => DensityOperator::maximally_mixed(dim).map_err(err),
        "slit" => {
            let psi = double_slit_state(dim, 0, 2).map_err(err)?;
            Ok(make_pure_density(&psi))
        }
        other => Err(format!("unknown state '{other}'")),
    }
}

fn demo_basis(dim: usize, kind: &str, seed: u64) -> Result<OrthonormalBasis, String> {
    match kind {
        "fourier" => fourier_basis(dim).map_err(err),
        "random" => random_basis(dim, seed.wrapping_add(1)).map_err(err),
        "computational" => computational_basis(dim).map_err(err),
        other => Err(format!("unknown basis '{other}'")),
    }
}

/// `[re, im]` pairs of the KD table in the computational basis against `basis_b`.
pub fn kd_table_flat(dim: usize, state: &str, basis_b: &str, seed: u64, ba: bool) -> Result<Vec<f64>, String> {
    let rho = demo_state(dim, state, seed)?;
    let a = computational_basis(dim).map_err(err)?;
    let b = demo_basis(dim, basis_b, seed)?;
    let ordering = if ba { Ordering::BA } else { Ordering::AB };
    let dist = kd_transform(&rho, &a, &b, ordering).map_err(err)?;
    let mut out = Vec::with_capacity(2 * dim * dim);
    for row in dist.rows() {
        for z in row {
            out.push(z.re);
            out.push(z.im);
        }
    }
    Ok(out)
}

pub fn wigner_table_flat(dim: usize, state: &str, seed: u64) -> Result<Vec<f64>, String> {
    let rho = demo_state(dim, state, seed)?;
    let w = discrete_wigner(&rho).map_err(err)?;
    Ok(w.rows().into_iter().flatten().collect())
}

/// Sweep rows `[g, re_est, im_est, re_exact, im_exact]` for a random `d`-level state,
/// weakly measuring `|index_a><index_a|` and post-selecting on Fourier vector `index_b`.
pub fn weak_sweep_flat(
    dim: usize,
    index_a: usize,
    index_b: usize,
    seed: u64,
    couplings: &[f64],
) -> Result<Vec<f64>, String> {
    if index_a >= dim || index_b >= dim {
        return Err(format!("indices must be below {dim}"));
    }
    let psi = random_state(dim, seed).map_err(err)?;
    let a = computational_basis(dim).map_err(err)?;
    let b = fourier_basis(dim).map_err(err)?;
    let cfg = PointerConfig { grid_points: 256, ..PointerConfig::default() };
    let rows = coupling_sweep(&psi, &a.projector(index_a), b.vector(index_b), &cfg, couplings).map_err(err)?;
    Ok(rows.iter().flat_map(|r| [r.g, r.re_est, r.im_est, r.re_exact, r.im_exact]).collect())
}

#[wasm_bindgen]
pub fn kd_table(dim: usize, state: &str, basis_b: &str, seed: u32, ba: bool) -> Result<Vec<f64>, JsValue> {
    kd_table_flat(dim, state, basis_b, seed as u64, ba).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn wigner_table(dim: usize, state: &str, seed: u32) -> Result<Vec<f64>, JsValue> {
    wigner_table_flat(dim, state, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn weak_sweep(dim: usize, index_a: usize, index_b: usize, seed: u32, couplings: Vec<f64>) -> Result<Vec<f64>, JsValue> {
    weak_sweep_flat(dim, index_a, index_b, seed as u64, &couplings).map_err(|e| JsValue::from_str(&e))
}
