//! Tensor-product trapezoidal rule for the defining Fourier integral
//! `B_c(n, m) = (2π)^{−2} ∫∫ cos(nξ₁) cos(mξ₂) / (c² + 4α₁ sin²(ξ₁/2) + 4 sin²(ξ₂/2)) dξ`.

use rayon::prelude::*;

use crate::error::{LgfError, Result};
use crate::lattice::{LatticeConfig, LatticePoint};
use crate::numerics::CompensatedSum;

/// `cos(2π j k / n)` for `k = 0..n`, reduced exactly so large `j` loses nothing.
fn cos_table(j: usize, n: usize) -> Vec<f64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    (0..n).map(|k| (((j * k) % n) as f64 * step).cos()).collect()
}

fn sin_sq_table(weight: f64, n: usize) -> Vec<f64> {
    let step = std::f64::consts::PI / n as f64;
    (0..n)
        .map(|k| {
            let s = (step * k as f64).sin();
            4.0 * weight * s * s
        })
        .collect()
}

fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid == 0 {
        return Err(LgfError::InvalidParameter("n_grid must be positive".into()));
    }
    Ok(())
}

/// `n_grid²`-node trapezoidal value of `B_c(p)`.
pub fn oracle_2d_quadrature(cfg: &LatticeConfig, p: LatticePoint, n_grid: usize) -> Result<f64> {
    check_grid(n_grid)?;
    let p = p.canonical();
    let cos1 = cos_table(p.n_index(), n_grid);
    let cos2 = cos_table(p.m_index(), n_grid);
    let s1 = sin_sq_table(cfg.alpha1(), n_grid);
    let s2 = sin_sq_table(1.0, n_grid);
    let c2 = cfg.c2();
    let total: CompensatedSum = (0..n_grid)
        .into_par_iter()
        .map(|i| {
            let base = c2 + s1[i];
            let inner: CompensatedSum = (0..n_grid).map(|j| cos2[j] / (base + s2[j])).collect();
            cos1[i] * inner.value()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(total.value() / (n_grid * n_grid) as f64)
}

/// The same rule on `[0, n_max] × [0, m_max]`, returned as `rows[m][n]`.
pub fn oracle_2d_quadrature_table(
    cfg: &LatticeConfig,
    n_max: usize,
    m_max: usize,
    n_grid: usize,
) -> Result<Vec<Vec<f64>>> {
    check_grid(n_grid)?;
    let s1 = sin_sq_table(cfg.alpha1(), n_grid);
    let s2 = sin_sq_table(1.0, n_grid);
    let c2 = cfg.c2();
    // inner[i][m] = Σ_j cos(m ξ_j) / D(ξ_i, ξ_j)
    let cos_m: Vec<Vec<f64>> = (0..=m_max).map(|m| cos_table(m, n_grid)).collect();
    let inner: Vec<Vec<f64>> = (0..n_grid)
        .into_par_iter()
        .map(|i| {
            let base = c2 + s1[i];
            let inv: Vec<f64> = s2.iter().map(|s| 1.0 / (base + s)).collect();
            cos_m
                .iter()
                .map(|cm| cm.iter().zip(&inv).map(|(c, d)| c * d).collect::<CompensatedSum>().value())
                .collect()
        })
        .collect();
    let scale = 1.0 / (n_grid * n_grid) as f64;
    let rows = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            (0..=n_max)
                .map(|n| {
                    let cn = cos_table(n, n_grid);
                    let s: CompensatedSum = (0..n_grid).map(|i| cn[i] * inner[i][m]).collect();
                    s.value() * scale
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

/// Even grid size that resolves `B_c` up to index `max(n, m) = index_max` to roughly `eps`.
///
/// The integrand is analytic in a strip of half-width `τ = 2 asinh(c/(2√α₁))` in `ξ₁`
/// (the narrower direction), so the error falls like `e^{−τ(N − index)}/c²`.
pub fn suggested_grid(cfg: &LatticeConfig, index_max: usize, eps: f64) -> usize {
    let tau = 2.0 * (0.5 * cfg.reduced_screening()).asinh();
    let n = ((1.0 / (eps * cfg.c2())).ln().max(0.0) + 5.0) / tau + 2.0 * index_max as f64 + 8.0;
    let n = n.ceil() as usize;
    n + n % 2
}
