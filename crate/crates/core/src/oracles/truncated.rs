//! Exact solve of `L_c u = δ` on the box `[−R, R]²` with zero Dirichlet data outside.
//!
//! The box operator is diagonalized by the discrete sine transform along each axis, so
//! the solve is a pair of dense `(2R+1)²` matrix products and needs no iteration.

use rayon::prelude::*;

use crate::error::{LgfError, Result};
use crate::lattice::{check_alpha, LatticeConfig};

pub const DEFAULT_RADIUS_CAP: usize = 128;

/// Values on `[−R, R]²`; index with lattice coordinates through [`BoxSolution::get`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSolution {
    radius: usize,
    /// Row-major by `m`, then `n`.
    values: Vec<f64>,
}

impl BoxSolution {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn get(&self, n: i64, m: i64) -> Option<f64> {
        let r = self.radius as i64;
        if n.abs() > r || m.abs() > r {
            return None;
        }
        let side = 2 * self.radius + 1;
        Some(self.values[(m + r) as usize * side + (n + r) as usize])
    }
}

pub fn oracle_truncated_solve(cfg: &LatticeConfig, radius: usize) -> Result<BoxSolution> {
    box_solve(cfg.alpha1(), cfg.c2(), radius)
}

/// Unscreened (`c = 0`) box solution shifted so that `u(0, 0) = 0`.
pub fn oracle_truncated_difference(alpha1: f64, radius: usize) -> Result<BoxSolution> {
    check_alpha(alpha1)?;
    let mut sol = box_solve(alpha1, 0.0, radius)?;
    let center = sol.get(0, 0).expect("origin lies in the box");
    sol.values.iter_mut().for_each(|v| *v -= center);
    Ok(sol)
}

fn box_solve(alpha1: f64, c2: f64, radius: usize) -> Result<BoxSolution> {
    if radius > DEFAULT_RADIUS_CAP {
        return Err(LgfError::SolveTooLarge {
            radius,
            cap: DEFAULT_RADIUS_CAP,
        });
    }
    let side = 2 * radius + 1;
    let denom = (side + 1) as f64;
    // sine[j * side + i] = sin(π(j+1)(i+1)/(side+1)), symmetric in (i, j)
    let sine: Vec<f64> = (0..side * side)
        .map(|ji| {
            let (j, i) = (ji / side, ji % side);
            // Reduce (j+1)(i+1) mod 2(side+1) before scaling so the argument stays exact.
            let k = ((j + 1) * (i + 1)) % (2 * (side + 1));
            (std::f64::consts::PI * k as f64 / denom).sin()
        })
        .collect();
    let eig: Vec<f64> = (0..side)
        .map(|j| {
            let s = (0.5 * std::f64::consts::PI * (j + 1) as f64 / denom).sin();
            4.0 * s * s
        })
        .collect();
    let norm = (denom / 2.0) * (denom / 2.0);
    // coef[j2][j1] = s_{j1}(R) s_{j2}(R) / (norm (c² + α₁ μ_{j1} + μ_{j2}))
    let center = |j: usize| sine[j * side + radius];
    let coef: Vec<f64> = (0..side * side)
        .map(|idx| {
            let (j2, j1) = (idx / side, idx % side);
            center(j1) * center(j2) / (norm * (c2 + alpha1 * eig[j1] + eig[j2]))
        })
        .collect();
    // tmp[j2][i1] = Σ_{j1} coef[j2][j1] S[j1][i1]
    let tmp = mat_mul(&coef, &sine, side);
    // u[i2][i1] = Σ_{j2} S[i2][j2] tmp[j2][i1]
    let values = mat_mul(&sine, &tmp, side);
    Ok(BoxSolution { radius, values })
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            let bk = &b[k * n..(k + 1) * n];
            for (o, &bkj) in row.iter_mut().zip(bk) {
                *o += aik * bkj;
            }
        }
    });
    out
}
