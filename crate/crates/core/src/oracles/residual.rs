//! Applies the lattice operator to a tabulated quadrant.

use serde::{Deserialize, Serialize};

use crate::error::{LgfError, Result};
use crate::fft_batch::LgfTable;
use crate::lattice::{LatticeConfig, LatticePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Largest `|L_c u|` over interior points other than the origin.
    pub max_interior_residual: f64,
    /// `|L_c u − 1|` at the origin.
    pub origin_residual_minus_one: f64,
    /// Table points lacking a neighbor (the far edges `n = n_max` and `m = m_max`).
    pub boundary_skipped: usize,
}

/// `(L_c u)(n, m)` using `u` on the canonical quadrant; neighbors across an axis are
/// fetched by symmetry.
pub fn stencil_residual(u: &LgfTable, cfg: &LatticeConfig, n: i64, m: i64) -> Option<f64> {
    let at = |dn: i64, dm: i64| u.get(LatticePoint::new(n + dn, m + dm));
    let centre = at(0, 0)?;
    let horizontal = 2.0 * centre - at(-1, 0)? - at(1, 0)?;
    let vertical = 2.0 * centre - at(0, -1)? - at(0, 1)?;
    Some(cfg.c2() * centre + cfg.alpha1() * horizontal + vertical)
}

pub fn residual_check(table: &LgfTable, cfg: &LatticeConfig) -> Result<ResidualReport> {
    let (n_max, m_max) = (table.n_max(), table.m_max());
    if n_max < 2 || m_max < 2 {
        return Err(LgfError::TableTooSmall {
            rows: m_max + 1,
            cols: n_max + 1,
        });
    }
    let mut report = ResidualReport {
        max_interior_residual: 0.0,
        origin_residual_minus_one: 0.0,
        boundary_skipped: 0,
    };
    for m in 0..=m_max as i64 {
        for n in 0..=n_max as i64 {
            let Some(r) = stencil_residual(table, cfg, n, m) else {
                report.boundary_skipped += 1;
                continue;
            };
            if n == 0 && m == 0 {
                report.origin_residual_minus_one = (r - 1.0).abs();
            } else {
                report.max_interior_residual = report.max_interior_residual.max(r.abs());
            }
        }
    }
    Ok(report)
}
