//! Whole-row evaluation `B_c(0..=L, m)` with one inverse real FFT.
//!
//! The `2N`-node trapezoidal sums for all `n` at once are the cosine transform of the
//! half-period samples `f(πk/N)`, `k = 0..N`. A length-`2N` complex-to-real transform
//! of the spectrum `[f(0), …, f(π(N−1)/N), 0]` yields every sum except the `θ = π`
//! node, which is added back as `(−1)^n f(π)/(2N)`.

use std::sync::Arc;

use rayon::prelude::*;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{LgfError, Result};
use crate::lattice::{check_alpha, LatticeConfig, LatticePoint, Method, MethodChoice, Tolerance};
use crate::quad1d::{eta_for_delta, n_quad_points, quad_error_bound, root_and_log_k, DEFAULT_DELTA};

/// Default cap on the transform length `2·N_pts`.
pub const DEFAULT_MEMORY_CAP: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowOptions {
    pub delta: f64,
    /// Largest admissible transform length `2·N_pts`.
    pub memory_cap: usize,
    /// Adds the `θ = π` node dropped by the zeroed Nyquist bin. Only tests turn this off.
    pub nyquist_correction: bool,
}

impl Default for RowOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            memory_cap: DEFAULT_MEMORY_CAP,
            nyquist_correction: true,
        }
    }
}

/// One row `B_c(n, m)`, `n = 0..=L`, with the plan that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgfRow {
    pub m: usize,
    pub values: Vec<f64>,
    pub cfg: LatticeConfig,
    pub tol: Tolerance,
    /// Half-period sample count; the equivalent trapezoidal rule has twice as many nodes.
    pub n_pts_used: usize,
    pub method: MethodChoice,
}

/// Values `B_c(n, m)` on `[0, L] × [0, M]`, stored by row `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgfTable {
    pub cfg: LatticeConfig,
    pub tol: Tolerance,
    pub method: MethodChoice,
    rows: Vec<Vec<f64>>,
}

impl LgfTable {
    /// `rows[m][n]`; every row must have the same length.
    pub fn from_rows(
        cfg: LatticeConfig,
        tol: Tolerance,
        method: MethodChoice,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(LgfError::InvalidParameter(
                "table rows must be non-empty and of equal length".into(),
            ));
        }
        Ok(Self { cfg, tol, method, rows })
    }

    /// Largest `n` stored.
    pub fn n_max(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// Largest `m` stored.
    pub fn m_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.rows[m]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Value at any point whose canonical form lies in the table.
    pub fn get(&self, p: LatticePoint) -> Option<f64> {
        let p = p.canonical();
        self.rows.get(p.m_index())?.get(p.n_index()).copied()
    }
}

/// Half-period sample count `N_pts` for rows up to `n = len`, and the exact bound of
/// the `2N_pts`-node rule at `n = len`.
///
/// Starts from `max(⌈N_ap/2⌉, len+1)` and adds samples until the bound meets `tol`.
pub fn fft_sample_count(
    cfg: &LatticeConfig,
    tol: Tolerance,
    len: usize,
    opts: &RowOptions,
) -> Result<(usize, f64)> {
    let start = match n_quad_points(cfg, tol, len, opts.delta) {
        Ok(n) => n.div_ceil(2),
        Err(LgfError::DegenerateQuadrature(_)) => 0,
        Err(e) => return Err(e),
    };
    let eta = eta_for_delta(cfg, opts.delta);
    let mut n_pts = start.max(len + 1);
    loop {
        if 2 * n_pts > opts.memory_cap {
            return Err(LgfError::RowTooLong {
                needed: 2 * n_pts,
                cap: opts.memory_cap,
            });
        }
        let bound = quad_error_bound(cfg, len, 2 * n_pts, eta)?;
        if bound <= tol.eps() {
            return Ok((n_pts, bound));
        }
        n_pts += 1;
    }
}

/// `ln K` and `1/(K − 1/K)` at `θ_k = πk/N`, `k = 0..=N`; shared by every row.
struct HalfPeriodNodes {
    ln_k: Vec<f64>,
    inv_root: Vec<f64>,
}

impl HalfPeriodNodes {
    fn new(cfg: &LatticeConfig, n_pts: usize) -> Self {
        let step = std::f64::consts::PI / n_pts as f64;
        let (inv_root, ln_k) = (0..=n_pts)
            .map(|k| {
                // θ = π must be exact so sin(θ/2) = 1.
                let theta = if k == n_pts { std::f64::consts::PI } else { step * k as f64 };
                let (root, ln_k) = root_and_log_k(theta, cfg.alpha1(), cfg.c2());
                (1.0 / root, ln_k)
            })
            .unzip();
        Self { ln_k, inv_root }
    }

    #[inline]
    fn sample(&self, k: usize, m: usize) -> f64 {
        (-(m as f64) * self.ln_k[k]).exp() * self.inv_root[k]
    }
}

struct RowTransform {
    n_pts: usize,
    nodes: HalfPeriodNodes,
    plan: Arc<dyn ComplexToReal<f64>>,
    nyquist_correction: bool,
}

impl RowTransform {
    fn new(cfg: &LatticeConfig, n_pts: usize, opts: &RowOptions) -> Self {
        let plan = RealFftPlanner::<f64>::new().plan_fft_inverse(2 * n_pts);
        Self {
            n_pts,
            nodes: HalfPeriodNodes::new(cfg, n_pts),
            plan,
            nyquist_correction: opts.nyquist_correction,
        }
    }

    fn row(&self, m: usize, len: usize) -> Vec<f64> {
        let n = self.n_pts;
        let mut spectrum = self.plan.make_input_vec();
        for (k, s) in spectrum.iter_mut().take(n).enumerate() {
            *s = Complex::new(self.nodes.sample(k, m), 0.0);
        }
        spectrum[n] = Complex::new(0.0, 0.0);
        let mut out = self.plan.make_output_vec();
        self.plan
            .process(&mut spectrum, &mut out)
            .expect("real spectrum with zero Nyquist bin is a valid input");
        let scale = 1.0 / (2 * n) as f64;
        let tail = if self.nyquist_correction {
            self.nodes.sample(n, m) * scale
        } else {
            0.0
        };
        out.truncate(len + 1);
        for (j, v) in out.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *v = *v * scale + sign * tail;
        }
        out
    }
}

pub fn batch_row(cfg: &LatticeConfig, m: usize, len: usize, tol: Tolerance) -> Result<LgfRow> {
    batch_row_with(cfg, m, len, tol, &RowOptions::default())
}

pub fn batch_row_with(
    cfg: &LatticeConfig,
    m: usize,
    len: usize,
    tol: Tolerance,
    opts: &RowOptions,
) -> Result<LgfRow> {
    let (n_pts, bound) = fft_sample_count(cfg, tol, len, opts)?;
    let transform = RowTransform::new(cfg, n_pts, opts);
    Ok(LgfRow {
        m,
        values: transform.row(m, len),
        cfg: *cfg,
        tol,
        n_pts_used: n_pts,
        method: fft_choice(n_pts, bound),
    })
}

fn fft_choice(n_pts: usize, bound: f64) -> MethodChoice {
    MethodChoice {
        method: Method::FftBatch,
        certificate: bound,
        resolution: 2 * n_pts,
    }
}

/// Rows `m = 0..=m_max`, each of length `len + 1`, computed in parallel.
pub fn batch_table(cfg: &LatticeConfig, m_max: usize, len: usize, tol: Tolerance) -> Result<LgfTable> {
    batch_table_with(cfg, m_max, len, tol, &RowOptions::default())
}

pub fn batch_table_with(
    cfg: &LatticeConfig,
    m_max: usize,
    len: usize,
    tol: Tolerance,
    opts: &RowOptions,
) -> Result<LgfTable> {
    // The bound is uniform in m (K^{-m} <= 1), so one sample count serves every row.
    let (n_pts, bound) = fft_sample_count(cfg, tol, len, opts)?;
    let transform = RowTransform::new(cfg, n_pts, opts);
    let rows = (0..=m_max)
        .into_par_iter()
        .map(|m| transform.row(m, len))
        .collect();
    LgfTable::from_rows(*cfg, tol, fft_choice(n_pts, bound), rows)
}

/// `B_0(n, m) − B_0(0, 0)` on `[0, n_max] × [0, m_max]` as `rows[m][n]`.
///
/// Equal to [`crate::quad1d::unscreened_diff`] with the same (even) node count, but one
/// transform per row: the `−1/(K − 1/K)` part is a constant shared by every `n`, and the
/// `θ = 0` node carries the limit `−m/2` outside the transform.
pub fn unscreened_diff_table(
    alpha1: f64,
    n_max: usize,
    m_max: usize,
    n_pts: usize,
) -> Result<Vec<Vec<f64>>> {
    check_alpha(alpha1)?;
    let n_pts = n_pts + n_pts % 2;
    if n_pts < 16 {
        return Err(LgfError::InvalidParameter(format!(
            "unscreened_diff_table needs at least 16 nodes, got {n_pts}"
        )));
    }
    if n_pts <= n_max {
        return Err(LgfError::TooFewPoints { n_pts, n: n_max });
    }
    let half = n_pts / 2;
    let step = std::f64::consts::PI / half as f64;
    let (inv_root, ln_k): (Vec<f64>, Vec<f64>) = (0..=half)
        .map(|j| {
            let theta = if j == half { std::f64::consts::PI } else { step * j as f64 };
            let (root, ln_k) = root_and_log_k(theta, alpha1, 0.0);
            (if j == 0 { 0.0 } else { 1.0 / root }, ln_k)
        })
        .unzip();
    let shared: f64 = 2.0 * inv_root[1..half].iter().sum::<f64>() + inv_root[half];
    let plan = RealFftPlanner::<f64>::new().plan_fft_inverse(n_pts);
    let inv_n = 1.0 / n_pts as f64;
    let kink_scale = std::f64::consts::PI / (6.0 * (n_pts as f64).powi(2)) / (2.0 * alpha1.sqrt());
    let rows = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let mf = m as f64;
            let mut spectrum = plan.make_input_vec();
            for j in 1..half {
                spectrum[j] = Complex::new((-mf * ln_k[j]).exp() * inv_root[j], 0.0);
            }
            let mut out = plan.make_output_vec();
            plan.process(&mut spectrum, &mut out)
                .expect("real spectrum with zero Nyquist bin is a valid input");
            let at_pi = (-mf * ln_k[half]).exp() * inv_root[half];
            (0..=n_max)
                .map(|n| {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let total = -0.5 * mf + out[n] + sign * at_pi - shared;
                    let nf = n as f64;
                    total * inv_n + kink_scale * (mf * mf * alpha1 - nf * nf)
                })
                .collect()
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad1d::trapezoid_eval;

    fn cfg(alpha1: f64, c2: f64) -> LatticeConfig {
        LatticeConfig::new(alpha1, c2).unwrap()
    }

    fn tol(eps: f64) -> Tolerance {
        Tolerance::new(eps).unwrap()
    }

    fn identity_limit(c: &LatticeConfig) -> f64 {
        (10.0 * f64::EPSILON / c.c2()).max(1e-13)
    }

    #[test]
    fn single_entry_row_is_one_trapezoid_value() {
        let c = cfg(0.7, 0.2);
        for m in [0usize, 1, 6] {
            let row = batch_row(&c, m, 0, tol(1e-12)).unwrap();
            assert_eq!(row.values.len(), 1);
            let direct = trapezoid_eval(&c, LatticePoint::new(0, m as i64), 2 * row.n_pts_used);
            assert!((row.values[0] - direct).abs() < 1e-13);
        }
    }

    #[test]
    fn row_matches_direct_trapezoid() {
        for (a, c2, len) in [(1.0, 1.0, 30usize), (0.5, 0.09, 64), (0.2, 0.0004, 17)] {
            let c = cfg(a, c2);
            for m in [0usize, 3] {
                let row = batch_row(&c, m, len, tol(1e-10)).unwrap();
                assert_eq!(row.values.len(), len + 1);
                assert!(2 * row.n_pts_used > len);
                for (n, v) in row.values.iter().enumerate() {
                    let direct =
                        trapezoid_eval(&c, LatticePoint::new(n as i64, m as i64), 2 * row.n_pts_used);
                    assert!((v - direct).abs() <= identity_limit(&c), "({n},{m}): {v} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn sample_count_follows_the_half_estimate() {
        let c = LatticeConfig::from_c(0.5, 0.1).unwrap();
        let opts = RowOptions::default();
        let (n_pts, bound) = fft_sample_count(&c, tol(1e-10), 99, &opts).unwrap();
        let n_ap = n_quad_points(&c, tol(1e-10), 99, DEFAULT_DELTA).unwrap();
        assert!(n_pts >= n_ap.div_ceil(2) && n_pts <= n_ap.div_ceil(2) + 2);
        assert!(bound <= 1e-10);
        // Rows longer than the estimate still fit.
        let (n_pts, _) = fft_sample_count(&cfg(1.0, 100.0), tol(1e-3), 500, &opts).unwrap();
        assert!(n_pts >= 501);
    }

    #[test]
    fn memory_cap_is_enforced() {
        let opts = RowOptions {
            memory_cap: 1000,
            ..RowOptions::default()
        };
        let err = batch_row_with(&cfg(1.0, 1e-4), 0, 10, tol(1e-14), &opts).unwrap_err();
        assert!(matches!(err, LgfError::RowTooLong { cap: 1000, .. }));
    }

    #[test]
    fn square_table_is_symmetric() {
        let c = cfg(1.0, 0.3);
        let t = batch_table(&c, 12, 12, tol(1e-12)).unwrap();
        for n in 0..=12i64 {
            for m in 0..=12i64 {
                let a = t.get(LatticePoint::new(n, m)).unwrap();
                let b = t.get(LatticePoint::new(m, n)).unwrap();
                assert!((a - b).abs() < 1e-13);
            }
        }
        assert_eq!(t.get(LatticePoint::new(-3, 2)), t.get(LatticePoint::new(3, 2)));
        assert_eq!(t.get(LatticePoint::new(13, 0)), None);
    }

    #[test]
    fn table_rows_equal_single_rows() {
        let c = cfg(0.5, 0.09);
        let t = batch_table(&c, 5, 40, tol(1e-10)).unwrap();
        for m in 0..=5 {
            let row = batch_row(&c, m, 40, tol(1e-10)).unwrap();
            assert_eq!(t.row(m), &row.values[..]);
        }
        assert_eq!(t.method.method, Method::FftBatch);
        assert!(t.method.certificate <= 1e-10);
    }

    #[test]
    fn dropping_the_nyquist_term_shifts_by_the_pi_node() {
        let c = cfg(0.64, 0.09);
        let opts = RowOptions {
            nyquist_correction: false,
            ..RowOptions::default()
        };
        let good = batch_row(&c, 2, 9, tol(1e-10)).unwrap();
        let bad = batch_row_with(&c, 2, 9, tol(1e-10), &opts).unwrap();
        let f_pi = crate::quad1d::integrand(std::f64::consts::PI, &c, 2) / (2 * good.n_pts_used) as f64;
        for n in 0..=9 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((good.values[n] - bad.values[n] - sign * f_pi).abs() < 1e-15);
        }
    }

    #[test]
    fn from_rows_rejects_ragged_input() {
        let c = cfg(1.0, 1.0);
        let choice = fft_choice(4, 0.0);
        assert!(LgfTable::from_rows(c, tol(1e-3), choice, vec![vec![1.0], vec![]]).is_err());
        assert!(LgfTable::from_rows(c, tol(1e-3), choice, vec![]).is_err());
    }

    #[test]
    fn diff_table_matches_pointwise_rule() {
        for (a, n_pts) in [(1.0, 256usize), (0.3, 1000)] {
            let t = unscreened_diff_table(a, 12, 9, n_pts).unwrap();
            assert!(t[0][0].abs() < 1e-13);
            for m in 0..=9usize {
                for n in 0..=12usize {
                    let p = LatticePoint::new(n as i64, m as i64);
                    let d = crate::quad1d::unscreened_diff(a, p, n_pts).unwrap();
                    assert!((t[m][n] - d).abs() < 1e-13, "({n},{m}): {} vs {d}", t[m][n]);
                }
            }
        }
        assert!(unscreened_diff_table(1.0, 40, 0, 32).is_err());
    }
}
