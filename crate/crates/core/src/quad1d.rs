//! One-dimensional integral representation and its trapezoidal quadrature.
//!
//! Transforming along the `α₁` direction and solving the resulting recurrence in `m`
//! exactly yields
//!
//! ```text
//! B_c(n, m) = 1/(2π) ∫_{−π}^{π} cos(nθ) K(θ)^{−m} / (K − 1/K) dθ,
//! K + 1/K = φ(θ) = λ + c² − 2α₁ cos θ,  K > 1.
//! ```
//!
//! The integrand is periodic and analytic in a strip whose half-width grows with
//! `c²/α₁`, so the equispaced trapezoidal rule converges exponentially. For any slack
//! `η ∈ (0, c²/α₁)` the error of the `N`-node rule at index `n < N` is at most
//! `2 M_η / (e^{γ_η (N−n)} − e^{−γ_η n})`, which fixes the node count a priori.

use std::f64::consts::PI;

use crate::error::{LgfError, Result};
use crate::lattice::{check_alpha, LatticeConfig, LatticePoint, Tolerance};
use crate::numerics::CompensatedSum;

/// Default offset `δ` in `η = (1−δ)² c²/α₁`.
pub const DEFAULT_DELTA: f64 = 0.01;

/// Geometric scan resolution used by [`n_opt_scan`].
pub const N_OPT_GRID: usize = 4096;

/// `K(θ) − 1/K(θ)` and `ln K(θ)` on the real axis.
///
/// `φ − 2 = c² + 4α₁ sin²(θ/2)` is formed directly so that small `c²` keeps full
/// relative accuracy near `θ = 0`.
#[inline]
pub(crate) fn root_and_log_k(theta: f64, alpha1: f64, c2: f64) -> (f64, f64) {
    let s = (0.5 * theta).sin();
    let phi_minus_two = c2 + 4.0 * alpha1 * s * s;
    let root = (phi_minus_two * (phi_minus_two + 4.0)).sqrt();
    let ln_k = (0.5 * (phi_minus_two + root)).ln_1p();
    (root, ln_k)
}

/// `f(θ) = K^{−m} / (K − 1/K)`; finite and positive for every real `θ`.
pub fn integrand(theta: f64, cfg: &LatticeConfig, m: u64) -> f64 {
    let (root, ln_k) = root_and_log_k(theta, cfg.alpha1(), cfg.c2());
    (-(m as f64) * ln_k).exp() / root
}

/// Strip rate `γ_η = ln(1 + η/2 + √((1+η/2)² − 1))`.
pub fn gamma_eta(eta: f64) -> f64 {
    // (1 + η/2)² − 1 = η + η²/4, kept in this form for small η.
    (0.5 * eta + (eta + 0.25 * eta * eta).sqrt()).ln_1p()
}

/// Strip bound `M_η = 1 / (2√(c²/α₁ − η))`.
pub fn m_eta(cfg: &LatticeConfig, eta: f64) -> f64 {
    0.5 / (cfg.c2() / cfg.alpha1() - eta).sqrt()
}

fn check_eta(cfg: &LatticeConfig, eta: f64) -> Result<()> {
    let limit = cfg.c2() / cfg.alpha1();
    if eta > 0.0 && eta < limit {
        Ok(())
    } else {
        Err(LgfError::EtaOutOfRange { eta, limit })
    }
}

pub fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(LgfError::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// `η = (1−δ)² c²/α₁`.
pub fn eta_for_delta(cfg: &LatticeConfig, delta: f64) -> f64 {
    (1.0 - delta) * (1.0 - delta) * cfg.c2() / cfg.alpha1()
}

/// A priori error bound of the `n_pts`-node trapezoidal rule at index `n`.
pub fn quad_error_bound(cfg: &LatticeConfig, n: usize, n_pts: usize, eta: f64) -> Result<f64> {
    check_eta(cfg, eta)?;
    if n_pts <= n {
        return Err(LgfError::TooFewPoints { n_pts, n });
    }
    let gamma = gamma_eta(eta);
    let denom = (gamma * (n_pts - n) as f64).exp() - (-gamma * n as f64).exp();
    Ok(2.0 * m_eta(cfg, eta) / denom)
}

/// `log(1/(ε (c/√α₁) √(2δ − δ²)))`, the numerator of the node-count estimate.
fn log_budget(cfg: &LatticeConfig, tol: Tolerance, delta: f64) -> Result<f64> {
    let arg = 1.0 / (tol.eps() * cfg.reduced_screening() * (2.0 * delta - delta * delta).sqrt());
    if arg <= 1.0 {
        return Err(LgfError::DegenerateQuadrature(arg));
    }
    Ok(arg.ln())
}

/// Closed-form node count `N_ap` for tolerance `eps` up to index `n_max`.
pub fn n_quad_points(
    cfg: &LatticeConfig,
    tol: Tolerance,
    n_max: usize,
    delta: f64,
) -> Result<usize> {
    check_delta(delta)?;
    let gamma = gamma_eta(eta_for_delta(cfg, delta));
    let n = (log_budget(cfg, tol, delta)? / gamma + n_max as f64).ceil();
    Ok(n as usize)
}

/// Minimum over `η` of the smallest `N` with `2M_η e^{−γ_η N} <= eps`, by deterministic scan.
///
/// The grid is geometric in the slack `c²/α₁ − η`, which resolves the optimum near the
/// top of the admissible interval; the `δ = 0.01` point is always included so the
/// result never exceeds `N_ap`.
pub fn n_opt_scan(cfg: &LatticeConfig, tol: Tolerance) -> usize {
    let limit = cfg.c2() / cfg.alpha1();
    let eps = tol.eps();
    let count = |eta: f64| -> usize {
        let slack = limit - eta;
        if !(eta > 0.0 && slack > 0.0) {
            return usize::MAX;
        }
        let needed = (1.0 / (slack.sqrt() * eps)).ln() / gamma_eta(eta);
        if needed <= 0.0 {
            0
        } else {
            needed.ceil() as usize
        }
    };
    let lo = (limit * 1e-9).ln();
    let hi = (limit * (1.0 - f64::EPSILON)).ln();
    let step = (hi - lo) / (N_OPT_GRID - 1) as f64;
    (0..N_OPT_GRID)
        .map(|i| count(limit - (lo + step * i as f64).exp()))
        .chain(std::iter::once(count(eta_for_delta(cfg, DEFAULT_DELTA))))
        .min()
        .unwrap_or(usize::MAX)
}

/// Node count with its certificate `(η, γ_η, M_η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPlan {
    /// Quadrature nodes over the full period.
    pub n_pts: usize,
    pub eta: f64,
    pub gamma_eta: f64,
    pub m_eta: f64,
    pub delta: f64,
    /// Largest `n` the plan certifies.
    pub n_max: usize,
    /// Exact a priori bound at `n_max`; never above the requested tolerance.
    pub predicted_error: f64,
}

impl QuadPlan {
    /// Starts from `N_ap` and adds nodes until the exact bound (not its approximation
    /// `2M_η e^{−γ_η(N−n)}`) meets the tolerance.
    pub fn for_tolerance(
        cfg: &LatticeConfig,
        tol: Tolerance,
        n_max: usize,
        delta: f64,
    ) -> Result<Self> {
        check_delta(delta)?;
        let eta = eta_for_delta(cfg, delta);
        let mut n_pts = match n_quad_points(cfg, tol, n_max, delta) {
            Ok(n) => n.max(n_max + 1),
            Err(LgfError::DegenerateQuadrature(_)) => n_max + 1,
            Err(e) => return Err(e),
        };
        let mut bound = quad_error_bound(cfg, n_max, n_pts, eta)?;
        while bound > tol.eps() {
            n_pts += 1;
            bound = quad_error_bound(cfg, n_max, n_pts, eta)?;
        }
        Ok(Self {
            n_pts,
            eta,
            gamma_eta: gamma_eta(eta),
            m_eta: m_eta(cfg, eta),
            delta,
            n_max,
            predicted_error: bound,
        })
    }
}

/// `(1/N) Σ_{k=1}^{N} cos(nθ_k) f(θ_k)` with `θ_k = 2πk/N − π`.
pub fn trapezoid_eval(cfg: &LatticeConfig, p: LatticePoint, n_pts: usize) -> f64 {
    assert!(n_pts >= 1, "trapezoid_eval needs at least one node");
    let p = p.canonical();
    let n = p.n.unsigned_abs();
    let m = p.m.unsigned_abs();
    let big_n = n_pts as u64;
    // nθ_k = 2π(nk mod N)/N − nπ, reduced exactly in integers.
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let step = 2.0 * PI / n_pts as f64;
    let n_mod = n % big_n;
    let mut sum = CompensatedSum::new();
    for k in 1..=big_n {
        let theta = step * k as f64 - PI;
        let phase = ((n_mod * k) % big_n) as f64 * step;
        sum.add(phase.cos() * integrand(theta, cfg, m));
    }
    sign * sum.value() / n_pts as f64
}

/// Trapezoidal value of `B_0(n, m) − B_0(0, 0)` for the unscreened operator.
///
/// The integrand `(cos(nθ)K^{−m} − 1)/(K − 1/K)` tends to `−m/2` at `θ = 0`, with a
/// `|θ|` kink of slope `(m²α₁ − n²)/(4√α₁)`. The node count is rounded up to an even
/// number so that `θ = 0` is a node carrying the limit value, and the kink's
/// Euler–Maclaurin term `(h²/12)·(m²α₁ − n²)/(2√α₁)` is added back. The rule then
/// converges like `h⁴` (algebraically, unlike the screened case).
pub fn unscreened_diff(alpha1: f64, p: LatticePoint, n_pts: usize) -> Result<f64> {
    check_alpha(alpha1)?;
    if n_pts < 16 {
        return Err(LgfError::InvalidParameter(format!(
            "unscreened_diff needs at least 16 nodes, got {n_pts}"
        )));
    }
    let p = p.canonical();
    if p == LatticePoint::ORIGIN {
        return Ok(0.0);
    }
    let n_pts = n_pts + n_pts % 2;
    let n = p.n.unsigned_abs();
    let m = p.m.unsigned_abs();
    let (nf, mf) = (n as f64, m as f64);
    let big_n = n_pts as u64;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let step = 2.0 * PI / n_pts as f64;
    let n_mod = n % big_n;
    let mut sum = CompensatedSum::new();
    for k in 1..=big_n {
        if 2 * k == big_n {
            sum.add(-0.5 * mf);
            continue;
        }
        let theta = step * k as f64 - PI;
        let (root, ln_k) = root_and_log_k(theta, alpha1, 0.0);
        let phase = ((n_mod * k) % big_n) as f64 * step;
        let numerator = sign * phase.cos() * (-mf * ln_k).exp() - 1.0;
        sum.add(numerator / root);
    }
    let kink_jump = (mf * mf * alpha1 - nf * nf) / (2.0 * alpha1.sqrt());
    let integral = step * sum.value() + step * step / 12.0 * kink_jump;
    Ok(integral / (2.0 * PI))
}
