//! Quadrature of the heat-kernel form
//! `B_c(n, m) = ∫₀^∞ e^{−c²t} [e^{−2α₁t} I_n(2α₁t)] [e^{−2t} I_m(2t)] dt`.
//!
//! Oracle-grade only: the integral is cut at `t_max`, which leaves a tail of at most
//! `e^{−c² t_max}/c²`. That tail is hopeless at small `c`, which is the point of
//! comparing against it.

use crate::lattice::{LatticeConfig, LatticePoint, Tolerance};
use crate::numerics::{gauss_legendre, CompensatedSum};

/// Gauss–Legendre nodes per dyadic panel.
pub const DEFAULT_PANEL_NODES: usize = 24;

/// Width of the first panel; later panels double.
const FIRST_PANEL: f64 = 1.0 / 64.0;

/// `e^{−x} I_k(x)` for `k = 0..=n_max`, `x ≥ 0`, by Miller's backward recurrence
/// normalized with `Σ_k e^{−x} I_k(x) = 1` over all integer `k`.
pub fn scaled_bessel_sequence(x: f64, n_max: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "scaled Bessel argument must be finite and >= 0");
    let mut out = vec![0.0; n_max + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = n_max + 20 + (100.0 * x).sqrt().ceil() as usize;
    let (mut b_next, mut b) = (0.0f64, 1e-300f64);
    let mut norm = 0.0f64;
    for k in (1..=start).rev() {
        if k <= n_max {
            out[k] = b;
        }
        norm += 2.0 * b;
        let b_prev = (2.0 * k as f64 / x) * b + b_next;
        b_next = b;
        b = b_prev;
        if b > 1e200 {
            b *= 1e-200;
            b_next *= 1e-200;
            norm *= 1e-200;
            out.iter_mut().for_each(|v| *v *= 1e-200);
        }
    }
    out[0] = b;
    norm += b;
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// Truncated heat-kernel quadrature with its tail certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselEstimate {
    pub value: f64,
    /// `e^{−c² t_max}/c²`, an upper bound on the neglected integral.
    pub tail_bound: f64,
    /// Set when `tail_bound` exceeds the requested tolerance.
    pub diverged: bool,
}

/// Integrates on `[0, t_max]` with `n_nodes`-point Gauss–Legendre rules on dyadic panels
/// `[0, h], [h, 2h], [2h, 4h], …` (`h = 1/64`), the last panel clipped at `t_max`.
pub fn oracle_bessel(
    cfg: &LatticeConfig,
    p: LatticePoint,
    t_max: f64,
    n_nodes: usize,
    tol: Tolerance,
) -> BesselEstimate {
    assert!(t_max > 0.0 && t_max.is_finite(), "t_max must be positive and finite");
    let p = p.canonical();
    let (n, m) = (p.n_index(), p.m_index());
    let (nodes, weights) = gauss_legendre(n_nodes.max(1));
    let (a, c2) = (cfg.alpha1(), cfg.c2());
    let integrand = |t: f64| {
        let i_n = scaled_bessel_sequence(2.0 * a * t, n)[n];
        let i_m = scaled_bessel_sequence(2.0 * t, m)[m];
        (-c2 * t).exp() * i_n * i_m
    };
    let mut sum = CompensatedSum::new();
    let (mut lo, mut hi) = (0.0, FIRST_PANEL.min(t_max));
    while lo < t_max {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (x, w) in nodes.iter().zip(&weights) {
            sum.add(half * w * integrand(mid + half * x));
        }
        lo = hi;
        hi = (2.0 * hi).min(t_max);
    }
    let tail_bound = (-c2 * t_max).exp() / c2;
    BesselEstimate {
        value: sum.value(),
        tail_bound,
        diverged: tail_bound > tol.eps(),
    }
}
