//! Geometric-series expansion of the LGF for large screening.
//!
//! Expanding `1/(σ(ξ) + c²)` in powers of `λ/(λ+c²)` gives
//!
//! ```text
//! B_c(n, m) = 1/(λ+c²) · Σ_k (λ/(λ+c²))^k g_k(n, m)
//! ```
//!
//! where `g_k` is the `(n, m)` Fourier coefficient of `(ρ(ξ)/λ)^k` with
//! `ρ(ξ) = 2α₁cos ξ₁ + 2cos ξ₂`. Each `g_k` is a finite sum of nonnegative multinomial
//! weights; it is the probability that a `k`-step walk taking `±e₁` with weight `α₁/λ` and
//! `±e₂` with weight `1/λ` ends at `(n, m)`. Truncating after `N` terms leaves an error of
//! at most `(1/c²)(λ/(λ+c²))^N` at every lattice point.

use crate::error::{LgfError, Result};
use crate::lattice::{LatticeConfig, LatticePoint, Tolerance};
use crate::numerics::{ln_factorials, CompensatedSum};

/// Term count together with the truncation bound it guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPlan {
    pub n_terms: usize,
    pub bound: f64,
}

impl SeriesPlan {
    pub fn new(cfg: &LatticeConfig, n_terms: usize) -> Self {
        Self {
            n_terms,
            bound: truncation_bound(cfg, n_terms),
        }
    }

    pub fn for_tolerance(cfg: &LatticeConfig, tol: Tolerance) -> Self {
        Self::new(cfg, terms_needed(cfg, tol))
    }
}

/// Upper bound on `|B_c(p) − G_N(c, p)|`, uniform in `p`.
pub fn truncation_bound(cfg: &LatticeConfig, n_terms: usize) -> f64 {
    (n_terms as f64 * cfg.series_ratio().ln()).exp() / cfg.c2()
}

/// Smallest `N` with `truncation_bound(cfg, N) <= eps`.
pub fn terms_needed(cfg: &LatticeConfig, tol: Tolerance) -> usize {
    let eps = tol.eps();
    let decay = ((cfg.lambda() + cfg.c2()) / cfg.lambda()).ln();
    let estimate = ((1.0 / (eps * cfg.c2())).ln() / decay).ceil();
    let mut n = if estimate.is_finite() && estimate > 0.0 {
        estimate as usize
    } else {
        0
    };
    // The closed form can land one off at the ceiling boundary.
    while truncation_bound(cfg, n) > eps {
        n += 1;
    }
    while n > 0 && truncation_bound(cfg, n - 1) <= eps {
        n -= 1;
    }
    n
}

/// `(1/c²)(λ/(λ+c²))^(n+m)`, an upper bound on `|B_c(n, m)|`.
pub fn decay_bound(cfg: &LatticeConfig, p: LatticePoint) -> f64 {
    truncation_bound(cfg, p.l1() as usize)
}

/// Evaluates `g_k` with precomputed logarithms; `ln_fact` must cover `0..=k`.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator {
    cfg: LatticeConfig,
    ln_fact: Vec<f64>,
    ln_alpha: f64,
    ln_lambda: f64,
}

impl SeriesEvaluator {
    pub fn new(cfg: LatticeConfig, k_max: usize) -> Self {
        Self {
            cfg,
            ln_fact: ln_factorials(k_max),
            ln_alpha: cfg.alpha1().ln(),
            ln_lambda: cfg.lambda().ln(),
        }
    }

    pub fn k_max(&self) -> usize {
        self.ln_fact.len() - 1
    }

    /// `g_k(p)`; `p` must be canonical and `k <= k_max`.
    pub fn g_k(&self, k: usize, p: LatticePoint) -> f64 {
        debug_assert!(p.is_canonical());
        assert!(k <= self.k_max(), "g_k: k = {k} beyond table of {}", self.k_max());
        let n = p.n_index();
        let m = p.m_index();
        if k < n + m || (k - n - m) % 2 == 1 {
            return 0.0;
        }
        let half = (k - n - m) / 2;
        let lf = &self.ln_fact;
        let ln_lambda_k = k as f64 * self.ln_lambda;
        let alpha2 = self.cfg.alpha1() * self.cfg.alpha1();
        // term(l+1)/term(l), decreasing in l
        let ratio = |l: usize| {
            let (a, b) = ((half - l) as f64, (half - l + m) as f64);
            alpha2 * a * b / ((l + 1) as f64 * (n + l + 1) as f64)
        };
        let peak = (0..half).find(|&l| ratio(l) < 1.0).unwrap_or(half);
        let ln_peak =
            lf[k] - lf[peak] - lf[n + peak] - lf[half - peak] - lf[half - peak + m] + (n + 2 * peak) as f64 * self.ln_alpha
                - ln_lambda_k;
        let top = ln_peak.exp();
        debug_assert!(top <= 1.0 + 1e-12, "multinomial summand {top} exceeds 1");
        // Summands fall off monotonically on both sides of the peak.
        let mut sum = CompensatedSum::new();
        sum.add(top);
        let mut t = top;
        for l in (0..peak).rev() {
            t /= ratio(l);
            if t == 0.0 {
                break;
            }
            sum.add(t);
        }
        t = top;
        for l in peak..half {
            t *= ratio(l);
            if t == 0.0 {
                break;
            }
            sum.add(t);
        }
        let g = sum.value();
        debug_assert!(g <= 1.0 + 1e-12, "g_k = {g} exceeds 1");
        g
    }

    /// `G_N(c, p)`, skipping the `k` for which `g_k(p)` vanishes.
    pub fn partial_sum(&self, p: LatticePoint, n_terms: usize) -> f64 {
        let p = p.canonical();
        let start = p.l1() as usize;
        if n_terms <= start {
            return 0.0;
        }
        assert!(n_terms - 1 <= self.k_max(), "series table too short for {n_terms} terms");
        let ln_ratio = self.cfg.series_ratio().ln();
        let mut sum = CompensatedSum::new();
        for k in (start..n_terms).step_by(2) {
            let g = self.g_k(k, p);
            sum.add((k as f64 * ln_ratio).exp() * g);
        }
        sum.value() / (self.cfg.lambda() + self.cfg.c2())
    }

    /// Every partial sum `G_1 .. G_{n_max}` at `p`; entry `i` holds `G_{i+1}`.
    pub fn partial_sums(&self, p: LatticePoint, n_max: usize) -> Vec<f64> {
        let p = p.canonical();
        let ln_ratio = self.cfg.series_ratio().ln();
        let scale = 1.0 / (self.cfg.lambda() + self.cfg.c2());
        let mut sum = CompensatedSum::new();
        (0..n_max)
            .map(|k| {
                let g = self.g_k(k, p);
                if g > 0.0 {
                    sum.add((k as f64 * ln_ratio).exp() * g);
                }
                sum.value() * scale
            })
            .collect()
    }
}

/// `g_k(p)` for a single `(k, p)`; builds its own log-factorial table.
pub fn g_k(k: usize, p: LatticePoint, cfg: &LatticeConfig) -> f64 {
    SeriesEvaluator::new(*cfg, k).g_k(k, p.canonical())
}

/// The `N`-term approximation `G_N(c, p)` with `N = plan.n_terms`.
pub fn series_eval(cfg: &LatticeConfig, p: LatticePoint, plan: &SeriesPlan) -> f64 {
    if plan.n_terms == 0 {
        return 0.0;
    }
    SeriesEvaluator::new(*cfg, plan.n_terms - 1).partial_sum(p, plan.n_terms)
}

/// Leading-order far-field form of the square-lattice (`α₁ = 1`) LGF.
///
/// Diagnostic only: its relative error decays like `1/r`, so it never certifies a
/// tolerance and the dispatcher does not use it.
pub fn asymptotic_far_field(c: f64, p: LatticePoint) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(LgfError::NotScreened(c * c));
    }
    if p.n == 0 && p.m == 0 {
        return Err(LgfError::InvalidParameter(
            "far-field form is undefined at the origin".into(),
        ));
    }
    let (n, m) = (p.n.abs() as f64, p.m.abs() as f64);
    let r = n.hypot(m);
    let mu = m / r;
    let nu = n / r;
    let a = 2.0 + 0.5 * c * c;
    let skew = mu * mu - nu * nu;
    let x = (a * a - 4.0) / (1.0 + (1.0 - (1.0 - 4.0 / (a * a)) * skew * skew).sqrt());
    let mixing = mu * mu * (1.0 + nu * nu * x).sqrt() + nu * nu * (1.0 + mu * mu * x).sqrt();
    let phase = mu * (1.0 + mu * mu * x).sqrt().acosh() + nu * (1.0 + nu * nu * x).sqrt().acosh();
    Ok(0.5
        * (2.0 * std::f64::consts::PI * r).powf(-0.5)
        * x.powf(-0.25)
        * mixing.powf(-0.5)
        * (-r * phase).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(alpha1: f64, c2: f64) -> LatticeConfig {
        LatticeConfig::new(alpha1, c2).unwrap()
    }

    fn binom(n: u64, k: u64) -> u128 {
        if k > n {
            return 0;
        }
        let k = k.min(n - k);
        let mut r: u128 = 1;
        for i in 0..k {
            r = r * (n - i) as u128 / (i + 1) as u128;
        }
        r
    }

    /// Fourier coefficient of `(2α cos ξ₁ + 2 cos ξ₂)^k / λ^k` by exact binomial expansion:
    /// `(2cos ξ)^j` has coefficient `C(j, (j+n)/2)` at `e^{inξ}`.
    fn g_k_binomial_oracle(k: u64, n: u64, m: u64, alpha: f64) -> f64 {
        let lambda = 2.0 + 2.0 * alpha;
        let mut total = 0.0;
        for j in 0..=k {
            let rest = k - j;
            if j < n || (j - n) % 2 == 1 || rest < m || (rest - m) % 2 == 1 {
                continue;
            }
            let weight = binom(k, j) * binom(j, (j + n) / 2) * binom(rest, (rest + m) / 2);
            total += weight as f64 * alpha.powi(j as i32);
        }
        total / lambda.powi(k as i32)
    }

    #[test]
    fn g_k_examples() {
        let c = cfg(0.6, 1.0);
        let lambda = c.lambda();
        assert!((g_k(1, LatticePoint::new(1, 0), &c) - 0.6 / lambda).abs() < 1e-15);
        let expected = (2.0 + 2.0 * 0.36) / (lambda * lambda);
        assert!((g_k(2, LatticePoint::new(0, 0), &c) - expected).abs() < 1e-15);
        assert_eq!(g_k(1, LatticePoint::new(0, 0), &c), 0.0);
        assert_eq!(g_k(0, LatticePoint::new(0, 0), &c), 1.0);
    }

    #[test]
    fn g_k_matches_binomial_expansion() {
        let c = cfg(0.75, 1.0);
        let got = g_k(5, LatticePoint::new(2, 1), &c);
        let want = g_k_binomial_oracle(5, 2, 1, 0.75);
        // Exact rational value 1485/33614 from the same expansion in rational arithmetic.
        assert!((want - 1485.0 / 33614.0).abs() < 1e-16, "oracle drifted: {want}");
        assert!((got - want).abs() < 1e-15 * want.max(1.0), "{got} vs {want}");

        let ev = SeriesEvaluator::new(cfg(0.3, 2.0), 60);
        for k in 0..=60u64 {
            for n in 0..6u64 {
                for m in 0..6u64 {
                    let want = g_k_binomial_oracle(k, n, m, 0.3);
                    let got = ev.g_k(k as usize, LatticePoint::new(n as i64, m as i64));
                    assert!((got - want).abs() <= 1e-13 * want + 1e-300, "k={k} n={n} m={m}");
                }
            }
        }
    }

    #[test]
    fn g_k_support_is_parity_cone() {
        let ev = SeriesEvaluator::new(cfg(0.4, 1.0), 12);
        for k in 0..=12usize {
            for n in 0..=12usize {
                for m in 0..=(12 - n) {
                    let g = ev.g_k(k, LatticePoint::new(n as i64, m as i64));
                    let zero = k < n + m || (k - n - m) % 2 == 1;
                    assert_eq!(g == 0.0, zero, "k={k} n={n} m={m}");
                    assert!((0.0..=1.0).contains(&g));
                }
            }
        }
    }

    #[test]
    fn g_k_sums_to_one_over_the_lattice() {
        // The walk weights of one step sum to one, so every g_k is a probability vector.
        let ev = SeriesEvaluator::new(cfg(0.64, 1.0), 30);
        for k in [0usize, 1, 7, 30] {
            let mut total = 0.0;
            for n in -(k as i64)..=k as i64 {
                for m in -(k as i64)..=k as i64 {
                    total += ev.g_k(k, LatticePoint::new(n, m).canonical());
                }
            }
            assert!((total - 1.0).abs() < 1e-13, "k={k}: {total}");
        }
    }

    #[test]
    fn truncation_bound_examples() {
        let c = cfg(1.0, 1.0);
        assert!((truncation_bound(&c, 10) - 0.107_374_182_4).abs() < 1e-15);
        let c = cfg(0.3, 7.0);
        assert!((truncation_bound(&c, 0) - 1.0 / 7.0).abs() < 1e-16);
    }

    #[test]
    fn terms_needed_examples() {
        let tol = Tolerance::new(1e-14).unwrap();
        // (1/100)(4/104)^9 ≈ 1.8e-15 already meets 1e-14; (1/100)(4/104)^8 ≈ 4.8e-14 does not.
        assert_eq!(terms_needed(&cfg(1.0, 100.0), tol), 9);

        let c = cfg(0.5, 4.0);
        assert_eq!(terms_needed(&c, Tolerance::new(0.25).unwrap()), 0);
        assert_eq!(terms_needed(&c, Tolerance::new(1.0).unwrap()), 0);

        let c = cfg(1.0, 4.0);
        let tol = Tolerance::new(1e-10).unwrap();
        let scan = (0..).find(|&n| truncation_bound(&c, n) <= 1e-10).unwrap();
        assert_eq!(terms_needed(&c, tol), scan);
    }

    #[test]
    fn series_eval_examples() {
        let c = cfg(0.7, 3.0);
        let one = series_eval(&c, LatticePoint::ORIGIN, &SeriesPlan::new(&c, 1));
        assert!((one - 1.0 / (c.lambda() + c.c2())).abs() < 1e-16);
        let p = LatticePoint::new(3, 2);
        assert_eq!(series_eval(&c, p, &SeriesPlan::new(&c, 5)), 0.0);
        assert!(series_eval(&c, p, &SeriesPlan::new(&c, 6)) > 0.0);
    }

    #[test]
    fn partial_sums_agree_with_single_sums() {
        let c = cfg(0.5, 0.8);
        let ev = SeriesEvaluator::new(c, 40);
        let p = LatticePoint::new(2, 3);
        let all = ev.partial_sums(p, 41);
        for n in [1usize, 5, 6, 17, 41] {
            assert!((all[n - 1] - ev.partial_sum(p, n)).abs() < 1e-16);
        }
    }

    #[test]
    fn decay_bound_examples() {
        let c = cfg(1.0, 1.0);
        assert!((decay_bound(&c, LatticePoint::ORIGIN) - 1.0).abs() < 1e-16);
        assert!((decay_bound(&c, LatticePoint::new(5, 5)) - 0.107_374_182_4).abs() < 1e-15);
        let a = decay_bound(&c, LatticePoint::new(3, 4));
        let b = decay_bound(&c, LatticePoint::new(4, 4));
        assert!(b < a);
    }

    #[test]
    fn far_field_diagonal_matches_simplified_form() {
        // μ = ν = 1/√2 ⇒ x = (a²−4)/2 and the prefactor collapses to
        // ½ (2πr)^{-½} x^{-¼} (1 + x/2)^{-¼} exp(−2n acosh √(1 + x/2)).
        let c = 0.4;
        for n in [1i64, 4, 15] {
            let a: f64 = 2.0 + 0.5 * c * c;
            let x = (a * a - 4.0) / 2.0;
            let r = (2.0f64).sqrt() * n as f64;
            let simplified = 0.5
                * (2.0 * std::f64::consts::PI * r).powf(-0.5)
                * x.powf(-0.25)
                * (1.0 + 0.5 * x).powf(-0.25)
                * (-2.0 * n as f64 * (1.0 + 0.5 * x).sqrt().acosh()).exp();
            let got = asymptotic_far_field(c, LatticePoint::new(n, n)).unwrap();
            assert!((got - simplified).abs() <= 1e-14 * simplified, "n={n}");
        }
    }

    #[test]
    fn far_field_rejects_origin() {
        assert!(asymptotic_far_field(0.5, LatticePoint::ORIGIN).is_err());
        assert!(asymptotic_far_field(0.0, LatticePoint::new(1, 0)).is_err());
    }

    proptest! {
        #[test]
        fn square_lattice_g_k_is_symmetric(k in 0usize..40, n in 0i64..10, m in 0i64..10) {
            let ev = SeriesEvaluator::new(cfg(1.0, 1.0), 40);
            let a = ev.g_k(k, LatticePoint::new(n, m));
            let b = ev.g_k(k, LatticePoint::new(m, n));
            prop_assert!((a - b).abs() <= 1e-13 * a.max(b));
        }

        #[test]
        fn bound_decreases_with_terms(alpha in 0.05f64..1.0, c2 in 1e-3f64..100.0, n in 0usize..500) {
            let c = cfg(alpha, c2);
            let (b1, b2) = (truncation_bound(&c, n), truncation_bound(&c, n + 1));
            prop_assert!(b2 < b1 || (b1 == 0.0 && b2 == 0.0));
        }
    }
}
