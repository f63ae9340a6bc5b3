//! Method selection between the series (strong screening) and the quadrature paths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fft_batch::{batch_table_with, fft_sample_count, LgfTable, RowOptions};
use crate::lattice::{LatticeConfig, LatticePoint, Method, MethodChoice, Tolerance};
use crate::quad1d::{trapezoid_eval, QuadPlan};
use crate::series::{terms_needed, truncation_bound, SeriesEvaluator, SeriesPlan};

/// Largest series length dispatch will accept before switching to quadrature.
pub const DEFAULT_SERIES_CAP: usize = 64;

/// What the caller wants evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Request {
    Point(LatticePoint),
    /// `B_c(0..=len, m)`.
    Row { m: usize, len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispatchOptions {
    pub series_cap: usize,
    pub row: RowOptions,
}

impl Default for DispatchOptions {
    fn default() -> Self {
        Self {
            series_cap: DEFAULT_SERIES_CAP,
            row: RowOptions::default(),
        }
    }
}

/// A value with the method and certificate that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub choice: MethodChoice,
}

pub fn select_method(cfg: &LatticeConfig, tol: Tolerance, request: Request) -> MethodChoice {
    select_method_with(cfg, tol, request, &DispatchOptions::default())
}

/// Series whenever its bound reaches `tol` within `series_cap` terms; otherwise the
/// direct trapezoid for points and the FFT for rows. Rows too long for the FFT memory
/// cap fall back to the direct trapezoid.
pub fn select_method_with(
    cfg: &LatticeConfig,
    tol: Tolerance,
    request: Request,
    opts: &DispatchOptions,
) -> MethodChoice {
    let terms = terms_needed(cfg, tol);
    if terms <= opts.series_cap {
        return MethodChoice {
            method: Method::Series,
            certificate: truncation_bound(cfg, terms),
            resolution: terms,
        };
    }
    let n_max = match request {
        Request::Point(p) => p.n_index(),
        Request::Row { m: _, len } => {
            if let Ok((n_pts, bound)) = fft_sample_count(cfg, tol, len, &opts.row) {
                return MethodChoice {
                    method: Method::FftBatch,
                    certificate: bound,
                    resolution: 2 * n_pts,
                };
            }
            len
        }
    };
    let plan = QuadPlan::for_tolerance(cfg, tol, n_max, opts.row.delta)
        .expect("a valid delta always yields a quadrature plan");
    MethodChoice {
        method: Method::Quad1D,
        certificate: plan.predicted_error,
        resolution: plan.n_pts,
    }
}

/// Certified value of `B_c(p)`.
pub fn evaluate(cfg: &LatticeConfig, p: LatticePoint, tol: Tolerance) -> Evaluation {
    evaluate_with(cfg, p, tol, &DispatchOptions::default())
}

pub fn evaluate_with(cfg: &LatticeConfig, p: LatticePoint, tol: Tolerance, opts: &DispatchOptions) -> Evaluation {
    let p = p.canonical();
    let choice = select_method_with(cfg, tol, Request::Point(p), opts);
    let value = match choice.method {
        Method::Series => crate::series::series_eval(cfg, p, &SeriesPlan::new(cfg, choice.resolution)),
        _ => trapezoid_eval(cfg, p, choice.resolution),
    };
    Evaluation { value, choice }
}

/// Table on `[0, n_max] × [0, m_max]` by the method [`select_method`] picks for its rows.
pub fn tabulate(cfg: &LatticeConfig, tol: Tolerance, n_max: usize, m_max: usize) -> Result<LgfTable> {
    tabulate_with(cfg, tol, n_max, m_max, &DispatchOptions::default())
}

pub fn tabulate_with(
    cfg: &LatticeConfig,
    tol: Tolerance,
    n_max: usize,
    m_max: usize,
    opts: &DispatchOptions,
) -> Result<LgfTable> {
    let choice = select_method_with(cfg, tol, Request::Row { m: m_max, len: n_max }, opts);
    match choice.method {
        Method::FftBatch => batch_table_with(cfg, m_max, n_max, tol, &opts.row),
        Method::Series => {
            let ev = SeriesEvaluator::new(*cfg, choice.resolution);
            let rows = (0..=m_max)
                .into_par_iter()
                .map(|m| {
                    (0..=n_max)
                        .map(|n| ev.partial_sum(LatticePoint::new(n as i64, m as i64), choice.resolution))
                        .collect()
                })
                .collect();
            LgfTable::from_rows(*cfg, tol, choice, rows)
        }
        Method::Quad1D => {
            let rows = (0..=m_max)
                .into_par_iter()
                .map(|m| {
                    (0..=n_max)
                        .map(|n| trapezoid_eval(cfg, LatticePoint::new(n as i64, m as i64), choice.resolution))
                        .collect()
                })
                .collect();
            LgfTable::from_rows(*cfg, tol, choice, rows)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha1: f64, c2: f64) -> LatticeConfig {
        LatticeConfig::new(alpha1, c2).unwrap()
    }

    fn tol(eps: f64) -> Tolerance {
        Tolerance::new(eps).unwrap()
    }

    #[test]
    fn selection_examples() {
        let choice = select_method(&cfg(1.0, 100.0), tol(1e-14), Request::Point(LatticePoint::ORIGIN));
        assert_eq!(choice.method, Method::Series);
        assert!(choice.resolution <= 10);
        assert!(choice.certificate <= 1e-14);

        let choice = select_method(&cfg(1.0, 1e-4), tol(1e-14), Request::Point(LatticePoint::new(3, 1)));
        assert_eq!(choice.method, Method::Quad1D);
        assert!(choice.certificate <= 1e-14);

        let choice = select_method(&cfg(0.5, 0.01), tol(1e-8), Request::Row { m: 0, len: 99 });
        assert_eq!(choice.method, Method::FftBatch);
        assert!(choice.certificate <= 1e-8);
    }

    #[test]
    fn overlong_rows_fall_back_to_direct_quadrature() {
        let opts = DispatchOptions {
            row: RowOptions {
                memory_cap: 64,
                ..RowOptions::default()
            },
            ..DispatchOptions::default()
        };
        let choice = select_method_with(&cfg(1.0, 0.01), tol(1e-10), Request::Row { m: 0, len: 40 }, &opts);
        assert_eq!(choice.method, Method::Quad1D);
    }

    #[test]
    fn series_cap_is_a_knob() {
        let c = cfg(1.0, 1.0);
        let mut opts = DispatchOptions::default();
        let req = Request::Point(LatticePoint::ORIGIN);
        assert_eq!(select_method_with(&c, tol(1e-10), req, &opts).method, Method::Quad1D);
        opts.series_cap = 200;
        assert_eq!(select_method_with(&c, tol(1e-10), req, &opts).method, Method::Series);
    }

    #[test]
    fn every_path_agrees() {
        let eps = 1e-11;
        for (a, c2) in [(1.0, 4.0), (0.5, 0.5), (0.3, 0.01)] {
            let c = cfg(a, c2);
            let t = tabulate(&c, tol(eps), 6, 4).unwrap();
            for n in 0..=6i64 {
                for m in 0..=4i64 {
                    let p = LatticePoint::new(n, m);
                    let ev = evaluate(&c, LatticePoint::new(-n, m), tol(eps));
                    let direct = trapezoid_eval(&c, p, 20_000);
                    assert!((ev.value - direct).abs() <= 2.0 * eps);
                    assert!((t.get(p).unwrap() - direct).abs() <= 2.0 * eps);
                }
            }
        }
    }

    #[test]
    fn tabulate_uses_series_for_strong_screening() {
        let t = tabulate(&cfg(1.0, 50.0), tol(1e-12), 3, 3).unwrap();
        assert_eq!(t.method.method, Method::Series);
    }
}
