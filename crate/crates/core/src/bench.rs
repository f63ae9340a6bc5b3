//! Timing comparison of the evaluators over a rectangle of lattice points.
//!
//! Only ratios are meaningful; absolute times depend on the machine.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fft_batch::batch_table;
use crate::lattice::{LatticeConfig, LatticePoint, Tolerance};
use crate::oracles::{oracle_bessel, DEFAULT_PANEL_NODES};
use crate::quad1d::{trapezoid_eval, QuadPlan, DEFAULT_DELTA};
use crate::series::{terms_needed, SeriesEvaluator};

/// Series runs are skipped beyond this many terms.
pub const SERIES_BENCH_CAP: usize = 2000;

/// Upper limit on the heat-kernel truncation point.
pub const BESSEL_T_MAX_CAP: f64 = 5000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSpec {
    pub cfg: LatticeConfig,
    pub n_max: usize,
    pub m_max: usize,
    pub tol: Tolerance,
    /// Timed runs after one discarded warmup.
    pub runs: usize,
    /// Heat-kernel cut; defaults to where its tail bound is half of `tol`, capped.
    pub t_max: Option<f64>,
}

impl BenchSpec {
    pub fn new(cfg: LatticeConfig, n_max: usize, m_max: usize, tol: Tolerance) -> Self {
        Self {
            cfg,
            n_max,
            m_max,
            tol,
            runs: 5,
            t_max: None,
        }
    }

    pub fn bessel_t_max(&self) -> f64 {
        self.t_max.unwrap_or_else(|| {
            let c2 = self.cfg.c2();
            ((2.0 / (self.tol.eps() * c2)).ln().max(1.0) / c2).min(BESSEL_T_MAX_CAP)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: String,
    pub median_seconds: f64,
    /// Heat-kernel time over this method's time.
    pub speedup: f64,
    /// Largest deviation from a reference table computed at a hundredth of the tolerance.
    pub max_error: f64,
    /// The method missed the tolerance or its own certificate failed.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub alpha1: f64,
    pub c2: f64,
    pub eps: f64,
    pub t_max: f64,
    pub bessel_tail_bound: f64,
    pub timings: Vec<MethodTiming>,
}

impl BenchReport {
    pub fn timing(&self, method: &str) -> Option<&MethodTiming> {
        self.timings.iter().find(|t| t.method == method)
    }

    /// Whether the heat-kernel oracle was flagged.
    pub fn bessel_diverged(&self) -> bool {
        self.timing("bessel").is_some_and(|t| t.flagged)
    }
}

/// Median wall time of `runs` calls after a discarded warmup, and the last result.
pub fn median_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (f64, T) {
    let mut out = f();
    let mut times: Vec<f64> = (0..runs.max(1))
        .map(|_| {
            let t = Instant::now();
            out = f();
            t.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    (times[times.len() / 2], out)
}

type Table = Vec<Vec<f64>>;

fn pointwise(spec: &BenchSpec, f: impl Fn(LatticePoint) -> f64 + Sync) -> Table {
    (0..=spec.m_max)
        .into_par_iter()
        .map(|m| (0..=spec.n_max).map(|n| f(LatticePoint::new(n as i64, m as i64))).collect())
        .collect()
}

fn max_deviation(a: &Table, b: &Table) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |e, (x, y)| e.max((x - y).abs()))
}

/// Series (when it needs at most [`SERIES_BENCH_CAP`] terms), direct trapezoid per
/// point, FFT per row and the heat-kernel oracle per point, each over
/// `[0, n_max] × [0, m_max]`.
pub fn run_bench(spec: &BenchSpec) -> Result<BenchReport> {
    let cfg = spec.cfg;
    let tol = spec.tol;
    let eps = tol.eps();
    let reference = batch_table(&cfg, spec.m_max, spec.n_max, tol.scaled(1e-2))?;
    let reference = reference.rows().to_vec();

    let mut timings = Vec::new();
    let terms = terms_needed(&cfg, tol);
    if terms <= SERIES_BENCH_CAP {
        let ev = SeriesEvaluator::new(cfg, terms);
        let (t, table) = median_time(spec.runs, || pointwise(spec, |p| ev.partial_sum(p, terms)));
        timings.push(("series", t, max_deviation(&table, &reference), false));
    }

    let (t, table) = median_time(spec.runs, || {
        pointwise(spec, |p| {
            let plan = QuadPlan::for_tolerance(&cfg, tol, p.n_index(), DEFAULT_DELTA)
                .expect("default delta is valid");
            trapezoid_eval(&cfg, p, plan.n_pts)
        })
    });
    timings.push(("quad1d", t, max_deviation(&table, &reference), false));

    let mut fft_result = Ok(());
    let (t, table) = median_time(spec.runs, || match batch_table(&cfg, spec.m_max, spec.n_max, tol) {
        Ok(t) => t.rows().to_vec(),
        Err(e) => {
            fft_result = Err(e);
            Vec::new()
        }
    });
    fft_result?;
    timings.push(("fft_batch", t, max_deviation(&table, &reference), false));

    let t_max = spec.bessel_t_max();
    let mut tail = 0.0;
    let mut diverged = false;
    let (t, table) = median_time(spec.runs, || {
        let cells: Vec<Vec<_>> = (0..=spec.m_max)
            .into_par_iter()
            .map(|m| {
                (0..=spec.n_max)
                    .map(|n| oracle_bessel(&cfg, LatticePoint::new(n as i64, m as i64), t_max, DEFAULT_PANEL_NODES, tol))
                    .collect()
            })
            .collect();
        tail = cells[0][0].tail_bound;
        diverged = cells.iter().flatten().any(|e| e.diverged);
        cells.into_iter().map(|r| r.into_iter().map(|e| e.value).collect()).collect::<Table>()
    });
    timings.push(("bessel", t, max_deviation(&table, &reference), diverged));

    let bessel_time = t;
    Ok(BenchReport {
        alpha1: cfg.alpha1(),
        c2: cfg.c2(),
        eps,
        t_max,
        bessel_tail_bound: tail,
        timings: timings
            .into_iter()
            .map(|(name, t, err, diverged)| MethodTiming {
                method: name.to_string(),
                median_seconds: t,
                speedup: bessel_time / t,
                max_error: err,
                flagged: diverged || err > eps,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_discards_warmup() {
        let mut calls = 0;
        let (_, last) = median_time(3, || {
            calls += 1;
            calls
        });
        assert_eq!(calls, 4);
        assert_eq!(last, 4);
    }

    #[test]
    fn small_bench_runs_every_method() {
        let cfg = LatticeConfig::from_c(1.0, 1.0).unwrap();
        let mut spec = BenchSpec::new(cfg, 4, 4, Tolerance::new(1e-10).unwrap());
        spec.runs = 1;
        let r = run_bench(&spec).unwrap();
        for m in ["series", "quad1d", "fft_batch", "bessel"] {
            let t = r.timing(m).unwrap();
            assert!(!t.flagged, "{m}: {t:?}");
            assert!(t.max_error <= 1e-10);
        }
        assert!((r.timing("bessel").unwrap().speedup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_cut_makes_tail_half_the_tolerance() {
        let cfg = LatticeConfig::from_c(1.0, 0.1).unwrap();
        let spec = BenchSpec::new(cfg, 1, 1, Tolerance::new(1e-10).unwrap());
        let t = spec.bessel_t_max();
        assert!(((-cfg.c2() * t).exp() / cfg.c2() - 5e-11).abs() < 1e-22);
        let weak = BenchSpec::new(LatticeConfig::from_c(1.0, 0.01).unwrap(), 1, 1, Tolerance::new(1e-10).unwrap());
        assert_eq!(weak.bessel_t_max(), BESSEL_T_MAX_CAP);
    }
}
