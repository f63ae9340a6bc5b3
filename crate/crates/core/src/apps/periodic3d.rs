//! 3D discrete Poisson problems, periodic in the third direction and unbounded in the
//! first two.
//!
//! A DFT along the periodic axis splits the 7-point operator into 2D screened problems
//! with `κ(k)² = 2α₃ − 2α₃ cos(2πk/n_p)`, so the 3D LGF is
//! `G(n₁, n₂, n₃) = (1/n_p) Σ_k e^{2πikn₃/n_p} B_{κ(k)}(n₁, n₂)`. The `k = 0` mode is
//! unscreened and replaced by the difference kernel `B₀(n₁, n₂) − B₀(0, 0)`, so `G` and
//! every solution built from it are fixed only up to an additive constant.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use realfft::RealFftPlanner;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::dispatch::{evaluate, tabulate};
use crate::error::{LgfError, Result};
use crate::fft_batch::unscreened_diff_table;
use crate::lattice::{LatticeConfig, LatticePoint, Tolerance};
use crate::numerics::fitted_slope;
use crate::quad1d::unscreened_diff;

/// Largest boundary-to-peak source ratio accepted by [`solve_poisson3d`].
pub const SOURCE_DECAY_LIMIT: f64 = 1e-3;

/// Grid spacings and period count, with the axes oriented so that `α₁ ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Periodic3DConfig {
    dx1: f64,
    dx2: f64,
    dx3: f64,
    n_p: usize,
    alpha1: f64,
    alpha3: f64,
    swapped: bool,
}

impl Periodic3DConfig {
    /// Axes 1 and 2 are exchanged internally when `dx1 < dx2`; [`Self::swapped`] records it.
    pub fn new(dx1: f64, dx2: f64, dx3: f64, n_p: usize) -> Result<Self> {
        for (name, dx) in [("dx1", dx1), ("dx2", dx2), ("dx3", dx3)] {
            if !(dx.is_finite() && dx > 0.0) {
                return Err(LgfError::InvalidParameter(format!("{name} must be positive, got {dx}")));
            }
        }
        if n_p < 2 || n_p % 2 != 0 {
            return Err(LgfError::InvalidParameter(format!(
                "period count must be even and at least 2, got {n_p}"
            )));
        }
        let swapped = dx1 < dx2;
        let (wide, narrow) = if swapped { (dx2, dx1) } else { (dx1, dx2) };
        Ok(Self {
            dx1,
            dx2,
            dx3,
            n_p,
            alpha1: (narrow / wide).powi(2),
            alpha3: (narrow / dx3).powi(2),
            swapped,
        })
    }

    pub fn dx(&self) -> [f64; 3] {
        [self.dx1, self.dx2, self.dx3]
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha3(&self) -> f64 {
        self.alpha3
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// Spacing of the unit-weight axis; the physical operator is the lattice one over its square.
    pub fn dx_ref(&self) -> f64 {
        self.dx1.min(self.dx2)
    }

    /// `(n, m)` in the orientation where `n` runs along the `α₁` axis.
    fn oriented(&self, n1: i64, n2: i64) -> LatticePoint {
        if self.swapped {
            LatticePoint::new(n2, n1)
        } else {
            LatticePoint::new(n1, n2)
        }
    }

    fn mode_config(&self, k: usize) -> LatticeConfig {
        LatticeConfig::new(self.alpha1, kappa_mode(k, self).powi(2))
            .expect("nonzero modes are screened")
    }
}

/// `κ(k) = √(2α₃ − 2α₃ cos(2πk/n_p))`, evaluated as `2√α₃ |sin(πk/n_p)|`.
pub fn kappa_mode(k: usize, cfg3d: &Periodic3DConfig) -> f64 {
    assert!(k < cfg3d.n_p, "mode index {k} outside 0..{}", cfg3d.n_p);
    if k == 0 {
        return 0.0;
    }
    2.0 * cfg3d.alpha3.sqrt() * (PI * k as f64 / cfg3d.n_p as f64).sin().abs()
}

/// Node count for the zero-mode difference rule, whose error behaves like
/// `1e-3·(2π r/N)⁴` at lattice distance `r`.
fn zero_mode_nodes(r_max: usize, tol: Tolerance) -> usize {
    let n = 2.0 * PI * (r_max + 1) as f64 * (1e-3 / tol.eps()).powf(0.25);
    (n.ceil() as usize).next_power_of_two().max(1024)
}

/// `G(n₁, n₂, n₃)` of `Σᵢ αᵢ(2G − G(·+eᵢ) − G(·−eᵢ)) = δ`, with each mode at `tol/n_p`.
pub fn lgf3d_periodic(p3: (i64, i64, i64), cfg3d: &Periodic3DConfig, tol: Tolerance) -> Result<f64> {
    let (n1, n2, n3) = p3;
    let n_p = cfg3d.n_p;
    let p = cfg3d.oriented(n1, n2).canonical();
    let mode_tol = tol.scaled(1.0 / n_p as f64);
    let zero = unscreened_diff(cfg3d.alpha1, p, zero_mode_nodes(p.l1() as usize, mode_tol))?;
    let phase = |k: usize| {
        let j = (n3.rem_euclid(n_p as i64) as usize * k) % n_p;
        (2.0 * PI * j as f64 / n_p as f64).cos()
    };
    let mut sum = zero;
    for k in 1..=n_p / 2 {
        let b = evaluate(&cfg3d.mode_config(k), p, mode_tol).value;
        let weight = if k == n_p / 2 { 1.0 } else { 2.0 };
        sum += weight * phase(k) * b;
    }
    Ok(sum / n_p as f64)
}

/// Node values on an `N₁ × N₂ × N₃` grid, periodic index last.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Grid3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims[0] * dims[1] * dims[2]],
        }
    }

    pub fn from_fn(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64 + Sync) -> Self {
        let data = (0..dims[0] * dims[1] * dims[2])
            .into_par_iter()
            .map(|idx| {
                let i3 = idx % dims[2];
                let i2 = (idx / dims[2]) % dims[1];
                let i1 = idx / (dims[2] * dims[1]);
                f(i1, i2, i3)
            })
            .collect();
        Self { dims, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.dims[1] + i2) * self.dims[2] + i3
    }

    pub fn get(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.data[self.index(i1, i2, i3)]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn add_constant(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v += c);
    }

    /// Largest `|source|` on the faces of the unbounded directions.
    fn boundary_max(&self) -> f64 {
        let [n1, n2, n3] = self.dims;
        let mut m = 0.0f64;
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                if i1 == 0 || i1 + 1 == n1 || i2 == 0 || i2 + 1 == n2 {
                    for i3 in 0..n3 {
                        m = m.max(self.get(i1, i2, i3).abs());
                    }
                }
            }
        }
        m
    }
}

/// Discrete solution of `−Δ_h u = source`, periodic in the third index, by convolution
/// with the 3D LGF (before any additive-constant adjustment).
///
/// Each periodic mode is a zero-padded 2D FFT convolution with its `B_{κ(k)}` table.
pub fn solve_poisson3d(source: &Grid3, cfg3d: &Periodic3DConfig, tol: Tolerance) -> Result<Grid3> {
    let [n1, n2, n_p] = source.dims;
    if n_p != cfg3d.n_p {
        return Err(LgfError::InvalidParameter(format!(
            "source has {n_p} periodic planes, config expects {}",
            cfg3d.n_p
        )));
    }
    let peak = source.max_abs();
    if peak == 0.0 {
        return Ok(Grid3::zeros(source.dims));
    }
    let ratio = source.boundary_max() / peak;
    if ratio > SOURCE_DECAY_LIMIT {
        return Err(LgfError::SourceNotDecayed { ratio });
    }
    let n_modes = n_p / 2 + 1;
    let plane = n1 * n2;

    // Forward DFT along the periodic axis: modes[k][i1 * n2 + i2].
    let r2c = RealFftPlanner::<f64>::new().plan_fft_forward(n_p);
    let fibers: Vec<Vec<Complex<f64>>> = source
        .data
        .par_chunks(n_p)
        .map(|fiber| {
            let mut input = fiber.to_vec();
            let mut out = r2c.make_output_vec();
            r2c.process(&mut input, &mut out).expect("fiber length matches the plan");
            out
        })
        .collect();

    let (alpha_len, ref_len) = if cfg3d.swapped { (n2, n1) } else { (n1, n2) };
    let mode_tol = tol.scaled(1.0 / n_p as f64);
    let conv = Convolver::new(n1, n2);
    let spectra: Vec<Result<Vec<Complex<f64>>>> = (0..n_modes)
        .into_par_iter()
        .map(|k| {
            let rows = if k == 0 {
                let nodes = zero_mode_nodes(alpha_len + ref_len, mode_tol);
                unscreened_diff_table(cfg3d.alpha1, alpha_len - 1, ref_len - 1, nodes)?
            } else {
                tabulate(&cfg3d.mode_config(k), mode_tol, alpha_len - 1, ref_len - 1)?
                    .rows()
                    .to_vec()
            };
            let kernel = |d1: usize, d2: usize| {
                let p = cfg3d.oriented(d1 as i64, d2 as i64);
                rows[p.m_index()][p.n_index()]
            };
            let f_k: Vec<Complex<f64>> = fibers.iter().map(|f| f[k]).collect();
            Ok(conv.convolve(&kernel, &f_k))
        })
        .collect();
    let spectra = spectra.into_iter().collect::<Result<Vec<_>>>()?;

    let c2r = RealFftPlanner::<f64>::new().plan_fft_inverse(n_p);
    let scale = cfg3d.dx_ref().powi(2) / n_p as f64;
    let data: Vec<f64> = (0..plane)
        .into_par_iter()
        .flat_map_iter(|idx| {
            let mut spectrum: Vec<Complex<f64>> = spectra.iter().map(|s| s[idx]).collect();
            // The kernel and source are real, so these bins are real up to rounding.
            spectrum[0].im = 0.0;
            spectrum[n_modes - 1].im = 0.0;
            let mut out = c2r.make_output_vec();
            c2r.process(&mut spectrum, &mut out).expect("spectrum has Hermitian end bins");
            out.into_iter().map(move |v| v * scale)
        })
        .collect();
    Ok(Grid3 { dims: source.dims, data })
}

/// Linear 2D convolution of an `n1 × n2` field with an even kernel, via zero padding to
/// `2n1 × 2n2`.
struct Convolver {
    n1: usize,
    n2: usize,
    fwd1: Arc<dyn Fft<f64>>,
    fwd2: Arc<dyn Fft<f64>>,
    inv1: Arc<dyn Fft<f64>>,
    inv2: Arc<dyn Fft<f64>>,
}

impl Convolver {
    fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n1,
            n2,
            fwd1: planner.plan_fft_forward(2 * n1),
            fwd2: planner.plan_fft_forward(2 * n2),
            inv1: planner.plan_fft_inverse(2 * n1),
            inv2: planner.plan_fft_inverse(2 * n2),
        }
    }

    fn transform(&self, data: &mut [Complex<f64>], forward: bool) {
        let (p1, p2) = (2 * self.n1, 2 * self.n2);
        let (along2, along1) = if forward {
            (&self.fwd2, &self.fwd1)
        } else {
            (&self.inv2, &self.inv1)
        };
        along2.process(data);
        let mut columns = vec![Complex::new(0.0, 0.0); p1 * p2];
        for i in 0..p1 {
            for j in 0..p2 {
                columns[j * p1 + i] = data[i * p2 + j];
            }
        }
        along1.process(&mut columns);
        for i in 0..p1 {
            for j in 0..p2 {
                data[i * p2 + j] = columns[j * p1 + i];
            }
        }
    }

    /// `u(i) = Σ_j kernel(|i₁ − j₁|, |i₂ − j₂|) f(j)` on the `n1 × n2` grid.
    fn convolve(&self, kernel: &dyn Fn(usize, usize) -> f64, f: &[Complex<f64>]) -> Vec<Complex<f64>> {
        let (n1, n2) = (self.n1, self.n2);
        let (p1, p2) = (2 * n1, 2 * n2);
        let mut k = vec![Complex::new(0.0, 0.0); p1 * p2];
        for d1 in 0..n1 {
            for d2 in 0..n2 {
                let v = Complex::new(kernel(d1, d2), 0.0);
                for i in [d1, (p1 - d1) % p1] {
                    for j in [d2, (p2 - d2) % p2] {
                        k[i * p2 + j] = v;
                    }
                }
            }
        }
        let mut s = vec![Complex::new(0.0, 0.0); p1 * p2];
        for i1 in 0..n1 {
            s[i1 * p2..i1 * p2 + n2].copy_from_slice(&f[i1 * n2..(i1 + 1) * n2]);
        }
        self.transform(&mut k, true);
        self.transform(&mut s, true);
        for (a, b) in s.iter_mut().zip(&k) {
            *a *= b;
        }
        self.transform(&mut s, false);
        let norm = 1.0 / (p1 * p2) as f64;
        let mut out = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            out.extend(s[i1 * p2..i1 * p2 + n2].iter().map(|v| v * norm));
        }
        out
    }
}

/// `φ = exp(−64x² − 4y²)/(2 − cos z)` and its source `−∇²φ`.
pub mod test_problem {
    pub const X_RANGE: (f64, f64) = (-1.0, 1.0);
    pub const Y_RANGE: (f64, f64) = (-4.0, 4.0);

    pub fn phi(x: f64, y: f64, z: f64) -> f64 {
        (-64.0 * x * x - 4.0 * y * y).exp() / (2.0 - z.cos())
    }

    pub fn source(x: f64, y: f64, z: f64) -> f64 {
        let g = (-64.0 * x * x - 4.0 * y * y).exp();
        let w = 2.0 - z.cos();
        let gxx = (16384.0 * x * x - 128.0) * g;
        let gyy = (64.0 * y * y - 8.0) * g;
        let zpp = -z.cos() / (w * w) + 2.0 * z.sin().powi(2) / (w * w * w);
        -((gxx + gyy) / w + g * zpp)
    }
}

/// One refinement level of [`convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyLevel {
    pub n_p: usize,
    pub dx: [f64; 3],
    pub dims: [usize; 3],
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// `dx2/dx1`, held fixed across levels.
    pub aspect: f64,
    pub levels: Vec<StudyLevel>,
    /// Least-squares slope of `ln(max_error)` against `ln(dx2)`.
    pub slope: f64,
}

/// Solves the test problem on `[−1, 1] × [−4, 4] × [0, 2π)` with `dx3/dx2 = 2π` and
/// `dx2/dx1 = aspect` at each period count, and reports max-norm errors.
///
/// The additive constant left free by the zero mode is fixed per level by matching the
/// grid mean of the solution to that of `φ`.
pub fn convergence_study(aspect: f64, periods: &[usize], tol: Tolerance) -> Result<ConvergenceStudy> {
    use test_problem::{phi, source, X_RANGE, Y_RANGE};
    let mut levels = Vec::with_capacity(periods.len());
    for &n_p in periods {
        let dx3 = 2.0 * PI / n_p as f64;
        let dx2 = dx3 / (2.0 * PI);
        let dx1 = dx2 / aspect;
        let count = |range: (f64, f64), dx: f64| -> Result<usize> {
            let cells = (range.1 - range.0) / dx;
            if (cells - cells.round()).abs() > 1e-9 {
                return Err(LgfError::InvalidParameter(format!(
                    "spacing {dx} does not divide the interval {range:?}"
                )));
            }
            Ok(cells.round() as usize + 1)
        };
        let dims = [count(X_RANGE, dx1)?, count(Y_RANGE, dx2)?, n_p];
        let coords = move |i1: usize, i2: usize, i3: usize| {
            (X_RANGE.0 + i1 as f64 * dx1, Y_RANGE.0 + i2 as f64 * dx2, i3 as f64 * dx3)
        };
        let f = Grid3::from_fn(dims, |i1, i2, i3| {
            let (x, y, z) = coords(i1, i2, i3);
            source(x, y, z)
        });
        let exact = Grid3::from_fn(dims, |i1, i2, i3| {
            let (x, y, z) = coords(i1, i2, i3);
            phi(x, y, z)
        });
        let cfg3d = Periodic3DConfig::new(dx1, dx2, dx3, n_p)?;
        let mut u = solve_poisson3d(&f, &cfg3d, tol)?;
        u.add_constant(exact.mean() - u.mean());
        let max_error = u
            .data
            .iter()
            .zip(&exact.data)
            .fold(0.0f64, |e, (a, b)| e.max((a - b).abs()));
        levels.push(StudyLevel {
            n_p,
            dx: [dx1, dx2, dx3],
            dims,
            max_error,
        });
    }
    let x: Vec<f64> = levels.iter().map(|l| l.dx[1].ln()).collect();
    let y: Vec<f64> = levels.iter().map(|l| l.max_error.ln()).collect();
    let slope = if levels.len() >= 2 { fitted_slope(&x, &y) } else { f64::NAN };
    Ok(ConvergenceStudy { aspect, levels, slope })
}
