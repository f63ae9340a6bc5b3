//! Return probabilities of a nearest-neighbour walk with killing.
//!
//! Each step moves left/right with probability `p1` each, down/up with `p2` each, and
//! is killed with `pk = 1 − 2p1 − 2p2`. The probability `ρ(n, m)` of reaching the
//! origin from `(n, m)` is harmonic for the walk off the origin, which after dividing
//! by the larger of `p1, p2` is the screened operator with `α₁ = p_small/p_large` and
//! `κ² = pk/p_large`. Hence `ρ = C·B_κ/p_large`, with `C` fixed by `ρ(0, 0) = 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispatch::evaluate;
use crate::error::{LgfError, Result};
use crate::lattice::{LatticeConfig, LatticePoint, Tolerance};

/// Trials per Monte Carlo block; each block draws from its own ChaCha stream.
const BLOCK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    p1: f64,
    p2: f64,
}

impl WalkParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        if !(p1 > 0.0 && p2 > 0.0 && p1.is_finite() && p2.is_finite()) {
            return Err(LgfError::InvalidWalk(format!(
                "step probabilities must be positive, got p1={p1}, p2={p2}"
            )));
        }
        let w = Self { p1, p2 };
        if !(w.pk() > 0.0) {
            return Err(LgfError::InvalidWalk(format!(
                "killing probability 1 - 2p1 - 2p2 = {} must be positive",
                w.pk()
            )));
        }
        Ok(w)
    }

    /// The one-parameter family `p1 = 0.2(1 − pk)`, `p2 = 0.3(1 − pk)`.
    pub fn family(pk: f64) -> Result<Self> {
        Self::new(0.2 * (1.0 - pk), 0.3 * (1.0 - pk))
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn pk(&self) -> f64 {
        1.0 - 2.0 * self.p1 - 2.0 * self.p2
    }

    /// Whether the first axis carries the larger step probability, so lattice
    /// coordinates are exchanged before evaluating the LGF.
    pub fn swapped(&self) -> bool {
        self.p1 > self.p2
    }

    fn p_large(&self) -> f64 {
        self.p1.max(self.p2)
    }

    /// Screened lattice problem in the normalized orientation.
    pub fn lattice_config(&self) -> LatticeConfig {
        let (small, large) = (self.p1.min(self.p2), self.p_large());
        LatticeConfig::new(small / large, self.pk() / large)
            .expect("valid walk parameters give a screened anisotropy in (0, 1]")
    }

    fn oriented(&self, p: LatticePoint) -> LatticePoint {
        if self.swapped() {
            LatticePoint::new(p.m, p.n)
        } else {
            p
        }
    }
}

/// `κ = √(pk / p2)`, taken with the larger step probability when `p1 > p2`.
pub fn kappa_rw(w: &WalkParams) -> f64 {
    (w.pk() / w.p_large()).sqrt()
}

/// Closed-form `ρ` at each requested point, in the caller's coordinates.
///
/// `B_κ(1, 0)` and `B_κ(0, 1)` use a tenth of the budget; each point's `B_κ` is scaled
/// so that `ρ` itself meets `tol`.
pub fn return_probability(
    w: &WalkParams,
    points: &[LatticePoint],
    tol: Tolerance,
) -> Result<Vec<(LatticePoint, f64)>> {
    let cfg = w.lattice_config();
    let local = tol.scaled(0.1);
    let b10 = evaluate(&cfg, LatticePoint::new(1, 0), local).value;
    let b01 = evaluate(&cfg, LatticePoint::new(0, 1), local).value;
    let c = 1.0 / (1.0 + 2.0 * cfg.alpha1() * b10 + 2.0 * b01);
    let scale = c / w.p_large();
    let point_tol = tol.scaled(0.5 / scale.max(1.0));
    Ok(points
        .par_iter()
        .map(|&p| {
            let rho = if p.canonical() == LatticePoint::ORIGIN {
                1.0
            } else {
                scale * evaluate(&cfg, w.oriented(p), point_tol).value
            };
            (p, rho)
        })
        .collect())
}

/// Monte Carlo estimate of `ρ(start)` with its binomial standard error.
///
/// Walks longer than `100/pk` steps count as killed. Trials run in fixed-size blocks,
/// block `b` on stream `b` of a ChaCha8 generator seeded with `seed`, so the result
/// depends only on `(w, start, trials, seed)`.
pub fn mc_simulate(w: &WalkParams, start: LatticePoint, trials: u64, seed: u64) -> (f64, f64) {
    assert!(trials >= 1, "mc_simulate needs at least one trial");
    if start == LatticePoint::ORIGIN {
        return (1.0, 0.0);
    }
    let max_steps = (100.0 / w.pk()).ceil() as u64;
    let (p1, p2) = (w.p1, w.p2);
    let thresholds = [p1, 2.0 * p1, 2.0 * p1 + p2, 2.0 * p1 + 2.0 * p2];
    let blocks = trials.div_ceil(BLOCK);
    let successes: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(trials - b * BLOCK);
            (0..count)
                .filter(|_| walk_returns(&mut rng, start, &thresholds, max_steps))
                .count() as u64
        })
        .sum();
    let estimate = successes as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    (estimate, std_error)
}

fn walk_returns(rng: &mut ChaCha8Rng, start: LatticePoint, thresholds: &[f64; 4], max_steps: u64) -> bool {
    let (mut n, mut m) = (start.n, start.m);
    for _ in 0..max_steps {
        let u: f64 = rng.gen();
        if u < thresholds[0] {
            n += 1;
        } else if u < thresholds[1] {
            n -= 1;
        } else if u < thresholds[2] {
            m += 1;
        } else if u < thresholds[3] {
            m -= 1;
        } else {
            return false;
        }
        if n == 0 && m == 0 {
            return true;
        }
    }
    false
}
