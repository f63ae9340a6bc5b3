//! Lattice parameters, points and tolerances shared by every evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{LgfError, Result};

/// Smallest absolute tolerance accepted; tighter targets are not reachable in `f64`.
pub const MIN_TOLERANCE: f64 = 1e-15;

/// Screened lattice operator `c²u + α₁(2u − u(n±1)) + (2u − u(m±1))`.
///
/// The second direction's weight is normalized to one, so `alpha1` lies in `(0, 1]`,
/// and `c2 > 0` always holds for a constructed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    alpha1: f64,
    c2: f64,
}

impl LatticeConfig {
    pub fn new(alpha1: f64, c2: f64) -> Result<Self> {
        check_alpha(alpha1)?;
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(LgfError::NotScreened(c2));
        }
        Ok(Self { alpha1, c2 })
    }

    /// Builds the config from the screening amplitude `c` rather than `c²`.
    pub fn from_c(alpha1: f64, c: f64) -> Result<Self> {
        Self::new(alpha1, c * c)
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn c(&self) -> f64 {
        self.c2.sqrt()
    }

    /// Diagonal stencil weight without screening, `2 + 2α₁`.
    pub fn lambda(&self) -> f64 {
        2.0 + 2.0 * self.alpha1
    }

    /// `c/√α₁`, the single parameter the quadrature counts depend on.
    pub fn reduced_screening(&self) -> f64 {
        (self.c2 / self.alpha1).sqrt()
    }

    /// Ratio `λ/(λ+c²)` of consecutive series terms.
    pub fn series_ratio(&self) -> f64 {
        let lambda = self.lambda();
        lambda / (lambda + self.c2)
    }
}

pub(crate) fn check_alpha(alpha1: f64) -> Result<()> {
    if alpha1.is_finite() && alpha1 > 0.0 && alpha1 <= 1.0 {
        Ok(())
    } else {
        Err(LgfError::InvalidAnisotropy(alpha1))
    }
}

/// Integer lattice coordinates `(n, m)`; `n` runs along the `α₁` direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub n: i64,
    pub m: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { n: 0, m: 0 };

    pub const fn new(n: i64, m: i64) -> Self {
        Self { n, m }
    }

    /// Reflects into the first quadrant; the LGF is even in both coordinates.
    pub fn canonical(self) -> Self {
        Self {
            n: self.n.abs(),
            m: self.m.abs(),
        }
    }

    pub fn is_canonical(self) -> bool {
        self.n >= 0 && self.m >= 0
    }

    /// `|n| + |m|`, the lattice distance to the origin.
    pub fn l1(self) -> u64 {
        self.n.unsigned_abs() + self.m.unsigned_abs()
    }

    pub(crate) fn n_index(self) -> usize {
        self.n.unsigned_abs() as usize
    }

    pub(crate) fn m_index(self) -> usize {
        self.m.unsigned_abs() as usize
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from((n, m): (i64, i64)) -> Self {
        Self { n, m }
    }
}

pub fn canonicalize(p: LatticePoint) -> LatticePoint {
    p.canonical()
}

/// Absolute error target for a single LGF entry.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_nan() || eps < MIN_TOLERANCE {
            return Err(LgfError::ToleranceTooSmall(eps));
        }
        if !eps.is_finite() {
            return Err(LgfError::InvalidParameter(format!("tolerance {eps} is not finite")));
        }
        Ok(Self(eps))
    }

    pub fn eps(self) -> f64 {
        self.0
    }

    /// Splits the budget evenly, e.g. across modes of a sum; never drops below the floor.
    pub fn scaled(self, factor: f64) -> Self {
        Self((self.0 * factor).max(MIN_TOLERANCE))
    }
}

/// Which evaluator produced (or will produce) a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Series,
    Quad1D,
    FftBatch,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Quad1D => "quad1d",
            Method::FftBatch => "fft_batch",
        }
    }

    /// Name of the a priori bound that certifies values from this method.
    pub fn bound_name(self) -> &'static str {
        match self {
            Method::Series => "series_truncation",
            Method::Quad1D | Method::FftBatch => "trapezoid_strip",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = LgfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "series" => Ok(Method::Series),
            "quad1d" => Ok(Method::Quad1D),
            "fft_batch" => Ok(Method::FftBatch),
            other => Err(LgfError::InvalidParameter(format!("unknown method {other:?}"))),
        }
    }
}

/// A dispatch decision together with the bound value that justifies it.
///
/// `resolution` is the number of series terms for [`Method::Series`] and the number of
/// full-period quadrature nodes otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodChoice {
    pub method: Method,
    pub certificate: f64,
    pub resolution: usize,
}
