//! Lattice Green's functions of the screened anisotropic 2D Laplacian.

pub mod apps;
pub mod bench;
pub mod dispatch;
pub mod error;
pub mod fft_batch;
pub mod lattice;
pub mod numerics;
pub mod oracles;
pub mod quad1d;
pub mod series;

pub use dispatch::{
    evaluate, evaluate_with, select_method, select_method_with, tabulate, tabulate_with, DispatchOptions, Evaluation, Request,
};
pub use error::{LgfError, Result};
pub use fft_batch::{batch_row, batch_table, LgfRow, LgfTable, RowOptions};
pub use lattice::{canonicalize, LatticeConfig, LatticePoint, Method, MethodChoice, Tolerance, MIN_TOLERANCE};
pub use quad1d::{n_opt_scan, n_quad_points, quad_error_bound, trapezoid_eval, unscreened_diff, QuadPlan};
pub use series::{g_k, series_eval, SeriesPlan};
