//! Independent reference evaluators used to cross-check the certified backends.

mod bessel;
mod quad2d;
mod residual;
mod truncated;

pub use bessel::{oracle_bessel, scaled_bessel_sequence, BesselEstimate, DEFAULT_PANEL_NODES};
pub use quad2d::{oracle_2d_quadrature, oracle_2d_quadrature_table, suggested_grid};
pub use residual::{residual_check, stencil_residual, ResidualReport};
pub use truncated::{
    oracle_truncated_difference, oracle_truncated_solve, BoxSolution, DEFAULT_RADIUS_CAP,
};
