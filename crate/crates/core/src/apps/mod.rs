//! Solvers built on the 2D LGF.

pub mod periodic3d;
pub mod randomwalk;
