//! Matrix-free evaluation of `w = Σ_j α^j φ_j(tA) v_j` by scaling and recovering
//! with truncated Taylor series.

pub mod block;
pub mod error;
pub mod integrator;
pub mod linop;
pub mod mtx;
pub mod nilpotent;
pub mod oracle;
pub mod params;
pub mod phimv;
pub mod problems;

pub use block::{block_series_direct, phimv_block, BlockPhiRequest, BlockPhiResult};
pub use error::{PhimvError, Result};
pub use linop::{dense_operator, DenseMatrix, FnOperator, LinearOperator};
pub use nilpotent::NilpotentCoeffMatrix;
pub use params::{select_parameters, ScalingShift};
pub use phimv::{phimv, PhiRequest, PhiResult, RunRecord};
