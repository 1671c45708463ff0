//! Deterministic builders for the test operators.

mod adr;
mod chebyshev;
pub mod gallery;
mod lowrank;

pub use adr::{adr_build, AdrOperator, AdrProblem, ADR_ALPHA, ADR_EPSILON, ADR_GAMMA, ADR_T_END};
pub use chebyshev::{chebyshev_differentiation, chebyshev_laplacian, chebyshev_nodes};
pub use lowrank::{dct_basis, lowrank_operator, CoreName, LowRankCore, LowRankOperator};
