//! Desk-scale experiment runners and result tables for `phimv`.
//!
//! Each runner takes a [`BenchConfig`] and returns [`ResultRow`]s whose error
//! column is measured against the dense or closed-form oracle in
//! `phimv_core::oracle`. Rows carry their acceptance bound when one applies.

mod config;
mod experiments;
mod report;

pub use config::{BenchConfig, Experiment, Format};
pub use experiments::{
    adr_reference_step, chebyshev_bound, eval_matrix, gallery_bound, lowrank_cells, random_block, run, run_adr,
    run_chebyshev, run_gallery, run_lowrank, ADR_MIN_ORDER,
};
pub use report::{all_passed, write_rows, ResultRow};
