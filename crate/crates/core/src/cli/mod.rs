//! Batch pipeline, TV comparison and plotting behind the `tractvar` binary.

pub mod compare;
pub mod pipeline;
pub mod plot;
pub mod tv_csv;

pub use compare::{compare_tvs, ppmc, ComparisonReport, CompareError};
pub use pipeline::{run_anatomy, run_pipeline, PipelineError, RunConfig, RunSummary};
pub use plot::emit_plots;
pub use tv_csv::{read_tv_csv, write_tv_csv, AngleUnit, TvTable, TV_HEADER, TV_NAMES};
