//! File formats, reformatters and the benchmark runner.

pub mod experiment;
pub mod io;
pub mod memory;
pub mod reformat;
pub mod report;

pub use experiment::{
    build_algorithm, prepare_dataset, run_cell, run_experiment, run_sweep, summarize, worker_count,
    AlgorithmSpec, DatasetSpec, ExperimentSpec, Instance, PreparedDataset, RunOptions, Summary,
    WORKERS_ENV,
};
pub use io::{load_claims, load_ground_truth, write_claims, write_ground_truth};
pub use memory::CountingAlloc;
pub use reformat::{reformat_for_ltm, reformat_for_mle, MleMapping};
pub use report::{emit_figure, emit_report, read_report, FigurePoint, ReportRow, Status};
