//! Dataset loading, preprocessing, benchmark sweeps and result files.

mod dataset;
mod instance_file;
mod results;
mod sweep;

pub use dataset::{load_csv, preprocess, read_csv, CsvSchema, Dataset, Task};
pub use instance_file::InstanceFile;
pub use results::{
    emit_results, format_float, read_csv_results, read_json_results, write_csv, write_json, Format,
    RESULT_HEADER,
};
pub use sweep::{run_sweep, Algorithm, SweepConfig, SweepRecord, SweepResult};
