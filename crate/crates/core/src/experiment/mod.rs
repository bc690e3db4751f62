//! Experiment harness: records, the content-addressed cache, CSV/SVG output,
//! the symbol file format, the suites and the command-line front end.

pub mod cache;
pub mod cli;
pub mod plot;
pub mod record;
pub mod suites;
pub mod symbol_io;
pub mod table;

pub use cache::Cache;
pub use record::{cache_key, ExperimentRecord, Params, ARTIFACT_VERSION};
pub use suites::SuiteOutput;
pub use table::{Cell, Table};
