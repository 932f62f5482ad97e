//! End-to-end jobs, verification suites and the JSON report.

pub mod diff;
pub mod expansion;
pub mod job;
pub mod report;
pub mod suites;

pub use job::{run_tate_job, JobSpec};
pub use report::Report;
pub use suites::{run_suite, SuiteName};
