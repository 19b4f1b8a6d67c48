//! File IO, dataset building, detector training, experiments and the
//! `crossclone` command line, on top of `crossclone-core`.

pub mod canonical;
pub mod checkpoint;
pub mod detectors;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;
pub mod store;
pub mod suite;

pub use error::{LabError, Result};
