//! Manifest loading, the `torsion`, `spectrum`, `algebra` and `blockdiag`
//! commands, and their reports.

pub mod commands;
pub mod manifest;
pub mod report;

pub use commands::{run, Options};
pub use manifest::{Manifest, ManifestError};
pub use report::Report;
