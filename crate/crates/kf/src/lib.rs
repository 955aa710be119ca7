//! File formats, run directories and the command line for `kf-core`.

pub mod cli;
pub mod dot;
pub mod format;
pub mod store;
