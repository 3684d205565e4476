//! Command-line front end for `boxfence`: input parsing, reports, boxplot
//! rendering and the `detect`, `plot`, `simulate` and `compare` commands.

pub mod cli;
pub mod input;
pub mod render;
pub mod report;

pub use cli::run_cli;
