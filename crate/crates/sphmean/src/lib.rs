//! Configuration, file formats and command pipelines for the restricted
//! spherical mean transform, on top of `sphmean-core`.
//!
//! The `sphmean` binary exposes [`pipeline::run_command`]:
//!
//! ```text
//! sphmean <command> --config <path> [--in <sinogram>] [--out <dir>] [--tolerance <float>] [--quiet]
//! ```
//!
//! Exit codes: 0 success or in range, 1 usage or configuration error,
//! 2 out of range, 3 inconclusive, 4 numerical failure.

pub mod artifacts;
pub mod cache;
pub mod config;
pub mod corpus;
pub mod error;
pub mod parallel;
pub mod pipeline;
pub mod sinogram_io;

pub use config::{load_config, save_config, RunConfig};
pub use error::{Error, Result};
pub use pipeline::{run_command, Command, IoPaths, Outcome};
