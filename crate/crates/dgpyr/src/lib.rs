//! File formats, exports and the command-line driver around `dgpyr-core`.

pub mod export;
pub mod overlay;
pub mod persist;
pub mod pnm;
pub mod run;

pub use run::{run, run_image, LevelSelection, RunConfig, RunError, RunSummary};
