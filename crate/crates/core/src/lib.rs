//! Hierarchical image segmentation on combinatorial pyramids.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`map`]: combinatorial maps `(D, sigma, alpha)` and their validation,
//! * [`grid`]: the initial map of a 4-connected pixel grid with its interpixel
//!   embedding (every dart is an oriented linel),
//! * [`pyramid`]: contraction / removal kernels, the implicit per-dart pyramid
//!   encoding and receptive segments,
//! * [`boundary`]: region boundary tracing as closed Freeman chains,
//! * [`dss`]: arithmetic digital straight segment recognition and maximal
//!   segment covers,
//! * [`estimators`]: lambda-MST tangents, normals and length estimation,
//! * [`energy`]: region statistics and the photometric / geometric energies,
//! * [`segmenter`]: initial partitions and the greedy merge pyramid.
//!
//! File formats, image codecs and the command line live in the `dgpyr` crate.

#![no_std]

extern crate alloc;

pub mod boundary;
pub mod dss;
pub mod energy;
pub mod estimators;
pub mod grid;
pub mod image;
pub mod map;
pub mod pyramid;
pub mod segmenter;

mod math;
mod unionfind;

pub use boundary::{BoundaryError, BoundaryKind, BoundaryLoop};
pub use dss::{Dss, DssCharacteristics, MaximalSegment};
pub use energy::{EnergyError, EnergyParams, GradientField, RegionEnergy, RegionStats};
pub use estimators::LengthMode;
pub use grid::{FreemanChain, FreemanCode, GridMap, Pointel};
pub use image::{Image, ImageError};
pub use map::{CombMap, Dart, MapError, Orbit};
pub use pyramid::{DartRecord, DeathOp, Kernel, KernelKind, LevelView, PyramidBuilder, PyramidError, PyramidRecord};
pub use segmenter::{Hierarchy, InitMode, MergeRecord, SegmentError, StopCriterion};
