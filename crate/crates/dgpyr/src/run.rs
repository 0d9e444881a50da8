//! A full segmentation run writing every output file.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dgpyr_core::segmenter::build_pyramid;
use dgpyr_core::{EnergyParams, Hierarchy, Image, InitMode, LengthMode, SegmentError, StopCriterion};

use crate::export::boundaries_csv;
use crate::overlay::overlay;
use crate::persist::{save_history, save_pyramid, PersistError};
use crate::pnm::{load_image, save_image, save_labels, PnmError};

/// Which partitions to write out.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum LevelSelection {
    #[default]
    All,
    /// Partition indices; 0 is the initial partition.
    List(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out: PathBuf,
    pub params: EnergyParams,
    pub init: InitMode,
    pub stop: StopCriterion,
    pub levels: LevelSelection,
}

impl RunConfig {
    pub fn new(input: impl Into<PathBuf>, out: impl Into<PathBuf>) -> Self {
        RunConfig {
            input: input.into(),
            out: out.into(),
            params: EnergyParams::default(),
            init: InitMode::default(),
            stop: StopCriterion::default(),
            levels: LevelSelection::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Pnm(#[from] PnmError),
    #[error(transparent)]
    Persist(#[from] PersistError),
    #[error("segmentation failed: {0}")]
    Segment(SegmentError),
    #[error("partition {requested} does not exist (the run built {available})")]
    Level { requested: usize, available: usize },
    #[error("{0}")]
    Usage(String),
}

impl From<SegmentError> for RunError {
    fn from(e: SegmentError) -> Self {
        RunError::Segment(e)
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub partitions: usize,
    pub levels: u32,
    pub final_regions: usize,
    pub final_energy: f64,
    pub written: Vec<usize>,
    pub elapsed: Duration,
}

/// Segments `image` and writes the outputs of the selected partitions into
/// `out`, which is created if needed.
pub fn run_image(image: &Image, config: &RunConfig) -> Result<(Hierarchy, RunSummary), RunError> {
    config
        .params
        .check()
        .map_err(|e| RunError::Usage(e.to_string()))?;
    let started = Instant::now();
    let h = build_pyramid(image, config.init, &config.params, config.stop)?;
    let partitions = h.partitions();
    let selected: Vec<usize> = match &config.levels {
        LevelSelection::All => (0..partitions).collect(),
        LevelSelection::List(ks) => {
            if let Some(&k) = ks.iter().find(|&&k| k >= partitions) {
                return Err(RunError::Level {
                    requested: k,
                    available: partitions,
                });
            }
            ks.clone()
        }
    };
    write_outputs(image, &h, &selected, config.params.length_mode, &config.out)?;
    let last = partitions - 1;
    let summary = RunSummary {
        partitions,
        levels: h.record().levels(),
        final_regions: h.regions_at(last),
        final_energy: h.energy_at(last).expect("last partition"),
        written: selected,
        elapsed: started.elapsed(),
    };
    Ok((h, summary))
}

/// Loads the input image and runs.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let image = load_image(&config.input)?;
    run_image(&image, config).map(|(_, s)| s)
}

fn write_outputs(
    image: &Image,
    h: &Hierarchy,
    selected: &[usize],
    mode: LengthMode,
    out: &Path,
) -> Result<(), RunError> {
    std::fs::create_dir_all(out).map_err(|source| PnmError::Io {
        path: out.display().to_string(),
        source,
    })?;
    for &k in selected {
        let level = h.partition_level(k).expect("checked");
        let labels = h.record().labels(level).map_err(SegmentError::from)?;
        save_labels(image.width(), image.height(), &labels, out.join(format!("labels_{k}.pgm")))?;
        save_image(&overlay(image, &labels), out.join(format!("overlay_{k}.ppm")))?;
        let view = h.record().view(level).map_err(SegmentError::from)?;
        let csv = boundaries_csv(&view, &labels, mode)?;
        crate::pnm::write_file(&out.join(format!("boundaries_{k}.csv")), csv.as_bytes())?;
    }
    save_history(h, out.join("history.txt"))?;
    save_pyramid(h.record(), out.join("pyramid.txt"))?;
    Ok(())
}
