use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dgpyr::{LevelSelection, RunConfig, RunError};
use dgpyr_core::{EnergyParams, InitMode, LengthMode, StopCriterion};

#[derive(Parser)]
#[command(name = "dgpyr", version, about = "Combinatorial pyramid segmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a PGM/PPM image and write labels, overlays, boundaries and the pyramid.
    Segment(SegmentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Pixel,
    Flat,
    Watershed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Discrete,
    Unit,
}

#[derive(clap::Args)]
struct SegmentArgs {
    input: PathBuf,
    /// Boundary length weight.
    #[arg(long, default_value_t = 1.3, allow_negative_numbers = true)]
    nu: f64,
    /// Gradient term weight.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    delta: f64,
    #[arg(long, value_enum, default_value = "pixel")]
    init: Init,
    #[arg(long, value_enum, default_value = "discrete")]
    length_mode: Mode,
    /// single | min-regions:N | max-merges:N | local-minimum
    #[arg(long, default_value = "single", value_parser = parse_stop)]
    stop: StopCriterion,
    /// `all` or comma-separated partition indices (0 is the initial partition).
    #[arg(long, default_value = "all", value_parser = parse_levels)]
    levels: LevelSelection,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_stop(s: &str) -> Result<StopCriterion, String> {
    let count = |v: &str| v.parse::<usize>().map_err(|_| format!("bad count `{v}`"));
    match s.split_once(':') {
        None if s == "single" => Ok(StopCriterion::SingleRegion),
        None if s == "local-minimum" => Ok(StopCriterion::LocalMinimum),
        Some(("min-regions", n)) => Ok(StopCriterion::MinRegions(count(n)?)),
        Some(("max-merges", n)) => Ok(StopCriterion::MaxMerges(count(n)?)),
        _ => Err(format!("unknown stop criterion `{s}`")),
    }
}

fn parse_levels(s: &str) -> Result<LevelSelection, String> {
    if s == "all" {
        return Ok(LevelSelection::All);
    }
    s.split(',')
        .map(|k| k.trim().parse().map_err(|_| format!("bad partition index `{k}`")))
        .collect::<Result<_, _>>()
        .map(LevelSelection::List)
}

fn main() -> ExitCode {
    let Command::Segment(args) = Cli::parse().command;
    let params = EnergyParams {
        nu: args.nu,
        delta: args.delta,
        length_mode: match args.length_mode {
            Mode::Discrete => LengthMode::Discrete,
            Mode::Unit => LengthMode::Unit,
        },
    };
    let config = RunConfig {
        input: args.input,
        out: args.out,
        params,
        init: match args.init {
            Init::Pixel => InitMode::PixelGrid,
            Init::Flat => InitMode::FlatZones,
            Init::Watershed => InitMode::Watershed,
        },
        stop: args.stop,
        levels: args.levels,
    };
    match dgpyr::run(&config) {
        Ok(s) => {
            println!(
                "{} partitions over {} levels, final: {} regions, energy {:.6} ({:.3} s)",
                s.partitions,
                s.levels,
                s.final_regions,
                s.final_energy,
                s.elapsed.as_secs_f64()
            );
            ExitCode::SUCCESS
        }
        Err(e @ (RunError::Usage(_) | RunError::Level { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
