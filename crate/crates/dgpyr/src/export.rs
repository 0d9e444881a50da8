//! Boundary samples of a partition as CSV.
//!
//! One row per linel of every region boundary:
//! `region,loop,kind,index,x,y,code,length,theta,nx,ny`. `(x, y)` is the
//! linel's start pointel, `theta` the tangent direction at its middle and
//! `(nx, ny)` the matching unit normal.

use std::fmt::Write as _;

use dgpyr_core::boundary::{all_boundaries, BoundaryKind, BoundaryLoop};
use dgpyr_core::dss::maximal_segments;
use dgpyr_core::estimators::{elementary_lengths, midpoint_tangents, normal};
use dgpyr_core::{LengthMode, LevelView, Orbit, SegmentError};

pub const HEADER: &str = "region,loop,kind,index,x,y,code,length,theta,nx,ny";

fn tangents(l: &BoundaryLoop) -> Result<Vec<f64>, SegmentError> {
    if l.chain.len() <= 4 {
        return Ok(l
            .chain
            .codes
            .iter()
            .map(|c| {
                let (dx, dy) = c.delta();
                (dy as f64).atan2(dx as f64).rem_euclid(std::f64::consts::TAU)
            })
            .collect());
    }
    let segments = maximal_segments(&l.chain).map_err(dgpyr_core::estimators::EstimatorError::from)?;
    Ok(midpoint_tangents(&l.chain, &segments))
}

/// Rows for every region of the view. Regions are named by their label in
/// `labels`, the pixel labels of the same level.
pub fn boundaries_csv(view: &LevelView<'_>, labels: &[u32], mode: LengthMode) -> Result<String, SegmentError> {
    let grid = view.grid();
    let mut regions: Vec<(u32, dgpyr_core::Dart)> = Vec::new();
    for cycle in view.map().cycles(Orbit::Sigma) {
        if cycle.iter().any(|&d| grid.is_background(d)) {
            continue;
        }
        let owner = cycle.iter().find_map(|&d| grid.owner(d)).expect("region darts have owners");
        regions.push((labels[owner], cycle[0]));
    }
    regions.sort_unstable();
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    for (label, dart) in regions {
        let loops = all_boundaries(view, dart, false)?;
        for (li, l) in loops.iter().enumerate() {
            let lengths = elementary_lengths(&l.chain, mode)?;
            let thetas = tangents(l)?;
            let kind = match l.kind {
                BoundaryKind::Outer => "outer",
                BoundaryKind::Inner => "inner",
            };
            for (k, (p, code)) in l.chain.linels().enumerate() {
                let (nx, ny) = normal(thetas[k]);
                writeln!(
                    out,
                    "{label},{li},{kind},{k},{},{},{},{},{},{},{}",
                    p.x,
                    p.y,
                    code.as_u8(),
                    lengths[k],
                    thetas[k],
                    nx,
                    ny
                )
                .unwrap();
            }
        }
    }
    Ok(out)
}
