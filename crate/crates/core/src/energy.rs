//! Region statistics and the segmentation energy.
//!
//! The energy of a region is `E_img + nu * E_reg`:
//!
//! * `E_img = -delta * sum(|DI| * l) + SE`, the sum running over all boundary
//!   linels of the region with `|DI|` the color difference across the linel
//!   and `l` its elementary length, and `SE` the squared error of the region
//!   around its mean color;
//! * `E_reg` is the perimeter, the summed elementary lengths.
//!
//! The energy of a partition is the sum over its regions, background
//! excluded.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::boundary::{all_boundaries, set_boundaries, BoundaryError, BoundaryLoop};
use crate::estimators::{elementary_lengths, EstimatorError};
pub use crate::estimators::LengthMode;
use crate::grid::GridMap;
use crate::image::Image;
use crate::map::{Dart, Orbit};
use crate::math;
use crate::pyramid::{LevelView, PyramidError};

/// Mergeable sufficient statistics of a pixel set; sums are exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegionStats {
    channels: u8,
    count: u64,
    sum: [u64; 3],
    sq: [u64; 3],
}

impl RegionStats {
    pub fn empty(channels: u8) -> Self {
        RegionStats {
            channels,
            count: 0,
            sum: [0; 3],
            sq: [0; 3],
        }
    }

    pub fn of_pixel(image: &Image, i: usize) -> Self {
        let mut s = RegionStats::empty(image.channels());
        s.add(image, i);
        s
    }

    pub fn of_pixels(image: &Image, pixels: impl IntoIterator<Item = usize>) -> Self {
        let mut s = RegionStats::empty(image.channels());
        for i in pixels {
            s.add(image, i);
        }
        s
    }

    pub fn add(&mut self, image: &Image, i: usize) {
        self.count += 1;
        for (c, &v) in image.pixel(i).iter().enumerate() {
            self.sum[c] += v as u64;
            self.sq[c] += v as u64 * v as u64;
        }
    }

    pub fn merge(&self, other: &RegionStats) -> RegionStats {
        let mut out = *self;
        out.count += other.count;
        for c in 0..3 {
            out.sum[c] += other.sum[c];
            out.sq[c] += other.sq[c];
        }
        out
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self, channel: usize) -> u64 {
        self.sum[channel]
    }

    pub fn sq_sum(&self, channel: usize) -> u64 {
        self.sq[channel]
    }

    /// Mean color; unused channels are 0.
    pub fn mean(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        if self.count > 0 {
            for (c, v) in m.iter_mut().enumerate().take(self.channels as usize) {
                *v = self.sum[c] as f64 / self.count as f64;
            }
        }
        m
    }

    /// `sum |I - mean|^2`, from `(n * sq - sum^2) / n` in integers.
    pub fn squared_error(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let n = self.count as u128;
        let num: u128 = (0..self.channels as usize)
            .map(|c| n * self.sq[c] as u128 - (self.sum[c] as u128) * (self.sum[c] as u128))
            .sum();
        num as f64 / self.count as f64
    }
}

/// Color difference across every linel of the grid; 0 on the image border.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientField {
    values: Vec<f64>,
    squared: Vec<u32>,
}

impl GradientField {
    pub fn new(image: &Image, grid: &GridMap) -> Self {
        let mut values = vec![0.0; grid.edge_count()];
        let mut squared = vec![0; grid.edge_count()];
        for d in grid.map().darts().filter(|d| d.id() > 0) {
            if let (Some(p), Some(q)) = (grid.owner(d), grid.owner(d.negated())) {
                let e = grid.edge_index(d);
                squared[e] = image.distance2(p, q);
                values[e] = math::sqrt(squared[e] as f64);
            }
        }
        GradientField { values, squared }
    }

    /// Magnitude on the linel of dart `d`.
    pub fn at(&self, grid: &GridMap, d: Dart) -> f64 {
        self.values[grid.edge_index(d)]
    }

    /// Squared magnitude on the linel of dart `d`, exact.
    pub fn squared_at(&self, grid: &GridMap, d: Dart) -> u32 {
        self.squared[grid.edge_index(d)]
    }

    /// Magnitudes by edge index.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    pub nu: f64,
    pub delta: f64,
    pub length_mode: LengthMode,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            nu: 1.3,
            delta: 1.0,
            length_mode: LengthMode::Discrete,
        }
    }
}

impl EnergyParams {
    pub fn new(nu: f64, delta: f64, length_mode: LengthMode) -> Result<Self, EnergyError> {
        let p = EnergyParams { nu, delta, length_mode };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), EnergyError> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(EnergyError::InvalidParams("nu must be a finite non-negative number"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(EnergyError::InvalidParams("delta must be a finite non-negative number"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnergyError {
    Boundary(BoundaryError),
    Estimator(EstimatorError),
    Pyramid(PyramidError),
    /// The edge joins a region to itself.
    Fictive(Dart),
    /// The background takes no part in the energy.
    Background,
    InvalidParams(&'static str),
}

impl fmt::Display for EnergyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyError::Boundary(e) => write!(f, "{e}"),
            EnergyError::Estimator(e) => write!(f, "{e}"),
            EnergyError::Pyramid(e) => write!(f, "{e}"),
            EnergyError::Fictive(d) => write!(f, "edge of dart {d} does not separate two regions"),
            EnergyError::Background => f.write_str("the background has no energy"),
            EnergyError::InvalidParams(why) => f.write_str(why),
        }
    }
}

impl core::error::Error for EnergyError {}

impl From<BoundaryError> for EnergyError {
    fn from(e: BoundaryError) -> Self {
        EnergyError::Boundary(e)
    }
}

impl From<EstimatorError> for EnergyError {
    fn from(e: EstimatorError) -> Self {
        EnergyError::Estimator(e)
    }
}

impl From<PyramidError> for EnergyError {
    fn from(e: PyramidError) -> Self {
        EnergyError::Pyramid(e)
    }
}

/// The three terms of a region's energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RegionEnergy {
    pub squared_error: f64,
    /// Summed elementary lengths.
    pub perimeter: f64,
    /// Summed gradient magnitudes weighted by elementary lengths.
    pub gradient: f64,
}

impl RegionEnergy {
    pub fn e_img(&self, params: &EnergyParams) -> f64 {
        -params.delta * self.gradient + self.squared_error
    }

    pub fn e_reg(&self) -> f64 {
        self.perimeter
    }

    pub fn total(&self, params: &EnergyParams) -> f64 {
        self.e_img(params) + params.nu * self.e_reg()
    }
}

/// `(perimeter, gradient)` of a set of boundary loops.
pub fn boundary_terms(
    loops: &[BoundaryLoop],
    grid: &GridMap,
    grad: &GradientField,
    mode: LengthMode,
) -> Result<(f64, f64), EstimatorError> {
    let mut perimeter = 0.0;
    let mut gradient = 0.0;
    for l in loops {
        let lens = elementary_lengths(&l.chain, mode)?;
        for (&d, len) in l.base_darts.iter().zip(lens) {
            perimeter += len;
            gradient += grad.at(grid, d) * len;
        }
    }
    Ok((perimeter, gradient))
}

fn region_label(view: &LevelView<'_>, cycle: &[Dart], labels: &[u32]) -> Result<u32, EnergyError> {
    let grid = view.grid();
    if cycle.iter().any(|&d| grid.is_background(d)) {
        return Err(EnergyError::Background);
    }
    Ok(labels[grid.owner(cycle[0]).expect("non-background dart")])
}

fn stats_of_label(image: &Image, labels: &[u32], label: u32) -> RegionStats {
    RegionStats::of_pixels(image, (0..labels.len()).filter(|&i| labels[i] == label))
}

/// Energy terms of the region containing `region`, from scratch.
pub fn region_energy(
    view: &LevelView<'_>,
    region: Dart,
    image: &Image,
    grad: &GradientField,
    params: &EnergyParams,
) -> Result<RegionEnergy, EnergyError> {
    let labels = view.record().labels(view.level())?;
    let cycle = view.map().cycle(region, Orbit::Sigma).map_err(PyramidError::from)?;
    let label = region_label(view, &cycle, &labels)?;
    let stats = stats_of_label(image, &labels, label);
    let loops = all_boundaries(view, region, false)?;
    let (perimeter, gradient) = boundary_terms(&loops, view.grid(), grad, params.length_mode)?;
    Ok(RegionEnergy {
        squared_error: stats.squared_error(),
        perimeter,
        gradient,
    })
}

pub fn e_img(
    view: &LevelView<'_>,
    region: Dart,
    image: &Image,
    grad: &GradientField,
    params: &EnergyParams,
) -> Result<f64, EnergyError> {
    Ok(region_energy(view, region, image, grad, params)?.e_img(params))
}

pub fn e_reg(view: &LevelView<'_>, region: Dart, mode: LengthMode) -> Result<f64, EnergyError> {
    let loops = all_boundaries(view, region, false)?;
    let mut total = 0.0;
    for l in &loops {
        total += crate::estimators::curve_length(&l.chain, mode)?;
    }
    Ok(total)
}

/// Energy of every non-background region of the level, keyed by the
/// smallest dart of its sigma cycle.
pub fn region_energies(
    view: &LevelView<'_>,
    image: &Image,
    grad: &GradientField,
    params: &EnergyParams,
) -> Result<Vec<(Dart, RegionEnergy)>, EnergyError> {
    let labels = view.record().labels(view.level())?;
    let count = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut stats = vec![RegionStats::empty(image.channels()); count];
    for (i, &l) in labels.iter().enumerate() {
        stats[l as usize].add(image, i);
    }
    let mut out = Vec::new();
    for cycle in view.map().cycles(Orbit::Sigma) {
        let label = match region_label(view, &cycle, &labels) {
            Ok(l) => l,
            Err(EnergyError::Background) => continue,
            Err(e) => return Err(e),
        };
        let set: BTreeSet<Dart> = cycle.iter().copied().collect();
        let loops = set_boundaries(view, &cycle, |x| set.contains(&x))?;
        let (perimeter, gradient) = boundary_terms(&loops, view.grid(), grad, params.length_mode)?;
        let key = *cycle.iter().min().expect("cycles are not empty");
        out.push((
            key,
            RegionEnergy {
                squared_error: stats[label as usize].squared_error(),
                perimeter,
                gradient,
            },
        ));
    }
    Ok(out)
}

/// Energy of the partition: the sum of its region energies.
pub fn map_energy(
    view: &LevelView<'_>,
    image: &Image,
    grad: &GradientField,
    params: &EnergyParams,
) -> Result<f64, EnergyError> {
    Ok(region_energies(view, image, grad, params)?
        .iter()
        .map(|(_, e)| e.total(params))
        .sum())
}

/// Energy change of merging the two regions on either side of `d`,
/// evaluated from scratch.
pub fn merge_delta(
    view: &LevelView<'_>,
    d: Dart,
    image: &Image,
    grad: &GradientField,
    params: &EnergyParams,
) -> Result<f64, EnergyError> {
    let map = view.map();
    if !map.contains(d) {
        return Err(PyramidError::DeadDart { dart: d, level: view.level() }.into());
    }
    if crate::boundary::is_fictive(map, d) {
        return Err(EnergyError::Fictive(d));
    }
    let a = region_energy(view, d, image, grad, params)?;
    let b = region_energy(view, map.alpha_of(d), image, grad, params)?;
    let labels = view.record().labels(view.level())?;
    let ca = map.cycle(d, Orbit::Sigma).map_err(PyramidError::from)?;
    let cb = map.cycle(map.alpha_of(d), Orbit::Sigma).map_err(PyramidError::from)?;
    let (la, lb) = (region_label(view, &ca, &labels)?, region_label(view, &cb, &labels)?);
    let stats = RegionStats::of_pixels(image, (0..labels.len()).filter(|&i| labels[i] == la || labels[i] == lb));
    let mut union: Vec<Dart> = ca;
    union.extend(cb);
    let set: BTreeSet<Dart> = union.iter().copied().collect();
    let loops = set_boundaries(view, &union, |x| set.contains(&x))?;
    let (perimeter, gradient) = boundary_terms(&loops, view.grid(), grad, params.length_mode)?;
    let merged = RegionEnergy {
        squared_error: stats.squared_error(),
        perimeter,
        gradient,
    };
    Ok(merged.total(params) - a.total(params) - b.total(params))
}
