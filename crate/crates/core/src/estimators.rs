//! Tangent, normal and length estimation on closed Freeman chains.
//!
//! The tangent at a curve abscissa is the lambda-MST combination of the
//! directions of every maximal segment covering it, each weighted by a
//! triangle function of the abscissa's relative position inside the segment.
//! A linel's elementary length is the projection of the unit move on the
//! tangent direction estimated at its middle.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::boundary::{all_boundaries, BoundaryError, BoundaryLoop};
use crate::dss::{maximal_segments, CoverError, MaximalSegment};
use crate::grid::FreemanChain;
use crate::map::Dart;
use crate::math;
use crate::pyramid::LevelView;

/// How a linel is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum LengthMode {
    /// Elementary lengths from the lambda-MST tangent.
    #[default]
    Discrete,
    /// Every linel counts 1.
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimatorError {
    Cover(CoverError),
    /// No maximal segment covers the abscissa.
    Uncovered(f64),
}

impl fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorError::Cover(e) => write!(f, "{e}"),
            EstimatorError::Uncovered(s) => write!(f, "no maximal segment covers abscissa {s}"),
        }
    }
}

impl core::error::Error for EstimatorError {}

impl From<CoverError> for EstimatorError {
    fn from(e: CoverError) -> Self {
        EstimatorError::Cover(e)
    }
}

/// Triangle weight: 0 at 0 and 1, 1 at 1/2.
pub fn lambda(e: f64) -> f64 {
    if !(0.0..=1.0).contains(&e) {
        return 0.0;
    }
    1.0 - (2.0 * e - 1.0).abs()
}

/// One maximal segment's contribution to a tangent estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contribution {
    pub theta: f64,
    pub eccentricity: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentSample {
    pub abscissa: f64,
    pub theta: f64,
    pub contributions: Vec<Contribution>,
}

/// Position of abscissa `s` inside segment `m` on a closed curve of `n`
/// moves, if covered.
fn eccentricity(m: &MaximalSegment, s: f64, n: usize) -> Option<f64> {
    let mut off = (s - m.start as f64) % n as f64;
    if off < 0.0 {
        off += n as f64;
    }
    (off <= m.len as f64).then(|| off / m.len as f64)
}

/// Weighted circular mean of angles assumed to lie within a half-turn of the
/// first one.
struct AngleMean {
    reference: f64,
    weight: f64,
    sum: f64,
    count: usize,
}

impl AngleMean {
    fn new() -> Self {
        AngleMean {
            reference: 0.0,
            weight: 0.0,
            sum: 0.0,
            count: 0,
        }
    }

    fn add(&mut self, theta: f64, w: f64) {
        if self.count == 0 {
            self.reference = theta;
        }
        self.count += 1;
        self.weight += w;
        self.sum += w * math::wrap_pi(theta - self.reference);
    }

    /// Falls back to a uniform mean when every weight is zero.
    fn finish(&self, uniform: impl FnOnce() -> f64) -> f64 {
        if self.weight > 0.0 {
            math::wrap_tau(self.reference + self.sum / self.weight)
        } else {
            uniform()
        }
    }
}

/// lambda-MST tangent direction at abscissa `s` (cyclic, in moves).
pub fn tangent_sample(
    chain: &FreemanChain,
    segments: &[MaximalSegment],
    s: f64,
) -> Result<TangentSample, EstimatorError> {
    let n = chain.len();
    let mut contributions = Vec::new();
    let mut mean = AngleMean::new();
    for m in segments {
        if let Some(e) = eccentricity(m, s, n) {
            let w = lambda(e);
            mean.add(m.dss.theta, w);
            contributions.push(Contribution {
                theta: m.dss.theta,
                eccentricity: e,
                weight: w,
            });
        }
    }
    if contributions.is_empty() {
        return Err(EstimatorError::Uncovered(s));
    }
    let theta = mean.finish(|| {
        let mut u = AngleMean::new();
        for c in &contributions {
            u.add(c.theta, 1.0);
        }
        u.finish(|| contributions[0].theta)
    });
    Ok(TangentSample {
        abscissa: s,
        theta,
        contributions,
    })
}

pub fn lambda_mst(chain: &FreemanChain, segments: &[MaximalSegment], s: f64) -> Result<f64, EstimatorError> {
    tangent_sample(chain, segments, s).map(|t| t.theta)
}

/// Unit normal `(-sin, cos)` of a tangent direction.
pub fn normal(theta: f64) -> (f64, f64) {
    (-math::sin(theta), math::cos(theta))
}

/// Normal at point `k` of the chain.
pub fn normal_at(chain: &FreemanChain, segments: &[MaximalSegment], k: usize) -> Result<(f64, f64), EstimatorError> {
    lambda_mst(chain, segments, k as f64).map(normal)
}

/// Elementary length of linel `k` given the tangent at its middle.
pub fn elementary_length(chain: &FreemanChain, segments: &[MaximalSegment], k: usize) -> Result<f64, EstimatorError> {
    let theta = lambda_mst(chain, segments, k as f64 + 0.5)?;
    Ok(projected(chain.codes[k].is_horizontal(), theta))
}

fn projected(horizontal: bool, theta: f64) -> f64 {
    if horizontal {
        math::cos(theta).abs()
    } else {
        math::sin(theta).abs()
    }
}

/// Tangent directions at every half-integer abscissa `k + 0.5`, in one sweep
/// over the maximal segments.
pub fn midpoint_tangents(chain: &FreemanChain, segments: &[MaximalSegment]) -> Vec<f64> {
    let n = chain.len();
    let mut means: Vec<AngleMean> = (0..n).map(|_| AngleMean::new()).collect();
    for m in segments {
        for t in 0..m.len {
            let e = (t as f64 + 0.5) / m.len as f64;
            means[(m.start + t) % n].add(m.dss.theta, lambda(e));
        }
    }
    means.iter().map(|m| m.finish(|| m.reference)).collect()
}

/// Elementary lengths of every linel of a closed chain.
///
/// Loops of four moves or fewer (the unit square) get unit lengths: they are
/// too short for the tangent estimate to mean anything.
pub fn elementary_lengths(chain: &FreemanChain, mode: LengthMode) -> Result<Vec<f64>, EstimatorError> {
    if mode == LengthMode::Unit || chain.len() <= 4 {
        if !chain.is_closed() {
            return Err(CoverError::Open.into());
        }
        return Ok(vec![1.0; chain.len()]);
    }
    let segments = maximal_segments(chain)?;
    let tangents = midpoint_tangents(chain, &segments);
    Ok(chain
        .codes
        .iter()
        .zip(tangents)
        .map(|(c, theta)| projected(c.is_horizontal(), theta))
        .collect())
}

pub fn curve_length(chain: &FreemanChain, mode: LengthMode) -> Result<f64, EstimatorError> {
    Ok(elementary_lengths(chain, mode)?.iter().sum())
}

#[derive(Clone, Debug, PartialEq)]
pub enum PerimeterError {
    Boundary(BoundaryError),
    Estimator(EstimatorError),
}

impl fmt::Display for PerimeterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerimeterError::Boundary(e) => write!(f, "{e}"),
            PerimeterError::Estimator(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for PerimeterError {}

impl From<BoundaryError> for PerimeterError {
    fn from(e: BoundaryError) -> Self {
        PerimeterError::Boundary(e)
    }
}

impl From<EstimatorError> for PerimeterError {
    fn from(e: EstimatorError) -> Self {
        PerimeterError::Estimator(e)
    }
}

/// Sum of the lengths of a set of loops.
pub fn loops_length(loops: &[BoundaryLoop], mode: LengthMode) -> Result<f64, EstimatorError> {
    loops.iter().map(|l| curve_length(&l.chain, mode)).sum()
}

/// Perimeter of the region containing `region`: all of its boundaries,
/// inner ones included.
pub fn region_perimeter(view: &LevelView<'_>, region: Dart, mode: LengthMode) -> Result<f64, PerimeterError> {
    let loops = all_boundaries(view, region, false)?;
    Ok(loops_length(&loops, mode)?)
}
