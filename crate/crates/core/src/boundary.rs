//! Region boundaries as closed Freeman chains.
//!
//! An edge whose two darts belong to the same region (`alpha(d)` in
//! `sigma*(d)`) is fictive: it links two boundary components of that region
//! and carries no geometry. Boundaries are traced by walking the separating
//! darts of a region set and concatenating their receptive segments.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::FreemanChain;
use crate::map::{CombMap, Dart, Orbit};
use crate::pyramid::{LevelView, PyramidError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Outer,
    Inner,
}

/// One connected component of a region boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLoop {
    pub chain: FreemanChain,
    /// Level darts visited, in order.
    pub darts: Vec<Dart>,
    /// Base darts (linels) of the chain, in order.
    pub base_darts: Vec<Dart>,
    pub kind: BoundaryKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryError {
    Pyramid(PyramidError),
    /// `alpha(d)` lies inside the region set.
    NotSeparating(Dart),
    /// The region set is not a union of sigma cycles; holds a dart whose
    /// sigma image is missing from the set.
    NotSigmaClosed(Dart),
    /// The background was queried without opting in.
    Background,
    /// The traced darts did not form a closed loop.
    Open(Dart),
}

impl fmt::Display for BoundaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryError::Pyramid(e) => write!(f, "{e}"),
            BoundaryError::NotSeparating(d) => write!(f, "dart {d} does not separate the region"),
            BoundaryError::NotSigmaClosed(d) => {
                write!(f, "region set is not a union of vertices (at dart {d})")
            }
            BoundaryError::Background => f.write_str("the background region has no boundary of its own"),
            BoundaryError::Open(d) => write!(f, "boundary traced from {d} is not closed"),
        }
    }
}

impl core::error::Error for BoundaryError {}

impl From<PyramidError> for BoundaryError {
    fn from(e: PyramidError) -> Self {
        BoundaryError::Pyramid(e)
    }
}

/// `alpha(d)` belongs to the sigma cycle of `d`.
pub fn is_fictive(map: &CombMap, d: Dart) -> bool {
    let a = map.alpha_of(d);
    let mut x = d;
    loop {
        if x == a {
            return true;
        }
        x = map.sigma_of(x);
        if x == d {
            return false;
        }
    }
}

/// Traces the boundary through `d` of the region set `l_in`, a union of
/// sigma cycles of the view's map.
pub fn boundary(view: &LevelView<'_>, d: Dart, l_in: &BTreeSet<Dart>) -> Result<BoundaryLoop, BoundaryError> {
    let map = view.map();
    for &x in l_in {
        if !map.contains(x) {
            return Err(PyramidError::DeadDart { dart: x, level: view.level() }.into());
        }
        if !l_in.contains(&map.sigma_of(x)) {
            return Err(BoundaryError::NotSigmaClosed(x));
        }
    }
    if !map.contains(d) {
        return Err(PyramidError::DeadDart { dart: d, level: view.level() }.into());
    }
    boundary_by(view, d, |x| l_in.contains(&x))
}

/// [`boundary`] with set membership given as a predicate. The predicate is
/// trusted to describe a union of sigma cycles.
pub fn boundary_by(
    view: &LevelView<'_>,
    d: Dart,
    inside: impl Fn(Dart) -> bool,
) -> Result<BoundaryLoop, BoundaryError> {
    let map = view.map();
    if inside(map.alpha_of(d)) {
        return Err(BoundaryError::NotSeparating(d));
    }
    let mut darts = Vec::new();
    let mut base = Vec::new();
    let mut b = d;
    let limit = map.len() + 1;
    loop {
        if darts.len() > limit {
            return Err(BoundaryError::Open(d));
        }
        darts.push(b);
        view.segment_into(b, &mut base)?;
        b = map.sigma_of(b);
        let mut skipped = 0;
        while inside(map.alpha_of(b)) {
            b = map.phi_of(b);
            skipped += 1;
            if skipped > limit {
                return Err(BoundaryError::Open(d));
            }
        }
        if b == d {
            break;
        }
    }
    let chain = view.grid().chain_of(&base);
    if !chain.is_closed() {
        return Err(BoundaryError::Open(d));
    }
    let kind = if chain.signed_area2() > 0 {
        BoundaryKind::Outer
    } else {
        BoundaryKind::Inner
    };
    Ok(BoundaryLoop {
        chain,
        darts,
        base_darts: base,
        kind,
    })
}

/// Every boundary loop of the region (sigma cycle) containing `region`.
pub fn all_boundaries(
    view: &LevelView<'_>,
    region: Dart,
    allow_background: bool,
) -> Result<Vec<BoundaryLoop>, BoundaryError> {
    let map = view.map();
    let cycle = map.cycle(region, Orbit::Sigma).map_err(PyramidError::from)?;
    if !allow_background && cycle.iter().any(|&d| view.grid().is_background(d)) {
        return Err(BoundaryError::Background);
    }
    let set: BTreeSet<Dart> = cycle.iter().copied().collect();
    set_boundaries(view, &cycle, |x| set.contains(&x))
}

/// Every boundary loop of a union of regions. `darts` lists all darts of the
/// union (in any order); `inside` tests membership.
///
/// Loops are started from the smallest unvisited separating dart, so the
/// result does not depend on the order of `darts`.
pub fn set_boundaries(
    view: &LevelView<'_>,
    darts: &[Dart],
    inside: impl Fn(Dart) -> bool,
) -> Result<Vec<BoundaryLoop>, BoundaryError> {
    let map = view.map();
    let mut starts: Vec<Dart> = darts
        .iter()
        .copied()
        .filter(|&d| !inside(map.alpha_of(d)))
        .collect();
    starts.sort_unstable();
    let mut visited = BTreeSet::new();
    let mut loops = Vec::new();
    for d in starts {
        if visited.contains(&d) {
            continue;
        }
        let l = boundary_by(view, d, &inside)?;
        visited.extend(l.darts.iter().copied());
        loops.push(l);
    }
    Ok(loops)
}
