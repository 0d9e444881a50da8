//! Initial partitions and greedy merging.
//!
//! Starting from an over-segmentation, the two adjacent regions whose union
//! lowers the energy the most (or raises it the least) are merged, one pair
//! per step: their separating edge is contracted and the redundant edges
//! this creates are removed. Every step therefore adds one contraction level
//! to the pyramid, followed by the removal levels it needs.

use alloc::collections::{BTreeMap, BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::boundary::set_boundaries;
use crate::energy::{boundary_terms, EnergyError, EnergyParams, GradientField, RegionEnergy, RegionStats};
use crate::grid::GridMap;
use crate::image::Image;
use crate::map::{Dart, Orbit};
use crate::pyramid::{Kernel, PyramidError, PyramidRecord};
use crate::unionfind::UnionFind;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InitMode {
    /// One region per pixel.
    #[default]
    PixelGrid,
    /// 4-connected components of identical color.
    FlatZones,
    /// Catchment basins of the linel-gradient magnitude.
    Watershed,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StopCriterion {
    /// Merge until one region is left.
    #[default]
    SingleRegion,
    /// Stop when this many regions are left.
    MinRegions(usize),
    /// Stop after this many merges.
    MaxMerges(usize),
    /// Stop before the first merge that does not lower the energy.
    LocalMinimum,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SegmentError {
    Pyramid(PyramidError),
    Energy(EnergyError),
    /// Image and pyramid sizes differ, or the grid cannot be built.
    Size,
    /// The stop criterion asks for more regions than the base has, or none.
    Unreachable { requested: usize, available: usize },
}

impl fmt::Display for SegmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentError::Pyramid(e) => write!(f, "{e}"),
            SegmentError::Energy(e) => write!(f, "{e}"),
            SegmentError::Size => f.write_str("image size does not fit the pyramid"),
            SegmentError::Unreachable { requested, available } => write!(
                f,
                "cannot stop at {requested} regions: the initial partition has {available}"
            ),
        }
    }
}

impl core::error::Error for SegmentError {}

impl From<PyramidError> for SegmentError {
    fn from(e: PyramidError) -> Self {
        SegmentError::Pyramid(e)
    }
}

impl From<EnergyError> for SegmentError {
    fn from(e: EnergyError) -> Self {
        SegmentError::Energy(e)
    }
}

impl From<crate::boundary::BoundaryError> for SegmentError {
    fn from(e: crate::boundary::BoundaryError) -> Self {
        SegmentError::Energy(e.into())
    }
}

impl From<crate::estimators::EstimatorError> for SegmentError {
    fn from(e: crate::estimators::EstimatorError) -> Self {
        SegmentError::Energy(e.into())
    }
}

/// One merge step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MergeRecord {
    /// Pyramid level reached once the merge and its removals are applied.
    pub level: u32,
    /// Smallest pixel index of each merged region.
    pub rep_a: usize,
    pub rep_b: usize,
    pub delta: f64,
    /// Partition energy after the merge.
    pub energy: f64,
}

/// A built pyramid with its merge history.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    record: PyramidRecord,
    base_level: u32,
    base_regions: usize,
    initial_energy: f64,
    merges: Vec<MergeRecord>,
}

impl Hierarchy {
    pub fn new(
        record: PyramidRecord,
        base_level: u32,
        base_regions: usize,
        initial_energy: f64,
        merges: Vec<MergeRecord>,
    ) -> Self {
        Hierarchy {
            record,
            base_level,
            base_regions,
            initial_energy,
            merges,
        }
    }

    pub fn record(&self) -> &PyramidRecord {
        &self.record
    }

    pub fn into_record(self) -> PyramidRecord {
        self.record
    }

    /// Pyramid level of the initial partition.
    pub fn base_level(&self) -> u32 {
        self.base_level
    }

    pub fn base_regions(&self) -> usize {
        self.base_regions
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    pub fn merges(&self) -> &[MergeRecord] {
        &self.merges
    }

    /// Number of partitions: the initial one plus one per merge.
    pub fn partitions(&self) -> usize {
        self.merges.len() + 1
    }

    /// Pyramid level holding partition `k` (0 is the initial partition).
    pub fn partition_level(&self, k: usize) -> Option<u32> {
        match k {
            0 => Some(self.base_level),
            _ => self.merges.get(k - 1).map(|m| m.level),
        }
    }

    pub fn regions_at(&self, k: usize) -> usize {
        self.base_regions - k
    }

    /// Partition with exactly `n` regions, if built.
    pub fn partition_with_regions(&self, n: usize) -> Option<usize> {
        let k = self.base_regions.checked_sub(n)?;
        (k < self.partitions()).then_some(k)
    }

    pub fn energy_at(&self, k: usize) -> Option<f64> {
        match k {
            0 => Some(self.initial_energy),
            _ => self.merges.get(k - 1).map(|m| m.energy),
        }
    }

    pub fn labels(&self, k: usize) -> Result<Vec<u32>, PyramidError> {
        let level = self.partition_level(k).ok_or(PyramidError::LevelOutOfRange(u32::MAX))?;
        self.record.labels(level)
    }
}

/// Region labels of every pixel at a pyramid level.
pub fn level_labels(record: &PyramidRecord, level: u32) -> Result<Vec<u32>, PyramidError> {
    record.labels(level)
}

fn neighbours4(w: usize, h: usize, p: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (p % w, p / w);
    [
        (x > 0).then(|| p - 1),
        (x + 1 < w).then(|| p + 1),
        (y > 0).then(|| p - w),
        (y + 1 < h).then(|| p + w),
    ]
    .into_iter()
    .flatten()
}

/// Pixel labels of an initial partition, dense in raster order.
pub fn partition_labels(image: &Image, mode: InitMode) -> Vec<u32> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let n = w * h;
    match mode {
        InitMode::PixelGrid => (0..n as u32).collect(),
        InitMode::FlatZones => {
            let mut labels = vec![u32::MAX; n];
            let mut next = 0;
            let mut queue = VecDeque::new();
            for s in 0..n {
                if labels[s] != u32::MAX {
                    continue;
                }
                labels[s] = next;
                queue.push_back(s);
                while let Some(p) = queue.pop_front() {
                    for q in neighbours4(w, h, p) {
                        if labels[q] == u32::MAX && image.pixel(q) == image.pixel(p) {
                            labels[q] = next;
                            queue.push_back(q);
                        }
                    }
                }
                next += 1;
            }
            labels
        }
        InitMode::Watershed => watershed(image),
    }
}

/// Priority flood from the plateau minima of the per-pixel gradient, the
/// largest squared color difference across the pixel's four sides.
fn watershed(image: &Image) -> Vec<u32> {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let n = w * h;
    let g: Vec<u32> = (0..n)
        .map(|p| neighbours4(w, h, p).map(|q| image.distance2(p, q)).max().unwrap_or(0))
        .collect();
    // plateaus
    let mut plateau = vec![u32::MAX; n];
    let mut minimal = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if plateau[s] != u32::MAX {
            continue;
        }
        let id = minimal.len() as u32;
        let mut is_min = true;
        plateau[s] = id;
        queue.push_back(s);
        while let Some(p) = queue.pop_front() {
            for q in neighbours4(w, h, p) {
                if g[q] < g[p] {
                    is_min = false;
                }
                if g[q] == g[p] && plateau[q] == u32::MAX {
                    plateau[q] = id;
                    queue.push_back(q);
                }
            }
        }
        minimal.push(is_min);
    }
    let mut labels = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    for p in 0..n {
        if minimal[plateau[p] as usize] {
            heap.push(core::cmp::Reverse((g[p], seq, p, plateau[p])));
            seq += 1;
        }
    }
    while let Some(core::cmp::Reverse((_, _, p, label))) = heap.pop() {
        if labels[p] != u32::MAX {
            continue;
        }
        labels[p] = label;
        for q in neighbours4(w, h, p) {
            if labels[q] == u32::MAX {
                heap.push(core::cmp::Reverse((g[q], seq, q, label)));
                seq += 1;
            }
        }
    }
    densify(&labels)
}

fn densify(labels: &[u32]) -> Vec<u32> {
    let mut map = BTreeMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len() as u32;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Builds the base of the pyramid for a labelling: a spanning forest of each
/// label is contracted, then redundant edges are removed.
pub fn base_from_labels(grid: GridMap, labels: &[u32]) -> Result<PyramidRecord, SegmentError> {
    let (w, h) = (grid.width() as usize, grid.height() as usize);
    if labels.len() != w * h {
        return Err(SegmentError::Size);
    }
    let mut uf = UnionFind::new(w * h);
    let mut edges = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let darts = grid.pixel_darts(x as u32, y as u32);
            if x + 1 < w && labels[p] == labels[p + 1] && uf.union(p, p + 1).is_some() {
                edges.push(darts[2]);
            }
            if y + 1 < h && labels[p] == labels[p + w] && uf.union(p, p + w).is_some() {
                edges.push(darts[3]);
            }
        }
    }
    let mut record = PyramidRecord::new(grid);
    if !edges.is_empty() {
        let kernel = Kernel::contraction(record.top(), &edges)?;
        record.apply(&kernel)?;
    }
    record.reduce()?;
    Ok(record)
}

/// The base level of the pyramid for an initial partition, with its labels.
pub fn initial_partition(image: &Image, mode: InitMode) -> Result<(PyramidRecord, Vec<u32>), SegmentError> {
    let grid = GridMap::new(image.width(), image.height()).map_err(|_| SegmentError::Size)?;
    let labels = partition_labels(image, mode);
    let record = base_from_labels(grid, &labels)?;
    let labels = record.labels(record.levels())?;
    Ok((record, labels))
}

/// Initial partition followed by greedy merging.
pub fn build_pyramid(
    image: &Image,
    mode: InitMode,
    params: &EnergyParams,
    stop: StopCriterion,
) -> Result<Hierarchy, SegmentError> {
    let (record, _) = initial_partition(image, mode)?;
    build_from_base(image, record, params, stop)
}

/// Greedy merging on top of an existing base pyramid.
pub fn build_from_base(
    image: &Image,
    record: PyramidRecord,
    params: &EnergyParams,
    stop: StopCriterion,
) -> Result<Hierarchy, SegmentError> {
    params.check()?;
    let grid = record.grid();
    if grid.width() != image.width() || grid.height() != image.height() {
        return Err(SegmentError::Size);
    }
    let mut engine = Engine::new(image, record, *params)?;
    let available = engine.regions;
    match stop {
        StopCriterion::MinRegions(n) if n == 0 || n > available => {
            return Err(SegmentError::Unreachable {
                requested: n,
                available,
            });
        }
        _ => {}
    }
    engine.run(stop)?;
    let base_level = engine.base_level;
    Ok(Hierarchy::new(
        engine.record,
        base_level,
        available,
        engine.initial_energy,
        engine.history,
    ))
}

const BACKGROUND: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Candidate {
    delta: f64,
    key: u32,
    a: u32,
    b: u32,
    stamp_a: u32,
    stamp_b: u32,
    dart: Dart,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reversed so that the max-heap pops the smallest change first.
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .delta
            .total_cmp(&self.delta)
            .then(other.key.cmp(&self.key))
            .then(other.a.cmp(&self.a))
            .then(other.b.cmp(&self.b))
    }
}

struct Engine {
    grad: GradientField,
    params: EnergyParams,
    record: PyramidRecord,
    base_level: u32,
    region: Vec<u32>,
    members: Vec<Vec<u32>>,
    stats: Vec<RegionStats>,
    energy: Vec<RegionEnergy>,
    stamp: Vec<u32>,
    rep: Vec<usize>,
    dart: Vec<Dart>,
    heap: BinaryHeap<Candidate>,
    regions: usize,
    initial_energy: f64,
    history: Vec<MergeRecord>,
}

fn edge_key(d: Dart, a: Dart) -> u32 {
    d.id().unsigned_abs().min(a.id().unsigned_abs())
}

impl Engine {
    fn new(image: &Image, record: PyramidRecord, params: EnergyParams) -> Result<Self, SegmentError> {
        let grid = record.grid().clone();
        let grad = GradientField::new(image, &grid);
        let base_level = record.levels();
        let region = record.labels(base_level)?;
        let count = region.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); count];
        let mut stats = vec![RegionStats::empty(image.channels()); count];
        let mut rep = vec![usize::MAX; count];
        for (p, &r) in region.iter().enumerate() {
            members[r as usize].push(p as u32);
            stats[r as usize].add(image, p);
            rep[r as usize] = rep[r as usize].min(p);
        }
        let mut engine = Engine {
            grad,
            params,
            record,
            base_level,
            region,
            members,
            stats,
            energy: vec![RegionEnergy::default(); count],
            stamp: vec![0; count],
            rep,
            dart: vec![Dart::from_slot(0); count],
            heap: BinaryHeap::new(),
            regions: count,
            initial_energy: 0.0,
            history: Vec::new(),
        };
        let mut seen = vec![false; count];
        for cycle in engine.record.top().cycles(Orbit::Sigma) {
            let r = engine.region_of(cycle[0]);
            if r == BACKGROUND {
                continue;
            }
            seen[r as usize] = true;
            engine.dart[r as usize] = cycle[0];
            engine.energy[r as usize] = engine.union_energy(&cycle, r, r, &engine.stats[r as usize])?;
        }
        if seen.iter().any(|s| !s) {
            return Err(PyramidError::Corrupt("a labelled region has no vertex in the top map").into());
        }
        engine.initial_energy = engine.energy.iter().map(|e| e.total(&params)).sum();
        for r in 0..count as u32 {
            engine.push_candidates(r, true)?;
        }
        Ok(engine)
    }

    fn region_of(&self, d: Dart) -> u32 {
        match self.record.grid().owner(d) {
            Some(p) => self.region[p],
            None => BACKGROUND,
        }
    }

    /// Energy terms of the union of regions `a` and `b` (`a == b` for one
    /// region), whose darts are `darts`.
    fn union_energy(&self, darts: &[Dart], a: u32, b: u32, stats: &RegionStats) -> Result<RegionEnergy, SegmentError> {
        let view = self.record.top_view();
        let loops = set_boundaries(&view, darts, |x| {
            let r = self.region_of(x);
            r == a || r == b
        })?;
        let (perimeter, gradient) = boundary_terms(&loops, self.record.grid(), &self.grad, self.params.length_mode)?;
        Ok(RegionEnergy {
            squared_error: stats.squared_error(),
            perimeter,
            gradient,
        })
    }

    fn cycle(&self, r: u32) -> Vec<Dart> {
        self.record
            .top()
            .cycle(self.dart[r as usize], Orbit::Sigma)
            .expect("region darts are kept alive")
    }

    fn merged_energy(&self, a: u32, b: u32) -> Result<(RegionEnergy, RegionStats, Vec<Dart>), SegmentError> {
        let mut darts = self.cycle(a);
        darts.extend(self.cycle(b));
        let stats = self.stats[a as usize].merge(&self.stats[b as usize]);
        let e = self.union_energy(&darts, a, b, &stats)?;
        Ok((e, stats, darts))
    }

    fn delta(&self, a: u32, b: u32, merged: &RegionEnergy) -> f64 {
        let p = &self.params;
        merged.total(p) - self.energy[a as usize].total(p) - self.energy[b as usize].total(p)
    }

    /// Candidates between `r` and each neighbour; with `upper_only`, only
    /// neighbours with a larger id (initial fill).
    fn push_candidates(&mut self, r: u32, upper_only: bool) -> Result<(), SegmentError> {
        let top = self.record.top();
        let mut best: BTreeMap<u32, (u32, Dart)> = BTreeMap::new();
        for d in self.cycle(r) {
            let a = top.alpha_of(d);
            let c = self.region_of(a);
            if c == BACKGROUND || c == r || (upper_only && c < r) {
                continue;
            }
            let key = edge_key(d, a);
            let entry = best.entry(c).or_insert((key, d));
            if key < entry.0 {
                *entry = (key, d);
            }
        }
        for (c, (key, d)) in best {
            let (merged, _, _) = self.merged_energy(r, c)?;
            let delta = self.delta(r, c, &merged);
            let (a, b, dart) = if r < c { (r, c, d) } else { (c, r, self.record.top().alpha_of(d)) };
            self.heap.push(Candidate {
                delta,
                key,
                a,
                b,
                stamp_a: self.stamp[a as usize],
                stamp_b: self.stamp[b as usize],
                dart,
            });
        }
        Ok(())
    }

    fn is_valid(&self, c: &Candidate) -> bool {
        let alive = |r: u32| !self.members[r as usize].is_empty();
        alive(c.a)
            && alive(c.b)
            && self.stamp[c.a as usize] == c.stamp_a
            && self.stamp[c.b as usize] == c.stamp_b
            && self.record.top().contains(c.dart)
            && self.region_of(c.dart) == c.a
            && self.region_of(self.record.top().alpha_of(c.dart)) == c.b
    }

    fn best(&mut self) -> Option<Candidate> {
        while let Some(c) = self.heap.pop() {
            if self.is_valid(&c) {
                return Some(c);
            }
        }
        None
    }

    fn run(&mut self, stop: StopCriterion) -> Result<(), SegmentError> {
        loop {
            match stop {
                StopCriterion::MinRegions(n) if self.regions <= n => return Ok(()),
                StopCriterion::MaxMerges(n) if self.history.len() >= n => return Ok(()),
                _ => {}
            }
            let Some(c) = self.best() else {
                return Ok(());
            };
            if stop == StopCriterion::LocalMinimum && c.delta >= 0.0 {
                self.heap.push(c);
                return Ok(());
            }
            self.merge(c)?;
        }
    }

    fn merge(&mut self, c: Candidate) -> Result<(), SegmentError> {
        let (a, b) = (c.a, c.b);
        let (merged, stats, darts) = self.merged_energy(a, b)?;
        let delta = self.delta(a, b, &merged);
        let (rep_a, rep_b) = (self.rep[a as usize], self.rep[b as usize]);

        let top = self.record.top();
        let alpha = top.alpha_of(c.dart);
        let anchor = [top.sigma_of(c.dart), top.sigma_of(alpha)]
            .into_iter()
            .find(|&x| x != c.dart && x != alpha);
        let kernel = Kernel::contraction(top, &[c.dart])?;
        self.record.apply(&kernel)?;
        match anchor {
            Some(x) => self.record.reduce_around(x)?,
            None => self.record.reduce()?,
        };

        let (keep, gone) = if self.members[a as usize].len() >= self.members[b as usize].len() {
            (a, b)
        } else {
            (b, a)
        };
        let moved = core::mem::take(&mut self.members[gone as usize]);
        for &p in &moved {
            self.region[p as usize] = keep;
        }
        self.members[keep as usize].extend(moved);
        self.stats[keep as usize] = stats;
        self.energy[keep as usize] = merged;
        self.stamp[keep as usize] += 1;
        self.rep[keep as usize] = rep_a.min(rep_b);
        let top = self.record.top();
        self.dart[keep as usize] = darts
            .into_iter()
            .find(|&d| top.contains(d))
            .ok_or(PyramidError::Corrupt("merged region lost all its darts"))?;
        // double-edge removal may have taken the dart a neighbour was known by;
        // each neighbour keeps an edge to the merged region
        let top = self.record.top();
        for x in self.cycle(keep) {
            let a = top.alpha_of(x);
            let r = self.region_of(a);
            if r != BACKGROUND && r != keep && !top.contains(self.dart[r as usize]) {
                self.dart[r as usize] = a;
            }
        }
        self.regions -= 1;

        let energy = self.history.last().map_or(self.initial_energy, |m| m.energy) + delta;
        self.history.push(MergeRecord {
            level: self.record.levels(),
            rep_a,
            rep_b,
            delta,
            energy,
        });
        self.push_candidates(keep, false)
    }
}
