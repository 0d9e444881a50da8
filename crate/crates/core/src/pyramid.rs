//! Combinatorial pyramids.
//!
//! A pyramid is the grid map `G0` reduced by a sequence of kernels. Each
//! non-empty kernel produces one new level. Levels are not stored: every base
//! dart records the level at which it disappeared and how (contracted, or
//! removed as an empty self-loop or as part of a double-edge chain), and the
//! map of the highest level is kept explicitly. The permutations of any
//! intermediate level are recovered from these per-dart records by walking
//! the base map.
//!
//! Double-edge chains `a1 .. ak` (edges in series through pointels where only
//! two edges meet) are reduced to a single edge `{a1, alpha(ak)}`: the two
//! darts leaving the chain's end junctions survive and are re-paired, every
//! other dart of the chain is removed. With this convention the receptive
//! segment of a surviving dart always starts with that dart.

use alloc::borrow::Cow;
use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{FreemanChain, GridMap};
use crate::map::{CombMap, Dart, MapError, Orbit};
use crate::unionfind::UnionFind;

const ALIVE: u32 = u32::MAX;
const NO_CHANGE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Contraction kernel: a forest of edges whose end vertices are merged.
    Contraction,
    /// Removal kernel of empty self-loops.
    RemovalSelfLoops,
    /// Removal kernel of empty double edges.
    RemovalDoubleEdges,
}

/// How a dart left the pyramid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DeathOp {
    Contracted,
    RemovedSelfLoop,
    RemovedDoubleEdge,
}

impl DeathOp {
    pub fn is_removal(self) -> bool {
        !matches!(self, DeathOp::Contracted)
    }
}

/// A set of darts to contract or remove.
///
/// Contraction and self-loop kernels hold whole edges (both darts). A
/// double-edge kernel holds the removed darts and the new `alpha` pairs of the
/// surviving chain ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub kind: KernelKind,
    pub darts: Vec<Dart>,
    pub relabel: Vec<(Dart, Dart)>,
}

impl Kernel {
    pub fn empty(kind: KernelKind) -> Self {
        Kernel {
            kind,
            darts: Vec::new(),
            relabel: Vec::new(),
        }
    }

    /// Contraction kernel of the given edges (one dart per edge is enough).
    pub fn contraction(map: &CombMap, edges: &[Dart]) -> Result<Self, PyramidError> {
        let mut darts = Vec::with_capacity(2 * edges.len());
        for &d in edges {
            darts.push(d);
            darts.push(map.alpha(d)?);
        }
        Ok(Kernel {
            kind: KernelKind::Contraction,
            darts,
            relabel: Vec::new(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PyramidError {
    Map(MapError),
    /// The kernel does not satisfy the requirements of its kind.
    InvalidKernel(&'static str),
    DeadDart { dart: Dart, level: u32 },
    /// The dart is a self-loop at the queried level and carries no boundary.
    FictiveDart(Dart),
    LevelOutOfRange(u32),
    /// The implicit encoding is inconsistent.
    Corrupt(&'static str),
}

impl fmt::Display for PyramidError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PyramidError::Map(e) => write!(f, "{e}"),
            PyramidError::InvalidKernel(why) => write!(f, "invalid kernel: {why}"),
            PyramidError::DeadDart { dart, level } => {
                write!(f, "dart {dart} does not survive at level {level}")
            }
            PyramidError::FictiveDart(d) => write!(f, "dart {d} is a self-loop"),
            PyramidError::LevelOutOfRange(l) => write!(f, "level {l} is above the pyramid top"),
            PyramidError::Corrupt(why) => write!(f, "corrupt pyramid: {why}"),
        }
    }
}

impl core::error::Error for PyramidError {}

impl From<MapError> for PyramidError {
    fn from(e: MapError) -> Self {
        PyramidError::Map(e)
    }
}

// ---------------------------------------------------------------------------
// kernels on explicit maps

fn check_forest(map: &CombMap, kernel: &Kernel) -> Result<(), PyramidError> {
    let mut vertex = vec![u32::MAX; map.slots()];
    for (i, cycle) in map.cycles(Orbit::Sigma).iter().enumerate() {
        for d in cycle {
            vertex[d.slot()] = i as u32;
        }
    }
    let mut uf = UnionFind::new(map.count_cycles(Orbit::Sigma));
    let mut seen = vec![false; map.slots()];
    for &d in &kernel.darts {
        if !map.contains(d) {
            return Err(PyramidError::Map(MapError::UnknownDart(d)));
        }
        let a = map.alpha_of(d);
        if !kernel.darts.contains(&a) {
            return Err(PyramidError::InvalidKernel("contraction kernel is not closed under alpha"));
        }
        if seen[d.slot()] {
            continue;
        }
        seen[d.slot()] = true;
        seen[a.slot()] = true;
        let (u, v) = (vertex[d.slot()] as usize, vertex[a.slot()] as usize);
        if u == v {
            return Err(PyramidError::InvalidKernel("contraction kernel contains a self-loop"));
        }
        if uf.union(u, v).is_none() {
            return Err(PyramidError::InvalidKernel("contraction kernel contains a cycle"));
        }
    }
    Ok(())
}

fn apply_contraction(map: &mut CombMap, kernel: &Kernel) -> Result<(), PyramidError> {
    if kernel.darts.len() > 2 {
        check_forest(map, kernel)?;
    }
    if let Some(&d) = kernel.darts.iter().find(|&&d| !map.contains(d)) {
        return Err(PyramidError::Map(MapError::UnknownDart(d)));
    }
    for &d in &kernel.darts {
        // the partner of an edge already contracted is gone
        if map.contains(d) {
            map.contract_edge(d).map_err(|_| {
                PyramidError::InvalidKernel("contraction kernel contains a self-loop")
            })?;
        }
    }
    Ok(())
}

/// `sigma(d) == alpha(d)`: the loop `d` encloses nothing. A vertex whose only
/// darts are the loop itself is left alone.
fn is_empty_self_loop(map: &CombMap, d: Dart) -> bool {
    let a = map.alpha_of(d);
    map.sigma_of(d) == a && map.sigma_of(a) != d
}

fn apply_removal(map: &mut CombMap, kernel: &Kernel) -> Result<(), PyramidError> {
    for &d in &kernel.darts {
        if !map.contains(d) {
            if kernel.kind == KernelKind::RemovalSelfLoops && kernel.darts.contains(&d) {
                // second dart of an edge already removed with its partner
                continue;
            }
            return Err(PyramidError::Map(MapError::UnknownDart(d)));
        }
    }
    match kernel.kind {
        KernelKind::RemovalSelfLoops => {
            for &d in &kernel.darts {
                if !map.contains(d) {
                    continue;
                }
                let a = map.alpha_of(d);
                if !is_empty_self_loop(map, d) && !is_empty_self_loop(map, a) {
                    return Err(PyramidError::InvalidKernel("edge is not an empty self-loop"));
                }
                map.remove_edge(d);
            }
        }
        KernelKind::RemovalDoubleEdges => {
            for &d in &kernel.darts {
                if map.cycle(d, Orbit::Phi)?.len() != 2 {
                    return Err(PyramidError::InvalidKernel(
                        "dart is not incident to a degree-2 dual vertex",
                    ));
                }
            }
            for &(a, b) in &kernel.relabel {
                if !map.contains(a) || !map.contains(b) || kernel.darts.contains(&a) || kernel.darts.contains(&b) {
                    return Err(PyramidError::InvalidKernel("relabelled darts must survive"));
                }
            }
            for &d in &kernel.darts {
                map.splice_out(d);
            }
            for &(a, b) in &kernel.relabel {
                map.pair(a, b);
            }
        }
        KernelKind::Contraction => {
            return Err(PyramidError::InvalidKernel("not a removal kernel"));
        }
    }
    Ok(())
}

/// Contracts a forest of `map`.
pub fn contract(map: &CombMap, kernel: &Kernel) -> Result<CombMap, PyramidError> {
    if kernel.kind != KernelKind::Contraction {
        return Err(PyramidError::InvalidKernel("not a contraction kernel"));
    }
    let mut out = map.clone();
    apply_contraction(&mut out, kernel)?;
    Ok(out)
}

/// Applies a removal kernel (self-loops or double edges).
pub fn remove(map: &CombMap, kernel: &Kernel) -> Result<CombMap, PyramidError> {
    let mut out = map.clone();
    apply_removal(&mut out, kernel)?;
    Ok(out)
}

/// All empty self-loops, iterated to closure: removing a loop can leave an
/// enclosing loop empty in turn.
pub fn find_rkesl(map: &CombMap) -> Kernel {
    let mut kernel = Kernel::empty(KernelKind::RemovalSelfLoops);
    for cycle in map.cycles(Orbit::Sigma) {
        cancel_self_loops(map, &cycle, &mut kernel.darts);
    }
    kernel
}

/// Empty self-loops on the sigma cycle of `d` only.
pub(crate) fn find_rkesl_around(map: &CombMap, d: Dart) -> Kernel {
    let mut kernel = Kernel::empty(KernelKind::RemovalSelfLoops);
    if let Ok(cycle) = map.cycle(d, Orbit::Sigma) {
        cancel_self_loops(map, &cycle, &mut kernel.darts);
    }
    kernel
}

/// On one sigma cycle, an empty self-loop is a dart directly followed by its
/// alpha partner. Removing it may make the neighbours adjacent, so the
/// closure is a bracket-matching reduction of the cyclic sequence. Removed
/// edges are pushed inner first; a cycle is never emptied entirely.
fn cancel_self_loops(map: &CombMap, cycle: &[Dart], out: &mut Vec<Dart>) {
    let mut stack: Vec<Dart> = Vec::with_capacity(cycle.len());
    let mut cancelled = Vec::new();
    for &d in cycle {
        match stack.last() {
            Some(&top) if map.alpha_of(top) == d => {
                stack.pop();
                cancelled.push((top, d));
            }
            _ => stack.push(d),
        }
    }
    if stack.is_empty() {
        // nested loops only: the outermost one is the last cancelled
        if let Some(outer) = cancelled.pop() {
            stack.extend([outer.0, outer.1]);
        }
    }
    // wrap-around: the end of the sequence is followed by its start
    let mut head = 0;
    while stack.len() - head >= 2 {
        let last = stack[stack.len() - 1];
        let first = stack[head];
        if map.alpha_of(last) != first {
            break;
        }
        if stack.len() - head == 2 {
            // the vertex would vanish: keep its last loop
            break;
        }
        stack.pop();
        head += 1;
        cancelled.push((last, first));
    }
    for (a, b) in cancelled {
        out.push(a);
        out.push(b);
    }
}

/// `d` leaves a degree-2 dual vertex.
#[inline]
fn on_degree_two_face(map: &CombMap, d: Dart) -> bool {
    let p = map.phi_of(d);
    p != d && map.phi_of(p) == d
}

/// Reduces every maximal chain of double edges to one edge.
///
/// A chain follows one side: `a(i+1) = sigma(a(i))` while the pointel between
/// them is a degree-2 dual vertex. Open chains run junction to junction and
/// keep the two darts leaving those junctions. Closed chains (a boundary with
/// no junction at all) keep the chain's smallest dart and the partner of its
/// predecessor.
pub fn find_rkede(map: &CombMap) -> Kernel {
    let seeds: Vec<Dart> = map.darts().collect();
    find_rkede_among(map, &seeds)
}

/// Double-edge chains with at least one dart among `seeds` or their partners.
pub(crate) fn find_rkede_among(map: &CombMap, seeds: &[Dart]) -> Kernel {
    let deg2 = |d: Dart| on_degree_two_face(map, d);
    let mut candidates: Vec<Dart> = seeds
        .iter()
        .filter(|&&d| map.contains(d))
        .flat_map(|&d| [d, map.alpha_of(d)])
        .collect();
    candidates.sort_unstable();
    candidates.dedup();
    let mut visited = BTreeSet::new();
    let mut kernel = Kernel::empty(KernelKind::RemovalDoubleEdges);

    let follow = |start: Dart| {
        let mut chain = vec![start];
        let mut x = start;
        while deg2(map.alpha_of(x)) {
            let next = map.sigma_of(x);
            if next == map.alpha_of(x) || next == start || chain.len() > map.len() {
                break;
            }
            chain.push(next);
            x = next;
        }
        chain
    };
    let mut emit = |chain: &[Dart], visited: &mut BTreeSet<Dart>| {
        for &x in chain {
            visited.insert(x);
            visited.insert(map.alpha_of(x));
        }
        if chain.len() < 2 {
            return;
        }
        let first = chain[0];
        let last = chain[chain.len() - 1];
        kernel.darts.push(map.alpha_of(first));
        for &x in &chain[1..chain.len() - 1] {
            kernel.darts.push(x);
            kernel.darts.push(map.alpha_of(x));
        }
        kernel.darts.push(last);
        kernel.relabel.push((first, map.alpha_of(last)));
    };

    // open chains, from the dart leaving the starting junction
    for &d in &candidates {
        if !visited.contains(&d) && !deg2(d) && deg2(map.alpha_of(d)) {
            let chain = follow(d);
            emit(&chain, &mut visited);
        }
    }
    // darts left between two degree-2 pointels lie on closed chains
    for &d in &candidates {
        if !visited.contains(&d) && deg2(d) && deg2(map.alpha_of(d)) {
            let chain = follow(d);
            emit(&chain, &mut visited);
        }
    }
    kernel
}

// ---------------------------------------------------------------------------
// implicit pyramid

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct AlphaChange {
    level: u32,
    value: Dart,
    prev: u32,
}

/// Implicit encoding of a pyramid over a grid map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PyramidRecord {
    grid: GridMap,
    death_level: Vec<u32>,
    death_op: Vec<Option<DeathOp>>,
    alpha_changes: Vec<AlphaChange>,
    last_change: Vec<u32>,
    kinds: Vec<KernelKind>,
    top: CombMap,
}

/// Per-dart fields of a [`PyramidRecord`], as read from or written to a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DartRecord {
    pub dart: Dart,
    /// `None` while the dart survives at the top level.
    pub death: Option<(u32, DeathOp)>,
    /// `(level, alpha)` for every re-pairing of this dart, in level order.
    pub alpha_changes: Vec<(u32, Dart)>,
}

impl PyramidRecord {
    /// The one-level pyramid made of `G0` only.
    pub fn new(grid: GridMap) -> Self {
        let slots = grid.map().slots();
        let top = grid.map().clone();
        PyramidRecord {
            grid,
            death_level: vec![ALIVE; slots],
            death_op: vec![None; slots],
            alpha_changes: Vec::new(),
            last_change: vec![NO_CHANGE; slots],
            kinds: Vec::new(),
            top,
        }
    }

    /// Rebuilds a record from its per-dart fields, the kernel kinds of each
    /// level and the sigma cycles of the top map.
    pub fn from_parts(
        grid: GridMap,
        kinds: Vec<KernelKind>,
        darts: &[DartRecord],
        top_cycles: &[Vec<Dart>],
    ) -> Result<Self, PyramidError> {
        let mut record = PyramidRecord::new(grid);
        record.kinds = kinds;
        let top_level = record.levels();
        for entry in darts {
            let d = entry.dart;
            if !record.grid.map().contains(d) {
                return Err(PyramidError::Map(MapError::UnknownDart(d)));
            }
            if let Some((level, op)) = entry.death {
                if level == 0 || level > top_level {
                    return Err(PyramidError::LevelOutOfRange(level));
                }
                record.death_level[d.slot()] = level;
                record.death_op[d.slot()] = Some(op);
            }
            for &(level, value) in &entry.alpha_changes {
                record.push_alpha_change(d, level, value);
            }
        }
        let mut top = CombMap::with_slots(record.grid.map().slots());
        let mut listed = 0;
        for cycle in top_cycles {
            for (i, &d) in cycle.iter().enumerate() {
                if !record.grid.map().contains(d) {
                    return Err(PyramidError::Map(MapError::UnknownDart(d)));
                }
                if record.death_level[d.slot()] != ALIVE || top.contains(d) {
                    return Err(PyramidError::Corrupt("top map lists a dead or repeated dart"));
                }
                top.insert_raw(d, cycle[(i + 1) % cycle.len()], record.alpha_at(d, top_level));
                listed += 1;
            }
        }
        let alive = record.death_level.iter().filter(|&&l| l == ALIVE).count();
        if listed != alive {
            return Err(PyramidError::Corrupt("top map does not list every surviving dart"));
        }
        record.top = top;
        Ok(record)
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    /// Index of the top level (0 when no kernel was applied).
    pub fn levels(&self) -> u32 {
        self.kinds.len() as u32
    }

    /// Kind of the kernel that produced each level `1..=levels()`.
    pub fn kinds(&self) -> &[KernelKind] {
        &self.kinds
    }

    pub fn top(&self) -> &CombMap {
        &self.top
    }

    /// Stored entries: a death record per base dart slot, the re-pairings,
    /// the top map's slots and one kind per level.
    pub fn footprint(&self) -> usize {
        self.death_level.len() + self.alpha_changes.len() + self.top.slots() + self.kinds.len()
    }

    /// Level at which `d` disappears, with the operation, or `None` if it
    /// survives at the top.
    pub fn death(&self, d: Dart) -> Option<(u32, DeathOp)> {
        let l = self.death_level[d.slot()];
        (l != ALIVE).then(|| (l, self.death_op[d.slot()].expect("dead darts have an op")))
    }

    /// Per-dart fields, in slot order.
    pub fn dart_records(&self) -> Vec<DartRecord> {
        self.grid
            .map()
            .darts()
            .map(|d| DartRecord {
                dart: d,
                death: self.death(d),
                alpha_changes: self.alpha_history(d),
            })
            .collect()
    }

    fn alpha_history(&self, d: Dart) -> Vec<(u32, Dart)> {
        let mut out = Vec::new();
        let mut i = self.last_change[d.slot()];
        while i != NO_CHANGE {
            let c = self.alpha_changes[i as usize];
            out.push((c.level, c.value));
            i = c.prev;
        }
        out.reverse();
        out
    }

    fn push_alpha_change(&mut self, d: Dart, level: u32, value: Dart) {
        let prev = self.last_change[d.slot()];
        self.last_change[d.slot()] = self.alpha_changes.len() as u32;
        self.alpha_changes.push(AlphaChange { level, value, prev });
    }

    #[inline]
    pub fn is_alive(&self, d: Dart, level: u32) -> bool {
        self.death_level[d.slot()] > level
    }

    fn check_level(&self, level: u32) -> Result<(), PyramidError> {
        if level > self.levels() {
            Err(PyramidError::LevelOutOfRange(level))
        } else {
            Ok(())
        }
    }

    fn check_alive(&self, d: Dart, level: u32) -> Result<(), PyramidError> {
        self.check_level(level)?;
        if !self.grid.map().contains(d) {
            return Err(PyramidError::Map(MapError::UnknownDart(d)));
        }
        if !self.is_alive(d, level) {
            return Err(PyramidError::DeadDart { dart: d, level });
        }
        Ok(())
    }

    /// `alpha` of `d` as it stood at `level`.
    pub fn alpha_at(&self, d: Dart, level: u32) -> Dart {
        let mut i = self.last_change[d.slot()];
        while i != NO_CHANGE {
            let c = self.alpha_changes[i as usize];
            if c.level <= level {
                return c.value;
            }
            i = c.prev;
        }
        self.grid.map().alpha_of(d)
    }

    /// `sigma` at `level`, answered from the per-dart records.
    ///
    /// Starting from `sigma0(d)`, dead darts are skipped: a removed dart `x`
    /// continues with `sigma0(x)`, a contracted one with
    /// `sigma0(alpha(x))` where `alpha` is taken at the level of contraction.
    pub fn sigma_at(&self, d: Dart, level: u32) -> Result<Dart, PyramidError> {
        self.check_alive(d, level)?;
        if level == self.levels() {
            return Ok(self.top.sigma_of(d));
        }
        let base = self.grid.map();
        let mut x = base.sigma_of(d);
        for _ in 0..=base.len() {
            if self.is_alive(x, level) {
                return Ok(x);
            }
            x = match self.death_op[x.slot()] {
                Some(DeathOp::Contracted) => {
                    base.sigma_of(self.alpha_at(x, self.death_level[x.slot()] - 1))
                }
                _ => base.sigma_of(x),
            };
        }
        Err(PyramidError::Corrupt("sigma walk does not terminate"))
    }

    /// The explicit map of `level`.
    pub fn level_map(&self, level: u32) -> Result<CombMap, PyramidError> {
        self.check_level(level)?;
        if level == self.levels() {
            return Ok(self.top.clone());
        }
        let mut map = CombMap::with_slots(self.grid.map().slots());
        for d in self.grid.map().darts() {
            if self.is_alive(d, level) {
                let s = self.sigma_at(d, level)?;
                map.insert_raw(d, s, self.alpha_at(d, level));
            }
        }
        Ok(map)
    }

    /// View on one level, with its explicit map.
    pub fn view(&self, level: u32) -> Result<LevelView<'_>, PyramidError> {
        let map = if level == self.levels() {
            Cow::Borrowed(&self.top)
        } else {
            Cow::Owned(self.level_map(level)?)
        };
        Ok(LevelView {
            record: self,
            level,
            map,
        })
    }

    pub fn top_view(&self) -> LevelView<'_> {
        LevelView {
            record: self,
            level: self.levels(),
            map: Cow::Borrowed(&self.top),
        }
    }

    /// Base darts embedding the level dart `d`.
    ///
    /// The sequence starts at `d`; each next dart is the first of
    /// `phi0(alpha0(prev)), phi0^2(alpha0(prev)), ...` that survives at `level`
    /// or was removed in a double-edge chain. The walk stops before a
    /// surviving dart, and the last base dart is the partner of `alpha(d)`.
    pub fn receptive_segment(&self, d: Dart, level: u32) -> Result<Vec<Dart>, PyramidError> {
        self.check_alive(d, level)?;
        let a = self.alpha_at(d, level);
        let mut x = self.sigma_at(d, level)?;
        for _ in 0..=self.grid.map().len() {
            if x == a {
                return Err(PyramidError::FictiveDart(d));
            }
            if x == d {
                break;
            }
            x = self.sigma_at(x, level)?;
        }
        let mut out = Vec::new();
        self.segment_walk(d, level, &mut out)?;
        Ok(out)
    }

    /// Receptive segment without the self-loop check; appends to `out`.
    pub(crate) fn segment_walk(&self, d: Dart, level: u32, out: &mut Vec<Dart>) -> Result<(), PyramidError> {
        let base = self.grid.map();
        let start = out.len();
        out.push(d);
        let mut x = d;
        'outer: loop {
            if out.len() - start > base.len() {
                return Err(PyramidError::Corrupt("receptive segment does not terminate"));
            }
            let mut z = base.alpha_of(x);
            for _ in 0..3 {
                z = base.phi_of(z);
                if self.is_alive(z, level) {
                    break 'outer;
                }
                if self.death_op[z.slot()] == Some(DeathOp::RemovedDoubleEdge) {
                    out.push(z);
                    x = z;
                    continue 'outer;
                }
            }
            return Err(PyramidError::Corrupt("receptive segment lost its boundary"));
        }
        if base.alpha_of(x) != self.alpha_at(d, level) {
            return Err(PyramidError::Corrupt("receptive segment ends away from alpha(d)"));
        }
        Ok(())
    }

    /// Freeman code sequence of the receptive segment of `d`.
    pub fn segment(&self, d: Dart, level: u32) -> Result<FreemanChain, PyramidError> {
        let darts = self.receptive_segment(d, level)?;
        Ok(self.grid.chain_of(&darts))
    }

    /// Region label of every pixel at `level`, dense and numbered in raster
    /// order of first appearance. Pixels merged with the background share
    /// its region but still get a label.
    pub fn labels(&self, level: u32) -> Result<Vec<u32>, PyramidError> {
        self.check_level(level)?;
        let n = self.grid.pixel_count();
        let node = |d: Dart| self.grid.owner(d).unwrap_or(n);
        let mut uf = UnionFind::new(n + 1);
        for d in self.grid.map().darts() {
            let l = self.death_level[d.slot()];
            if l <= level && self.death_op[d.slot()] == Some(DeathOp::Contracted) {
                uf.union(node(d), node(self.alpha_at(d, l - 1)));
            }
        }
        let mut dense = vec![u32::MAX; n + 1];
        let mut next = 0;
        let mut out = Vec::with_capacity(n);
        for p in 0..n {
            let r = uf.find(p);
            if dense[r] == u32::MAX {
                dense[r] = next;
                next += 1;
            }
            out.push(dense[r]);
        }
        Ok(out)
    }

    /// Applies a kernel to the top map, creating a new level. Empty kernels
    /// are ignored and `false` is returned.
    pub fn apply(&mut self, kernel: &Kernel) -> Result<bool, PyramidError> {
        if kernel.is_empty() {
            return Ok(false);
        }
        match kernel.kind {
            KernelKind::Contraction => apply_contraction(&mut self.top, kernel)?,
            _ => apply_removal(&mut self.top, kernel)?,
        }
        let level = self.levels() + 1;
        let op = match kernel.kind {
            KernelKind::Contraction => DeathOp::Contracted,
            KernelKind::RemovalSelfLoops => DeathOp::RemovedSelfLoop,
            KernelKind::RemovalDoubleEdges => DeathOp::RemovedDoubleEdge,
        };
        for &d in &kernel.darts {
            if self.death_level[d.slot()] == ALIVE {
                self.death_level[d.slot()] = level;
                self.death_op[d.slot()] = Some(op);
            }
        }
        for &(a, b) in &kernel.relabel {
            self.push_alpha_change(a, level, b);
            self.push_alpha_change(b, level, a);
        }
        self.kinds.push(kernel.kind);
        Ok(true)
    }

    /// Removes empty self-loops then double-edge chains until neither is left.
    /// Returns the number of levels created.
    pub fn reduce(&mut self) -> Result<u32, PyramidError> {
        self.reduce_with(None, &mut |_| {})
    }

    /// [`PyramidRecord::reduce`] restricted to the sigma cycle of `d`, which
    /// is where a single contraction can create redundant edges.
    pub fn reduce_around(&mut self, d: Dart) -> Result<u32, PyramidError> {
        self.reduce_with(Some(d), &mut |_| {})
    }

    pub(crate) fn reduce_with(
        &mut self,
        around: Option<Dart>,
        log: &mut dyn FnMut(&Kernel),
    ) -> Result<u32, PyramidError> {
        let mut created = 0;
        let mut anchor = around;
        loop {
            let esl = match anchor {
                Some(d) => find_rkesl_around(&self.top, d),
                None => find_rkesl(&self.top),
            };
            if let Some(d) = anchor {
                if esl.darts.contains(&d) {
                    let cycle = self.top.cycle(d, Orbit::Sigma)?;
                    anchor = cycle.into_iter().find(|x| !esl.darts.contains(x));
                }
            }
            if self.apply(&esl)? {
                log(&esl);
                created += 1;
            }
            let ede = match anchor {
                Some(d) => {
                    let seeds = self.top.cycle(d, Orbit::Sigma)?;
                    find_rkede_among(&self.top, &seeds)
                }
                None => find_rkede(&self.top),
            };
            if let Some(d) = anchor {
                if ede.darts.contains(&d) {
                    let cycle = self.top.cycle(d, Orbit::Sigma)?;
                    anchor = cycle.into_iter().find(|x| !ede.darts.contains(x));
                }
            }
            if self.apply(&ede)? {
                log(&ede);
                created += 1;
            }
            if ede.is_empty() {
                return Ok(created);
            }
        }
    }
}

/// A pyramid under construction, optionally logging every applied kernel.
#[derive(Clone, Debug)]
pub struct PyramidBuilder {
    record: PyramidRecord,
    log: Option<Vec<Kernel>>,
}

impl PyramidBuilder {
    pub fn new(grid: GridMap) -> Self {
        PyramidBuilder {
            record: PyramidRecord::new(grid),
            log: None,
        }
    }

    /// Keeps a copy of every applied kernel, for replay checks.
    pub fn with_kernel_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn record(&self) -> &PyramidRecord {
        &self.record
    }

    pub fn kernels(&self) -> Option<&[Kernel]> {
        self.log.as_deref()
    }

    pub fn apply(&mut self, kernel: &Kernel) -> Result<bool, PyramidError> {
        let applied = self.record.apply(kernel)?;
        if applied {
            if let Some(log) = &mut self.log {
                log.push(kernel.clone());
            }
        }
        Ok(applied)
    }

    pub fn reduce(&mut self) -> Result<u32, PyramidError> {
        self.reduce_inner(None)
    }

    pub fn reduce_around(&mut self, d: Dart) -> Result<u32, PyramidError> {
        self.reduce_inner(Some(d))
    }

    fn reduce_inner(&mut self, around: Option<Dart>) -> Result<u32, PyramidError> {
        let mut logged = Vec::new();
        let created = self.record.reduce_with(around, &mut |k| logged.push(k.clone()))?;
        if let Some(log) = &mut self.log {
            log.extend(logged);
        }
        Ok(created)
    }

    pub fn into_record(self) -> PyramidRecord {
        self.record
    }

    pub fn into_parts(self) -> (PyramidRecord, Option<Vec<Kernel>>) {
        (self.record, self.log)
    }
}

/// One level of a pyramid with its explicit map.
#[derive(Clone, Debug)]
pub struct LevelView<'a> {
    record: &'a PyramidRecord,
    level: u32,
    map: Cow<'a, CombMap>,
}

impl<'a> LevelView<'a> {
    pub fn record(&self) -> &'a PyramidRecord {
        self.record
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn map(&self) -> &CombMap {
        &self.map
    }

    pub fn grid(&self) -> &'a GridMap {
        self.record.grid()
    }

    /// Receptive segment of a separating dart, appended to `out`.
    pub fn segment_into(&self, d: Dart, out: &mut Vec<Dart>) -> Result<(), PyramidError> {
        if !self.map.contains(d) {
            return Err(PyramidError::DeadDart {
                dart: d,
                level: self.level,
            });
        }
        self.record.segment_walk(d, self.level, out)
    }

    pub fn receptive_segment(&self, d: Dart) -> Result<Vec<Dart>, PyramidError> {
        if crate::boundary::is_fictive(&self.map, d) {
            return Err(PyramidError::FictiveDart(d));
        }
        let mut out = Vec::new();
        self.segment_into(d, &mut out)?;
        Ok(out)
    }

    pub fn segment(&self, d: Dart) -> Result<FreemanChain, PyramidError> {
        Ok(self.grid().chain_of(&self.receptive_segment(d)?))
    }
}
