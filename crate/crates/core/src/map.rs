//! Combinatorial maps.
//!
//! A map is a triplet `(D, sigma, alpha)`: `sigma` is a permutation whose
//! cycles are the vertices (regions, in the segmentation setting) and `alpha`
//! a fixed-point free involution pairing the two darts of each edge. The dual
//! permutation `phi = sigma ∘ alpha` has the faces as cycles.
//!
//! Darts are signed non-zero integers. Storage is indexed by a dense *slot*
//! (`2(|d|-1)` for positive darts, `2(|d|-1)+1` for negative ones), so the
//! grid's `d`/`-d` pairs sit next to each other. The structure itself never
//! assumes `alpha(d) = -d`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::unionfind::UnionFind;

const NONE: u32 = u32::MAX;

/// A half-edge. The id is never zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dart(i32);

impl Dart {
    pub const fn new(id: i32) -> Option<Dart> {
        if id == 0 {
            None
        } else {
            Some(Dart(id))
        }
    }

    pub const fn id(self) -> i32 {
        self.0
    }

    /// Dense storage index.
    pub const fn slot(self) -> usize {
        if self.0 > 0 {
            2 * (self.0 as usize - 1)
        } else {
            2 * ((-(self.0 as i64)) as usize - 1) + 1
        }
    }

    pub const fn from_slot(slot: usize) -> Dart {
        let magnitude = (slot / 2 + 1) as i32;
        if slot % 2 == 0 {
            Dart(magnitude)
        } else {
            Dart(-magnitude)
        }
    }

    /// `-d`; this is the grid builder's alpha, not a property of maps in general.
    pub const fn negated(self) -> Dart {
        Dart(-self.0)
    }
}

/// Darts are ordered by slot: `1 < -1 < 2 < -2 < ...`.
impl Ord for Dart {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.slot().cmp(&other.slot())
    }
}

impl PartialOrd for Dart {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orbit {
    Sigma,
    Alpha,
    Phi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapError {
    UnknownDart(Dart),
    DuplicateDart(Dart),
    /// Raised by mutations that would break the map (contracting a self-loop, ...).
    InvalidOperation(&'static str),
}

impl fmt::Display for MapError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapError::UnknownDart(d) => write!(f, "dart {d} is not in the map"),
            MapError::DuplicateDart(d) => write!(f, "dart {d} appears twice"),
            MapError::InvalidOperation(what) => write!(f, "invalid map operation: {what}"),
        }
    }
}

impl core::error::Error for MapError {}

/// One broken invariant found by [`CombMap::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    AlphaFixedPoint(Dart),
    AlphaNotInvolution(Dart),
    /// `alpha(d)` or `sigma(d)` points outside the dart set.
    DanglingImage(Dart),
    /// `d` has zero or several sigma preimages.
    SigmaNotBijective(Dart),
    /// `V - E + F != 2` on the connected component containing `representative`.
    Euler {
        representative: Dart,
        vertices: usize,
        edges: usize,
        faces: usize,
    },
}

impl Violation {
    /// Short machine-readable tag.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::AlphaFixedPoint(_) => "alpha fixed point",
            Violation::AlphaNotInvolution(_) => "alpha not involution",
            Violation::DanglingImage(_) => "dangling image",
            Violation::SigmaNotBijective(_) => "sigma not bijective",
            Violation::Euler { .. } => "euler",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A combinatorial map over a set of signed darts.
#[derive(Clone, PartialEq, Eq)]
pub struct CombMap {
    sigma: Vec<u32>,
    sigma_inv: Vec<u32>,
    alpha: Vec<u32>,
    len: usize,
}

impl fmt::Debug for CombMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

impl CombMap {
    /// Empty map able to hold darts up to `slots` (see [`Dart::slot`]).
    pub fn with_slots(slots: usize) -> Self {
        CombMap {
            sigma: vec![NONE; slots],
            sigma_inv: vec![NONE; slots],
            alpha: vec![NONE; slots],
            len: 0,
        }
    }

    /// Builds a map from `(dart, sigma(dart), alpha(dart))` triples.
    ///
    /// Only membership is checked here; use [`CombMap::validate`] for the map
    /// invariants, so that broken maps can still be represented and reported.
    pub fn from_parts(parts: &[(Dart, Dart, Dart)]) -> Result<Self, MapError> {
        let slots = parts
            .iter()
            .map(|&(d, _, _)| d.slot() + 1)
            .max()
            .unwrap_or(0);
        let mut map = CombMap::with_slots(slots);
        for &(d, _, _) in parts {
            if map.sigma[d.slot()] != NONE {
                return Err(MapError::DuplicateDart(d));
            }
            // placeholder so membership tests work while filling
            map.sigma[d.slot()] = d.slot() as u32;
            map.len += 1;
        }
        for &(d, s, a) in parts {
            if !map.contains(s) {
                return Err(MapError::UnknownDart(s));
            }
            if !map.contains(a) {
                return Err(MapError::UnknownDart(a));
            }
            map.sigma[d.slot()] = s.slot() as u32;
            map.alpha[d.slot()] = a.slot() as u32;
        }
        for &(d, s, _) in parts {
            map.sigma_inv[s.slot()] = d.slot() as u32;
        }
        Ok(map)
    }

    /// Builds a map from its sigma cycles and its edges.
    pub fn from_cycles(cycles: &[Vec<Dart>], edges: &[(Dart, Dart)]) -> Result<Self, MapError> {
        let mut alpha = alloc::collections::BTreeMap::new();
        for &(a, b) in edges {
            if alpha.insert(a, b).is_some() {
                return Err(MapError::DuplicateDart(a));
            }
            if alpha.insert(b, a).is_some() {
                return Err(MapError::DuplicateDart(b));
            }
        }
        let mut parts = Vec::new();
        for cycle in cycles {
            for (i, &d) in cycle.iter().enumerate() {
                let s = cycle[(i + 1) % cycle.len()];
                let a = *alpha.get(&d).ok_or(MapError::UnknownDart(d))?;
                parts.push((d, s, a));
            }
        }
        if parts.len() != alpha.len() {
            let missing = alpha
                .keys()
                .find(|d| !cycles.iter().any(|c| c.contains(d)))
                .copied()
                .unwrap_or(Dart(1));
            return Err(MapError::UnknownDart(missing));
        }
        Self::from_parts(&parts)
    }

    /// Number of slots (an upper bound on the dart index space).
    pub fn slots(&self) -> usize {
        self.sigma.len()
    }

    /// Number of darts.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn edge_count(&self) -> usize {
        self.len / 2
    }

    #[inline]
    pub fn contains(&self, d: Dart) -> bool {
        self.sigma.get(d.slot()).is_some_and(|&s| s != NONE)
    }

    /// Darts in slot order.
    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        self.sigma
            .iter()
            .enumerate()
            .filter(|(_, &s)| s != NONE)
            .map(|(i, _)| Dart::from_slot(i))
    }

    fn check(&self, d: Dart) -> Result<(), MapError> {
        if self.contains(d) {
            Ok(())
        } else {
            Err(MapError::UnknownDart(d))
        }
    }

    pub fn sigma(&self, d: Dart) -> Result<Dart, MapError> {
        self.check(d)?;
        Ok(self.sigma_of(d))
    }

    pub fn alpha(&self, d: Dart) -> Result<Dart, MapError> {
        self.check(d)?;
        Ok(self.alpha_of(d))
    }

    /// `phi = sigma ∘ alpha`.
    pub fn phi(&self, d: Dart) -> Result<Dart, MapError> {
        self.check(d)?;
        Ok(self.phi_of(d))
    }

    /// Panics if `d` is not in the map.
    #[inline]
    pub fn sigma_of(&self, d: Dart) -> Dart {
        let s = self.sigma[d.slot()];
        assert!(s != NONE, "dart {d} is not in the map");
        Dart::from_slot(s as usize)
    }

    /// Panics if `d` is not in the map.
    #[inline]
    pub fn sigma_inv_of(&self, d: Dart) -> Dart {
        let s = self.sigma_inv[d.slot()];
        assert!(s != NONE, "dart {d} is not in the map");
        Dart::from_slot(s as usize)
    }

    /// Panics if `d` is not in the map.
    #[inline]
    pub fn alpha_of(&self, d: Dart) -> Dart {
        let a = self.alpha[d.slot()];
        assert!(a != NONE, "dart {d} is not in the map");
        Dart::from_slot(a as usize)
    }

    #[inline]
    pub fn phi_of(&self, d: Dart) -> Dart {
        self.sigma_of(self.alpha_of(d))
    }

    fn step(&self, d: Dart, orbit: Orbit) -> Dart {
        match orbit {
            Orbit::Sigma => self.sigma_of(d),
            Orbit::Alpha => self.alpha_of(d),
            Orbit::Phi => self.phi_of(d),
        }
    }

    /// The orbit of `d`, starting at `d`.
    pub fn cycle(&self, d: Dart, orbit: Orbit) -> Result<Vec<Dart>, MapError> {
        self.check(d)?;
        let mut out = vec![d];
        let mut x = self.step(d, orbit);
        while x != d {
            if out.len() > self.len {
                return Err(MapError::InvalidOperation("orbit does not close"));
            }
            out.push(x);
            x = self.step(x, orbit);
        }
        Ok(out)
    }

    /// One representative (the smallest dart) per cycle, with the cycle.
    pub fn cycles(&self, orbit: Orbit) -> Vec<Vec<Dart>> {
        let mut seen = vec![false; self.slots()];
        let mut out = Vec::new();
        for d in self.darts() {
            if seen[d.slot()] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = d;
            loop {
                seen[x.slot()] = true;
                cycle.push(x);
                x = self.step(x, orbit);
                if x == d || seen[x.slot()] {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    pub fn count_cycles(&self, orbit: Orbit) -> usize {
        self.cycles(orbit).len()
    }

    /// Checks that alpha is a fixed-point free involution, sigma a bijection,
    /// and `V - E + F = 2` on every connected component.
    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();
        let mut preimages = vec![0u32; self.slots()];
        let mut structural = false;
        for d in self.darts() {
            let s = self.sigma[d.slot()] as usize;
            let a = self.alpha[d.slot()];
            if !self.contains(Dart::from_slot(s)) {
                violations.push(Violation::DanglingImage(d));
                structural = true;
            } else {
                preimages[s] += 1;
            }
            if a == NONE || !self.contains(Dart::from_slot(a as usize)) {
                violations.push(Violation::DanglingImage(d));
                structural = true;
                continue;
            }
            let a = Dart::from_slot(a as usize);
            if a == d {
                violations.push(Violation::AlphaFixedPoint(d));
                structural = true;
            } else if self.alpha_of(a) != d {
                violations.push(Violation::AlphaNotInvolution(d));
                structural = true;
            }
        }
        for d in self.darts() {
            if preimages[d.slot()] != 1 {
                violations.push(Violation::SigmaNotBijective(d));
                structural = true;
            }
        }
        if structural {
            return Validation { violations };
        }

        let mut components = UnionFind::new(self.slots());
        for d in self.darts() {
            components.union(d.slot(), self.sigma[d.slot()] as usize);
            components.union(d.slot(), self.alpha[d.slot()] as usize);
        }
        // (vertices, darts, faces) per component root
        let mut counts = alloc::collections::BTreeMap::<usize, (usize, usize, usize)>::new();
        for d in self.darts() {
            counts.entry(components.find(d.slot())).or_default().1 += 1;
        }
        for cycle in self.cycles(Orbit::Sigma) {
            counts.get_mut(&components.find(cycle[0].slot())).unwrap().0 += 1;
        }
        for cycle in self.cycles(Orbit::Phi) {
            counts.get_mut(&components.find(cycle[0].slot())).unwrap().2 += 1;
        }
        for (root, (v, darts, f)) in counts {
            let e = darts / 2;
            if v + f != e + 2 {
                violations.push(Violation::Euler {
                    representative: Dart::from_slot(root),
                    vertices: v,
                    edges: e,
                    faces: f,
                });
            }
        }
        Validation { violations }
    }

    /// Text dump: a `darts <n>` header, then one line per sigma cycle.
    ///
    /// ```text
    /// darts 8
    /// 1 2 -3 -4
    /// -1 4 3 -2
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "darts {}", self.len);
        for cycle in self.cycles(Orbit::Sigma) {
            let mut first = true;
            for d in cycle {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{d}");
            }
            out.push('\n');
        }
        out
    }

    // ---- mutation, used while a pyramid level is being built ----

    #[inline]
    fn link(&mut self, from: Dart, to: Dart) {
        self.sigma[from.slot()] = to.slot() as u32;
        self.sigma_inv[to.slot()] = from.slot() as u32;
    }

    fn forget(&mut self, d: Dart) {
        self.sigma[d.slot()] = NONE;
        self.sigma_inv[d.slot()] = NONE;
        self.alpha[d.slot()] = NONE;
        self.len -= 1;
    }

    /// Removes a single dart from its sigma cycle. Its alpha partner is left
    /// dangling and must be re-paired with [`CombMap::pair`] or removed too.
    pub(crate) fn splice_out(&mut self, d: Dart) {
        let prev = self.sigma_inv_of(d);
        let next = self.sigma_of(d);
        if prev != d {
            self.link(prev, next);
        }
        self.forget(d);
    }

    /// Deletes the edge `{d, alpha(d)}`.
    pub(crate) fn remove_edge(&mut self, d: Dart) {
        let a = self.alpha_of(d);
        self.splice_out(d);
        self.splice_out(a);
    }

    /// Contracts the edge `{d, alpha(d)}`, merging its two sigma cycles.
    pub(crate) fn contract_edge(&mut self, d: Dart) -> Result<(), MapError> {
        let b = self.alpha_of(d);
        let (na, pa) = (self.sigma_of(d), self.sigma_inv_of(d));
        let (nb, pb) = (self.sigma_of(b), self.sigma_inv_of(b));
        // a self-loop has both darts on one cycle
        let mut x = na;
        while x != d {
            if x == b {
                return Err(MapError::InvalidOperation("contracting a self-loop"));
            }
            x = self.sigma_of(x);
        }
        let a_rest = na != d;
        let b_rest = nb != b;
        match (a_rest, b_rest) {
            (true, true) => {
                self.link(pb, na);
                self.link(pa, nb);
            }
            (true, false) => self.link(pa, na),
            (false, true) => self.link(pb, nb),
            (false, false) => {}
        }
        self.forget(d);
        self.forget(b);
        Ok(())
    }

    /// Inserts `d` with the given images, overwriting nothing else. Used when
    /// rebuilding a map dart by dart; the result must be validated by the caller.
    pub(crate) fn insert_raw(&mut self, d: Dart, s: Dart, a: Dart) {
        let need = d.slot().max(s.slot()).max(a.slot()) + 1;
        if need > self.slots() {
            self.sigma.resize(need, NONE);
            self.sigma_inv.resize(need, NONE);
            self.alpha.resize(need, NONE);
        }
        if self.sigma[d.slot()] == NONE {
            self.len += 1;
        }
        self.sigma[d.slot()] = s.slot() as u32;
        self.sigma_inv[s.slot()] = d.slot() as u32;
        self.alpha[d.slot()] = a.slot() as u32;
    }

    /// Sets `alpha(a) = b` and `alpha(b) = a`.
    pub(crate) fn pair(&mut self, a: Dart, b: Dart) {
        self.alpha[a.slot()] = b.slot() as u32;
        self.alpha[b.slot()] = a.slot() as u32;
    }
}
