//! Arithmetic recognition of 4-connected digital straight segments.
//!
//! A standard line is the set of lattice points with
//! `mu <= a*x - b*y < mu + |a| + |b|`. A run of curve points is a DSS when
//! some standard line contains it; the characteristics of the run are those
//! of the line with the smallest `|a| + |b|`.
//!
//! The recognizer works in a local frame spanned by the two Freeman codes of
//! the run, where every move is `(1, 0)` or `(0, 1)` and the line has
//! non-negative slope. Extensions at either end are O(1) and keep the four
//! leaning points of the run.

use alloc::vec::Vec;
use core::fmt;

use crate::grid::{FreemanChain, FreemanCode, Pointel};
use crate::math;

/// Characteristics of a recognized segment in image coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DssCharacteristics {
    pub a: i64,
    pub b: i64,
    pub mu: i64,
    /// Orientation of the segment in `[0, 2pi)`, following the traversal.
    pub theta: f64,
}

impl DssCharacteristics {
    /// `a*x - b*y` for a point.
    pub fn remainder(&self, p: Pointel) -> i64 {
        self.a * p.x as i64 - self.b * p.y as i64
    }

    /// The point lies on the standard line.
    pub fn contains(&self, p: Pointel) -> bool {
        let r = self.remainder(p);
        self.mu <= r && r < self.mu + self.a.abs() + self.b.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Local {
    u: i64,
    v: i64,
}

/// Incremental recognizer of one DSS.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dss {
    /// Global position of the local origin.
    origin: Pointel,
    /// `(c1, c2)` with `c2` the code after `c1` counter-clockwise; `None`
    /// while the run uses at most one code.
    frame: Option<(FreemanCode, FreemanCode)>,
    /// The only code seen so far, before the frame is fixed.
    single: Option<FreemanCode>,
    first: Local,
    last: Local,
    a: i64,
    b: i64,
    mu: i64,
    uf: Local,
    ul: Local,
    lf: Local,
    ll: Local,
}

/// Why an extension was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Refusal {
    /// The move goes back along an axis already used.
    Reversal,
    /// A third Freeman code.
    ThirdCode,
    /// The new point is off every standard line through the run.
    OffLine,
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refusal::Reversal => "move reverses the run",
            Refusal::ThirdCode => "run would use three codes",
            Refusal::OffLine => "point is off the line",
        })
    }
}

const ORIGIN: Local = Local { u: 0, v: 0 };

impl Dss {
    /// The one-point segment at `p`.
    pub fn new(p: Pointel) -> Self {
        Dss {
            origin: p,
            frame: None,
            single: None,
            first: ORIGIN,
            last: ORIGIN,
            a: 0,
            b: 0,
            mu: 0,
            uf: ORIGIN,
            ul: ORIGIN,
            lf: ORIGIN,
            ll: ORIGIN,
        }
    }

    /// Number of moves in the run.
    pub fn len(&self) -> usize {
        ((self.last.u - self.first.u) + (self.last.v - self.first.v)) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn first_point(&self) -> Pointel {
        self.to_global(self.first)
    }

    pub fn last_point(&self) -> Pointel {
        self.to_global(self.last)
    }

    fn axes(&self) -> (FreemanCode, FreemanCode) {
        match (self.frame, self.single) {
            (Some(f), _) => f,
            (None, Some(c)) => (c, FreemanCode::ALL[(c.as_u8() as usize + 1) % 4]),
            (None, None) => (FreemanCode::East, FreemanCode::North),
        }
    }

    fn to_global(&self, l: Local) -> Pointel {
        let (c1, c2) = self.axes();
        let (e1, e2) = (c1.delta(), c2.delta());
        Pointel::new(
            self.origin.x + (l.u * e1.0 as i64 + l.v * e2.0 as i64) as i32,
            self.origin.y + (l.u * e1.1 as i64 + l.v * e2.1 as i64) as i32,
        )
    }

    /// Local unit move for `code`, fixing the frame if needed.
    fn local_move(&self, code: FreemanCode) -> Result<(Self, Local), Refusal> {
        let mut next = *self;
        if let Some((c1, c2)) = self.frame {
            return if code == c1 {
                Ok((next, Local { u: 1, v: 0 }))
            } else if code == c2 {
                Ok((next, Local { u: 0, v: 1 }))
            } else if code == c1.opposite() || code == c2.opposite() {
                Err(Refusal::Reversal)
            } else {
                Err(Refusal::ThirdCode)
            };
        }
        match self.single {
            None => {
                next.single = Some(code);
                Ok((next, Local { u: 1, v: 0 }))
            }
            Some(c) if c == code => Ok((next, Local { u: 1, v: 0 })),
            Some(c) if c == code.opposite() => Err(Refusal::Reversal),
            Some(c) => {
                // Seen points lie on the c axis. Re-express them in the frame
                // (c1, c2) with c2 following c1 counter-clockwise.
                let ccw = FreemanCode::ALL[(c.as_u8() as usize + 1) % 4];
                let (frame, swap) = if code == ccw { ((c, code), false) } else { ((code, c), true) };
                next.frame = Some(frame);
                next.single = None;
                if swap {
                    for l in [
                        &mut next.first,
                        &mut next.last,
                        &mut next.uf,
                        &mut next.ul,
                        &mut next.lf,
                        &mut next.ll,
                    ] {
                        *l = Local { u: l.v, v: l.u };
                    }
                    // points on the v axis: a = 1, b = 0, every point leans on both sides
                    next.a = 1;
                    next.b = 0;
                    next.mu = 0;
                    Ok((next, Local { u: 1, v: 0 }))
                } else {
                    Ok((next, Local { u: 0, v: 1 }))
                }
            }
        }
    }

    fn remainder(&self, l: Local) -> i64 {
        self.a * l.u - self.b * l.v
    }

    /// Tries to append the move `code` after the last point.
    pub fn extend_front(&self, code: FreemanCode) -> Result<Dss, Refusal> {
        let (mut s, step) = self.local_move(code)?;
        let m = Local {
            u: s.last.u + step.u,
            v: s.last.v + step.v,
        };
        if s.is_empty() {
            // second point: the axis through both
            s.a = step.v;
            s.b = step.u;
            s.mu = s.remainder(m);
            s.last = m;
            s.uf = s.first;
            s.lf = s.first;
            s.ul = m;
            s.ll = m;
            return Ok(s);
        }
        let r = s.remainder(m);
        let w = s.a + s.b;
        if s.mu <= r && r < s.mu + w {
            if r == s.mu {
                s.ul = m;
            }
            if r == s.mu + w - 1 {
                s.ll = m;
            }
        } else if r == s.mu - 1 {
            s.ul = m;
            s.lf = s.ll;
            s.a = m.v - s.uf.v;
            s.b = m.u - s.uf.u;
            s.mu = s.a * m.u - s.b * m.v;
        } else if r == s.mu + w {
            s.ll = m;
            s.uf = s.ul;
            s.a = m.v - s.lf.v;
            s.b = m.u - s.lf.u;
            s.mu = s.a * m.u - s.b * m.v - s.a - s.b + 1;
        } else {
            return Err(Refusal::OffLine);
        }
        s.last = m;
        Ok(s)
    }

    /// Tries to prepend a point before the first one; `code` is the move from
    /// the new point to the current first point.
    pub fn extend_back(&self, code: FreemanCode) -> Result<Dss, Refusal> {
        let (mut s, step) = self.local_move(code)?;
        let m = Local {
            u: s.first.u - step.u,
            v: s.first.v - step.v,
        };
        if s.is_empty() {
            s.a = step.v;
            s.b = step.u;
            s.mu = s.remainder(m);
            s.first = m;
            s.uf = m;
            s.lf = m;
            s.ul = s.last;
            s.ll = s.last;
            return Ok(s);
        }
        let r = s.remainder(m);
        let w = s.a + s.b;
        if s.mu <= r && r < s.mu + w {
            if r == s.mu {
                s.uf = m;
            }
            if r == s.mu + w - 1 {
                s.lf = m;
            }
        } else if r == s.mu - 1 {
            s.uf = m;
            s.ll = s.lf;
            s.a = s.ul.v - m.v;
            s.b = s.ul.u - m.u;
            s.mu = s.a * m.u - s.b * m.v;
        } else if r == s.mu + w {
            s.lf = m;
            s.ul = s.uf;
            s.a = s.ll.v - m.v;
            s.b = s.ll.u - m.u;
            s.mu = s.a * m.u - s.b * m.v - s.a - s.b + 1;
        } else {
            return Err(Refusal::OffLine);
        }
        s.first = m;
        Ok(s)
    }

    /// Characteristics in image coordinates; `None` for a single point.
    pub fn characteristics(&self) -> Option<DssCharacteristics> {
        if self.is_empty() {
            return None;
        }
        let (c1, c2) = self.axes();
        let (e1, e2) = (c1.delta(), c2.delta());
        let (e1, e2) = ((e1.0 as i64, e1.1 as i64), (e2.0 as i64, e2.1 as i64));
        // a*u - b*v = w . (P - O) with w = a*e1 - b*e2
        let w = (self.a * e1.0 - self.b * e2.0, self.a * e1.1 - self.b * e2.1);
        let mu = self.mu + w.0 * self.origin.x as i64 + w.1 * self.origin.y as i64;
        let dir = (self.b * e1.0 + self.a * e2.0, self.b * e1.1 + self.a * e2.1);
        Some(DssCharacteristics {
            a: w.0,
            b: -w.1,
            mu,
            theta: math::wrap_tau(math::atan2(dir.1 as f64, dir.0 as f64)),
        })
    }

    /// Direction of the segment in `[0, 2pi)`; `None` for a single point.
    pub fn direction(&self) -> Option<f64> {
        self.characteristics().map(|c| c.theta)
    }
}

/// A maximal segment of a chain: points `start ..= start + len` (indices
/// taken modulo the chain length on closed chains).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaximalSegment {
    pub start: usize,
    /// Number of moves.
    pub len: usize,
    pub dss: DssCharacteristics,
}

impl MaximalSegment {
    /// Index of the last point, not reduced modulo the chain length.
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverError {
    /// The chain does not return to its start.
    Open,
    /// Fewer than four moves.
    TooShort,
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::Open => f.write_str("chain is not closed"),
            CoverError::TooShort => f.write_str("chain has fewer than four moves"),
        }
    }
}

/// Maximal segments with the number of elementary recognizer steps spent.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub segments: Vec<MaximalSegment>,
    pub operations: usize,
}

/// Maximal segments of a closed chain in curve order. The first segment is
/// the one containing the first move and starting earliest; segments may
/// straddle the start point.
pub fn maximal_segments(chain: &FreemanChain) -> Result<Vec<MaximalSegment>, CoverError> {
    maximal_segments_counted(chain).map(|c| c.segments)
}

pub fn maximal_segments_counted(chain: &FreemanChain) -> Result<Cover, CoverError> {
    let n = chain.len();
    if n < 4 {
        return Err(CoverError::TooShort);
    }
    if !chain.is_closed() {
        return Err(CoverError::Open);
    }
    let codes = &chain.codes;
    let points = chain.points();
    let code = |i: i64| codes[i.rem_euclid(n as i64) as usize];
    let point = |i: i64| points[i.rem_euclid(n as i64) as usize];
    let mut ops = 0usize;

    // first segment: grow forward from point 0, then backward
    let mut s = Dss::new(point(0));
    let mut j = 0i64;
    while let Ok(t) = s.extend_front(code(j)) {
        s = t;
        j += 1;
        ops += 1;
    }
    let mut i = 0i64;
    while let Ok(t) = s.extend_back(code(i - 1)) {
        s = t;
        i -= 1;
        ops += 1;
    }
    let first_start = i;
    let mut segments = Vec::new();
    push_segment(&mut segments, i, &s, n);

    loop {
        // next segment: the longest back-extension of [j, j + 1], then forward
        let mut t = Dss::new(point(j));
        t = t.extend_front(code(j)).expect("two points are always straight");
        let mut ni = j;
        let mut nj = j + 1;
        ops += 1;
        while let Ok(u) = t.extend_back(code(ni - 1)) {
            t = u;
            ni -= 1;
            ops += 1;
        }
        if ni >= first_start + n as i64 {
            break;
        }
        while let Ok(u) = t.extend_front(code(nj)) {
            t = u;
            nj += 1;
            ops += 1;
        }
        push_segment(&mut segments, ni, &t, n);
        j = nj;
    }
    Ok(Cover {
        segments,
        operations: ops,
    })
}

fn push_segment(out: &mut Vec<MaximalSegment>, start: i64, s: &Dss, n: usize) {
    out.push(MaximalSegment {
        start: start.rem_euclid(n as i64) as usize,
        len: s.len(),
        dss: s.characteristics().expect("segments have at least one move"),
    });
}

/// Maximal segments of an open chain, in order. Empty chains have none.
pub fn maximal_segments_open(chain: &FreemanChain) -> Vec<MaximalSegment> {
    let n = chain.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let codes = &chain.codes;
    let points = chain.points();
    let mut s = Dss::new(points[0]);
    let mut j = 0;
    while j < n {
        match s.extend_front(codes[j]) {
            Ok(t) => {
                s = t;
                j += 1;
            }
            Err(_) => break,
        }
    }
    out.push(MaximalSegment {
        start: 0,
        len: s.len(),
        dss: s.characteristics().expect("at least one move"),
    });
    while j < n {
        // the first move left out must be in the next segment
        let mut t = Dss::new(points[j]).extend_front(codes[j]).expect("two points");
        let mut i = j;
        j += 1;
        while i > 0 {
            match t.extend_back(codes[i - 1]) {
                Ok(u) => {
                    t = u;
                    i -= 1;
                }
                Err(_) => break,
            }
        }
        while j < n {
            match t.extend_front(codes[j]) {
                Ok(u) => {
                    t = u;
                    j += 1;
                }
                Err(_) => break,
            }
        }
        out.push(MaximalSegment {
            start: i,
            len: t.len(),
            dss: t.characteristics().expect("at least one move"),
        });
    }
    out
}

/// Reduced `(a, b)` check, used by tests and debug assertions.
pub fn is_reduced(c: &DssCharacteristics) -> bool {
    c.a == 0 || c.b == 0 || math::gcd(c.a, c.b) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, PI};
    use FreemanCode::*;

    fn run(codes: &[FreemanCode]) -> Result<Dss, Refusal> {
        let mut s = Dss::new(Pointel::new(0, 0));
        for &c in codes {
            s = s.extend_front(c)?;
        }
        Ok(s)
    }

    #[test]
    fn horizontal_run() {
        let c = run(&[East, East, East]).unwrap().characteristics().unwrap();
        assert_eq!((c.a.abs(), c.b.abs()), (0, 1));
        assert_eq!(c.theta, 0.0);
    }

    #[test]
    fn single_point_has_no_direction() {
        assert!(Dss::new(Pointel::new(3, 4)).direction().is_none());
        assert!(run(&[North]).unwrap().direction().is_some());
    }

    #[test]
    fn staircase_has_unit_slope() {
        let c = run(&[East, South, East, South]).unwrap().characteristics().unwrap();
        assert_eq!((c.a.abs(), c.b.abs()), (1, 1));
        assert!((c.theta - FRAC_PI_4).abs() < 1e-12);
        let r = run(&[West, North, West, North]).unwrap().direction().unwrap();
        assert!((r - (FRAC_PI_4 + PI)).abs() < 1e-12);
    }

    #[test]
    fn refusals() {
        assert_eq!(run(&[East, West]).unwrap_err(), Refusal::Reversal);
        assert_eq!(run(&[East, North, West]).unwrap_err(), Refusal::Reversal);
        assert_eq!(run(&[East, East, North, North, North, North]).unwrap_err(), Refusal::OffLine);
    }

    #[test]
    fn back_mirrors_front() {
        let codes = [East, East, North, East, East, North, East];
        let front = run(&codes).unwrap().characteristics().unwrap();
        let end = run(&codes).unwrap().last_point();
        let mut s = Dss::new(end);
        for &c in codes.iter().rev() {
            s = s.extend_back(c).unwrap();
        }
        assert_eq!(s.first_point(), Pointel::new(0, 0));
        let back = s.characteristics().unwrap();
        assert_eq!((back.a, back.b, back.mu), (front.a, front.b, front.mu));
        assert!((back.theta - front.theta).abs() < 1e-12);
    }

    #[test]
    fn square_cover() {
        let mut codes = Vec::new();
        for c in [North, East, South, West] {
            codes.extend(core::iter::repeat(c).take(5));
        }
        let chain = FreemanChain::new(Pointel::new(0, 5), codes);
        let segs = maximal_segments(&chain).unwrap();
        assert_eq!(segs.len(), 8);
        assert!(segs.iter().all(|s| s.len == 6));
    }

    #[test]
    fn cover_rejects_bad_chains() {
        let open = FreemanChain::new(Pointel::new(0, 0), alloc::vec![East; 5]);
        assert_eq!(maximal_segments(&open), Err(CoverError::Open));
        let short = FreemanChain::new(Pointel::new(0, 0), alloc::vec![East, West]);
        assert_eq!(maximal_segments(&short), Err(CoverError::TooShort));
    }
}
