//! Text files for pyramids and merge histories.
//!
//! Pyramid file, line oriented:
//!
//! ```text
//! dgpyr-pyramid 1
//! size <width> <height>
//! levels <L>
//! kinds <k1> ... <kL>
//! darts <N>
//! <dart> <death level | -> <death op | -> [<level>:<alpha> ...]
//! ...
//! top <K>
//! <sigma cycle of the top map>
//! ...
//! ```
//!
//! Kernel kinds and death ops are `c` (contraction), `s` (empty
//! self-loops) and `e` (empty double edges). Each dart line lists every
//! re-pairing of the dart's alpha with the level where it happened.
//!
//! History file: `#` header lines (`base_level`, `base_regions`,
//! `initial_energy`), then one line per merge with the columns
//! `level rep_a rep_b delta energy`.

use std::fmt::Write as _;
use std::path::Path;

use dgpyr_core::{Dart, DartRecord, DeathOp, GridMap, Hierarchy, KernelKind, MergeRecord, PyramidError, PyramidRecord};

use crate::pnm::{write_file, PnmError};

#[derive(Debug, thiserror::Error)]
pub enum PersistError {
    #[error("line {line}: {what}")]
    Parse { line: usize, what: String },
    #[error(transparent)]
    Pyramid(#[from] PyramidError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<PnmError> for PersistError {
    fn from(e: PnmError) -> Self {
        match e {
            PnmError::Io { path, source } => PersistError::Io { path, source },
            other => PersistError::Parse {
                line: 0,
                what: other.to_string(),
            },
        }
    }
}

fn kind_char(k: KernelKind) -> char {
    match k {
        KernelKind::Contraction => 'c',
        KernelKind::RemovalSelfLoops => 's',
        KernelKind::RemovalDoubleEdges => 'e',
    }
}

fn op_char(op: DeathOp) -> char {
    match op {
        DeathOp::Contracted => 'c',
        DeathOp::RemovedSelfLoop => 's',
        DeathOp::RemovedDoubleEdge => 'e',
    }
}

pub fn encode_pyramid(record: &PyramidRecord) -> String {
    let grid = record.grid();
    let mut out = String::new();
    writeln!(out, "dgpyr-pyramid 1").unwrap();
    writeln!(out, "size {} {}", grid.width(), grid.height()).unwrap();
    writeln!(out, "levels {}", record.levels()).unwrap();
    out.push_str("kinds");
    for &k in record.kinds() {
        out.push(' ');
        out.push(kind_char(k));
    }
    out.push('\n');
    let darts = record.dart_records();
    writeln!(out, "darts {}", darts.len()).unwrap();
    for r in &darts {
        match r.death {
            Some((level, op)) => write!(out, "{} {level} {}", r.dart, op_char(op)).unwrap(),
            None => write!(out, "{} - -", r.dart).unwrap(),
        }
        for (level, alpha) in &r.alpha_changes {
            write!(out, " {level}:{alpha}").unwrap();
        }
        out.push('\n');
    }
    let cycles = record.top().cycles(dgpyr_core::Orbit::Sigma);
    writeln!(out, "top {}", cycles.len()).unwrap();
    for c in cycles {
        let line: Vec<String> = c.iter().map(|d| d.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, what: impl Into<String>) -> PersistError {
        PersistError::Parse {
            line: self.line,
            what: what.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, PersistError> {
        let (i, l) = self.inner.next().ok_or_else(|| self.err("unexpected end of file"))?;
        self.line = i + 1;
        Ok(l)
    }

    /// A `key v1 v2 ...` line.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>, PersistError> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(key) {
            return Err(self.err(format!("expected `{key}`")));
        }
        Ok(it.collect())
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T, PersistError> {
        s.parse().map_err(|_| self.err(format!("bad number `{s}`")))
    }

    fn dart(&self, s: &str) -> Result<Dart, PersistError> {
        Dart::new(self.number(s)?).ok_or_else(|| self.err("dart 0"))
    }
}

pub fn decode_pyramid(text: &str) -> Result<PyramidRecord, PersistError> {
    let mut lines = Lines::new(text);
    if lines.next()? != "dgpyr-pyramid 1" {
        return Err(lines.err("not a dgpyr pyramid file"));
    }
    let size = lines.keyed("size")?;
    if size.len() != 2 {
        return Err(lines.err("size needs width and height"));
    }
    let (w, h): (u32, u32) = (lines.number(size[0])?, lines.number(size[1])?);
    let grid = GridMap::new(w, h).map_err(|_| lines.err("invalid size"))?;
    let levels = lines.keyed("levels")?;
    let levels: usize = lines.number(levels.first().ok_or_else(|| lines.err("missing level count"))?)?;
    let kinds = lines
        .keyed("kinds")?
        .iter()
        .map(|k| match *k {
            "c" => Ok(KernelKind::Contraction),
            "s" => Ok(KernelKind::RemovalSelfLoops),
            "e" => Ok(KernelKind::RemovalDoubleEdges),
            _ => Err(lines.err(format!("unknown kernel kind `{k}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if kinds.len() != levels {
        return Err(lines.err("kind count differs from the level count"));
    }
    let n = lines.keyed("darts")?;
    let n: usize = lines.number(n.first().ok_or_else(|| lines.err("missing dart count"))?)?;
    let mut darts = Vec::with_capacity(n);
    for _ in 0..n {
        let fields: Vec<&str> = lines.next()?.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(lines.err("dart line needs id, death level and op"));
        }
        let dart = lines.dart(fields[0])?;
        let death = match (fields[1], fields[2]) {
            ("-", "-") => None,
            (level, op) => {
                let op = match op {
                    "c" => DeathOp::Contracted,
                    "s" => DeathOp::RemovedSelfLoop,
                    "e" => DeathOp::RemovedDoubleEdge,
                    _ => return Err(lines.err(format!("unknown death op `{op}`"))),
                };
                Some((lines.number(level)?, op))
            }
        };
        let mut alpha_changes = Vec::new();
        for f in &fields[3..] {
            let (level, alpha) = f.split_once(':').ok_or_else(|| lines.err("re-pairing needs level:alpha"))?;
            alpha_changes.push((lines.number(level)?, lines.dart(alpha)?));
        }
        darts.push(DartRecord {
            dart,
            death,
            alpha_changes,
        });
    }
    let k = lines.keyed("top")?;
    let k: usize = lines.number(k.first().ok_or_else(|| lines.err("missing cycle count"))?)?;
    let mut cycles = Vec::with_capacity(k);
    for _ in 0..k {
        let l = lines.next()?;
        let cycle = l.split_whitespace().map(|s| lines.dart(s)).collect::<Result<Vec<_>, _>>()?;
        if cycle.is_empty() {
            return Err(lines.err("empty sigma cycle"));
        }
        cycles.push(cycle);
    }
    Ok(PyramidRecord::from_parts(grid, kinds, &darts, &cycles)?)
}

pub fn save_pyramid(record: &PyramidRecord, path: impl AsRef<Path>) -> Result<(), PersistError> {
    Ok(write_file(path.as_ref(), encode_pyramid(record).as_bytes())?)
}

pub fn load_pyramid(path: impl AsRef<Path>) -> Result<PyramidRecord, PersistError> {
    decode_pyramid(&read(path.as_ref())?)
}

fn read(path: &Path) -> Result<String, PersistError> {
    std::fs::read_to_string(path).map_err(|source| PersistError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn encode_history(h: &Hierarchy) -> String {
    let mut out = String::new();
    writeln!(out, "# dgpyr merge history").unwrap();
    writeln!(out, "# base_level {}", h.base_level()).unwrap();
    writeln!(out, "# base_regions {}", h.base_regions()).unwrap();
    writeln!(out, "# initial_energy {}", h.initial_energy()).unwrap();
    writeln!(out, "# level rep_a rep_b delta energy").unwrap();
    for m in h.merges() {
        writeln!(out, "{} {} {} {} {}", m.level, m.rep_a, m.rep_b, m.delta, m.energy).unwrap();
    }
    out
}

/// Header values and merges of a history file.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub base_level: u32,
    pub base_regions: usize,
    pub initial_energy: f64,
    pub merges: Vec<MergeRecord>,
}

impl History {
    /// Joins the history with its pyramid.
    pub fn into_hierarchy(self, record: PyramidRecord) -> Hierarchy {
        Hierarchy::new(record, self.base_level, self.base_regions, self.initial_energy, self.merges)
    }
}

pub fn decode_history(text: &str) -> Result<History, PersistError> {
    let mut lines = Lines::new(text);
    let mut base_level = None;
    let mut base_regions = None;
    let mut initial_energy = None;
    let mut merges = Vec::new();
    while let Ok(l) = lines.next() {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields[0] == "#" {
            match fields.get(1..) {
                Some(["base_level", v]) => base_level = Some(lines.number(v)?),
                Some(["base_regions", v]) => base_regions = Some(lines.number(v)?),
                Some(["initial_energy", v]) => initial_energy = Some(lines.number(v)?),
                _ => {}
            }
            continue;
        }
        if fields.len() != 5 {
            return Err(lines.err("merge line needs 5 columns"));
        }
        merges.push(MergeRecord {
            level: lines.number(fields[0])?,
            rep_a: lines.number(fields[1])?,
            rep_b: lines.number(fields[2])?,
            delta: lines.number(fields[3])?,
            energy: lines.number(fields[4])?,
        });
    }
    let missing = |what: &str| PersistError::Parse {
        line: 0,
        what: format!("missing `{what}` header"),
    };
    Ok(History {
        base_level: base_level.ok_or_else(|| missing("base_level"))?,
        base_regions: base_regions.ok_or_else(|| missing("base_regions"))?,
        initial_energy: initial_energy.ok_or_else(|| missing("initial_energy"))?,
        merges,
    })
}

pub fn save_history(h: &Hierarchy, path: impl AsRef<Path>) -> Result<(), PersistError> {
    Ok(write_file(path.as_ref(), encode_history(h).as_bytes())?)
}

pub fn load_history(path: impl AsRef<Path>) -> Result<History, PersistError> {
    decode_history(&read(path.as_ref())?)
}
