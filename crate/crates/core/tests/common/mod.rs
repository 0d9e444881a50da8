#![allow(dead_code)]

use std::collections::BTreeMap;

use dgpyr_core::boundary::{all_boundaries, is_fictive};
use dgpyr_core::dss::Dss;
use dgpyr_core::{
    BoundaryKind, CombMap, Dart, FreemanChain, FreemanCode, GridMap, Image, Kernel, Orbit, Pointel, PyramidBuilder,
    PyramidRecord,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Few grey levels so that flat zones and merges of equal pixels happen.
pub fn random_image(rng: &mut ChaCha8Rng, max_side: u32) -> Image {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let levels = rng.random_range(1..=4u32);
    let data = (0..w * h).map(|_| (rng.random_range(0..levels) * 60) as u8).collect();
    Image::grey(w, h, data).unwrap()
}

/// Four constant rectangles split at `(w/2, h/3)`, with their truth labels.
pub fn rectangles(w: u32, h: u32) -> (Vec<u8>, Vec<u32>) {
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let l = (x >= w / 2) as u32 + 2 * (y >= h / 3) as u32;
            truth.push(l);
            data.push([40u8, 100, 160, 220][l as usize]);
        }
    }
    (data, truth)
}

pub fn add_noise(data: &[u8], sigma: f64, seed: u64) -> Vec<u8> {
    let mut r = rng(seed);
    let n = Normal::new(0.0, sigma).unwrap();
    data.iter()
        .map(|&v| (v as f64 + n.sample(&mut r)).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Oriented linels around a pixel set, each with the set on its right:
/// `(start pointel, code)`.
pub fn marching_linels(w: u32, h: u32, inside: impl Fn(u32, u32) -> bool) -> BTreeMap<(i32, i32, u8), usize> {
    let mut out = BTreeMap::new();
    let is_in = |x: i64, y: i64| x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && inside(x as u32, y as u32);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !is_in(x, y) {
                continue;
            }
            let (xi, yi) = (x as i32, y as i32);
            let mut add = |k| *out.entry(k).or_insert(0) += 1;
            if !is_in(x - 1, y) {
                add((xi, yi + 1, 1));
            }
            if !is_in(x, y - 1) {
                add((xi, yi, 0));
            }
            if !is_in(x + 1, y) {
                add((xi + 1, yi, 3));
            }
            if !is_in(x, y + 1) {
                add((xi + 1, yi + 1, 2));
            }
        }
    }
    out
}

pub fn chain_linels(chains: &[&FreemanChain]) -> BTreeMap<(i32, i32, u8), usize> {
    let mut out = BTreeMap::new();
    for c in chains {
        for (p, code) in c.linels() {
            *out.entry((p.x, p.y, code.as_u8())).or_insert(0) += 1;
        }
    }
    out
}

pub fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `|a| + |b|` of a standard line `mu <= a x - b y < mu + |a| + |b|`
/// holding every point, searched exhaustively up to `bound`.
pub fn brute_dss(points: &[Pointel], bound: i64) -> Option<i64> {
    for s in 1..=bound {
        for a in -s..=s {
            let rest = s - a.abs();
            let signs: &[i64] = if rest == 0 { &[0] } else { &[rest, -rest] };
            for &b in signs {
                if gcd(a, b) != 1 {
                    continue;
                }
                let r = points.iter().map(|p| a * p.x as i64 - b * p.y as i64);
                let (lo, hi) = r.fold((i64::MAX, i64::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)));
                if hi - lo < s {
                    return Some(s);
                }
            }
        }
    }
    None
}

pub fn codes(v: &[u8]) -> Vec<FreemanCode> {
    v.iter().map(|&c| FreemanCode::from_u8(c).unwrap()).collect()
}

/// Digitized disk of radius `r` centred in a `(2r + 2k)` square image.
pub fn disk(r: f64, margin: u32, inside: u8, outside: u8) -> Image {
    let side = (2.0 * r).ceil() as u32 + 2 * margin;
    let c = side as f64 / 2.0;
    Image::from_fn(side, side, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
        if dx * dx + dy * dy <= r * r {
            inside
        } else {
            outside
        }
    })
    .unwrap()
}

/// Boundary of a digitized disk as a closed chain (Gauss digitization,
/// traced by the marching oracle).
pub fn disk_chain(r: f64) -> FreemanChain {
    let img = disk(r, 2, 1, 0);
    let (w, h) = (img.width(), img.height());
    let linels = marching_linels(w, h, |x, y| img.at(x, y)[0] == 1);
    trace(&linels)
}

/// Chains a set of oriented linels that forms a single simple loop.
pub fn trace(linels: &BTreeMap<(i32, i32, u8), usize>) -> FreemanChain {
    let by_start: BTreeMap<(i32, i32), u8> = linels.keys().map(|&(x, y, c)| ((x, y), c)).collect();
    assert_eq!(by_start.len(), linels.len(), "loop passes a pointel twice");
    let (&(x0, y0, c0), _) = linels.iter().next().unwrap();
    let start = Pointel::new(x0, y0);
    let mut out = vec![c0];
    let mut p = start.step(FreemanCode::from_u8(c0).unwrap());
    while p != start {
        let c = by_start[&(p.x, p.y)];
        out.push(c);
        p = p.step(FreemanCode::from_u8(c).unwrap());
    }
    assert_eq!(out.len(), linels.len());
    FreemanChain::new(start, codes(&out))
}

pub fn same_map(a: &CombMap, b: &CombMap) -> bool {
    a.len() == b.len()
        && a.darts().all(|d| b.contains(d) && a.sigma_of(d) == b.sigma_of(d) && a.alpha_of(d) == b.alpha_of(d))
}

/// A random forest of non-loop edges of the top map.
pub fn random_kernel(map: &CombMap, rng: &mut ChaCha8Rng) -> Option<Kernel> {
    let cycles = map.cycles(Orbit::Sigma);
    let mut vertex = std::collections::HashMap::new();
    for (i, c) in cycles.iter().enumerate() {
        for &d in c {
            vertex.insert(d, i);
        }
    }
    let mut parent: Vec<usize> = (0..cycles.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut darts: Vec<Dart> = map.darts().filter(|&d| d < map.alpha_of(d)).collect();
    darts.shuffle(rng);
    let p = rng.random_range(0.05..0.6);
    let mut edges = Vec::new();
    for d in darts {
        if !rng.random_bool(p) {
            continue;
        }
        let (u, v) = (vertex[&d], vertex[&map.alpha_of(d)]);
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            parent[ru] = rv;
            edges.push(d);
        }
    }
    (!edges.is_empty()).then(|| Kernel::contraction(map, &edges).unwrap())
}

pub fn random_pyramid(rng: &mut ChaCha8Rng, max_side: u32) -> (PyramidRecord, Vec<Kernel>) {
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let mut b = PyramidBuilder::new(GridMap::new(w, h).unwrap()).with_kernel_log();
    b.reduce().unwrap();
    for _ in 0..rng.random_range(1..6) {
        let Some(k) = random_kernel(b.record().top(), rng) else { break };
        let top = b.record().top();
        let anchor = top
            .cycle(k.darts[0], Orbit::Sigma)
            .unwrap()
            .into_iter()
            .find(|x| !k.darts.contains(x));
        b.apply(&k).unwrap();
        if let (Some(a), true) = (anchor, rng.random_bool(0.5)) {
            b.reduce_around(a).unwrap();
        }
        b.reduce().unwrap();
    }
    let (record, log) = b.into_parts();
    (record, log.unwrap())
}

/// Compares every region's loops at every level with the marching oracle.
pub fn check_record(record: &PyramidRecord) {
    let grid = record.grid();
    let (w, h) = (grid.width(), grid.height());
    for l in 0..=record.levels() {
        let view = record.view(l).unwrap();
        let labels = record.labels(l).unwrap();
        for cycle in view.map().cycles(Orbit::Sigma) {
            if cycle.iter().any(|&d| grid.is_background(d)) {
                continue;
            }
            let pixel = grid.owner(cycle[0]).unwrap();
            let label = labels[pixel];
            let loops = all_boundaries(&view, cycle[0], false).unwrap();
            assert!(loops.iter().all(|b| b.chain.is_closed()));
            assert_eq!(loops.iter().filter(|b| b.kind == BoundaryKind::Outer).count(), 1);
            // fictive darts carry no linel
            for b in &loops {
                assert!(b.darts.iter().all(|&d| !is_fictive(view.map(), d)));
            }
            let chains: Vec<_> = loops.iter().map(|b| &b.chain).collect();
            let expected = marching_linels(w, h, |x, y| labels[(y * w + x) as usize] == label);
            assert_eq!(chain_linels(&chains), expected, "level {l}, region {label}");
        }
    }
}

/// Every chain over two adjacent codes, up to `max_len` moves.
pub fn monotone_chains(max_len: usize) -> Vec<Vec<FreemanCode>> {
    let mut out = Vec::new();
    for c1 in 0..4u8 {
        let c2 = (c1 + 1) % 4;
        for n in 1..=max_len {
            for bits in 0u32..(1 << n) {
                // single-code chains only once, under the pair starting with them
                if bits == (1 << n) - 1 {
                    continue;
                }
                out.push((0..n).map(|i| if bits >> i & 1 == 1 { c2 } else { c1 }).map(|c| FreemanCode::from_u8(c).unwrap()).collect());
            }
        }
    }
    out
}

/// Recognizes a whole chain by front extension; `None` when refused.
pub fn recognize(start: Pointel, codes: &[FreemanCode]) -> Option<Dss> {
    codes.iter().try_fold(Dss::new(start), |s, &c| s.extend_front(c).ok())
}

pub fn recognize_back(start: Pointel, codes: &[FreemanCode]) -> Option<Dss> {
    let chain = FreemanChain::new(start, codes.to_vec());
    let end = chain.end();
    codes.iter().rev().try_fold(Dss::new(end), |s, &c| s.extend_back(c).ok())
}

/// Perimeter of a pixel set measured on its smoothed indicator: Gaussian
/// blur, then the 0.5 iso-contour by marching squares.
pub fn smooth_perimeter(w: usize, h: usize, inside: &[bool], sigma: f64) -> f64 {
    let pad = (4.0 * sigma).ceil() as usize + 1;
    let (pw, ph) = (w + 2 * pad, h + 2 * pad);
    let mut f = vec![0.0f64; pw * ph];
    for y in 0..h {
        for x in 0..w {
            if inside[y * w + x] {
                f[(y + pad) * pw + x + pad] = 1.0;
            }
        }
    }
    let r = (3.0 * sigma).ceil() as i64;
    let kernel: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = kernel.iter().sum();
    let blur = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; pw * ph];
        for y in 0..ph as i64 {
            for x in 0..pw as i64 {
                let mut acc = 0.0;
                for (k, wgt) in kernel.iter().enumerate() {
                    let o = k as i64 - r;
                    let (sx, sy) = if horizontal { (x + o, y) } else { (x, y + o) };
                    if sx >= 0 && sy >= 0 && sx < pw as i64 && sy < ph as i64 {
                        acc += wgt * src[sy as usize * pw + sx as usize];
                    }
                }
                out[y as usize * pw + x as usize] = acc / norm;
            }
        }
        out
    };
    let f = blur(&blur(&f, true), false);
    let v = |x: usize, y: usize| f[y * pw + x] - 0.5;
    let mut length = 0.0;
    for y in 0..ph - 1 {
        for x in 0..pw - 1 {
            let corners = [(x, y), (x + 1, y), (x + 1, y + 1), (x, y + 1)];
            let mut cuts = Vec::new();
            for k in 0..4 {
                let (a, b) = (corners[k], corners[(k + 1) % 4]);
                let (va, vb) = (v(a.0, a.1), v(b.0, b.1));
                if (va < 0.0) != (vb < 0.0) {
                    let t = va / (va - vb);
                    cuts.push((
                        a.0 as f64 + t * (b.0 as f64 - a.0 as f64),
                        a.1 as f64 + t * (b.1 as f64 - a.1 as f64),
                    ));
                }
            }
            let seg = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
            match cuts.len() {
                2 => length += seg(cuts[0], cuts[1]),
                4 => length += seg(cuts[0], cuts[1]) + seg(cuts[2], cuts[3]),
                _ => {}
            }
        }
    }
    length
}

/// Largest fraction of pixels on which two labellings agree under a
/// one-to-one matching of labels (exhaustive over permutations of `k`).
pub fn label_agreement(a: &[u32], b: &[u32], k: usize) -> f64 {
    let mut counts = vec![vec![0usize; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        if (x as usize) < k && (y as usize) < k {
            counts[x as usize][y as usize] += 1;
        }
    }
    fn best(counts: &[Vec<usize>], row: usize, used: &mut Vec<bool>) -> usize {
        if row == counts.len() {
            return 0;
        }
        let mut m = 0;
        for c in 0..counts.len() {
            if !used[c] {
                used[c] = true;
                m = m.max(counts[row][c] + best(counts, row + 1, used));
                used[c] = false;
            }
        }
        m
    }
    best(&counts, 0, &mut vec![false; k]) as f64 / a.len() as f64
}
