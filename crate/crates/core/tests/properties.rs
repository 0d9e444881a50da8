mod common;

use std::collections::{BTreeMap, BTreeSet};

use dgpyr_core::boundary::{is_fictive, set_boundaries};
use dgpyr_core::dss::{maximal_segments, maximal_segments_counted, Dss, Refusal};
use dgpyr_core::energy::{map_energy, region_energies};
use dgpyr_core::estimators::{curve_length, elementary_lengths};
use dgpyr_core::segmenter::{base_from_labels, build_pyramid};
use dgpyr_core::{
    EnergyParams, FreemanChain, FreemanCode, GradientField, GridMap, Image, InitMode, KernelKind, LengthMode, Orbit,
    Pointel, RegionStats, StopCriterion,
};
use proptest::prelude::*;

fn image() -> impl Strategy<Value = Image> {
    (1u32..=7, 1u32..=7, 1u32..=4).prop_flat_map(|(w, h, levels)| {
        proptest::collection::vec(0..levels, (w * h) as usize)
            .prop_map(move |v| Image::grey(w, h, v.into_iter().map(|x| (x * 70) as u8).collect()).unwrap())
    })
}

/// Simple closed chain: the boundary of a random hole-free polyomino grown
/// from one pixel.
fn polyomino_chain() -> impl Strategy<Value = FreemanChain> {
    proptest::collection::vec((0u8..4, 0usize..64), 1..40).prop_filter_map("not a simple loop", |steps| {
        let mut cells = BTreeSet::from([(8i32, 8i32)]);
        for (dir, pick) in steps {
            let list: Vec<_> = cells.iter().copied().collect();
            let (x, y) = list[pick % list.len()];
            let (dx, dy) = FreemanCode::from_u8(dir).unwrap().delta();
            cells.insert((x + dx, y + dy));
        }
        let linels = common::marching_linels(17, 17, |x, y| cells.contains(&(x as i32, y as i32)));
        let starts: BTreeSet<_> = linels.keys().map(|&(x, y, _)| (x, y)).collect();
        if starts.len() != linels.len() {
            return None;
        }
        std::panic::catch_unwind(|| common::trace(&linels)).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grid_maps_are_valid(w in 1u32..9, h in 1u32..9) {
        let grid = GridMap::new(w, h).unwrap();
        let map = grid.map();
        prop_assert!(map.validate().is_ok());
        prop_assert_eq!(map.edge_count() as u32, 2 * w * h + w + h);
        for d in map.darts() {
            // alpha then phi leaves the end pointel of d
            let (p, c) = grid.linel(d);
            let next = map.phi_of(map.alpha_of(d));
            prop_assert_eq!(grid.linel(next).0, p.step(c));
            prop_assert_eq!(map.alpha_of(map.alpha_of(d)), d);
        }
    }

    #[test]
    fn sigma_cycles_are_rotation_consistent(img in image()) {
        let h = build_pyramid(&img, InitMode::PixelGrid, &EnergyParams::default(), StopCriterion::MaxMerges(5)).unwrap();
        let map = h.record().top();
        for d in map.darts() {
            let c = map.cycle(d, Orbit::Sigma).unwrap();
            let s = map.cycle(map.sigma_of(d), Orbit::Sigma).unwrap();
            let mut rotated = c.clone();
            rotated.rotate_left(1);
            prop_assert_eq!(rotated, s);
        }
    }

    #[test]
    fn levels_lose_edges_and_regions_only_shrink_on_contraction(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let (record, kernels) = common::random_pyramid(&mut rng, 8);
        let mut previous = record.level_map(0).unwrap();
        for (l, k) in kernels.iter().enumerate() {
            let map = record.level_map(l as u32 + 1).unwrap();
            prop_assert!(map.edge_count() < previous.edge_count());
            let (before, after) = (previous.count_cycles(Orbit::Sigma), map.count_cycles(Orbit::Sigma));
            if k.kind == KernelKind::Contraction {
                prop_assert!(after < before);
            } else {
                prop_assert_eq!(after, before);
            }
            prop_assert!(map.validate().is_ok());
            previous = map;
        }
    }

    #[test]
    fn receptive_segments_partition_the_boundaries(img in image(), merges in 0usize..40) {
        let h = build_pyramid(&img, InitMode::PixelGrid, &EnergyParams::default(), StopCriterion::MaxMerges(merges)).unwrap_or_else(|_| unreachable!());
        let record = h.record();
        let grid = record.grid();
        for k in [0, h.partitions() / 2, h.partitions() - 1] {
            let level = h.partition_level(k).unwrap();
            let labels = record.labels(level).unwrap();
            let view = record.view(level).unwrap();
            let mut seen = BTreeSet::new();
            for d in view.map().darts() {
                if is_fictive(view.map(), d) {
                    continue;
                }
                for b in view.receptive_segment(d).unwrap() {
                    prop_assert!(seen.insert(b), "base dart {} in two segments", b);
                }
            }
            let region = |d| grid.owner(d).map(|p| labels[p]);
            let expected: BTreeSet<_> = grid.map().darts().filter(|&d| region(d) != region(grid.map().alpha_of(d))).collect();
            prop_assert_eq!(seen, expected);
        }
    }

    #[test]
    fn merged_pair_boundaries_match_marching(img in image(), merges in 0usize..30, pick in any::<prop::sample::Index>()) {
        let h = build_pyramid(&img, InitMode::PixelGrid, &EnergyParams::default(), StopCriterion::MaxMerges(merges)).unwrap();
        let record = h.record();
        let grid = record.grid();
        let view = record.top_view();
        let map = view.map();
        let labels = record.labels(record.levels()).unwrap();
        let inner = |d| !map.cycle(d, Orbit::Sigma).unwrap().iter().any(|&x| grid.is_background(x));
        let candidates: Vec<_> = map.darts().filter(|&d| !is_fictive(map, d) && inner(d) && inner(map.alpha_of(d))).collect();
        prop_assume!(!candidates.is_empty());
        let d = *pick.get(&candidates);
        let mut union = map.cycle(d, Orbit::Sigma).unwrap();
        union.extend(map.cycle(map.alpha_of(d), Orbit::Sigma).unwrap());
        let set: BTreeSet<_> = union.iter().copied().collect();
        let loops = set_boundaries(&view, &union, |x| set.contains(&x)).unwrap();
        let (la, lb) = (labels[grid.owner(d).unwrap()], labels[grid.owner(map.alpha_of(d)).unwrap()]);
        let w = grid.width();
        let expected = common::marching_linels(w, grid.height(), |x, y| {
            let l = labels[(y * w + x) as usize];
            l == la || l == lb
        });
        let chains: Vec<_> = loops.iter().map(|l| &l.chain).collect();
        prop_assert!(loops.iter().all(|l| l.chain.is_closed()));
        prop_assert_eq!(common::chain_linels(&chains), expected);
    }

    #[test]
    fn extensions_are_sound_and_refusals_complete(codes in proptest::collection::vec(0u8..4, 1..=14), back in any::<bool>()) {
        let codes = common::codes(&codes);
        let chain = FreemanChain::new(Pointel::new(0, 0), codes.clone());
        let points = chain.points();
        let n = codes.len();
        let mut s = if back { Dss::new(points[n]) } else { Dss::new(points[0]) };
        for k in 0..n {
            let (next, covered) = if back {
                (s.extend_back(codes[n - 1 - k]), &points[n - 1 - k..])
            } else {
                (s.extend_front(codes[k]), &points[..k + 2])
            };
            match next {
                Ok(t) => {
                    let c = t.characteristics().unwrap();
                    prop_assert!(covered.iter().all(|&p| c.contains(p)));
                    s = t;
                }
                Err(Refusal::OffLine) => {
                    prop_assert_eq!(common::brute_dss(covered, covered.len() as i64 + 1), None);
                    break;
                }
                Err(_) => {
                    let used: BTreeSet<_> = if back { codes[n - 1 - k..].iter().collect() } else { codes[..=k].iter().collect() };
                    prop_assert!(used.len() > 2 || used.iter().any(|c| used.contains(&c.opposite())));
                    break;
                }
            }
        }
    }

    #[test]
    fn covers_stay_linear(chain in polyomino_chain()) {
        prop_assume!(chain.len() >= 4);
        let cover = maximal_segments_counted(&chain).unwrap();
        prop_assert!(cover.operations <= 6 * chain.len(), "{} operations for {} moves", cover.operations, chain.len());
        // every move is covered
        let n = chain.len();
        let mut covered = vec![false; n];
        for m in &cover.segments {
            for t in 0..m.len {
                covered[(m.start + t) % n] = true;
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
    }

    #[test]
    fn elementary_lengths_are_unit_bounded(chain in polyomino_chain()) {
        let lengths = elementary_lengths(&chain, LengthMode::Discrete).unwrap();
        prop_assert!(lengths.iter().all(|&l| l > 0.0 && l <= 1.0 + 1e-12));
        prop_assert!(curve_length(&chain, LengthMode::Discrete).unwrap() <= chain.len() as f64 + 1e-9);
        if chain.len() > 4 {
            prop_assert!(!maximal_segments(&chain).unwrap().is_empty());
        }
    }

    #[test]
    fn stats_merge_in_any_order(img in image(), cut1 in any::<prop::sample::Index>(), cut2 in any::<prop::sample::Index>()) {
        let n = img.pixel_count();
        let (mut i, mut j) = (cut1.index(n + 1), cut2.index(n + 1));
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        let a = RegionStats::of_pixels(&img, 0..i);
        let b = RegionStats::of_pixels(&img, i..j);
        let c = RegionStats::of_pixels(&img, j..n);
        let left = a.merge(&b).merge(&c);
        let right = c.merge(&a.merge(&b));
        let other = b.merge(&c).merge(&a);
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(&left, &other);
        prop_assert_eq!(left, RegionStats::of_pixels(&img, 0..n));
    }

    #[test]
    fn gradients_count_twice_inside_once_on_the_border(img in image(), merges in 0usize..20) {
        let params = EnergyParams::new(1.3, 1.0, LengthMode::Unit).unwrap();
        let h = build_pyramid(&img, InitMode::PixelGrid, &params, StopCriterion::MaxMerges(merges)).unwrap();
        let record = h.record();
        let grid = record.grid();
        let grad = GradientField::new(&img, grid);
        let view = record.top_view();
        let labels = record.labels(record.levels()).unwrap();
        let total: f64 = region_energies(&view, &img, &grad, &params).unwrap().iter().map(|(_, e)| e.gradient).sum();
        let mut expected = 0.0;
        for d in grid.map().darts() {
            let (a, b) = (grid.owner(d), grid.owner(grid.map().alpha_of(d)));
            if let (Some(a), Some(b)) = (a, b) {
                if labels[a] != labels[b] {
                    // counted once per dart, so twice per linel
                    expected += grad.at(grid, d);
                }
            }
        }
        prop_assert!((total - expected).abs() <= 1e-9 * expected.max(1.0));
    }
}

/// All partitions of a `w x h` grid into at most three rectangles by
/// guillotine cuts.
fn rectangle_partitions(w: u32, h: u32) -> Vec<Vec<u32>> {
    type Rect = (u32, u32, u32, u32);
    fn cuts(r: Rect) -> Vec<(Rect, Rect)> {
        let (x0, y0, x1, y1) = r;
        let mut out = Vec::new();
        for x in x0 + 1..x1 {
            out.push(((x0, y0, x, y1), (x, y0, x1, y1)));
        }
        for y in y0 + 1..y1 {
            out.push(((x0, y0, x1, y), (x0, y, x1, y1)));
        }
        out
    }
    let whole = (0, 0, w, h);
    let mut parts: Vec<Vec<Rect>> = vec![vec![whole]];
    for (a, b) in cuts(whole) {
        parts.push(vec![a, b]);
        for (c, d) in cuts(a) {
            parts.push(vec![c, d, b]);
        }
        for (c, d) in cuts(b) {
            parts.push(vec![a, c, d]);
        }
    }
    parts
        .into_iter()
        .map(|rects| {
            let mut labels = vec![0; (w * h) as usize];
            for (i, &(x0, y0, x1, y1)) in rects.iter().enumerate() {
                for y in y0..y1 {
                    for x in x0..x1 {
                        labels[(y * w + x) as usize] = i as u32;
                    }
                }
            }
            labels
        })
        .collect()
}

#[test]
fn unit_energy_is_piecewise_constant_mumford_shah() {
    let mut rng = common::rng(51);
    let nu = 1.3;
    let params = EnergyParams::new(nu, 0.0, LengthMode::Unit).unwrap();
    let mut checked = 0;
    for _ in 0..6 {
        let img = common::random_image(&mut rng, 4);
        let (w, h) = (img.width(), img.height());
        for labels in rectangle_partitions(w, h) {
            let record = base_from_labels(GridMap::new(w, h).unwrap(), &labels).unwrap();
            let grad = GradientField::new(&img, record.grid());
            let e = map_energy(&record.top_view(), &img, &grad, &params).unwrap();
            let mut regions: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (p, &l) in labels.iter().enumerate() {
                regions.entry(l).or_default().push(p);
            }
            let mut direct = 0.0;
            for pixels in regions.values() {
                let values: Vec<f64> = pixels.iter().map(|&p| img.pixel(p)[0] as f64).collect();
                let mean = values.iter().sum::<f64>() / values.len() as f64;
                direct += values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
                let set: BTreeSet<usize> = pixels.iter().copied().collect();
                let linels = common::marching_linels(w, h, |x, y| set.contains(&((y * w + x) as usize)));
                direct += nu * linels.values().sum::<usize>() as f64;
            }
            assert!((e - direct).abs() <= 1e-9 * direct.max(1.0), "{e} vs {direct}");
            checked += 1;
        }
    }
    assert!(checked > 20);
}
