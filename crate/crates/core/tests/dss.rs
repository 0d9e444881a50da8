mod common;

use std::collections::HashMap;

use dgpyr_core::dss::{maximal_segments, maximal_segments_open};
use dgpyr_core::{FreemanChain, FreemanCode, Pointel};

#[test]
fn recognition_matches_exhaustive_search() {
    let start = Pointel::new(3, -2);
    let mut verdicts = 0;
    for codes in common::monotone_chains(12) {
        let chain = FreemanChain::new(start, codes.clone());
        let points = chain.points();
        let truth = common::brute_dss(&points, codes.len() as i64 + 1);
        let front = common::recognize(start, &codes);
        let back = common::recognize_back(start, &codes);
        assert_eq!(front.is_some(), truth.is_some(), "{codes:?}");
        assert_eq!(back.is_some(), truth.is_some(), "{codes:?}");
        if let (Some(s), Some(t)) = (front, back) {
            let c = s.characteristics().unwrap();
            assert_eq!(Some(c.a.abs() + c.b.abs()), truth, "{codes:?}");
            assert!(points.iter().all(|&p| c.contains(p)));
            let rs: Vec<i64> = points.iter().map(|&p| c.remainder(p)).collect();
            assert_eq!(rs.iter().min(), Some(&c.mu));
            assert_eq!(t.characteristics(), Some(c), "{codes:?}");
        }
        verdicts += 1;
    }
    assert!(verdicts > 30_000);
}

#[test]
fn open_covers_match_exhaustive_search() {
    let chains = common::monotone_chains(12);
    let start = Pointel::new(0, 0);
    let key = |codes: &[FreemanCode]| codes.iter().map(|c| c.as_u8()).collect::<Vec<u8>>();
    let mut straight: HashMap<Vec<u8>, bool> = HashMap::new();
    for codes in &chains {
        let points = FreemanChain::new(start, codes.clone()).points();
        straight.insert(key(codes), common::brute_dss(&points, codes.len() as i64 + 1).is_some());
    }
    let is_straight = |codes: &[FreemanCode]| {
        codes.len() <= 1 || *straight.get(&key(codes)).unwrap_or_else(|| {
            // single-code runs are indexed under their own pair only
            panic!("missing {codes:?}")
        })
    };
    for codes in &chains {
        let n = codes.len();
        let mut expected = Vec::new();
        for i in 0..n {
            for j in i + 1..=n {
                if !is_straight(&codes[i..j]) {
                    continue;
                }
                let left = i > 0 && is_straight(&codes[i - 1..j]);
                let right = j < n && is_straight(&codes[i..j + 1]);
                if !left && !right {
                    expected.push((i, j - i));
                }
            }
        }
        let cover = maximal_segments_open(&FreemanChain::new(start, codes.clone()));
        let found: Vec<(usize, usize)> = cover.iter().map(|m| (m.start, m.len)).collect();
        assert_eq!(found, expected, "{codes:?}");
    }
}

/// Closed chains: every maximal segment is straight and maximal, and every
/// straight run is inside one of them.
#[test]
fn closed_covers_on_small_polyominoes() {
    let mut rng = common::rng(31);
    let mut tested = 0;
    for _ in 0..300 {
        let img = common::random_image(&mut rng, 6);
        let (w, h) = (img.width(), img.height());
        let linels = common::marching_linels(w, h, |x, y| img.at(x, y)[0] == img.at(0, 0)[0] && x + y <= w.max(h));
        let Some(chain) = single_loop(&linels) else { continue };
        if chain.len() < 4 {
            continue;
        }
        tested += 1;
        let n = chain.len();
        let points = chain.points();
        let run = |s: usize, len: usize| -> Vec<Pointel> { (0..=len).map(|k| points[(s + k) % n]).collect() };
        let straight = |s: usize, len: usize| len < n && common::brute_dss(&run(s, len), len as i64 + 1).is_some();
        let segs = maximal_segments(&chain).unwrap();
        for m in &segs {
            assert!(straight(m.start, m.len));
            assert!(!straight((m.start + n - 1) % n, m.len + 1));
            assert!(!straight(m.start, m.len + 1));
        }
        for s in 0..n {
            // longest straight run from s
            let mut len = 1;
            while straight(s, len + 1) {
                len += 1;
            }
            let covered = segs.iter().any(|m| {
                let off = (s + n - m.start) % n;
                off + len <= m.len
            });
            assert!(covered, "{s} {len}");
        }
    }
    assert!(tested > 100, "{tested}");
}

fn single_loop(linels: &std::collections::BTreeMap<(i32, i32, u8), usize>) -> Option<FreemanChain> {
    if linels.is_empty() {
        return None;
    }
    let starts: std::collections::BTreeSet<(i32, i32)> = linels.keys().map(|&(x, y, _)| (x, y)).collect();
    if starts.len() != linels.len() {
        return None;
    }
    let chain = std::panic::catch_unwind(|| common::trace(linels)).ok()?;
    Some(chain)
}
