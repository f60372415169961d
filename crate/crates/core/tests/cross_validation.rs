//! Distributed pipelines against the full-knowledge oracles on random
//! structures.

use amoebot_core::gen::random_blob;
use amoebot_core::grid::{Sign, ALL_DIRECTIONS, MAIN_DIRECTIONS};
use amoebot_core::oracle::{
    oracle_boundaries, oracle_maxima, oracle_skeleton, oracle_stripe, OracleView,
};
use amoebot_core::primitives::{classify_boundaries, BoundaryKind};
use amoebot_core::skeleton::{canonical_skeleton, skeleton_path, spanning_tree};
use amoebot_core::spatial::{global_maxima, stripe_algorithm};
use amoebot_core::AmoebotWorld;

fn budget(n: usize) -> u32 {
    4 * amoebot_core::pasc::ceil_log2(n.max(2)) as u32
}

#[test]
fn stripes_match_oracle_on_blobs() {
    for seed in 0..6u64 {
        let cells = random_blob(24 + 6 * seed as usize, 0.12, 900 + seed);
        let view = OracleView::new(&cells);
        for d in ALL_DIRECTIONS {
            for &u in cells.iter().step_by(5) {
                let mut w = AmoebotWorld::load(cells.clone(), 2, seed).unwrap();
                let (flags, _) = stripe_algorithm(&mut w, u, d).unwrap();
                let want = oracle_stripe(&view, u, d);
                assert_eq!(flags, want, "seed={seed} d={d} u={u}");
            }
        }
    }
}

#[test]
fn maxima_match_oracle_on_blobs() {
    for seed in 0..6u64 {
        let n = 20 + 7 * seed as usize;
        let cells = random_blob(n, 0.12, 500 + seed);
        let view = OracleView::new(&cells);
        for d in ALL_DIRECTIONS {
            let mut w = AmoebotWorld::load(cells.clone(), 4, seed).unwrap();
            let in_r = vec![true; n];
            let out = global_maxima(&mut w, &in_r, d, budget(n)).unwrap();
            assert_eq!(
                out.maxima,
                oracle_maxima(&view, &in_r, d),
                "seed={seed} d={d}"
            );
        }
    }
}

#[test]
fn boundary_classification_matches_flood_fill() {
    for seed in 0..12u64 {
        let n = 30 + 10 * (seed as usize % 5);
        let cells = random_blob(n, 0.22, 7000 + seed);
        let view = OracleView::new(&cells);
        let mut w = AmoebotWorld::load(cells.clone(), 4, seed).unwrap();
        let classified = classify_boundaries(&mut w, budget(n)).unwrap();
        let want = oracle_boundaries(&view);
        assert_eq!(classified.len(), want.len(), "seed={seed}");
        // Match cycles by their smallest (coordinate, occurrence) step;
        // amoebots can lie on several cycles.
        for c in &classified {
            let anchor = c
                .cycle
                .steps
                .iter()
                .map(|s| (w.st.coord(s.amoebot as usize), s.occ))
                .min()
                .unwrap();
            let o = want
                .iter()
                .find(|b| b.steps.iter().any(|&(cc, oo, _)| (cc, oo) == anchor))
                .expect("oracle cycle with same occurrence");
            assert_eq!(
                c.kind == BoundaryKind::Outer,
                o.outer,
                "seed={seed} anchor={anchor:?}"
            );
            assert_eq!(
                c.cycle.len(),
                o.steps.len(),
                "seed={seed} anchor={anchor:?}"
            );
        }
    }
}

#[test]
fn skeletons_match_oracle_on_blobs() {
    for seed in 0..8u64 {
        let n = 16 + 9 * (seed as usize % 4);
        let cells = random_blob(n, 0.2, 3100 + seed);
        let view = OracleView::new(&cells);
        for d in MAIN_DIRECTIONS {
            for s in [Sign::Plus, Sign::Minus] {
                let mut w = AmoebotWorld::load(cells.clone(), 4, seed).unwrap();
                let sk = canonical_skeleton(&mut w, d, s, budget(n)).unwrap();
                let ok = oracle_skeleton(&view, d, s);
                // Same structure index space: worlds sort coordinates.
                assert_eq!(sk.visits, ok.visits, "seed={seed} d={d} s={s}");
                assert_eq!(sk.split, ok.split, "seed={seed} d={d} s={s}");
            }
        }
    }
}

#[test]
fn spanning_trees_validate_and_match_first_occurrence_edges() {
    for seed in 0..10u64 {
        let n = 12 + 8 * (seed as usize % 5);
        let cells = random_blob(n, 0.18, 4100 + seed);
        let view = OracleView::new(&cells);
        let mut w = AmoebotWorld::load(cells.clone(), 4, seed).unwrap();
        let sk = canonical_skeleton(&mut w, amoebot_core::grid::N, Sign::Plus, budget(n)).unwrap();
        let path = skeleton_path(&w, &sk);
        let tree = spanning_tree(&mut w, &sk).unwrap();
        assert!(
            amoebot_core::oracle::oracle_spanning_check(n, &tree.edges),
            "seed={seed}"
        );
        let coords: Vec<_> = path.positions.iter().map(|&(c, _)| c).collect();
        let want = amoebot_core::oracle::oracle_first_occurrence_edges(&view, &coords);
        let mut got = tree.path_edges.clone();
        got.sort();
        assert_eq!(got, want, "seed={seed}");
    }
}
