//! Seeded random structure generation for tests and sweeps.
//!
//! Structures grow as connected lattice blobs: starting from the origin,
//! random frontier cells join the structure one at a time. With a nonzero
//! hole probability a drawn frontier cell may instead be forbidden forever,
//! which leaves enclosed empty pockets and therefore inner boundaries.

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridCoord, MAIN_DIRECTIONS};

/// Grow a connected blob of `n` cells. `hole_p` is the chance that a drawn
/// frontier cell becomes a permanent hole instead of joining.
pub fn random_blob(n: usize, hole_p: f64, seed: u64) -> Vec<GridCoord> {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: HashSet<GridCoord> = HashSet::new();
    let mut forbidden: HashSet<GridCoord> = HashSet::new();
    let mut frontier: Vec<GridCoord> = Vec::new();
    let push_frontier = |c: GridCoord,
                         cells: &HashSet<GridCoord>,
                         forbidden: &HashSet<GridCoord>,
                         f: &mut Vec<GridCoord>| {
        for d in MAIN_DIRECTIONS {
            let x = c.neighbor(d).unwrap();
            if !cells.contains(&x) && !forbidden.contains(&x) {
                f.push(x);
            }
        }
    };
    cells.insert(GridCoord::ORIGIN);
    push_frontier(GridCoord::ORIGIN, &cells, &forbidden, &mut frontier);
    while cells.len() < n {
        let x = *frontier
            .choose(&mut rng)
            .expect("frontier never empties before n cells");
        if cells.contains(&x) || forbidden.contains(&x) {
            frontier.retain(|&y| y != x);
            continue;
        }
        if hole_p > 0.0 && rng.random::<f64>() < hole_p {
            forbidden.insert(x);
        } else {
            cells.insert(x);
            push_frontier(x, &cells, &forbidden, &mut frontier);
        }
        frontier.retain(|&y| y != x);
    }
    let mut v: Vec<GridCoord> = cells.into_iter().collect();
    v.sort();
    v
}

/// A hexagonal ring of the given radius (6 * radius cells, hollow).
pub fn hexagon_ring(radius: i32) -> Vec<GridCoord> {
    assert!(radius >= 1);
    let mut out = Vec::new();
    // Walk the six sides.
    let mut c = GridCoord::new(radius, 0); // start east-ish corner
    for d in [2usize, 3, 4, 5, 0, 1] {
        // WSW, S, ESE, ENE, N, WNW -- chosen to close the ring.
        let dir = crate::grid::MAIN_DIRECTIONS[d];
        for _ in 0..radius {
            out.push(c);
            c = c.neighbor(dir).unwrap();
        }
    }
    assert_eq!(c, GridCoord::new(radius, 0));
    out.sort();
    out.dedup();
    out
}

/// A filled hexagon of the given radius (3r^2+3r+1 cells).
pub fn filled_hexagon(radius: i32) -> Vec<GridCoord> {
    let mut out = Vec::new();
    for q in -radius..=radius {
        for r in -radius..=radius {
            let s = -q - r;
            if q.abs().max(r.abs()).max(s.abs()) <= radius {
                out.push(GridCoord::new(q, r));
            }
        }
    }
    out
}
