//! Boundary sets: local boundary occurrences, cycle structure and the
//! distributed inner/outer classification.
//!
//! An amoebot's local boundaries are the maximal runs of unoccupied
//! directions around it; each run is one occurrence on the cycle of the
//! empty region behind it. The cycle successor of an occurrence leaves
//! through the occupied direction counterclockwise-after its run, which
//! traverses every boundary with the empty region on the right: the outer
//! boundary counterclockwise, inner boundaries clockwise.

use crate::engine::Structure;
use crate::grid::Direction;

/// One local boundary: a maximal run of empty directions, in ccw main-index
/// order starting at `start` and covering `len` directions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LocalBoundary {
    pub start: u8,
    pub len: u8,
}

impl LocalBoundary {
    /// Direction toward the cycle predecessor (occupied, just before the
    /// run counterclockwise). Undefined for an isolated amoebot.
    pub fn arrival(self) -> u8 {
        (self.start + 5) % 6
    }

    /// Direction toward the cycle successor (occupied, just after the run).
    pub fn departure(self) -> u8 {
        (self.start + self.len) % 6
    }

    /// Signed turn in 60-degree units at this occurrence, in {-2..3}.
    pub fn turn(self) -> i8 {
        let heading_in = (self.arrival() + 3) % 6;
        let steps = (6 + self.departure() as i8 - heading_in as i8) % 6;
        if steps > 3 {
            steps - 6
        } else {
            steps
        }
    }

    /// True if the run contains main direction `d`.
    pub fn contains(self, d: u8) -> bool {
        (0..self.len).any(|o| (self.start + o) % 6 == d)
    }
}

/// The occurrences of one amoebot, at most three.
pub fn local_boundaries(mask: [bool; 6]) -> Vec<LocalBoundary> {
    if mask.iter().all(|&b| !b) {
        // Isolated amoebot: one degenerate run covering everything.
        return vec![LocalBoundary { start: 0, len: 6 }];
    }
    let mut runs = Vec::new();
    for s in 0..6u8 {
        let before = (s + 5) % 6;
        if !mask[s as usize] && mask[before as usize] {
            let mut len = 1;
            while !mask[((s + len) % 6) as usize] {
                len += 1;
            }
            runs.push(LocalBoundary { start: s, len });
        }
    }
    runs
}

/// Pin bank (0 or 1) for a boundary traversal with travel direction `t`:
/// the two links on the empty-region side of the bond. Both endpoints of a
/// directed use compute the same value, and the two opposite uses of a bond
/// get different banks.
pub fn boundary_bank(travel: Direction) -> u8 {
    let perp = travel.rot30(-3);
    if perp.ring() < 6 {
        0
    } else {
        1
    }
}

/// One step of a traced boundary cycle.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CycleStep {
    pub amoebot: u32,
    pub occ: u8,
}

/// A boundary cycle with per-occurrence local data.
#[derive(Clone, Debug)]
pub struct BoundaryCycle {
    pub steps: Vec<CycleStep>,
    /// Local boundary of each step.
    pub runs: Vec<LocalBoundary>,
}

impl BoundaryCycle {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Exact signed turn total in 60-degree units: +6 outer, -6 inner.
    pub fn turn_total(&self) -> i32 {
        if self.steps.len() == 1 && self.runs[0].len == 6 {
            return 6;
        }
        self.runs.iter().map(|r| r.turn() as i32).sum()
    }
}

/// Collect every boundary cycle by following the local successor rule.
/// The cycle listing starts at the smallest (amoebot, occurrence) pair.
pub fn trace_boundary_cycles(st: &Structure) -> Vec<BoundaryCycle> {
    let n = st.len();
    let occs: Vec<Vec<LocalBoundary>> = (0..n)
        .map(|i| {
            if st.is_boundary(i) {
                local_boundaries(st.neighbor_mask(i))
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut visited: Vec<Vec<bool>> = occs.iter().map(|o| vec![false; o.len()]).collect();
    let mut cycles = Vec::new();
    for i in 0..n {
        for o in 0..occs[i].len() {
            if visited[i][o] {
                continue;
            }
            let mut steps = Vec::new();
            let mut runs = Vec::new();
            let (mut ci, mut co) = (i, o);
            loop {
                visited[ci][co] = true;
                let run = occs[ci][co];
                steps.push(CycleStep {
                    amoebot: ci as u32,
                    occ: co as u8,
                });
                runs.push(run);
                if run.len == 6 {
                    break; // isolated amoebot
                }
                let dep = run.departure();
                let nj = st
                    .neighbor_index(ci, dep as usize)
                    .expect("departure direction is occupied");
                let arr = (dep + 3) % 6;
                let no = occs[nj]
                    .iter()
                    .position(|r| r.arrival() == arr)
                    .expect("successor occurrence exists");
                if (nj, no) == (i, o) {
                    break;
                }
                ci = nj;
                co = no;
            }
            cycles.push(BoundaryCycle { steps, runs });
        }
    }
    cycles
}
