//! Spanning trees from a skeleton path.
//!
//! Phase one runs PASC along the path with the splitting visit as the
//! reference; every amoebot streams the identifiers of all its occurrences
//! bit by bit, keeps pairwise comparisons (the most significant differing
//! bit decides, so the latest difference wins), and finally adopts the edge
//! to the predecessor of its minimal occurrence. Those edges form a tree on
//! all path amoebots. Phase two attaches every remaining amoebot to its
//! northern neighbor, which always exists because non-path amoebots are
//! inner amoebots.

use super::Skeleton;
use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;
use crate::grid::N;
use crate::pasc::{ceil_log2, park_unused, pasc_config, seats_for_chain, SeatVec, MAX_SEATS};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    Reconfigure,
    RefBeep,
    ReadAndEcho,
    NotifyConfigure,
    NotifyBeep,
    NotifyRead,
    Done,
}

struct SpanningPhase1 {
    sv: SeatVec,
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    pred_set: [u8; MAX_SEATS],
    succ_set: [u8; MAX_SEATS],
    /// cmp[i][j] = +1 when seat i's identifier is currently greater than
    /// seat j's, -1 when smaller; the latest differing bit wins.
    cmp: [[i8; MAX_SEATS]; MAX_SEATS],
    iteration: u32,
    phase: Phase,
    /// Direction of the adopted predecessor edge.
    pub edge_dir: Option<u8>,
    /// Directions on which successors adopted the edge to us.
    pub marked: [bool; 6],
}

impl SpanningPhase1 {
    fn new(sv: SeatVec) -> Self {
        SpanningPhase1 {
            sv,
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            pred_set: [u8::MAX; MAX_SEATS],
            succ_set: [u8::MAX; MAX_SEATS],
            cmp: [[0; MAX_SEATS]; MAX_SEATS],
            iteration: 0,
            phase: Phase::Reconfigure,
            edge_dir: None,
            marked: [false; 6],
        }
    }

    fn first_seat(&self) -> Option<usize> {
        let n = self.sv.len();
        (0..n).find(|&i| (0..n).all(|j| j == i || self.cmp[i][j] < 0))
    }
}

impl Program for SpanningPhase1 {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        match self.phase {
            Phase::Done => Action::keep(),
            Phase::Reconfigure => {
                if self.sv.is_empty()
                    || (self.sv.len() == 1
                        && self.sv.seats[0].pred.is_none()
                        && self.sv.seats[0].succ.is_none())
                {
                    self.phase = Phase::Done;
                    return Action::keep();
                }
                if self.iteration > 0 {
                    if !ctx.heard_any() {
                        self.phase = Phase::NotifyConfigure;
                        return self.activate(ctx);
                    }
                    for s in 0..self.sv.len() {
                        if self.will_passivate[s] {
                            self.active[s] = false;
                            self.will_passivate[s] = false;
                        }
                    }
                }
                let cfg = pasc_config(&self.sv, &self.active, ctx, &mut self.pri, &mut self.sec);
                self.phase = Phase::RefBeep;
                Action::configure(cfg)
            }
            Phase::RefBeep => {
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if self.sv.seats[s].is_ref {
                        a = a.beep(self.pri[s]);
                    }
                }
                self.phase = Phase::ReadAndEcho;
                a
            }
            Phase::ReadAndEcho => {
                let mut a = Action::keep();
                let n = self.sv.len();
                let mut bits = [false; MAX_SEATS];
                for s in 0..n {
                    bits[s] = ctx.heard(self.sec[s]);
                    if self.active[s] && bits[s] {
                        self.will_passivate[s] = true;
                        a = a.beep(self.sec[s]);
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        if bits[i] != bits[j] {
                            self.cmp[i][j] = if bits[i] { 1 } else { -1 };
                        }
                    }
                }
                self.iteration += 1;
                self.phase = Phase::Reconfigure;
                a
            }
            Phase::NotifyConfigure => {
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for s in 0..self.sv.len() {
                    self.pred_set[s] = u8::MAX;
                    self.succ_set[s] = u8::MAX;
                    if let Some(l) = self.sv.seats[s].pred {
                        let set = cfg.add_set();
                        self.pred_set[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                    }
                    if let Some(l) = self.sv.seats[s].succ {
                        let set = cfg.add_set();
                        self.succ_set[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                    }
                }
                park_unused(&mut cfg, junk, ctx);
                self.phase = Phase::NotifyBeep;
                Action::configure(cfg)
            }
            Phase::NotifyBeep => {
                let mut a = Action::keep();
                if let Some(first) = self.first_seat() {
                    if let Some(l) = self.sv.seats[first].pred {
                        self.edge_dir = Some(l.dir);
                        a = a.beep(self.pred_set[first]);
                    }
                }
                self.phase = Phase::NotifyRead;
                a
            }
            Phase::NotifyRead => {
                for s in 0..self.sv.len() {
                    if self.succ_set[s] != u8::MAX && ctx.heard(self.succ_set[s]) {
                        let l = self.sv.seats[s].succ.unwrap();
                        self.marked[l.dir as usize] = true;
                    }
                }
                self.phase = Phase::Done;
                Action::keep()
            }
        }
    }

    fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn tag(&self) -> char {
        't'
    }
}

/// Phase two: every amoebot without a path seat adopts the edge to its
/// northern neighbor and notifies it.
struct NorthAttach {
    on_path: bool,
    round: u8,
    sets: [u8; 6],
    pub edge_north: bool,
    pub marked_south: bool,
}

impl Program for NorthAttach {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        self.round += 1;
        match self.round {
            1 => {
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for d in 0..6 {
                    self.sets[d] = u8::MAX;
                    if ctx.neighbors[d] {
                        let set = cfg.add_set();
                        self.sets[d] = set;
                        for slot in 0..ctx.k {
                            cfg.assign(d, slot, set);
                        }
                    }
                }
                park_unused(&mut cfg, junk, ctx);
                Action::configure(cfg)
            }
            2 => {
                let north = N.main_index().unwrap();
                if !self.on_path {
                    self.edge_north = true;
                    Action::keep().beep(self.sets[north])
                } else {
                    Action::keep()
                }
            }
            _ => {
                if self.round == 3 {
                    let south = N.opposite().main_index().unwrap();
                    if self.sets[south] != u8::MAX && ctx.heard(self.sets[south]) {
                        self.marked_south = true;
                    }
                }
                Action::keep()
            }
        }
    }

    fn done(&self) -> bool {
        self.round >= 3
    }
}

/// A spanning tree as an explicit edge list with its root.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub edges: Vec<(u32, u32)>,
    pub root: u32,
    pub rounds: u64,
    /// Edges adopted by the path phase, for comparison against the
    /// first-occurrence construction.
    pub path_edges: Vec<(u32, u32)>,
}

/// Build a spanning tree from a skeleton path.
pub fn spanning_tree(world: &mut AmoebotWorld, sk: &Skeleton) -> Result<SpanningTree, AlgoError> {
    let n = world.st.len();
    let start_round = world.round;
    if n == 1 {
        return Ok(SpanningTree {
            edges: Vec::new(),
            root: 0,
            rounds: 0,
            path_edges: Vec::new(),
        });
    }
    let path = super::skeleton_path(world, sk);
    let seats = seats_for_chain(&world.st, &path)?;
    let on_path: Vec<bool> = seats.iter().map(|sv| !sv.is_empty()).collect();
    let programs: Vec<SpanningPhase1> = seats.into_iter().map(SpanningPhase1::new).collect();
    let budget = 8 * (ceil_log2(path.len().max(2)) as u64 + 3) + 24;
    let mut phase = world.phase(programs, 0x61);
    phase.run_to_completion(budget)?;
    let p1 = phase.finish();
    let _ = world.take_emitted();

    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (i, p) in p1.iter().enumerate() {
        if let Some(dir) = p.edge_dir {
            let j = world.st.neighbor_index(i, dir as usize).unwrap();
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            edges.push((a as u32, b as u32));
        }
    }
    // Cross-check: the notified side observed exactly the adopted edges.
    for (i, p) in p1.iter().enumerate() {
        for d in 0..6 {
            if p.marked[d] {
                let j = world.st.neighbor_index(i, d).unwrap();
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                debug_assert!(edges.contains(&(a as u32, b as u32)));
            }
        }
    }
    let path_edges = edges.clone();

    let programs: Vec<NorthAttach> = (0..n)
        .map(|i| NorthAttach {
            on_path: on_path[i],
            round: 0,
            sets: [u8::MAX; 6],
            edge_north: false,
            marked_south: false,
        })
        .collect();
    let mut phase = world.phase(programs, 0x62);
    phase.run_to_completion(8)?;
    let p2 = phase.finish();
    for (i, p) in p2.iter().enumerate() {
        if p.edge_north {
            let j = world
                .st
                .neighbor_index(i, N.main_index().unwrap())
                .expect("inner amoebots have a northern neighbor");
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            edges.push((a as u32, b as u32));
        }
    }
    edges.sort();
    edges.dedup();
    let root = path.positions[0].0;
    Ok(SpanningTree {
        edges,
        root: world.st.index_of(root).unwrap() as u32,
        rounds: world.round - start_round,
        path_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{self, GridCoord, Sign};
    use crate::skeleton::canonical_skeleton;

    fn world(v: &[(i32, i32)], k: usize, seed: u64) -> AmoebotWorld {
        AmoebotWorld::load(
            v.iter().map(|&(q, r)| GridCoord::new(q, r)).collect(),
            k,
            seed,
        )
        .unwrap()
    }

    fn check_tree(w: &AmoebotWorld, t: &SpanningTree) {
        let n = w.st.len();
        assert_eq!(t.edges.len(), n.saturating_sub(1), "n-1 edges");
        // Connectivity by union-find.
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &(a, b) in &t.edges {
            let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
            assert_ne!(ra, rb, "edge ({a},{b}) closes a cycle");
            parent[ra] = rb;
        }
        let r0 = find(&mut parent, 0);
        for i in 1..n {
            assert_eq!(find(&mut parent, i), r0, "tree spans everything");
        }
    }

    #[test]
    fn triangle_tree() {
        let mut w = world(&[(0, 0), (1, 0), (0, 1)], 4, 21);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        let t = spanning_tree(&mut w, &sk).unwrap();
        check_tree(&w, &t);
        assert_eq!(t.root, w.st.index_of(GridCoord::new(0, 1)).unwrap() as u32);
    }

    #[test]
    fn filled_hexagon_tree_attaches_center_north() {
        let cells = [(0, 0), (0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)];
        let mut w = world(&cells, 4, 21);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        let t = spanning_tree(&mut w, &sk).unwrap();
        check_tree(&w, &t);
        assert_eq!(t.path_edges.len(), 5, "six boundary amoebots, five edges");
        // The center is off the skeleton and picks its northern neighbor.
        let center = w.st.index_of(GridCoord::new(0, 0)).unwrap() as u32;
        let north = w.st.index_of(GridCoord::new(0, 1)).unwrap() as u32;
        let key = if center < north {
            (center, north)
        } else {
            (north, center)
        };
        assert!(t.edges.contains(&key));
    }

    #[test]
    fn single_amoebot_empty_tree() {
        let mut w = world(&[(0, 0)], 4, 21);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        let t = spanning_tree(&mut w, &sk).unwrap();
        assert!(t.edges.is_empty());
    }

    #[test]
    fn ring_tree() {
        let mut w = world(&[(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)], 4, 5);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        let t = spanning_tree(&mut w, &sk).unwrap();
        check_tree(&w, &t);
    }
}
