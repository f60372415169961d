//! Canonical (d, s)-skeletons and spanning trees.
//!
//! A skeleton fuses all boundary cycles into one closed walk by connecting
//! every inner boundary to another boundary along a straight path in the
//! path direction. The fused walk is determined locally: every amoebot
//! holds a set of track ends (cycle arrivals and departures of its
//! occurrences, plus path endpoints), each at an angular slot on its side
//! of the bond it uses, and pairs arrivals to departures without crossings.
//! Fusion surgery happens only where a path or a trivial fusion lands: the
//! inserted ends nest inside one corner of the hosting occurrence and the
//! non-crossing matching inside that group rewires the walk through the
//! detour. With handedness s = minus the whole construction mirrors:
//! boundary cycles reverse and the slot scan flips, which keeps the
//! skeleton covariant under reflections.

mod boundary_maxima;
mod spanning;

pub use boundary_maxima::{boundary_double_maxima, boundary_seat_inits, BoundaryMaxima};
pub use spanning::{spanning_tree, SpanningTree};

use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;
use crate::grid::{Direction, Sign};
use crate::pasc::{park_unused, ChainRef};
use crate::primitives::{classify_boundaries, local_boundaries, BoundaryKind};

/// The path direction: d itself on a main axis, else d tilted 30 degrees by
/// the handedness.
pub fn path_direction(d: Direction, s: Sign) -> Direction {
    if d.is_main() {
        d
    } else {
        crate::grid::rotate(d, 30, s).unwrap()
    }
}

/// One visit of the skeleton walk at an amoebot: the directions (with slot
/// side) the walk arrives from and leaves through.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SkelVisit {
    pub in_dir: u8,
    pub in_plus: bool,
    pub out_dir: u8,
    pub out_plus: bool,
}

/// A computed skeleton: per-amoebot visit lists plus the canonical
/// splitting visit on the outer boundary.
#[derive(Clone, Debug)]
pub struct Skeleton {
    pub d: Direction,
    pub s: Sign,
    pub visits: Vec<Vec<SkelVisit>>,
    pub split: (usize, usize),
    pub rounds: u64,
}

impl Skeleton {
    pub fn visit_count(&self) -> usize {
        self.visits.iter().map(|v| v.len()).sum()
    }
}

/// Track-end bookkeeping for the local walk assembly.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum EndOrigin {
    Occ(u8),
    Whisker,
}

#[derive(Clone, Copy, Debug)]
struct End {
    key: u8,
    arrival: bool,
    dir: u8,
    plus: bool,
    origin: EndOrigin,
}

fn end_key(dir: u8, plus: bool) -> u8 {
    (4 * dir as i16 + if plus { 1 } else { -1 }).rem_euclid(24) as u8
}

/// Local inputs of the walk assembly, all known to the amoebot itself.
#[derive(Clone, Debug, Default)]
pub struct AssemblyInput {
    /// (arrival, departure) direction per occurrence, region-on-the-right
    /// orientation as produced by the boundary tracer.
    pub occs: Vec<(u8, u8)>,
    /// Occurrence fused by a trivial path (the boundary's starting point
    /// when this amoebot belongs to several boundaries).
    pub child_occ: Option<u8>,
    /// Nontrivial path starting point: the path leaves toward path_dir.
    pub whisker_up: bool,
    /// Path endpoint the first boundary amoebot hit: a path arrives from the opposite of path_dir.
    pub whisker_down: bool,
    /// Interior path node: the path runs straight through.
    pub pass_through: bool,
}

/// Pair every track end of one amoebot. Returns the visit list sorted by
/// arrival slot key.
pub fn assemble_visits(input: &AssemblyInput, path_dir: Direction, s: Sign) -> Vec<SkelVisit> {
    let plusness = |base: bool| if s == Sign::Plus { base } else { !base };
    let dp = path_dir.main_index().unwrap() as u8;
    let dn = (dp + 3) % 6;
    let mut ends: Vec<End> = Vec::new();
    let mut group_of: Vec<usize> = Vec::new(); // per occurrence
    let occ_count = input.occs.len();

    for (o, &(arr, dep)) in input.occs.iter().enumerate() {
        // With s = minus the walk traverses cycles reversed.
        let (a, d) = if s == Sign::Plus {
            (arr, dep)
        } else {
            (dep, arr)
        };
        ends.push(End {
            key: end_key(a, plusness(true)),
            arrival: true,
            dir: a,
            plus: plusness(true),
            origin: EndOrigin::Occ(o as u8),
        });
        ends.push(End {
            key: end_key(d, plusness(false)),
            arrival: false,
            dir: d,
            plus: plusness(false),
            origin: EndOrigin::Occ(o as u8),
        });
        group_of.push(o);
    }

    // Whisker ends. Departures sit on the plus side, arrivals on minus
    // (mirrored for s = minus).
    let mut items: Vec<(Vec<End>, Option<u8>)> = Vec::new(); // (ends, anchor key for parent search)
    let wend = |dir: u8, arrival: bool| End {
        key: end_key(dir, plusness(!arrival)),
        arrival,
        dir,
        plus: plusness(!arrival),
        origin: EndOrigin::Whisker,
    };
    if input.pass_through {
        items.push((
            vec![
                wend(dp, true),
                wend(dn, false),
                wend(dn, true),
                wend(dp, false),
            ],
            None,
        ));
    }
    if input.whisker_up {
        // Pairs with the child occurrence; this amoebot is the starting
        // point and lies on exactly one boundary.
        items.push((vec![wend(dp, true), wend(dp, false)], Some(0)));
    }
    if input.whisker_down {
        let anchor = end_key(dn, plusness(true));
        items.push((
            vec![wend(dn, false), wend(dn, true)],
            Some(find_parent(&ends, occ_count, anchor, s)),
        ));
    }
    if let Some(c) = input.child_occ {
        // Trivial fusion: the child occurrence nests into another
        // occurrence's corner; locate it from the child's arrival slot.
        let child_arr = ends
            .iter()
            .find(|e| e.arrival && e.origin == EndOrigin::Occ(c))
            .unwrap();
        let parent = find_parent_excluding(&ends, occ_count, child_arr.key, s, c);
        union(&mut group_of, c as usize, parent as usize);
    }

    // Union the item groups with their parents.
    let mut grouped_items: Vec<(Vec<End>, usize)> = Vec::new();
    for (item_ends, parent) in items {
        match parent {
            Some(p) => grouped_items.push((item_ends, root(&group_of, p as usize))),
            None => {
                // Standalone pass-through whisker pair.
                grouped_items.push((item_ends, usize::MAX));
            }
        }
    }

    // Build per-group end lists.
    let mut visits = Vec::new();
    let scan_next = |key: u8, off: u8| -> u8 {
        if s == Sign::Plus {
            (key + 24 - off) % 24
        } else {
            (key + off) % 24
        }
    };
    let mut groups: std::collections::BTreeMap<usize, Vec<End>> = Default::default();
    for o in 0..occ_count {
        let r = root(&group_of, o);
        let es: Vec<End> = ends
            .iter()
            .filter(|e| e.origin == EndOrigin::Occ(o as u8))
            .copied()
            .collect();
        groups.entry(r).or_default().extend(es);
    }
    let mut standalone = Vec::new();
    for (item_ends, parent) in grouped_items {
        if parent == usize::MAX {
            standalone.push(item_ends);
        } else {
            groups.entry(parent).or_default().extend(item_ends);
        }
    }
    for (rootocc, mut es) in groups {
        // Start the linear matching at the root occurrence's arrival.
        let start = es
            .iter()
            .position(|e| e.arrival && e.origin == EndOrigin::Occ(rootocc as u8))
            .expect("root occurrence has an arrival");
        let start_key = es[start].key;
        es.sort_by_key(|e| {
            let mut o = 0u8;
            while scan_next(start_key, o) != e.key {
                o += 1;
            }
            o
        });
        visits.extend(match_linear(&es));
    }
    for es in standalone {
        let mut es = es;
        // Start at the descending arrival (the path_dir side, minus slot).
        let start = es
            .iter()
            .position(|e| e.arrival && e.dir == dp)
            .expect("pass-through has a descending arrival");
        let start_key = es[start].key;
        es.sort_by_key(|e| {
            let mut o = 0u8;
            while scan_next(start_key, o) != e.key {
                o += 1;
            }
            o
        });
        visits.extend(match_linear(&es));
    }
    visits.sort_by_key(|v| end_key(v.in_dir, v.in_plus));
    visits
}

/// Non-crossing linear matching of arrivals to departures in scan order.
fn match_linear(es: &[End]) -> Vec<SkelVisit> {
    let mut stack: Vec<&End> = Vec::new();
    let mut out = Vec::new();
    for e in es {
        if e.arrival {
            stack.push(e);
        } else {
            let a = stack.pop().expect("balanced ends");
            out.push(SkelVisit {
                in_dir: a.dir,
                in_plus: a.plus,
                out_dir: e.dir,
                out_plus: e.plus,
            });
        }
    }
    assert!(stack.is_empty(), "balanced ends");
    out
}

/// Occurrence whose corner hosts the anchor slot: scan from the anchor in
/// walk-scan direction to the first occurrence arrival.
fn find_parent(ends: &[End], occ_count: usize, anchor: u8, s: Sign) -> u8 {
    find_parent_excluding(ends, occ_count, anchor, s, u8::MAX)
}

fn find_parent_excluding(ends: &[End], occ_count: usize, anchor: u8, s: Sign, skip: u8) -> u8 {
    assert!(occ_count > 0, "parent search needs an occurrence");
    let mut key = anchor;
    loop {
        key = if s == Sign::Plus {
            (key + 23) % 24
        } else {
            (key + 1) % 24
        };
        for e in ends {
            if e.key == key && e.arrival {
                if let EndOrigin::Occ(o) = e.origin {
                    if o != skip {
                        return o;
                    }
                }
            }
        }
    }
}

fn root(parents: &[usize], mut x: usize) -> usize {
    while parents[x] != x {
        x = parents[x];
    }
    x
}

fn union(parents: &mut [usize], child: usize, parent: usize) {
    let r = root(parents, parent);
    let c = root(parents, child);
    if c != r {
        parents[c] = r;
    }
}

/// The path identification rounds: starting points beep straight along path_dir
/// through inner amoebots until the first boundary amoebot.
struct PathProbe {
    path_dir: u8,
    is_boundary: bool,
    starter: bool,
    round: u8,
    dp_set: u8,
    opp_set: u8,
    pub on_path: bool,
    pub is_vb: bool,
}

impl Program for PathProbe {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        self.round += 1;
        match self.round {
            1 => {
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                let dp = self.path_dir as usize;
                let opp = (dp + 3) % 6;
                if self.is_boundary {
                    // Boundary amoebots terminate the beam.
                    for (dir, set_slot) in [(dp, 0), (opp, 1)] {
                        if ctx.neighbors[dir] {
                            let set = cfg.add_set();
                            if set_slot == 0 {
                                self.dp_set = set;
                            } else {
                                self.opp_set = set;
                            }
                            for slot in 0..ctx.k {
                                cfg.assign(dir, slot, set);
                            }
                        }
                    }
                } else {
                    // Inner amoebots conduct the beam straight through.
                    let set = cfg.add_set();
                    self.dp_set = set;
                    self.opp_set = set;
                    for dir in [dp, opp] {
                        if ctx.neighbors[dir] {
                            for slot in 0..ctx.k {
                                cfg.assign(dir, slot, set);
                            }
                        }
                    }
                }
                park_unused(&mut cfg, junk, ctx);
                Action::configure(cfg)
            }
            2 => Action::keep().beep_if(self.starter && self.dp_set != u8::MAX, self.dp_set),
            3 => {
                if !self.is_boundary && self.dp_set != u8::MAX && ctx.heard(self.dp_set) {
                    self.on_path = true;
                }
                if self.is_boundary && self.opp_set != u8::MAX && ctx.heard(self.opp_set) {
                    self.is_vb = true;
                }
                Action::keep()
            }
            _ => Action::keep(),
        }
    }

    fn done(&self) -> bool {
        self.round >= 3
    }
}

/// Compute the canonical (d, s)-skeleton.
pub fn canonical_skeleton(
    world: &mut AmoebotWorld,
    d: Direction,
    s: Sign,
    phase_budget: u32,
) -> Result<Skeleton, AlgoError> {
    let n = world.st.len();
    let start_round = world.round;
    let path_dir = path_direction(d, s);
    if n == 1 {
        return Ok(Skeleton {
            d,
            s,
            visits: vec![vec![SkelVisit {
                in_dir: 0,
                in_plus: true,
                out_dir: 0,
                out_plus: false,
            }]],
            split: (0, 0),
            rounds: 0,
        });
    }

    let boundaries = classify_boundaries(world, phase_budget)?;
    let winners = boundary_double_maxima(world, &boundaries, d, s, path_dir, phase_budget)?;

    // Starting points and the splitting point.
    let mut starter = vec![false; n]; // nontrivial path start
    let mut child_occ: Vec<Option<u8>> = vec![None; n];
    let mut split_amoebot = usize::MAX;
    let mut split_occ = u8::MAX;
    let occ_counts: Vec<usize> = (0..n)
        .map(|i| {
            if world.st.is_boundary(i) {
                local_boundaries(world.st.neighbor_mask(i)).len()
            } else {
                0
            }
        })
        .collect();
    for (b, &w) in boundaries.iter().zip(winners.iter()) {
        let step = b.cycle.steps[w];
        let a = step.amoebot as usize;
        match b.kind {
            BoundaryKind::Outer => {
                split_amoebot = a;
                // The splitting occurrence is the one whose run contains
                // path_dir; the winner step already prefers it.
                split_occ = step.occ;
            }
            BoundaryKind::Inner => {
                if occ_counts[a] >= 2 {
                    child_occ[a] = Some(step.occ);
                } else {
                    starter[a] = true;
                }
            }
        }
    }

    // Identify path members.
    let probes: Vec<PathProbe> = (0..n)
        .map(|i| PathProbe {
            path_dir: path_dir.main_index().unwrap() as u8,
            is_boundary: world.st.is_boundary(i),
            starter: starter[i],
            round: 0,
            dp_set: u8::MAX,
            opp_set: u8::MAX,
            on_path: false,
            is_vb: false,
        })
        .collect();
    let mut phase = world.phase(probes, 0x52);
    phase.run_to_completion(8)?;
    let probes = phase.finish();

    // Local assembly.
    let mut visits = Vec::with_capacity(n);
    for i in 0..n {
        let occs: Vec<(u8, u8)> = if world.st.is_boundary(i) {
            local_boundaries(world.st.neighbor_mask(i))
                .into_iter()
                .filter(|r| r.len < 6)
                .map(|r| (r.arrival(), r.departure()))
                .collect()
        } else {
            Vec::new()
        };
        let input = AssemblyInput {
            occs,
            child_occ: child_occ[i],
            whisker_up: starter[i],
            whisker_down: probes[i].is_vb,
            pass_through: probes[i].on_path,
        };
        visits.push(assemble_visits(&input, path_dir, s));
    }

    // The splitting visit holds the chosen occurrence's arrival.
    let split_runs = local_boundaries(world.st.neighbor_mask(split_amoebot));
    let run = split_runs[split_occ as usize];
    let (arr, dep) = (run.arrival(), run.departure());
    let in_dir = if s == Sign::Plus { arr } else { dep };
    let in_plus = s == Sign::Plus;
    let split_idx = visits[split_amoebot]
        .iter()
        .position(|v| v.in_dir == in_dir && v.in_plus == in_plus)
        .expect("splitting occurrence keeps its arrival");

    Ok(Skeleton {
        d,
        s,
        visits,
        split: (split_amoebot, split_idx),
        rounds: world.round - start_round,
    })
}

/// Follow the successor pointers from the splitting visit to list the
/// closed walk as an open chain.
pub fn skeleton_path(world: &AmoebotWorld, sk: &Skeleton) -> ChainRef {
    let mut order: Vec<(usize, usize)> = Vec::new();
    let (mut a, mut v) = sk.split;
    loop {
        order.push((a, v));
        let visit = sk.visits[a][v];
        if sk.visits.len() == 1 && sk.visits[0].len() == 1 && world.st.len() == 1 {
            break;
        }
        let next = world
            .st
            .neighbor_index(a, visit.out_dir as usize)
            .expect("walk follows bonds");
        let want_dir = (visit.out_dir + 3) % 6;
        let want_plus = !visit.out_plus;
        let nv = sk.visits[next]
            .iter()
            .position(|w| w.in_dir == want_dir && w.in_plus == want_plus)
            .expect("matching arrival exists");
        if (next, nv) == sk.split {
            break;
        }
        a = next;
        v = nv;
    }
    let mut occ_index: std::collections::HashMap<(usize, usize), u8> = Default::default();
    let positions = order
        .iter()
        .map(|&(a, v)| {
            let e = occ_index.entry((a, v)).or_insert(v as u8);
            (world.st.coord(a), *e)
        })
        .collect();
    let banks = order
        .windows(2)
        .map(|w| {
            let (a, v) = w[0];
            let dir = Direction::main(sk.visits[a][v].out_dir as usize);
            crate::pasc::bank_for_direction(dir)
        })
        .collect();
    ChainRef {
        positions,
        ref_index: 0,
        banks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{self, GridCoord};

    fn world(v: &[(i32, i32)], k: usize, seed: u64) -> AmoebotWorld {
        AmoebotWorld::load(
            v.iter().map(|&(q, r)| GridCoord::new(q, r)).collect(),
            k,
            seed,
        )
        .unwrap()
    }

    fn walk_visits(w: &AmoebotWorld, sk: &Skeleton) -> Vec<(GridCoord, SkelVisit)> {
        let path = skeleton_path(w, sk);
        let mut seen = Vec::new();
        let (mut a, mut v) = sk.split;
        for _ in 0..path.len() {
            seen.push((w.st.coord(a), sk.visits[a][v]));
            let visit = sk.visits[a][v];
            if let Some(next) = w.st.neighbor_index(a, visit.out_dir as usize) {
                let want = ((visit.out_dir + 3) % 6, !visit.out_plus);
                if let Some(nv) = sk.visits[next]
                    .iter()
                    .position(|x| (x.in_dir, x.in_plus) == want)
                {
                    a = next;
                    v = nv;
                    continue;
                }
            }
            break;
        }
        seen
    }

    #[test]
    fn triangle_skeleton_is_outer_cycle() {
        let mut w = world(&[(0, 0), (1, 0), (0, 1)], 4, 11);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        assert_eq!(sk.visit_count(), 3);
        let split = w.st.index_of(GridCoord::new(0, 1)).unwrap();
        assert_eq!(sk.split.0, split);
        let path = skeleton_path(&w, &sk);
        assert_eq!(path.len(), 3);
        assert_eq!(path.positions[0].0, GridCoord::new(0, 1));
    }

    #[test]
    fn hexagon_ring_skeleton_fuses_both_cycles() {
        let mut w = world(&[(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)], 4, 11);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        assert_eq!(sk.visit_count(), 12, "both 6-cycles fused at the top");
        let top = w.st.index_of(GridCoord::new(0, 1)).unwrap();
        assert_eq!(sk.visits[top].len(), 2);
        assert_eq!(sk.split.0, top);
        let path = skeleton_path(&w, &sk);
        assert_eq!(path.len(), 12);
    }

    #[test]
    fn two_amoebot_line_visits_bond_twice() {
        let mut w = world(&[(0, 0), (1, 0)], 4, 11);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        assert_eq!(sk.visit_count(), 2);
        let path = skeleton_path(&w, &sk);
        assert_eq!(path.len(), 2);
    }

    #[test]
    fn ring_with_cap_uses_a_nontrivial_path() {
        // Hexagon ring plus a cap so the inner starting point is buried.
        let cells = [
            (0, 1),
            (1, 0),
            (1, -1),
            (0, -1),
            (-1, 0),
            (-1, 1),
            (0, 2),
            (1, 1),
            (-1, 2),
        ];
        let mut w = world(&cells, 4, 11);
        let sk = canonical_skeleton(&mut w, grid::N, Sign::Plus, 24).unwrap();
        let path = skeleton_path(&w, &sk);
        // Outer cycle (9 boundary amoebots, (0,1) is interior... the outer
        // boundary has 8 members) plus hole cycle (6) plus path doubled.
        let visits = walk_visits(&w, &sk);
        assert_eq!(visits.len(), path.len());
        // Every boundary amoebot is covered.
        for i in 0..w.st.len() {
            if w.st.is_boundary(i) {
                assert!(
                    visits.iter().any(|(c, _)| *c == w.st.coord(i)),
                    "boundary amoebot {} covered",
                    w.st.coord(i)
                );
            }
        }
        // Each bond visited at most twice.
        let mut bond_uses: std::collections::HashMap<(GridCoord, GridCoord), usize> =
            Default::default();
        for (c, v) in &visits {
            let to = c.neighbor(Direction::main(v.out_dir as usize)).unwrap();
            let key = if *c < to { (*c, to) } else { (to, *c) };
            *bond_uses.entry(key).or_default() += 1;
        }
        assert!(bond_uses.values().all(|&u| u <= 2));
    }
}
