//! Full-knowledge reference implementations of every output, used as ground
//! truth by the test suites and the CLI's --check mode.
//!
//! The oracle sees the whole coordinate set at once: empty regions come from
//! a flood fill over a bounding box inflated by one (the frame-touching
//! region is the single infinite one), maxima from direct projection
//! comparisons, skeleton inputs from global walks, and symmetries from
//! exact centroid-anchored coordinate maps. None of it runs through the
//! round engine.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::grid::{proj, Direction, GridCoord, Sign};
use crate::primitives::{local_boundaries, LocalBoundary};
use crate::skeleton::{assemble_visits, path_direction, AssemblyInput, SkelVisit};

/// Global view of a structure with region labels.
pub struct OracleView {
    pub coords: Vec<GridCoord>,
    pub index: HashMap<GridCoord, usize>,
    /// Region id per empty node of the inflated box.
    region: HashMap<GridCoord, u32>,
    /// Region ids adjacent to the frame (exactly one: the outer region).
    outer_region: u32,
    pub region_count: u32,
}

impl OracleView {
    pub fn new(coords: &[GridCoord]) -> Self {
        let mut coords = coords.to_vec();
        coords.sort();
        let index: HashMap<GridCoord, usize> =
            coords.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let (mut qmin, mut qmax, mut rmin, mut rmax) = (i32::MAX, i32::MIN, i32::MAX, i32::MIN);
        for c in &coords {
            qmin = qmin.min(c.q);
            qmax = qmax.max(c.q);
            rmin = rmin.min(c.r);
            rmax = rmax.max(c.r);
        }
        let (qmin, qmax, rmin, rmax) = (qmin - 1, qmax + 1, rmin - 1, rmax + 1);
        let mut region: HashMap<GridCoord, u32> = HashMap::new();
        let mut outer_region = u32::MAX;
        let mut next = 0u32;
        for q in qmin..=qmax {
            for r in rmin..=rmax {
                let c = GridCoord::new(q, r);
                if index.contains_key(&c) || region.contains_key(&c) {
                    continue;
                }
                let id = next;
                next += 1;
                let mut queue = VecDeque::from([c]);
                region.insert(c, id);
                let mut touches_frame = false;
                while let Some(x) = queue.pop_front() {
                    if x.q == qmin || x.q == qmax || x.r == rmin || x.r == rmax {
                        touches_frame = true;
                    }
                    for d in crate::grid::MAIN_DIRECTIONS {
                        let y = x.neighbor(d).unwrap();
                        if y.q < qmin || y.q > qmax || y.r < rmin || y.r > rmax {
                            continue;
                        }
                        if index.contains_key(&y) || region.contains_key(&y) {
                            continue;
                        }
                        region.insert(y, id);
                        queue.push_back(y);
                    }
                }
                if touches_frame {
                    assert_eq!(outer_region, u32::MAX, "exactly one infinite region");
                    outer_region = id;
                }
            }
        }
        OracleView {
            coords,
            index,
            region,
            outer_region,
            region_count: next,
        }
    }

    pub fn occupied(&self, c: GridCoord) -> bool {
        self.index.contains_key(&c)
    }

    /// Region id of an empty node (inside the inflated box).
    pub fn region_of(&self, c: GridCoord) -> Option<u32> {
        self.region.get(&c).copied()
    }

    pub fn is_outer_region(&self, id: u32) -> bool {
        id == self.outer_region
    }

    pub fn neighbor_mask(&self, c: GridCoord) -> [bool; 6] {
        let mut m = [false; 6];
        for (i, d) in crate::grid::MAIN_DIRECTIONS.into_iter().enumerate() {
            m[i] = self.occupied(c.neighbor(d).unwrap());
        }
        m
    }
}

/// The stripe A(S, u, d): members of S on the axis through u in direction d.
pub fn oracle_stripe(view: &OracleView, u: GridCoord, d: Direction) -> Vec<bool> {
    let axis = crate::grid::Axis::new(u, d);
    view.coords
        .iter()
        .map(|&c| crate::grid::on_axis(c, axis))
        .collect()
}

/// Global maxima of R with respect to d: argmax of the projection.
pub fn oracle_maxima(view: &OracleView, in_r: &[bool], d: Direction) -> Vec<bool> {
    let best = view
        .coords
        .iter()
        .zip(in_r)
        .filter(|(_, &r)| r)
        .map(|(&c, _)| proj(c, d))
        .max();
    match best {
        None => vec![false; view.coords.len()],
        Some(b) => view
            .coords
            .iter()
            .zip(in_r)
            .map(|(&c, &r)| r && proj(c, d) == b)
            .collect(),
    }
}

/// One traced boundary cycle with global labels.
#[derive(Clone, Debug)]
pub struct OracleBoundary {
    pub region: u32,
    pub outer: bool,
    /// (coordinate, occurrence index, run) along the cycle.
    pub steps: Vec<(GridCoord, u8, LocalBoundary)>,
}

impl OracleBoundary {
    pub fn turn_total(&self) -> i32 {
        if self.steps.len() == 1 && self.steps[0].2.len == 6 {
            return 6;
        }
        self.steps.iter().map(|(_, _, r)| r.turn() as i32).sum()
    }
}

/// All boundary cycles, one per region adjacent to the structure, traced
/// with the empty region on the right.
pub fn oracle_boundaries(view: &OracleView) -> Vec<OracleBoundary> {
    let mut per_amoebot: HashMap<GridCoord, Vec<LocalBoundary>> = HashMap::new();
    for &c in &view.coords {
        let runs = local_boundaries(view.neighbor_mask(c));
        if view.neighbor_mask(c).iter().any(|&b| !b) {
            per_amoebot.insert(c, runs);
        }
    }
    let region_of_run = |c: GridCoord, run: LocalBoundary| -> u32 {
        let d = Direction::main(run.start as usize);
        view.region_of(c.neighbor(d).unwrap())
            .expect("run points at empty node")
    };
    let mut visited: HashSet<(GridCoord, u8)> = HashSet::new();
    let mut out = Vec::new();
    let mut anchors: Vec<GridCoord> = per_amoebot.keys().copied().collect();
    anchors.sort();
    for &c0 in &anchors {
        for occ0 in 0..per_amoebot[&c0].len() as u8 {
            if visited.contains(&(c0, occ0)) {
                continue;
            }
            let mut steps = Vec::new();
            let (mut c, mut occ) = (c0, occ0);
            loop {
                visited.insert((c, occ));
                let run = per_amoebot[&c][occ as usize];
                steps.push((c, occ, run));
                if run.len == 6 {
                    break;
                }
                let dep = run.departure();
                let next = c.neighbor(Direction::main(dep as usize)).unwrap();
                let arr = (dep + 3) % 6;
                let nocc = per_amoebot[&next]
                    .iter()
                    .position(|r| r.arrival() == arr)
                    .expect("cycle continues") as u8;
                if (next, nocc) == (c0, occ0) {
                    break;
                }
                c = next;
                occ = nocc;
            }
            let region = region_of_run(c0, per_amoebot[&c0][occ0 as usize]);
            out.push(OracleBoundary {
                region,
                outer: view.is_outer_region(region),
                steps,
            });
        }
    }
    // One cycle per adjacent region.
    let regions: HashSet<u32> = out.iter().map(|b| b.region).collect();
    assert_eq!(regions.len(), out.len(), "one cycle per empty region");
    out
}

/// The oracle's canonical skeleton: same visit structure as the distributed
/// construction, all selections computed globally.
#[derive(Clone, Debug)]
pub struct OracleSkeleton {
    pub visits: Vec<Vec<SkelVisit>>,
    pub split: (usize, usize),
    /// The full walk as (amoebot index, visit index) pairs from the split.
    pub walk: Vec<(usize, usize)>,
}

pub fn oracle_skeleton(view: &OracleView, d: Direction, s: Sign) -> OracleSkeleton {
    let n = view.coords.len();
    let d_p = path_direction(d, s);
    if n == 1 {
        return OracleSkeleton {
            visits: vec![vec![SkelVisit {
                in_dir: 0,
                in_plus: true,
                out_dir: 0,
                out_plus: false,
            }]],
            split: (0, 0),
            walk: vec![(0, 0)],
        };
    }
    let boundaries = oracle_boundaries(view);
    let d2 = crate::grid::rotate(d, 90, s).unwrap();

    // Double maxima per boundary, directly by projection.
    let mut winner: Vec<(GridCoord, u8)> = Vec::new();
    for b in &boundaries {
        let members: HashSet<GridCoord> = b.steps.iter().map(|&(c, _, _)| c).collect();
        let best_d = members.iter().map(|&c| proj(c, d)).max().unwrap();
        let tops: Vec<GridCoord> = members
            .iter()
            .copied()
            .filter(|&c| proj(c, d) == best_d)
            .collect();
        let best2 = tops.iter().map(|&c| proj(c, d2)).max().unwrap();
        let us: Vec<GridCoord> = tops.into_iter().filter(|&c| proj(c, d2) == best2).collect();
        assert_eq!(us.len(), 1, "second maximum is unique");
        let u = us[0];
        // Occurrence of u on this cycle; several only on the outer
        // boundary, resolved toward the run containing d_p.
        let occs: Vec<u8> = b
            .steps
            .iter()
            .filter(|&&(c, _, _)| c == u)
            .map(|&(_, o, _)| o)
            .collect();
        let occ = if occs.len() == 1 {
            occs[0]
        } else {
            let dp = d_p.main_index().unwrap() as u8;
            *occs
                .iter()
                .find(|&&o| {
                    b.steps
                        .iter()
                        .find(|&&(c, oo, _)| c == u && oo == o)
                        .map(|&(_, _, run)| run.contains(dp))
                        .unwrap_or(false)
                })
                .expect("one occurrence faces the path direction")
        };
        winner.push((u, occ));
    }

    // Starting-point facts asserted for inner boundaries, then path walks.
    let mut starter: HashMap<GridCoord, ()> = HashMap::new();
    let mut child_occ: HashMap<GridCoord, u8> = HashMap::new();
    let mut on_path: HashSet<GridCoord> = HashSet::new();
    let mut is_vb: HashSet<GridCoord> = HashSet::new();
    let mut split = (usize::MAX, u8::MAX);
    for (b, &(u, occ)) in boundaries.iter().zip(winner.iter()) {
        if b.outer {
            split = (view.index[&u], occ);
            continue;
        }
        // The starting point borders its region at exactly one node, and
        // that node lies opposite the path direction.
        let adj: Vec<Direction> = crate::grid::MAIN_DIRECTIONS
            .into_iter()
            .filter(|&dir| view.region_of(u.neighbor(dir).unwrap()) == Some(b.region))
            .collect();
        assert_eq!(adj.len(), 1, "starting point borders its region once");
        assert_eq!(adj[0], d_p.opposite(), "region node opposite the path");
        let mask = view.neighbor_mask(u);
        let runs = local_boundaries(mask);
        if runs.len() >= 2 {
            child_occ.insert(u, occ);
            continue;
        }
        starter.insert(u, ());
        // Walk the path.
        let mut x = u.neighbor(d_p).unwrap();
        loop {
            assert!(view.occupied(x), "path nodes are occupied");
            let m = view.neighbor_mask(x);
            if m.iter().any(|&b| !b) {
                is_vb.insert(x);
                break;
            }
            on_path.insert(x);
            x = x.neighbor(d_p).unwrap();
        }
    }

    // Local assembly with globally computed inputs.
    let mut visits = Vec::with_capacity(n);
    for &c in &view.coords {
        let mask = view.neighbor_mask(c);
        let occs: Vec<(u8, u8)> = if mask.iter().any(|&b| !b) {
            local_boundaries(mask)
                .into_iter()
                .filter(|r| r.len < 6)
                .map(|r| (r.arrival(), r.departure()))
                .collect()
        } else {
            Vec::new()
        };
        let input = AssemblyInput {
            occs,
            child_occ: child_occ.get(&c).copied(),
            whisker_up: starter.contains_key(&c),
            whisker_down: is_vb.contains(&c),
            pass_through: on_path.contains(&c),
        };
        visits.push(assemble_visits(&input, d_p, s));
    }

    // Split visit and walk extraction.
    let (sa, socc) = split;
    let runs = local_boundaries(view.neighbor_mask(view.coords[sa]));
    let run = runs[socc as usize];
    let (arr, dep) = (run.arrival(), run.departure());
    let (in_dir, in_plus) = if s == Sign::Plus {
        (arr, true)
    } else {
        (dep, false)
    };
    let split_idx = visits[sa]
        .iter()
        .position(|v| v.in_dir == in_dir && v.in_plus == in_plus)
        .expect("splitting visit exists");

    let mut walk = Vec::new();
    let (mut a, mut v) = (sa, split_idx);
    loop {
        walk.push((a, v));
        let visit = visits[a][v];
        let next_c = view.coords[a]
            .neighbor(Direction::main(visit.out_dir as usize))
            .unwrap();
        let next = view.index[&next_c];
        let want = ((visit.out_dir + 3) % 6, !visit.out_plus);
        let nv = visits[next]
            .iter()
            .position(|x| (x.in_dir, x.in_plus) == want)
            .expect("walk continues");
        if (next, nv) == (sa, split_idx) {
            break;
        }
        a = next;
        v = nv;
        assert!(walk.len() <= 6 * n + 4, "walk closes");
    }
    // Single cycle covering every visit.
    let total: usize = visits.iter().map(|v| v.len()).sum();
    assert_eq!(walk.len(), total, "skeleton is a single cycle");
    for &c in &view.coords {
        let i = view.index[&c];
        let boundary = view.neighbor_mask(c).iter().any(|&b| !b);
        if boundary {
            assert!(!visits[i].is_empty(), "boundary amoebots covered");
        }
    }
    // Bond visit counts.
    let mut uses: HashMap<(GridCoord, GridCoord), usize> = HashMap::new();
    for &(a, v) in &walk {
        let c = view.coords[a];
        let to = c
            .neighbor(Direction::main(visits[a][v].out_dir as usize))
            .unwrap();
        let key = if c < to { (c, to) } else { (to, c) };
        *uses.entry(key).or_default() += 1;
    }
    assert!(
        uses.values().all(|&u| u <= 2),
        "bonds visited at most twice"
    );

    OracleSkeleton {
        visits,
        split: (sa, split_idx),
        walk,
    }
}

/// First-occurrence tree edges of a path (the phase-one construction).
pub fn oracle_first_occurrence_edges(
    view: &OracleView,
    walk_coords: &[GridCoord],
) -> Vec<(u32, u32)> {
    let mut first: HashMap<GridCoord, usize> = HashMap::new();
    for (pos, &c) in walk_coords.iter().enumerate() {
        first.entry(c).or_insert(pos);
    }
    let mut edges = Vec::new();
    for (&c, &pos) in &first {
        if pos == 0 {
            continue;
        }
        let pred = walk_coords[pos - 1];
        let (a, b) = (view.index[&pred] as u32, view.index[&c] as u32);
        edges.push(if a < b { (a, b) } else { (b, a) });
    }
    edges.sort();
    edges
}

/// Spanning tree validity: n-1 edges, acyclic, connected.
pub fn oracle_spanning_check(n: usize, edges: &[(u32, u32)]) -> bool {
    if n == 0 || edges.len() != n - 1 {
        return n == 0 && edges.is_empty() || (n == 1 && edges.is_empty());
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    let r0 = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == r0)
}

/// Symmetry report: rotations about the centroid and reflections through
/// it, indexed by the twelve axis directions.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct SymmetryReport {
    pub rot2: bool,
    pub rot3: bool,
    pub rot6: bool,
    pub reflect: [bool; 12],
}

/// 60-degree counterclockwise rotation matrix in axial coordinates.
const ROT60: [[i64; 2]; 2] = [[0, -1], [1, 1]];
/// Reflection about the N axis through the origin.
const REFLECT_N: [[i64; 2]; 2] = [[-1, 0], [1, 1]];

fn mat_mul(a: [[i64; 2]; 2], b: [[i64; 2]; 2]) -> [[i64; 2]; 2] {
    let mut m = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

fn mat_pow(mut base: [[i64; 2]; 2], mut e: u32) -> [[i64; 2]; 2] {
    let mut m = [[1, 0], [0, 1]];
    while e > 0 {
        if e & 1 == 1 {
            m = mat_mul(m, base);
        }
        base = mat_mul(base, base);
        e >>= 1;
    }
    m
}

/// Whether the centroid-anchored map with matrix `m` fixes the set. The
/// translation t = c - m*c must be integral for the map to act on the
/// lattice at all.
fn map_fixes(view: &OracleView, m: [[i64; 2]; 2]) -> bool {
    let n = view.coords.len() as i64;
    let (sq, sr) = view
        .coords
        .iter()
        .fold((0i64, 0i64), |(q, r), c| (q + c.q as i64, r + c.r as i64));
    let tq_num = sq - (m[0][0] * sq + m[0][1] * sr);
    let tr_num = sr - (m[1][0] * sq + m[1][1] * sr);
    if tq_num % n != 0 || tr_num % n != 0 {
        return false;
    }
    let (tq, tr) = (tq_num / n, tr_num / n);
    view.coords.iter().all(|c| {
        let q = m[0][0] * c.q as i64 + m[0][1] * c.r as i64 + tq;
        let r = m[1][0] * c.q as i64 + m[1][1] * c.r as i64 + tr;
        if q < i32::MIN as i64 || q > i32::MAX as i64 {
            return false;
        }
        view.occupied(GridCoord::new(q as i32, r as i32))
    })
}

pub fn oracle_symmetry(view: &OracleView) -> SymmetryReport {
    let rot2 = map_fixes(view, mat_pow(ROT60, 3));
    let rot3 = map_fixes(view, mat_pow(ROT60, 2));
    let rot6 = map_fixes(view, ROT60);
    let mut reflect = [false; 12];
    for j in 0..6 {
        let m = mat_mul(mat_pow(ROT60, j), REFLECT_N);
        // Conjugating the N reflection by rotations turns the axis by 30
        // degrees per step, so matrix j serves ring direction j and its
        // opposite.
        let fixed = map_fixes(view, m);
        reflect[j as usize] = fixed;
        reflect[j as usize + 6] = fixed;
    }
    debug_assert!(!rot6 || (rot2 && rot3));
    SymmetryReport {
        rot2,
        rot3,
        rot6,
        reflect,
    }
}
