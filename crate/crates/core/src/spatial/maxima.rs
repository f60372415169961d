//! The global maxima algorithm: MSB-first maximum consensus over spatial
//! identifiers, with the bit schedule driven by two distributed counters on
//! the outer boundary chain.
//!
//! The reference is elected inside R, so the maximum identifier is
//! non-negative and exact (the stripe run emits the extra sign bit). A full
//! stripe-PASC run counts its iterations into counter one. Then, per bit
//! from the most significant down: replay the stripe run from scratch while
//! counter two counts iterations; when the counters compare equal the bit
//! read in that iteration is the race bit. Transmitting amoebots that
//! observe a beep in a round they do not beep drop out; the sign bit races
//! inverted. Counter one decrements after each race and a zero test ends
//! the loop, leaving exactly the maxima transmitting.

use super::counter::{CounterBank, CounterSeat};
use super::stripes::StripeCore;
use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;
use crate::grid::{proj, Direction};
use crate::pasc::{ceil_log2, park_unused, SeatLink};
use crate::primitives::{classify_boundaries, cycle_seats, BoundaryKind, ClassifiedBoundary};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Stage {
    InitCount(u8),
    Replay(u8),
    Race(u8),
    Done,
}

pub struct MaximaProgram {
    stripe: StripeCore,
    counters: CounterBank,
    in_r: bool,
    pub survivor: bool,
    first_race: bool,
    first_slot: bool,
    last_bit: bool,
    pending_finish: bool,
    stage: Stage,
}

impl MaximaProgram {
    fn new(d: Direction, is_ref: bool, in_r: bool, counters: CounterBank) -> Self {
        MaximaProgram {
            stripe: StripeCore::new(d, is_ref),
            counters,
            in_r,
            survivor: in_r,
            first_race: false,
            first_slot: true,
            last_bit: false,
            pending_finish: false,
            stage: Stage::InitCount(0),
        }
    }

    fn stripe_config(&mut self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        self.stripe.wire(&mut cfg, ctx.neighbors);
        park_unused(&mut cfg, junk, ctx);
        cfg
    }

    fn carry_config(&mut self, ctx: &Ctx<'_>, w: usize, dec: bool) -> (PinConfig, Option<u8>) {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        let head = self.counters.wire_carry(&mut cfg, w, dec);
        park_unused(&mut cfg, junk, ctx);
        (cfg, head)
    }

    fn cycle_config(&mut self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        self.counters.wire_cycle(&mut cfg);
        park_unused(&mut cfg, junk, ctx);
        cfg
    }

    fn global_config(ctx: &Ctx<'_>) -> PinConfig {
        PinConfig::all_in_one(ctx.neighbors, ctx.k)
    }
}

impl Program for MaximaProgram {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        loop {
            match self.stage {
                Stage::Done => return Action::keep(),
                Stage::InitCount(r) => match r {
                    0 => {
                        if !self.first_slot {
                            self.counters.apply_carry(ctx, 0, false);
                            if self.pending_finish {
                                // Counter one now holds the total iteration
                                // count; move to the bit loop.
                                self.pending_finish = false;
                                self.stripe.reset();
                                self.counters.reset(1);
                                self.first_race = true;
                                self.stage = Stage::Replay(0);
                                continue;
                            }
                            self.stripe.apply_passivation();
                        }
                        self.first_slot = false;
                        self.stage = Stage::InitCount(1);
                        return Action::configure(self.stripe_config(ctx));
                    }
                    1 => {
                        self.stage = Stage::InitCount(2);
                        return Action::keep().beep_if(self.stripe.is_ref, self.stripe.pri);
                    }
                    2 => {
                        self.stripe.read(ctx);
                        self.stage = Stage::InitCount(3);
                        return Action::keep()
                            .beep_if(self.stripe.echo_needed(), self.stripe.heard_set());
                    }
                    3 => {
                        if !ctx.heard_any() {
                            self.pending_finish = true;
                        }
                        let (cfg, _) = self.carry_config(ctx, 0, false);
                        self.stage = Stage::InitCount(4);
                        return Action::configure(cfg);
                    }
                    _ => {
                        let mut a = Action::keep();
                        if self.counters.head_wraps(0, false) {
                            if let Some(set) = self.counters.head_set() {
                                a = a.beep(set);
                            }
                        }
                        self.stage = Stage::InitCount(0);
                        return a;
                    }
                },
                Stage::Replay(p) => match p {
                    0 => {
                        self.stage = Stage::Replay(1);
                        return Action::configure(self.stripe_config(ctx));
                    }
                    1 => {
                        self.stage = Stage::Replay(2);
                        return Action::keep().beep_if(self.stripe.is_ref, self.stripe.pri);
                    }
                    2 => {
                        self.last_bit = self.stripe.read(ctx);
                        let (cfg, _) = self.carry_config(ctx, 1, false);
                        self.stage = Stage::Replay(3);
                        return Action::configure(cfg);
                    }
                    3 => {
                        let mut a = Action::keep();
                        if self.counters.head_wraps(1, false) {
                            if let Some(set) = self.counters.head_set() {
                                a = a.beep(set);
                            }
                        }
                        self.stage = Stage::Replay(4);
                        return a;
                    }
                    4 => {
                        self.counters.apply_carry(ctx, 1, false);
                        self.stage = Stage::Replay(5);
                        return Action::configure(self.cycle_config(ctx));
                    }
                    5 => {
                        let mut a = Action::keep();
                        let beeps: Vec<u8> = self.counters.unequal_beeps().collect();
                        for set in beeps {
                            a = a.beep(set);
                        }
                        self.stage = Stage::Replay(6);
                        return a;
                    }
                    6 => {
                        let equal = !self.counters.is_empty() && !self.counters.heard_cycle(ctx);
                        self.stage = Stage::Replay(7);
                        return Action::configure(Self::global_config(ctx)).beep_if(equal, 0);
                    }
                    _ => {
                        if ctx.heard(0) {
                            self.stage = Stage::Race(0);
                        } else {
                            self.stripe.apply_passivation();
                            self.stage = Stage::Replay(0);
                        }
                        return Action::keep();
                    }
                },
                Stage::Race(q) => match q {
                    0 => {
                        let beep = if self.first_race {
                            self.survivor && !self.last_bit
                        } else {
                            self.survivor && self.last_bit
                        };
                        self.stage = Stage::Race(1);
                        return Action::keep().beep_if(beep, 0);
                    }
                    1 => {
                        if self.survivor && ctx.heard(0) {
                            let lose = if self.first_race {
                                self.last_bit
                            } else {
                                !self.last_bit
                            };
                            if lose {
                                self.survivor = false;
                            }
                        }
                        self.first_race = false;
                        let (cfg, _) = self.carry_config(ctx, 0, true);
                        self.stage = Stage::Race(2);
                        return Action::configure(cfg);
                    }
                    2 => {
                        let mut a = Action::keep();
                        if self.counters.head_wraps(0, true) {
                            if let Some(set) = self.counters.head_set() {
                                a = a.beep(set);
                            }
                        }
                        self.stage = Stage::Race(3);
                        return a;
                    }
                    3 => {
                        self.counters.apply_carry(ctx, 0, true);
                        self.stage = Stage::Race(4);
                        return Action::configure(self.cycle_config(ctx));
                    }
                    4 => {
                        let mut a = Action::keep();
                        let beeps: Vec<u8> = self.counters.nonzero_beeps(0).collect();
                        for set in beeps {
                            a = a.beep(set);
                        }
                        self.stage = Stage::Race(5);
                        return a;
                    }
                    5 => {
                        let nonzero = !self.counters.is_empty() && self.counters.heard_cycle(ctx);
                        self.stage = Stage::Race(6);
                        return Action::configure(Self::global_config(ctx)).beep_if(nonzero, 0);
                    }
                    _ => {
                        if ctx.heard(0) {
                            self.stripe.reset();
                            self.counters.reset(1);
                            self.stage = Stage::Replay(0);
                            continue;
                        }
                        self.stage = Stage::Done;
                        return Action::keep();
                    }
                },
            }
        }
    }

    fn done(&self) -> bool {
        self.stage == Stage::Done
    }

    fn tag(&self) -> char {
        match self.stage {
            Stage::InitCount(_) => 'i',
            Stage::Replay(_) => 'r',
            Stage::Race(_) => 'x',
            Stage::Done => 'd',
        }
    }
}

/// Counter seats along the outer boundary cycle, cut at its leader.
pub fn outer_counter_seats(
    world: &AmoebotWorld,
    outer: &ClassifiedBoundary,
) -> Vec<Vec<CounterSeat>> {
    let st = &world.st;
    let mut per: Vec<Vec<CounterSeat>> = vec![Vec::new(); st.len()];
    let steps = &outer.cycle.steps;
    let m = steps.len();
    if m <= 1 {
        if let Some(s) = steps.first() {
            per[s.amoebot as usize].push(CounterSeat {
                pred: None,
                succ: None,
                is_head: true,
                cells: [0; 2],
            });
        }
        return per;
    }
    // Seats must be pushed in occurrence order per amoebot so that seat
    // indices match occurrence indices.
    let mut ordered: Vec<(usize, usize, usize)> = steps
        .iter()
        .enumerate()
        .map(|(pos, s)| (s.amoebot as usize, s.occ as usize, pos))
        .collect();
    ordered.sort();
    for (a, occ, pos) in ordered {
        let seats = cycle_seats(st, a);
        let (_, cs) = seats[occ];
        let is_head = pos == outer.leader_step;
        let next_is_head = (pos + 1) % m == outer.leader_step;
        per[a].push(CounterSeat {
            pred: (!is_head).then_some(SeatLink {
                dir: cs.arrival,
                bank: cs.pred_bank,
            }),
            succ: (!next_is_head).then_some(SeatLink {
                dir: cs.departure,
                bank: cs.succ_bank,
            }),
            is_head,
            cells: [0; 2],
        });
    }
    per
}

/// Outcome of a maxima run.
#[derive(Clone, Debug)]
pub struct MaximaOutcome {
    pub maxima: Vec<bool>,
    pub reference: usize,
    pub rounds: u64,
}

/// Mark the global maxima of R with respect to direction d.
pub fn global_maxima(
    world: &mut AmoebotWorld,
    in_r: &[bool],
    d: Direction,
    phase_budget: u32,
) -> Result<MaximaOutcome, AlgoError> {
    let n = world.st.len();
    assert_eq!(in_r.len(), n);
    if !in_r.iter().any(|&b| b) {
        return Err(AlgoError::EmptySubset);
    }
    if n == 1 {
        return Ok(MaximaOutcome {
            maxima: vec![true],
            reference: 0,
            rounds: 0,
        });
    }
    let start_round = world.round;

    // The counter chain lives on the outer boundary.
    let boundaries = classify_boundaries(world, phase_budget)?;
    let outer = boundaries
        .iter()
        .find(|b| b.kind == BoundaryKind::Outer)
        .expect("finite structures have an outer boundary");

    // Reference election inside R over the global circuit.
    let election = crate::primitives::global_leader_election(world, in_r, phase_budget)?;
    let reference = election.leader.ok_or(AlgoError::ElectionIncomplete {
        set: 0,
        survivors: election.survivors,
    })?;

    let counter_seats = outer_counter_seats(world, outer);
    let programs: Vec<MaximaProgram> = (0..n)
        .map(|i| {
            MaximaProgram::new(
                d,
                i == reference,
                in_r[i],
                CounterBank::new(counter_seats[i].clone(), 8),
            )
        })
        .collect();
    let span = {
        let ps: Vec<i64> = (0..n).map(|i| proj(world.st.coord(i), d)).collect();
        (ps.iter().max().unwrap() - ps.iter().min().unwrap()) as u64 + 5
    };
    let t = ceil_log2(span as usize + 1) as u64 + 3;
    let budget = 5 * (t + 1) + t * (9 * (t + 1) + 8) + 64;
    let mut phase = world.phase(programs, 0x42);
    phase.run_to_completion(budget)?;
    let programs = phase.finish();
    let maxima = programs.iter().map(|p| p.survivor && p.in_r).collect();
    Ok(MaximaOutcome {
        maxima,
        reference,
        rounds: world.round - start_round,
    })
}

/// Number of amoebots of R strictly beyond `w` in direction `d` (the rank
/// function the maxima minimize), computed with global knowledge.
pub fn f_d_count(world: &AmoebotWorld, in_r: &[bool], w: usize, d: Direction) -> usize {
    let pw = proj(world.st.coord(w), d);
    (0..world.st.len())
        .filter(|&x| in_r[x] && proj(world.st.coord(x), d) > pw)
        .count()
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

    fn argmax_oracle(w: &AmoebotWorld, in_r: &[bool], d: Direction) -> Vec<bool> {
        let best = (0..w.st.len())
            .filter(|&i| in_r[i])
            .map(|i| proj(w.st.coord(i), d))
            .max()
            .unwrap();
        (0..w.st.len())
            .map(|i| in_r[i] && proj(w.st.coord(i), d) == best)
            .collect()
    }

    #[test]
    fn line3_maximum_east() {
        let mut w = world(&[(0, 0), (1, 0), (2, 0)], 4, 7);
        let in_r = vec![true; 3];
        let out = global_maxima(&mut w, &in_r, grid::E, 24).unwrap();
        assert_eq!(out.maxima, argmax_oracle(&w, &in_r, grid::E));
        let top = w.st.index_of(GridCoord::new(2, 0)).unwrap();
        assert!(out.maxima[top]);
        assert_eq!(out.maxima.iter().filter(|&&b| b).count(), 1);
    }

    #[test]
    fn hexagon_ring_maximum_north() {
        let mut w = world(&[(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)], 4, 7);
        let in_r = vec![true; 6];
        let out = global_maxima(&mut w, &in_r, grid::N, 24).unwrap();
        let top = w.st.index_of(GridCoord::new(0, 1)).unwrap();
        for (i, &m) in out.maxima.iter().enumerate() {
            assert_eq!(m, i == top);
        }
    }

    #[test]
    fn singleton_subset_is_its_own_maximum() {
        let mut w = world(&[(0, 0), (1, 0), (2, 0)], 4, 7);
        let mut in_r = vec![false; 3];
        let mid = w.st.index_of(GridCoord::new(1, 0)).unwrap();
        in_r[mid] = true;
        let out = global_maxima(&mut w, &in_r, grid::E, 24).unwrap();
        assert_eq!(out.maxima, in_r);
    }

    #[test]
    fn empty_subset_rejected() {
        let mut w = world(&[(0, 0), (1, 0)], 4, 7);
        assert!(matches!(
            global_maxima(&mut w, &[false, false], grid::E, 24),
            Err(AlgoError::EmptySubset)
        ));
    }

    #[test]
    fn blob_all_directions_match_oracle() {
        let blob = [
            (0, 0),
            (1, 0),
            (0, 1),
            (1, -1),
            (-1, 1),
            (2, -1),
            (-1, 0),
            (2, 0),
            (1, 1),
            (0, -1),
        ];
        for (di, d) in grid::ALL_DIRECTIONS.into_iter().enumerate() {
            let mut w = world(&blob, 4, 100 + di as u64);
            let in_r = vec![true; blob.len()];
            let out = global_maxima(&mut w, &in_r, d, 24).unwrap();
            assert_eq!(out.maxima, argmax_oracle(&w, &in_r, d), "d={d}");
        }
    }

    #[test]
    fn ties_keep_every_maximum() {
        // Two amoebots share the top stripe for N.
        let mut w = world(&[(0, 0), (1, 0), (0, 1), (2, -1)], 4, 3);
        let in_r = vec![true; 4];
        let out = global_maxima(&mut w, &in_r, grid::NNE, 24).unwrap();
        assert_eq!(out.maxima, argmax_oracle(&w, &in_r, grid::NNE));
        assert!(out.maxima.iter().filter(|&&b| b).count() >= 2);
    }
}
