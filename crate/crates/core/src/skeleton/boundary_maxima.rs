//! Per-boundary double maxima, run on every boundary set in parallel.
//!
//! Each boundary needs the global maxima of its members with respect to
//! direction d, then the unique maximum of those with respect to the
//! 90-degree rotation: that occurrence is the path starting point (or, on
//! the outer boundary, the splitting point). The stripe-PASC substrate runs
//! along the boundary cycle with every occurrence handled separately, using
//! the two external links on the empty-region side of each traversed bond,
//! so boundaries never share a circuit and all of them work at once. Every
//! boundary keeps iteration counters on its own cycle and races bits over
//! its cycle circuit.
//!
//! Rounds are grouped into ten-round slots; the pin configuration is
//! rebuilt every work round from the current wiring role of each seat, so
//! seats of one amoebot may serve different boundaries in different stages.
//! Rounds 8 and 9 of every slot run the synchronization pattern on the
//! global circuit, and a silent global round moves the structure to the
//! next segment: first pass, re-election among its winners, second pass.

use rand::Rng;

use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;
use crate::grid::{proj, Direction, GridCoord, Sign};
use crate::pasc::{ceil_log2, park_unused, SeatLink};
use crate::primitives::{cycle_seats, ClassifiedBoundary};
use crate::spatial::StripeCore;

/// Static per-seat data: cycle links with banks plus role flags.
#[derive(Clone, Copy, Debug)]
pub struct BmSeatInit {
    pub pred: SeatLink,
    pub succ: SeatLink,
    pub is_leader: bool,
    /// True when the cycle successor is the leader (counter tail).
    pub succ_is_head: bool,
    /// True when this occurrence's empty run contains the path direction.
    pub run_contains_dp: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SeatStage {
    Init,
    Replay,
    RaceTail,
    Wait,
}

/// What a seat wires in the current round.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Wiring {
    None,
    Stripe,
    Carry { w: usize, dec: bool },
    Cycle,
}

struct BmSeat {
    init: BmSeatInit,
    stripe: StripeCore,
    pred_delta: i8,
    succ_delta: i8,
    cells: [u16; 2],
    listen: u8,
    head_out: u8,
    cyc: u8,
    stage: SeatStage,
    candidate: bool,
    survivor: bool,
    coin: bool,
    first_race: bool,
    first_slot: bool,
    pending_finish: bool,
    last_bit: bool,
    captured: bool,
}

const CELL_MAX: u16 = 255;

impl BmSeat {
    fn new(init: BmSeatInit, d: Direction) -> Self {
        let mut seat = BmSeat {
            init,
            stripe: StripeCore::new(d, init.is_leader),
            pred_delta: 0,
            succ_delta: 0,
            cells: [0; 2],
            listen: u8::MAX,
            head_out: u8::MAX,
            cyc: u8::MAX,
            stage: SeatStage::Init,
            candidate: true,
            survivor: true,
            coin: false,
            first_race: true,
            first_slot: true,
            pending_finish: false,
            last_bit: false,
            captured: false,
        };
        seat.set_direction(d);
        seat
    }

    fn set_direction(&mut self, d: Direction) {
        let is_ref = self.stripe.is_ref;
        self.stripe = StripeCore::new(d, is_ref);
        let delta_of = |dir: u8| {
            let (dq, dr) = Direction::main(dir as usize).offset().unwrap();
            proj(GridCoord::new(dq, dr), d) as i8
        };
        self.pred_delta = delta_of(self.init.pred.dir);
        self.succ_delta = delta_of(self.init.succ.dir);
    }

    /// The wiring this seat holds in work round `r` of its stage.
    fn wiring(&self, r: u8) -> Wiring {
        match self.stage {
            SeatStage::Wait => Wiring::None,
            SeatStage::Init => match r {
                0..=2 => Wiring::Stripe,
                _ => Wiring::Carry { w: 0, dec: false },
            },
            SeatStage::Replay => match r {
                0..=2 => Wiring::Stripe,
                3 => Wiring::Carry { w: 1, dec: false },
                _ => Wiring::Cycle,
            },
            SeatStage::RaceTail => match r {
                0..=1 => Wiring::Carry { w: 0, dec: true },
                _ => Wiring::Cycle,
            },
        }
    }

    fn wire(&mut self, cfg: &mut PinConfig, wiring: Wiring) {
        match wiring {
            Wiring::None => {}
            Wiring::Stripe => {
                let pri = cfg.add_set();
                let sec = cfg.add_set();
                self.stripe.pri = pri;
                self.stripe.sec = sec;
                for (link, delta) in [
                    (self.init.pred, self.pred_delta),
                    (self.init.succ, self.succ_delta),
                ] {
                    let cross = delta < 0 && self.stripe.crosses_interval(delta);
                    let (a, b) = if cross { (sec, pri) } else { (pri, sec) };
                    cfg.assign(link.dir as usize, 2 * link.bank as usize, a);
                    cfg.assign(link.dir as usize, 2 * link.bank as usize + 1, b);
                }
            }
            Wiring::Carry { w, dec } => {
                let wraps = if dec {
                    self.cells[w] == 0
                } else {
                    self.cells[w] == CELL_MAX
                };
                let set = cfg.add_set();
                self.listen = set;
                self.head_out = u8::MAX;
                if !self.init.is_leader {
                    cfg.assign(
                        self.init.pred.dir as usize,
                        2 * self.init.pred.bank as usize,
                        set,
                    );
                }
                if self.init.is_leader {
                    let out = cfg.add_set();
                    cfg.assign(
                        self.init.succ.dir as usize,
                        2 * self.init.succ.bank as usize,
                        out,
                    );
                    self.head_out = out;
                } else if !self.init.succ_is_head {
                    if wraps {
                        cfg.assign(
                            self.init.succ.dir as usize,
                            2 * self.init.succ.bank as usize,
                            set,
                        );
                    } else {
                        let parked = cfg.add_set();
                        cfg.assign(
                            self.init.succ.dir as usize,
                            2 * self.init.succ.bank as usize,
                            parked,
                        );
                    }
                }
            }
            Wiring::Cycle => {
                let set = cfg.add_set();
                self.cyc = set;
                for link in [self.init.pred, self.init.succ] {
                    cfg.assign(link.dir as usize, 2 * link.bank as usize, set);
                    cfg.assign(link.dir as usize, 2 * link.bank as usize + 1, set);
                }
            }
        }
    }

    fn head_wraps(&self, w: usize, dec: bool) -> bool {
        self.init.is_leader
            && if dec {
                self.cells[w] == 0
            } else {
                self.cells[w] == CELL_MAX
            }
    }

    fn apply_carry(&mut self, ctx: &Ctx<'_>, w: usize, dec: bool) {
        let hit = self.init.is_leader || (self.listen != u8::MAX && ctx.heard(self.listen));
        if !hit {
            return;
        }
        self.cells[w] = match (dec, self.cells[w]) {
            (false, CELL_MAX) => 0,
            (false, v) => v + 1,
            (true, 0) => CELL_MAX,
            (true, v) => v - 1,
        };
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Segment {
    FirstPass,
    Elect,
    SecondPass,
    Finished,
}

pub struct BoundaryMaxima {
    seats: Vec<BmSeat>,
    d2: Direction,
    segment: Segment,
    slot_round: u8,
    elect_phases: u32,
    elect_budget: u32,
}

impl BoundaryMaxima {
    pub fn new(
        seat_inits: Vec<BmSeatInit>,
        d: Direction,
        d2: Direction,
        elect_budget: u32,
    ) -> Self {
        BoundaryMaxima {
            seats: seat_inits.into_iter().map(|i| BmSeat::new(i, d)).collect(),
            d2,
            segment: Segment::FirstPass,
            slot_round: 0,
            elect_phases: 0,
            elect_budget,
        }
    }

    fn segment_unfinished(&self) -> bool {
        match self.segment {
            Segment::FirstPass | Segment::SecondPass => {
                self.seats.iter().any(|s| s.stage != SeatStage::Wait)
            }
            Segment::Elect => self.elect_phases <= self.elect_budget,
            Segment::Finished => false,
        }
    }

    fn enter_segment(&mut self, segment: Segment) {
        self.segment = segment;
        match segment {
            Segment::Elect => {
                for s in &mut self.seats {
                    s.candidate = s.survivor;
                    s.coin = false;
                }
                self.elect_phases = 0;
            }
            Segment::SecondPass => {
                let d2 = self.d2;
                for s in &mut self.seats {
                    s.stripe.is_ref = s.candidate;
                    s.set_direction(d2);
                    s.cells = [0; 2];
                    s.stage = SeatStage::Init;
                    s.first_race = true;
                    s.first_slot = true;
                    s.pending_finish = false;
                    s.captured = false;
                }
            }
            _ => {}
        }
    }
}

impl Program for BoundaryMaxima {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.segment == Segment::Finished {
            return Action::keep();
        }
        let r = self.slot_round;
        self.slot_round = (r + 1) % 10;

        if r == 8 {
            let unfinished = self.segment_unfinished();
            let cfg = PinConfig::all_in_one(ctx.neighbors, ctx.k);
            return Action::configure(cfg).beep_if(unfinished, 0);
        }
        if r == 9 {
            if !ctx.heard(0) {
                let next = match self.segment {
                    Segment::FirstPass => Segment::Elect,
                    Segment::Elect => Segment::SecondPass,
                    Segment::SecondPass | Segment::Finished => Segment::Finished,
                };
                self.enter_segment(next);
            }
            return Action::keep();
        }

        // Work round: read and update with the previous round's set ids,
        // rebuild the configuration, then beep with the fresh ids.
        let mut beeps: Vec<u8> = Vec::new();
        match self.segment {
            Segment::Finished => return Action::keep(),
            Segment::Elect => {
                for s in &mut self.seats {
                    // Resolve the previous round's coin (tossed r-1 >= 1).
                    if r >= 2 && s.candidate && !s.coin && s.cyc != u8::MAX && ctx.heard(s.cyc) {
                        s.candidate = false;
                    }
                }
                if r >= 2 {
                    self.elect_phases += 1;
                }
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for s in &mut self.seats {
                    s.wire(&mut cfg, Wiring::Cycle);
                }
                park_unused(&mut cfg, junk, ctx);
                let mut a = Action::configure(cfg);
                // Toss coins in rounds 1..=6; round 7 only resolves, so no
                // coin is pending across the synchronization rounds.
                if (1..=6).contains(&r) && self.elect_phases <= self.elect_budget {
                    for s in &mut self.seats {
                        if s.candidate {
                            s.coin = ctx.rng.random();
                            if s.coin {
                                a = a.beep(s.cyc);
                            }
                        }
                    }
                }
                return a;
            }
            Segment::FirstPass | Segment::SecondPass => {
                // Read phase.
                for s in &mut self.seats {
                    match s.stage {
                        SeatStage::Wait => {}
                        SeatStage::Init => match r {
                            0 => {
                                if !s.first_slot {
                                    s.apply_carry(ctx, 0, false);
                                    if s.pending_finish {
                                        s.pending_finish = false;
                                        s.stripe.reset();
                                        s.cells[1] = 0;
                                        s.stage = SeatStage::Replay;
                                    } else {
                                        s.stripe.apply_passivation();
                                    }
                                }
                                s.first_slot = false;
                            }
                            2 => {
                                s.stripe.read(ctx);
                            }
                            3 => {
                                if !ctx.heard(s.stripe.pri) && !ctx.heard(s.stripe.sec) {
                                    s.pending_finish = true;
                                }
                            }
                            _ => {}
                        },
                        SeatStage::Replay => match r {
                            2 => {
                                s.last_bit = s.stripe.read(ctx);
                            }
                            4 => {
                                s.apply_carry(ctx, 1, false);
                            }
                            6 => {
                                let unequal = s.cyc != u8::MAX && ctx.heard(s.cyc);
                                if unequal {
                                    s.stripe.apply_passivation();
                                } else {
                                    s.captured = true;
                                }
                            }
                            7 => {
                                if s.captured {
                                    let heard = s.cyc != u8::MAX && ctx.heard(s.cyc);
                                    if s.survivor && heard {
                                        let lose = if s.first_race {
                                            s.last_bit
                                        } else {
                                            !s.last_bit
                                        };
                                        if lose {
                                            s.survivor = false;
                                        }
                                    }
                                    s.first_race = false;
                                    s.captured = false;
                                    s.stage = SeatStage::RaceTail;
                                }
                            }
                            _ => {}
                        },
                        SeatStage::RaceTail => match r {
                            2 => {
                                s.apply_carry(ctx, 0, true);
                            }
                            4 => {
                                let nonzero = s.cyc != u8::MAX && ctx.heard(s.cyc);
                                if nonzero {
                                    s.stripe.reset();
                                    s.cells[1] = 0;
                                    s.stage = SeatStage::Replay;
                                } else {
                                    s.stage = SeatStage::Wait;
                                }
                            }
                            _ => {}
                        },
                    }
                }
                // Build phase.
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for s in &mut self.seats {
                    let wiring = s.wiring(r);
                    s.wire(&mut cfg, wiring);
                }
                park_unused(&mut cfg, junk, ctx);
                // Beep phase, on the fresh ids.
                for s in &mut self.seats {
                    match s.stage {
                        SeatStage::Wait => {}
                        SeatStage::Init => match r {
                            1 => {
                                if s.stripe.is_ref {
                                    beeps.push(s.stripe.pri);
                                }
                            }
                            2 => {
                                if s.stripe.echo_needed() {
                                    beeps.push(s.stripe.heard_set());
                                }
                            }
                            4 => {
                                if s.head_wraps(0, false) {
                                    beeps.push(s.head_out);
                                }
                            }
                            _ => {}
                        },
                        SeatStage::Replay => match r {
                            1 => {
                                if s.stripe.is_ref {
                                    beeps.push(s.stripe.pri);
                                }
                            }
                            3 => {
                                if s.head_wraps(1, false) {
                                    beeps.push(s.head_out);
                                }
                            }
                            5 => {
                                if s.cells[0] != s.cells[1] {
                                    beeps.push(s.cyc);
                                }
                            }
                            6 => {
                                if s.captured {
                                    let race = if s.first_race {
                                        s.survivor && !s.last_bit
                                    } else {
                                        s.survivor && s.last_bit
                                    };
                                    if race {
                                        beeps.push(s.cyc);
                                    }
                                }
                            }
                            _ => {}
                        },
                        SeatStage::RaceTail => match r {
                            1 => {
                                if s.head_wraps(0, true) {
                                    beeps.push(s.head_out);
                                }
                            }
                            3 => {
                                if s.cells[0] != 0 {
                                    beeps.push(s.cyc);
                                }
                            }
                            _ => {}
                        },
                    }
                }
                let mut a = Action::configure(cfg);
                for b in beeps {
                    a = a.beep(b);
                }
                a
            }
        }
    }

    fn done(&self) -> bool {
        self.segment == Segment::Finished
    }

    fn tag(&self) -> char {
        match self.segment {
            Segment::FirstPass => '1',
            Segment::Elect => 'e',
            Segment::SecondPass => '2',
            Segment::Finished => 'd',
        }
    }
}

/// Per-amoebot seat descriptors for every boundary at once, indexed by
/// local occurrence.
pub fn boundary_seat_inits(
    world: &AmoebotWorld,
    boundaries: &[ClassifiedBoundary],
    path_dir: Direction,
) -> Vec<Vec<BmSeatInit>> {
    let st = &world.st;
    let n = st.len();
    let mut per: Vec<Vec<Option<BmSeatInit>>> = (0..n)
        .map(|i| vec![None; cycle_seats(st, i).len()])
        .collect();
    for b in boundaries {
        let m = b.cycle.steps.len();
        for (pos, step) in b.cycle.steps.iter().enumerate() {
            let a = step.amoebot as usize;
            let occ = step.occ as usize;
            let (run, cs) = cycle_seats(st, a)[occ];
            per[a][occ] = Some(BmSeatInit {
                pred: SeatLink {
                    dir: cs.arrival,
                    bank: cs.pred_bank,
                },
                succ: SeatLink {
                    dir: cs.departure,
                    bank: cs.succ_bank,
                },
                is_leader: pos == b.leader_step,
                succ_is_head: (pos + 1) % m == b.leader_step,
                run_contains_dp: run.contains(path_dir.main_index().unwrap() as u8),
            });
        }
    }
    per.into_iter()
        .map(|v| {
            v.into_iter()
                .map(|o| o.expect("every occurrence belongs to a classified boundary"))
                .collect()
        })
        .collect()
}

/// Run the double maxima on every boundary; returns, per boundary, the
/// winning step index into its cycle listing. Ties between several winning
/// occurrences of one amoebot (outer boundary only) prefer the occurrence
/// whose empty run contains the path direction.
pub fn boundary_double_maxima(
    world: &mut AmoebotWorld,
    boundaries: &[ClassifiedBoundary],
    d: Direction,
    s: Sign,
    path_dir: Direction,
    elect_budget: u32,
) -> Result<Vec<usize>, AlgoError> {
    let d2 = crate::grid::rotate(d, 90, s).unwrap();
    let inits = boundary_seat_inits(world, boundaries, path_dir);
    let programs: Vec<BoundaryMaxima> = inits
        .into_iter()
        .map(|si| BoundaryMaxima::new(si, d, d2, elect_budget))
        .collect();
    let longest = boundaries.iter().map(|b| b.cycle.len()).max().unwrap_or(1);
    let t = ceil_log2(3 * longest + 8) as u64 + 3;
    let budget = 10 * (2 * (t + 2) * (t + 2) + 2 * (elect_budget as u64 / 6 + 2) + 24);
    let mut phase = world.phase(programs, 0x51);
    phase.run_to_completion(budget)?;
    let programs = phase.finish();
    let mut winners = Vec::with_capacity(boundaries.len());
    for (bi, b) in boundaries.iter().enumerate() {
        let w: Vec<usize> = b
            .cycle
            .steps
            .iter()
            .enumerate()
            .filter(|(_, p)| programs[p.amoebot as usize].seats[p.occ as usize].survivor)
            .map(|(i, _)| i)
            .collect();
        let chosen: Vec<usize> = if w.len() > 1 {
            let amoebots: std::collections::HashSet<u32> =
                w.iter().map(|&i| b.cycle.steps[i].amoebot).collect();
            if amoebots.len() == 1 {
                w.iter()
                    .copied()
                    .filter(|&i| {
                        let p = b.cycle.steps[i];
                        programs[p.amoebot as usize].seats[p.occ as usize]
                            .init
                            .run_contains_dp
                    })
                    .collect()
            } else {
                w.clone()
            }
        } else {
            w.clone()
        };
        if chosen.len() != 1 {
            return Err(AlgoError::ElectionIncomplete {
                set: bi,
                survivors: chosen.len(),
            });
        }
        winners.push(chosen[0]);
    }
    Ok(winners)
}
