//! Distributed inner/outer classification of every boundary set, run on all
//! boundaries in parallel.
//!
//! Per boundary cycle: elect a leader occurrence on the cycle circuit, cut
//! the cycle into a chain behind the leader, then accumulate the turn
//! angles (in 60-degree units, mod 5) with the PASC fold. The outer
//! boundary sums to +360 degrees (residue 1), inner boundaries to -360
//! (residue 4). Boundaries of different sizes finish at different times;
//! a synchronization round after every fold slot keeps the structure in
//! lockstep until the last boundary is done.

use super::boundary::{local_boundaries, trace_boundary_cycles, BoundaryCycle, LocalBoundary};
use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program, Structure};
use crate::error::AlgoError;
use crate::grid::Direction;
use crate::pasc::{park_unused, pasc_config, Seat, SeatLink, SeatVec, MAX_SEATS};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryKind {
    Outer,
    Inner,
}

/// Bank of the directed bond use leaving `amoebot` in direction `travel`,
/// by the empty wedge the use runs along: a bond with one empty wedge has a
/// single use on bank 0; with two empty wedges the two uses take distinct
/// banks chosen from the travel direction.
pub fn use_bank(st: &Structure, amoebot: usize, travel: Direction) -> u8 {
    let c = st.coord(amoebot);
    let left = st.index_of(c.neighbor(travel.rot60(1)).unwrap()).is_none();
    let right = st.index_of(c.neighbor(travel.rot60(-1)).unwrap()).is_none();
    if left && right {
        super::boundary::boundary_bank(travel)
    } else {
        0
    }
}

/// Per-occurrence cycle links with pin banks, all locally computable.
#[derive(Clone, Copy, Debug, Default)]
pub struct CycleSeat {
    pub arrival: u8,
    pub departure: u8,
    pub pred_bank: u8,
    pub succ_bank: u8,
    pub turn: i8,
}

/// The cycle seats of one amoebot, in local-boundary order.
pub fn cycle_seats(st: &Structure, amoebot: usize) -> Vec<(LocalBoundary, CycleSeat)> {
    if !st.is_boundary(amoebot) {
        return Vec::new();
    }
    local_boundaries(st.neighbor_mask(amoebot))
        .into_iter()
        .filter(|r| r.len < 6)
        .map(|run| {
            let arrival = run.arrival();
            let departure = run.departure();
            let travel_out = Direction::main(departure as usize);
            let travel_in = Direction::main(arrival as usize).opposite();
            let succ_bank = use_bank(st, amoebot, travel_out);
            // The predecessor computed the bank at its end; the wedge rule
            // gives the same answer here.
            let pred = st.neighbor_index(amoebot, arrival as usize).unwrap();
            let pred_bank = use_bank(st, pred, travel_in);
            (
                run,
                CycleSeat {
                    arrival,
                    departure,
                    pred_bank,
                    succ_bank,
                    turn: run.turn(),
                },
            )
        })
        .collect()
}

fn max_bank(seats: &[Vec<(LocalBoundary, CycleSeat)>]) -> u8 {
    seats
        .iter()
        .flatten()
        .map(|(_, s)| s.pred_bank.max(s.succ_bank))
        .max()
        .unwrap_or(0)
}

/// Election over every boundary cycle at once: candidates are occurrences,
/// the circuits are the per-cycle boundary circuits (disjoint by bank
/// construction), so one leader emerges per cycle.
struct CycleElection {
    seats: Vec<CycleSeat>,
    set_of: [u8; MAX_SEATS],
    pub candidate: [bool; MAX_SEATS],
    coin: [bool; MAX_SEATS],
    budget: u32,
    round: u32,
}

impl CycleElection {
    fn new(seats: Vec<CycleSeat>, budget: u32) -> Self {
        let mut candidate = [false; MAX_SEATS];
        for s in 0..seats.len() {
            candidate[s] = true;
        }
        CycleElection {
            seats,
            set_of: [0; MAX_SEATS],
            candidate,
            coin: [false; MAX_SEATS],
            budget,
            round: 0,
        }
    }

    fn cycle_config(&mut self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        for (s, seat) in self.seats.iter().enumerate() {
            let set = cfg.add_set();
            self.set_of[s] = set;
            cfg.assign(seat.arrival as usize, 2 * seat.pred_bank as usize, set);
            cfg.assign(seat.arrival as usize, 2 * seat.pred_bank as usize + 1, set);
            cfg.assign(seat.departure as usize, 2 * seat.succ_bank as usize, set);
            cfg.assign(
                seat.departure as usize,
                2 * seat.succ_bank as usize + 1,
                set,
            );
        }
        park_unused(&mut cfg, junk, ctx);
        cfg
    }
}

impl Program for CycleElection {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.round >= self.budget + 1 {
            return Action::keep();
        }
        let mut a = if self.round == 0 {
            let cfg = self.cycle_config(ctx);
            Action::configure(cfg)
        } else {
            for s in 0..self.seats.len() {
                if self.candidate[s] && !self.coin[s] && ctx.heard(self.set_of[s]) {
                    self.candidate[s] = false;
                }
            }
            Action::keep()
        };
        self.round += 1;
        if self.round <= self.budget {
            for s in 0..self.seats.len() {
                if self.candidate[s] {
                    self.coin[s] = ctx.coin();
                    if self.coin[s] {
                        a = a.beep(self.set_of[s]);
                    }
                }
            }
        }
        a
    }

    fn done(&self) -> bool {
        self.round >= self.budget + 1
    }

    fn tag(&self) -> char {
        'e'
    }
}

/// One-shot notification from each leader occurrence to its cycle
/// predecessor, which becomes the tail of the cut chain.
struct TailNotify {
    seats: Vec<CycleSeat>,
    leader: [bool; MAX_SEATS],
    pub is_tail: [bool; MAX_SEATS],
    pred_set: [u8; MAX_SEATS],
    succ_set: [u8; MAX_SEATS],
    round: u32,
}

impl Program for TailNotify {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        self.round += 1;
        match self.round {
            1 => {
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for (s, seat) in self.seats.iter().enumerate() {
                    let p = cfg.add_set();
                    let q = cfg.add_set();
                    self.pred_set[s] = p;
                    self.succ_set[s] = q;
                    cfg.assign(seat.arrival as usize, 2 * seat.pred_bank as usize, p);
                    cfg.assign(seat.arrival as usize, 2 * seat.pred_bank as usize + 1, p);
                    cfg.assign(seat.departure as usize, 2 * seat.succ_bank as usize, q);
                    cfg.assign(seat.departure as usize, 2 * seat.succ_bank as usize + 1, q);
                }
                park_unused(&mut cfg, junk, ctx);
                Action::configure(cfg)
            }
            2 => {
                let mut a = Action::keep();
                for s in 0..self.seats.len() {
                    if self.leader[s] {
                        a = a.beep(self.pred_set[s]);
                    }
                }
                a
            }
            _ => {
                if self.round == 3 {
                    for s in 0..self.seats.len() {
                        if ctx.heard(self.succ_set[s]) {
                            self.is_tail[s] = true;
                        }
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

/// Slot-synchronized parallel fold: every boundary chain runs one PASC
/// iteration plus residue handoff per slot, then all amoebots meet on the
/// global circuit; unfinished chains beep there. When a global round stays
/// silent every chain has folded its total into its head, and all heads
/// broadcast over their cycle circuits together.
struct ParallelTurnSum {
    sv: SeatVec,
    modulus: u16,
    bits: u8,
    acc: [u16; MAX_SEATS],
    incoming: [u16; MAX_SEATS],
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    chain_finished: [bool; MAX_SEATS],
    heard_sec: [bool; MAX_SEATS],
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    t_pred: [u8; MAX_SEATS],
    t_succ: [u8; MAX_SEATS],
    cyc: [u8; MAX_SEATS],
    slot_round: u8,
    broadcasting: bool,
    complete: bool,
    pub result: [Option<u16>; MAX_SEATS],
}

impl ParallelTurnSum {
    fn new(sv: SeatVec, values: [u16; MAX_SEATS], modulus: u16) -> Self {
        let bits = crate::pasc::ceil_log2(modulus.max(2) as usize) as u8;
        let mut acc = [0u16; MAX_SEATS];
        for s in 0..sv.len() {
            acc[s] = values[s] % modulus;
        }
        ParallelTurnSum {
            sv,
            modulus,
            bits,
            acc,
            incoming: [0; MAX_SEATS],
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            chain_finished: [false; MAX_SEATS],
            heard_sec: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            t_pred: [u8::MAX; MAX_SEATS],
            t_succ: [u8::MAX; MAX_SEATS],
            cyc: [0; MAX_SEATS],
            slot_round: 0,
            broadcasting: false,
            complete: false,
            result: [None; MAX_SEATS],
        }
    }

    /// Cycle-wide broadcast sets (uncut cycle) per seat.
    fn cycle_config(&mut self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        for s in 0..self.sv.len() {
            let set = cfg.add_set();
            self.cyc[s] = set;
            for l in [self.sv.seats[s].pred, self.sv.seats[s].succ]
                .into_iter()
                .flatten()
            {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
        park_unused(&mut cfg, junk, ctx);
        cfg
    }
}

impl Program for ParallelTurnSum {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let b = self.bits;
        if self.broadcasting {
            // Fixed broadcast schedule: config, then bits+1 beep/read rounds.
            let r = self.slot_round;
            self.slot_round += 1;
            if r == 0 {
                let cfg = self.cycle_config(ctx);
                return Action::configure(cfg);
            }
            let j = r - 1;
            let mut a = Action::keep();
            for s in 0..self.sv.len() {
                if j > 0 && ctx.heard(self.cyc[s]) {
                    self.incoming[s] |= 1 << (j - 1);
                }
                if j < b && self.sv.seats[s].is_ref && self.acc[s] >> j & 1 == 1 {
                    a = a.beep(self.cyc[s]);
                }
            }
            if j == b {
                for s in 0..self.sv.len() {
                    self.result[s] = Some(if self.sv.seats[s].is_ref {
                        self.acc[s]
                    } else {
                        self.incoming[s] % self.modulus
                    });
                }
                self.complete = true;
            }
            return a;
        }

        let r = self.slot_round;
        self.slot_round += 1;
        match r {
            // PASC reconfigure.
            0 => {
                for s in 0..self.sv.len() {
                    if self.will_passivate[s] {
                        self.active[s] = false;
                        self.will_passivate[s] = false;
                    }
                }
                let cfg = pasc_config(&self.sv, &self.active, ctx, &mut self.pri, &mut self.sec);
                Action::configure(cfg)
            }
            // Reference beep on unfinished chains.
            1 => {
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if self.sv.seats[s].is_ref && !self.chain_finished[s] {
                        a = a.beep(self.pri[s]);
                    }
                }
                a
            }
            // Read the side, echo on passivation.
            2 => {
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if self.chain_finished[s] {
                        continue;
                    }
                    let on_sec = ctx.heard(self.sec[s]);
                    self.heard_sec[s] = on_sec;
                    if self.active[s] && on_sec {
                        self.will_passivate[s] = true;
                        a = a.beep(self.sec[s]);
                    }
                }
                a
            }
            // Transfer configuration; silence here finishes the chain.
            3 => {
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for s in 0..self.sv.len() {
                    let seat = self.sv.seats[s];
                    if !self.chain_finished[s] && !ctx.heard(self.pri[s]) && !ctx.heard(self.sec[s])
                    {
                        self.chain_finished[s] = true;
                    }
                    let surviving = self.active[s] && !self.will_passivate[s];
                    let (pred_off, succ_off) = transfer_slots(self.active[s], self.heard_sec[s]);
                    self.t_pred[s] = u8::MAX;
                    self.t_succ[s] = u8::MAX;
                    let shared = if surviving && !self.chain_finished[s] {
                        None
                    } else {
                        Some(cfg.add_set())
                    };
                    if let Some(l) = seat.pred {
                        let set = shared.unwrap_or_else(|| cfg.add_set());
                        self.t_pred[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + pred_off, set);
                    }
                    if let Some(l) = seat.succ {
                        let set = match shared {
                            Some(set) => set,
                            None => cfg.add_set(),
                        };
                        self.t_succ[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + succ_off, set);
                    }
                    self.incoming[s] = 0;
                }
                park_unused(&mut cfg, junk, ctx);
                Action::configure(cfg)
            }
            // Sync round: unfinished chains beep on the global circuit.
            _ if r == 4 + b => {
                for s in 0..self.sv.len() {
                    let surviving = self.active[s] && !self.will_passivate[s];
                    if surviving
                        && !self.chain_finished[s]
                        && self.t_succ[s] != u8::MAX
                        && ctx.heard(self.t_succ[s])
                    {
                        self.incoming[s] |= 1 << (b - 1);
                    }
                    if surviving && !self.chain_finished[s] {
                        self.acc[s] = (self.acc[s] + self.incoming[s]) % self.modulus;
                    }
                }
                let unfinished = (0..self.sv.len()).any(|s| !self.chain_finished[s]);
                let cfg = PinConfig::all_in_one(ctx.neighbors, ctx.k);
                self.slot_round = 5 + b;
                Action::configure(cfg).beep_if(unfinished, 0)
            }
            // Sync verdict: silence everywhere moves everyone to broadcast.
            _ if r == 5 + b => {
                if ctx.heard(0) {
                    self.slot_round = 0;
                } else {
                    self.broadcasting = true;
                    self.slot_round = 0;
                }
                if self.sv.is_empty() && !ctx.heard(0) {
                    self.complete = true;
                }
                Action::keep()
            }
            // Transfer bit rounds: 4 <= r < 4 + bits.
            _ => {
                let j = r - 4;
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if self.chain_finished[s] {
                        continue;
                    }
                    if j > 0 {
                        let surviving = self.active[s] && !self.will_passivate[s];
                        if surviving && self.t_succ[s] != u8::MAX && ctx.heard(self.t_succ[s]) {
                            self.incoming[s] |= 1 << (j - 1);
                        }
                    }
                    if self.will_passivate[s] && self.t_pred[s] != u8::MAX {
                        if self.acc[s] >> j & 1 == 1 {
                            a = a.beep(self.t_pred[s]);
                        }
                    }
                }
                a
            }
        }
    }

    fn done(&self) -> bool {
        self.complete
    }

    fn tag(&self) -> char {
        if self.broadcasting {
            'B'
        } else {
            'f'
        }
    }
}

fn transfer_slots(was_active: bool, heard_sec: bool) -> (usize, usize) {
    let succ = usize::from(heard_sec);
    let pred = if was_active {
        usize::from(!heard_sec)
    } else {
        usize::from(heard_sec)
    };
    (pred, succ)
}

/// A boundary cycle together with its classification.
#[derive(Clone, Debug)]
pub struct ClassifiedBoundary {
    pub cycle: BoundaryCycle,
    pub kind: BoundaryKind,
    /// Turn-sum residue mod 5: 1 for outer, 4 for inner.
    pub residue: u16,
    /// Index into `cycle.steps` of the elected leader occurrence.
    pub leader_step: usize,
    pub rounds: u64,
}

/// Detect all boundary cycles and classify each as inner or outer, running
/// the classification on every boundary in parallel.
pub fn classify_boundaries(
    world: &mut AmoebotWorld,
    phase_budget: u32,
) -> Result<Vec<ClassifiedBoundary>, AlgoError> {
    let st = &world.st;
    let n = st.len();
    let cycles = trace_boundary_cycles(st);
    if n == 1 {
        // An isolated amoebot sees no neighbors and is the whole structure.
        return Ok(vec![ClassifiedBoundary {
            cycle: cycles.into_iter().next().unwrap(),
            kind: BoundaryKind::Outer,
            residue: 1,
            leader_step: 0,
            rounds: 0,
        }]);
    }
    let all_seats: Vec<Vec<(LocalBoundary, CycleSeat)>> =
        (0..n).map(|i| cycle_seats(st, i)).collect();
    let needed = 2 * (max_bank(&all_seats) as usize + 1);
    if st.k < needed {
        return Err(AlgoError::NotEnoughPins { needed, have: st.k });
    }

    // Stage 1: leader election on every cycle at once.
    let programs: Vec<CycleElection> = all_seats
        .iter()
        .map(|s| CycleElection::new(s.iter().map(|&(_, cs)| cs).collect(), phase_budget))
        .collect();
    let mut phase = world.phase(programs, 0x31);
    let budget = 2 * phase_budget as u64 + 8;
    phase.run_to_completion(budget)?;
    let elected = phase.finish();
    let mut rounds = world.round;

    let mut leader_step = vec![usize::MAX; cycles.len()];
    for (ci, cycle) in cycles.iter().enumerate() {
        let winners: Vec<usize> = cycle
            .steps
            .iter()
            .enumerate()
            .filter(|(_, p)| elected[p.amoebot as usize].candidate[p.occ as usize])
            .map(|(si, _)| si)
            .collect();
        if winners.len() != 1 {
            return Err(AlgoError::ElectionIncomplete {
                set: ci,
                survivors: winners.len(),
            });
        }
        leader_step[ci] = winners[0];
    }

    // Stage 2: leaders tell their predecessors they are the tail.
    let notify: Vec<TailNotify> = (0..n)
        .map(|i| {
            let seats: Vec<CycleSeat> = all_seats[i].iter().map(|&(_, cs)| cs).collect();
            let mut leader = [false; MAX_SEATS];
            for (s, _) in seats.iter().enumerate() {
                leader[s] = elected[i].candidate[s];
            }
            TailNotify {
                seats,
                leader,
                is_tail: [false; MAX_SEATS],
                pred_set: [0; MAX_SEATS],
                succ_set: [0; MAX_SEATS],
                round: 0,
            }
        })
        .collect();
    let mut phase = world.phase(notify, 0x32);
    phase.run_to_completion(8)?;
    let notified = phase.finish();

    // Stage 3: fold the turn residues mod 5 along every cut chain.
    let sums: Vec<ParallelTurnSum> = (0..n)
        .map(|i| {
            let mut sv = SeatVec::default();
            let mut values = [0u16; MAX_SEATS];
            for (s, &(run, cs)) in all_seats[i].iter().enumerate() {
                let is_head = elected[i].candidate[s];
                let is_tail = notified[i].is_tail[s];
                values[s] = run.turn().rem_euclid(5) as u16;
                sv.push(Seat {
                    pred: (!is_head).then_some(SeatLink {
                        dir: cs.arrival,
                        bank: cs.pred_bank,
                    }),
                    succ: (!is_tail).then_some(SeatLink {
                        dir: cs.departure,
                        bank: cs.succ_bank,
                    }),
                    is_ref: is_head,
                });
            }
            ParallelTurnSum::new(sv, values, 5)
        })
        .collect();
    let mut phase = world.phase(sums, 0x33);
    let longest = cycles.iter().map(|c| c.len()).max().unwrap_or(1) as u64;
    let slot = 9u64 + 3;
    phase
        .run_to_completion(slot * (crate::pasc::ceil_log2(longest as usize + 1) as u64 + 4) + 32)?;
    let summed = phase.finish();
    rounds = world.round - rounds;

    let mut out = Vec::new();
    for (ci, cycle) in cycles.into_iter().enumerate() {
        let step = cycle.steps[leader_step[ci]];
        let residue = summed[step.amoebot as usize].result[step.occ as usize]
            .expect("sum produced a residue");
        for p in &cycle.steps {
            let r = summed[p.amoebot as usize].result[p.occ as usize];
            debug_assert_eq!(r, Some(residue), "members agree on the residue");
        }
        assert!(
            residue == 1 || residue == 4,
            "turn residue must be 1 (outer) or 4 (inner), got {residue}"
        );
        out.push(ClassifiedBoundary {
            kind: if residue == 1 {
                BoundaryKind::Outer
            } else {
                BoundaryKind::Inner
            },
            cycle,
            residue,
            leader_step: leader_step[ci],
            rounds,
        });
    }
    Ok(out)
}
