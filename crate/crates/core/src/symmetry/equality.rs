//! Distributed string equality on two chains: length comparison and the
//! deterministic short-chain path.
//!
//! The chains hold one 3-bit code per position. The lengths are compared by
//! running PASC on both chains in alternation inside a fixed ten-round slot
//! and matching the tail identifiers bit by bit on the global circuit; a
//! chain that has terminated keeps streaming its sign bit, so unequal
//! lengths always surface as a bit mismatch. Short chains (below the η = 44
//! gate) compare deterministically by walking markers down both chains in
//! lockstep while the A marker streams its code and the B marker checks it.
//!
//! Every program here rebuilds its pin configuration each round; reads
//! always use the set ids recorded in the previous round.

use crate::engine::{Action, Ctx, PinConfig, Program};
use crate::pasc::{park_unused, SeatVec, MAX_SEATS};

pub const ETA: usize = 44;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Equal,
    Unequal,
}

pub(crate) fn wire_global(cfg: &mut PinConfig, ctx: &Ctx<'_>) -> u8 {
    let g = cfg.add_set();
    for d in 0..6 {
        if ctx.neighbors[d] {
            for slot in 0..ctx.k {
                cfg.assign(d, slot, g);
            }
        }
    }
    g
}

pub(crate) fn wire_chain_sides(
    sv: &SeatVec,
    pred: &mut [u8; MAX_SEATS],
    succ: &mut [u8; MAX_SEATS],
    cfg: &mut PinConfig,
) {
    for s in 0..sv.len() {
        pred[s] = u8::MAX;
        succ[s] = u8::MAX;
        if let Some(l) = sv.seats[s].pred {
            let set = cfg.add_set();
            pred[s] = set;
            cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
            cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
        }
        if let Some(l) = sv.seats[s].succ {
            let set = cfg.add_set();
            succ[s] = set;
            cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
            cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
        }
    }
}

/// Per-chain PASC state for the interleaved run.
pub(crate) struct PascHalf {
    pub sv: SeatVec,
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    pub pri: [u8; MAX_SEATS],
    pub sec: [u8; MAX_SEATS],
    pub tail_bit: bool,
    pub alive: bool,
}

impl PascHalf {
    pub fn new(sv: SeatVec) -> Self {
        let single = sv.is_empty()
            || (sv.len() == 1 && sv.seats[0].pred.is_none() && sv.seats[0].succ.is_none());
        PascHalf {
            sv,
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            tail_bit: false,
            alive: !single,
        }
    }

    fn apply_passivation(&mut self) {
        for s in 0..self.sv.len() {
            if self.will_passivate[s] {
                self.active[s] = false;
                self.will_passivate[s] = false;
            }
        }
    }

    pub fn wire(&mut self, cfg: &mut PinConfig) {
        for s in 0..self.sv.len() {
            let seat = self.sv.seats[s];
            let p = cfg.add_set();
            let q = cfg.add_set();
            self.pri[s] = p;
            self.sec[s] = q;
            if let Some(l) = seat.succ {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
            }
            if let Some(l) = seat.pred {
                if self.active[s] {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, q);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, p);
                } else {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
                }
            }
        }
    }

    pub fn ref_beeps(&self, beeps: &mut Vec<u8>) {
        for s in 0..self.sv.len() {
            if self.sv.seats[s].is_ref {
                beeps.push(self.pri[s]);
            }
        }
    }

    pub fn read(&mut self, ctx: &Ctx<'_>, beeps: &mut Vec<u8>) {
        for s in 0..self.sv.len() {
            let on_sec = ctx.heard(self.sec[s]);
            if self.sv.seats[s].succ.is_none() {
                self.tail_bit = on_sec;
            }
            if self.active[s] && on_sec {
                self.will_passivate[s] = true;
                beeps.push(self.sec[s]);
            }
        }
    }

    pub fn note_echo(&mut self, ctx: &Ctx<'_>) {
        if self.sv.is_empty() || !self.alive {
            return;
        }
        let heard = (0..self.sv.len()).any(|s| ctx.heard(self.pri[s]) || ctx.heard(self.sec[s]));
        if !heard {
            self.alive = false;
        }
    }
}

/// Interleaved PASC on both chains; tails compare identifier bits on the
/// global circuit, with terminated chains sign-extending.
pub struct LengthCompare {
    a: PascHalf,
    b: PascHalf,
    slot: u8,
    pub iterations: u32,
    pub mismatch: bool,
    a_running: bool,
    b_running: bool,
    global: u8,
    complete: bool,
}

impl LengthCompare {
    pub fn new(a: SeatVec, b: SeatVec) -> Self {
        LengthCompare {
            a: PascHalf::new(a),
            b: PascHalf::new(b),
            slot: 0,
            iterations: 0,
            mismatch: false,
            a_running: true,
            b_running: true,
            global: u8::MAX,
            complete: false,
        }
    }
}

impl Program for LengthCompare {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let r = self.slot;
        self.slot = (r + 1) % 10;
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        match r {
            0 => {
                if self.iterations > 0 {
                    self.b_running = self.global != u8::MAX && ctx.heard(self.global);
                    if self.mismatch || (!self.a_running && !self.b_running) {
                        self.complete = true;
                        return Action::keep();
                    }
                }
                self.iterations += 1;
                self.a.apply_passivation();
                self.a.wire(&mut cfg);
            }
            1 => {
                self.a.wire(&mut cfg);
                self.a.ref_beeps(&mut beeps);
            }
            2 => {
                self.a.read(ctx, &mut beeps);
                self.a.wire(&mut cfg);
            }
            3 => {
                self.a.note_echo(ctx);
                self.b.apply_passivation();
                self.b.wire(&mut cfg);
            }
            4 => {
                self.b.wire(&mut cfg);
                self.b.ref_beeps(&mut beeps);
            }
            5 => {
                self.b.read(ctx, &mut beeps);
                self.b.wire(&mut cfg);
            }
            6 => {
                self.b.note_echo(ctx);
                self.global = wire_global(&mut cfg, ctx);
                let is_a_tail = (0..self.a.sv.len()).any(|s| self.a.sv.seats[s].succ.is_none());
                if is_a_tail && self.a.tail_bit {
                    beeps.push(self.global);
                }
            }
            7 => {
                let a_bit = ctx.heard(self.global);
                self.global = wire_global(&mut cfg, ctx);
                let is_b_tail = (0..self.b.sv.len()).any(|s| self.b.sv.seats[s].succ.is_none());
                if is_b_tail && a_bit != self.b.tail_bit {
                    beeps.push(self.global);
                }
            }
            8 => {
                if ctx.heard(self.global) {
                    self.mismatch = true;
                }
                self.global = wire_global(&mut cfg, ctx);
                if self.a.alive {
                    beeps.push(self.global);
                }
            }
            _ => {
                self.a_running = ctx.heard(self.global);
                self.global = wire_global(&mut cfg, ctx);
                if self.b.alive {
                    beeps.push(self.global);
                }
            }
        }
        let junk = cfg.add_set();
        park_unused(&mut cfg, junk, ctx);
        let mut a = Action::configure(cfg);
        for b in beeps {
            a = a.beep(b);
        }
        a
    }

    fn done(&self) -> bool {
        self.complete
    }

    fn tag(&self) -> char {
        'L'
    }
}

/// Marker walk down chain A alone, counting steps to the tail, capped.
pub struct TailProbe {
    sv: SeatVec,
    marker: [bool; MAX_SEATS],
    pred: [u8; MAX_SEATS],
    succ: [u8; MAX_SEATS],
    round: u8,
    pub steps: u32,
    cap: u32,
    reached: bool,
    pub reached_tail: bool,
    global: u8,
    complete: bool,
}

impl TailProbe {
    pub fn new(sv: SeatVec, cap: u32) -> Self {
        let mut marker = [false; MAX_SEATS];
        for s in 0..sv.len() {
            marker[s] = sv.seats[s].is_ref;
        }
        TailProbe {
            sv,
            marker,
            pred: [u8::MAX; MAX_SEATS],
            succ: [u8::MAX; MAX_SEATS],
            round: 0,
            steps: 0,
            cap,
            reached: false,
            reached_tail: false,
            global: u8::MAX,
            complete: false,
        }
    }
}

impl Program for TailProbe {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let r = self.round;
        self.round = (r + 1) % 5;
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        match r {
            0 => {
                wire_chain_sides(&self.sv, &mut self.pred, &mut self.succ, &mut cfg);
            }
            1 => {
                wire_chain_sides(&self.sv, &mut self.pred, &mut self.succ, &mut cfg);
                for s in 0..self.sv.len() {
                    if self.marker[s] {
                        if self.succ[s] != u8::MAX {
                            beeps.push(self.succ[s]);
                        } else {
                            self.reached = true;
                        }
                    }
                }
            }
            2 => {
                for s in 0..self.sv.len() {
                    self.marker[s] = self.pred[s] != u8::MAX && ctx.heard(self.pred[s]);
                }
                self.global = wire_global(&mut cfg, ctx);
            }
            3 => {
                if self.reached {
                    beeps.push(self.global);
                }
                return action_with(beeps);
            }
            _ => {
                self.steps += 1;
                if ctx.heard(self.global) {
                    self.reached_tail = true;
                    self.complete = true;
                } else if self.steps >= self.cap {
                    self.complete = true;
                }
                return Action::keep();
            }
        }
        let junk = cfg.add_set();
        park_unused(&mut cfg, junk, ctx);
        let mut a = Action::configure(cfg);
        for b in beeps {
            a = a.beep(b);
        }
        a
    }

    fn done(&self) -> bool {
        self.complete
    }

    fn tag(&self) -> char {
        'p'
    }
}

/// Lockstep walk of both chains streaming A's codes to B for comparison.
/// Used for short chains and for block-tail remainders; `skip_cells_below`
/// lets the remainder walk start comparisons at the incomplete block.
pub struct StreamCompare {
    a: SeatVec,
    b: SeatVec,
    a_codes: [u8; MAX_SEATS],
    b_codes: [u8; MAX_SEATS],
    a_marker: [bool; MAX_SEATS],
    b_marker: [bool; MAX_SEATS],
    a_pred: [u8; MAX_SEATS],
    a_succ: [u8; MAX_SEATS],
    b_pred: [u8; MAX_SEATS],
    b_succ: [u8; MAX_SEATS],
    active_from: u32,
    position: u32,
    streamed: u8,
    round: u8,
    ending: bool,
    pub mismatch: bool,
    global: u8,
    complete: bool,
}

impl StreamCompare {
    pub fn new(
        a: SeatVec,
        b: SeatVec,
        a_codes: [u8; MAX_SEATS],
        b_codes: [u8; MAX_SEATS],
        active_from: u32,
    ) -> Self {
        let mut a_marker = [false; MAX_SEATS];
        let mut b_marker = [false; MAX_SEATS];
        for s in 0..a.len() {
            a_marker[s] = a.seats[s].is_ref;
        }
        for s in 0..b.len() {
            b_marker[s] = b.seats[s].is_ref;
        }
        StreamCompare {
            a,
            b,
            a_codes,
            b_codes,
            a_marker,
            b_marker,
            a_pred: [u8::MAX; MAX_SEATS],
            a_succ: [u8::MAX; MAX_SEATS],
            b_pred: [u8::MAX; MAX_SEATS],
            b_succ: [u8::MAX; MAX_SEATS],
            active_from,
            position: 0,
            streamed: 0,
            round: 0,
            ending: false,
            mismatch: false,
            global: u8::MAX,
            complete: false,
        }
    }
}

impl Program for StreamCompare {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let r = self.round;
        self.round = (r + 1) % 12;
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        let live = self.position >= self.active_from;
        match r {
            0 => {
                self.global = wire_global(&mut cfg, ctx);
                self.streamed = 0;
            }
            1..=3 => {
                let j = r - 1;
                if r > 1 && ctx.heard(self.global) {
                    self.streamed |= 1 << (r - 2);
                }
                self.global = wire_global(&mut cfg, ctx);
                if live {
                    for s in 0..self.a.len() {
                        if self.a_marker[s] && self.a_codes[s] >> j & 1 == 1 {
                            beeps.push(self.global);
                        }
                    }
                }
            }
            4 => {
                if ctx.heard(self.global) {
                    self.streamed |= 1 << 2;
                }
                self.global = wire_global(&mut cfg, ctx);
                if live {
                    for s in 0..self.b.len() {
                        if self.b_marker[s] && self.streamed != self.b_codes[s] {
                            beeps.push(self.global);
                        }
                    }
                }
            }
            5 => {
                if ctx.heard(self.global) {
                    self.mismatch = true;
                }
                self.global = wire_global(&mut cfg, ctx);
                // A tail holder announces the walk's end.
                for s in 0..self.a.len() {
                    if self.a_marker[s] && self.a.seats[s].succ.is_none() {
                        beeps.push(self.global);
                    }
                }
            }
            6 => {
                if ctx.heard(self.global) {
                    self.ending = true;
                }
                wire_chain_sides(&self.a, &mut self.a_pred, &mut self.a_succ, &mut cfg);
            }
            7 => {
                wire_chain_sides(&self.a, &mut self.a_pred, &mut self.a_succ, &mut cfg);
                for s in 0..self.a.len() {
                    if self.a_marker[s] && self.a_succ[s] != u8::MAX {
                        beeps.push(self.a_succ[s]);
                    }
                }
            }
            8 => {
                for s in 0..self.a.len() {
                    self.a_marker[s] = self.a_pred[s] != u8::MAX && ctx.heard(self.a_pred[s]);
                }
                wire_chain_sides(&self.b, &mut self.b_pred, &mut self.b_succ, &mut cfg);
            }
            9 => {
                wire_chain_sides(&self.b, &mut self.b_pred, &mut self.b_succ, &mut cfg);
                for s in 0..self.b.len() {
                    if self.b_marker[s] && self.b_succ[s] != u8::MAX {
                        beeps.push(self.b_succ[s]);
                    }
                }
            }
            10 => {
                for s in 0..self.b.len() {
                    self.b_marker[s] = self.b_pred[s] != u8::MAX && ctx.heard(self.b_pred[s]);
                }
            }
            _ => {
                self.position += 1;
                if self.ending {
                    self.complete = true;
                }
                return Action::keep();
            }
        }
        let junk = cfg.add_set();
        park_unused(&mut cfg, junk, ctx);
        let mut a = Action::configure(cfg);
        for b in beeps {
            a = a.beep(b);
        }
        a
    }

    fn done(&self) -> bool {
        self.complete
    }

    fn tag(&self) -> char {
        'c'
    }
}

fn action_with(beeps: Vec<u8>) -> Action {
    let mut a = Action::keep();
    for b in beeps {
        a = a.beep(b);
    }
    a
}
