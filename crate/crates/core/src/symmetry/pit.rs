//! Polynomial identity testing on the block decomposition: cell indexing,
//! exponent deposit, prime generation and the evaluation loop.
//!
//! The whole procedure compiles to one instruction list shared by every
//! amoebot. All loop bounds are global constants (l, k, t, c), and every
//! data-dependent branch tests a bit that was announced on the global
//! circuit, so all program counters advance in lockstep.

use std::sync::Arc;

use super::blockvm::{vm_beep, vm_read, vm_wire, CellSeat, Reg, VmOp};
use super::equality::{wire_global, Verdict};
use crate::engine::{Action, Ctx, PinConfig, Program};
use crate::pasc::{park_unused, MAX_SEATS};

/// Learns cell indices within blocks, block completeness, block-zero
/// membership and who tops each block. Block heads are pre-marked.
pub struct CellIndex {
    pub seats: Vec<CellSeat>,
    k: u32,
    round: u32,
    pred: [u8; MAX_SEATS],
    succ: [u8; MAX_SEATS],
    bw: [u8; MAX_SEATS],
    marker: [bool; MAX_SEATS],
    complete: bool,
}

impl CellIndex {
    pub fn new(seats: Vec<CellSeat>, k: u32) -> Self {
        let n = seats.len();
        let mut marker = [false; MAX_SEATS];
        for (i, s) in seats.iter().enumerate() {
            marker[i] = s.block_head;
        }
        let _ = n;
        CellIndex {
            seats,
            k,
            round: 0,
            pred: [u8::MAX; MAX_SEATS],
            succ: [u8::MAX; MAX_SEATS],
            bw: [u8::MAX; MAX_SEATS],
            marker,
            complete: false,
        }
    }

    fn sv_like(&self) -> Vec<(Option<crate::pasc::SeatLink>, Option<crate::pasc::SeatLink>)> {
        self.seats.iter().map(|s| (s.pred, s.succ)).collect()
    }

    fn wire_sides(&mut self, cfg: &mut PinConfig) {
        for (i, (pred, succ)) in self.sv_like().into_iter().enumerate() {
            self.pred[i] = u8::MAX;
            self.succ[i] = u8::MAX;
            if let Some(l) = pred {
                let set = cfg.add_set();
                self.pred[i] = set;
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
            if let Some(l) = succ {
                let set = cfg.add_set();
                self.succ[i] = set;
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
    }

    fn wire_blocks(&mut self, cfg: &mut PinConfig) {
        for i in 0..self.seats.len() {
            let s = &self.seats[i];
            let set = cfg.add_set();
            self.bw[i] = set;
            if !s.block_head {
                if let Some(l) = s.pred {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                }
            }
            if !s.succ_is_head {
                if let Some(l) = s.succ {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                }
            }
        }
    }
}

impl Program for CellIndex {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let r = self.round;
        self.round += 1;
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        // Stage 1 (3 rounds): heads tell predecessors they top a block.
        // Stage 2 (3(k-1) rounds): marker walk assigns cell indices.
        // Stage 3 (3 rounds): top cells announce completeness.
        // Stage 4 (3 rounds): the chain head marks block zero.
        let walk_end = 3 + 3 * (self.k - 1);
        if r < 3 {
            match r {
                0 => self.wire_sides(&mut cfg),
                1 => {
                    self.wire_sides(&mut cfg);
                    for i in 0..self.seats.len() {
                        if self.seats[i].block_head && self.pred[i] != u8::MAX {
                            beeps.push(self.pred[i]);
                        }
                    }
                }
                _ => {
                    for i in 0..self.seats.len() {
                        if self.succ[i] != u8::MAX && ctx.heard(self.succ[i]) {
                            self.seats[i].succ_is_head = true;
                        }
                    }
                    self.wire_sides(&mut cfg);
                }
            }
        } else if r < walk_end {
            let step = (r - 3) % 3;
            match step {
                0 => self.wire_sides(&mut cfg),
                1 => {
                    self.wire_sides(&mut cfg);
                    for i in 0..self.seats.len() {
                        if self.marker[i] && !self.seats[i].succ_is_head && self.succ[i] != u8::MAX
                        {
                            beeps.push(self.succ[i]);
                        }
                    }
                }
                _ => {
                    let pos = ((r - 3) / 3 + 1) as u8;
                    for i in 0..self.seats.len() {
                        let got = !self.seats[i].block_head
                            && self.pred[i] != u8::MAX
                            && ctx.heard(self.pred[i]);
                        self.marker[i] = got;
                        if got {
                            self.seats[i].cell = pos;
                        }
                    }
                    self.wire_sides(&mut cfg);
                }
            }
        } else if r < walk_end + 3 {
            match r - walk_end {
                0 => self.wire_blocks(&mut cfg),
                1 => {
                    self.wire_blocks(&mut cfg);
                    for i in 0..self.seats.len() {
                        if self.seats[i].cell as u32 == self.k - 1 {
                            beeps.push(self.bw[i]);
                        }
                    }
                }
                _ => {
                    for i in 0..self.seats.len() {
                        let top = self.seats[i].cell as u32 == self.k - 1;
                        self.seats[i].complete =
                            top || (self.bw[i] != u8::MAX && ctx.heard(self.bw[i]));
                    }
                    self.wire_blocks(&mut cfg);
                }
            }
        } else {
            match r - walk_end - 3 {
                0 => self.wire_blocks(&mut cfg),
                1 => {
                    self.wire_blocks(&mut cfg);
                    for i in 0..self.seats.len() {
                        if self.seats[i].is_chain_head {
                            beeps.push(self.bw[i]);
                        }
                    }
                }
                _ => {
                    for i in 0..self.seats.len() {
                        self.seats[i].in_block0 = self.seats[i].is_chain_head
                            || (self.bw[i] != u8::MAX && ctx.heard(self.bw[i]));
                    }
                    self.complete = true;
                    return Action::keep();
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
        'x'
    }
}

/// Runs PASC on the chain for a fixed number of iterations and deposits the
/// block heads' identifier bits into the cells' T registers: after t
/// iterations every complete block stores its head index ik.
pub struct TDeposit {
    pub seats: Vec<CellSeat>,
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    bw: [u8; MAX_SEATS],
    head_bit: [bool; MAX_SEATS],
    iterations: u32,
    total: u32,
    round: u8,
    complete: bool,
}

impl TDeposit {
    pub fn new(seats: Vec<CellSeat>, total: u32) -> Self {
        TDeposit {
            seats,
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            bw: [u8::MAX; MAX_SEATS],
            head_bit: [false; MAX_SEATS],
            iterations: 0,
            total,
            round: 0,
            complete: false,
        }
    }

    fn wire_pasc(&mut self, cfg: &mut PinConfig) {
        for (i, s) in self.seats.iter().enumerate() {
            let p = cfg.add_set();
            let q = cfg.add_set();
            self.pri[i] = p;
            self.sec[i] = q;
            if let Some(l) = s.succ {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
            }
            if let Some(l) = s.pred {
                if self.active[i] {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, q);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, p);
                } else {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
                }
            }
        }
    }

    fn wire_blocks(&mut self, cfg: &mut PinConfig) {
        for i in 0..self.seats.len() {
            let s = &self.seats[i];
            let set = cfg.add_set();
            self.bw[i] = set;
            if !s.block_head {
                if let Some(l) = s.pred {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                }
            }
            if !s.succ_is_head {
                if let Some(l) = s.succ {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                    cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                }
            }
        }
    }
}

impl Program for TDeposit {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        let r = self.round;
        self.round = (r + 1) % 6;
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        match r {
            0 => {
                for i in 0..self.seats.len() {
                    if self.will_passivate[i] {
                        self.active[i] = false;
                        self.will_passivate[i] = false;
                    }
                }
                self.wire_pasc(&mut cfg);
            }
            1 => {
                self.wire_pasc(&mut cfg);
                for (i, s) in self.seats.iter().enumerate() {
                    if s.is_chain_head {
                        beeps.push(self.pri[i]);
                    }
                }
            }
            2 => {
                for i in 0..self.seats.len() {
                    let on_sec = ctx.heard(self.sec[i]);
                    self.head_bit[i] = on_sec;
                    if self.active[i] && on_sec {
                        self.will_passivate[i] = true;
                        beeps.push(self.sec[i]);
                    }
                }
                self.wire_pasc(&mut cfg);
            }
            3 => {
                self.wire_blocks(&mut cfg);
            }
            4 => {
                self.wire_blocks(&mut cfg);
                for i in 0..self.seats.len() {
                    if self.seats[i].block_head && self.head_bit[i] {
                        beeps.push(self.bw[i]);
                    }
                }
            }
            _ => {
                for i in 0..self.seats.len() {
                    if self.seats[i].cell as u32 == self.iterations {
                        let heard = self.bw[i] != u8::MAX && ctx.heard(self.bw[i]);
                        self.seats[i].set_bit(Reg::T, heard);
                    }
                }
                self.iterations += 1;
                if self.iterations >= self.total {
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
        'T'
    }
}

/// Announcement predicates for branch decisions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ann {
    /// A complete block found a divisor; first two reps exclude block zero.
    Composite { skip_block0: bool },
    /// Block zero's sampled r is not below p.
    RejectR,
    /// Block zero's folded sum differs from the streamed one.
    Unequal,
}

/// One instruction of the shared program.
#[derive(Clone, Copy, Debug)]
pub enum Instr {
    VmA(VmOp),
    VmB(VmOp),
    /// Broadcast the digit of the cell whose index equals the counter.
    VmADigitAt(u8),
    VmBDigitAt(u8),
    /// Stream register bits from one chain's block zero over the global
    /// circuit; capture per flags.
    Stream {
        from_b: bool,
        src: Reg,
        dst: Reg,
        bits: u8,
        cap_a: bool,
        cap_b: bool,
        cap_block0_only: bool,
    },
    Announce(Ann),
    BranchObserved(usize),
    BranchNotObserved(usize),
    SetCtr(u8, u32),
    IncCtr(u8),
    BranchCtrLt(u8, u32, usize),
    Jump(usize),
    FoldInit {
        chain_b: bool,
    },
    FoldLevel {
        chain_b: bool,
        tbit: u8,
    },
    FoldTransfer {
        chain_b: bool,
        bits: u8,
    },
    Halt(Verdict),
    HaltError,
}

impl Instr {
    fn rounds(&self) -> u32 {
        match self {
            Instr::VmA(op) | Instr::VmB(op) => op.rounds() as u32,
            Instr::VmADigitAt(_) | Instr::VmBDigitAt(_) => 5,
            Instr::Stream { bits, .. } => *bits as u32 + 2,
            Instr::Announce(_) => 3,
            Instr::FoldInit { .. } => 1,
            Instr::FoldLevel { .. } => 4,
            Instr::FoldTransfer { bits, .. } => *bits as u32 + 2,
            _ => 0,
        }
    }
}

/// The PIT executor: chains A and B with their cell seats, a shared
/// program, counters and announcement-driven branching.
pub struct PitProgram {
    pub a: Vec<CellSeat>,
    pub b: Vec<CellSeat>,
    prog: Arc<Vec<Instr>>,
    pc: usize,
    round_in: u32,
    ctrs: [u32; 4],
    observed: bool,
    global: u8,
    fold_sender: [bool; MAX_SEATS],
    fold_receiver: [bool; MAX_SEATS],
    fold_active: [bool; MAX_SEATS],
    transfer_listen: [u8; MAX_SEATS],
    pub verdict: Option<Verdict>,
    pub failed: bool,
}

impl PitProgram {
    pub fn new(a: Vec<CellSeat>, b: Vec<CellSeat>, prog: Arc<Vec<Instr>>) -> Self {
        PitProgram {
            a,
            b,
            prog,
            pc: 0,
            round_in: 0,
            ctrs: [0; 4],
            observed: false,
            global: u8::MAX,
            fold_sender: [false; MAX_SEATS],
            fold_receiver: [false; MAX_SEATS],
            fold_active: [false; MAX_SEATS],
            transfer_listen: [u8::MAX; MAX_SEATS],
            verdict: None,
            failed: false,
        }
    }
}

impl Program for PitProgram {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        loop {
            if self.verdict.is_some() || self.failed {
                return Action::keep();
            }
            let instr = self.prog[self.pc];
            match instr {
                Instr::BranchObserved(to) => {
                    self.pc = if self.observed { to } else { self.pc + 1 };
                    continue;
                }
                Instr::BranchNotObserved(to) => {
                    self.pc = if !self.observed { to } else { self.pc + 1 };
                    continue;
                }
                Instr::SetCtr(i, v) => {
                    self.ctrs[i as usize] = v;
                    self.pc += 1;
                    continue;
                }
                Instr::IncCtr(i) => {
                    self.ctrs[i as usize] += 1;
                    self.pc += 1;
                    continue;
                }
                Instr::BranchCtrLt(i, v, to) => {
                    self.pc = if self.ctrs[i as usize] < v {
                        to
                    } else {
                        self.pc + 1
                    };
                    continue;
                }
                Instr::Jump(to) => {
                    self.pc = to;
                    continue;
                }
                Instr::Halt(v) => {
                    self.verdict = Some(v);
                    return Action::keep();
                }
                Instr::HaltError => {
                    self.failed = true;
                    return Action::keep();
                }
                _ => {}
            }
            let r = self.round_in;
            let total = instr.rounds();
            let action = self.run_round(instr, r, ctx);
            self.round_in += 1;
            if self.round_in >= total {
                self.round_in = 0;
                self.pc += 1;
            }
            return action;
        }
    }

    fn done(&self) -> bool {
        self.verdict.is_some() || self.failed
    }

    fn tag(&self) -> char {
        'P'
    }
}

impl PitProgram {
    fn run_round(&mut self, instr: Instr, r: u32, ctx: &mut Ctx<'_>) -> Action {
        let mut cfg = PinConfig::empty();
        let mut beeps = Vec::new();
        match instr {
            Instr::VmA(op) => {
                vm_read(&mut self.a, op, r as u8, ctx);
                vm_wire(&mut self.a, op, r as u8, ctx, &mut cfg);
                vm_beep(&mut self.a, op, r as u8, &mut beeps);
            }
            Instr::VmB(op) => {
                vm_read(&mut self.b, op, r as u8, ctx);
                vm_wire(&mut self.b, op, r as u8, ctx, &mut cfg);
                vm_beep(&mut self.b, op, r as u8, &mut beeps);
            }
            Instr::VmADigitAt(ctr) => {
                let idx = self.ctrs[ctr as usize] as u8;
                let op = VmOp::BcastDigit(idx);
                vm_read(&mut self.a, op, r as u8, ctx);
                vm_wire(&mut self.a, op, r as u8, ctx, &mut cfg);
                vm_beep(&mut self.a, op, r as u8, &mut beeps);
            }
            Instr::VmBDigitAt(ctr) => {
                let idx = self.ctrs[ctr as usize] as u8;
                let op = VmOp::BcastDigit(idx);
                vm_read(&mut self.b, op, r as u8, ctx);
                vm_wire(&mut self.b, op, r as u8, ctx, &mut cfg);
                vm_beep(&mut self.b, op, r as u8, &mut beeps);
            }
            Instr::Stream {
                from_b,
                src,
                dst,
                bits,
                cap_a,
                cap_b,
                cap_block0_only,
            } => {
                // Bit j beeps at round j+1 and lands at round j+2.
                if r >= 2 {
                    let j = (r - 2) as u8;
                    let heard = self.global != u8::MAX && ctx.heard(self.global);
                    for (seats, cap) in [(&mut self.a, cap_a), (&mut self.b, cap_b)] {
                        if !cap {
                            continue;
                        }
                        for s in seats.iter_mut() {
                            if s.cell == j && (!cap_block0_only || s.in_block0) {
                                s.set_bit(dst, heard);
                            }
                        }
                    }
                }
                self.global = wire_global(&mut cfg, ctx);
                if r >= 1 && r <= bits as u32 {
                    let j = (r - 1) as u8;
                    let src_seats = if from_b { &self.b } else { &self.a };
                    for s in src_seats {
                        if s.in_block0 && s.cell == j && s.bit(src) {
                            beeps.push(self.global);
                        }
                    }
                }
            }
            Instr::Announce(ann) => match r {
                0 => {
                    self.global = wire_global(&mut cfg, ctx);
                }
                1 => {
                    self.global = wire_global(&mut cfg, ctx);
                    let fire = match ann {
                        Ann::Composite { skip_block0 } => self
                            .a
                            .iter()
                            .any(|s| s.complete && s.zero && !(skip_block0 && s.in_block0)),
                        Ann::RejectR => self.a.iter().any(|s| s.complete && s.in_block0 && !s.lt),
                        Ann::Unequal => self
                            .a
                            .iter()
                            .any(|s| s.complete && s.in_block0 && (s.gt || s.lt)),
                    };
                    if fire {
                        beeps.push(self.global);
                    }
                }
                _ => {
                    self.observed = self.global != u8::MAX && ctx.heard(self.global);
                    return Action::keep();
                }
            },
            Instr::FoldInit { chain_b } => {
                let seats = if chain_b { &self.b } else { &self.a };
                for (i, s) in seats.iter().enumerate() {
                    self.fold_active[i] = s.complete;
                    self.fold_sender[i] = false;
                    self.fold_receiver[i] = false;
                }
            }
            Instr::FoldLevel { chain_b, tbit } => {
                // Broadcast bit (tbit) of T block-wide, then classify.
                let op = VmOp::BcastBit(Reg::T, tbit);
                {
                    let seats = if chain_b { &mut self.b } else { &mut self.a };
                    vm_read(seats, op, r as u8, ctx);
                    vm_wire(seats, op, r as u8, ctx, &mut cfg);
                    vm_beep(seats, op, r as u8, &mut beeps);
                }
                if r == 3 {
                    let scratches: Vec<bool> = if chain_b {
                        self.b.iter().map(|s| s.scratch).collect()
                    } else {
                        self.a.iter().map(|s| s.scratch).collect()
                    };
                    for (i, &bit) in scratches.iter().enumerate() {
                        if !self.fold_active[i] {
                            self.fold_sender[i] = false;
                            self.fold_receiver[i] = false;
                            continue;
                        }
                        if bit {
                            self.fold_sender[i] = true;
                            self.fold_receiver[i] = false;
                            self.fold_active[i] = false;
                        } else {
                            self.fold_sender[i] = false;
                            self.fold_receiver[i] = true;
                        }
                    }
                    return Action::keep();
                }
            }
            Instr::FoldTransfer { chain_b, bits } => {
                // Segments cut at receiver-block heads; senders stream Sum.
                let listen = &mut self.transfer_listen;
                let receivers = &self.fold_receiver;
                let senders = &self.fold_sender;
                let seats = if chain_b { &mut self.b } else { &mut self.a };
                if r >= 2 {
                    let j = (r - 2) as u8;
                    for (i, s) in seats.iter_mut().enumerate() {
                        if s.cell == j {
                            let v = listen[i] != u8::MAX && ctx.heard(listen[i]);
                            s.set_bit(Reg::U, v);
                        }
                    }
                }
                for (i, s) in seats.iter().enumerate() {
                    let set = cfg.add_set();
                    listen[i] = set;
                    let cut_pred = s.block_head && receivers[i];
                    if !cut_pred {
                        if let Some(l) = s.pred {
                            cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                            cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                        }
                    }
                    if let Some(l) = s.succ {
                        cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
                    }
                }
                if r >= 1 && r <= bits as u32 {
                    let j = (r - 1) as u8;
                    for (i, s) in seats.iter().enumerate() {
                        if senders[i] && s.cell == j && s.bit(Reg::Sum) {
                            beeps.push(listen[i]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        let junk = cfg.add_set();
        park_unused(&mut cfg, junk, ctx);
        let mut a = Action::configure(cfg);
        for b in beeps {
            a = a.beep(b);
        }
        a
    }
}
