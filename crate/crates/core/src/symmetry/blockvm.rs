//! Register arithmetic on chain blocks.
//!
//! After the block primitive divides a chain into blocks of length k, each
//! block acts as one word machine: cell j of a block stores bit j of every
//! register, and operations run as constant-round circuit passes over the
//! block's bonds. Carries propagate through a circuit that
//! carry-propagating cells conduct and carry-generating cells inject into;
//! comparisons resolve the highest differing cell with a priority circuit
//! descending from the block top; shifts ride per-bond pair circuits;
//! broadcasts use the block-wide circuit. Every operation takes the same
//! number of rounds in every block, so all blocks stay in lockstep while
//! branching on their own verdict flags.
//!
//! The hosting program rebuilds the pin configuration every round: within a
//! round it first reads the previous round's beeps with the set ids
//! recorded back then, then rewires (the same circuit shape for every round
//! of one op), then beeps on the fresh ids.

use rand::Rng;

use crate::engine::{Ctx, PinConfig};
use crate::pasc::SeatLink;

/// Register file indices; each cell holds one bit of each register.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Reg {
    /// The candidate prime.
    P = 0,
    /// Divisor / the block's base index ik.
    T = 1,
    /// The evaluation point.
    R = 2,
    /// Running power r^e.
    Pow = 3,
    /// Current term.
    Term = 4,
    /// Block partial sum.
    Sum = 5,
    /// Shifted divisor / fold input.
    U = 6,
    /// Scratch.
    X = 7,
}

/// One chain position with its block-cell role.
#[derive(Clone, Copy, Debug)]
pub struct CellSeat {
    pub pred: Option<SeatLink>,
    pub succ: Option<SeatLink>,
    pub block_head: bool,
    /// The chain successor starts the next block (this cell tops its block).
    pub succ_is_head: bool,
    pub is_chain_head: bool,
    pub is_chain_tail: bool,
    /// Cell index within the block.
    pub cell: u8,
    /// Member of a complete, arithmetic-capable block.
    pub complete: bool,
    /// Index of the block along the chain, for fold parity. Derived from
    /// the block-local copy of t = ik.
    pub block_index: u16,
    /// The 3-bit path code this position holds.
    pub digit: u8,
    pub regs: u8,
    /// Verdicts of the last compare / zero test, block-wide.
    pub gt: bool,
    pub lt: bool,
    pub zero: bool,
    /// Received broadcast bit / digit.
    pub scratch: bool,
    pub cond: bool,
    pub digit_in: u8,
    pub in_block0: bool,
    listen: u8,
    listen_up: u8,
    decider: bool,
    cmp_x_bit: bool,
}

impl CellSeat {
    pub fn new(
        pred: Option<SeatLink>,
        succ: Option<SeatLink>,
        is_chain_head: bool,
        is_chain_tail: bool,
        digit: u8,
    ) -> Self {
        CellSeat {
            pred,
            succ,
            block_head: false,
            succ_is_head: false,
            is_chain_head,
            is_chain_tail,
            cell: 0,
            complete: false,
            block_index: 0,
            digit,
            regs: 0,
            gt: false,
            lt: false,
            zero: false,
            scratch: false,
            cond: false,
            digit_in: 0,
            in_block0: false,
            listen: u8::MAX,
            listen_up: u8::MAX,
            decider: false,
            cmp_x_bit: false,
        }
    }

    pub fn bit(&self, r: Reg) -> bool {
        self.regs >> (r as u8) & 1 == 1
    }

    pub fn set_bit(&mut self, r: Reg, v: bool) {
        if v {
            self.regs |= 1 << (r as u8);
        } else {
            self.regs &= !(1 << (r as u8));
        }
    }

    /// Whether this cell tops its block (no in-block successor).
    pub fn block_top(&self) -> bool {
        self.succ_is_head || self.is_chain_tail || self.succ.is_none()
    }
}

/// Block-machine operations with fixed round counts.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VmOp {
    Copy(Reg, Reg),
    Zero(Reg),
    One(Reg),
    /// Random bits into cells 0..width-1 of block zero, the top cell forced
    /// to one when the flag is set; other cells cleared.
    SampleBits(Reg, u8, bool),
    /// dst := dst + src (mod 2^k).
    Add(Reg, Reg),
    /// dst := dst - src (mod 2^k).
    Sub(Reg, Reg),
    /// dst := dst - src unless the last compare said dst < src.
    SubIfGe(Reg, Reg),
    /// dst := dst + src when the last broadcast bit was one.
    AddIfScratch(Reg, Reg),
    /// dst := dst + src when the saved condition holds.
    AddIfCond(Reg, Reg),
    Inc(Reg),
    /// dst := src when the saved condition holds.
    CopyIfCond(Reg, Reg),
    /// cond := scratch.
    SaveScratchCond,
    /// cond := bit `idx` of the received digit.
    CondFromDigitBit(u8),
    /// Compare two registers; gt/lt verdicts land block-wide.
    Cmp(Reg, Reg),
    ZeroTest(Reg),
    ShiftUp(Reg),
    ShiftDown(Reg),
    /// Broadcast bit `idx` of reg block-wide into `scratch`.
    BcastBit(Reg, u8),
    /// Broadcast cell idx's digit block-wide into `digit_in`.
    BcastDigit(u8),
    Idle,
}

impl VmOp {
    pub fn rounds(self) -> u8 {
        match self {
            VmOp::Copy(..)
            | VmOp::Zero(..)
            | VmOp::One(..)
            | VmOp::SampleBits(..)
            | VmOp::CopyIfCond(..)
            | VmOp::SaveScratchCond
            | VmOp::CondFromDigitBit(..)
            | VmOp::Idle => 1,
            VmOp::Add(..)
            | VmOp::Sub(..)
            | VmOp::SubIfGe(..)
            | VmOp::AddIfScratch(..)
            | VmOp::AddIfCond(..)
            | VmOp::Inc(..) => 3,
            VmOp::Cmp(..) => 6,
            VmOp::ZeroTest(..) | VmOp::ShiftUp(..) | VmOp::ShiftDown(..) | VmOp::BcastBit(..) => 3,
            VmOp::BcastDigit(..) => 5,
        }
    }
}

fn carry_regs(op: VmOp) -> Reg {
    match op {
        VmOp::Add(d, _)
        | VmOp::Sub(d, _)
        | VmOp::SubIfGe(d, _)
        | VmOp::AddIfScratch(d, _)
        | VmOp::AddIfCond(d, _)
        | VmOp::Inc(d) => d,
        _ => unreachable!(),
    }
}

fn carry_parts(op: VmOp, s: &CellSeat) -> (bool, bool, bool) {
    let (dst, b) = match op {
        VmOp::Add(d, src)
        | VmOp::Sub(d, src)
        | VmOp::SubIfGe(d, src)
        | VmOp::AddIfScratch(d, src)
        | VmOp::AddIfCond(d, src) => (d, s.bit(src)),
        VmOp::Inc(d) => (d, s.cell == 0),
        _ => unreachable!(),
    };
    let a = s.bit(dst);
    let sub = matches!(op, VmOp::Sub(..) | VmOp::SubIfGe(..));
    let enabled = s.complete
        && match op {
            VmOp::SubIfGe(..) => !s.lt,
            VmOp::AddIfScratch(..) => s.scratch,
            VmOp::AddIfCond(..) => s.cond,
            _ => true,
        };
    let (p, g) = if sub {
        (a == b, !a && b)
    } else {
        (a ^ b, a && b)
    };
    (enabled, p, g)
}

fn carry_result(op: VmOp, s: &CellSeat, carry_in: bool) -> bool {
    let b = match op {
        VmOp::Add(_, src)
        | VmOp::Sub(_, src)
        | VmOp::SubIfGe(_, src)
        | VmOp::AddIfScratch(_, src)
        | VmOp::AddIfCond(_, src) => s.bit(src),
        VmOp::Inc(_) => s.cell == 0,
        _ => unreachable!(),
    };
    s.bit(carry_regs(op)) ^ b ^ carry_in
}

fn is_carry_op(op: VmOp) -> bool {
    matches!(
        op,
        VmOp::Add(..)
            | VmOp::Sub(..)
            | VmOp::SubIfGe(..)
            | VmOp::AddIfScratch(..)
            | VmOp::AddIfCond(..)
            | VmOp::Inc(..)
    )
}

/// Read phase of round `round` of `op`: consume the previous round's flags.
pub fn vm_read(seats: &mut [CellSeat], op: VmOp, round: u8, ctx: &Ctx<'_>) {
    match op {
        op2 if is_carry_op(op2) => {
            if round == 2 {
                for s in seats {
                    let (enabled, _, _) = carry_parts(op, s);
                    if !enabled {
                        continue;
                    }
                    let carry = s.listen != u8::MAX && ctx.heard(s.listen);
                    let v = carry_result(op, s, carry);
                    s.set_bit(carry_regs(op), v);
                }
            }
        }
        VmOp::Cmp(x, y) => match round {
            2 => {
                for s in seats {
                    if !s.complete {
                        continue;
                    }
                    let differs = s.bit(x) != s.bit(y);
                    let from_above = s.listen_up != u8::MAX && ctx.heard(s.listen_up);
                    s.decider = differs && (from_above || s.block_top());
                    s.cmp_x_bit = s.bit(x);
                    s.gt = false;
                    s.lt = false;
                }
            }
            4 => {
                for s in seats.iter_mut() {
                    if s.complete && s.listen != u8::MAX && ctx.heard(s.listen) {
                        s.gt = true;
                    }
                }
            }
            5 => {
                for s in seats.iter_mut() {
                    if s.complete && s.listen != u8::MAX && ctx.heard(s.listen) {
                        s.lt = true;
                    }
                }
            }
            _ => {}
        },
        VmOp::ZeroTest(_) => {
            if round == 2 {
                for s in seats.iter_mut() {
                    if s.complete {
                        s.zero = !(s.listen != u8::MAX && ctx.heard(s.listen));
                    }
                }
            }
        }
        VmOp::ShiftUp(dst) => {
            if round == 2 {
                for s in seats {
                    if s.complete {
                        let v = s.cell != 0 && s.listen != u8::MAX && ctx.heard(s.listen);
                        s.set_bit(dst, v);
                    }
                }
            }
        }
        VmOp::ShiftDown(dst) => {
            if round == 2 {
                for s in seats {
                    if s.complete {
                        let v = !s.block_top() && s.listen_up != u8::MAX && ctx.heard(s.listen_up);
                        s.set_bit(dst, v);
                    }
                }
            }
        }
        VmOp::BcastBit(..) => {
            if round == 2 {
                for s in seats.iter_mut() {
                    if s.complete {
                        s.scratch = s.listen != u8::MAX && ctx.heard(s.listen);
                    }
                }
            }
        }
        VmOp::BcastDigit(_) => {
            if (2..=4).contains(&round) {
                let j = round - 2;
                for s in seats.iter_mut() {
                    if !s.complete {
                        continue;
                    }
                    if round == 2 {
                        s.digit_in = 0;
                    }
                    if s.listen != u8::MAX && ctx.heard(s.listen) {
                        s.digit_in |= 1 << j;
                    }
                }
            }
        }
        _ => {}
    }
}

/// Wire phase: contribute this op's circuits for round `round` (identical
/// shape for every round that still needs its beeps readable).
pub fn vm_wire(
    seats: &mut [CellSeat],
    op: VmOp,
    round: u8,
    ctx: &mut Ctx<'_>,
    cfg: &mut PinConfig,
) {
    match op {
        VmOp::SampleBits(dst, width, force_top) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    if !s.complete || !s.in_block0 {
                        continue;
                    }
                    let v = if force_top && s.cell == width - 1 {
                        true
                    } else if s.cell < width {
                        ctx.rng.random()
                    } else {
                        false
                    };
                    s.set_bit(dst, v);
                }
            }
        }
        VmOp::SaveScratchCond => {
            if round == 0 {
                for s in seats.iter_mut() {
                    s.cond = s.scratch;
                }
            }
        }
        VmOp::CondFromDigitBit(b) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    s.cond = s.digit_in >> b & 1 == 1;
                }
            }
        }
        VmOp::CopyIfCond(dst, src) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    if s.complete && s.cond {
                        let v = s.bit(src);
                        s.set_bit(dst, v);
                    }
                }
            }
        }
        VmOp::Copy(dst, src) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    if s.complete {
                        let v = s.bit(src);
                        s.set_bit(dst, v);
                    }
                }
            }
        }
        VmOp::Zero(dst) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    s.set_bit(dst, false);
                }
            }
        }
        VmOp::One(dst) => {
            if round == 0 {
                for s in seats.iter_mut() {
                    if s.complete {
                        let v = s.cell == 0;
                        s.set_bit(dst, v);
                    }
                }
            }
        }
        op2 if is_carry_op(op2) => {
            if round <= 1 {
                for s in seats.iter_mut() {
                    s.listen = u8::MAX;
                    s.listen_up = u8::MAX;
                    if !s.complete {
                        continue;
                    }
                    let (enabled, propagate, _) = carry_parts(op, s);
                    let down = cfg.add_set();
                    s.listen = down;
                    if s.cell != 0 {
                        if let Some(l) = s.pred {
                            cfg.assign(l.dir as usize, 2 * l.bank as usize, down);
                        }
                    }
                    if !s.block_top() {
                        if let Some(l) = s.succ {
                            if propagate && enabled {
                                cfg.assign(l.dir as usize, 2 * l.bank as usize, down);
                            } else {
                                let up = cfg.add_set();
                                s.listen_up = up;
                                cfg.assign(l.dir as usize, 2 * l.bank as usize, up);
                            }
                        }
                    }
                }
            }
        }
        VmOp::Cmp(x, y) => {
            if round <= 1 {
                for s in seats.iter_mut() {
                    s.listen = u8::MAX;
                    s.listen_up = u8::MAX;
                    if !s.complete {
                        continue;
                    }
                    let equal = s.bit(x) == s.bit(y);
                    let up = cfg.add_set();
                    s.listen_up = up;
                    if !s.block_top() {
                        if let Some(l) = s.succ {
                            cfg.assign(l.dir as usize, 2 * l.bank as usize, up);
                        }
                    }
                    if s.cell != 0 {
                        if let Some(l) = s.pred {
                            if equal {
                                cfg.assign(l.dir as usize, 2 * l.bank as usize, up);
                            } else {
                                let down = cfg.add_set();
                                cfg.assign(l.dir as usize, 2 * l.bank as usize, down);
                            }
                        }
                    }
                }
            } else {
                wire_block_wide(seats, cfg);
            }
        }
        VmOp::ZeroTest(_) | VmOp::BcastBit(..) | VmOp::BcastDigit(_) => {
            wire_block_wide(seats, cfg);
        }
        VmOp::ShiftUp(_) | VmOp::ShiftDown(_) => {
            if round <= 1 {
                for s in seats.iter_mut() {
                    s.listen = u8::MAX;
                    s.listen_up = u8::MAX;
                    if !s.complete {
                        continue;
                    }
                    if s.cell != 0 {
                        if let Some(l) = s.pred {
                            let set = cfg.add_set();
                            s.listen = set;
                            cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                        }
                    }
                    if !s.block_top() {
                        if let Some(l) = s.succ {
                            let set = cfg.add_set();
                            s.listen_up = set;
                            cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                        }
                    }
                }
            }
        }
        _ => {}
    }
}

fn wire_block_wide(seats: &mut [CellSeat], cfg: &mut PinConfig) {
    for s in seats.iter_mut() {
        s.listen = u8::MAX;
        if !s.complete {
            continue;
        }
        let set = cfg.add_set();
        s.listen = set;
        if s.cell != 0 {
            if let Some(l) = s.pred {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
        if !s.block_top() {
            if let Some(l) = s.succ {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
    }
}

/// Beep phase, on the ids recorded by this round's wiring.
pub fn vm_beep(seats: &mut [CellSeat], op: VmOp, round: u8, beeps: &mut Vec<u8>) {
    match op {
        op2 if is_carry_op(op2) => {
            if round == 1 {
                for s in seats.iter_mut() {
                    let (enabled, _, generate) = carry_parts(op, s);
                    if enabled && generate && s.listen_up != u8::MAX {
                        beeps.push(s.listen_up);
                    }
                }
            }
        }
        VmOp::Cmp(x, y) => match round {
            1 => {
                for s in seats.iter_mut() {
                    if s.complete && s.block_top() && s.bit(x) == s.bit(y) && s.cell != 0 {
                        // The equal top wired its pred pin into the up set.
                        beeps.push(s.listen_up);
                    }
                }
            }
            3 => {
                for s in seats.iter_mut() {
                    if s.decider && s.cmp_x_bit && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
            4 => {
                for s in seats.iter_mut() {
                    if s.decider && !s.cmp_x_bit && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
            _ => {}
        },
        VmOp::ZeroTest(x) => {
            if round == 1 {
                for s in seats.iter_mut() {
                    if s.complete && s.bit(x) && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
        }
        VmOp::ShiftUp(dst) => {
            if round == 1 {
                for s in seats.iter_mut() {
                    if s.complete && s.bit(dst) && s.listen_up != u8::MAX {
                        beeps.push(s.listen_up);
                    }
                }
            }
        }
        VmOp::ShiftDown(dst) => {
            if round == 1 {
                for s in seats.iter_mut() {
                    if s.complete && s.bit(dst) && s.cell != 0 && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
        }
        VmOp::BcastBit(reg, idx) => {
            if round == 1 {
                for s in seats.iter_mut() {
                    if s.complete && s.cell == idx && s.bit(reg) && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
        }
        VmOp::BcastDigit(idx) => {
            if (1..=3).contains(&round) {
                let j = round - 1;
                for s in seats.iter_mut() {
                    if s.complete && s.cell == idx && s.digit >> j & 1 == 1 && s.listen != u8::MAX {
                        beeps.push(s.listen);
                    }
                }
            }
        }
        _ => {}
    }
}
