//! Sum of per-position values modulo a constant, folded along the chain by
//! the PASC passivation tree.
//!
//! Every PASC iteration halves the active seats; a seat that turns passive
//! first hands its partial sum to the nearest surviving seat before it. The
//! handoff rides the same segment circuits as the block primitive:
//! survivors split their received-side set into singletons, everyone else
//! conducts, and the leaving seat beeps its residue bit by bit. Partial
//! sums flow toward position 0, which ends up holding the total and
//! broadcasts it on a chain-wide circuit. The chain head is always the
//! reference, so every passivating seat has a surviving predecessor.

use super::{park_unused, pasc_config, ChainRef, SeatVec, MAX_SEATS};
use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    Reconfigure,
    RefBeep,
    ReadAndEcho,
    TransferConfigure,
    TransferBit(u8),
    Collect,
    BroadcastConfigure,
    BroadcastBit(u8),
    Done,
}

struct SumProgram {
    sv: SeatVec,
    modulus: u16,
    bits: u8,
    acc: [u16; MAX_SEATS],
    incoming: [u16; MAX_SEATS],
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    heard_sec: [bool; MAX_SEATS],
    t_pred: [u8; MAX_SEATS],
    t_succ: [u8; MAX_SEATS],
    phase: Phase,
    result: Option<u16>,
}

impl SumProgram {
    fn new(sv: SeatVec, values: [u16; MAX_SEATS], modulus: u16) -> Self {
        let bits = if modulus <= 1 {
            1
        } else {
            super::ceil_log2(modulus as usize) as u8
        };
        let mut acc = [0u16; MAX_SEATS];
        for s in 0..sv.len() {
            acc[s] = values[s] % modulus;
        }
        SumProgram {
            sv,
            modulus,
            bits,
            acc,
            incoming: [0; MAX_SEATS],
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            heard_sec: [false; MAX_SEATS],
            t_pred: [u8::MAX; MAX_SEATS],
            t_succ: [u8::MAX; MAX_SEATS],
            phase: Phase::Reconfigure,
            result: None,
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

    fn chain_wide_config(&self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let all = cfg.add_set();
        for seat in self.sv.iter() {
            for l in [seat.pred, seat.succ].into_iter().flatten() {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, all);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, all);
            }
        }
        let junk = cfg.add_set();
        park_unused(&mut cfg, junk, ctx);
        cfg
    }
}

impl Program for SumProgram {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        match self.phase {
            Phase::Done => Action::keep(),
            Phase::Reconfigure => {
                if self.sv.is_empty() {
                    self.phase = Phase::Done;
                    return Action::keep();
                }
                if self.sv.len() == 1
                    && self.sv.seats[0].pred.is_none()
                    && self.sv.seats[0].succ.is_none()
                {
                    self.result = Some(self.acc[0]);
                    self.phase = Phase::Done;
                    return Action::keep();
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
                for s in 0..self.sv.len() {
                    let on_sec = ctx.heard(self.sec[s]);
                    self.heard_sec[s] = on_sec;
                    if self.active[s] && on_sec {
                        self.will_passivate[s] = true;
                        a = a.beep(self.sec[s]);
                    }
                }
                self.phase = Phase::TransferConfigure;
                a
            }
            Phase::TransferConfigure => {
                if !ctx.heard_any() {
                    // No seat passivated anywhere: the head holds the total.
                    self.phase = Phase::BroadcastConfigure;
                    return self.activate(ctx);
                }
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                for s in 0..self.sv.len() {
                    let seat = self.sv.seats[s];
                    let surviving = self.active[s] && !self.will_passivate[s];
                    let (pred_off, succ_off) = side_slots(self.active[s], self.heard_sec[s]);
                    self.t_pred[s] = u8::MAX;
                    self.t_succ[s] = u8::MAX;
                    let shared = if surviving { None } else { Some(cfg.add_set()) };
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
                self.phase = Phase::TransferBit(0);
                Action::configure(cfg)
            }
            Phase::TransferBit(j) => {
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if j > 0 {
                        let surviving = self.active[s] && !self.will_passivate[s];
                        if surviving && self.t_succ[s] != u8::MAX && ctx.heard(self.t_succ[s]) {
                            self.incoming[s] |= 1 << (j - 1);
                        }
                    }
                    if self.will_passivate[s] {
                        // Position 0 is the reference, so a passivating seat
                        // always has a predecessor side.
                        let set = self.t_pred[s];
                        if set != u8::MAX && self.acc[s] >> j & 1 == 1 {
                            a = a.beep(set);
                        }
                    }
                }
                self.phase = if j + 1 < self.bits {
                    Phase::TransferBit(j + 1)
                } else {
                    Phase::Collect
                };
                a
            }
            Phase::Collect => {
                for s in 0..self.sv.len() {
                    let surviving = self.active[s] && !self.will_passivate[s];
                    if surviving && self.t_succ[s] != u8::MAX && ctx.heard(self.t_succ[s]) {
                        self.incoming[s] |= 1 << (self.bits - 1);
                    }
                    if surviving {
                        self.acc[s] = (self.acc[s] + self.incoming[s]) % self.modulus;
                    }
                }
                self.apply_passivation();
                self.phase = Phase::Reconfigure;
                self.activate(ctx)
            }
            Phase::BroadcastConfigure => {
                let cfg = self.chain_wide_config(ctx);
                self.phase = Phase::BroadcastBit(0);
                Action::configure(cfg)
            }
            Phase::BroadcastBit(j) => {
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if j > 0 && ctx.heard(0) {
                        self.incoming[s] |= 1 << (j - 1);
                    }
                    if self.sv.seats[s].is_ref && self.acc[s] >> j & 1 == 1 {
                        a = a.beep(0);
                    }
                }
                if j < self.bits {
                    if j == 0 {
                        for s in 0..self.sv.len() {
                            self.incoming[s] = 0;
                        }
                    }
                    self.phase = Phase::BroadcastBit(j + 1);
                } else {
                    let mut r = self.incoming[0] % self.modulus;
                    for s in 0..self.sv.len() {
                        if self.sv.seats[s].is_ref {
                            r = self.acc[s];
                        }
                    }
                    self.result = Some(r);
                    self.phase = Phase::Done;
                }
                a
            }
        }
    }

    fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn tag(&self) -> char {
        'k'
    }
}

fn side_slots(was_active: bool, heard_sec: bool) -> (usize, usize) {
    let succ = usize::from(heard_sec);
    let pred = if was_active {
        usize::from(!heard_sec)
    } else {
        usize::from(heard_sec)
    };
    (pred, succ)
}

/// Every chain member learns the sum of all members' values mod `modulus`.
pub fn chain_sum_mod_k(
    world: &mut AmoebotWorld,
    chain: &ChainRef,
    values: &[u16],
    modulus: u16,
) -> Result<u16, AlgoError> {
    assert_eq!(values.len(), chain.len());
    assert!(modulus >= 1);
    let mut head_chain = chain.clone();
    head_chain.ref_index = 0;
    let seats = super::seats_for_chain(&world.st, &head_chain)?;
    let mut value_arrays: Vec<[u16; MAX_SEATS]> = vec![[0; MAX_SEATS]; world.st.len()];
    for (pos, &(coord, occ)) in chain.positions.iter().enumerate() {
        let idx = world.st.index_of(coord).unwrap();
        value_arrays[idx][occ as usize] = values[pos];
    }
    let members: Vec<bool> = seats.iter().map(|sv| !sv.is_empty()).collect();
    let programs: Vec<SumProgram> = seats
        .into_iter()
        .zip(value_arrays)
        .map(|(sv, vals)| SumProgram::new(sv, vals, modulus))
        .collect();
    let mut phase = world.phase(programs, 0x20);
    let bits = SumProgram::new(SeatVec::default(), [0; MAX_SEATS], modulus).bits as u64;
    let budget = (8 + bits) * (super::ceil_log2(chain.len().max(2)) as u64 + 2) + 2 * bits + 24;
    phase.run_to_completion(budget)?;
    let programs = phase.finish();
    let _ = world.take_emitted();
    let mut result = None;
    for (i, p) in programs.iter().enumerate() {
        if !members[i] {
            continue;
        }
        let r = p.result.expect("member learned the sum");
        match result {
            None => result = Some(r),
            Some(prev) => assert_eq!(prev, r, "all members agree on the sum"),
        }
    }
    Ok(result.expect("chain produced a sum"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(m: usize) -> Vec<GridCoord> {
        (0..m as i32).map(|q| GridCoord::new(q, 0)).collect()
    }

    fn sum_line(values: &[u16], modulus: u16) -> u16 {
        let m = values.len();
        let mut world = AmoebotWorld::load(line(m), 2, 23).unwrap();
        let chain = ChainRef::simple(line(m), 0);
        chain_sum_mod_k(&mut world, &chain, values, modulus).unwrap()
    }

    #[test]
    fn zeros_sum_to_zero() {
        assert_eq!(sum_line(&[0, 0, 0, 0], 5), 0);
    }

    #[test]
    fn small_arithmetic() {
        assert_eq!(sum_line(&[1, 2, 3], 5), 1);
        assert_eq!(sum_line(&[4], 5), 4);
        assert_eq!(sum_line(&[1, 1], 2), 0);
    }

    #[test]
    fn random_chains_match_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..100 {
            let m = rng.random_range(1..=200);
            let modulus = 5u16;
            let values: Vec<u16> = (0..m).map(|_| rng.random_range(0..modulus)).collect();
            let expect = values.iter().map(|&v| v as u64).sum::<u64>() % modulus as u64;
            assert_eq!(
                sum_line(&values, modulus) as u64,
                expect,
                "trial {trial} m={m}"
            );
        }
    }
}
