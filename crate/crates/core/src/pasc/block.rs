//! The block primitive: mark every k-th chain position, k = 2^ceil(log2 λ).
//!
//! A marker first walks λ positions down the chain (one notification round
//! per step, every program counting the walk in lockstep). Then PASC runs
//! with an extra test after each iteration: surviving active seats split the
//! partition set they received the reference beep on into singletons, which
//! cuts that circuit into segments between consecutive active seats; the
//! head beeps into its segment, and the marked seat reports on a chain-wide
//! circuit whether the beep reached it. Once it does, no active seat is left
//! strictly between head and marker, so exactly the positions i*k remain
//! active. If λ equals the chain length the marker runs off the end and the
//! last seat stands in for it once it has itself turned passive.

use super::{park_unused, pasc_config, ChainRef, SeatVec, MAX_SEATS};
use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    WalkConfigure,
    Walk,
    Reconfigure,
    RefBeep,
    ReadAndEcho,
    TestConfigure,
    TestAnnounce,
    Done,
}

struct BlockProgram {
    sv: SeatVec,
    lambda: u32,
    walked: u32,
    marker: [bool; MAX_SEATS],
    sentinel: [bool; MAX_SEATS],
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    test_pred: [u8; MAX_SEATS],
    test_succ: [u8; MAX_SEATS],
    heard_sec: [bool; MAX_SEATS],
    pred_set: [u8; MAX_SEATS],
    succ_set: [u8; MAX_SEATS],
    phase: Phase,
    iterations: u32,
}

impl BlockProgram {
    fn new(sv: SeatVec, lambda: u32) -> Self {
        let mut marker = [false; MAX_SEATS];
        for (s, seat) in sv.iter().enumerate() {
            marker[s] = seat.is_ref;
        }
        BlockProgram {
            sv,
            lambda,
            walked: 0,
            marker,
            sentinel: [false; MAX_SEATS],
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            test_pred: [u8::MAX; MAX_SEATS],
            test_succ: [u8::MAX; MAX_SEATS],
            heard_sec: [false; MAX_SEATS],
            pred_set: [0; MAX_SEATS],
            succ_set: [0; MAX_SEATS],
            phase: Phase::WalkConfigure,
            iterations: 0,
        }
    }

    /// One set per chain side of every seat, for marker handoff rounds.
    fn side_config(&mut self, ctx: &Ctx<'_>) -> PinConfig {
        let mut cfg = PinConfig::empty();
        let junk = cfg.add_set();
        for s in 0..self.sv.len() {
            let seat = self.sv.seats[s];
            if let Some(l) = seat.pred {
                let set = cfg.add_set();
                self.pred_set[s] = set;
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
            if let Some(l) = seat.succ {
                let set = cfg.add_set();
                self.succ_set[s] = set;
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
        park_unused(&mut cfg, junk, ctx);
        cfg
    }

    /// All chain pins in one shared set (id 0) for announcements.
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

impl Program for BlockProgram {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        match self.phase {
            Phase::Done => Action::keep(),
            Phase::WalkConfigure => {
                if self.sv.is_empty() {
                    // Amoebots off the chain have nothing to do.
                    self.phase = Phase::Done;
                    return Action::keep();
                }
                let cfg = self.side_config(ctx);
                self.phase = Phase::Walk;
                Action::configure(cfg)
            }
            Phase::Walk => {
                if self.walked > 0 {
                    for s in 0..self.sv.len() {
                        let got = self.sv.seats[s].pred.is_some() && ctx.heard(self.pred_set[s]);
                        self.marker[s] = got;
                    }
                }
                if self.walked == self.lambda {
                    self.phase = Phase::Reconfigure;
                    return self.activate(ctx);
                }
                self.walked += 1;
                let mut a = Action::keep();
                for s in 0..self.sv.len() {
                    if self.marker[s] {
                        if self.sv.seats[s].succ.is_some() {
                            a = a.beep(self.succ_set[s]);
                        } else {
                            // Marker runs off the end: this seat stands in.
                            self.sentinel[s] = true;
                            self.marker[s] = false;
                        }
                    }
                }
                a
            }
            Phase::Reconfigure => {
                if self.iterations > 0 {
                    // Received flags carry the announce verdict.
                    for s in 0..self.sv.len() {
                        if self.will_passivate[s] {
                            self.active[s] = false;
                            self.will_passivate[s] = false;
                        }
                    }
                    if ctx.heard_any() {
                        self.phase = Phase::Done;
                        return Action::keep();
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
                for s in 0..self.sv.len() {
                    let on_sec = ctx.heard(self.sec[s]);
                    self.heard_sec[s] = on_sec;
                    if self.active[s] && on_sec {
                        self.will_passivate[s] = true;
                        a = a.beep(self.sec[s]);
                    }
                }
                self.iterations += 1;
                self.phase = Phase::TestConfigure;
                a
            }
            Phase::TestConfigure => {
                // Post-iteration survivors split their received-side set into
                // singletons; everyone else keeps it merged, so a circuit
                // forms between each pair of consecutive survivors. The head
                // beeps into its successor-side segment.
                let mut cfg = PinConfig::empty();
                let junk = cfg.add_set();
                let mut head_beep: Option<u8> = None;
                for s in 0..self.sv.len() {
                    let seat = self.sv.seats[s];
                    let surviving = self.active[s] && !self.will_passivate[s];
                    let split = surviving && !seat.is_ref;
                    let (pred_off, succ_off) = side_slots(self.active[s], self.heard_sec[s]);
                    self.test_pred[s] = u8::MAX;
                    self.test_succ[s] = u8::MAX;
                    let shared = if split { None } else { Some(cfg.add_set()) };
                    if let Some(l) = seat.pred {
                        let set = shared.unwrap_or_else(|| cfg.add_set());
                        self.test_pred[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + pred_off, set);
                    }
                    if let Some(l) = seat.succ {
                        let set = match shared {
                            Some(set) => set,
                            None => cfg.add_set(),
                        };
                        self.test_succ[s] = set;
                        cfg.assign(l.dir as usize, 2 * l.bank as usize + succ_off, set);
                        if seat.is_ref {
                            head_beep = Some(set);
                        }
                    }
                }
                park_unused(&mut cfg, junk, ctx);
                self.phase = Phase::TestAnnounce;
                let mut a = Action::configure(cfg);
                if let Some(set) = head_beep {
                    a = a.beep(set);
                }
                a
            }
            Phase::TestAnnounce => {
                let mut reached = false;
                for s in 0..self.sv.len() {
                    let heard = [self.test_pred[s], self.test_succ[s]]
                        .into_iter()
                        .any(|set| set != u8::MAX && ctx.heard(set));
                    if self.marker[s] && heard {
                        reached = true;
                    }
                    // The stand-in only counts once it is passive itself.
                    let surviving = self.active[s] && !self.will_passivate[s];
                    if self.sentinel[s] && !surviving && heard {
                        reached = true;
                    }
                }
                let cfg = self.chain_wide_config(ctx);
                self.phase = Phase::Reconfigure;
                Action::configure(cfg).beep_if(reached, 0)
            }
        }
    }

    fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn tag(&self) -> char {
        'b'
    }
}

/// Slot offsets (0 or 1) of the received-side pins on the pred and succ
/// bonds, given the wiring the seat used and the side it heard on.
fn side_slots(was_active: bool, heard_sec: bool) -> (usize, usize) {
    let succ = usize::from(heard_sec);
    let pred = if was_active {
        usize::from(!heard_sec)
    } else {
        usize::from(heard_sec)
    };
    (pred, succ)
}

/// Output of the block primitive.
#[derive(Clone, Debug)]
pub struct BlockMarks {
    /// Flag per chain position; marked positions head the blocks.
    pub marks: Vec<bool>,
    /// Block length 2^ceil(log2 λ).
    pub block_len: usize,
    pub rounds: u64,
}

/// Divide `chain` into blocks of length k = 2^ceil(log2 λ); afterwards
/// exactly the positions i*k are marked.
pub fn block_primitive(
    world: &mut AmoebotWorld,
    chain: &ChainRef,
    lambda: usize,
) -> Result<BlockMarks, AlgoError> {
    let m = chain.len();
    if lambda < 1 || lambda > m {
        return Err(AlgoError::LambdaExceedsChain { lambda, chain: m });
    }
    if lambda == 1 {
        // k = 1: every position heads its own block; the segment test cannot
        // observe this case, so answer directly.
        return Ok(BlockMarks {
            marks: vec![true; m],
            block_len: 1,
            rounds: 0,
        });
    }
    let mut head_chain = chain.clone();
    head_chain.ref_index = 0;
    let seats = super::seats_for_chain(&world.st, &head_chain)?;
    let programs: Vec<BlockProgram> = seats
        .into_iter()
        .map(|sv| BlockProgram::new(sv, lambda as u32))
        .collect();
    let mut phase = world.phase(programs, 0x1f);
    let budget = lambda as u64 + 8 * (super::ceil_log2(m) as u64 + 2) + 24;
    let rounds = phase.run_to_completion(budget)?;
    let programs = phase.finish();
    let iterations = programs.iter().map(|p| p.iterations).max().unwrap_or(0);
    let marks = chain
        .positions
        .iter()
        .map(|&(coord, occ)| {
            let idx = world.st.index_of(coord).unwrap();
            programs[idx].active[occ as usize]
        })
        .collect();
    let _ = world.take_emitted();
    Ok(BlockMarks {
        marks,
        block_len: 1usize << iterations,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;

    fn line(m: usize) -> Vec<GridCoord> {
        (0..m as i32).map(|q| GridCoord::new(q, 0)).collect()
    }

    fn marks_for(m: usize, lambda: usize) -> BlockMarks {
        let mut world = AmoebotWorld::load(line(m), 2, 3).unwrap();
        let chain = ChainRef::simple(line(m), 0);
        block_primitive(&mut world, &chain, lambda).unwrap()
    }

    #[test]
    fn lambda_three_gives_blocks_of_four() {
        let out = marks_for(12, 3);
        assert_eq!(out.block_len, 4);
        let expect: Vec<bool> = (0..12).map(|i| i % 4 == 0).collect();
        assert_eq!(out.marks, expect);
    }

    #[test]
    fn lambda_one_marks_everything() {
        let out = marks_for(6, 1);
        assert_eq!(out.block_len, 1);
        assert!(out.marks.iter().all(|&m| m));
    }

    #[test]
    fn lambda_five_on_32() {
        let out = marks_for(32, 5);
        assert_eq!(out.block_len, 8);
        let marked: Vec<usize> = (0..32).filter(|&i| out.marks[i]).collect();
        assert_eq!(marked, vec![0, 8, 16, 24]);
    }

    #[test]
    fn lambda_equal_to_chain_length() {
        let out = marks_for(6, 6);
        assert_eq!(out.block_len, 8);
        let marked: Vec<usize> = (0..6).filter(|&i| out.marks[i]).collect();
        assert_eq!(marked, vec![0]);
    }

    #[test]
    fn lambda_larger_than_chain_rejected() {
        let mut world = AmoebotWorld::load(line(4), 2, 3).unwrap();
        let chain = ChainRef::simple(line(4), 0);
        assert!(matches!(
            block_primitive(&mut world, &chain, 5),
            Err(AlgoError::LambdaExceedsChain { .. })
        ));
    }

    #[test]
    fn block_lengths_match_formula() {
        for (m, lambda) in [(16, 2), (20, 4), (24, 7), (40, 9), (48, 16)] {
            let out = marks_for(m, lambda);
            let k = 1usize << super::super::ceil_log2(lambda);
            assert_eq!(out.block_len, k, "m={m} lambda={lambda}");
            for (i, &mark) in out.marks.iter().enumerate() {
                assert_eq!(mark, i % k == 0, "m={m} lambda={lambda} i={i}");
            }
        }
    }
}
