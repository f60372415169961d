//! The primary-and-secondary-circuit algorithm (PASC) on chains.
//!
//! A chain is an ordered amoebot sequence in which consecutive members are
//! neighbors; an amoebot may hold several chain positions (seats) and
//! operates each one independently on its own pins. Every iteration the
//! chain forms two disjoint circuits: an active seat crosses its primary and
//! secondary partition sets over to its predecessor's, a passive seat
//! connects them straight through. The reference seat beeps on its primary
//! set; a seat reads the side on which the beep arrives as one identifier
//! bit, and active seats hit on their secondary side beep back and turn
//! passive. The run ends with a silent second round.
//!
//! Identifier bits come out least-significant first, one per iteration. The
//! terminating silent iteration still delivers a first-round beep, so the
//! engine hands out one bit more than the nominal ceil(log2 m); that extra
//! top bit makes the two's-complement values exact (no wrap) and is consumed
//! by the consensus pipelines.

use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program, Structure};
use crate::error::AlgoError;
use crate::grid::{Direction, GridCoord, ENE, ESE, N};

/// A two's-complement identifier, least significant bit first.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Identifier {
    pub bits: Vec<bool>,
}

impl Identifier {
    pub fn value(&self) -> i64 {
        let mut v: i64 = 0;
        let k = self.bits.len();
        for (i, &b) in self.bits.iter().enumerate() {
            if b {
                if i == k - 1 {
                    v -= 1i64 << i;
                } else {
                    v += 1i64 << i;
                }
            }
        }
        v
    }

    /// The k-bit two's complement pattern of `value`.
    pub fn encode(value: i64, k: usize) -> Identifier {
        let mut bits = Vec::with_capacity(k);
        let m = value.rem_euclid(1i64 << k.max(1)) as u64;
        for i in 0..k {
            bits.push(m >> i & 1 == 1);
        }
        Identifier { bits }
    }
}

pub fn ceil_log2(m: usize) -> usize {
    assert!(m > 0);
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

/// An ordered chain of amoebot occurrences with a reference position.
///
/// `banks[i]` names the pin pair used by the edge between positions `i` and
/// `i+1`: bank `b` occupies slots `2b` and `2b+1` of the bond.
#[derive(Clone, Debug)]
pub struct ChainRef {
    pub positions: Vec<(GridCoord, u8)>,
    pub ref_index: usize,
    pub banks: Vec<u8>,
}

impl ChainRef {
    /// A simple chain (every occurrence index 0, all edges on bank 0).
    pub fn simple(coords: Vec<GridCoord>, ref_index: usize) -> Self {
        let banks = vec![0; coords.len().saturating_sub(1)];
        ChainRef {
            positions: coords.into_iter().map(|c| (c, 0)).collect(),
            ref_index,
            banks,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Bank for a directed bond use, chosen from the direction alone so both
/// endpoints agree without coordination: uses pointing N, ENE or ESE take
/// bank 0, the opposite uses take bank 1.
pub fn bank_for_direction(d: Direction) -> u8 {
    if d == N || d == ENE || d == ESE {
        0
    } else {
        1
    }
}

pub const MAX_SEATS: usize = 6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SeatLink {
    pub dir: u8,
    pub bank: u8,
}

/// One chain position held by an amoebot.
#[derive(Clone, Copy, Debug, Default)]
pub struct Seat {
    pub pred: Option<SeatLink>,
    pub succ: Option<SeatLink>,
    pub is_ref: bool,
}

/// Per-amoebot seat assignment for a chain, derived from a [`ChainRef`].
pub fn seats_for_chain(st: &Structure, chain: &ChainRef) -> Result<Vec<SeatVec>, AlgoError> {
    let mut seats: Vec<SeatVec> = vec![SeatVec::default(); st.len()];
    let m = chain.len();
    for (pos, &(coord, occ)) in chain.positions.iter().enumerate() {
        let idx = st
            .index_of(coord)
            .ok_or(AlgoError::ReferenceNotOccupied(coord))?;
        let sv = &mut seats[idx];
        while sv.len() <= occ as usize {
            sv.push(Seat::default());
        }
        let seat = &mut sv.seats[occ as usize];
        seat.is_ref |= pos == chain.ref_index;
        if pos > 0 {
            let (pc, _) = chain.positions[pos - 1];
            let d = direction_between(pc, coord).expect("chain members must be neighbors");
            seat.pred = Some(SeatLink {
                dir: d.opposite().main_index().unwrap() as u8,
                bank: chain.banks[pos - 1],
            });
        }
        if pos + 1 < m {
            let (nc, _) = chain.positions[pos + 1];
            let d = direction_between(coord, nc).expect("chain members must be neighbors");
            seat.succ = Some(SeatLink {
                dir: d.main_index().unwrap() as u8,
                bank: chain.banks[pos],
            });
        }
    }
    let max_bank = chain.banks.iter().copied().max().unwrap_or(0) as usize;
    if st.k < 2 * (max_bank + 1) {
        return Err(AlgoError::NotEnoughPins {
            needed: 2 * (max_bank + 1),
            have: st.k,
        });
    }
    Ok(seats)
}

pub fn direction_between(a: GridCoord, b: GridCoord) -> Option<Direction> {
    let d = b - a;
    crate::grid::MAIN_DIRECTIONS
        .into_iter()
        .find(|dir| dir.offset() == Some((d.q, d.r)))
}

/// A small fixed-capacity seat list.
#[derive(Clone, Copy, Debug, Default)]
pub struct SeatVec {
    pub seats: [Seat; MAX_SEATS],
    pub count: u8,
}

impl SeatVec {
    pub fn len(&self) -> usize {
        self.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn push(&mut self, s: Seat) {
        assert!((self.count as usize) < MAX_SEATS);
        self.seats[self.count as usize] = s;
        self.count += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = &Seat> {
        self.seats[..self.count as usize].iter()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Phase {
    Reconfigure,
    RefBeep,
    ReadAndEcho,
    Done,
}

/// What a finished iteration should do next.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    /// Plain identifier computation, run to silence.
    Run,
    /// Stop after a fixed number of iterations (replay of one bit).
    StopAfter(u32),
}

/// The chain PASC program. One instance per amoebot; every seat keeps its
/// own activity flag, partition sets and emitted bit stream.
pub struct ChainPasc {
    sv: SeatVec,
    active: [bool; MAX_SEATS],
    will_passivate: [bool; MAX_SEATS],
    /// Which partition set is the seat's primary/secondary in the current
    /// configuration.
    pri: [u8; MAX_SEATS],
    sec: [u8; MAX_SEATS],
    phase: Phase,
    iteration: u32,
    mode: Mode,
    /// Bit of the last completed iteration per seat (true = heard secondary).
    pub last_bit: [bool; MAX_SEATS],
    /// All-zero-so-far flag per seat (identifier equals reference).
    pub all_zero: [bool; MAX_SEATS],
}

impl ChainPasc {
    pub fn new(sv: SeatVec) -> Self {
        ChainPasc {
            sv,
            active: [true; MAX_SEATS],
            will_passivate: [false; MAX_SEATS],
            pri: [0; MAX_SEATS],
            sec: [0; MAX_SEATS],
            phase: Phase::Reconfigure,
            iteration: 0,
            mode: Mode::Run,
            last_bit: [false; MAX_SEATS],
            all_zero: [true; MAX_SEATS],
        }
    }

    pub fn replay(sv: SeatVec, upto_bit: u32) -> Self {
        let mut p = ChainPasc::new(sv);
        p.mode = Mode::StopAfter(upto_bit + 1);
        p
    }

    pub fn seat_count(&self) -> usize {
        self.sv.len()
    }

    pub fn iterations(&self) -> u32 {
        self.iteration
    }
}

/// Build the two-circuit chain wiring for the given seat activity and record
/// each seat's primary/secondary set ids.
pub fn pasc_config(
    sv: &SeatVec,
    active: &[bool; MAX_SEATS],
    ctx: &Ctx<'_>,
    pri: &mut [u8; MAX_SEATS],
    sec: &mut [u8; MAX_SEATS],
) -> PinConfig {
    let mut cfg = PinConfig::empty();
    let junk = cfg.add_set();
    for s in 0..sv.len() {
        let seat = sv.seats[s];
        let p = cfg.add_set();
        let q = cfg.add_set();
        pri[s] = p;
        sec[s] = q;
        if let Some(l) = seat.succ {
            cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
            cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
        }
        if let Some(l) = seat.pred {
            if active[s] {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, q);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, p);
            } else {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, p);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, q);
            }
        }
    }
    park_unused(&mut cfg, junk, ctx);
    cfg
}

/// Park every live pin not yet assigned in an isolated set.
pub fn park_unused(cfg: &mut PinConfig, junk: u8, ctx: &Ctx<'_>) {
    for d in 0..6 {
        if ctx.neighbors[d] {
            for slot in 0..ctx.k {
                if cfg.set_of(d, slot).is_none() {
                    cfg.assign(d, slot, junk);
                }
            }
        }
    }
}

impl Program for ChainPasc {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        match self.phase {
            Phase::Done => Action::keep(),
            Phase::Reconfigure => {
                // A lone reference with no chain bonds is already done.
                if self.sv.len() == 1
                    && self.sv.seats[0].pred.is_none()
                    && self.sv.seats[0].succ.is_none()
                {
                    self.phase = Phase::Done;
                    return Action::keep();
                }
                if self.iteration > 0 {
                    // Beeps from the previous read round: silence ends the run.
                    if !ctx.heard_any() {
                        self.phase = Phase::Done;
                        return Action::keep();
                    }
                    if let Mode::StopAfter(n) = self.mode {
                        if self.iteration >= n {
                            self.phase = Phase::Done;
                            return Action::keep();
                        }
                    }
                    for s in 0..self.sv.len() {
                        if self.will_passivate[s] {
                            self.active[s] = false;
                            self.will_passivate[s] = false;
                        }
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
                    debug_assert!(
                        on_sec ^ ctx.heard(self.pri[s]),
                        "each seat hears exactly one of its two circuits"
                    );
                    self.last_bit[s] = on_sec;
                    self.all_zero[s] &= !on_sec;
                    ctx.emit(s as u8, on_sec);
                    if self.active[s] && on_sec {
                        self.will_passivate[s] = true;
                        a = a.beep(self.sec[s]);
                    }
                }
                self.iteration += 1;
                self.phase = Phase::Reconfigure;
                a
            }
        }
    }

    fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn tag(&self) -> char {
        match self.phase {
            Phase::Done => 'd',
            _ => {
                if self.active[..self.sv.len()].iter().any(|&a| a) {
                    'A'
                } else {
                    'p'
                }
            }
        }
    }
}

/// Outcome of a chain PASC run.
#[derive(Clone, Debug)]
pub struct PascRun {
    /// Nominal ceil(log2 m)-bit identifiers per chain position.
    pub ids: Vec<Identifier>,
    /// Exact identifier values (using the extra terminating bit).
    pub values: Vec<i64>,
    /// Iterations with a non-silent second round; equals ceil(log2 m).
    pub iterations: usize,
    pub rounds: u64,
}

/// Run PASC on `chain` inside `world` and collect the identifiers.
pub fn pasc_run(world: &mut AmoebotWorld, chain: &ChainRef) -> Result<PascRun, AlgoError> {
    let seats = seats_for_chain(&world.st, chain)?;
    let mut phase = world.phase(seats.into_iter().map(ChainPasc::new).collect(), 0x1d);
    let max = 16 * (ceil_log2(chain.len().max(2)) as u64 + 2) + 16;
    let rounds = phase.run_to_completion(max)?;
    let programs = phase.finish();
    let total_iterations = programs.iter().map(|p| p.iterations()).max().unwrap_or(0) as usize;
    // The final silent iteration emits the extra exact-value bit.
    let iterations = total_iterations.saturating_sub(1);
    let emitted = world.take_emitted();
    let mut streams: Vec<Vec<bool>> = vec![Vec::new(); chain.len()];
    let mut seat_of_pos: Vec<(usize, u8)> = Vec::with_capacity(chain.len());
    for &(coord, occ) in &chain.positions {
        let idx = world.st.index_of(coord).unwrap();
        seat_of_pos.push((idx, occ));
    }
    for (pos, &(idx, occ)) in seat_of_pos.iter().enumerate() {
        for &(tag, bit) in emitted[idx].iter().filter(|(t, _)| *t == occ) {
            let _ = tag;
            streams[pos].push(bit);
        }
    }
    let values = streams
        .iter()
        .map(|bits| Identifier { bits: bits.clone() }.value())
        .collect();
    // Emitted streams always carry at least ceil(log2 m) bits; the nominal
    // identifier is the low slice.
    let width = ceil_log2(chain.len().max(1));
    let ids = streams
        .into_iter()
        .map(|mut bits| {
            debug_assert!(bits.len() >= width || chain.len() == 1);
            bits.truncate(width);
            Identifier { bits }
        })
        .collect();
    Ok(PascRun {
        ids,
        values,
        iterations,
        rounds,
    })
}

/// Re-run PASC from scratch and report bit `upto_bit` of every position's
/// identifier.
pub fn pasc_replay(
    world: &mut AmoebotWorld,
    chain: &ChainRef,
    upto_bit: usize,
) -> Result<Vec<bool>, AlgoError> {
    let width = ceil_log2(chain.len().max(1));
    if upto_bit >= width {
        return Err(AlgoError::BitIndexOutOfRange {
            index: upto_bit,
            width,
        });
    }
    let seats = seats_for_chain(&world.st, chain)?;
    let mut phase = world.phase(
        seats
            .into_iter()
            .map(|sv| ChainPasc::replay(sv, upto_bit as u32))
            .collect(),
        0x1e,
    );
    let max = 16 * (upto_bit as u64 + 2) + 16;
    phase.run_to_completion(max)?;
    let programs = phase.finish();
    let _ = world.take_emitted();
    Ok(chain
        .positions
        .iter()
        .map(|&(coord, occ)| {
            let idx = world.st.index_of(coord).unwrap();
            programs[idx].last_bit[occ as usize]
        })
        .collect())
}

mod block;
mod sum;

pub use block::{block_primitive, BlockMarks};
pub use sum::chain_sum_mod_k;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;

    fn line(m: usize) -> Vec<GridCoord> {
        (0..m as i32).map(|q| GridCoord::new(q, 0)).collect()
    }

    fn run_line(m: usize, r: usize) -> PascRun {
        let mut world = AmoebotWorld::load(line(m), 2, 11).unwrap();
        let chain = ChainRef::simple(line(m), r);
        pasc_run(&mut world, &chain).unwrap()
    }

    #[test]
    fn single_amoebot_zero_iterations() {
        let out = run_line(1, 0);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.ids[0].bits.len(), 0);
        assert_eq!(out.values[0], 0);
    }

    #[test]
    fn five_chain_reference_front() {
        let out = run_line(5, 0);
        assert_eq!(out.iterations, 3);
        let got: Vec<i64> = out.values.clone();
        assert_eq!(got, vec![0, 1, 2, 3, 4]);
        // Nominal 3-bit identifiers match i - r mod 8.
        for (i, id) in out.ids.iter().enumerate() {
            assert_eq!(id.bits.len(), 3);
            assert_eq!(id.value().rem_euclid(8), (i as i64).rem_euclid(8));
        }
    }

    #[test]
    fn four_chain_reference_back() {
        let out = run_line(4, 3);
        assert_eq!(out.iterations, 2);
        assert_eq!(out.values, vec![-3, -2, -1, 0]);
        // Position 2 reads all ones in the nominal width.
        assert_eq!(out.ids[2].bits, vec![true, true]);
        assert_eq!(out.ids[2].value(), -1);
    }

    #[test]
    fn replay_reports_single_bits() {
        let mut world = AmoebotWorld::load(line(5), 2, 11).unwrap();
        let chain = ChainRef::simple(line(5), 0);
        let b0 = pasc_replay(&mut world, &chain, 0).unwrap();
        assert_eq!(b0, vec![false, true, false, true, false]);
        let b2 = pasc_replay(&mut world, &chain, 2).unwrap();
        assert_eq!(b2, vec![false, false, false, false, true]);
        assert!(matches!(
            pasc_replay(&mut world, &chain, 3),
            Err(AlgoError::BitIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn identifier_exactness_and_iteration_count() {
        for m in 1..=24usize {
            for r in 0..m {
                let out = run_line(m, r);
                // Termination by silence can beat the ceil(log2 m) bound
                // for interior references (m=3, r=1 finishes in one
                // iteration); endpoint references attain it exactly.
                assert!(out.iterations <= ceil_log2(m), "m={m} r={r}");
                if r == 0 || r + 1 == m {
                    assert_eq!(out.iterations, ceil_log2(m), "m={m} r={r}");
                }
                let width = ceil_log2(m);
                for (i, &v) in out.values.iter().enumerate() {
                    assert_eq!(v, i as i64 - r as i64, "m={m} r={r} i={i}");
                    assert_eq!(
                        out.ids[i],
                        Identifier::encode(i as i64 - r as i64, width),
                        "m={m} r={r} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn active_count_halves_per_iteration() {
        // Monotone passivation is tested through the bit streams: position i
        // passivates in the iteration of its lowest set bit of i (for r=0),
        // so counts of active seats per iteration are ceil(m / 2^t).
        let m = 13;
        let out = run_line(m, 0);
        for t in 1..=out.iterations {
            let active = (0..m).filter(|&i| i % (1 << t) == 0).count();
            assert_eq!(active, m.div_ceil(1 << t), "t={t}");
        }
    }
}
