//! Symmetry detection by comparing canonical skeleton paths as strings.
//!
//! Rotating the skeleton direction rotates the construction and flipping
//! the sign mirrors it, so a symmetric structure yields congruent skeleton
//! paths whose per-visit successor codes match. Each visit stores a 3-bit
//! code: the number of 60-degree steps, counted with the skeleton's
//! handedness, from the path direction to its successor direction. Two
//! paths compare as strings: equal lengths are verified with PASC, short
//! strings deterministically, long ones with probabilistic polynomial
//! identity testing over a sampled prime (one-sided error).

mod blockvm;
mod equality;
mod pit;

pub use blockvm::{CellSeat, Reg, VmOp};
pub use equality::{LengthCompare, StreamCompare, TailProbe, Verdict, ETA};
pub use pit::{Ann, CellIndex, Instr, PitProgram, TDeposit};

use std::sync::Arc;

use crate::engine::AmoebotWorld;
use crate::error::AlgoError;
use crate::grid::{Direction, Sign, ESE, N, S};
use crate::pasc::{block_primitive, ceil_log2, ChainRef, Seat, SeatLink, SeatVec};
use crate::skeleton::{canonical_skeleton, path_direction, skeleton_path, Skeleton};

/// A skeleton path together with its per-position codes.
#[derive(Clone, Debug)]
pub struct EncodedPath {
    pub chain: ChainRef,
    pub codes: Vec<u8>,
}

/// Successor-direction code of one visit: steps from the path direction to
/// the successor direction, counted counterclockwise for plus handedness
/// and clockwise for minus.
pub fn direction_code(succ_dir: u8, path_dir: Direction, s: Sign) -> u8 {
    let dp = path_dir.main_index().unwrap() as u8;
    match s {
        Sign::Plus => (6 + succ_dir - dp) % 6,
        Sign::Minus => (6 + dp - succ_dir) % 6,
    }
}

/// Encode a computed skeleton's canonical path.
pub fn encode_skeleton_path(world: &AmoebotWorld, sk: &Skeleton) -> EncodedPath {
    let chain = skeleton_path(world, sk);
    let path_dir = path_direction(sk.d, sk.s);
    let mut codes = Vec::with_capacity(chain.len());
    let (mut a, mut v) = sk.split;
    for _ in 0..chain.len() {
        let visit = sk.visits[a][v];
        codes.push(direction_code(visit.out_dir, path_dir, sk.s));
        if world.st.len() == 1 {
            break;
        }
        let next = world
            .st
            .neighbor_index(a, visit.out_dir as usize)
            .expect("walk follows bonds");
        let want = ((visit.out_dir + 3) % 6, !visit.out_plus);
        let nv = sk.visits[next]
            .iter()
            .position(|x| (x.in_dir, x.in_plus) == want)
            .expect("matching arrival");
        a = next;
        v = nv;
    }
    EncodedPath { chain, codes }
}

/// Compact per-amoebot seat lists for a chain (no phantom seats) plus the
/// position-to-seat mapping.
pub(crate) fn compact_seats(
    st: &crate::engine::Structure,
    chain: &ChainRef,
) -> (Vec<SeatVec>, Vec<(usize, usize)>) {
    let n = st.len();
    let mut seats: Vec<SeatVec> = vec![SeatVec::default(); n];
    let mut place: Vec<(usize, usize)> = Vec::with_capacity(chain.len());
    for (pos, &(coord, _)) in chain.positions.iter().enumerate() {
        let idx = st.index_of(coord).expect("chain on structure");
        let mut seat = Seat {
            pred: None,
            succ: None,
            is_ref: pos == 0,
        };
        if pos > 0 {
            let (pc, _) = chain.positions[pos - 1];
            let d = crate::pasc::direction_between(pc, coord).unwrap();
            seat.pred = Some(SeatLink {
                dir: d.opposite().main_index().unwrap() as u8,
                bank: chain.banks[pos - 1],
            });
        }
        if pos + 1 < chain.len() {
            let (nc, _) = chain.positions[pos + 1];
            let d = crate::pasc::direction_between(coord, nc).unwrap();
            seat.succ = Some(SeatLink {
                dir: d.main_index().unwrap() as u8,
                bank: chain.banks[pos],
            });
        }
        place.push((idx, seats[idx].len()));
        seats[idx].push(seat);
    }
    (seats, place)
}

/// Cell seats (block-machine positions) for a chain with codes.
pub(crate) fn cell_seats(
    st: &crate::engine::Structure,
    path: &EncodedPath,
) -> (Vec<Vec<CellSeat>>, Vec<(usize, usize)>) {
    let (svs, place) = compact_seats(st, &path.chain);
    let mut cells: Vec<Vec<CellSeat>> = vec![Vec::new(); st.len()];
    for (pos, &(idx, seat_idx)) in place.iter().enumerate() {
        let seat = svs[idx].seats[seat_idx];
        debug_assert_eq!(cells[idx].len(), seat_idx);
        cells[idx].push(CellSeat::new(
            seat.pred,
            seat.succ,
            pos == 0,
            pos + 1 == path.chain.len(),
            path.codes[pos],
        ));
    }
    (cells, place)
}

/// All global constants of one equality instance.
#[derive(Clone, Copy, Debug)]
pub struct EqualityInstance {
    pub m: usize,
    pub t: u32,
    pub l: u8,
    pub lambda: usize,
    pub k: usize,
    pub reps: u32,
}

impl EqualityInstance {
    pub fn for_length(m: usize, t: u32, c: u32) -> Self {
        let l = (ceil_log2(m.max(2)) + 2) as u8;
        let lambda = 2 * l as usize;
        let k = 1usize << ceil_log2(lambda);
        EqualityInstance {
            m,
            t,
            l,
            lambda,
            k,
            reps: c * ceil_log2(m.max(2)) as u32,
        }
    }
}

const CTR_ATT: u8 = 0;
const CTR_REP: u8 = 1;
const CTR_PIT: u8 = 2;
const CTR_REJ: u8 = 3;

fn push_mulmod(p: &mut Vec<Instr>, vm: fn(VmOp) -> Instr, a: Reg, b: Reg, l: u8) {
    // X := a * b mod P, most significant multiplier bit first.
    p.push(vm(VmOp::Zero(Reg::X)));
    for s in (0..l).rev() {
        p.push(vm(VmOp::ShiftUp(Reg::X)));
        p.push(vm(VmOp::Cmp(Reg::X, Reg::P)));
        p.push(vm(VmOp::SubIfGe(Reg::X, Reg::P)));
        p.push(vm(VmOp::BcastBit(b, s)));
        p.push(vm(VmOp::AddIfScratch(Reg::X, a)));
        p.push(vm(VmOp::Cmp(Reg::X, Reg::P)));
        p.push(vm(VmOp::SubIfGe(Reg::X, Reg::P)));
    }
}

fn push_divtest(p: &mut Vec<Instr>, l: u8, skip_block0: bool, attempt_label: usize) {
    let vm = Instr::VmA;
    p.push(vm(VmOp::Copy(Reg::X, Reg::P)));
    p.push(vm(VmOp::Copy(Reg::U, Reg::T)));
    for _ in 0..l - 1 {
        p.push(vm(VmOp::ShiftUp(Reg::U)));
    }
    for _ in 0..l {
        p.push(vm(VmOp::Cmp(Reg::X, Reg::U)));
        p.push(vm(VmOp::SubIfGe(Reg::X, Reg::U)));
        p.push(vm(VmOp::ShiftDown(Reg::U)));
    }
    p.push(vm(VmOp::ZeroTest(Reg::X)));
    p.push(Instr::Announce(Ann::Composite { skip_block0 }));
    p.push(Instr::BranchObserved(attempt_label));
    p.push(vm(VmOp::Inc(Reg::T)));
}

fn push_eval(p: &mut Vec<Instr>, chain_b: bool, inst: &EqualityInstance) {
    let vm: fn(VmOp) -> Instr = if chain_b { Instr::VmB } else { Instr::VmA };
    let l = inst.l;
    let lgk = ceil_log2(inst.k) as u8;
    // Pow := R^T mod P.
    p.push(vm(VmOp::One(Reg::Pow)));
    p.push(vm(VmOp::Copy(Reg::U, Reg::R)));
    for s in 0..l {
        p.push(vm(VmOp::BcastBit(Reg::T, s)));
        p.push(vm(VmOp::SaveScratchCond));
        push_mulmod(p, vm, Reg::Pow, Reg::U, l);
        p.push(vm(VmOp::CopyIfCond(Reg::Pow, Reg::X)));
        push_mulmod(p, vm, Reg::U, Reg::U, l);
        p.push(vm(VmOp::Copy(Reg::U, Reg::X)));
    }
    // Sum over the block's digits.
    p.push(vm(VmOp::Zero(Reg::Sum)));
    p.push(Instr::SetCtr(CTR_REP, 0));
    let loop_top = p.len();
    p.push(if chain_b {
        Instr::VmBDigitAt(CTR_REP)
    } else {
        Instr::VmADigitAt(CTR_REP)
    });
    // Term := Pow * digit.
    p.push(vm(VmOp::Zero(Reg::Term)));
    p.push(vm(VmOp::Copy(Reg::X, Reg::Pow)));
    for b in 0..3 {
        p.push(vm(VmOp::CondFromDigitBit(b)));
        p.push(vm(VmOp::AddIfCond(Reg::Term, Reg::X)));
        p.push(vm(VmOp::Cmp(Reg::Term, Reg::P)));
        p.push(vm(VmOp::SubIfGe(Reg::Term, Reg::P)));
        p.push(vm(VmOp::ShiftUp(Reg::X)));
        p.push(vm(VmOp::Cmp(Reg::X, Reg::P)));
        p.push(vm(VmOp::SubIfGe(Reg::X, Reg::P)));
    }
    p.push(vm(VmOp::Add(Reg::Sum, Reg::Term)));
    p.push(vm(VmOp::Cmp(Reg::Sum, Reg::P)));
    p.push(vm(VmOp::SubIfGe(Reg::Sum, Reg::P)));
    // Pow := Pow * R.
    push_mulmod(p, vm, Reg::Pow, Reg::R, l);
    p.push(vm(VmOp::Copy(Reg::Pow, Reg::X)));
    p.push(Instr::IncCtr(CTR_REP));
    p.push(Instr::BranchCtrLt(CTR_REP, inst.k as u32, loop_top));
    // Fold the block sums into block zero.
    p.push(Instr::FoldInit { chain_b });
    let levels = (inst.t + 1).saturating_sub(lgk as u32).max(1);
    for level in 0..levels {
        p.push(Instr::FoldLevel {
            chain_b,
            tbit: lgk + level as u8,
        });
        p.push(Instr::FoldTransfer { chain_b, bits: l });
        p.push(vm(VmOp::Add(Reg::Sum, Reg::U)));
        p.push(vm(VmOp::Cmp(Reg::Sum, Reg::P)));
        p.push(vm(VmOp::SubIfGe(Reg::Sum, Reg::P)));
    }
}

/// The complete PIT program for one instance, including prime generation.
pub fn build_pit_program(inst: &EqualityInstance, c: u32) -> Arc<Vec<Instr>> {
    let l = inst.l;
    let mut p: Vec<Instr> = Vec::new();
    let max_attempts = 3 * c * (l as u32) * (l as u32);
    // Save the pristine block index for divisor restarts.
    p.push(Instr::VmA(VmOp::Copy(Reg::Pow, Reg::T)));
    p.push(Instr::SetCtr(CTR_ATT, 0));
    let attempt_top = p.len();
    // Exhaustion check.
    p.push(Instr::BranchCtrLt(CTR_ATT, max_attempts, p.len() + 2));
    p.push(Instr::HaltError);
    p.push(Instr::IncCtr(CTR_ATT));
    p.push(Instr::VmA(VmOp::Copy(Reg::T, Reg::Pow)));
    p.push(Instr::VmA(VmOp::SampleBits(Reg::P, l, true)));
    p.push(Instr::Stream {
        from_b: false,
        src: Reg::P,
        dst: Reg::P,
        bits: l,
        cap_a: true,
        cap_b: true,
        cap_block0_only: false,
    });
    push_divtest(&mut p, l, true, attempt_top);
    push_divtest(&mut p, l, true, attempt_top);
    p.push(Instr::SetCtr(CTR_REP, 2));
    let div_top = p.len();
    push_divtest(&mut p, l, false, attempt_top);
    p.push(Instr::IncCtr(CTR_REP));
    p.push(Instr::BranchCtrLt(CTR_REP, inst.k as u32, div_top));
    // Prime found; restore T and run the repetition loop.
    p.push(Instr::VmA(VmOp::Copy(Reg::T, Reg::Pow)));
    p.push(Instr::SetCtr(CTR_PIT, 0));
    let pit_top = p.len();
    p.push(Instr::SetCtr(CTR_REJ, 0));
    let sample_top = p.len();
    p.push(Instr::VmA(VmOp::SampleBits(Reg::R, l, false)));
    p.push(Instr::VmA(VmOp::Cmp(Reg::R, Reg::P)));
    p.push(Instr::Announce(Ann::RejectR));
    let not_obs_patch = p.len();
    p.push(Instr::BranchNotObserved(usize::MAX));
    p.push(Instr::IncCtr(CTR_REJ));
    p.push(Instr::BranchCtrLt(CTR_REJ, 48, sample_top));
    p.push(Instr::VmA(VmOp::Zero(Reg::R)));
    let r_ok = p.len();
    p[not_obs_patch] = Instr::BranchNotObserved(r_ok);
    p.push(Instr::Stream {
        from_b: false,
        src: Reg::R,
        dst: Reg::R,
        bits: l,
        cap_a: true,
        cap_b: true,
        cap_block0_only: false,
    });
    push_eval(&mut p, false, inst);
    push_eval(&mut p, true, inst);
    p.push(Instr::Stream {
        from_b: true,
        src: Reg::Sum,
        dst: Reg::X,
        bits: l,
        cap_a: true,
        cap_b: false,
        cap_block0_only: true,
    });
    p.push(Instr::VmA(VmOp::Cmp(Reg::Sum, Reg::X)));
    p.push(Instr::Announce(Ann::Unequal));
    let uneq_patch = p.len();
    p.push(Instr::BranchObserved(usize::MAX));
    p.push(Instr::IncCtr(CTR_PIT));
    p.push(Instr::BranchCtrLt(CTR_PIT, inst.reps.max(1), pit_top));
    p.push(Instr::Halt(Verdict::Equal));
    let uneq = p.len();
    p[uneq_patch] = Instr::BranchObserved(uneq);
    p.push(Instr::Halt(Verdict::Unequal));
    Arc::new(p)
}

/// Distributed string equality between two encoded paths living in the
/// same world. One-sided: equal strings never compare unequal.
pub fn string_equality(
    world: &mut AmoebotWorld,
    a: &EncodedPath,
    b: &EncodedPath,
    c: u32,
) -> Result<(Verdict, EqualityPath), AlgoError> {
    let (sa, place_a) = compact_seats(&world.st, &a.chain);
    let (sb, place_b) = compact_seats(&world.st, &b.chain);

    // Length comparison.
    let programs: Vec<LengthCompare> = (0..world.st.len())
        .map(|i| LengthCompare::new(sa[i], sb[i]))
        .collect();
    let budget = 12 * (ceil_log2(a.chain.len().max(b.chain.len()).max(2)) as u64 + 4) + 40;
    let mut phase = world.phase(programs, 0x71);
    phase.run_to_completion(budget)?;
    let lp = phase.finish();
    let mismatch = lp.iter().any(|p| p.mismatch);
    let t = lp.iter().map(|p| p.iterations).max().unwrap_or(1) - 1;
    if mismatch {
        return Ok((Verdict::Unequal, EqualityPath::Length));
    }
    debug_assert_eq!(a.chain.len(), b.chain.len());
    let m = a.chain.len();

    // Deterministic short path through the η gate.
    let probe: Vec<TailProbe> = (0..world.st.len())
        .map(|i| TailProbe::new(sa[i], (ETA - 1) as u32))
        .collect();
    let mut phase = world.phase(probe, 0x72);
    phase.run_to_completion(6 * ETA as u64 + 12)?;
    let probes = phase.finish();
    let small = probes.iter().any(|p| p.reached_tail);

    if small {
        let ca = seat_codes(&place_a, &a.codes, world.st.len());
        let cb = seat_codes(&place_b, &b.codes, world.st.len());
        let programs: Vec<StreamCompare> = (0..world.st.len())
            .map(|i| StreamCompare::new(sa[i], sb[i], ca[i], cb[i], 0))
            .collect();
        let mut phase = world.phase(programs, 0x73);
        phase.run_to_completion(14 * (m as u64 + 2) + 24)?;
        let sc = phase.finish();
        let mismatch = sc.iter().any(|p| p.mismatch);
        return Ok((
            if mismatch {
                Verdict::Unequal
            } else {
                Verdict::Equal
            },
            EqualityPath::Deterministic,
        ));
    }

    // Block decomposition of both chains.
    let inst = EqualityInstance::for_length(m, t, c);
    let marks_a = block_primitive(world, &a.chain, inst.lambda)?;
    let marks_b = block_primitive(world, &b.chain, inst.lambda)?;
    debug_assert_eq!(marks_a.block_len, inst.k);
    debug_assert_eq!(marks_b.block_len, inst.k);

    let (mut cells_a, _) = cell_seats(&world.st, a);
    let (mut cells_b, _) = cell_seats(&world.st, b);
    for (pos, &(idx, s)) in place_a.iter().enumerate() {
        cells_a[idx][s].block_head = marks_a.marks[pos];
    }
    for (pos, &(idx, s)) in place_b.iter().enumerate() {
        cells_b[idx][s].block_head = marks_b.marks[pos];
    }

    // Cell indexing and exponent deposits, per chain.
    for (cells, label) in [(&mut cells_a, 0x74u64), (&mut cells_b, 0x75)] {
        let programs: Vec<CellIndex> = cells
            .iter()
            .map(|c| CellIndex::new(c.clone(), inst.k as u32))
            .collect();
        let mut phase = world.phase(programs, label);
        phase.run_to_completion(3 * inst.k as u64 + 24)?;
        for (i, p) in phase.finish().into_iter().enumerate() {
            cells[i] = p.seats;
        }
    }
    for (cells, label) in [(&mut cells_a, 0x76u64), (&mut cells_b, 0x77)] {
        let programs: Vec<TDeposit> = cells
            .iter()
            .map(|c| TDeposit::new(c.clone(), t + 1))
            .collect();
        let mut phase = world.phase(programs, label);
        phase.run_to_completion(6 * (t as u64 + 2) + 24)?;
        for (i, p) in phase.finish().into_iter().enumerate() {
            cells[i] = p.seats;
        }
    }

    // Remainder positions (incomplete tail blocks) compare directly.
    let remainder_from = (m / inst.k * inst.k) as u32;
    if remainder_from < m as u32 {
        let ca = seat_codes(&place_a, &a.codes, world.st.len());
        let cb = seat_codes(&place_b, &b.codes, world.st.len());
        let programs: Vec<StreamCompare> = (0..world.st.len())
            .map(|i| StreamCompare::new(sa[i], sb[i], ca[i], cb[i], remainder_from))
            .collect();
        let mut phase = world.phase(programs, 0x78);
        phase.run_to_completion(14 * (m as u64 + 2) + 24)?;
        let sc = phase.finish();
        if sc.iter().any(|p| p.mismatch) {
            return Ok((Verdict::Unequal, EqualityPath::Pit));
        }
    }

    // The PIT itself.
    let prog = build_pit_program(&inst, c);
    let programs: Vec<PitProgram> = (0..world.st.len())
        .map(|i| PitProgram::new(cells_a[i].clone(), cells_b[i].clone(), prog.clone()))
        .collect();
    let l64 = inst.l as u64;
    let budget = 200 * l64 * l64 * (inst.reps as u64 + 3 * c as u64 * l64) + 4000;
    let mut phase = world.phase(programs, 0x79);
    phase.run_to_completion(budget)?;
    let pp = phase.finish();
    if pp.iter().any(|p| p.failed) {
        return Err(AlgoError::PrimeGenerationExhausted(
            (3 * c * inst.l as u32 * inst.l as u32) as usize,
        ));
    }
    let verdict = pp
        .iter()
        .find_map(|p| p.verdict)
        .expect("pit produced a verdict");
    debug_assert!(pp.iter().all(|p| p.verdict == Some(verdict)));
    Ok((verdict, EqualityPath::Pit))
}

/// Which comparison path decided the verdict.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EqualityPath {
    Length,
    Deterministic,
    Pit,
}

fn seat_codes(
    place: &[(usize, usize)],
    codes: &[u8],
    n: usize,
) -> Vec<[u8; crate::pasc::MAX_SEATS]> {
    let mut out = vec![[0u8; crate::pasc::MAX_SEATS]; n];
    for (pos, &(idx, s)) in place.iter().enumerate() {
        out[idx][s] = codes[pos];
    }
    out
}

/// Symmetry report from the detector.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct DetectedSymmetries {
    pub rot2: bool,
    pub rot3: bool,
    pub rot6: bool,
    pub reflect: [bool; 12],
    pub rounds: u64,
}

/// Detect rotational and reflection symmetries by comparing canonical
/// skeleton paths.
pub fn detect_symmetries(
    world: &mut AmoebotWorld,
    c: u32,
    phase_budget: u32,
) -> Result<DetectedSymmetries, AlgoError> {
    let start = world.round;
    let encode =
        |world: &mut AmoebotWorld, d: Direction, s: Sign| -> Result<EncodedPath, AlgoError> {
            let sk = canonical_skeleton(world, d, s, phase_budget)?;
            Ok(encode_skeleton_path(world, &sk))
        };
    let n_plus = encode(world, N, Sign::Plus)?;
    let s_plus = encode(world, S, Sign::Plus)?;
    let ese_plus = encode(world, ESE, Sign::Plus)?;
    let rot2 = string_equality(world, &n_plus, &s_plus, c)?.0 == Verdict::Equal;
    let rot3 = string_equality(world, &n_plus, &ese_plus, c)?.0 == Verdict::Equal;
    let rot6 = rot2 && rot3;
    let mut reflect = [false; 12];
    for axis in 0..6u8 {
        // A reflection fixing the structure maps the (d,+)-construction to
        // the (phi(d),-)-construction; the two are comparable exactly when
        // d lies along the mirror axis, so the (d,+)/(d,-) pair certifies
        // the axis through d itself.
        let d = Direction::from_ring(axis);
        let plus = encode(world, d, Sign::Plus)?;
        let minus = encode(world, d, Sign::Minus)?;
        let eq = string_equality(world, &plus, &minus, c)?.0 == Verdict::Equal;
        reflect[axis as usize] = eq;
        reflect[axis as usize + 6] = eq;
    }
    Ok(DetectedSymmetries {
        rot2,
        rot3,
        rot6,
        reflect,
        rounds: world.round - start,
    })
}

/// Distributed prime generation on a chain: the public contract of the
/// sampling loop. Returns the prime assembled from block zero.
pub fn generate_prime(
    world: &mut AmoebotWorld,
    path: &EncodedPath,
    c: u32,
) -> Result<u64, AlgoError> {
    let m = path.chain.len();
    let t = ceil_log2(m.max(2)) as u32 + 1;
    let inst = EqualityInstance::for_length(m, t, c);
    let cells = prepared_cells(world, path, &inst, t)?;
    // Prime generation section only: build a program that halts after the
    // divisor loop.
    let l = inst.l;
    let mut p: Vec<Instr> = Vec::new();
    p.push(Instr::VmA(VmOp::Copy(Reg::Pow, Reg::T)));
    p.push(Instr::SetCtr(CTR_ATT, 0));
    let attempt_top = p.len();
    p.push(Instr::BranchCtrLt(
        CTR_ATT,
        3 * c * (l as u32) * (l as u32),
        p.len() + 2,
    ));
    p.push(Instr::HaltError);
    p.push(Instr::IncCtr(CTR_ATT));
    p.push(Instr::VmA(VmOp::Copy(Reg::T, Reg::Pow)));
    p.push(Instr::VmA(VmOp::SampleBits(Reg::P, l, true)));
    p.push(Instr::Stream {
        from_b: false,
        src: Reg::P,
        dst: Reg::P,
        bits: l,
        cap_a: true,
        cap_b: false,
        cap_block0_only: false,
    });
    push_divtest(&mut p, l, true, attempt_top);
    push_divtest(&mut p, l, true, attempt_top);
    p.push(Instr::SetCtr(CTR_REP, 2));
    let div_top = p.len();
    push_divtest(&mut p, l, false, attempt_top);
    p.push(Instr::IncCtr(CTR_REP));
    p.push(Instr::BranchCtrLt(CTR_REP, inst.k as u32, div_top));
    p.push(Instr::Halt(Verdict::Equal));
    let prog = Arc::new(p);

    let programs: Vec<PitProgram> = (0..world.st.len())
        .map(|i| PitProgram::new(cells[i].clone(), Vec::new(), prog.clone()))
        .collect();
    let l64 = l as u64;
    let budget = 120 * l64 * l64 * (3 * c as u64 * l64) + 4000;
    let mut phase = world.phase(programs, 0x7a);
    phase.run_to_completion(budget)?;
    let pp = phase.finish();
    if pp.iter().any(|p| p.failed) {
        return Err(AlgoError::PrimeGenerationExhausted(
            (3 * c * l as u32 * l as u32) as usize,
        ));
    }
    Ok(harvest_register(&pp, Reg::P))
}

/// Distributed polynomial evaluation: every complete block contributes its
/// digit terms and the folded total lands in block zero.
pub fn evaluate_polynomial(
    world: &mut AmoebotWorld,
    path: &EncodedPath,
    p_val: u64,
    r_val: u64,
) -> Result<u64, AlgoError> {
    let m = path.chain.len();
    let t = ceil_log2(m.max(2)) as u32 + 1;
    let inst = EqualityInstance::for_length(m, t, 2);
    let mut cells = prepared_cells(world, path, &inst, t)?;
    for per in cells.iter_mut() {
        for s in per.iter_mut() {
            s.set_bit(Reg::P, p_val >> s.cell & 1 == 1);
            s.set_bit(Reg::R, r_val >> s.cell & 1 == 1);
        }
    }
    let mut prog: Vec<Instr> = Vec::new();
    push_eval(&mut prog, false, &inst);
    prog.push(Instr::Halt(Verdict::Equal));
    let prog = Arc::new(prog);
    let programs: Vec<PitProgram> = (0..world.st.len())
        .map(|i| PitProgram::new(cells[i].clone(), Vec::new(), prog.clone()))
        .collect();
    let l64 = inst.l as u64;
    let budget = 400 * l64 * l64 + 40 * l64 * inst.k as u64 + 4000;
    let mut phase = world.phase(programs, 0x7b);
    phase.run_to_completion(budget)?;
    let pp = phase.finish();
    Ok(harvest_register(&pp, Reg::Sum))
}

fn prepared_cells(
    world: &mut AmoebotWorld,
    path: &EncodedPath,
    inst: &EqualityInstance,
    t: u32,
) -> Result<Vec<Vec<CellSeat>>, AlgoError> {
    let marks = block_primitive(world, &path.chain, inst.lambda)?;
    let (mut cells, place) = cell_seats(&world.st, path);
    for (pos, &(idx, s)) in place.iter().enumerate() {
        cells[idx][s].block_head = marks.marks[pos];
    }
    let programs: Vec<CellIndex> = cells
        .iter()
        .map(|c| CellIndex::new(c.clone(), inst.k as u32))
        .collect();
    let mut phase = world.phase(programs, 0x7c);
    phase.run_to_completion(3 * inst.k as u64 + 24)?;
    for (i, p) in phase.finish().into_iter().enumerate() {
        cells[i] = p.seats;
    }
    let programs: Vec<TDeposit> = cells
        .iter()
        .map(|c| TDeposit::new(c.clone(), t + 1))
        .collect();
    let mut phase = world.phase(programs, 0x7d);
    phase.run_to_completion(6 * (t as u64 + 2) + 24)?;
    for (i, p) in phase.finish().into_iter().enumerate() {
        cells[i] = p.seats;
    }
    Ok(cells)
}

fn harvest_register(programs: &[PitProgram], reg: Reg) -> u64 {
    let mut v = 0u64;
    for p in programs {
        for s in &p.a {
            if s.in_block0 && s.complete && s.bit(reg) {
                v |= 1 << s.cell;
            }
        }
    }
    v
}

/// Arithmetic-level reference for the identity test, used by statistics in
/// the acceptance suite: sampling follows the same distribution as the
/// distributed protocol.
pub mod pit_oracle {
    use rand::Rng;

    pub fn is_prime(x: u64) -> bool {
        if x < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= x {
            if x % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    /// Sample an l-bit candidate with the top bit fixed until prime.
    pub fn sample_prime(l: u32, rng: &mut impl Rng) -> u64 {
        loop {
            let p = (1 << (l - 1)) | rng.random_range(0..(1u64 << (l - 1)));
            if is_prime(p) {
                return p;
            }
        }
    }

    /// Horner evaluation of the digit polynomial mod p.
    pub fn eval(digits: &[u8], r: u64, p: u64) -> u64 {
        let mut acc = 0u128;
        for &d in digits.iter().rev() {
            acc = (acc * r as u128 + d as u128) % p as u128;
        }
        acc as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_world(m: usize, seed: u64) -> AmoebotWorld {
        let coords: Vec<GridCoord> = (0..m as i32).map(|q| GridCoord::new(q, 0)).collect();
        AmoebotWorld::load(coords, 4, seed).unwrap()
    }

    fn line_path(m: usize, codes: Vec<u8>, reverse: bool) -> EncodedPath {
        let coords: Vec<GridCoord> = if reverse {
            (0..m as i32).rev().map(|q| GridCoord::new(q, 0)).collect()
        } else {
            (0..m as i32).map(|q| GridCoord::new(q, 0)).collect()
        };
        let mut chain = ChainRef::simple(coords.clone(), 0);
        chain.banks = coords
            .windows(2)
            .map(|w| {
                let d = crate::pasc::direction_between(w[0], w[1]).unwrap();
                crate::pasc::bank_for_direction(d)
            })
            .collect();
        EncodedPath { chain, codes }
    }

    #[test]
    fn distributed_evaluation_matches_horner_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..3 {
            let m = 48 + 8 * trial;
            let digits: Vec<u8> = (0..m).map(|_| rng.random_range(0..8)).collect();
            let t = ceil_log2(m.max(2)) as u32 + 1;
            let inst = EqualityInstance::for_length(m, t, 2);
            let p = pit_oracle::sample_prime(inst.l as u32, &mut rng);
            let r = rng.random_range(0..p);
            let mut world = line_world(m, 77 + trial as u64);
            let path = line_path(m, digits.clone(), false);
            let got = evaluate_polynomial(&mut world, &path, p, r).unwrap();
            // The distributed run covers only the complete blocks.
            let trunc = m / inst.k * inst.k;
            let want = pit_oracle::eval(&digits[..trunc], r, p);
            assert_eq!(got, want, "trial {trial} m={m} p={p} r={r}");
        }
    }

    #[test]
    fn generated_primes_are_prime_and_in_range() {
        for seed in 0..6u64 {
            let m = if seed % 2 == 0 {
                64
            } else {
                50 + 10 * (seed as usize % 3)
            };
            let mut world = line_world(m, 1000 + seed);
            let codes = vec![0u8; m];
            let path = line_path(m, codes, false);
            let p = generate_prime(&mut world, &path, 2).unwrap();
            assert!(pit_oracle::is_prime(p), "seed={seed} p={p}");
            // p lies in [2^(l-1), 2^l); that interval equals [2m, 4m)
            // exactly when m is a power of two and sits within [2m, 8m)
            // otherwise.
            let l = EqualityInstance::for_length(m, 8, 2).l as u32;
            assert!(p as usize >= 2 * m, "seed={seed} p={p} m={m}");
            assert!(p < 1u64 << l, "seed={seed} p={p} m={m}");
            if m.is_power_of_two() {
                assert!((p as usize) < 4 * m, "seed={seed} p={p} m={m}");
            }
        }
    }

    #[test]
    fn equal_strings_compare_equal_deterministically() {
        let m = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let codes: Vec<u8> = (0..m).map(|_| rng.random_range(0..6)).collect();
        let mut world = line_world(m, 3);
        let a = line_path(m, codes.clone(), false);
        // Same string carried by the reversed walk over the same bonds.
        let b = line_path(m, codes, true);
        let (v, path) = string_equality(&mut world, &a, &b, 2).unwrap();
        assert_eq!(v, Verdict::Equal);
        assert_eq!(path, EqualityPath::Deterministic);
    }

    #[test]
    fn unequal_strings_detected_deterministically() {
        let m = 20;
        let codes: Vec<u8> = (0..m).map(|i| (i % 6) as u8).collect();
        let mut altered = codes.clone();
        altered[7] = (altered[7] + 1) % 6;
        let mut world = line_world(m, 3);
        let a = line_path(m, codes, false);
        let b = line_path(m, altered, true);
        let (v, _) = string_equality(&mut world, &a, &b, 2).unwrap();
        assert_eq!(v, Verdict::Unequal);
    }

    #[test]
    fn different_lengths_fail_the_length_check() {
        let m = 16;
        let mut world = line_world(m, 3);
        let a = line_path(m, vec![0; m], false);
        // B uses only a prefix of the line, reversed.
        let coords: Vec<GridCoord> = (0..12i32).rev().map(|q| GridCoord::new(q, 0)).collect();
        let mut chain = ChainRef::simple(coords.clone(), 0);
        chain.banks = coords
            .windows(2)
            .map(|w| {
                let d = crate::pasc::direction_between(w[0], w[1]).unwrap();
                crate::pasc::bank_for_direction(d)
            })
            .collect();
        let b = EncodedPath {
            chain,
            codes: vec![0; 12],
        };
        let (v, path) = string_equality(&mut world, &a, &b, 2).unwrap();
        assert_eq!(v, Verdict::Unequal);
        assert_eq!(path, EqualityPath::Length);
    }

    #[test]
    fn long_equal_strings_take_the_pit_path() {
        let m = 52;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let codes: Vec<u8> = (0..m).map(|_| rng.random_range(0..6)).collect();
        let mut world = line_world(m, 3);
        let a = line_path(m, codes.clone(), false);
        let b = line_path(m, codes, true);
        let (v, path) = string_equality(&mut world, &a, &b, 2).unwrap();
        assert_eq!(v, Verdict::Equal);
        assert_eq!(path, EqualityPath::Pit);
    }

    #[test]
    fn long_unequal_strings_detected() {
        let m = 52;
        let codes: Vec<u8> = (0..m).map(|i| (i % 5) as u8).collect();
        let mut altered = codes.clone();
        altered[10] = (altered[10] + 3) % 6;
        let mut world = line_world(m, 3);
        let a = line_path(m, codes, false);
        let b = line_path(m, altered, true);
        let (v, _) = string_equality(&mut world, &a, &b, 2).unwrap();
        assert_eq!(v, Verdict::Unequal);
    }
}
