//! The synchronous round machine.
//!
//! A round activates every amoebot program with the beeps it received at the
//! end of the previous round, applies all resulting pin reconfigurations
//! simultaneously, recomputes circuits on the updated configurations and
//! propagates this round's beeps on them. Programs see only local data:
//! their own state, their neighbor mask, their received beeps, and a private
//! random stream, so activation order can never matter.

mod circuits;
mod pins;

pub use circuits::{compute_circuits, propagate, CircuitGraph};
pub use pins::{pin_index, Action, PinConfig, MAX_PINS_PER_BOND, NO_SET};

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::WorldError;
use crate::grid::{Direction, GridCoord};

/// A bond between two occupied nodes. `dir` is the main-direction index from
/// `a` to `b`.
#[derive(Clone, Copy, Debug)]
pub struct Bond {
    pub a: u32,
    pub b: u32,
    pub dir: u8,
}

/// The static amoebot structure: occupied nodes, adjacency, and the pin
/// count per bond. Never changes after loading.
#[derive(Clone, Debug)]
pub struct Structure {
    coords: Vec<GridCoord>,
    index: HashMap<GridCoord, u32>,
    /// Neighbor amoebot index per main direction, `u32::MAX` when empty.
    neighbors: Vec<[u32; 6]>,
    masks: Vec<[bool; 6]>,
    pub bonds: Vec<Bond>,
    pub k: usize,
    pub seed: u64,
}

pub const NO_NEIGHBOR: u32 = u32::MAX;

impl Structure {
    /// Load a structure. Rejects duplicates, disconnected node sets and
    /// invalid pin counts. Coordinates are sorted so amoebot indices do not
    /// depend on input order.
    pub fn new(mut coords: Vec<GridCoord>, k: usize, seed: u64) -> Result<Self, WorldError> {
        if coords.is_empty() {
            return Err(WorldError::EmptyStructure);
        }
        if k < 1 || k > MAX_PINS_PER_BOND {
            return Err(WorldError::InvalidPinCount(k));
        }
        coords.sort();
        for w in coords.windows(2) {
            if w[0] == w[1] {
                return Err(WorldError::DuplicateNode(w[0]));
            }
        }
        let index: HashMap<GridCoord, u32> = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let mut neighbors = vec![[NO_NEIGHBOR; 6]; coords.len()];
        let mut masks = vec![[false; 6]; coords.len()];
        let mut bonds = Vec::new();
        for (i, &c) in coords.iter().enumerate() {
            for di in 0..6 {
                let n = c.neighbor(Direction::main(di)).unwrap();
                if let Some(&j) = index.get(&n) {
                    neighbors[i][di] = j;
                    masks[i][di] = true;
                    if (j as usize) > i {
                        bonds.push(Bond {
                            a: i as u32,
                            b: j,
                            dir: di as u8,
                        });
                    }
                }
            }
        }
        let st = Structure {
            coords,
            index,
            neighbors,
            masks,
            bonds,
            k,
            seed,
        };
        if !st.is_connected() {
            return Err(WorldError::DisconnectedStructure);
        }
        Ok(st)
    }

    fn is_connected(&self) -> bool {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i as usize] {
                if j != NO_NEIGHBOR && !seen[j as usize] {
                    seen[j as usize] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, i: usize) -> GridCoord {
        self.coords[i]
    }

    pub fn coords(&self) -> &[GridCoord] {
        &self.coords
    }

    pub fn index_of(&self, c: GridCoord) -> Option<usize> {
        self.index.get(&c).map(|&i| i as usize)
    }

    pub fn neighbor_index(&self, i: usize, dir_index: usize) -> Option<usize> {
        let j = self.neighbors[i][dir_index];
        (j != NO_NEIGHBOR).then_some(j as usize)
    }

    pub fn neighbor_mask(&self, i: usize) -> [bool; 6] {
        self.masks[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.masks[i].iter().filter(|&&b| b).count()
    }

    /// True if the amoebot has an unoccupied adjacent node.
    pub fn is_boundary(&self, i: usize) -> bool {
        self.degree(i) < 6
    }
}

/// Everything an activation may look at.
pub struct Ctx<'a> {
    pub k: usize,
    pub neighbors: [bool; 6],
    /// Beep mask over the partition sets of the configuration the amoebot
    /// held in the previous round.
    pub received: u32,
    pub rng: &'a mut ChaCha8Rng,
    emitted: &'a mut Vec<(u8, bool)>,
}

impl Ctx<'_> {
    pub fn heard(&self, set: u8) -> bool {
        self.received & (1 << set) != 0
    }

    pub fn heard_any(&self) -> bool {
        self.received != 0
    }

    /// Record an identifier bit for the harness trace. Emitted bits are not
    /// part of amoebot state.
    pub fn emit(&mut self, tag: u8, bit: bool) {
        self.emitted.push((tag, bit));
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }
}

/// A per-amoebot finite state machine driven by the engine.
pub trait Program: Sized {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action;
    fn done(&self) -> bool;
    /// One-character tag for traces.
    fn tag(&self) -> char {
        '.'
    }
    /// Bytes of local state, checked against the optional state budget.
    fn state_bytes(&self) -> usize {
        std::mem::size_of::<Self>()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RoundReport {
    pub round: u64,
    pub components: usize,
    pub any_beep: bool,
}

/// The mutable world: structure plus round counter, optional state budget,
/// trace buffer and emitted identifier bits.
pub struct AmoebotWorld {
    pub st: Structure,
    pub round: u64,
    pub state_budget: Option<usize>,
    trace: Option<TraceBuf>,
    emitted: Vec<Vec<(u8, bool)>>,
}

struct TraceBuf {
    text: String,
    phases: bool,
}

impl AmoebotWorld {
    pub fn new(st: Structure) -> Self {
        let n = st.len();
        AmoebotWorld {
            st,
            round: 0,
            state_budget: None,
            trace: None,
            emitted: vec![Vec::new(); n],
        }
    }

    pub fn load(coords: Vec<GridCoord>, k: usize, seed: u64) -> Result<Self, WorldError> {
        Ok(AmoebotWorld::new(Structure::new(coords, k, seed)?))
    }

    pub fn enable_trace(&mut self, phases: bool) {
        self.trace = Some(TraceBuf {
            text: String::new(),
            phases,
        });
    }

    pub fn trace_text(&self) -> Option<&str> {
        self.trace.as_ref().map(|t| t.text.as_str())
    }

    pub fn take_emitted(&mut self) -> Vec<Vec<(u8, bool)>> {
        let n = self.st.len();
        std::mem::replace(&mut self.emitted, vec![Vec::new(); n])
    }

    pub fn emitted(&self) -> &[Vec<(u8, bool)>] {
        &self.emitted
    }

    /// Start a phase with one program instance per amoebot. Pin
    /// configurations reset to the global circuit; random streams derive
    /// from (world seed, coordinate, label) so traces do not depend on
    /// activation order or on other phases.
    pub fn phase<P: Program>(&mut self, programs: Vec<P>, label: u64) -> PhaseRun<'_, P> {
        assert_eq!(programs.len(), self.st.len());
        let n = self.st.len();
        let configs: Vec<PinConfig> = (0..n)
            .map(|i| PinConfig::all_in_one(self.st.neighbor_mask(i), self.st.k))
            .collect();
        let rngs = (0..n)
            .map(|i| {
                let c = self.st.coord(i);
                let mut h = self.st.seed;
                for v in [c.q as u64, c.r as u64, label] {
                    h ^= v.wrapping_add(0x9e3779b97f4a7c15);
                    h = splitmix(h);
                }
                ChaCha8Rng::seed_from_u64(h)
            })
            .collect();
        PhaseRun {
            world: self,
            programs,
            configs,
            received: vec![0; n],
            rngs,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// One algorithm phase: a program per amoebot, stepped until done.
pub struct PhaseRun<'w, P: Program> {
    world: &'w mut AmoebotWorld,
    pub programs: Vec<P>,
    configs: Vec<PinConfig>,
    received: Vec<u32>,
    rngs: Vec<ChaCha8Rng>,
}

impl<P: Program> PhaseRun<'_, P> {
    pub fn world(&self) -> &AmoebotWorld {
        self.world
    }

    pub fn st(&self) -> &Structure {
        &self.world.st
    }

    /// Advance one synchronous round.
    pub fn step(&mut self) -> Result<RoundReport, WorldError> {
        let st = &self.world.st;
        let n = st.len();
        let mut senders = vec![0u32; n];
        for i in 0..n {
            let mut ctx = Ctx {
                k: st.k,
                neighbors: st.masks[i],
                received: self.received[i],
                rng: &mut self.rngs[i],
                emitted: &mut self.world.emitted[i],
            };
            let action = self.programs[i].activate(&mut ctx);
            if let Some(pins) = action.pins {
                debug_assert!(
                    pins.validate(st.masks[i], st.k),
                    "invalid pin configuration from amoebot {} round {}",
                    i,
                    self.world.round
                );
                self.configs[i] = pins;
            }
            debug_assert!(
                action.beeps == 0
                    || (32 - action.beeps.leading_zeros()) as usize <= self.configs[i].set_count(),
                "beep on nonexistent partition set"
            );
            senders[i] = action.beeps;
            if let Some(budget) = self.world.state_budget {
                let bytes = self.programs[i].state_bytes();
                if bytes > budget {
                    return Err(WorldError::StateBudgetExceeded {
                        coord: st.coord(i),
                        bytes,
                        budget,
                    });
                }
            }
        }

        let mut graph = compute_circuits(st, &self.configs);
        propagate(&mut graph, &senders);
        for i in 0..n {
            let mut mask = 0u32;
            for s in 0..self.configs[i].set_count() as u8 {
                let comp = graph.component(i, s);
                let r = graph.components.binary_search(&comp).unwrap();
                if graph.beeped[r] {
                    mask |= 1 << s;
                }
            }
            self.received[i] = mask;
        }

        let any_beep = graph.beeped.iter().any(|&b| b);
        let report = RoundReport {
            round: self.world.round,
            components: graph.component_count(),
            any_beep,
        };
        if let Some(t) = &mut self.world.trace {
            let _ = write!(t.text, "r={} b=", report.round);
            for b in graph.beep_bits() {
                t.text.push(if b { '1' } else { '0' });
            }
            if t.phases {
                t.text.push_str(" t=");
                for p in &self.programs {
                    t.text.push(p.tag());
                }
            }
            t.text.push('\n');
        }
        self.world.round += 1;
        Ok(report)
    }

    pub fn all_done(&self) -> bool {
        self.programs.iter().all(|p| p.done())
    }

    /// Step until `pred` holds, at most `max_rounds` more rounds.
    pub fn run_until(
        &mut self,
        mut pred: impl FnMut(&PhaseRun<'_, P>) -> bool,
        max_rounds: u64,
    ) -> Result<Vec<RoundReport>, WorldError> {
        let mut reports = Vec::new();
        while !pred(self) {
            if reports.len() as u64 >= max_rounds {
                return Err(WorldError::RoundBudgetExhausted(max_rounds));
            }
            reports.push(self.step()?);
        }
        Ok(reports)
    }

    /// Step until every program reports done.
    pub fn run_to_completion(&mut self, max_rounds: u64) -> Result<u64, WorldError> {
        let reports = self.run_until(|p| p.all_done(), max_rounds)?;
        Ok(reports.len() as u64)
    }

    /// Consume the phase, returning the programs for output harvesting.
    pub fn finish(self) -> Vec<P> {
        self.programs
    }
}

/// Wraps a program so that every other round runs the synchronization
/// pattern: the whole structure forms the global circuit and every amoebot
/// whose inner program is unfinished beeps. The wrapped program completes
/// only when a global round stays silent, so parallel subsets finish
/// together. Inner rounds keep their own beep timing; received masks from
/// inner rounds are buffered across the interposed global rounds.
pub struct Synchronized<P: Program> {
    pub inner: P,
    last_pins: Option<PinConfig>,
    buffered: u32,
    sync_round: bool,
    synced_once: bool,
    complete: bool,
}

impl<P: Program> Synchronized<P> {
    pub fn new(inner: P) -> Self {
        Synchronized {
            inner,
            last_pins: None,
            buffered: 0,
            sync_round: false,
            synced_once: false,
            complete: false,
        }
    }
}

impl<P: Program> Program for Synchronized<P> {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.complete {
            return Action::keep();
        }
        if self.sync_round {
            // Entering a global round: buffer the inner round's beeps.
            self.buffered = ctx.received;
            self.sync_round = false;
            self.synced_once = true;
            let pins = PinConfig::all_in_one(ctx.neighbors, ctx.k);
            return Action::configure(pins).beep_if(!self.inner.done(), 0);
        }
        // Back from a global round: silence means every subset finished.
        if self.synced_once && ctx.received == 0 {
            self.complete = true;
            return Action::keep();
        }
        let mut inner_ctx = Ctx {
            k: ctx.k,
            neighbors: ctx.neighbors,
            received: if self.synced_once {
                self.buffered
            } else {
                ctx.received
            },
            rng: ctx.rng,
            emitted: ctx.emitted,
        };
        let mut action = self.inner.activate(&mut inner_ctx);
        if let Some(p) = &action.pins {
            self.last_pins = Some(p.clone());
        } else if let Some(p) = &self.last_pins {
            // Restore the inner configuration after the global round.
            action.pins = Some(p.clone());
        }
        self.sync_round = true;
        action
    }

    fn done(&self) -> bool {
        self.complete
    }

    fn tag(&self) -> char {
        if self.sync_round {
            's'
        } else {
            self.inner.tag()
        }
    }

    fn state_bytes(&self) -> usize {
        std::mem::size_of::<Self>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoord;

    fn coords(v: &[(i32, i32)]) -> Vec<GridCoord> {
        v.iter().map(|&(q, r)| GridCoord::new(q, r)).collect()
    }

    #[test]
    fn load_structure_validation() {
        let w = AmoebotWorld::load(coords(&[(0, 0)]), 2, 1).unwrap();
        assert_eq!(w.st.len(), 1);
        assert!(matches!(
            AmoebotWorld::load(coords(&[(0, 0), (2, 2)]), 2, 1),
            Err(WorldError::DisconnectedStructure)
        ));
        assert!(matches!(
            AmoebotWorld::load(coords(&[(0, 0), (0, 0)]), 2, 1),
            Err(WorldError::DuplicateNode(_))
        ));
        assert!(matches!(
            AmoebotWorld::load(coords(&[(0, 0)]), 0, 1),
            Err(WorldError::InvalidPinCount(0))
        ));
        // Triangle: three bonds.
        let w = AmoebotWorld::load(coords(&[(0, 0), (1, 0), (0, 1)]), 4, 1).unwrap();
        assert_eq!(w.st.bonds.len(), 3);
    }

    /// Beeps on the global circuit once, then listens.
    struct GlobalBeeper {
        beep: bool,
        fired: bool,
        heard: bool,
        rounds: u32,
    }

    impl Program for GlobalBeeper {
        fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
            self.heard |= ctx.heard_any();
            self.rounds += 1;
            let a = Action::configure(PinConfig::all_in_one(ctx.neighbors, ctx.k));
            if self.beep && !self.fired {
                self.fired = true;
                return a.beep(0);
            }
            a
        }
        fn done(&self) -> bool {
            self.rounds >= 3
        }
    }

    #[test]
    fn global_circuit_broadcast() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0), (1, 0), (2, 0), (0, 1)]), 2, 9).unwrap();
        let programs = (0..4)
            .map(|i| GlobalBeeper {
                beep: i == 2,
                fired: false,
                heard: false,
                rounds: 0,
            })
            .collect();
        let mut phase = w.phase(programs, 0);
        phase.run_to_completion(16).unwrap();
        let done = phase.finish();
        assert!(done.iter().all(|p| p.heard), "beep reaches every amoebot");
    }

    /// Singleton pin sets; amoebot 0 beeps toward its first neighbor only.
    struct PairBeeper {
        source: bool,
        heard: bool,
        rounds: u32,
    }

    impl Program for PairBeeper {
        fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
            self.heard |= ctx.heard_any();
            self.rounds += 1;
            let pins = PinConfig::singletons(ctx.neighbors, ctx.k);
            let a = Action::configure(pins);
            if self.source && self.rounds == 1 {
                // Beep on the singleton of the first live pin.
                return a.beep(0);
            }
            a
        }
        fn done(&self) -> bool {
            self.rounds >= 3
        }
    }

    #[test]
    fn singleton_circuits_reach_one_neighbor() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0), (1, 0), (2, 0)]), 2, 9).unwrap();
        let programs = (0..3)
            .map(|i| PairBeeper {
                source: i == 0,
                heard: false,
                rounds: 0,
            })
            .collect();
        let mut phase = w.phase(programs, 0);
        phase.run_to_completion(16).unwrap();
        let done = phase.finish();
        // (0,0)'s first live pin points ENE to (1,0); only that pair hears.
        assert!(done[0].heard, "sender hears its own circuit");
        assert!(done[1].heard);
        assert!(!done[2].heard);
    }

    struct Idle;
    impl Program for Idle {
        fn activate(&mut self, _ctx: &mut Ctx<'_>) -> Action {
            Action::keep()
        }
        fn done(&self) -> bool {
            false
        }
    }

    #[test]
    fn round_budget_exhausts() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0)]), 2, 1).unwrap();
        let mut phase = w.phase(vec![Idle], 0);
        assert!(matches!(
            phase.run_to_completion(1),
            Err(WorldError::RoundBudgetExhausted(1))
        ));
    }

    #[test]
    fn silence_when_nobody_beeps() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0), (1, 0)]), 2, 1).unwrap();
        let mut phase = w.phase(vec![Idle, Idle], 0);
        let r = phase.step().unwrap();
        assert!(!r.any_beep);
    }

    #[test]
    fn traces_are_deterministic() {
        let run = || {
            let mut w =
                AmoebotWorld::load(coords(&[(0, 0), (1, 0), (2, 0), (0, 1)]), 2, 5).unwrap();
            w.enable_trace(true);
            let programs = (0..4)
                .map(|i| GlobalBeeper {
                    beep: i == 1,
                    fired: false,
                    heard: false,
                    rounds: 0,
                })
                .collect();
            let mut phase = w.phase(programs, 3);
            phase.run_to_completion(16).unwrap();
            w.trace_text().unwrap().to_string()
        };
        assert_eq!(run(), run());
    }
}
