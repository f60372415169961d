//! Randomized leader election on the global circuit.
//!
//! Every phase each remaining candidate draws a fair coin and beeps on the
//! candidate circuit when it draws one; a candidate that drew zero and
//! hears a beep withdraws. Phases repeat for a fixed budget supplied by the
//! scenario (the harness knows n, the amoebots do not); with budget
//! 4*ceil(log2 n) a unique survivor remains with probability 1 - O(1/n^2).

use crate::engine::{Action, AmoebotWorld, Ctx, PinConfig, Program};
use crate::error::AlgoError;

pub struct ElectionProgram {
    pub candidate: bool,
    budget: u32,
    phases: u32,
    coin: bool,
    configured: bool,
}

impl ElectionProgram {
    pub fn new(candidate: bool, budget: u32) -> Self {
        ElectionProgram {
            candidate,
            budget,
            phases: 0,
            coin: false,
            configured: false,
        }
    }
}

impl Program for ElectionProgram {
    fn activate(&mut self, ctx: &mut Ctx<'_>) -> Action {
        if self.phases > self.budget {
            return Action::keep();
        }
        let mut a = if !self.configured {
            self.configured = true;
            Action::configure(PinConfig::all_in_one(ctx.neighbors, ctx.k))
        } else {
            // Resolve the previous coin round.
            if self.candidate && !self.coin && ctx.heard(0) {
                self.candidate = false;
            }
            Action::keep()
        };
        self.phases += 1;
        if self.phases <= self.budget && self.candidate {
            self.coin = ctx.coin();
            if self.coin {
                a = a.beep(0);
            }
        }
        a
    }

    fn done(&self) -> bool {
        self.phases > self.budget
    }

    fn tag(&self) -> char {
        if self.candidate {
            'C'
        } else {
            '.'
        }
    }
}

#[derive(Clone, Debug)]
pub struct ElectionOutcome {
    /// The unique surviving candidate, if the budget sufficed.
    pub leader: Option<usize>,
    pub survivors: usize,
    /// Phase after which a single candidate first remained.
    pub phases_to_unique: Option<u32>,
    pub rounds: u64,
}

/// Elect a leader among the flagged candidates over the global circuit.
pub fn global_leader_election(
    world: &mut AmoebotWorld,
    candidates: &[bool],
    phase_budget: u32,
) -> Result<ElectionOutcome, AlgoError> {
    assert_eq!(candidates.len(), world.st.len());
    if !candidates.iter().any(|&c| c) {
        return Err(AlgoError::EmptyCandidateSet(0));
    }
    let programs: Vec<ElectionProgram> = candidates
        .iter()
        .map(|&c| ElectionProgram::new(c, phase_budget))
        .collect();
    let mut phase = world.phase(programs, 0x11);
    let mut rounds = 0u64;
    let mut phases_to_unique = None;
    while !phase.all_done() {
        phase.step()?;
        rounds += 1;
        let alive = phase.programs.iter().filter(|p| p.candidate).count();
        if alive == 1 && phases_to_unique.is_none() {
            phases_to_unique = Some(rounds.saturating_sub(1) as u32);
        }
    }
    let programs = phase.finish();
    let survivors: Vec<usize> = programs
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.candidate.then_some(i))
        .collect();
    Ok(ElectionOutcome {
        leader: (survivors.len() == 1).then(|| survivors[0]),
        survivors: survivors.len(),
        phases_to_unique,
        rounds,
    })
}
