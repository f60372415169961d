//! Reusable distributed building blocks: the global circuit, randomized
//! leader election, boundary sets with the inner/outer test, and the
//! procedure-synchronization pattern.
//!
//! Leader election comes in two forms that together cover disjoint
//! candidate circuits: [`global_leader_election`] elects over the global
//! circuit, and [`classify_boundaries`] internally elects one leader per
//! boundary cycle on the per-boundary circuits.

mod boundary;
mod classify;
mod election;

pub use boundary::{
    boundary_bank, local_boundaries, trace_boundary_cycles, BoundaryCycle, CycleStep, LocalBoundary,
};
pub use classify::{
    classify_boundaries, cycle_seats, use_bank, BoundaryKind, ClassifiedBoundary, CycleSeat,
};
pub use election::{global_leader_election, ElectionOutcome, ElectionProgram};

use crate::engine::{compute_circuits, CircuitGraph, PinConfig, Structure};

/// The configuration in which every amoebot merges all pins into one
/// partition set, and the resulting single system-wide circuit.
pub fn global_circuit(st: &Structure) -> CircuitGraph {
    let configs: Vec<PinConfig> = (0..st.len())
        .map(|i| PinConfig::all_in_one(st.neighbor_mask(i), st.k))
        .collect();
    compute_circuits(st, &configs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Action, AmoebotWorld, Ctx, Program, Synchronized};
    use crate::grid::GridCoord;

    fn coords(v: &[(i32, i32)]) -> Vec<GridCoord> {
        v.iter().map(|&(q, r)| GridCoord::new(q, r)).collect()
    }

    #[test]
    fn global_circuit_is_single_component() {
        for cs in [
            vec![(0, 0)],
            vec![(0, 0), (1, 0), (2, 0)],
            vec![(0, 1), (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1)],
        ] {
            let st = crate::engine::Structure::new(coords(&cs), 2, 1).unwrap();
            let g = global_circuit(&st);
            assert_eq!(g.component_count(), 1);
        }
    }

    /// Counts down a personal number of work rounds, then finishes.
    struct Countdown {
        left: u32,
    }

    impl Program for Countdown {
        fn activate(&mut self, _ctx: &mut Ctx<'_>) -> Action {
            if self.left > 0 {
                self.left -= 1;
            }
            Action::keep()
        }
        fn done(&self) -> bool {
            self.left == 0
        }
    }

    #[test]
    fn synchronize_waits_for_the_slowest_subset() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0), (1, 0), (2, 0)]), 2, 4).unwrap();
        let programs = vec![
            Synchronized::new(Countdown { left: 2 }),
            Synchronized::new(Countdown { left: 9 }),
            Synchronized::new(Countdown { left: 0 }),
        ];
        let mut phase = w.phase(programs, 0x7);
        let rounds = phase.run_to_completion(64).unwrap();
        let ps = phase.finish();
        // Everyone completes, and only after the slowest inner program.
        assert!(ps.iter().all(|p| p.done()));
        assert!(rounds >= 18, "completion waits for the 9-round subset");
    }

    #[test]
    fn synchronize_with_no_participants_ends_after_silent_round() {
        let mut w = AmoebotWorld::load(coords(&[(0, 0), (1, 0)]), 2, 4).unwrap();
        let programs = (0..2)
            .map(|_| Synchronized::new(Countdown { left: 0 }))
            .collect();
        let mut phase = w.phase(programs, 0x7);
        let rounds = phase.run_to_completion(16).unwrap();
        assert!(rounds <= 4, "one work round, one silent global round");
    }
}
