//! Binary counters distributed along a chain of cycle occurrences.
//!
//! Every occurrence holds one cell per counter; cells are little-endian
//! along the chain from the head. Increment sends a carry impulse from the
//! head through a circuit that full cells conduct and other cells block, so
//! the whole operation costs a constant number of rounds regardless of the
//! counter value; decrement runs the same circuit over zero cells with a
//! borrow. Comparisons and zero tests beep on the cycle-wide circuit.

use crate::engine::{Ctx, PinConfig};
use crate::pasc::SeatLink;

/// One cell of the counter bank: an occurrence on the counter chain.
#[derive(Clone, Copy, Debug)]
pub struct CounterSeat {
    /// Toward the head (absent on the head itself).
    pub pred: Option<SeatLink>,
    pub succ: Option<SeatLink>,
    pub is_head: bool,
    pub cells: [u16; 2],
}

/// The counter cells one amoebot holds, with the per-round set bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct CounterBank {
    pub seats: Vec<CounterSeat>,
    /// Cell capacity is 2^width - 1 per seat.
    pub width: u8,
    listen: Vec<u8>,
    cyc: Vec<u8>,
    head_out: Option<u8>,
}

impl CounterBank {
    pub fn new(seats: Vec<CounterSeat>, width: u8) -> Self {
        let n = seats.len();
        CounterBank {
            seats,
            width,
            listen: vec![u8::MAX; n],
            cyc: vec![u8::MAX; n],
            head_out: None,
        }
    }

    /// The head's outgoing impulse set from the last `wire_carry`.
    pub fn head_set(&self) -> Option<u8> {
        self.head_out
    }

    pub fn is_empty(&self) -> bool {
        self.seats.is_empty()
    }

    fn cell_max(&self) -> u16 {
        (1u16 << self.width) - 1
    }

    /// Wire the carry circuit for counter `w`. A cell that will wrap
    /// (full for increment, zero for decrement) conducts; every other cell
    /// terminates the impulse. Returns the set the head beeps on, if this
    /// amoebot holds the head.
    pub fn wire_carry(&mut self, cfg: &mut PinConfig, w: usize, dec: bool) -> Option<u8> {
        let max = self.cell_max();
        let mut head_set = None;
        self.head_out = None;
        for (s, seat) in self.seats.iter().enumerate() {
            let wraps = if dec {
                seat.cells[w] == 0
            } else {
                seat.cells[w] == max
            };
            let set = cfg.add_set();
            self.listen[s] = set;
            if let Some(l) = seat.pred {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
            }
            if let Some(l) = seat.succ {
                if seat.is_head {
                    // The head's successor pin carries the outgoing impulse.
                    let out = cfg.add_set();
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, out);
                    head_set = Some(out);
                    self.head_out = Some(out);
                } else if wraps {
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                } else {
                    let parked = cfg.add_set();
                    cfg.assign(l.dir as usize, 2 * l.bank as usize, parked);
                }
            }
        }
        head_set
    }

    /// Whether the head emits a carry/borrow impulse for counter `w`.
    pub fn head_wraps(&self, w: usize, dec: bool) -> bool {
        let max = self.cell_max();
        self.seats.iter().any(|s| {
            s.is_head
                && if dec {
                    s.cells[w] == 0
                } else {
                    s.cells[w] == max
                }
        })
    }

    /// Apply the operation: the head locally, everyone else from the
    /// received impulse on the carry circuit wired two rounds earlier.
    pub fn apply_carry(&mut self, ctx: &Ctx<'_>, w: usize, dec: bool) {
        let max = self.cell_max();
        for (s, seat) in self.seats.iter_mut().enumerate() {
            let hit = seat.is_head || ctx.heard(self.listen[s]);
            if !hit {
                continue;
            }
            seat.cells[w] = match (dec, seat.cells[w]) {
                (false, v) if v == max => 0,
                (false, v) => v + 1,
                (true, 0) => max,
                (true, v) => v - 1,
            };
        }
    }

    /// Wire the cycle-wide circuit (both sides of every seat merged) used
    /// for comparisons, zero tests and chain-local broadcasts.
    pub fn wire_cycle(&mut self, cfg: &mut PinConfig) {
        for (s, seat) in self.seats.iter().enumerate() {
            let set = cfg.add_set();
            self.cyc[s] = set;
            for l in [seat.pred, seat.succ].into_iter().flatten() {
                cfg.assign(l.dir as usize, 2 * l.bank as usize, set);
                cfg.assign(l.dir as usize, 2 * l.bank as usize + 1, set);
            }
        }
    }

    /// Sets to beep for an inequality test between the two counters.
    pub fn unequal_beeps(&self) -> impl Iterator<Item = u8> + '_ {
        self.seats
            .iter()
            .enumerate()
            .filter_map(|(s, seat)| (seat.cells[0] != seat.cells[1]).then_some(self.cyc[s]))
    }

    /// Sets to beep for a nonzero test of counter `w`.
    pub fn nonzero_beeps(&self, w: usize) -> impl Iterator<Item = u8> + '_ {
        self.seats
            .iter()
            .enumerate()
            .filter_map(move |(s, seat)| (seat.cells[w] != 0).then_some(self.cyc[s]))
    }

    /// Whether any of this amoebot's cycle sets heard a beep.
    pub fn heard_cycle(&self, ctx: &Ctx<'_>) -> bool {
        self.cyc
            .iter()
            .take(self.seats.len())
            .any(|&c| c != u8::MAX && ctx.heard(c))
    }

    pub fn reset(&mut self, w: usize) {
        for seat in &mut self.seats {
            seat.cells[w] = 0;
        }
    }
}
