//! Pin configurations: the partition of an amoebot's live pins into
//! partition sets.
//!
//! A bond between neighbors carries `k` external links. The link with slot
//! `j` joins pin `(d, j)` on one side to pin `(opposite(d), j)` on the other,
//! so slot numbers are the common labeling both endpoints agree on. Pins
//! exist only toward occupied neighbors.

pub const MAX_PINS_PER_BOND: usize = 8;
pub const MAX_PINS: usize = 6 * MAX_PINS_PER_BOND;
/// Marker for pins outside any partition set (dead directions).
pub const NO_SET: u8 = u8::MAX;

/// Index of pin `slot` toward main direction `dir_index`.
#[inline]
pub fn pin_index(dir_index: usize, slot: usize) -> usize {
    dir_index * MAX_PINS_PER_BOND + slot
}

/// Assignment of every live pin to a partition set.
///
/// Set ids are small consecutive integers local to the amoebot. The engine
/// validates at step time that exactly the live pins are covered.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PinConfig {
    set_of: [u8; MAX_PINS],
    set_count: u8,
}

impl PinConfig {
    pub fn empty() -> Self {
        PinConfig {
            set_of: [NO_SET; MAX_PINS],
            set_count: 0,
        }
    }

    /// Allocate a fresh partition set and return its id.
    pub fn add_set(&mut self) -> u8 {
        let id = self.set_count;
        self.set_count += 1;
        id
    }

    /// Put pin `(dir_index, slot)` into partition set `set`.
    pub fn assign(&mut self, dir_index: usize, slot: usize, set: u8) {
        debug_assert!(set < self.set_count);
        self.set_of[pin_index(dir_index, slot)] = set;
    }

    pub fn set_of(&self, dir_index: usize, slot: usize) -> Option<u8> {
        let s = self.set_of[pin_index(dir_index, slot)];
        (s != NO_SET).then_some(s)
    }

    pub fn set_count(&self) -> usize {
        self.set_count as usize
    }

    /// One partition set holding every live pin: the global-circuit
    /// configuration of this amoebot.
    pub fn all_in_one(neighbors: [bool; 6], k: usize) -> Self {
        let mut c = PinConfig::empty();
        let s = c.add_set();
        for (d, occupied) in neighbors.iter().enumerate() {
            if *occupied {
                for slot in 0..k {
                    c.assign(d, slot, s);
                }
            }
        }
        c
    }

    /// Every live pin in its own singleton set, in pin-index order.
    pub fn singletons(neighbors: [bool; 6], k: usize) -> Self {
        let mut c = PinConfig::empty();
        for (d, occupied) in neighbors.iter().enumerate() {
            if *occupied {
                for slot in 0..k {
                    let s = c.add_set();
                    c.assign(d, slot, s);
                }
            }
        }
        c
    }

    /// Checks that the sets cover exactly the live pins and ids are in range.
    pub fn validate(&self, neighbors: [bool; 6], k: usize) -> bool {
        for d in 0..6 {
            for slot in 0..MAX_PINS_PER_BOND {
                let s = self.set_of[pin_index(d, slot)];
                let live = neighbors[d] && slot < k;
                if live && (s == NO_SET || s >= self.set_count) {
                    return false;
                }
                if !live && s != NO_SET {
                    return false;
                }
            }
        }
        true
    }
}

/// What an activation hands back to the engine: the pin configuration to use
/// from this round on (None keeps the current one) and the partition sets to
/// beep on, as a bitmask over set ids of the effective configuration.
#[derive(Clone, Debug, Default)]
pub struct Action {
    pub pins: Option<PinConfig>,
    pub beeps: u32,
}

impl Action {
    pub fn keep() -> Self {
        Action {
            pins: None,
            beeps: 0,
        }
    }

    pub fn configure(pins: PinConfig) -> Self {
        Action {
            pins: Some(pins),
            beeps: 0,
        }
    }

    pub fn beep(mut self, set: u8) -> Self {
        self.beeps |= 1 << set;
        self
    }

    pub fn beep_if(self, cond: bool, set: u8) -> Self {
        if cond {
            self.beep(set)
        } else {
            self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_and_validate() {
        let nb = [true, false, false, true, false, false];
        let c = PinConfig::all_in_one(nb, 2);
        assert_eq!(c.set_count(), 1);
        assert!(c.validate(nb, 2));
        assert_eq!(c.set_of(0, 1), Some(0));
        assert_eq!(c.set_of(1, 0), None);

        let s = PinConfig::singletons(nb, 2);
        assert_eq!(s.set_count(), 4);
        assert!(s.validate(nb, 2));

        let mut bad = PinConfig::empty();
        let id = bad.add_set();
        bad.assign(0, 0, id);
        assert!(!bad.validate(nb, 2)); // pin (3, *) uncovered
    }
}
