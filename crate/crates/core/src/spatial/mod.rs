//! Spatial identifiers by stripes, the stripe algorithm, and global maxima.

mod stripes;

pub use stripes::{
    stripe_algorithm, stripe_deltas, stripe_identifiers, StripeCore, StripePasc, StripeRun,
};

mod counter;
mod maxima;

pub use counter::{CounterBank, CounterSeat};
pub use maxima::{f_d_count, global_maxima, outer_counter_seats, MaximaOutcome, MaximaProgram};
