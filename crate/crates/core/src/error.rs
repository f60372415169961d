//! Error types shared across the crate.

use thiserror::Error;

use crate::grid::{Direction, GridCoord};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("{0} is not an edge direction; grid edges follow the six main directions")]
    NotAnEdgeDirection(Direction),
    #[error("rotation by {0} degrees is not a multiple of 30")]
    BadRotation(i32),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WorldError {
    #[error("structure is not connected under grid adjacency")]
    DisconnectedStructure,
    #[error("node {0} occupied twice")]
    DuplicateNode(GridCoord),
    #[error("pin count {0} is invalid; every bond carries at least one pin")]
    InvalidPinCount(usize),
    #[error("empty structure")]
    EmptyStructure,
    #[error("amoebot at {coord} holds {bytes} bytes of state, over the {budget}-byte budget")]
    StateBudgetExceeded {
        coord: GridCoord,
        bytes: usize,
        budget: usize,
    },
    #[error("round budget of {0} rounds exhausted")]
    RoundBudgetExhausted(u64),
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum AlgoError {
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("candidate set {0} is empty")]
    EmptyCandidateSet(usize),
    #[error("reference {0} is not occupied")]
    ReferenceNotOccupied(GridCoord),
    #[error("subset R is empty")]
    EmptySubset,
    #[error("bit index {index} out of range; identifiers carry {width} bits")]
    BitIndexOutOfRange { index: usize, width: usize },
    #[error("block length parameter {lambda} exceeds chain length {chain}")]
    LambdaExceedsChain { lambda: usize, chain: usize },
    #[error("no prime found after {0} attempts")]
    PrimeGenerationExhausted(usize),
    #[error("leader election left {survivors} candidates in set {set} after the phase budget")]
    ElectionIncomplete { set: usize, survivors: usize },
    #[error("scenario needs {needed} pins per bond, world has {have}")]
    NotEnoughPins { needed: usize, have: usize },
}
