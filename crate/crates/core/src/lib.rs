//! Amoebot structures on the triangular grid with reconfigurable circuits.
//!
//! The crate simulates the fully synchronous round model in which every
//! amoebot partitions its pins into partition sets, circuits form as
//! connected components across bonds, and beeps reach a whole circuit in one
//! round. On top of the engine it ships distributed algorithms for chain
//! and spatial identifiers (PASC), stripe computation, global maxima,
//! canonical skeletons, spanning trees and symmetry detection, together with
//! full-knowledge oracles used to verify every output.

pub mod engine;
pub mod error;
pub mod gen;
pub mod grid;
pub mod oracle;
pub mod pasc;
pub mod primitives;
pub mod skeleton;
pub mod spatial;
pub mod symmetry;

pub use engine::{Action, AmoebotWorld, Ctx, PinConfig, Program, Structure, Synchronized};
pub use error::{AlgoError, GridError, WorldError};
pub use grid::{on_axis, proj, rotate, Axis, Direction, GridCoord, Sign};
