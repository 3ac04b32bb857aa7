//! Exact computation with compact subsets of the real line: Newhouse
//! thickness, capacity bounds for finite patterns, certificate-producing
//! pattern searches, the potential game, and the grid construction used to
//! carry dimension through the game.
//!
//! Everything that decides a verdict (thickness infima, emptiness of
//! intersections, game legality) runs on exact rational arithmetic; the few
//! transcendental formulas are evaluated as directed-rounding enclosures so a
//! floor or comparison is never guessed.

pub mod appendix;
pub mod bounds;
pub mod descriptor;
pub mod enclosure;
pub mod game;
pub mod interval;
pub mod maps;
pub(crate) mod par;
pub mod patterns;
pub mod rational;
pub mod thickness;

pub use descriptor::{GapRecord, SetDescriptor, SetKind};
pub use interval::{Interval, IntervalUnion};
pub use rational::Q;

/// Default precision (in bits) for enclosure evaluation of transcendental
/// formulas. Doubled automatically when a floor straddles an integer.
pub const DEFAULT_PRECISION_BITS: u32 = 80;
