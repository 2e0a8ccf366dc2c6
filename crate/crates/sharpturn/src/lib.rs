//! Classical and complex-trajectory reflection in waveguides with one or two
//! sharp turns.
//!
//! Units are rescaled throughout: ħ = m = ω = 1 and lengths are measured in
//! units of the distance L between the turns. Conversion to physical units
//! (E = L²Ẽ, F = L²F̃) happens only at the CLI boundary.

pub mod acceptance;
pub mod classical;
pub mod error;
pub mod geometry;
pub mod numerics;
pub mod one_turn;
pub mod sphaleron;
pub mod two_turn_boundary;
pub mod two_turn_tunneling;

pub use error::{Error, Result};
pub use geometry::ModelParams;
