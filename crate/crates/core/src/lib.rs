//! Entanglement dynamics of two two-level atoms, each crossing its own
//! lossless cavity, when the atom-field coupling also acts on the atomic
//! center-of-mass motion (optical Stern-Gerlach splitting).
//!
//! Closed forms live in [`packets`], [`dynamics`] and [`entanglement`];
//! [`oracle`] recomputes the same reduced states by propagating wavepackets
//! on a grid, and [`scenario`] drives time sweeps for the command-line tool.

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod oracle;
pub mod packets;
pub mod params;
pub mod scenario;

pub use dynamics::{CoeffsOneAtom, CoeffsPhi, CoeffsPsi, XState};
pub use error::{EntanglementError, OracleError, ScenarioError, ValidationError};
pub use params::{derive_constants, DerivedConstants, PhysicalParams};
