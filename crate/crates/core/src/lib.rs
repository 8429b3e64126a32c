//! Agent-based network formation when agents cannot see each other's type.
//!
//! Agents belong to a visible group and carry a hidden type; a link between
//! same-type agents is cheap, across types it is expensive. Before meeting,
//! an agent prices a link with its belief about the partner's group. The
//! [`dynamics`] module runs myopic pairwise updates until the network is
//! pairwise stable, [`metrics`] measures the result, [`oracle`] checks small
//! instances exhaustively and [`experiments`] drives parameter sweeps.

pub mod beliefs;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
