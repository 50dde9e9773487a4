//! Content replica placement for moving satellite networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`constellation`] builds Walker shells, propagates them and assembles the
//!   per-slot snapshot graphs (ISLs, ground visibility, terrestrial backbone).
//! * [`demand`] holds the content catalog and the `(slot, user, content)`
//!   demand matrix, with trace I/O, synthetic generators and prediction.
//! * [`costmodel`] turns snapshots into per-slot shortest-path distances and
//!   evaluates query, replication and storage cost of a replica schedule.
//! * [`placement`] contains the multi-slot local searches (MTLS, MTOLS) and
//!   the per-slot and satellite-specific baselines.
//! * [`delivery`] replays requests against a schedule under a routing policy.
//! * [`scenario`] wires everything together from a JSON config and writes the
//!   result bundle.

pub mod constellation;
pub mod costmodel;
pub mod delivery;
pub mod demand;
mod error;
pub mod par;
pub mod placement;
pub mod scenario;
pub mod synthetic;

pub use error::{Error, Result};

/// Index of a node (satellite or ground node) in a [`constellation::Network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}
