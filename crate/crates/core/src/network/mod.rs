//! Network topologies, mixing matrices and communication-matrix sets.

mod comm;
mod mixing;
mod topology;

pub use comm::{CommunicationSet, SetTag, Variant};
pub use mixing::{beta_of, consensus_apply, MixingMatrix, WeightScheme};
pub use topology::{Topology, TopologyKind};
