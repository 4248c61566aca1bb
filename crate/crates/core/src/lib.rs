//! Network structure inference from diffusion cascades.
//!
//! The crate is `no_std` with `alloc`. The default `std` and `parallel`
//! features enable multithreaded accumulation through rayon; results are
//! identical with or without them.
//!
//! * [`cascade`]: cascade observations and the infection-label transform.
//! * [`inference`]: transition matrices, co-participation similarity, edge
//!   scores and top-K selection.
//! * [`sim`]: independent-cascade simulation with exponential delays.
//! * [`graph`]: ground-truth graphs, partitions and the planted-partition
//!   generator.
//! * [`eval`]: edge, structure and community metrics plus label propagation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cascade;
pub mod error;
pub mod eval;
pub mod graph;
pub mod inference;
pub mod sim;
pub mod sparse;

pub use cascade::{Cascade, CascadeSet, CascadeVector, IdMap, NodeId};
pub use error::{Error, Result};
pub use graph::{CommunityPartition, GenConfig, Graph};
pub use inference::{Algorithm, Directedness, InferredGraph, ScoreMatrix, TransitionMatrix};
pub use sim::SimConfig;
