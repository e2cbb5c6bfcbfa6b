//! Core of the crossgo engine: an exact Go rules kernel, the 24-plane
//! feature encoder, a small convolution/autodiff engine with cross-shaped
//! masked filters, and the policy network assembled from them.
//!
//! The crate is `no_std` (with `alloc`) when built without the default
//! `std` feature. All IO, file formats and the command line live in the
//! companion `crossgo` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod board;
pub mod features;
pub mod model;
pub mod nn;
pub mod symmetry;

pub use board::{BoardState, Color, Coord, GroupInfo, IllegalMove, Move, Point};
pub use features::{FeatureTensor, Planes, NUM_PLANES};
pub use model::{EnsembleMode, NetworkConfig, PolicyNet, PolicyOutput, ScoreModel};
pub use symmetry::Symmetry;

/// Side length of the board the network is built for.
pub const NET_BOARD_SIZE: usize = 19;

/// Number of points on the network board.
pub const NET_POINTS: usize = NET_BOARD_SIZE * NET_BOARD_SIZE;
