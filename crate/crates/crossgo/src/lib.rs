//! Dataset compilation, training, evaluation and the play interfaces (GTP
//! and a WebSocket game service) for the crossgo policy network.

pub mod api;
pub mod checkpoint;
pub mod dataset;
pub mod engine;
pub mod gtp;
pub mod selfplay;
pub mod sgf;
pub mod shard;
pub mod train;
pub mod vertex;
