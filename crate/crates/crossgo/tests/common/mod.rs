#![allow(dead_code)]

pub mod checks;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crossgo::engine::Engine;
use crossgo::sgf::{write_sgf, GameRecord};
use crossgo_core::model::{EnsembleMode, NetworkConfig};
use crossgo_core::{BoardState, Move, PolicyNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn pro_corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/pro")
}

/// A legal game of `moves` random moves on a 19×19 board.
pub fn random_game(seed: u64, moves: usize) -> GameRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = BoardState::new(19).unwrap();
    let mut record = GameRecord::new(19);
    record.metadata.insert("PB".into(), format!("black {seed}"));
    record.metadata.insert("PW".into(), "white".into());
    for _ in 0..moves {
        let legal: Vec<Move> = state.legal_moves().into_iter().filter(|m| *m != Move::Pass).collect();
        let mv = if legal.is_empty() || rng.gen_bool(0.01) {
            Move::Pass
        } else {
            legal[rng.gen_range(0..legal.len())]
        };
        record.moves.push((state.to_move(), mv));
        state = state.play(mv).unwrap();
    }
    record
}

/// Writes `n` random games as `game-NN.sgf` under `dir`.
pub fn write_random_corpus(dir: &Path, n: usize, seed: u64) {
    fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let g = random_game(seed * 1000 + i as u64, 20 + i % 7);
        fs::write(dir.join(format!("game-{i:02}.sgf")), write_sgf(&g)).unwrap();
    }
}

/// Engine over an all-zero reference network: every score is 0, so it
/// always picks the first legal point in row-major order.
pub fn zero_engine() -> Engine {
    let net = PolicyNet::new(NetworkConfig::reference(0.0625)).unwrap();
    Engine::new(Arc::new(net), EnsembleMode::Single)
}

pub fn random_engine(seed: u64) -> Engine {
    let net = PolicyNet::random(NetworkConfig::reference(0.0625), seed).unwrap();
    Engine::new(Arc::new(net), EnsembleMode::Single)
}
