//! The engine playing both colors.

use crossgo_core::model::ModelError;
use crossgo_core::{BoardState, Move, NET_BOARD_SIZE};

use crate::engine::Engine;
use crate::sgf::GameRecord;

/// Plays one game of at most `max_moves` moves. The engine passes only
/// when it has no legal point, and two passes in a row end the game.
pub fn selfplay_game(engine: &Engine, max_moves: usize) -> Result<GameRecord, ModelError> {
    let mut state = BoardState::new(NET_BOARD_SIZE).expect("valid size");
    let mut record = GameRecord::new(NET_BOARD_SIZE);
    record.metadata.insert("PB".into(), "crossgo".into());
    record.metadata.insert("PW".into(), "crossgo".into());
    while record.moves.len() < max_moves {
        let color = state.to_move();
        let (mv, _) = engine.genmove(&state)?;
        state = state.play(mv).expect("engine moves are legal");
        record.moves.push((color, mv));
        let n = record.moves.len();
        if n >= 2 && record.moves[n - 1].1 == Move::Pass && record.moves[n - 2].1 == Move::Pass {
            break;
        }
    }
    Ok(record)
}
