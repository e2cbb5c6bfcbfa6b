//! Move generation shared by GTP, the game service and self-play.

use std::sync::Arc;

use crossgo_core::model::{ensemble_predict, EnsembleMode, ModelError, ScoreModel};
use crossgo_core::{BoardState, Move, PolicyOutput};

pub type SharedModel = Arc<dyn ScoreModel + Send + Sync>;

/// A frozen network plus the inference mode. Holds no game state, so one
/// engine serves any number of games.
#[derive(Clone)]
pub struct Engine {
    model: SharedModel,
    mode: EnsembleMode,
}

impl Engine {
    pub fn new(model: SharedModel, mode: EnsembleMode) -> Engine {
        Engine { model, mode }
    }

    pub fn mode(&self) -> EnsembleMode {
        self.mode
    }

    pub fn analyze(&self, state: &BoardState) -> Result<PolicyOutput, ModelError> {
        ensemble_predict(self.model.as_ref(), state, self.mode)
    }

    /// The engine's move: best legal point, or a pass when none is legal.
    pub fn genmove(&self, state: &BoardState) -> Result<(Move, PolicyOutput), ModelError> {
        let out = self.analyze(state)?;
        Ok((out.select_move(), out))
    }
}
