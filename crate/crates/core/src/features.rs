//! The 24-plane binary input encoding.
//!
//! | planes | content                                                   |
//! |--------|-----------------------------------------------------------|
//! | 0      | stone of the player to move                               |
//! | 1      | opponent stone                                            |
//! | 2      | empty point                                               |
//! | 3      | legal play for the player to move                         |
//! | 4–7    | liberties after playing here: 1, 2, 3, ≥4 (legal points)  |
//! | 8–15   | point played 1..=8 moves ago                              |
//! | 16–23  | liberties of the group on the point: 1..=7, ≥8            |
//!
//! Everything is relative to the player to move, so the same network
//! serves both colors.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::board::{BoardState, Move, Point};
use crate::symmetry::{transform_map, Symmetry};
use crate::{Color, NET_BOARD_SIZE};

pub const NUM_PLANES: usize = 24;

pub const PLANE_OURS: usize = 0;
pub const PLANE_THEIRS: usize = 1;
pub const PLANE_EMPTY: usize = 2;
pub const PLANE_LEGAL: usize = 3;
pub const PLANE_LIBERTIES_AFTER: usize = 4;
pub const PLANE_RECENT: usize = 8;
pub const PLANE_LIBERTIES: usize = 16;

pub const LIBERTIES_AFTER_BINS: usize = 4;
pub const RECENT_MOVES: usize = 8;
pub const LIBERTY_BINS: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("feature encoding needs a {NET_BOARD_SIZE}x{NET_BOARD_SIZE} board, got {0}x{0}")]
    BoardSize(usize),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
}

/// A stack of binary planes over a square grid, stored plane-major as
/// 0/1 bytes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Planes {
    size: usize,
    count: usize,
    bits: Vec<u8>,
}

impl Planes {
    pub fn zeros(count: usize, size: usize) -> Planes {
        Planes {
            size,
            count,
            bits: vec![0; count * size * size],
        }
    }

    /// Wraps raw plane-major 0/1 values.
    pub fn from_bits(count: usize, size: usize, bits: Vec<u8>) -> Result<Planes, FeatureError> {
        if bits.len() != count * size * size {
            return Err(FeatureError::Length {
                expected: count * size * size,
                got: bits.len(),
            });
        }
        Ok(Planes {
            size,
            count,
            bits: bits.into_iter().map(|b| (b != 0) as u8).collect(),
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.size * self.size
    }

    #[inline]
    pub fn get(&self, plane: usize, index: usize) -> bool {
        self.bits[plane * self.area() + index] != 0
    }

    #[inline]
    pub fn set(&mut self, plane: usize, index: usize, on: bool) {
        let area = self.area();
        self.bits[plane * area + index] = on as u8;
    }

    pub fn plane(&self, plane: usize) -> &[u8] {
        let area = self.area();
        &self.bits[plane * area..(plane + 1) * area]
    }

    /// All values, plane-major.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Values as `f32`, laid out as a (planes, rows, cols) tensor.
    pub fn to_f32(&self) -> Vec<f32> {
        self.bits.iter().map(|&b| b as f32).collect()
    }

    /// Applies `sym` to every plane identically.
    pub fn transform(&self, sym: Symmetry) -> Planes {
        if sym.is_identity() {
            return self.clone();
        }
        let mut bits = Vec::with_capacity(self.bits.len());
        for p in 0..self.count {
            bits.extend(transform_map(self.plane(p), self.size, sym));
        }
        Planes {
            size: self.size,
            count: self.count,
            bits,
        }
    }

    /// ASCII picture of one plane: `#` where set, `.` elsewhere.
    pub fn render(&self, plane: usize) -> String {
        let mut out = String::with_capacity(self.area() * 2);
        for row in 0..self.size {
            for col in 0..self.size {
                if col > 0 {
                    out.push(' ');
                }
                out.push(if self.get(plane, row * self.size + col) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Encoded network input for one position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureTensor {
    pub planes: Planes,
    /// The color whose stones are "ours": the player to move.
    pub perspective: Color,
}

impl FeatureTensor {
    pub fn transform(&self, sym: Symmetry) -> FeatureTensor {
        FeatureTensor {
            planes: self.planes.transform(sym),
            perspective: self.perspective,
        }
    }

    /// Legality of each point as recorded in the legal-move plane.
    pub fn legal_mask(&self) -> Vec<bool> {
        self.planes.plane(PLANE_LEGAL).iter().map(|&b| b != 0).collect()
    }
}

/// Encodes a 19×19 position from the point of view of the player to move.
pub fn encode(state: &BoardState) -> Result<FeatureTensor, FeatureError> {
    if state.size() != NET_BOARD_SIZE {
        return Err(FeatureError::BoardSize(state.size()));
    }
    Ok(encode_any_size(state))
}

/// [`encode`] without the board-size restriction.
pub fn encode_any_size(state: &BoardState) -> FeatureTensor {
    let size = state.size();
    let area = size * size;
    let us = state.to_move();
    let mut planes = Planes::zeros(NUM_PLANES, size);

    let liberties = state.liberty_map();
    let after = state.liberties_after_move_map();
    for i in 0..area {
        match state.points()[i].color() {
            Some(c) => {
                planes.set(if c == us { PLANE_OURS } else { PLANE_THEIRS }, i, true);
                let bin = liberties[i].clamp(1, LIBERTY_BINS) - 1;
                planes.set(PLANE_LIBERTIES + bin, i, true);
            }
            None => planes.set(PLANE_EMPTY, i, true),
        }
        if let Some(libs) = after[i] {
            planes.set(PLANE_LEGAL, i, true);
            let bin = libs.clamp(1, LIBERTIES_AFTER_BINS) - 1;
            planes.set(PLANE_LIBERTIES_AFTER + bin, i, true);
        }
    }

    // k = 1 is the most recent move. A pass uses up its slot without
    // marking anything; a point played twice keeps only its newest mark.
    let mut marked = vec![false; area];
    for (k, &(mv, _)) in state.history().iter().rev().take(RECENT_MOVES).enumerate() {
        if let Move::Play(c) = mv {
            let i = c.index(size);
            if !marked[i] {
                marked[i] = true;
                planes.set(PLANE_RECENT + k, i, true);
            }
        }
    }

    FeatureTensor {
        planes,
        perspective: us,
    }
}

/// Maps a row-major 19×19 score map through `sym`.
pub fn transform_scores(scores: &[f32], sym: Symmetry) -> Vec<f32> {
    transform_map(scores, NET_BOARD_SIZE, sym)
}

/// Undoes [`transform_scores`]: scores computed on a board transformed by
/// `sym` are mapped back onto the original board.
pub fn inverse_transform_scores(scores: &[f32], sym: Symmetry) -> Vec<f32> {
    transform_map(scores, NET_BOARD_SIZE, sym.inverse())
}

/// Color of the point from the perspective of `us`: 0 ours, 1 theirs, 2 empty.
pub fn relative_point(point: Point, us: Color) -> usize {
    match point.color() {
        Some(c) if c == us => PLANE_OURS,
        Some(_) => PLANE_THEIRS,
        None => PLANE_EMPTY,
    }
}
