//! Go rules kernel.
//!
//! Stones are placed, adjacent opponent groups without liberties are
//! removed, and only then is the mover's own group checked (suicide is
//! forbidden). Repetition is governed by positional superko: a play may not
//! recreate any whole-board position seen earlier in the game.
//!
//! `BoardState` is a value type. [`BoardState::play`] returns a new state
//! and never touches its receiver.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::symmetry::Symmetry;

pub const MIN_SIZE: usize = 2;
pub const MAX_SIZE: usize = 25;
pub const DEFAULT_SIZE: usize = 19;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Color {
    Black,
    White,
}

impl Color {
    #[inline]
    pub const fn opponent(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }

    const fn zobrist_slot(self) -> usize {
        match self {
            Color::Black => 0,
            Color::White => 1,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Black => "black",
            Color::White => "white",
        })
    }
}

/// Contents of a single intersection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Point {
    #[default]
    Empty,
    Black,
    White,
}

impl Point {
    #[inline]
    pub const fn stone(color: Color) -> Point {
        match color {
            Color::Black => Point::Black,
            Color::White => Point::White,
        }
    }

    #[inline]
    pub const fn color(self) -> Option<Color> {
        match self {
            Point::Empty => None,
            Point::Black => Some(Color::Black),
            Point::White => Some(Color::White),
        }
    }

    #[inline]
    pub const fn is_empty(self) -> bool {
        matches!(self, Point::Empty)
    }
}

/// A board intersection. Row 0 is the top edge, column 0 the left edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Coord {
    pub row: u8,
    pub col: u8,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Coord {
        Coord {
            row: row as u8,
            col: col as u8,
        }
    }

    #[inline]
    pub const fn index(self, size: usize) -> usize {
        self.row as usize * size + self.col as usize
    }

    #[inline]
    pub const fn from_index(index: usize, size: usize) -> Coord {
        Coord::new(index / size, index % size)
    }

    #[inline]
    pub const fn is_on_board(self, size: usize) -> bool {
        (self.row as usize) < size && (self.col as usize) < size
    }

    pub const fn transformed(self, sym: Symmetry, size: usize) -> Coord {
        let (r, c) = sym.apply(self.row as usize, self.col as usize, size);
        Coord::new(r, c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Move {
    Play(Coord),
    Pass,
}

impl Move {
    pub const fn coord(self) -> Option<Coord> {
        match self {
            Move::Play(c) => Some(c),
            Move::Pass => None,
        }
    }

    pub const fn transformed(self, sym: Symmetry, size: usize) -> Move {
        match self {
            Move::Play(c) => Move::Play(c.transformed(sym, size)),
            Move::Pass => Move::Pass,
        }
    }
}

/// The rule a rejected play would have broken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, thiserror::Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum IllegalMove {
    #[error("occupied")]
    Occupied,
    #[error("suicide")]
    Suicide,
    #[error("superko")]
    Superko,
    #[error("off board")]
    OffBoard,
}

impl IllegalMove {
    pub const fn as_str(self) -> &'static str {
        match self {
            IllegalMove::Occupied => "occupied",
            IllegalMove::Suicide => "suicide",
            IllegalMove::Superko => "superko",
            IllegalMove::OffBoard => "off_board",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BoardError {
    #[error("board size {0} outside {MIN_SIZE}..={MAX_SIZE}")]
    InvalidSize(usize),
    #[error("point ({}, {}) is off the board", .0.row, .0.col)]
    OffBoard(Coord),
    #[error("point ({}, {}) is empty", .0.row, .0.col)]
    EmptyPoint(Coord),
    #[error("setup stones overlap at ({}, {})", .0.row, .0.col)]
    SetupOverlap(Coord),
    #[error("setup leaves a group without liberties at ({}, {})", .0.row, .0.col)]
    SetupDeadGroup(Coord),
}

/// A maximal 4-connected group of same-colored stones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupInfo {
    pub color: Color,
    pub stones: BTreeSet<Coord>,
    pub liberties: BTreeSet<Coord>,
}

const fn splitmix64(state: u64) -> (u64, u64) {
    let state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (state, z ^ (z >> 31))
}

// One random key per (point, color), indexed by row * MAX_SIZE + col so
// that a coordinate hashes the same regardless of board size. With 64-bit
// keys the chance of any collision within a single game is ~n²/2⁶⁵.
const ZOBRIST: [[u64; 2]; MAX_SIZE * MAX_SIZE] = {
    let mut table = [[0u64; 2]; MAX_SIZE * MAX_SIZE];
    let mut state = 0x243F_6A88_85A3_08D3u64;
    let mut i = 0;
    while i < MAX_SIZE * MAX_SIZE {
        let (s, a) = splitmix64(state);
        let (s, b) = splitmix64(s);
        state = s;
        table[i] = [a, b];
        i += 1;
    }
    table
};

#[inline]
fn zobrist_key(index: usize, size: usize, color: Color) -> u64 {
    let (row, col) = (index / size, index % size);
    ZOBRIST[row * MAX_SIZE + col][color.zobrist_slot()]
}

#[inline]
fn neighbors(index: usize, size: usize) -> impl Iterator<Item = usize> {
    let (row, col) = (index / size, index % size);
    let up = (row > 0).then(|| index - size);
    let down = (row + 1 < size).then(|| index + size);
    let left = (col > 0).then(|| index - 1);
    let right = (col + 1 < size).then(|| index + 1);
    [up, down, left, right].into_iter().flatten()
}

/// Flood fill from an occupied `start`. Returns the group's stones and the
/// number of distinct liberties.
fn flood(points: &[Point], size: usize, start: usize, stones: &mut Vec<usize>) -> usize {
    let color = points[start];
    debug_assert!(!color.is_empty());
    let mut seen = vec![false; points.len()];
    let mut liberty = vec![false; points.len()];
    let mut liberties = 0;
    stones.clear();
    stones.push(start);
    seen[start] = true;
    let mut cursor = 0;
    while cursor < stones.len() {
        let here = stones[cursor];
        cursor += 1;
        for n in neighbors(here, size) {
            let p = points[n];
            if p == color && !seen[n] {
                seen[n] = true;
                stones.push(n);
            } else if p.is_empty() && !liberty[n] {
                liberty[n] = true;
                liberties += 1;
            }
        }
    }
    liberties
}

/// Result of resolving a play on a scratch copy of the board.
struct Resolved {
    points: Vec<Point>,
    hash: u64,
    captured: u32,
    liberties: usize,
}

/// A complete game position together with the history that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoardState {
    size: usize,
    points: Vec<Point>,
    to_move: Color,
    setup: Vec<(Coord, Color)>,
    first_to_move: Color,
    history: Vec<(Move, Color)>,
    hashes: Vec<u64>,
    seen: BTreeSet<u64>,
    captures_black: u32,
    captures_white: u32,
}

impl BoardState {
    /// An empty board with Black to move.
    pub fn new(size: usize) -> Result<BoardState, BoardError> {
        BoardState::with_setup(size, &[], Color::Black)
    }

    /// A board with pre-placed stones (handicap or setup) and a chosen side
    /// to move. The setup position is the first entry of the position
    /// history.
    pub fn with_setup(
        size: usize,
        stones: &[(Coord, Color)],
        to_move: Color,
    ) -> Result<BoardState, BoardError> {
        if !(MIN_SIZE..=MAX_SIZE).contains(&size) {
            return Err(BoardError::InvalidSize(size));
        }
        let mut points = vec![Point::Empty; size * size];
        let mut hash = 0;
        for &(coord, color) in stones {
            if !coord.is_on_board(size) {
                return Err(BoardError::OffBoard(coord));
            }
            let i = coord.index(size);
            if !points[i].is_empty() {
                return Err(BoardError::SetupOverlap(coord));
            }
            points[i] = Point::stone(color);
            hash ^= zobrist_key(i, size, color);
        }
        let mut scratch = Vec::new();
        for &(coord, _) in stones {
            if flood(&points, size, coord.index(size), &mut scratch) == 0 {
                return Err(BoardError::SetupDeadGroup(coord));
            }
        }
        let mut seen = BTreeSet::new();
        seen.insert(hash);
        Ok(BoardState {
            size,
            points,
            to_move,
            setup: stones.to_vec(),
            first_to_move: to_move,
            history: Vec::new(),
            hashes: vec![hash],
            seen,
            captures_black: 0,
            captures_white: 0,
        })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn to_move(&self) -> Color {
        self.to_move
    }

    #[inline]
    pub fn get(&self, coord: Coord) -> Point {
        self.points[coord.index(self.size)]
    }

    /// Row-major view of every intersection.
    #[inline]
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn history(&self) -> &[(Move, Color)] {
        &self.history
    }

    pub fn setup(&self) -> &[(Coord, Color)] {
        &self.setup
    }

    /// Side to move before the first recorded move.
    pub fn first_to_move(&self) -> Color {
        self.first_to_move
    }

    /// Signature of the starting position followed by one per completed move.
    pub fn position_hashes(&self) -> &[u64] {
        &self.hashes
    }

    /// Number of opponent stones captured by `color`.
    pub fn captures(&self, color: Color) -> u32 {
        match color {
            Color::Black => self.captures_black,
            Color::White => self.captures_white,
        }
    }

    pub fn last_move(&self) -> Option<(Move, Color)> {
        self.history.last().copied()
    }

    /// Zobrist signature of the stone layout only.
    pub fn position_signature(&self) -> u64 {
        *self.hashes.last().expect("hash history is never empty")
    }

    /// Computes the signature of the current layout from scratch.
    pub fn recompute_signature(&self) -> u64 {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.color().map(|c| zobrist_key(i, self.size, c)))
            .fold(0, |acc, k| acc ^ k)
    }

    pub fn group_at(&self, coord: Coord) -> Result<GroupInfo, BoardError> {
        if !coord.is_on_board(self.size) {
            return Err(BoardError::OffBoard(coord));
        }
        let start = coord.index(self.size);
        let color = self.points[start].color().ok_or(BoardError::EmptyPoint(coord))?;
        let mut stones = Vec::new();
        flood(&self.points, self.size, start, &mut stones);
        let mut liberties = BTreeSet::new();
        for &s in &stones {
            for n in neighbors(s, self.size) {
                if self.points[n].is_empty() {
                    liberties.insert(Coord::from_index(n, self.size));
                }
            }
        }
        Ok(GroupInfo {
            color,
            stones: stones.into_iter().map(|i| Coord::from_index(i, self.size)).collect(),
            liberties,
        })
    }

    /// Liberty count of the group on `coord`, or `None` for an empty point.
    pub fn liberty_count(&self, coord: Coord) -> Option<usize> {
        let i = coord.index(self.size);
        if self.points[i].is_empty() {
            return None;
        }
        Some(flood(&self.points, self.size, i, &mut Vec::new()))
    }

    /// Liberty count of every occupied point's group (0 on empty points).
    pub fn liberty_map(&self) -> Vec<usize> {
        let mut out = vec![0; self.points.len()];
        let mut done = vec![false; self.points.len()];
        let mut stones = Vec::new();
        for i in 0..self.points.len() {
            if self.points[i].is_empty() || done[i] {
                continue;
            }
            let libs = flood(&self.points, self.size, i, &mut stones);
            for &s in &stones {
                out[s] = libs;
                done[s] = true;
            }
        }
        out
    }

    fn resolve(&self, coord: Coord, color: Color) -> Result<Resolved, IllegalMove> {
        if !coord.is_on_board(self.size) {
            return Err(IllegalMove::OffBoard);
        }
        let at = coord.index(self.size);
        if !self.points[at].is_empty() {
            return Err(IllegalMove::Occupied);
        }
        let mut points = self.points.clone();
        let mut hash = self.position_signature() ^ zobrist_key(at, self.size, color);
        points[at] = Point::stone(color);

        let enemy = Point::stone(color.opponent());
        let mut captured = 0;
        let mut stones = Vec::new();
        for n in neighbors(at, self.size) {
            if points[n] != enemy {
                continue;
            }
            if flood(&points, self.size, n, &mut stones) == 0 {
                for &s in &stones {
                    points[s] = Point::Empty;
                    hash ^= zobrist_key(s, self.size, color.opponent());
                }
                captured += stones.len() as u32;
            }
        }

        let liberties = flood(&points, self.size, at, &mut stones);
        if liberties == 0 {
            return Err(IllegalMove::Suicide);
        }
        if self.seen.contains(&hash) {
            return Err(IllegalMove::Superko);
        }
        Ok(Resolved {
            points,
            hash,
            captured,
            liberties,
        })
    }

    /// Checks `mv` for the side to move. Passing is always legal.
    pub fn check(&self, mv: Move) -> Result<(), IllegalMove> {
        self.check_as(mv, self.to_move)
    }

    pub fn check_as(&self, mv: Move, color: Color) -> Result<(), IllegalMove> {
        match mv {
            Move::Pass => Ok(()),
            Move::Play(c) => self.resolve(c, color).map(|_| ()),
        }
    }

    #[inline]
    pub fn is_legal(&self, mv: Move) -> bool {
        self.check(mv).is_ok()
    }

    /// Plays `mv` for the side to move and returns the successor position.
    pub fn play(&self, mv: Move) -> Result<BoardState, IllegalMove> {
        self.play_as(mv, self.to_move)
    }

    /// Plays `mv` for an explicit color; the opponent of `color` moves next.
    pub fn play_as(&self, mv: Move, color: Color) -> Result<BoardState, IllegalMove> {
        let mut next = self.clone();
        next.apply(mv, color)?;
        Ok(next)
    }

    /// In-place variant of [`BoardState::play_as`]; on error the state is
    /// left unchanged.
    pub fn apply(&mut self, mv: Move, color: Color) -> Result<(), IllegalMove> {
        match mv {
            Move::Pass => {
                let hash = self.position_signature();
                self.hashes.push(hash);
            }
            Move::Play(c) => {
                let resolved = self.resolve(c, color)?;
                self.points = resolved.points;
                self.hashes.push(resolved.hash);
                self.seen.insert(resolved.hash);
                match color {
                    Color::Black => self.captures_black += resolved.captured,
                    Color::White => self.captures_white += resolved.captured,
                }
            }
        }
        self.history.push((mv, color));
        self.to_move = color.opponent();
        Ok(())
    }

    /// Every legal move for the side to move, plays in row-major order
    /// followed by `Pass`.
    pub fn legal_moves(&self) -> Vec<Move> {
        let mut moves: Vec<Move> = (0..self.points.len())
            .map(|i| Move::Play(Coord::from_index(i, self.size)))
            .filter(|&m| self.is_legal(m))
            .collect();
        moves.push(Move::Pass);
        moves
    }

    /// Per-point legality of a play for the side to move.
    pub fn legal_mask(&self) -> Vec<bool> {
        (0..self.points.len())
            .map(|i| self.is_legal(Move::Play(Coord::from_index(i, self.size))))
            .collect()
    }

    /// Liberties of the played stone's group after `coord` is played by the
    /// side to move, captures included.
    pub fn liberties_after_move(&self, coord: Coord) -> Result<usize, IllegalMove> {
        self.resolve(coord, self.to_move).map(|r| r.liberties)
    }

    /// Same as [`BoardState::liberties_after_move`] for every point; `None`
    /// where the play is illegal.
    pub fn liberties_after_move_map(&self) -> Vec<Option<usize>> {
        (0..self.points.len())
            .map(|i| self.liberties_after_move(Coord::from_index(i, self.size)).ok())
            .collect()
    }

    /// Overrides the side to move without recording a move.
    pub fn set_to_move(&mut self, color: Color) {
        self.to_move = color;
    }

    /// Rebuilds this position from its setup and move history.
    pub fn replayed(&self) -> Result<BoardState, IllegalMove> {
        let mut state = BoardState::with_setup(self.size, &self.setup, self.first_to_move)
            .expect("setup was validated on construction");
        for &(mv, color) in &self.history {
            state.apply(mv, color)?;
        }
        state.to_move = self.to_move;
        Ok(state)
    }

    /// The same game played on a board transformed by `sym`: setup stones
    /// and every move in the history are mapped and replayed.
    pub fn transformed(&self, sym: Symmetry) -> BoardState {
        let setup: Vec<_> = self
            .setup
            .iter()
            .map(|&(c, color)| (c.transformed(sym, self.size), color))
            .collect();
        let mut state = BoardState::with_setup(self.size, &setup, self.first_to_move)
            .expect("a symmetric image of a valid setup is valid");
        for &(mv, color) in &self.history {
            state
                .apply(mv.transformed(sym, self.size), color)
                .expect("symmetric image of a legal game is legal");
        }
        state.to_move = self.to_move;
        state
    }
}

impl fmt::Display for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..self.size {
            for col in 0..self.size {
                let ch = match self.points[row * self.size + col] {
                    Point::Empty => '.',
                    Point::Black => 'X',
                    Point::White => 'O',
                };
                if col > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{ch}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
