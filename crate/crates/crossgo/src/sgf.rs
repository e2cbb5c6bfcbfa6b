//! SGF game records: parsing the main line, writing, and replay through
//! the rules kernel.
//!
//! Only the first game of a collection and the first variation at every
//! branch point are used. Setup stones (`AB`/`AW`) are accepted before the
//! first move and rejected afterwards.

use std::collections::BTreeMap;

use crossgo_core::board::{BoardError, DEFAULT_SIZE, MAX_SIZE};
use crossgo_core::{BoardState, Color, Coord, IllegalMove, Move};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SgfError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: &'static str },
    #[error("not a Go record (GM[{0}])")]
    NotGo(String),
    #[error("unsupported board size {0:?}")]
    BoardSize(String),
    #[error("bad point value {0:?}")]
    Point(String),
    #[error("setup stones after the first move")]
    MidGameSetup,
    #[error("move {0} does not alternate colors")]
    Alternation(usize),
}

/// One game as recorded: setup position, main-line moves and the remaining
/// root properties as opaque strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameRecord {
    pub board_size: usize,
    pub setup: Vec<(Coord, Color)>,
    /// `PL` of the root node, if given.
    pub player_to_move: Option<Color>,
    pub moves: Vec<(Color, Move)>,
    pub metadata: BTreeMap<String, String>,
}

impl GameRecord {
    pub fn new(board_size: usize) -> GameRecord {
        GameRecord {
            board_size,
            setup: Vec::new(),
            player_to_move: None,
            moves: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    /// Side to move in the initial position. Handicap-style setup with no
    /// `PL` defaults to White.
    pub fn first_to_move(&self) -> Color {
        if let Some(c) = self.player_to_move {
            return c;
        }
        if let Some(&(c, _)) = self.moves.first() {
            return c;
        }
        if self.setup.is_empty() {
            Color::Black
        } else {
            Color::White
        }
    }

    pub fn initial_state(&self) -> Result<BoardState, BoardError> {
        BoardState::with_setup(self.board_size, &self.setup, self.first_to_move())
    }
}

struct Node {
    props: Vec<(String, Vec<String>)>,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: &'static str) -> Result<T, SgfError> {
        Err(SgfError::Syntax {
            offset: self.pos,
            message,
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, byte: u8, message: &'static str) -> Result<(), SgfError> {
        if self.peek() != Some(byte) {
            return self.err(message);
        }
        self.pos += 1;
        Ok(())
    }

    /// Parses `( sequence tree* )`, appending nodes to `main` when it is
    /// given. Only the first subtree continues the main line.
    fn game_tree(&mut self, main: Option<&mut Vec<Node>>) -> Result<(), SgfError> {
        self.expect(b'(', "expected '('")?;
        let mut main = main;
        let mut nodes = 0;
        while self.peek() == Some(b';') {
            let node = self.node()?;
            if let Some(m) = main.as_deref_mut() {
                m.push(node);
            }
            nodes += 1;
        }
        if nodes == 0 {
            return self.err("game tree without nodes");
        }
        let mut first = true;
        while self.peek() == Some(b'(') {
            let target = if first { main.as_deref_mut() } else { None };
            self.game_tree(target)?;
            first = false;
        }
        self.expect(b')', "expected ')'")
    }

    fn node(&mut self) -> Result<Node, SgfError> {
        self.expect(b';', "expected ';'")?;
        let mut props = Vec::new();
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_alphabetic() => {
                    let mut ident = String::new();
                    while let Some(&c) = self.src.get(self.pos) {
                        if !c.is_ascii_alphabetic() {
                            break;
                        }
                        // Old-style identifiers mix in lowercase letters.
                        if c.is_ascii_uppercase() {
                            ident.push(c as char);
                        }
                        self.pos += 1;
                    }
                    let mut values = Vec::new();
                    while self.peek() == Some(b'[') {
                        values.push(self.value()?);
                    }
                    if values.is_empty() {
                        return self.err("property without value");
                    }
                    if ident.is_empty() {
                        return self.err("property identifier without uppercase letters");
                    }
                    props.push((ident, values));
                }
                Some(b';') | Some(b'(') | Some(b')') => return Ok(Node { props }),
                Some(_) => return self.err("unexpected character"),
                None => return self.err("unexpected end of input"),
            }
        }
    }

    fn value(&mut self) -> Result<String, SgfError> {
        self.expect(b'[', "expected '['")?;
        let mut out = Vec::new();
        loop {
            match self.src.get(self.pos) {
                None => return self.err("unterminated property value"),
                Some(b']') => {
                    self.pos += 1;
                    return Ok(String::from_utf8_lossy(&out).into_owned());
                }
                Some(b'\\') => {
                    self.pos += 1;
                    match self.src.get(self.pos) {
                        None => return self.err("unterminated property value"),
                        // Soft line break.
                        Some(b'\n') => {
                            self.pos += 1;
                            if self.src.get(self.pos) == Some(&b'\r') {
                                self.pos += 1;
                            }
                        }
                        Some(b'\r') => {
                            self.pos += 1;
                            if self.src.get(self.pos) == Some(&b'\n') {
                                self.pos += 1;
                            }
                        }
                        Some(&c) => {
                            out.push(c);
                            self.pos += 1;
                        }
                    }
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

fn letter_value(c: u8) -> Option<usize> {
    match c {
        b'a'..=b'z' => Some((c - b'a') as usize),
        b'A'..=b'Z' => Some((c - b'A') as usize + 26),
        _ => None,
    }
}

fn parse_point(value: &str, size: usize) -> Result<Coord, SgfError> {
    let b = value.as_bytes();
    if b.len() != 2 {
        return Err(SgfError::Point(value.to_string()));
    }
    match (letter_value(b[0]), letter_value(b[1])) {
        (Some(col), Some(row)) if col < size && row < size => Ok(Coord::new(row, col)),
        _ => Err(SgfError::Point(value.to_string())),
    }
}

fn parse_move(value: &str, size: usize) -> Result<Move, SgfError> {
    if value.is_empty() || (value == "tt" && size <= 19) {
        return Ok(Move::Pass);
    }
    parse_point(value, size).map(Move::Play)
}

/// Expands a point list entry, either `pd` or a rectangle `aa:cc`.
fn parse_point_list(value: &str, size: usize) -> Result<Vec<Coord>, SgfError> {
    match value.split_once(':') {
        None => Ok(vec![parse_point(value, size)?]),
        Some((a, b)) => {
            let (a, b) = (parse_point(a, size)?, parse_point(b, size)?);
            let rows = a.row.min(b.row)..=a.row.max(b.row);
            let cols = a.col.min(b.col)..=a.col.max(b.col);
            Ok(rows
                .flat_map(|r| cols.clone().map(move |c| Coord::new(r as usize, c as usize)))
                .collect())
        }
    }
}

fn parse_size(value: &str) -> Result<usize, SgfError> {
    let bad = || SgfError::BoardSize(value.to_string());
    let size = match value.split_once(':') {
        Some((w, h)) => {
            let (w, h) = (w.trim().parse::<usize>().map_err(|_| bad())?, h.trim().parse::<usize>().map_err(|_| bad())?);
            if w != h {
                return Err(bad());
            }
            w
        }
        None => value.trim().parse().map_err(|_| bad())?,
    };
    if !(2..=MAX_SIZE).contains(&size) {
        return Err(bad());
    }
    Ok(size)
}

fn color_of(ident: &str) -> Option<Color> {
    match ident {
        "B" => Some(Color::Black),
        "W" => Some(Color::White),
        _ => None,
    }
}

/// Parses the main line of the first game in `text`.
pub fn parse_sgf(text: &str) -> Result<GameRecord, SgfError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    // Anything before the first '(' is ignored, as most readers do.
    parser.pos = text.find('(').ok_or(SgfError::Syntax {
        offset: 0,
        message: "no game tree",
    })?;
    let mut nodes = Vec::new();
    parser.game_tree(Some(&mut nodes))?;

    let root = &nodes[0];
    let mut size = DEFAULT_SIZE;
    for (ident, values) in &root.props {
        match ident.as_str() {
            "GM" if values[0].trim() != "1" => return Err(SgfError::NotGo(values[0].clone())),
            "SZ" => size = parse_size(&values[0])?,
            _ => {}
        }
    }

    let mut record = GameRecord::new(size);
    let mut placed: BTreeMap<Coord, Color> = BTreeMap::new();
    for (n, node) in nodes.iter().enumerate() {
        for (ident, values) in &node.props {
            match ident.as_str() {
                "AB" | "AW" | "AE" => {
                    if !record.moves.is_empty() {
                        return Err(SgfError::MidGameSetup);
                    }
                    for v in values {
                        for c in parse_point_list(v, size)? {
                            match ident.as_str() {
                                "AB" => placed.insert(c, Color::Black),
                                "AW" => placed.insert(c, Color::White),
                                _ => placed.remove(&c),
                            };
                        }
                    }
                }
                "B" | "W" => {
                    let color = color_of(ident).expect("matched above");
                    record.moves.push((color, parse_move(&values[0], size)?));
                }
                "PL" if n == 0 || record.moves.is_empty() => {
                    record.player_to_move = match values[0].trim() {
                        "B" | "b" | "1" => Some(Color::Black),
                        "W" | "w" | "2" => Some(Color::White),
                        _ => None,
                    };
                }
                _ if n == 0 => {
                    if !matches!(ident.as_str(), "SZ" | "GM" | "FF" | "CA" | "AP") {
                        record.metadata.insert(ident.clone(), values.join(","));
                    }
                }
                _ => {}
            }
        }
    }
    record.setup = placed.into_iter().collect();
    if record.setup.is_empty() {
        for (i, w) in record.moves.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(SgfError::Alternation(i + 1));
            }
        }
    }
    Ok(record)
}

fn escape(value: &str) -> String {
    value.replace('\\', "\\\\").replace(']', "\\]")
}

fn point_letters(c: Coord) -> String {
    let l = |v: u8| (if v < 26 { b'a' + v } else { b'A' + v - 26 }) as char;
    format!("{}{}", l(c.col), l(c.row))
}

/// Serializes the record as a single-line main-line SGF.
pub fn write_sgf(record: &GameRecord) -> String {
    let mut out = format!("(;GM[1]FF[4]CA[UTF-8]SZ[{}]", record.board_size);
    for (k, v) in &record.metadata {
        out.push_str(&format!("{k}[{}]", escape(v)));
    }
    for (tag, color) in [("AB", Color::Black), ("AW", Color::White)] {
        let stones: Vec<_> = record.setup.iter().filter(|s| s.1 == color).collect();
        if !stones.is_empty() {
            out.push_str(tag);
            for (c, _) in stones {
                out.push_str(&format!("[{}]", point_letters(*c)));
            }
        }
    }
    if let Some(pl) = record.player_to_move {
        out.push_str(if pl == Color::Black { "PL[B]" } else { "PL[W]" });
    }
    for &(color, mv) in &record.moves {
        let tag = if color == Color::Black { 'B' } else { 'W' };
        let value = match mv {
            Move::Pass => String::new(),
            Move::Play(c) => point_letters(c),
        };
        out.push_str(&format!(";{tag}[{value}]"));
    }
    out.push_str(")\n");
    out
}

/// Outcome of replaying a record through the rules kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub moves_in_record: usize,
    pub pairs: usize,
    /// Index of the first illegal move, when replay stopped early.
    pub truncated_at: Option<usize>,
    pub reason: Option<IllegalMove>,
}

/// State before each move together with the move. Replay stops at the
/// first illegal move; the report says where and why.
pub fn replay(record: &GameRecord) -> Result<(Vec<(BoardState, Move)>, ReplayReport), BoardError> {
    let mut state = record.initial_state()?;
    let mut pairs = Vec::with_capacity(record.moves.len());
    let mut report = ReplayReport {
        moves_in_record: record.moves.len(),
        pairs: 0,
        truncated_at: None,
        reason: None,
    };
    for (i, &(color, mv)) in record.moves.iter().enumerate() {
        if state.to_move() != color {
            state.set_to_move(color);
        }
        match state.play(mv) {
            Ok(next) => {
                pairs.push((state, mv));
                state = next;
            }
            Err(e) => {
                log::warn!("replay stopped at move {}: {}", i + 1, e);
                report.truncated_at = Some(i);
                report.reason = Some(e);
                break;
            }
        }
    }
    report.pairs = pairs.len();
    Ok((pairs, report))
}

/// Final position of a record, or the last legal position if replay stops.
pub fn final_state(record: &GameRecord) -> Result<BoardState, BoardError> {
    let (pairs, _) = replay(record)?;
    match pairs.last() {
        Some((s, mv)) => Ok(s.play(*mv).expect("replayed move is legal")),
        None => record.initial_state(),
    }
}
