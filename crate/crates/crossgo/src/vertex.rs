//! GTP vertex notation: column letters A–T without I, row numbers counted
//! from the bottom edge.

use crossgo_core::{Coord, Move};

const COLUMNS: &[u8] = b"ABCDEFGHJKLMNOPQRSTUVWXYZ";

pub fn column_letter(col: usize) -> char {
    COLUMNS[col] as char
}

pub fn format_vertex(mv: Move, size: usize) -> String {
    match mv {
        Move::Pass => "pass".to_string(),
        Move::Play(c) => format!("{}{}", column_letter(c.col as usize), size - c.row as usize),
    }
}

/// Parses `pass` or a vertex such as `Q16` (case-insensitive).
pub fn parse_vertex(text: &str, size: usize) -> Option<Move> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("pass") {
        return Some(Move::Pass);
    }
    let mut chars = text.chars();
    let letter = chars.next()?.to_ascii_uppercase();
    let col = COLUMNS.iter().position(|&c| c as char == letter)?;
    let number: usize = chars.as_str().parse().ok()?;
    if col >= size || number == 0 || number > size {
        return None;
    }
    Some(Move::Play(Coord::new(size - number, col)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners_and_skipped_i() {
        assert_eq!(format_vertex(Move::Play(Coord::new(0, 0)), 19), "A19");
        assert_eq!(format_vertex(Move::Play(Coord::new(18, 18)), 19), "T1");
        assert_eq!(format_vertex(Move::Play(Coord::new(3, 15)), 19), "Q16");
        assert_eq!(format_vertex(Move::Play(Coord::new(0, 8)), 19), "J19");
        assert_eq!(parse_vertex("q16", 19), Some(Move::Play(Coord::new(3, 15))));
        assert_eq!(parse_vertex("PASS", 19), Some(Move::Pass));
        assert_eq!(parse_vertex("I5", 19), None);
        assert_eq!(parse_vertex("A20", 19), None);
        assert_eq!(parse_vertex("A0", 19), None);
        assert_eq!(parse_vertex("H", 19), None);
    }

    #[test]
    fn round_trip_all_points() {
        for i in 0..361 {
            let mv = Move::Play(Coord::from_index(i, 19));
            assert_eq!(parse_vertex(&format_vertex(mv, 19), 19), Some(mv));
        }
    }
}
