//! Go Text Protocol front end.
//!
//! Besides the required commands this answers `showboard`, `undo` and a
//! `top_moves [k]` extension listing the most probable moves.

use std::io::{self, BufRead, Write};

use crossgo_core::{BoardState, Color, Point, NET_BOARD_SIZE};

use crate::engine::Engine;
use crate::vertex::{column_letter, format_vertex, parse_vertex};

pub const COMMANDS: &[&str] = &[
    "protocol_version",
    "name",
    "version",
    "known_command",
    "list_commands",
    "quit",
    "boardsize",
    "clear_board",
    "komi",
    "play",
    "genmove",
    "undo",
    "showboard",
    "top_moves",
];

/// One parsed command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtpCommand {
    pub id: Option<u64>,
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GtpResponse {
    pub id: Option<u64>,
    pub success: bool,
    pub payload: String,
}

impl GtpResponse {
    /// Wire form: `=id payload` or `?id message`, ended by a blank line.
    pub fn render(&self) -> String {
        let mut out = String::from(if self.success { "=" } else { "?" });
        if let Some(id) = self.id {
            out.push_str(&id.to_string());
        }
        if !self.payload.is_empty() {
            if !self.payload.starts_with('\n') {
                out.push(' ');
            }
            out.push_str(&self.payload);
        }
        out.push_str("\n\n");
        out
    }
}

/// Removes comments and control characters; `None` for lines with no
/// command.
pub fn parse_line(line: &str) -> Option<Result<GtpCommand, String>> {
    let line = line.split('#').next().unwrap_or("");
    let cleaned: String = line
        .chars()
        .filter_map(|c| match c {
            '\t' => Some(' '),
            c if c.is_control() => None,
            c => Some(c),
        })
        .collect();
    let mut words = cleaned.split_whitespace();
    let first = words.next()?;
    let (id, name) = match first.parse::<u64>() {
        Ok(id) => match words.next() {
            Some(name) => (Some(id), name),
            None => return Some(Err(format!("command id {id} without command"))),
        },
        Err(_) if first.starts_with(|c: char| c.is_ascii_digit()) => {
            return Some(Err(format!("bad command id {first:?}")))
        }
        Err(_) => (None, first),
    };
    Some(Ok(GtpCommand {
        id,
        name: name.to_string(),
        args: words.map(str::to_string).collect(),
    }))
}

fn parse_color(s: &str) -> Option<Color> {
    match s.to_ascii_lowercase().as_str() {
        "b" | "black" => Some(Color::Black),
        "w" | "white" => Some(Color::White),
        _ => None,
    }
}

/// Board text: rows 19 down to 1, columns A–T without I, `X` for Black,
/// `O` for White.
pub fn render_board(state: &BoardState) -> String {
    let size = state.size();
    let letters: Vec<String> = (0..size).map(|c| column_letter(c).to_string()).collect();
    let header = format!("   {}", letters.join(" "));
    let mut out = header.clone();
    out.push('\n');
    for row in 0..size {
        let number = size - row;
        out.push_str(&format!("{number:>2}"));
        for col in 0..size {
            out.push(' ');
            out.push(match state.points()[row * size + col] {
                Point::Empty => '.',
                Point::Black => 'X',
                Point::White => 'O',
            });
        }
        out.push_str(&format!(" {number}\n"));
    }
    out.push_str(&header);
    out
}

pub struct GtpSession {
    engine: Engine,
    state: BoardState,
    komi: f32,
    quit: bool,
}

impl GtpSession {
    pub fn new(engine: Engine) -> GtpSession {
        GtpSession {
            engine,
            state: BoardState::new(NET_BOARD_SIZE).expect("valid size"),
            komi: 7.5,
            quit: false,
        }
    }

    pub fn state(&self) -> &BoardState {
        &self.state
    }

    pub fn komi(&self) -> f32 {
        self.komi
    }

    pub fn should_quit(&self) -> bool {
        self.quit
    }

    pub fn execute(&mut self, cmd: &GtpCommand) -> GtpResponse {
        let (success, payload) = match self.dispatch(cmd) {
            Ok(p) => (true, p),
            Err(e) => (false, e),
        };
        GtpResponse {
            id: cmd.id,
            success,
            payload,
        }
    }

    fn dispatch(&mut self, cmd: &GtpCommand) -> Result<String, String> {
        let args = &cmd.args;
        let arg = |i: usize| args.get(i).map(String::as_str).ok_or_else(|| "syntax error".to_string());
        match cmd.name.as_str() {
            "protocol_version" => Ok("2".into()),
            "name" => Ok("crossgo".into()),
            "version" => Ok(env!("CARGO_PKG_VERSION").into()),
            "known_command" => Ok(COMMANDS.contains(&arg(0)?).to_string()),
            "list_commands" => Ok(COMMANDS.join("\n")),
            "quit" => {
                self.quit = true;
                Ok(String::new())
            }
            "boardsize" => {
                let n: usize = arg(0)?.parse().map_err(|_| "syntax error".to_string())?;
                if n != NET_BOARD_SIZE {
                    return Err("unacceptable size".into());
                }
                self.state = BoardState::new(n).expect("valid size");
                Ok(String::new())
            }
            "clear_board" => {
                self.state = BoardState::new(self.state.size()).expect("valid size");
                Ok(String::new())
            }
            "komi" => {
                self.komi = arg(0)?.parse().map_err(|_| "syntax error".to_string())?;
                Ok(String::new())
            }
            "play" => {
                let color = parse_color(arg(0)?).ok_or("syntax error")?;
                let mv = parse_vertex(arg(1)?, self.state.size()).ok_or("syntax error")?;
                self.state = self.state.play_as(mv, color).map_err(|_| "illegal move".to_string())?;
                Ok(String::new())
            }
            "genmove" => {
                let color = parse_color(arg(0)?).ok_or("syntax error")?;
                self.state.set_to_move(color);
                let (mv, _) = self.engine.genmove(&self.state).map_err(|e| e.to_string())?;
                self.state = self.state.play(mv).map_err(|e| e.to_string())?;
                Ok(format_vertex(mv, self.state.size()))
            }
            "undo" => {
                let history = self.state.history();
                if history.is_empty() {
                    return Err("cannot undo".into());
                }
                let mut s = BoardState::with_setup(self.state.size(), self.state.setup(), self.state.first_to_move())
                    .expect("setup was valid");
                for &(mv, color) in &history[..history.len() - 1] {
                    s.apply(mv, color).expect("history was legal");
                }
                self.state = s;
                Ok(String::new())
            }
            "showboard" => Ok(format!("\n{}", render_board(&self.state))),
            "top_moves" => {
                let k = match args.first() {
                    Some(a) => a.parse().map_err(|_| "syntax error".to_string())?,
                    None => 10,
                };
                let out = self.engine.analyze(&self.state).map_err(|e| e.to_string())?;
                let items: Vec<String> = out
                    .top_k(k)
                    .into_iter()
                    .map(|(mv, p)| format!("{} {p:.4}", format_vertex(mv, self.state.size())))
                    .collect();
                Ok(items.join(" "))
            }
            _ => Err("unknown command".into()),
        }
    }

    /// Processes one input line; `None` when the line holds no command.
    pub fn handle_line(&mut self, line: &str) -> Option<String> {
        match parse_line(line)? {
            Ok(cmd) => Some(self.execute(&cmd).render()),
            Err(msg) => Some(
                GtpResponse {
                    id: None,
                    success: false,
                    payload: msg,
                }
                .render(),
            ),
        }
    }
}

/// Reads commands until `quit` or end of input.
pub fn gtp_serve<R: BufRead, W: Write>(engine: Engine, input: R, mut output: W) -> io::Result<()> {
    let mut session = GtpSession::new(engine);
    for line in input.lines() {
        if let Some(reply) = session.handle_line(&line?) {
            output.write_all(reply.as_bytes())?;
            output.flush()?;
        }
        if session.should_quit() {
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_parsing() {
        assert_eq!(parse_line("  # just a comment"), None);
        assert_eq!(parse_line(""), None);
        let c = parse_line("12 play\tb Q16 # note").unwrap().unwrap();
        assert_eq!(c.id, Some(12));
        assert_eq!(c.name, "play");
        assert_eq!(c.args, vec!["b", "Q16"]);
        assert!(parse_line("12").unwrap().is_err());
        assert!(parse_line("1x name").unwrap().is_err());
    }

    #[test]
    fn response_rendering() {
        let r = GtpResponse {
            id: Some(1),
            success: true,
            payload: "2".into(),
        };
        assert_eq!(r.render(), "=1 2\n\n");
        let r = GtpResponse {
            id: None,
            success: false,
            payload: "unknown command".into(),
        };
        assert_eq!(r.render(), "? unknown command\n\n");
        let r = GtpResponse {
            id: None,
            success: true,
            payload: String::new(),
        };
        assert_eq!(r.render(), "=\n\n");
    }
}
