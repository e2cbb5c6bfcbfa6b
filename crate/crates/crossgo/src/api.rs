//! JSON game service over WebSocket.
//!
//! Every request is one JSON text frame with a `type` field and gets
//! exactly one reply frame. The schema is described in `docs/protocol.md`.
//! The same port serves static files over plain HTTP so a browser client
//! can be loaded from it.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tungstenite::Message;

use crossgo_core::{BoardState, Color, IllegalMove, Move, Point, NET_BOARD_SIZE};

use crate::engine::Engine;
use crate::vertex::{format_vertex, parse_vertex};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    NewGame {
        /// Color the engine plays; White unless given.
        #[serde(default)]
        engine_color: Option<Color>,
    },
    Play {
        session: u64,
        vertex: String,
        /// Whether the engine answers right away (default true).
        #[serde(default)]
        reply: Option<bool>,
    },
    Genmove {
        session: u64,
    },
    TopMoves {
        session: u64,
        #[serde(default)]
        k: Option<usize>,
    },
    BoardState {
        session: u64,
    },
    Undo {
        session: u64,
        /// Plies to take back (default 2: the human move and the reply).
        #[serde(default)]
        plies: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopMove {
    pub vertex: String,
    pub probability: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Captures {
    pub black: u32,
    pub white: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateMessage {
    pub protocol: u32,
    pub session: u64,
    pub size: usize,
    /// One string per row, top row first: `X` black, `O` white, `.` empty.
    pub board: Vec<String>,
    pub to_move: Color,
    pub engine_color: Color,
    pub move_number: usize,
    pub last_move: Option<String>,
    pub captures: Captures,
    /// The engine's move made while handling this request, if any.
    pub engine_move: Option<String>,
    /// Top moves the engine chose `engine_move` from; empty otherwise.
    pub top_moves: Vec<TopMove>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Reply {
    State(StateMessage),
    TopMoves { session: u64, moves: Vec<TopMove> },
    Error { code: String, message: String },
}

impl Reply {
    fn error(code: &str, message: impl Into<String>) -> Reply {
        Reply::Error {
            code: code.to_string(),
            message: message.into(),
        }
    }

    fn illegal(rule: IllegalMove) -> Reply {
        Reply::error(rule.as_str(), format!("illegal move: {rule}"))
    }
}

/// One move of a session, with the top moves the engine saw when it was
/// the engine's move.
#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    pub color: Color,
    pub mv: Move,
    pub engine: Option<Vec<TopMove>>,
}

#[derive(Debug, Clone)]
pub struct GameSession {
    pub id: u64,
    pub state: BoardState,
    pub engine_color: Color,
    pub log: Vec<LogEntry>,
}

impl GameSession {
    /// Position reached by replaying the move log from an empty board.
    pub fn replay_log(&self) -> Result<BoardState, IllegalMove> {
        let mut s = BoardState::new(self.state.size()).expect("valid size");
        for e in &self.log {
            s.apply(e.mv, e.color)?;
        }
        Ok(s)
    }
}

fn top_moves(out: &crossgo_core::PolicyOutput, k: usize) -> Vec<TopMove> {
    out.top_k(k)
        .into_iter()
        .map(|(mv, p)| TopMove {
            vertex: format_vertex(mv, out.size),
            probability: p,
        })
        .collect()
}

/// Session table plus the shared engine. Each session is locked for the
/// whole of a request, so requests to one game are serialized while
/// different games proceed in parallel.
pub struct GameService {
    engine: Engine,
    sessions: Mutex<HashMap<u64, Arc<Mutex<GameSession>>>>,
    next_id: AtomicU64,
}

impl GameService {
    pub fn new(engine: Engine) -> GameService {
        GameService {
            engine,
            sessions: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn session(&self, id: u64) -> Option<Arc<Mutex<GameSession>>> {
        self.sessions.lock().expect("session table").get(&id).cloned()
    }

    fn state_message(session: &GameSession, engine_move: Option<&LogEntry>) -> StateMessage {
        let s = &session.state;
        let size = s.size();
        let board = s
            .points()
            .chunks(size)
            .map(|row| {
                row.iter()
                    .map(|p| match p {
                        Point::Empty => '.',
                        Point::Black => 'X',
                        Point::White => 'O',
                    })
                    .collect()
            })
            .collect();
        StateMessage {
            protocol: PROTOCOL_VERSION,
            session: session.id,
            size,
            board,
            to_move: s.to_move(),
            engine_color: session.engine_color,
            move_number: s.history().len(),
            last_move: s.last_move().map(|(mv, _)| format_vertex(mv, size)),
            captures: Captures {
                black: s.captures(Color::Black),
                white: s.captures(Color::White),
            },
            engine_move: engine_move.map(|e| format_vertex(e.mv, size)),
            top_moves: engine_move.and_then(|e| e.engine.clone()).unwrap_or_default(),
        }
    }

    fn engine_move(&self, session: &mut GameSession) -> Result<LogEntry, Reply> {
        let (mv, out) = self
            .engine
            .genmove(&session.state)
            .map_err(|e| Reply::error("engine_error", e.to_string()))?;
        let color = session.state.to_move();
        session.state = session.state.play(mv).map_err(Reply::illegal)?;
        let entry = LogEntry {
            color,
            mv,
            engine: Some(top_moves(&out, DEFAULT_TOP_K)),
        };
        session.log.push(entry.clone());
        Ok(entry)
    }

    pub fn handle(&self, request: Request) -> Reply {
        match self.try_handle(request) {
            Ok(r) | Err(r) => r,
        }
    }

    fn try_handle(&self, request: Request) -> Result<Reply, Reply> {
        let lookup = |id: u64| {
            self.session(id)
                .ok_or_else(|| Reply::error("unknown_session", format!("no session {id}")))
        };
        match request {
            Request::NewGame { engine_color } => {
                let id = self.next_id.fetch_add(1, Ordering::Relaxed);
                let mut session = GameSession {
                    id,
                    state: BoardState::new(NET_BOARD_SIZE).expect("valid size"),
                    engine_color: engine_color.unwrap_or(Color::White),
                    log: Vec::new(),
                };
                let first = if session.engine_color == Color::Black {
                    Some(self.engine_move(&mut session)?)
                } else {
                    None
                };
                let reply = Reply::State(Self::state_message(&session, first.as_ref()));
                self.sessions
                    .lock()
                    .expect("session table")
                    .insert(id, Arc::new(Mutex::new(session)));
                Ok(reply)
            }
            Request::Play { session, vertex, reply } => {
                let handle = lookup(session)?;
                let mut s = handle.lock().expect("session");
                let size = s.state.size();
                let mv = parse_vertex(&vertex, size).ok_or_else(|| Reply::error("bad_request", format!("bad vertex {vertex:?}")))?;
                let color = s.state.to_move();
                s.state = s.state.play(mv).map_err(Reply::illegal)?;
                s.log.push(LogEntry { color, mv, engine: None });
                let answer = if reply.unwrap_or(true) {
                    Some(self.engine_move(&mut s)?)
                } else {
                    None
                };
                Ok(Reply::State(Self::state_message(&s, answer.as_ref())))
            }
            Request::Genmove { session } => {
                let handle = lookup(session)?;
                let mut s = handle.lock().expect("session");
                let entry = self.engine_move(&mut s)?;
                Ok(Reply::State(Self::state_message(&s, Some(&entry))))
            }
            Request::TopMoves { session, k } => {
                let handle = lookup(session)?;
                let s = handle.lock().expect("session");
                let out = self
                    .engine
                    .analyze(&s.state)
                    .map_err(|e| Reply::error("engine_error", e.to_string()))?;
                Ok(Reply::TopMoves {
                    session,
                    moves: top_moves(&out, k.unwrap_or(DEFAULT_TOP_K)),
                })
            }
            Request::BoardState { session } => {
                let handle = lookup(session)?;
                let s = handle.lock().expect("session");
                Ok(Reply::State(Self::state_message(&s, None)))
            }
            Request::Undo { session, plies } => {
                let handle = lookup(session)?;
                let mut s = handle.lock().expect("session");
                let plies = plies.unwrap_or(2);
                if plies > s.log.len() {
                    return Err(Reply::error("nothing_to_undo", format!("only {} moves played", s.log.len())));
                }
                let keep = s.log.len() - plies;
                s.log.truncate(keep);
                s.state = s.replay_log().expect("log was legal");
                Ok(Reply::State(Self::state_message(&s, None)))
            }
        }
    }

    /// Handles one JSON text frame. A top-level `id` in the request is
    /// echoed in the reply.
    pub fn handle_text(&self, text: &str) -> String {
        let parsed: Result<Value, _> = serde_json::from_str(text);
        let (id, reply) = match parsed {
            Err(e) => (None, Reply::error("bad_request", e.to_string())),
            Ok(value) => {
                let id = value.get("id").cloned();
                let reply = match serde_json::from_value::<Request>(value) {
                    Ok(req) => self.handle(req),
                    Err(e) => Reply::error("bad_request", e.to_string()),
                };
                (id, reply)
            }
        };
        let mut value = serde_json::to_value(&reply).expect("reply serializes");
        if let (Some(id), Some(obj)) = (id, value.as_object_mut()) {
            obj.insert("id".into(), id);
        }
        value.to_string()
    }
}

/// Listens for WebSocket clients (and plain HTTP requests for static
/// files) and serves each connection on its own thread.
pub struct ApiServer {
    listener: TcpListener,
    service: Arc<GameService>,
    static_dir: Option<PathBuf>,
}

impl ApiServer {
    pub fn bind<A: ToSocketAddrs>(addr: A, service: Arc<GameService>, static_dir: Option<PathBuf>) -> io::Result<ApiServer> {
        Ok(ApiServer {
            listener: TcpListener::bind(addr)?,
            service,
            static_dir,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    pub fn run(self) -> io::Result<()> {
        let static_dir = Arc::new(self.static_dir);
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let service = Arc::clone(&self.service);
            let static_dir = Arc::clone(&static_dir);
            thread::spawn(move || {
                if let Err(e) = handle_connection(stream, &service, static_dir.as_ref().as_deref()) {
                    log::debug!("connection closed: {e}");
                }
            });
        }
        Ok(())
    }
}

/// Reads until the end of the request head without consuming it.
fn peek_head(stream: &TcpStream) -> io::Result<String> {
    let mut buf = vec![0u8; 8192];
    for _ in 0..200 {
        let n = stream.peek(&mut buf)?;
        if n == 0 {
            return Err(io::ErrorKind::UnexpectedEof.into());
        }
        if let Some(end) = buf[..n].windows(4).position(|w| w == b"\r\n\r\n") {
            return Ok(String::from_utf8_lossy(&buf[..end + 4]).into_owned());
        }
        if n == buf.len() {
            break;
        }
        thread::sleep(Duration::from_millis(5));
    }
    Err(io::Error::new(io::ErrorKind::InvalidData, "request head too long or incomplete"))
}

fn handle_connection(mut stream: TcpStream, service: &GameService, static_dir: Option<&Path>) -> io::Result<()> {
    let head = peek_head(&stream)?;
    let is_upgrade = head
        .lines()
        .any(|l| l.to_ascii_lowercase().starts_with("upgrade:") && l.to_ascii_lowercase().contains("websocket"));
    if !is_upgrade {
        let mut consumed = vec![0u8; head.len()];
        stream.read_exact(&mut consumed)?;
        return serve_static(&mut stream, &head, static_dir);
    }
    let mut ws = tungstenite::accept(stream).map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))?;
    loop {
        let msg = match ws.read() {
            Ok(m) => m,
            Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(io::Error::new(io::ErrorKind::Other, e.to_string())),
        };
        let reply = match msg {
            Message::Text(text) => service.handle_text(&text),
            Message::Binary(_) => service.handle_text("binary frames are not supported"),
            Message::Close(_) => return Ok(()),
            _ => continue,
        };
        ws.send(Message::Text(reply))
            .map_err(|e| io::Error::new(io::ErrorKind::Other, e.to_string()))?;
    }
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript",
        "css" => "text/css",
        "json" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        _ => "application/octet-stream",
    }
}

fn serve_static(stream: &mut TcpStream, head: &str, static_dir: Option<&Path>) -> io::Result<()> {
    let mut parts = head.lines().next().unwrap_or("").split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));
    let respond = |stream: &mut TcpStream, status: &str, ctype: &str, body: &[u8]| {
        write!(
            stream,
            "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
            body.len()
        )?;
        stream.write_all(body)
    };
    if method != "GET" {
        return respond(stream, "405 Method Not Allowed", "text/plain", b"method not allowed\n");
    }
    let path = target.split('?').next().unwrap_or("/");
    let relative = PathBuf::from(path.trim_start_matches('/'));
    let safe = relative.components().all(|c| matches!(c, Component::Normal(_)));
    let file = static_dir.filter(|_| safe).map(|dir| {
        let p = dir.join(&relative);
        if p.is_dir() {
            p.join("index.html")
        } else {
            p
        }
    });
    match file.as_ref().map(|f| (f, fs::read(f))) {
        Some((f, Ok(body))) => respond(stream, "200 OK", content_type(f), &body),
        _ => respond(stream, "404 Not Found", "text/plain", b"not found\n"),
    }
}
