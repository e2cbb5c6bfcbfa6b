//! Turning a directory of SGF files into train/test shards.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crossgo_core::features;
use crossgo_core::{Move, Symmetry, NET_BOARD_SIZE};

use crate::sgf::{parse_sgf, replay, GameRecord};
use crate::shard::{write_shard, ShardError, StateMovePair, EXTENSION};

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Shard(#[from] ShardError),
    #[error("no usable SGF games under {0}")]
    EmptyCorpus(PathBuf),
    #[error("split fraction {0} outside [0, 1]")]
    Split(f64),
    #[error("symmetry count {0} outside 1..=8")]
    Symmetries(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileOptions {
    /// Fraction of games assigned to the training split.
    pub split_fraction: f64,
    pub seed: u64,
    /// Maximum records per shard file.
    pub shard_capacity: usize,
    /// Emit each position under this many board symmetries (1 = as
    /// played). Copies of a game always land in the same split.
    pub symmetries: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            split_fraction: 0.9,
            seed: 0,
            shard_capacity: 100_000,
            symmetries: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedGame {
    pub file: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompileReport {
    pub games_read: usize,
    pub games_skipped: Vec<SkippedGame>,
    pub train_games: Vec<String>,
    pub test_games: Vec<String>,
    pub train_pairs: usize,
    pub test_pairs: usize,
    /// Games whose replay stopped at an illegal move.
    pub truncated_games: usize,
    /// Pass moves, which have no board label and produce no pair.
    pub passes_skipped: usize,
    pub shards: Vec<String>,
    pub options: CompileOptions,
}

/// Encoded pairs for one game: the state before every board move, labelled
/// with that move. Returns the pairs, the number of passes skipped and
/// whether replay was truncated.
pub fn game_pairs(record: &GameRecord, symmetries: usize) -> Result<(Vec<StateMovePair>, usize, bool), String> {
    if record.board_size != NET_BOARD_SIZE {
        return Err(format!("board size {} is not {NET_BOARD_SIZE}", record.board_size));
    }
    let (states, report) = replay(record).map_err(|e| e.to_string())?;
    let mut pairs = Vec::with_capacity(states.len() * symmetries);
    let mut passes = 0;
    for (state, mv) in &states {
        let Move::Play(coord) = *mv else {
            passes += 1;
            continue;
        };
        let encoded = features::encode(state).map_err(|e| e.to_string())?;
        let label = coord.index(NET_BOARD_SIZE);
        for sym in Symmetry::all().take(symmetries) {
            pairs.push(StateMovePair {
                planes: encoded.planes.transform(sym),
                label: sym.apply_index(label, NET_BOARD_SIZE) as u16,
            });
        }
    }
    Ok((pairs, passes, report.truncated_at.is_some()))
}

fn sgf_files(dir: &Path, out: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            sgf_files(&path, out)?;
        } else if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("sgf")) {
            out.push(path);
        }
    }
    Ok(())
}

fn write_split(
    output_dir: &Path,
    name: &str,
    pairs: &[StateMovePair],
    capacity: usize,
    shards: &mut Vec<String>,
) -> Result<(), DatasetError> {
    for (i, chunk) in pairs.chunks(capacity.max(1)).enumerate() {
        let file = format!("{name}-{i:05}.{EXTENSION}");
        write_shard(&output_dir.join(&file), chunk)?;
        shards.push(file);
    }
    Ok(())
}

/// Parses every `.sgf` under `input_dir`, splits the games (not positions)
/// into train and test with a seeded shuffle, and writes shards plus
/// `report.json` into `output_dir`.
pub fn compile_dataset(input_dir: &Path, output_dir: &Path, options: &CompileOptions) -> Result<CompileReport, DatasetError> {
    if !(0.0..=1.0).contains(&options.split_fraction) {
        return Err(DatasetError::Split(options.split_fraction));
    }
    if !(1..=8).contains(&options.symmetries) {
        return Err(DatasetError::Symmetries(options.symmetries));
    }
    let mut files = Vec::new();
    sgf_files(input_dir, &mut files)?;
    files.sort();

    let mut skipped = Vec::new();
    let mut games = Vec::new();
    for path in &files {
        let name = path.strip_prefix(input_dir).unwrap_or(path).to_string_lossy().into_owned();
        let parsed = fs::read(path)
            .map_err(|e| e.to_string())
            .and_then(|bytes| parse_sgf(&String::from_utf8_lossy(&bytes)).map_err(|e| e.to_string()))
            .and_then(|record| {
                let (pairs, passes, truncated) = game_pairs(&record, options.symmetries)?;
                if pairs.is_empty() {
                    return Err("no moves".to_string());
                }
                Ok((pairs, passes, truncated))
            });
        match parsed {
            Ok(game) => games.push((name, game)),
            Err(reason) => {
                log::warn!("skipping {name}: {reason}");
                skipped.push(SkippedGame { file: name, reason });
            }
        }
    }
    if games.is_empty() {
        return Err(DatasetError::EmptyCorpus(input_dir.to_path_buf()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    games.shuffle(&mut rng);
    let n_train = (games.len() as f64 * options.split_fraction).round() as usize;

    let mut report = CompileReport {
        games_read: files.len(),
        games_skipped: skipped,
        train_games: Vec::new(),
        test_games: Vec::new(),
        train_pairs: 0,
        test_pairs: 0,
        truncated_games: 0,
        passes_skipped: 0,
        shards: Vec::new(),
        options: options.clone(),
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, (name, (pairs, passes, truncated))) in games.into_iter().enumerate() {
        report.passes_skipped += passes;
        report.truncated_games += truncated as usize;
        if i < n_train {
            report.train_games.push(name);
            train.extend(pairs);
        } else {
            report.test_games.push(name);
            test.extend(pairs);
        }
    }
    report.train_pairs = train.len();
    report.test_pairs = test.len();

    fs::create_dir_all(output_dir)?;
    write_split(output_dir, "train", &train, options.shard_capacity, &mut report.shards)?;
    write_split(output_dir, "test", &test, options.shard_capacity, &mut report.shards)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(output_dir.join("report.json"), json + "\n")?;
    Ok(report)
}
