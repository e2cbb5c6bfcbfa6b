use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crossgo::api::{ApiServer, GameService};
use crossgo::checkpoint::{load_checkpoint, save_checkpoint, NetworkDescriptor};
use crossgo::dataset::{compile_dataset, CompileOptions};
use crossgo::engine::Engine;
use crossgo::gtp::gtp_serve;
use crossgo::selfplay::selfplay_game;
use crossgo::sgf::{parse_sgf, replay, write_sgf};
use crossgo::shard::load_pairs;
use crossgo::train::{evaluate, train, TrainConfig, TrainError};
use crossgo_core::features::{encode_any_size, NUM_PLANES};
use crossgo_core::model::EnsembleMode;
use crossgo_core::PolicyNet;

type Result<T> = std::result::Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "crossgo", version, about = "Cross-convolution Go policy network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a directory of SGF files into train/test shards.
    Compile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0.9)]
        split: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        shard_capacity: usize,
        /// Board symmetries emitted per position (1 = as played).
        #[arg(long, default_value_t = 1)]
        symmetries: usize,
    },
    /// Train a network on compiled shards.
    Train {
        #[arg(long)]
        shards: PathBuf,
        /// TOML file with optional [train] and [network] tables.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Continue from this checkpoint instead of a fresh network.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Shard name prefix to train on.
        #[arg(long, default_value = "train")]
        split: String,
    },
    /// Report top-k accuracy of a checkpoint on compiled shards.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        shards: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        topk: Vec<usize>,
        #[arg(long, default_value = "test")]
        split: String,
        /// Use only the identity symmetry.
        #[arg(long)]
        single: bool,
    },
    /// Speak GTP on stdin/stdout.
    Gtp {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        single: bool,
    },
    /// Run the WebSocket game service.
    Serve {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// 0 picks a free port.
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory of static files served over HTTP.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long)]
        single: bool,
    },
    /// Let the engine play itself and write SGF files.
    Selfplay {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 1)]
        games: usize,
        #[arg(long, default_value_t = 400)]
        max_moves: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        single: bool,
    },
    /// Write a freshly initialized checkpoint.
    Init {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0.125)]
        width: f32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// All weights zero instead of random.
        #[arg(long)]
        zero: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print one feature plane of a position from an SGF file.
    Features {
        #[arg(long)]
        sgf: PathBuf,
        /// Number of moves to play before encoding.
        #[arg(long, default_value_t = 0)]
        moves: usize,
        #[arg(long)]
        plane: Option<usize>,
    },
}

#[derive(Deserialize, Default)]
struct RunConfig {
    #[serde(default)]
    train: TrainConfig,
    network: Option<NetworkDescriptor>,
}

fn read_run_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => Ok(toml::from_str(&fs::read_to_string(p)?)?),
        None => Ok(RunConfig::default()),
    }
}

fn network_for(run: &RunConfig) -> Result<crossgo_core::NetworkConfig> {
    let descriptor = run
        .network
        .clone()
        .unwrap_or_else(|| NetworkDescriptor::reference(run.train.width_multiplier));
    Ok(descriptor.resolve()?)
}

fn mode(single: bool) -> EnsembleMode {
    if single {
        EnsembleMode::Single
    } else {
        EnsembleMode::Full
    }
}

fn engine_from(checkpoint: &Path, single: bool) -> Result<Engine> {
    let net = load_checkpoint(checkpoint)?;
    Ok(Engine::new(Arc::new(net), mode(single)))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compile {
            input,
            output,
            split,
            seed,
            shard_capacity,
            symmetries,
        } => {
            let options = CompileOptions {
                split_fraction: split,
                seed,
                shard_capacity,
                symmetries,
            };
            let report = compile_dataset(&input, &output, &options)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Train {
            shards,
            config,
            out,
            checkpoint,
            split,
        } => {
            let run = read_run_config(config.as_deref())?;
            let net = match checkpoint {
                Some(p) => load_checkpoint(&p)?,
                None => PolicyNet::random(network_for(&run)?, run.train.init_seed)?,
            };
            let data = load_pairs(&shards, &split)?;
            log::info!("{} examples, {} parameters", data.len(), net.parameter_count());
            fs::create_dir_all(&out)?;
            let (net, history) = train(net, &data, &run.train, |summary, net| {
                let path = out.join(format!("epoch-{:03}.cgpn", summary.epoch + 1));
                save_checkpoint(&path, net).map_err(|e| TrainError::Config(e.to_string()))?;
                Ok(())
            })?;
            save_checkpoint(&out.join("final.cgpn"), &net)?;
            fs::write(out.join("history.json"), serde_json::to_string_pretty(&history)?)?;
            if let Some(last) = history.epochs.last() {
                println!("{}", serde_json::to_string(last)?);
            }
        }
        Command::Eval {
            checkpoint,
            shards,
            topk,
            split,
            single,
        } => {
            let net = load_checkpoint(&checkpoint)?;
            let data = load_pairs(&shards, &split)?;
            let report = evaluate(&net, &data, &topk, mode(single))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Gtp { checkpoint, single } => {
            let engine = engine_from(&checkpoint, single)?;
            gtp_serve(engine, io::stdin().lock(), io::stdout().lock())?;
        }
        Command::Serve {
            checkpoint,
            host,
            port,
            static_dir,
            single,
        } => {
            let engine = engine_from(&checkpoint, single)?;
            let server = ApiServer::bind((host.as_str(), port), Arc::new(GameService::new(engine)), static_dir)?;
            println!("listening on {}", server.local_addr()?);
            io::stdout().flush()?;
            server.run()?;
        }
        Command::Selfplay {
            checkpoint,
            games,
            max_moves,
            out,
            single,
        } => {
            let engine = engine_from(&checkpoint, single)?;
            fs::create_dir_all(&out)?;
            for g in 0..games {
                let record = selfplay_game(&engine, max_moves)?;
                let path = out.join(format!("selfplay-{g:04}.sgf"));
                fs::write(&path, write_sgf(&record))?;
                println!("{} ({} moves)", path.display(), record.moves.len());
            }
        }
        Command::Init {
            config,
            width,
            seed,
            zero,
            out,
        } => {
            let cfg = match config {
                Some(p) => network_for(&read_run_config(Some(&p))?)?,
                None => NetworkDescriptor::reference(width).resolve()?,
            };
            let net = if zero {
                PolicyNet::new(cfg)?
            } else {
                PolicyNet::random(cfg, seed)?
            };
            save_checkpoint(&out, &net)?;
            println!("{} parameters written to {}", net.parameter_count(), out.display());
        }
        Command::Features { sgf, moves, plane } => {
            let record = parse_sgf(&String::from_utf8_lossy(&fs::read(&sgf)?))?;
            let (states, _) = replay(&record)?;
            let state = match states.get(moves) {
                Some((s, _)) => s.clone(),
                None => crossgo::sgf::final_state(&record)?,
            };
            let features = encode_any_size(&state);
            let planes: Vec<usize> = match plane {
                Some(p) if p < NUM_PLANES => vec![p],
                Some(p) => return Err(format!("plane {p} out of range").into()),
                None => (0..NUM_PLANES).collect(),
            };
            println!("{state}");
            for p in planes {
                println!("plane {p}:\n{}", features.planes.render(p));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
