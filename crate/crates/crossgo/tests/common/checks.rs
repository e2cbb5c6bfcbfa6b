//! Check routines shared by the integration tests and the acceptance runner.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use super::{pro_corpus, random_engine, zero_engine};
use crossgo::dataset::{compile_dataset, game_pairs, CompileOptions, CompileReport};
use crossgo::gtp::{gtp_serve, GtpSession};
use crossgo::sgf::parse_sgf;
use crossgo::shard::{decode_record, encode_record, load_pairs, record_bytes, Shard, StateMovePair};
use crossgo::vertex::{format_vertex, parse_vertex};
use crossgo_core::features::PLANE_LEGAL;
use crossgo_core::{BoardState, Color, Move};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn compile(input: &Path, seed: u64) -> (tempfile::TempDir, CompileReport) {
    let out = tempfile::tempdir().unwrap();
    let opts = CompileOptions {
        seed,
        ..CompileOptions::default()
    };
    let report = compile_dataset(input, out.path(), &opts).unwrap();
    (out, report)
}

pub fn pairs_of(dir: &Path, names: &[String]) -> Vec<StateMovePair> {
    names
        .iter()
        .flat_map(|n| {
            let record = parse_sgf(&String::from_utf8_lossy(&fs::read(dir.join(n)).unwrap())).unwrap();
            game_pairs(&record, 1).unwrap().0
        })
        .collect()
}

pub const SCRIPT: &str = "\
1 protocol_version
2 name
3 version
4 known_command genmove
5 known_command fly
6 boardsize 19
7 boardsize 13
8 clear_board
9 komi 6.5
10 play b Q16
11 play w D4
12 play b Q16
13 play b Z99
# the engine takes over
14 genmove b
15 genmove w
16 frobnicate
17 undo
18 genmove white
19 play B pass
20 showboard
21 top_moves 3
name
22 play b
23 quit
24 name
";

pub const GOLDEN: &str = "\
=1 2

=2 crossgo

=3 0.1.0

=4 true

=5 false

=6

?7 unacceptable size

=8

=9

=10

=11

?12 illegal move

?13 syntax error

=14 A19

=15 B19

?16 unknown command

=17

=18 B19

=19

=20
   A B C D E F G H J K L M N O P Q R S T
19 X O . . . . . . . . . . . . . . . . . 19
18 . . . . . . . . . . . . . . . . . . . 18
17 . . . . . . . . . . . . . . . . . . . 17
16 . . . . . . . . . . . . . . . X . . . 16
15 . . . . . . . . . . . . . . . . . . . 15
14 . . . . . . . . . . . . . . . . . . . 14
13 . . . . . . . . . . . . . . . . . . . 13
12 . . . . . . . . . . . . . . . . . . . 12
11 . . . . . . . . . . . . . . . . . . . 11
10 . . . . . . . . . . . . . . . . . . . 10
 9 . . . . . . . . . . . . . . . . . . . 9
 8 . . . . . . . . . . . . . . . . . . . 8
 7 . . . . . . . . . . . . . . . . . . . 7
 6 . . . . . . . . . . . . . . . . . . . 6
 5 . . . . . . . . . . . . . . . . . . . 5
 4 . . . O . . . . . . . . . . . . . . . 4
 3 . . . . . . . . . . . . . . . . . . . 3
 2 . . . . . . . . . . . . . . . . . . . 2
 1 . . . . . . . . . . . . . . . . . . . 1
   A B C D E F G H J K L M N O P Q R S T

=21 C19 0.0028 D19 0.0028 E19 0.0028

= crossgo

?22 syntax error

=23

";

pub fn same_seed_gives_identical_bytes() {
    let corpus = pro_corpus();
    let (a, ra) = compile(&corpus, 3);
    let (b, rb) = compile(&corpus, 3);
    assert_eq!(ra, rb);
    assert!(!ra.shards.is_empty());
    for name in ra.shards.iter().chain(std::iter::once(&"report.json".to_string())) {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let (_, rc) = compile(&corpus, 4);
    assert_ne!(ra.train_games, rc.train_games);
}

pub fn shards_hold_every_game_whole_in_one_split() {
    let corpus = pro_corpus();
    let (out, report) = compile(&corpus, 1);
    assert_eq!(report.games_read, 36);
    assert!(report.games_skipped.is_empty());
    let train: BTreeSet<_> = report.train_games.iter().collect();
    let test: BTreeSet<_> = report.test_games.iter().collect();
    assert!(train.is_disjoint(&test));
    assert_eq!(train.len() + test.len(), 36);
    assert_eq!(train.len(), 32);

    // Recomputing each split game by game reproduces the shard contents,
    // so no game contributes a position to the other split.
    let stored_train = load_pairs(out.path(), "train").unwrap();
    let stored_test = load_pairs(out.path(), "test").unwrap();
    assert_eq!(stored_train, pairs_of(&corpus, &report.train_games));
    assert_eq!(stored_test, pairs_of(&corpus, &report.test_games));
    assert_eq!(stored_train.len(), report.train_pairs);
    assert_eq!(stored_test.len(), report.test_pairs);

    for pair in stored_train.iter().chain(&stored_test) {
        assert!(pair.planes.get(PLANE_LEGAL, pair.label as usize), "label on an illegal point");
    }
}

pub fn record_codec_round_trips_sampled_records() {
    let (out, _) = compile(&pro_corpus(), 2);
    let shard = Shard::open(&out.path().join("train-00000.cgsh")).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let pair = shard.get(rng.gen_range(0..shard.len())).unwrap();
        let mut bytes = Vec::new();
        encode_record(&pair, &mut bytes);
        assert_eq!(bytes.len(), record_bytes(19, 24));
        assert_eq!(decode_record(&bytes, 19, 24).unwrap(), pair);
    }
}

pub fn golden_transcript() {
    let commands = SCRIPT.lines().filter(|l| !l.starts_with('#')).count();
    assert!(commands >= 20);
    let mut out = Vec::new();
    gtp_serve(zero_engine(), SCRIPT.as_bytes(), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text, GOLDEN);
}

pub fn stress_session_never_plays_illegally() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut session = GtpSession::new(random_engine(12));
    let mut mirror = BoardState::new(19).unwrap();
    let mut engine_moves = 0;
    for i in 0..500 {
        let color = mirror.to_move();
        let name = if color == Color::Black { "b" } else { "w" };
        if i % 3 == 2 {
            // An outside move, like an opponent engine would send.
            let legal: Vec<Move> = mirror.legal_moves();
            let mv = legal[rng.gen_range(0..legal.len())];
            let reply = session.handle_line(&format!("{i} play {name} {}", format_vertex(mv, 19))).unwrap();
            assert_eq!(reply, format!("={i}\n\n"));
            mirror = mirror.play(mv).unwrap();
        } else {
            let reply = session.handle_line(&format!("{i} genmove {name}")).unwrap();
            let vertex = reply
                .strip_prefix(&format!("={i} "))
                .and_then(|r| r.strip_suffix("\n\n"))
                .unwrap_or_else(|| panic!("bad reply {reply:?}"));
            let mv = parse_vertex(vertex, 19).unwrap();
            if mv == Move::Pass {
                assert!(mirror.legal_moves().iter().all(|m| *m == Move::Pass));
            }
            mirror = mirror.play(mv).unwrap_or_else(|e| panic!("engine move {vertex} illegal: {e}"));
            engine_moves += 1;
        }
        assert_eq!(session.state().points(), mirror.points());
    }
    assert!(engine_moves >= 300);
}
