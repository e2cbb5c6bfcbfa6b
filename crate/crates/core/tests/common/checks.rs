//! Check routines shared by the unit tests and the acceptance runner.

use super::{adjacent, cross_entropy64, flood, naive_conv, random_position, rel_err, Geometry};
use crossgo_core::board::BoardError;
use crossgo_core::features::{encode, transform_scores};
use crossgo_core::model::{ensemble_scores, EnsembleMode, NetworkConfig, PolicyOutput};
use crossgo_core::nn::{
    concat_channels, cross_mask, max_cross_width, relu, relu_backward, softmax_cross_entropy, split_channels, ConvLayer,
    Tensor,
};
use crossgo_core::{BoardState, Color, Coord, IllegalMove, Move, Point, PolicyNet, Symmetry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn at(r: usize, c: usize) -> Coord {
    Coord::new(r, c)
}

pub fn play(r: usize, c: usize) -> Move {
    Move::Play(at(r, c))
}

pub fn setup(size: usize, black: &[(usize, usize)], white: &[(usize, usize)], to_move: Color) -> BoardState {
    let stones: Vec<_> = black
        .iter()
        .map(|&(r, c)| (at(r, c), Color::Black))
        .chain(white.iter().map(|&(r, c)| (at(r, c), Color::White)))
        .collect();
    BoardState::with_setup(size, &stones, to_move).unwrap()
}

/// Union of a c×c block slid corner to corner along both diagonals.
pub fn sliding_block(n: usize, c: usize) -> Vec<bool> {
    let mut cells = vec![false; n * n];
    for t in 0..=n - c {
        for (r0, q0) in [(t, t), (t, n - c - t)] {
            for r in r0..r0 + c {
                for q in q0..q0 + c {
                    cells[r * n + q] = true;
                }
            }
        }
    }
    cells
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, scale: f32) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn to64(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

pub struct Case {
    pub layer: ConvLayer,
    pub input: Tensor,
}

pub fn random_case(rng: &mut ChaCha8Rng, max_size: usize) -> Case {
    let in_ch = rng.gen_range(1..=4);
    let out_ch = rng.gen_range(1..=4);
    let k: usize = rng.gen_range(1..=7);
    let stride = rng.gen_range(1..=2);
    let pad = rng.gen_range(0..=k / 2 + 1);
    let lo = k.saturating_sub(2 * pad).max(1);
    let h = rng.gen_range(lo..=max_size.max(lo));
    let w = rng.gen_range(lo..=max_size.max(lo));
    let mask = if k >= 2 && rng.gen_bool(0.5) {
        Some(cross_mask(k, rng.gen_range(0..=max_cross_width(k) + 1)))
    } else {
        None
    };
    let mut layer = ConvLayer::new(in_ch, out_ch, k, stride, pad, mask);
    let scale = 1.0 / ((in_ch * k * k) as f32).sqrt();
    let weights = uniform(rng, out_ch * in_ch * k * k, scale);
    let bias = uniform(rng, out_ch, 1.0);
    layer.set_parameters(weights, bias).unwrap();
    let input = Tensor::from_vec(in_ch, h, w, uniform(rng, in_ch * h * w, 1.0)).unwrap();
    Case { layer, input }
}

pub fn reference_forward(layer: &ConvLayer, input: &Tensor, weights: &[f64], x: &[f64]) -> Vec<f64> {
    naive_conv(x, input.height(), input.width(), Geometry::of(layer), weights, &to64(layer.bias()))
}

pub fn masked_weights_are_zero(net: &PolicyNet) -> bool {
    net.layers().iter().all(|l| match l.mask() {
        Some(m) => {
            let k2 = l.kernel() * l.kernel();
            l.weights().iter().enumerate().all(|(i, w)| m.cells()[i % k2] || w.to_bits() == 0)
        }
        None => true,
    })
}

pub fn random_planes(rng: &mut ChaCha8Rng, count: usize, size: usize) -> crossgo_core::Planes {
    let mut p = crossgo_core::Planes::zeros(count, size);
    for plane in 0..count {
        for i in 0..size * size {
            p.set(plane, i, rng.gen_bool(0.3));
        }
    }
    p
}

pub fn small_net(seed: u64) -> PolicyNet {
    PolicyNet::random(NetworkConfig::reference(0.0625), seed).unwrap()
}

pub fn capture_of_two_stones() {
    let s = setup(7, &[(2, 3), (2, 4), (4, 3), (4, 4), (3, 2)], &[(3, 3), (3, 4)], Color::Black);
    assert_eq!(s.liberties_after_move(at(3, 5)), Ok(4));
    let after = s.play(play(3, 5)).unwrap();
    assert_eq!(after.get(at(3, 3)), Point::Empty);
    assert_eq!(after.get(at(3, 4)), Point::Empty);
    assert_eq!(after.captures(Color::Black), 2);
    assert_eq!(after.captures(Color::White), 0);
    // Oracle: flood fill on the successor.
    let (stones, libs) = flood(after.points(), 7, at(3, 5).index(7));
    assert_eq!(stones.len(), 1);
    assert_eq!(libs.len(), 4);
    assert!(libs.contains(&at(3, 4).index(7)));
    // Input untouched.
    assert_eq!(s.get(at(3, 3)), Point::White);
}

pub fn liberty_counting() {
    let mut s = BoardState::new(19).unwrap();
    s.apply(play(9, 9), Color::Black).unwrap();
    assert_eq!(s.group_at(at(9, 9)).unwrap().liberties.len(), 4);
    let corner = BoardState::new(19).unwrap().play(play(0, 0)).unwrap();
    assert_eq!(corner.group_at(at(0, 0)).unwrap().liberties.len(), 2);
    assert_eq!(BoardState::new(19).unwrap().liberties_after_move(at(0, 0)), Ok(2));
    assert_eq!(BoardState::new(19).unwrap().liberties_after_move(at(9, 9)), Ok(4));

    // L-shaped group: (10, 9) touches two of its stones but counts once.
    let l = setup(19, &[(9, 9), (9, 10), (10, 10)], &[], Color::White);
    let g = l.group_at(at(9, 10)).unwrap();
    assert_eq!(g.stones.len(), 3);
    let per_stone: usize = g
        .stones
        .iter()
        .map(|c| adjacent(c.index(19), 19).into_iter().filter(|&n| l.points()[n] == Point::Empty).count())
        .sum();
    assert_eq!(per_stone, 8);
    assert_eq!(g.liberties.len(), 7);
    assert!(g.liberties.contains(&at(10, 9)));
    assert_eq!(l.group_at(at(0, 0)), Err(BoardError::EmptyPoint(at(0, 0))));
}

pub fn ladder_stays_in_atari() {
    let mut s = setup(7, &[(0, 1), (1, 0), (1, 2), (2, 0)], &[(1, 1)], Color::White);
    let seq = [
        (2, 1),
        (3, 1),
        (2, 2),
        (2, 3),
        (3, 2),
        (4, 2),
        (3, 3),
        (3, 4),
        (4, 3),
        (5, 3),
        (4, 4),
        (4, 5),
        (5, 4),
        (6, 4),
        (5, 5),
        (6, 5),
        (5, 6),
        (4, 6),
    ];
    // Hand-enumerated liberty after each Black move.
    let expected = [(2, 2), (3, 2), (3, 3), (4, 3), (4, 4), (5, 4), (5, 5), (5, 6), (6, 6)];
    let mut checked = 0;
    for (i, &(r, c)) in seq.iter().enumerate() {
        s = s.play(play(r, c)).unwrap();
        if i % 2 == 1 {
            let g = s.group_at(at(1, 1)).unwrap();
            let (er, ec) = expected[checked];
            assert_eq!(g.liberties.iter().copied().collect::<Vec<_>>(), vec![at(er, ec)], "after black move {}", i + 1);
            let (_, libs) = flood(s.points(), 7, at(1, 1).index(7));
            assert_eq!(libs, vec![at(er, ec).index(7)]);
            checked += 1;
        }
    }
    assert_eq!(checked, expected.len());
    // Extending at the last liberty is suicide; Black captures 10 stones.
    assert_eq!(s.check(play(6, 6)), Err(IllegalMove::Suicide));
    s = s.play(play(0, 6)).unwrap();
    s = s.play(play(6, 6)).unwrap();
    assert_eq!(s.captures(Color::Black), 10);
    assert_eq!(s.get(at(1, 1)), Point::Empty);
}

pub fn closed_form_matches_sliding_block() {
    for n in 2..=39 {
        // ceil(n/2 - 1), computed in exact rational arithmetic.
        let bound = (n as i64 - 2 + 1).div_euclid(2).max(0) as usize;
        assert_eq!(max_cross_width(n), bound, "n = {n}");
        for c in 1..=bound {
            assert_eq!(cross_mask(n, c).cells(), &sliding_block(n, c)[..], "n = {n}, c = {c}");
        }
    }
}

pub fn small_counts() {
    assert_eq!(cross_mask(5, 1).active_count(), 9);
    assert_eq!(cross_mask(5, 2).active_count(), 21);
    assert_eq!(cross_mask(5, 3).active_count(), 25);
    let x: Vec<bool> = (0..25).map(|i| i / 5 == i % 5 || i / 5 + i % 5 == 4).collect();
    assert_eq!(cross_mask(5, 1).cells(), &x[..]);
}

pub fn conv_forward_matches_naive_on_random_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let Case { layer, input } = random_case(&mut rng, 9);
        let got = layer.forward(&input).unwrap();
        let want = reference_forward(&layer, &input, &to64(layer.weights()), &to64(input.data()));
        assert_eq!(got.data().len(), want.len());
        for (a, b) in got.data().iter().zip(&want) {
            worst = worst.max((*a as f64 - b).abs());
        }
    }
    assert!(worst < 1e-5, "max abs diff {worst}");
}

pub fn conv_backward_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-3;
    for case in 0..30 {
        // Half the instances are the fixed 4×4 input / 3×3 filter shape.
        let Case { layer, input } = if case % 2 == 0 {
            let mut layer = ConvLayer::new(2, 3, 3, 1, 1, None);
            layer.set_parameters(uniform(&mut rng, 54, 0.5), uniform(&mut rng, 3, 0.5)).unwrap();
            let input = Tensor::from_vec(2, 4, 4, uniform(&mut rng, 32, 1.0)).unwrap();
            Case { layer, input }
        } else {
            random_case(&mut rng, 6)
        };
        let out_shape = layer.forward(&input).unwrap().shape();
        let r = uniform(&mut rng, out_shape.0 * out_shape.1 * out_shape.2, 1.0);
        let grad_out = Tensor::from_vec(out_shape.0, out_shape.1, out_shape.2, r.clone()).unwrap();
        let (g_in, g) = layer.backward(&grad_out, &input, true).unwrap();
        let g_in = g_in.unwrap();

        let r64 = to64(&r);
        let w64 = to64(layer.weights());
        let x64 = to64(input.data());
        let loss = |w: &[f64], x: &[f64], b: &[f64]| -> f64 {
            let out = naive_conv(x, input.height(), input.width(), Geometry::of(&layer), w, b);
            out.iter().zip(&r64).map(|(o, r)| o * r).sum()
        };
        let b64 = to64(layer.bias());

        let mut num = Vec::new();
        let mut ana = Vec::new();
        for i in 0..x64.len() {
            let (mut p, mut m) = (x64.clone(), x64.clone());
            p[i] += h;
            m[i] -= h;
            num.push((loss(&w64, &p, &b64) - loss(&w64, &m, &b64)) / (2.0 * h));
            ana.push(g_in.data()[i] as f64);
        }
        assert!(rel_err(&ana, &num) < 1e-3, "input grad, case {case}");

        let (mut num, mut ana) = (Vec::new(), Vec::new());
        let k2 = layer.kernel() * layer.kernel();
        for i in 0..w64.len() {
            let active = layer.mask().map_or(true, |m| m.cells()[i % k2]);
            if !active {
                assert_eq!(g.weights[i], 0.0, "masked weight gradient");
                continue;
            }
            let (mut p, mut m) = (w64.clone(), w64.clone());
            p[i] += h;
            m[i] -= h;
            num.push((loss(&p, &x64, &b64) - loss(&m, &x64, &b64)) / (2.0 * h));
            ana.push(g.weights[i] as f64);
        }
        assert!(rel_err(&ana, &num) < 1e-3, "weight grad, case {case}");

        let (mut num, mut ana) = (Vec::new(), Vec::new());
        for i in 0..b64.len() {
            let (mut p, mut m) = (b64.clone(), b64.clone());
            p[i] += h;
            m[i] -= h;
            num.push((loss(&w64, &x64, &p) - loss(&w64, &x64, &m)) / (2.0 * h));
            ana.push(g.bias[i] as f64);
        }
        assert!(rel_err(&ana, &num) < 1e-3, "bias grad, case {case}");
    }
}

pub fn relu_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let h = 1e-3;
    assert_eq!(
        relu(&Tensor::vector(vec![-1.0, 0.0, 2.0])).data(),
        &[0.0, 0.0, 2.0]
    );
    for case in 0..20 {
        let n = rng.gen_range(1..40);
        // Keep clear of the kink so the difference quotient is exact.
        let x: Vec<f32> = (0..n)
            .map(|_| {
                let v: f32 = rng.gen_range(0.01..1.0);
                if rng.gen_bool(0.5) {
                    v
                } else {
                    -v
                }
            })
            .collect();
        let r = uniform(&mut rng, n, 1.0);
        let xt = Tensor::vector(x.clone());
        let g = relu_backward(&Tensor::vector(r.clone()), &relu(&xt)).unwrap();
        let loss = |x: &[f64]| -> f64 { x.iter().zip(&r).map(|(v, &r)| v.max(0.0) * r as f64).sum() };
        let x64 = to64(&x);
        let num: Vec<f64> = (0..n)
            .map(|i| {
                let (mut p, mut m) = (x64.clone(), x64.clone());
                p[i] += h;
                m[i] -= h;
                (loss(&p) - loss(&m)) / (2.0 * h)
            })
            .collect();
        assert!(rel_err(&to64(g.data()), &num) < 1e-3, "case {case}");
    }
}

pub fn concat_split_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let h = 1e-3;
    for case in 0..20 {
        let (hh, ww) = (rng.gen_range(1..6), rng.gen_range(1..6));
        let sizes: Vec<usize> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(1..4)).collect();
        let parts: Vec<Tensor> = sizes
            .iter()
            .map(|&c| Tensor::from_vec(c, hh, ww, uniform(&mut rng, c * hh * ww, 1.0)).unwrap())
            .collect();
        let refs: Vec<&Tensor> = parts.iter().collect();
        let cat = concat_channels(&refs).unwrap();
        let total: usize = sizes.iter().sum();
        assert_eq!(cat.shape(), (total, hh, ww));
        let r = uniform(&mut rng, cat.data().len(), 1.0);
        let grads = split_channels(&Tensor::from_vec(total, hh, ww, r.clone()).unwrap(), &sizes).unwrap();

        // Loss Σ r·concat(parts), differentiated numerically per part.
        let flat: Vec<f64> = parts.iter().flat_map(|p| to64(p.data())).collect();
        let loss = |x: &[f64]| -> f64 { x.iter().zip(&r).map(|(v, &r)| v * r as f64).sum() };
        let num: Vec<f64> = (0..flat.len())
            .map(|i| {
                let (mut p, mut m) = (flat.clone(), flat.clone());
                p[i] += h;
                m[i] -= h;
                (loss(&p) - loss(&m)) / (2.0 * h)
            })
            .collect();
        let ana: Vec<f64> = grads.iter().flat_map(|g| to64(g.data())).collect();
        assert!(rel_err(&ana, &num) < 1e-3, "case {case}");

        let back = split_channels(&cat, &sizes).unwrap();
        assert_eq!(back, parts);
    }
    let single = Tensor::from_vec(2, 3, 3, (0..18).map(|v| v as f32).collect()).unwrap();
    assert_eq!(concat_channels(&[&single]).unwrap(), single);
    assert!(concat_channels(&[&single, &Tensor::zeros(1, 2, 3)]).is_err());
}

pub fn softmax_cross_entropy_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let h = 1e-3;
    for case in 0..20 {
        let n = if case == 0 { 10 } else { rng.gen_range(2..40) };
        let scores = uniform(&mut rng, n, 3.0);
        let label = rng.gen_range(0..n);
        let (loss, grad) = softmax_cross_entropy(&scores, label).unwrap();
        let s64 = to64(&scores);
        assert!((loss as f64 - cross_entropy64(&s64, label)).abs() < 1e-5);
        let num: Vec<f64> = (0..n)
            .map(|i| {
                let (mut p, mut m) = (s64.clone(), s64.clone());
                p[i] += h;
                m[i] -= h;
                (cross_entropy64(&p, label) - cross_entropy64(&m, label)) / (2.0 * h)
            })
            .collect();
        assert!(rel_err(&to64(&grad), &num) < 1e-4, "case {case}");
    }

    let (loss, grad) = softmax_cross_entropy(&[0.0; 361], 7).unwrap();
    assert!((loss - 361f32.ln()).abs() < 1e-5);
    assert!((grad[7] - (1.0 / 361.0 - 1.0)).abs() < 1e-6);
    let mut peaked = vec![0.0; 361];
    peaked[3] = 1000.0;
    assert!(softmax_cross_entropy(&peaked, 3).unwrap().0.abs() < 1e-6);
    assert!(softmax_cross_entropy(&peaked, 361).is_err());
}

pub fn network_masks_survive_a_thousand_sgd_steps() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut net = PolicyNet::random(NetworkConfig::reference(0.125), 3).unwrap();
    assert!(net.layers().iter().any(|l| l.mask().is_some()));
    assert!(masked_weights_are_zero(&net));
    for _ in 0..1000 {
        let planes = random_planes(&mut rng, 24, 9);
        let label = rng.gen_range(0..81);
        let (loss, _, grads) = net.example_gradients(&planes, label).unwrap();
        assert!(loss.is_finite());
        net.sgd_step(&grads, 0.01).unwrap();
    }
    assert!(masked_weights_are_zero(&net));
}

pub fn ensemble_commutes_with_symmetries() {
    let net = small_net(7);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    let mut worst = 0.0f32;
    while checked < 50 {
        let moves = rng.gen_range(0..160);
        let state = random_position(19, moves, &mut rng);
        let features = encode(&state).unwrap();
        let base = ensemble_scores(&net, &features, EnsembleMode::Full).unwrap();
        let out = PolicyOutput::from_scores(base.clone(), features.legal_mask(), 19);
        let mut legal: Vec<f32> = (0..361).filter(|&i| out.legal[i]).map(|i| base[i]).collect();
        legal.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if legal.len() < 2 || legal[0] - legal[1] < 1e-4 {
            continue;
        }
        checked += 1;
        let best = out.select_move();
        for sym in Symmetry::all() {
            let moved = features.transform(sym);
            let scores = ensemble_scores(&net, &moved, EnsembleMode::Full).unwrap();
            let expected = transform_scores(&base, sym);
            for (a, b) in scores.iter().zip(&expected) {
                worst = worst.max((a - b).abs());
            }
            let pick = PolicyOutput::from_scores(scores, moved.legal_mask(), 19).select_move();
            assert_eq!(pick, best.transformed(sym, 19), "symmetry {}", sym.id());
        }
    }
    assert!(worst < 1e-5, "max score difference {worst}");
}
