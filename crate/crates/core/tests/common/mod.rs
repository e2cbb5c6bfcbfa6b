//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

pub mod checks;

use crossgo_core::{Color, Point};

/// 4-neighbours of a point on a `size`×`size` board.
pub fn adjacent(i: usize, size: usize) -> Vec<usize> {
    let (r, c) = (i / size, i % size);
    let mut out = Vec::with_capacity(4);
    if r > 0 {
        out.push(i - size);
    }
    if r + 1 < size {
        out.push(i + size);
    }
    if c > 0 {
        out.push(i - 1);
    }
    if c + 1 < size {
        out.push(i + 1);
    }
    out
}

/// Stones and liberties of the group at `start`, by breadth-first search.
pub fn flood(points: &[Point], size: usize, start: usize) -> (Vec<usize>, Vec<usize>) {
    let color = points[start];
    let mut stones = vec![start];
    let mut seen = vec![false; points.len()];
    seen[start] = true;
    let mut libs = Vec::new();
    let mut lib_seen = vec![false; points.len()];
    let mut k = 0;
    while k < stones.len() {
        for n in adjacent(stones[k], size) {
            if points[n] == color && !seen[n] {
                seen[n] = true;
                stones.push(n);
            } else if points[n] == Point::Empty && !lib_seen[n] {
                lib_seen[n] = true;
                libs.push(n);
            }
        }
        k += 1;
    }
    stones.sort();
    libs.sort();
    (stones, libs)
}

pub enum Naive {
    Occupied,
    Suicide,
    Ok(Vec<Point>, usize),
}

/// Straightforward placement: put the stone down, remove adjacent enemy
/// groups without liberties, then reject if the own group has none.
pub fn naive_play(points: &[Point], size: usize, i: usize, color: Color) -> Naive {
    if points[i] != Point::Empty {
        return Naive::Occupied;
    }
    let mut next = points.to_vec();
    next[i] = Point::stone(color);
    let enemy = Point::stone(color.opponent());
    let mut captured = 0;
    for n in adjacent(i, size) {
        if next[n] == enemy {
            let (stones, libs) = flood(&next, size, n);
            if libs.is_empty() {
                captured += stones.len();
                for s in stones {
                    next[s] = Point::Empty;
                }
            }
        }
    }
    if flood(&next, size, i).1.is_empty() {
        return Naive::Suicide;
    }
    Naive::Ok(next, captured)
}

use crossgo_core::model::{BlockConfig, NetworkConfig};
use crossgo_core::nn::ConvLayer;

/// Shape of a layer, for the reference convolution.
#[derive(Clone, Copy, Debug)]
pub struct Geometry {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl Geometry {
    pub fn of(layer: &ConvLayer) -> Geometry {
        Geometry {
            in_ch: layer.in_channels(),
            out_ch: layer.out_channels(),
            k: layer.kernel(),
            stride: layer.stride(),
            pad: layer.pad(),
        }
    }

    pub fn out_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.k) / self.stride + 1,
            (w + 2 * self.pad - self.k) / self.stride + 1,
        )
    }
}

/// Six nested loops, double precision, zero padding. Zero weights are
/// skipped, which changes nothing but the running time.
pub fn naive_conv(input: &[f64], h: usize, w: usize, g: Geometry, weights: &[f64], bias: &[f64]) -> Vec<f64> {
    let (oh, ow) = g.out_dims(h, w);
    let mut out = vec![0.0; g.out_ch * oh * ow];
    for o in 0..g.out_ch {
        out[o * oh * ow..(o + 1) * oh * ow].iter_mut().for_each(|v| *v = bias[o]);
        for i in 0..g.in_ch {
            for ky in 0..g.k {
                for kx in 0..g.k {
                    let wt = weights[((o * g.in_ch + i) * g.k + ky) * g.k + kx];
                    if wt == 0.0 {
                        continue;
                    }
                    for y in 0..oh {
                        let iy = (y * g.stride + ky) as isize - g.pad as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for x in 0..ow {
                            let ix = (x * g.stride + kx) as isize - g.pad as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            out[(o * oh + y) * ow + x] += wt * input[(i * h + iy as usize) * w + ix as usize];
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn relu64(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Parameters of every layer, in network traversal order, as f64.
pub struct Params64 {
    pub geometry: Vec<Geometry>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Params64 {
    pub fn from_layers(layers: &[&ConvLayer]) -> Params64 {
        Params64 {
            geometry: layers.iter().map(|l| Geometry::of(l)).collect(),
            weights: layers.iter().map(|l| l.weights().iter().map(|&v| v as f64).collect()).collect(),
            bias: layers.iter().map(|l| l.bias().iter().map(|&v| v as f64).collect()).collect(),
        }
    }
}

/// Reference forward pass of a network described by `config`, written
/// directly from the block wiring: every convolution is followed by a
/// ReLU except a plain block with `relu = false`.
pub fn naive_network(config: &NetworkConfig, p: &Params64, input: &[f64], h: usize, w: usize) -> Vec<f64> {
    let mut li = 0;
    let conv = |x: &[f64], relu: bool, li: &mut usize| {
        let g = p.geometry[*li];
        assert_eq!(g.out_dims(h, w), (h, w), "reference network keeps the board size");
        let mut y = naive_conv(x, h, w, g, &p.weights[*li], &p.bias[*li]);
        if relu {
            relu64(&mut y);
        }
        *li += 1;
        y
    };
    let mut x = input.to_vec();
    for block in &config.blocks {
        x = match block {
            BlockConfig::Conv { relu, .. } => conv(&x, *relu, &mut li),
            BlockConfig::Cross(c) => {
                let mut cat = Vec::new();
                if c.dense_channels > 0 {
                    cat.extend(conv(&x, true, &mut li));
                }
                for s in &c.cross {
                    let branch = if s.squeeze.is_some() {
                        let sq = conv(&x, true, &mut li);
                        conv(&sq, true, &mut li)
                    } else {
                        conv(&x, true, &mut li)
                    };
                    cat.extend(branch);
                }
                if c.include_passthrough {
                    cat.extend_from_slice(&x);
                }
                conv(&cat, true, &mut li)
            }
        };
    }
    assert_eq!(li, p.geometry.len());
    x
}

pub fn cross_entropy64(scores: &[f64], label: usize) -> f64 {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = scores.iter().map(|s| (s - m).exp()).sum();
    -(scores[label] - m - z.ln())
}

/// ‖a − b‖ / max(‖a‖, ‖b‖).
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// A position reached by uniformly random legal play, with the odd pass.
pub fn random_position(size: usize, moves: usize, rng: &mut rand_chacha::ChaCha8Rng) -> crossgo_core::BoardState {
    use rand::Rng;
    use crossgo_core::{BoardState, Move};
    let mut state = BoardState::new(size).unwrap();
    for _ in 0..moves {
        let mv = if rng.gen_bool(0.03) {
            Move::Pass
        } else {
            let legal: Vec<Move> = state.legal_moves().into_iter().filter(|m| *m != Move::Pass).collect();
            if legal.is_empty() {
                Move::Pass
            } else {
                legal[rng.gen_range(0..legal.len())]
            }
        };
        state = state.play(mv).unwrap();
    }
    state
}
