//! The cross-convolution policy network.
//!
//! A stack of plain convolutions with two "cross layers" in it. A cross
//! layer runs several branches side by side over the same input (a dense
//! filter, cross-masked filters, optionally behind a 1×1 squeeze) and
//! concatenates their outputs with the untouched input before a 1×1
//! fusion. The network ends in a single-filter 1×1 convolution whose
//! output is read directly as one score per board point.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::board::{BoardState, Coord, Move};
use crate::features::{self, FeatureError, FeatureTensor, Planes};
use crate::nn::{
    concat_channels, cross_mask, relu_backward, relu_in_place, softmax_cross_entropy,
    split_channels, ConvGrads, ConvLayer, NnError, Tensor,
};
use crate::symmetry::{transform_map, Symmetry};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Features(#[from] FeatureError),
    #[error("invalid network config: {0}")]
    Config(String),
}

/// One convolution in a plain (sequential) position of the network.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvSpec {
    pub out_channels: usize,
    pub kernel: usize,
    #[cfg_attr(feature = "serde", serde(default = "one"))]
    pub stride: usize,
    pub pad: usize,
    /// Cross width when the filter is cross-masked.
    #[cfg_attr(feature = "serde", serde(default))]
    pub cross_width: Option<usize>,
}

#[cfg(feature = "serde")]
fn one() -> usize {
    1
}

/// A cross-masked branch of a cross layer.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossSpec {
    pub kernel: usize,
    pub width: usize,
    pub channels: usize,
    pub pad: usize,
    /// Channel count of a 1×1 squeeze in front of the cross filter.
    #[cfg_attr(feature = "serde", serde(default))]
    pub squeeze: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossLayerConfig {
    /// Labels of the network layers this block spans.
    pub names: Vec<String>,
    pub dense_kernel: usize,
    /// Zero disables the dense branch.
    pub dense_channels: usize,
    pub cross: Vec<CrossSpec>,
    pub include_passthrough: bool,
    pub fuse_channels: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum BlockConfig {
    Conv {
        name: String,
        #[cfg_attr(feature = "serde", serde(flatten))]
        spec: ConvSpec,
        relu: bool,
    },
    Cross(CrossLayerConfig),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkConfig {
    pub input_planes: usize,
    /// Channel scale the blocks were generated with (informational once
    /// the blocks exist).
    pub width_multiplier: f32,
    pub blocks: Vec<BlockConfig>,
}

fn scaled(channels: usize, multiplier: f32) -> usize {
    (libm::roundf(channels as f32 * multiplier) as usize).max(1)
}

impl NetworkConfig {
    /// The 23-layer reference network with every channel count scaled by
    /// `multiplier` (the single-channel score head is never scaled).
    pub fn reference(multiplier: f32) -> NetworkConfig {
        let ch = |c: usize| scaled(c, multiplier);
        let conv = |name: String, out: usize, kernel: usize| BlockConfig::Conv {
            name,
            spec: ConvSpec {
                out_channels: out,
                kernel,
                stride: 1,
                pad: kernel / 2,
                cross_width: None,
            },
            relu: true,
        };
        let squeezed_cross = |width: usize| CrossSpec {
            kernel: 39,
            width,
            channels: ch(16),
            pad: 19,
            squeeze: Some(ch(16)),
        };
        let names = |range: core::ops::RangeInclusive<usize>| range.map(|i| format!("L{i}")).collect();

        let mut blocks = vec![conv("L1".to_string(), ch(128), 7)];
        blocks.push(BlockConfig::Cross(CrossLayerConfig {
            names: names(2..=4),
            dense_kernel: 3,
            dense_channels: ch(128),
            cross: vec![
                CrossSpec {
                    kernel: 7,
                    width: 1,
                    channels: ch(32),
                    pad: 3,
                    squeeze: None,
                },
                squeezed_cross(1),
                squeezed_cross(5),
            ],
            include_passthrough: true,
            fuse_channels: ch(256),
        }));
        blocks.extend((5..=11).map(|i| conv(format!("L{i}"), ch(256), 3)));
        blocks.push(BlockConfig::Cross(CrossLayerConfig {
            names: names(12..=15),
            dense_kernel: 7,
            dense_channels: ch(64),
            cross: vec![squeezed_cross(1), squeezed_cross(5)],
            include_passthrough: true,
            fuse_channels: ch(256),
        }));
        blocks.extend((16..=22).map(|i| conv(format!("L{i}"), ch(256), 3)));
        blocks.push(BlockConfig::Conv {
            name: "L23".to_string(),
            spec: ConvSpec {
                out_channels: 1,
                kernel: 1,
                stride: 1,
                pad: 0,
                cross_width: None,
            },
            relu: false,
        });
        NetworkConfig {
            input_planes: features::NUM_PLANES,
            width_multiplier: multiplier,
            blocks,
        }
    }

    pub fn layer_names(&self) -> Vec<&str> {
        self.blocks
            .iter()
            .flat_map(|b| match b {
                BlockConfig::Conv { name, .. } => vec![name.as_str()],
                BlockConfig::Cross(c) => c.names.iter().map(String::as_str).collect(),
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Config(msg));
        if self.input_planes == 0 {
            return bad("input_planes must be positive".into());
        }
        if self.blocks.is_empty() {
            return bad("no blocks".into());
        }
        let preserving = |kernel: usize, pad: usize, stride: usize| {
            kernel >= 1 && stride == 1 && kernel % 2 == 1 && pad * 2 + 1 == kernel
        };
        let mut channels = self.input_planes;
        for (i, block) in self.blocks.iter().enumerate() {
            match block {
                BlockConfig::Conv { name, spec, .. } => {
                    if !preserving(spec.kernel, spec.pad, spec.stride) || spec.out_channels == 0 {
                        return bad(format!("layer {name} does not preserve the board shape"));
                    }
                    channels = spec.out_channels;
                }
                BlockConfig::Cross(c) => {
                    let branches = (c.dense_channels > 0) as usize + c.cross.len() + c.include_passthrough as usize;
                    if branches == 0 {
                        return bad(format!("cross block {i} has no branches"));
                    }
                    if c.dense_channels > 0 && !preserving(c.dense_kernel, c.dense_kernel / 2, 1) {
                        return bad(format!("cross block {i}: dense kernel must be odd"));
                    }
                    for s in &c.cross {
                        if !preserving(s.kernel, s.pad, 1) || s.channels == 0 || s.squeeze == Some(0) {
                            return bad(format!("cross block {i}: branch {}x{} does not preserve the board shape", s.kernel, s.kernel));
                        }
                    }
                    if c.fuse_channels == 0 {
                        return bad(format!("cross block {i}: fuse width must be positive"));
                    }
                    channels = c.fuse_channels;
                }
            }
        }
        if channels != 1 {
            return bad(format!("final layer must output 1 channel, got {channels}"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Branch {
    squeeze: Option<ConvLayer>,
    conv: ConvLayer,
}

#[derive(Clone, Debug, PartialEq)]
struct CrossBlock {
    branches: Vec<Branch>,
    passthrough: bool,
    fuse: ConvLayer,
}

#[derive(Clone, Debug, PartialEq)]
enum Block {
    Conv { layer: ConvLayer, relu: bool },
    Cross(CrossBlock),
}

impl Block {
    fn layers(&self) -> Vec<&ConvLayer> {
        match self {
            Block::Conv { layer, .. } => vec![layer],
            Block::Cross(c) => {
                let mut out = Vec::new();
                for b in &c.branches {
                    out.extend(b.squeeze.as_ref());
                    out.push(&b.conv);
                }
                out.push(&c.fuse);
                out
            }
        }
    }

    fn layers_mut(&mut self) -> Vec<&mut ConvLayer> {
        match self {
            Block::Conv { layer, .. } => vec![layer],
            Block::Cross(c) => {
                let mut out = Vec::new();
                for b in &mut c.branches {
                    out.extend(b.squeeze.as_mut());
                    out.push(&mut b.conv);
                }
                out.push(&mut c.fuse);
                out
            }
        }
    }
}

enum BlockTrace {
    Conv {
        input: Tensor,
        output: Tensor,
    },
    Cross {
        input: Tensor,
        /// Per branch: squeeze output (if any) and branch output.
        branches: Vec<(Option<Tensor>, Tensor)>,
        concat: Tensor,
        output: Tensor,
    },
}

/// Activations saved by [`PolicyNet::forward_trace`] for the reverse pass.
pub struct Trace {
    blocks: Vec<BlockTrace>,
}

/// Anything that maps encoded planes to one score per board point.
pub trait ScoreModel {
    fn scores(&self, planes: &Planes) -> Result<Vec<f32>, ModelError>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    config: NetworkConfig,
    blocks: Vec<Block>,
}

fn conv_forward(layer: &ConvLayer, input: &Tensor, relu: bool) -> Result<Tensor, NnError> {
    let mut out = layer.forward(input)?;
    if relu {
        relu_in_place(&mut out);
    }
    Ok(out)
}

impl PolicyNet {
    /// Builds the network with all parameters zero.
    pub fn new(config: NetworkConfig) -> Result<PolicyNet, ModelError> {
        config.validate()?;
        let mut channels = config.input_planes;
        let mut blocks = Vec::with_capacity(config.blocks.len());
        for block in &config.blocks {
            match block {
                BlockConfig::Conv { spec, relu, .. } => {
                    let mask = spec.cross_width.map(|c| cross_mask(spec.kernel, c));
                    blocks.push(Block::Conv {
                        layer: ConvLayer::new(channels, spec.out_channels, spec.kernel, spec.stride, spec.pad, mask),
                        relu: *relu,
                    });
                    channels = spec.out_channels;
                }
                BlockConfig::Cross(c) => {
                    let mut branches = Vec::new();
                    let mut concat = 0;
                    if c.dense_channels > 0 {
                        branches.push(Branch {
                            squeeze: None,
                            conv: ConvLayer::new(channels, c.dense_channels, c.dense_kernel, 1, c.dense_kernel / 2, None),
                        });
                        concat += c.dense_channels;
                    }
                    for s in &c.cross {
                        let (squeeze, conv_in) = match s.squeeze {
                            Some(sq) => (Some(ConvLayer::new(channels, sq, 1, 1, 0, None)), sq),
                            None => (None, channels),
                        };
                        let mask = cross_mask(s.kernel, s.width);
                        branches.push(Branch {
                            squeeze,
                            conv: ConvLayer::new(conv_in, s.channels, s.kernel, 1, s.pad, Some(mask)),
                        });
                        concat += s.channels;
                    }
                    if c.include_passthrough {
                        concat += channels;
                    }
                    blocks.push(Block::Cross(CrossBlock {
                        branches,
                        passthrough: c.include_passthrough,
                        fuse: ConvLayer::new(concat, c.fuse_channels, 1, 1, 0, None),
                    }));
                    channels = c.fuse_channels;
                }
            }
        }
        Ok(PolicyNet { config, blocks })
    }

    /// Builds the network with He-initialized weights from `seed`.
    pub fn random(config: NetworkConfig, seed: u64) -> Result<PolicyNet, ModelError> {
        let mut net = PolicyNet::new(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in net.layers_mut() {
            layer.init_he(&mut rng);
        }
        Ok(net)
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// Every convolution in a fixed traversal order: blocks in sequence; in
    /// a cross block each branch (squeeze, then filter) and finally the
    /// fusion.
    pub fn layers(&self) -> Vec<&ConvLayer> {
        self.blocks.iter().flat_map(Block::layers).collect()
    }

    pub fn layers_mut(&mut self) -> Vec<&mut ConvLayer> {
        self.blocks.iter_mut().flat_map(Block::layers_mut).collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().iter().map(|l| l.parameter_count()).sum()
    }

    /// Forward pass on a `(planes, h, w)` tensor; returns `(1, h, w)`.
    pub fn forward_tensor(&self, input: &Tensor) -> Result<Tensor, ModelError> {
        let mut x = input.clone();
        for block in &self.blocks {
            x = match block {
                Block::Conv { layer, relu } => conv_forward(layer, &x, *relu)?,
                Block::Cross(c) => {
                    let mut outs = Vec::with_capacity(c.branches.len() + 1);
                    for b in &c.branches {
                        let out = match &b.squeeze {
                            Some(sq) => conv_forward(&b.conv, &conv_forward(sq, &x, true)?, true)?,
                            None => conv_forward(&b.conv, &x, true)?,
                        };
                        outs.push(out);
                    }
                    if c.passthrough {
                        outs.push(x);
                    }
                    let refs: Vec<&Tensor> = outs.iter().collect();
                    conv_forward(&c.fuse, &concat_channels(&refs)?, true)?
                }
            };
        }
        Ok(x)
    }

    /// Scores for a 19×19 feature stack, row-major.
    pub fn forward(&self, features: &FeatureTensor) -> Result<Vec<f32>, ModelError> {
        self.scores(&features.planes)
    }

    /// Forward pass that keeps every activation needed by
    /// [`PolicyNet::backward`].
    pub fn forward_trace(&self, input: &Tensor) -> Result<(Tensor, Trace), ModelError> {
        let mut traces = Vec::with_capacity(self.blocks.len());
        let mut x = input.clone();
        for block in &self.blocks {
            let (out, trace) = match block {
                Block::Conv { layer, relu } => {
                    let out = conv_forward(layer, &x, *relu)?;
                    (out.clone(), BlockTrace::Conv { input: x, output: out })
                }
                Block::Cross(c) => {
                    let mut branches = Vec::with_capacity(c.branches.len());
                    for b in &c.branches {
                        let squeezed = b.squeeze.as_ref().map(|sq| conv_forward(sq, &x, true)).transpose()?;
                        let out = conv_forward(&b.conv, squeezed.as_ref().unwrap_or(&x), true)?;
                        branches.push((squeezed, out));
                    }
                    let mut refs: Vec<&Tensor> = branches.iter().map(|(_, o)| o).collect();
                    if c.passthrough {
                        refs.push(&x);
                    }
                    let concat = concat_channels(&refs)?;
                    let out = conv_forward(&c.fuse, &concat, true)?;
                    (
                        out.clone(),
                        BlockTrace::Cross {
                            input: x,
                            branches,
                            concat,
                            output: out,
                        },
                    )
                }
            };
            traces.push(trace);
            x = out;
        }
        Ok((x, Trace { blocks: traces }))
    }

    /// Reverse pass from the gradient of the `(1, h, w)` output. Returns
    /// one gradient per layer in [`PolicyNet::layers`] order.
    pub fn backward(&self, trace: &Trace, grad_output: &Tensor) -> Result<Vec<ConvGrads>, ModelError> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut total = 0;
        for b in &self.blocks {
            offsets.push(total);
            total += b.layers().len();
        }
        let mut grads: Vec<Option<ConvGrads>> = vec![None; total];
        let mut g = grad_output.clone();

        for (bi, (block, trace)) in self.blocks.iter().zip(&trace.blocks).enumerate().rev() {
            let need_input = bi > 0;
            let base = offsets[bi];
            match (block, trace) {
                (Block::Conv { layer, relu }, BlockTrace::Conv { input, output }) => {
                    let g_pre = if *relu { relu_backward(&g, output)? } else { g };
                    let (g_in, lg) = layer.backward(&g_pre, input, need_input)?;
                    grads[base] = Some(lg);
                    g = g_in.unwrap_or_else(|| Tensor::zeros(0, 0, 0));
                }
                (
                    Block::Cross(c),
                    BlockTrace::Cross {
                        input,
                        branches,
                        concat,
                        output,
                    },
                ) => {
                    let n_layers = block.layers().len();
                    let g_fuse = relu_backward(&g, output)?;
                    let (g_concat, fg) = c.fuse.backward(&g_fuse, concat, true)?;
                    grads[base + n_layers - 1] = Some(fg);
                    let mut sizes: Vec<usize> = branches.iter().map(|(_, o)| o.channels()).collect();
                    if c.passthrough {
                        sizes.push(input.channels());
                    }
                    let parts = split_channels(&g_concat.expect("input grad requested"), &sizes)?;
                    let mut g_input = if c.passthrough {
                        parts[parts.len() - 1].clone()
                    } else {
                        Tensor::zeros(input.channels(), input.height(), input.width())
                    };
                    let mut li = base;
                    for (b, ((squeezed, out), part)) in c.branches.iter().zip(branches.iter().zip(&parts)) {
                        let g_branch = relu_backward(part, out)?;
                        match (&b.squeeze, squeezed) {
                            (Some(sq), Some(sq_out)) => {
                                let (g_sq_out, cg) = b.conv.backward(&g_branch, sq_out, true)?;
                                let g_sq = relu_backward(&g_sq_out.expect("input grad requested"), sq_out)?;
                                let (g_x, sg) = sq.backward(&g_sq, input, need_input)?;
                                grads[li] = Some(sg);
                                grads[li + 1] = Some(cg);
                                li += 2;
                                if let Some(g_x) = g_x {
                                    g_input.add_assign(&g_x)?;
                                }
                            }
                            _ => {
                                let (g_x, cg) = b.conv.backward(&g_branch, input, need_input)?;
                                grads[li] = Some(cg);
                                li += 1;
                                if let Some(g_x) = g_x {
                                    g_input.add_assign(&g_x)?;
                                }
                            }
                        }
                    }
                    g = g_input;
                }
                _ => unreachable!("trace produced by this network"),
            }
        }
        Ok(grads.into_iter().map(|g| g.expect("every layer visited")).collect())
    }

    /// Loss and parameter gradients for one labelled example, with the
    /// softmax taken over every board point.
    pub fn example_gradients(&self, planes: &Planes, label: usize) -> Result<(f32, Vec<f32>, Vec<ConvGrads>), ModelError> {
        let input = planes_tensor(planes)?;
        let (out, trace) = self.forward_trace(&input)?;
        let scores = out.into_vec();
        let (loss, grad) = softmax_cross_entropy(&scores, label)?;
        let grad = Tensor::from_vec(1, planes.size(), planes.size(), grad)?;
        let grads = self.backward(&trace, &grad)?;
        Ok((loss, scores, grads))
    }

    /// Applies `p ← p − lr·g` to every layer.
    pub fn sgd_step(&mut self, grads: &[ConvGrads], lr: f32) -> Result<(), ModelError> {
        let mut layers = self.layers_mut();
        if layers.len() != grads.len() {
            return Err(NnError::Length {
                op: "network sgd",
                expected: layers.len(),
                got: grads.len(),
            }
            .into());
        }
        for (layer, g) in layers.iter_mut().zip(grads) {
            layer.sgd_step(g, lr)?;
        }
        Ok(())
    }

    pub fn zero_grads(&self) -> Vec<ConvGrads> {
        self.layers().into_iter().map(ConvGrads::zeros_like).collect()
    }
}

fn planes_tensor(planes: &Planes) -> Result<Tensor, NnError> {
    Tensor::from_vec(planes.count(), planes.size(), planes.size(), planes.to_f32())
}

impl ScoreModel for PolicyNet {
    fn scores(&self, planes: &Planes) -> Result<Vec<f32>, ModelError> {
        Ok(self.forward_tensor(&planes_tensor(planes)?)?.into_vec())
    }
}

/// Which symmetries take part in a prediction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EnsembleMode {
    /// The identity only: one forward pass.
    Single,
    /// All eight board symmetries, scores averaged.
    #[default]
    Full,
}

/// Network scores for `features`, averaged over the symmetries of `mode`.
/// Each pass sees a transformed board and its scores are mapped back
/// before averaging, in a fixed symmetry order.
pub fn ensemble_scores<M: ScoreModel + ?Sized>(
    model: &M,
    features: &FeatureTensor,
    mode: EnsembleMode,
) -> Result<Vec<f32>, ModelError> {
    if mode == EnsembleMode::Single {
        return model.scores(&features.planes);
    }
    let size = features.planes.size();
    let mut sum = vec![0.0f32; size * size];
    for sym in Symmetry::all() {
        let scores = model.scores(&features.planes.transform(sym))?;
        let back = if sym.is_identity() {
            scores
        } else {
            transform_map(&scores, size, sym.inverse())
        };
        for (s, v) in sum.iter_mut().zip(back) {
            *s += v;
        }
    }
    sum.iter_mut().for_each(|s| *s /= 8.0);
    Ok(sum)
}

/// Scores, legal mask and move probabilities for one position.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutput {
    pub size: usize,
    pub scores: Vec<f32>,
    /// Softmax over legal points; exactly zero elsewhere.
    pub probabilities: Vec<f32>,
    pub legal: Vec<bool>,
}

impl PolicyOutput {
    pub fn from_scores(scores: Vec<f32>, legal: Vec<bool>, size: usize) -> PolicyOutput {
        let max = scores
            .iter()
            .zip(&legal)
            .filter(|(_, &l)| l)
            .map(|(&s, _)| s)
            .fold(f32::NEG_INFINITY, f32::max);
        let mut probabilities: Vec<f32> = scores
            .iter()
            .zip(&legal)
            .map(|(&s, &l)| if l { libm::expf(s - max) } else { 0.0 })
            .collect();
        let total: f32 = probabilities.iter().sum();
        if total > 0.0 {
            probabilities.iter_mut().for_each(|p| *p /= total);
        }
        PolicyOutput {
            size,
            scores,
            probabilities,
            legal,
        }
    }

    /// Highest-scoring legal play, ties to the smallest row-major index;
    /// `Pass` only when nothing is legal.
    pub fn select_move(&self) -> Move {
        let mut best: Option<(usize, f32)> = None;
        for (i, (&s, &l)) in self.scores.iter().zip(&self.legal).enumerate() {
            if l && best.map_or(true, |(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        match best {
            Some((i, _)) => Move::Play(Coord::from_index(i, self.size)),
            None => Move::Pass,
        }
    }

    /// Up to `k` legal plays by descending probability (ties by index).
    pub fn top_k(&self, k: usize) -> Vec<(Move, f32)> {
        let mut idx: Vec<usize> = (0..self.legal.len()).filter(|&i| self.legal[i]).collect();
        idx.sort_by(|&a, &b| {
            self.scores[b]
                .partial_cmp(&self.scores[a])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx.into_iter()
            .take(k)
            .map(|i| (Move::Play(Coord::from_index(i, self.size)), self.probabilities[i]))
            .collect()
    }
}

/// Policy for already encoded features; legality comes from the
/// legal-move plane.
pub fn predict_features<M: ScoreModel + ?Sized>(
    model: &M,
    features: &FeatureTensor,
    mode: EnsembleMode,
) -> Result<PolicyOutput, ModelError> {
    let scores = ensemble_scores(model, features, mode)?;
    Ok(PolicyOutput::from_scores(scores, features.legal_mask(), features.planes.size()))
}

/// Encodes `state` and runs the symmetry ensemble over it.
pub fn ensemble_predict<M: ScoreModel + ?Sized>(
    model: &M,
    state: &BoardState,
    mode: EnsembleMode,
) -> Result<PolicyOutput, ModelError> {
    let features = features::encode(state)?;
    predict_features(model, &features, mode)
}

/// Top-1 prediction for a single example, used by training metrics.
pub fn argmax_legal(scores: &[f32], legal: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f32)> = None;
    for (i, (&s, &l)) in scores.iter().zip(legal).enumerate() {
        if l && best.map_or(true, |(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}
