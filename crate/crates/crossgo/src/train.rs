//! Minibatch SGD over state-move pairs, and top-k evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crossgo_core::model::{predict_features, EnsembleMode, ModelError, ScoreModel};
use crossgo_core::nn::softmax_cross_entropy;
use crossgo_core::{Color, FeatureTensor, PolicyNet, Symmetry, NET_POINTS, NUM_PLANES};

use crate::shard::StateMovePair;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no training examples")]
    Empty,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("example {index} has shape ({planes} planes, {size}x{size})")]
    Shape { index: usize, planes: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr0: f32,
    /// Learning rate multiplier applied after every epoch.
    pub decay_per_epoch: f32,
    pub epochs: usize,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    /// Seed for the initial weights when training from scratch.
    pub init_seed: u64,
    pub width_multiplier: f32,
    /// Train on a random board symmetry of each example.
    pub symmetry_augment: bool,
    /// Stop after this many steps in total.
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr0: 0.001,
            decay_per_epoch: 0.5,
            epochs: 1,
            batch_size: 16,
            shuffle_seed: 0,
            init_seed: 0,
            width_multiplier: 0.125,
            symmetry_augment: false,
            max_steps: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.to_string()));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad("lr0 must be positive");
        }
        if !(self.decay_per_epoch > 0.0 && self.decay_per_epoch <= 1.0) {
            return bad("decay_per_epoch must be in (0, 1]");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.width_multiplier > 0.0) {
            return bad("width_multiplier must be positive");
        }
        Ok(())
    }

    /// `lr0 · decay^epoch`, epochs counted from 0.
    pub fn learning_rate(&self, epoch: usize) -> f32 {
        self.lr0 * self.decay_per_epoch.powi(epoch as i32)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub lr: f32,
    /// Mean loss over the batch, measured before the update.
    pub loss: f32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochSummary {
    pub epoch: usize,
    pub lr: f32,
    pub steps: usize,
    pub mean_loss: f32,
    /// Fraction of training examples whose label was the network's top
    /// score during the epoch (before each update).
    pub train_top1: f32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochSummary>,
}

/// Drives SGD over a fixed example set. Each epoch visits the examples in
/// a fresh seeded order; gradients are summed in batch order and averaged.
pub struct Trainer<'a> {
    pub net: PolicyNet,
    pub config: TrainConfig,
    pub history: TrainHistory,
    data: &'a [StateMovePair],
    epoch: usize,
    step: usize,
}

fn check_shapes(data: &[StateMovePair]) -> Result<(), TrainError> {
    for (index, pair) in data.iter().enumerate() {
        if pair.planes.count() != NUM_PLANES || pair.planes.area() != NET_POINTS {
            return Err(TrainError::Shape {
                index,
                planes: pair.planes.count(),
                size: pair.planes.size(),
            });
        }
    }
    Ok(())
}

impl<'a> Trainer<'a> {
    pub fn new(net: PolicyNet, data: &'a [StateMovePair], config: TrainConfig) -> Result<Trainer<'a>, TrainError> {
        config.validate()?;
        if data.is_empty() {
            return Err(TrainError::Empty);
        }
        check_shapes(data)?;
        Ok(Trainer {
            net,
            config,
            history: TrainHistory::default(),
            data,
            epoch: 0,
            step: 0,
        })
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn steps_taken(&self) -> usize {
        self.step
    }

    fn budget_left(&self) -> bool {
        self.config.max_steps.map_or(true, |m| self.step < m)
    }

    /// Runs one epoch (or what remains of the step budget). Returns `None`
    /// when the budget was already exhausted.
    pub fn run_epoch(&mut self) -> Result<Option<EpochSummary>, TrainError> {
        if !self.budget_left() {
            return Ok(None);
        }
        let epoch = self.epoch;
        let lr = self.config.learning_rate(epoch);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.shuffle_seed);
        rng.set_stream(epoch as u64);
        let mut order: Vec<usize> = (0..self.data.len()).collect();
        order.shuffle(&mut rng);

        let (mut loss_sum, mut seen, mut hits, mut steps) = (0.0f64, 0usize, 0usize, 0usize);
        for batch in order.chunks(self.config.batch_size) {
            if !self.budget_left() {
                break;
            }
            let mut grads = self.net.zero_grads();
            let mut batch_loss = 0.0f32;
            for &i in batch {
                let pair = &self.data[i];
                let (planes, label) = if self.config.symmetry_augment {
                    let sym = Symmetry::new(rng.gen_range(0..8)).expect("in range");
                    (pair.planes.transform(sym), sym.apply_index(pair.label as usize, pair.planes.size()))
                } else {
                    (pair.planes.clone(), pair.label as usize)
                };
                let (loss, scores, g) = self.net.example_gradients(&planes, label)?;
                let best = scores
                    .iter()
                    .enumerate()
                    .fold((0, f32::NEG_INFINITY), |acc, (j, &s)| if s > acc.1 { (j, s) } else { acc });
                hits += (best.0 == label) as usize;
                batch_loss += loss;
                for (acc, lg) in grads.iter_mut().zip(&g) {
                    acc.add_assign(lg);
                }
            }
            let scale = 1.0 / batch.len() as f32;
            for g in &mut grads {
                g.scale(scale);
            }
            self.net.sgd_step(&grads, lr)?;
            self.step += 1;
            steps += 1;
            seen += batch.len();
            loss_sum += batch_loss as f64;
            self.history.steps.push(StepRecord {
                step: self.step,
                epoch,
                lr,
                loss: batch_loss * scale,
            });
        }
        let summary = EpochSummary {
            epoch,
            lr,
            steps,
            mean_loss: (loss_sum / seen.max(1) as f64) as f32,
            train_top1: hits as f32 / seen.max(1) as f32,
        };
        log::info!(
            "epoch {epoch}: {steps} steps, lr {lr}, loss {:.4}, top1 {:.3}",
            summary.mean_loss,
            summary.train_top1
        );
        self.history.epochs.push(summary.clone());
        self.epoch += 1;
        Ok(Some(summary))
    }
}

/// Trains for `config.epochs` epochs, calling `on_epoch` after each one
/// (typically to write a checkpoint).
pub fn train<F>(
    net: PolicyNet,
    data: &[StateMovePair],
    config: &TrainConfig,
    mut on_epoch: F,
) -> Result<(PolicyNet, TrainHistory), TrainError>
where
    F: FnMut(&EpochSummary, &PolicyNet) -> Result<(), TrainError>,
{
    let mut trainer = Trainer::new(net, data, config.clone())?;
    for _ in 0..config.epochs {
        match trainer.run_epoch()? {
            Some(summary) => on_epoch(&summary, &trainer.net)?,
            None => break,
        }
    }
    Ok((trainer.net, trainer.history))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub top1: f64,
    pub topk: BTreeMap<usize, f64>,
    /// Mean cross-entropy of the label under a softmax over all points.
    pub loss: f64,
    pub examples: usize,
}

/// Top-k accuracy of `model` on `data`. A hit needs the label among the k
/// most probable legal points, ranked the way [`PolicyOutput::top_k`]
/// ranks them.
///
/// [`PolicyOutput::top_k`]: crossgo_core::PolicyOutput::top_k
pub fn evaluate<M: ScoreModel + ?Sized>(
    model: &M,
    data: &[StateMovePair],
    ks: &[usize],
    mode: EnsembleMode,
) -> Result<EvalReport, TrainError> {
    if data.is_empty() {
        return Err(TrainError::Empty);
    }
    let mut ks: Vec<usize> = ks.iter().copied().filter(|&k| k > 0).collect();
    ks.push(1);
    ks.sort_unstable();
    ks.dedup();
    let mut hits = vec![0usize; ks.len()];
    let mut loss = 0.0f64;
    for pair in data {
        let features = FeatureTensor {
            planes: pair.planes.clone(),
            perspective: Color::Black,
        };
        let out = predict_features(model, &features, mode)?;
        let label = pair.label as usize;
        let (l, _) = softmax_cross_entropy(&out.scores, label).map_err(ModelError::from)?;
        loss += l as f64;
        if !out.legal[label] {
            continue;
        }
        let s = out.scores[label];
        let rank = (0..out.scores.len())
            .filter(|&j| out.legal[j] && (out.scores[j] > s || (out.scores[j] == s && j < label)))
            .count();
        for (h, &k) in hits.iter_mut().zip(&ks) {
            *h += (rank < k) as usize;
        }
    }
    let n = data.len() as f64;
    let topk: BTreeMap<usize, f64> = ks.iter().zip(&hits).map(|(&k, &h)| (k, h as f64 / n)).collect();
    Ok(EvalReport {
        top1: topk[&1],
        topk,
        loss: loss / n,
        examples: data.len(),
    })
}
