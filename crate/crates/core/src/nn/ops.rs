use alloc::vec::Vec;

use super::{NnError, Tensor};

pub fn relu(t: &Tensor) -> Tensor {
    let mut out = t.clone();
    relu_in_place(&mut out);
    out
}

pub fn relu_in_place(t: &mut Tensor) {
    t.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
}

/// Passes `grad` through where `saved > 0`. `saved` may be either the
/// input or the output of the ReLU; both are positive at the same points.
pub fn relu_backward(grad: &Tensor, saved: &Tensor) -> Result<Tensor, NnError> {
    if grad.shape() != saved.shape() {
        return Err(NnError::Shape {
            op: "relu backward",
            expected: saved.shape(),
            got: grad.shape(),
        });
    }
    let mut out = grad.clone();
    for (g, &s) in out.data_mut().iter_mut().zip(saved.data()) {
        if s <= 0.0 {
            *g = 0.0;
        }
    }
    Ok(out)
}

/// Stacks tensors along the channel axis, preserving order.
pub fn concat_channels(parts: &[&Tensor]) -> Result<Tensor, NnError> {
    let first = parts.first().ok_or(NnError::EmptyConcat)?;
    let (h, w) = (first.height(), first.width());
    let mut channels = 0;
    for p in parts {
        if (p.height(), p.width()) != (h, w) {
            return Err(NnError::Shape {
                op: "concat",
                expected: (p.channels(), h, w),
                got: p.shape(),
            });
        }
        channels += p.channels();
    }
    let mut data = Vec::with_capacity(channels * h * w);
    for p in parts {
        data.extend_from_slice(p.data());
    }
    Tensor::from_vec(channels, h, w, data)
}

/// Inverse of [`concat_channels`]: cuts `t` into consecutive channel groups.
pub fn split_channels(t: &Tensor, sizes: &[usize]) -> Result<Vec<Tensor>, NnError> {
    let total: usize = sizes.iter().sum();
    if total != t.channels() {
        return Err(NnError::Length {
            op: "split",
            expected: t.channels(),
            got: total,
        });
    }
    let plane = t.plane_len();
    let mut offset = 0;
    sizes
        .iter()
        .map(|&c| {
            let part = t.data()[offset * plane..(offset + c) * plane].to_vec();
            offset += c;
            Tensor::from_vec(c, t.height(), t.width(), part)
        })
        .collect()
}

/// Numerically stabilized softmax.
pub fn softmax(scores: &[f32]) -> Vec<f32> {
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut out: Vec<f32> = scores.iter().map(|&s| libm::expf(s - max)).collect();
    let sum: f32 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= sum);
    out
}

/// Cross-entropy of `softmax(scores)` against `label`. Returns the loss
/// `-ln p[label]` and its gradient `p - onehot(label)`.
pub fn softmax_cross_entropy(scores: &[f32], label: usize) -> Result<(f32, Vec<f32>), NnError> {
    if label >= scores.len() {
        return Err(NnError::Label {
            label,
            classes: scores.len(),
        });
    }
    let max = scores.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let shifted: Vec<f32> = scores.iter().map(|&s| s - max).collect();
    let sum: f32 = shifted.iter().map(|&s| libm::expf(s)).sum();
    let log_sum = libm::logf(sum);
    let loss = log_sum - shifted[label];
    let mut grad: Vec<f32> = shifted.iter().map(|&s| libm::expf(s - log_sum)).collect();
    grad[label] -= 1.0;
    if cfg!(debug_assertions) && !loss.is_finite() {
        return Err(NnError::NonFinite { op: "softmax cross-entropy" });
    }
    Ok((loss, grad))
}

/// Vanilla SGD update `p ← p − lr·g`.
pub fn sgd_step(params: &mut [f32], grads: &[f32], lr: f32) -> Result<(), NnError> {
    if params.len() != grads.len() {
        return Err(NnError::Length {
            op: "sgd",
            expected: params.len(),
            got: grads.len(),
        });
    }
    for (p, &g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}
