//! 2D convolution (cross-correlation) with zero padding and an optional
//! cross mask.
//!
//! Lowered to a matrix product over the *active* filter taps only: masked
//! weights never enter the product and their gradients are exactly zero,
//! so they stay at zero through any number of updates.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::gemm::{gemm, MatRef};
use super::mask::CrossMask;
use super::ops::sgd_step;
use super::{NnError, Tensor};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvLayer {
    in_channels: usize,
    out_channels: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
    mask: Option<CrossMask>,
    taps: Vec<usize>,
    weights: Vec<f32>,
    bias: Vec<f32>,
}

/// Gradients for one [`ConvLayer`], shaped like its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvGrads {
    pub weights: Vec<f32>,
    pub bias: Vec<f32>,
}

impl ConvGrads {
    pub fn zeros_like(layer: &ConvLayer) -> ConvGrads {
        ConvGrads {
            weights: vec![0.0; layer.weights.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }

    pub fn add_assign(&mut self, other: &ConvGrads) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += b;
        }
    }

    pub fn scale(&mut self, factor: f32) {
        self.weights.iter_mut().chain(self.bias.iter_mut()).for_each(|g| *g *= factor);
    }
}

impl ConvLayer {
    /// A zero-initialized layer. A dense mask is dropped.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        pad: usize,
        mask: Option<CrossMask>,
    ) -> ConvLayer {
        assert!(kernel >= 1 && stride >= 1, "kernel and stride must be positive");
        if let Some(m) = &mask {
            assert_eq!(m.size(), kernel, "mask size must match kernel");
        }
        let mask = mask.filter(|m| !m.is_dense());
        let taps = match &mask {
            Some(m) => m.active_indices(),
            None => (0..kernel * kernel).collect(),
        };
        ConvLayer {
            in_channels,
            out_channels,
            kernel,
            stride,
            pad,
            mask,
            taps,
            weights: vec![0.0; out_channels * in_channels * kernel * kernel],
            bias: vec![0.0; out_channels],
        }
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.out_channels
    }

    pub fn kernel(&self) -> usize {
        self.kernel
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn pad(&self) -> usize {
        self.pad
    }

    pub fn mask(&self) -> Option<&CrossMask> {
        self.mask.as_ref()
    }

    /// Weights as `(out, in, kernel, kernel)`, row-major.
    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    /// Number of unmasked filter taps per input channel.
    pub fn active_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.out_channels * self.in_channels * self.taps.len() + self.out_channels
    }

    /// Replaces the parameters; weights under the mask are forced to zero.
    pub fn set_parameters(&mut self, weights: Vec<f32>, bias: Vec<f32>) -> Result<(), NnError> {
        if weights.len() != self.weights.len() {
            return Err(NnError::Length {
                op: "conv weights",
                expected: self.weights.len(),
                got: weights.len(),
            });
        }
        if bias.len() != self.bias.len() {
            return Err(NnError::Length {
                op: "conv bias",
                expected: self.bias.len(),
                got: bias.len(),
            });
        }
        self.weights = weights;
        self.bias = bias;
        self.apply_mask();
        Ok(())
    }

    fn apply_mask(&mut self) {
        if let Some(mask) = &self.mask {
            let k2 = self.kernel * self.kernel;
            for filter in self.weights.chunks_mut(k2) {
                for (w, &on) in filter.iter_mut().zip(mask.cells()) {
                    if !on {
                        *w = 0.0;
                    }
                }
            }
        }
    }

    /// Uniform He initialization. The fan-in counts active taps only, so a
    /// sparse cross filter gets proportionally larger weights.
    pub fn init_he<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let fan_in = (self.in_channels * self.taps.len()).max(1) as f32;
        let bound = libm::sqrtf(6.0 / fan_in);
        for w in &mut self.weights {
            *w = rng.gen_range(-bound..=bound);
        }
        self.bias.fill(0.0);
        self.apply_mask();
    }

    /// Output spatial size for an input of `height`×`width`.
    pub fn output_dims(&self, height: usize, width: usize) -> Option<(usize, usize)> {
        let span_h = height + 2 * self.pad;
        let span_w = width + 2 * self.pad;
        if span_h < self.kernel || span_w < self.kernel {
            return None;
        }
        Some((
            (span_h - self.kernel) / self.stride + 1,
            (span_w - self.kernel) / self.stride + 1,
        ))
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize), NnError> {
        if input.channels() != self.in_channels {
            return Err(NnError::Shape {
                op: "conv2d",
                expected: (self.in_channels, input.height(), input.width()),
                got: input.shape(),
            });
        }
        self.output_dims(input.height(), input.width())
            .filter(|&(h, w)| h > 0 && w > 0)
            .ok_or(NnError::EmptyOutput { op: "conv2d" })
    }

    /// Weights of the active taps packed as an `out × (in·taps)` matrix.
    fn packed_weights(&self) -> Vec<f32> {
        let k2 = self.kernel * self.kernel;
        let mut packed = Vec::with_capacity(self.out_channels * self.in_channels * self.taps.len());
        for filter in self.weights.chunks(k2) {
            packed.extend(self.taps.iter().map(|&t| filter[t]));
        }
        packed
    }

    /// Source index in the input plane for output position `o` and tap
    /// offset `k` along one axis, or `None` when it falls in the padding.
    #[inline]
    fn source(&self, o: usize, k: usize, extent: usize) -> Option<usize> {
        (o * self.stride + k).checked_sub(self.pad).filter(|&i| i < extent)
    }

    fn im2col(&self, input: &Tensor, oh: usize, ow: usize) -> Vec<f32> {
        let (h, w) = (input.height(), input.width());
        let n_out = oh * ow;
        let mut cols = vec![0.0f32; self.in_channels * self.taps.len() * n_out];
        let data = input.data();
        let mut row = 0;
        for ci in 0..self.in_channels {
            let plane = &data[ci * h * w..(ci + 1) * h * w];
            for &tap in &self.taps {
                let (ky, kx) = (tap / self.kernel, tap % self.kernel);
                let dst = &mut cols[row * n_out..(row + 1) * n_out];
                for oy in 0..oh {
                    let Some(iy) = self.source(oy, ky, h) else { continue };
                    let src_row = &plane[iy * w..(iy + 1) * w];
                    let dst_row = &mut dst[oy * ow..(oy + 1) * ow];
                    for (ox, d) in dst_row.iter_mut().enumerate() {
                        if let Some(ix) = self.source(ox, kx, w) {
                            *d = src_row[ix];
                        }
                    }
                }
                row += 1;
            }
        }
        cols
    }

    fn col2im(&self, cols: &[f32], h: usize, w: usize, oh: usize, ow: usize) -> Tensor {
        let n_out = oh * ow;
        let mut out = Tensor::zeros(self.in_channels, h, w);
        let data = out.data_mut();
        let mut row = 0;
        for ci in 0..self.in_channels {
            let plane = &mut data[ci * h * w..(ci + 1) * h * w];
            for &tap in &self.taps {
                let (ky, kx) = (tap / self.kernel, tap % self.kernel);
                let src = &cols[row * n_out..(row + 1) * n_out];
                for oy in 0..oh {
                    let Some(iy) = self.source(oy, ky, h) else { continue };
                    for ox in 0..ow {
                        if let Some(ix) = self.source(ox, kx, w) {
                            plane[iy * w + ix] += src[oy * ow + ox];
                        }
                    }
                }
                row += 1;
            }
        }
        out
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor, NnError> {
        let (oh, ow) = self.check_input(input)?;
        let n_out = oh * ow;
        let depth = self.in_channels * self.taps.len();
        let cols = self.im2col(input, oh, ow);
        let packed = self.packed_weights();
        let mut out = Tensor::zeros(self.out_channels, oh, ow);
        gemm(
            MatRef::row_major(&packed, self.out_channels, depth),
            MatRef::row_major(&cols, depth, n_out),
            out.data_mut(),
            false,
        );
        for (plane, &b) in out.data_mut().chunks_mut(n_out).zip(&self.bias) {
            plane.iter_mut().for_each(|v| *v += b);
        }
        out.check_finite("conv2d forward")?;
        Ok(out)
    }

    /// Reverse pass. `input` is the tensor given to [`ConvLayer::forward`].
    /// The input gradient is skipped (returned as `None`) unless
    /// `need_input_grad`.
    pub fn backward(
        &self,
        grad_out: &Tensor,
        input: &Tensor,
        need_input_grad: bool,
    ) -> Result<(Option<Tensor>, ConvGrads), NnError> {
        let (oh, ow) = self.check_input(input)?;
        if grad_out.shape() != (self.out_channels, oh, ow) {
            return Err(NnError::Shape {
                op: "conv2d backward",
                expected: (self.out_channels, oh, ow),
                got: grad_out.shape(),
            });
        }
        let n_out = oh * ow;
        let depth = self.in_channels * self.taps.len();
        let cols = self.im2col(input, oh, ow);

        let bias: Vec<f32> = grad_out.data().chunks(n_out).map(|p| p.iter().sum()).collect();

        let mut packed_grad = vec![0.0f32; self.out_channels * depth];
        gemm(
            MatRef::row_major(grad_out.data(), self.out_channels, n_out),
            MatRef::transposed(&cols, n_out, depth),
            &mut packed_grad,
            false,
        );
        let k2 = self.kernel * self.kernel;
        let mut weights = vec![0.0f32; self.weights.len()];
        for (filter, packed) in weights.chunks_mut(k2).zip(packed_grad.chunks(self.taps.len().max(1))) {
            for (&t, &g) in self.taps.iter().zip(packed) {
                filter[t] = g;
            }
        }

        let grad_input = if need_input_grad {
            let packed = self.packed_weights();
            let mut grad_cols = vec![0.0f32; depth * n_out];
            gemm(
                MatRef::transposed(&packed, depth, self.out_channels),
                MatRef::row_major(grad_out.data(), self.out_channels, n_out),
                &mut grad_cols,
                false,
            );
            Some(self.col2im(&grad_cols, input.height(), input.width(), oh, ow))
        } else {
            None
        };
        Ok((grad_input, ConvGrads { weights, bias }))
    }

    /// `p ← p − lr·g` on weights and bias.
    pub fn sgd_step(&mut self, grads: &ConvGrads, lr: f32) -> Result<(), NnError> {
        sgd_step(&mut self.weights, &grads.weights, lr)?;
        sgd_step(&mut self.bias, &grads.bias, lr)
    }
}
