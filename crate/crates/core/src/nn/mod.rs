//! A small dense tensor and convolution engine with hand-written reverse
//! passes. Everything is `f32` and single-example; batching is done by
//! accumulating gradients across examples.

mod conv;
mod gemm;
mod mask;
mod ops;
mod tensor;

pub use conv::{ConvGrads, ConvLayer};
pub use mask::{cross_mask, max_cross_width, CrossMask};
pub use ops::{concat_channels, relu, relu_backward, relu_in_place, sgd_step, softmax, softmax_cross_entropy, split_channels};
pub use tensor::Tensor;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NnError {
    #[error("{op}: shape mismatch, expected {expected:?}, got {got:?}")]
    Shape {
        op: &'static str,
        expected: (usize, usize, usize),
        got: (usize, usize, usize),
    },
    #[error("{op}: length mismatch, expected {expected}, got {got}")]
    Length {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("label {label} out of range for {classes} classes")]
    Label { label: usize, classes: usize },
    #[error("{op}: output spatial size would be empty")]
    EmptyOutput { op: &'static str },
    #[error("{op}: non-finite value")]
    NonFinite { op: &'static str },
    #[error("concat of zero tensors")]
    EmptyConcat,
}
