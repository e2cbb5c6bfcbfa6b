use alloc::vec;
use alloc::vec::Vec;

use super::NnError;

/// A row-major `(channels, height, width)` block of `f32`. Flat vectors
/// use shape `(count, 1, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(channels: usize, height: usize, width: usize) -> Tensor {
        Tensor {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_vec(
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f32>,
    ) -> Result<Tensor, NnError> {
        if data.len() != channels * height * width {
            return Err(NnError::Length {
                op: "tensor",
                expected: channels * height * width,
                got: data.len(),
            });
        }
        Ok(Tensor {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn vector(data: Vec<f32>) -> Tensor {
        Tensor {
            channels: data.len(),
            height: 1,
            width: 1,
            data,
        }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn at(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<(), NnError> {
        if self.shape() != other.shape() {
            return Err(NnError::Shape {
                op: "add",
                expected: self.shape(),
                got: other.shape(),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub(crate) fn check_finite(&self, op: &'static str) -> Result<(), NnError> {
        if cfg!(debug_assertions) && !self.is_finite() {
            return Err(NnError::NonFinite { op });
        }
        Ok(())
    }
}
