//! Cross-shaped filter masks.
//!
//! The active region of an `n`×`n` cross filter of width `c` is the union
//! of all cells covered by a `c`×`c` block sliding from each corner to the
//! opposite corner. A cell `(r, q)` is covered by the main-diagonal sweep
//! iff `|r - q| <= c - 1` and by the anti-diagonal sweep iff
//! `|r + q - (n - 1)| <= c - 1`. What is left over is four triangles, one
//! against each side.

use alloc::vec;
use alloc::vec::Vec;

/// Largest cross width that still yields a proper cross: `⌈n/2 − 1⌉`.
pub const fn max_cross_width(n: usize) -> usize {
    if n < 2 {
        0
    } else {
        (n - 1) / 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossMask {
    n: usize,
    c: usize,
    active: Vec<bool>,
}

/// Builds the mask for filter size `n` and cross width `c`.
///
/// `c == 0` gives an all-zero mask and `c` above [`max_cross_width`] gives
/// an all-one mask (a plain dense filter).
pub fn cross_mask(n: usize, c: usize) -> CrossMask {
    let active = if c == 0 {
        vec![false; n * n]
    } else if c > max_cross_width(n) {
        vec![true; n * n]
    } else {
        let band = (c - 1) as isize;
        let last = n as isize - 1;
        (0..n * n)
            .map(|i| {
                let (r, q) = ((i / n) as isize, (i % n) as isize);
                (r - q).abs() <= band || (r + q - last).abs() <= band
            })
            .collect()
    };
    CrossMask { n, c, active }
}

impl CrossMask {
    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.c
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.active[row * self.n + col]
    }

    /// Row-major activity flags.
    pub fn cells(&self) -> &[bool] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_dense(&self) -> bool {
        self.active.iter().all(|&a| a)
    }

    /// Row-major indices of the active cells.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&i| self.active[i]).collect()
    }

    /// Rebuilds a mask from stored flags; `None` unless the flags are a
    /// valid cross mask for `(n, c)`.
    pub fn from_cells(n: usize, c: usize, cells: &[bool]) -> Option<CrossMask> {
        let mask = cross_mask(n, c);
        (mask.active == cells).then_some(mask)
    }
}
