//! The dihedral group of the square acting on board coordinates.

use core::fmt;

/// One of the eight symmetries of a square board.
///
/// Element `k` rotates by `k % 4` quarter turns clockwise and then, when
/// `k >= 4`, mirrors left to right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Symmetry(u8);

impl Symmetry {
    pub const IDENTITY: Symmetry = Symmetry(0);
    pub const ROT90: Symmetry = Symmetry(1);
    pub const ROT180: Symmetry = Symmetry(2);
    pub const ROT270: Symmetry = Symmetry(3);
    pub const MIRROR: Symmetry = Symmetry(4);

    /// Returns `None` unless `id < 8`.
    pub const fn new(id: u8) -> Option<Symmetry> {
        if id < 8 {
            Some(Symmetry(id))
        } else {
            None
        }
    }

    pub const fn id(self) -> u8 {
        self.0
    }

    /// All eight elements, identity first.
    pub fn all() -> impl Iterator<Item = Symmetry> + Clone {
        (0..8).map(Symmetry)
    }

    pub const fn is_identity(self) -> bool {
        self.0 == 0
    }

    /// Maps `(row, col)` on an `size`×`size` grid.
    #[inline]
    pub const fn apply(self, row: usize, col: usize, size: usize) -> (usize, usize) {
        let last = size - 1;
        let (r, c) = match self.0 & 3 {
            0 => (row, col),
            1 => (col, last - row),
            2 => (last - row, last - col),
            _ => (last - col, row),
        };
        if self.0 >= 4 {
            (r, last - c)
        } else {
            (r, c)
        }
    }

    /// Maps a row-major index on an `size`×`size` grid.
    #[inline]
    pub const fn apply_index(self, index: usize, size: usize) -> usize {
        let (r, c) = self.apply(index / size, index % size, size);
        r * size + c
    }

    /// `self ∘ other`: the symmetry that applies `other` first, then `self`.
    pub fn compose(self, other: Symmetry) -> Symmetry {
        // A corner and an adjacent edge point pin down a dihedral element.
        const PROBES: [(usize, usize); 2] = [(0, 0), (0, 1)];
        for candidate in Symmetry::all() {
            let same = PROBES.iter().all(|&(r, c)| {
                let (r1, c1) = other.apply(r, c, 3);
                self.apply(r1, c1, 3) == candidate.apply(r, c, 3)
            });
            if same {
                return candidate;
            }
        }
        unreachable!("dihedral group is closed under composition")
    }

    pub fn inverse(self) -> Symmetry {
        Symmetry::all()
            .find(|s| s.compose(self).is_identity())
            .expect("every dihedral element has an inverse")
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let turns = (self.0 & 3) as u32 * 90;
        if self.0 >= 4 {
            write!(f, "rot{turns}+mirror")
        } else {
            write!(f, "rot{turns}")
        }
    }
}

/// Applies `sym` to a row-major `size`×`size` map: `out[sym(p)] = map[p]`.
pub fn transform_map<T: Copy>(map: &[T], size: usize, sym: Symmetry) -> alloc::vec::Vec<T> {
    debug_assert_eq!(map.len(), size * size);
    let mut out = map.to_vec();
    for (i, &v) in map.iter().enumerate() {
        out[sym.apply_index(i, size)] = v;
    }
    out
}
