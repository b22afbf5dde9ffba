use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper limit on `n·K`, i.e. at most 2^16 leaves.
pub const MAX_LOG_LEAVES: u32 = 16;

/// Dyadic grid on `[0,1)ⁿ` with generations `0..=depth`.
///
/// `pad` is the generation of the support subcube, the one at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    pub n: u32,
    pub depth: u32,
    pub pad: u32,
}

impl Grid {
    pub fn new(n: u32, depth: u32, pad: u32) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::OutOfRange {
                what: "n",
                value: n as i64,
                range: "[1, 2]".into(),
            });
        }
        if depth == 0 || n * depth > MAX_LOG_LEAVES {
            return Err(Error::OutOfRange {
                what: "K",
                value: depth as i64,
                range: format!("[1, {}]", MAX_LOG_LEAVES / n),
            });
        }
        if pad > depth {
            return Err(Error::OutOfRange {
                what: "pad",
                value: pad as i64,
                range: format!("[0, {depth}]"),
            });
        }
        Ok(Grid { n, depth, pad })
    }

    /// Number of generation-`k` cubes, 2^{nk}.
    #[inline]
    pub fn cubes_at(&self, k: u32) -> usize {
        1usize << (self.n * k)
    }

    #[inline]
    pub fn leaves(&self) -> usize {
        self.cubes_at(self.depth)
    }

    /// Lebesgue measure of a generation-`k` cube.
    #[inline]
    pub fn measure_at(&self, k: u32) -> f64 {
        (-((self.n * k) as f64)).exp2()
    }

    #[inline]
    pub fn leaf_measure(&self) -> f64 {
        self.measure_at(self.depth)
    }

    /// Flat index of the generation-`k` cube containing `leaf`.
    #[inline]
    pub fn ancestor_of_leaf(&self, leaf: usize, k: u32) -> usize {
        let shift = self.depth - k;
        if self.n == 1 {
            leaf >> shift
        } else {
            let side = self.depth;
            let x0 = leaf >> side;
            let x1 = leaf & ((1 << side) - 1);
            ((x0 >> shift) << k) | (x1 >> shift)
        }
    }

    /// Leaves of the generation-`k` cube with flat index `cube`, ascending.
    pub fn leaves_of(&self, k: u32, cube: usize) -> Vec<usize> {
        let c = CubeIndex::from_flat(self.n, k, cube);
        let shift = self.depth - k;
        let w = 1usize << shift;
        if self.n == 1 {
            let start = (c.coords[0] as usize) << shift;
            (start..start + w).collect()
        } else {
            let side = 1usize << self.depth;
            let x0s = (c.coords[0] as usize) << shift;
            let x1s = (c.coords[1] as usize) << shift;
            let mut out = Vec::with_capacity(w * w);
            for a in x0s..x0s + w {
                for b in x1s..x1s + w {
                    out.push(a * side + b);
                }
            }
            out
        }
    }

    /// Whether `leaf` lies in the generation-`pad` cube at the origin.
    #[inline]
    pub fn in_support(&self, leaf: usize) -> bool {
        self.ancestor_of_leaf(leaf, self.pad) == 0
    }

    pub fn cube(&self, k: u32, flat: usize) -> CubeIndex {
        CubeIndex::from_flat(self.n, k, flat)
    }

    /// Midpoint of a leaf.
    pub fn leaf_center(&self, leaf: usize) -> [f64; 2] {
        let c = self.cube(self.depth, leaf);
        let h = self.side_at(self.depth);
        [
            (c.coords[0] as f64 + 0.5) * h,
            if self.n == 2 {
                (c.coords[1] as f64 + 0.5) * h
            } else {
                0.0
            },
        ]
    }

    /// Side length of a generation-`k` cube.
    #[inline]
    pub fn side_at(&self, k: u32) -> f64 {
        (-(k as f64)).exp2()
    }
}

/// Dyadic cube: generation plus integer coordinates in `[0, 2^gen)`.
///
/// For `n = 1` only `coords[0]` is used and `coords[1]` stays 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CubeIndex {
    pub gen: u32,
    pub coords: [u32; 2],
}

impl CubeIndex {
    pub const ROOT: CubeIndex = CubeIndex {
        gen: 0,
        coords: [0, 0],
    };

    pub fn from_flat(n: u32, gen: u32, flat: usize) -> Self {
        if n == 1 {
            CubeIndex {
                gen,
                coords: [flat as u32, 0],
            }
        } else {
            CubeIndex {
                gen,
                coords: [(flat >> gen) as u32, (flat & ((1 << gen) - 1)) as u32],
            }
        }
    }

    pub fn flat(&self, n: u32) -> usize {
        if n == 1 {
            self.coords[0] as usize
        } else {
            ((self.coords[0] as usize) << self.gen) | self.coords[1] as usize
        }
    }

    /// Parent cube; the root is its own parent.
    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    /// `s`-th ancestor, clamped at generation 0.
    pub fn ancestor(&self, s: u32) -> Self {
        let s = s.min(self.gen);
        CubeIndex {
            gen: self.gen - s,
            coords: [self.coords[0] >> s, self.coords[1] >> s],
        }
    }

    /// Child number `i` in `0..2ⁿ`; bit `n-1-j` of `i` selects the upper half on axis `j`.
    pub fn child(&self, n: u32, i: usize) -> Self {
        let mut c = [self.coords[0] << 1, self.coords[1] << 1];
        for (j, cj) in c.iter_mut().enumerate().take(n as usize) {
            if (i >> (n as usize - 1 - j)) & 1 == 1 {
                *cj += 1;
            }
        }
        if n == 1 {
            c[1] = 0;
        }
        CubeIndex {
            gen: self.gen + 1,
            coords: c,
        }
    }

    pub fn children(&self, n: u32) -> Vec<Self> {
        (0..1usize << n).map(|i| self.child(n, i)).collect()
    }

    /// Whether `self` contains `other` (or equals it).
    pub fn contains(&self, other: &CubeIndex) -> bool {
        other.gen >= self.gen && other.ancestor(other.gen - self.gen) == *self
    }
}
