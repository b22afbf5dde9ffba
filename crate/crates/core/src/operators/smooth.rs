use serde::{Deserialize, Serialize};

use super::transform::Side;
use crate::dyadic::{Grid, MatFn};
use crate::error::{Error, Result};
use crate::ncalg::Mat;

/// Scalar profile `κ(x, y)` of a smooth kernel `k(x, y) = κ(x, y) A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum KernelShape {
    Zero,
    /// `sgn(x₀ − y₀)`.
    Sign,
    /// `(x_a − y_a) / |x − y|^{n+1}`; the Hilbert kernel `1/(x − y)` for `n = 1`.
    Riesz {
        axis: u32,
    },
}

impl KernelShape {
    pub fn eval(&self, n: u32, x: [f64; 2], y: [f64; 2]) -> f64 {
        match *self {
            KernelShape::Zero => 0.0,
            KernelShape::Sign => {
                let t = x[0] - y[0];
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            KernelShape::Riesz { axis } => {
                let mut r2 = 0.0;
                for j in 0..n as usize {
                    r2 += (x[j] - y[j]).powi(2);
                }
                (x[axis as usize] - y[axis as usize]) / r2.sqrt().powi(n as i32 + 1)
            }
        }
    }
}

/// Midpoint-rule discretization of `k(x, y) = κ(x, y) A` on leaf centres,
/// diagonal leaf omitted. With `adjoint` set the kernel is `k(y, x)*`.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothKernelSpec {
    pub grid: Grid,
    pub shape: KernelShape,
    pub coeff: Mat,
    pub side: Side,
    pub adjoint: bool,
}

impl SmoothKernelSpec {
    pub fn new(grid: Grid, shape: KernelShape, coeff: Mat, side: Side) -> Result<Self> {
        if let KernelShape::Riesz { axis } = shape {
            if axis >= grid.n {
                return Err(Error::OutOfRange {
                    what: "Riesz axis",
                    value: axis as i64,
                    range: format!("[0, {})", grid.n),
                });
            }
        }
        Ok(SmoothKernelSpec {
            grid,
            shape,
            coeff,
            side,
            adjoint: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.coeff.dim()
    }

    fn at_points(&self, x: [f64; 2], y: [f64; 2]) -> Mat {
        let n = self.grid.n;
        if self.adjoint {
            self.coeff.adjoint().scale(self.shape.eval(n, y, x))
        } else {
            self.coeff.scale(self.shape.eval(n, x, y))
        }
    }

    /// `k(x, y)` between distinct leaves.
    pub fn kernel(&self, x: usize, y: usize) -> Result<Mat> {
        if x == y {
            return Err(Error::Kernel {
                x_leaf: x,
                y_leaf: y,
                msg: "diagonal leaf is excluded".into(),
            });
        }
        let g = self.grid;
        let k = self.at_points(g.leaf_center(x), g.leaf_center(y));
        if !k.is_finite() {
            return Err(Error::Kernel {
                x_leaf: x,
                y_leaf: y,
                msg: "non-finite kernel value".into(),
            });
        }
        Ok(k)
    }

    pub fn apply(&self, f: &MatFn) -> Result<MatFn> {
        f.check_compatible_grid(self.grid)?;
        if f.dim() != self.dim() {
            return Err(Error::Mismatch(format!(
                "d = {} vs {}",
                f.dim(),
                self.dim()
            )));
        }
        let g = self.grid;
        let w = g.leaf_measure();
        let mut vals = Vec::with_capacity(g.leaves());
        for x in 0..g.leaves() {
            let mut acc = Mat::zeros(self.dim());
            for y in 0..g.leaves() {
                if x == y {
                    continue;
                }
                let k = self.kernel(x, y)?;
                acc.axpy(w, &self.side.mul(&k, f.at(y)));
            }
            vals.push(acc);
        }
        MatFn::new(g, self.dim(), vals)
    }

    /// Operator with kernel `k(y, x)*`, the adjoint under `φ(f* g)`.
    pub fn adjoint(&self) -> Self {
        SmoothKernelSpec {
            adjoint: !self.adjoint,
            ..self.clone()
        }
    }

    pub fn conjugate_side(&self) -> Self {
        SmoothKernelSpec {
            coeff: self.coeff.adjoint(),
            side: self.side.flip(),
            ..self.clone()
        }
    }

    /// Discrete Hörmander functional
    /// `sup_Q sup_{y ∈ Q} Σ_{x ∉ 2Q} |x| ‖k(x, y) − k(x, c_Q)‖`.
    pub fn hormander(&self) -> f64 {
        let g = self.grid;
        let w = g.leaf_measure();
        let mut worst = 0.0f64;
        for k in 0..g.depth {
            let side = g.side_at(k);
            for c in 0..g.cubes_at(k) {
                let cube = g.cube(k, c);
                let mut centre = [0.0; 2];
                for j in 0..g.n as usize {
                    centre[j] = (cube.coords[j] as f64 + 0.5) * side;
                }
                let far: Vec<usize> = (0..g.leaves())
                    .filter(|&x| {
                        let p = g.leaf_center(x);
                        (0..g.n as usize).any(|j| (p[j] - centre[j]).abs() >= side)
                    })
                    .collect();
                if far.is_empty() {
                    continue;
                }
                for y in g.leaves_of(k, c) {
                    let py = g.leaf_center(y);
                    let mut acc = 0.0;
                    for &x in &far {
                        let px = g.leaf_center(x);
                        acc +=
                            w * (&self.at_points(px, py) - &self.at_points(px, centre)).op_norm();
                    }
                    worst = worst.max(acc);
                }
            }
        }
        worst
    }
}
