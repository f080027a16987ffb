//! Structured spacetime grids, fourth-order difference stencils and the
//! product trapezoidal rule.
//!
//! Axis 0 is the time coordinate x⁰ and is stored outermost, so all points of
//! one time level are contiguous. An axis with a single node is a reduced
//! direction: fields are taken to be independent of it, derivatives along it
//! vanish and its quadrature weight is 1.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: [usize; 4],
    pub origin: [f64; 4],
    pub step: [f64; 4],
    pub periodic: [bool; 4],
}

/// Five-point first-derivative stencil at one node.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    index: [usize; 5],
    coeff: [f64; 5],
    scale: f64,
    kind: StencilKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StencilKind {
    Zero,
    Central,
    OneSided,
}

impl Stencil {
    fn zero() -> Self {
        Stencil {
            index: [0; 5],
            coeff: [0.0; 5],
            scale: 0.0,
            kind: StencilKind::Zero,
        }
    }

    /// Apply the stencil to nodal values `f(index)`.
    ///
    /// The central formula is evaluated as differences of symmetric pairs so
    /// that a constant field differentiates to exactly zero.
    pub fn apply<T>(&self, f: impl Fn(usize) -> T) -> T
    where
        T: Copy + Default + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
    {
        match self.kind {
            StencilKind::Zero => T::default(),
            StencilKind::Central => {
                let near = f(self.index[3]) - f(self.index[1]);
                let far = f(self.index[4]) - f(self.index[0]);
                (near * 8.0 - far) * self.scale
            }
            StencilKind::OneSided => {
                let mut acc = T::default();
                for k in 0..5 {
                    acc = acc + f(self.index[k]) * self.coeff[k];
                }
                acc * self.scale
            }
        }
    }

    /// Node indices and effective weights.
    pub fn weights(&self) -> Vec<(usize, f64)> {
        match self.kind {
            StencilKind::Zero => Vec::new(),
            StencilKind::Central => [0, 1, 3, 4]
                .iter()
                .map(|&k| (self.index[k], CENTRAL[k] * self.scale))
                .collect(),
            StencilKind::OneSided => (0..5).map(|k| (self.index[k], self.coeff[k] * self.scale)).collect(),
        }
    }
}

const CENTRAL: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];

impl Grid {
    pub fn new(n: [usize; 4], origin: [f64; 4], step: [f64; 4], periodic: [bool; 4]) -> Result<Self> {
        for axis in 0..4 {
            if n[axis] == 0 || (n[axis] > 1 && n[axis] < 5) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {} nodes; need 1 (reduced) or at least 5",
                    n[axis]
                )));
            }
            if !(step[axis].is_finite() && step[axis] > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {axis} step must be > 0")));
            }
            if !origin[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {axis} origin is not finite")));
            }
        }
        Ok(Self {
            n,
            origin,
            step,
            periodic,
        })
    }

    /// Periodic spatial box with `n` nodes per spatial axis over `[0, length)`
    /// and a single time level at `t`.
    pub fn periodic_box(n: [usize; 3], length: [f64; 3], t: f64) -> Result<Self> {
        let mut step = [1.0; 4];
        for k in 0..3 {
            step[k + 1] = length[k] / n[k] as f64;
        }
        Self::new([1, n[0], n[1], n[2]], [t, 0.0, 0.0, 0.0], step, [false, true, true, true])
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial_len(&self) -> usize {
        self.n[1] * self.n[2] * self.n[3]
    }

    pub fn index(&self, i: [usize; 4]) -> usize {
        ((i[0] * self.n[1] + i[1]) * self.n[2] + i[2]) * self.n[3] + i[3]
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 4] {
        let mut out = [0; 4];
        for axis in (0..4).rev() {
            out[axis] = idx % self.n[axis];
            idx /= self.n[axis];
        }
        out
    }

    /// Index of the spatial node of `idx` within one time level.
    pub fn spatial_index(&self, idx: usize) -> usize {
        idx % self.spatial_len()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.step[axis]
    }

    pub fn point(&self, idx: usize) -> [f64; 4] {
        let m = self.multi_index(idx);
        [
            self.coordinate(0, m[0]),
            self.coordinate(1, m[1]),
            self.coordinate(2, m[2]),
            self.coordinate(3, m[3]),
        ]
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n[0]).map(|i| self.coordinate(0, i)).collect()
    }

    /// Same spatial nodes (time axis may differ).
    pub fn same_space(&self, other: &Grid) -> bool {
        (1..4).all(|a| {
            self.n[a] == other.n[a]
                && self.origin[a] == other.origin[a]
                && self.step[a] == other.step[a]
                && self.periodic[a] == other.periodic[a]
        })
    }

    /// Grid with the same spatial nodes and a new time axis.
    pub fn with_time_axis(&self, nt: usize, t0: f64, dt: f64) -> Result<Grid> {
        let mut n = self.n;
        let mut origin = self.origin;
        let mut step = self.step;
        let mut periodic = self.periodic;
        n[0] = nt;
        origin[0] = t0;
        step[0] = dt;
        periodic[0] = false;
        Grid::new(n, origin, step, periodic)
    }

    /// Grid holding only one time level of this one.
    pub fn time_level(&self, t: f64) -> Grid {
        let mut g = self.clone();
        g.n[0] = 1;
        g.origin[0] = t;
        g.periodic[0] = false;
        g
    }

    /// Fourth-order first-derivative stencil along `axis` at node `idx`.
    /// Periodic axes use the central formula everywhere; bounded axes switch
    /// to one-sided formulas within two nodes of either end.
    pub fn stencil(&self, axis: usize, idx: usize) -> Stencil {
        let n = self.n[axis];
        if n == 1 {
            return Stencil::zero();
        }
        let mi = self.multi_index(idx);
        let i = mi[axis];
        let at = |j: usize| {
            let mut m = mi;
            m[axis] = j;
            self.index(m)
        };
        let mut s = Stencil {
            index: [0; 5],
            coeff: [0.0; 5],
            scale: 1.0 / (12.0 * self.step[axis]),
            kind: StencilKind::Central,
        };
        if self.periodic[axis] || (i >= 2 && i + 2 < n) {
            for k in 0..5 {
                s.index[k] = at((i + n + k - 2) % n);
                s.coeff[k] = CENTRAL[k];
            }
        } else {
            s.kind = StencilKind::OneSided;
            let (coeffs, left) = match i {
                0 => (EDGE0, true),
                1 => (EDGE1, true),
                _ if i == n - 1 => (EDGE0, false),
                _ => (EDGE1, false),
            };
            for k in 0..5 {
                // The right-hand edge mirrors the left-hand formulas.
                if left {
                    s.index[k] = at(k);
                    s.coeff[k] = coeffs[k];
                } else {
                    s.index[k] = at(n - 1 - k);
                    s.coeff[k] = -coeffs[k];
                }
            }
        }
        s
    }

    /// Trapezoidal weight of node `i` along `axis`.
    pub fn axis_weight(&self, axis: usize, i: usize) -> f64 {
        let n = self.n[axis];
        if n == 1 {
            1.0
        } else if !self.periodic[axis] && (i == 0 || i == n - 1) {
            0.5 * self.step[axis]
        } else {
            self.step[axis]
        }
    }

    /// Product trapezoidal weight over the spatial axes.
    pub fn spatial_weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        (1..4).map(|a| self.axis_weight(a, m[a])).product()
    }

    /// Product trapezoidal weight over all four axes.
    pub fn weight(&self, idx: usize) -> f64 {
        let m = self.multi_index(idx);
        (0..4).map(|a| self.axis_weight(a, m[a])).product()
    }
}

/// Pairwise summation in fixed order, so reductions are reproducible and
/// roundoff grows like log n.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + Default,
{
    match values.len() {
        0 => T::default(),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}
