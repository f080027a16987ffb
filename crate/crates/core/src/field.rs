//! Spinor and current fields sampled on a [`Grid`].

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{Spinor, ZERO};

/// Dirac spinor components ψ^a (a = 0..4) in the canonical chiral frame at
/// every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    grid: Grid,
    data: Vec<Spinor>,
}

impl SpinorField {
    pub fn zeros(grid: Grid) -> Self {
        let data = vec![[ZERO; 4]; grid.len()];
        Self { grid, data }
    }

    pub fn from_data(grid: Grid, data: Vec<Spinor>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                data.len(),
                grid.len()
            )));
        }
        if data.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidGrid("spinor field has non-finite samples".into()));
        }
        Ok(Self { grid, data })
    }

    /// Sample `f(x)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 4]) -> Spinor) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Spinor] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Spinor] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Spinor> {
        self.data
    }

    pub fn at(&self, idx: usize) -> &Spinor {
        &self.data[idx]
    }

    pub fn conjugate(&self) -> SpinorField {
        let data = self.data.iter().map(|s| s.map(|z| z.conj())).collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    /// `a * self + b * other`; both fields must share a grid.
    pub fn combine(&self, a: C64, other: &SpinorField, b: C64) -> Result<SpinorField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("linear combination of fields on different grids".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| std::array::from_fn(|k| a * x[k] + b * y[k]))
            .collect();
        Ok(Self {
            grid: self.grid.clone(),
            data,
        })
    }

    pub fn scaled(&self, a: C64) -> SpinorField {
        let data = self.data.iter().map(|x| x.map(|z| a * z)).collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    /// One time level as a field on a single-level grid.
    pub fn time_slice(&self, it: usize) -> SpinorField {
        let ns = self.grid.spatial_len();
        let t = self.grid.coordinate(0, it);
        Self {
            grid: self.grid.time_level(t),
            data: self.data[it * ns..(it + 1) * ns].to_vec(),
        }
    }

    /// Largest pointwise component modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest pointwise difference to `other` (same grid).
    pub fn max_abs_diff(&self, other: &SpinorField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(x, y)| x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm()))
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_same_grid(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("spinor fields live on different grids".into()));
        }
        Ok(())
    }
}

/// Frame components J^q of a current at every node. Stored complex so that
/// the reality of the current is checked rather than assumed.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentField {
    grid: Grid,
    data: Vec<[C64; 4]>,
}

impl CurrentField {
    pub(crate) fn new(grid: Grid, data: Vec<[C64; 4]>) -> Self {
        Self { grid, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[[C64; 4]] {
        &self.data
    }

    pub fn at(&self, idx: usize) -> [C64; 4] {
        self.data[idx]
    }

    /// Real parts J^q at node `idx`.
    pub fn real(&self, idx: usize) -> [f64; 4] {
        self.data[idx].map(|z| z.re)
    }

    /// Largest imaginary part over all components and nodes.
    pub fn max_imaginary(&self) -> f64 {
        self.data.iter().flatten().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    /// One time level.
    pub fn time_slice(&self, it: usize) -> CurrentField {
        let ns = self.grid.spatial_len();
        let t = self.grid.coordinate(0, it);
        Self {
            grid: self.grid.time_level(t),
            data: self.data[it * ns..(it + 1) * ns].to_vec(),
        }
    }
}
