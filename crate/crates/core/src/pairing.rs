//! Hypersurface integrals of Dirac currents: the normalization flux, the
//! Hermitian pairing ⟨φ|ψ⟩ and orthonormal mode bases.
//!
//! A slice is parametrized by the spatial coordinates u = (x¹, x², x³) of the
//! field grid, so the quadrature is the grid's own product rule in u. Fields
//! are interpolated to the slice cubically in time between stored levels.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dirac_dynamics::pair_current_value;
use crate::error::{Error, Result};
use crate::field::{CurrentField, SpinorField};
use crate::geometry::{self, Background, MetricChart};
use crate::grid::{pairwise_sum, Grid};
use crate::linalg::{c, Spinor, ZERO};
use crate::spin_algebra::PhysicalConstants;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slice {
    /// `x⁰ = time`.
    CoordinateTime { time: f64 },
    /// `x⁰ = time + slope * x¹`; flat charts only.
    Tilted { time: f64, slope: f64 },
}

impl Slice {
    pub fn at_time(time: f64) -> Self {
        Slice::CoordinateTime { time }
    }

    pub fn tilted(time: f64, slope: f64) -> Self {
        Slice::Tilted { time, slope }
    }

    /// x⁰ of the slice above spatial coordinates of `x`.
    pub fn time_at(&self, x: [f64; 4]) -> f64 {
        match *self {
            Slice::CoordinateTime { time } => time,
            Slice::Tilted { time, slope } => time + slope * x[1],
        }
    }

    /// Point of the slice above the spatial coordinates of `x`.
    pub fn embed(&self, x: [f64; 4]) -> [f64; 4] {
        [self.time_at(x), x[1], x[2], x[3]]
    }

    /// Coordinate tangent vectors ∂X/∂u^a.
    pub fn tangents(&self) -> [[f64; 4]; 3] {
        let slope = match *self {
            Slice::CoordinateTime { .. } => 0.0,
            Slice::Tilted { slope, .. } => slope,
        };
        [[slope, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    }

    /// Conormal dx⁰ − slope dx¹.
    fn conormal(&self) -> [f64; 4] {
        match *self {
            Slice::CoordinateTime { .. } => [1.0, 0.0, 0.0, 0.0],
            Slice::Tilted { slope, .. } => [1.0, -slope, 0.0, 0.0],
        }
    }

    /// Future-directed unit normal in coordinate components.
    pub fn unit_normal(&self, chart: &MetricChart, x: [f64; 4]) -> Result<[f64; 4]> {
        let p = self.embed(x);
        let g_inv = crate::linalg::inverse_real(&chart.metric_at(p)).ok_or(Error::SingularMetric { point: p })?;
        let w = self.conormal();
        let raised: [f64; 4] = std::array::from_fn(|i| (0..4).map(|j| g_inv[i][j] * w[j]).sum());
        let nn: f64 = (0..4).map(|i| raised[i] * w[i]).sum();
        if !(nn > 0.0) || raised[0] <= 0.0 {
            return Err(Error::NotSpacelike(format!("normal is not future timelike at {p:?}")));
        }
        Ok(raised.map(|v| v / nn.sqrt()))
    }
}

/// Lagrange weights `(level, weight)` placing time `t` on the time axis of
/// `grid`; cubic in the interior, exact on stored levels.
fn time_weights(grid: &Grid, t: f64) -> Result<Vec<(usize, f64)>> {
    let nt = grid.n[0];
    let t0 = grid.origin[0];
    let dt = grid.step[0];
    let end = grid.coordinate(0, nt - 1);
    let tol = 1e-9 * if nt > 1 { dt } else { 1.0_f64.max(t0.abs()) };
    if t < t0 - tol || t > end + tol {
        return Err(Error::SliceOutOfRange { time: t, start: t0, end });
    }
    let s = (t - t0) / dt;
    let nearest = s.round();
    if nt == 1 || (s - nearest).abs() * dt <= tol {
        return Ok(vec![((nearest as usize).min(nt - 1), 1.0)]);
    }
    let first = (s.floor() as usize).saturating_sub(1).min(nt.saturating_sub(4));
    let nodes: Vec<usize> = (first..(first + 4).min(nt)).collect();
    Ok(nodes
        .iter()
        .map(|&i| {
            let w = nodes
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (s - j as f64) / (i as f64 - j as f64))
                .product();
            (i, w)
        })
        .collect())
}

fn interpolate<T, F>(weights: &[(usize, f64)], ns: usize, spatial: usize, value: F) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    F: Fn(usize) -> T,
{
    weights
        .iter()
        .fold(T::default(), |acc, &(level, w)| acc + value(level * ns + spatial) * w)
}

fn interpolate_spinor(field: &SpinorField, weights: &[(usize, f64)], spatial: usize) -> Spinor {
    let ns = field.grid().spatial_len();
    std::array::from_fn(|a| interpolate(weights, ns, spatial, |i| field.at(i)[a]))
}

/// Quadrature of g(J, n) dS over the slice, J supplied per spatial node.
fn integrate(
    slice: &Slice,
    bg: &Background,
    grid: &Grid,
    mut current_at: impl FnMut(usize, &[(usize, f64)]) -> [C64; 4],
) -> Result<C64> {
    bg.check_field(grid)?;
    if matches!(slice, Slice::Tilted { .. }) && !bg.is_flat() {
        return Err(Error::NotSpacelike("tilted slices are supported on flat charts only".into()));
    }
    let chart = bg.chart();
    let eta = bg.gammas().metric;
    let ns = grid.spatial_len();
    let mut terms = Vec::with_capacity(ns);
    for s in 0..ns {
        let x = grid.point(s);
        let weights = time_weights(grid, slice.time_at(x))?;
        let n_coord = slice.unit_normal(chart, x)?;
        let pt = &bg.points()[s];
        let n_frame: [f64; 4] = std::array::from_fn(|p| (0..4).map(|i| pt.cotetrad[p][i] * n_coord[i]).sum());
        let ds = geometry::area_element(chart, slice, x)?;
        let j = current_at(s, &weights);
        let mut gjn = ZERO;
        for p in 0..4 {
            for q in 0..4 {
                if eta[p][q] != 0.0 {
                    gjn += j[p] * (eta[p][q] * n_frame[q]);
                }
            }
        }
        terms.push(gjn * (ds * grid.spatial_weight(s)));
    }
    Ok(pairwise_sum(&terms))
}

/// `∫_S g(J, n) dS` for a current sampled on one or more time levels.
pub fn flux(j: &CurrentField, slice: &Slice, bg: &Background) -> Result<C64> {
    let grid = j.grid();
    let ns = grid.spatial_len();
    integrate(slice, bg, grid, |s, w| {
        std::array::from_fn(|q| interpolate(w, ns, s, |i| j.at(i)[q]))
    })
}

/// The pairing `⟨φ|ψ⟩ = ∫_S g(J(φ, ψ), n) dS`.
pub fn inner(phi: &SpinorField, psi: &SpinorField, slice: &Slice, bg: &Background, k: &PhysicalConstants) -> Result<C64> {
    phi.check_same_grid(psi)?;
    let gs = bg.gammas();
    integrate(slice, bg, psi.grid(), |s, w| {
        let a = interpolate_spinor(phi, w, s);
        let b = interpolate_spinor(psi, w, s);
        pair_current_value(gs, k, &a, &b)
    })
}

/// Square matrix of pairings `G[i][j] = ⟨ψ_i|ψ_j⟩`.
pub fn gram_matrix(modes: &[SpinorField], slice: &Slice, bg: &Background, k: &PhysicalConstants) -> Result<Vec<Vec<C64>>> {
    let m = modes.len();
    let mut g = vec![vec![ZERO; m]; m];
    for i in 0..m {
        for j in i..m {
            let v = inner(&modes[i], &modes[j], slice, bg, k)?;
            g[i][j] = v;
            g[j][i] = v.conj();
        }
        g[i][i] = c(g[i][i].re, 0.0);
    }
    Ok(g)
}

/// max |G − I|.
pub fn identity_residual(g: &[Vec<C64>]) -> f64 {
    let mut r: f64 = 0.0;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            r = r.max((v - target).norm());
        }
    }
    r
}

/// Modes orthonormal under the pairing on a reference slice.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    modes: Vec<SpinorField>,
    slice: Slice,
    gram: Vec<Vec<C64>>,
}

impl ModeBasis {
    pub fn modes(&self) -> &[SpinorField] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn slice(&self) -> &Slice {
        &self.slice
    }

    /// Gram matrix on the reference slice.
    pub fn gram(&self) -> &[Vec<C64>] {
        &self.gram
    }

    pub fn gram_on(&self, slice: &Slice, bg: &Background, k: &PhysicalConstants) -> Result<Vec<Vec<C64>>> {
        gram_matrix(&self.modes, slice, bg, k)
    }

    pub fn into_modes(self) -> Vec<SpinorField> {
        self.modes
    }
}

/// Relative squared norm below which a mode counts as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

/// Modified Gram–Schmidt under the pairing on `slice`.
pub fn orthonormalize(
    raw: Vec<SpinorField>,
    slice: &Slice,
    bg: &Background,
    k: &PhysicalConstants,
) -> Result<ModeBasis> {
    let mut out: Vec<SpinorField> = Vec::with_capacity(raw.len());
    for (index, mode) in raw.into_iter().enumerate() {
        let scale = inner(&mode, &mode, slice, bg, k)?.re;
        let mut v = mode;
        for e in &out {
            let proj = inner(e, &v, slice, bg, k)?;
            v = v.combine(c(1.0, 0.0), e, -proj)?;
        }
        let norm2 = inner(&v, &v, slice, bg, k)?.re;
        if !(scale > 0.0) || norm2 <= RANK_TOLERANCE * scale {
            return Err(Error::RankDeficient {
                index,
                residual: if scale > 0.0 { norm2 / scale } else { 0.0 },
            });
        }
        out.push(v.scaled(c(1.0 / norm2.sqrt(), 0.0)));
    }
    let gram = gram_matrix(&out, slice, bg, k)?;
    Ok(ModeBasis {
        modes: out,
        slice: *slice,
        gram,
    })
}
