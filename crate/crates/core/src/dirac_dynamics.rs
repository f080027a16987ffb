//! The Dirac equation, its method-of-lines evolution, the Dirac current and
//! the action integral.
//!
//! Coordinate x⁰ is `c t`, so with ∇_q = Υ_q^μ ∂_μ + A_q the equation reads
//! `iħ γ^q ∇_q ψ = m c ψ` and plane waves go as `exp(−i(ω x⁰ − k·x))` with
//! `ω² = κ² + |k|²`, `κ = m c / ħ`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{CurrentField, SpinorField};
use crate::geometry::{self, Background};
use crate::grid::{pairwise_sum, Grid, Stencil};
use crate::linalg::{self, c, Mat4, Spinor, I, ZERO};
use crate::spin_algebra::{GammaSet, PhysicalConstants};

/// `iħ Σ_q γ^q ∇_q ψ − m c ψ` at every node.
pub fn dirac_residual(psi: &SpinorField, bg: &Background, k: &PhysicalConstants) -> Result<SpinorField> {
    let gs = bg.gammas();
    let mut out = psi.scaled(c(-k.mass * k.c, 0.0));
    for q in 0..4 {
        let d = geometry::covariant_derivative(psi, bg, q)?;
        let gq = linalg::scale(&gs.gamma[q], c(0.0, k.hbar));
        for (o, v) in out.data_mut().iter_mut().zip(d.data()) {
            let w = linalg::apply(&gq, v);
            for a in 0..4 {
                o[a] += w[a];
            }
        }
    }
    Ok(out)
}

/// A positive- or negative-frequency plane-wave solution on a flat chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub wavevector: [f64; 3],
    /// Signed frequency ω in units of inverse x⁰.
    pub omega: f64,
    pub amplitude: Spinor,
}

impl PlaneWave {
    /// `spin` selects the left-handed seed (1,0) or (0,1); the amplitude is
    /// normalized to `u†u = 1`.
    pub fn new(wavevector: [f64; 3], k: &PhysicalConstants, spin: usize, positive: bool) -> Result<Self> {
        let kappa = k.mass_term();
        if kappa <= 0.0 {
            return Err(Error::InvalidConstants("plane-wave amplitudes need m > 0".into()));
        }
        let [k1, k2, k3] = wavevector;
        let w = (kappa * kappa + k1 * k1 + k2 * k2 + k3 * k3).sqrt();
        let omega = if positive { w } else { -w };
        let ul = match spin {
            0 => [linalg::ONE, ZERO],
            1 => [ZERO, linalg::ONE],
            _ => return Err(Error::BadDirection(spin)),
        };
        // k·σ
        let ks = [[c(k3, 0.0), c(k1, -k2)], [c(k1, k2), c(-k3, 0.0)]];
        let ur = [
            ((omega - ks[0][0]) * ul[0] - ks[0][1] * ul[1]) / kappa,
            (-ks[1][0] * ul[0] + (omega - ks[1][1]) * ul[1]) / kappa,
        ];
        let mut u = [ul[0], ul[1], ur[0], ur[1]];
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut u {
            *z /= norm;
        }
        Ok(Self {
            wavevector,
            omega,
            amplitude: u,
        })
    }

    pub fn value(&self, x: [f64; 4]) -> Spinor {
        let [k1, k2, k3] = self.wavevector;
        let phase = -(self.omega * x[0] - k1 * x[1] - k2 * x[2] - k3 * x[3]);
        let e = C64::from_polar(1.0, phase);
        self.amplitude.map(|z| z * e)
    }

    pub fn field(&self, grid: Grid) -> SpinorField {
        SpinorField::from_fn(grid, |x| self.value(x))
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    /// Step in x⁰.
    pub dt: f64,
    pub steps: usize,
    /// Store every `snapshot_every`-th level (the initial level is always kept).
    pub snapshot_every: usize,
    /// Abort when the L² norm exceeds this multiple of its initial value.
    pub growth_limit: f64,
    /// Reject `dt` above this fraction of [`stability_bound`].
    pub cfl_limit: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: 0.01,
            steps: 100,
            snapshot_every: 1,
            growth_limit: 10.0,
            cfl_limit: 1.0,
        }
    }
}

/// Largest modulus of (8 sin θ − sin 2θ)/6, the spectral radius of the
/// central stencil in units of 1/h.
const CENTRAL_RADIUS: f64 = 1.3722;
/// Extent of the RK4 stability region along the imaginary axis.
const RK4_IMAGINARY_EXTENT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Semi-discrete operator `∂_0 ψ = Σ_μ B_μ ∂_μ ψ + C ψ` per spatial node.
struct EvolutionOperator {
    grid: Grid,
    transport: Vec<[Mat4; 3]>,
    local: Vec<Mat4>,
    stencils: Vec<[Stencil; 3]>,
}

impl EvolutionOperator {
    fn new(grid: &Grid, bg: &Background, k: &PhysicalConstants) -> Result<Self> {
        bg.check_field(grid)?;
        for axis in 1..4 {
            if grid.n[axis] > 1 && !grid.periodic[axis] {
                return Err(Error::InvalidGrid(format!("evolution needs periodic spatial axes; axis {axis} is bounded")));
            }
        }
        let gs = bg.gammas();
        let kappa = k.mass_term();
        let n = grid.len();
        let mut transport = Vec::with_capacity(n);
        let mut local = Vec::with_capacity(n);
        let mut stencils = Vec::with_capacity(n);
        for idx in 0..n {
            let pt = bg.at(grid, idx);
            let e00 = pt.tetrad[0][0];
            if (1..4).any(|mu| pt.tetrad[0][mu] != 0.0) {
                return Err(Error::InvalidGrid("evolution needs Υ_0 along the time axis".into()));
            }
            let inv = c(-1.0 / e00, 0.0);
            let mut b = [linalg::zeros(); 3];
            let mut spatial_a = linalg::zeros();
            for q in 1..4 {
                let g0q = linalg::mul(&gs.gamma[0], &gs.gamma[q]);
                for mu in 1..4 {
                    let e = pt.tetrad[q][mu];
                    if e != 0.0 {
                        b[mu - 1] = linalg::add(&b[mu - 1], &linalg::scale(&g0q, c(e, 0.0)));
                    }
                }
                spatial_a = linalg::add(&spatial_a, &linalg::mul(&g0q, &pt.spin_connection[q]));
            }
            for m in &mut b {
                *m = linalg::scale(m, inv);
            }
            let mass = linalg::scale(&gs.gamma[0], c(0.0, kappa));
            let cm = linalg::add(&linalg::add(&spatial_a, &mass), &pt.spin_connection[0]);
            transport.push(b);
            local.push(linalg::scale(&cm, inv));
            stencils.push([grid.stencil(1, idx), grid.stencil(2, idx), grid.stencil(3, idx)]);
        }
        Ok(Self {
            grid: grid.clone(),
            transport,
            local,
            stencils,
        })
    }

    fn rhs(&self, psi: &[Spinor], out: &mut [Spinor]) {
        for idx in 0..psi.len() {
            let mut v = linalg::apply(&self.local[idx], &psi[idx]);
            for axis in 0..3 {
                if self.grid.n[axis + 1] == 1 {
                    continue;
                }
                let d: Spinor = spinor_derivative(&self.stencils[idx][axis], psi);
                let w = linalg::apply(&self.transport[idx][axis], &d);
                for a in 0..4 {
                    v[a] += w[a];
                }
            }
            out[idx] = v;
        }
    }

    fn radius(&self) -> f64 {
        let inf_norm = |m: &Mat4| m.iter().map(|row| row.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        let mut r: f64 = 0.0;
        for idx in 0..self.local.len() {
            let mut s = inf_norm(&self.local[idx]);
            for axis in 0..3 {
                if self.grid.n[axis + 1] > 1 {
                    s += CENTRAL_RADIUS * inf_norm(&self.transport[idx][axis]) / self.grid.step[axis + 1];
                }
            }
            r = r.max(s);
        }
        r
    }
}

fn spinor_derivative(st: &Stencil, psi: &[Spinor]) -> Spinor {
    std::array::from_fn(|a| st.apply(|k| psi[k][a]))
}

/// Largest stable RK4 step for the semi-discrete Dirac operator on `grid`.
pub fn stability_bound(grid: &Grid, bg: &Background, k: &PhysicalConstants) -> Result<f64> {
    let op = EvolutionOperator::new(&grid.time_level(grid.origin[0]), bg, k)?;
    let r = op.radius();
    Ok(if r > 0.0 { RK4_IMAGINARY_EXTENT / r } else { f64::INFINITY })
}

fn l2_norm(grid: &Grid, psi: &[Spinor]) -> f64 {
    let terms: Vec<f64> = psi
        .iter()
        .enumerate()
        .map(|(i, s)| grid.spatial_weight(i) * s.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    pairwise_sum(&terms).sqrt()
}

/// Integrate the Dirac equation from the single time level of `psi0` with
/// classical RK4 and return the stored snapshots as a field on a grid whose
/// time axis has spacing `dt * snapshot_every`.
pub fn evolve(psi0: &SpinorField, bg: &Background, k: &PhysicalConstants, opts: &EvolveOptions) -> Result<SpinorField> {
    evolve_observed(psi0, bg, k, opts, &mut |_, _, _| {})
}

/// [`evolve`], calling `observer(step, x⁰, level)` for every stored level.
pub fn evolve_observed(
    psi0: &SpinorField,
    bg: &Background,
    k: &PhysicalConstants,
    opts: &EvolveOptions,
    observer: &mut dyn FnMut(usize, f64, &[Spinor]),
) -> Result<SpinorField> {
    let grid = psi0.grid();
    if grid.n[0] != 1 {
        return Err(Error::InvalidGrid("initial data must be a single time level".into()));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) || opts.snapshot_every == 0 {
        return Err(Error::InvalidGrid("time step must be > 0 and snapshot stride >= 1".into()));
    }
    let op = EvolutionOperator::new(grid, bg, k)?;
    let radius = op.radius();
    let bound = if radius > 0.0 { RK4_IMAGINARY_EXTENT / radius } else { f64::INFINITY };
    if opts.dt > opts.cfl_limit * bound {
        return Err(Error::CflViolation {
            dt: opts.dt,
            bound,
            cfl: opts.dt / bound,
            limit: opts.cfl_limit,
        });
    }

    let t0 = grid.origin[0];
    let levels = opts.steps / opts.snapshot_every + 1;
    let traj_grid = if levels == 1 {
        grid.clone()
    } else {
        grid.with_time_axis(levels, t0, opts.dt * opts.snapshot_every as f64)?
    };

    let n = grid.len();
    let mut psi = psi0.data().to_vec();
    let norm0 = l2_norm(grid, &psi);
    let mut data = Vec::with_capacity(levels * n);
    data.extend_from_slice(&psi);
    observer(0, t0, &psi);

    let dt = c(opts.dt, 0.0);
    let half = c(0.5 * opts.dt, 0.0);
    let mut k1 = vec![[ZERO; 4]; n];
    let mut k2 = vec![[ZERO; 4]; n];
    let mut k3 = vec![[ZERO; 4]; n];
    let mut k4 = vec![[ZERO; 4]; n];
    let mut tmp = vec![[ZERO; 4]; n];
    let axpy = |out: &mut [Spinor], x: &[Spinor], a: C64, y: &[Spinor]| {
        for i in 0..out.len() {
            for s in 0..4 {
                out[i][s] = x[i][s] + a * y[i][s];
            }
        }
    };
    for step in 1..=opts.steps {
        op.rhs(&psi, &mut k1);
        axpy(&mut tmp, &psi, half, &k1);
        op.rhs(&tmp, &mut k2);
        axpy(&mut tmp, &psi, half, &k2);
        op.rhs(&tmp, &mut k3);
        axpy(&mut tmp, &psi, dt, &k3);
        op.rhs(&tmp, &mut k4);
        let sixth = opts.dt / 6.0;
        for i in 0..n {
            for s in 0..4 {
                psi[i][s] += (k1[i][s] + (k2[i][s] + k3[i][s]) * 2.0 + k4[i][s]) * sixth;
            }
        }
        let time = t0 + step as f64 * opts.dt;
        let norm = l2_norm(grid, &psi);
        if !norm.is_finite() || (norm0 > 0.0 && norm > opts.growth_limit * norm0) {
            return Err(Error::Instability {
                step,
                time,
                growth: if norm0 > 0.0 { norm / norm0 } else { f64::INFINITY },
                limit: opts.growth_limit,
            });
        }
        if step % opts.snapshot_every == 0 {
            data.extend_from_slice(&psi);
            observer(step, time, &psi);
        }
    }
    SpinorField::from_data(traj_grid, data)
}

/// One sample of a trajectory: time, grid index, spinor components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotRecord {
    pub time: f64,
    pub index: usize,
    pub components: [(f64, f64); 4],
}

/// All samples of a trajectory in storage order.
pub fn snapshot_records(traj: &SpinorField) -> impl Iterator<Item = SnapshotRecord> + '_ {
    let grid = traj.grid();
    traj.data().iter().enumerate().map(move |(idx, s)| SnapshotRecord {
        time: grid.point(idx)[0],
        index: grid.spatial_index(idx),
        components: s.map(|z| (z.re, z.im)),
    })
}

/// `J^q(φ, ψ) = c conj(φ)ᵀ Dᵀ γ^q ψ` for single spinors.
pub fn pair_current_value(gs: &GammaSet, k: &PhysicalConstants, phi: &Spinor, psi: &Spinor) -> [C64; 4] {
    let dt = linalg::transpose(&gs.dirac_form);
    std::array::from_fn(|q| {
        let m = linalg::mul(&dt, &gs.gamma[q]);
        let v = linalg::apply(&m, psi);
        let s: C64 = (0..4).map(|a| phi[a].conj() * v[a]).sum();
        s * k.c
    })
}

pub fn current_value(gs: &GammaSet, k: &PhysicalConstants, psi: &Spinor) -> [C64; 4] {
    pair_current_value(gs, k, psi, psi)
}

/// The Dirac current of ψ at every node.
pub fn current(psi: &SpinorField, gs: &GammaSet, k: &PhysicalConstants) -> CurrentField {
    let data = psi.data().iter().map(|s| current_value(gs, k, s)).collect();
    CurrentField::new(psi.grid().clone(), data)
}

/// The pair current J(φ, ψ) at every node.
pub fn pair_current(phi: &SpinorField, psi: &SpinorField, gs: &GammaSet, k: &PhysicalConstants) -> Result<CurrentField> {
    phi.check_same_grid(psi)?;
    let data = phi
        .data()
        .iter()
        .zip(psi.data())
        .map(|(a, b)| pair_current_value(gs, k, a, b))
        .collect();
    Ok(CurrentField::new(psi.grid().clone(), data))
}

/// `g(J, J) = η_pq J^p J^q` for frame components.
pub fn current_norm_value(gs: &GammaSet, j: &[C64; 4]) -> C64 {
    let mut s = ZERO;
    for p in 0..4 {
        for q in 0..4 {
            if gs.metric[p][q] != 0.0 {
                s += j[p] * j[q] * gs.metric[p][q];
            }
        }
    }
    s
}

pub fn current_norm(j: &CurrentField, gs: &GammaSet) -> Vec<C64> {
    j.data().iter().map(|v| current_norm_value(gs, v)).collect()
}

/// g(J, J) written directly in the spinor components of the chiral frame.
pub fn closed_form_norm(psi: &Spinor, k: &PhysicalConstants) -> C64 {
    let [p1, p2, p3, p4] = *psi;
    let s = p1 * p1.conj() * p3 * p3.conj()
        + p2 * p2.conj() * p4 * p4.conj()
        + p1 * p2.conj() * p4 * p3.conj()
        + p2 * p1.conj() * p3 * p4.conj();
    s * (4.0 * k.c * k.c)
}

/// Time-likeness diagnostics over a set of spinor values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimelikeReport {
    pub samples: usize,
    pub min_norm: f64,
    pub min_j0: f64,
    /// Largest |closed form − direct| / max((J⁰)², |direct|).
    pub closed_form_rel_diff: f64,
    /// Largest imaginary part of any J^q or g(J, J).
    pub max_imaginary: f64,
}

impl TimelikeReport {
    pub fn is_future_timelike(&self, tol: f64) -> bool {
        self.min_norm >= -tol && self.min_j0 >= 0.0
    }
}

pub fn timelike_report<'a>(
    spinors: impl IntoIterator<Item = &'a Spinor>,
    gs: &GammaSet,
    k: &PhysicalConstants,
) -> TimelikeReport {
    let mut r = TimelikeReport {
        samples: 0,
        min_norm: f64::INFINITY,
        min_j0: f64::INFINITY,
        closed_form_rel_diff: 0.0,
        max_imaginary: 0.0,
    };
    for psi in spinors {
        let j = current_value(gs, k, psi);
        let direct = current_norm_value(gs, &j);
        let closed = closed_form_norm(psi, k);
        // g(J, J) is a difference of squares; compare on the scale of (J⁰)².
        let scale = (j[0].re * j[0].re).max(direct.norm()).max(f64::MIN_POSITIVE);
        r.samples += 1;
        r.min_norm = r.min_norm.min(direct.re);
        r.min_j0 = r.min_j0.min(j[0].re);
        r.closed_form_rel_diff = r.closed_form_rel_diff.max((closed - direct).norm() / scale);
        let imag = j.iter().chain(std::iter::once(&direct)).fold(0.0f64, |m, z| m.max(z.im.abs()));
        r.max_imaginary = r.max_imaginary.max(imag);
    }
    r
}

/// `div J = (1/√−g) ∂_i (√−g Υ_q^i J^q)` at every node of the current's grid.
/// Time derivatives need a trajectory with at least five levels.
pub fn divergence(j: &CurrentField, bg: &Background) -> Result<Vec<C64>> {
    let grid = j.grid();
    bg.check_field(grid)?;
    let flux: Vec<[C64; 4]> = (0..grid.len())
        .map(|idx| {
            let pt = bg.at(grid, idx);
            let jq = j.at(idx);
            std::array::from_fn(|i| (0..4).map(|q| jq[q] * pt.tetrad[q][i]).sum::<C64>() * pt.volume_factor)
        })
        .collect();
    Ok((0..grid.len())
        .map(|idx| {
            let s: C64 = (0..4).map(|i| grid.stencil(i, idx).apply(|n| flux[n][i])).sum();
            s / bg.at(grid, idx).volume_factor
        })
        .collect())
}

/// A box of node indices `lo[a] .. hi[a]` along every axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub lo: [usize; 4],
    pub hi: [usize; 4],
}

impl Region {
    pub fn all(grid: &Grid) -> Self {
        Self {
            lo: [0; 4],
            hi: grid.n,
        }
    }

    fn contains(&self, m: [usize; 4]) -> bool {
        (0..4).all(|a| self.lo[a] <= m[a] && m[a] < self.hi[a])
    }

    /// Trapezoidal weight restricted to the region; full periodic axes keep
    /// uniform weights.
    fn axis_weight(&self, grid: &Grid, axis: usize, i: usize) -> f64 {
        let full = self.lo[axis] == 0 && self.hi[axis] == grid.n[axis];
        if grid.n[axis] == 1 {
            1.0
        } else if full && grid.periodic[axis] {
            grid.step[axis]
        } else if i == self.lo[axis] || i + 1 == self.hi[axis] {
            0.5 * grid.step[axis]
        } else {
            grid.step[axis]
        }
    }
}

/// The action integral over `region`, returned complex.
pub fn action_value(psi: &SpinorField, bg: &Background, k: &PhysicalConstants, region: &Region) -> Result<C64> {
    let grid = psi.grid();
    for a in 0..4 {
        if region.lo[a] >= region.hi[a] || region.hi[a] > grid.n[a] {
            return Err(Error::InvalidGrid(format!("region is empty or exceeds the grid along axis {a}")));
        }
    }
    let gs = bg.gammas();
    let conj_psi = psi.conjugate();
    let mut grad = Vec::with_capacity(4);
    let mut grad_conj = Vec::with_capacity(4);
    for q in 0..4 {
        grad.push(geometry::covariant_derivative(psi, bg, q)?);
        grad_conj.push(geometry::covariant_derivative_conjugate(&conj_psi, bg, q)?);
    }
    // Dᵀγ^q contracts conj(ψ) on the left and ψ on the right.
    let dt = linalg::transpose(&gs.dirac_form);
    let dg: Vec<Mat4> = (0..4).map(|q| linalg::mul(&dt, &gs.gamma[q])).collect();

    let mut terms = Vec::new();
    for idx in 0..grid.len() {
        let m = grid.multi_index(idx);
        if !region.contains(m) {
            continue;
        }
        let w: f64 = (0..4).map(|a| region.axis_weight(grid, a, m[a])).product();
        let p = psi.at(idx);
        let pc = conj_psi.at(idx);
        let mut kinetic = ZERO;
        for q in 0..4 {
            let gp = linalg::apply(&dg[q], &grad[q].data()[idx]);
            let gpsi = linalg::apply(&dg[q], p);
            let dpc = grad_conj[q].at(idx);
            for a in 0..4 {
                kinetic += pc[a] * gp[a] - dpc[a] * gpsi[a];
            }
        }
        let dp = linalg::apply(&dt, p);
        let mass: C64 = (0..4).map(|a| pc[a] * dp[a]).sum();
        let density = I * k.hbar * kinetic * 0.5 - mass * (k.mass * k.c);
        terms.push(density * (w * bg.at(grid, idx).volume_factor));
    }
    Ok(pairwise_sum(&terms))
}
