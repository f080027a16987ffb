//! Metric charts, the canonical tetrad, the Levi-Civita connection
//! (Γ, A, Ā) and covariant derivatives of spinor fields.
//!
//! The connection is assembled from the sampled metric: Christoffel symbols
//! from fourth-order differences of g, the frame connection form
//! ω_q^p_r = θ^p_ν (Υ_q ⋅ ∂ Υ_r^ν + Γ^ν_{μλ} Υ_q^μ Υ_r^λ), and the spinor
//! coefficients A_q = ¼ ω_{q,pr} γ^p γ^r. Ā is the complex conjugate of A.
//! The construction is validated only through the concordance residuals
//! and the torsion check below.
//!
//! Supported charts are rectilinear Minkowski and static diagonal metrics.
//! Geometry is time independent, so it is stored once per spatial node.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::SpinorField;
use crate::grid::Grid;
use crate::linalg::{self, c, Mat4, RealMat4, Spinor, ZERO};
use crate::pairing::Slice;
use crate::spin_algebra::GammaSet;

/// A scalar function of one spatial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `value + slope * x^axis`
    Linear { value: f64, slope: f64, axis: usize },
    /// `value + amplitude * sin(wavenumber * x^axis)`
    Sine {
        value: f64,
        amplitude: f64,
        wavenumber: f64,
        axis: usize,
    },
}

impl Profile {
    pub fn eval(&self, x: [f64; 4]) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Linear { value, slope, axis } => value + slope * x[axis],
            Profile::Sine {
                value,
                amplitude,
                wavenumber,
                axis,
            } => value + amplitude * (wavenumber * x[axis]).sin(),
        }
    }

    fn axis(&self) -> Option<usize> {
        match *self {
            Profile::Constant { .. } => None,
            Profile::Linear { axis, .. } | Profile::Sine { axis, .. } => Some(axis),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MetricModel {
    Minkowski,
    /// `g = diag(g00, g11, g22, g33)`, each a function of the spatial
    /// coordinates only. Signs are part of the profile values.
    StaticDiagonal { diagonal: [Profile; 4] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartFamily {
    Flat,
    StaticDiagonal,
}

/// A coordinate box with a metric field of signature (+,−,−,−).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChart {
    grid: Grid,
    model: MetricModel,
}

impl MetricChart {
    pub fn new(grid: Grid, model: MetricModel) -> Result<Self> {
        if let MetricModel::StaticDiagonal { diagonal } = &model {
            for p in diagonal {
                if let Some(axis) = p.axis() {
                    if !(1..=3).contains(&axis) {
                        return Err(Error::InvalidGrid(format!(
                            "static metric profiles depend on spatial axes 1..=3, got axis {axis}"
                        )));
                    }
                }
            }
        }
        let chart = Self { grid, model };
        let spatial = chart.spatial_grid();
        for idx in 0..spatial.len() {
            chart.check_signature(spatial.point(idx))?;
        }
        Ok(chart)
    }

    pub fn minkowski(grid: Grid) -> Result<Self> {
        Self::new(grid, MetricModel::Minkowski)
    }

    /// `g = diag(f, −1, −1, −1)` with `f = 1 + eps x¹`.
    pub fn linear_lapse(grid: Grid, eps: f64) -> Result<Self> {
        Self::new(
            grid,
            MetricModel::StaticDiagonal {
                diagonal: [
                    Profile::Linear {
                        value: 1.0,
                        slope: eps,
                        axis: 1,
                    },
                    Profile::Constant { value: -1.0 },
                    Profile::Constant { value: -1.0 },
                    Profile::Constant { value: -1.0 },
                ],
            },
        )
    }

    /// `g = diag(f, −1, −1, −1)` with `f = 1 + eps sin(k x¹)`.
    pub fn sine_lapse(grid: Grid, eps: f64, wavenumber: f64) -> Result<Self> {
        Self::new(
            grid,
            MetricModel::StaticDiagonal {
                diagonal: [
                    Profile::Sine {
                        value: 1.0,
                        amplitude: eps,
                        wavenumber,
                        axis: 1,
                    },
                    Profile::Constant { value: -1.0 },
                    Profile::Constant { value: -1.0 },
                    Profile::Constant { value: -1.0 },
                ],
            },
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn model(&self) -> &MetricModel {
        &self.model
    }

    pub fn family(&self) -> ChartFamily {
        match self.model {
            MetricModel::Minkowski => ChartFamily::Flat,
            MetricModel::StaticDiagonal { .. } => ChartFamily::StaticDiagonal,
        }
    }

    /// One time level of the chart grid; geometry lives here.
    pub fn spatial_grid(&self) -> Grid {
        self.grid.time_level(self.grid.origin[0])
    }

    /// `g_ij` at a point.
    pub fn metric_at(&self, x: [f64; 4]) -> RealMat4 {
        let mut g = [[0.0; 4]; 4];
        match &self.model {
            MetricModel::Minkowski => {
                g[0][0] = 1.0;
                for k in 1..4 {
                    g[k][k] = -1.0;
                }
            }
            MetricModel::StaticDiagonal { diagonal } => {
                for q in 0..4 {
                    g[q][q] = diagonal[q].eval(x);
                }
            }
        }
        g
    }

    fn check_signature(&self, x: [f64; 4]) -> Result<()> {
        let g = self.metric_at(x);
        for q in 0..4 {
            if !g[q][q].is_finite() || g[q][q] == 0.0 {
                return Err(Error::SingularMetric { point: x });
            }
        }
        if g[0][0] <= 0.0 || (1..4).any(|k| g[k][k] >= 0.0) {
            return Err(Error::NonLorentzian {
                point: x,
                reason: format!("diagonal ({}, {}, {}, {}) is not (+,−,−,−)", g[0][0], g[1][1], g[2][2], g[3][3]),
            });
        }
        if linalg::det_real(&g) >= 0.0 {
            return Err(Error::NonLorentzian {
                point: x,
                reason: "det g >= 0".into(),
            });
        }
        Ok(())
    }
}

/// `sqrt(−det g)` at a point of a Lorentzian chart.
pub fn volume_element(chart: &MetricChart, x: [f64; 4]) -> Result<f64> {
    chart.check_signature(x)?;
    Ok((-linalg::det_real(&chart.metric_at(x))).sqrt())
}

/// `sqrt(−det g₃)` of the metric induced on `slice` at the spatial
/// coordinates of `x` (its time coordinate is ignored).
pub fn area_element(chart: &MetricChart, slice: &Slice, x: [f64; 4]) -> Result<f64> {
    let p = slice.embed(x);
    let g = chart.metric_at(p);
    let tangents = slice.tangents();
    let mut g3 = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            g3[a][b] = (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| g[i][j] * tangents[a][i] * tangents[b][j])
                .sum();
        }
    }
    // Negative definite iff the leading minors alternate in sign.
    let m1 = g3[0][0];
    let m2 = g3[0][0] * g3[1][1] - g3[0][1] * g3[1][0];
    let m3 = g3[0][0] * (g3[1][1] * g3[2][2] - g3[1][2] * g3[2][1])
        - g3[0][1] * (g3[1][0] * g3[2][2] - g3[1][2] * g3[2][0])
        + g3[0][2] * (g3[1][0] * g3[2][1] - g3[1][1] * g3[2][0]);
    if !(m1 < 0.0 && m2 > 0.0 && m3 < 0.0) {
        return Err(Error::NotSpacelike(format!("induced metric is not negative definite at {p:?}")));
    }
    Ok((-m3).sqrt())
}

/// Geometric data at one spatial node.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGeometry {
    pub metric: RealMat4,
    pub inverse_metric: RealMat4,
    /// `tetrad[q][i]` = Υ_q^i.
    pub tetrad: RealMat4,
    /// `cotetrad[q][i]` = θ^q_i, the dual frame.
    pub cotetrad: RealMat4,
    /// `christoffel[k][i][j]` = Γ^k_{ij}.
    pub christoffel: [[[f64; 4]; 4]; 4],
    /// `connection_form[q][p][r]` = ω_q^p_r along frame direction q.
    pub connection_form: [[[f64; 4]; 4]; 4],
    /// Spinor connection coefficients A_q as matrices `A[q][a][b]`.
    pub spin_connection: [Mat4; 4],
    /// `sqrt(−det g)`.
    pub volume_factor: f64,
}

/// A chart together with its frame pair and Levi-Civita connection.
#[derive(Debug, Clone)]
pub struct Background {
    chart: MetricChart,
    gammas: GammaSet,
    points: Vec<PointGeometry>,
}

/// Build the tetrad and the Levi-Civita connection of a chart.
pub fn build_background(chart: &MetricChart, gs: &GammaSet) -> Result<Background> {
    let grid = chart.spatial_grid();
    let n = grid.len();
    let mut metric = Vec::with_capacity(n);
    let mut tetrad = Vec::with_capacity(n);
    for idx in 0..n {
        let x = grid.point(idx);
        chart.check_signature(x)?;
        let g = chart.metric_at(x);
        let mut e = [[0.0; 4]; 4];
        for q in 0..4 {
            e[q][q] = 1.0 / g[q][q].abs().sqrt();
        }
        metric.push(g);
        tetrad.push(e);
    }

    let eta = gs.metric;
    let mut points = Vec::with_capacity(n);
    for idx in 0..n {
        let g = metric[idx];
        let g_inv = linalg::inverse_real(&g).ok_or(Error::SingularMetric { point: grid.point(idx) })?;
        let e = tetrad[idx];
        let mut theta = [[0.0; 4]; 4];
        for q in 0..4 {
            theta[q][q] = 1.0 / e[q][q];
        }

        // dg[mu][i][j] = ∂_mu g_ij; the time derivative vanishes.
        let mut dg = [[[0.0; 4]; 4]; 4];
        let mut de = [[[0.0; 4]; 4]; 4];
        for mu in 1..4 {
            let st = grid.stencil(mu, idx);
            for i in 0..4 {
                for j in 0..4 {
                    dg[mu][i][j] = st.apply(|k| metric[k][i][j]);
                    de[mu][i][j] = st.apply(|k| tetrad[k][i][j]);
                }
            }
        }

        let mut gamma = [[[0.0; 4]; 4]; 4];
        for k in 0..4 {
            for i in 0..4 {
                for j in i..4 {
                    let mut s = 0.0;
                    for l in 0..4 {
                        s += g_inv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j]);
                    }
                    gamma[k][i][j] = 0.5 * s;
                    gamma[k][j][i] = 0.5 * s;
                }
            }
        }

        // Coordinate-direction connection form, then frame directions.
        let mut omega_coord = [[[0.0; 4]; 4]; 4];
        for mu in 0..4 {
            for p in 0..4 {
                for r in 0..4 {
                    let mut s = 0.0;
                    for nu in 0..4 {
                        let mut cov = de[mu][r][nu];
                        for lam in 0..4 {
                            cov += gamma[nu][mu][lam] * e[r][lam];
                        }
                        s += theta[p][nu] * cov;
                    }
                    omega_coord[mu][p][r] = s;
                }
            }
        }
        let mut omega = [[[0.0; 4]; 4]; 4];
        for q in 0..4 {
            for p in 0..4 {
                for r in 0..4 {
                    omega[q][p][r] = (0..4).map(|mu| e[q][mu] * omega_coord[mu][p][r]).sum();
                }
            }
        }

        let mut spin = [linalg::zeros(); 4];
        for q in 0..4 {
            let mut a = linalg::zeros();
            for p in 0..4 {
                for r in 0..4 {
                    let lowered: f64 = (0..4).map(|s| eta[p][s] * omega[q][s][r]).sum();
                    if lowered != 0.0 {
                        let prod = linalg::mul(&gs.gamma[p], &gs.gamma[r]);
                        a = linalg::add(&a, &linalg::scale(&prod, c(0.25 * lowered, 0.0)));
                    }
                }
            }
            spin[q] = a;
        }

        points.push(PointGeometry {
            metric: g,
            inverse_metric: g_inv,
            tetrad: e,
            cotetrad: theta,
            christoffel: gamma,
            connection_form: omega,
            spin_connection: spin,
            volume_factor: (-linalg::det_real(&g)).sqrt(),
        });
    }

    Ok(Background {
        chart: chart.clone(),
        gammas: gs.clone(),
        points,
    })
}

/// Max-norm covariant derivatives of the five basic fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcordanceResiduals {
    pub spin_metric: f64,
    pub gamma: f64,
    pub metric: f64,
    pub chirality: f64,
    pub dirac_form: f64,
}

impl ConcordanceResiduals {
    /// The defining conditions ∇d = 0, ∇γ = 0.
    pub fn defining(&self) -> f64 {
        self.spin_metric.max(self.gamma)
    }

    /// The implied conditions ∇g = 0, ∇H = 0, ∇D = 0.
    pub fn implied(&self) -> f64 {
        self.metric.max(self.chirality).max(self.dirac_form)
    }

    pub fn as_array(&self) -> [(&'static str, f64); 5] {
        [
            ("spin_metric", self.spin_metric),
            ("gamma", self.gamma),
            ("metric", self.metric),
            ("chirality", self.chirality),
            ("dirac_form", self.dirac_form),
        ]
    }
}

impl Background {
    pub fn chart(&self) -> &MetricChart {
        &self.chart
    }

    pub fn gammas(&self) -> &GammaSet {
        &self.gammas
    }

    pub fn points(&self) -> &[PointGeometry] {
        &self.points
    }

    /// Geometry at the spatial node of a (spacetime) node index of a field
    /// grid sharing this chart's spatial nodes.
    pub fn at(&self, field_grid: &Grid, idx: usize) -> &PointGeometry {
        &self.points[field_grid.spatial_index(idx)]
    }

    pub fn is_flat(&self) -> bool {
        self.chart.family() == ChartFamily::Flat
    }

    /// The same background with A (and so Ā) replaced by zero.
    pub fn without_spin_connection(mut self) -> Self {
        for p in &mut self.points {
            p.spin_connection = [linalg::zeros(); 4];
        }
        self
    }

    pub fn torsion_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for p in &self.points {
            for k in 0..4 {
                for i in 0..4 {
                    for j in 0..4 {
                        r = r.max((p.christoffel[k][i][j] - p.christoffel[k][j][i]).abs());
                    }
                }
            }
        }
        r
    }

    /// max |Υ_p^i g_ij Υ_q^j − η_pq|.
    pub fn tetrad_orthonormality_residual(&self) -> f64 {
        let eta = self.gammas.metric;
        let mut r: f64 = 0.0;
        for pt in &self.points {
            for p in 0..4 {
                for q in 0..4 {
                    let mut s = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            s += pt.tetrad[p][i] * pt.metric[i][j] * pt.tetrad[q][j];
                        }
                    }
                    r = r.max((s - eta[p][q]).abs());
                }
            }
        }
        r
    }

    pub(crate) fn check_field(&self, field: &Grid) -> Result<()> {
        if !field.same_space(self.chart.grid()) {
            return Err(Error::GridMismatch("field is not sampled on the background's spatial nodes".into()));
        }
        Ok(())
    }
}

/// Covariant derivatives of d, γ, g, H and D along every frame direction,
/// maximised over the chart.
///
/// In the canonical frame pair all five fields have constant components,
/// so each derivative reduces to its connection terms; the finite-difference
/// error enters through ω and hence through A.
pub fn concordance_residuals(bg: &Background, gs: &GammaSet) -> ConcordanceResiduals {
    let mut out = ConcordanceResiduals {
        spin_metric: 0.0,
        gamma: 0.0,
        metric: 0.0,
        chirality: 0.0,
        dirac_form: 0.0,
    };
    let eta = gs.metric;
    for pt in &bg.points {
        for q in 0..4 {
            let a = &pt.spin_connection[q];
            let at = linalg::transpose(a);
            let omega = &pt.connection_form[q];

            // ∇d_{ab} = −A^c_a d_cb − d_ac A^c_b
            let nd = linalg::add(&linalg::mul(&at, &gs.spin_metric), &linalg::mul(&gs.spin_metric, a));
            out.spin_metric = out.spin_metric.max(linalg::max_abs(&nd));

            // ∇γ^p = [A, γ^p] + ω^p_r γ^r
            for p in 0..4 {
                let mut m = linalg::commutator(a, &gs.gamma[p]);
                for r in 0..4 {
                    if omega[p][r] != 0.0 {
                        m = linalg::add(&m, &linalg::scale(&gs.gamma[r], c(omega[p][r], 0.0)));
                    }
                }
                out.gamma = out.gamma.max(linalg::max_abs(&m));
            }

            // ∇g_pr = −ω^s_p η_sr − ω^s_r η_ps
            for p in 0..4 {
                for r in 0..4 {
                    let v: f64 = (0..4).map(|s| omega[s][p] * eta[s][r] + omega[s][r] * eta[p][s]).sum();
                    out.metric = out.metric.max(v.abs());
                }
            }

            let nh = linalg::commutator(a, &gs.chirality);
            out.chirality = out.chirality.max(linalg::max_abs(&nh));

            // ∇D_{aā} = −A^c_a D_cā − D_{a c̄} conj(A)^c̄_ā
            let nd = linalg::add(&linalg::mul(&at, &gs.dirac_form), &linalg::mul(&gs.dirac_form, &linalg::conj(a)));
            out.dirac_form = out.dirac_form.max(linalg::max_abs(&nd));
        }
    }
    out
}

fn derivative_with(field: &SpinorField, bg: &Background, q: usize, conjugate_connection: bool) -> Result<SpinorField> {
    if q > 3 {
        return Err(Error::BadDirection(q));
    }
    let grid = field.grid();
    bg.check_field(grid)?;
    let data = field.data();
    let mut out = Vec::with_capacity(data.len());
    for idx in 0..data.len() {
        let pt = bg.at(grid, idx);
        let mut v: Spinor = [ZERO; 4];
        for mu in 0..4 {
            let e = pt.tetrad[q][mu];
            if e == 0.0 {
                continue;
            }
            let st = grid.stencil(mu, idx);
            for (a, va) in v.iter_mut().enumerate() {
                *va += st.apply(|k| data[k][a]) * e;
            }
        }
        let a = if conjugate_connection {
            linalg::conj(&pt.spin_connection[q])
        } else {
            pt.spin_connection[q]
        };
        let av = linalg::apply(&a, &data[idx]);
        for k in 0..4 {
            v[k] += av[k];
        }
        out.push(v);
    }
    SpinorField::from_data(grid.clone(), out)
}

/// ∇_q ψ = Υ_q^μ ∂_μ ψ + A_q ψ along frame direction `q`.
pub fn covariant_derivative(field: &SpinorField, bg: &Background, q: usize) -> Result<SpinorField> {
    derivative_with(field, bg, q, false)
}

/// Covariant derivative of a conjugate-spinor field, which uses Ā.
pub fn covariant_derivative_conjugate(field: &SpinorField, bg: &Background, q: usize) -> Result<SpinorField> {
    derivative_with(field, bg, q, true)
}

/// max over q of |conj(∇_q ψ) − ∇_q conj(ψ)|.
pub fn realness_residual(field: &SpinorField, bg: &Background) -> Result<f64> {
    let conj_field = field.conjugate();
    let mut r: f64 = 0.0;
    for q in 0..4 {
        let lhs = covariant_derivative(field, bg, q)?.conjugate();
        let rhs = covariant_derivative_conjugate(&conj_field, bg, q)?;
        r = r.max(lhs.max_abs_diff(&rhs));
    }
    Ok(r)
}
